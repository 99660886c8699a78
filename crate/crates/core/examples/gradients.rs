//! Analytic derivatives against central finite differences.

use tsdiv::gradcheck::{run_suite, DEFAULT_STEP};
use tsdiv::{CostKind, TimeSeries};

fn main() -> tsdiv::Result<()> {
    let x = TimeSeries::univariate(&[0.2, -0.5, 0.9, 0.3, -0.1])?;
    let y = TimeSeries::univariate(&[0.0, 0.6, -0.4, 0.8])?;
    for cost in CostKind::ALL {
        for check in run_suite(&x, &y, cost, 0.5, DEFAULT_STEP)? {
            println!("{:<34} max error {:.2e}", check.name, check.max_abs_err);
        }
    }
    Ok(())
}
