//! Every discrepancy kind on the same pair of series, and the self
//! comparison that the debiased kinds bring to zero.

use tsdiv::{evaluate, CostKind, DivergenceKind, TimeSeries};

fn main() -> tsdiv::Result<()> {
    let x = TimeSeries::univariate(&[0.0, 0.4, 1.0, 0.7, 0.1])?;
    let y = TimeSeries::univariate(&[0.1, 0.9, 0.8, 0.0])?;
    let gamma = 1.0;

    println!("{:<14} {:>10} {:>12} {:>12}", "kind", "cost", "D(x, y)", "D(x, x)");
    for cost in CostKind::ALL {
        for name in DivergenceKind::NAMES {
            let kind = DivergenceKind::from_name(name, gamma)?;
            if kind == DivergenceKind::Euclidean {
                continue;
            }
            let dxy = evaluate(kind, &x, &y, cost)?;
            let dxx = evaluate(kind, &x, &x, cost)?;
            println!("{:<14} {:>10} {:>12.6} {:>12.6}", name, cost.name(), dxy, dxx);
        }
    }
    Ok(())
}
