//! Brute-force enumeration of every alignment, checked against the
//! dynamic program.

use tsdiv::dp::{expected_alignment, soft_dtw_forward};
use tsdiv::oracle::oracle_stats;
use tsdiv::{build_cost, CostKind, TimeSeries};

fn main() -> tsdiv::Result<()> {
    let x = TimeSeries::univariate(&[0.0, 1.0, 0.5, 0.2])?;
    let y = TimeSeries::univariate(&[0.1, 0.8, 0.3])?;
    let c = build_cost(CostKind::SquaredEuclidean, &x, &y)?;
    for gamma in [0.1, 1.0, 10.0] {
        let s = oracle_stats(&c, gamma)?;
        let (v, t) = soft_dtw_forward(&c, gamma)?;
        let e = expected_alignment(&t);
        let gap = (&s.expected_alignment - e.values()).iter().fold(0.0f64, |m, d| m.max(d.abs()));
        println!(
            "gamma = {gamma:>4}: {} paths, sdtw oracle {:+.12} dp {:+.12}, max |dE| = {gap:.1e}, entropy = {:.4}",
            s.path_count, s.sdtw_value, v, s.entropy
        );
    }
    Ok(())
}
