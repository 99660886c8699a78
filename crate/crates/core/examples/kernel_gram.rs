//! Smallest eigenvalue of the alignment-kernel Gram matrix over random
//! series.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsdiv::verify::{gram_asymmetry, gram_matrix, min_eigenvalue};
use tsdiv::{CostKind, TimeSeries};

fn main() -> tsdiv::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let series: Vec<TimeSeries> = (0..30)
        .map(|_| {
            let len = rng.gen_range(2..=20);
            let v: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            TimeSeries::univariate(&v)
        })
        .collect::<tsdiv::Result<_>>()?;
    for cost in [CostKind::LogAugmented, CostKind::SquaredEuclidean] {
        for gamma in [0.5, 1.0, 2.0] {
            let k = gram_matrix(&series, cost, gamma)?;
            println!(
                "{:<9} gamma = {gamma}: min eigenvalue {:+.3e}, asymmetry {:.1e}",
                cost.name(),
                min_eigenvalue(&k),
                gram_asymmetry(&k)
            );
        }
    }
    Ok(())
}
