//! Barycenter of one class of a synthetic dataset under the soft-DTW
//! divergence, compared with the plain pointwise mean.

use tsdiv::barycenter::{euclidean_mean, frechet_mean, AveragingProblem};
use tsdiv::synthetic::control_charts;
use tsdiv::{evaluate, CostKind, DivergenceKind};

fn main() -> tsdiv::Result<()> {
    let data = control_charts(8, 40, 3)?;
    let cyclic: Vec<_> = data
        .series
        .iter()
        .zip(&data.labels)
        .filter(|(_, &l)| l == 2)
        .map(|(s, _)| s.clone())
        .collect();

    let kind = DivergenceKind::SdtwDiv { gamma: 10.0 };
    let cost = CostKind::SquaredEuclidean;
    let problem = AveragingProblem::new(cyclic.clone(), kind, cost);
    let bary = frechet_mean(&problem, 100)?;

    let mean = euclidean_mean(&cyclic, &vec![1.0; cyclic.len()], 40)?;
    let total = |z: &tsdiv::TimeSeries| -> tsdiv::Result<f64> {
        cyclic.iter().map(|y| evaluate(kind, z, y, cost)).sum()
    };
    println!("objective at pointwise mean: {:.4}", total(&mean)?);
    println!("objective at barycenter:     {:.4}", total(&bary.series)?);
    println!(
        "{} iterations ({:?}); warm start ran {} steps",
        bary.iterations,
        bary.termination,
        bary.warm_start_trace.as_ref().map_or(0, |t| t.len().saturating_sub(1))
    );
    let first: Vec<String> = bary.series.values().iter().take(8).map(|v| format!("{v:.2}")).collect();
    println!("first steps: {}", first.join(", "));
    Ok(())
}
