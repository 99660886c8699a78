//! Morphing between two shifted bumps by weighted averaging.

use tsdiv::barycenter::InitScheme;
use tsdiv::{interpolate, CostKind, DivergenceKind, TimeSeries};

fn bump(center: f64, len: usize) -> tsdiv::Result<TimeSeries> {
    let v: Vec<f64> = (0..len).map(|t| (-(t as f64 - center).powi(2) / 4.0).exp()).collect();
    TimeSeries::univariate(&v)
}

fn main() -> tsdiv::Result<()> {
    let len = 24;
    let (a, b) = (bump(6.0, len)?, bump(17.0, len)?);
    let kind = DivergenceKind::SdtwDiv { gamma: 1.0 };
    for pi in [1.0, 0.75, 0.5, 0.25, 0.0] {
        let z = interpolate(&a, &b, pi, kind, CostKind::SquaredEuclidean, None, InitScheme::WarmStartBiased, 100)?;
        let argmax = z
            .series
            .values()
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        println!("pi = {pi:.2}: peak at t = {:>2} (height {:.3})", argmax.0, argmax.1);
    }
    Ok(())
}
