//! Nearest-neighbour and nearest-centroid classification on synthetic
//! control charts, with and without cross-validated temperature.

use tsdiv::classify::{format_accuracy, run_protocol, GammaChoice, Method};
use tsdiv::synthetic::control_charts;
use tsdiv::{CostKind, DivergenceKind};

fn main() -> tsdiv::Result<()> {
    let train = control_charts(5, 40, 11)?;
    let test = control_charts(5, 40, 12)?;
    let cost = CostKind::SquaredEuclidean;
    let runs = [
        (DivergenceKind::Euclidean, Method::Knn { k: 1 }, GammaChoice::Fixed(1.0)),
        (DivergenceKind::Dtw, Method::Knn { k: 1 }, GammaChoice::Fixed(1.0)),
        (DivergenceKind::SdtwDiv { gamma: 1.0 }, Method::Knn { k: 1 }, GammaChoice::Fixed(1.0)),
        (
            DivergenceKind::SdtwDiv { gamma: 1.0 },
            Method::Knn { k: 3 },
            GammaChoice::CrossValidate { grid: vec![0.1, 1.0, 10.0, 100.0], splits: 3 },
        ),
        (DivergenceKind::SdtwDiv { gamma: 10.0 }, Method::NearestCentroid { max_iters: 30 }, GammaChoice::Fixed(10.0)),
    ];
    for (kind, method, gamma) in runs {
        let out = run_protocol(&train, &test, kind, cost, method, &gamma, 0, None)?;
        println!(
            "{:<10} {:<8} gamma = {:<6} accuracy = {}%",
            kind.name(),
            method.name(),
            out.gamma.map_or("-".to_string(), |g| g.to_string()),
            format_accuracy(out.accuracy)
        );
    }
    Ok(())
}
