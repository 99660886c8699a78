//! Loading UCR text, and writing CSV and JSON reports.

use tsdiv::classify::{run_protocol, GammaChoice, Method};
use tsdiv::data_io::{parse_ucr, render_report, AccuracyRow, LoadOptions, Payload, ReportFormat, ResultReport, RunMetadata};
use tsdiv::{CostKind, DivergenceKind};

const TRAIN: &str = "1,0.0,0.1,0.0\n1\t0.1\t0.0\t0.1\tNaN\n2 1.0 1.2 0.9\n2,1.1,1.0,1.0\n";
const TEST: &str = "1,0.05,0.05,0.0\n2,1.0,1.0,1.1\n";

fn main() -> tsdiv::Result<()> {
    let origin = std::path::Path::new("inline");
    let train = parse_ucr(TRAIN, origin, LoadOptions::default())?;
    let test = parse_ucr(TEST, origin, LoadOptions::default())?;
    let kind = DivergenceKind::SdtwDiv { gamma: 1.0 };
    let out = run_protocol(&train, &test, kind, CostKind::SquaredEuclidean, Method::Knn { k: 1 }, &GammaChoice::Fixed(1.0), 0, None)?;
    let report = ResultReport {
        metadata: RunMetadata {
            kind: kind.name().into(),
            cost: "sqeuclid".into(),
            gamma: out.gamma,
            seed: 0,
            dataset: Some("Inline".into()),
            wall_time_secs: None,
            extra: Default::default(),
        },
        payload: Payload::Accuracy {
            rows: vec![AccuracyRow {
                dataset: "Inline".into(),
                kind: kind.name().into(),
                gamma: out.gamma,
                k: Some(1),
                accuracy: out.accuracy,
            }],
        },
    };
    print!("{}", render_report(&report, ReportFormat::Csv)?);
    print!("{}", render_report(&report, ReportFormat::Json)?);
    Ok(())
}
