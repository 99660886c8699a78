//! Seeded synthetic datasets in the style of the control-chart benchmark:
//! six pattern classes around a noisy baseline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classify::LabeledDataset;
use crate::costs::TimeSeries;
use crate::error::{Error, Result};

/// Class labels, in order: normal, cyclic, increasing trend, decreasing
/// trend, upward shift, downward shift.
pub const CONTROL_LABELS: [i64; 6] = [1, 2, 3, 4, 5, 6];

fn control_series(label: i64, len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (m, s) = (30.0, 2.0);
    let amp = rng.gen_range(10.0..15.0);
    let period = rng.gen_range(10.0..15.0);
    let slope = rng.gen_range(0.2..0.5);
    let jump = rng.gen_range(7.5..20.0);
    let at = rng.gen_range(len / 3..=(2 * len / 3).max(len / 3));
    (0..len)
        .map(|t| {
            let base = m + s * rng.gen_range(-3.0..3.0);
            let tf = t as f64;
            let step = if t >= at { jump } else { 0.0 };
            base + match label {
                2 => amp * (2.0 * std::f64::consts::PI * tf / period).sin(),
                3 => slope * tf,
                4 => -slope * tf,
                5 => step,
                6 => -step,
                _ => 0.0,
            }
        })
        .collect()
}

/// `per_class` series of length `len` for each of the six classes, class by
/// class.
pub fn control_charts(per_class: usize, len: usize, seed: u64) -> Result<LabeledDataset> {
    if per_class == 0 || len < 3 {
        return Err(Error::InvalidParameter("need per_class >= 1 and len >= 3".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut series = Vec::new();
    let mut labels = Vec::new();
    for &label in &CONTROL_LABELS {
        for _ in 0..per_class {
            series.push(TimeSeries::univariate(&control_series(label, len, &mut rng))?);
            labels.push(label);
        }
    }
    LabeledDataset::new(series, labels)
}

/// Renders a dataset in the comma-separated UCR text format.
pub fn to_ucr_text(data: &LabeledDataset) -> String {
    let mut out = String::new();
    for (s, l) in data.series.iter().zip(&data.labels) {
        out.push_str(&l.to_string());
        for v in s.values().iter() {
            out.push(',');
            out.push_str(&crate::data_io::format_f64(*v));
        }
        out.push('\n');
    }
    out
}
