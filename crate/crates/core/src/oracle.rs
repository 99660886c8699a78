//! Ground truth by explicit enumeration of every monotonic alignment.
//!
//! Exponential in the grid size; only meant for small `m, n`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dp::{alignment_cardinality, AlignmentMatrix, CostMatrix};
use crate::error::{Error, Result};

/// Refuse to enumerate more alignments than this.
pub const ENUMERATION_LIMIT: u64 = 1_000_000;

/// Statistics of the Gibbs distribution over alignments, computed by
/// enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsStats {
    pub sdtw_value: f64,
    pub expected_alignment: Array2<f64>,
    /// Shannon entropy of the path distribution, in nats.
    pub entropy: f64,
    pub mean_cost_value: f64,
    pub dtw_value: f64,
    pub path_count: u64,
}

/// All alignments of an `m × n` grid, depth-first over moves
/// `→`, `↘`, `↓` from the top-left cell.
pub fn enumerate_alignments(m: usize, n: usize) -> Result<Vec<AlignmentMatrix>> {
    let count = alignment_cardinality(m, n)?;
    if count > ENUMERATION_LIMIT.into() {
        return Err(Error::TooLarge {
            count: count.to_string(),
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut out = Vec::new();
    let mut path = vec![(0, 0)];
    walk(m, n, &mut path, &mut out)?;
    Ok(out)
}

fn walk(
    m: usize,
    n: usize,
    path: &mut Vec<(usize, usize)>,
    out: &mut Vec<AlignmentMatrix>,
) -> Result<()> {
    let (i, j) = *path.last().expect("non-empty");
    if (i, j) == (m - 1, n - 1) {
        out.push(AlignmentMatrix::from_path(m, n, path)?);
        return Ok(());
    }
    for (di, dj) in [(0, 1), (1, 1), (1, 0)] {
        let (a, b) = (i + di, j + dj);
        if a < m && b < n {
            path.push((a, b));
            walk(m, n, path, out)?;
            path.pop();
        }
    }
    Ok(())
}

/// Exact soft-DTW, expected alignment, entropy, mean cost and DTW.
pub fn oracle_stats(c: &CostMatrix, gamma: f64) -> Result<GibbsStats> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "oracle needs a finite gamma > 0, got {gamma}"
        )));
    }
    let (m, n) = c.shape();
    let paths = enumerate_alignments(m, n)?;
    let costs: Vec<f64> = paths.iter().map(|a| a.cost(c.view())).collect();
    let best = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = costs.iter().map(|s| (-(s - best) / gamma).exp()).collect();
    let z: f64 = weights.iter().sum();
    let mut expected = Array2::<f64>::zeros((m, n));
    let mut entropy = 0.0;
    for (a, w) in paths.iter().zip(&weights) {
        let p = w / z;
        if p > 0.0 {
            entropy -= p * p.ln();
        }
        expected.scaled_add(p, &a.to_f64());
    }
    Ok(GibbsStats {
        sdtw_value: best - gamma * z.ln(),
        expected_alignment: expected,
        entropy,
        mean_cost_value: costs.iter().sum::<f64>() / costs.len() as f64,
        dtw_value: best,
        path_count: paths.len() as u64,
    })
}
