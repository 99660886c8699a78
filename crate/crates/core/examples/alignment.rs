//! Soft-DTW on a cost matrix: value, expected alignment, the hard DTW path,
//! alignment counts and the uniform-average cost.

use ndarray::array;
use tsdiv::dp::{alignment_cardinality, expected_alignment, hard_dtw, log_alignment_count, mean_cost, soft_dtw_forward};
use tsdiv::CostMatrix;

fn main() -> tsdiv::Result<()> {
    let c = CostMatrix::new(array![[0.0, 2.0, 1.0], [0.5, 0.5, 3.0], [1.0, 0.2, 0.1]])?;

    for gamma in [0.01, 0.1, 1.0, 10.0] {
        let (value, transitions) = soft_dtw_forward(&c, gamma)?;
        let e = expected_alignment(&transitions);
        println!("gamma = {gamma:>5}: sdtw = {value:+.6}");
        println!("  expected alignment:\n{:.4}", e.values());
    }

    let (dtw, path) = hard_dtw(&c)?;
    println!("DTW = {dtw}, optimal path:\n{}", path.cells());

    let (mc, uniform) = mean_cost(&c)?;
    println!("mean cost over all alignments = {mc:.6}");
    println!("uniform visit probabilities:\n{:.4}", uniform.values());

    for (m, n) in [(3, 3), (10, 10), (100, 100)] {
        println!(
            "|A({m},{n})| = {}  (log = {:.4})",
            alignment_cardinality(m, n)?,
            log_alignment_count(m, n)?
        );
    }
    Ok(())
}
