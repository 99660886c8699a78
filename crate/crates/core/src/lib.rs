//! Soft dynamic time warping, its debiased divergences, and the tools built
//! on them: averaging, nearest-neighbour and nearest-centroid
//! classification, an enumeration oracle, and numerical verification.
//!
//! ```
//! use tsdiv::{divergence, CostKind, DivergenceKind, TimeSeries};
//!
//! let x = TimeSeries::univariate(&[0.0, 1.0, 2.0]).unwrap();
//! let y = TimeSeries::univariate(&[0.0, 2.0]).unwrap();
//! let d = divergence(DivergenceKind::SdtwDiv { gamma: 1.0 }, &x, &y, CostKind::SquaredEuclidean).unwrap();
//! assert!(d > 0.0);
//! ```

pub mod barycenter;
pub mod classify;
pub mod costs;
pub mod data_io;
pub mod divergences;
pub mod dp;
pub mod error;
pub mod gradcheck;
pub mod optim;
pub mod oracle;
pub mod synthetic;
pub mod verify;

pub use barycenter::{frechet_mean, interpolate, AveragingProblem, Barycenter, InitScheme};
pub use classify::{LabeledDataset, Method};
pub use costs::{build_cost, CostKind, TimeSeries};
pub use divergences::{discrepancy, divergence, divergence_grad_x, evaluate, DivergenceKind};
pub use dp::{
    alignment_cardinality, expected_alignment, hard_dtw, mean_cost, soft_dtw, soft_dtw_forward, CostMatrix,
};
pub use error::{Error, Result};
