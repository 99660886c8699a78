//! Ground costs between time steps and their Jacobian products in `X`.
//!
//! All three costs are functions of the difference `x_i - y_j` only:
//!
//! * `SquaredEuclidean`: `δ = ½‖x − y‖²`
//! * `LogAugmented`:     `δ + log(2 − exp(−δ))`
//! * `Absolute`:         `|x − y|`, univariate only
//!
//! so the VJP of any of them reduces to a per-cell weight times the gradient
//! of `c` with respect to its first argument.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::dp::CostMatrix;
use crate::error::{Error, Result};

/// A univariate or multivariate time series: rows are time steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries(Array2<f64>);

impl TimeSeries {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::EmptyInput("time series"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("time series"));
        }
        Ok(TimeSeries(values))
    }

    /// A `d = 1` series.
    pub fn univariate(values: &[f64]) -> Result<Self> {
        Self::new(Array2::from_shape_vec((values.len(), 1), values.to_vec()).expect("column"))
    }

    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.0.row(i)
    }

    /// Linear interpolation onto `len` equally spaced time steps.
    pub fn resample(&self, len: usize) -> Result<TimeSeries> {
        if len == 0 {
            return Err(Error::InvalidParameter("resample length must be positive".into()));
        }
        let m = self.len();
        let d = self.dim();
        let mut out = Array2::zeros((len, d));
        for t in 0..len {
            let pos = if len == 1 {
                0.0
            } else {
                t as f64 * (m - 1) as f64 / (len - 1) as f64
            };
            let lo = (pos.floor() as usize).min(m - 1);
            let hi = (lo + 1).min(m - 1);
            let frac = pos - lo as f64;
            for k in 0..d {
                out[[t, k]] = self.0[[lo, k]] * (1.0 - frac) + self.0[[hi, k]] * frac;
            }
        }
        TimeSeries::new(out)
    }

    /// Per-dimension z-normalisation (mean 0, variance 1). Constant
    /// dimensions are only centred.
    pub fn z_normalized(&self) -> TimeSeries {
        let mut out = self.0.clone();
        for mut col in out.axis_iter_mut(Axis(1)) {
            let n = col.len() as f64;
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            col.mapv_inplace(|v| if sd > 0.0 { (v - mean) / sd } else { v - mean });
        }
        TimeSeries(out)
    }
}

/// Built-in ground cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    SquaredEuclidean,
    LogAugmented,
    Absolute,
}

impl CostKind {
    pub const ALL: [CostKind; 3] = [
        CostKind::SquaredEuclidean,
        CostKind::LogAugmented,
        CostKind::Absolute,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CostKind::SquaredEuclidean => "sqeuclid",
            CostKind::LogAugmented => "logaug",
            CostKind::Absolute => "absolute",
        }
    }

    fn check(self, x: &TimeSeries, y: &TimeSeries) -> Result<()> {
        if x.dim() != y.dim() {
            return Err(Error::DimensionMismatch(format!(
                "series have {} and {} features",
                x.dim(),
                y.dim()
            )));
        }
        if self == CostKind::Absolute && x.dim() != 1 {
            return Err(Error::InvalidParameter(format!(
                "absolute cost needs univariate series, got d = {}",
                x.dim()
            )));
        }
        Ok(())
    }

    /// Cost between two time steps.
    #[inline]
    pub fn pair(self, x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> f64 {
        match self {
            CostKind::SquaredEuclidean => half_sq_dist(x, y),
            CostKind::LogAugmented => {
                let delta = half_sq_dist(x, y);
                delta + (2.0 - (-delta).exp()).ln()
            }
            CostKind::Absolute => (x[0] - y[0]).abs(),
        }
    }

    /// Adds `weight · ∂c(x, y)/∂x` into `out`.
    #[inline]
    fn accumulate_grad(
        self,
        x: ArrayView1<'_, f64>,
        y: ArrayView1<'_, f64>,
        weight: f64,
        out: &mut ndarray::ArrayViewMut1<'_, f64>,
    ) {
        match self {
            CostKind::SquaredEuclidean => {
                for k in 0..x.len() {
                    out[k] += weight * (x[k] - y[k]);
                }
            }
            CostKind::LogAugmented => {
                let q = (-half_sq_dist(x, y)).exp();
                let scale = weight * (1.0 + q / (2.0 - q));
                for k in 0..x.len() {
                    out[k] += scale * (x[k] - y[k]);
                }
            }
            CostKind::Absolute => {
                let diff = x[0] - y[0];
                // subgradient 0 at the kink
                let sign = if diff > 0.0 {
                    1.0
                } else if diff < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                out[0] += weight * sign;
            }
        }
    }
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sqeuclid" | "squared_euclidean" | "sqeuclidean" => Ok(CostKind::SquaredEuclidean),
            "logaug" | "log_augmented" => Ok(CostKind::LogAugmented),
            "absolute" | "abs" | "l1" => Ok(CostKind::Absolute),
            other => Err(Error::InvalidParameter(format!("unknown cost `{other}`"))),
        }
    }
}

#[inline]
fn half_sq_dist(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> f64 {
    0.5 * x.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
}

/// `C(X, Y)` with entry `(i, j) = c(x_i, y_j)`.
pub fn build_cost(kind: CostKind, x: &TimeSeries, y: &TimeSeries) -> Result<CostMatrix> {
    kind.check(x, y)?;
    let (m, n) = (x.len(), y.len());
    let mut c = Array2::zeros((m, n));
    for i in 0..m {
        let xi = x.row(i);
        for j in 0..n {
            c[[i, j]] = kind.pair(xi, y.row(j));
        }
    }
    CostMatrix::new(c)
}

/// `(J_X C)ᵀ E`.
///
/// In cross mode this is the Jacobian of `C(X, Y)`; in self mode `y` is
/// ignored and the Jacobian is that of `C(X, X)`, where `x` appears in both
/// arguments.
pub fn cost_vjp(
    kind: CostKind,
    x: &TimeSeries,
    y: &TimeSeries,
    e: ArrayView2<'_, f64>,
    self_mode: bool,
) -> Result<Array2<f64>> {
    let y = if self_mode { x } else { y };
    kind.check(x, y)?;
    let (m, n) = (x.len(), y.len());
    if e.dim() != (m, n) {
        return Err(Error::DimensionMismatch(format!(
            "weights are {:?}, cost is {:?}",
            e.dim(),
            (m, n)
        )));
    }
    if kind == CostKind::SquaredEuclidean {
        return Ok(sqeuclid_vjp(x.view(), y.view(), e, self_mode));
    }
    let mut out = Array2::zeros((m, x.dim()));
    for i in 0..m {
        let xi = x.row(i);
        let mut row = out.row_mut(i);
        for j in 0..n {
            let w = if self_mode { e[[i, j]] + e[[j, i]] } else { e[[i, j]] };
            if w != 0.0 {
                kind.accumulate_grad(xi, y.row(j), w, &mut row);
            }
        }
    }
    Ok(out)
}

/// Matrix form: `X ∘ (W 1) − W Y` with `W = E` (cross) or `E + Eᵀ` (self).
fn sqeuclid_vjp(
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    e: ArrayView2<'_, f64>,
    self_mode: bool,
) -> Array2<f64> {
    let w = if self_mode {
        &e + &e.t()
    } else {
        e.to_owned()
    };
    let row_sums = w.sum_axis(Axis(1)).insert_axis(Axis(1));
    &x * &row_sums - w.dot(&y)
}

/// `J_X C · Z` for the squared Euclidean cost.
///
/// Cross mode gives `diag(X Zᵀ) 1ᵀ − Z Yᵀ`; self mode its symmetrisation
/// `diag(X Zᵀ) 1ᵀ + 1 diag(Z Xᵀ)ᵀ − Z Xᵀ − X Zᵀ`.
pub fn cost_jvp(
    kind: CostKind,
    x: &TimeSeries,
    y: &TimeSeries,
    z: ArrayView2<'_, f64>,
    self_mode: bool,
) -> Result<Array2<f64>> {
    if kind != CostKind::SquaredEuclidean {
        return Err(Error::NotImplemented(format!("JVP for the {kind} cost")));
    }
    let y = if self_mode { x } else { y };
    kind.check(x, y)?;
    if z.dim() != x.view().dim() {
        return Err(Error::DimensionMismatch(format!(
            "direction is {:?}, series is {:?}",
            z.dim(),
            x.view().dim()
        )));
    }
    let xv = x.view();
    let diag_xz = (&xv * &z).sum_axis(Axis(1));
    let n = y.len();
    let mut out = Array2::zeros((x.len(), n));
    for (i, &d) in diag_xz.iter().enumerate() {
        out.row_mut(i).fill(d);
    }
    out -= &z.dot(&y.view().t());
    if self_mode {
        out = &out + &out.t();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn ts(rows: Array2<f64>) -> TimeSeries {
        TimeSeries::new(rows).unwrap()
    }

    #[test]
    fn squared_euclidean_small() {
        let c = build_cost(
            CostKind::SquaredEuclidean,
            &ts(array![[0.0], [1.0]]),
            &ts(array![[0.0], [2.0]]),
        )
        .unwrap();
        assert_eq!(c.values(), &array![[0.0, 2.0], [0.5, 0.5]]);
    }

    #[test]
    fn log_augmented_values() {
        let x = ts(array![[0.3, -1.0]]);
        let c = build_cost(CostKind::LogAugmented, &x, &x).unwrap();
        assert_eq!(c.values()[[0, 0]], 0.0);
        // δ = ½·1² = 0.5
        let c = build_cost(CostKind::LogAugmented, &ts(array![[0.0]]), &ts(array![[1.0]])).unwrap();
        assert_abs_diff_eq!(c.values()[[0, 0]], 0.831_796_565_751_186_2, epsilon = 1e-12);
    }

    #[test]
    fn dimension_checks() {
        let a = ts(array![[0.0, 1.0]]);
        let b = ts(array![[0.0]]);
        assert!(matches!(
            build_cost(CostKind::SquaredEuclidean, &a, &b),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            build_cost(CostKind::Absolute, &a, &a),
            Err(Error::InvalidParameter(_))
        ));
        assert!(cost_vjp(CostKind::SquaredEuclidean, &b, &b, Array2::zeros((2, 1)).view(), false).is_err());
    }

    #[test]
    fn vjp_cross_small() {
        let x = ts(array![[0.0], [1.0]]);
        let y = ts(array![[0.0], [2.0]]);
        let g = cost_vjp(CostKind::SquaredEuclidean, &x, &y, Array2::eye(2).view(), false).unwrap();
        assert_eq!(g, array![[0.0], [-1.0]]);
        let g = cost_vjp(CostKind::LogAugmented, &x, &y, Array2::zeros((2, 2)).view(), false).unwrap();
        assert_eq!(g, Array2::<f64>::zeros((2, 1)));
    }

    #[test]
    fn vjp_self_is_twice_cross_for_symmetric_weights() {
        let x = ts(array![[0.0, 1.0], [0.5, -0.25], [2.0, 0.0]]);
        let e = array![[1.0, 0.2, 0.1], [0.2, 0.7, 0.4], [0.1, 0.4, 1.0]];
        for kind in [CostKind::SquaredEuclidean, CostKind::LogAugmented] {
            let cross = cost_vjp(kind, &x, &x, e.view(), false).unwrap();
            let selfm = cost_vjp(kind, &x, &x, e.view(), true).unwrap();
            for (a, b) in selfm.iter().zip(cross.iter()) {
                assert_abs_diff_eq!(*a, 2.0 * b, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn jvp_small() {
        let x = ts(array![[0.0], [1.0]]);
        let y = ts(array![[0.0], [2.0]]);
        let z = array![[1.0], [1.0]];
        let j = cost_jvp(CostKind::SquaredEuclidean, &x, &y, z.view(), false).unwrap();
        assert_eq!(j, array![[0.0, -2.0], [1.0, -1.0]]);
        let j0 = cost_jvp(CostKind::SquaredEuclidean, &x, &y, Array2::zeros((2, 1)).view(), false).unwrap();
        assert_eq!(j0, Array2::<f64>::zeros((2, 2)));
        let cross = cost_jvp(CostKind::SquaredEuclidean, &x, &x, z.view(), false).unwrap();
        let selfm = cost_jvp(CostKind::SquaredEuclidean, &x, &x, z.view(), true).unwrap();
        assert_eq!(selfm, &cross + &cross.t());
        assert!(matches!(
            cost_jvp(CostKind::Absolute, &x, &y, z.view(), false),
            Err(Error::NotImplemented(_))
        ));
    }

    #[test]
    fn absolute_subgradient_is_zero_at_ties() {
        let x = ts(array![[1.0]]);
        let g = cost_vjp(CostKind::Absolute, &x, &x, array![[1.0]].view(), false).unwrap();
        assert_eq!(g, array![[0.0]]);
    }

    #[test]
    fn resample_endpoints() {
        let x = TimeSeries::univariate(&[0.0, 1.0, 4.0]).unwrap();
        let r = x.resample(5).unwrap();
        assert_eq!(r.values().column(0).to_vec(), vec![0.0, 0.5, 1.0, 2.5, 4.0]);
        assert_eq!(x.resample(3).unwrap(), x);
    }

    #[test]
    fn cost_names_round_trip() {
        for kind in CostKind::ALL {
            assert_eq!(kind.name().parse::<CostKind>().unwrap(), kind);
        }
        assert!("cosine".parse::<CostKind>().is_err());
    }
}
