//! Central finite-difference checks of every analytic derivative.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::costs::{build_cost, cost_jvp, cost_vjp, CostKind, TimeSeries};
use crate::divergences::{divergence_grad_x, evaluate, DivergenceKind};
use crate::dp::{
    directional_derivative, expected_alignment, hessian_product, inner, soft_dtw, soft_dtw_forward, CostMatrix,
};
use crate::error::Result;

pub const DEFAULT_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheck {
    pub name: String,
    /// `max |analytic − numeric|` over all entries.
    pub max_abs_err: f64,
    /// Largest entry of the analytic result, for scale.
    pub max_abs_value: f64,
}

impl GradCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_abs_err <= tol
    }
}

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn report(name: impl Into<String>, analytic: &Array2<f64>, numeric: &Array2<f64>) -> GradCheck {
    GradCheck {
        name: name.into(),
        max_abs_err: max_abs_diff(analytic, numeric),
        max_abs_value: analytic.iter().fold(0.0, |m, v| m.max(v.abs())),
    }
}

/// Central-difference gradient of a scalar function of a matrix.
pub fn numeric_gradient<F>(mut f: F, x: &Array2<f64>, h: f64) -> Result<Array2<f64>>
where
    F: FnMut(&Array2<f64>) -> Result<f64>,
{
    let mut g = Array2::zeros(x.dim());
    let mut xp = x.clone();
    for idx in 0..x.len() {
        let (i, j) = (idx / x.ncols(), idx % x.ncols());
        let orig = xp[[i, j]];
        xp[[i, j]] = orig + h;
        let fp = f(&xp)?;
        xp[[i, j]] = orig - h;
        let fm = f(&xp)?;
        xp[[i, j]] = orig;
        g[[i, j]] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

/// Central difference of a matrix-valued function along direction `z`.
pub fn numeric_directional<F>(mut f: F, x: &Array2<f64>, z: &Array2<f64>, h: f64) -> Result<Array2<f64>>
where
    F: FnMut(&Array2<f64>) -> Result<Array2<f64>>,
{
    let plus = f(&(x + &(z * h)))?;
    let minus = f(&(x - &(z * h)))?;
    Ok((plus - minus) / (2.0 * h))
}

/// `∇_C sdtw_γ(C) = E` against differences of the value.
pub fn check_sdtw_gradient(c: &CostMatrix, gamma: f64, h: f64) -> Result<GradCheck> {
    let (_, t) = soft_dtw_forward(c, gamma)?;
    let e = expected_alignment(&t).into_inner();
    let num = numeric_gradient(|m| soft_dtw(&CostMatrix::new(m.clone())?, gamma), c.values(), h)?;
    Ok(report("sdtw/grad_C", &e, &num))
}

/// Hessian-vector product against differences of `E` along `z`.
pub fn check_hessian_product(c: &CostMatrix, gamma: f64, z: &Array2<f64>, h: f64) -> Result<GradCheck> {
    let (_, t) = soft_dtw_forward(c, gamma)?;
    let e = expected_alignment(&t);
    let (_, vdot) = directional_derivative(&t, z.view())?;
    let hz = hessian_product(&t, vdot.view(), &e, z.view())?;
    let num = numeric_directional(
        |m| {
            let (_, t) = soft_dtw_forward(&CostMatrix::new(m.clone())?, gamma)?;
            Ok(expected_alignment(&t).into_inner())
        },
        c.values(),
        z,
        h,
    )?;
    Ok(report("sdtw/hessian_product", &hz, &num))
}

/// Cost VJP against the gradient of `⟨C(X, Y), E⟩` (or `⟨C(X, X), E⟩`).
pub fn check_cost_vjp(
    kind: CostKind,
    x: &TimeSeries,
    y: &TimeSeries,
    e: &Array2<f64>,
    self_mode: bool,
    h: f64,
) -> Result<GradCheck> {
    let analytic = cost_vjp(kind, x, y, e.view(), self_mode)?;
    let num = numeric_gradient(
        |xm| {
            let xs = TimeSeries::new(xm.clone())?;
            let other = if self_mode { &xs } else { y };
            Ok(inner(build_cost(kind, &xs, other)?.view(), e.view()))
        },
        x.values(),
        h,
    )?;
    let mode = if self_mode { "self" } else { "cross" };
    Ok(report(format!("{kind}/vjp_{mode}"), &analytic, &num))
}

/// Cost JVP against differences of `C` along `z`.
pub fn check_cost_jvp(
    kind: CostKind,
    x: &TimeSeries,
    y: &TimeSeries,
    z: &Array2<f64>,
    self_mode: bool,
    h: f64,
) -> Result<GradCheck> {
    let analytic = cost_jvp(kind, x, y, z.view(), self_mode)?;
    let num = numeric_directional(
        |xm| {
            let xs = TimeSeries::new(xm.clone())?;
            let other = if self_mode { &xs } else { y };
            Ok(build_cost(kind, &xs, other)?.into_inner())
        },
        x.values(),
        z,
        h,
    )?;
    let mode = if self_mode { "self" } else { "cross" };
    Ok(report(format!("{kind}/jvp_{mode}"), &analytic, &num))
}

/// `∇_X` of a differentiable kind against differences of its value.
pub fn check_divergence_gradient(
    kind: DivergenceKind,
    x: &TimeSeries,
    y: &TimeSeries,
    cost: CostKind,
    h: f64,
) -> Result<GradCheck> {
    let (_, g) = divergence_grad_x(kind, x, y, cost)?;
    let num = numeric_gradient(|xm| evaluate(kind, &TimeSeries::new(xm.clone())?, y, cost), x.values(), h)?;
    Ok(report(format!("{}/grad_X/{cost}", kind.name()), &g, &num))
}

/// Every check that applies to the pair `(x, y)`: cost-matrix gradients and
/// Hessian products on `C(x, y)`, the cost VJPs (and JVPs where defined), and
/// `∇_X` of all differentiable kinds.
pub fn run_suite(x: &TimeSeries, y: &TimeSeries, cost: CostKind, gamma: f64, h: f64) -> Result<Vec<GradCheck>> {
    let c = build_cost(cost, x, y)?;
    let mut out = vec![check_sdtw_gradient(&c, gamma, h)?];
    let (m, n) = c.shape();
    // fixed, non-symmetric directions keep the output deterministic
    let z_c = Array2::from_shape_fn((m, n), |(i, j)| ((i * n + j) as f64 * 0.7).sin());
    out.push(check_hessian_product(&c, gamma, &z_c, h)?);
    let e_cross = expected_alignment(&soft_dtw_forward(&c, gamma)?.1).into_inner();
    out.push(check_cost_vjp(cost, x, y, &e_cross, false, h)?);
    let e_self = Array2::from_shape_fn((m, m), |(i, j)| ((i * m + j) as f64 * 0.3).cos());
    out.push(check_cost_vjp(cost, x, x, &e_self, true, h)?);
    if cost == CostKind::SquaredEuclidean {
        let z_x = Array2::from_shape_fn(x.values().dim(), |(i, j)| ((i + 3 * j) as f64 * 0.5).sin());
        out.push(check_cost_jvp(cost, x, y, &z_x, false, h)?);
        out.push(check_cost_jvp(cost, x, x, &z_x, true, h)?);
    }
    for name in DivergenceKind::NAMES {
        let kind = DivergenceKind::from_name(name, gamma)?;
        if !kind.is_differentiable() || (kind == DivergenceKind::Euclidean && x.len() != y.len()) {
            continue;
        }
        out.push(check_divergence_gradient(kind, x, y, cost, h)?);
    }
    Ok(out)
}
