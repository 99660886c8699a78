//! Discrepancies between time series and their gradients in the first series.
//!
//! The biased discrepancies (`sdtw`, `sharp`, `mean_cost`) are functions of
//! the cost matrix `C(X, Y)`. Each has a debiased divergence
//!
//! ```text
//! div(X, Y) = base(C(X, Y)) − ½ base(C(X, X)) − ½ base(C(Y, Y))
//! ```
//!
//! which is zero at `X = Y` by construction.

use std::fmt;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::costs::{build_cost, cost_vjp, CostKind, TimeSeries};
use crate::dp::{self, CostMatrix};
use crate::error::{Error, Result};

/// One of the eight discrepancies, with its temperature where it has one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DivergenceKind {
    /// `Σ_i ½‖x_i − y_i‖²`; needs equal lengths.
    Euclidean,
    Dtw,
    Sdtw { gamma: f64 },
    SdtwDiv { gamma: f64 },
    Sharp { gamma: f64 },
    SharpDiv { gamma: f64 },
    MeanCost,
    MeanCostDiv,
}

impl DivergenceKind {
    pub const NAMES: [&'static str; 8] = [
        "euclidean",
        "dtw",
        "sdtw",
        "sdtw_div",
        "sharp",
        "sharp_div",
        "mean_cost",
        "mean_cost_div",
    ];

    /// Builds a kind from its name. `gamma` is ignored by γ-free kinds.
    pub fn from_name(name: &str, gamma: f64) -> Result<Self> {
        let kind = match name.to_ascii_lowercase().as_str() {
            "euclidean" | "euc" => DivergenceKind::Euclidean,
            "dtw" => DivergenceKind::Dtw,
            "sdtw" => DivergenceKind::Sdtw { gamma },
            "sdtw_div" => DivergenceKind::SdtwDiv { gamma },
            "sharp" => DivergenceKind::Sharp { gamma },
            "sharp_div" => DivergenceKind::SharpDiv { gamma },
            "mean_cost" => DivergenceKind::MeanCost,
            "mean_cost_div" => DivergenceKind::MeanCostDiv,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown divergence kind `{other}`"
                )))
            }
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn name(&self) -> &'static str {
        match self {
            DivergenceKind::Euclidean => "euclidean",
            DivergenceKind::Dtw => "dtw",
            DivergenceKind::Sdtw { .. } => "sdtw",
            DivergenceKind::SdtwDiv { .. } => "sdtw_div",
            DivergenceKind::Sharp { .. } => "sharp",
            DivergenceKind::SharpDiv { .. } => "sharp_div",
            DivergenceKind::MeanCost => "mean_cost",
            DivergenceKind::MeanCostDiv => "mean_cost_div",
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match *self {
            DivergenceKind::Sdtw { gamma }
            | DivergenceKind::SdtwDiv { gamma }
            | DivergenceKind::Sharp { gamma }
            | DivergenceKind::SharpDiv { gamma } => Some(gamma),
            _ => None,
        }
    }

    pub fn uses_gamma(&self) -> bool {
        self.gamma().is_some()
    }

    /// Same kind at another temperature; γ-free kinds are returned unchanged.
    pub fn with_gamma(&self, gamma: f64) -> Self {
        match self {
            DivergenceKind::Sdtw { .. } => DivergenceKind::Sdtw { gamma },
            DivergenceKind::SdtwDiv { .. } => DivergenceKind::SdtwDiv { gamma },
            DivergenceKind::Sharp { .. } => DivergenceKind::Sharp { gamma },
            DivergenceKind::SharpDiv { .. } => DivergenceKind::SharpDiv { gamma },
            other => *other,
        }
    }

    /// Default temperature for averaging: 1 for biased kinds, 10 for
    /// divergences.
    pub fn default_gamma(&self) -> Option<f64> {
        match self {
            DivergenceKind::Sdtw { .. } | DivergenceKind::Sharp { .. } => Some(1.0),
            DivergenceKind::SdtwDiv { .. } | DivergenceKind::SharpDiv { .. } => Some(10.0),
            _ => None,
        }
    }

    pub fn is_divergence(&self) -> bool {
        matches!(
            self,
            DivergenceKind::SdtwDiv { .. } | DivergenceKind::SharpDiv { .. } | DivergenceKind::MeanCostDiv
        )
    }

    pub fn is_differentiable(&self) -> bool {
        !matches!(self, DivergenceKind::Dtw)
    }

    /// The uncorrected discrepancy a divergence is built from.
    pub fn biased(&self) -> Self {
        match *self {
            DivergenceKind::SdtwDiv { gamma } => DivergenceKind::Sdtw { gamma },
            DivergenceKind::SharpDiv { gamma } => DivergenceKind::Sharp { gamma },
            DivergenceKind::MeanCostDiv => DivergenceKind::MeanCost,
            other => other,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(g) = self.gamma() {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{} needs a finite gamma > 0, got {g}",
                    self.name()
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for DivergenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.gamma() {
            Some(g) => write!(f, "{}(gamma={g})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

fn euclidean(x: &TimeSeries, y: &TimeSeries) -> Result<f64> {
    if x.view().dim() != y.view().dim() {
        return Err(Error::DimensionMismatch(format!(
            "euclidean needs equal shapes, got {:?} and {:?}",
            x.view().dim(),
            y.view().dim()
        )));
    }
    Ok(0.5 * x.view().iter().zip(y.view().iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
}

/// Value of a biased kind on a cost matrix.
fn base_value(kind: DivergenceKind, c: &CostMatrix) -> Result<f64> {
    match kind {
        DivergenceKind::Dtw => dp::soft_dtw(c, 0.0),
        DivergenceKind::Sdtw { gamma } => dp::soft_dtw(c, gamma),
        DivergenceKind::Sharp { gamma } => Ok(dp::sharp_parts(c, gamma)?.value),
        DivergenceKind::MeanCost => Ok(dp::mean_cost(c)?.0),
        other => Err(Error::InvalidParameter(format!(
            "{} is not a cost-matrix discrepancy",
            other.name()
        ))),
    }
}

/// Value and gradient in `C` of a biased kind.
fn base_value_grad(kind: DivergenceKind, c: &CostMatrix) -> Result<(f64, Array2<f64>)> {
    match kind {
        DivergenceKind::Sdtw { gamma } => {
            let (v, t) = dp::soft_dtw_forward(c, gamma)?;
            Ok((v, dp::expected_alignment(&t).into_inner()))
        }
        DivergenceKind::Sharp { gamma } => {
            let parts = dp::sharp_parts(c, gamma)?;
            // ∇ ⟨E(C), C⟩ = E + ∇²sdtw(C)·C
            let h = dp::hessian_product(&parts.transitions, parts.vdot.view(), &parts.expected, c.view())?;
            Ok((parts.value, parts.expected.into_inner() + h))
        }
        DivergenceKind::MeanCost => {
            let (v, e) = dp::mean_cost(c)?;
            Ok((v, e.into_inner()))
        }
        DivergenceKind::Dtw => Err(Error::NotDifferentiable("dtw")),
        other => Err(Error::InvalidParameter(format!(
            "{} is not a cost-matrix discrepancy",
            other.name()
        ))),
    }
}

/// Raw (biased) discrepancy: `euclidean`, `dtw`, `sdtw`, `sharp` or `mean_cost`.
pub fn discrepancy(kind: DivergenceKind, x: &TimeSeries, y: &TimeSeries, cost: CostKind) -> Result<f64> {
    kind.validate()?;
    match kind {
        DivergenceKind::Euclidean => euclidean(x, y),
        k if k.is_divergence() => Err(Error::InvalidParameter(format!(
            "{} is a divergence; use `divergence`",
            k.name()
        ))),
        k => base_value(k, &build_cost(cost, x, y)?),
    }
}

/// Self-comparison term `base(C(X, X))` of a divergence kind.
///
/// Precomputing it for a fixed series and passing it to
/// [`divergence_with_self_terms`] gives bit-identical results to
/// [`divergence`].
pub fn self_term(kind: DivergenceKind, x: &TimeSeries, cost: CostKind) -> Result<f64> {
    kind.validate()?;
    if !kind.is_divergence() {
        return Err(Error::InvalidParameter(format!(
            "{} has no self term",
            kind.name()
        )));
    }
    base_value(kind.biased(), &build_cost(cost, x, x)?)
}

/// Debiased divergence given precomputed self terms.
pub fn divergence_with_self_terms(
    kind: DivergenceKind,
    x: &TimeSeries,
    y: &TimeSeries,
    cost: CostKind,
    x_self: f64,
    y_self: f64,
) -> Result<f64> {
    kind.validate()?;
    if !kind.is_divergence() {
        return Err(Error::InvalidParameter(format!(
            "{} is not a divergence",
            kind.name()
        )));
    }
    let cross = base_value(kind.biased(), &build_cost(cost, x, y)?)?;
    Ok(cross - 0.5 * x_self - 0.5 * y_self)
}

/// `sdtw_div`, `sharp_div` or `mean_cost_div`.
pub fn divergence(kind: DivergenceKind, x: &TimeSeries, y: &TimeSeries, cost: CostKind) -> Result<f64> {
    let xs = self_term(kind, x, cost)?;
    let ys = self_term(kind, y, cost)?;
    divergence_with_self_terms(kind, x, y, cost, xs, ys)
}

/// Value of any kind, dispatching to [`discrepancy`] or [`divergence`].
pub fn evaluate(kind: DivergenceKind, x: &TimeSeries, y: &TimeSeries, cost: CostKind) -> Result<f64> {
    if kind.is_divergence() {
        divergence(kind, x, y, cost)
    } else {
        discrepancy(kind, x, y, cost)
    }
}

/// Value and `∇_X` of any differentiable kind.
pub fn divergence_grad_x(
    kind: DivergenceKind,
    x: &TimeSeries,
    y: &TimeSeries,
    cost: CostKind,
) -> Result<(f64, Array2<f64>)> {
    value_and_grad(kind, x, y, cost, None)
}

/// As [`divergence_grad_x`], optionally reusing a precomputed `base(C(Y, Y))`
/// (the `Y` self term does not depend on `X`).
pub fn value_and_grad(
    kind: DivergenceKind,
    x: &TimeSeries,
    y: &TimeSeries,
    cost: CostKind,
    y_self: Option<f64>,
) -> Result<(f64, Array2<f64>)> {
    kind.validate()?;
    match kind {
        DivergenceKind::Dtw => Err(Error::NotDifferentiable("dtw")),
        DivergenceKind::Euclidean => {
            let v = euclidean(x, y)?;
            Ok((v, x.values() - y.values()))
        }
        k if !k.is_divergence() => {
            let c = build_cost(cost, x, y)?;
            let (v, g) = base_value_grad(k, &c)?;
            Ok((v, cost_vjp(cost, x, y, g.view(), false)?))
        }
        k => {
            let base = k.biased();
            let (cross, g_cross) = base_value_grad(base, &build_cost(cost, x, y)?)?;
            let (xs, g_self) = base_value_grad(base, &build_cost(cost, x, x)?)?;
            let ys = match y_self {
                Some(v) => v,
                None => base_value(base, &build_cost(cost, y, y)?)?,
            };
            let grad = cost_vjp(cost, x, y, g_cross.view(), false)?
                - 0.5 * cost_vjp(cost, x, x, g_self.view(), true)?;
            Ok((cross - 0.5 * xs - 0.5 * ys, grad))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn xy() -> (TimeSeries, TimeSeries) {
        (
            TimeSeries::univariate(&[0.0, 1.0]).unwrap(),
            TimeSeries::univariate(&[0.0, 2.0]).unwrap(),
        )
    }

    const SQ: CostKind = CostKind::SquaredEuclidean;

    #[test]
    fn biased_reference_values() {
        let (x, y) = xy();
        let v = discrepancy(DivergenceKind::Sdtw { gamma: 1.0 }, &x, &y, SQ).unwrap();
        assert_abs_diff_eq!(v, -0.054_956_919_641_990_676, epsilon = 1e-12);
        let v = discrepancy(DivergenceKind::Sharp { gamma: 1.0 }, &x, &y, SQ).unwrap();
        assert_abs_diff_eq!(v, 0.829_494_872_239_008_5, epsilon = 1e-12);
        assert_eq!(discrepancy(DivergenceKind::Dtw, &x, &x, SQ).unwrap(), 0.0);
    }

    #[test]
    fn divergence_reference_values() {
        let (x, y) = xy();
        let v = divergence(DivergenceKind::SdtwDiv { gamma: 1.0 }, &x, &y, SQ).unwrap();
        assert_abs_diff_eq!(v, 0.462_003_848_177_773_3, epsilon = 1e-12);
        let v = divergence(DivergenceKind::MeanCostDiv, &x, &y, SQ).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-14);
        let v = divergence(DivergenceKind::SharpDiv { gamma: 1.0 }, &x, &y, SQ).unwrap();
        assert_abs_diff_eq!(v, 0.479_446_604_870_008_56, epsilon = 1e-12);
    }

    #[test]
    fn kind_routing_errors() {
        let (x, y) = xy();
        let short = TimeSeries::univariate(&[0.0]).unwrap();
        assert!(matches!(
            discrepancy(DivergenceKind::Euclidean, &x, &short, SQ),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(discrepancy(DivergenceKind::MeanCostDiv, &x, &y, SQ).is_err());
        assert!(divergence(DivergenceKind::Sdtw { gamma: 1.0 }, &x, &y, SQ).is_err());
        assert!(matches!(
            divergence_grad_x(DivergenceKind::Dtw, &x, &y, SQ),
            Err(Error::NotDifferentiable(_))
        ));
        assert!(DivergenceKind::from_name("sdtw", 0.0).is_err());
        assert!(DivergenceKind::from_name("cosine", 1.0).is_err());
    }

    #[test]
    fn euclidean_gradient_is_difference() {
        let (x, y) = xy();
        let (v, g) = divergence_grad_x(DivergenceKind::Euclidean, &x, &y, SQ).unwrap();
        assert_eq!(v, 0.5);
        assert_eq!(g.column(0).to_vec(), vec![0.0, -1.0]);
    }

    #[test]
    fn names_round_trip() {
        for name in DivergenceKind::NAMES {
            let k = DivergenceKind::from_name(name, 2.0).unwrap();
            assert_eq!(k.name(), name);
            assert_eq!(k.gamma().is_some(), k.uses_gamma());
        }
    }

    #[test]
    fn self_terms_give_identical_bits() {
        let (x, y) = xy();
        for kind in [
            DivergenceKind::SdtwDiv { gamma: 0.3 },
            DivergenceKind::SharpDiv { gamma: 0.3 },
            DivergenceKind::MeanCostDiv,
        ] {
            let direct = divergence(kind, &x, &y, SQ).unwrap();
            let xs = self_term(kind, &x, SQ).unwrap();
            let ys = self_term(kind, &y, SQ).unwrap();
            let cached = divergence_with_self_terms(kind, &x, &y, SQ, xs, ys).unwrap();
            assert_eq!(direct.to_bits(), cached.to_bits());
            let (v, _) = value_and_grad(kind, &x, &y, SQ, Some(ys)).unwrap();
            assert_eq!(v.to_bits(), direct.to_bits());
        }
    }
}
