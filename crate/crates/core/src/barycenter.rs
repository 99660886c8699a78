//! Weighted averages of time series under a differentiable discrepancy.

use ndarray::Array2;
use rayon::prelude::*;

use crate::costs::{CostKind, TimeSeries};
use crate::divergences::{self, DivergenceKind};
use crate::error::{Error, Result};
use crate::optim::{self, LbfgsOptions, Termination};

/// Starting point for the optimiser.
#[derive(Debug, Clone, PartialEq)]
pub enum InitScheme {
    /// Pointwise mean of the series, each first resampled to the target
    /// length if needed.
    EuclideanMean,
    /// For divergence kinds, solve the biased counterpart from the Euclidean
    /// mean first and start from its solution. Other kinds behave like
    /// [`InitScheme::EuclideanMean`].
    WarmStartBiased,
    Explicit(TimeSeries),
}

/// How to weight the series when none are given explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefaultWeights {
    /// `w_i = 1` when lengths are equal, `w_i = 1/n_i` otherwise.
    Auto,
    Uniform,
    InverseLength,
}

#[derive(Debug, Clone)]
pub struct AveragingProblem {
    pub series: Vec<TimeSeries>,
    /// One positive weight per series; `None` selects per `default_weights`.
    pub weights: Option<Vec<f64>>,
    pub default_weights: DefaultWeights,
    pub kind: DivergenceKind,
    pub cost: CostKind,
    /// Length of the average; `None` means the median input length.
    pub barycenter_length: Option<usize>,
    pub init: InitScheme,
}

impl AveragingProblem {
    /// Problem with the usual defaults: automatic weights, median length and
    /// warm start.
    pub fn new(series: Vec<TimeSeries>, kind: DivergenceKind, cost: CostKind) -> Self {
        AveragingProblem {
            series,
            weights: None,
            default_weights: DefaultWeights::Auto,
            kind,
            cost,
            barycenter_length: None,
            init: InitScheme::WarmStartBiased,
        }
    }

    /// Weights actually used for the objective.
    pub fn resolved_weights(&self) -> Result<Vec<f64>> {
        if let Some(w) = &self.weights {
            if w.len() != self.series.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} weights for {} series",
                    w.len(),
                    self.series.len()
                )));
            }
            if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidParameter("weights must be finite and non-negative".into()));
            }
            return Ok(w.clone());
        }
        let equal = self.series.windows(2).all(|p| p[0].len() == p[1].len());
        let inverse = match self.default_weights {
            DefaultWeights::Auto => !equal,
            DefaultWeights::Uniform => false,
            DefaultWeights::InverseLength => true,
        };
        Ok(self
            .series
            .iter()
            .map(|s| if inverse { 1.0 / s.len() as f64 } else { 1.0 })
            .collect())
    }

    pub fn resolved_length(&self) -> usize {
        self.barycenter_length.unwrap_or_else(|| {
            let mut lens: Vec<usize> = self.series.iter().map(TimeSeries::len).collect();
            lens.sort_unstable();
            lens[lens.len() / 2]
        })
    }

    fn validate(&self) -> Result<()> {
        if self.series.is_empty() {
            return Err(Error::EmptyInput("averaging problem has no series"));
        }
        let d = self.series[0].dim();
        if self.series.iter().any(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch("series have different feature counts".into()));
        }
        if !self.kind.is_differentiable() {
            return Err(Error::NotDifferentiable(self.kind.name()));
        }
        self.kind.validate()?;
        if self.barycenter_length == Some(0) {
            return Err(Error::InvalidParameter("barycenter length must be positive".into()));
        }
        if self.kind == DivergenceKind::Euclidean
            && self.series.iter().any(|s| s.len() != self.resolved_length())
        {
            return Err(Error::DimensionMismatch(
                "euclidean averaging needs every series at the barycenter length".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Barycenter {
    pub series: TimeSeries,
    /// Objective after every accepted step of the final stage, starting at
    /// the initial point.
    pub objective_trace: Vec<f64>,
    /// Trace of the biased warm-start stage, when one ran.
    pub warm_start_trace: Option<Vec<f64>>,
    pub iterations: usize,
    pub termination: Termination,
}

/// Pointwise mean after resampling every series to `len`.
pub fn euclidean_mean(series: &[TimeSeries], weights: &[f64], len: usize) -> Result<TimeSeries> {
    let d = series[0].dim();
    let mut acc = Array2::<f64>::zeros((len, d));
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidParameter("weights sum to zero".into()));
    }
    for (s, w) in series.iter().zip(weights) {
        let r = if s.len() == len { s.clone() } else { s.resample(len)? };
        acc.scaled_add(*w / total, r.values());
    }
    TimeSeries::new(acc)
}

/// Summed objective and gradient over the targets, reduced in index order.
fn objective(
    kind: DivergenceKind,
    cost: CostKind,
    targets: &[TimeSeries],
    weights: &[f64],
    self_terms: &[Option<f64>],
    x: &Array2<f64>,
) -> Result<(f64, Array2<f64>)> {
    let xs = TimeSeries::new(x.clone())?;
    let parts: Vec<Result<(f64, Array2<f64>)>> = targets
        .par_iter()
        .zip(self_terms.par_iter())
        .map(|(y, ys)| divergences::value_and_grad(kind, &xs, y, cost, *ys))
        .collect();
    let mut value = 0.0;
    let mut grad = Array2::<f64>::zeros(x.dim());
    for (part, w) in parts.into_iter().zip(weights) {
        let (v, g) = part?;
        value += w * v;
        grad.scaled_add(*w, &g);
    }
    Ok((value, grad))
}

fn run_stage(
    kind: DivergenceKind,
    cost: CostKind,
    series: &[TimeSeries],
    weights: &[f64],
    x0: Array2<f64>,
    opts: &LbfgsOptions,
) -> Result<optim::Minimum> {
    let self_terms: Vec<Option<f64>> = if kind.is_divergence() {
        series
            .par_iter()
            .map(|y| divergences::self_term(kind, y, cost).map(Some))
            .collect::<Result<_>>()?
    } else {
        vec![None; series.len()]
    };
    optim::minimize(
        |x| objective(kind, cost, series, weights, &self_terms, x),
        x0,
        opts,
    )
}

/// Approximate minimiser of `Σ w_i · kind(X, Y_i)`.
pub fn frechet_mean(problem: &AveragingProblem, max_iters: usize) -> Result<Barycenter> {
    frechet_mean_with(
        problem,
        &LbfgsOptions {
            max_iters,
            ..LbfgsOptions::default()
        },
    )
}

pub fn frechet_mean_with(problem: &AveragingProblem, opts: &LbfgsOptions) -> Result<Barycenter> {
    problem.validate()?;
    let weights = problem.resolved_weights()?;
    let len = problem.resolved_length();
    let (x0, warm_start_trace) = match &problem.init {
        InitScheme::Explicit(x) => {
            if x.dim() != problem.series[0].dim() {
                return Err(Error::DimensionMismatch("initial point has the wrong feature count".into()));
            }
            (x.values().clone(), None)
        }
        InitScheme::EuclideanMean => (euclidean_mean(&problem.series, &weights, len)?.into_inner(), None),
        InitScheme::WarmStartBiased => {
            let mean = euclidean_mean(&problem.series, &weights, len)?.into_inner();
            if problem.kind.is_divergence() {
                let warm = run_stage(problem.kind.biased(), problem.cost, &problem.series, &weights, mean, opts)?;
                (warm.x, Some(warm.trace))
            } else {
                (mean, None)
            }
        }
    };
    let res = run_stage(problem.kind, problem.cost, &problem.series, &weights, x0, opts)?;
    Ok(Barycenter {
        series: TimeSeries::new(res.x)?,
        objective_trace: res.trace,
        warm_start_trace,
        iterations: res.iterations,
        termination: res.termination,
    })
}

/// Weighted average of two series with weights `(π, 1 − π)`.
#[allow(clippy::too_many_arguments)]
pub fn interpolate(
    y1: &TimeSeries,
    y2: &TimeSeries,
    pi: f64,
    kind: DivergenceKind,
    cost: CostKind,
    length: Option<usize>,
    init: InitScheme,
    max_iters: usize,
) -> Result<Barycenter> {
    if !(0.0..=1.0).contains(&pi) {
        return Err(Error::InvalidParameter(format!("interpolation weight {pi} is outside [0, 1]")));
    }
    let problem = AveragingProblem {
        series: vec![y1.clone(), y2.clone()],
        weights: Some(vec![pi, 1.0 - pi]),
        default_weights: DefaultWeights::Uniform,
        kind,
        cost,
        barycenter_length: Some(length.unwrap_or_else(|| y1.len().max(y2.len()))),
        init,
    };
    frechet_mean(&problem, max_iters)
}
