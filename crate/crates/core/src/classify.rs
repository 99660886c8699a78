//! Nearest-neighbour and nearest-centroid classification with temperature
//! selection by repeated random hold-out.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barycenter::{frechet_mean, AveragingProblem};
use crate::costs::{CostKind, TimeSeries};
use crate::divergences::{self, DivergenceKind};
use crate::error::{Error, Result};

pub type Label = i64;

/// Temperatures tried by default: `10^-4, ..., 10^4`.
pub const DEFAULT_GAMMA_GRID: [f64; 9] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4];

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub series: Vec<TimeSeries>,
    pub labels: Vec<Label>,
}

impl LabeledDataset {
    pub fn new(series: Vec<TimeSeries>, labels: Vec<Label>) -> Result<Self> {
        if series.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} series but {} labels",
                series.len(),
                labels.len()
            )));
        }
        Ok(LabeledDataset { series, labels })
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> Vec<Label> {
        let mut c = self.labels.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn subset(&self, idx: &[usize]) -> LabeledDataset {
        LabeledDataset {
            series: idx.iter().map(|&i| self.series[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Fraction of matching labels.
pub fn accuracy(predicted: &[Label], truth: &[Label]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

/// Accuracy as a percentage with two decimals, e.g. `"98.67"`.
pub fn format_accuracy(acc: Option<f64>) -> String {
    match acc {
        Some(a) => format!("{:.2}", 100.0 * a),
        None => "NA".to_string(),
    }
}

/// Self terms of every series for divergence kinds, `None` otherwise.
fn self_terms(kind: DivergenceKind, series: &[TimeSeries], cost: CostKind) -> Result<Vec<Option<f64>>> {
    if !kind.is_divergence() {
        return Ok(vec![None; series.len()]);
    }
    series
        .par_iter()
        .map(|s| divergences::self_term(kind, s, cost).map(Some))
        .collect()
}

fn pair_value(
    kind: DivergenceKind,
    cost: CostKind,
    x: &TimeSeries,
    y: &TimeSeries,
    xs: Option<f64>,
    ys: Option<f64>,
) -> Result<f64> {
    match (xs, ys) {
        (Some(a), Some(b)) => divergences::divergence_with_self_terms(kind, x, y, cost, a, b),
        _ => divergences::evaluate(kind, x, y, cost),
    }
}

/// Divergence from every test series (rows) to every reference (columns).
fn pairwise(
    kind: DivergenceKind,
    cost: CostKind,
    test: &[TimeSeries],
    refs: &[TimeSeries],
    ref_self: &[Option<f64>],
) -> Result<Vec<Vec<f64>>> {
    let test_self = self_terms(kind, test, cost)?;
    test.par_iter()
        .zip(test_self.par_iter())
        .map(|(x, xs)| {
            refs.iter()
                .zip(ref_self)
                .map(|(y, ys)| pair_value(kind, cost, x, y, *xs, *ys))
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

fn vote(dists: &[f64], labels: &[Label], k: usize) -> Label {
    let mut order: Vec<usize> = (0..dists.len()).collect();
    order.sort_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(a.cmp(&b)));
    // label -> (votes, summed divergence)
    let mut tally: BTreeMap<Label, (usize, f64)> = BTreeMap::new();
    for &i in order.iter().take(k) {
        let e = tally.entry(labels[i]).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += dists[i];
    }
    let mut best: Option<(Label, usize, f64)> = None;
    for (&label, &(votes, sum)) in &tally {
        let better = match best {
            None => true,
            Some((_, bv, bs)) => votes > bv || (votes == bv && sum < bs),
        };
        if better {
            best = Some((label, votes, sum));
        }
    }
    best.expect("k >= 1 and train non-empty").0
}

/// `k`-nearest-neighbour prediction. Ties in the vote go to the label with
/// the smaller summed divergence, then to the smaller label.
pub fn knn_predict(
    train: &LabeledDataset,
    test: &[TimeSeries],
    kind: DivergenceKind,
    cost: CostKind,
    k: usize,
) -> Result<Vec<Label>> {
    if train.is_empty() {
        return Err(Error::EmptyInput("training set"));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    kind.validate()?;
    let train_self = self_terms(kind, &train.series, cost)?;
    let d = pairwise(kind, cost, test, &train.series, &train_self)?;
    Ok(d.iter().map(|row| vote(row, &train.labels, k)).collect())
}

/// Per-class averages under a fixed discrepancy.
#[derive(Debug, Clone)]
pub struct CentroidModel {
    pub centroids: BTreeMap<Label, TimeSeries>,
    pub kind: DivergenceKind,
    pub cost: CostKind,
    self_terms: Vec<Option<f64>>,
}

impl CentroidModel {
    pub fn labels(&self) -> Vec<Label> {
        self.centroids.keys().copied().collect()
    }
}

/// Fits one centroid per class with the default averaging protocol.
pub fn fit_centroids(
    train: &LabeledDataset,
    kind: DivergenceKind,
    cost: CostKind,
    max_iters: usize,
) -> Result<CentroidModel> {
    if train.is_empty() {
        return Err(Error::EmptyInput("training set"));
    }
    if !kind.is_differentiable() {
        return Err(Error::NotDifferentiable(kind.name()));
    }
    let classes = train.classes();
    let fitted: Vec<(Label, TimeSeries)> = classes
        .par_iter()
        .map(|&label| {
            let members: Vec<TimeSeries> = train
                .series
                .iter()
                .zip(&train.labels)
                .filter(|(_, l)| **l == label)
                .map(|(s, _)| s.clone())
                .collect();
            let problem = AveragingProblem::new(members, kind, cost);
            frechet_mean(&problem, max_iters).map(|b| (label, b.series))
        })
        .collect::<Result<_>>()?;
    let centroids: BTreeMap<Label, TimeSeries> = fitted.into_iter().collect();
    let series: Vec<TimeSeries> = centroids.values().cloned().collect();
    let self_terms = self_terms(kind, &series, cost)?;
    Ok(CentroidModel {
        centroids,
        kind,
        cost,
        self_terms,
    })
}

/// Label of the nearest centroid; ties go to the smaller label.
pub fn centroid_predict(model: &CentroidModel, test: &[TimeSeries]) -> Result<Vec<Label>> {
    let refs: Vec<TimeSeries> = model.centroids.values().cloned().collect();
    let labels = model.labels();
    let d = pairwise(model.kind, model.cost, test, &refs, &model.self_terms)?;
    Ok(d.iter()
        .map(|row| {
            let mut best = 0;
            for (i, v) in row.iter().enumerate() {
                if *v < row[best] {
                    best = i;
                }
            }
            labels[best]
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Knn { k: usize },
    NearestCentroid { max_iters: usize },
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Method::Knn { k } => format!("{k}nn"),
            Method::NearestCentroid { .. } => "centroid".to_string(),
        }
    }

    pub fn k(&self) -> Option<usize> {
        match self {
            Method::Knn { k } => Some(*k),
            Method::NearestCentroid { .. } => None,
        }
    }
}

/// Fit on `train`, predict `test`.
pub fn fit_predict(
    method: Method,
    train: &LabeledDataset,
    test: &[TimeSeries],
    kind: DivergenceKind,
    cost: CostKind,
) -> Result<Vec<Label>> {
    match method {
        Method::Knn { k } => knn_predict(train, test, kind, cost, k),
        Method::NearestCentroid { max_iters } => {
            centroid_predict(&fit_centroids(train, kind, cost, max_iters)?, test)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSelection {
    /// `None` for kinds without a temperature; no validation ran.
    pub gamma: Option<f64>,
    /// `(gamma, mean held-out accuracy over splits)` in grid order.
    pub scores: Vec<(f64, f64)>,
    pub seed: u64,
    pub splits: usize,
    /// How per-split accuracies are combined.
    pub aggregation: String,
}

/// Draws a 2/3 - 1/3 split stratified by label. Retries up to 100 times if a
/// class is missing from the training part or nothing is held out, then
/// falls back to an unstratified split.
pub fn stratified_split(data: &LabeledDataset, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let classes = data.classes();
    let degenerate = |fit: &[usize], held: &[usize]| {
        held.is_empty() || classes.iter().any(|c| !fit.iter().any(|&i| data.labels[i] == *c))
    };
    for _ in 0..100 {
        let mut fit = Vec::new();
        let mut held = Vec::new();
        for c in &classes {
            let mut idx: Vec<usize> = (0..data.len()).filter(|&i| data.labels[i] == *c).collect();
            idx.shuffle(rng);
            let n_fit = (2 * idx.len()).div_ceil(3);
            fit.extend_from_slice(&idx[..n_fit]);
            held.extend_from_slice(&idx[n_fit..]);
        }
        if !degenerate(&fit, &held) {
            fit.sort_unstable();
            held.sort_unstable();
            return (fit, held);
        }
    }
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(rng);
    let n_fit = (2 * idx.len()).div_ceil(3).min(idx.len().saturating_sub(1)).max(1);
    let (a, b) = idx.split_at(n_fit.min(idx.len()));
    let (mut fit, mut held) = (a.to_vec(), b.to_vec());
    fit.sort_unstable();
    held.sort_unstable();
    (fit, held)
}

/// Picks the temperature with the best mean held-out accuracy over `splits`
/// random splits. Ties go to the smaller temperature.
#[allow(clippy::too_many_arguments)]
pub fn select_gamma(
    train: &LabeledDataset,
    kind: DivergenceKind,
    cost: CostKind,
    method: Method,
    grid: &[f64],
    splits: usize,
    seed: u64,
) -> Result<GammaSelection> {
    let aggregation = "mean".to_string();
    if !kind.uses_gamma() {
        return Ok(GammaSelection {
            gamma: None,
            scores: Vec::new(),
            seed,
            splits: 0,
            aggregation,
        });
    }
    if grid.is_empty() {
        return Err(Error::InvalidParameter("gamma grid is empty".into()));
    }
    if train.is_empty() {
        return Err(Error::EmptyInput("training set"));
    }
    if grid.len() == 1 {
        return Ok(GammaSelection {
            gamma: Some(grid[0]),
            scores: vec![(grid[0], f64::NAN)],
            seed,
            splits: 0,
            aggregation,
        });
    }
    let splits = splits.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drawn: Vec<(Vec<usize>, Vec<usize>)> =
        (0..splits).map(|_| stratified_split(train, &mut rng)).collect();
    let mut scores = Vec::with_capacity(grid.len());
    for &g in grid {
        let k = kind.with_gamma(g);
        let mut total = 0.0;
        for (fit, held) in &drawn {
            let fit_set = train.subset(fit);
            let held_set = train.subset(held);
            let pred = fit_predict(method, &fit_set, &held_set.series, k, cost)?;
            total += accuracy(&pred, &held_set.labels);
        }
        scores.push((g, total / splits as f64));
    }
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        let (bg, bs) = scores[best];
        if s.1 > bs || (s.1 == bs && s.0 < bg) {
            best = i;
        }
    }
    Ok(GammaSelection {
        gamma: Some(scores[best].0),
        scores,
        seed,
        splits,
        aggregation,
    })
}

/// How the temperature is chosen for a classification run.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaChoice {
    Fixed(f64),
    CrossValidate { grid: Vec<f64>, splits: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolOutcome {
    pub gamma: Option<f64>,
    /// Test accuracy in `[0, 1]`; `None` when the time budget ran out.
    pub accuracy: Option<f64>,
    pub selection: Option<GammaSelection>,
    pub predictions: Vec<Label>,
}

/// Full protocol: optional temperature selection on the training set, then
/// refit on all of it and score the test set.
#[allow(clippy::too_many_arguments)]
pub fn run_protocol(
    train: &LabeledDataset,
    test: &LabeledDataset,
    kind: DivergenceKind,
    cost: CostKind,
    method: Method,
    gamma: &GammaChoice,
    seed: u64,
    budget: Option<Duration>,
) -> Result<ProtocolOutcome> {
    let start = Instant::now();
    let over = || budget.is_some_and(|b| start.elapsed() > b);
    let (kind, selection) = match gamma {
        _ if !kind.uses_gamma() => (kind, None),
        GammaChoice::Fixed(g) => (kind.with_gamma(*g), None),
        GammaChoice::CrossValidate { grid, splits } => {
            let sel = select_gamma(train, kind, cost, method, grid, *splits, seed)?;
            let g = sel.gamma.expect("gamma-dependent kind");
            (kind.with_gamma(g), Some(sel))
        }
    };
    kind.validate()?;
    if over() {
        return Ok(ProtocolOutcome {
            gamma: kind.gamma(),
            accuracy: None,
            selection,
            predictions: Vec::new(),
        });
    }
    let predictions = fit_predict(method, train, &test.series, kind, cost)?;
    let acc = (!over()).then(|| accuracy(&predictions, &test.labels));
    Ok(ProtocolOutcome {
        gamma: kind.gamma(),
        accuracy: acc,
        selection,
        predictions,
    })
}
