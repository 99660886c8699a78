//! Dynamic programs over an `m × n` cost matrix.
//!
//! The forward pass records, for every cell, the probabilities of stepping in
//! from each of its three predecessors. Everything downstream (expected
//! alignment, directional derivative, Hessian product, mean cost) is a linear
//! sweep over that tensor, so one forward pass serves all of them.
//!
//! Predecessor components are always ordered `(left, diagonal, up)`, i.e.
//! `(i, j-1)`, `(i-1, j-1)`, `(i-1, j)`. Cell `(0, 0)` steps in diagonally from
//! a virtual origin, so its triple is `(0, 1, 0)`.

use ndarray::{Array2, Array3, ArrayView2};
use num_bigint::BigUint;

use crate::error::{Error, Result};

pub(crate) const LEFT: usize = 0;
pub(crate) const DIAG: usize = 1;
pub(crate) const UP: usize = 2;

const SUM_TOL: f64 = 1e-12;

/// A finite `m × n` ground-cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix(Array2<f64>);

impl CostMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::EmptyInput("cost matrix"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("cost matrix"));
        }
        Ok(CostMatrix(values))
    }

    /// Row-major construction from nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("ragged cost rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let values = Array2::from_shape_vec((m, n), flat)
            .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        Self::new(values)
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.dim()
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

    /// `C * factor`; fails if the product overflows.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(&self.0 * factor)
    }
}

/// Which distribution over alignments a [`TransitionTensor`] encodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransitionSource {
    /// Gibbs distribution at temperature `gamma > 0`.
    Gibbs(f64),
    /// Point mass on the tie-broken optimal path (`gamma = 0`).
    Hard,
    /// Uniform distribution over all alignments.
    Uniform,
}

/// Per-cell predecessor probabilities of the random walk over the alignment DAG.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTensor {
    p: Array3<f64>,
    source: TransitionSource,
}

impl TransitionTensor {
    /// Wraps a raw `m × n × 3` tensor after checking every cell is a
    /// probability triple with no mass on out-of-grid predecessors.
    pub fn from_array(p: Array3<f64>, source: TransitionSource) -> Result<Self> {
        let (m, n, k) = p.dim();
        if m == 0 || n == 0 {
            return Err(Error::EmptyInput("transition tensor"));
        }
        if k != 3 {
            return Err(Error::DimensionMismatch(format!(
                "transition tensor needs 3 components per cell, got {k}"
            )));
        }
        for i in 0..m {
            for j in 0..n {
                let t = [p[[i, j, LEFT]], p[[i, j, DIAG]], p[[i, j, UP]]];
                if t.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::Invariant(format!(
                        "transition ({i},{j}) has an entry outside [0, 1]"
                    )));
                }
                let origin = i == 0 && j == 0;
                let outside = (j == 0 && t[LEFT] != 0.0)
                    || (!origin && (i == 0 || j == 0) && t[DIAG] != 0.0)
                    || (i == 0 && t[UP] != 0.0);
                if outside {
                    return Err(Error::Invariant(format!(
                        "transition ({i},{j}) puts mass outside the grid"
                    )));
                }
                let s: f64 = t.iter().sum();
                if (s - 1.0).abs() > SUM_TOL {
                    return Err(Error::Invariant(format!(
                        "transition ({i},{j}) sums to {s}"
                    )));
                }
            }
        }
        Ok(TransitionTensor { p, source })
    }

    pub fn shape(&self) -> (usize, usize) {
        let (m, n, _) = self.p.dim();
        (m, n)
    }

    pub fn source(&self) -> TransitionSource {
        self.source
    }

    pub fn as_array(&self) -> &Array3<f64> {
        &self.p
    }

    #[inline]
    fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.p[[i, j, k]]
    }
}

/// A binary monotonic path from `(0, 0)` to `(m-1, n-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlignmentMatrix {
    cells: Array2<u8>,
}

impl AlignmentMatrix {
    /// Builds the matrix from a sequence of visited cells, validating the
    /// step structure.
    pub fn from_path(m: usize, n: usize, path: &[(usize, usize)]) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::EmptyInput("alignment"));
        }
        if path.first() != Some(&(0, 0)) || path.last() != Some(&(m - 1, n - 1)) {
            return Err(Error::Invariant(
                "alignment must start at (0,0) and end at (m-1,n-1)".into(),
            ));
        }
        let mut cells = Array2::zeros((m, n));
        for w in path.windows(2) {
            let (di, dj) = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
            if !matches!((di, dj), (0, 1) | (1, 1) | (1, 0)) {
                return Err(Error::Invariant(format!(
                    "illegal step {:?} -> {:?}",
                    w[0], w[1]
                )));
            }
        }
        for &(i, j) in path {
            cells[[i, j]] = 1;
        }
        Ok(AlignmentMatrix { cells })
    }

    pub fn cells(&self) -> &Array2<u8> {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.iter().filter(|&&c| c == 1).count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `⟨A, C⟩`.
    pub fn cost(&self, c: ArrayView2<'_, f64>) -> f64 {
        self.cells
            .iter()
            .zip(c.iter())
            .filter(|(&a, _)| a == 1)
            .map(|(_, &v)| v)
            .sum()
    }

    pub fn to_f64(&self) -> Array2<f64> {
        self.cells.mapv(f64::from)
    }

    /// Checks the structural invariants: endpoints set, ones form a
    /// monotone connected path, and the path length is admissible.
    pub fn is_valid(&self) -> bool {
        let (m, n) = self.cells.dim();
        if self.cells[[0, 0]] != 1 || self.cells[[m - 1, n - 1]] != 1 {
            return false;
        }
        let (mut i, mut j) = (0, 0);
        let mut visited = 1;
        while (i, j) != (m - 1, n - 1) {
            let on = |a: usize, b: usize| a < m && b < n && self.cells[[a, b]] == 1;
            // a diagonal neighbour next to a straight one is reached through it
            (i, j) = match (on(i, j + 1), on(i + 1, j), on(i + 1, j + 1)) {
                (true, true, _) | (false, false, false) => return false,
                (true, false, _) => (i, j + 1),
                (false, true, _) => (i + 1, j),
                (false, false, true) => (i + 1, j + 1),
            };
            visited += 1;
        }
        visited == self.len() && visited >= m.max(n) && visited < m + n
    }
}

/// Expected alignment matrix: per-cell visit probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedAlignment(Array2<f64>);

impl ExpectedAlignment {
    pub fn values(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }
}

/// Frobenius inner product of two equally shaped matrices.
pub fn inner(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Predecessor values of cell `(i, j)` in `(left, diag, up)` order, `None`
/// where the predecessor lies outside the grid.
#[inline]
fn predecessors(v: &Array2<f64>, i: usize, j: usize) -> [Option<f64>; 3] {
    if i == 0 && j == 0 {
        return [None, Some(0.0), None];
    }
    [
        (j > 0).then(|| v[[i, j - 1]]),
        (i > 0 && j > 0).then(|| v[[i - 1, j - 1]]),
        (i > 0).then(|| v[[i - 1, j]]),
    ]
}

/// Smoothed minimum of the available arguments and its gradient.
///
/// Evaluated as `m* - γ log Σ exp(-(v - m*)/γ)` with `m*` the hard minimum.
/// With `gamma == 0` the gradient is the indicator of the first minimiser.
#[inline]
fn soft_min(args: [Option<f64>; 3], gamma: f64) -> (f64, [f64; 3]) {
    let mut best = f64::INFINITY;
    let mut arg = 0;
    for (k, a) in args.iter().enumerate() {
        if let Some(v) = *a {
            if v < best {
                best = v;
                arg = k;
            }
        }
    }
    let mut grad = [0.0; 3];
    if gamma == 0.0 {
        grad[arg] = 1.0;
        return (best, grad);
    }
    let mut total = 0.0;
    for (k, a) in args.iter().enumerate() {
        if let Some(v) = *a {
            let w = (-(v - best) / gamma).exp();
            grad[k] = w;
            total += w;
        }
    }
    for g in &mut grad {
        *g /= total;
    }
    (best - gamma * total.ln(), grad)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_nan() || gamma < 0.0 || gamma.is_infinite() {
        return Err(Error::InvalidParameter(format!(
            "gamma must be finite and non-negative, got {gamma}"
        )));
    }
    Ok(())
}

/// Soft-DTW value and the transition tensor of its Gibbs random walk.
///
/// `gamma == 0` gives the hard DTW value, with the transitions being the 0/1
/// indicator of the tie-broken optimal predecessor of each cell.
pub fn soft_dtw_forward(c: &CostMatrix, gamma: f64) -> Result<(f64, TransitionTensor)> {
    check_gamma(gamma)?;
    let (m, n) = c.shape();
    let cv = c.view();
    let mut v = Array2::<f64>::zeros((m, n));
    let mut p = Array3::<f64>::zeros((m, n, 3));
    for i in 0..m {
        for j in 0..n {
            let (smin, grad) = soft_min(predecessors(&v, i, j), gamma);
            v[[i, j]] = cv[[i, j]] + smin;
            for (k, g) in grad.into_iter().enumerate() {
                p[[i, j, k]] = g;
            }
        }
    }
    let value = v[[m - 1, n - 1]];
    if !value.is_finite() {
        return Err(Error::Numerical(format!("soft-DTW value overflowed ({value})")));
    }
    let source = if gamma == 0.0 {
        TransitionSource::Hard
    } else {
        TransitionSource::Gibbs(gamma)
    };
    Ok((value, TransitionTensor { p, source }))
}

/// Soft-DTW value only.
pub fn soft_dtw(c: &CostMatrix, gamma: f64) -> Result<f64> {
    soft_dtw_forward(c, gamma).map(|(v, _)| v)
}

/// Hard DTW value with a backtracked optimal path.
///
/// Ties are broken towards the first minimal predecessor in
/// `(left, diag, up)` order.
pub fn hard_dtw(c: &CostMatrix) -> Result<(f64, AlignmentMatrix)> {
    let (value, transitions) = soft_dtw_forward(c, 0.0)?;
    let (m, n) = c.shape();
    let mut path = vec![(m - 1, n - 1)];
    let (mut i, mut j) = (m - 1, n - 1);
    while (i, j) != (0, 0) {
        let k = (0..3)
            .find(|&k| transitions.at(i, j, k) == 1.0)
            .expect("hard transitions are one-hot");
        (i, j) = match k {
            LEFT => (i, j - 1),
            DIAG => (i - 1, j - 1),
            _ => (i - 1, j),
        };
        path.push((i, j));
    }
    path.reverse();
    Ok((value, AlignmentMatrix::from_path(m, n, &path)?))
}

/// Backward sweep giving the marginal visit probability of every cell.
///
/// For transitions from [`soft_dtw_forward`] this is `∇_C sdtw_γ(C)`.
pub fn expected_alignment(t: &TransitionTensor) -> ExpectedAlignment {
    let (m, n) = t.shape();
    let mut e = Array2::<f64>::zeros((m, n));
    e[[m - 1, n - 1]] = 1.0;
    for j in (0..n).rev() {
        for i in (0..m).rev() {
            if i == m - 1 && j == n - 1 {
                continue;
            }
            let mut acc = 0.0;
            if j + 1 < n {
                acc += t.at(i, j + 1, LEFT) * e[[i, j + 1]];
            }
            if i + 1 < m && j + 1 < n {
                acc += t.at(i + 1, j + 1, DIAG) * e[[i + 1, j + 1]];
            }
            if i + 1 < m {
                acc += t.at(i + 1, j, UP) * e[[i + 1, j]];
            }
            e[[i, j]] = acc;
        }
    }
    ExpectedAlignment(e)
}

fn check_shape(t: &TransitionTensor, z: ArrayView2<'_, f64>, what: &str) -> Result<()> {
    if t.shape() != z.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {:?}, transitions are {:?}",
            z.dim(),
            t.shape()
        )));
    }
    Ok(())
}

/// Directional derivative `⟨E, Z⟩` by a forward sweep.
///
/// Also returns the table of per-cell directional derivatives of the DP
/// values, which [`hessian_product`] consumes.
pub fn directional_derivative(
    t: &TransitionTensor,
    z: ArrayView2<'_, f64>,
) -> Result<(f64, Array2<f64>)> {
    check_shape(t, z, "direction")?;
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("direction"));
    }
    let (m, n) = t.shape();
    let mut vdot = Array2::<f64>::zeros((m, n));
    for i in 0..m {
        for j in 0..n {
            let pred = predecessors(&vdot, i, j);
            let mut acc = z[[i, j]];
            for (k, pv) in pred.into_iter().enumerate() {
                if let Some(pv) = pv {
                    acc += t.at(i, j, k) * pv;
                }
            }
            vdot[[i, j]] = acc;
        }
    }
    Ok((vdot[[m - 1, n - 1]], vdot))
}

/// `∇²_C sdtw_γ(C) · Z`.
///
/// `vdot` must come from [`directional_derivative`] with the same `Z`, and
/// `e` from [`expected_alignment`] on the same transitions. Only Gibbs
/// transitions (`γ > 0`) have a Hessian.
pub fn hessian_product(
    t: &TransitionTensor,
    vdot: ArrayView2<'_, f64>,
    e: &ExpectedAlignment,
    z: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    check_shape(t, z, "direction")?;
    check_shape(t, vdot, "vdot")?;
    check_shape(t, e.view(), "expected alignment")?;
    let gamma = match t.source() {
        TransitionSource::Gibbs(g) => g,
        other => {
            return Err(Error::InvalidParameter(format!(
                "Hessian product needs Gibbs transitions, got {other:?}"
            )))
        }
    };
    let (m, n) = t.shape();
    let e = e.view();
    let vdot = vdot.to_owned();
    let mut pdot = Array3::<f64>::zeros((m, n, 3));
    let mut edot = Array2::<f64>::zeros((m, n));
    for j in (0..n).rev() {
        for i in (0..m).rev() {
            let pred = predecessors(&vdot, i, j);
            let s: f64 = pred
                .iter()
                .enumerate()
                .map(|(k, pv)| pv.map_or(0.0, |pv| t.at(i, j, k) * pv))
                .sum();
            for (k, pv) in pred.into_iter().enumerate() {
                pdot[[i, j, k]] = t.at(i, j, k) * (s - pv.unwrap_or(0.0)) / gamma;
            }
            if i == m - 1 && j == n - 1 {
                continue;
            }
            let mut acc = 0.0;
            if j + 1 < n {
                acc += pdot[[i, j + 1, LEFT]] * e[[i, j + 1]] + t.at(i, j + 1, LEFT) * edot[[i, j + 1]];
            }
            if i + 1 < m && j + 1 < n {
                acc += pdot[[i + 1, j + 1, DIAG]] * e[[i + 1, j + 1]]
                    + t.at(i + 1, j + 1, DIAG) * edot[[i + 1, j + 1]];
            }
            if i + 1 < m {
                acc += pdot[[i + 1, j, UP]] * e[[i + 1, j]] + t.at(i + 1, j, UP) * edot[[i + 1, j]];
            }
            edot[[i, j]] = acc;
        }
    }
    Ok(edot)
}

/// Transitions of the uniform distribution over all alignments of an
/// `m × n` grid.
///
/// Path counts are carried in log space, so this works far past the point
/// where the counts themselves overflow a float.
pub fn uniform_transitions(m: usize, n: usize) -> Result<TransitionTensor> {
    if m == 0 || n == 0 {
        return Err(Error::EmptyInput("alignment grid"));
    }
    // -log(#paths into each cell) is soft-DTW on a zero cost at unit temperature.
    let zero = CostMatrix(Array2::zeros((m, n)));
    let (_, t) = soft_dtw_forward(&zero, 1.0)?;
    Ok(TransitionTensor {
        p: t.p,
        source: TransitionSource::Uniform,
    })
}

/// Natural log of the number of alignments of an `m × n` grid.
pub fn log_alignment_count(m: usize, n: usize) -> Result<f64> {
    if m == 0 || n == 0 {
        return Err(Error::EmptyInput("alignment grid"));
    }
    let zero = CostMatrix(Array2::zeros((m, n)));
    Ok(-soft_dtw(&zero, 1.0)?)
}

/// Exact number of alignments, `Delannoy(m-1, n-1)`.
pub fn alignment_cardinality(m: usize, n: usize) -> Result<BigUint> {
    if m == 0 || n == 0 {
        return Err(Error::EmptyInput("alignment grid"));
    }
    let mut prev = vec![BigUint::from(0u8); n];
    let mut cur = vec![BigUint::from(0u8); n];
    for i in 0..m {
        for j in 0..n {
            cur[j] = if i == 0 && j == 0 {
                BigUint::from(1u8)
            } else {
                let mut acc = BigUint::from(0u8);
                if j > 0 {
                    acc += &cur[j - 1];
                }
                if i > 0 && j > 0 {
                    acc += &prev[j - 1];
                }
                if i > 0 {
                    acc += &prev[j];
                }
                acc
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev.pop().expect("n >= 1"))
}

/// Exact alignment count together with the uniform transitions.
pub fn alignment_count(m: usize, n: usize) -> Result<(BigUint, TransitionTensor)> {
    Ok((alignment_cardinality(m, n)?, uniform_transitions(m, n)?))
}

/// Average alignment cost under the uniform distribution, with the mean
/// alignment (which is also its gradient in `C`).
pub fn mean_cost(c: &CostMatrix) -> Result<(f64, ExpectedAlignment)> {
    let (m, n) = c.shape();
    let t = uniform_transitions(m, n)?;
    let (value, _) = directional_derivative(&t, c.view())?;
    Ok((value, expected_alignment(&t)))
}

/// `⟨E_γ(C), C⟩` and the pieces needed to differentiate it.
pub(crate) struct SharpParts {
    pub value: f64,
    pub transitions: TransitionTensor,
    pub vdot: Array2<f64>,
    pub expected: ExpectedAlignment,
}

pub(crate) fn sharp_parts(c: &CostMatrix, gamma: f64) -> Result<SharpParts> {
    let (_, transitions) = soft_dtw_forward(c, gamma)?;
    let (value, vdot) = directional_derivative(&transitions, c.view())?;
    let expected = expected_alignment(&transitions);
    Ok(SharpParts {
        value,
        transitions,
        vdot,
        expected,
    })
}
