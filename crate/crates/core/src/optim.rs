//! Limited-memory BFGS with a strong-Wolfe line search, over matrix-shaped
//! variables.

use std::collections::VecDeque;

use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsOptions {
    pub max_iters: usize,
    /// Stop once `‖∇f‖_∞` falls to this value.
    pub grad_tol: f64,
    pub history: usize,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Function evaluations allowed per line search.
    pub max_line_search: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            max_iters: 200,
            grad_tol: 1e-8,
            history: 10,
            c1: 1e-4,
            c2: 0.9,
            max_line_search: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    MaxIterations,
    /// No step along the search direction decreased the objective. The best
    /// iterate found so far is returned.
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Array2<f64>,
    pub value: f64,
    pub grad: Array2<f64>,
    pub iterations: usize,
    /// Objective value at the start point and after every accepted step.
    pub trace: Vec<f64>,
    pub termination: Termination,
}

impl Minimum {
    /// True when the run stopped because the line search could not progress.
    pub fn line_search_failed(&self) -> bool {
        self.termination == Termination::LineSearchFailed
    }
}

#[inline]
fn dot(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

struct Point {
    alpha: f64,
    x: Array2<f64>,
    f: f64,
    g: Array2<f64>,
    /// Directional derivative along the search direction.
    dphi: f64,
}

/// Minimises `objective`, which returns the value and gradient at a point.
///
/// Fails only if the objective errors or is non-finite at `x0`; any later
/// breakdown is reported through [`Minimum::termination`].
pub fn minimize<F>(mut objective: F, x0: Array2<f64>, opts: &LbfgsOptions) -> Result<Minimum>
where
    F: FnMut(&Array2<f64>) -> Result<(f64, Array2<f64>)>,
{
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("optimizer start point"));
    }
    let (f0, g0) = objective(&x0)?;
    if !f0.is_finite() || g0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "objective is not finite at the start point ({f0})"
        )));
    }
    let mut x = x0;
    let mut f = f0;
    let mut g = g0;
    let mut trace = vec![f];
    let mut memory: VecDeque<(Array2<f64>, Array2<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;
    let mut termination = Termination::MaxIterations;

    while iterations < opts.max_iters {
        if max_abs(&g) <= opts.grad_tol {
            termination = Termination::GradientTolerance;
            break;
        }
        let mut d = two_loop(&g, &memory);
        if dot(&g, &d) >= 0.0 {
            memory.clear();
            d = -&g;
        }
        let alpha0 = if memory.is_empty() {
            (1.0 / max_abs(&g)).min(1.0)
        } else {
            1.0
        };
        let mut step = line_search(&mut objective, &x, f, &g, &d, alpha0, opts)?;
        if step.is_none() && !memory.is_empty() {
            memory.clear();
            d = -&g;
            step = line_search(&mut objective, &x, f, &g, &d, (1.0 / max_abs(&g)).min(1.0), opts)?;
        }
        let Some(p) = step else {
            termination = Termination::LineSearchFailed;
            break;
        };
        let s = &p.x - &x;
        let y = &p.g - &g;
        let sy = dot(&s, &y);
        if sy > 1e-10 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if memory.len() == opts.history {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }
        x = p.x;
        f = p.f;
        g = p.g;
        trace.push(f);
        iterations += 1;
    }
    if termination == Termination::MaxIterations && max_abs(&g) <= opts.grad_tol {
        termination = Termination::GradientTolerance;
    }
    Ok(Minimum {
        x,
        value: f,
        grad: g,
        iterations,
        trace,
        termination,
    })
}

/// `−H g` for the implicit inverse-Hessian approximation.
fn two_loop(g: &Array2<f64>, memory: &VecDeque<(Array2<f64>, Array2<f64>, f64)>) -> Array2<f64> {
    let mut q = g.clone();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * dot(s, &q);
        q.scaled_add(-a, y);
        alphas.push(a);
    }
    if let Some((s, y, _)) = memory.back() {
        q *= dot(s, y) / dot(y, y);
    }
    for ((s, y, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        q.scaled_add(a - b, s);
    }
    -q
}

fn line_search<F>(
    objective: &mut F,
    x: &Array2<f64>,
    f0: f64,
    g0: &Array2<f64>,
    d: &Array2<f64>,
    alpha0: f64,
    opts: &LbfgsOptions,
) -> Result<Option<Point>>
where
    F: FnMut(&Array2<f64>) -> Result<(f64, Array2<f64>)>,
{
    let dphi0 = dot(g0, d);
    let mut evals = 0;
    let mut eval = |alpha: f64, evals: &mut usize| -> Result<Point> {
        *evals += 1;
        let xa = x + &(d * alpha);
        let (f, g) = objective(&xa)?;
        let finite = f.is_finite() && g.iter().all(|v| v.is_finite());
        let f = if finite { f } else { f64::INFINITY };
        let dphi = if finite { dot(&g, d) } else { f64::NAN };
        Ok(Point {
            alpha,
            x: xa,
            f,
            g,
            dphi,
        })
    };
    let armijo = |p: &Point| p.f <= f0 + opts.c1 * p.alpha * dphi0;
    let curvature = |p: &Point| p.dphi.abs() <= -opts.c2 * dphi0;

    let origin = Point {
        alpha: 0.0,
        x: x.clone(),
        f: f0,
        g: g0.clone(),
        dphi: dphi0,
    };
    let mut prev = origin;
    let mut alpha = alpha0;
    let (lo, hi) = loop {
        if evals >= opts.max_line_search {
            return Ok(accept_if_decreasing(prev, f0));
        }
        let p = eval(alpha, &mut evals)?;
        if !armijo(&p) || (prev.alpha > 0.0 && p.f >= prev.f) {
            break (prev, p);
        }
        if curvature(&p) {
            return Ok(Some(p));
        }
        if p.dphi >= 0.0 {
            break (p, prev);
        }
        alpha *= 2.0;
        prev = p;
    };
    zoom(lo, hi, &mut eval, &mut evals, armijo, curvature, opts.max_line_search, f0)
}

#[allow(clippy::too_many_arguments)]
fn zoom<E, A, C>(
    mut lo: Point,
    mut hi: Point,
    eval: &mut E,
    evals: &mut usize,
    armijo: A,
    curvature: C,
    max_evals: usize,
    f0: f64,
) -> Result<Option<Point>>
where
    E: FnMut(f64, &mut usize) -> Result<Point>,
    A: Fn(&Point) -> bool,
    C: Fn(&Point) -> bool,
{
    while *evals < max_evals {
        let (a, b) = (lo.alpha.min(hi.alpha), lo.alpha.max(hi.alpha));
        let width = b - a;
        if width <= 1e-16 * b.max(1.0) {
            break;
        }
        let mut alpha = cubic_min(&lo, &hi).unwrap_or(0.5 * (a + b));
        if !(alpha > a + 0.1 * width && alpha < b - 0.1 * width) {
            alpha = 0.5 * (a + b);
        }
        let p = eval(alpha, evals)?;
        if !armijo(&p) || p.f >= lo.f {
            hi = p;
        } else {
            if curvature(&p) {
                return Ok(Some(p));
            }
            if p.dphi * (hi.alpha - lo.alpha) >= 0.0 {
                hi = std::mem::replace(&mut lo, p);
            } else {
                lo = p;
            }
        }
    }
    Ok(accept_if_decreasing(lo, f0))
}

fn accept_if_decreasing(p: Point, f0: f64) -> Option<Point> {
    (p.alpha > 0.0 && p.f < f0).then_some(p)
}

/// Minimiser of the cubic interpolating value and slope at both ends.
fn cubic_min(p: &Point, q: &Point) -> Option<f64> {
    if !(q.f.is_finite() && q.dphi.is_finite() && p.f.is_finite() && p.dphi.is_finite()) {
        return None;
    }
    let d1 = p.dphi + q.dphi - 3.0 * (p.f - q.f) / (p.alpha - q.alpha);
    let disc = d1 * d1 - p.dphi * q.dphi;
    if disc < 0.0 {
        return None;
    }
    let d2 = (q.alpha - p.alpha).signum() * disc.sqrt();
    let alpha = q.alpha - (q.alpha - p.alpha) * (q.dphi + d2 - d1) / (q.dphi - p.dphi + 2.0 * d2);
    alpha.is_finite().then_some(alpha)
}
