#![allow(dead_code)]

use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsdiv::{CostMatrix, TimeSeries};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uni(v: &[f64]) -> TimeSeries {
    TimeSeries::univariate(v).unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize, lo: f64, hi: f64) -> Array2<f64> {
    Array2::from_shape_fn((m, n), |_| rng.gen_range(lo..hi))
}

pub fn random_cost(rng: &mut ChaCha8Rng, m: usize, n: usize, hi: f64) -> CostMatrix {
    CostMatrix::new(random_matrix(rng, m, n, 0.0, hi)).unwrap()
}

pub fn random_series(rng: &mut ChaCha8Rng, len: usize, d: usize) -> TimeSeries {
    TimeSeries::new(random_matrix(rng, len, d, -1.0, 1.0)).unwrap()
}

/// Series whose rows are pairwise distinct (well separated).
pub fn distinct_series(rng: &mut ChaCha8Rng, len: usize) -> TimeSeries {
    let mut v: Vec<f64> = (0..len).map(|i| i as f64 * 0.3 + rng.gen_range(0.0..0.2)).collect();
    for i in (1..len).rev() {
        let j = rng.gen_range(0..=i);
        v.swap(i, j);
    }
    uni(&v)
}

pub fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn cost_strategy(max_dim: usize, hi: f64) -> impl Strategy<Value = CostMatrix> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(move |(m, n)| {
        proptest::collection::vec(0.0..hi, m * n)
            .prop_map(move |v| CostMatrix::new(Array2::from_shape_vec((m, n), v).unwrap()).unwrap())
    })
}

pub fn series_strategy(max_len: usize, d: usize) -> impl Strategy<Value = TimeSeries> {
    (1..=max_len).prop_flat_map(move |len| {
        proptest::collection::vec(-1.0..1.0f64, len * d)
            .prop_map(move |v| TimeSeries::new(Array2::from_shape_vec((len, d), v).unwrap()).unwrap())
    })
}
