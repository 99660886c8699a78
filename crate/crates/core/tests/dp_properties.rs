mod common;

use approx::assert_abs_diff_eq;
use common::*;
use ndarray::{array, Array2};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::Rng;
use tsdiv::dp::*;
use tsdiv::oracle::oracle_stats;
use tsdiv::CostMatrix;

fn reference() -> CostMatrix {
    CostMatrix::new(array![[0.0, 2.0], [0.5, 0.5]]).unwrap()
}

fn hvp(c: &CostMatrix, gamma: f64, z: &Array2<f64>) -> Array2<f64> {
    let (_, t) = soft_dtw_forward(c, gamma).unwrap();
    let e = expected_alignment(&t);
    let (_, vdot) = directional_derivative(&t, z.view()).unwrap();
    hessian_product(&t, vdot.view(), &e, z.view()).unwrap()
}

fn e_of(c: &Array2<f64>, gamma: f64) -> Array2<f64> {
    let (_, t) = soft_dtw_forward(&CostMatrix::new(c.clone()).unwrap(), gamma).unwrap();
    expected_alignment(&t).into_inner()
}

#[test]
fn hard_dtw_examples() {
    let (v, p) = hard_dtw(&reference()).unwrap();
    assert_eq!(v, 0.5);
    assert_eq!(p.to_f64(), Array2::<f64>::eye(2));
    let (v, _) = hard_dtw(&CostMatrix::new(array![[1.0, 2.0], [3.0, 1.0]]).unwrap()).unwrap();
    assert_eq!(v, 2.0);
    let x = uni(&[0.3, -1.0, 2.0]);
    let c = tsdiv::build_cost(tsdiv::CostKind::SquaredEuclidean, &x, &x).unwrap();
    let (v, p) = hard_dtw(&c).unwrap();
    assert_eq!(v, 0.0);
    assert_eq!(p.to_f64(), Array2::<f64>::eye(3));
}

#[test]
fn forward_examples() {
    let c = reference();
    assert_abs_diff_eq!(soft_dtw(&c, 1.0).unwrap(), -0.054_956_919_641_990_676, epsilon = 1e-14);
    let v2 = soft_dtw(&c, 2.0).unwrap();
    assert_abs_diff_eq!(v2, -1.027_845_134_138_574, epsilon = 1e-13);
    assert_abs_diff_eq!(v2, 2.0 * soft_dtw(&c.scaled(0.5).unwrap(), 1.0).unwrap(), epsilon = 1e-14);
    let one = CostMatrix::new(array![[3.5]]).unwrap();
    for g in [0.0, 0.1, 1.0, 100.0] {
        assert_eq!(soft_dtw(&one, g).unwrap(), 3.5);
    }
}

#[test]
fn forward_rejects_bad_input() {
    assert!(soft_dtw(&reference(), -1.0).is_err());
    assert!(soft_dtw(&reference(), f64::NAN).is_err());
    assert!(CostMatrix::new(array![[0.0, f64::INFINITY]]).is_err());
    assert!(CostMatrix::new(Array2::zeros((0, 3))).is_err());
}

#[test]
fn expected_alignment_examples() {
    let e = e_of(reference().values(), 1.0);
    let want = array![[1.0, 0.077_695_579_148_570_59], [0.348_207_427_883_734_8, 1.0]];
    assert!(max_abs_diff(&e, &want) <= 1e-14);
    assert_eq!(e_of(&array![[7.0]], 1.0), array![[1.0]]);
    let (count, t) = alignment_count(2, 2).unwrap();
    assert_eq!(count, BigUint::from(3u32));
    let uniform = expected_alignment(&t).into_inner();
    assert!(max_abs_diff(&uniform, &array![[1.0, 1.0 / 3.0], [1.0 / 3.0, 1.0]]) <= 1e-15);
}

#[test]
fn directional_derivative_examples() {
    let c = reference();
    let (_, t) = soft_dtw_forward(&c, 1.0).unwrap();
    let (v, _) = directional_derivative(&t, Array2::zeros((2, 2)).view()).unwrap();
    assert_eq!(v, 0.0);
    let (v, _) = directional_derivative(&t, c.view()).unwrap();
    assert_abs_diff_eq!(v, 0.829_494_872_239_008_5, epsilon = 1e-14);
    let (_, t1) = soft_dtw_forward(&CostMatrix::new(array![[1.0]]).unwrap(), 1.0).unwrap();
    assert_eq!(directional_derivative(&t1, array![[4.25]].view()).unwrap().0, 4.25);
    assert!(directional_derivative(&t, Array2::zeros((3, 2)).view()).is_err());
}

#[test]
fn hessian_single_cell_is_zero() {
    let c = CostMatrix::new(array![[2.0]]).unwrap();
    assert_eq!(hvp(&c, 1.0, &array![[3.0]]), array![[0.0]]);
}

#[test]
fn hessian_matches_finite_differences_entrywise() {
    let mut r = rng(23);
    let c = random_cost(&mut r, 2, 3, 3.0);
    let h = 1e-5;
    for idx in 0..6 {
        let mut z = Array2::zeros((2, 3));
        z[[idx / 3, idx % 3]] = 1.0;
        let analytic = hvp(&c, 1.0, &z);
        let num = (e_of(&(c.values() + &(&z * h)), 1.0) - e_of(&(c.values() - &(&z * h)), 1.0)) / (2.0 * h);
        assert!(max_abs_diff(&analytic, &num) <= 1e-6, "column {idx}");
    }
}

#[test]
fn hessian_is_negative_semidefinite_on_3x3() {
    let mut r = rng(5);
    for _ in 0..50 {
        let c = random_cost(&mut r, 3, 3, 5.0);
        let z = random_matrix(&mut r, 3, 3, -1.0, 1.0);
        let hz = hvp(&c, 1.0, &z);
        assert!(inner(z.view(), hz.view()) <= 1e-12);
    }
}

#[test]
fn hessian_rejects_hard_transitions() {
    let c = reference();
    let (_, t) = soft_dtw_forward(&c, 0.0).unwrap();
    let e = expected_alignment(&t);
    let z = Array2::ones((2, 2));
    let (_, vdot) = directional_derivative(&t, z.view()).unwrap();
    assert!(hessian_product(&t, vdot.view(), &e, z.view()).is_err());
}

#[test]
fn alignment_counts() {
    assert_eq!(alignment_cardinality(1, 1).unwrap(), BigUint::from(1u32));
    assert_eq!(alignment_cardinality(2, 2).unwrap(), BigUint::from(3u32));
    assert_eq!(alignment_cardinality(3, 3).unwrap(), BigUint::from(13u32));
    assert_eq!(alignment_cardinality(2, 3).unwrap(), BigUint::from(5u32));
    assert!(alignment_cardinality(0, 3).is_err());
    // Delannoy recurrence on a grid
    for m in 2..12 {
        for n in 2..12 {
            assert_eq!(
                alignment_cardinality(m, n).unwrap(),
                alignment_cardinality(m - 1, n).unwrap()
                    + alignment_cardinality(m, n - 1).unwrap()
                    + alignment_cardinality(m - 1, n - 1).unwrap()
            );
        }
    }
    let exact = alignment_cardinality(200, 150).unwrap();
    let log = log_alignment_count(200, 150).unwrap();
    let approx_ln = exact.bits() as f64 * std::f64::consts::LN_2;
    assert!((log - approx_ln).abs() < 1.0);
}

#[test]
fn mean_cost_examples() {
    assert_abs_diff_eq!(mean_cost(&reference()).unwrap().0, 4.0 / 3.0, epsilon = 1e-15);
    assert_eq!(mean_cost(&CostMatrix::new(array![[2.5]]).unwrap()).unwrap().0, 2.5);
    let c = CostMatrix::new(array![[0.0, 2.0], [2.0, 0.0]]).unwrap();
    assert_abs_diff_eq!(mean_cost(&c).unwrap().0, 4.0 / 3.0, epsilon = 1e-15);
}

#[test]
fn bounds_on_random_grid() {
    let mut r = rng(1);
    for _ in 0..200 {
        let (m, n) = (r.gen_range(1..=8), r.gen_range(1..=8));
        let c = random_cost(&mut r, m, n, 10.0);
        let (dtw, _) = hard_dtw(&c).unwrap();
        let logc = log_alignment_count(m, n).unwrap();
        for g in [0.1, 1.0, 10.0] {
            let s = soft_dtw(&c, g).unwrap();
            assert!(s <= dtw + 1e-12, "{s} > {dtw}");
            assert!(s >= dtw - g * logc - 1e-9);
        }
    }
}

#[test]
fn asymptotic_recovers_hard_path() {
    let mut r = rng(77);
    let mut checked = 0;
    while checked < 20 {
        let (m, n) = (r.gen_range(2..=6), r.gen_range(2..=6));
        let c = random_cost(&mut r, m, n, 10.0);
        let paths = tsdiv::oracle::enumerate_alignments(m, n).unwrap();
        let mut costs: Vec<f64> = paths.iter().map(|a| a.cost(c.view())).collect();
        costs.sort_by(f64::total_cmp);
        if costs.len() > 1 && costs[1] - costs[0] < 1e-3 {
            continue;
        }
        let (_, path) = hard_dtw(&c).unwrap();
        let e = e_of(c.values(), 1e-6);
        assert!(max_abs_diff(&e, &path.to_f64()) <= 1e-4);
        checked += 1;
    }
}

#[test]
fn transition_tensor_invariants() {
    let mut r = rng(9);
    for _ in 0..50 {
        let (m, n) = (r.gen_range(1..=7), r.gen_range(1..=7));
        let c = random_cost(&mut r, m, n, 4.0);
        for g in [0.0, 0.5, 5.0] {
            let (_, t) = soft_dtw_forward(&c, g).unwrap();
            let p = t.as_array();
            for i in 0..m {
                for j in 0..n {
                    let s: f64 = (0..3).map(|k| p[[i, j, k]]).sum();
                    assert!((s - 1.0).abs() <= 1e-12);
                    assert!((0..3).all(|k| (0.0..=1.0).contains(&p[[i, j, k]])));
                    if (i, j) != (0, 0) {
                        if j == 0 {
                            assert_eq!(p[[i, j, 0]], 0.0);
                        }
                        if i == 0 {
                            assert_eq!(p[[i, j, 2]], 0.0);
                        }
                        if i == 0 || j == 0 {
                            assert_eq!(p[[i, j, 1]], 0.0);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn gamma_derivative_is_minus_entropy() {
    let mut r = rng(31);
    for _ in 0..20 {
        let (m, n) = (r.gen_range(1..=4), r.gen_range(1..=4));
        let c = random_cost(&mut r, m, n, 3.0);
        for g in [0.3, 1.0, 4.0] {
            let h = 1e-5;
            let fd = (soft_dtw(&c, g + h).unwrap() - soft_dtw(&c, g - h).unwrap()) / (2.0 * h);
            let entropy = oracle_stats(&c, g).unwrap().entropy;
            assert!((fd + entropy).abs() <= 1e-5, "{fd} vs {}", -entropy);
        }
        // non-increasing and concave in gamma on a grid
        let grid: Vec<f64> = (1..=20).map(|k| k as f64 * 0.25).collect();
        let vals: Vec<f64> = grid.iter().map(|&g| soft_dtw(&c, g).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(vals.windows(3).all(|w| w[1] >= 0.5 * (w[0] + w[2]) - 1e-10));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn scaling_identity(c in cost_strategy(6, 10.0), gi in 0usize..3) {
        let g = [1e-2, 1.0, 1e2][gi];
        let lhs = soft_dtw(&c, g).unwrap();
        let rhs = g * soft_dtw(&c.scaled(1.0 / g).unwrap(), 1.0).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn gradient_matches_finite_differences(c in cost_strategy(5, 5.0), g in 0.1f64..5.0) {
        let e = e_of(c.values(), g);
        let h = 1e-5;
        let (m, n) = c.shape();
        for i in 0..m {
            for j in 0..n {
                let mut z = Array2::zeros((m, n));
                z[[i, j]] = h;
                let fp = soft_dtw(&CostMatrix::new(c.values() + &z).unwrap(), g).unwrap();
                let fm = soft_dtw(&CostMatrix::new(c.values() - &z).unwrap(), g).unwrap();
                prop_assert!(((fp - fm) / (2.0 * h) - e[[i, j]]).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn concavity_in_cost(
        (c1, c2) in (1usize..=5, 1usize..=5).prop_flat_map(|(m, n)| {
            let v = proptest::collection::vec(0.0..10.0f64, m * n);
            (v.clone(), v).prop_map(move |(a, b)| (
                Array2::from_shape_vec((m, n), a).unwrap(),
                Array2::from_shape_vec((m, n), b).unwrap(),
            ))
        }),
        lambda in 0.01f64..0.99,
        g in 0.1f64..10.0,
    ) {
        let mix = &c1 * lambda + &c2 * (1.0 - lambda);
        let f = |a: &Array2<f64>| soft_dtw(&CostMatrix::new(a.clone()).unwrap(), g).unwrap();
        prop_assert!(f(&mix) >= lambda * f(&c1) + (1.0 - lambda) * f(&c2) - 1e-10);
    }

    #[test]
    fn hessian_symmetry(
        (c, z1, z2) in (1usize..=5, 1usize..=5).prop_flat_map(|(m, n)| {
            let pos = proptest::collection::vec(0.0..5.0f64, m * n);
            let any = proptest::collection::vec(-1.0..1.0f64, m * n);
            (pos, any.clone(), any).prop_map(move |(a, b, d)| (
                CostMatrix::new(Array2::from_shape_vec((m, n), a).unwrap()).unwrap(),
                Array2::from_shape_vec((m, n), b).unwrap(),
                Array2::from_shape_vec((m, n), d).unwrap(),
            ))
        }),
        g in 0.2f64..5.0,
    ) {
        let a = inner(z1.view(), hvp(&c, g, &z2).view());
        let b = inner(z2.view(), hvp(&c, g, &z1).view());
        prop_assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn expected_alignment_invariants(c in cost_strategy(7, 5.0), g in 0.05f64..10.0) {
        let e = e_of(c.values(), g);
        let (m, n) = c.shape();
        prop_assert!((e[[0, 0]] - 1.0).abs() <= 1e-12 && (e[[m - 1, n - 1]] - 1.0).abs() <= 1e-12);
        prop_assert!(e.iter().all(|&v| v > 0.0 && v <= 1.0 + 1e-12));
        let s = e.sum();
        prop_assert!(s >= m.max(n) as f64 - 1e-9 && s <= (m + n - 1) as f64 + 1e-9);
    }

    #[test]
    fn asymptotic_gap(c in cost_strategy(6, 10.0), g in 1e-3f64..100.0) {
        let (m, n) = c.shape();
        let (dtw, _) = hard_dtw(&c).unwrap();
        let s = soft_dtw(&c, g).unwrap();
        prop_assert!((s - dtw).abs() <= g * log_alignment_count(m, n).unwrap() + 1e-9);
    }

    #[test]
    fn hard_path_is_valid_and_optimal(c in cost_strategy(5, 10.0)) {
        let (v, p) = hard_dtw(&c).unwrap();
        prop_assert!(p.is_valid());
        prop_assert!((p.cost(c.view()) - v).abs() <= 1e-12);
        let stats = oracle_stats(&c, 1.0).unwrap();
        prop_assert!((stats.dtw_value - v).abs() <= 1e-12);
    }
}
