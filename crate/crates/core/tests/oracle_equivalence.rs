mod common;

use common::*;
use proptest::prelude::*;
use tsdiv::dp::{expected_alignment, hard_dtw, inner, mean_cost, soft_dtw_forward};
use tsdiv::oracle::{enumerate_alignments, oracle_stats};
use tsdiv::CostMatrix;

fn agrees(c: &CostMatrix, gamma: f64) -> Result<(), String> {
    let s = oracle_stats(c, gamma).map_err(|e| e.to_string())?;
    let (v, t) = soft_dtw_forward(c, gamma).unwrap();
    let e = expected_alignment(&t).into_inner();
    let (mc, _) = mean_cost(c).unwrap();
    let (dtw, _) = hard_dtw(c).unwrap();
    let checks = [
        ("sdtw", v, s.sdtw_value),
        ("mean_cost", mc, s.mean_cost_value),
        ("dtw", dtw, s.dtw_value),
    ];
    for (name, a, b) in checks {
        if !rel_close(a, b, 1e-10) {
            return Err(format!("{name}: {a} vs {b}"));
        }
    }
    for (a, b) in e.iter().zip(s.expected_alignment.iter()) {
        if !rel_close(*a, *b, 1e-10) {
            return Err(format!("E: {a} vs {b}"));
        }
    }
    let decomposed = inner(s.expected_alignment.view(), c.view()) - gamma * s.entropy;
    if (decomposed - s.sdtw_value).abs() > 1e-10 * (1.0 + s.sdtw_value.abs()) {
        return Err(format!("decomposition: {decomposed} vs {}", s.sdtw_value));
    }
    Ok(())
}

#[test]
fn every_shape_up_to_six() {
    let mut r = rng(2024);
    for m in 1..=6 {
        for n in 1..=6 {
            for _ in 0..10 {
                let c = random_cost(&mut r, m, n, 10.0);
                for g in [0.1, 1.0, 10.0] {
                    agrees(&c, g).unwrap_or_else(|e| panic!("({m},{n}) gamma {g}: {e}"));
                }
            }
        }
    }
}

#[test]
fn enumeration_is_exhaustive_and_valid() {
    for (m, n) in [(1, 4), (3, 3), (4, 5), (6, 6)] {
        let all = enumerate_alignments(m, n).unwrap();
        assert_eq!(all.len().to_string(), tsdiv::alignment_cardinality(m, n).unwrap().to_string());
        assert!(all.iter().all(|a| a.is_valid()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_shapes(c in cost_strategy(5, 10.0), g in 0.05f64..20.0) {
        prop_assert!(agrees(&c, g).is_ok(), "{:?}", agrees(&c, g));
    }
}
