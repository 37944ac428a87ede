use casper_core::graph::{
    h_gradient, h_value, is_acyclic, prune, AcyclicityForm, BinaryGraph, WeightedAdjacency,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn forms(d: usize) -> [AcyclicityForm; 2] {
    [
        AcyclicityForm::MatrixExponential,
        AcyclicityForm::polynomial_for(d),
    ]
}

/// Cycle check by repeatedly deleting sinks, independent of the library's sort.
fn has_cycle_oracle(g: &BinaryGraph) -> bool {
    let d = g.d();
    let mut alive = vec![true; d];
    loop {
        let sink = (0..d).find(|&i| alive[i] && (0..d).all(|j| !alive[j] || !g.has_edge(i, j)));
        match sink {
            Some(i) => alive[i] = false,
            None => return alive.iter().any(|&a| a),
        }
    }
}

fn graph_from_bits(d: usize, bits: u64) -> BinaryGraph {
    let mut g = BinaryGraph::empty(d);
    for i in 0..d {
        for j in 0..d {
            if bits >> (i * d + j) & 1 == 1 {
                g.set(i, j, true);
            }
        }
    }
    g
}

#[test]
fn exhaustive_small_graphs_h_zero_iff_acyclic() {
    for d in 1..=3 {
        for bits in 0..1u64 << (d * d) {
            let g = graph_from_bits(d, bits);
            let expected = !has_cycle_oracle(&g);
            assert_eq!(is_acyclic(&g), expected, "d={d} bits={bits:b}");
            for form in forms(d) {
                let h = h_value(&g.to_weighted(), form).unwrap();
                assert_eq!(
                    h < 1e-8,
                    expected,
                    "d={d} bits={bits:b} form={form:?} h={h}"
                );
            }
        }
    }
}

#[test]
fn random_d8_h_zero_iff_acyclic() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut cyclic = 0;
    for _ in 0..1000 {
        // Mix sparse and dense draws so both outcomes are well represented.
        let p = rng.random_range(0.02..0.3);
        let mut g = BinaryGraph::empty(8);
        for i in 0..8 {
            for j in 0..8 {
                let q = if i == j { 0.01 } else { p };
                if rng.random::<f64>() < q {
                    g.set(i, j, true);
                }
            }
        }
        let expected = !has_cycle_oracle(&g);
        cyclic += usize::from(!expected);
        assert_eq!(is_acyclic(&g), expected);
        for form in forms(8) {
            let h = h_value(&g.to_weighted(), form).unwrap();
            assert_eq!(h < 1e-8, expected, "form={form:?} h={h}");
        }
    }
    assert!(
        cyclic > 50 && cyclic < 950,
        "unbalanced sample: {cyclic} cyclic"
    );
}

fn random_weights(d: usize, rng: &mut ChaCha8Rng) -> WeightedAdjacency {
    WeightedAdjacency::new(DMatrix::from_fn(d, d, |_, _| rng.random_range(-0.6..0.6))).unwrap()
}

#[test]
fn h_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let eps = 1e-6;
    for &d in &[3, 5, 10] {
        for _ in 0..100 {
            let w = random_weights(d, &mut rng);
            for form in forms(d) {
                let g = h_gradient(&w, form).unwrap();
                for i in 0..d {
                    for j in 0..d {
                        let mut plus = w.matrix().clone();
                        let mut minus = w.matrix().clone();
                        plus[(i, j)] += eps;
                        minus[(i, j)] -= eps;
                        let fd = (h_value(&WeightedAdjacency::new(plus).unwrap(), form).unwrap()
                            - h_value(&WeightedAdjacency::new(minus).unwrap(), form).unwrap())
                            / (2.0 * eps);
                        let err = (fd - g[(i, j)]).abs();
                        assert!(
                            err <= 1e-5 * (1.0 + fd.abs()),
                            "d={d} ({i},{j}) fd={fd} analytic={} form={form:?}",
                            g[(i, j)]
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn h_is_nonnegative_and_zero_on_dags() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let w = random_weights(6, &mut rng);
        for form in forms(6) {
            assert!(h_value(&w, form).unwrap() >= -1e-12);
        }
        // Strictly upper-triangular part is acyclic.
        let upper =
            WeightedAdjacency::new(
                w.matrix()
                    .map_with_location(|i, j, v| if i < j { v } else { 0.0 }),
            )
            .unwrap();
        for form in forms(6) {
            assert!(h_value(&upper, form).unwrap().abs() < 1e-12);
        }
    }
}

fn perm_strategy(d: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..d).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn h_is_permutation_equivariant(
        values in proptest::collection::vec(-1.0f64..1.0, 36),
        perm in perm_strategy(6),
    ) {
        let w = WeightedAdjacency::from_row_slice(6, &values).unwrap();
        let permuted = WeightedAdjacency::new(DMatrix::from_fn(6, 6, |i, j| w.get(perm[i], perm[j]))).unwrap();
        for form in forms(6) {
            let a = h_value(&w, form).unwrap();
            let b = h_value(&permuted, form).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn prune_is_idempotent(
        values in proptest::collection::vec(-2.0f64..2.0, 25),
        omega in 0.05f64..1.5,
    ) {
        let w = WeightedAdjacency::from_row_slice(5, &values).unwrap();
        let once = prune(&w, omega).unwrap();
        let twice = prune(&once.to_weighted(), omega.min(1.0)).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert!(!once.has_self_loop());
        for (i, j) in once.edges() {
            prop_assert!(w.get(i, j).abs() >= omega);
        }
    }
}
