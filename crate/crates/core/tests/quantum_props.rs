mod common;

use hqids::quantum::oracle::oracle_apply;
use hqids::quantum::{dense_unitary_oracle, EmbeddingCircuit, Gate, QuantumState, VqcWeights};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn run(n: usize, gates: &[Gate]) -> QuantumState {
    let mut s = QuantumState::new(n).unwrap();
    for g in gates {
        s.apply_gate(g).unwrap();
    }
    s
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn weights(n: usize, depth: usize) -> impl Strategy<Value = VqcWeights> {
    prop::collection::vec(0.0..std::f64::consts::TAU, n * depth * 3)
        .prop_map(move |a| VqcWeights::new(n, depth, a).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_preserved(n in 1usize..=8, depth in 1usize..=6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gates = common::random_gates(&mut rng, n, depth * 3 * n);
        let s = run(n, &gates);
        prop_assert!((s.norm_sqr() - 1.0).abs() <= 1e-10);
        for q in 0..n {
            let z = s.expval_z(q).unwrap();
            prop_assert!((-1.0..=1.0).contains(&z), "<Z_{}> = {}", q, z);
        }
    }

    #[test]
    fn matches_dense_oracle(n in 1usize..=4, count in 0usize..40, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gates = common::random_gates(&mut rng, n, count);
        let fast = run(n, &gates);
        let u = dense_unitary_oracle(&gates, n).unwrap();
        let reference = oracle_apply(&u, &QuantumState::new(n).unwrap());
        prop_assert!(max_diff(fast.amplitudes(), &reference) <= 1e-12);
    }

    #[test]
    fn ry_angles_add(n in 1usize..=5, q in 0usize..5, a in -7.0..7.0f64, b in -7.0..7.0f64, seed in any::<u64>()) {
        let q = q % n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prep = common::random_gates(&mut rng, n, 12);
        let mut two = run(n, &prep);
        two.apply_ry(q, b).unwrap();
        two.apply_ry(q, a).unwrap();
        let mut one = run(n, &prep);
        one.apply_ry(q, a + b).unwrap();
        prop_assert!(max_diff(one.amplitudes(), two.amplitudes()) <= 1e-12);
    }

    #[test]
    fn cnot_is_involution(n in 2usize..=6, c in 0usize..6, t in 0usize..6, seed in any::<u64>()) {
        let (c, t) = (c % n, t % n);
        prop_assume!(c != t);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let before = run(n, &common::random_gates(&mut rng, n, 15));
        let mut after = before.clone();
        after.apply_cnot(c, t).unwrap();
        after.apply_cnot(c, t).unwrap();
        prop_assert!(max_diff(before.amplitudes(), after.amplitudes()) <= 1e-15);
    }

    #[test]
    fn rot_reduces_to_ry(n in 1usize..=5, q in 0usize..5, theta in -7.0..7.0f64, seed in any::<u64>()) {
        let q = q % n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let before = run(n, &common::random_gates(&mut rng, n, 12));
        let mut rot = before.clone();
        rot.apply_rot(q, 0.0, theta, 0.0).unwrap();
        let mut ry = before;
        ry.apply_ry(q, theta).unwrap();
        prop_assert!(max_diff(rot.amplitudes(), ry.amplitudes()) <= 1e-12);
    }

    #[test]
    fn rot_is_rz_ry_rz(n in 1usize..=4, q in 0usize..4, p in -7.0..7.0f64, t in -7.0..7.0f64, o in -7.0..7.0f64, seed in any::<u64>()) {
        let q = q % n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let before = run(n, &common::random_gates(&mut rng, n, 12));
        let mut fused = before.clone();
        fused.apply_rot(q, p, t, o).unwrap();
        let mut seq = before;
        seq.apply_rz(q, p).unwrap();
        seq.apply_ry(q, t).unwrap();
        seq.apply_rz(q, o).unwrap();
        prop_assert!(max_diff(fused.amplitudes(), seq.amplitudes()) <= 1e-12);
    }

    #[test]
    fn embedding_is_pure_and_bounded(w in weights(8, 2), x in prop::collection::vec(0.0..=1.0f64, 8)) {
        let circuit = EmbeddingCircuit::new(w, 1.0);
        let a = circuit.embed(&x).unwrap();
        let b = circuit.embed(&x).unwrap();
        prop_assert_eq!(
            a.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        prop_assert!(a.as_slice().iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn batch_preserves_order(w in weights(4, 2), xs in prop::collection::vec(prop::collection::vec(0.0..=1.0f64, 4), 1..40)) {
        let circuit = EmbeddingCircuit::new(w, 1.0);
        let batch = circuit.embed_batch(&xs).unwrap();
        for (x, e) in xs.iter().zip(&batch) {
            prop_assert_eq!(&circuit.embed(x).unwrap(), e);
        }
    }
}
