use hqids::metrics::{confusion, evaluate, parse_kv, render_kv, summarize, ConfusionMatrix};
use proptest::prelude::*;

fn labels() -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
    prop::collection::vec((0u8..=1, 0u8..=1), 1..200).prop_map(|pairs| pairs.into_iter().unzip())
}

proptest! {
    #[test]
    fn weighted_recall_is_accuracy(tp in 0u64..500, fp in 0u64..500, tn in 0u64..500, fn_ in 0u64..500) {
        let cm = ConfusionMatrix { tp, fp, tn, fn_ };
        prop_assume!(cm.total() > 0);
        let r = summarize(&cm).unwrap();
        prop_assert!((r.weighted_avg.recall - r.accuracy).abs() <= 1e-12);
    }

    #[test]
    fn metrics_bounded_and_supports_conserved(tp in 0u64..500, fp in 0u64..500, tn in 0u64..500, fn_ in 0u64..500) {
        let cm = ConfusionMatrix { tp, fp, tn, fn_ };
        prop_assume!(cm.total() > 0);
        let r = summarize(&cm).unwrap();
        let all = [r.classes[0], r.classes[1], r.macro_avg, r.weighted_avg];
        for m in all {
            for v in [m.precision, m.recall, m.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
        prop_assert!((0.0..=1.0).contains(&r.accuracy));
        prop_assert_eq!(r.classes[0].support + r.classes[1].support, cm.total());
    }

    #[test]
    fn confusion_permutation_invariant((t, p) in labels(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut idx: Vec<usize> = (0..t.len()).collect();
        idx.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let tp: Vec<u8> = idx.iter().map(|&i| t[i]).collect();
        let pp: Vec<u8> = idx.iter().map(|&i| p[i]).collect();
        prop_assert_eq!(confusion(&t, &p).unwrap(), confusion(&tp, &pp).unwrap());
    }

    #[test]
    fn kv_roundtrip((t, p) in labels()) {
        let r = evaluate(&t, &p).unwrap();
        prop_assert_eq!(parse_kv(&render_kv(&r)).unwrap(), r);
    }
}
