use hqids::data::{
    fit_encoders, fit_scaler, read_csv, split, subsample, transform, Dataset, Feature, FlowRecord, Sample, Schema,
    SplitTag,
};
use proptest::prelude::*;
use proptest::sample::select;

fn record() -> impl Strategy<Value = FlowRecord> {
    (
        0.0..100.0f64,
        select(vec!["tcp", "udp", "arp", "unas"]),
        select(vec!["-", "dns", "http", "ftp-data"]),
        select(vec!["FIN", "INT", "CON", "REQ"]),
        0u64..5000,
        0u64..5000,
        0u64..1_000_000,
        0u64..1_000_000,
        0u8..=1,
    )
        .prop_map(|(dur, proto, service, state, spkts, dpkts, sbytes, dbytes, label)| FlowRecord {
            dur,
            proto: proto.into(),
            service: service.into(),
            state: state.into(),
            spkts,
            dpkts,
            sbytes,
            dbytes,
            label,
        })
}

fn corpus_and_perm() -> impl Strategy<Value = (Vec<FlowRecord>, Vec<FlowRecord>)> {
    prop::collection::vec(record(), 1..60).prop_flat_map(|rs| {
        let shuffled = Just(rs.clone()).prop_shuffle();
        (Just(rs), shuffled)
    })
}

fn dataset() -> impl Strategy<Value = Dataset> {
    prop::collection::vec((prop::collection::vec(0.0..=1.0f64, 3), 0u8..=1), 2..80).prop_map(|rows| {
        let samples = rows
            .into_iter()
            .map(|(features, label)| Sample { features, label })
            .collect();
        Dataset::new(samples, vec!["prop".into()], SplitTag::Train).unwrap()
    })
}

fn encode_all(rs: &[FlowRecord]) -> Vec<[f64; 8]> {
    let enc = fit_encoders(rs).unwrap();
    rs.iter().map(|r| hqids::data::encode_record(r, &enc).unwrap()).collect()
}

proptest! {
    #[test]
    fn encoder_permutation_invariant((rs, perm) in corpus_and_perm()) {
        prop_assert_eq!(fit_encoders(&rs).unwrap(), fit_encoders(&perm).unwrap());
    }

    #[test]
    fn scaler_permutation_invariant((rs, perm) in corpus_and_perm()) {
        let a = fit_scaler(&encode_all(&rs)).unwrap();
        let enc = fit_encoders(&rs).unwrap();
        let perm_raw: Vec<[f64; 8]> = perm.iter().map(|r| hqids::data::encode_record(r, &enc).unwrap()).collect();
        prop_assert_eq!(a, fit_scaler(&perm_raw).unwrap());
    }

    #[test]
    fn transform_stays_in_unit_cube(rs in prop::collection::vec(record(), 1..60)) {
        let enc = fit_encoders(&rs).unwrap();
        let scaler = fit_scaler(&encode_all(&rs)).unwrap();
        for r in &rs {
            let v = transform(r, &enc, &scaler).unwrap();
            prop_assert_eq!(v.as_slice().len(), 8);
            prop_assert!(v.as_slice().iter().all(|x| (0.0..=1.0).contains(x)), "{:?}", v);
        }
    }

    #[test]
    fn csv_roundtrip(rs in prop::collection::vec(record(), 1..30)) {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = Feature::ALL.iter().map(|f| f.name()).collect();
        header.push("label");
        w.write_record(&header).unwrap();
        for r in &rs {
            w.write_record([
                r.dur.to_string(), r.proto.clone(), r.service.clone(), r.state.clone(),
                r.spkts.to_string(), r.dpkts.to_string(), r.sbytes.to_string(), r.dbytes.to_string(),
                r.label.to_string(),
            ]).unwrap();
        }
        let bytes = w.into_inner().unwrap();
        prop_assert_eq!(read_csv(&bytes[..], &Schema::default()).unwrap(), rs);
    }

    #[test]
    fn split_is_disjoint_exhaustive_and_seeded(ds in dataset(), frac in 0.1..0.9f64, seed in any::<u64>()) {
        let n_train = (frac * ds.len() as f64).round() as usize;
        prop_assume!(n_train > 0 && n_train < ds.len());
        // Tag each sample with its index so membership can be checked exactly.
        let tagged = Dataset::new(
            ds.samples().iter().enumerate().map(|(i, s)| {
                let mut f = s.features.clone();
                f.push(i as f64);
                Sample { features: f, label: s.label }
            }).collect(),
            vec![],
            SplitTag::Train,
        ).unwrap();
        let (tr, te) = split(&tagged, frac, seed).unwrap();
        prop_assert_eq!(tr.len(), n_train);
        let mut ids: Vec<usize> = tr.samples().iter().chain(te.samples())
            .map(|s| *s.features.last().unwrap() as usize).collect();
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..ds.len()).collect::<Vec<_>>());
        prop_assert_eq!(split(&tagged, frac, seed).unwrap(), (tr, te));
    }

    #[test]
    fn stratified_subsample_keeps_ratio(ds in dataset(), frac in 0.05..1.0f64, seed in any::<u64>()) {
        let n = ((frac * ds.len() as f64).round() as usize).max(1);
        let sub = subsample(&ds, n, seed, true).unwrap();
        prop_assert_eq!(sub.len(), n);
        let [_, attack] = ds.class_counts();
        let expected = n as f64 * attack as f64 / ds.len() as f64;
        prop_assert!((sub.class_counts()[1] as f64 - expected).abs() <= 1.0);
        prop_assert_eq!(subsample(&ds, n, seed, true).unwrap(), sub);
    }
}
