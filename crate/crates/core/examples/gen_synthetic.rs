//! Regenerates the bundled synthetic flows in `data/`.
//!
//! ```text
//! cargo run -p hqids --example gen_synthetic -- crates/core/data
//! cargo run --release -p hqids --example gen_synthetic -- /tmp/big 175341 82332
//! ```
//!
//! The optional row counts default to the bundled 700 / 300.
//!
//! Columns follow the UNSW-NB15 CSV layout (a subset of it); values are drawn
//! from two overlapping class-conditional distributions so that the classical
//! models land well above chance but below perfect.

use std::error::Error;
use std::path::PathBuf;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_615;
const TRAIN_ROWS: usize = 700;
const TEST_ROWS: usize = 300;
const ATTACK_RATE: f64 = 0.62;

fn pick<'a>(rng: &mut ChaCha8Rng, table: &[(&'a str, f64)]) -> &'a str {
    let mut u: f64 = rng.random();
    for &(v, p) in table {
        if u < p {
            return v;
        }
        u -= p;
    }
    table[table.len() - 1].0
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn row(rng: &mut ChaCha8Rng, id: usize) -> Vec<String> {
    let attack = rng.random::<f64>() < ATTACK_RATE;
    let (proto, service, state, dur, spkts, dpkts, sbyte_mu, dbyte_mu, cat) = if attack {
        let proto = pick(rng, &[("tcp", 0.45), ("udp", 0.38), ("unas", 0.12), ("sctp", 0.05)]);
        let service = pick(rng, &[("-", 0.55), ("dns", 0.25), ("http", 0.15), ("ftp-data", 0.05)]);
        let state = pick(rng, &[("INT", 0.58), ("FIN", 0.30), ("REQ", 0.06), ("CON", 0.06)]);
        let dur = (-4.0 + 2.0 * normal(rng)).exp();
        let spkts = rng.random_range(1..=24u64);
        let dpkts = rng.random_range(0..=12u64);
        let cat = pick(rng, &[("Generic", 0.4), ("Exploits", 0.3), ("Fuzzers", 0.15), ("DoS", 0.1), ("Reconnaissance", 0.05)]);
        (proto, service, state, dur, spkts, dpkts, 180.0, 120.0, cat)
    } else {
        let proto = pick(rng, &[("tcp", 0.68), ("udp", 0.27), ("arp", 0.05)]);
        let service = pick(rng, &[("-", 0.40), ("dns", 0.25), ("http", 0.20), ("smtp", 0.10), ("ftp", 0.05)]);
        let state = pick(rng, &[("FIN", 0.58), ("CON", 0.25), ("INT", 0.17)]);
        let dur = (-1.0 + 1.5 * normal(rng)).exp();
        let spkts = rng.random_range(2..=160u64);
        let dpkts = rng.random_range(0..=180u64);
        (proto, service, state, dur, spkts, dpkts, 140.0, 700.0, "Normal")
    };
    let bytes = |rng: &mut ChaCha8Rng, pkts: u64, mu: f64| -> u64 {
        (pkts as f64 * mu * (0.35 * normal(rng)).exp()).round() as u64
    };
    let sbytes = bytes(rng, spkts, sbyte_mu);
    let dbytes = bytes(rng, dpkts, dbyte_mu);
    vec![
        id.to_string(),
        format!("{dur:.6}"),
        proto.into(),
        service.into(),
        state.into(),
        spkts.to_string(),
        dpkts.to_string(),
        sbytes.to_string(),
        dbytes.to_string(),
        cat.into(),
        u8::from(attack).to_string(),
    ]
}

fn main() -> Result<(), Box<dyn Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = PathBuf::from(args.first().map_or("data", String::as_str));
    let count = |i: usize, default: usize| -> Result<usize, Box<dyn Error>> {
        Ok(args.get(i).map(|s| s.parse()).transpose()?.unwrap_or(default))
    };
    let (train_rows, test_rows) = (count(1, TRAIN_ROWS)?, count(2, TEST_ROWS)?);
    std::fs::create_dir_all(&dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for (name, rows) in [("synthetic_train.csv", train_rows), ("synthetic_test.csv", test_rows)] {
        let mut w = csv::Writer::from_path(dir.join(name))?;
        w.write_record([
            "id", "dur", "proto", "service", "state", "spkts", "dpkts", "sbytes", "dbytes", "attack_cat", "label",
        ])?;
        for id in 1..=rows {
            w.write_record(row(&mut rng, id))?;
        }
        w.flush()?;
    }
    Ok(())
}
