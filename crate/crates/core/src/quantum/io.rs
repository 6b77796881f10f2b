//! Text formats for circuit weights and embedding batches.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use super::{Embedding, QuantumError, Result, VqcWeights};

fn parse_err(what: &'static str, line: usize, reason: impl Into<String>) -> QuantumError {
    QuantumError::Parse {
        what,
        line,
        reason: reason.into(),
    }
}

/// `# tag k=v k=v ...` -> map.
fn parse_header(what: &'static str, line: &str, tag: &str) -> Result<BTreeMap<String, String>> {
    let rest = line
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|r| r.strip_prefix(tag))
        .ok_or_else(|| parse_err(what, 1, format!("expected header `# {tag} ...`")))?;
    rest.split_whitespace()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| parse_err(what, 1, format!("bad header token {kv:?}")))
        })
        .collect()
}

fn header_num<T: std::str::FromStr>(
    what: &'static str,
    h: &BTreeMap<String, String>,
    key: &str,
) -> Result<T> {
    h.get(key)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_err(what, 1, format!("missing or invalid `{key}`")))
}

/// Header line with shape and seed, then one angle per line.
pub fn write_weights<W: Write>(mut w: W, weights: &VqcWeights, seed: u64) -> io::Result<()> {
    writeln!(
        w,
        "# hqids-weights n_qubits={} depth={} seed={seed}",
        weights.n_qubits(),
        weights.depth()
    )?;
    for a in weights.angles() {
        writeln!(w, "{a}")?;
    }
    w.flush()
}

/// Returns the weights and the seed recorded in the header.
pub fn read_weights<R: BufRead>(r: R) -> Result<(VqcWeights, u64)> {
    const WHAT: &str = "weights";
    let mut lines = r.lines();
    let first = lines
        .next()
        .transpose()
        .map_err(|e| parse_err(WHAT, 1, e.to_string()))?
        .ok_or_else(|| parse_err(WHAT, 1, "empty file"))?;
    let h = parse_header(WHAT, &first, "hqids-weights")?;
    let n_qubits = header_num(WHAT, &h, "n_qubits")?;
    let depth = header_num(WHAT, &h, "depth")?;
    let seed = header_num(WHAT, &h, "seed")?;
    let mut angles = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| parse_err(WHAT, i + 2, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        angles.push(
            line.parse::<f64>()
                .map_err(|e| parse_err(WHAT, i + 2, e.to_string()))?,
        );
    }
    Ok((VqcWeights::new(n_qubits, depth, angles)?, seed))
}

/// Parameters recorded at the top of an embedding file.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingHeader {
    pub n_qubits: usize,
    pub depth: usize,
    pub seed: u64,
    pub angle_scale: f64,
}

/// Header then one row per sample: `n_qubits` expectations and the label.
pub fn write_embeddings<W: Write>(
    mut w: W,
    header: &EmbeddingHeader,
    embeddings: &[Embedding],
    labels: &[u8],
) -> io::Result<()> {
    assert_eq!(embeddings.len(), labels.len(), "one label per embedding");
    writeln!(
        w,
        "# hqids-embeddings n_qubits={} depth={} seed={} angle_scale={}",
        header.n_qubits, header.depth, header.seed, header.angle_scale
    )?;
    for (e, &label) in embeddings.iter().zip(labels) {
        crate::data::write_row(&mut w, e.as_slice(), label)?;
    }
    w.flush()
}

pub fn read_embedding_header(first_line: &str) -> Result<EmbeddingHeader> {
    const WHAT: &str = "embeddings";
    let h = parse_header(WHAT, first_line, "hqids-embeddings")?;
    Ok(EmbeddingHeader {
        n_qubits: header_num(WHAT, &h, "n_qubits")?,
        depth: header_num(WHAT, &h, "depth")?,
        seed: header_num(WHAT, &h, "seed")?,
        angle_scale: header_num(WHAT, &h, "angle_scale")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{read_dataset, SplitTag};
    use crate::quantum::{embed, init_weights};

    #[test]
    fn weights_roundtrip_bit_exact() {
        let w = init_weights(3, 2, 99).unwrap();
        let mut buf = Vec::new();
        write_weights(&mut buf, &w, 99).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# hqids-weights n_qubits=3 depth=2 seed=99\n"));
        assert_eq!(text.lines().count(), 1 + 18);
        let (back, seed) = read_weights(&buf[..]).unwrap();
        assert_eq!(back, w);
        assert_eq!(seed, 99);
    }

    #[test]
    fn weights_shape_checked() {
        let text = "# hqids-weights n_qubits=2 depth=1 seed=0\n0.1\n0.2\n";
        assert!(matches!(
            read_weights(text.as_bytes()),
            Err(QuantumError::Shape { expected: 6, got: 2 })
        ));
    }

    #[test]
    fn embeddings_file_layout() {
        let w = init_weights(2, 1, 5).unwrap();
        let es = vec![embed(&[0.1, 0.9], &w).unwrap(), embed(&[0.5, 0.5], &w).unwrap()];
        let header = EmbeddingHeader { n_qubits: 2, depth: 1, seed: 5, angle_scale: 1.0 };
        let mut buf = Vec::new();
        write_embeddings(&mut buf, &header, &es, &[1, 0]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(read_embedding_header(first).unwrap(), header);
        let ds = read_dataset(&buf[..], "e".into(), SplitTag::Subset).unwrap();
        assert_eq!(ds.labels(), vec![1, 0]);
        assert_eq!(ds.samples()[0].features, es[0].as_slice());
    }
}
