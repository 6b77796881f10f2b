//! UNSW-NB15 ingestion and classical preprocessing.
//!
//! Flow records are reduced to eight attributes, the three categorical ones
//! are label-encoded (codes assigned in lexicographic order of the category
//! strings) and every attribute is min-max scaled into `[0, 1]`. Splits and
//! subsets are drawn with a seeded ChaCha generator so that identical inputs
//! always produce identical outputs.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Number of attributes kept from each flow.
pub const FEATURE_COUNT: usize = 8;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("no data rows")]
    NoDataRows,
    #[error("row {row}: column `{column}`: cannot parse {value:?} ({reason})")]
    Row {
        /// 0-based index of the data row (header excluded).
        row: usize,
        column: String,
        value: String,
        reason: String,
    },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("unseen category {value:?} in field `{field}`")]
    UnseenCategory { field: String, value: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("requested {requested} samples but only {available} available")]
    NotEnoughSamples { requested: usize, available: usize },
    #[error("train fraction {0} outside (0, 1) or yields an empty side")]
    BadFraction(f64),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("malformed dataset file line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

impl DataError {
    fn io(path: &Path, source: io::Error) -> Self {
        DataError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, DataError>;

/// The eight flow attributes, in feature-vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    Dur,
    Proto,
    Service,
    State,
    Spkts,
    Dpkts,
    Sbytes,
    Dbytes,
}

impl Feature {
    pub const ALL: [Feature; FEATURE_COUNT] = [
        Feature::Dur,
        Feature::Proto,
        Feature::Service,
        Feature::State,
        Feature::Spkts,
        Feature::Dpkts,
        Feature::Sbytes,
        Feature::Dbytes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Dur => "dur",
            Feature::Proto => "proto",
            Feature::Service => "service",
            Feature::State => "state",
            Feature::Spkts => "spkts",
            Feature::Dpkts => "dpkts",
            Feature::Sbytes => "sbytes",
            Feature::Dbytes => "dbytes",
        }
    }

    /// Position in the full 8-vector.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self> {
        Feature::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s.trim())
            .ok_or_else(|| DataError::UnknownFeature(s.to_string()))
    }
}

/// Categorical fields that go through label encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CategoricalField {
    Proto,
    Service,
    State,
}

impl CategoricalField {
    pub const ALL: [CategoricalField; 3] = [
        CategoricalField::Proto,
        CategoricalField::Service,
        CategoricalField::State,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CategoricalField::Proto => "proto",
            CategoricalField::Service => "service",
            CategoricalField::State => "state",
        }
    }

    fn value(self, record: &FlowRecord) -> &str {
        match self {
            CategoricalField::Proto => &record.proto,
            CategoricalField::Service => &record.service,
            CategoricalField::State => &record.state,
        }
    }
}

/// One raw flow with the selected attributes and its binary label
/// (0 = benign, 1 = attack).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowRecord {
    pub dur: f64,
    pub proto: String,
    pub service: String,
    pub state: String,
    pub spkts: u64,
    pub dpkts: u64,
    pub sbytes: u64,
    pub dbytes: u64,
    pub label: u8,
}

/// Column names looked up in the CSV header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub features: [String; FEATURE_COUNT],
    pub label: String,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            features: Feature::ALL.map(|f| f.name().to_string()),
            label: "label".to_string(),
        }
    }
}

/// Reads flow records from a CSV file with a header row.
pub fn load_csv(path: &Path, schema: &Schema) -> Result<Vec<FlowRecord>> {
    let file = fs::File::open(path).map_err(|e| DataError::io(path, e))?;
    read_csv(BufReader::new(file), schema)
}

/// Same as [`load_csv`] over any reader.
pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Vec<FlowRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let mut cols = [0usize; FEATURE_COUNT];
    for (slot, name) in cols.iter_mut().zip(&schema.features) {
        *slot = find(name)?;
    }
    let label_col = find(&schema.label)?;

    let mut out = Vec::new();
    for (row, result) in rdr.records().enumerate() {
        let rec = result?;
        let cell = |i: usize| rec.get(cols[i]).unwrap_or("");
        let name = |i: usize| schema.features[i].clone();
        let count = |i: usize| -> Result<u64> { parse_count(row, &name(i), cell(i)) };

        let dur_raw = cell(0);
        let dur: f64 = dur_raw.parse().map_err(|e: std::num::ParseFloatError| DataError::Row {
            row,
            column: name(0),
            value: dur_raw.to_string(),
            reason: e.to_string(),
        })?;
        if !dur.is_finite() || dur < 0.0 {
            return Err(DataError::Row {
                row,
                column: name(0),
                value: dur_raw.to_string(),
                reason: "duration must be finite and non-negative".into(),
            });
        }
        let label_raw = rec.get(label_col).unwrap_or("");
        let label = match label_raw {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(DataError::Row {
                    row,
                    column: schema.label.clone(),
                    value: other.to_string(),
                    reason: "label must be 0 or 1".into(),
                })
            }
        };
        out.push(FlowRecord {
            dur,
            proto: cell(1).to_string(),
            service: cell(2).to_string(),
            state: cell(3).to_string(),
            spkts: count(4)?,
            dpkts: count(5)?,
            sbytes: count(6)?,
            dbytes: count(7)?,
            label,
        });
    }
    if out.is_empty() {
        return Err(DataError::NoDataRows);
    }
    log::debug!("read {} flow records", out.len());
    Ok(out)
}

fn parse_count(row: usize, column: &str, raw: &str) -> Result<u64> {
    let err = |reason: String| DataError::Row {
        row,
        column: column.to_string(),
        value: raw.to_string(),
        reason,
    };
    if let Ok(v) = raw.parse::<u64>() {
        return Ok(v);
    }
    // Some exports write counts as "12.0".
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 => {
            Ok(v as u64)
        }
        Ok(_) => Err(err("count must be a non-negative integer".into())),
        Err(e) => Err(err(e.to_string())),
    }
}

/// Label encoder for `proto`, `service` and `state`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CategoryEncoder {
    maps: BTreeMap<CategoricalField, BTreeMap<String, u32>>,
}

impl CategoryEncoder {
    /// Builds an encoder from explicit per-field category lists; codes follow
    /// lexicographic order regardless of input order.
    pub fn from_categories<I, S>(field_values: impl IntoIterator<Item = (CategoricalField, I)>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut maps = BTreeMap::new();
        for (field, values) in field_values {
            let set: BTreeSet<String> = values.into_iter().map(Into::into).collect();
            let map = set
                .into_iter()
                .enumerate()
                .map(|(code, v)| (v, code as u32))
                .collect();
            maps.insert(field, map);
        }
        CategoryEncoder { maps }
    }

    pub fn code(&self, field: CategoricalField, value: &str) -> Result<u32> {
        self.maps
            .get(&field)
            .and_then(|m| m.get(value))
            .copied()
            .ok_or_else(|| DataError::UnseenCategory {
                field: field.name().to_string(),
                value: value.to_string(),
            })
    }

    pub fn mapping(&self, field: CategoricalField) -> Option<&BTreeMap<String, u32>> {
        self.maps.get(&field)
    }

    pub fn len(&self, field: CategoricalField) -> usize {
        self.maps.get(&field).map_or(0, BTreeMap::len)
    }
}

/// Fits label encoders over the combined train+test corpus.
pub fn fit_encoders(records: &[FlowRecord]) -> Result<CategoryEncoder> {
    if records.is_empty() {
        return Err(DataError::Empty("cannot fit encoders on zero records"));
    }
    Ok(CategoryEncoder::from_categories(CategoricalField::ALL.map(|field| {
        (field, records.iter().map(move |r| field.value(r).to_string()))
    })))
}

/// Encodes a record into its unscaled 8-vector.
pub fn encode_record(record: &FlowRecord, enc: &CategoryEncoder) -> Result<[f64; FEATURE_COUNT]> {
    Ok([
        record.dur,
        f64::from(enc.code(CategoricalField::Proto, &record.proto)?),
        f64::from(enc.code(CategoricalField::Service, &record.service)?),
        f64::from(enc.code(CategoricalField::State, &record.state)?),
        record.spkts as f64,
        record.dpkts as f64,
        record.sbytes as f64,
        record.dbytes as f64,
    ])
}

/// Per-feature fitted bounds for min-max scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn from_bounds(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(DataError::Dimension {
                expected: min.len(),
                got: max.len(),
            });
        }
        if min.is_empty() {
            return Err(DataError::Empty("scaler needs at least one feature"));
        }
        if min.iter().zip(&max).any(|(lo, hi)| hi.partial_cmp(lo).is_none_or(Ordering::is_lt)) {
            return Err(DataError::Malformed {
                line: 0,
                reason: "scaler max below min".into(),
            });
        }
        Ok(MinMaxScaler { min, max })
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// `(x - min) / (max - min)`, clamped to `[0, 1]`; constant features map to 0.
    pub fn scale(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.dim() {
            return Err(DataError::Dimension {
                expected: self.dim(),
                got: raw.len(),
            });
        }
        Ok(raw
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&x, (&lo, &hi))| {
                let span = hi - lo;
                if span > 0.0 {
                    ((x - lo) / span).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect())
    }
}

/// Fits componentwise extrema.
pub fn fit_scaler<V: AsRef<[f64]>>(vectors: &[V]) -> Result<MinMaxScaler> {
    let first = vectors
        .first()
        .ok_or(DataError::Empty("cannot fit scaler on zero vectors"))?
        .as_ref();
    let mut min = first.to_vec();
    let mut max = first.to_vec();
    for v in vectors {
        let v = v.as_ref();
        if v.len() != min.len() {
            return Err(DataError::Dimension {
                expected: min.len(),
                got: v.len(),
            });
        }
        for ((lo, hi), &x) in min.iter_mut().zip(max.iter_mut()).zip(v) {
            *lo = lo.min(x);
            *hi = hi.max(x);
        }
    }
    Ok(MinMaxScaler { min, max })
}

/// A scaled feature vector; every component lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, &v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(DataError::Malformed {
                line: 0,
                reason: format!("feature {i} = {v} outside [0, 1]"),
            });
        }
        Ok(FeatureVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Keeps only the listed features, in the listed order. Assumes `self`
    /// holds the full 8-vector.
    pub fn select(&self, features: &[Feature]) -> FeatureVector {
        FeatureVector(features.iter().map(|f| self.0[f.index()]).collect())
    }
}

/// Encodes and scales one record into the full 8-feature vector.
pub fn transform(
    record: &FlowRecord,
    enc: &CategoryEncoder,
    scaler: &MinMaxScaler,
) -> Result<FeatureVector> {
    let raw = encode_record(record, enc)?;
    Ok(FeatureVector(scaler.scale(&raw)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitTag {
    Train,
    Test,
    Subset,
}

impl SplitTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Test => "test",
            SplitTag::Subset => "subset",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: u8,
}

/// Non-empty, rectangular list of labelled feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    provenance: Vec<String>,
    tag: SplitTag,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, provenance: Vec<String>, tag: SplitTag) -> Result<Self> {
        let first = samples
            .first()
            .ok_or(DataError::Empty("dataset must contain at least one sample"))?;
        let dim = first.features.len();
        if let Some(bad) = samples.iter().find(|s| s.features.len() != dim) {
            return Err(DataError::Dimension {
                expected: dim,
                got: bad.features.len(),
            });
        }
        if let Some(bad) = samples.iter().find(|s| s.label > 1) {
            return Err(DataError::Malformed {
                line: 0,
                reason: format!("label {} not in {{0, 1}}", bad.label),
            });
        }
        Ok(Dataset {
            samples,
            provenance,
            tag,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    pub fn tag(&self) -> SplitTag {
        self.tag
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].features.len()
    }

    pub fn features(&self) -> Vec<Vec<f64>> {
        self.samples.iter().map(|s| s.features.clone()).collect()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.samples.iter().map(|s| s.label).collect()
    }

    /// `[benign, attack]` counts.
    pub fn class_counts(&self) -> [usize; 2] {
        let attack = self.samples.iter().filter(|s| s.label == 1).count();
        [self.samples.len() - attack, attack]
    }

    /// Concatenates two datasets; provenance lists are merged.
    pub fn concat(&self, other: &Dataset, tag: SplitTag) -> Result<Dataset> {
        let mut samples = self.samples.clone();
        samples.extend(other.samples.iter().cloned());
        let mut provenance = self.provenance.clone();
        provenance.extend(other.provenance.iter().cloned());
        Dataset::new(samples, provenance, tag)
    }

    fn pick(&self, idx: &[usize], tag: SplitTag, note: String) -> Result<Dataset> {
        let mut provenance = self.provenance.clone();
        provenance.push(note);
        Dataset::new(
            idx.iter().map(|&i| self.samples[i].clone()).collect(),
            provenance,
            tag,
        )
    }
}

/// Draws `n` samples without replacement.
///
/// Uniform mode shuffles all indices and keeps the first `n`. Stratified mode
/// allocates per-class quotas by largest remainder, draws each class
/// independently and shuffles the union.
pub fn subsample(ds: &Dataset, n: usize, seed: u64, stratified: bool) -> Result<Dataset> {
    if n > ds.len() {
        return Err(DataError::NotEnoughSamples {
            requested: n,
            available: ds.len(),
        });
    }
    if n == 0 {
        return Err(DataError::Empty("subsample size must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx = if stratified {
        let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for (i, s) in ds.samples.iter().enumerate() {
            by_class[usize::from(s.label)].push(i);
        }
        let quotas = stratified_quotas(n, [by_class[0].len(), by_class[1].len()]);
        let mut idx = Vec::with_capacity(n);
        for (class, quota) in by_class.iter_mut().zip(quotas) {
            class.shuffle(&mut rng);
            idx.extend_from_slice(&class[..quota]);
        }
        idx.shuffle(&mut rng);
        idx
    } else {
        let mut idx: Vec<usize> = (0..ds.len()).collect();
        idx.shuffle(&mut rng);
        idx.truncate(n);
        idx
    };
    let subset = ds.pick(
        &idx,
        SplitTag::Subset,
        format!("subsample n={n} seed={seed} stratified={stratified}"),
    )?;
    let [benign, attack] = subset.class_counts();
    let mut subset = subset;
    subset
        .provenance
        .push(format!("subset class counts benign={benign} attack={attack}"));
    Ok(subset)
}

fn stratified_quotas(n: usize, counts: [usize; 2]) -> [usize; 2] {
    let total = counts[0] + counts[1];
    let exact = counts.map(|c| n as f64 * c as f64 / total as f64);
    let mut quotas = exact.map(|e| e.floor() as usize);
    let mut left = n - quotas[0] - quotas[1];
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &c in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if quotas[c] < counts[c] {
            quotas[c] += 1;
            left -= 1;
        }
    }
    quotas
}

/// Seeded disjoint partition with `round(train_fraction * n)` training samples.
pub fn split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DataError::BadFraction(train_fraction));
    }
    let n_train = (train_fraction * ds.len() as f64).round() as usize;
    if n_train == 0 || n_train == ds.len() {
        return Err(DataError::BadFraction(train_fraction));
    }
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train_idx, test_idx) = idx.split_at(n_train);
    let note = format!("split fraction={train_fraction} seed={seed}");
    Ok((
        ds.pick(train_idx, SplitTag::Train, note.clone())?,
        ds.pick(test_idx, SplitTag::Test, note)?,
    ))
}

/// Writes one sample per line: comma-separated reals then the integer label.
/// Reals use the shortest representation that parses back to the same bits.
pub fn write_dataset<W: Write>(mut w: W, ds: &Dataset) -> io::Result<()> {
    for s in &ds.samples {
        write_row(&mut w, &s.features, s.label)?;
    }
    w.flush()
}

pub(crate) fn write_row<W: Write>(w: &mut W, values: &[f64], label: u8) -> io::Result<()> {
    for v in values {
        write!(w, "{v},")?;
    }
    writeln!(w, "{label}")
}

/// Reads the format produced by [`write_dataset`]. Lines starting with `#`
/// are skipped so the same reader handles embedding files.
pub fn read_dataset<R: BufRead>(r: R, provenance: String, tag: SplitTag) -> Result<Dataset> {
    let mut samples = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| DataError::Io {
            path: provenance.clone(),
            source: e,
        })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |reason: String| DataError::Malformed { line: i + 1, reason };
        let mut cells: Vec<&str> = line.split(',').collect();
        let label = match cells.pop().map(str::trim) {
            Some("0") => 0,
            Some("1") => 1,
            other => return Err(malformed(format!("bad label {other:?}"))),
        };
        let features = cells
            .iter()
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| malformed(e.to_string()))?;
        samples.push(Sample { features, label });
    }
    Dataset::new(samples, vec![provenance], tag)
}

pub fn save_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| DataError::io(path, e))?;
    write_dataset(io::BufWriter::new(file), ds).map_err(|e| DataError::io(path, e))
}

pub fn load_dataset(path: &Path, tag: SplitTag) -> Result<Dataset> {
    let file = fs::File::open(path).map_err(|e| DataError::io(path, e))?;
    let name = path
        .file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    read_dataset(BufReader::new(file), name, tag)
}

/// Which corpus the min-max scaler is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalerFit {
    /// Train and test together, mirroring the encoder policy.
    Joint,
    /// Train only; avoids test-set leakage into the bounds.
    TrainOnly,
}

impl ScalerFit {
    pub fn as_str(self) -> &'static str {
        match self {
            ScalerFit::Joint => "joint",
            ScalerFit::TrainOnly => "train",
        }
    }
}

impl FromStr for ScalerFit {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "joint" => Ok(ScalerFit::Joint),
            "train" => Ok(ScalerFit::TrainOnly),
            other => Err(format!("scaler fit must be `joint` or `train`, got {other:?}")),
        }
    }
}

/// A source CSV as recorded in the metadata sidecar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceInfo {
    pub name: String,
    pub sha256: String,
    pub rows: usize,
}

/// Everything needed to re-apply preprocessing to new flows.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessMeta {
    pub encoder: CategoryEncoder,
    pub scaler: MinMaxScaler,
    pub scaler_fit: ScalerFit,
    pub features: Vec<Feature>,
    pub seed: u64,
    pub sources: Vec<SourceInfo>,
}

/// Fitted preprocessing state plus the transformed train and test sets.
#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub train: Dataset,
    pub test: Dataset,
    pub encoder: CategoryEncoder,
    pub scaler: MinMaxScaler,
}

/// Encoders on train+test, scaler per `fit`, then transform and select.
pub fn preprocess(
    train: &[FlowRecord],
    test: &[FlowRecord],
    features: &[Feature],
    fit: ScalerFit,
    provenance: (&str, &str),
) -> Result<Preprocessed> {
    let combined: Vec<FlowRecord> = train.iter().chain(test).cloned().collect();
    let encoder = fit_encoders(&combined)?;
    let encode_all = |rs: &[FlowRecord]| -> Result<Vec<[f64; FEATURE_COUNT]>> {
        rs.iter().map(|r| encode_record(r, &encoder)).collect()
    };
    let raw_train = encode_all(train)?;
    let raw_test = encode_all(test)?;
    let scaler = match fit {
        ScalerFit::Joint => {
            let all: Vec<_> = raw_train.iter().chain(&raw_test).copied().collect();
            fit_scaler(&all)?
        }
        ScalerFit::TrainOnly => fit_scaler(&raw_train)?,
    };
    let build = |raw: &[[f64; FEATURE_COUNT]], labels: &[FlowRecord], tag, name: &str| {
        let samples = raw
            .iter()
            .zip(labels)
            .map(|(x, r)| {
                let full = FeatureVector(scaler.scale(x)?);
                Ok(Sample {
                    features: full.select(features).into_inner(),
                    label: r.label,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(samples, vec![name.to_string()], tag)
    };
    let train_ds = build(&raw_train, train, SplitTag::Train, provenance.0)?;
    let test_ds = build(&raw_test, test, SplitTag::Test, provenance.1)?;
    Ok(Preprocessed {
        train: train_ds,
        test: test_ds,
        encoder,
        scaler,
    })
}

/// Serializes the sidecar as sorted `key=value` lines.
pub fn write_metadata<W: Write>(mut w: W, meta: &PreprocessMeta) -> io::Result<()> {
    writeln!(w, "format=hqids-preprocess-v1")?;
    let names: Vec<&str> = meta.features.iter().map(|f| f.name()).collect();
    writeln!(w, "features={}", names.join(","))?;
    writeln!(w, "scaler_fit={}", meta.scaler_fit.as_str())?;
    writeln!(w, "seed={}", meta.seed)?;
    for (i, f) in Feature::ALL.iter().enumerate() {
        writeln!(w, "scaler.{f}.min={}", meta.scaler.min[i])?;
        writeln!(w, "scaler.{f}.max={}", meta.scaler.max[i])?;
    }
    for field in CategoricalField::ALL {
        if let Some(map) = meta.encoder.mapping(field) {
            for (value, code) in map {
                // Category strings can contain anything but `=` and newlines in
                // practice; escape those two just in case.
                writeln!(w, "encoder.{}.{}={code}", field.name(), escape_key(value))?;
            }
        }
    }
    for (i, s) in meta.sources.iter().enumerate() {
        writeln!(w, "source.{i}.name={}", s.name)?;
        writeln!(w, "source.{i}.sha256={}", s.sha256)?;
        writeln!(w, "source.{i}.rows={}", s.rows)?;
    }
    w.flush()
}

fn escape_key(s: &str) -> String {
    s.replace('%', "%25").replace('=', "%3D").replace('\n', "%0A")
}

fn unescape_key(s: &str) -> String {
    s.replace("%0A", "\n").replace("%3D", "=").replace("%25", "%")
}

pub fn read_metadata<R: BufRead>(r: R) -> Result<PreprocessMeta> {
    let mut kv = BTreeMap::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| DataError::Io {
            path: "metadata".into(),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| DataError::Malformed {
            line: i + 1,
            reason: "expected key=value".into(),
        })?;
        kv.insert(k.to_string(), v.to_string());
    }
    let bad = |reason: String| DataError::Malformed { line: 0, reason };
    let get = |k: &str| kv.get(k).cloned().ok_or_else(|| bad(format!("missing key {k}")));
    let num = |k: &str| -> Result<f64> {
        get(k)?.parse().map_err(|e| bad(format!("{k}: {e}")))
    };

    let features = get("features")?
        .split(',')
        .map(Feature::from_str)
        .collect::<Result<Vec<_>>>()?;
    let scaler_fit = get("scaler_fit")?.parse().map_err(bad)?;
    let seed = get("seed")?.parse().map_err(|e| bad(format!("seed: {e}")))?;
    let mut min = Vec::new();
    let mut max = Vec::new();
    for f in Feature::ALL {
        min.push(num(&format!("scaler.{f}.min"))?);
        max.push(num(&format!("scaler.{f}.max"))?);
    }
    let scaler = MinMaxScaler::from_bounds(min, max)?;

    let mut maps: BTreeMap<CategoricalField, BTreeMap<String, u32>> = BTreeMap::new();
    for field in CategoricalField::ALL {
        let prefix = format!("encoder.{}.", field.name());
        let map = maps.entry(field).or_default();
        for (k, v) in kv.range(prefix.clone()..) {
            let Some(value) = k.strip_prefix(&prefix) else {
                break;
            };
            let code = v.parse().map_err(|e| bad(format!("{k}: {e}")))?;
            map.insert(unescape_key(value), code);
        }
    }
    let encoder = CategoryEncoder { maps };

    let mut sources = Vec::new();
    while let Some(name) = kv.get(&format!("source.{}.name", sources.len())) {
        let i = sources.len();
        sources.push(SourceInfo {
            name: name.clone(),
            sha256: get(&format!("source.{i}.sha256"))?,
            rows: get(&format!("source.{i}.rows"))?
                .parse()
                .map_err(|e| bad(format!("rows: {e}")))?,
        });
    }
    Ok(PreprocessMeta {
        encoder,
        scaler,
        scaler_fit,
        features,
        seed,
        sources,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "id,dur,proto,service,state,spkts,dpkts,sbytes,dbytes,attack_cat,label\n";

    fn rec(proto: &str, label: u8) -> FlowRecord {
        FlowRecord {
            dur: 0.5,
            proto: proto.into(),
            service: "-".into(),
            state: "FIN".into(),
            spkts: 2,
            dpkts: 3,
            sbytes: 100,
            dbytes: 200,
            label,
        }
    }

    fn toy_dataset(n: usize) -> Dataset {
        let samples = (0..n)
            .map(|i| Sample {
                features: vec![i as f64 / n as f64],
                label: (i % 3 == 0) as u8,
            })
            .collect();
        Dataset::new(samples, vec!["toy".into()], SplitTag::Train).unwrap()
    }

    #[test]
    fn header_only_is_no_data_rows() {
        let err = read_csv(HEADER.as_bytes(), &Schema::default()).unwrap_err();
        assert!(matches!(err, DataError::NoDataRows));
        assert_eq!(err.to_string(), "no data rows");
    }

    #[test]
    fn parses_row_fields() {
        let csv = format!("{HEADER}1,0.5,tcp,http,FIN,2,3,100,200,Normal,0\n");
        let rows = read_csv(csv.as_bytes(), &Schema::default()).unwrap();
        assert_eq!(
            rows,
            vec![FlowRecord {
                dur: 0.5,
                proto: "tcp".into(),
                service: "http".into(),
                state: "FIN".into(),
                spkts: 2,
                dpkts: 3,
                sbytes: 100,
                dbytes: 200,
                label: 0,
            }]
        );
    }

    #[test]
    fn bad_count_reports_row() {
        let csv = format!(
            "{HEADER}1,0.5,tcp,-,FIN,2,3,100,200,Normal,0\n2,0.1,udp,-,INT,abc,3,1,2,Exploits,1\n"
        );
        match read_csv(csv.as_bytes(), &Schema::default()).unwrap_err() {
            DataError::Row { row, column, value, .. } => {
                assert_eq!(row, 1);
                assert_eq!(column, "spkts");
                assert_eq!(value, "abc");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_column_is_named() {
        let csv = "dur,proto,state,spkts,dpkts,sbytes,dbytes,label\n0.1,tcp,FIN,1,1,1,1,0\n";
        match read_csv(csv.as_bytes(), &Schema::default()).unwrap_err() {
            DataError::MissingColumn(c) => assert_eq!(c, "service"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_binary_label_rejected() {
        let csv = format!("{HEADER}1,0.5,tcp,-,FIN,2,3,100,200,Normal,2\n");
        assert!(matches!(
            read_csv(csv.as_bytes(), &Schema::default()),
            Err(DataError::Row { row: 0, .. })
        ));
    }

    #[test]
    fn encoder_lexicographic() {
        let enc = fit_encoders(&[rec("udp", 0), rec("tcp", 1), rec("arp", 0)]).unwrap();
        let proto = enc.mapping(CategoricalField::Proto).unwrap();
        let got: Vec<_> = proto.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        assert_eq!(got, vec![("arp", 0), ("tcp", 1), ("udp", 2)]);

        let enc = fit_encoders(&[rec("tcp", 0), rec("udp", 1)]).unwrap();
        assert_eq!(enc.code(CategoricalField::Proto, "tcp").unwrap(), 0);
        assert_eq!(enc.code(CategoricalField::Proto, "udp").unwrap(), 1);

        let enc = fit_encoders(&[rec("tcp", 0)]).unwrap();
        assert_eq!(enc.len(CategoricalField::Proto), 1);
        assert_eq!(enc.code(CategoricalField::Proto, "tcp").unwrap(), 0);
    }

    #[test]
    fn encoder_rejects_empty_and_unseen() {
        assert!(matches!(fit_encoders(&[]), Err(DataError::Empty(_))));
        let enc = fit_encoders(&[rec("tcp", 0)]).unwrap();
        match enc.code(CategoricalField::Proto, "icmp").unwrap_err() {
            DataError::UnseenCategory { field, value } => {
                assert_eq!(field, "proto");
                assert_eq!(value, "icmp");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scaler_extrema_and_degenerate() {
        let s = fit_scaler(&[vec![2.0, 5.0], vec![4.0, 5.0], vec![6.0, 5.0]]).unwrap();
        assert_eq!(s.min(), &[2.0, 5.0]);
        assert_eq!(s.max(), &[6.0, 5.0]);
        assert_eq!(s.scale(&[2.0, 5.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(s.scale(&[6.0, 5.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(s.scale(&[4.0, 5.0]).unwrap(), vec![0.5, 0.0]);
        // clamped outside the fitted range
        assert_eq!(s.scale(&[10.0, 7.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(s.scale(&[-3.0, 7.0]).unwrap(), vec![0.0, 0.0]);

        let single = fit_scaler(&[vec![1.0, 2.0]]).unwrap();
        assert_eq!(single.min(), single.max());
        assert!(fit_scaler::<Vec<f64>>(&[]).is_err());
    }

    #[test]
    fn transform_unseen_category_errors() {
        let enc = fit_encoders(&[rec("tcp", 0)]).unwrap();
        let raw = encode_record(&rec("tcp", 0), &enc).unwrap();
        let scaler = fit_scaler(&[raw]).unwrap();
        assert!(matches!(
            transform(&rec("udp", 0), &enc, &scaler),
            Err(DataError::UnseenCategory { .. })
        ));
        let fv = transform(&rec("tcp", 0), &enc, &scaler).unwrap();
        assert_eq!(fv.as_slice(), &[0.0; 8]);
    }

    #[test]
    fn split_sizes_and_disjointness() {
        let ds = toy_dataset(200);
        let (tr, te) = split(&ds, 0.8, 7).unwrap();
        assert_eq!((tr.len(), te.len()), (160, 40));

        let ds = toy_dataset(10);
        let (tr, te) = split(&ds, 0.5, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (5, 5));
        let mut all: Vec<f64> = tr.samples().iter().chain(te.samples()).map(|s| s.features[0]).collect();
        all.sort_by(f64::total_cmp);
        let expected: Vec<f64> = ds.samples().iter().map(|s| s.features[0]).collect();
        assert_eq!(all, expected);

        assert_eq!(split(&ds, 0.5, 1).unwrap(), split(&ds, 0.5, 1).unwrap());
        assert!(matches!(split(&ds, 1.0, 1), Err(DataError::BadFraction(_))));
        assert!(matches!(split(&ds, 0.0, 1), Err(DataError::BadFraction(_))));
    }

    #[test]
    fn subsample_contract() {
        let ds = toy_dataset(50);
        let whole = subsample(&ds, 50, 3, false).unwrap();
        assert_eq!(whole.len(), 50);
        let mut a: Vec<f64> = whole.samples().iter().map(|s| s.features[0]).collect();
        a.sort_by(f64::total_cmp);
        assert_eq!(a, ds.samples().iter().map(|s| s.features[0]).collect::<Vec<_>>());

        assert_eq!(subsample(&ds, 20, 9, false).unwrap(), subsample(&ds, 20, 9, false).unwrap());
        assert!(matches!(
            subsample(&ds, 51, 0, false),
            Err(DataError::NotEnoughSamples { .. })
        ));
    }

    #[test]
    fn stratified_ratio_within_one() {
        let ds = toy_dataset(300); // 100 attack, 200 benign
        for n in [1, 7, 20, 199, 300] {
            let sub = subsample(&ds, n, 11, true).unwrap();
            let [_, attack] = sub.class_counts();
            let target = n as f64 * 100.0 / 300.0;
            assert!((attack as f64 - target).abs() <= 1.0, "n={n} attack={attack}");
            assert_eq!(sub.len(), n);
        }
    }

    #[test]
    fn dataset_file_roundtrip_exact() {
        let samples = vec![
            Sample { features: vec![0.1, 1.0 / 3.0, 0.0], label: 1 },
            Sample { features: vec![1.0, 2e-17, 0.30000000000000004], label: 0 },
        ];
        let ds = Dataset::new(samples, vec!["x".into()], SplitTag::Test).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &ds).unwrap();
        let back = read_dataset(&buf[..], "x".into(), SplitTag::Test).unwrap();
        assert_eq!(back.samples(), ds.samples());
    }

    #[test]
    fn metadata_roundtrip() {
        let records = [rec("tcp", 0), rec("a=b", 1), rec("udp", 1)];
        let pre = preprocess(&records[..2], &records[2..], &Feature::ALL, ScalerFit::Joint, ("a", "b")).unwrap();
        let meta = PreprocessMeta {
            encoder: pre.encoder,
            scaler: pre.scaler,
            scaler_fit: ScalerFit::Joint,
            features: Feature::ALL.to_vec(),
            seed: 42,
            sources: vec![SourceInfo { name: "a.csv".into(), sha256: "00".into(), rows: 2 }],
        };
        let mut buf = Vec::new();
        write_metadata(&mut buf, &meta).unwrap();
        assert_eq!(read_metadata(&buf[..]).unwrap(), meta);
    }
}
