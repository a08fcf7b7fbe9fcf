//! Dataset ingestion, label encoding and preprocessing.
//!
//! All matrices keep samples as columns: features are `P × J`, one-hot
//! targets `Q × J`.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::GzDecoder;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense features with their raw (string) labels.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub features: DMatrix<f64>,
    pub labels: Vec<String>,
}

impl RawTable {
    pub fn dim(&self) -> usize {
        self.features.nrows()
    }

    pub fn len(&self) -> usize {
        self.features.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends zero feature rows up to `p` (sparse formats omit trailing features).
    pub fn pad_features(&mut self, p: usize) {
        if p > self.dim() {
            let j = self.len();
            let old = std::mem::replace(&mut self.features, DMatrix::zeros(0, 0));
            self.features = old.resize(p, j, 0.0);
        }
    }

    /// Keeps the columns listed in `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> RawTable {
        RawTable {
            features: self.features.select_columns(idx),
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    /// Zero-based column index; negative values count from the end (-1 = last).
    Index(i64),
    Name(String),
}

impl Default for LabelColumn {
    fn default() -> Self {
        LabelColumn::Index(-1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub label_column: LabelColumn,
    pub has_header: bool,
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            label_column: LabelColumn::default(),
            has_header: true,
            delimiter: b',',
        }
    }
}

/// Reads a delimited text file; every non-label cell must be numeric.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<RawTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(opts.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let parse_err = |row: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        row,
        msg,
    };

    let header: Option<Vec<String>> = if opts.has_header {
        let h = reader.headers().map_err(|e| parse_err(1, e.to_string()))?;
        Some(h.iter().map(str::to_string).collect())
    } else {
        None
    };

    let mut width: Option<usize> = header.as_ref().map(Vec::len);
    let mut label_idx: Option<usize> = None;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let first_row = if opts.has_header { 2 } else { 1 };

    for (i, record) in reader.records().enumerate() {
        let row = first_row + i;
        let record = record.map_err(|e| parse_err(row, e.to_string()))?;
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(parse_err(
                row,
                format!("ragged row: expected {w} fields, found {}", record.len()),
            ));
        }
        let li = match label_idx {
            Some(li) => li,
            None => {
                let li = resolve_label_column(&opts.label_column, header.as_deref(), w)
                    .map_err(|msg| parse_err(row, msg))?;
                label_idx = Some(li);
                li
            }
        };
        for (c, cell) in record.iter().enumerate() {
            if c == li {
                labels.push(cell.to_string());
            } else {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| parse_err(row, format!("non-numeric feature {cell:?} in column {c}")))?;
                values.push(v);
            }
        }
    }
    let j = labels.len();
    let p = width.map_or(0, |w| w.saturating_sub(1));
    Ok(RawTable {
        features: DMatrix::from_vec(p, j, values),
        labels,
    })
}

fn resolve_label_column(
    col: &LabelColumn,
    header: Option<&[String]>,
    width: usize,
) -> std::result::Result<usize, String> {
    match col {
        LabelColumn::Index(i) => {
            let idx = if *i < 0 { width as i64 + i } else { *i };
            if idx < 0 || idx as usize >= width {
                Err(format!("label column {i} out of range for {width} fields"))
            } else {
                Ok(idx as usize)
            }
        }
        LabelColumn::Name(name) => header
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| format!("no label column named {name:?}")),
    }
}

/// Writes a table as CSV with a generated header and the label in the last column.
pub fn write_csv(path: impl AsRef<Path>, table: &RawTable) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let to_err = |e: csv::Error| Error::Format {
        path: path.to_path_buf(),
        msg: e.to_string(),
    };
    let mut header: Vec<String> = (0..table.dim()).map(|i| format!("x{i}")).collect();
    header.push("label".into());
    w.write_record(&header).map_err(to_err)?;
    for (j, col) in table.features.column_iter().enumerate() {
        // `{:?}` on f64 prints the shortest string that parses back exactly.
        let mut rec: Vec<String> = col.iter().map(|v| format!("{v:?}")).collect();
        rec.push(table.labels[j].clone());
        w.write_record(&rec).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads LIBSVM sparse text (`label idx:val idx:val ...`, 1-based, increasing).
pub fn load_libsvm(path: impl AsRef<Path>) -> Result<RawTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut p = 0;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let row = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            row,
            msg,
        };
        let mut tokens = line.split_whitespace();
        let label = tokens.next().expect("non-empty line");
        let mut entries = Vec::new();
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("malformed token {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| err(format!("bad index in {tok:?}")))?;
            let val: f64 = val
                .parse()
                .map_err(|_| err(format!("bad value in {tok:?}")))?;
            if idx == 0 {
                return Err(err("indices are 1-based".into()));
            }
            if idx <= last {
                return Err(err(format!("index {idx} not increasing (after {last})")));
            }
            last = idx;
            entries.push((idx - 1, val));
        }
        p = p.max(last);
        labels.push(label.to_string());
        rows.push(entries);
    }
    let mut features = DMatrix::zeros(p, rows.len());
    for (j, entries) in rows.iter().enumerate() {
        for &(i, v) in entries {
            features[(i, j)] = v;
        }
    }
    Ok(RawTable { features, labels })
}

fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let mut raw = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut raw))
        .map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..])
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes(bytes[at..at + 4].try_into().unwrap())
}

/// Reads an IDX image/label file pair (optionally gzip-compressed).
///
/// Pixels are flattened row-major and scaled to `[0, 1]`.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<RawTable> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let images = read_maybe_gz(ip)?;
    let labels = read_maybe_gz(lp)?;
    let fmt = |path: &Path, msg: String| Error::Format {
        path: path.to_path_buf(),
        msg,
    };
    if images.len() < 16 {
        return Err(fmt(ip, "truncated header".into()));
    }
    if labels.len() < 8 {
        return Err(fmt(lp, "truncated header".into()));
    }
    if be_u32(&images, 0) != 0x0000_0803 {
        return Err(fmt(ip, format!("bad image magic {:#010x}", be_u32(&images, 0))));
    }
    if be_u32(&labels, 0) != 0x0000_0801 {
        return Err(fmt(lp, format!("bad label magic {:#010x}", be_u32(&labels, 0))));
    }
    let count = be_u32(&images, 4) as usize;
    let rows = be_u32(&images, 8) as usize;
    let cols = be_u32(&images, 12) as usize;
    let label_count = be_u32(&labels, 4) as usize;
    if count != label_count {
        return Err(fmt(
            lp,
            format!("{label_count} labels for {count} images"),
        ));
    }
    let p = rows * cols;
    if images.len() < 16 + count * p {
        return Err(fmt(
            ip,
            format!("truncated: need {} bytes, have {}", 16 + count * p, images.len()),
        ));
    }
    if labels.len() < 8 + count {
        return Err(fmt(
            lp,
            format!("truncated: need {} bytes, have {}", 8 + count, labels.len()),
        ));
    }
    let features = DMatrix::from_iterator(
        p,
        count,
        images[16..16 + count * p].iter().map(|&b| b as f64 / 255.0),
    );
    let labels = labels[8..8 + count].iter().map(|b| b.to_string()).collect();
    Ok(RawTable { features, labels })
}

/// Dense `0..Q` class ids in first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    pub names: Vec<String>,
}

impl LabelMap {
    pub fn fit(labels: &[String]) -> Self {
        let mut names: Vec<String> = Vec::new();
        for l in labels {
            if !names.contains(l) {
                names.push(l.clone());
            }
        }
        LabelMap { names }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn encode(&self, labels: &[String]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| {
                self.names
                    .iter()
                    .position(|n| n == l)
                    .ok_or_else(|| Error::Label(format!("unknown label {l:?}")))
            })
            .collect()
    }
}

/// `q × J` one-hot matrix with a 1 at `labels[j]` in column `j`.
pub fn one_hot(labels: &[usize], q: usize) -> Result<DMatrix<f64>> {
    let mut t = DMatrix::zeros(q, labels.len());
    for (j, &l) in labels.iter().enumerate() {
        if l >= q {
            return Err(Error::Label(format!("label {l} out of range for {q} classes")));
        }
        t[(l, j)] = 1.0;
    }
    Ok(t)
}

/// Scales each column to unit Euclidean norm; zero columns are left alone and flagged.
pub fn unit_norm_samples(x: &DMatrix<f64>) -> (DMatrix<f64>, Vec<bool>) {
    let mut out = x.clone();
    let mut zero = vec![false; x.ncols()];
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        } else {
            zero[j] = true;
        }
    }
    (out, zero)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preprocess {
    None,
    #[default]
    UnitNorm,
    Zscore,
}

/// Fitted preprocessing, stored in the model and replayed at inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormStats {
    None,
    UnitNorm,
    Zscore { mean: Vec<f64>, std: Vec<f64> },
}

impl NormStats {
    pub fn fit(mode: Preprocess, x: &DMatrix<f64>) -> Self {
        match mode {
            Preprocess::None => NormStats::None,
            Preprocess::UnitNorm => NormStats::UnitNorm,
            Preprocess::Zscore => {
                let j = x.ncols().max(1) as f64;
                let mean: Vec<f64> = x.row_iter().map(|r| r.sum() / j).collect();
                let std = x
                    .row_iter()
                    .zip(&mean)
                    .map(|(r, m)| (r.iter().map(|v| (v - m).powi(2)).sum::<f64>() / j).sqrt())
                    .collect();
                NormStats::Zscore { mean, std }
            }
        }
    }

    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match self {
            NormStats::None => Ok(x.clone()),
            NormStats::UnitNorm => Ok(unit_norm_samples(x).0),
            NormStats::Zscore { mean, std } => {
                if x.nrows() != mean.len() {
                    return Err(Error::dim(format!(
                        "z-score fitted on {} features, got {}",
                        mean.len(),
                        x.nrows()
                    )));
                }
                let mut out = x.clone();
                for (i, mut row) in out.row_iter_mut().enumerate() {
                    let s = if std[i] > 0.0 { std[i] } else { 1.0 };
                    row.apply(|v| *v = (*v - mean[i]) / s);
                }
                Ok(out)
            }
        }
    }
}

/// Index partition produced by [`split`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub stratified: bool,
}

/// Seeded shuffle split with `fraction` of the samples in the training part.
///
/// Stratified per class when every class has at least two samples; otherwise
/// falls back to a plain shuffle and logs a warning.
pub fn split(labels: &[usize], fraction: f64, seed: u64) -> Result<Split> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split fraction must be in (0, 1), got {fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = labels.iter().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); q];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let stratified = by_class.iter().all(|c| c.is_empty() || c.len() >= 2);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    if stratified {
        // Largest-remainder allocation keeps the total at round(fraction · n).
        let total = (fraction * labels.len() as f64).round() as usize;
        let exact: Vec<f64> = by_class.iter().map(|c| fraction * c.len() as f64).collect();
        let mut quota: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
        let mut order: Vec<usize> = (0..q).collect();
        order.sort_by(|&a, &b| {
            let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
            rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
        });
        let mut missing = total.saturating_sub(quota.iter().sum());
        for &c in order.iter().cycle().take(q * 2) {
            if missing == 0 {
                break;
            }
            if quota[c] < by_class[c].len() {
                quota[c] += 1;
                missing -= 1;
            }
        }
        for (mut members, k) in by_class.into_iter().zip(quota) {
            members.shuffle(&mut rng);
            test.extend_from_slice(&members[k..]);
            train.extend(members.into_iter().take(k));
        }
    } else {
        log::warn!("a class has a single sample; falling back to an unstratified split");
        let mut all: Vec<usize> = (0..labels.len()).collect();
        all.shuffle(&mut rng);
        let k = (fraction * all.len() as f64).round() as usize;
        test.extend_from_slice(&all[k..]);
        all.truncate(k);
        train = all;
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split {
        train,
        test,
        stratified,
    })
}

/// Seeded `count`-element subset of `0..n` (sorted), used to subsample large training sets.
pub fn subsample(n: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    idx.truncate(count.min(n));
    idx.sort_unstable();
    idx
}

/// Train/test matrices with one-hot targets and the shared label map.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x_train: DMatrix<f64>,
    pub t_train: DMatrix<f64>,
    pub y_train: Vec<usize>,
    pub x_test: DMatrix<f64>,
    pub t_test: DMatrix<f64>,
    pub y_test: Vec<usize>,
    pub class_names: LabelMap,
}

impl Dataset {
    /// Encodes labels with a map fitted on the training table.
    pub fn from_tables(mut train: RawTable, mut test: RawTable) -> Result<Self> {
        let p = train.dim().max(test.dim());
        train.pad_features(p);
        test.pad_features(p);
        let class_names = LabelMap::fit(&train.labels);
        let y_train = class_names.encode(&train.labels)?;
        let y_test = class_names.encode(&test.labels)?;
        let q = class_names.len();
        Ok(Dataset {
            t_train: one_hot(&y_train, q)?,
            t_test: one_hot(&y_test, q)?,
            x_train: train.features,
            x_test: test.features,
            y_train,
            y_test,
            class_names,
        })
    }

    /// Splits one table into train and test parts.
    pub fn from_split(table: RawTable, fraction: f64, seed: u64) -> Result<Self> {
        let map = LabelMap::fit(&table.labels);
        let ids = map.encode(&table.labels)?;
        let parts = split(&ids, fraction, seed)?;
        let q = map.len();
        let pick = |idx: &[usize]| -> Vec<usize> { idx.iter().map(|&i| ids[i]).collect() };
        let (y_train, y_test) = (pick(&parts.train), pick(&parts.test));
        Ok(Dataset {
            x_train: table.features.select_columns(&parts.train),
            x_test: table.features.select_columns(&parts.test),
            t_train: one_hot(&y_train, q)?,
            t_test: one_hot(&y_test, q)?,
            y_train,
            y_test,
            class_names: map,
        })
    }

    pub fn num_features(&self) -> usize {
        self.x_train.nrows()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }
}

/// Synthetic parameters for [`synth_blobs`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlobSpec {
    pub classes: usize,
    pub dims: usize,
    pub samples_per_class: usize,
    pub spread: f64,
    pub seed: u64,
}

/// Gaussian blobs around seeded centers drawn uniformly in `[-1, 1]^dims`.
///
/// The same number of samples per class goes to train and to test.
pub fn synth_blobs(spec: &BlobSpec) -> Result<Dataset> {
    let BlobSpec {
        classes,
        dims,
        samples_per_class,
        spread,
        seed,
    } = *spec;
    if classes == 0 || dims == 0 || samples_per_class == 0 || spread.is_sign_negative() {
        return Err(Error::InvalidParameter(format!("bad blob parameters {spec:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let centers: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..dims).map(|_| unit.sample(&mut rng)).collect())
        .collect();
    let noise = Normal::new(0.0, spread).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let draw = |rng: &mut ChaCha8Rng| -> RawTable {
        let mut values = Vec::with_capacity(classes * samples_per_class * dims);
        let mut labels = Vec::new();
        for _ in 0..samples_per_class {
            for (c, center) in centers.iter().enumerate() {
                values.extend(center.iter().map(|m| m + noise.sample(rng)));
                labels.push(c.to_string());
            }
        }
        RawTable {
            features: DMatrix::from_vec(dims, labels.len(), values),
            labels,
        }
    };
    let train = draw(&mut rng);
    let test = draw(&mut rng);
    Dataset::from_tables(train, test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn tmp_file(contents: &[u8]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents).unwrap();
        f
    }

    #[test]
    fn csv_three_rows_two_classes() {
        let f = tmp_file(b"x,y,label\n1,2,a\n3,4,b\n5,6,a\n");
        let t = load_csv(f.path(), &CsvOptions::default()).unwrap();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.len(), 3);
        assert_eq!(LabelMap::fit(&t.labels).len(), 2);
        assert_eq!(t.features[(1, 2)], 6.0);
    }

    #[test]
    fn csv_ragged_row_names_row() {
        let f = tmp_file(b"x,y,label\n1,2,a\n3,b\n");
        match load_csv(f.path(), &CsvOptions::default()) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn csv_without_header_and_named_column() {
        let f = tmp_file(b"a;1;2\nb;3;4\n");
        let opts = CsvOptions {
            label_column: LabelColumn::Index(0),
            has_header: false,
            delimiter: b';',
        };
        let t = load_csv(f.path(), &opts).unwrap();
        assert_eq!(t.labels, vec!["a", "b"]);
        assert_eq!(t.features.column(1).as_slice(), &[3.0, 4.0]);

        let f = tmp_file(b"cls,x\nu,1\n");
        let opts = CsvOptions {
            label_column: LabelColumn::Name("cls".into()),
            ..CsvOptions::default()
        };
        assert_eq!(load_csv(f.path(), &opts).unwrap().labels, vec!["u"]);
    }

    #[test]
    fn csv_non_numeric_feature() {
        let f = tmp_file(b"x,label\nabc,1\n");
        assert!(matches!(
            load_csv(f.path(), &CsvOptions::default()),
            Err(Error::Parse { row: 2, .. })
        ));
    }

    #[test]
    fn libsvm_basic() {
        let f = tmp_file(b"1 1:0.5 3:2\n2\n");
        let t = load_libsvm(f.path()).unwrap();
        assert_eq!(t.labels, vec!["1", "2"]);
        assert_eq!(t.features.column(0).as_slice(), &[0.5, 0.0, 2.0]);
        assert_eq!(t.features.column(1).as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn libsvm_rejects_duplicates_and_garbage() {
        let f = tmp_file(b"1 2:1 2:3\n");
        assert!(matches!(load_libsvm(f.path()), Err(Error::Parse { row: 1, .. })));
        let f = tmp_file(b"1 3:1 2:3\n");
        assert!(load_libsvm(f.path()).is_err());
        let f = tmp_file(b"1 2=1\n");
        assert!(load_libsvm(f.path()).is_err());
    }

    fn idx_pair(pixels: &[u8], labels: &[u8], rows: u32, cols: u32) -> (Vec<u8>, Vec<u8>) {
        let n = labels.len() as u32;
        let mut img = Vec::new();
        for v in [0x803u32, n, rows, cols] {
            img.extend_from_slice(&v.to_be_bytes());
        }
        img.extend_from_slice(pixels);
        let mut lab = Vec::new();
        for v in [0x801u32, n] {
            lab.extend_from_slice(&v.to_be_bytes());
        }
        lab.extend_from_slice(labels);
        (img, lab)
    }

    #[test]
    fn idx_scaling_and_labels() {
        let (img, lab) = idx_pair(&[0, 255, 0, 255], &[7], 2, 2);
        let (fi, fl) = (tmp_file(&img), tmp_file(&lab));
        let t = load_idx(fi.path(), fl.path()).unwrap();
        assert_eq!(t.features.column(0).as_slice(), &[0.0, 1.0, 0.0, 1.0]);
        assert_eq!(t.labels, vec!["7"]);
    }

    #[test]
    fn idx_gzip_transparent() {
        use flate2::{write::GzEncoder, Compression};
        let (img, lab) = idx_pair(&[10, 20, 30, 40], &[1], 2, 2);
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(&img).unwrap();
        let (fi, fl) = (tmp_file(&enc.finish().unwrap()), tmp_file(&lab));
        let t = load_idx(fi.path(), fl.path()).unwrap();
        assert!((t.features[(3, 0)] - 40.0 / 255.0).abs() < 1e-15);
    }

    #[test]
    fn idx_errors() {
        let (img, lab) = idx_pair(&[0, 255, 0], &[7], 2, 2);
        let (fi, fl) = (tmp_file(&img), tmp_file(&lab));
        assert!(matches!(load_idx(fi.path(), fl.path()), Err(Error::Format { .. })));

        let (mut img, lab) = idx_pair(&[0, 255, 0, 1], &[7], 2, 2);
        img[3] = 0x01;
        let (fi, fl) = (tmp_file(&img), tmp_file(&lab));
        assert!(load_idx(fi.path(), fl.path()).is_err());

        let (img, _) = idx_pair(&[0, 255, 0, 1], &[7], 2, 2);
        let (_, lab) = idx_pair(&[], &[7, 1], 2, 2);
        let (fi, fl) = (tmp_file(&img), tmp_file(&lab));
        assert!(load_idx(fi.path(), fl.path()).is_err());
    }

    #[test]
    fn one_hot_cases() {
        let t = one_hot(&[0, 2], 3).unwrap();
        assert_eq!(t.column(0).as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(t.column(1).as_slice(), &[0.0, 0.0, 1.0]);
        assert_eq!(one_hot(&[0, 0, 0], 1).unwrap(), DMatrix::from_element(1, 3, 1.0));
        assert!(matches!(one_hot(&[5], 3), Err(Error::Label(_))));
    }

    #[test]
    fn unit_norm_cases() {
        let x = DMatrix::from_column_slice(2, 3, &[3.0, 4.0, 0.0, 0.0, 0.6, 0.8]);
        let (y, zero) = unit_norm_samples(&x);
        assert!((y[(0, 0)] - 0.6).abs() < 1e-15 && (y[(1, 0)] - 0.8).abs() < 1e-15);
        assert_eq!(zero, vec![false, true, false]);
        assert_eq!(y.column(1).as_slice(), &[0.0, 0.0]);
        assert!((y[(0, 2)] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn split_properties() {
        let labels: Vec<usize> = (0..10).map(|i| i % 2).collect();
        let a = split(&labels, 0.5, 3).unwrap();
        let b = split(&labels, 0.5, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.train.len(), a.test.len()), (5, 5));
        assert!(a.stratified);
        let mut all: Vec<usize> = a.train.iter().chain(&a.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());

        let labels = vec![0, 0, 0, 1];
        let s = split(&labels, 0.5, 1).unwrap();
        assert!(!s.stratified);
        assert!(split(&labels, 1.0, 1).is_err());
    }

    #[test]
    fn blobs_are_seeded() {
        let spec = BlobSpec {
            classes: 2,
            dims: 2,
            samples_per_class: 5,
            spread: 0.1,
            seed: 4,
        };
        let a = synth_blobs(&spec).unwrap();
        let b = synth_blobs(&spec).unwrap();
        assert_eq!(a.x_train, b.x_train);
        assert_eq!((a.num_features(), a.num_classes()), (2, 2));
    }

    #[test]
    fn zscore_replays_training_stats() {
        let x = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 5.0, 5.0, 5.0]);
        let stats = NormStats::fit(Preprocess::Zscore, &x);
        let y = stats.apply(&x).unwrap();
        assert!((y.row(0).sum()).abs() < 1e-12);
        assert_eq!(y.row(1).iter().copied().collect::<Vec<_>>(), vec![0.0; 3]);
    }
}
