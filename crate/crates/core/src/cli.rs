//! `dtnet` subcommands: train, eval, bench.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bench;
use crate::container::{self, SavedModel};
use crate::data::{
    load_csv, load_idx, load_libsvm, subsample, synth_blobs, BlobSpec, CsvOptions,
    Dataset, LabelColumn, LabelMap, RawTable,
};
use crate::error::{Error, Result};
use crate::network::{accuracy, train, HyperParams, Method};
use crate::report::TrainReport;
use crate::transforms::TransformKind;

#[derive(Debug, Parser)]
#[command(name = "dtnet", version, about = "Layer-wise trained transform networks")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a network and write the model, report.json and summary.txt.
    Train(TrainArgs),
    /// Accuracy and confusion counts of a saved model.
    Eval(EvalArgs),
    /// Time fast transforms against dense matrix-vector products.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    #[default]
    Csv,
    Libsvm,
    Idx,
    Synth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsvConfig {
    pub label_column: LabelColumn,
    pub has_header: bool,
    pub delimiter: char,
}

impl Default for CsvConfig {
    fn default() -> Self {
        CsvConfig {
            label_column: LabelColumn::default(),
            has_header: true,
            delimiter: ',',
        }
    }
}

impl CsvConfig {
    fn options(&self) -> Result<CsvOptions> {
        let delimiter = u8::try_from(self.delimiter)
            .ok()
            .filter(u8::is_ascii)
            .ok_or_else(|| {
                Error::InvalidParameter(format!("delimiter {:?} is not ASCII", self.delimiter))
            })?;
        Ok(CsvOptions {
            label_column: self.label_column.clone(),
            has_header: self.has_header,
            delimiter,
        })
    }
}

/// Gaussian blobs; the seed comes from the run seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub classes: usize,
    pub dims: usize,
    pub samples_per_class: usize,
    pub spread: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            classes: 3,
            dims: 4,
            samples_per_class: 50,
            spread: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub format: DatasetFormat,
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    /// IDX label files; derived from the image file names when absent.
    pub train_labels: Option<PathBuf>,
    pub test_labels: Option<PathBuf>,
    /// Train fraction used when no test file is given.
    pub split: Option<f64>,
    /// Seeded subsets of the loaded train / test samples.
    pub train_subset: Option<usize>,
    pub test_subset: Option<usize>,
    pub csv: CsvConfig,
    pub synth: SynthConfig,
}

/// Everything a run depends on.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    pub hyper: HyperParams,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_SPLIT: f64 = 0.7;
pub const DEFAULT_OUT: &str = "dtnet-out";

#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub dataset_format: Option<DatasetFormat>,
    /// Training file (IDX: image file).
    #[arg(long, value_name = "PATH")]
    pub train: Option<PathBuf>,
    /// Test file (IDX: image file).
    #[arg(long, value_name = "PATH")]
    pub test: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub train_labels: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub test_labels: Option<PathBuf>,
    /// Train fraction when no test file is given.
    #[arg(long)]
    pub split: Option<f64>,
    #[arg(long)]
    pub train_subset: Option<usize>,
    #[arg(long)]
    pub test_subset: Option<usize>,
    /// CSV label column: index (negative counts from the end) or header name.
    #[arg(long, allow_hyphen_values = true)]
    pub label_column: Option<String>,
    /// CSV files have no header row.
    #[arg(long)]
    pub no_header: bool,
    #[arg(long)]
    pub delimiter: Option<char>,
    /// Synthetic data: number of classes.
    #[arg(long)]
    pub classes: Option<usize>,
    /// Synthetic data: feature dimension.
    #[arg(long)]
    pub dims: Option<usize>,
    /// Synthetic data: train (and test) samples per class.
    #[arg(long)]
    pub samples_per_class: Option<usize>,
    /// Synthetic data: noise standard deviation.
    #[arg(long)]
    pub spread: Option<f64>,
    /// Seed for splits, subsets and synthetic data.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// 1, 2, fixed:<kind> or random:<seed>.
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub eta_var: Option<f64>,
    #[arg(long)]
    pub eta_layer: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub lambda0: Option<f64>,
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long)]
    pub lmax: Option<usize>,
    /// Comma-separated transform kinds, e.g. dct,db20,fwht1.
    #[arg(long, value_delimiter = ',')]
    pub bag: Option<Vec<TransformKind>>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Part {
    Train,
    #[default]
    Test,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Which part of the dataset to score.
    #[arg(long, value_enum, default_value_t = Part::Test)]
    pub part: Part,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Comma-separated sizes, each >= 4.
    #[arg(long, value_delimiter = ',', default_values_t = [64usize, 256, 1024, 4096])]
    pub sizes: Vec<usize>,
    /// Comma-separated kinds; all deterministic kinds by default.
    #[arg(long, value_delimiter = ',')]
    pub kinds: Option<Vec<TransformKind>>,
    #[arg(long, default_value_t = 21)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write bench.json here.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

fn read_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

fn parse_label_column(s: &str) -> LabelColumn {
    s.parse().map_or_else(|_| LabelColumn::Name(s.to_string()), LabelColumn::Index)
}

impl DataArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let d = &mut cfg.dataset;
        macro_rules! set {
            ($($dst:expr => $src:expr),* $(,)?) => {
                $(if let Some(v) = $src.clone() { $dst = v; })*
            };
        }
        set!(
            d.format => self.dataset_format,
            d.synth.classes => self.classes,
            d.synth.dims => self.dims,
            d.synth.samples_per_class => self.samples_per_class,
            d.synth.spread => self.spread,
            d.csv.delimiter => self.delimiter,
            cfg.seed => self.seed,
        );
        set!(
            d.train => self.train.clone().map(Some),
            d.test => self.test.clone().map(Some),
            d.train_labels => self.train_labels.clone().map(Some),
            d.test_labels => self.test_labels.clone().map(Some),
            d.split => self.split.map(Some),
            d.train_subset => self.train_subset.map(Some),
            d.test_subset => self.test_subset.map(Some),
        );
        if let Some(c) = &self.label_column {
            d.csv.label_column = parse_label_column(c);
        }
        if self.no_header {
            d.csv.has_header = false;
        }
    }

    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => read_config(path)?,
            None => RunConfig::default(),
        };
        self.apply(&mut cfg);
        Ok(cfg)
    }
}

impl TrainArgs {
    /// Config file, then flags on top, validated.
    pub fn config(&self) -> Result<RunConfig> {
        let mut cfg = self.data.config()?;
        let h = &mut cfg.hyper;
        macro_rules! set {
            ($($dst:expr => $src:expr),* $(,)?) => {
                $(if let Some(v) = $src.clone() { $dst = v; })*
            };
        }
        set!(
            h.method => self.method,
            h.gamma => self.gamma,
            h.eta_var => self.eta_var,
            h.eta_layer => self.eta_layer,
            h.alpha => self.alpha,
            h.mu => self.mu,
            h.lambda0 => self.lambda0,
            h.k_max => self.kmax,
            h.l_max => self.lmax,
            h.bag => self.bag,
        );
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        validate(&cfg)?;
        Ok(cfg)
    }
}

fn validate(cfg: &RunConfig) -> Result<()> {
    cfg.hyper.validate()?;
    let d = &cfg.dataset;
    if let Some(f) = d.split {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::InvalidParameter(format!("split must be in (0, 1), got {f}")));
        }
    }
    if d.format != DatasetFormat::Synth && d.train.is_none() && d.test.is_none() {
        return Err(Error::InvalidParameter(
            "no dataset given (use --train/--test or a config file)".into(),
        ));
    }
    if matches!(d.train_subset, Some(0)) || matches!(d.test_subset, Some(0)) {
        return Err(Error::InvalidParameter("subset sizes must be >= 1".into()));
    }
    Ok(())
}

/// `train-images-idx3-ubyte.gz` → `train-labels-idx1-ubyte.gz`.
fn idx_labels_for(images: &Path) -> Result<PathBuf> {
    let name = images.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    if name.contains("images-idx3") {
        Ok(images.with_file_name(name.replace("images-idx3", "labels-idx1")))
    } else {
        Err(Error::InvalidParameter(format!(
            "cannot derive the label file for {}; pass it explicitly",
            images.display()
        )))
    }
}

fn load_table(d: &DatasetConfig, path: &Path, labels: Option<&PathBuf>) -> Result<RawTable> {
    match d.format {
        DatasetFormat::Csv => load_csv(path, &d.csv.options()?),
        DatasetFormat::Libsvm => load_libsvm(path),
        DatasetFormat::Idx => {
            let labels = match labels {
                Some(l) => l.clone(),
                None => idx_labels_for(path)?,
            };
            load_idx(path, labels)
        }
        DatasetFormat::Synth => unreachable!("synthetic data has no files"),
    }
}

fn restrict(x: &mut DMatrix<f64>, y: &mut Vec<usize>, t: &mut DMatrix<f64>, idx: &[usize]) {
    *x = x.select_columns(idx);
    *t = t.select_columns(idx);
    *y = idx.iter().map(|&i| y[i]).collect();
}

/// Loads the dataset described by `cfg` and a short description of its source.
pub fn load_dataset(cfg: &RunConfig) -> Result<(Dataset, String)> {
    let d = &cfg.dataset;
    let (mut data, source) = match d.format {
        DatasetFormat::Synth => {
            let s = d.synth;
            let spec = BlobSpec {
                classes: s.classes,
                dims: s.dims,
                samples_per_class: s.samples_per_class,
                spread: s.spread,
                seed: cfg.seed,
            };
            let source = format!(
                "synth blobs ({} classes, {} dims, {} per class, spread {})",
                s.classes, s.dims, s.samples_per_class, s.spread
            );
            (synth_blobs(&spec)?, source)
        }
        _ => {
            let train_path = d.train.as_ref().ok_or_else(|| {
                Error::InvalidParameter("a training file is required".into())
            })?;
            let train = load_table(d, train_path, d.train_labels.as_ref())?;
            match &d.test {
                Some(test_path) => {
                    let test = load_table(d, test_path, d.test_labels.as_ref())?;
                    let source = format!("{} / {}", train_path.display(), test_path.display());
                    (Dataset::from_tables(train, test)?, source)
                }
                None => {
                    let f = d.split.unwrap_or(DEFAULT_SPLIT);
                    let source = format!("{} (split {f})", train_path.display());
                    (Dataset::from_split(train, f, cfg.seed)?, source)
                }
            }
        }
    };
    if let Some(n) = d.train_subset {
        if n < data.y_train.len() {
            let idx = subsample(data.y_train.len(), n, cfg.seed);
            restrict(&mut data.x_train, &mut data.y_train, &mut data.t_train, &idx);
        }
    }
    if let Some(n) = d.test_subset {
        if n < data.y_test.len() {
            let idx = subsample(data.y_test.len(), n, cfg.seed.wrapping_add(1));
            restrict(&mut data.x_test, &mut data.y_test, &mut data.t_test, &idx);
        }
    }
    Ok((data, source))
}

/// What `train` produced.
pub struct TrainOutcome {
    pub report: TrainReport,
    pub saved: SavedModel,
    pub out_dir: PathBuf,
}

pub fn cmd_train(args: &TrainArgs) -> Result<TrainOutcome> {
    let cfg = args.config()?;
    run_train(&cfg)
}

/// Trains from a resolved config and writes `model.dtn`, `report.json`, `summary.txt`.
pub fn run_train(cfg: &RunConfig) -> Result<TrainOutcome> {
    validate(cfg)?;
    let (data, source) = load_dataset(cfg)?;
    log::info!(
        "{source}: {} features, {} classes, {} train / {} test",
        data.num_features(),
        data.num_classes(),
        data.y_train.len(),
        data.y_test.len()
    );
    let model = train(&data.x_train, &data.t_train, &cfg.hyper)?;
    let report = TrainReport::build(&model, &data, &source, cfg.seed)?;
    let saved = SavedModel {
        class_names: data.class_names.names.clone(),
        model,
    };

    let out_dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    container::save(out_dir.join("model.dtn"), &saved)?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    let path = out_dir.join("report.json");
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    let path = out_dir.join("summary.txt");
    fs::write(&path, report.summary()).map_err(|e| Error::io(&path, e))?;
    Ok(TrainOutcome {
        report,
        saved,
        out_dir,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub samples: usize,
    pub class_names: Vec<String>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

impl EvalReport {
    pub fn render(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        let _ = writeln!(s, "accuracy {:.2} % ({} samples)", self.accuracy, self.samples);
        let _ = writeln!(s, "confusion (rows true, columns predicted)");
        let w = self
            .class_names
            .iter()
            .map(|n| n.len())
            .chain(self.confusion.iter().flatten().map(|c| c.to_string().len()))
            .max()
            .unwrap_or(1)
            .max(4);
        let _ = write!(s, "{:>w$}", "");
        for n in &self.class_names {
            let _ = write!(s, " {n:>w$}");
        }
        let _ = writeln!(s);
        for (name, row) in self.class_names.iter().zip(&self.confusion) {
            let _ = write!(s, "{name:>w$}");
            for c in row {
                let _ = write!(s, " {c:>w$}");
            }
            let _ = writeln!(s);
        }
        s
    }
}

/// Scores `x` with known labels against a saved model.
pub fn evaluate(saved: &SavedModel, x: &DMatrix<f64>, truth: &[usize]) -> Result<EvalReport> {
    let pred = saved.model.predict(x)?;
    let q = saved.class_names.len();
    let mut confusion = vec![vec![0usize; q]; q];
    for (&t, &p) in truth.iter().zip(&pred) {
        if t >= q {
            return Err(Error::Label(format!("label index {t} outside {q} classes")));
        }
        confusion[t][p] += 1;
    }
    Ok(EvalReport {
        accuracy: accuracy(&pred, truth)?,
        samples: truth.len(),
        class_names: saved.class_names.clone(),
        confusion,
    })
}

fn remap(labels: &[usize], from: &LabelMap, to: &[String]) -> Result<Vec<usize>> {
    let to = LabelMap {
        names: to.to_vec(),
    };
    let names: Vec<String> = labels.iter().map(|&l| from.names[l].clone()).collect();
    to.encode(&names)
}

pub fn cmd_eval(args: &EvalArgs) -> Result<EvalReport> {
    let saved = container::load(&args.model)?;
    let cfg = args.data.config()?;
    let d = &cfg.dataset;
    let (x, labels, map) = if d.format != DatasetFormat::Synth && d.train.is_none() {
        // A lone test file is scored as is.
        let path = d.test.as_ref().ok_or_else(|| {
            Error::InvalidParameter("no dataset given (use --train/--test or a config file)".into())
        })?;
        let table = load_table(d, path, d.test_labels.as_ref())?;
        let map = LabelMap::fit(&table.labels);
        let ids = map.encode(&table.labels)?;
        (table.features, ids, map)
    } else {
        let (data, _) = load_dataset(&cfg)?;
        match args.part {
            Part::Train => (data.x_train, data.y_train, data.class_names),
            Part::Test => (data.x_test, data.y_test, data.class_names),
        }
    };
    let truth = remap(&labels, &map, &saved.class_names)?;
    let mut x = x;
    if x.nrows() < saved.model.p {
        // Sparse formats may omit trailing all-zero features.
        x = x.resize_vertically(saved.model.p, 0.0);
    }
    evaluate(&saved, &x, &truth)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<Vec<bench::BenchRow>> {
    let kinds = args.kinds.clone().unwrap_or_else(|| TransformKind::DETERMINISTIC.to_vec());
    let rows = bench::run(&kinds, &args.sizes, args.reps, args.seed)?;
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("bench.json");
        let mut json = serde_json::to_string_pretty(&rows)?;
        json.push('\n');
        fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    }
    Ok(rows)
}

/// Exit status for an error: 1 for numeric failures, 2 for usage and IO.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numeric() {
        1
    } else {
        2
    }
}

/// Runs a parsed command line, printing results to stdout.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Train(args) => {
            let outcome = cmd_train(args)?;
            print!("{}", outcome.report.summary());
            println!();
            println!("wrote {}", outcome.out_dir.display());
        }
        Command::Eval(args) => print!("{}", cmd_eval(args)?.render()),
        Command::Bench(args) => print!("{}", bench::table(&cmd_bench(args)?)),
    }
    Ok(())
}
