//! Experiment configuration files.
//!
//! The format is line oriented: `[section]` headers followed by `key = value`
//! lines; `#` starts a comment. A top-level `preset = <name>` line loads a
//! shipped preset first and applies the remaining lines on top of it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::presets;
use crate::data::{ClientAllocation, GaussianMixtureSpec, PartitionSpec};
use crate::error::{Error, Result};
use crate::federation::{Aggregation, AggregatorDiscriminator, Algorithm};
use crate::gan::{GanArchitecture, GeneratorObjective, LatentDistribution, LatentSpec, TrainConfig};
use crate::nn::Activation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Gmm,
    Idx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mixture {
    TwoMode,
    FourMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub kind: DatasetKind,
    pub mixture: Mixture,
    pub stdev: f64,
    /// Samples drawn per mixture mode, or kept per image class.
    pub per_class: Option<usize>,
    pub images: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub downsample: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Iid,
    SingleMinority,
    EqualTotal,
    MultiMinority,
    Explicit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionConfig {
    pub scheme: Scheme,
    pub minority: Vec<usize>,
    pub majority: Vec<usize>,
    /// Client 1's count of each minority class.
    pub minority_count: usize,
    /// Per majority class: each other client's count, or for `equal-total`
    /// the total shared by the other clients.
    pub majority_count: usize,
    /// `explicit` scheme only; entry `k` is client `k + 1`.
    pub explicit: Vec<ClientAllocation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub latent_dim: usize,
    pub latent: LatentDistribution,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    pub output: Activation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmChoice {
    FedGan,
    BiasFree,
    Both,
}

impl AlgorithmChoice {
    pub fn algorithms(self) -> Vec<Algorithm> {
        match self {
            AlgorithmChoice::FedGan => vec![Algorithm::FedGan],
            AlgorithmChoice::BiasFree => vec![Algorithm::BiasFree],
            AlgorithmChoice::Both => vec![Algorithm::FedGan, Algorithm::BiasFree],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FederationSection {
    pub clients: usize,
    pub rounds: usize,
    pub aggregator_epochs: usize,
    pub samples_per_client: usize,
    pub seed: u64,
    pub algorithm: AlgorithmChoice,
    pub aggregation: Aggregation,
    pub aggregator_discriminator: AggregatorDiscriminator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportConfig {
    /// Generator samples used for each round's bias measurement.
    pub probe_samples: usize,
    /// Rows written to `samples.csv`.
    pub dump_samples: usize,
    pub grid_rows: usize,
    pub grid_cols: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub partition: PartitionConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub federation: FederationSection,
    pub report: ReportConfig,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    /// Everything except the seed, which a config file must set.
    fn default() -> Self {
        Self {
            dataset: DatasetConfig {
                kind: DatasetKind::Gmm,
                mixture: Mixture::TwoMode,
                stdev: 0.6,
                per_class: None,
                images: None,
                labels: None,
                downsample: None,
            },
            partition: PartitionConfig {
                scheme: Scheme::Iid,
                minority: vec![0],
                majority: vec![1],
                minority_count: 10_000,
                majority_count: 10_000,
                explicit: Vec::new(),
            },
            model: ModelConfig {
                latent_dim: 2,
                latent: LatentDistribution::StandardNormal,
                hidden_width: 32,
                hidden_layers: 2,
                output: Activation::Identity,
            },
            train: TrainConfig::default(),
            federation: FederationSection {
                clients: 5,
                rounds: 3,
                aggregator_epochs: 100,
                samples_per_client: 10_000,
                seed: 0,
                algorithm: AlgorithmChoice::Both,
                aggregation: Aggregation::Mean,
                aggregator_discriminator: AggregatorDiscriminator::default(),
            },
            report: ReportConfig {
                probe_samples: 10_000,
                dump_samples: 2_000,
                grid_rows: 8,
                grid_cols: 8,
            },
            output: PathBuf::from("runs/experiment"),
        }
    }
}

/// One `key = value` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    /// Empty for keys before the first header.
    pub section: String,
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Splits config text into entries. Rejects malformed lines and keys
/// repeated within a section.
pub fn parse_entries(text: &str, path: &Path) -> Result<Vec<Entry>> {
    let mut section = String::new();
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(format!("unterminated section header {content:?}")))?
                .trim();
            if name.is_empty() {
                return Err(err("empty section name".into()));
            }
            section = name.to_string();
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got {content:?}")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(err("missing key before `=`".into()));
        }
        if let Some(prev) = out.iter().find(|e| e.section == section && e.key == key) {
            return Err(err(format!("`{key}` already set on line {}", prev.line)));
        }
        out.push(Entry {
            section: section.clone(),
            key: key.to_string(),
            value: value.trim().to_string(),
            line,
        });
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    /// Parses and validates config text. `path` only labels errors.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let entries = parse_entries(text, path)?;
        let mut cfg = ExperimentConfig::default();
        let mut seed_set = false;
        if let Some(p) = entries.iter().find(|e| e.section.is_empty() && e.key == "preset") {
            let base = presets::preset(&p.value).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: p.line,
                message: format!(
                    "unknown preset {:?}; available: {}",
                    p.value,
                    presets::names().join(", ")
                ),
            })?;
            let base_path = PathBuf::from(format!("<preset {}>", p.value));
            for e in parse_entries(base, &base_path)? {
                seed_set |= apply(&mut cfg, &e, &base_path)?;
            }
        }
        for e in entries.iter().filter(|e| !(e.section.is_empty() && e.key == "preset")) {
            seed_set |= apply(&mut cfg, e, path)?;
        }
        if !seed_set {
            return Err(Error::Config("federation.seed: required".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `section.key = value` overrides, e.g. from the command line.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let e = Entry {
            section: section.into(),
            key: key.into(),
            value: value.into(),
            line: 0,
        };
        apply(self, &e, Path::new("<override>"))?;
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::Config(format!("{field}: {msg}")));
        let d = &self.dataset;
        match d.kind {
            DatasetKind::Gmm => {
                self.mixture()?;
                if d.per_class.is_none_or(|n| n == 0) {
                    return bad("dataset.per_class", "must be at least 1 for a gmm dataset");
                }
            }
            DatasetKind::Idx => {
                if d.images.is_none() {
                    return bad("dataset.images", "required for an idx dataset");
                }
                if d.labels.is_none() {
                    return bad("dataset.labels", "required for an idx dataset");
                }
                if d.per_class == Some(0) {
                    return bad("dataset.per_class", "must be at least 1");
                }
                if d.downsample == Some(0) {
                    return bad("dataset.downsample", "must be at least 1");
                }
            }
        }
        let f = &self.federation;
        if f.clients == 0 {
            return bad("federation.clients", "must be at least 1");
        }
        let p = &self.partition;
        match p.scheme {
            Scheme::Iid => {}
            Scheme::Explicit => {
                if p.explicit.len() != f.clients {
                    return bad(
                        "partition.client",
                        &format!("{} allocations for {} clients", p.explicit.len(), f.clients),
                    );
                }
            }
            Scheme::SingleMinority | Scheme::EqualTotal | Scheme::MultiMinority => {
                if f.clients < 2 {
                    return bad("federation.clients", "minority schemes need at least 2 clients");
                }
                if p.minority.is_empty() {
                    return bad("partition.minority", "must list at least one class");
                }
                if p.majority.is_empty() {
                    return bad("partition.majority", "must list at least one class");
                }
                if p.scheme == Scheme::SingleMinority && (p.minority.len() != 1 || p.majority.len() != 1) {
                    return bad("partition.scheme", "single-minority takes one minority and one majority class");
                }
                if p.minority.iter().any(|c| p.majority.contains(c)) {
                    return bad("partition.majority", "overlaps the minority classes");
                }
                if p.minority_count == 0 {
                    return bad("partition.minority_count", "must be at least 1");
                }
                if p.scheme == Scheme::EqualTotal && p.majority_count < f.clients - 1 {
                    return bad("partition.majority_count", "too small to give every client a sample");
                }
                if p.majority_count == 0 {
                    return bad("partition.majority_count", "must be at least 1");
                }
            }
        }
        if p.minority.is_empty() {
            return bad("partition.minority", "must list at least one class");
        }
        let m = &self.model;
        if m.latent_dim == 0 {
            return bad("model.latent_dim", "must be at least 1");
        }
        if m.hidden_width == 0 {
            return bad("model.hidden_width", "must be at least 1");
        }
        self.train
            .validate()
            .map_err(|e| Error::Config(format!("train: {}", strip_config(e))))?;
        let r = &self.report;
        if r.probe_samples == 0 {
            return bad("report.probe_samples", "must be at least 1");
        }
        if r.grid_rows == 0 || r.grid_cols == 0 {
            return bad("report.grid_rows", "grid needs at least one row and column");
        }
        if self.output.as_os_str().is_empty() {
            return bad("output.dir", "must not be empty");
        }
        Ok(())
    }

    pub fn mixture(&self) -> Result<GaussianMixtureSpec> {
        let sd = self.dataset.stdev;
        match self.dataset.mixture {
            Mixture::TwoMode => GaussianMixtureSpec::two_mode(sd),
            Mixture::FourMode => GaussianMixtureSpec::four_mode(sd),
        }
        .map_err(|e| Error::Config(format!("dataset.stdev: {}", strip_config(e))))
    }

    pub fn partition_spec(&self) -> PartitionSpec {
        let p = &self.partition;
        let m = self.federation.clients;
        match p.scheme {
            Scheme::Iid => PartitionSpec::Iid,
            Scheme::Explicit => PartitionSpec::Explicit(p.explicit.clone()),
            Scheme::SingleMinority | Scheme::MultiMinority => PartitionSpec::multi_minority(
                &p.minority,
                &p.majority,
                p.minority_count,
                p.majority_count,
                m,
            ),
            Scheme::EqualTotal => {
                let mut allocs = vec![ClientAllocation {
                    counts: p.minority.iter().map(|&c| (c, p.minority_count)).collect(),
                }];
                let others = m - 1;
                for k in 0..others {
                    let n = p.majority_count / others + usize::from(k < p.majority_count % others);
                    allocs.push(ClientAllocation {
                        counts: p.majority.iter().map(|&c| (c, n)).collect(),
                    });
                }
                PartitionSpec::Explicit(allocs)
            }
        }
    }

    pub fn architecture(&self, data_width: usize) -> GanArchitecture {
        GanArchitecture {
            latent: LatentSpec {
                dim: self.model.latent_dim,
                distribution: self.model.latent,
            },
            data_width,
            hidden_width: self.model.hidden_width,
            hidden_layers: self.model.hidden_layers,
            output_activation: self.model.output,
        }
    }

    /// Canonical text form: every key, fixed order. Parsing it yields `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let d = &self.dataset;
        s.push_str("[dataset]\n");
        kv(&mut s, "kind", match d.kind {
            DatasetKind::Gmm => "gmm",
            DatasetKind::Idx => "idx",
        });
        kv(&mut s, "mixture", match d.mixture {
            Mixture::TwoMode => "two-mode",
            Mixture::FourMode => "four-mode",
        });
        kv(&mut s, "stdev", &format!("{:?}", d.stdev));
        if let Some(n) = d.per_class {
            kv(&mut s, "per_class", &n.to_string());
        }
        if let Some(p) = &d.images {
            kv(&mut s, "images", &p.display().to_string());
        }
        if let Some(p) = &d.labels {
            kv(&mut s, "labels", &p.display().to_string());
        }
        if let Some(n) = d.downsample {
            kv(&mut s, "downsample", &n.to_string());
        }

        let p = &self.partition;
        s.push_str("\n[partition]\n");
        kv(&mut s, "scheme", scheme_name(p.scheme));
        kv(&mut s, "minority", &join(&p.minority));
        kv(&mut s, "majority", &join(&p.majority));
        kv(&mut s, "minority_count", &p.minority_count.to_string());
        kv(&mut s, "majority_count", &p.majority_count.to_string());
        for (k, a) in p.explicit.iter().enumerate() {
            let counts: Vec<String> = a.counts.iter().map(|(c, n)| format!("{c}:{n}")).collect();
            kv(&mut s, &format!("client.{}", k + 1), &counts.join(","));
        }

        let m = &self.model;
        s.push_str("\n[model]\n");
        kv(&mut s, "latent_dim", &m.latent_dim.to_string());
        kv(&mut s, "latent", match m.latent {
            LatentDistribution::StandardNormal => "normal",
            LatentDistribution::Uniform => "uniform",
        });
        kv(&mut s, "hidden_width", &m.hidden_width.to_string());
        kv(&mut s, "hidden_layers", &m.hidden_layers.to_string());
        kv(&mut s, "output", activation_name(m.output));

        let t = &self.train;
        s.push_str("\n[train]\n");
        kv(&mut s, "epochs", &t.epochs.to_string());
        kv(&mut s, "batch_size", &t.batch_size.to_string());
        kv(&mut s, "gen_learning_rate", &format!("{:?}", t.gen_learning_rate));
        kv(&mut s, "disc_learning_rate", &format!("{:?}", t.disc_learning_rate));
        kv(&mut s, "disc_steps", &t.disc_steps_per_gen_step.to_string());
        kv(&mut s, "objective", match t.gen_objective {
            GeneratorObjective::NonSaturating => "non-saturating",
            GeneratorObjective::Minimax => "minimax",
        });

        let f = &self.federation;
        s.push_str("\n[federation]\n");
        kv(&mut s, "clients", &f.clients.to_string());
        kv(&mut s, "rounds", &f.rounds.to_string());
        kv(&mut s, "aggregator_epochs", &f.aggregator_epochs.to_string());
        kv(&mut s, "samples_per_client", &f.samples_per_client.to_string());
        kv(&mut s, "seed", &f.seed.to_string());
        kv(&mut s, "algorithm", match f.algorithm {
            AlgorithmChoice::FedGan => "fedgan",
            AlgorithmChoice::BiasFree => "biasfree",
            AlgorithmChoice::Both => "both",
        });
        kv(&mut s, "aggregation", match f.aggregation {
            Aggregation::Mean => "mean",
            Aggregation::Sum => "sum",
        });
        kv(&mut s, "aggregator_discriminator", match f.aggregator_discriminator {
            AggregatorDiscriminator::WarmStart => "warm-start",
            AggregatorDiscriminator::Reinitialize => "reinitialize",
        });

        let r = &self.report;
        s.push_str("\n[report]\n");
        kv(&mut s, "probe_samples", &r.probe_samples.to_string());
        kv(&mut s, "dump_samples", &r.dump_samples.to_string());
        kv(&mut s, "grid_rows", &r.grid_rows.to_string());
        kv(&mut s, "grid_cols", &r.grid_cols.to_string());

        s.push_str("\n[output]\n");
        kv(&mut s, "dir", &self.output.display().to_string());
        s
    }

    /// Hex SHA-256 of the canonical text.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

fn kv(s: &mut String, key: &str, value: &str) {
    let _ = writeln!(s, "{key} = {value}");
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::Iid => "iid",
        Scheme::SingleMinority => "single-minority",
        Scheme::EqualTotal => "equal-total",
        Scheme::MultiMinority => "multi-minority",
        Scheme::Explicit => "explicit",
    }
}

fn activation_name(a: Activation) -> &'static str {
    match a {
        Activation::Identity => "identity",
        Activation::Relu => "relu",
        Activation::Tanh => "tanh",
        Activation::Sigmoid => "sigmoid",
    }
}

fn strip_config(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

/// Returns whether the entry set the seed.
fn apply(cfg: &mut ExperimentConfig, e: &Entry, path: &Path) -> Result<bool> {
    let err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        line: e.line,
        message,
    };
    let v = e.value.as_str();
    let uint = || v.parse::<usize>().map_err(|_| err(format!("{}: expected a non-negative integer, got {v:?}", e.key)));
    let real = || {
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| err(format!("{}: expected a number, got {v:?}", e.key)))
    };
    let choice = |options: &[&str]| {
        if options.contains(&v) {
            Ok(v)
        } else {
            Err(err(format!("{}: expected one of {}, got {v:?}", e.key, options.join(" | "))))
        }
    };
    let classes = || -> Result<Vec<usize>> {
        v.split(',')
            .map(|c| c.trim().parse::<usize>().map_err(|_| err(format!("{}: invalid class list {v:?}", e.key))))
            .collect()
    };
    let optional_uint = || if v.is_empty() { Ok(None) } else { uint().map(Some) };
    let unknown = || Err(err(format!("unknown key `{}` in [{}]", e.key, e.section)));

    match (e.section.as_str(), e.key.as_str()) {
        ("dataset", "kind") => {
            cfg.dataset.kind = match choice(&["gmm", "idx"])? {
                "gmm" => DatasetKind::Gmm,
                _ => DatasetKind::Idx,
            }
        }
        ("dataset", "mixture") => {
            cfg.dataset.mixture = match choice(&["two-mode", "four-mode"])? {
                "two-mode" => Mixture::TwoMode,
                _ => Mixture::FourMode,
            }
        }
        ("dataset", "stdev") => cfg.dataset.stdev = real()?,
        ("dataset", "per_class") => cfg.dataset.per_class = optional_uint()?,
        ("dataset", "images") => cfg.dataset.images = Some(PathBuf::from(v)),
        ("dataset", "labels") => cfg.dataset.labels = Some(PathBuf::from(v)),
        ("dataset", "downsample") => cfg.dataset.downsample = optional_uint()?,

        ("partition", "scheme") => {
            cfg.partition.scheme = match choice(&["iid", "single-minority", "equal-total", "multi-minority", "explicit"])? {
                "iid" => Scheme::Iid,
                "single-minority" => Scheme::SingleMinority,
                "equal-total" => Scheme::EqualTotal,
                "multi-minority" => Scheme::MultiMinority,
                _ => Scheme::Explicit,
            }
        }
        ("partition", "minority") => cfg.partition.minority = classes()?,
        ("partition", "majority") => cfg.partition.majority = classes()?,
        ("partition", "minority_count") => cfg.partition.minority_count = uint()?,
        ("partition", "majority_count") => cfg.partition.majority_count = uint()?,
        ("partition", key) if key.starts_with("client.") => {
            let k: usize = key["client.".len()..]
                .parse()
                .ok()
                .filter(|&k| k >= 1)
                .ok_or_else(|| err(format!("`{key}`: client numbers start at 1")))?;
            let mut counts = Vec::new();
            for part in v.split(',') {
                let (c, n) = part
                    .split_once(':')
                    .and_then(|(c, n)| Some((c.trim().parse().ok()?, n.trim().parse().ok()?)))
                    .ok_or_else(|| err(format!("`{key}`: expected class:count pairs, got {part:?}")))?;
                counts.push((c, n));
            }
            let list = &mut cfg.partition.explicit;
            if list.len() < k {
                list.resize(k, ClientAllocation { counts: Vec::new() });
            }
            list[k - 1] = ClientAllocation { counts };
        }

        ("model", "latent_dim") => cfg.model.latent_dim = uint()?,
        ("model", "latent") => {
            cfg.model.latent = match choice(&["normal", "uniform"])? {
                "normal" => LatentDistribution::StandardNormal,
                _ => LatentDistribution::Uniform,
            }
        }
        ("model", "hidden_width") => cfg.model.hidden_width = uint()?,
        ("model", "hidden_layers") => cfg.model.hidden_layers = uint()?,
        ("model", "output") => {
            cfg.model.output = match choice(&["identity", "relu", "tanh", "sigmoid"])? {
                "identity" => Activation::Identity,
                "relu" => Activation::Relu,
                "tanh" => Activation::Tanh,
                _ => Activation::Sigmoid,
            }
        }

        ("train", "epochs") => cfg.train.epochs = uint()?,
        ("train", "batch_size") => cfg.train.batch_size = uint()?,
        ("train", "learning_rate") => {
            let lr = real()?;
            cfg.train.gen_learning_rate = lr;
            cfg.train.disc_learning_rate = lr;
        }
        ("train", "gen_learning_rate") => cfg.train.gen_learning_rate = real()?,
        ("train", "disc_learning_rate") => cfg.train.disc_learning_rate = real()?,
        ("train", "disc_steps") => cfg.train.disc_steps_per_gen_step = uint()?,
        ("train", "objective") => {
            cfg.train.gen_objective = match choice(&["non-saturating", "minimax"])? {
                "non-saturating" => GeneratorObjective::NonSaturating,
                _ => GeneratorObjective::Minimax,
            }
        }

        ("federation", "clients") => cfg.federation.clients = uint()?,
        ("federation", "rounds") => cfg.federation.rounds = uint()?,
        ("federation", "aggregator_epochs") => cfg.federation.aggregator_epochs = uint()?,
        ("federation", "samples_per_client") => cfg.federation.samples_per_client = uint()?,
        ("federation", "seed") => {
            cfg.federation.seed = v
                .parse()
                .map_err(|_| err(format!("seed: expected an unsigned 64-bit integer, got {v:?}")))?;
            return Ok(true);
        }
        ("federation", "algorithm") => {
            cfg.federation.algorithm = match choice(&["fedgan", "biasfree", "both"])? {
                "fedgan" => AlgorithmChoice::FedGan,
                "biasfree" => AlgorithmChoice::BiasFree,
                _ => AlgorithmChoice::Both,
            }
        }
        ("federation", "aggregation") => {
            cfg.federation.aggregation = match choice(&["mean", "sum"])? {
                "mean" => Aggregation::Mean,
                _ => Aggregation::Sum,
            }
        }
        ("federation", "aggregator_discriminator") => {
            cfg.federation.aggregator_discriminator = match choice(&["warm-start", "reinitialize"])? {
                "warm-start" => AggregatorDiscriminator::WarmStart,
                _ => AggregatorDiscriminator::Reinitialize,
            }
        }

        ("report", "probe_samples") => cfg.report.probe_samples = uint()?,
        ("report", "dump_samples") => cfg.report.dump_samples = uint()?,
        ("report", "grid_rows") => cfg.report.grid_rows = uint()?,
        ("report", "grid_cols") => cfg.report.grid_cols = uint()?,

        ("output", "dir") => cfg.output = PathBuf::from(v),
        _ => return unknown(),
    }
    Ok(false)
}
