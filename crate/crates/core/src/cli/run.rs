//! `run`: builds the federation described by a config and writes its artifacts.
//!
//! Output layout, one directory per algorithm under the configured root:
//!
//! ```text
//! <dir>/manifest
//! <dir>/<fedgan|biasfree>/manifest
//!                        /round_<n>.csv
//!                        /bias_by_round.csv
//!                        /bias_report.csv, bias_report.json
//!                        /samples.csv
//!                        /grid.pgm            (image datasets)
//!                        /generator.fgbf, discriminator.fgbf
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;

use super::config::{DatasetKind, ExperimentConfig};
use super::grid::render_pgm;
use crate::data::{load_idx, make_gmm_dataset, partition, LabeledDataset};
use crate::error::{Error, Result};
use crate::federation::{run_federation, substream, Algorithm, BiasProbe, ClientState, RoundReport};
use crate::gan::GanPair;
use crate::matrix::Matrix;
use crate::metrics::{assign_modes, BiasReport, ModeCenters};
use crate::snapshot;

/// Dataset synthesis and partitioning.
pub const DATA_STREAM: u64 = u64::MAX - 1;
/// Shared initial generator/discriminator.
pub const INIT_STREAM: u64 = u64::MAX - 2;
/// Final bias report and sample dump.
pub const REPORT_STREAM: u64 = u64::MAX - 3;

/// Everything a run needs before federated training starts.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub clients: Vec<LabeledDataset>,
    pub centers: ModeCenters,
    pub init: GanPair,
    /// Side length when samples are square images.
    pub image_side: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    pub dir: PathBuf,
    pub reports: Vec<RoundReport>,
    pub bias: BiasReport,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub root: PathBuf,
    pub runs: Vec<AlgorithmRun>,
}

impl RunSummary {
    pub fn get(&self, algorithm: Algorithm) -> Option<&AlgorithmRun> {
        self.runs.iter().find(|r| r.algorithm == algorithm)
    }
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let mut rng = substream(cfg.federation.seed, DATA_STREAM);
    let (dataset, centers, image_side) = match cfg.dataset.kind {
        DatasetKind::Gmm => {
            let spec = cfg.mixture()?;
            let per_mode = cfg.dataset.per_class.unwrap_or(0);
            (make_gmm_dataset(&spec, per_mode, &mut rng)?, spec.centers(), None)
        }
        DatasetKind::Idx => {
            let d = &cfg.dataset;
            let (images, labels) = d.images.as_deref().zip(d.labels.as_deref()).ok_or_else(|| {
                Error::Config("dataset.images and dataset.labels are required for idx data".into())
            })?;
            let full = load_idx(images, labels, d.downsample)?;
            let centers = ModeCenters::from_class_means(&full.samples, &full.labels, full.num_classes)?;
            let width = full.samples.cols();
            let side = (width as f64).sqrt().round() as usize;
            let kept = match d.per_class {
                Some(n) => take_per_class(&full, n, &mut rng)?,
                None => full,
            };
            (kept, centers, Some(side).filter(|s| s * s == width))
        }
    };
    for &c in cfg.partition.minority.iter().chain(&cfg.partition.majority) {
        if c >= dataset.num_classes {
            return Err(Error::Config(format!(
                "partition: class {c} does not exist, the dataset has {} classes",
                dataset.num_classes
            )));
        }
    }
    let clients = partition(&dataset, &cfg.partition_spec(), cfg.federation.clients, &mut rng)?;
    let arch = cfg.architecture(dataset.samples.cols());
    let init = GanPair::init(&arch, &mut substream(cfg.federation.seed, INIT_STREAM))?;
    Ok(Prepared {
        clients,
        centers,
        init,
        image_side,
    })
}

/// Keeps `n` randomly chosen rows of every class, in original row order.
fn take_per_class<R: rand::Rng + ?Sized>(ds: &LabeledDataset, n: usize, rng: &mut R) -> Result<LabeledDataset> {
    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); ds.num_classes];
    for (i, &l) in ds.labels.iter().enumerate() {
        pools[l].push(i);
    }
    let mut keep = Vec::with_capacity(n * ds.num_classes);
    for (c, pool) in pools.iter_mut().enumerate() {
        if pool.len() < n {
            return Err(Error::Partition(format!(
                "class {c}: requested {n}, available {}, short by {}",
                pool.len(),
                n - pool.len()
            )));
        }
        pool.shuffle(rng);
        keep.extend_from_slice(&pool[..n]);
    }
    keep.sort_unstable();
    Ok(ds.subset(&keep))
}

/// Runs every configured algorithm and writes the artifacts. `progress`
/// receives one summary line per round.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    parallel: bool,
    progress: &mut dyn FnMut(&str),
) -> Result<RunSummary> {
    let prepared = prepare(cfg)?;
    let root = cfg.output.clone();
    fs::create_dir_all(&root)?;
    fs::write(root.join("manifest"), manifest(cfg, None, parallel))?;
    let mut runs = Vec::new();
    for algorithm in cfg.federation.algorithm.algorithms() {
        let run = run_one(cfg, &prepared, algorithm, parallel, progress)?;
        runs.push(run);
    }
    Ok(RunSummary { root, runs })
}

fn run_one(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    algorithm: Algorithm,
    parallel: bool,
    progress: &mut dyn FnMut(&str),
) -> Result<AlgorithmRun> {
    let f = &cfg.federation;
    let mut clients = prepared
        .clients
        .iter()
        .enumerate()
        .map(|(i, d)| ClientState::new(i + 1, d.samples.clone(), prepared.init.clone()))
        .collect::<Result<Vec<_>>>()?;
    let probe = BiasProbe {
        centers: prepared.centers.clone(),
        minority_classes: cfg.partition.minority.clone(),
        samples: cfg.report.probe_samples,
    };
    let fed = crate::federation::FederationConfig {
        num_clients: f.clients,
        rounds: f.rounds,
        local: cfg.train,
        aggregator_epochs: f.aggregator_epochs,
        aggregator_discriminator: f.aggregator_discriminator,
        samples_per_client: f.samples_per_client,
        master_seed: f.seed,
        aggregation: f.aggregation,
        parallel,
        probe: Some(probe.clone()),
    };
    let outcome = run_federation(&mut clients, &fed, algorithm)?;

    let dir = cfg.output.join(algorithm.name());
    fs::create_dir_all(&dir)?;
    for r in &outcome.reports {
        fs::write(dir.join(format!("round_{}.csv", r.round)), round_csv(r, &outcome.global))?;
        if let Some(b) = &r.bias {
            progress(&format!(
                "{} round {}: minority_share {:.4}, balance_entropy {:.4}",
                algorithm.name(),
                r.round,
                b.minority_share,
                b.balance_entropy
            ));
        }
    }
    fs::write(dir.join("bias_by_round.csv"), bias_by_round_csv(&outcome.reports))?;

    let mut rng = substream(f.seed, REPORT_STREAM);
    let bias = probe.measure(&outcome.global, &mut rng)?;
    fs::write(dir.join("bias_report.csv"), bias.to_csv())?;
    fs::write(dir.join("bias_report.json"), bias.to_json())?;

    let dump = outcome.global.generate(cfg.report.dump_samples, &mut rng)?;
    fs::write(dir.join("samples.csv"), samples_csv(&dump, &prepared.centers)?)?;
    if let Some(side) = prepared.image_side {
        let (rows, cols) = (cfg.report.grid_rows, cfg.report.grid_cols);
        let tiles = outcome.global.generate(rows * cols, &mut rng)?;
        fs::write(dir.join("grid.pgm"), render_pgm(&tiles, side, rows, cols)?)?;
    }
    snapshot::save(&outcome.global.generator, &dir.join("generator.fgbf"))?;
    snapshot::save(&outcome.global.discriminator, &dir.join("discriminator.fgbf"))?;
    fs::write(dir.join("manifest"), manifest(cfg, Some(algorithm), parallel))?;

    Ok(AlgorithmRun {
        algorithm,
        dir,
        reports: outcome.reports,
        bias,
    })
}

/// Header comments followed by the canonical config, so a manifest is itself
/// a loadable config.
pub fn manifest(cfg: &ExperimentConfig, algorithm: Option<Algorithm>, parallel: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# fedgan-lab {}", env!("CARGO_PKG_VERSION"));
    if let Some(a) = algorithm {
        let _ = writeln!(s, "# algorithm = {}", a.name());
    }
    let _ = writeln!(s, "# seed = {}", cfg.federation.seed);
    let _ = writeln!(s, "# config_sha256 = {}", cfg.hash());
    let _ = writeln!(s, "# parallel = {parallel}");
    s.push_str(&cfg.to_text());
    s
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

/// Final losses and parameter traffic of one round.
pub fn round_csv(r: &RoundReport, global: &GanPair) -> String {
    let per_client = snapshot::encoded_len(&global.generator) + snapshot::encoded_len(&global.discriminator);
    let mut s = String::from(
        "entity,disc_loss,gen_loss,uplink_messages,uplink_bytes,downlink_messages,downlink_bytes\n",
    );
    for c in &r.client_losses {
        let _ = writeln!(
            s,
            "client_{},{},{},2,{per_client},2,{per_client}",
            c.client,
            fmt_opt(c.last.map(|l| l.disc)),
            fmt_opt(c.last.map(|l| l.gen)),
        );
    }
    let _ = writeln!(
        s,
        "aggregator,{},{},0,0,0,0",
        fmt_opt(r.aggregator_loss.map(|l| l.disc)),
        fmt_opt(r.aggregator_loss.map(|l| l.gen)),
    );
    let l = &r.ledger;
    let _ = writeln!(
        s,
        "total,,,{},{},{},{}",
        l.uplink_messages, l.uplink_bytes, l.downlink_messages, l.downlink_bytes
    );
    s
}

fn bias_by_round_csv(reports: &[RoundReport]) -> String {
    let mut s = String::from("round,balance_entropy,minority_share");
    let classes = reports.iter().find_map(|r| r.bias.as_ref()).map_or(0, |b| b.fractions.len());
    for c in 0..classes {
        let _ = write!(s, ",fraction_{c}");
    }
    s.push('\n');
    for r in reports {
        if let Some(b) = &r.bias {
            let _ = write!(s, "{},{:?},{:?}", r.round, b.balance_entropy, b.minority_share);
            for f in &b.fractions {
                let _ = write!(s, ",{f:?}");
            }
            s.push('\n');
        }
    }
    s
}

/// Generated rows with their nearest-mode assignment.
pub fn samples_csv(samples: &Matrix, centers: &ModeCenters) -> Result<String> {
    let modes = assign_modes(samples, centers)?;
    let mut s = String::new();
    for c in 0..samples.cols() {
        let _ = write!(s, "x{c},");
    }
    s.push_str("mode\n");
    for (row, m) in samples.iter_rows().zip(modes) {
        for v in row {
            let _ = write!(s, "{v:?},");
        }
        let _ = writeln!(s, "{m}");
    }
    Ok(s)
}

/// Reads `dir/bias_report.csv`.
pub fn load_report(dir: &Path) -> Result<BiasReport> {
    let path = dir.join("bias_report.csv");
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    BiasReport::parse_csv(&text, &path)
}
