//! Clients, aggregator, and the FedGAN / Bias-Free FedGAN round loops.
//!
//! A round is: local training on every client, upload of generator and
//! discriminator parameters, aggregation, and broadcast of the global pair.
//! Bias-Free FedGAN inserts two aggregator-only steps before the broadcast:
//! sampling an equal-sized block of metadata from every uploaded generator and
//! fine-tuning the averaged pair on it. No extra messages are exchanged.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gan::{local_train, EpochLoss, GanPair, TrainConfig};
use crate::matrix::Matrix;
use crate::metrics::{assign_modes, bias_report, BiasReport, ModeCenters};
use crate::nn::DenseNet;
use crate::snapshot;

/// Parameters of one generator or discriminator.
pub type ModelParams = DenseNet;

/// Seeded ChaCha stream `stream` of `master_seed`. Clients use their id,
/// the aggregator stream 0.
pub fn substream(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

pub const AGGREGATOR_STREAM: u64 = 0;
pub const PROBE_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// Element-wise arithmetic mean.
    #[default]
    Mean,
    /// Element-wise sum without the `1/M` factor.
    Sum,
}

/// Element-wise mean of identically shaped models.
pub fn average_params(models: &[&ModelParams]) -> Result<ModelParams> {
    aggregate_params(models, Aggregation::Mean)
}

/// Combines models element-wise. Each element is reduced over its values in
/// sorted order, which makes the result exactly invariant to client order;
/// identical inputs are returned unchanged.
pub fn aggregate_params(models: &[&ModelParams], mode: Aggregation) -> Result<ModelParams> {
    let Some(first) = models.first() else {
        return Err(Error::Aggregation {
            client: 0,
            reason: "list is empty".into(),
        });
    };
    for (i, m) in models.iter().enumerate().skip(1) {
        if !m.same_architecture(first) {
            return Err(Error::Aggregation {
                client: i,
                reason: "has a different parameter shape".into(),
            });
        }
    }
    let flats: Vec<Vec<f64>> = models.iter().map(|m| m.flat_params()).collect();
    let scale = match mode {
        Aggregation::Mean => models.len() as f64,
        Aggregation::Sum => 1.0,
    };
    let mut column = Vec::with_capacity(models.len());
    let combined: Vec<f64> = (0..flats[0].len())
        .map(|j| {
            column.clear();
            column.extend(flats.iter().map(|f| f[j]));
            if mode == Aggregation::Mean && column.iter().all(|v| v.to_bits() == column[0].to_bits()) {
                return column[0];
            }
            column.sort_by(f64::total_cmp);
            neumaier_sum(&column) / scale
        })
        .collect();
    let mut out = (*first).clone();
    out.set_flat_params(&combined)?;
    Ok(out)
}

fn neumaier_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Aggregates generators and discriminators separately. The result carries
/// fresh optimizer state.
pub fn aggregate_pairs(pairs: &[&GanPair], mode: Aggregation) -> Result<GanPair> {
    let first = pairs.first().ok_or(Error::Aggregation {
        client: 0,
        reason: "list is empty".into(),
    })?;
    for (i, p) in pairs.iter().enumerate() {
        if p.latent != first.latent {
            return Err(Error::Aggregation {
                client: i,
                reason: "uses a different latent space".into(),
            });
        }
    }
    let gens: Vec<&DenseNet> = pairs.iter().map(|p| &p.generator).collect();
    let discs: Vec<&DenseNet> = pairs.iter().map(|p| &p.discriminator).collect();
    let mut global = (*first).clone();
    global.generator = aggregate_params(&gens, mode)?;
    global.discriminator = aggregate_params(&discs, mode)?;
    global.reset_optimizers();
    Ok(global)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientState {
    pub id: usize,
    pub dataset: Matrix,
    pub pair: GanPair,
}

impl ClientState {
    pub fn new(id: usize, dataset: Matrix, pair: GanPair) -> Result<Self> {
        if dataset.rows() == 0 {
            return Err(Error::Config(format!("client {id} has an empty dataset")));
        }
        Ok(Self { id, dataset, pair })
    }
}

/// Periodic bias measurement of the global generator.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasProbe {
    pub centers: ModeCenters,
    pub minority_classes: Vec<usize>,
    pub samples: usize,
}

impl BiasProbe {
    pub fn measure<R: rand::Rng + ?Sized>(&self, pair: &GanPair, rng: &mut R) -> Result<BiasReport> {
        let samples = pair.generate(self.samples, rng)?;
        let assignments = assign_modes(&samples, &self.centers)?;
        bias_report(&assignments, self.centers.num_classes(), &self.minority_classes)
    }
}

/// Starting point of the discriminator for aggregator fine-tuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AggregatorDiscriminator {
    /// Continue from the averaged discriminator.
    WarmStart,
    /// Draw a fresh discriminator from the aggregator stream.
    #[default]
    Reinitialize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FederationConfig {
    pub num_clients: usize,
    pub rounds: usize,
    pub local: TrainConfig,
    pub aggregator_epochs: usize,
    pub aggregator_discriminator: AggregatorDiscriminator,
    pub samples_per_client: usize,
    pub master_seed: u64,
    pub aggregation: Aggregation,
    /// Train clients on separate threads. Every client owns its RNG stream,
    /// so results match the sequential schedule.
    pub parallel: bool,
    pub probe: Option<BiasProbe>,
}

impl Default for FederationConfig {
    fn default() -> Self {
        Self {
            num_clients: 5,
            rounds: 3,
            local: TrainConfig::default(),
            aggregator_epochs: 100,
            aggregator_discriminator: AggregatorDiscriminator::default(),
            samples_per_client: 10_000,
            master_seed: 0,
            aggregation: Aggregation::Mean,
            parallel: false,
            probe: None,
        }
    }
}

/// Samples from every client generator, concatenated in client order.
#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub samples: Matrix,
    /// Client id of each row.
    pub origin: Vec<usize>,
}

impl Metadata {
    pub fn len(&self) -> usize {
        self.origin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origin.is_empty()
    }
}

pub fn generate_metadata<R: rand::Rng + ?Sized>(
    clients: &[ClientState],
    samples_per_client: usize,
    rng: &mut R,
) -> Result<Metadata> {
    let width = clients.first().map_or(0, |c| c.pair.generator.output_width());
    let mut blocks = Vec::with_capacity(clients.len());
    let mut origin = Vec::with_capacity(clients.len() * samples_per_client);
    for c in clients {
        if c.pair.generator.output_width() != width {
            return Err(Error::Shape(format!(
                "client {} generator emits {} values, expected {width}",
                c.id,
                c.pair.generator.output_width()
            )));
        }
        blocks.push(c.pair.generate(samples_per_client, rng)?);
        origin.extend(std::iter::repeat_n(c.id, samples_per_client));
    }
    let refs: Vec<&Matrix> = blocks.iter().collect();
    let samples = if refs.is_empty() {
        Matrix::zeros(0, 0)
    } else {
        Matrix::vstack(&refs)?
    };
    Ok(Metadata { samples, origin })
}

/// Fine-tunes `global` for `epochs` epochs treating the metadata rows as real data.
pub fn retrain_on_metadata<R: rand::Rng + ?Sized>(
    global: &mut GanPair,
    md: &Metadata,
    epochs: usize,
    train: &TrainConfig,
    rng: &mut R,
) -> Result<Vec<EpochLoss>> {
    if epochs == 0 {
        return Ok(Vec::new());
    }
    if md.is_empty() {
        return Err(Error::EmptyMetadata { epochs });
    }
    let cfg = TrainConfig { epochs, ..*train };
    local_train(global, &md.samples, &cfg, rng)
}

/// Parameter traffic of one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MessageLedger {
    pub uplink_messages: usize,
    pub uplink_bytes: usize,
    pub downlink_messages: usize,
    pub downlink_bytes: usize,
}

impl MessageLedger {
    fn record_upload(&mut self, pair: &GanPair) {
        self.uplink_messages += 2;
        self.uplink_bytes +=
            snapshot::encoded_len(&pair.generator) + snapshot::encoded_len(&pair.discriminator);
    }

    fn record_broadcast(&mut self, pair: &GanPair) {
        self.downlink_messages += 2;
        self.downlink_bytes +=
            snapshot::encoded_len(&pair.generator) + snapshot::encoded_len(&pair.discriminator);
    }

    pub fn total_messages(&self) -> usize {
        self.uplink_messages + self.downlink_messages
    }

    pub fn total_bytes(&self) -> usize {
        self.uplink_bytes + self.downlink_bytes
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientRoundLoss {
    pub client: usize,
    /// Loss of the last local epoch, `None` when no epochs ran.
    pub last: Option<EpochLoss>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport {
    pub round: usize,
    pub client_losses: Vec<ClientRoundLoss>,
    /// Last retraining epoch on metadata (Bias-Free only).
    pub aggregator_loss: Option<EpochLoss>,
    pub metadata_rows: usize,
    /// Fingerprint of the broadcast generator and discriminator.
    pub global_snapshot_id: u64,
    pub ledger: MessageLedger,
    pub bias: Option<BiasReport>,
}

#[derive(Debug, Clone)]
pub struct FederationOutcome {
    pub reports: Vec<RoundReport>,
    pub global: GanPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    FedGan,
    BiasFree,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::FedGan => "fedgan",
            Algorithm::BiasFree => "biasfree",
        }
    }
}

pub fn run_fedgan(clients: &mut [ClientState], cfg: &FederationConfig) -> Result<FederationOutcome> {
    run_federation(clients, cfg, Algorithm::FedGan)
}

pub fn run_biasfree_fedgan(
    clients: &mut [ClientState],
    cfg: &FederationConfig,
) -> Result<FederationOutcome> {
    run_federation(clients, cfg, Algorithm::BiasFree)
}

fn validate(clients: &[ClientState], cfg: &FederationConfig) -> Result<()> {
    if clients.is_empty() || cfg.num_clients == 0 {
        return Err(Error::Config("a federation needs at least one client".into()));
    }
    if clients.len() != cfg.num_clients {
        return Err(Error::Config(format!(
            "configured for {} clients but {} were supplied",
            cfg.num_clients,
            clients.len()
        )));
    }
    cfg.local.validate()?;
    for (i, c) in clients.iter().enumerate() {
        if !c.pair.same_architecture(&clients[0].pair) {
            return Err(Error::Aggregation {
                client: i,
                reason: "was initialized with a different architecture".into(),
            });
        }
        if clients[..i].iter().any(|o| o.id == c.id) {
            return Err(Error::Config(format!("duplicate client id {}", c.id)));
        }
    }
    Ok(())
}

pub fn run_federation(
    clients: &mut [ClientState],
    cfg: &FederationConfig,
    algorithm: Algorithm,
) -> Result<FederationOutcome> {
    validate(clients, cfg)?;
    let mut client_rngs: Vec<ChaCha8Rng> = clients
        .iter()
        .map(|c| substream(cfg.master_seed, c.id as u64))
        .collect();
    let mut aggregator_rng = substream(cfg.master_seed, AGGREGATOR_STREAM);
    let mut probe_rng = substream(cfg.master_seed, PROBE_STREAM);

    let mut global = clients[0].pair.clone();
    let mut reports = Vec::with_capacity(cfg.rounds);
    for round in 1..=cfg.rounds {
        let traces = train_clients(clients, &mut client_rngs, &cfg.local, cfg.parallel)?;

        let mut ledger = MessageLedger::default();
        for c in clients.iter() {
            ledger.record_upload(&c.pair);
        }

        let pairs: Vec<&GanPair> = clients.iter().map(|c| &c.pair).collect();
        global = aggregate_pairs(&pairs, cfg.aggregation)?;

        let mut aggregator_loss = None;
        let mut metadata_rows = 0;
        if algorithm == Algorithm::BiasFree {
            let md = generate_metadata(clients, cfg.samples_per_client, &mut aggregator_rng)?;
            metadata_rows = md.len();
            if cfg.aggregator_discriminator == AggregatorDiscriminator::Reinitialize
                && cfg.aggregator_epochs > 0
            {
                global.discriminator = global.discriminator.reinitialized(&mut aggregator_rng)?;
                global.reset_optimizers();
            }
            let trace = retrain_on_metadata(
                &mut global,
                &md,
                cfg.aggregator_epochs,
                &cfg.local,
                &mut aggregator_rng,
            )?;
            aggregator_loss = trace.last().copied();
            global.reset_optimizers();
        }

        for c in clients.iter_mut() {
            c.pair = global.clone();
            ledger.record_broadcast(&c.pair);
        }

        let bias = match &cfg.probe {
            Some(p) => Some(p.measure(&global, &mut probe_rng)?),
            None => None,
        };
        reports.push(RoundReport {
            round,
            client_losses: clients
                .iter()
                .zip(&traces)
                .map(|(c, t)| ClientRoundLoss {
                    client: c.id,
                    last: t.last().copied(),
                })
                .collect(),
            aggregator_loss,
            metadata_rows,
            global_snapshot_id: global.generator.fingerprint() ^ global.discriminator.fingerprint().rotate_left(1),
            ledger,
            bias,
        });
    }
    Ok(FederationOutcome { reports, global })
}

fn train_clients(
    clients: &mut [ClientState],
    rngs: &mut [ChaCha8Rng],
    cfg: &TrainConfig,
    parallel: bool,
) -> Result<Vec<Vec<EpochLoss>>> {
    if !parallel || clients.len() == 1 {
        return clients
            .iter_mut()
            .zip(rngs.iter_mut())
            .map(|(c, rng)| local_train(&mut c.pair, &c.dataset, cfg, rng))
            .collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = clients
            .iter_mut()
            .zip(rngs.iter_mut())
            .map(|(c, rng)| scope.spawn(move || local_train(&mut c.pair, &c.dataset, cfg, rng)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("client training thread panicked"))
            .collect()
    })
}
