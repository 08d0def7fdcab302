//! GAN objectives and the per-client local training loop.
//!
//! The discriminator minimises `-mean log D(x) - mean log(1 - D(G(z)))` and the
//! generator minimises the non-saturating `-mean log D(G(z))`. Probabilities are
//! clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` before every logarithm.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::adam::{adam_step, AdamConfig, AdamState, DEFAULT_LEARNING_RATE};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nn::{backward, backward_with_input, forward, Activation, DenseNet, Gradients};

pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatentDistribution {
    StandardNormal,
    /// Uniform on `(-1, 1)`.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatentSpec {
    pub dim: usize,
    pub distribution: LatentDistribution,
}

impl LatentSpec {
    pub fn normal(dim: usize) -> Self {
        Self {
            dim,
            distribution: LatentDistribution::StandardNormal,
        }
    }
}

pub fn sample_latent<R: Rng + ?Sized>(spec: &LatentSpec, n: usize, rng: &mut R) -> Matrix {
    let len = n * spec.dim;
    let data: Vec<f64> = match spec.distribution {
        LatentDistribution::StandardNormal => {
            (0..len).map(|_| StandardNormal.sample(rng)).collect()
        }
        LatentDistribution::Uniform => {
            let u = Uniform::new(-1.0, 1.0).expect("valid range");
            (0..len).map(|_| u.sample(rng)).collect()
        }
    };
    Matrix::from_raw(n, spec.dim, data)
}

/// Dense generator/discriminator shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct GanArchitecture {
    pub latent: LatentSpec,
    pub data_width: usize,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    /// `Identity` for unbounded data, `Tanh` for images scaled to `[-1, 1]`.
    pub output_activation: Activation,
}

impl GanArchitecture {
    pub fn validate(&self) -> Result<()> {
        if self.latent.dim == 0 || self.data_width == 0 || self.hidden_width == 0 {
            return Err(Error::Config("latent, data and hidden widths must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GanPair {
    pub generator: DenseNet,
    pub discriminator: DenseNet,
    pub gen_opt: AdamState,
    pub disc_opt: AdamState,
    pub latent: LatentSpec,
}

impl GanPair {
    pub fn new(
        generator: DenseNet,
        discriminator: DenseNet,
        latent: LatentSpec,
        gen_adam: AdamConfig,
        disc_adam: AdamConfig,
    ) -> Result<Self> {
        if latent.dim == 0 {
            return Err(Error::Config("latent dimension must be at least 1".into()));
        }
        if generator.input_width() != latent.dim {
            return Err(Error::Shape(format!(
                "generator takes {} inputs but latent dimension is {}",
                generator.input_width(),
                latent.dim
            )));
        }
        if generator.output_width() != discriminator.input_width() {
            return Err(Error::Shape(format!(
                "generator emits {} values, discriminator expects {}",
                generator.output_width(),
                discriminator.input_width()
            )));
        }
        if discriminator.output_width() != 1 {
            return Err(Error::Shape("discriminator must output one probability".into()));
        }
        let gen_opt = AdamState::new(&generator, gen_adam)?;
        let disc_opt = AdamState::new(&discriminator, disc_adam)?;
        Ok(Self {
            generator,
            discriminator,
            gen_opt,
            disc_opt,
            latent,
        })
    }

    /// Fresh pair: generator `latent -> hidden(relu) x k -> data`, discriminator
    /// `data -> hidden(relu) x k -> sigmoid`.
    pub fn init<R: Rng + ?Sized>(arch: &GanArchitecture, rng: &mut R) -> Result<Self> {
        arch.validate()?;
        let mut gen_layers = vec![(arch.hidden_width, Activation::Relu); arch.hidden_layers];
        gen_layers.push((arch.data_width, arch.output_activation));
        let mut disc_layers = vec![(arch.hidden_width, Activation::Relu); arch.hidden_layers];
        disc_layers.push((1, Activation::Sigmoid));
        let generator = DenseNet::init(arch.latent.dim, &gen_layers, rng)?;
        let discriminator = DenseNet::init(arch.data_width, &disc_layers, rng)?;
        Self::new(
            generator,
            discriminator,
            arch.latent,
            AdamConfig::default(),
            AdamConfig::default(),
        )
    }

    pub fn reset_optimizers(&mut self) {
        self.gen_opt.reset();
        self.disc_opt.reset();
    }

    /// Draws `n` samples from the generator.
    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Matrix> {
        let z = sample_latent(&self.latent, n, rng);
        self.generator.predict(&z)
    }

    pub fn same_architecture(&self, other: &GanPair) -> bool {
        self.latent == other.latent
            && self.generator.same_architecture(&other.generator)
            && self.discriminator.same_architecture(&other.discriminator)
    }
}

/// What the generator minimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GeneratorObjective {
    /// `-mean log D(G(z))`.
    #[default]
    NonSaturating,
    /// `mean log(1 - D(G(z)))`, the generator side of the minimax value.
    Minimax,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub gen_learning_rate: f64,
    pub disc_learning_rate: f64,
    pub disc_steps_per_gen_step: usize,
    pub gen_objective: GeneratorObjective,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 64,
            gen_learning_rate: DEFAULT_LEARNING_RATE,
            disc_learning_rate: DEFAULT_LEARNING_RATE,
            disc_steps_per_gen_step: 1,
            gen_objective: GeneratorObjective::NonSaturating,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.disc_steps_per_gen_step == 0 {
            return Err(Error::Config("batch_size and disc_steps must be positive".into()));
        }
        if !(self.gen_learning_rate > 0.0 && self.disc_learning_rate > 0.0) {
            return Err(Error::Config("learning rates must be positive".into()));
        }
        Ok(())
    }
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

fn check_probs(m: &Matrix) -> Result<()> {
    if m.rows() == 0 {
        return Err(Error::EmptyBatch);
    }
    if m.cols() != 1 {
        return Err(Error::Shape(format!(
            "expected a column of probabilities, got {} columns",
            m.cols()
        )));
    }
    Ok(())
}

pub fn disc_loss(disc_out_real: &Matrix, disc_out_fake: &Matrix) -> Result<f64> {
    disc_loss_with_grads(disc_out_real, disc_out_fake).map(|(l, _, _)| l)
}

/// Discriminator loss plus its gradients w.r.t. both probability columns.
///
/// The clamp is treated as pass-through for the gradient so a saturated
/// discriminator still receives signal through the sigmoid.
pub fn disc_loss_with_grads(real: &Matrix, fake: &Matrix) -> Result<(f64, Matrix, Matrix)> {
    check_probs(real)?;
    check_probs(fake)?;
    let nr = real.rows() as f64;
    let nf = fake.rows() as f64;
    let mut loss = 0.0;
    let mut d_real = Vec::with_capacity(real.rows());
    for &p in real.as_slice() {
        let p = clamp_prob(p);
        loss -= p.ln() / nr;
        d_real.push(-1.0 / (nr * p));
    }
    let mut d_fake = Vec::with_capacity(fake.rows());
    for &p in fake.as_slice() {
        let q = 1.0 - clamp_prob(p);
        loss -= q.ln() / nf;
        d_fake.push(1.0 / (nf * q));
    }
    Ok((
        loss,
        Matrix::from_raw(real.rows(), 1, d_real),
        Matrix::from_raw(fake.rows(), 1, d_fake),
    ))
}

pub fn gen_loss(disc_out_fake: &Matrix) -> Result<f64> {
    gen_loss_with_grad(disc_out_fake).map(|(l, _)| l)
}

pub fn gen_loss_with_grad(fake: &Matrix) -> Result<(f64, Matrix)> {
    check_probs(fake)?;
    let n = fake.rows() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(fake.rows());
    for &p in fake.as_slice() {
        let p = clamp_prob(p);
        loss -= p.ln() / n;
        grad.push(-1.0 / (n * p));
    }
    Ok((loss, Matrix::from_raw(fake.rows(), 1, grad)))
}

/// Minimax generator loss `mean log(1 - p)`. Negative by construction.
pub fn gen_loss_minimax_with_grad(fake: &Matrix) -> Result<(f64, Matrix)> {
    check_probs(fake)?;
    let n = fake.rows() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(fake.rows());
    for &p in fake.as_slice() {
        let q = 1.0 - clamp_prob(p);
        loss += q.ln() / n;
        grad.push(-1.0 / (n * q));
    }
    Ok((loss, Matrix::from_raw(fake.rows(), 1, grad)))
}

/// Discriminator loss and parameter gradients on one real batch and one fake batch.
pub fn discriminator_gradients(
    disc: &DenseNet,
    real: &Matrix,
    fake: &Matrix,
) -> Result<(f64, Gradients)> {
    let (p_real, tape_real) = forward(disc, real)?;
    let (p_fake, tape_fake) = forward(disc, fake)?;
    let (loss, d_real, d_fake) = disc_loss_with_grads(&p_real, &p_fake)?;
    let mut grads = backward(disc, &tape_real, &d_real)?;
    grads.accumulate(&backward(disc, &tape_fake, &d_fake)?)?;
    Ok((loss, grads))
}

/// Generator loss and generator parameter gradients for latent batch `z`,
/// back-propagated through the (fixed) discriminator.
pub fn generator_gradients(
    gen: &DenseNet,
    disc: &DenseNet,
    z: &Matrix,
    objective: GeneratorObjective,
) -> Result<(f64, Gradients)> {
    let (fake, gen_tape) = forward(gen, z)?;
    let (p_fake, disc_tape) = forward(disc, &fake)?;
    let (loss, d_p) = match objective {
        GeneratorObjective::NonSaturating => gen_loss_with_grad(&p_fake)?,
        GeneratorObjective::Minimax => gen_loss_minimax_with_grad(&p_fake)?,
    };
    let through_disc = backward_with_input(disc, &disc_tape, &d_p)?;
    let grads = backward(gen, &gen_tape, &through_disc.input_grad)?;
    Ok((loss, grads))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLoss {
    pub disc: f64,
    pub gen: f64,
}

/// Runs `cfg.epochs` epochs of alternating discriminator/generator Adam steps
/// on `data`. Each epoch reshuffles the rows and drops the final partial batch.
pub fn local_train<R: Rng + ?Sized>(
    pair: &mut GanPair,
    data: &Matrix,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<Vec<EpochLoss>> {
    cfg.validate()?;
    if data.cols() != pair.generator.output_width() {
        return Err(Error::Shape(format!(
            "data has {} columns but the generator emits {}",
            data.cols(),
            pair.generator.output_width()
        )));
    }
    if cfg.epochs == 0 {
        return Ok(Vec::new());
    }
    if data.rows() < cfg.batch_size {
        return Err(Error::Shape(format!(
            "{} data rows is fewer than batch size {}",
            data.rows(),
            cfg.batch_size
        )));
    }
    pair.gen_opt.set_learning_rate(cfg.gen_learning_rate)?;
    pair.disc_opt.set_learning_rate(cfg.disc_learning_rate)?;

    let bs = cfg.batch_size;
    let batches = data.rows() / bs;
    let mut order: Vec<usize> = (0..data.rows()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        let mut disc_total = 0.0;
        let mut gen_total = 0.0;
        for b in 0..batches {
            let real = data.select_rows(&order[b * bs..(b + 1) * bs]);
            for _ in 0..cfg.disc_steps_per_gen_step {
                let fake = pair.generate(bs, rng)?;
                let (loss, grads) = discriminator_gradients(&pair.discriminator, &real, &fake)?;
                adam_step(&mut pair.discriminator, &grads, &mut pair.disc_opt)?;
                disc_total += loss / cfg.disc_steps_per_gen_step as f64;
            }
            let z = sample_latent(&pair.latent, bs, rng);
            let (loss, grads) = generator_gradients(&pair.generator, &pair.discriminator, &z, cfg.gen_objective)?;
            adam_step(&mut pair.generator, &grads, &mut pair.gen_opt)?;
            gen_total += loss;
        }
        trace.push(EpochLoss {
            disc: disc_total / batches as f64,
            gen: gen_total / batches as f64,
        });
    }
    Ok(trace)
}
