//! Per-column conditional generator/discriminator pairs.
//!
//! The discriminator scores `(conditioning row, target value)` pairs on
//! `(0, 2)`: observed targets are pushed toward 2 and generated ones toward 0,
//! while the generator pushes its own samples toward 1. With these targets
//! the optimal discriminator is `2p / (p + g)` and the generator objective
//! becomes half the Pearson χ² divergence `½ Σ (p − g)² / (p + g)`; the
//! discrete-distribution helpers at the bottom of this module compute those
//! quantities exactly so training code can be checked against them.

use std::io::Write;
use std::path::Path;

use ndarray::{concatenate, s, Array2, ArrayView2, Axis};
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::ColumnKind;
use crate::error::{Error, Result};
use crate::nn::{standard_normal, AdamConfig, AdamState, Mlp, OutputActivation, ParamGrads};
use crate::rng::{derive_seed, rng_from_seed};
use crate::transform::Affine;

// Keeps cross-entropy terms finite when a sigmoid head saturates.
const PROB_CLAMP: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Losses

/// Empirical discriminator loss: `(1/2n_r) Σ (d_real − 2)² + (1/2n_f) Σ d_fake²`.
///
/// Real and generated terms are averaged over their own counts.
pub fn discriminator_loss(d_real: &[f64], d_fake: &[f64]) -> Result<f64> {
    if d_real.is_empty() || d_fake.is_empty() {
        return Err(Error::InvalidArgument(
            "discriminator loss needs real and generated scores".into(),
        ));
    }
    let real = d_real.iter().map(|d| (d - 2.0).powi(2)).sum::<f64>() / (2.0 * d_real.len() as f64);
    let fake = d_fake.iter().map(|d| d * d).sum::<f64>() / (2.0 * d_fake.len() as f64);
    Ok(real + fake)
}

/// Empirical generator loss: `(1/2n) Σ (d_fake − 1)²`.
pub fn generator_loss(d_fake: &[f64]) -> Result<f64> {
    if d_fake.is_empty() {
        return Err(Error::InvalidArgument("generator loss needs scores".into()));
    }
    Ok(d_fake.iter().map(|d| (d - 1.0).powi(2)).sum::<f64>() / (2.0 * d_fake.len() as f64))
}

/// Accuracy penalty between an observed value and its reconstruction:
/// squared error for continuous columns and cross-entropy for binary ones.
///
/// Categorical columns are scored as one binary head per level, so callers
/// pass one head at a time with `ColumnKind::Binary`.
pub fn accuracy_penalty(x: f64, x_hat: f64, kind: ColumnKind) -> Result<f64> {
    match kind {
        ColumnKind::Continuous => Ok((x_hat - x).powi(2)),
        ColumnKind::Binary | ColumnKind::Categorical(_) => {
            if !(x_hat > 0.0 && x_hat < 1.0) {
                return Err(Error::Domain {
                    value: x_hat,
                    detail: "binary reconstruction must lie in (0, 1)".into(),
                });
            }
            if x != 0.0 && x != 1.0 {
                return Err(Error::Domain {
                    value: x,
                    detail: "binary target must be 0 or 1".into(),
                });
            }
            Ok(binary_cross_entropy(x, x_hat))
        }
    }
}

#[inline]
fn binary_cross_entropy(x: f64, x_hat: f64) -> f64 {
    let q = x_hat.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    -x * q.ln() - (1.0 - x) * (1.0 - q).ln()
}

#[inline]
fn binary_cross_entropy_grad(x: f64, x_hat: f64) -> f64 {
    let q = x_hat.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    -x / q + (1.0 - x) / (1.0 - q)
}

// ---------------------------------------------------------------------------
// Discrete-distribution oracles

/// A probability mass function over a finite set of points.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    support: Vec<f64>,
    probabilities: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(support: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probabilities.len() {
            return Err(Error::InvalidArgument(
                "support and probabilities must be non-empty and equally long".into(),
            ));
        }
        if probabilities.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidArgument("probabilities must be non-negative".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}, not 1")));
        }
        Ok(DiscreteDist {
            support,
            probabilities,
        })
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Mass at `point`; zero off the support.
    pub fn mass(&self, point: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.probabilities)
            .filter(|(s, _)| **s == point)
            .map(|(_, p)| *p)
            .sum()
    }
}

/// Discriminator that minimizes the population loss for fixed `p` (data)
/// and `g` (generator): `2p / (p + g)`.
pub fn optimal_discriminator(p: &DiscreteDist, g: &DiscreteDist, point: f64) -> Result<f64> {
    let (pm, gm) = (p.mass(point), g.mass(point));
    if pm + gm <= 0.0 {
        return Err(Error::UndefinedPoint(point));
    }
    Ok(2.0 * pm / (pm + gm))
}

fn check_same_support(p: &DiscreteDist, g: &DiscreteDist) -> Result<()> {
    if p.support != g.support {
        return Err(Error::InvalidArgument(
            "distributions must share an identical support".into(),
        ));
    }
    Ok(())
}

/// `½ Σ (p − g)² / (p + g)` over points where `p + g > 0`.
pub fn chi2_generator_objective(p: &DiscreteDist, g: &DiscreteDist) -> Result<f64> {
    check_same_support(p, g)?;
    Ok(0.5
        * p.probabilities
            .iter()
            .zip(&g.probabilities)
            .filter(|(a, b)| *a + *b > 0.0)
            .map(|(a, b)| (a - b).powi(2) / (a + b))
            .sum::<f64>())
}

/// Population discriminator loss `½ Σ [p (D − 2)² + g D²]` for per-point
/// discriminator values `d`.
pub fn population_discriminator_loss(p: &DiscreteDist, g: &DiscreteDist, d: &[f64]) -> Result<f64> {
    check_same_support(p, g)?;
    if d.len() != p.support.len() {
        return Err(Error::Shape("one discriminator value per support point".into()));
    }
    Ok(0.5
        * p.probabilities
            .iter()
            .zip(&g.probabilities)
            .zip(d)
            .map(|((a, b), d)| a * (d - 2.0).powi(2) + b * d * d)
            .sum::<f64>())
}

/// Population generator loss with both the real and generated terms:
/// `½ Σ (p + g)(D − 1)²`. At the optimal discriminator this equals
/// [`chi2_generator_objective`].
pub fn population_generator_loss(p: &DiscreteDist, g: &DiscreteDist, d: &[f64]) -> Result<f64> {
    check_same_support(p, g)?;
    if d.len() != p.support.len() {
        return Err(Error::Shape("one discriminator value per support point".into()));
    }
    Ok(0.5
        * p.probabilities
            .iter()
            .zip(&g.probabilities)
            .zip(d)
            .map(|((a, b), d)| (a + b) * (d - 1.0).powi(2))
            .sum::<f64>())
}

// ---------------------------------------------------------------------------
// Configuration

/// Hidden layer widths by dataset size.
pub fn scale_architecture(n_samples: usize, n_features: usize) -> Vec<usize> {
    if n_samples <= 20_000 {
        vec![100]
    } else if n_samples < 30_000 {
        vec![200, 100]
    } else if n_features >= 50 {
        vec![400, 200]
    } else {
        vec![200, 100]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BinaryImputation {
    /// Bernoulli / categorical draw from the generated probabilities.
    #[default]
    Sample,
    /// Most probable level.
    Threshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr_generator: f64,
    pub lr_discriminator: f64,
    pub l2: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub gen_iters_per_cycle: usize,
    pub disc_iters_per_cycle: usize,
    /// Capped at the number of training rows.
    pub batch_size: usize,
    /// One epoch is `ceil(n_obs / batch)` generator updates.
    pub max_epochs: usize,
    pub acc_penalty_weight: f64,
    /// Cycles without a `early_stop_tolerance` improvement in the generator
    /// total loss before training stops.
    pub early_stop_patience: usize,
    pub early_stop_tolerance: f64,
    pub noise_dim: usize,
    /// `None` picks widths with [`scale_architecture`].
    pub hidden_dims: Option<Vec<usize>>,
    pub binary_imputation: BinaryImputation,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr_generator: 0.001,
            lr_discriminator: 0.0005,
            l2: 0.0001,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            gen_iters_per_cycle: 50,
            disc_iters_per_cycle: 10,
            batch_size: 256,
            max_epochs: 10_000,
            acc_penalty_weight: 1.0,
            early_stop_patience: 50,
            early_stop_tolerance: 1e-4,
            noise_dim: 8,
            hidden_dims: None,
            binary_imputation: BinaryImputation::Sample,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.lr_generator, self.lr_discriminator];
        if positive.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidArgument("learning rates must be positive".into()));
        }
        if self.gen_iters_per_cycle == 0
            || self.disc_iters_per_cycle == 0
            || self.batch_size == 0
            || self.max_epochs == 0
            || self.noise_dim == 0
            || self.early_stop_patience == 0
        {
            return Err(Error::InvalidArgument(
                "iteration counts, batch size, epochs, patience and noise dimension must be positive"
                    .into(),
            ));
        }
        if !(self.acc_penalty_weight >= 0.0) || !(self.l2 >= 0.0) || !(self.early_stop_tolerance >= 0.0) {
            return Err(Error::InvalidArgument(
                "penalty weight, L2 and tolerance must be non-negative".into(),
            ));
        }
        if let Some(h) = &self.hidden_dims {
            if h.is_empty() || h.contains(&0) {
                return Err(Error::InvalidArgument("hidden widths must be positive".into()));
            }
        }
        self.adam(self.lr_generator).validate()
    }

    fn adam(&self, learning_rate: f64) -> AdamConfig {
        AdamConfig {
            learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_epsilon,
            l2: self.l2,
        }
    }
}

// ---------------------------------------------------------------------------
// Trained pair

#[derive(Debug, Clone, PartialEq)]
pub struct GcinPair {
    pub generator: Mlp,
    pub discriminator: Mlp,
    pub noise_dim: usize,
    pub column_index: usize,
    pub kind: ColumnKind,
    /// Scaling applied to each conditioning column before the networks.
    pub cond_norm: Vec<Affine>,
    /// Scaling of a continuous target; identity otherwise.
    pub target_norm: Affine,
    pub binary_imputation: BinaryImputation,
}

impl GcinPair {
    pub fn cond_dim(&self) -> usize {
        self.cond_norm.len()
    }

    fn normalize_cond(&self, x_cond: ArrayView2<f64>) -> Array2<f64> {
        let mut out = x_cond.to_owned();
        for (mut col, a) in out.columns_mut().into_iter().zip(&self.cond_norm) {
            col.mapv_inplace(|v| a.apply(v));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: usize,
    pub disc_loss: f64,
    pub gen_loss: f64,
    pub acc_loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainStop {
    MaxEpochs,
    EarlyStop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub cycles: Vec<CycleRecord>,
    pub stop: TrainStop,
}

impl TrainTrace {
    /// CSV with header `cycle,disc_loss,gen_loss,acc_loss`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["cycle", "disc_loss", "gen_loss", "acc_loss"])?;
        for c in &self.cycles {
            w.write_record([
                c.cycle.to_string(),
                c.disc_loss.to_string(),
                c.gen_loss.to_string(),
                c.acc_loss.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<trace>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(f)
    }
}

// ---------------------------------------------------------------------------
// Objectives with gradients

/// Discriminator loss on stacked real and generated inputs plus its
/// parameter gradients.
pub fn discriminator_objective(
    disc: &Mlp,
    real_inputs: ArrayView2<f64>,
    fake_inputs: ArrayView2<f64>,
) -> Result<(f64, ParamGrads)> {
    let n_real = real_inputs.nrows();
    let n_fake = fake_inputs.nrows();
    let stacked = concatenate(Axis(0), &[real_inputs.view(), fake_inputs.view()])
        .map_err(|e| Error::Shape(e.to_string()))?;
    let cache = disc.forward_cached(stacked.view())?;
    let scores = cache.output().column(0).to_vec();
    let (real, fake) = scores.split_at(n_real);
    let loss = discriminator_loss(real, fake)?;

    let mut out_grads = Array2::zeros((n_real + n_fake, 1));
    for (i, &d) in real.iter().enumerate() {
        out_grads[[i, 0]] = (d - 2.0) / n_real as f64;
    }
    for (i, &d) in fake.iter().enumerate() {
        out_grads[[n_real + i, 0]] = d / n_fake as f64;
    }
    let grads = disc.param_gradients(stacked.view(), &cache, out_grads.view())?;
    Ok((loss, grads))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorLoss {
    pub adversarial: f64,
    /// Mean accuracy penalty over the batch.
    pub accuracy: f64,
    pub total: f64,
}

/// Generator loss `L_G + λ · mean L_acc` through the composed
/// discriminator-of-generator graph, plus generator parameter gradients.
///
/// `gen_inputs` is the conditioning block followed by the noise block,
/// `cond` the conditioning block alone, `target` the encoded observed
/// targets of the same rows.
pub fn generator_objective(
    gen: &Mlp,
    disc: &Mlp,
    gen_inputs: ArrayView2<f64>,
    cond: ArrayView2<f64>,
    target: ArrayView2<f64>,
    kind: ColumnKind,
    acc_weight: f64,
) -> Result<(GeneratorLoss, ParamGrads)> {
    let n = gen_inputs.nrows();
    if n == 0 || cond.nrows() != n || target.nrows() != n {
        return Err(Error::Shape("generator batch blocks must share a non-zero row count".into()));
    }
    let width = kind.encoded_width();
    let g_cache = gen.forward_cached(gen_inputs)?;
    let fake = g_cache.output();
    if fake.ncols() != width || target.ncols() != width {
        return Err(Error::Shape(format!(
            "target width {} does not match generator output {}",
            target.ncols(),
            fake.ncols()
        )));
    }
    let d_in = concatenate(Axis(1), &[cond.view(), fake.view()]).map_err(|e| Error::Shape(e.to_string()))?;
    let d_cache = disc.forward_cached(d_in.view())?;
    let scores = d_cache.output().column(0).to_vec();
    let adversarial = generator_loss(&scores)?;

    let inv_n = 1.0 / n as f64;
    let d_out_grads = Array2::from_shape_fn((n, 1), |(i, _)| (scores[i] - 1.0) * inv_n);
    let d_input_grads = disc.input_gradients(d_in.view(), &d_cache, d_out_grads.view())?;
    let mut fake_grads = d_input_grads.slice(s![.., cond.ncols()..]).to_owned();

    let mut acc_sum = 0.0;
    for i in 0..n {
        for k in 0..width {
            let (x, x_hat) = (target[[i, k]], fake[[i, k]]);
            let (pen, grad) = match kind {
                ColumnKind::Continuous => ((x_hat - x).powi(2), 2.0 * (x_hat - x)),
                _ => (binary_cross_entropy(x, x_hat), binary_cross_entropy_grad(x, x_hat)),
            };
            acc_sum += pen;
            fake_grads[[i, k]] += acc_weight * grad * inv_n;
        }
    }
    let accuracy = acc_sum * inv_n;

    let grads = gen.param_gradients(gen_inputs, &g_cache, fake_grads.view())?;
    Ok((
        GeneratorLoss {
            adversarial,
            accuracy,
            total: adversarial + acc_weight * accuracy,
        },
        grads,
    ))
}

// ---------------------------------------------------------------------------
// Training and imputation

/// Encodes raw targets for the networks: scaled value for continuous
/// columns, `0/1` for binary, one-hot for categorical.
fn encode_target(x_target: &[f64], kind: ColumnKind, norm: Affine) -> Result<Array2<f64>> {
    let width = kind.encoded_width();
    let mut out = Array2::zeros((x_target.len(), width));
    for (i, &x) in x_target.iter().enumerate() {
        match kind {
            ColumnKind::Continuous => out[[i, 0]] = norm.apply(x),
            ColumnKind::Binary => {
                if x != 0.0 && x != 1.0 {
                    return Err(Error::Domain {
                        value: x,
                        detail: "binary target must be 0 or 1".into(),
                    });
                }
                out[[i, 0]] = x;
            }
            ColumnKind::Categorical(k) => {
                if x < 0.0 || x.fract() != 0.0 || x as usize >= k {
                    return Err(Error::Domain {
                        value: x,
                        detail: format!("categorical code outside 0..{k}"),
                    });
                }
                out[[i, x as usize]] = 1.0;
            }
        }
    }
    Ok(out)
}

fn gather_rows(m: &Array2<f64>, rows: &[usize]) -> Array2<f64> {
    m.select(Axis(0), rows)
}

fn with_noise(cond: &Array2<f64>, noise_dim: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let z = standard_normal(rng, cond.nrows(), noise_dim);
    concatenate(Axis(1), &[cond.view(), z.view()]).expect("row counts match")
}

/// Trains one generator/discriminator pair on fully observed rows.
///
/// Each cycle runs `disc_iters_per_cycle` discriminator updates then
/// `gen_iters_per_cycle` generator updates, each on a fresh minibatch with
/// fresh noise. Training stops after `max_epochs` worth of generator updates
/// or when the generator's total loss stalls for `early_stop_patience` cycles.
pub fn train_gcin(
    x_cond: ArrayView2<f64>,
    x_target: &[f64],
    kind: ColumnKind,
    cfg: &TrainConfig,
) -> Result<(GcinPair, TrainTrace)> {
    cfg.validate()?;
    let n = x_target.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 observed rows to train, got {n}"
        )));
    }
    if x_cond.nrows() != n {
        return Err(Error::Shape(format!(
            "{} conditioning rows for {n} targets",
            x_cond.nrows()
        )));
    }
    if x_cond.iter().chain(x_target).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("training inputs must be complete and finite".into()));
    }
    if let ColumnKind::Categorical(k) = kind {
        if k < 2 {
            return Err(Error::InvalidArgument("categorical columns need at least 2 levels".into()));
        }
    }

    let cond_dim = x_cond.ncols();
    let width = kind.encoded_width();
    let cond_norm: Vec<Affine> = x_cond
        .columns()
        .into_iter()
        .map(|c| Affine::fit_min_max_or_shift(c.iter().copied()))
        .collect();
    let target_norm = match kind {
        ColumnKind::Continuous => Affine::fit_min_max_or_shift(x_target.iter().copied()),
        _ => Affine::IDENTITY,
    };

    let hidden = cfg
        .hidden_dims
        .clone()
        .unwrap_or_else(|| scale_architecture(n, cond_dim + 1));
    let gen_head = match kind {
        ColumnKind::Continuous => OutputActivation::Identity,
        _ => OutputActivation::Sigmoid,
    };
    let mut pair = GcinPair {
        generator: Mlp::new(cond_dim + cfg.noise_dim, &hidden, width, gen_head, derive_seed(cfg.seed, &[1]))?,
        discriminator: Mlp::new(
            cond_dim + width,
            &hidden,
            1,
            OutputActivation::ScaledSigmoid02,
            derive_seed(cfg.seed, &[2]),
        )?,
        noise_dim: cfg.noise_dim,
        column_index: 0,
        kind,
        cond_norm,
        target_norm,
        binary_imputation: cfg.binary_imputation,
    };

    let cond = pair.normalize_cond(x_cond);
    let target = encode_target(x_target, kind, target_norm)?;
    let real_all = concatenate(Axis(1), &[cond.view(), target.view()]).expect("row counts match");

    let mut g_opt = AdamState::new(&pair.generator, cfg.adam(cfg.lr_generator))?;
    let mut d_opt = AdamState::new(&pair.discriminator, cfg.adam(cfg.lr_discriminator))?;
    let mut rng = rng_from_seed(derive_seed(cfg.seed, &[3]));

    let batch = cfg.batch_size.min(n);
    let gen_steps = cfg.max_epochs.saturating_mul(n.div_ceil(batch));
    let max_cycles = gen_steps.div_ceil(cfg.gen_iters_per_cycle).max(1);

    let mut cycles = Vec::new();
    let mut best = f64::INFINITY;
    let mut stale = 0usize;
    let mut stop = TrainStop::MaxEpochs;

    for cycle in 0..max_cycles {
        let mut d_sum = 0.0;
        for _ in 0..cfg.disc_iters_per_cycle {
            let rows = sample_indices(&mut rng, n, batch).into_vec();
            let cond_b = gather_rows(&cond, &rows);
            let gen_in = with_noise(&cond_b, cfg.noise_dim, &mut rng);
            let fake = pair.generator.forward(gen_in.view())?;
            let fake_in = concatenate(Axis(1), &[cond_b.view(), fake.view()]).expect("row counts match");
            let real_in = gather_rows(&real_all, &rows);
            let (loss, grads) = discriminator_objective(&pair.discriminator, real_in.view(), fake_in.view())?;
            d_opt
                .step(&mut pair.discriminator, &grads)
                .map_err(|e| numeric_at(cycle, e))?;
            d_sum += loss;
        }

        let (mut g_sum, mut acc_sum, mut total_sum) = (0.0, 0.0, 0.0);
        for _ in 0..cfg.gen_iters_per_cycle {
            let rows = sample_indices(&mut rng, n, batch).into_vec();
            let cond_b = gather_rows(&cond, &rows);
            let gen_in = with_noise(&cond_b, cfg.noise_dim, &mut rng);
            let target_b = gather_rows(&target, &rows);
            let (loss, grads) = generator_objective(
                &pair.generator,
                &pair.discriminator,
                gen_in.view(),
                cond_b.view(),
                target_b.view(),
                kind,
                cfg.acc_penalty_weight,
            )?;
            g_opt
                .step(&mut pair.generator, &grads)
                .map_err(|e| numeric_at(cycle, e))?;
            g_sum += loss.adversarial;
            acc_sum += loss.accuracy;
            total_sum += loss.total;
        }

        let gi = cfg.gen_iters_per_cycle as f64;
        let record = CycleRecord {
            cycle,
            disc_loss: d_sum / cfg.disc_iters_per_cycle as f64,
            gen_loss: g_sum / gi,
            acc_loss: acc_sum / gi,
        };
        if ![record.disc_loss, record.gen_loss, record.acc_loss]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::NonFiniteLoss {
                cycle,
                detail: format!("{record:?}"),
            });
        }
        cycles.push(record);

        let total = total_sum / gi;
        if total < best - cfg.early_stop_tolerance {
            best = total;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.early_stop_patience {
                stop = TrainStop::EarlyStop;
                break;
            }
        }
    }

    Ok((pair, TrainTrace { cycles, stop }))
}

fn numeric_at(cycle: usize, e: Error) -> Error {
    match e {
        Error::NonFiniteGradient { layer } => Error::NonFiniteLoss {
            cycle,
            detail: format!("non-finite gradient in layer {layer}"),
        },
        other => other,
    }
}

/// Raw generator outputs (scaled continuous value or head probabilities)
/// for each conditioning row, one noise draw per row.
pub fn generate(pair: &GcinPair, x_cond: ArrayView2<f64>, rng: &mut ChaCha8Rng) -> Result<Array2<f64>> {
    if x_cond.ncols() != pair.cond_dim() {
        return Err(Error::Shape(format!(
            "generator conditions on {} columns, got {}",
            pair.cond_dim(),
            x_cond.ncols()
        )));
    }
    let cond = pair.normalize_cond(x_cond);
    let gen_in = with_noise(&cond, pair.noise_dim, rng);
    pair.generator.forward(gen_in.view())
}

/// Imputes one value per conditioning row on the column's original scale.
///
/// Binary and categorical columns return level codes, drawn from the
/// generated probabilities or taken as the most probable level depending on
/// the pair's [`BinaryImputation`] mode.
pub fn impute_column(pair: &GcinPair, x_cond_mis: ArrayView2<f64>, seed: u64) -> Result<Vec<f64>> {
    if x_cond_mis.ncols() != pair.cond_dim() {
        return Err(Error::Shape(format!(
            "generator conditions on {} columns, got {}",
            pair.cond_dim(),
            x_cond_mis.ncols()
        )));
    }
    if x_cond_mis.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut rng = rng_from_seed(seed);
    let out = generate(pair, x_cond_mis, &mut rng)?;
    let sample = pair.binary_imputation == BinaryImputation::Sample;
    Ok(out
        .rows()
        .into_iter()
        .map(|row| match pair.kind {
            ColumnKind::Continuous => pair.target_norm.invert(row[0]),
            ColumnKind::Binary => {
                let p = row[0];
                let hit = if sample { rng.gen::<f64>() < p } else { p >= 0.5 };
                if hit {
                    1.0
                } else {
                    0.0
                }
            }
            ColumnKind::Categorical(_) => {
                let total: f64 = row.sum();
                if sample && total > 0.0 {
                    let u = rng.gen::<f64>() * total;
                    let mut acc = 0.0;
                    for (k, &p) in row.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            return k as f64;
                        }
                    }
                    (row.len() - 1) as f64
                } else {
                    row.iter()
                        .enumerate()
                        .fold((0, f64::NEG_INFINITY), |best, (k, &p)| if p > best.1 { (k, p) } else { best })
                        .0 as f64
                }
            }
        })
        .collect())
}
