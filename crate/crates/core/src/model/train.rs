//! Sample-matched training.
//!
//! Each pair is encoded by both encoders; the shared decoder turns each latent
//! into a full `[uSkin | PapillArray]` reconstruction, giving two
//! self-reconstructions and two cross-reconstructions. The batch loss is the
//! sum of the four MAEs, and one Adam step updates all three networks.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Direction, PerDirection, UniTacModel};
use crate::dataset::{PairedSample, SplitResult};
use crate::nn::{adam_step, mae_loss, AdamConfig, AdamState, Gradients};
use crate::rng::{stream, Rng};
use crate::sensor::SensorKind;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub dropout: f64,
    pub batch_size: usize,
    pub seed: u64,
    #[serde(default)]
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 1000,
            lr: 5e-4,
            dropout: 0.007,
            batch_size: 64,
            seed: 0,
            adam: AdamConfig::default(),
        }
    }
}

impl TrainConfig {
    /// Desk-scale profile: 200 epochs, otherwise the default hyperparameters.
    pub fn fast() -> Self {
        Self {
            epochs: 200,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config(
                "epochs and batch size must be positive".into(),
            ));
        }
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            return Err(Error::Config(format!(
                "learning rate {} must be finite and ≥ 0",
                self.lr
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!(
                "dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerStates {
    pub encoder_uskin: AdamState,
    pub encoder_papill: AdamState,
    pub decoder: AdamState,
}

impl OptimizerStates {
    pub fn new(model: &UniTacModel) -> Self {
        Self {
            encoder_uskin: AdamState::new(&model.encoder_uskin),
            encoder_papill: AdamState::new(&model.encoder_papill),
            decoder: AdamState::new(&model.decoder),
        }
    }
}

/// Batch loss and its four terms (batch-mean MAE in normalised space).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLoss {
    pub total: f64,
    pub terms: PerDirection,
}

fn split_grad(pred: &[f64], target: &[f64], scale: f64, out: &mut [f64]) {
    for ((o, p), t) in out.iter_mut().zip(pred).zip(target) {
        let d = p - t;
        *o = if d > 0.0 {
            scale
        } else if d < 0.0 {
            -scale
        } else {
            0.0
        };
    }
}

/// Gradients of the batch loss for the three networks.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGradients {
    pub encoder_uskin: Gradients,
    pub encoder_papill: Gradients,
    pub decoder: Gradients,
}

/// Batch loss and its gradients, dropout masks drawn from `rng`. Nothing is
/// updated.
pub fn loss_and_gradients(
    model: &UniTacModel,
    batch: &[PairedSample],
    rng: &mut Rng,
) -> Result<(StepLoss, ModelGradients)> {
    if batch.is_empty() {
        return Err(Error::Data("empty training batch".into()));
    }
    let nu = SensorKind::USkin.flat_len();
    let np = SensorKind::Papill.flat_len();
    let b = batch.len() as f64;

    let mut g_enc_u = Gradients::zeros_like(&model.encoder_uskin);
    let mut g_enc_p = Gradients::zeros_like(&model.encoder_papill);
    let mut g_dec = Gradients::zeros_like(&model.decoder);
    let mut sums = [0.0; 4];
    let mut out_grad = vec![0.0; nu + np];

    for sample in batch {
        let xu = model.norm_uskin.normalize_frame(&sample.uskin)?;
        let xp = model.norm_papill.normalize_frame(&sample.papill)?;

        for source in SensorKind::ALL {
            let (encoder, grads, x) = match source {
                SensorKind::USkin => (&model.encoder_uskin, &mut g_enc_u, &xu),
                SensorKind::Papill => (&model.encoder_papill, &mut g_enc_p, &xp),
            };
            let (z, enc_tape) = encoder.forward_train(x, rng)?;
            let (y, dec_tape) = model.decoder.forward_train(&z, rng)?;
            let (yu, yp) = y.split_at(nu);

            let to_u = Direction {
                from: source,
                to: SensorKind::USkin,
            }
            .index();
            let to_p = Direction {
                from: source,
                to: SensorKind::Papill,
            }
            .index();
            sums[to_u] += mae_loss(yu, &xu)?;
            sums[to_p] += mae_loss(yp, &xp)?;

            let (gu, gp) = out_grad.split_at_mut(nu);
            split_grad(yu, &xu, 1.0 / (b * nu as f64), gu);
            split_grad(yp, &xp, 1.0 / (b * np as f64), gp);
            let dz = model
                .decoder
                .backward_into(dec_tape, &out_grad, &mut g_dec)?;
            encoder.backward_into(enc_tape, &dz, grads)?;
        }
    }

    let terms = sums.map(|s| s / b);
    let total: f64 = terms.iter().sum();
    if !total.is_finite() {
        return Err(Error::Numeric("training loss".into()));
    }
    Ok((
        StepLoss {
            total,
            terms: PerDirection(terms),
        },
        ModelGradients {
            encoder_uskin: g_enc_u,
            encoder_papill: g_enc_p,
            decoder: g_dec,
        },
    ))
}

/// One optimisation step on a batch. Returns the pre-update loss.
pub fn training_step(
    model: &mut UniTacModel,
    batch: &[PairedSample],
    optim: &mut OptimizerStates,
    config: &TrainConfig,
    rng: &mut Rng,
) -> Result<StepLoss> {
    let (loss, grads) = loss_and_gradients(model, batch, rng)?;
    let (lr, cfg) = (config.lr, &config.adam);
    adam_step(
        &mut model.encoder_uskin,
        &grads.encoder_uskin,
        &mut optim.encoder_uskin,
        cfg,
        lr,
        0.0,
    )?;
    adam_step(
        &mut model.encoder_papill,
        &grads.encoder_papill,
        &mut optim.encoder_papill,
        cfg,
        lr,
        0.0,
    )?;
    adam_step(
        &mut model.decoder,
        &grads.decoder,
        &mut optim.decoder,
        cfg,
        lr,
        0.0,
    )?;
    Ok(loss)
}

/// Per-epoch record: mean training loss, then test-set metrics with dropout off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_nmae: PerDirection,
    pub test_latent_manhattan: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
}

impl TrainHistory {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss");
        for d in Direction::ALL {
            out.push_str(&format!(",nmae_{}", d.slug()));
        }
        out.push_str(",latent_manhattan\n");
        for r in &self.records {
            out.push_str(&format!("{},{}", r.epoch, r.train_loss));
            for v in r.test_nmae.0 {
                out.push_str(&format!(",{v}"));
            }
            out.push_str(&format!(",{}\n", r.test_latent_manhattan));
        }
        out
    }
}

/// Mean per-direction NMAE and mean latent Manhattan distance over `samples`.
/// Both are NaN for an empty set.
pub fn evaluate_split(
    model: &UniTacModel,
    samples: &[PairedSample],
) -> Result<(PerDirection, f64)> {
    let mut nmae = [0.0; 4];
    let mut dist = 0.0;
    for s in samples {
        let pass = model.pass(s)?;
        for d in Direction::ALL {
            nmae[d.index()] += pass.nmae(d);
        }
        dist += pass.latent_distance();
    }
    let n = samples.len() as f64;
    Ok((PerDirection(nmae.map(|v| v / n)), dist / n))
}

/// Owns a model and its optimiser state across epochs; resumable from any
/// epoch boundary because every random stream is keyed by (seed, epoch).
#[derive(Debug, Clone, PartialEq)]
pub struct Trainer {
    pub model: UniTacModel,
    pub optim: OptimizerStates,
    pub config: TrainConfig,
    pub epochs_completed: usize,
}

impl Trainer {
    pub fn new(train: &[PairedSample], config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let model = UniTacModel::init(train, config.dropout, config.seed)?;
        let optim = OptimizerStates::new(&model);
        Ok(Self {
            model,
            optim,
            config,
            epochs_completed: 0,
        })
    }

    pub fn run_epoch(
        &mut self,
        train: &[PairedSample],
        test: &[PairedSample],
    ) -> Result<EpochRecord> {
        if train.is_empty() {
            return Err(Error::Data("training set is empty".into()));
        }
        let epoch = self.epochs_completed + 1;
        let seed = self.config.seed;
        let mut order: Vec<usize> = (0..train.len()).collect();
        order.shuffle(&mut stream(seed, "shuffle", &[epoch as u64]));
        let mut rng = stream(seed, "dropout", &[epoch as u64]);

        let mut loss_sum = 0.0;
        let mut batch = Vec::with_capacity(self.config.batch_size);
        for chunk in order.chunks(self.config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| train[i].clone()));
            let loss = training_step(
                &mut self.model,
                &batch,
                &mut self.optim,
                &self.config,
                &mut rng,
            )?;
            loss_sum += loss.total * chunk.len() as f64;
        }
        self.epochs_completed = epoch;

        let (test_nmae, test_latent_manhattan) = evaluate_split(&self.model, test)?;
        Ok(EpochRecord {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            test_nmae,
            test_latent_manhattan,
        })
    }

    /// Runs epochs until `config.epochs` have been completed.
    pub fn run(&mut self, train: &[PairedSample], test: &[PairedSample]) -> Result<TrainHistory> {
        let mut history = TrainHistory::default();
        while self.epochs_completed < self.config.epochs {
            history.records.push(self.run_epoch(train, test)?);
        }
        Ok(history)
    }
}

/// Trains a fresh model on `split.train`, recording test metrics every epoch.
pub fn train(split: &SplitResult, config: &TrainConfig) -> Result<(UniTacModel, TrainHistory)> {
    let mut trainer = Trainer::new(&split.train, config.clone())?;
    let history = trainer.run(&split.train, &split.test)?;
    Ok((trainer.model, history))
}
