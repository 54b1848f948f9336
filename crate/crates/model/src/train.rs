use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use trajgen_core::codec::{extract_codes, CodecConfig};
use trajgen_core::Scenario;
use trajgen_nn::{AdamW, AdamWConfig};

use crate::config::DecoderConfig;
use crate::decoder::Decoder;
use crate::error::{ModelError, Result};
use crate::features::DecoderInput;
use crate::loss::{scenario_loss, LossBreakdown, Target};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// Scenarios per step; 0 uses the whole set.
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Use the small decoder preset instead of the configured dimensions.
    pub shrink_dims: bool,
    /// Rescale gradients whose global norm exceeds this value.
    pub grad_clip: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 3e-4,
            weight_decay: 1e-4,
            batch_size: 0,
            epochs: 100,
            seed: 0,
            shrink_dims: false,
            grad_clip: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(ModelError::Config(format!("learning_rate must be >= 0, got {}", self.learning_rate)));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(ModelError::Config(format!("weight_decay must be >= 0, got {}", self.weight_decay)));
        }
        if let Some(c) = self.grad_clip {
            if !(c > 0.0) {
                return Err(ModelError::Config(format!("grad_clip must be positive, got {c}")));
            }
        }
        Ok(())
    }

    pub fn optimizer(&self) -> AdamWConfig {
        AdamWConfig { learning_rate: self.learning_rate, weight_decay: self.weight_decay, ..AdamWConfig::default() }
    }
}

/// A scenario prepared for training: codes extracted from the ground truth
/// and the ego-frame target.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainExample {
    pub id: String,
    pub input: DecoderInput,
    pub target: Target,
}

pub fn prepare_examples(
    scenarios: &[(String, Scenario)],
    cfg: &DecoderConfig,
    codec: &CodecConfig,
) -> Result<Vec<TrainExample>> {
    scenarios
        .iter()
        .map(|(id, s)| {
            let local = s.to_ego_frame();
            let codes = extract_codes(&local, codec)?;
            let input = DecoderInput::new(&codes, &local.map, cfg, codec)?;
            let target = Target::from_scenario(&local);
            if target.positions.ncols() != 2 * cfg.horizon {
                return Err(ModelError::Config(format!(
                    "scenario {id} has {} steps but the decoder horizon is {}",
                    target.positions.ncols() / 2,
                    cfg.horizon
                )));
            }
            Ok(TrainExample { id: id.clone(), input, target })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainRecord {
    pub step: u64,
    pub loss: LossBreakdown,
    pub wall_seconds: f64,
}

impl TrainRecord {
    pub fn to_line(&self) -> String {
        format!(
            "step={} traj={:.6} rela={:.6} total={:.6} wall={:.3}",
            self.step, self.loss.traj_term, self.loss.rela_term, self.loss.total, self.wall_seconds
        )
    }
}

pub struct Trainer {
    pub decoder: Decoder,
    pub optimizer: AdamW,
    pub config: TrainConfig,
}

impl Trainer {
    pub fn new(decoder: Decoder, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let optimizer = AdamW::new(config.optimizer(), &decoder.store);
        Ok(Self { decoder, optimizer, config })
    }

    /// Continues from saved optimizer moments; the learning rate and weight
    /// decay come from `config`.
    pub fn resume(decoder: Decoder, mut optimizer: AdamW, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        optimizer.config = config.optimizer();
        Ok(Self { decoder, optimizer, config })
    }

    /// Mean loss over `batch`, followed by one optimizer update.
    pub fn train_step(&mut self, batch: &[&TrainExample]) -> Result<LossBreakdown> {
        if batch.is_empty() {
            return Err(ModelError::Config("empty training batch".into()));
        }
        let Decoder { net, store, .. } = &mut self.decoder;
        store.zero_grad();
        let scale = 1.0 / batch.len() as f64;
        let mut sum = LossBreakdown::default();
        for ex in batch {
            let (offsets, cache) = net.forward(store, &ex.input)?;
            let pred = net.positions(&ex.input, &offsets);
            let (loss, grad) = scenario_loss(&pred, &ex.target)?;
            if !loss.total.is_finite() {
                return Err(ModelError::NonFinite(format!(
                    "step {}: scenario {} loss traj={} rela={}",
                    self.optimizer.step + 1,
                    ex.id,
                    loss.traj_term,
                    loss.rela_term
                )));
            }
            net.backward(store, &cache, &(grad * scale));
            sum.traj_term += loss.traj_term * scale;
            sum.rela_term += loss.rela_term * scale;
            sum.total += loss.total * scale;
        }
        let norm = store.grad_norm();
        if !norm.is_finite() {
            let worst = store
                .iter()
                .find(|p| p.grad.iter().any(|g| !g.is_finite()))
                .map_or_else(String::new, |p| p.name.clone());
            return Err(ModelError::NonFinite(format!(
                "step {}: non-finite gradient in {worst}",
                self.optimizer.step + 1
            )));
        }
        if let Some(clip) = self.config.grad_clip {
            if norm > clip {
                store.scale_grads(clip / norm);
            }
        }
        self.optimizer.update(store);
        Ok(sum)
    }

    /// Runs `config.epochs` passes over `examples`, reporting each step.
    pub fn run(
        &mut self,
        examples: &[TrainExample],
        mut on_step: impl FnMut(&TrainRecord),
    ) -> Result<Vec<TrainRecord>> {
        if examples.is_empty() {
            return Err(ModelError::Config("no training examples".into()));
        }
        let batch =
            if self.config.batch_size == 0 { examples.len() } else { self.config.batch_size.min(examples.len()) };
        let start = Instant::now();
        let mut records = Vec::new();
        let mut order: Vec<usize> = (0..examples.len()).collect();
        for _ in 0..self.config.epochs {
            let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ self.optimizer.step.wrapping_mul(0x9E37_79B9));
            if batch < examples.len() {
                order.shuffle(&mut rng);
            }
            for chunk in order.chunks(batch) {
                let refs: Vec<&TrainExample> = chunk.iter().map(|&i| &examples[i]).collect();
                let loss = self.train_step(&refs)?;
                let record =
                    TrainRecord { step: self.optimizer.step, loss, wall_seconds: start.elapsed().as_secs_f64() };
                on_step(&record);
                records.push(record);
            }
        }
        Ok(records)
    }
}
