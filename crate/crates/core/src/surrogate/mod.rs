//! MLP surrogate of a beampattern table: `(θ_n, φ_n, θ_r) → RSRP`.
//!
//! Inputs are scaled to `[-1, 1]` with per-feature min/max and targets to
//! zero mean and unit variance, both from the training split only. Training
//! is single-threaded and bit-reproducible for a given seed.

mod io;
mod network;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;

use crate::analysis::nmse;
use crate::dataset::BeampatternTable;
use crate::error::{Error, Result};

pub use io::MODEL_FORMAT_HEADER;
pub use network::{Adam, Dense, Gradients, Network};

pub const INPUT_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Tanh,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the activation output.
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "tanh" => Some(Activation::Tanh),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpSpec {
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub activation: Activation,
    pub input_dim: usize,
    pub output_dim: usize,
}

impl Default for MlpSpec {
    /// Three hidden layers of 16 units and a linear output.
    fn default() -> Self {
        MlpSpec {
            hidden_layers: 3,
            hidden_width: 16,
            activation: Activation::Tanh,
            input_dim: INPUT_DIM,
            output_dim: 1,
        }
    }
}

impl MlpSpec {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers == 0 || self.hidden_width == 0 {
            return Err(Error::domain("MLP needs ≥ 1 hidden layer of width ≥ 1"));
        }
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::domain("MLP input and output dims must be ≥ 1"));
        }
        Ok(())
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim];
        dims.extend(std::iter::repeat_n(self.hidden_width, self.hidden_layers));
        dims.push(self.output_dim);
        dims
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSpec {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Fraction of records used for training; the rest validate.
    pub split_fraction: f64,
    pub seed: u64,
    /// Record the full-training-set loss after every epoch.
    pub track_loss: bool,
}

impl Default for TrainSpec {
    fn default() -> Self {
        TrainSpec {
            epochs: 750,
            batch_size: 100,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            split_fraction: 0.8,
            seed: 0,
            track_loss: false,
        }
    }
}

impl TrainSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::domain("split_fraction must lie in (0, 1)"));
        }
        if self.batch_size == 0 {
            return Err(Error::domain("batch_size must be ≥ 1"));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::domain("learning_rate must be > 0"));
        }
        Ok(())
    }
}

/// One flattened table cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub theta_n: f64,
    pub phi_n: f64,
    pub theta_r: f64,
    pub rsrp_dbm: f64,
}

impl Record {
    fn features(&self) -> [f64; INPUT_DIM] {
        [self.theta_n, self.phi_n, self.theta_r]
    }
}

/// One record per cell, row-major.
pub fn flatten_table(table: &BeampatternTable) -> Vec<Record> {
    table
        .beams()
        .iter()
        .enumerate()
        .flat_map(|(r, beam)| {
            table.rotations().iter().enumerate().map(move |(c, &theta_r)| Record {
                theta_n: beam.azimuth_deg(),
                phi_n: beam.elevation_deg(),
                theta_r,
                rsrp_dbm: table.get(r, c),
            })
        })
        .collect()
}

/// Trained network plus the normalisation learned from the training split.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub network: Network,
    pub input_min: [f64; INPUT_DIM],
    pub input_max: [f64; INPUT_DIM],
    pub target_mean: f64,
    pub target_std: f64,
}

impl MlpModel {
    fn normalize(&self, x: [f64; INPUT_DIM]) -> [f64; INPUT_DIM] {
        let mut out = [0.0; INPUT_DIM];
        for i in 0..INPUT_DIM {
            let span = self.input_max[i] - self.input_min[i];
            out[i] = if span > 0.0 {
                2.0 * (x[i] - self.input_min[i]) / span - 1.0
            } else {
                0.0
            };
        }
        out
    }

    /// RSRP in dBm; defined for any angles, on-grid or not.
    pub fn predict(&self, theta_n: f64, phi_n: f64, theta_r: f64) -> f64 {
        let x = self.normalize([theta_n, phi_n, theta_r]);
        self.network.forward(&x)[0] * self.target_std + self.target_mean
    }

    pub fn predict_records(&self, records: &[Record]) -> Vec<f64> {
        records
            .par_iter()
            .map(|r| self.predict(r.theta_n, r.phi_n, r.theta_r))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: MlpModel,
    pub train_nmse: f64,
    pub val_nmse: f64,
    /// Full-training-set MSE (normalised targets) after each epoch, when
    /// tracking was requested.
    pub epoch_loss: Vec<f64>,
}

/// Seeded shuffle of `0..n` split into (training, validation) indices.
pub fn split_indices(n: usize, split_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((n as f64) * split_fraction).round() as usize;
    let n_train = n_train.clamp(1, n.saturating_sub(1));
    let val = idx.split_off(n_train);
    (idx, val)
}

pub fn train(records: &[Record], mlp: &MlpSpec, spec: &TrainSpec) -> Result<TrainOutcome> {
    mlp.validate()?;
    spec.validate()?;
    if mlp.input_dim != INPUT_DIM || mlp.output_dim != 1 {
        return Err(Error::domain("table surrogate maps 3 inputs to 1 output"));
    }
    if records.len() < 2 * spec.batch_size {
        return Err(Error::domain(format!(
            "{} records is fewer than twice the batch size {}",
            records.len(),
            spec.batch_size
        )));
    }
    let (train_idx, val_idx) = split_indices(records.len(), spec.split_fraction, spec.seed);

    let mut input_min = [f64::INFINITY; INPUT_DIM];
    let mut input_max = [f64::NEG_INFINITY; INPUT_DIM];
    for &i in &train_idx {
        for (k, v) in records[i].features().into_iter().enumerate() {
            input_min[k] = input_min[k].min(v);
            input_max[k] = input_max[k].max(v);
        }
    }
    let n_train = train_idx.len() as f64;
    let target_mean = train_idx.iter().map(|&i| records[i].rsrp_dbm).sum::<f64>() / n_train;
    let var = train_idx
        .iter()
        .map(|&i| (records[i].rsrp_dbm - target_mean).powi(2))
        .sum::<f64>()
        / n_train;
    let target_std = if var > 0.0 { var.sqrt() } else { 1.0 };

    let mut model = MlpModel {
        network: Network::init(&mlp.dims(), mlp.activation, spec.seed.wrapping_add(1)),
        input_min,
        input_max,
        target_mean,
        target_std,
    };

    let xs: Vec<[f64; INPUT_DIM]> = train_idx
        .iter()
        .map(|&i| model.normalize(records[i].features()))
        .collect();
    let ys: Vec<[f64; 1]> = train_idx
        .iter()
        .map(|&i| [(records[i].rsrp_dbm - target_mean) / target_std])
        .collect();
    let x_refs: Vec<&[f64]> = xs.iter().map(|x| x.as_slice()).collect();
    let y_refs: Vec<&[f64]> = ys.iter().map(|y| y.as_slice()).collect();

    let mut adam = Adam::new(
        model.network.param_count(),
        spec.learning_rate,
        spec.adam_beta1,
        spec.adam_beta2,
        spec.adam_eps,
    );
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(2));
    let mut grads = model.network.loss_and_gradients(&x_refs[..1], &y_refs[..1]).1;
    let mut epoch_loss = Vec::new();
    let mut batch_x: Vec<&[f64]> = Vec::with_capacity(spec.batch_size);
    let mut batch_y: Vec<&[f64]> = Vec::with_capacity(spec.batch_size);
    for _ in 0..spec.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(spec.batch_size) {
            batch_x.clear();
            batch_y.clear();
            batch_x.extend(chunk.iter().map(|&i| x_refs[i]));
            batch_y.extend(chunk.iter().map(|&i| y_refs[i]));
            model.network.accumulate(&batch_x, &batch_y, &mut grads);
            adam.step(&mut model.network, &grads);
        }
        if spec.track_loss {
            epoch_loss.push(model.network.mse(&x_refs, &y_refs));
        }
    }

    let eval = |idx: &[usize]| -> Result<f64> {
        let truth: Vec<f64> = idx.iter().map(|&i| records[i].rsrp_dbm).collect();
        let subset: Vec<Record> = idx.iter().map(|&i| records[i]).collect();
        nmse(&model.predict_records(&subset), &truth)
    };
    let train_nmse = eval(&train_idx)?;
    let val_nmse = eval(&val_idx)?;
    Ok(TrainOutcome {
        model,
        train_nmse,
        val_nmse,
        epoch_loss,
    })
}

/// Finite-difference error step, in normalised input/target space.
pub const GRADIENT_CHECK_STEP: f64 = 1e-5;
const GRADIENT_CHECK_BATCH: usize = 8;

/// Compare backpropagated gradients of the MSE on a random normalised batch
/// with central finite differences; returns the largest relative error.
pub fn gradient_check(mlp: &MlpSpec, seed: u64) -> Result<f64> {
    mlp.validate()?;
    Ok(gradient_check_impl(mlp, seed, false))
}

fn gradient_check_impl(mlp: &MlpSpec, seed: u64, flip_sign: bool) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = Network::random(&mlp.dims(), mlp.activation, 0.5, &mut rng);
    let uniform = rand_distr::Uniform::new(-1.0, 1.0).expect("valid range");
    let normal = rand_distr::StandardNormal;
    let xs: Vec<Vec<f64>> = (0..GRADIENT_CHECK_BATCH)
        .map(|_| (0..mlp.input_dim).map(|_| uniform.sample(&mut rng)).collect())
        .collect();
    let ys: Vec<Vec<f64>> = (0..GRADIENT_CHECK_BATCH)
        .map(|_| (0..mlp.output_dim).map(|_| Distribution::<f64>::sample(&normal, &mut rng)).collect())
        .collect();
    let x_refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let y_refs: Vec<&[f64]> = ys.iter().map(Vec::as_slice).collect();
    network::max_gradient_error(&net, &x_refs, &y_refs, GRADIENT_CHECK_STEP, flip_sign)
}
