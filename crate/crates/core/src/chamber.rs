//! Anechoic-chamber campaign simulation.
//!
//! The RIS and the TX share the turntable, so a rotation `θ_r` moves only
//! the RX direction `(θ_r, rx_elevation)` seen by the surface; the TX
//! incidence stays fixed. Each table cell averages `samples_per_point` RSRP
//! draws with Gaussian noise in dB, drawn from a PRNG stream derived from
//! `(seed, row, column)` so results do not depend on scheduling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::array::{received_signal_with, steering_vector, ArraySpec, Direction, PhaseConfig};
use crate::array::SPEED_OF_LIGHT;
use crate::codebook::{absorption_masks, AngleRange, Codebook};
use crate::dataset::{round_power, AbsorptionTable, BeampatternTable};
use crate::error::{Error, Result};

/// Samples per configuration in the sample-count study's ground truth.
pub const GROUND_TRUTH_SAMPLES: usize = 80;

#[derive(Debug, Clone, PartialEq)]
pub struct ChamberGeometry {
    pub tx: Direction,
    pub rx_elevation_deg: f64,
    pub rotation: AngleRange,
    pub d_ris_tx_m: f64,
    pub d_ris_rx_m: f64,
    pub diagonal_m: f64,
}

impl Default for ChamberGeometry {
    fn default() -> Self {
        ChamberGeometry {
            tx: Direction::new(0.0, -33.0).unwrap(),
            rx_elevation_deg: -3.0,
            rotation: AngleRange::new(-90, 90, 3).unwrap(),
            d_ris_tx_m: 1.1,
            d_ris_rx_m: 6.3,
            diagonal_m: 0.43,
        }
    }
}

impl ChamberGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("d_ris_tx_m", self.d_ris_tx_m),
            ("d_ris_rx_m", self.d_ris_rx_m),
            ("diagonal_m", self.diagonal_m),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be > 0, got {v}")));
            }
        }
        Direction::new(0.0, self.rx_elevation_deg)?;
        Ok(())
    }

    /// RX direction at table rotation `theta_r`.
    pub fn rx_at(&self, theta_r: f64) -> Result<Direction> {
        Direction::new(theta_r, self.rx_elevation_deg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    /// RSRP of a fully coherent reflection, in dBm.
    pub calibration_dbm: f64,
    pub noise_floor_dbm: f64,
    pub sample_sigma_db: f64,
    pub samples_per_point: usize,
}

impl Default for LinkBudget {
    fn default() -> Self {
        LinkBudget {
            calibration_dbm: -60.0,
            noise_floor_dbm: -90.0,
            sample_sigma_db: 0.5,
            samples_per_point: 30,
        }
    }
}

impl LinkBudget {
    /// The same budget without measurement noise.
    pub fn noise_free(&self) -> Self {
        LinkBudget {
            sample_sigma_db: 0.0,
            samples_per_point: 1,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples_per_point == 0 {
            return Err(Error::domain("samples_per_point must be ≥ 1"));
        }
        if !(self.sample_sigma_db.is_finite() && self.sample_sigma_db >= 0.0) {
            return Err(Error::domain("sample_sigma_db must be ≥ 0"));
        }
        if !self.calibration_dbm.is_finite() || !self.noise_floor_dbm.is_finite() {
            return Err(Error::domain("calibration and noise floor must be finite"));
        }
        Ok(())
    }

    /// Map a received amplitude to RSRP: coherent gain normalised by the
    /// active count, anchored at `calibration_dbm`, summed with the floor in
    /// linear power.
    pub fn rsrp_from_amplitude(&self, amplitude: f64, active: usize) -> f64 {
        let floor_mw = 10f64.powf(self.noise_floor_dbm / 10.0);
        if active == 0 || amplitude == 0.0 {
            return self.noise_floor_dbm;
        }
        let signal_dbm = self.calibration_dbm + 20.0 * (amplitude / active as f64).log10();
        10.0 * (10f64.powf(signal_dbm / 10.0) + floor_mw).log10()
    }
}

/// Noise-free RSRP in dBm for one configuration and RX direction.
pub fn rsrp(
    spec: &ArraySpec,
    config: &PhaseConfig,
    tx: &Direction,
    rx: &Direction,
    budget: &LinkBudget,
) -> Result<f64> {
    let g = steering_vector(spec, tx);
    let h = steering_vector(spec, rx);
    let y = received_signal_with(spec, config, &g, &h)?;
    Ok(budget.rsrp_from_amplitude(y.norm(), spec.active_count()))
}

/// Campaign tags keep the beampattern and absorption PRNG streams apart.
const TAG_BEAMPATTERN: u64 = 0x6265_616d;
const TAG_ABSORPTION: u64 = 0x6162_736f;

fn cell_rng(seed: u64, tag: u64, row: usize, col: usize, cols: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ tag.rotate_left(32));
    rng.set_stream((row * cols + col) as u64);
    rng
}

fn measure(clean_dbm: f64, budget: &LinkBudget, rng: impl FnOnce() -> ChaCha8Rng) -> f64 {
    if budget.sample_sigma_db == 0.0 {
        return round_power(clean_dbm);
    }
    let mut rng = rng();
    let n = budget.samples_per_point;
    let sum: f64 = (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            clean_dbm + budget.sample_sigma_db * z
        })
        .sum();
    round_power(sum / n as f64)
}

/// Evaluate every (beam, rotation) cell for `spec` with the configurations
/// of `codebook`. Returns the row-major matrix.
#[allow(clippy::too_many_arguments)]
fn sweep_cells(
    spec: &ArraySpec,
    codebook: &Codebook,
    rx_dirs: &[Direction],
    budget: &LinkBudget,
    seed: u64,
    tag: u64,
    col_offset: usize,
    total_cols: usize,
) -> Result<Vec<f64>> {
    let g = steering_vector(spec, codebook.tx());
    let hs: Vec<Vec<Complex64>> = rx_dirs.iter().map(|d| steering_vector(spec, d)).collect();
    let active = spec.active_count();
    let rows: Vec<Vec<f64>> = codebook
        .entries()
        .par_iter()
        .enumerate()
        .map(|(r, entry)| {
            hs.iter()
                .enumerate()
                .map(|(c, h)| {
                    let y = received_signal_with(spec, &entry.config, &g, h)?;
                    let clean = budget.rsrp_from_amplitude(y.norm(), active);
                    let col = col_offset + c;
                    Ok(measure(clean, budget, || cell_rng(seed, tag, r, col, total_cols)))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Turntable sweep: every codebook beam at every rotation.
pub fn sweep_beampattern(
    codebook: &Codebook,
    geometry: &ChamberGeometry,
    budget: &LinkBudget,
    seed: u64,
) -> Result<BeampatternTable> {
    geometry.validate()?;
    budget.validate()?;
    if codebook.tx() != &geometry.tx {
        return Err(Error::contract(format!(
            "codebook built for TX {} but chamber TX is {}",
            codebook.tx(),
            geometry.tx
        )));
    }
    let rotations: Vec<f64> = geometry.rotation.values().map(f64::from).collect();
    let rx: Vec<Direction> = rotations
        .iter()
        .map(|&r| geometry.rx_at(r))
        .collect::<Result<_>>()?;
    let power = sweep_cells(
        codebook.spec(),
        codebook,
        &rx,
        budget,
        seed,
        TAG_BEAMPATTERN,
        0,
        rotations.len(),
    )?;
    BeampatternTable::new(
        codebook.entries().iter().map(|e| e.beam).collect(),
        rotations,
        power,
        Some(geometry.tx.azimuth_deg()),
    )
}

/// Per-mask RSRP columns at `θ_r = 0`, one `Vec` per mask, rows in codebook
/// order.
pub fn absorption_columns(
    codebook: &Codebook,
    masks: &[ArraySpec],
    geometry: &ChamberGeometry,
    budget: &LinkBudget,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    geometry.validate()?;
    budget.validate()?;
    let rx = [geometry.rx_at(0.0)?];
    masks
        .iter()
        .enumerate()
        .map(|(c, mask)| {
            if mask.len() != codebook.spec().len() {
                return Err(Error::contract("mask does not match codebook array"));
            }
            sweep_cells(mask, codebook, &rx, budget, seed, TAG_ABSORPTION, c, masks.len())
        })
        .collect()
}

/// Fixed-table campaign over the absorption masks (4, 16, 64, 100 active).
pub fn sweep_absorption(
    codebook: &Codebook,
    geometry: &ChamberGeometry,
    budget: &LinkBudget,
    seed: u64,
) -> Result<AbsorptionTable> {
    let masks = absorption_masks(codebook.spec())?;
    let columns = absorption_columns(codebook, &masks, geometry, budget, seed)?;
    let rows = codebook.len();
    let mut power = Vec::with_capacity(rows * masks.len());
    for r in 0..rows {
        power.extend(columns.iter().map(|col| col[r]));
    }
    AbsorptionTable::new(
        codebook.entries().iter().map(|e| e.beam).collect(),
        masks.iter().map(ArraySpec::active_count).collect(),
        power,
        Some(geometry.tx.azimuth_deg()),
    )
}

/// Empirical CDF of relative averaging error for one sample count.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCdf {
    pub count: usize,
    /// Sorted ascending.
    pub errors: Vec<f64>,
}

impl ErrorCdf {
    /// Empirical quantile (nearest-rank), `q` in `[0, 1]`.
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.errors.len();
        let rank = ((q.clamp(0.0, 1.0) * n as f64).ceil() as usize).clamp(1, n);
        self.errors[rank - 1]
    }

    /// Fraction of trials with error ≤ `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.errors.partition_point(|&e| e <= x) as f64 / self.errors.len() as f64
    }
}

/// For every count `c`, draw `trials` batches of 80 noisy samples around
/// `true_rsrp_dbm` and record `|mean(first c) − mean(80)| / |mean(80)|`.
pub fn sample_count_study(
    true_rsrp_dbm: f64,
    sigma_db: f64,
    counts: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<ErrorCdf>> {
    if counts.is_empty() {
        return Err(Error::domain("no sample counts requested"));
    }
    if trials == 0 {
        return Err(Error::domain("trials must be ≥ 1"));
    }
    if let Some(c) = counts.iter().find(|&&c| c == 0 || c > GROUND_TRUTH_SAMPLES) {
        return Err(Error::domain(format!(
            "sample count {c} outside 1..={GROUND_TRUTH_SAMPLES}"
        )));
    }
    if !(sigma_db.is_finite() && sigma_db >= 0.0) {
        return Err(Error::domain("sigma must be ≥ 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_count: Vec<Vec<f64>> = vec![Vec::with_capacity(trials); counts.len()];
    let mut batch = [0.0f64; GROUND_TRUTH_SAMPLES];
    for _ in 0..trials {
        for s in batch.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *s = true_rsrp_dbm + sigma_db * z;
        }
        let truth = batch.iter().sum::<f64>() / GROUND_TRUTH_SAMPLES as f64;
        for (errs, &c) in per_count.iter_mut().zip(counts) {
            let partial = if c == GROUND_TRUTH_SAMPLES {
                truth
            } else {
                batch[..c].iter().sum::<f64>() / c as f64
            };
            errs.push((partial - truth).abs() / truth.abs());
        }
    }
    Ok(per_count
        .into_iter()
        .zip(counts)
        .map(|(mut errors, &count)| {
            errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ErrorCdf { count, errors }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldRegions {
    /// Fraunhofer distance `2D²/λ`.
    pub far_field_m: f64,
    /// Reactive near-field boundary `0.62·√(D³/λ)`.
    pub reactive_near_m: f64,
}

pub fn field_regions(diagonal_m: f64, frequency_hz: f64) -> Result<FieldRegions> {
    if !(diagonal_m > 0.0 && frequency_hz > 0.0) {
        return Err(Error::domain("aperture and frequency must be > 0"));
    }
    let lambda = SPEED_OF_LIGHT / frequency_hz;
    Ok(FieldRegions {
        far_field_m: 2.0 * diagonal_m * diagonal_m / lambda,
        reactive_near_m: 0.62 * (diagonal_m.powi(3) / lambda).sqrt(),
    })
}
