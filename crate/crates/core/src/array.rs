//! Planar RIS array model.
//!
//! Elements are indexed row-major from the top-left corner: element
//! `k * ny + l` sits in row `k` (along x, steered by azimuth) and column `l`
//! (along y, steered by elevation). Angles use a boresight-0 convention, so
//! `(0°, 0°)` is the array normal and both axes are steered through `sin`.
//!
//! The received signal for a configuration `Φ = diag(e^{jφ_k})` is the
//! line-of-sight phase-shift model `y = hᴴ Φ g`, with `h` the RIS→RX channel
//! and `g` the TX→RIS channel, both plane-wave steering vectors.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Element-wise complex vector. Steering vectors are unit modulus.
pub type ComplexVector = Vec<Complex64>;

/// A pointing direction in degrees, boresight at `(0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    azimuth_deg: f64,
    elevation_deg: f64,
}

impl Direction {
    pub const BORESIGHT: Direction = Direction {
        azimuth_deg: 0.0,
        elevation_deg: 0.0,
    };

    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        for (name, v) in [("azimuth", azimuth_deg), ("elevation", elevation_deg)] {
            if !v.is_finite() || !(-90.0..=90.0).contains(&v) {
                return Err(Error::domain(format!(
                    "{name} {v}° outside [-90°, 90°]"
                )));
            }
        }
        // Normalise -0.0 so keys print and compare as "0".
        Ok(Direction {
            azimuth_deg: azimuth_deg + 0.0,
            elevation_deg: elevation_deg + 0.0,
        })
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.azimuth_deg
    }

    pub fn elevation_deg(&self) -> f64 {
        self.elevation_deg
    }

    fn sines(&self) -> (f64, f64) {
        (
            self.azimuth_deg.to_radians().sin(),
            self.elevation_deg.to_radians().sin(),
        )
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}°, {}°)", self.azimuth_deg, self.elevation_deg)
    }
}

/// Geometry and phase capability of the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct ArraySpec {
    nx: usize,
    ny: usize,
    delta: f64,
    frequency_hz: f64,
    phase_set: Vec<f64>,
    mask: Vec<bool>,
}

impl ArraySpec {
    /// An `nx × ny` array with half-wavelength spacing at 5.3 GHz, the
    /// uniform 3-bit phase set and every element active.
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::domain(format!("array must be at least 1×1, got {nx}×{ny}")));
        }
        Ok(ArraySpec {
            nx,
            ny,
            delta: 0.5,
            frequency_hz: 5.3e9,
            phase_set: uniform_phase_set(3),
            mask: vec![true; nx * ny],
        })
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::domain(format!("spacing ratio must be > 0, got {delta}")));
        }
        self.delta = delta;
        Ok(self)
    }

    pub fn with_frequency(mut self, frequency_hz: f64) -> Result<Self> {
        if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
            return Err(Error::domain(format!("frequency must be > 0, got {frequency_hz}")));
        }
        self.frequency_hz = frequency_hz;
        Ok(self)
    }

    pub fn with_phase_set(mut self, phase_set: Vec<f64>) -> Result<Self> {
        if phase_set.is_empty() {
            return Err(Error::domain("phase set is empty"));
        }
        if phase_set.iter().any(|p| !(0.0..TAU).contains(p)) {
            return Err(Error::domain("phase set values must lie in [0, 2π)"));
        }
        if phase_set.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("phase set must be strictly ascending"));
        }
        self.phase_set = phase_set;
        Ok(self)
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.nx * self.ny {
            return Err(Error::contract(format!(
                "mask has {} entries for a {}×{} array",
                mask.len(),
                self.nx,
                self.ny
            )));
        }
        self.mask = mask;
        Ok(self)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    pub fn phase_set(&self) -> &[f64] {
        &self.phase_set
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Total element count `nx · ny`.
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn active_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Per-element steering phase `2πδ(k·sin θ + l·sin φ)`, unwrapped.
    fn steering_phase(&self, dir: &Direction) -> impl Iterator<Item = f64> + '_ {
        let (sx, sy) = dir.sines();
        let scale = TAU * self.delta;
        let ny = self.ny;
        (0..self.len()).map(move |idx| {
            let (k, l) = (idx / ny, idx % ny);
            scale * (k as f64 * sx + l as f64 * sy)
        })
    }
}

/// `{m · 2π / 2^bits}` for `m = 0 .. 2^bits`.
pub fn uniform_phase_set(bits: u32) -> Vec<f64> {
    let levels = 1usize << bits;
    (0..levels).map(|m| m as f64 * TAU / levels as f64).collect()
}

/// Diagonal of Φ: one phase per element, optionally tied to `phase_set`
/// indices once quantized.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    phases: Vec<f64>,
    indices: Option<Vec<usize>>,
}

impl PhaseConfig {
    /// A continuous configuration. Phases are wrapped into `[0, 2π)`.
    pub fn continuous(phases: Vec<f64>) -> Self {
        PhaseConfig {
            phases: phases.into_iter().map(wrap_phase).collect(),
            indices: None,
        }
    }

    /// A quantized configuration built from indices into `spec.phase_set()`.
    pub fn from_indices(spec: &ArraySpec, indices: Vec<usize>) -> Result<Self> {
        if indices.len() != spec.len() {
            return Err(Error::contract(format!(
                "{} indices for {} elements",
                indices.len(),
                spec.len()
            )));
        }
        let set = spec.phase_set();
        let phases = indices
            .iter()
            .map(|&i| {
                set.get(i)
                    .copied()
                    .ok_or_else(|| Error::domain(format!("phase index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PhaseConfig {
            phases,
            indices: Some(indices),
        })
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn quantized_indices(&self) -> Option<&[usize]> {
        self.indices.as_deref()
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_phase(phase: f64) -> f64 {
    let w = phase.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Shortest distance between two phases on the circle, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Kronecker product `a_x(θ) ⊗ a_y(φ)` laid out row-major. The mask is not
/// applied.
pub fn steering_vector(spec: &ArraySpec, dir: &Direction) -> ComplexVector {
    let (sx, sy) = dir.sines();
    let scale = TAU * spec.delta;
    let ax: Vec<Complex64> = (0..spec.nx)
        .map(|k| Complex64::from_polar(1.0, scale * k as f64 * sx))
        .collect();
    let ay: Vec<Complex64> = (0..spec.ny)
        .map(|l| Complex64::from_polar(1.0, scale * l as f64 * sy))
        .collect();
    ax.iter()
        .flat_map(|x| ay.iter().map(move |y| x * y))
        .collect()
}

/// `hᴴ Φ g`, with absorbing elements contributing nothing.
pub fn received_signal(
    spec: &ArraySpec,
    config: &PhaseConfig,
    tx: &Direction,
    rx: &Direction,
) -> Result<Complex64> {
    let g = steering_vector(spec, tx);
    let h = steering_vector(spec, rx);
    received_signal_with(spec, config, &g, &h)
}

/// Same as [`received_signal`] with precomputed TX/RX steering vectors.
pub fn received_signal_with(
    spec: &ArraySpec,
    config: &PhaseConfig,
    g: &[Complex64],
    h: &[Complex64],
) -> Result<Complex64> {
    let n = spec.len();
    if config.len() != n || g.len() != n || h.len() != n {
        return Err(Error::contract(format!(
            "config/steering lengths ({}, {}, {}) do not match {} elements",
            config.len(),
            g.len(),
            h.len(),
            n
        )));
    }
    Ok(spec
        .mask
        .iter()
        .zip(config.phases.iter())
        .zip(g.iter().zip(h.iter()))
        .filter(|((&active, _), _)| active)
        .map(|((_, &phi), (g, h))| h.conj() * Complex64::from_polar(1.0, phi) * g)
        .sum())
}

/// Conjugate beamforming toward `beam` with the TX phase compensated:
/// `φ_k = arg h_k(beam) − arg g_k(tx)`.
pub fn ideal_config(spec: &ArraySpec, tx: &Direction, beam: &Direction) -> PhaseConfig {
    PhaseConfig::continuous(
        spec.steering_phase(beam)
            .zip(spec.steering_phase(tx))
            .map(|(h, g)| h - g)
            .collect(),
    )
}

/// Beam steering that ignores the TX position, `φ_k = arg h_k(beam)`. The
/// resulting main lobe is displaced by the TX incidence angle.
pub fn uncompensated_config(spec: &ArraySpec, beam: &Direction) -> PhaseConfig {
    PhaseConfig::continuous(spec.steering_phase(beam).collect())
}

/// Round every phase to the nearest member of the phase set (circular
/// distance, lower index on ties).
pub fn quantize_config(spec: &ArraySpec, config: &PhaseConfig) -> PhaseConfig {
    let set = spec.phase_set();
    let (phases, indices) = config
        .phases
        .iter()
        .map(|&phi| {
            let idx = nearest_phase_index(set, phi);
            (set[idx], idx)
        })
        .unzip();
    PhaseConfig {
        phases,
        indices: Some(indices),
    }
}

fn nearest_phase_index(set: &[f64], phi: f64) -> usize {
    // Distances within TIE_EPS of each other are treated as equal.
    const TIE_EPS: f64 = 1e-12;
    let mut best = 0;
    let mut best_dist = circular_distance(phi, set[0]);
    for (i, &q) in set.iter().enumerate().skip(1) {
        let d = circular_distance(phi, q);
        if d < best_dist - TIE_EPS {
            best = i;
            best_dist = d;
        }
    }
    best
}

/// Gain lost to phase quantization at the steered direction, in dB (≤ 0).
pub fn quantization_loss_db(spec: &ArraySpec, tx: &Direction, beam: &Direction) -> f64 {
    let ideal = ideal_config(spec, tx, beam);
    let quantized = quantize_config(spec, &ideal);
    let g = steering_vector(spec, tx);
    let h = steering_vector(spec, beam);
    let y_ideal = received_signal_with(spec, &ideal, &g, &h)
        .expect("configs built from spec")
        .norm();
    let y_quant = received_signal_with(spec, &quantized, &g, &h)
        .expect("configs built from spec")
        .norm();
    if y_ideal == 0.0 {
        return 0.0;
    }
    (20.0 * (y_quant / y_ideal).log10()).min(0.0)
}

/// Worst-case per-element loss bound for a uniform set of `levels` phases:
/// `20·log10(cos(π / levels))`.
pub fn uniform_quantization_bound_db(levels: usize) -> f64 {
    20.0 * (PI / levels as f64).cos().log10()
}
