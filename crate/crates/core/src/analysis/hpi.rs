//! Horizontal Projection Interpolation of a 3D pattern from one azimuth cut.
//!
//! A square aperture has the same pattern shape in both principal planes, so
//! the elevation cut is taken to be the azimuth cut re-centred on the
//! electrical tilt. The full pattern combines both cuts in dB:
//! `P(θ, φ) = P_az(θ) + (P_el(φ) − P_peak)`, floored at the noise floor.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Pattern3D {
    pub azimuth_deg: Vec<f64>,
    pub elevation_deg: Vec<f64>,
    /// Row-major: one row per elevation, one column per azimuth.
    pub power_dbm: Vec<f64>,
}

impl Pattern3D {
    pub fn get(&self, elevation_idx: usize, azimuth_idx: usize) -> f64 {
        self.power_dbm[elevation_idx * self.azimuth_deg.len() + azimuth_idx]
    }

    pub fn elevation_row(&self, elevation_idx: usize) -> &[f64] {
        let n = self.azimuth_deg.len();
        &self.power_dbm[elevation_idx * n..(elevation_idx + 1) * n]
    }

    /// CSV grid: header `phi\theta,<azimuths>`, one line per elevation.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = self.azimuth_deg.iter().map(|a| a.to_string()).collect();
        writeln!(out, "phi\\theta,{}", header.join(","))?;
        for (i, el) in self.elevation_deg.iter().enumerate() {
            let cells: Vec<String> = self.elevation_row(i).iter().map(|p| format!("{p:.6}")).collect();
            writeln!(out, "{el},{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Linear interpolation of a sampled cut; `None` outside its span.
fn interpolate(angles: &[f64], power: &[f64], at: f64) -> Option<f64> {
    if at < angles[0] || at > angles[angles.len() - 1] {
        return None;
    }
    let hi = angles.partition_point(|&a| a < at);
    if angles[hi] == at {
        return Some(power[hi]);
    }
    let lo = hi - 1;
    let t = (at - angles[lo]) / (angles[hi] - angles[lo]);
    Some(power[lo] + t * (power[hi] - power[lo]))
}

/// Reconstruct the pattern over `azimuth × elevation`, both gridded on the
/// cut's angles. `floor_dbm` defaults to the weakest sample of the cut.
pub fn hpi_reconstruct(
    angles_deg: &[f64],
    power_dbm: &[f64],
    tilt_deg: f64,
    floor_dbm: Option<f64>,
) -> Result<Pattern3D> {
    if angles_deg.len() != power_dbm.len() || angles_deg.len() < 2 {
        return Err(Error::contract("azimuth cut needs ≥ 2 matching angle/power samples"));
    }
    if angles_deg.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("cut angles must be strictly ascending"));
    }
    if power_dbm.iter().any(|p| !p.is_finite()) {
        return Err(Error::domain("non-finite power in cut"));
    }
    let (lo, hi) = (angles_deg[0], angles_deg[angles_deg.len() - 1]);
    if !(tilt_deg >= lo && tilt_deg <= hi) {
        return Err(Error::domain(format!(
            "tilt {tilt_deg}° outside elevation grid [{lo}°, {hi}°]"
        )));
    }
    let peak_idx = power_dbm
        .iter()
        .enumerate()
        .fold(0, |best, (i, &p)| if p > power_dbm[best] { i } else { best });
    let peak_angle = angles_deg[peak_idx];
    let peak = power_dbm[peak_idx];
    let floor = floor_dbm.unwrap_or_else(|| power_dbm.iter().copied().fold(f64::INFINITY, f64::min));

    let elevation_rel: Vec<f64> = angles_deg
        .iter()
        .map(|&phi| {
            interpolate(angles_deg, power_dbm, phi - tilt_deg + peak_angle)
                .map_or(floor - peak, |p| p - peak)
        })
        .collect();

    let mut power = Vec::with_capacity(angles_deg.len() * angles_deg.len());
    for rel in &elevation_rel {
        power.extend(power_dbm.iter().map(|&p| (p + rel).max(floor)));
    }
    Ok(Pattern3D {
        azimuth_deg: angles_deg.to_vec(),
        elevation_deg: angles_deg.to_vec(),
        power_dbm: power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cut() -> (Vec<f64>, Vec<f64>) {
        let angles: Vec<f64> = (-30..=30).map(|a| a as f64 * 3.0).collect();
        let power = angles
            .iter()
            .map(|a: &f64| (-60.0 - 0.01 * (a - 12.0).powi(2)).max(-90.0))
            .collect();
        (angles, power)
    }

    #[test]
    fn peak_and_tilt_slice_are_preserved() {
        let (angles, power) = cut();
        let tilt = -30.0;
        let p = hpi_reconstruct(&angles, &power, tilt, None).unwrap();
        let ti = angles.iter().position(|&a| a == tilt).unwrap();
        assert_eq!(p.elevation_row(ti), power.as_slice());
        let pi = angles.iter().position(|&a| a == 12.0).unwrap();
        assert_eq!(p.get(ti, pi), -60.0);
    }

    #[test]
    fn separable_pattern_is_a_fixed_point() {
        let (angles, power) = cut();
        let tilt = 6.0;
        let peak = -60.0;
        let floor = -90.0;
        // Separable pattern built from the cut and its re-centred copy.
        let shift = (tilt - 12.0) / 3.0;
        let n = angles.len() as i64;
        let mut expected = Vec::new();
        for i in 0..n {
            let src = i - shift as i64;
            let el = if (0..n).contains(&src) { power[src as usize] } else { floor };
            for p in &power {
                expected.push((p + (el - peak)).max(floor));
            }
        }
        let got = hpi_reconstruct(&angles, &power, tilt, Some(floor)).unwrap();
        for (a, b) in got.power_dbm.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn tilt_outside_grid() {
        let (angles, power) = cut();
        assert!(matches!(
            hpi_reconstruct(&angles, &power, 95.0, None),
            Err(Error::Domain(_))
        ));
    }
}
