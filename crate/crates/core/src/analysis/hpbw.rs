use crate::array::Direction;
use crate::dataset::AbsorptionTable;
use crate::error::{Error, Result};

/// `10·log10(1/2)`.
pub const HALF_POWER_DB: f64 = -3.010_299_956_639_812;

/// Half-power beamwidth in degrees of a sampled pattern.
///
/// From the global peak (first one on ties) the search walks outward to the
/// first sample strictly below `peak + HALF_POWER_DB` on each side and
/// interpolates the crossing linearly in (angle, dB).
pub fn hpbw(angles_deg: &[f64], power_dbm: &[f64]) -> Result<f64> {
    if angles_deg.len() != power_dbm.len() {
        return Err(Error::contract(format!(
            "{} angles for {} power samples",
            angles_deg.len(),
            power_dbm.len()
        )));
    }
    if angles_deg.len() < 3 {
        return Err(Error::domain("need at least 3 samples"));
    }
    if angles_deg.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("angles must be strictly ascending"));
    }
    if power_dbm.iter().any(|p| !p.is_finite()) {
        return Err(Error::domain("non-finite power sample"));
    }
    let peak = power_dbm
        .iter()
        .enumerate()
        .fold(0, |best, (i, &p)| if p > power_dbm[best] { i } else { best });
    let threshold = power_dbm[peak] + HALF_POWER_DB;

    let crossing = |below: usize, above: usize| -> f64 {
        let (a0, a1) = (angles_deg[above], angles_deg[below]);
        let (p0, p1) = (power_dbm[above], power_dbm[below]);
        a0 + (threshold - p0) * (a1 - a0) / (p1 - p0)
    };

    let left = (0..peak)
        .rev()
        .find(|&i| power_dbm[i] < threshold)
        .ok_or(Error::LobeTruncated { side: "lower" })?;
    let right = (peak + 1..power_dbm.len())
        .find(|&i| power_dbm[i] < threshold)
        .ok_or(Error::LobeTruncated { side: "upper" })?;
    Ok(crossing(right, right - 1) - crossing(left, left + 1))
}

/// Azimuth cut at a fixed beam elevation: `(azimuths, values)` sorted by
/// azimuth, taken from a per-beam column.
pub fn azimuth_cut(beams: &[Direction], values: &[f64], elevation_deg: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if beams.len() != values.len() {
        return Err(Error::contract("one value per beam required"));
    }
    let mut cut: Vec<(f64, f64)> = beams
        .iter()
        .zip(values)
        .filter(|(b, _)| b.elevation_deg() == elevation_deg)
        .map(|(b, &v)| (b.azimuth_deg(), v))
        .collect();
    if cut.is_empty() {
        return Err(Error::NotFound {
            what: format!("beam elevation {elevation_deg}°"),
            nearest: Vec::new(),
        });
    }
    cut.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(cut.into_iter().unzip())
}

/// HPBW of every absorption column along the azimuth cut at `elevation_deg`,
/// as `(subarray side, width)` pairs in column order.
pub fn hpbw_by_side(table: &AbsorptionTable, elevation_deg: f64) -> Result<Vec<(usize, f64)>> {
    table
        .sides()
        .into_iter()
        .enumerate()
        .map(|(c, side)| {
            let (angles, power) = azimuth_cut(table.beams(), &table.column_at(c), elevation_deg)?;
            Ok((side, hpbw(&angles, &power)?))
        })
        .collect()
}
