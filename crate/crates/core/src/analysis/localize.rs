use crate::array::Direction;
use crate::dataset::BeampatternTable;

/// Estimated beam for one table rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoaEstimate {
    pub theta_r: f64,
    pub beam: Direction,
    pub power_dbm: f64,
}

/// Angle-of-arrival fingerprinting: for each rotation column, the beam with
/// the strongest RSRP (lowest row on ties).
pub fn localize_aoa(table: &BeampatternTable) -> Vec<AoaEstimate> {
    (0..table.n_cols())
        .map(|c| {
            let best = (0..table.n_rows()).fold(0, |best, r| {
                if table.get(r, c) > table.get(best, c) {
                    r
                } else {
                    best
                }
            });
            AoaEstimate {
                theta_r: table.rotations()[c],
                beam: table.beams()[best],
                power_dbm: table.get(best, c),
            }
        })
        .collect()
}
