//! Beampattern and absorption-mode tables and their CSV schema.
//!
//! Beampattern file:
//!
//! ```text
//! # theta_t=0
//! theta_n,phi_n,rot_-90,rot_-87,...,rot_90
//! -90,-45,-89.981234,...
//! ```
//!
//! Absorption file: same layout with `n_4,n_16,n_64,n_100` columns. Powers are
//! written with six decimals; the `# theta_t=` line is optional on read.
//! Blank lines and other comment lines are ignored.
//!
//! Files with different column names can be read through a [`ColumnMapping`]
//! of `canonical = source` lines, e.g. `rot_-90 = -90.0`.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::array::Direction;
use crate::error::{Error, Result};

/// Lowest power accepted in a table.
pub const POWER_SANITY_FLOOR_DBM: f64 = -200.0;

/// Round a power to the six-decimal resolution of the file format, so a table
/// survives a write/read cycle unchanged.
pub fn round_power(dbm: f64) -> f64 {
    (dbm * 1e6).round() / 1e6
}

/// A labelled slice of a table.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice<L> {
    pub labels: Vec<L>,
    pub values: Vec<f64>,
}

/// RSRP in dBm: one row per codebook beam, one column per table rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct BeampatternTable {
    beams: Vec<Direction>,
    rotations: Vec<f64>,
    power_dbm: Vec<f64>,
    theta_t: Option<f64>,
}

/// RSRP in dBm: one row per codebook beam, one column per active-element
/// count.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionTable {
    beams: Vec<Direction>,
    active_counts: Vec<usize>,
    power_dbm: Vec<f64>,
    theta_t: Option<f64>,
}

fn validate_beams(beams: &[Direction]) -> Result<()> {
    let mut seen = HashMap::with_capacity(beams.len());
    for (i, b) in beams.iter().enumerate() {
        let key = (b.azimuth_deg().to_bits(), b.elevation_deg().to_bits());
        if let Some(first) = seen.insert(key, i) {
            return Err(Error::domain(format!(
                "duplicate beam {b} at rows {first} and {i}"
            )));
        }
    }
    Ok(())
}

fn validate_power(power: &[f64], rows: usize, cols: usize) -> Result<()> {
    if power.len() != rows * cols {
        return Err(Error::contract(format!(
            "power matrix has {} cells, expected {rows}×{cols}",
            power.len()
        )));
    }
    if let Some(i) = power
        .iter()
        .position(|p| !p.is_finite() || *p < POWER_SANITY_FLOOR_DBM)
    {
        return Err(Error::domain(format!(
            "power {} at row {}, column {} is not a finite value ≥ {POWER_SANITY_FLOOR_DBM} dBm",
            power[i],
            i / cols,
            i % cols
        )));
    }
    Ok(())
}

fn nearest_beams(beams: &[Direction], target: &Direction) -> Vec<String> {
    let mut ranked: Vec<(f64, &Direction)> = beams
        .iter()
        .map(|b| {
            let d = (b.azimuth_deg() - target.azimuth_deg()).hypot(b.elevation_deg() - target.elevation_deg());
            (d, b)
        })
        .collect();
    ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    ranked.iter().take(3).map(|(_, b)| b.to_string()).collect()
}

fn nearest_labels<T: Copy + Into<f64> + ToString>(labels: &[T], target: f64) -> Vec<String> {
    let mut ranked: Vec<(f64, T)> = labels
        .iter()
        .map(|&l| ((l.into() - target).abs(), l))
        .collect();
    ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    ranked.iter().take(3).map(|(_, l)| l.to_string()).collect()
}

fn find_beam(beams: &[Direction], beam: &Direction) -> Result<usize> {
    beams.iter().position(|b| b == beam).ok_or_else(|| Error::NotFound {
        what: format!("beam {beam}"),
        nearest: nearest_beams(beams, beam),
    })
}

impl BeampatternTable {
    pub fn new(
        beams: Vec<Direction>,
        rotations: Vec<f64>,
        power_dbm: Vec<f64>,
        theta_t: Option<f64>,
    ) -> Result<Self> {
        if beams.is_empty() || rotations.is_empty() {
            return Err(Error::domain("table needs at least one beam and one rotation"));
        }
        if rotations.iter().any(|r| !r.is_finite()) || rotations.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("rotations must be finite and strictly ascending"));
        }
        validate_beams(&beams)?;
        validate_power(&power_dbm, beams.len(), rotations.len())?;
        Ok(BeampatternTable {
            beams,
            rotations: rotations.into_iter().map(|r| r + 0.0).collect(),
            power_dbm,
            theta_t: theta_t.map(|t| t + 0.0),
        })
    }

    pub fn beams(&self) -> &[Direction] {
        &self.beams
    }

    pub fn rotations(&self) -> &[f64] {
        &self.rotations
    }

    pub fn theta_t(&self) -> Option<f64> {
        self.theta_t
    }

    /// Row-major power matrix.
    pub fn power_dbm(&self) -> &[f64] {
        &self.power_dbm
    }

    pub fn n_rows(&self) -> usize {
        self.beams.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rotations.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.power_dbm[row * self.rotations.len() + col]
    }

    pub fn row_at(&self, row: usize) -> &[f64] {
        let n = self.rotations.len();
        &self.power_dbm[row * n..(row + 1) * n]
    }

    pub fn column_at(&self, col: usize) -> Vec<f64> {
        (0..self.beams.len()).map(|r| self.get(r, col)).collect()
    }

    /// Power received for `beam` across all rotations.
    pub fn row(&self, beam: &Direction) -> Result<Slice<f64>> {
        let r = find_beam(&self.beams, beam)?;
        Ok(Slice {
            labels: self.rotations.clone(),
            values: self.row_at(r).to_vec(),
        })
    }

    /// Power for every beam at rotation `theta_r`.
    pub fn column(&self, theta_r: f64) -> Result<Slice<Direction>> {
        let c = self
            .rotations
            .iter()
            .position(|&r| r == theta_r)
            .ok_or_else(|| Error::NotFound {
                what: format!("rotation {theta_r}°"),
                nearest: nearest_labels(&self.rotations, theta_r),
            })?;
        Ok(Slice {
            labels: self.beams.clone(),
            values: self.column_at(c),
        })
    }

    /// Same table with every row replaced by `f(row)`.
    pub fn map_rows(&self, mut f: impl FnMut(&[f64]) -> Result<Vec<f64>>) -> Result<Self> {
        let mut power = Vec::with_capacity(self.power_dbm.len());
        for r in 0..self.n_rows() {
            let row = f(self.row_at(r))?;
            if row.len() != self.n_cols() {
                return Err(Error::contract("row transform changed the row length"));
            }
            power.extend(row);
        }
        Self::new(self.beams.clone(), self.rotations.clone(), power, self.theta_t)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let labels: Vec<String> = self.rotations.iter().map(|r| format!("rot_{r}")).collect();
        write_table(out, self.theta_t, &labels, &self.beams, &self.power_dbm)
    }

    pub fn read_csv<R: BufRead>(input: R, mapping: Option<&ColumnMapping>) -> Result<Self> {
        let raw = read_table(input, mapping)?;
        let rotations = raw
            .labels
            .iter()
            .map(|(line, label)| {
                label
                    .strip_prefix("rot_")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::parse(*line, Some(label), "expected rot_<degrees>"))
            })
            .collect::<Result<Vec<_>>>()?;
        let header_line = raw.header_line;
        Self::new(raw.beams, rotations, raw.power, raw.theta_t)
            .map_err(|e| Error::parse(header_line, None, e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        save_with(path, |w| self.write_csv(w))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::load_mapped(path, None)
    }

    pub fn load_mapped(path: &Path, mapping: Option<&ColumnMapping>) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(BufReader::new(file), mapping)
    }
}

impl AbsorptionTable {
    pub fn new(
        beams: Vec<Direction>,
        active_counts: Vec<usize>,
        power_dbm: Vec<f64>,
        theta_t: Option<f64>,
    ) -> Result<Self> {
        if beams.is_empty() || active_counts.is_empty() {
            return Err(Error::domain("table needs at least one beam and one count"));
        }
        if active_counts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("active counts must be strictly ascending"));
        }
        if let Some(c) = active_counts.iter().find(|&&c| square_side(c).is_none()) {
            return Err(Error::domain(format!("non-square active count {c}")));
        }
        validate_beams(&beams)?;
        validate_power(&power_dbm, beams.len(), active_counts.len())?;
        Ok(AbsorptionTable {
            beams,
            active_counts,
            power_dbm,
            theta_t: theta_t.map(|t| t + 0.0),
        })
    }

    pub fn beams(&self) -> &[Direction] {
        &self.beams
    }

    pub fn active_counts(&self) -> &[usize] {
        &self.active_counts
    }

    /// Subarray side length for each column.
    pub fn sides(&self) -> Vec<usize> {
        self.active_counts
            .iter()
            .map(|&c| square_side(c).expect("validated"))
            .collect()
    }

    pub fn theta_t(&self) -> Option<f64> {
        self.theta_t
    }

    pub fn power_dbm(&self) -> &[f64] {
        &self.power_dbm
    }

    pub fn n_rows(&self) -> usize {
        self.beams.len()
    }

    pub fn n_cols(&self) -> usize {
        self.active_counts.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.power_dbm[row * self.active_counts.len() + col]
    }

    pub fn column_at(&self, col: usize) -> Vec<f64> {
        (0..self.beams.len()).map(|r| self.get(r, col)).collect()
    }

    pub fn row(&self, beam: &Direction) -> Result<Slice<usize>> {
        let r = find_beam(&self.beams, beam)?;
        let n = self.active_counts.len();
        Ok(Slice {
            labels: self.active_counts.clone(),
            values: self.power_dbm[r * n..(r + 1) * n].to_vec(),
        })
    }

    pub fn column(&self, count: usize) -> Result<Slice<Direction>> {
        let c = self
            .active_counts
            .iter()
            .position(|&n| n == count)
            .ok_or_else(|| Error::NotFound {
                what: format!("active count {count}"),
                nearest: {
                    let as_f: Vec<f64> = self.active_counts.iter().map(|&c| c as f64).collect();
                    nearest_labels(&as_f, count as f64)
                },
            })?;
        Ok(Slice {
            labels: self.beams.clone(),
            values: self.column_at(c),
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let labels: Vec<String> = self.active_counts.iter().map(|n| format!("n_{n}")).collect();
        write_table(out, self.theta_t, &labels, &self.beams, &self.power_dbm)
    }

    pub fn read_csv<R: BufRead>(input: R, mapping: Option<&ColumnMapping>) -> Result<Self> {
        let raw = read_table(input, mapping)?;
        let counts = raw
            .labels
            .iter()
            .map(|(line, label)| {
                let n = label
                    .strip_prefix("n_")
                    .and_then(|v| v.parse::<usize>().ok())
                    .ok_or_else(|| Error::parse(*line, Some(label), "expected n_<count>"))?;
                if square_side(n).is_none() {
                    return Err(Error::parse(*line, Some(label), "non-square active count"));
                }
                Ok(n)
            })
            .collect::<Result<Vec<_>>>()?;
        let header_line = raw.header_line;
        Self::new(raw.beams, counts, raw.power, raw.theta_t)
            .map_err(|e| Error::parse(header_line, None, e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        save_with(path, |w| self.write_csv(w))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::load_mapped(path, None)
    }

    pub fn load_mapped(path: &Path, mapping: Option<&ColumnMapping>) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(BufReader::new(file), mapping)
    }
}

/// Either dataset, as detected from the header of a file.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Beampattern(BeampatternTable),
    Absorption(AbsorptionTable),
}

impl Dataset {
    /// Load a file, choosing the schema from its third header column.
    pub fn load(path: &Path, mapping: Option<&ColumnMapping>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let header = text
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty() && !l.starts_with('#'))
            .ok_or_else(|| Error::parse(1, None, "empty file"))?;
        let third = header
            .split(',')
            .nth(2)
            .map(|c| mapping.map_or(c.trim(), |m| m.canonical(c.trim())))
            .unwrap_or("");
        if third.starts_with("n_") {
            AbsorptionTable::read_csv(text.as_bytes(), mapping).map(Dataset::Absorption)
        } else {
            BeampatternTable::read_csv(text.as_bytes(), mapping).map(Dataset::Beampattern)
        }
    }
}

/// Renames source columns to canonical ones before parsing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ColumnMapping {
    source_to_canonical: HashMap<String, String>,
}

impl ColumnMapping {
    /// Parse `canonical = source` lines. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut source_to_canonical = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (canonical, source) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, None, "expected `canonical = source`"))?;
            let (canonical, source) = (canonical.trim(), source.trim());
            if canonical.is_empty() || source.is_empty() {
                return Err(Error::parse(i + 1, None, "empty column name"));
            }
            if source_to_canonical
                .insert(source.to_owned(), canonical.to_owned())
                .is_some()
            {
                return Err(Error::parse(i + 1, Some(source), "source column mapped twice"));
            }
        }
        Ok(ColumnMapping { source_to_canonical })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn canonical<'a>(&'a self, source: &'a str) -> &'a str {
        self.source_to_canonical
            .get(source)
            .map(String::as_str)
            .unwrap_or(source)
    }
}

fn square_side(n: usize) -> Option<usize> {
    let s = (n as f64).sqrt().round() as usize;
    (s > 0 && s * s == n).then_some(s)
}

fn save_with(path: &Path, f: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> std::io::Result<()>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    f(&mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_table<W: Write>(
    mut out: W,
    theta_t: Option<f64>,
    labels: &[String],
    beams: &[Direction],
    power: &[f64],
) -> std::io::Result<()> {
    if let Some(t) = theta_t {
        writeln!(out, "# theta_t={t}")?;
    }
    writeln!(out, "theta_n,phi_n,{}", labels.join(","))?;
    let cols = labels.len();
    let mut line = String::new();
    for (r, beam) in beams.iter().enumerate() {
        line.clear();
        line.push_str(&format!("{},{}", beam.azimuth_deg(), beam.elevation_deg()));
        for p in &power[r * cols..(r + 1) * cols] {
            line.push_str(&format!(",{p:.6}"));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

struct RawTable {
    header_line: usize,
    theta_t: Option<f64>,
    /// (line, canonical label) for each data column.
    labels: Vec<(usize, String)>,
    beams: Vec<Direction>,
    power: Vec<f64>,
}

fn read_table<R: BufRead>(input: R, mapping: Option<&ColumnMapping>) -> Result<RawTable> {
    let mut theta_t = None;
    let mut header: Option<(usize, Vec<String>)> = None;
    let mut beams = Vec::new();
    let mut power = Vec::new();
    let mut seen = HashMap::new();

    for (i, line) in input.lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(|e| Error::parse(n, None, e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("theta_t=") {
                let t = v
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(n, Some("theta_t"), "non-numeric theta_t"))?;
                theta_t = Some(t);
            }
            continue;
        }
        let cells: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        let Some((_, cols)) = &header else {
            let cols: Vec<String> = cells
                .iter()
                .map(|c| mapping.map_or(*c, |m| m.canonical(c)).to_owned())
                .collect();
            if cols.len() < 3 || cols[0] != "theta_n" || cols[1] != "phi_n" {
                return Err(Error::parse(
                    n,
                    None,
                    "malformed header: expected theta_n,phi_n,<data columns>",
                ));
            }
            header = Some((n, cols));
            continue;
        };
        if cells.len() != cols.len() {
            return Err(Error::parse(
                n,
                None,
                format!("ragged row: expected {} cells, found {}", cols.len(), cells.len()),
            ));
        }
        let num = |j: usize| -> Result<f64> {
            cells[j]
                .parse::<f64>()
                .map_err(|_| Error::parse(n, Some(&cols[j]), format!("non-numeric cell `{}`", cells[j])))
        };
        let beam = Direction::new(num(0)?, num(1)?).map_err(|e| Error::parse(n, Some("theta_n"), e.to_string()))?;
        let key = (beam.azimuth_deg().to_bits(), beam.elevation_deg().to_bits());
        if let Some(first) = seen.insert(key, n) {
            return Err(Error::parse(
                n,
                None,
                format!("duplicate beam {beam} (first at line {first})"),
            ));
        }
        beams.push(beam);
        for (j, col) in cols.iter().enumerate().skip(2) {
            let p = num(j)?;
            if !p.is_finite() || p < POWER_SANITY_FLOOR_DBM {
                return Err(Error::parse(n, Some(col), format!("power {p} below sanity floor")));
            }
            power.push(p);
        }
    }
    let (header_line, cols) = header.ok_or_else(|| Error::parse(1, None, "missing header row"))?;
    if beams.is_empty() {
        return Err(Error::parse(header_line, None, "table has no data rows"));
    }
    Ok(RawTable {
        header_line,
        theta_t,
        labels: cols[2..].iter().map(|c| (header_line, c.clone())).collect(),
        beams,
        power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dir(az: f64, el: f64) -> Direction {
        Direction::new(az, el).unwrap()
    }

    fn small_table() -> BeampatternTable {
        BeampatternTable::new(
            vec![dir(-3.0, 0.0), dir(0.0, 0.0)],
            vec![-3.0, 0.0, 3.0],
            vec![-80.0, -70.5, -85.25, -60.0, -61.123456, -90.0],
            Some(0.0),
        )
        .unwrap()
    }

    fn to_string(t: &BeampatternTable) -> String {
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn writes_documented_layout() {
        let text = to_string(&small_table());
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# theta_t=0"));
        assert_eq!(lines.next(), Some("theta_n,phi_n,rot_-3,rot_0,rot_3"));
        assert_eq!(lines.next(), Some("-3,0,-80.000000,-70.500000,-85.250000"));
    }

    #[test]
    fn round_trip_exact() {
        let t = small_table();
        let back = BeampatternTable::read_csv(to_string(&t).as_bytes(), None).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn ragged_row_is_located() {
        let text = "theta_n,phi_n,rot_0,rot_3\n0,0,-60,-61\n3,0,-60\n";
        let err = BeampatternTable::read_csv(text.as_bytes(), None).unwrap_err();
        match err {
            Error::Parse { line, ref message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("ragged"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn non_numeric_cell_names_column() {
        let text = "theta_n,phi_n,rot_0,rot_3\n0,0,-60,abc\n";
        let err = BeampatternTable::read_csv(text.as_bytes(), None).unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column.as_deref(), Some("rot_3"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn duplicate_beam_rejected() {
        let text = "theta_n,phi_n,rot_0\n0,0,-60\n0,0,-61\n";
        assert!(matches!(
            BeampatternTable::read_csv(text.as_bytes(), None),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn malformed_header_rejected() {
        let text = "beam,phi_n,rot_0\n0,0,-60\n";
        assert!(BeampatternTable::read_csv(text.as_bytes(), None).is_err());
        let text = "theta_n,phi_n,rotation0\n0,0,-60\n";
        assert!(BeampatternTable::read_csv(text.as_bytes(), None).is_err());
        let text = "theta_n,phi_n,rot_3,rot_0\n0,0,-60,-60\n";
        assert!(BeampatternTable::read_csv(text.as_bytes(), None).is_err());
    }

    #[test]
    fn non_square_count_rejected() {
        let text = "theta_n,phi_n,n_4,n_50\n0,0,-60,-60\n";
        let err = AbsorptionTable::read_csv(text.as_bytes(), None).unwrap_err();
        assert!(err.to_string().contains("non-square active count"), "{err}");
    }

    #[test]
    fn below_sanity_floor_rejected() {
        let text = "theta_n,phi_n,rot_0\n0,0,-250\n";
        assert!(BeampatternTable::read_csv(text.as_bytes(), None).is_err());
    }

    #[test]
    fn slices_and_missing_keys() {
        let t = small_table();
        let row = t.row(&dir(0.0, 0.0)).unwrap();
        assert_eq!(row.values, vec![-60.0, -61.123456, -90.0]);
        assert_eq!(row.labels, vec![-3.0, 0.0, 3.0]);
        let col = t.column(3.0).unwrap();
        assert_eq!(col.values, vec![-85.25, -90.0]);
        let err = t.row(&dir(1.0, 0.0)).unwrap_err();
        assert!(err.to_string().contains("nearest"), "{err}");
        assert!(matches!(t.column(1.0), Err(Error::NotFound { .. })));
    }

    #[test]
    fn mapping_renames_columns() {
        let mapping = ColumnMapping::parse(
            "# real files use bare angles\ntheta_n = azimuth\nphi_n = elevation\nrot_0 = 0deg\n",
        )
        .unwrap();
        let text = "azimuth,elevation,0deg\n0,0,-60\n";
        let t = BeampatternTable::read_csv(text.as_bytes(), Some(&mapping)).unwrap();
        assert_eq!(t.rotations(), &[0.0]);
        assert!(ColumnMapping::parse("no equals sign").is_err());
    }

    #[test]
    fn round_power_is_stable_through_text() {
        for x in [-60.0000004999, -89.99999950001, -73.1234565, 0.0] {
            let r = round_power(x);
            let printed = format!("{r:.6}");
            assert_eq!(printed.parse::<f64>().unwrap(), r);
        }
    }
}
