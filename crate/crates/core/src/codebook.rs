//! Beam-steering codebooks and absorption-mode subarray masks.
//!
//! Entries are ordered azimuth-major: for each azimuth (ascending) every
//! elevation (ascending) is listed, so elevation varies fastest. The dataset
//! row order `(-90°; -45°), (-90°; -42°), …` follows the same layout.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::array::{
    ideal_config, quantize_config, uncompensated_config, ArraySpec, Direction, PhaseConfig,
};
use crate::error::{Error, Result};

/// Subarray sides used by the absorption campaign (4, 16, 64, 100 elements).
pub const ABSORPTION_SIDES: [usize; 4] = [2, 4, 8, 10];

/// Inclusive integer-degree range `min, min + step, …, max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngleRange {
    min: i32,
    max: i32,
    step: i32,
}

impl AngleRange {
    pub fn new(min: i32, max: i32, step: i32) -> Result<Self> {
        if step <= 0 {
            return Err(Error::domain(format!("grid step must be > 0, got {step}")));
        }
        if min > max {
            return Err(Error::domain(format!("grid min {min} exceeds max {max}")));
        }
        if (max - min) % step != 0 {
            return Err(Error::domain(format!(
                "grid span {min}..{max} is not a multiple of step {step}"
            )));
        }
        if min < -90 || max > 90 {
            return Err(Error::domain(format!("grid {min}..{max} leaves [-90, 90]")));
        }
        Ok(AngleRange { min, max, step })
    }

    pub fn min(&self) -> i32 {
        self.min
    }

    pub fn max(&self) -> i32 {
        self.max
    }

    pub fn step(&self) -> i32 {
        self.step
    }

    pub fn len(&self) -> usize {
        ((self.max - self.min) / self.step) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> impl Iterator<Item = i32> + Clone {
        let (min, step) = (self.min, self.step);
        (0..self.len() as i32).map(move |i| min + i * step)
    }

    /// Position of `deg` on the grid, if it is exactly a grid point.
    pub fn position(&self, deg: f64) -> Option<usize> {
        if deg.fract() != 0.0 {
            return None;
        }
        let d = deg as i32;
        if d < self.min || d > self.max || (d - self.min) % self.step != 0 {
            return None;
        }
        Some(((d - self.min) / self.step) as usize)
    }

    /// Grid point closest to `deg`; the lower one on ties.
    pub fn nearest(&self, deg: f64) -> i32 {
        self.values()
            .min_by(|a, b| {
                let da = (*a as f64 - deg).abs();
                let db = (*b as f64 - deg).abs();
                da.partial_cmp(&db).unwrap().then(a.cmp(b))
            })
            .expect("grid is never empty")
    }
}

impl fmt::Display for AngleRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.step)
    }
}

impl FromStr for AngleRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::domain(format!("expected min:max:step, got `{s}`")));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<i32>()
                .map_err(|_| Error::domain(format!("non-integer grid bound `{p}`")))
        };
        AngleRange::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodebookGrid {
    pub azimuth: AngleRange,
    pub elevation: AngleRange,
}

impl CodebookGrid {
    /// Azimuth `[-90, 90]`, elevation `[-45, 45]`, 3° steps: 61 × 31 beams.
    pub fn standard() -> Self {
        CodebookGrid {
            azimuth: AngleRange::new(-90, 90, 3).unwrap(),
            elevation: AngleRange::new(-45, 45, 3).unwrap(),
        }
    }

    /// Both axes over `[-90, 90]` in 3° steps: 61 × 61 beams.
    pub fn extended() -> Self {
        CodebookGrid {
            azimuth: AngleRange::new(-90, 90, 3).unwrap(),
            elevation: AngleRange::new(-90, 90, 3).unwrap(),
        }
    }

    pub fn len(&self) -> usize {
        self.azimuth.len() * self.elevation.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Beam directions in codebook order.
    pub fn beams(&self) -> impl Iterator<Item = Direction> + '_ {
        self.azimuth.values().flat_map(move |az| {
            self.elevation
                .values()
                .map(move |el| Direction::new(az as f64, el as f64).expect("grid within ±90"))
        })
    }

    /// Row index of `beam`, if it is a grid point.
    pub fn index_of(&self, beam: &Direction) -> Option<usize> {
        let i = self.azimuth.position(beam.azimuth_deg())?;
        let j = self.elevation.position(beam.elevation_deg())?;
        Some(i * self.elevation.len() + j)
    }
}

impl Default for CodebookGrid {
    fn default() -> Self {
        Self::standard()
    }
}

/// How codebook phases treat the incident wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseMode {
    /// Conjugate beamforming that cancels the TX steering phase.
    #[default]
    TxCompensated,
    /// Steering toward the beam only, ignoring the TX position.
    Uncompensated,
}

impl fmt::Display for PhaseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhaseMode::TxCompensated => "tx-compensated",
            PhaseMode::Uncompensated => "uncompensated",
        })
    }
}

impl FromStr for PhaseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tx-compensated" => Ok(PhaseMode::TxCompensated),
            "uncompensated" => Ok(PhaseMode::Uncompensated),
            other => Err(Error::domain(format!(
                "unknown phase mode `{other}` (expected tx-compensated or uncompensated)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodebookEntry {
    pub beam: Direction,
    pub config: PhaseConfig,
}

/// A quantized configuration per grid beam, for one array and TX position.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    spec: ArraySpec,
    tx: Direction,
    mode: PhaseMode,
    grid: CodebookGrid,
    entries: Vec<CodebookEntry>,
}

/// Build the codebook: one quantized configuration per grid point.
pub fn build_codebook(
    spec: &ArraySpec,
    tx: &Direction,
    grid: &CodebookGrid,
    mode: PhaseMode,
) -> Codebook {
    let beams: Vec<Direction> = grid.beams().collect();
    let entries = beams
        .into_par_iter()
        .map(|beam| {
            let continuous = match mode {
                PhaseMode::TxCompensated => ideal_config(spec, tx, &beam),
                PhaseMode::Uncompensated => uncompensated_config(spec, &beam),
            };
            CodebookEntry {
                beam,
                config: quantize_config(spec, &continuous),
            }
        })
        .collect();
    Codebook {
        spec: spec.clone(),
        tx: *tx,
        mode,
        grid: *grid,
        entries,
    }
}

impl Codebook {
    pub fn spec(&self) -> &ArraySpec {
        &self.spec
    }

    pub fn tx(&self) -> &Direction {
        &self.tx
    }

    pub fn mode(&self) -> PhaseMode {
        self.mode
    }

    pub fn grid(&self) -> &CodebookGrid {
        &self.grid
    }

    pub fn entries(&self) -> &[CodebookEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exact-match lookup of the configuration stored for `beam`.
    pub fn lookup(&self, beam: &Direction) -> Result<&PhaseConfig> {
        self.grid
            .index_of(beam)
            .map(|i| &self.entries[i].config)
            .ok_or_else(|| Error::NotFound {
                what: format!("beam {beam} on grid az {} el {}", self.grid.azimuth, self.grid.elevation),
                nearest: vec![format!(
                    "({}°, {}°)",
                    self.grid.azimuth.nearest(beam.azimuth_deg()),
                    self.grid.elevation.nearest(beam.elevation_deg())
                )],
            })
    }

    /// Write the codebook as CSV: two `#` metadata lines, then a
    /// `theta_n,phi_n,idx_0,…,idx_{N-1}` header and one row per beam holding
    /// phase-set indices.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# risbeam codebook v1")?;
        writeln!(
            out,
            "# nx={},ny={},tx_azimuth={},tx_elevation={},mode={},azimuth={},elevation={}",
            self.spec.nx(),
            self.spec.ny(),
            self.tx.azimuth_deg(),
            self.tx.elevation_deg(),
            self.mode,
            self.grid.azimuth,
            self.grid.elevation
        )?;
        let mut header = String::from("theta_n,phi_n");
        for k in 0..self.spec.len() {
            header.push_str(&format!(",idx_{k}"));
        }
        writeln!(out, "{header}")?;
        for entry in &self.entries {
            let mut line = format!("{},{}", entry.beam.azimuth_deg(), entry.beam.elevation_deg());
            let indices = entry
                .config
                .quantized_indices()
                .expect("codebook configs are quantized");
            for i in indices {
                line.push(',');
                line.push_str(&i.to_string());
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Parse a codebook export. `spec` supplies the phase set and mask; its
    /// dimensions must match the file.
    pub fn read_csv<R: BufRead>(input: R, spec: &ArraySpec) -> Result<Self> {
        let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((n, Ok(l))) => Ok((n, l)),
                Some((n, Err(e))) => Err(Error::parse(n, None, e.to_string())),
                None => Err(Error::parse(0, None, format!("missing {what}"))),
            }
        };
        let (n, magic) = next("version line")?;
        if magic.trim() != "# risbeam codebook v1" {
            return Err(Error::parse(n, None, "not a risbeam codebook v1 file"));
        }
        let (n, meta) = next("metadata line")?;
        let meta = parse_meta(n, &meta)?;
        let field = |key: &str| -> Result<&str> {
            meta.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::parse(n, Some(key), "missing metadata key"))
        };
        let num = |key: &str| -> Result<f64> {
            field(key)?
                .parse::<f64>()
                .map_err(|_| Error::parse(n, Some(key), "non-numeric metadata value"))
        };
        let (nx, ny) = (num("nx")? as usize, num("ny")? as usize);
        if nx != spec.nx() || ny != spec.ny() {
            return Err(Error::contract(format!(
                "codebook is {nx}×{ny}, array is {}×{}",
                spec.nx(),
                spec.ny()
            )));
        }
        let tx = Direction::new(num("tx_azimuth")?, num("tx_elevation")?)?;
        let mode: PhaseMode = field("mode")?.parse()?;
        let grid = CodebookGrid {
            azimuth: field("azimuth")?.parse()?,
            elevation: field("elevation")?.parse()?,
        };

        let (n, header) = next("header row")?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let expected = 2 + spec.len();
        if cols.len() != expected || cols[0] != "theta_n" || cols[1] != "phi_n" {
            return Err(Error::parse(n, None, "malformed codebook header"));
        }
        for (k, c) in cols[2..].iter().enumerate() {
            if *c != format!("idx_{k}") {
                return Err(Error::parse(n, Some(c), format!("expected idx_{k}")));
            }
        }

        let mut entries = Vec::with_capacity(grid.len());
        let expected_beams: Vec<Direction> = grid.beams().collect();
        for (n, line) in lines {
            let line = line.map_err(|e| Error::parse(n, None, e.to_string()))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != expected {
                return Err(Error::parse(
                    n,
                    None,
                    format!("expected {expected} cells, found {}", cells.len()),
                ));
            }
            let angle = |i: usize| -> Result<f64> {
                cells[i]
                    .parse::<f64>()
                    .map_err(|_| Error::parse(n, Some(cols[i]), "non-numeric angle"))
            };
            let beam = Direction::new(angle(0)?, angle(1)?)?;
            match expected_beams.get(entries.len()) {
                Some(b) if *b == beam => {}
                _ => {
                    return Err(Error::parse(
                        n,
                        None,
                        format!("beam {beam} out of codebook order"),
                    ))
                }
            }
            let indices = cells[2..]
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    c.parse::<usize>()
                        .map_err(|_| Error::parse(n, Some(cols[k + 2]), "non-integer index"))
                })
                .collect::<Result<Vec<_>>>()?;
            let config = PhaseConfig::from_indices(spec, indices)
                .map_err(|e| Error::parse(n, None, e.to_string()))?;
            entries.push(CodebookEntry { beam, config });
        }
        if entries.len() != grid.len() {
            return Err(Error::parse(
                0,
                None,
                format!("expected {} entries, found {}", grid.len(), entries.len()),
            ));
        }
        Ok(Codebook {
            spec: spec.clone(),
            tx,
            mode,
            grid,
            entries,
        })
    }

    pub fn load(path: &Path, spec: &ArraySpec) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(BufReader::new(file), spec)
    }
}

fn parse_meta(line_no: usize, line: &str) -> Result<Vec<(String, String)>> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| Error::parse(line_no, None, "expected `#` metadata line"))?;
    body.split(',')
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_owned(), v.trim().to_owned()))
                .ok_or_else(|| Error::parse(line_no, None, format!("bad metadata pair `{kv}`")))
        })
        .collect()
}

/// Subarray spec with the top-left `side × side` block active.
pub fn subarray_mask(spec: &ArraySpec, side: usize) -> Result<ArraySpec> {
    if side == 0 || side > spec.nx() || side > spec.ny() {
        return Err(Error::domain(format!(
            "{side}×{side} subarray does not fit a {}×{} array",
            spec.nx(),
            spec.ny()
        )));
    }
    let ny = spec.ny();
    let mask = (0..spec.len())
        .map(|idx| idx / ny < side && idx % ny < side)
        .collect();
    spec.clone().with_mask(mask)
}

/// Absorption-mode specs for subarray sides 2, 4, 8 and 10.
pub fn absorption_masks(spec: &ArraySpec) -> Result<Vec<ArraySpec>> {
    absorption_masks_for(spec, &ABSORPTION_SIDES)
}

pub fn absorption_masks_for(spec: &ArraySpec, sides: &[usize]) -> Result<Vec<ArraySpec>> {
    sides.iter().map(|&s| subarray_mask(spec, s)).collect()
}
