//! Versioned text format for trained models.
//!
//! ```text
//! risbeam-mlp v1
//! activation tanh
//! dims 3 16 16 16 1
//! input_min <θ_n> <φ_n> <θ_r>
//! input_max <θ_n> <φ_n> <θ_r>
//! target_mean <v>
//! target_std <v>
//! weights 0 <outputs × inputs values, row-major>
//! bias 0 <outputs values>
//! ...one weights/bias pair per layer...
//! end
//! ```
//!
//! Floats carry 17 significant digits, so save/load is exact and the bytes
//! are stable across repeated round trips.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{Activation, Dense, MlpModel, Network, INPUT_DIM};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_HEADER: &str = "risbeam-mlp v1";

fn fmt_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(" ")
}

impl MlpModel {
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{MODEL_FORMAT_HEADER}")?;
        writeln!(out, "activation {}", self.network.activation.name())?;
        let mut dims = vec![self.network.input_dim()];
        dims.extend(self.network.layers.iter().map(|l| l.outputs));
        let dims: Vec<String> = dims.iter().map(usize::to_string).collect();
        writeln!(out, "dims {}", dims.join(" "))?;
        writeln!(out, "input_min {}", fmt_floats(&self.input_min))?;
        writeln!(out, "input_max {}", fmt_floats(&self.input_max))?;
        writeln!(out, "target_mean {}", fmt_floats(&[self.target_mean]))?;
        writeln!(out, "target_std {}", fmt_floats(&[self.target_std]))?;
        for (i, layer) in self.network.layers.iter().enumerate() {
            writeln!(out, "weights {i} {}", fmt_floats(&layer.weights))?;
            writeln!(out, "bias {i} {}", fmt_floats(&layer.bias))?;
        }
        writeln!(out, "end")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_text(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let mut next = |expect: &str| -> Result<(usize, Vec<String>)> {
            match lines.next() {
                Some((i, Ok(l))) => {
                    let toks: Vec<String> = l.split_whitespace().map(str::to_owned).collect();
                    if toks.first().map(String::as_str) != Some(expect) {
                        return Err(Error::ModelFormat(format!(
                            "line {}: expected `{expect}`",
                            i + 1
                        )));
                    }
                    Ok((i + 1, toks))
                }
                Some((i, Err(e))) => Err(Error::ModelFormat(format!("line {}: {e}", i + 1))),
                None => Err(Error::ModelFormat(format!("truncated before `{expect}`"))),
            }
        };
        let floats = |line: usize, toks: &[String], n: usize| -> Result<Vec<f64>> {
            if toks.len() != n {
                return Err(Error::ModelFormat(format!(
                    "line {line}: expected {n} values, found {}",
                    toks.len()
                )));
            }
            toks.iter()
                .map(|t| {
                    t.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::ModelFormat(format!("line {line}: bad number `{t}`")))
                })
                .collect()
        };

        match lines_header(&mut next)? {
            h if h == MODEL_FORMAT_HEADER => {}
            h => return Err(Error::ModelFormat(format!("unsupported header `{h}`"))),
        }
        let (n, toks) = next("activation")?;
        let activation = toks
            .get(1)
            .and_then(|a| Activation::from_name(a))
            .ok_or_else(|| Error::ModelFormat(format!("line {n}: unknown activation")))?;
        let (n, toks) = next("dims")?;
        let dims = toks[1..]
            .iter()
            .map(|t| t.parse::<usize>().ok().filter(|&d| d > 0))
            .collect::<Option<Vec<_>>>()
            .filter(|d| d.len() >= 2 && d[0] == INPUT_DIM && d[d.len() - 1] == 1)
            .ok_or_else(|| Error::ModelFormat(format!("line {n}: bad layer dims")))?;
        let (n, toks) = next("input_min")?;
        let input_min: [f64; INPUT_DIM] = floats(n, &toks[1..], INPUT_DIM)?.try_into().unwrap();
        let (n, toks) = next("input_max")?;
        let input_max: [f64; INPUT_DIM] = floats(n, &toks[1..], INPUT_DIM)?.try_into().unwrap();
        let (n, toks) = next("target_mean")?;
        let target_mean = floats(n, &toks[1..], 1)?[0];
        let (n, toks) = next("target_std")?;
        let target_std = floats(n, &toks[1..], 1)?[0];

        let mut layers = Vec::with_capacity(dims.len() - 1);
        for (i, w) in dims.windows(2).enumerate() {
            let index = |n: usize, toks: &[String]| -> Result<()> {
                if toks.get(1).map(String::as_str) != Some(i.to_string().as_str()) {
                    return Err(Error::ModelFormat(format!("line {n}: expected layer {i}")));
                }
                Ok(())
            };
            let (n, toks) = next("weights")?;
            index(n, &toks)?;
            let weights = floats(n, &toks[2..], w[0] * w[1])?;
            let (n, toks) = next("bias")?;
            index(n, &toks)?;
            let bias = floats(n, &toks[2..], w[1])?;
            layers.push(Dense {
                inputs: w[0],
                outputs: w[1],
                weights,
                bias,
            });
        }
        next("end")?;
        Ok(MlpModel {
            network: Network { layers, activation },
            input_min,
            input_max,
            target_mean,
            target_std,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_text(BufReader::new(file))
    }
}

fn lines_header(next: &mut impl FnMut(&str) -> Result<(usize, Vec<String>)>) -> Result<String> {
    let (_, toks) = next("risbeam-mlp")?;
    Ok(toks.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogate::MlpSpec;

    fn model() -> MlpModel {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        MlpModel {
            network: Network::random(&MlpSpec::default().dims(), Activation::Tanh, 0.7, &mut rng),
            input_min: [-90.0, -45.0, -90.0],
            input_max: [90.0, 45.0, 90.0],
            target_mean: -85.123456789,
            target_std: 5.5,
        }
    }

    fn bytes(m: &MlpModel) -> Vec<u8> {
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        buf
    }

    #[test]
    fn exact_round_trip() {
        let m = model();
        let b = bytes(&m);
        let back = MlpModel::read_text(b.as_slice()).unwrap();
        assert_eq!(back, m);
        assert_eq!(bytes(&back), b);
    }

    #[test]
    fn rejects_corruption() {
        let text = String::from_utf8(bytes(&model())).unwrap();
        let bad_version = text.replacen("v1", "v9", 1);
        assert!(matches!(
            MlpModel::read_text(bad_version.as_bytes()),
            Err(Error::ModelFormat(_))
        ));
        let truncated: String = text.lines().take(8).collect::<Vec<_>>().join("\n");
        assert!(matches!(
            MlpModel::read_text(truncated.as_bytes()),
            Err(Error::ModelFormat(_))
        ));
        let garbled = text.replacen("target_std 5.5", "target_std x5.5", 1);
        assert!(MlpModel::read_text(garbled.as_bytes()).is_err());
    }
}
