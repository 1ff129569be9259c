//! `risbeam` command-line front end.

mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "RISBEAM_OUT_DIR";

#[derive(Parser)]
#[command(name = "risbeam", version, about = "RIS beam-steering simulator and dataset analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the beam-steering codebook and export it as CSV.
    Codebook(CampaignArgs),
    /// Simulate a chamber campaign and write the dataset CSV.
    Simulate(SimulateArgs),
    /// Run analyses on a beampattern or absorption table.
    Analyze(AnalyzeArgs),
    /// Train the MLP surrogate on a beampattern table.
    Train(TrainArgs),
    /// Evaluate a trained surrogate.
    Predict(PredictArgs),
}

#[derive(Args)]
struct CampaignArgs {
    /// Campaign config file (TOML). Defaults apply to missing keys.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config and the environment.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Override the campaign seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DatasetKind {
    Beampattern,
    Absorption,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    campaign: CampaignArgs,
    #[arg(long, value_enum, default_value = "beampattern")]
    dataset: DatasetKind,
    /// Disable measurement noise.
    #[arg(long)]
    noise_free: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Table file in either dataset schema.
    table: PathBuf,
    /// Column mapping file for foreign layouts.
    #[arg(long)]
    mapping: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Savitzky-Golay smoothing of every pattern.
    #[arg(long)]
    smooth: bool,
    #[arg(long, default_value_t = 7)]
    window: usize,
    #[arg(long, default_value_t = 4)]
    order: usize,
    /// Half-power beamwidth.
    #[arg(long)]
    hpbw: bool,
    /// Exponential fit of beamwidth against subarray side (absorption).
    #[arg(long)]
    fit: bool,
    /// Initial (a, b, c) for the fit.
    #[arg(long, value_parser = parse_triple, default_value = "50,-0.1,0")]
    fit_init: (f64, f64, f64),
    /// Beam of maximum power per rotation (beampattern).
    #[arg(long)]
    localize: bool,
    /// RX elevation used to score localization.
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    rx_elevation: f64,
    /// HPI reconstruction of the 3D pattern.
    #[arg(long)]
    reconstruct: bool,
    /// Elevation of the pattern peak; defaults to the selected beam's.
    #[arg(long, allow_hyphen_values = true)]
    tilt: Option<f64>,
    /// Beam `az,el` for row-wise analyses; defaults to the strongest beam at
    /// the rotation nearest 0°.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    beam: Option<(f64, f64)>,
    /// Beam elevation of the azimuth cut (absorption); defaults to the peak's.
    #[arg(long, allow_hyphen_values = true)]
    elevation: Option<f64>,
    /// Also render SVG line plots.
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct TrainArgs {
    /// Beampattern table file.
    table: PathBuf,
    #[arg(long)]
    mapping: Option<PathBuf>,
    /// Model output file.
    #[arg(short, long, default_value = "model.txt")]
    out: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 750)]
    epochs: usize,
    #[arg(long, default_value_t = 100)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    learning_rate: f64,
    #[arg(long, default_value_t = 3)]
    hidden_layers: usize,
    #[arg(long, default_value_t = 16)]
    hidden_width: usize,
    #[arg(long, default_value_t = 0.8)]
    split: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the per-epoch training loss as CSV.
    #[arg(long)]
    loss_csv: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Model file written by `train`.
    model: PathBuf,
    /// Predict every cell of this beampattern table and score against it.
    #[arg(long, conflicts_with = "angles")]
    table: Option<PathBuf>,
    #[arg(long)]
    mapping: Option<PathBuf>,
    /// Query `theta_n,phi_n,theta_r`; repeatable.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    angles: Vec<(f64, f64, f64)>,
    /// Predictions CSV; printed to stdout when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn parse_floats(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != n || v.iter().any(|x| !x.is_finite()) {
        return Err(format!("expected {n} comma-separated finite numbers"));
    }
    Ok(v)
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    parse_floats(s, 2).map(|v| (v[0], v[1]))
}

fn parse_triple(s: &str) -> Result<(f64, f64, f64), String> {
    parse_floats(s, 3).map(|v| (v[0], v[1], v[2]))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Codebook(a) => commands::codebook(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Analyze(a) => commands::analyze(&a),
        Command::Train(a) => commands::train(&a),
        Command::Predict(a) => commands::predict(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
