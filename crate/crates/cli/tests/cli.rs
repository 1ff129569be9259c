use std::path::Path;
use std::process::{Command, Output};

use risbeam::codebook::Codebook;
use risbeam::dataset::{AbsorptionTable, BeampatternTable};
use risbeam::surrogate::MlpModel;
use risbeam::ArraySpec;

fn risbeam(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_risbeam"))
        .args(args)
        .current_dir(dir)
        .env_remove("RISBEAM_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(o: Output) -> String {
    assert!(o.status.success(), "stdout: {}\nstderr: {}", stdout(&o), stderr(&o));
    stdout(&o)
}

fn report_value(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| {
            let mut it = l.split_whitespace();
            (it.next() == Some(key)).then(|| it.collect::<Vec<_>>().join(" "))
        })
        .unwrap_or_else(|| panic!("no `{key}` in:\n{out}"))
}

#[test]
fn codebook_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(risbeam(dir.path(), &["codebook"]));
    assert!(out.contains("1891 entries"), "{out}");
    let book = Codebook::load(&dir.path().join("codebook.csv"), &ArraySpec::new(10, 10).unwrap()).unwrap();
    assert_eq!(book.len(), 1891);

    std::fs::write(
        dir.path().join("ext.toml"),
        "[codebook]\nelevation_min = -90\nelevation_max = 90\n",
    )
    .unwrap();
    let out = ok(risbeam(dir.path(), &["codebook", "-c", "ext.toml"]));
    assert!(out.contains("3721 entries"), "{out}");
}

#[test]
fn invalid_config_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[codebook]\nazimuth_step = 0\n").unwrap();
    let o = risbeam(dir.path(), &["codebook", "--config", "bad.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("step"), "{}", stderr(&o));

    std::fs::write(dir.path().join("typo.toml"), "[array]\nnxx = 4\n").unwrap();
    let o = risbeam(dir.path(), &["codebook", "--config", "typo.toml"]);
    assert_eq!(o.status.code(), Some(2));

    let o = risbeam(dir.path(), &["simulate", "--dataset", "sideways"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_shapes_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    ok(risbeam(dir.path(), &["simulate", "--out-dir", "a"]));
    ok(risbeam(dir.path(), &["simulate", "--out-dir", "b"]));
    let a = std::fs::read(dir.path().join("a/beampattern.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/beampattern.csv")).unwrap();
    assert_eq!(a, b);
    let t = BeampatternTable::load(&dir.path().join("a/beampattern.csv")).unwrap();
    assert_eq!((t.n_rows(), t.n_cols()), (1891, 61));

    ok(risbeam(dir.path(), &["simulate", "--dataset", "absorption", "--out-dir", "a"]));
    let t = AbsorptionTable::load(&dir.path().join("a/absorption.csv")).unwrap();
    assert_eq!((t.n_rows(), t.n_cols()), (1891, 4));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_risbeam"))
        .args(["codebook"])
        .current_dir(dir.path())
        .env("RISBEAM_OUT_DIR", "from_env")
        .output()
        .unwrap();
    ok(o);
    assert!(dir.path().join("from_env/codebook.csv").exists());
}

#[test]
fn analyze_absorption_fit() {
    let dir = tempfile::tempdir().unwrap();
    ok(risbeam(dir.path(), &["simulate", "--dataset", "absorption", "--noise-free"]));
    let out = ok(risbeam(dir.path(), &["analyze", "absorption.csv", "--fit", "--svg"]));
    let widths: Vec<f64> = ["2", "4", "8", "10"]
        .iter()
        .map(|s| report_value(&out, &format!("hpbw_deg[side={s}]")).parse().unwrap())
        .collect();
    assert!(widths.windows(2).all(|w| w[0] > w[1]), "{widths:?}");
    let b: f64 = report_value(&out, "fit_b").parse().unwrap();
    assert!(b < 0.0);
    let residual: f64 = report_value(&out, "fit_residual").parse().unwrap();
    let norm: f64 = widths.iter().map(|w| w * w).sum::<f64>();
    assert!(residual.sqrt() < 0.05 * norm.sqrt(), "{residual}");
    assert!(dir.path().join("absorption_fit.csv").exists());
    assert!(dir.path().join("absorption_fit.svg").exists());
}

#[test]
fn analyze_localize_restricted_rotation() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "[geometry]\nrotation_min = -45\nrotation_max = 45\n",
    )
    .unwrap();
    ok(risbeam(dir.path(), &["simulate", "-c", "c.toml", "--noise-free"]));
    let out = ok(risbeam(dir.path(), &["analyze", "beampattern.csv", "--localize"]));
    assert_eq!(report_value(&out, "localized_rows"), "31");
    assert_eq!(report_value(&out, "localized_exact"), "31");
    let csv = std::fs::read_to_string(dir.path().join("beampattern_localize.csv")).unwrap();
    assert_eq!(csv.lines().count(), 32);
}

#[test]
fn analyze_localize_full_rotation_reports_all_columns() {
    let dir = tempfile::tempdir().unwrap();
    ok(risbeam(dir.path(), &["simulate", "--noise-free"]));
    let out = ok(risbeam(dir.path(), &["analyze", "beampattern.csv", "--localize"]));
    assert_eq!(report_value(&out, "localized_rows"), "61");
    let exact: usize = report_value(&out, "localized_exact").parse().unwrap();
    assert!(exact <= 61);
}

#[test]
fn truncated_lobe_is_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    ok(risbeam(dir.path(), &["simulate", "--noise-free"]));
    let o = risbeam(dir.path(), &["analyze", "beampattern.csv", "--hpbw", "--beam=-90,-3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("lobe truncated"), "{}", stderr(&o));
    assert!(stderr(&o).contains("beampattern.csv"));
}

#[test]
fn smooth_and_reconstruct_outputs_are_readable() {
    let dir = tempfile::tempdir().unwrap();
    ok(risbeam(dir.path(), &["simulate"]));
    ok(risbeam(dir.path(), &["analyze", "beampattern.csv", "--smooth", "--hpbw", "--reconstruct", "--svg"]));
    let smoothed = BeampatternTable::load(&dir.path().join("beampattern_smooth.csv")).unwrap();
    assert_eq!(smoothed.n_rows(), 1891);
    let hpi = std::fs::read_to_string(dir.path().join("beampattern_hpi.csv")).unwrap();
    assert_eq!(hpi.lines().count(), 62);
    assert!(dir.path().join("beampattern_hpi.svg").exists());
}

#[test]
fn train_predict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("small.toml"),
        "[array]\nnx = 4\nny = 4\n[codebook]\nazimuth_step = 6\nelevation_step = 9\n[geometry]\nrotation_step = 6\n",
    )
    .unwrap();
    ok(risbeam(dir.path(), &["simulate", "-c", "small.toml", "--noise-free"]));
    let out = ok(risbeam(dir.path(), &["train", "beampattern.csv", "--epochs", "30", "-o", "m.txt"]));
    let train_nmse: f64 = report_value(&out, "train_nmse").parse().unwrap();
    let val_nmse: f64 = report_value(&out, "val_nmse").parse().unwrap();
    assert!(train_nmse < 1.0 && val_nmse < 1.0);
    MlpModel::load(&dir.path().join("m.txt")).unwrap();

    let out = ok(risbeam(dir.path(), &["predict", "m.txt", "--table", "beampattern.csv", "-o", "p.csv"]));
    let all_nmse: f64 = report_value(&out, "nmse").parse().unwrap();
    let (lo, hi) = (train_nmse.min(val_nmse), train_nmse.max(val_nmse));
    assert!(all_nmse >= 0.9 * lo && all_nmse <= 1.1 * hi, "{all_nmse} vs {lo}..{hi}");

    let out = ok(risbeam(dir.path(), &["predict", "m.txt", "--angles=0,-3,0", "--angles=10.5,1,-7"]));
    assert_eq!(out.lines().count(), 3);

    let text = std::fs::read_to_string(dir.path().join("m.txt")).unwrap();
    std::fs::write(dir.path().join("bad.txt"), text.replacen("dims", "dimz", 1)).unwrap();
    let o = risbeam(dir.path(), &["predict", "bad.txt", "--angles=0,0,0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("model file"), "{}", stderr(&o));
}
