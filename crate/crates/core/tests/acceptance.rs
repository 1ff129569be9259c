//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use risbeam::analysis::{fit_exponential, hpbw, hpbw_by_side, localize_aoa, savitzky_golay, SgFilterSpec};
use risbeam::array::{ideal_config, quantize_config, received_signal, ArraySpec, Direction};
use risbeam::chamber::{
    field_regions, sample_count_study, sweep_absorption, sweep_beampattern, ChamberGeometry, LinkBudget,
};
use risbeam::codebook::{build_codebook, AngleRange, Codebook, CodebookGrid, PhaseMode};
use risbeam::dataset::{AbsorptionTable, BeampatternTable};
use risbeam::surrogate::{self, flatten_table, gradient_check, MlpModel, MlpSpec, TrainSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn default_codebook(spec: &ArraySpec, mode: PhaseMode) -> Codebook {
    build_codebook(spec, &ChamberGeometry::default().tx, &CodebookGrid::standard(), mode)
}

fn c1_codebook_cardinality() -> Outcome {
    let spec = ArraySpec::new(10, 10).unwrap();
    let tx = ChamberGeometry::default().tx;
    let t = Instant::now();
    let standard = build_codebook(&spec, &tx, &CodebookGrid::standard(), PhaseMode::TxCompensated).len();
    let extended = build_codebook(&spec, &tx, &CodebookGrid::extended(), PhaseMode::TxCompensated).len();
    let dt = t.elapsed();
    outcome(
        standard == 1891 && extended == 3721 && within(dt, 1.0),
        format!("{standard} / {extended} entries in {:.3} s", dt.as_secs_f64()),
    )
}

fn c2_field_regions() -> Outcome {
    let r = field_regions(0.43, 5.3e9).unwrap();
    outcome(
        (r.far_field_m - 6.5).abs() <= 0.05 && (r.reactive_near_m - 0.73).abs() <= 0.01,
        format!("far field {:.4} m, reactive {:.4} m", r.far_field_m, r.reactive_near_m),
    )
}

fn c3_coherent_gain() -> Outcome {
    let spec = ArraySpec::new(10, 10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let t = Instant::now();
    let (mut worst_rel, mut min_loss, mut max_loss) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    for _ in 0..50 {
        let mut d = || Direction::new(rng.random_range(-90.0..=90.0), rng.random_range(-90.0..=90.0)).unwrap();
        let (tx, beam) = (d(), d());
        let ideal = ideal_config(&spec, &tx, &beam);
        let y = received_signal(&spec, &ideal, &tx, &beam).unwrap().norm();
        worst_rel = worst_rel.max((y - 100.0).abs() / 100.0);
        let yq = received_signal(&spec, &quantize_config(&spec, &ideal), &tx, &beam).unwrap().norm();
        let loss = 20.0 * (yq / y).log10();
        min_loss = min_loss.min(loss);
        max_loss = max_loss.max(loss);
    }
    let dt = t.elapsed();
    outcome(
        worst_rel <= 1e-9 && min_loss >= -0.688 && max_loss <= 0.0 && within(dt, 5.0),
        format!(
            "max |y| error {worst_rel:.2e} rel, loss in [{min_loss:.4}, {max_loss:.4}] dB, {:.3} s",
            dt.as_secs_f64()
        ),
    )
}

/// Independent evaluation: explicit double loop, own quantizer.
fn brute_force_rsrp(nx: usize, ny: usize, tx: (f64, f64), beam: (f64, f64), rx: (f64, f64)) -> f64 {
    let phase = |d: (f64, f64), k: usize, l: usize| {
        PI * (k as f64 * d.0.to_radians().sin() + l as f64 * d.1.to_radians().sin())
    };
    let mut y = Complex64::new(0.0, 0.0);
    for k in 0..nx {
        for l in 0..ny {
            let want = (phase(beam, k, l) - phase(tx, k, l)).rem_euclid(TAU);
            let mut best = 0.0;
            let mut best_d = f64::INFINITY;
            for m in 0..8 {
                let q = m as f64 * PI / 4.0;
                let d = (want - q).rem_euclid(TAU);
                let d = d.min(TAU - d);
                if d < best_d - 1e-12 {
                    best = q;
                    best_d = d;
                }
            }
            y += Complex64::from_polar(1.0, -phase(rx, k, l) + best + phase(tx, k, l));
        }
    }
    let signal = -60.0 + 20.0 * (y.norm() / (nx * ny) as f64).log10();
    10.0 * (10f64.powf(signal / 10.0) + 1e-9).log10()
}

fn c4_steering_argmax() -> Outcome {
    let spec = ArraySpec::new(4, 4).unwrap();
    let grid = CodebookGrid {
        azimuth: AngleRange::new(-90, 90, 15).unwrap(),
        elevation: AngleRange::new(-45, 45, 15).unwrap(),
    };
    let geometry = ChamberGeometry {
        rotation: AngleRange::new(-90, 90, 15).unwrap(),
        ..ChamberGeometry::default()
    };
    let t = Instant::now();
    let book = build_codebook(&spec, &geometry.tx, &grid, PhaseMode::TxCompensated);
    let table = sweep_beampattern(&book, &geometry, &LinkBudget::default().noise_free(), 0).unwrap();
    let expected_el = grid.elevation.nearest(geometry.rx_elevation_deg) as f64;
    let est = localize_aoa(&table);

    let tx = (geometry.tx.azimuth_deg(), geometry.tx.elevation_deg());
    let mut oracle_agrees = true;
    for (c, e) in est.iter().enumerate() {
        let rx = (e.theta_r, geometry.rx_elevation_deg);
        let mut best = 0;
        let mut best_p = f64::NEG_INFINITY;
        for (r, b) in table.beams().iter().enumerate() {
            let p = brute_force_rsrp(4, 4, tx, (b.azimuth_deg(), b.elevation_deg()), rx);
            if (p - table.get(r, c)).abs() > 1e-6 {
                oracle_agrees = false;
            }
            if p > best_p + 1e-9 {
                best = r;
                best_p = p;
            }
        }
        if table.beams()[best] != e.beam {
            oracle_agrees = false;
        }
    }
    let dt = t.elapsed();
    let wrong: Vec<String> = est
        .iter()
        .filter(|e| e.beam.azimuth_deg() != e.theta_r || e.beam.elevation_deg() != expected_el)
        .map(|e| format!("{}->{}", e.theta_r, e.beam))
        .collect();
    outcome(
        wrong.is_empty() && oracle_agrees && within(dt, 10.0),
        format!(
            "{}/{} columns at (θ_r, {expected_el}°); brute-force oracle {}; {:.2} s{}",
            est.len() - wrong.len(),
            est.len(),
            if oracle_agrees { "agrees" } else { "DISAGREES" },
            dt.as_secs_f64(),
            if wrong.is_empty() {
                String::new()
            } else {
                format!("; misses {}", wrong.join(" "))
            }
        ),
    )
}

fn c5_virtual_beam_offset() -> Outcome {
    let spec = ArraySpec::new(10, 10).unwrap();
    let geometry = ChamberGeometry::default();
    let book = default_codebook(&spec, PhaseMode::Uncompensated);
    let table = sweep_beampattern(&book, &geometry, &LinkBudget::default().noise_free(), 0).unwrap();
    let column = table.column(0.0).unwrap();
    let best = column
        .values
        .iter()
        .enumerate()
        .fold(0, |b, (i, &v)| if v > column.values[b] { i } else { b });
    let beam = column.labels[best];
    outcome(
        (beam.elevation_deg().abs() - 30.0).abs() <= 3.0,
        format!(
            "tx elevation {}°, rx elevation {}°: argmax beam {beam} at θ_r = 0",
            geometry.tx.elevation_deg(),
            geometry.rx_elevation_deg
        ),
    )
}

fn c6_savgol_exactness() -> Outcome {
    let spec = SgFilterSpec::new(7, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let degree = rng.random_range(0..=4);
        let coeffs: Vec<f64> = (0..=degree).map(|_| rng.random_range(-2.0..2.0)).collect();
        let n = rng.random_range(7..=120);
        let signal: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64 / n as f64 * 2.0 - 1.0;
                coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
            })
            .collect();
        let out = savitzky_golay(&signal, spec).unwrap();
        for i in 3..n - 3 {
            worst = worst.max((out[i] - signal[i]).abs());
        }
    }
    outcome(worst < 1e-8, format!("max interior error {worst:.2e} over 100 polynomials"))
}

/// Closed-form HPBW of an ideal N-element broadside line at δ = 0.5: solve
/// |sin(Nu)/(N sin u)|² = 1/2, u = π δ sin θ, by bisection.
fn broadside_hpbw_oracle(n: usize, delta: f64) -> f64 {
    let af2 = |theta: f64| {
        let u = PI * delta * theta.to_radians().sin();
        if u == 0.0 {
            1.0
        } else {
            ((n as f64 * u).sin() / (n as f64 * u.sin())).powi(2)
        }
    };
    let (mut lo, mut hi) = (0.0f64, 90.0 / n as f64 * 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if af2(mid) > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    2.0 * lo
}

fn c7_hpbw_pipeline() -> Outcome {
    let spec = ArraySpec::new(10, 10).unwrap();
    let geometry = ChamberGeometry::default();
    let book = default_codebook(&spec, PhaseMode::TxCompensated);
    let abs = sweep_absorption(&book, &geometry, &LinkBudget::default().noise_free(), 0).unwrap();
    let cut_el = CodebookGrid::standard().elevation.nearest(geometry.rx_elevation_deg) as f64;
    let series = hpbw_by_side(&abs, cut_el).unwrap();
    let decreasing = series.windows(2).all(|w| w[0].1 > w[1].1);

    // Ideal continuous broadside beam, swept at 0.1°.
    let ideal = ideal_config(&spec, &Direction::BORESIGHT, &Direction::BORESIGHT);
    let angles: Vec<f64> = (-900..=900).map(|i| i as f64 / 10.0).collect();
    let budget = LinkBudget::default();
    let power: Vec<f64> = angles
        .iter()
        .map(|&a| {
            let y = received_signal(&spec, &ideal, &Direction::BORESIGHT, &Direction::new(a, 0.0).unwrap()).unwrap();
            budget.rsrp_from_amplitude(y.norm(), 100)
        })
        .collect();
    let broadside = hpbw(&angles, &power).unwrap();
    let oracle = broadside_hpbw_oracle(10, 0.5);

    let (a, b, c) = (70.96, -0.27, 3.99);
    let x = [2.0, 4.0, 8.0, 10.0];
    let y: Vec<f64> = x.iter().map(|&v| a * f64::exp(b * v) + c).collect();
    let fit = fit_exponential(&x, &y, (50.0, -0.1, 0.0)).unwrap();
    let rel = [(fit.a, a), (fit.b, b), (fit.c, c)]
        .iter()
        .map(|(g, w)| ((g - w) / w).abs())
        .fold(0.0, f64::max);

    let widths: Vec<String> = series.iter().map(|(s, w)| format!("{s}:{w:.2}")).collect();
    outcome(
        decreasing && (broadside - 10.2).abs() <= 0.5 && (broadside - oracle).abs() <= 0.05 && rel <= 1e-6,
        format!(
            "HPBW by side [{}]; broadside {broadside:.3}° (oracle {oracle:.3}°); fit max rel error {rel:.1e}",
            widths.join(", ")
        ),
    )
}

fn c8_surrogate(model_out: &mut Option<MlpModel>) -> Outcome {
    let mlp = MlpSpec::default();
    let worst_grad = (0..10)
        .map(|s| gradient_check(&mlp, s).unwrap())
        .fold(0.0, f64::max);

    let spec = ArraySpec::new(10, 10).unwrap();
    let geometry = ChamberGeometry::default();
    let book = default_codebook(&spec, PhaseMode::TxCompensated);
    let table = sweep_beampattern(&book, &geometry, &LinkBudget::default().noise_free(), 0).unwrap();
    let records = flatten_table(&table);
    let t = Instant::now();
    let out = surrogate::train(&records, &mlp, &TrainSpec::default()).unwrap();
    let dt = t.elapsed();
    let detail = format!(
        "gradient check max {worst_grad:.2e} over 10 seeds; {} epochs: train NMSE {:.4}, val NMSE {:.4} ({:.1} s)",
        TrainSpec::default().epochs,
        out.train_nmse,
        out.val_nmse,
        dt.as_secs_f64()
    );
    *model_out = Some(out.model);
    outcome(worst_grad < 1e-4 && out.val_nmse < 0.01 && within(dt, 600.0), detail)
}

fn c9_localization() -> Outcome {
    let spec = ArraySpec::new(10, 10).unwrap();
    let geometry = ChamberGeometry::default();
    let book = default_codebook(&spec, PhaseMode::TxCompensated);
    let expected_el = CodebookGrid::standard().elevation.nearest(geometry.rx_elevation_deg) as f64;

    let clean = sweep_beampattern(&book, &geometry, &LinkBudget::default().noise_free(), 0).unwrap();
    let est = localize_aoa(&clean);
    let exact = est
        .iter()
        .filter(|e| e.beam.azimuth_deg() == e.theta_r && e.beam.elevation_deg() == expected_el)
        .count();

    let budget = LinkBudget::default();
    let (mut near, mut total) = (0usize, 0usize);
    for seed in 0..20 {
        let noisy = sweep_beampattern(&book, &geometry, &budget, 1000 + seed).unwrap();
        for e in localize_aoa(&noisy) {
            total += 1;
            if (e.beam.azimuth_deg() - e.theta_r).abs() <= 3.0 && (e.beam.elevation_deg() - expected_el).abs() <= 3.0 {
                near += 1;
            }
        }
    }
    let rate = near as f64 / total as f64;
    outcome(
        exact == est.len() && rate >= 0.95,
        format!(
            "noise-free {exact}/{} exact; noisy within one step {:.1}% over 20 seeds",
            est.len(),
            100.0 * rate
        ),
    )
}

fn c10_sample_count() -> Outcome {
    let counts = [10, 20, 30, 80];
    let cdfs = sample_count_study(-60.0, 0.5, &counts, 20_000, 10).unwrap();
    let p90: Vec<f64> = cdfs.iter().map(|c| c.quantile(0.9)).collect();
    let ordered = p90.windows(2).all(|w| w[0] >= w[1]);
    let parts: Vec<String> = counts.iter().zip(&p90).map(|(c, p)| format!("{c}:{:.4}%", 100.0 * p)).collect();
    outcome(
        ordered && p90[3] == 0.0,
        format!("90th-percentile relative error [{}]", parts.join(", ")),
    )
}

fn bytes(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    write(&mut buf).unwrap();
    buf
}

fn c11_io_closure(model: Option<&MlpModel>) -> Outcome {
    let spec = ArraySpec::new(10, 10).unwrap();
    let geometry = ChamberGeometry::default();
    let book = default_codebook(&spec, PhaseMode::TxCompensated);
    let budget = LinkBudget::default();
    let mut ok = Vec::new();

    let bp = sweep_beampattern(&book, &geometry, &budget, 3).unwrap();
    let first = bytes(|b| bp.write_csv(b));
    let back = BeampatternTable::read_csv(first.as_slice(), None).unwrap();
    ok.push(("beampattern", back == bp && bytes(|b| back.write_csv(b)) == first));

    let abs = sweep_absorption(&book, &geometry, &budget, 3).unwrap();
    let first = bytes(|b| abs.write_csv(b));
    let back = AbsorptionTable::read_csv(first.as_slice(), None).unwrap();
    ok.push(("absorption", back == abs && bytes(|b| back.write_csv(b)) == first));

    let first = bytes(|b| book.write_csv(b));
    let back = Codebook::read_csv(first.as_slice(), &spec).unwrap();
    ok.push(("codebook", bytes(|b| back.write_csv(b)) == first));

    match model {
        Some(m) => {
            let first = bytes(|b| m.write_text(b));
            let back = MlpModel::read_text(first.as_slice()).unwrap();
            ok.push(("model", &back == m && bytes(|b| back.write_text(b)) == first));
        }
        None => ok.push(("model", false)),
    }
    let parts: Vec<String> = ok
        .iter()
        .map(|(n, p)| format!("{n} {}", if *p { "stable" } else { "UNSTABLE" }))
        .collect();
    outcome(ok.iter().all(|p| p.1), parts.join(", "))
}

fn main() {
    let mut model = None;
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut run = |n: usize, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let o = f();
        println!(
            "criterion {n:>2} [{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((n, name, o));
    };
    run(1, "codebook cardinalities", &mut c1_codebook_cardinality);
    run(2, "field regions", &mut c2_field_regions);
    run(3, "coherent gain oracle", &mut c3_coherent_gain);
    run(4, "steering argmax", &mut c4_steering_argmax);
    run(5, "virtual beam offset", &mut c5_virtual_beam_offset);
    run(6, "Savitzky-Golay exactness", &mut c6_savgol_exactness);
    run(7, "HPBW pipeline", &mut c7_hpbw_pipeline);
    run(8, "surrogate", &mut || c8_surrogate(&mut model));
    run(9, "localization", &mut c9_localization);
    run(10, "sample-count study", &mut c10_sample_count);
    run(11, "I/O closure", &mut || c11_io_closure(model.as_ref()));

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        results.len() - failed.len(),
        failed.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" ({failed:?})")
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
