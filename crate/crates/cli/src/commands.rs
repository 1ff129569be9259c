use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use risbeam::analysis::{
    azimuth_cut, fit_exponential, hpbw, hpbw_by_side, hpi_reconstruct, localize_aoa, nmse,
    savitzky_golay, SgFilterSpec,
};
use risbeam::campaign::{Campaign, CampaignConfig};
use risbeam::chamber::{sweep_absorption, sweep_beampattern};
use risbeam::dataset::ColumnMapping;
use risbeam::surrogate::{self, flatten_table, MlpModel, MlpSpec, TrainSpec};
use risbeam::{build_codebook, AbsorptionTable, BeampatternTable, Dataset, Direction, Error};

use crate::svg::{line_plot, Series};
use crate::{AnalyzeArgs, CampaignArgs, DatasetKind, PredictArgs, SimulateArgs, TrainArgs, OUT_DIR_ENV};

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult<T = ()> = Result<T, Failure>;

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn context<T>(r: risbeam::Result<T>, what: impl Display) -> CmdResult<T> {
    r.map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{what}: {}", f.message);
        f
    })
}

fn out_dir(flag: Option<&Path>, configured: Option<&Path>) -> CmdResult<PathBuf> {
    let dir = flag
        .or(configured)
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| Failure {
        code: 1,
        message: format!("{}: {e}", dir.display()),
    })?;
    Ok(dir)
}

fn write_file(path: &Path, contents: &[u8]) -> CmdResult {
    std::fs::write(path, contents).map_err(|e| Failure::from(Error::Io {
        path: path.to_path_buf(),
        source: e,
    }))
}

fn load_campaign(args: &CampaignArgs) -> CmdResult<(Campaign, PathBuf)> {
    let mut config = match &args.config {
        Some(p) => CampaignConfig::load(p)?,
        None => CampaignConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let campaign = config.resolve()?;
    let dir = out_dir(args.out_dir.as_deref(), campaign.output.dir.as_deref())?;
    Ok((campaign, dir))
}

fn load_mapping(path: Option<&Path>) -> CmdResult<Option<ColumnMapping>> {
    path.map(|p| context(ColumnMapping::load(p), p.display()))
        .transpose()
}

pub fn codebook(args: &CampaignArgs) -> CmdResult {
    let (c, dir) = load_campaign(args)?;
    let book = build_codebook(&c.spec, &c.geometry.tx, &c.grid, c.mode);
    let path = dir.join(&c.output.codebook);
    book.save(&path)?;
    println!("{} entries", book.len());
    println!("wrote {}", path.display());
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> CmdResult {
    let (c, dir) = load_campaign(&args.campaign)?;
    let budget = if args.noise_free {
        c.budget.noise_free()
    } else {
        c.budget.clone()
    };
    let book = build_codebook(&c.spec, &c.geometry.tx, &c.grid, c.mode);
    let (path, rows, cols) = match args.dataset {
        DatasetKind::Beampattern => {
            let t = sweep_beampattern(&book, &c.geometry, &budget, c.seed)?;
            let path = dir.join(&c.output.beampattern);
            t.save(&path)?;
            (path, t.n_rows(), t.n_cols())
        }
        DatasetKind::Absorption => {
            let t = sweep_absorption(&book, &c.geometry, &budget, c.seed)?;
            let path = dir.join(&c.output.absorption);
            t.save(&path)?;
            (path, t.n_rows(), t.n_cols())
        }
    };
    println!("{rows}x{cols} table");
    println!("wrote {}", path.display());
    Ok(())
}

struct Report {
    rows: Vec<(String, String)>,
}

impl Report {
    fn new() -> Self {
        Report { rows: Vec::new() }
    }

    fn add(&mut self, key: impl Into<String>, value: impl Display) {
        self.rows.push((key.into(), value.to_string()));
    }

    fn print(&self) {
        let width = self.rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        for (k, v) in &self.rows {
            println!("{k:<width$}  {v}");
        }
    }
}

struct Outputs {
    dir: PathBuf,
    stem: String,
    svg: bool,
}

impl Outputs {
    fn path(&self, suffix: &str, ext: &str) -> PathBuf {
        self.dir.join(format!("{}_{suffix}.{ext}", self.stem))
    }

    fn csv(&self, suffix: &str, body: String, report: &mut Report) -> CmdResult {
        let path = self.path(suffix, "csv");
        write_file(&path, body.as_bytes())?;
        report.add(format!("{suffix}_file"), path.display());
        Ok(())
    }

    fn plot(&self, suffix: &str, title: &str, x: &str, y: &str, series: &[Series]) -> CmdResult {
        if self.svg {
            write_file(&self.path(suffix, "svg"), line_plot(title, x, y, series).as_bytes())?;
        }
        Ok(())
    }
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > values[best] { i } else { best })
}

fn beam_arg(beam: Option<(f64, f64)>) -> CmdResult<Option<Direction>> {
    beam.map(|(az, el)| Direction::new(az, el).map_err(|e| usage(format!("--beam: {e}"))))
        .transpose()
}

pub fn analyze(args: &AnalyzeArgs) -> CmdResult {
    if !(args.smooth || args.hpbw || args.fit || args.localize || args.reconstruct) {
        return Err(usage(
            "nothing to do: pass --smooth, --hpbw, --fit, --localize or --reconstruct",
        ));
    }
    let sg = SgFilterSpec::new(args.window, args.order).map_err(|e| usage(format!("--window/--order: {e}")))?;
    let mapping = load_mapping(args.mapping.as_deref())?;
    let file = args.table.display().to_string();
    let table = context(Dataset::load(&args.table, mapping.as_ref()), &file)?;
    let outputs = Outputs {
        dir: out_dir(args.out_dir.as_deref(), None)?,
        stem: args
            .table
            .file_stem()
            .map_or("table".into(), |s| s.to_string_lossy().into_owned()),
        svg: args.svg,
    };
    let mut report = Report::new();
    match table {
        Dataset::Beampattern(t) => analyze_beampattern(args, sg, &file, t, &outputs, &mut report)?,
        Dataset::Absorption(t) => analyze_absorption(args, sg, &file, t, &outputs, &mut report)?,
    }
    report.print();
    Ok(())
}

fn analyze_beampattern(
    args: &AnalyzeArgs,
    sg: SgFilterSpec,
    file: &str,
    mut table: BeampatternTable,
    out: &Outputs,
    report: &mut Report,
) -> CmdResult {
    if args.fit {
        return Err(usage("--fit needs an absorption table"));
    }
    report.add("table", format!("beampattern {}x{}", table.n_rows(), table.n_cols()));
    let rotations = table.rotations().to_vec();

    if args.smooth {
        let raw = table.clone();
        let mut row = 0;
        table = context(
            raw.map_rows(|r| {
                row += 1;
                savitzky_golay(r, sg)
            }),
            format_args!("{file}: row {row}"),
        )?;
        let mut buf = Vec::new();
        table.write_csv(&mut buf).expect("in-memory write");
        out.csv("smooth", String::from_utf8(buf).expect("utf-8"), report)?;
        let c = argmax(&rotations.iter().map(|r| -r.abs()).collect::<Vec<_>>());
        let peak = argmax(&raw.column_at(c));
        out.plot(
            "smooth",
            &format!("Beam {}", raw.beams()[peak]),
            "rotation (deg)",
            "RSRP (dBm)",
            &[
                Series::new("raw", &rotations, raw.row_at(peak)),
                Series::new("smoothed", &rotations, table.row_at(peak)),
            ],
        )?;
    }

    let selected = match beam_arg(args.beam)? {
        Some(b) => {
            context(table.row(&b), file)?;
            table.beams().iter().position(|x| *x == b).unwrap()
        }
        None => {
            let c = argmax(&rotations.iter().map(|r| -r.abs()).collect::<Vec<_>>());
            argmax(&table.column_at(c))
        }
    };
    let beam = table.beams()[selected];
    let cut = table.row_at(selected).to_vec();

    if args.hpbw {
        let w = context(hpbw(&rotations, &cut), format_args!("{file}: row {} beam {beam}", selected + 1))?;
        report.add("beam", beam);
        report.add("hpbw_deg", format!("{w:.4}"));
        out.csv(
            "hpbw",
            format!("theta_n,phi_n,hpbw_deg\n{},{},{w:.6}\n", beam.azimuth_deg(), beam.elevation_deg()),
            report,
        )?;
    }

    if args.localize {
        let est = localize_aoa(&table);
        let elevations: Vec<f64> = table.beams().iter().map(Direction::elevation_deg).collect();
        let expected_el = elevations
            .iter()
            .copied()
            .fold(f64::NAN, |best, e| {
                if best.is_nan() || (e - args.rx_elevation).abs() < (best - args.rx_elevation).abs() {
                    e
                } else {
                    best
                }
            });
        let exact = est
            .iter()
            .filter(|e| e.beam.azimuth_deg() == e.theta_r && e.beam.elevation_deg() == expected_el)
            .count();
        let mut body = String::from("theta_r,theta_n,phi_n,rsrp_dbm\n");
        for e in &est {
            body.push_str(&format!(
                "{},{},{},{:.6}\n",
                e.theta_r,
                e.beam.azimuth_deg(),
                e.beam.elevation_deg(),
                e.power_dbm
            ));
        }
        report.add("localized_rows", est.len());
        report.add("localized_exact", exact);
        out.csv("localize", body, report)?;
        let theta: Vec<f64> = est.iter().map(|e| e.theta_r).collect();
        let got: Vec<f64> = est.iter().map(|e| e.beam.azimuth_deg()).collect();
        out.plot(
            "localize",
            "Angle-of-arrival estimate",
            "rotation (deg)",
            "estimated azimuth (deg)",
            &[Series::new("estimate", &theta, &got), Series::new("truth", &theta, &theta)],
        )?;
    }

    if args.reconstruct {
        let tilt = args.tilt.unwrap_or(beam.elevation_deg());
        reconstruct(&rotations, &cut, tilt, file, out, report)?;
    }
    Ok(())
}

fn reconstruct(angles: &[f64], cut: &[f64], tilt: f64, file: &str, out: &Outputs, report: &mut Report) -> CmdResult {
    let p = context(hpi_reconstruct(angles, cut, tilt, None), file)?;
    let mut buf = Vec::new();
    p.write_csv(&mut buf).expect("in-memory write");
    report.add("hpi_tilt_deg", tilt);
    report.add("hpi_grid", format!("{}x{}", p.elevation_deg.len(), p.azimuth_deg.len()));
    out.csv("hpi", String::from_utf8(buf).expect("utf-8"), report)?;
    let ti = p
        .elevation_deg
        .iter()
        .position(|&e| e == tilt)
        .unwrap_or_else(|| argmax(&p.elevation_deg.iter().map(|e| -(e - tilt).abs()).collect::<Vec<_>>()));
    out.plot(
        "hpi",
        &format!("HPI slice at elevation {}", p.elevation_deg[ti]),
        "azimuth (deg)",
        "RSRP (dBm)",
        &[Series::new("reconstructed", &p.azimuth_deg, p.elevation_row(ti))],
    )
}

fn smooth_absorption(table: &AbsorptionTable, sg: SgFilterSpec, file: &str) -> CmdResult<AbsorptionTable> {
    let beams = table.beams();
    let mut power = table.power_dbm().to_vec();
    let mut elevations: Vec<f64> = beams.iter().map(Direction::elevation_deg).collect();
    elevations.sort_by(f64::total_cmp);
    elevations.dedup();
    for c in 0..table.n_cols() {
        for &el in &elevations {
            let mut rows: Vec<usize> = (0..beams.len()).filter(|&r| beams[r].elevation_deg() == el).collect();
            rows.sort_by(|&a, &b| beams[a].azimuth_deg().total_cmp(&beams[b].azimuth_deg()));
            let cut: Vec<f64> = rows.iter().map(|&r| table.get(r, c)).collect();
            let smoothed = context(
                savitzky_golay(&cut, sg),
                format_args!("{file}: column {} elevation {el}", c + 1),
            )?;
            for (&r, v) in rows.iter().zip(smoothed) {
                power[r * table.n_cols() + c] = v;
            }
        }
    }
    context(
        AbsorptionTable::new(beams.to_vec(), table.active_counts().to_vec(), power, table.theta_t()),
        file,
    )
}

fn analyze_absorption(
    args: &AnalyzeArgs,
    sg: SgFilterSpec,
    file: &str,
    mut table: AbsorptionTable,
    out: &Outputs,
    report: &mut Report,
) -> CmdResult {
    if args.localize {
        return Err(usage("--localize needs a beampattern table"));
    }
    report.add("table", format!("absorption {}x{}", table.n_rows(), table.n_cols()));
    if args.smooth {
        table = smooth_absorption(&table, sg, file)?;
        let mut buf = Vec::new();
        table.write_csv(&mut buf).expect("in-memory write");
        out.csv("smooth", String::from_utf8(buf).expect("utf-8"), report)?;
    }

    let full = table.n_cols() - 1;
    let full_column = table.column_at(full);
    let elevation = match (args.elevation, beam_arg(args.beam)?) {
        (Some(e), _) => e,
        (None, Some(b)) => b.elevation_deg(),
        (None, None) => table.beams()[argmax(&full_column)].elevation_deg(),
    };
    report.add("cut_elevation_deg", elevation);

    if args.hpbw || args.fit {
        let series = context(hpbw_by_side(&table, elevation), format_args!("{file}: elevation {elevation}"))?;
        let mut body = String::from("side,active,hpbw_deg\n");
        for (side, w) in &series {
            body.push_str(&format!("{side},{},{w:.6}\n", side * side));
            report.add(format!("hpbw_deg[side={side}]"), format!("{w:.4}"));
        }
        out.csv("hpbw", body, report)?;
        let sides: Vec<f64> = series.iter().map(|s| s.0 as f64).collect();
        let widths: Vec<f64> = series.iter().map(|s| s.1).collect();

        if args.fit {
            let fit = context(fit_exponential(&sides, &widths, args.fit_init), format_args!("{file}: fit"))?;
            report.add("fit_a", format!("{:.6}", fit.a));
            report.add("fit_b", format!("{:.6}", fit.b));
            report.add("fit_c", format!("{:.6}", fit.c));
            report.add("fit_residual", format!("{:.6e}", fit.residual_norm));
            out.csv(
                "fit",
                format!(
                    "a,b,c,residual_norm,iterations\n{:.12e},{:.12e},{:.12e},{:.12e},{}\n",
                    fit.a, fit.b, fit.c, fit.residual_norm, fit.iterations
                ),
                report,
            )?;
            let dense: Vec<f64> = (0..=100)
                .map(|i| sides[0] + (sides[sides.len() - 1] - sides[0]) * i as f64 / 100.0)
                .collect();
            let curve: Vec<f64> = dense.iter().map(|&x| fit.eval(x)).collect();
            out.plot(
                "fit",
                "HPBW against subarray side",
                "side (elements)",
                "HPBW (deg)",
                &[Series::new("measured", &sides, &widths), Series::new("fit", &dense, &curve)],
            )?;
        } else {
            out.plot(
                "hpbw",
                "HPBW against subarray side",
                "side (elements)",
                "HPBW (deg)",
                &[Series::new("hpbw", &sides, &widths)],
            )?;
        }
    }

    if args.reconstruct {
        let (angles, cut) = context(azimuth_cut(table.beams(), &full_column, elevation), file)?;
        let tilt = args.tilt.unwrap_or(elevation);
        reconstruct(&angles, &cut, tilt, file, out, report)?;
    }
    Ok(())
}

pub fn train(args: &TrainArgs) -> CmdResult {
    let mapping = load_mapping(args.mapping.as_deref())?;
    let file = args.table.display().to_string();
    let table = context(BeampatternTable::load_mapped(&args.table, mapping.as_ref()), &file)?;
    let mlp = MlpSpec {
        hidden_layers: args.hidden_layers,
        hidden_width: args.hidden_width,
        ..MlpSpec::default()
    };
    mlp.validate().map_err(|e| usage(e.to_string()))?;
    let spec = TrainSpec {
        epochs: args.epochs,
        batch_size: args.batch_size,
        learning_rate: args.learning_rate,
        split_fraction: args.split,
        seed: args.seed,
        track_loss: args.loss_csv.is_some(),
        ..TrainSpec::default()
    };
    spec.validate().map_err(|e| usage(e.to_string()))?;
    let records = flatten_table(&table);
    let outcome = context(surrogate::train(&records, &mlp, &spec), &file)?;
    let dir = out_dir(args.out_dir.as_deref(), None)?;
    let path = dir.join(&args.out);
    outcome.model.save(&path)?;
    if let Some(loss) = &args.loss_csv {
        let mut body = String::from("epoch,loss\n");
        for (i, l) in outcome.epoch_loss.iter().enumerate() {
            body.push_str(&format!("{},{l:.9e}\n", i + 1));
        }
        write_file(&dir.join(loss), body.as_bytes())?;
    }
    let mut report = Report::new();
    report.add("records", records.len());
    report.add("epochs", spec.epochs);
    report.add("train_nmse", format!("{:.6e}", outcome.train_nmse));
    report.add("val_nmse", format!("{:.6e}", outcome.val_nmse));
    report.add("model_file", path.display());
    report.print();
    Ok(())
}

pub fn predict(args: &PredictArgs) -> CmdResult {
    let model = context(MlpModel::load(&args.model), args.model.display())?;
    let mut body = String::new();
    let mut report = Report::new();
    if let Some(table_path) = &args.table {
        let mapping = load_mapping(args.mapping.as_deref())?;
        let table = context(
            BeampatternTable::load_mapped(table_path, mapping.as_ref()),
            table_path.display(),
        )?;
        let records = flatten_table(&table);
        let predicted = model.predict_records(&records);
        let truth: Vec<f64> = records.iter().map(|r| r.rsrp_dbm).collect();
        body.push_str("theta_n,phi_n,theta_r,rsrp_dbm,predicted_dbm\n");
        for (r, p) in records.iter().zip(&predicted) {
            body.push_str(&format!(
                "{},{},{},{:.6},{p:.6}\n",
                r.theta_n, r.phi_n, r.theta_r, r.rsrp_dbm
            ));
        }
        report.add("records", records.len());
        report.add("nmse", format!("{:.6e}", context(nmse(&predicted, &truth), table_path.display())?));
    } else if !args.angles.is_empty() {
        body.push_str("theta_n,phi_n,theta_r,predicted_dbm\n");
        for &(tn, pn, tr) in &args.angles {
            body.push_str(&format!("{tn},{pn},{tr},{:.6}\n", model.predict(tn, pn, tr)));
        }
    } else {
        return Err(usage("pass --table or at least one --angles"));
    }
    match &args.out {
        Some(out) => {
            let path = out_dir(args.out_dir.as_deref(), None)?.join(out);
            write_file(&path, body.as_bytes())?;
            report.add("predictions_file", path.display());
            report.print();
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(body.as_bytes()).map_err(|e| Failure {
                code: 1,
                message: e.to_string(),
            })?;
            if !report.rows.is_empty() {
                for (k, v) in &report.rows {
                    eprintln!("{k}  {v}");
                }
            }
        }
    }
    Ok(())
}
