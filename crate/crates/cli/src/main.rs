use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use tanksim::beamtank::{self, ImpulsiveOptions};
use tanksim::gmproc::{self, GroundMotion, ParsedRecord, RecordFormat};
use tanksim::mechmodel::{self, PressureProfile};
use tanksim::reference;
use tanksim::simulate::{self, NewmarkParams, SystemOptions};
use tanksim::sloshfem;
use tanksim::text::num;
use tanksim::uplift::{self, MomentRotationOptions};
use tanksim::{Exec, ScaleModel, TankSpec};

#[derive(Parser, Debug, Serialize)]
#[command(name = "tanksim", version, about = "Seismic response of cylindrical liquid-storage tanks")]
struct Cli {
    /// Worker threads for the parallel kernels.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = "TANKSIM_OUT", default_value = "tanksim-out")]
    out: PathBuf,
    /// Check inputs and exit without computing.
    #[arg(long, global = true)]
    validate_only: bool,
    /// Reserved; every algorithm is deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
enum Command {
    /// Natural periods from the code formulas, the sloshing FE model and the
    /// impulsive beam model.
    Modal(ModalArgs),
    /// Pseudo-acceleration response spectrum of a record.
    Spectrum(SpectrumArgs),
    /// Wall pressure per component and their SRSS combination.
    PressureProfile(PressureArgs),
    /// Time-history response of the reduced model.
    Simulate(SimulateArgs),
    /// Bottom-plate uplift force and base moment-rotation curves.
    UpliftCurve(UpliftArgs),
    /// Froude time scaling of a record.
    ScaleRecord(ScaleArgs),
    /// Period and peak-response comparison tables.
    Report(ReportArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Method {
    En,
    Fe,
    Beam,
    All,
}

#[derive(Args, Debug, Serialize)]
struct ModalArgs {
    /// Bundled tank name or spec file.
    #[arg(long)]
    spec: String,
    #[arg(long, value_enum, default_value_t = Method::All)]
    method: Method,
    /// Convective modes.
    #[arg(long, default_value_t = 3)]
    modes: usize,
    /// FE target element size, m.
    #[arg(long, default_value_t = 0.02)]
    mesh_size: f64,
    /// Write the pressure field of FE mode k (from 1).
    #[arg(long)]
    dump_mode: Option<usize>,
    /// Write the FE mesh as node and element CSVs.
    #[arg(long)]
    export_mesh: bool,
    #[arg(long, default_value_t = 200)]
    beam_elements: usize,
    /// Euler-Bernoulli instead of Timoshenko beam.
    #[arg(long)]
    no_shear: bool,
}

#[derive(Args, Debug, Serialize)]
struct RecordArgs {
    /// Ground-motion record file.
    #[arg(long)]
    record: PathBuf,
    /// csv, single or peer; guessed from the extension when absent.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct SpectrumArgs {
    #[command(flatten)]
    record: RecordArgs,
    #[arg(long, default_value_t = 0.05)]
    damping: f64,
    #[arg(long, default_value_t = 0.02)]
    t_min: f64,
    #[arg(long, default_value_t = 5.0)]
    t_max: f64,
    /// Log-spaced periods between t-min and t-max.
    #[arg(long, default_value_t = 100)]
    count: usize,
}

#[derive(Args, Debug, Serialize)]
struct PressureArgs {
    /// Bundled tank name or spec file.
    #[arg(long)]
    spec: String,
    #[arg(long, default_value_t = 101)]
    points: usize,
    /// Convective modes.
    #[arg(long, default_value_t = 3)]
    modes: usize,
    /// Add the flexible-wall impulsive profile from the beam model.
    #[arg(long)]
    flexible: bool,
    /// Weight the components by this record's spectral accelerations
    /// (unit weights otherwise).
    #[arg(long)]
    record: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    /// Damping ratio of the impulsive response.
    #[arg(long, default_value_t = 0.02)]
    structural_damping: f64,
    /// Damping ratio of the sloshing modes.
    #[arg(long, default_value_t = 0.005)]
    convective_damping: f64,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    /// Bundled tank name or spec file.
    #[arg(long)]
    spec: String,
    #[command(flatten)]
    record: RecordArgs,
    /// Include the base-rotation DOF with the uplift spring.
    #[arg(long)]
    uplift: bool,
    /// Convective modes.
    #[arg(long, default_value_t = 3)]
    modes: usize,
    /// Damping ratio of the impulsive response.
    #[arg(long, default_value_t = 0.02)]
    structural_damping: f64,
    /// Damping ratio of the sloshing modes.
    #[arg(long, default_value_t = 0.005)]
    convective_damping: f64,
    /// Integration step, s (default min(dt, T_i/20)).
    #[arg(long)]
    dt_sub: Option<f64>,
    /// Override the impulsive period, s.
    #[arg(long)]
    impulsive_period: Option<f64>,
    /// Largest base rotation tabulated for the uplift spring, rad.
    #[arg(long, default_value_t = 0.02)]
    max_rotation: f64,
    /// Points on the rotation grid.
    #[arg(long, default_value_t = 33)]
    rotation_samples: usize,
}

#[derive(Args, Debug, Serialize)]
struct UpliftArgs {
    /// Bundled tank name or spec file.
    #[arg(long)]
    spec: String,
    #[arg(long, default_value_t = 0.01)]
    max_rotation: f64,
    /// Points on the rotation grid.
    #[arg(long, default_value_t = 41)]
    samples: usize,
    #[arg(long, default_value_t = 72)]
    sectors: usize,
    #[arg(long, default_value_t = 200)]
    strip_nodes: usize,
}

#[derive(Args, Debug, Serialize)]
struct ScaleArgs {
    #[command(flatten)]
    record: RecordArgs,
    /// Model-to-prototype length ratio.
    #[arg(long)]
    lambda: f64,
}

#[derive(Args, Debug, Serialize)]
struct ReportArgs {
    #[arg(long, default_value = "slender")]
    slender: String,
    #[arg(long, default_value = "broad")]
    broad: String,
    #[arg(long, default_value_t = 0.02)]
    mesh_size: f64,
    /// Chi-Chi record scaled for the broad tank (wave height row).
    #[arg(long)]
    wave_record: Option<PathBuf>,
    /// Northridge record scaled for the broad tank (uplift row).
    #[arg(long)]
    uplift_record: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

/// Input or configuration problem, reported with exit status 2.
#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(t) = cause.downcast_ref::<tanksim::Error>() {
            return if t.is_numeric() { 3 } else { 2 };
        }
    }
    2
}

fn exec() -> Exec {
    Exec::Parallel
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            bail!(config_err("--jobs must be at least 1"));
        }
        tanksim::par::init_workers(j);
    }
    let out = Output::new(cli)?;
    match &cli.command {
        Command::Modal(a) => modal(a, &out),
        Command::Spectrum(a) => spectrum(a, &out),
        Command::PressureProfile(a) => pressure_profile(a, &out),
        Command::Simulate(a) => simulate(a, &out),
        Command::UpliftCurve(a) => uplift_curve(a, &out),
        Command::ScaleRecord(a) => scale_record(a, &out),
        Command::Report(a) => report(a, &out),
    }
}

/// Artifact writer; every command ends with a `<command>.json` sidecar that
/// carries the resolved configuration and the list of files written.
struct Output<'a> {
    cli: &'a Cli,
    dir: PathBuf,
    files: std::cell::RefCell<Vec<String>>,
}

impl<'a> Output<'a> {
    fn new(cli: &'a Cli) -> Result<Self> {
        Ok(Self {
            cli,
            dir: cli.out.clone(),
            files: Default::default(),
        })
    }

    fn validate_only(&self) -> bool {
        self.cli.validate_only
    }

    fn write(&self, name: &str, body: &str) -> Result<()> {
        fs::create_dir_all(&self.dir)
            .map_err(|e| config_err(format!("cannot create output directory {}: {e}", self.dir.display())))?;
        let path = self.dir.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        self.files.borrow_mut().push(name.to_string());
        Ok(())
    }

    fn finish(&self, command: &str, results: Value) -> Result<()> {
        let mut files = self.files.borrow().clone();
        files.push(format!("{command}.json"));
        let sidecar = json!({
            "tool": "tanksim",
            "version": env!("CARGO_PKG_VERSION"),
            "config": {
                "jobs": self.cli.jobs,
                "seed": self.cli.seed,
                "arguments": &self.cli.command,
            },
            "artifacts": files,
            "results": results,
        });
        let text = serde_json::to_string_pretty(&sidecar)? + "\n";
        self.write(&format!("{command}.json"), &text)
    }
}

fn load_spec(name: &str) -> Result<TankSpec> {
    let spec = TankSpec::load(name).map_err(|e| config_err(format!("spec {name:?}: {e}")))?;
    let violations = tanksim::model::validate(&spec);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        bail!(config_err(format!("spec {name:?} is invalid: {}", list.join("; "))));
    }
    Ok(spec)
}

fn record_format(path: &Path, format: Option<&str>) -> Result<RecordFormat> {
    if let Some(f) = format {
        return f.parse::<RecordFormat>().map_err(|e| config_err(e.to_string()));
    }
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    Ok(match ext.as_str() {
        "at2" => RecordFormat::PeerFixedWidth,
        "csv" => RecordFormat::TwoColumnCsv,
        _ => RecordFormat::SingleColumnWithDtHeader,
    })
}

fn load_record(path: &Path, format: Option<&str>) -> Result<ParsedRecord> {
    let fmt = record_format(path, format)?;
    let bytes = fs::read(path).map_err(|e| config_err(format!("record {}: {e}", path.display())))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("record");
    gmproc::parse_record(&bytes, fmt, name).map_err(|e| config_err(format!("record {}: {e}", path.display())))
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        bail!(config_err(format!("--{name} must be > 0, got {v}")));
    }
    Ok(())
}

fn check_ratio(name: &str, v: f64) -> Result<()> {
    if !(0.0..1.0).contains(&v) {
        bail!(config_err(format!("--{name} must lie in [0, 1), got {v}")));
    }
    Ok(())
}

fn csv(header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| num(*v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.4}"))
}

// ---------------------------------------------------------------- modal

#[derive(Serialize)]
struct PeriodLine {
    label: String,
    en: Option<f64>,
    fe: Option<f64>,
    reference_fe: Option<f64>,
    reference_code: Option<f64>,
}

fn reference_for(spec: &TankSpec, label: &str) -> (Option<f64>, Option<f64>) {
    let row = reference::period_row(label);
    match (spec.name.as_str(), row) {
        ("slender", Some(r)) => (Some(r.slender_fe), Some(r.slender_code)),
        ("broad", Some(r)) => (Some(r.broad_fe), Some(r.broad_code)),
        _ => (None, None),
    }
}

fn modal(a: &ModalArgs, out: &Output) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    if a.modes == 0 {
        bail!(config_err("--modes must be at least 1"));
    }
    check_positive("mesh-size", a.mesh_size)?;
    if a.beam_elements < 4 {
        bail!(config_err("--beam-elements must be at least 4"));
    }
    if let Some(k) = a.dump_mode {
        if k == 0 || k > a.modes {
            bail!(config_err(format!("--dump-mode must lie in 1..={}", a.modes)));
        }
    }
    if out.validate_only() {
        println!("ok");
        return Ok(());
    }
    let want = |m: Method| a.method == m || a.method == Method::All;

    let (t_i_en, _) = mechmodel::impulsive_period(&spec);
    let conv = mechmodel::convective_params(&spec, a.modes)?;
    let mut lines = vec![PeriodLine {
        label: "T_i".into(),
        en: want(Method::En).then_some(t_i_en),
        fe: None,
        reference_fe: None,
        reference_code: None,
    }];
    for m in &conv {
        lines.push(PeriodLine {
            label: format!("T_c{}", m.index),
            en: want(Method::En).then_some(m.period),
            fe: None,
            reference_fe: None,
            reference_code: None,
        });
    }
    let mut results = serde_json::Map::new();

    if want(Method::Fe) {
        let sol = sloshfem::tank_modes(&spec.geometry, &spec.liquid, spec.gravity, a.mesh_size, 1, a.modes, exec())?;
        for (line, t) in lines.iter_mut().skip(1).zip(sol.periods()) {
            line.fe = Some(t);
        }
        results.insert("fe_nodes".into(), json!(sol.mesh.node_count()));
        results.insert("fe_residuals".into(), json!(sol.residuals));
        if let Some(k) = a.dump_mode {
            out.write(&format!("mode_{k}.csv"), &sol.mode_csv(k - 1)?)?;
        }
        if a.export_mesh {
            let (nodes, elems) = sol.mesh.to_csv();
            out.write("mesh_nodes.csv", &nodes)?;
            out.write("mesh_elements.csv", &elems)?;
        }
    }
    if want(Method::Beam) {
        let opts = ImpulsiveOptions {
            elements: a.beam_elements,
            timoshenko: !a.no_shear,
            ..ImpulsiveOptions::default()
        };
        let mode = beamtank::impulsive_mode(&spec, opts)?;
        lines[0].fe = Some(mode.period);
        results.insert("beam_iterations".into(), json!(mode.iterations));
        results.insert("beam_trajectory".into(), json!(mode.trajectory));
        let shape = mode.wetted_shape();
        out.write("beam_mode.csv", &csv(&names(&["zeta", "psi"]), shape.iter().map(|(z, p)| vec![*z, *p])))?;
    }
    for line in &mut lines {
        let (f, c) = reference_for(&spec, &line.label);
        line.reference_fe = f;
        line.reference_code = c;
    }

    let mut table = String::new();
    let _ = writeln!(table, "{:<6} {:>10} {:>10} {:>10} {:>10}", "period", "EN", "FE/beam", "ref FE", "ref EN");
    for l in &lines {
        let _ = writeln!(
            table,
            "{:<6} {:>10} {:>10} {:>10} {:>10}",
            l.label,
            fmt_opt(l.en),
            fmt_opt(l.fe),
            fmt_opt(l.reference_fe),
            fmt_opt(l.reference_code)
        );
    }
    print!("{table}");
    let nan = |v: Option<f64>| v.unwrap_or(f64::NAN);
    let mut body = String::from("label,en,fe,reference_fe,reference_code\n");
    for l in &lines {
        let _ = writeln!(
            body,
            "{},{},{},{},{}",
            l.label,
            num(nan(l.en)),
            num(nan(l.fe)),
            num(nan(l.reference_fe)),
            num(nan(l.reference_code))
        );
    }
    out.write("modal.csv", &body)?;
    results.insert("periods".into(), serde_json::to_value(&lines)?);
    out.finish("modal", Value::Object(results))
}

// ------------------------------------------------------------- spectrum

fn log_periods(t_min: f64, t_max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![t_min];
    }
    let r = (t_max / t_min).ln() / (count - 1) as f64;
    (0..count).map(|i| t_min * (r * i as f64).exp()).collect()
}

fn spectrum(a: &SpectrumArgs, out: &Output) -> Result<()> {
    check_ratio("damping", a.damping)?;
    check_positive("t-min", a.t_min)?;
    check_positive("t-max", a.t_max)?;
    if a.t_max < a.t_min || a.count == 0 {
        bail!(config_err("need t-min <= t-max and count >= 1"));
    }
    let rec = load_record(&a.record.record, a.record.format.as_deref())?;
    if out.validate_only() {
        println!("ok");
        return Ok(());
    }
    let periods = log_periods(a.t_min, a.t_max, a.count);
    let sa = gmproc::response_spectrum(&rec.motion, a.damping, &periods, exec())?;
    out.write(
        "spectrum.csv",
        &csv(&names(&["period", "pseudo_acceleration"]), periods.iter().zip(&sa).map(|(t, s)| vec![*t, *s])),
    )?;
    let peaks = gmproc::peaks(&rec.motion)?;
    out.finish("spectrum", json!({ "record": rec.motion.name, "peaks": peaks, "samples": rec.motion.len() }))
}

// ------------------------------------------------------ pressure-profile

fn pressure_profile(a: &PressureArgs, out: &Output) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    if a.points < 3 || a.modes == 0 {
        bail!(config_err("need --points >= 3 and --modes >= 1"));
    }
    check_ratio("structural-damping", a.structural_damping)?;
    check_ratio("convective-damping", a.convective_damping)?;
    let rec = a.record.as_ref().map(|p| load_record(p, a.format.as_deref())).transpose()?;
    if out.validate_only() {
        println!("ok");
        return Ok(());
    }
    let grid = mechmodel::unit_grid(a.points);
    let imp = mechmodel::impulsive_params(&spec);
    let conv = mechmodel::convective_params(&spec, a.modes)?;
    let mut profiles: Vec<(String, PressureProfile, f64)> = Vec::new();
    let mut period_of = vec![imp.period];
    profiles.push(("impulsive_rigid".into(), mechmodel::rigid_impulsive_pressure_profile(&spec, &grid)?, 0.0));
    let mut flexible = None;
    if a.flexible {
        let mode = beamtank::impulsive_mode(&spec, ImpulsiveOptions::default())?;
        let shape = mode.shape.clone();
        let profile = mechmodel::flexible_impulsive_pressure_profile(&spec, &|z| shape.psi(z), &grid)?;
        flexible = Some(mode.period);
        profiles.push(("impulsive_flexible".into(), profile, 0.0));
        period_of.push(mode.period);
    }
    for m in &conv {
        profiles.push((format!("convective_{}", m.index), mechmodel::convective_pressure_profile(m, &spec, &grid)?, 0.0));
        period_of.push(m.period);
    }
    // driving accelerations: spectral values when a record is given
    for (i, p) in profiles.iter_mut().enumerate() {
        p.2 = match &rec {
            None => 1.0,
            Some(r) => {
                let damping = if i < period_of.len() - conv.len() { a.structural_damping } else { a.convective_damping };
                gmproc::response_spectrum(&r.motion, damping, &[period_of[i]], Exec::Sequential)?[0]
            }
        };
    }
    // the SRSS uses one impulsive profile: the flexible one when present
    let combined: Vec<(&PressureProfile, f64)> = profiles
        .iter()
        .filter(|p| !(a.flexible && p.0 == "impulsive_rigid"))
        .map(|p| (&p.1, p.2))
        .collect();
    let srss = mechmodel::combine_srss(&combined)?;
    let mut header = vec!["zeta".to_string()];
    header.extend(profiles.iter().map(|p| p.0.clone()));
    header.push("srss".into());
    let rows = (0..grid.len()).map(|k| {
        let mut row = vec![grid[k]];
        row.extend(profiles.iter().map(|p| p.1.pressure[k] * p.2));
        row.push(srss[k]);
        row
    });
    out.write("pressure_profile.csv", &csv(&header, rows))?;
    let weights: Vec<Value> = profiles.iter().map(|p| json!({ "component": p.0, "acceleration": p.2 })).collect();
    out.finish(
        "pressure-profile",
        json!({
            "weights": weights,
            "flexible_period": flexible,
            "impulsive_mass": imp.mass,
            "srss_peak": srss.iter().cloned().fold(0.0, f64::max),
        }),
    )
}

// -------------------------------------------------------------- simulate

fn rotation_grid(max: f64, samples: usize) -> Vec<f64> {
    (0..samples).map(|i| max * (i as f64 / (samples - 1) as f64).powi(2)).collect()
}

fn simulate(a: &SimulateArgs, out: &Output) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    if a.modes == 0 {
        bail!(config_err("--modes must be at least 1"));
    }
    check_ratio("structural-damping", a.structural_damping)?;
    check_ratio("convective-damping", a.convective_damping)?;
    if let Some(dt) = a.dt_sub {
        check_positive("dt-sub", dt)?;
    }
    if let Some(t) = a.impulsive_period {
        check_positive("impulsive-period", t)?;
    }
    check_positive("max-rotation", a.max_rotation)?;
    if a.rotation_samples < 3 {
        bail!(config_err("--rotation-samples must be at least 3"));
    }
    if a.uplift && spec.geometry.anchorage == tanksim::Anchorage::Anchored {
        bail!(config_err("--uplift needs an unanchored spec"));
    }
    let rec = load_record(&a.record.record, a.record.format.as_deref())?;
    if let Some(dt) = a.dt_sub {
        if dt > rec.motion.dt {
            bail!(config_err(format!("--dt-sub must not exceed the record step {}", rec.motion.dt)));
        }
    }
    if out.validate_only() {
        println!("ok");
        return Ok(());
    }
    let curve = if a.uplift {
        let thetas = rotation_grid(a.max_rotation, a.rotation_samples);
        Some(uplift::moment_rotation(&spec, MomentRotationOptions::default(), &thetas, exec())?)
    } else {
        None
    };
    let run = |convective: f64| -> Result<simulate::ResponseHistory> {
        let opts = SystemOptions {
            convective_modes: a.modes,
            damping: simulate::DampingOptions {
                structural: a.structural_damping,
                convective,
            },
            impulsive_period: a.impulsive_period,
            ..SystemOptions::default()
        };
        let sys = simulate::assemble_system(&spec, &opts, curve.as_ref())?;
        let params = NewmarkParams {
            dt_sub: a.dt_sub,
            ..NewmarkParams::default()
        };
        Ok(simulate::newmark(&sys, &rec.motion, &params)?)
    };
    let history = run(a.convective_damping)?;
    let peaks = simulate::peak_report(&history)?;
    // the convective damping behind published spring-mass peaks is not
    // known; report the other customary value alongside
    let alt_damping = if a.convective_damping == 0.02 { 0.005 } else { 0.02 };
    let alt = simulate::peak_report(&run(alt_damping)?)?;
    out.write("history.csv", &history.to_csv())?;
    let rows = json!([
        { "label": "Sloshing wave height", "value": peaks.wave_height.value, "unit": "m" },
        { "label": "Uplift displacement", "value": peaks.uplift.value, "unit": "m" },
    ]);
    out.write("peaks.json", &(serde_json::to_string_pretty(&json!({ "rows": rows, "peaks": peaks }))? + "\n"))?;
    println!("Sloshing wave height {:.4} m", peaks.wave_height.value);
    println!("Uplift displacement  {:.4} m", peaks.uplift.value);
    if peaks.overtops {
        println!("wave height exceeds the freeboard ({:.3} m)", peaks.freeboard);
    }
    out.finish(
        "simulate",
        json!({
            "steps": history.len(),
            "energy_residual": history.energy.residual(),
            "peaks": peaks,
            "alternate_convective_damping": { "ratio": alt_damping, "wave_height": alt.wave_height.value, "uplift": alt.uplift.value },
        }),
    )
}

// ---------------------------------------------------------- uplift-curve

fn uplift_curve(a: &UpliftArgs, out: &Output) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    check_positive("max-rotation", a.max_rotation)?;
    if a.samples < 2 || a.sectors < 72 || a.strip_nodes < 5 {
        bail!(config_err("need --samples >= 2, --sectors >= 72 and --strip-nodes >= 5"));
    }
    if spec.geometry.anchorage == tanksim::Anchorage::Anchored {
        bail!(config_err("uplift-curve needs an unanchored spec"));
    }
    if out.validate_only() {
        println!("ok");
        return Ok(());
    }
    let thetas = rotation_grid(a.max_rotation, a.samples);
    let opts = MomentRotationOptions {
        sectors: a.sectors,
        strip_nodes: a.strip_nodes,
        ..MomentRotationOptions::default()
    };
    let curve = uplift::moment_rotation(&spec, opts, &thetas, exec())?;
    out.write(
        "uplift_force.csv",
        &csv(
            &names(&["uplift", "force", "length", "max_moment", "beyond_yield"]),
            curve
                .uplift_curve
                .samples
                .iter()
                .map(|s| vec![s.uplift, s.force, s.length, s.max_moment, s.beyond_yield as u8 as f64]),
        ),
    )?;
    out.write(
        "moment_rotation.csv",
        &csv(
            &names(&["rotation", "moment", "neutral_axis", "max_uplift", "residual"]),
            curve.samples.iter().map(|s| vec![s.rotation, s.moment, s.neutral_axis, s.max_uplift, s.residual]),
        ),
    )?;
    let first_beyond = curve.uplift_curve.samples.iter().find(|s| s.beyond_yield).map(|s| s.uplift);
    println!("hinge moment {:.4e} N·m/m", curve.plastic.hinge_moment);
    if let Some(w) = curve.plastic.first_yield_uplift {
        println!("first yield at edge uplift {w:.4e} m");
    }
    out.finish(
        "uplift-curve",
        json!({
            "plastic": curve.plastic,
            "first_sample_beyond_yield": first_beyond,
            "monotone": curve.is_monotone(),
            "max_residual": curve.samples.iter().map(|s| s.residual).fold(0.0, f64::max),
            "contact_stiffness": curve.contact_stiffness,
            "shell_weight": curve.shell_weight,
            "total_weight": curve.total_weight,
        }),
    )
}

// ---------------------------------------------------------- scale-record

fn scale_record(a: &ScaleArgs, out: &Output) -> Result<()> {
    let scale = ScaleModel::new(a.lambda).map_err(|e| config_err(e.to_string()))?;
    let rec = load_record(&a.record.record, a.record.format.as_deref())?;
    if out.validate_only() {
        println!("ok");
        return Ok(());
    }
    let scaled = gmproc::froude_scale(&rec.motion, scale);
    let text = gmproc::write_record(&scaled, rec.format, rec.units, &rec.header);
    let path = &a.record.record;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("record");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_scaled.{ext}"),
        None => format!("{stem}_scaled"),
    };
    out.write(&name, &text)?;
    let peaks = |gm: &GroundMotion| gmproc::peaks(gm).ok();
    out.finish(
        "scale-record",
        json!({
            "scaled_record": name,
            "format": rec.format,
            "dt": { "original": rec.motion.dt, "scaled": scaled.dt },
            "peaks": { "original": peaks(&rec.motion), "scaled": peaks(&scaled) },
        }),
    )
}

// ---------------------------------------------------------------- report

#[derive(Serialize)]
struct ReportPeriod {
    tank: String,
    label: String,
    en: f64,
    fe: f64,
    reference_fe: f64,
    reference_code: f64,
}

#[derive(Serialize)]
struct ReportPeak {
    label: String,
    spring_mass: Option<f64>,
    reference_spring_mass: f64,
    reference_fe: f64,
    reference_test: f64,
}

fn report(a: &ReportArgs, out: &Output) -> Result<()> {
    let tanks = [("slender", load_spec(&a.slender)?), ("broad", load_spec(&a.broad)?)];
    check_positive("mesh-size", a.mesh_size)?;
    let wave = a.wave_record.as_ref().map(|p| load_record(p, a.format.as_deref())).transpose()?;
    let lift = a.uplift_record.as_ref().map(|p| load_record(p, a.format.as_deref())).transpose()?;
    if out.validate_only() {
        println!("ok");
        return Ok(());
    }
    let mut periods = Vec::new();
    for (tank, spec) in &tanks {
        let (t_i, _) = mechmodel::impulsive_period(spec);
        let beam = beamtank::impulsive_mode(spec, ImpulsiveOptions::default())?;
        let conv = mechmodel::convective_params(spec, 3)?;
        let fe = sloshfem::tank_modes(&spec.geometry, &spec.liquid, spec.gravity, a.mesh_size, 1, 3, exec())?;
        let mut row = |label: &str, en: f64, fe: f64| {
            let r = reference::period_row(label).ok_or_else(|| anyhow!("no reference row {label}"))?;
            let (rf, rc) = if *tank == "slender" { (r.slender_fe, r.slender_code) } else { (r.broad_fe, r.broad_code) };
            periods.push(ReportPeriod {
                tank: tank.to_string(),
                label: label.into(),
                en,
                fe,
                reference_fe: rf,
                reference_code: rc,
            });
            anyhow::Ok(())
        };
        row("T_i", t_i, beam.period)?;
        for (m, t) in conv.iter().zip(fe.periods()) {
            row(&format!("T_c{}", m.index), m.period, t)?;
        }
    }

    let broad = &tanks[1].1;
    let peak_of = |rec: &Option<ParsedRecord>, with_uplift: bool| -> Result<Option<f64>> {
        let Some(r) = rec else { return Ok(None) };
        let curve = if with_uplift {
            Some(uplift::moment_rotation(broad, MomentRotationOptions::default(), &rotation_grid(0.02, 33), exec())?)
        } else {
            None
        };
        let sys = simulate::assemble_system(broad, &SystemOptions::default(), curve.as_ref())?;
        let p = simulate::peak_report(&simulate::newmark(&sys, &r.motion, &NewmarkParams::default())?)?;
        Ok(Some(if with_uplift { p.uplift.value } else { p.wave_height.value }))
    };
    let computed = [peak_of(&wave, false)?, peak_of(&lift, true)?];
    let peaks: Vec<ReportPeak> = reference::BROAD_PEAKS
        .iter()
        .zip(computed)
        .map(|(r, c)| ReportPeak {
            label: r.label.into(),
            spring_mass: c,
            reference_spring_mass: r.spring_mass,
            reference_fe: r.fe,
            reference_test: r.test,
        })
        .collect();

    let mut md = String::from("## Natural periods (s)\n\n| tank | period | EN formula | FE / beam | ref FE | ref EN |\n|---|---|---|---|---|---|\n");
    for p in &periods {
        let _ = writeln!(
            md,
            "| {} | {} | {:.3} | {:.3} | {:.3} | {:.3} |",
            p.tank, p.label, p.en, p.fe, p.reference_fe, p.reference_code
        );
    }
    md.push_str("\n## Broad tank peak response (m)\n\n| quantity | spring-mass | ref spring-mass | ref FE | ref test |\n|---|---|---|---|---|\n");
    for p in &peaks {
        let _ = writeln!(
            md,
            "| {} | {} | {:.3} | {:.3} | {:.3} |",
            p.label,
            p.spring_mass.map_or("n/a".into(), |v| format!("{v:.3}")),
            p.reference_spring_mass,
            p.reference_fe,
            p.reference_test
        );
    }
    let materials: Vec<Value> = tanks
        .iter()
        .map(|(t, s)| json!({ "tank": t, "elastic_modulus": s.shell.elastic_modulus, "poisson_ratio": s.shell.poisson_ratio, "density": s.shell.density }))
        .collect();
    print!("{md}");
    out.write("report.md", &md)?;
    out.finish("report", json!({ "periods": periods, "peaks": peaks, "materials": materials }))
}
