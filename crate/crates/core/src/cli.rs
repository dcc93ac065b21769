//! Command-line front end: `generate`, `ingest`, `fit`, `predict`, `eval`.
//!
//! Exit codes are 0 on success, 2 for usage and validation errors, and 1
//! for numeric or internal failures.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::atmosphere::{builtin_profile, generate_grid, load_profile, AbsorptionProfile};
use crate::datagrid::{
    builtin_band, builtin_bands, builtin_scenario, ingest_external, theta_grid, write_grid, ScenarioSpec, SubBand,
    TransmittanceGrid, DEFAULT_STEP_THZ,
};
use crate::error::{Error, Result};
use crate::evaluation::{
    holdout_fit, pathloss_vs_f_csv, per_band_report, write_report, BandInput, CurveSlice, EvalReport,
};
use crate::geometry::Position3D;
use crate::model::{export_model, import_model, PathLossModel, PathLossPrediction, PathLossQuery};
use crate::regression::{fit_adaptive, fit_agnostic, AdaptiveFit, AgnosticFit, ClampEvent, FitOptions, Step2Estimator};

#[derive(Debug, Parser)]
#[command(
    name = "skyloss",
    version,
    about = "Fit and evaluate closed-form THz path-loss models"
)]
pub struct Cli {
    /// Worker threads (defaults to SKYLOSS_THREADS, then the number of CPUs).
    #[arg(long, global = true, env = "SKYLOSS_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate transmittance grids from an absorption profile.
    Generate(GenerateArgs),
    /// Convert an externally produced long-form CSV into a canonical grid file.
    Ingest(IngestArgs),
    /// Fit path-loss models to grid files.
    Fit(FitArgs),
    /// Predict path loss between two positions (meters) at a frequency (THz).
    Predict(PredictArgs),
    /// Score fitted models and the free-space baseline on grid files.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Scenario preset (Dr2Dr, MAAC, U2U) or `custom` with explicit axes.
    #[arg(long)]
    pub scenario: String,
    /// Sub-band names, or `all` for every built-in band.
    #[arg(long, required_unless_present = "band_range", value_delimiter = ',')]
    pub band: Vec<String>,
    /// Custom band as `f_lo,f_hi` in THz.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "band")]
    pub band_range: Option<Vec<f64>>,
    /// Profile file, or the name of a built-in profile (`standard`).
    #[arg(long, default_value = "standard")]
    pub profile: String,
    /// Output directory; one CSV per band.
    #[arg(long)]
    pub out: PathBuf,
    /// Frequency step in GHz.
    #[arg(long, default_value_t = DEFAULT_STEP_THZ * 1000.0)]
    pub step_ghz: f64,
    /// Overall humidity scale applied to the profile.
    #[arg(long)]
    pub humidity: Option<f64>,
    /// Custom altitude axis in km (with `--scenario custom`).
    #[arg(long, value_delimiter = ',')]
    pub altitudes: Option<Vec<f64>>,
    /// Custom distance axis in km (with `--scenario custom`).
    #[arg(long, value_delimiter = ',')]
    pub distances: Option<Vec<f64>>,
    /// Custom zenith-angle axis in degrees (defaults to 0, 4.5, ..., 90).
    #[arg(long, value_delimiter = ',')]
    pub thetas: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Agnostic,
    Adaptive,
    Both,
}

impl MethodArg {
    fn agnostic(self) -> bool {
        matches!(self, MethodArg::Agnostic | MethodArg::Both)
    }

    fn adaptive(self) -> bool {
        matches!(self, MethodArg::Adaptive | MethodArg::Both)
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitSettings {
    #[arg(long, value_enum, default_value = "both")]
    pub method: MethodArg,
    /// Polynomial degree of the horizontal branch (agnostic).
    #[arg(long, default_value_t = 6)]
    pub degree_h: usize,
    /// Polynomial degree of the vertical branch (agnostic).
    #[arg(long, default_value_t = 6)]
    pub degree_v: usize,
    /// Polynomial degree per angle (adaptive).
    #[arg(long, default_value_t = 6)]
    pub degree: usize,
    /// Refine the altitude stage with Gauss-Newton in the linear domain.
    #[arg(long)]
    pub step2_gauss_newton: bool,
    /// Samples with transmittance below this are excluded from the fit.
    #[arg(long, default_value_t = 1e-12)]
    pub tau_min: f64,
}

impl FitSettings {
    fn options(&self) -> FitOptions {
        FitOptions {
            tau_min: self.tau_min,
            step2: if self.step2_gauss_newton {
                Step2Estimator::GaussNewton { max_iter: 50 }
            } else {
                Step2Estimator::LogLinear
            },
            ..FitOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Grid files (canonical or external long-form CSV).
    #[arg(long, required = true, num_args = 1..)]
    pub grid: Vec<PathBuf>,
    /// Output directory for model files and fit reports.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub settings: FitSettings,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// First position `x,y,z` in meters.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required_unless_present = "batch"
    )]
    pub p1: Option<Vec<f64>>,
    /// Second position `x,y,z` in meters.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required_unless_present = "batch"
    )]
    pub p2: Option<Vec<f64>>,
    /// Frequency in THz.
    #[arg(long, required_unless_present = "batch")]
    pub freq: Option<f64>,
    /// CSV with header `x1,y1,z1,x2,y2,z2,f_thz`; one output row per input row.
    #[arg(long, conflicts_with_all = ["p1", "p2", "freq"])]
    pub batch: Option<PathBuf>,
    /// Batch output file (stdout if omitted).
    #[arg(long, requires = "batch")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Truth grid files, one per band.
    #[arg(long, required = true, num_args = 1..)]
    pub grid: Vec<PathBuf>,
    /// θ-agnostic model files, in grid order.
    #[arg(long, num_args = 1..)]
    pub agnostic: Vec<PathBuf>,
    /// θ-adaptive model files, in grid order.
    #[arg(long, num_args = 1..)]
    pub adaptive: Vec<PathBuf>,
    /// Output directory for report CSVs.
    #[arg(long)]
    pub out: PathBuf,
    /// Fixed `l=..,d=..,theta=..` (km, km, degrees) for `pathloss_vs_f.csv`.
    #[arg(long)]
    pub slice: Option<String>,
    /// Fit on even zenith-angle indices and score on the odd ones.
    #[arg(long, conflicts_with_all = ["agnostic", "adaptive"])]
    pub holdout: bool,
    #[command(flatten)]
    pub settings: FitSettings,
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let mut stdout = std::io::stdout().lock();
    match run(cli, &mut stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn std::io::Write) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n as usize);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::NumericFailure(format!("cannot start worker pool: {e}")))?;
    let text = pool.install(|| match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Ingest(a) => cmd_ingest(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Eval(a) => cmd_eval(&a),
    })?;
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

fn slug(name: &str) -> String {
    name.chars()
        .filter(char::is_ascii_alphanumeric)
        .flat_map(|c| c.to_lowercase())
        .collect()
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn resolve_profile(spec: &str) -> Result<AbsorptionProfile> {
    let path = Path::new(spec);
    if path.exists() {
        load_profile(path)
    } else if spec.contains(['/', '.']) {
        Err(Error::io(path, std::io::Error::from(std::io::ErrorKind::NotFound)))
    } else {
        builtin_profile(spec)
    }
}

fn resolve_scenario(a: &GenerateArgs) -> Result<ScenarioSpec> {
    let thetas = a.thetas.clone().unwrap_or_else(theta_grid);
    if a.scenario.eq_ignore_ascii_case("custom") {
        let (Some(l), Some(d)) = (a.altitudes.clone(), a.distances.clone()) else {
            return Err(Error::invalid("scenario", "`custom` needs --altitudes and --distances"));
        };
        return ScenarioSpec::new("custom", l, d, thetas);
    }
    let base = builtin_scenario(&a.scenario)?;
    if a.altitudes.is_some() || a.distances.is_some() || a.thetas.is_some() {
        let l = a.altitudes.clone().unwrap_or_else(|| base.altitudes().to_vec());
        let d = a.distances.clone().unwrap_or_else(|| base.distances().to_vec());
        return base.with_axes(l, d, thetas);
    }
    Ok(base)
}

fn resolve_bands(a: &GenerateArgs, step: f64) -> Result<Vec<SubBand>> {
    if let Some(r) = &a.band_range {
        let [lo, hi] = r[..] else {
            return Err(Error::invalid(
                "band-range",
                format!("expected `f_lo,f_hi`, got {} values", r.len()),
            ));
        };
        return Ok(vec![SubBand::new("custom", lo, hi, step)?]);
    }
    let mut bands = Vec::new();
    for name in &a.band {
        if name.eq_ignore_ascii_case("all") {
            bands.extend(builtin_bands());
        } else {
            bands.push(builtin_band(name)?);
        }
    }
    bands.into_iter().map(|b| b.with_step(step)).collect()
}

fn cmd_generate(a: &GenerateArgs) -> Result<String> {
    if !(a.step_ghz > 0.0 && a.step_ghz.is_finite()) {
        return Err(Error::range("step-ghz", a.step_ghz, "> 0"));
    }
    let mut profile = resolve_profile(&a.profile)?;
    if let Some(h) = a.humidity {
        profile = profile.with_humidity_scale(h)?;
    }
    let scenario = resolve_scenario(a)?;
    let bands = resolve_bands(a, a.step_ghz / 1000.0)?;
    create_dir(&a.out)?;
    let mut report = String::new();
    for band in &bands {
        let grid = generate_grid(&profile, &scenario, band)?;
        let path = a
            .out
            .join(format!("{}_{}.csv", slug(scenario.name()), slug(band.name())));
        write_grid(&grid, &path)?;
        let [nl, nd, nt, nf] = grid.axes().shape();
        writeln!(
            report,
            "{}: {} x {} shape {nl} x {nd} x {nt} x {nf} = {} cells",
            path.display(),
            scenario.name(),
            band.name(),
            grid.n_samples()
        )
        .expect("string write");
    }
    Ok(report)
}

/// Reads a grid file whose rows may be in any order.
pub fn load_grid(path: &Path) -> Result<TransmittanceGrid> {
    ingest_external(path)
}

fn cmd_ingest(a: &IngestArgs) -> Result<String> {
    let grid = ingest_external(&a.input)?;
    write_grid(&grid, &a.out)?;
    let [nl, nd, nt, nf] = grid.axes().shape();
    Ok(format!(
        "{}: {} x {} shape {nl} x {nd} x {nt} x {nf} = {} cells\n",
        a.out.display(),
        grid.scenario().name(),
        grid.band().name(),
        grid.n_samples()
    ))
}

#[derive(Serialize)]
struct FitReportFile {
    grid: String,
    scenario: String,
    band: String,
    n_samples: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    agnostic: Option<AgnosticSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    adaptive: Option<AdaptiveSection>,
}

#[derive(Serialize)]
struct BranchSection {
    b2_mean: f64,
    b2_spread: f64,
    r2_min: f64,
    r2_mean: f64,
    step3_sse: f64,
}

impl From<&crate::regression::BranchReport> for BranchSection {
    fn from(b: &crate::regression::BranchReport) -> Self {
        Self {
            b2_mean: b.b2_mean,
            b2_spread: b.b2_spread,
            r2_min: b.r2_min,
            r2_mean: b.r2_mean,
            step3_sse: b.step3_sse,
        }
    }
}

#[derive(Serialize)]
struct ClampSection {
    branch: String,
    l_km: f64,
    f_thz: f64,
    raw_b1: f64,
}

/// Clamp events listed individually in a fit report; the count is always exact.
const MAX_LISTED_CLAMPS: usize = 50;

fn clamp_sections(events: &[ClampEvent]) -> Vec<ClampSection> {
    events
        .iter()
        .take(MAX_LISTED_CLAMPS)
        .map(|e| ClampSection {
            branch: e.branch.to_string(),
            l_km: e.l,
            f_thz: e.f,
            raw_b1: e.raw,
        })
        .collect()
}

#[derive(Serialize)]
struct AgnosticSection {
    model: String,
    degree_h: u64,
    degree_v: u64,
    coefficient_count: u64,
    excluded_samples: u64,
    step1_sse: f64,
    clamp_events: u64,
    horizontal: BranchSection,
    vertical: BranchSection,
    clamps: Vec<ClampSection>,
}

#[derive(Serialize)]
struct AngleSection {
    theta: f64,
    step1_sse: f64,
    b2_mean: f64,
    b2_spread: f64,
    r2_min: f64,
    r2_mean: f64,
    step3_sse: f64,
}

#[derive(Serialize)]
struct AdaptiveSection {
    model: String,
    degree: u64,
    coefficient_count: u64,
    excluded_samples: u64,
    step1_sse: f64,
    clamp_events: u64,
    angles: Vec<AngleSection>,
    clamps: Vec<ClampSection>,
}

fn agnostic_section(fit: &AgnosticFit, model: &Path, s: &FitSettings) -> AgnosticSection {
    let r = &fit.report;
    AgnosticSection {
        model: file_name(model),
        degree_h: s.degree_h as u64,
        degree_v: s.degree_v as u64,
        coefficient_count: fit.model.coefficient_count() as u64,
        excluded_samples: r.excluded_samples as u64,
        step1_sse: r.step1_sse,
        clamp_events: r.clamp_events.len() as u64,
        horizontal: (&r.horizontal).into(),
        vertical: (&r.vertical).into(),
        clamps: clamp_sections(&r.clamp_events),
    }
}

fn adaptive_section(fit: &AdaptiveFit, model: &Path, s: &FitSettings) -> AdaptiveSection {
    let r = &fit.report;
    AdaptiveSection {
        model: file_name(model),
        degree: s.degree as u64,
        coefficient_count: fit.model.coefficient_count() as u64,
        excluded_samples: r.excluded_samples as u64,
        step1_sse: r.step1_sse,
        clamp_events: r.clamp_events.len() as u64,
        angles: r
            .angles
            .iter()
            .map(|a| AngleSection {
                theta: a.theta,
                step1_sse: a.step1_sse,
                b2_mean: a.branch.b2_mean,
                b2_spread: a.branch.b2_spread,
                r2_min: a.branch.r2_min,
                r2_mean: a.branch.r2_mean,
                step3_sse: a.branch.step3_sse,
            })
            .collect(),
        clamps: clamp_sections(&r.clamp_events),
    }
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "grid".into())
}

fn cmd_fit(a: &FitArgs) -> Result<String> {
    let s = &a.settings;
    let opts = s.options();
    create_dir(&a.out)?;
    let mut summary = String::new();
    for grid_path in &a.grid {
        let grid = load_grid(grid_path)?;
        let base = stem(grid_path);
        let mut report = FitReportFile {
            grid: file_name(grid_path),
            scenario: grid.scenario().name().into(),
            band: grid.band().name().into(),
            n_samples: grid.n_samples() as u64,
            agnostic: None,
            adaptive: None,
        };
        if s.method.agnostic() {
            let fit = fit_agnostic(&grid, s.degree_h, s.degree_v, &opts)?;
            let path = a.out.join(format!("{base}.agnostic.toml"));
            export_model(&PathLossModel::Agnostic(fit.model.clone()), &path)?;
            let section = agnostic_section(&fit, &path, s);
            writeln!(
                summary,
                "{}: agnostic, {} coefficients, step-1 SSE {:.3e}, {} clamp event(s)",
                path.display(),
                section.coefficient_count,
                section.step1_sse,
                section.clamp_events
            )
            .expect("string write");
            report.agnostic = Some(section);
        }
        if s.method.adaptive() {
            let fit = fit_adaptive(&grid, s.degree, &opts)?;
            let path = a.out.join(format!("{base}.adaptive.toml"));
            export_model(&PathLossModel::Adaptive(fit.model.clone()), &path)?;
            let section = adaptive_section(&fit, &path, s);
            writeln!(
                summary,
                "{}: adaptive, {} coefficients, step-1 SSE {:.3e}, {} clamp event(s)",
                path.display(),
                section.coefficient_count,
                section.step1_sse,
                section.clamp_events
            )
            .expect("string write");
            report.adaptive = Some(section);
        }
        let path = a.out.join(format!("{base}.fit-report.toml"));
        let text = toml::to_string(&report).map_err(|e| Error::NumericFailure(format!("fit report: {e}")))?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(summary)
}

fn position(v: &[f64]) -> Result<Position3D> {
    let [x, y, z] = v[..] else {
        return Err(Error::invalid(
            "position",
            format!("expected `x,y,z`, got {} values", v.len()),
        ));
    };
    Position3D::new(x, y, z)
}

fn prediction_text(p: &PathLossPrediction) -> String {
    let g = &p.geometry;
    let mut s = String::new();
    let _ = writeln!(s, "l_m = {:?}", g.l);
    let _ = writeln!(s, "d_m = {:?}", g.d);
    let _ = writeln!(s, "d_h_m = {:?}", g.d_h);
    let _ = writeln!(s, "d_v_m = {:?}", g.d_v);
    let _ = writeln!(s, "theta_deg = {:?}", g.theta);
    let _ = writeln!(s, "tau = {:?}", p.tau.tau);
    let _ = writeln!(s, "fspl_db = {:.6}", p.fspl_db);
    let _ = writeln!(s, "abs_db = {:.6}", p.abs_db);
    let _ = writeln!(s, "total_db = {:.6}", p.total_db);
    if p.tau.clamped {
        let _ = writeln!(s, "warning = \"transmittance clamped into (0, 1]\"");
    }
    s
}

const BATCH_HEADER: &str = "x1,y1,z1,x2,y2,z2,f_thz";

fn cmd_predict(a: &PredictArgs) -> Result<String> {
    let model = import_model(&a.model)?;
    let Some(batch) = &a.batch else {
        let (p1, p2, f) = (
            a.p1.as_deref().expect("clap"),
            a.p2.as_deref().expect("clap"),
            a.freq.expect("clap"),
        );
        let q = PathLossQuery::new(position(p1)?, position(p2)?, f)?;
        return Ok(prediction_text(&model.predict_path_loss(&q)?));
    };
    let text = std::fs::read_to_string(batch).map_err(|e| Error::io(batch, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == BATCH_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                reason: format!("expected header `{BATCH_HEADER}`"),
            })
        }
    }
    let mut out = format!("{BATCH_HEADER},l_m,d_m,d_h_m,d_v_m,theta_deg,tau,fspl_db,abs_db,total_db,clamped\n");
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |reason: String| Error::Parse { line: i + 1, reason };
        let v: Vec<f64> = line
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err(format!("`{x}` is not a number")))
            })
            .collect::<Result<_>>()?;
        if v.len() != 7 {
            return Err(parse_err(format!("expected 7 fields, got {}", v.len())));
        }
        let q = PathLossQuery::new(position(&v[0..3])?, position(&v[3..6])?, v[6])
            .and_then(|q| model.predict_path_loss(&q))
            .map_err(|e| parse_err(e.to_string()))?;
        let g = &q.geometry;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{}",
            line.trim(),
            g.l,
            g.d,
            g.d_h,
            g.d_v,
            g.theta,
            q.tau.tau,
            q.fspl_db,
            q.abs_db,
            q.total_db,
            u8::from(q.tau.clamped)
        );
    }
    match &a.out {
        Some(path) => {
            std::fs::write(path, &out).map_err(|e| Error::io(path, e))?;
            Ok(String::new())
        }
        None => Ok(out),
    }
}

fn load_models(paths: &[PathBuf], n_grids: usize, kind: &str) -> Result<Vec<PathLossModel>> {
    if !paths.is_empty() && paths.len() != n_grids {
        return Err(Error::BandMismatch(format!(
            "{} {kind} model file(s) for {n_grids} grid(s); give one per grid, in grid order",
            paths.len()
        )));
    }
    paths
        .iter()
        .map(|p| {
            let m = import_model(p)?;
            if m.kind() != kind {
                return Err(Error::invalid(
                    "model file",
                    format!("{} holds a {} model", p.display(), m.kind()),
                ));
            }
            Ok(m)
        })
        .collect()
}

fn summary_text(report: &EvalReport) -> String {
    let mut s = String::new();
    for b in &report.per_band {
        let _ = write!(s, "{}: mean L_abs {:.4} dB", b.band, b.mean_absorption_db);
        for &m in &report.methods {
            let _ = write!(s, ", nrmse_{} {}", m.label(), b.metrics.get(m).expect("present").nrmse);
        }
        s.push('\n');
    }
    let _ = write!(s, "global");
    for &m in &report.methods {
        let g = report.global.get(m).expect("present");
        let _ = write!(s, ", {}: rmse {} dB nrmse {}", m.label(), g.rmse, g.nrmse);
    }
    s.push('\n');
    s
}

fn cmd_eval(a: &EvalArgs) -> Result<String> {
    let slice: Option<CurveSlice> = a.slice.as_deref().map(str::parse).transpose()?;
    let grids: Vec<TransmittanceGrid> = a.grid.iter().map(|p| load_grid(p)).collect::<Result<_>>()?;

    let (truths, agnostic, adaptive) = if a.holdout {
        let s = &a.settings;
        let opts = s.options();
        let mut truths = Vec::new();
        let (mut ag, mut ad) = (Vec::new(), Vec::new());
        for g in &grids {
            let h = holdout_fit(
                g,
                s.method.agnostic().then_some((s.degree_h, s.degree_v)),
                s.method.adaptive().then_some(s.degree),
                &opts,
            )?;
            truths.push(h.test);
            ag.extend(h.agnostic);
            ad.extend(h.adaptive);
        }
        (truths, ag, ad)
    } else {
        let ag = load_models(&a.agnostic, grids.len(), "agnostic")?;
        let ad = load_models(&a.adaptive, grids.len(), "adaptive")?;
        (grids, ag, ad)
    };

    let inputs: Vec<BandInput<'_>> = truths
        .iter()
        .enumerate()
        .map(|(i, t)| BandInput {
            truth: t,
            agnostic: agnostic.get(i),
            adaptive: adaptive.get(i),
        })
        .collect();
    // Validate the slice before writing anything.
    let curve = slice.map(|s| pathloss_vs_f_csv(&inputs, s)).transpose()?;
    let report = per_band_report(&inputs)?;
    let mut written = write_report(&report, &a.out)?;
    if let Some(text) = curve {
        let path = a.out.join("pathloss_vs_f.csv");
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push("pathloss_vs_f.csv".into());
    }
    let mut s = summary_text(&report);
    let _ = writeln!(s, "wrote {} in {}", written.join(", "), a.out.display());
    Ok(s)
}
