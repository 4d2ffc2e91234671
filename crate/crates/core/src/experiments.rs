//! Scene files, figure sweeps and CSV output.
//!
//! Every sweep evaluates MRT first and then one design per constraint value,
//! in the order given. Rows are produced in a fixed order regardless of how
//! many worker threads rayon uses, so CSVs are byte-reproducible.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alpha::AlphaDb;
use crate::beamforming::{design, BeamformerOutput, Design, Method};
use crate::detection::{derive_seed, snr_db, MonteCarlo, PeCurve, RNG_ALGORITHM};
use crate::metrics::{path_gain_db, pg_map, radiation_pattern, GridSpec};
use crate::numerics::to_db;
use crate::scene::{build_ula, synth_channels, ArrayGeometry, ChannelSet, Point3, SceneConfig};
use crate::{Error, Result};

pub const PATTERN_CSV: &str = "pattern.csv";
pub const PGMAP_CSV: &str = "pgmap.csv";
pub const PE_CSV: &str = "pe.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

/// On-disk scene description. Every key is optional; omitted keys take the
/// reference-deployment value.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    wavelength: Option<f64>,
    array_axis: Option<Point3>,
    ce_center: Option<Point3>,
    ce_elements: Option<usize>,
    ce_spacing: Option<f64>,
    ce_positions: Option<Vec<Point3>>,
    reader_center: Option<Point3>,
    reader_elements: Option<usize>,
    reader_spacing: Option<f64>,
    reader_positions: Option<Vec<Point3>>,
    bde_position: Option<Point3>,
    reflector_x: Option<Vec<f64>>,
    g_smc: Option<f64>,
    p_max: Option<f64>,
    slots: Option<usize>,
    gamma0: Option<Vec<f64>>,
    gamma1: Option<Vec<f64>>,
    alphas_db: Option<Vec<AlphaDb>>,
}

/// The per-array keys of a scene file, e.g. `ce_center` for prefix `ce`.
struct ArrayKeys {
    prefix: &'static str,
    positions: Option<Vec<Point3>>,
    center: Option<Point3>,
    count: Option<usize>,
    spacing: Option<f64>,
}

impl ArrayKeys {
    fn build(self, axis: Point3, default_center: Point3, wavelength: f64) -> Result<ArrayGeometry> {
        let prefix = self.prefix;
        if let Some(p) = self.positions {
            if self.center.is_some() || self.count.is_some() || self.spacing.is_some() {
                return Err(Error::scene(
                    format!("{prefix}_positions"),
                    format!("cannot be combined with {prefix}_center/_elements/_spacing"),
                ));
            }
            return ArrayGeometry::new(p)
                .map_err(|e| Error::scene(format!("{prefix}_positions"), e.to_string()));
        }
        let spacing = self.spacing.unwrap_or(0.5 * wavelength);
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::scene(
                format!("{prefix}_spacing"),
                "must be positive and finite",
            ));
        }
        let count = self.count.unwrap_or(16);
        if count == 0 {
            return Err(Error::scene(format!("{prefix}_elements"), "must be >= 1"));
        }
        build_ula(self.center.unwrap_or(default_center), count, spacing, axis)
            .map_err(|e| Error::scene(format!("{prefix}_center"), e.to_string()))
    }
}

/// Key on the line where a TOML error starts, or `<file>`.
fn error_key(text: &str, err: &toml::de::Error) -> String {
    err.span()
        .and_then(|span| {
            let start = text[..span.start.min(text.len())]
                .rfind('\n')
                .map_or(0, |i| i + 1);
            let line = text[start..].lines().next()?;
            let (key, _) = line.split_once('=')?;
            Some(key.trim().to_string())
        })
        .filter(|k| !k.is_empty())
        .unwrap_or_else(|| "<file>".to_string())
}

/// Parse and validate a TOML scene description.
pub fn parse_scene_str(text: &str) -> Result<SceneConfig> {
    let f: SceneFile = toml::from_str(text)
        .map_err(|e| Error::scene(error_key(text, &e), e.message().trim().to_string()))?;
    let d = SceneConfig::reference();
    let wavelength = f.wavelength.unwrap_or(d.wavelength);
    if !(wavelength > 0.0) || !wavelength.is_finite() {
        return Err(Error::scene(
            "wavelength",
            "must be a positive finite length",
        ));
    }
    let axis = f.array_axis.unwrap_or([1.0, 0.0, 0.0]);
    let ce_array = ArrayKeys {
        prefix: "ce",
        positions: f.ce_positions,
        center: f.ce_center,
        count: f.ce_elements,
        spacing: f.ce_spacing,
    }
    .build(axis, [0.0, 0.0, 0.0], wavelength)?;
    let reader_array = ArrayKeys {
        prefix: "reader",
        positions: f.reader_positions,
        center: f.reader_center,
        count: f.reader_elements,
        spacing: f.reader_spacing,
    }
    .build(axis, [0.0, 8.0, 0.0], wavelength)?;
    let slots = f
        .slots
        .or(f.gamma0.as_ref().map(Vec::len))
        .or(f.gamma1.as_ref().map(Vec::len))
        .unwrap_or(1);
    let scene = SceneConfig {
        wavelength,
        ce_array,
        reader_array,
        bde_position: f.bde_position.unwrap_or(d.bde_position),
        reflector_x: f.reflector_x.unwrap_or(d.reflector_x),
        g_smc: f.g_smc.unwrap_or(d.g_smc),
        p_max: f.p_max.unwrap_or(d.p_max),
        slots,
        gamma0: f.gamma0.unwrap_or_else(|| vec![-1.0; slots]),
        gamma1: f.gamma1.unwrap_or_else(|| vec![1.0; slots]),
        alphas_db: f.alphas_db.unwrap_or(d.alphas_db),
    };
    scene.validate()?;
    Ok(scene)
}

pub fn parse_scene(path: &Path) -> Result<SceneConfig> {
    parse_scene_str(&fs::read_to_string(path)?)
}

/// `%.12g`-style formatting; infinities print as `inf`/`-inf`.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", v);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mant}e{sign}{:02}", exp.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, v)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn fmt_alpha(a: Option<AlphaDb>) -> String {
    a.map_or_else(String::new, |a| fmt_num(a.0))
}

/// MRT followed by one design per constraint value.
pub fn designs(alphas: &[AlphaDb]) -> Vec<Design> {
    std::iter::once(Design::Mrt)
        .chain(alphas.iter().map(|&a| Design::Alpha(a)))
        .collect()
}

fn solve_all(channels: &ChannelSet, which: &[Design], p_max: f64) -> Result<Vec<BeamformerOutput>> {
    which
        .par_iter()
        .map(|&d| design(channels, d, p_max))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternRow {
    pub theta_deg: f64,
    pub method: Method,
    pub alpha_db: Option<AlphaDb>,
    pub et_db: f64,
}

/// Angles from -180 (inclusive) to 180 degrees (exclusive).
pub fn theta_grid_deg(step_deg: f64) -> Result<Vec<f64>> {
    if !(step_deg > 0.0) || step_deg > 360.0 {
        return Err(Error::InvalidInput(format!(
            "theta step must be in (0, 360], got {step_deg}"
        )));
    }
    let n = (360.0 / step_deg).round() as usize;
    Ok((0..n)
        .map(|i| -180.0 + 360.0 * i as f64 / n as f64)
        .collect())
}

pub fn run_pattern(
    scene: &SceneConfig,
    alphas: &[AlphaDb],
    theta_step_deg: f64,
) -> Result<Vec<PatternRow>> {
    let ch = synth_channels(scene)?;
    let which = designs(alphas);
    let outs = solve_all(&ch, &which, scene.p_max)?;
    let thetas = theta_grid_deg(theta_step_deg)?;
    let rad: Vec<f64> = thetas.iter().map(|t| t.to_radians()).collect();
    let mut rows = Vec::with_capacity(thetas.len() * which.len());
    for (d, out) in which.iter().zip(&outs) {
        let e = radiation_pattern(&out.x, &scene.ce_array, scene.wavelength, &rad)?;
        rows.extend(thetas.iter().zip(e).map(|(&t, e)| PatternRow {
            theta_deg: t,
            method: out.method,
            alpha_db: d.alpha(),
            et_db: to_db(e),
        }));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PgRow {
    pub x_m: f64,
    pub y_m: f64,
    pub method: Method,
    pub alpha_db: Option<AlphaDb>,
    pub pg_db: f64,
}

pub fn run_pgmap(scene: &SceneConfig, alphas: &[AlphaDb], grid: &GridSpec) -> Result<Vec<PgRow>> {
    let ch = synth_channels(scene)?;
    let which = designs(alphas);
    let outs = solve_all(&ch, &which, scene.p_max)?;
    let mut rows = Vec::new();
    for (d, out) in which.iter().zip(&outs) {
        let map = pg_map(scene, &out.x, grid)?;
        rows.extend(map.iter().map(|(x, y, pg)| PgRow {
            x_m: x,
            y_m: y,
            method: out.method,
            alpha_db: d.alpha(),
            pg_db: pg,
        }));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub alpha_db: Option<AlphaDb>,
    pub eta_db: f64,
    pub pg_bde_db: f64,
    /// `‖H_BD x‖²` in dB at the scene's `p_max`.
    pub objective_db: f64,
    /// `‖H_DL x‖² / ‖H_BD x‖²` in dB without the cancellation rule; not written to CSV.
    pub raw_eta_db: f64,
}

pub fn run_summary(scene: &SceneConfig, alphas: &[AlphaDb]) -> Result<Vec<SummaryRow>> {
    let ch = synth_channels(scene)?;
    let which = designs(alphas);
    let outs = solve_all(&ch, &which, scene.p_max)?;
    which
        .iter()
        .zip(&outs)
        .map(|(d, out)| {
            Ok(SummaryRow {
                method: out.method,
                alpha_db: d.alpha(),
                eta_db: out.achieved_eta_db,
                pg_bde_db: path_gain_db(scene, &out.x, &scene.bde_position)?,
                objective_db: to_db(out.objective),
                raw_eta_db: crate::metrics::raw_eta_db(out.residual_dli, out.objective),
            })
        })
        .collect()
}

/// Inclusive SNR grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrGrid {
    pub min_db: f64,
    pub max_db: f64,
    pub step_db: f64,
}

impl Default for SnrGrid {
    fn default() -> Self {
        Self {
            min_db: -40.0,
            max_db: 0.0,
            step_db: 1.0,
        }
    }
}

impl SnrGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        let ok = self.min_db.is_finite()
            && self.max_db >= self.min_db
            && self.max_db.is_finite()
            && self.step_db > 0.0;
        if !ok {
            return Err(Error::InvalidInput(format!(
                "bad SNR grid [{}, {}] step {}",
                self.min_db, self.max_db, self.step_db
            )));
        }
        let n = ((self.max_db - self.min_db) / self.step_db + 1e-9).floor() as usize + 1;
        Ok((0..n)
            .map(|i| self.min_db + i as f64 * self.step_db)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeOutRow {
    pub snr_db: f64,
    pub method: Method,
    pub alpha_db: Option<AlphaDb>,
    pub pe_closed_form: f64,
    pub pe_monte_carlo: Option<f64>,
    pub trials: u64,
    pub ci95: Option<f64>,
}

/// Error probability versus SNR. SNR is set by scaling the transmit power of
/// each unit-power design with unit-variance noise. Design `k` draws Monte
/// Carlo noise from seed `derive_seed(seed, k)`.
pub fn run_pe(
    scene: &SceneConfig,
    alphas: &[AlphaDb],
    snrs: &SnrGrid,
    trials: u64,
    seed: u64,
) -> Result<Vec<PeOutRow>> {
    let ch = synth_channels(scene)?;
    let scheme = scene.gamma_scheme()?;
    let which = designs(alphas);
    let outs = solve_all(&ch, &which, 1.0)?;
    let points = snrs.points()?;
    let mut rows = Vec::new();
    for (k, (d, out)) in which.iter().zip(&outs).enumerate() {
        let mc = (trials > 0).then(|| MonteCarlo::new(trials, derive_seed(seed, k as u64)));
        let curve = PeCurve::sweep(&ch, &out.x, &scheme, &points, mc)?;
        rows.extend(curve.rows.iter().map(|r| PeOutRow {
            snr_db: r.snr_db,
            method: out.method,
            alpha_db: d.alpha(),
            pe_closed_form: r.pe_closed_form,
            pe_monte_carlo: r.monte_carlo.map(|m| m.estimate),
            trials: r.monte_carlo.map_or(0, |m| m.trials),
            ci95: r.monte_carlo.map(|m| m.ci95),
        }));
    }
    Ok(rows)
}

fn write_csv<R>(
    path: &Path,
    header: &[&str],
    rows: &[R],
    cells: impl Fn(&R) -> Vec<String>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(cells(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_pattern_csv(path: &Path, rows: &[PatternRow]) -> Result<()> {
    write_csv(
        path,
        &["theta_deg", "method", "alpha_db", "et_db"],
        rows,
        |r| {
            vec![
                fmt_num(r.theta_deg),
                r.method.to_string(),
                fmt_alpha(r.alpha_db),
                fmt_num(r.et_db),
            ]
        },
    )
}

pub fn write_pgmap_csv(path: &Path, rows: &[PgRow]) -> Result<()> {
    write_csv(
        path,
        &["x_m", "y_m", "method", "alpha_db", "pg_db"],
        rows,
        |r| {
            vec![
                fmt_num(r.x_m),
                fmt_num(r.y_m),
                r.method.to_string(),
                fmt_alpha(r.alpha_db),
                fmt_num(r.pg_db),
            ]
        },
    )
}

pub fn write_pe_csv(path: &Path, rows: &[PeOutRow]) -> Result<()> {
    let header = [
        "snr_db",
        "method",
        "alpha_db",
        "pe_closed_form",
        "pe_monte_carlo",
        "trials",
        "ci95",
    ];
    write_csv(path, &header, rows, |r| {
        vec![
            fmt_num(r.snr_db),
            r.method.to_string(),
            fmt_alpha(r.alpha_db),
            fmt_num(r.pe_closed_form),
            r.pe_monte_carlo.map_or_else(String::new, fmt_num),
            r.trials.to_string(),
            r.ci95.map_or_else(String::new, fmt_num),
        ]
    })
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_csv(
        path,
        &["method", "alpha_db", "eta_db", "pg_bde_db", "objective_db"],
        rows,
        |r| {
            vec![
                r.method.to_string(),
                fmt_alpha(r.alpha_db),
                fmt_num(r.eta_db),
                fmt_num(r.pg_bde_db),
                fmt_num(r.objective_db),
            ]
        },
    )
}

/// One subcommand with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Job {
    Pattern {
        theta_step_deg: f64,
    },
    Pgmap {
        grid: GridSpec,
    },
    Pe {
        snr: SnrGrid,
        trials: u64,
        seed: u64,
    },
    Summary,
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Pattern { .. } => "pattern",
            Job::Pgmap { .. } => "pgmap",
            Job::Pe { .. } => "pe",
            Job::Summary => "summary",
        }
    }

    pub fn output_file(&self) -> &'static str {
        match self {
            Job::Pattern { .. } => PATTERN_CSV,
            Job::Pgmap { .. } => PGMAP_CSV,
            Job::Pe { .. } => PE_CSV,
            Job::Summary => SUMMARY_CSV,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Job::Pe { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

/// Everything needed to reproduce a run. Written next to each CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub scene_path: Option<String>,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub rng_algorithm: String,
    pub alphas_db: Vec<AlphaDb>,
    pub job: Job,
    /// Resolved scene; replays use this rather than re-reading `scene_path`.
    pub scene: SceneConfig,
    /// SNR at the scene's `p_max`, for reference.
    pub scene_snr_db: f64,
}

impl RunManifest {
    pub fn new(
        scene: SceneConfig,
        scene_path: Option<String>,
        alphas_db: Vec<AlphaDb>,
        job: Job,
        out_dir: PathBuf,
    ) -> Result<Self> {
        let scene_snr_db = snr_db(&scene, &synth_channels(&scene)?);
        Ok(Self {
            tool: "bibc".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            scene_path,
            out_dir,
            seed: job.seed(),
            rng_algorithm: RNG_ALGORITHM.into(),
            alphas_db,
            job,
            scene,
            scene_snr_db,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn output_path(&self) -> PathBuf {
        self.out_dir.join(self.job.output_file())
    }
}

/// Run the job, write its CSV and `manifest.json` into `out_dir`, and return
/// the CSV path.
pub fn execute(manifest: &RunManifest) -> Result<PathBuf> {
    fs::create_dir_all(&manifest.out_dir)?;
    let scene = &manifest.scene;
    let alphas = &manifest.alphas_db;
    let out = manifest.output_path();
    match &manifest.job {
        Job::Pattern { theta_step_deg } => {
            write_pattern_csv(&out, &run_pattern(scene, alphas, *theta_step_deg)?)?
        }
        Job::Pgmap { grid } => write_pgmap_csv(&out, &run_pgmap(scene, alphas, grid)?)?,
        Job::Pe { snr, trials, seed } => {
            write_pe_csv(&out, &run_pe(scene, alphas, snr, *trials, *seed)?)?
        }
        Job::Summary => write_summary_csv(&out, &run_summary(scene, alphas)?)?,
    }
    let json = serde_json::to_string_pretty(manifest)?;
    fs::write(manifest.out_dir.join(MANIFEST_JSON), json + "\n")?;
    Ok(out)
}
