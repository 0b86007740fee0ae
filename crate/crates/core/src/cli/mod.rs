//! Command-line front-end: `evaluate`, `optimize`, `sweep` and `validate`.
//!
//! Results go out as CSV (to `--out` or stdout) under a versioned header:
//!
//! ```text
//! #schema=1
//! # band=fr1 freq_ghz=3.5 bw_mhz=100 ...
//! band,isd_m,speed_kmh,n,p_bm,mu_b,mu_c,T_o,rate,ase_eff
//! ```
//!
//! Human-readable summaries go to stderr, except for `validate` whose report
//! is the output.

pub mod config;
pub mod grid;
pub mod validate;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::ase::{AseResult, Evaluator, SweepRow};
use crate::error::{Error, Result};
use crate::model::{Band, BeamSetting, Deployment, GainLaw, NoiseConvention};
use crate::RateUnit;

pub use config::{Preset, RunConfig};
pub use grid::parse_grid;
pub use validate::{run_checks, Check, ValidationPlan};

pub const CSV_COLUMNS: &str = "band,isd_m,speed_kmh,n,p_bm,mu_b,mu_c,T_o,rate,ase_eff";
pub const SCHEMA_LINE: &str = "#schema=1";

/// Exit code when an oracle check fails.
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "beamase",
    version,
    about = "Overhead-adjusted ASE of beam-managed cellular downlinks"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration file (key = value with [sections]).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// fr1, fr2 or custom.
    #[arg(long, global = true)]
    band: Option<String>,
    /// Inter-site distance, m.
    #[arg(long, global = true)]
    isd: Option<f64>,
    /// MT speed, km/h.
    #[arg(long, global = true)]
    speed: Option<f64>,
    #[arg(long, global = true)]
    n_min: Option<u32>,
    #[arg(long, global = true)]
    n_max: Option<u32>,
    /// Monte Carlo realizations per check.
    #[arg(long, global = true)]
    samples: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Factor applied to every quadrature tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// nats or bits.
    #[arg(long, global = true)]
    log_base: Option<String>,
    /// sigma2 (noise power W N0) or n0 (density only).
    #[arg(long, global = true)]
    noise_convention: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override any deployment field, e.g. `--set tx_dbm=40`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one beam exponent.
    Evaluate {
        #[arg(long)]
        n: Option<u32>,
    },
    /// Search the beam exponent range for the best effective ASE.
    Optimize,
    /// Evaluate every point of a grid file (or the bundled `fig_fr1` / `fig_fr2`).
    Sweep { grid: String },
    /// Compare the analytical model against the Monte Carlo oracles.
    Validate {
        /// Scale the analytical main-lobe gain, e.g. `2x`, to check that the
        /// harness catches a wrong model.
        #[arg(long)]
        perturb_gain: Option<String>,
        /// Trajectory length per crossing replica, m.
        #[arg(long)]
        trajectory: Option<f64>,
    },
}

fn merged_config(c: &Common) -> Result<RunConfig> {
    let mut rc = match &c.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::invalid("config", format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(b) = &c.band {
        rc.preset = b.parse()?;
    }
    if let Some(v) = c.isd {
        rc.set("isd_m", v)?;
    }
    if let Some(v) = c.speed {
        rc.set("speed_kmh", v)?;
    }
    for kv in &c.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::invalid("set", format!("expected KEY=VALUE, got {kv:?}")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|e| Error::invalid("set", format!("{k}: {e}")))?;
        rc.set(k.trim(), v)?;
    }
    if let Some(v) = c.n_min {
        rc.n_min = v;
    }
    if let Some(v) = c.n_max {
        rc.n_max = v;
    }
    if let Some(v) = c.samples {
        rc.samples = v;
    }
    if let Some(v) = c.seed {
        rc.seed = v;
    }
    if let Some(v) = c.tol {
        rc.tol = v;
    }
    if let Some(v) = &c.log_base {
        rc.log_base = v.parse()?;
    }
    if let Some(v) = &c.noise_convention {
        rc.noise_convention = Some(v.parse::<NoiseConvention>()?);
    }
    if let Some(p) = &c.out {
        rc.out = Some(p.clone());
    }
    Ok(rc)
}

fn evaluator(rc: &RunConfig) -> Result<Evaluator> {
    Ok(Evaluator::new(rc.quadrature()?, rc.log_base))
}

/// Echo of the deployment behind a block of rows.
pub fn preset_comment(label: &str, d: &Deployment, unit: RateUnit) -> String {
    format!(
        "# band={label} freq_ghz={} bw_mhz={} tx_dbm={} noise_dbm_hz={} ssb_period_ms={} \
         overhead_beam_ms={} overhead_cell_ms={} alpha_los={} alpha_nlos={} los_radius_m={} \
         sinr_cap_db={} noise_convention={} rate_unit={unit}",
        d.freq_ghz,
        d.bw_mhz,
        d.tx_dbm,
        d.noise_dbm_hz,
        d.ssb_period_ms,
        d.overhead_beam_ms,
        d.overhead_cell_ms,
        d.alpha_los,
        d.alpha_nlos,
        d.los_radius_m,
        d.sinr_cap_db,
        d.noise_convention,
    )
}

/// One CSV data line. Failed evaluations print `NaN` in every result column.
pub fn csv_row(band: &str, isd_m: f64, speed_kmh: f64, n: u32, r: Option<&AseResult>) -> String {
    match r {
        Some(r) => format!(
            "{band},{isd_m},{speed_kmh},{n},{},{},{},{},{},{}",
            r.p_bm, r.mobility.mu_b_eff, r.mobility.mu_c, r.overhead, r.rate, r.effective_ase
        ),
        None => format!("{band},{isd_m},{speed_kmh},{n},NaN,NaN,NaN,NaN,NaN,NaN"),
    }
}

/// Full CSV text of a sweep.
pub fn sweep_csv(rc: &RunConfig, rows: &[SweepRow]) -> Result<String> {
    let mut s = format!("{SCHEMA_LINE}\n");
    let mut bands: Vec<Band> = Vec::new();
    for r in rows {
        if !bands.contains(&r.band) {
            bands.push(r.band);
        }
    }
    for b in bands {
        let d = rc.deployment_at(Some(b), None, None)?;
        let _ = writeln!(s, "{}", preset_comment(b.name(), &d, rc.log_base));
    }
    let _ = writeln!(s, "{CSV_COLUMNS}");
    for r in rows {
        let _ = writeln!(
            s,
            "{}",
            csv_row(
                r.band.name(),
                r.isd_m,
                r.speed_kmh,
                r.n,
                r.outcome.as_ref().ok()
            )
        );
    }
    Ok(s)
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => {
            fs::write(p, text).map_err(|e| Error::invalid("out", format!("{}: {e}", p.display())))
        }
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::invalid("out", e.to_string())),
    }
}

fn band_label(rc: &RunConfig) -> String {
    rc.preset.to_string()
}

fn cmd_evaluate(
    rc: &RunConfig,
    n: u32,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<()> {
    let d = rc.deployment()?;
    let cfg = d.to_config()?;
    let beams = BeamSetting::new(n, GainLaw::Reciprocal)?;
    let r = evaluator(rc)?.effective_ase(&cfg, &beams)?;
    let m = &r.mobility;
    let _ = writeln!(
        stderr,
        "n={n} beams={} p_bm={:.6e} mu_s_beam={:.6e}/m mu_s_cell={:.6e}/m mu_b={:.6e}/s mu_c={:.6e}/s \
         T_o={:.6} R_n={:.6e} {}/s (+-{:.1e}) R_eff={:.6e} {}/s/m^2",
        beams.beam_count(),
        r.p_bm,
        m.mu_s_beam,
        m.mu_s_cell,
        m.mu_b_eff,
        m.mu_c,
        r.overhead,
        r.rate,
        r.unit,
        r.rate_error,
        r.effective_ase,
        r.unit
    );
    let row = csv_row(&band_label(rc), d.isd_m, d.speed_kmh, n, Some(&r));
    match &rc.out {
        // Rows accumulate in an existing file written by an earlier run.
        Some(p) if fs::read_to_string(p).is_ok_and(|t| t.starts_with(SCHEMA_LINE)) => {
            let mut f = fs::OpenOptions::new()
                .append(true)
                .open(p)
                .map_err(|e| Error::invalid("out", format!("{}: {e}", p.display())))?;
            writeln!(f, "{row}").map_err(|e| Error::invalid("out", e.to_string()))
        }
        out => {
            let text = format!(
                "{SCHEMA_LINE}\n{}\n{CSV_COLUMNS}\n{row}\n",
                preset_comment(&band_label(rc), &d, rc.log_base)
            );
            emit(out.as_deref(), &text, stdout)
        }
    }
}

fn cmd_optimize(rc: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let d = rc.deployment()?;
    let cfg = d.to_config()?;
    let opt = evaluator(rc)?.optimal_n(&cfg, rc.n_min, rc.n_max)?;
    let mut text = format!(
        "{SCHEMA_LINE}\n{}\n# n_star={} degenerate={}\n{CSV_COLUMNS}\n",
        preset_comment(&band_label(rc), &d, rc.log_base),
        opt.best_n,
        opt.degenerate
    );
    for r in &opt.results {
        let _ = writeln!(
            text,
            "{}",
            csv_row(&band_label(rc), d.isd_m, d.speed_kmh, r.n, Some(r))
        );
    }
    emit(rc.out.as_deref(), &text, stdout)?;
    let _ = writeln!(
        stderr,
        "n* = {} (effective ASE {:.6e} {}/s/m^2){}",
        opt.best_n,
        opt.best().effective_ase,
        rc.log_base,
        if opt.degenerate {
            "; degenerate: every n has zero effective ASE"
        } else {
            ""
        }
    );
    Ok(())
}

fn cmd_sweep(
    rc: &RunConfig,
    grid: &str,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<()> {
    let grid = grid::load(grid)?;
    let rows = evaluator(rc)?.sweep(&grid, |band, isd, speed| {
        rc.deployment_at(Some(band), Some(isd), Some(speed))
            .expect("a named band never lacks fields")
    })?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    for r in rows.iter().filter(|r| r.outcome.is_err()) {
        let _ = writeln!(
            stderr,
            "{} isd={} speed={} n={}: {}",
            r.band,
            r.isd_m,
            r.speed_kmh,
            r.n,
            r.outcome.as_ref().unwrap_err()
        );
    }
    emit(rc.out.as_deref(), &sweep_csv(rc, &rows)?, stdout)?;
    let _ = writeln!(stderr, "{} rows, {failed} failed", rows.len());
    Ok(())
}

/// Parses a gain perturbation such as `2x`, `2` or `0.5x`.
fn parse_factor(s: &str) -> Result<f64> {
    let t = s.trim();
    let v: f64 = t
        .strip_suffix(['x', 'X'])
        .unwrap_or(t)
        .parse()
        .map_err(|e| Error::invalid("perturb_gain", format!("{s:?}: {e}")))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::invalid(
            "perturb_gain",
            format!("must be positive, got {v}"),
        ));
    }
    Ok(v)
}

fn cmd_validate(
    rc: &RunConfig,
    perturb: Option<&str>,
    trajectory: Option<f64>,
    stdout: &mut dyn Write,
) -> Result<bool> {
    let cfg = rc.network()?;
    let mut plan = ValidationPlan::new(rc.samples, rc.seed);
    plan.quad = rc.quadrature()?;
    plan.trajectory_m = trajectory.unwrap_or(rc.trajectory_m);
    plan.trajectory_replicas = rc.trajectory_replicas;
    if let Some(p) = perturb {
        plan.gain_factor = parse_factor(p)?;
    }
    let checks = run_checks(&cfg, &plan)?;
    let mut text = format!(
        "# validate band={} isd_m={} samples={} seed={} gain_factor={}\n",
        band_label(rc),
        cfg.isd(),
        plan.samples,
        plan.seed,
        plan.gain_factor
    );
    let _ = writeln!(
        text,
        "{:<34} {:>13} {:>13} {:>11} verdict",
        "check", "target", "estimate", "tolerance"
    );
    for c in &checks {
        let _ = writeln!(text, "{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    let _ = writeln!(text, "# {} checks, {failed} failed", checks.len());
    emit(rc.out.as_deref(), &text, stdout)?;
    Ok(failed == 0)
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return 1;
            }
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
    };
    let outcome = merged_config(&cli.common).and_then(|rc| match &cli.command {
        Command::Evaluate { n } => {
            let n = n
                .or(rc.n)
                .ok_or_else(|| Error::invalid("n", "evaluate needs --n"))?;
            cmd_evaluate(&rc, n, stdout, stderr).map(|_| true)
        }
        Command::Optimize => cmd_optimize(&rc, stdout, stderr).map(|_| true),
        Command::Sweep { grid } => cmd_sweep(&rc, grid, stdout, stderr).map(|_| true),
        Command::Validate {
            perturb_gain,
            trajectory,
        } => cmd_validate(&rc, perturb_gain.as_deref(), *trajectory, stdout),
    });
    match outcome {
        Ok(true) => 0,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
