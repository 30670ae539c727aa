//! The `onebit-emr` command line.
//!
//! Exit codes: 0 success, 2 usage error, 1 runtime error.

mod manifest;
mod settings;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use chrono::Utc;
use clap::{Args, Parser, Subcommand};

use crate::cost::{checked_transistor_count, CostReport, CostScheme};
use crate::detector::{dof, threshold, ThresholdScheme, ThresholdSpec};
use crate::montecarlo::{
    crossing, run_null_diagnostics, sweep_pd_vs_n, sweep_pd_vs_snr, sweep_threshold_error, tags, PdVsNSweep,
    PdVsSnrSweep, StreamPlan, SweepResult, ThresholdErrorSweep, ThresholdMode, CORRELATION_TOLERANCE,
    DIAGONAL_TOLERANCE, KS_TOLERANCE,
};

pub use manifest::{sidecar_path, RunManifest};
pub use settings::Settings;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e.0)
    }
}

impl From<crate::EmrError> for CliError {
    fn from(e: crate::EmrError) -> Self {
        match e {
            crate::EmrError::Io(_) => CliError::Runtime(e.to_string()),
            // Domain and config problems stem from the parameters given.
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn parse_open_probability(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not a probability in (0, 1)"))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "onebit-emr",
    version,
    about = "One-bit EMR spectrum sensing: thresholds, Monte Carlo figures, diagnostics and cost"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the three closed-form CFAR thresholds.
    Threshold(CommonArgs),
    /// Relative threshold error versus sample size (CSV).
    Fig1(Fig1Args),
    /// Detection probability versus SNR (CSV).
    Fig2(PdArgs),
    /// Detection probability versus sample size (CSV).
    Fig3(PdArgs),
    /// Null-hypothesis checks on the one-bit SCM and statistic.
    Diagnose(CommonArgs),
    /// Flop and transistor counts for both pipelines.
    Cost(CostArgs),
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// key=value file; command-line flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Antenna-to-sample ratio; m = round(c n).
    #[arg(long)]
    c: Option<f64>,
    /// Target false-alarm probability.
    #[arg(long, value_parser = parse_open_probability)]
    pfa: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// PU arrival angle in radians.
    #[arg(long, allow_hyphen_values = true)]
    angle: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Debug)]
struct Fig1Args {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated sample sizes.
    #[arg(long)]
    n_values: Option<String>,
    /// Skip the full-resolution series (it dominates the runtime).
    #[arg(long)]
    no_fullres: bool,
}

#[derive(Args, Debug)]
struct PdArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated SNR grid in dB (fig2).
    #[arg(long, allow_hyphen_values = true)]
    snr_values: Option<String>,
    /// Comma-separated sample sizes (fig3).
    #[arg(long)]
    n_values: Option<String>,
    /// `theoretical` or `empirical`.
    #[arg(long)]
    threshold_mode: Option<String>,
    /// Noise-only trials per point in empirical mode.
    #[arg(long)]
    calibration_trials: Option<usize>,
}

#[derive(Args, Debug)]
struct CostArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Sample size for the one-bit pipeline when comparing at matched
    /// performance (defaults to --n).
    #[arg(long)]
    onebit_n: Option<u64>,
}

impl CommonArgs {
    fn layered(&self, defaults: Settings) -> Result<Settings, CliError> {
        let mut s = defaults;
        if let Some(path) = &self.config {
            s.merge(&Settings::load(path)?);
        }
        let mut flags = Settings::new();
        flags.set_opt("m", self.m);
        flags.set_opt("n", self.n);
        flags.set_opt("c", self.c);
        flags.set_opt("pfa", self.pfa);
        flags.set_opt("snr_db", self.snr_db);
        flags.set_opt("trials", self.trials);
        flags.set_opt("seed", self.seed);
        flags.set_opt("out", self.out.as_ref().map(|p| p.display().to_string()));
        flags.set_opt("angle", self.angle);
        flags.set_opt("workers", self.workers);
        s.merge(&flags);
        Ok(s)
    }
}

const DEFAULT_PFA: f64 = 1e-3;
const DEFAULT_SEED: u64 = 1;

fn default_angle() -> f64 {
    -std::f64::consts::FRAC_PI_3
}

fn base_defaults() -> Settings {
    let mut s = Settings::new();
    s.set("pfa", DEFAULT_PFA);
    s.set("seed", DEFAULT_SEED);
    s.set("workers", 1);
    s
}

/// Trials needed for an empirical tail estimate: `10^3 / eps`.
fn default_tail_trials(eps: f64) -> usize {
    (1e3 / eps).ceil() as usize
}

fn probability(s: &Settings, key: &str) -> Result<f64, CliError> {
    let v: f64 = s.get(key)?;
    parse_open_probability(&v.to_string()).map_err(|e| CliError::Usage(format!("--{key}: {e}")))
}

fn positive(s: &Settings, key: &str) -> Result<usize, CliError> {
    let v: usize = s.get(key)?;
    if v == 0 {
        return Err(CliError::Usage(format!("--{key} must be positive")));
    }
    Ok(v)
}

/// Keeps only `keys` from the resolved settings; the result is the
/// manifest's parameter block.
fn subset(s: &Settings, keys: &[&str]) -> Settings {
    let mut out = Settings::new();
    for k in keys {
        if let Some(v) = s.raw(k) {
            out.set(k, v);
        }
    }
    out
}

/// Parses and runs a command line, writing to the given streams; returns
/// the process exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Threshold(a) => cmd_threshold(a, stdout, stderr),
        Command::Fig1(a) => cmd_fig1(a, stdout),
        Command::Fig2(a) => cmd_fig2(a, stdout),
        Command::Fig3(a) => cmd_fig3(a, stdout),
        Command::Diagnose(a) => cmd_diagnose(a, stdout),
        Command::Cost(a) => cmd_cost(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Runtime(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_RUNTIME
        }
    }
}

fn cmd_threshold(a: &CommonArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let s = a.layered(base_defaults())?;
    let m = positive(&s, "m")?;
    let n = positive(&s, "n")?;
    let eps = probability(&s, "pfa")?;
    let eval = |scheme| -> Result<f64, CliError> { Ok(threshold(&ThresholdSpec::new(m, n, eps, scheme)?)?) };
    let c = m as f64 / n as f64;
    if c >= 1.0 {
        writeln!(err, "warning: c = {c} is outside (0, 1); the full-resolution threshold assumes m < n")?;
    }
    let rows = [
        ("m", m.to_string()),
        ("n", n.to_string()),
        ("c", c.to_string()),
        ("q", dof(m).to_string()),
        ("pfa", eps.to_string()),
        ("threshold_fullres", format!("{:.12}", eval(ThresholdScheme::FullRes)?)),
        ("threshold_onebit_exact", format!("{:.12}", eval(ThresholdScheme::OneBitExact)?)),
        ("threshold_onebit_normal", format!("{:.12}", eval(ThresholdScheme::OneBitNormal)?)),
    ];
    for (k, v) in rows {
        writeln!(out, "{k:<24}{v}")?;
    }
    Ok(())
}

fn write_outputs(
    command: &str,
    s: &Settings,
    keys: &[&str],
    result: &SweepResult,
    started: chrono::DateTime<Utc>,
) -> Result<PathBuf, CliError> {
    result.validate()?;
    let path = PathBuf::from(s.raw("out").unwrap_or(""));
    std::fs::write(&path, result.to_csv())
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    let manifest = RunManifest {
        command: command.to_string(),
        params: subset(s, keys),
        master_seed: s.get("seed")?,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started_at: started,
        finished_at: Utc::now(),
    };
    manifest.write_next_to(&path)?;
    Ok(path)
}

fn cmd_fig1(a: &Fig1Args, out: &mut dyn Write) -> Result<(), CliError> {
    let started = Utc::now();
    let mut d = base_defaults();
    d.set("c", 0.5);
    d.set("n_values", "16,32,64,128,256");
    d.set("fullres", true);
    d.set("out", "fig1.csv");
    let mut s = a.common.layered(d)?;
    s.set_opt("n_values", a.n_values.as_deref());
    if a.no_fullres {
        s.set("fullres", false);
    }
    let eps = probability(&s, "pfa")?;
    if s.raw("trials").is_none() {
        s.set("trials", default_tail_trials(eps));
    }
    let sweep = ThresholdErrorSweep {
        c: s.get("c")?,
        n_values: s.get_list("n_values")?,
        epsilon: eps,
        trials: positive(&s, "trials")?,
        master_seed: s.get("seed")?,
        workers: positive(&s, "workers")?,
        include_full: s.get("fullres")?,
    };
    let result = sweep_threshold_error(&sweep)?;
    let path = write_outputs(
        "fig1",
        &s,
        &["c", "n_values", "pfa", "trials", "seed", "fullres", "out", "workers"],
        &result,
        started,
    )?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(())
}

fn threshold_mode(s: &Settings, eps: f64) -> Result<ThresholdMode, CliError> {
    match s.raw("threshold_mode").unwrap_or("theoretical") {
        "theoretical" => Ok(ThresholdMode::Theoretical),
        "empirical" => {
            let calibration_trials = match s.raw("calibration_trials") {
                Some(_) => positive(s, "calibration_trials")?,
                None => default_tail_trials(eps),
            };
            Ok(ThresholdMode::Empirical { calibration_trials })
        }
        other => Err(CliError::Usage(format!("unknown threshold mode {other:?} (theoretical|empirical)"))),
    }
}

fn pd_defaults(out: &str) -> Settings {
    let mut d = base_defaults();
    d.set("c", 0.5);
    d.set("trials", 2000);
    d.set("angle", default_angle());
    d.set("threshold_mode", "theoretical");
    d.set("out", out);
    d
}

fn pd_layers(a: &PdArgs, d: Settings) -> Result<Settings, CliError> {
    let mut s = a.common.layered(d)?;
    s.set_opt("snr_values", a.snr_values.as_deref());
    s.set_opt("n_values", a.n_values.as_deref());
    s.set_opt("threshold_mode", a.threshold_mode.as_deref());
    s.set_opt("calibration_trials", a.calibration_trials);
    Ok(s)
}

fn cmd_fig2(a: &PdArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let started = Utc::now();
    let mut d = pd_defaults("fig2.csv");
    d.set("n", 128);
    d.set("snr_values", (-25..=0).map(|v| v.to_string()).collect::<Vec<_>>().join(","));
    let s = pd_layers(a, d)?;
    let eps = probability(&s, "pfa")?;
    let snr_db: Vec<f64> = s.get_list("snr_values")?;
    if snr_db.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Usage("--snr-values must be strictly increasing".into()));
    }
    let sweep = PdVsSnrSweep {
        c: s.get("c")?,
        n: positive(&s, "n")?,
        snr_db,
        epsilon: eps,
        trials: positive(&s, "trials")?,
        pu_angle: s.get("angle")?,
        master_seed: s.get("seed")?,
        workers: positive(&s, "workers")?,
        threshold_mode: threshold_mode(&s, eps)?,
    };
    let result = sweep_pd_vs_snr(&sweep)?;
    let keys = [
        "c",
        "n",
        "snr_values",
        "pfa",
        "trials",
        "angle",
        "seed",
        "threshold_mode",
        "calibration_trials",
        "out",
        "workers",
    ];
    let path = write_outputs("fig2", &s, &keys, &result, started)?;
    writeln!(out, "wrote {}", path.display())?;
    let at_half = |name| crossing(&result.axis_values, result.series(name).unwrap_or(&[]), 0.5);
    if let (Some(one), Some(full)) = (at_half("pd_onebit"), at_half("pd_fullres")) {
        writeln!(out, "snr_gap_db_at_pd_0.5      {:.3}", one - full)?;
    }
    Ok(())
}

fn cmd_fig3(a: &PdArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let started = Utc::now();
    let mut d = pd_defaults("fig3.csv");
    d.set("snr_db", -6);
    d.set("n_values", (2..=32).map(|k| (4 * k).to_string()).collect::<Vec<_>>().join(","));
    let s = pd_layers(a, d)?;
    let eps = probability(&s, "pfa")?;
    let sweep = PdVsNSweep {
        c: s.get("c")?,
        n_values: s.get_list("n_values")?,
        snr_db: s.get("snr_db")?,
        epsilon: eps,
        trials: positive(&s, "trials")?,
        pu_angle: s.get("angle")?,
        master_seed: s.get("seed")?,
        workers: positive(&s, "workers")?,
        threshold_mode: threshold_mode(&s, eps)?,
    };
    let result = sweep_pd_vs_n(&sweep)?;
    let keys = [
        "c",
        "n_values",
        "snr_db",
        "pfa",
        "trials",
        "angle",
        "seed",
        "threshold_mode",
        "calibration_trials",
        "out",
        "workers",
    ];
    let path = write_outputs("fig3", &s, &keys, &result, started)?;
    writeln!(out, "wrote {}", path.display())?;
    let at_half = |name| crossing(&result.axis_values, result.series(name).unwrap_or(&[]), 0.5);
    if let (Some(one), Some(full)) = (at_half("pd_onebit"), at_half("pd_fullres")) {
        writeln!(out, "sample_ratio_at_pd_0.5    {:.3}", one / full)?;
    }
    Ok(())
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn cmd_diagnose(a: &CommonArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut d = base_defaults();
    d.set("m", 4);
    d.set("n", 1024);
    d.set("trials", 10_000);
    let s = a.layered(d)?;
    let (m, n) = (positive(&s, "m")?, positive(&s, "n")?);
    let trials = positive(&s, "trials")?;
    let plan = StreamPlan::new(s.get("seed")?, tags::DIAGNOSTIC, 0);
    let diag = run_null_diagnostics(m, n, trials, plan, positive(&s, "workers")?)?;
    writeln!(out, "null diagnostics: m={m} n={n} trials={trials} q={}", dof(m))?;
    writeln!(
        out,
        "{:<40}{:>12.6}  < {:<6}{}",
        "KS sqrt(n) S_12 vs N(0,1)",
        diag.ks_entry,
        KS_TOLERANCE,
        verdict(diag.entry_passes())
    )?;
    writeln!(
        out,
        "{:<40}{:>12.6}  < {:<6}{}",
        format!("KS m n (xi - 1) vs chi2_{}", dof(m)),
        diag.ks_statistic,
        KS_TOLERANCE,
        verdict(diag.statistic_passes())
    )?;
    let p1 = &diag.covariance;
    writeln!(
        out,
        "{:<40}{:>12.6}  < {:<6}{}",
        "max |corr| of upper-triangle entries",
        p1.max_offdiag_corr,
        CORRELATION_TOLERANCE,
        verdict(p1.max_offdiag_corr < CORRELATION_TOLERANCE)
    )?;
    writeln!(
        out,
        "{:<40}{:>12.6}  < {:<6}{}",
        "max |n E[S_ij^2] - 1|",
        p1.max_diag_relative_error(),
        DIAGONAL_TOLERANCE,
        verdict(p1.max_diag_relative_error() < DIAGONAL_TOLERANCE)
    )?;
    Ok(())
}

fn cmd_cost(a: &CostArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let s = a.common.layered(Settings::new())?;
    let m = positive(&s, "m")? as u64;
    let n = positive(&s, "n")? as u64;
    let n1 = a.onebit_n.unwrap_or(n);
    if n1 == 0 {
        return Err(CliError::Usage("--onebit-n must be positive".into()));
    }
    for (scheme, n) in [(CostScheme::EightBit, n), (CostScheme::OneBit, n1)] {
        if checked_transistor_count(scheme, m, n).is_none() {
            return Err(CliError::Usage(format!("{scheme} counts for m={m}, n={n} exceed 128 bits")));
        }
    }
    let eight = CostReport::new(CostScheme::EightBit, m, n);
    let one = CostReport::new(CostScheme::OneBit, m, n1);
    writeln!(out, "{:<8}{:>8}{:>10}{:>26}{:>30}", "scheme", "m", "n", "flops", "transistors")?;
    for r in [&eight, &one] {
        writeln!(out, "{:<8}{:>8}{:>10}{:>26}{:>30}", r.scheme.to_string(), r.m, r.n, r.flops, r.transistors)?;
    }
    writeln!(out, "flop_ratio_1bit_over_8bit        {}", exact_ratio(one.flops, eight.flops))?;
    writeln!(out, "transistor_ratio_8bit_over_1bit  {}", exact_ratio(eight.transistors, one.transistors))?;
    if let Some(path) = s.raw("out") {
        let mut csv = String::from("scheme,m,n,flops,transistors\n");
        for r in [&eight, &one] {
            csv.push_str(&format!("{},{},{},{},{}\n", r.scheme, r.m, r.n, r.flops, r.transistors));
        }
        std::fs::write(path, csv).map_err(|e| CliError::Runtime(format!("cannot write {path}: {e}")))?;
    }
    Ok(())
}

/// Decimal rendering of `num / den` without going through `f64` when the
/// quotient terminates within 12 digits.
fn exact_ratio(num: u128, den: u128) -> String {
    let int = num / den;
    let mut rem = num % den;
    if rem == 0 {
        return int.to_string();
    }
    let mut digits = String::new();
    for _ in 0..12 {
        rem *= 10;
        digits.push(char::from(b'0' + (rem / den) as u8));
        rem %= den;
        if rem == 0 {
            break;
        }
    }
    format!("{int}.{digits}")
}
