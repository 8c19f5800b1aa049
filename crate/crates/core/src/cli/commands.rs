//! `run`, `certify` and `sweep`.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use super::config::{
    apply_override, document_to_config, load_document, split_override, ConfigError, GAIN_NAMES,
};
use super::csv::{summary_path, write_atomically, write_log, RunSummary};
use crate::certify::{certify_attitude, certify_large_angle, certify_position};
use crate::error::Error;
use crate::sim::{run, FlightMode, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SIMULATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "robust-se3", version, about = "Robust geometric quadrotor control on SE(3)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scenario and write a trajectory CSV plus a JSON summary.
    Run(RunArgs),
    /// Check the sufficient gain conditions and print the bounds.
    Certify(CertifyArgs),
    /// Sweep one gain (or dt) and tabulate terminal error against the ultimate bound.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Built-in scenario name (case1, case2, attitude) or path to a TOML file.
    #[arg(value_name = "SCENARIO")]
    pub scenario: Option<String>,
    /// Scenario file; same as the positional argument.
    #[arg(long, conflicts_with = "scenario")]
    pub config: Option<String>,
    /// Set any field of the scenario file, e.g. `gains.kx=30`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub robust: Option<OnOff>,
    /// Integration step (s).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Simulated time (s).
    #[arg(long)]
    pub duration: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Trajectory CSV; the summary goes to `<stem>.summary.json` beside it.
    #[arg(long, default_value = "trajectory.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
    /// Also write the JSON report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Gain name as in the scenario file (kx, eps_R, ...) or `dt`.
    #[arg(long)]
    pub param: String,
    /// Comma-separated values; may be empty.
    #[arg(long, value_delimiter = ',', num_args = 0.., conflicts_with = "range")]
    pub values: Vec<f64>,
    /// `start:stop:count`, evenly spaced and inclusive.
    #[arg(long)]
    pub range: Option<String>,
    #[arg(long, default_value = "sweep.csv")]
    pub out: PathBuf,
}

/// What the commands can fail with.
#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("simulation failed: {0}")]
    Simulation(Error),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) => EXIT_CONFIG,
            CommandError::Simulation(e) => match e.root() {
                Error::InitialAttitudeError { .. } | Error::InvalidScenario(_) => EXIT_CONFIG,
                _ => EXIT_SIMULATION,
            },
            CommandError::Io { .. } => EXIT_IO,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CommandError + '_ {
    move |source| CommandError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl ScenarioArgs {
    fn source(&self) -> Result<&str, ConfigError> {
        self.config
            .as_deref()
            .or(self.scenario.as_deref())
            .ok_or_else(|| ConfigError::Parse("no scenario given (name or --config PATH)".into()))
    }

    /// The scenario document with every override applied, flags last.
    pub fn document(&self) -> Result<toml::Table, ConfigError> {
        let mut doc = load_document(self.source()?)?;
        for spec in &self.overrides {
            let (k, v) = split_override(spec)?;
            apply_override(&mut doc, k, v)?;
        }
        if let Some(r) = self.robust {
            let v = if r == OnOff::On { "\"on\"" } else { "\"off\"" };
            apply_override(&mut doc, "robust", v)?;
        }
        if let Some(dt) = self.dt {
            apply_override(&mut doc, "sim.dt", &format!("{dt:e}"))?;
        }
        if let Some(d) = self.duration {
            apply_override(&mut doc, "sim.duration", &format!("{d:e}"))?;
        }
        Ok(doc)
    }

    fn default_name(&self) -> String {
        self.source()
            .ok()
            .and_then(|s| Path::new(s).file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        scenario_from(self.document()?, &self.default_name())
    }
}

fn scenario_from(doc: toml::Table, default_name: &str) -> Result<Scenario, ConfigError> {
    let mut cfg = document_to_config(doc)?;
    if cfg.name.is_empty() {
        cfg.name = default_name.to_string();
    }
    cfg.to_scenario()
}

pub fn run_command(args: &RunArgs, out: &mut dyn Write) -> Result<RunSummary, CommandError> {
    let sc = args.scenario.scenario()?;
    warn_uncertified(&sc, out);
    let started = Instant::now();
    let log = run(&sc).map_err(CommandError::Simulation)?;
    let wall = started.elapsed().as_secs_f64();
    write_atomically(&args.out, |w| write_log(&log, w)).map_err(io_err(&args.out))?;
    let summary = RunSummary::new(&sc, &log, wall, &args.out);
    let json_path = summary_path(&args.out);
    write_atomically(&json_path, |w| {
        serde_json::to_writer_pretty(&mut *w, &summary)?;
        writeln!(w)
    })
    .map_err(io_err(&json_path))?;

    let _ = writeln!(
        out,
        "{} ({}, robust {}): {} steps in {:.3} s",
        summary.scenario,
        summary.mode,
        if sc.robust { "on" } else { "off" },
        summary.steps,
        wall
    );
    if sc.mode == FlightMode::Attitude {
        let _ = writeln!(
            out,
            "terminal sqrt(|e_R|^2 + |e_Omega|^2) = {:.6}",
            summary.terminal_attitude_error
        );
    } else {
        let _ = writeln!(out, "terminal |e_x| = {:.6} m", summary.terminal_position_error);
    }
    let _ = writeln!(out, "initial Psi = {:.6}, max Psi = {:.6}", summary.initial_psi, summary.max_psi);
    if let Some(ts) = summary.switch_time {
        let _ = writeln!(out, "switched to position tracking at t = {ts:.3} s");
    }
    let _ = writeln!(out, "wrote {} and {}", args.out.display(), json_path.display());
    Ok(summary)
}

fn warn_uncertified(sc: &Scenario, out: &mut dyn Write) {
    let failed: Vec<&'static str> = match sc.mode {
        FlightMode::Attitude => certify_attitude(&sc.gains, &sc.params)
            .map(|c| c.conditions.iter().filter(|c| !c.satisfied).map(|c| c.name).collect())
            .unwrap_or_default(),
        _ => certify_position(&sc.gains, &sc.params)
            .map(|c| c.conditions.iter().filter(|c| !c.satisfied).map(|c| c.name).collect())
            .unwrap_or_default(),
    };
    if !failed.is_empty() {
        let _ = writeln!(out, "note: gains not certified ({})", failed.join("; "));
    }
}

#[derive(Debug, Serialize)]
pub struct CertificateReport {
    pub scenario: String,
    pub attitude: Option<crate::certify::AttitudeCertificate>,
    pub position: Option<crate::certify::PositionCertificate>,
    pub large_angle: Option<crate::certify::LargeAngleCertificate>,
    /// Why a certificate could not be evaluated.
    pub notes: Vec<String>,
}

pub fn certify_report(sc: &Scenario) -> CertificateReport {
    fn keep<T>(notes: &mut Vec<String>, name: &str, r: crate::Result<T>) -> Option<T> {
        r.map_err(|e| notes.push(format!("{name}: {e}"))).ok()
    }
    let mut notes = Vec::new();
    let attitude = keep(&mut notes, "attitude", certify_attitude(&sc.gains, &sc.params));
    let position = keep(&mut notes, "position", certify_position(&sc.gains, &sc.params));
    let large_angle = keep(&mut notes, "large-angle", certify_large_angle(&sc.gains, &sc.params));
    CertificateReport {
        scenario: sc.name.clone(),
        attitude,
        position,
        large_angle,
        notes,
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok  "
    } else {
        "FAIL"
    }
}

fn print_conditions(out: &mut dyn Write, conds: &[crate::certify::Condition]) {
    for c in conds {
        let _ = writeln!(
            out,
            "  [{}] {:<44} lhs {:>14.6e}  rhs {:>14.6e}  margin {:>14.6e}",
            mark(c.satisfied),
            c.name,
            c.lhs,
            c.rhs,
            c.margin
        );
    }
}

fn print_matrix(out: &mut dyn Write, name: &str, m: &[[f64; 2]; 2]) {
    let _ = writeln!(
        out,
        "  {name:<10} [[{:.6e}, {:.6e}], [{:.6e}, {:.6e}]]",
        m[0][0], m[0][1], m[1][0], m[1][1]
    );
}

pub fn print_report(r: &CertificateReport, out: &mut dyn Write) {
    if let Some(a) = &r.attitude {
        let _ = writeln!(out, "attitude mode:");
        print_conditions(out, &a.conditions);
        print_matrix(out, "M21", &a.m21);
        print_matrix(out, "M22", &a.m22);
        print_matrix(out, "W2", &a.w2);
        let _ = writeln!(out, "  c2_max {:.6e}  eps_R_max {:.6e}", a.c2_max, a.eps_r_max);
        let _ = writeln!(
            out,
            "  ultimate bound on |e_R|^2+|e_Omega|^2: {:.6e}  (V2 decreases above {:.6e})",
            a.ultimate_bound, a.decrease_level
        );
    }
    if let Some(p) = &r.position {
        let _ = writeln!(out, "position mode:");
        print_conditions(out, &p.conditions);
        let _ = writeln!(out, "  alpha {:.6e}", p.alpha);
        for (name, m) in [
            ("M11", &p.m11),
            ("M12", &p.m12),
            ("M21", &p.m21),
            ("M22'", &p.m22_prime),
            ("W1", &p.w1),
            ("W12", &p.w12),
            ("W2", &p.w2),
            ("W", &p.w),
        ] {
            print_matrix(out, name, m);
        }
        let _ = writeln!(
            out,
            "  c1_max {:.6e}  c2_max {:.6e}  (eps_x+eps_R)_max {:.6e}",
            p.c1_max, p.c2_max, p.eps_sum_max
        );
        let _ = writeln!(
            out,
            "  ultimate bound on |e_x|^2+|e_v|^2+|e_R|^2+|e_Omega|^2: {:.6e}  (V decreases above {:.6e})",
            p.ultimate_bound, p.decrease_level
        );
        if !p.is_satisfied() {
            let _ = writeln!(out, "  bounds are not guaranteed while a condition fails");
        }
    }
    if let Some(l) = &r.large_angle {
        let _ = writeln!(out, "large initial attitude error:");
        print_conditions(out, std::slice::from_ref(&l.condition));
    }
    for n in &r.notes {
        let _ = writeln!(out, "note: {n}");
    }
}

pub fn certify_command(args: &CertifyArgs, out: &mut dyn Write) -> Result<CertificateReport, CommandError> {
    let sc = args.scenario.scenario()?;
    let report = certify_report(&sc);
    let json = serde_json::to_string_pretty(&report).expect("certificate serializes");
    if args.json {
        let _ = writeln!(out, "{json}");
    } else {
        print_report(&report, out);
    }
    if let Some(path) = &args.out {
        write_atomically(path, |w| writeln!(w, "{json}")).map_err(io_err(path))?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub terminal_error: f64,
    /// Square root of the certified ultimate bound; NaN when it is not positive.
    pub ultimate_bound: f64,
    pub certified: bool,
}

pub const SWEEP_HEADER: &str = "value,terminal_error,ultimate_bound,certified";

fn sweep_key(param: &str) -> Result<String, ConfigError> {
    if param == "dt" {
        Ok("sim.dt".into())
    } else if GAIN_NAMES.contains(&param) {
        Ok(format!("gains.{param}"))
    } else {
        Err(ConfigError::Field {
            path: param.to_string(),
            message: format!("unknown sweep parameter; expected dt or one of {}", GAIN_NAMES.join(", ")),
        })
    }
}

fn parse_range(spec: &str) -> Result<Vec<f64>, ConfigError> {
    let bad = || ConfigError::Field {
        path: "--range".into(),
        message: format!("expected start:stop:count, got `{spec}`"),
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let a: f64 = a.parse().map_err(|_| bad())?;
    let b: f64 = b.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    Ok(match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    })
}

fn sqrt_bound(b: f64) -> f64 {
    if b.is_finite() && b > 0.0 {
        b.sqrt()
    } else {
        f64::NAN
    }
}

fn sweep_point(sc: &Scenario, value: f64) -> Result<SweepRow, CommandError> {
    let log = run(sc).map_err(CommandError::Simulation)?;
    let (terminal_error, bound, certified) = if sc.mode == FlightMode::Attitude {
        let c = certify_attitude(&sc.gains, &sc.params).map_err(CommandError::Simulation)?;
        (log.terminal_attitude_error(), c.ultimate_bound, c.is_satisfied())
    } else {
        let c = certify_position(&sc.gains, &sc.params).map_err(CommandError::Simulation)?;
        (log.terminal_position_error(), c.ultimate_bound, c.is_satisfied())
    };
    Ok(SweepRow {
        value,
        terminal_error,
        ultimate_bound: sqrt_bound(bound),
        certified,
    })
}

/// Every scenario is built before any simulation starts, so a bad value
/// fails fast as a configuration error.
pub fn sweep_command(args: &SweepArgs, out: &mut dyn Write) -> Result<Vec<SweepRow>, CommandError> {
    let key = sweep_key(&args.param)?;
    let values = match &args.range {
        Some(r) => parse_range(r)?,
        None => args.values.clone(),
    };
    let base = args.scenario.document()?;
    let name = args.scenario.default_name();
    let scenarios = values
        .iter()
        .map(|v| {
            let mut doc = base.clone();
            apply_override(&mut doc, &key, &format!("{v:e}"))?;
            scenario_from(doc, &name)
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;
    let rows = scenarios
        .par_iter()
        .zip(values.par_iter())
        .map(|(sc, &v)| sweep_point(sc, v))
        .collect::<Result<Vec<_>, _>>()?;
    write_atomically(&args.out, |w| {
        writeln!(w, "{SWEEP_HEADER}")?;
        for r in &rows {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{}",
                r.value, r.terminal_error, r.ultimate_bound, r.certified
            )?;
        }
        Ok(())
    })
    .map_err(io_err(&args.out))?;
    for r in &rows {
        let _ = writeln!(
            out,
            "{} = {:<12.6e} terminal error {:.6e}  bound {:.6e}{}",
            args.param,
            r.value,
            r.terminal_error,
            r.ultimate_bound,
            if r.certified { "" } else { "  (not certified)" }
        );
    }
    let _ = writeln!(out, "wrote {} ({} rows)", args.out.display(), rows.len());
    Ok(rows)
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Run(a) => run_command(a, out).map(|_| ()),
        Command::Certify(a) => certify_command(a, out).map(|_| ()),
        Command::Sweep(a) => sweep_command(a, out).map(|_| ()),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, &mut io::stdout().lock(), &mut io::stderr().lock()),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_OK
            }
        }
    }
}
