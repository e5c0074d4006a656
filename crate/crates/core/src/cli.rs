//! Command-line front end: config files, subcommand dispatch and report
//! emission.
//!
//! Config files are INI-style with four sections:
//!
//! ```text
//! [prep]     theta1 phi1 theta2 phi2   (or state1 / state2 = 0, 1, 0+1, 0-1, 0+i, 0-i)
//! [errors]   mode_overlap eps_det eps_sigma p_false_herald
//! [budget]   p_pi solid_angle_fraction t_fiber t_optics eta attempt_rate_hz
//! [run]      seed fast_mode max_attempts schedule
//! ```
//!
//! `schedule` is a list of `<basis pair>:<events>` items, e.g. `XX:70 YY:70 ZZ:70`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::measurement::{parity, parse_count_records, write_count_records, BasisPair, CountRecord};
use crate::montecarlo::{
    reproduce_table1, reproduce_tomography_dataset, run_experiment, ExperimentConfig, RunReport, ScheduleEntry, Table1,
    TomographyReport,
};
use crate::noise::ErrorModel;
use crate::protocol::PrepSetting;
use crate::qcore::fidelity_pure;
use crate::rates::breakdown;
use crate::tomography::{
    concurrence, entanglement_of_formation, reconstruct_mle, MleOptions, ReconstructionResult, TomographyInput,
};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "HERALDED_GATE_CONFIG";

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

fn line_err(line: usize, key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse { line, msg: format!("`{key}`: {msg}") }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| line_err(line, key, format!("`{v}` is not a finite number")))
}

fn in_range(line: usize, key: &str, v: &str, lo: f64, hi: f64, hi_open: bool) -> Result<f64> {
    let x = parse_f64(line, key, v)?;
    let ok = x >= lo && if hi_open { x < hi } else { x <= hi };
    if !ok {
        let close = if hi_open { ")" } else { "]" };
        return Err(line_err(line, key, format!("value {x} is outside [{lo}, {hi}{close}")));
    }
    Ok(x)
}

fn parse_schedule(line: usize, v: &str) -> Result<Vec<ScheduleEntry>> {
    let mut out: Vec<ScheduleEntry> = Vec::new();
    for item in v.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()) {
        let (b, n) = item
            .split_once(':')
            .ok_or_else(|| line_err(line, "schedule", format!("item `{item}` is not <bases>:<events>")))?;
        let basis: BasisPair = b.parse().map_err(|e: Error| line_err(line, "schedule", e))?;
        let events: u64 = n
            .parse()
            .map_err(|_| line_err(line, "schedule", format!("event count `{n}` is not a non-negative integer")))?;
        if events == 0 {
            return Err(line_err(line, "schedule", format!("basis {basis} requests zero events")));
        }
        if out.iter().any(|e| e.basis == basis) {
            return Err(line_err(line, "schedule", format!("basis {basis} listed twice")));
        }
        out.push(ScheduleEntry { basis, events });
    }
    if out.is_empty() {
        return Err(line_err(line, "schedule", "empty schedule"));
    }
    Ok(out)
}

/// Parses a config document; unset keys keep their defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut section: Option<String> = None;
    let mut seen: Vec<(String, String)> = Vec::new();
    let mut label_set = [false; 2];
    let mut angle_set = [false; 2];

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse { line, msg: format!("malformed section header `{content}`") })?
                .trim();
            if !matches!(name, "prep" | "errors" | "budget" | "run") {
                return Err(Error::Parse { line, msg: format!("unknown section `[{name}]`") });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim().trim_matches('"')))
            .ok_or_else(|| Error::Parse { line, msg: format!("expected `key = value`, found `{content}`") })?;
        let Some(sec) = section.as_deref() else {
            return Err(line_err(line, key, "key appears before any section header"));
        };
        if seen.iter().any(|(s, k)| s == sec && k == key) {
            return Err(line_err(line, key, format!("duplicate key in [{sec}]")));
        }
        seen.push((sec.to_string(), key.to_string()));

        let pi = std::f64::consts::PI;
        match (sec, key) {
            ("prep", "theta1") => cfg.prep1.theta = in_range(line, key, value, 0.0, pi, false)?,
            ("prep", "phi1") => cfg.prep1.phi = in_range(line, key, value, 0.0, 2.0 * pi, true)?,
            ("prep", "theta2") => cfg.prep2.theta = in_range(line, key, value, 0.0, pi, false)?,
            ("prep", "phi2") => cfg.prep2.phi = in_range(line, key, value, 0.0, 2.0 * pi, true)?,
            ("prep", "state1") | ("prep", "state2") => {
                let p = PrepSetting::from_label(value)
                    .ok_or_else(|| line_err(line, key, format!("unknown state label `{value}`")))?;
                if key == "state1" {
                    cfg.prep1 = p;
                } else {
                    cfg.prep2 = p;
                }
            }
            ("errors", "mode_overlap") => cfg.error_model.mode_overlap = in_range(line, key, value, 0.0, 1.0, false)?,
            ("errors", "eps_det") => cfg.error_model.eps_det = in_range(line, key, value, 0.0, 0.5, false)?,
            ("errors", "eps_sigma") => cfg.error_model.eps_sigma = in_range(line, key, value, 0.0, 1.0, false)?,
            ("errors", "p_false_herald") => {
                cfg.error_model.p_false_herald = in_range(line, key, value, 0.0, 1.0, false)?
            }
            ("budget", "p_pi") => cfg.budget.p_pi = in_range(line, key, value, 0.0, 1.0, false)?,
            ("budget", "solid_angle_fraction") => {
                cfg.budget.solid_angle_fraction = in_range(line, key, value, 0.0, 1.0, false)?
            }
            ("budget", "t_fiber") => cfg.budget.t_fiber = in_range(line, key, value, 0.0, 1.0, false)?,
            ("budget", "t_optics") => cfg.budget.t_optics = in_range(line, key, value, 0.0, 1.0, false)?,
            ("budget", "eta") => cfg.budget.eta = in_range(line, key, value, 0.0, 1.0, false)?,
            ("budget", "attempt_rate_hz") => {
                cfg.budget.attempt_rate_hz = in_range(line, key, value, 0.0, f64::MAX, false)?
            }
            ("run", "seed") => {
                cfg.seed = value
                    .parse()
                    .map_err(|_| line_err(line, key, format!("`{value}` is not a 64-bit unsigned integer")))?
            }
            ("run", "fast_mode") => {
                cfg.fast_mode = match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(line_err(line, key, format!("`{value}` is not true or false"))),
                }
            }
            ("run", "max_attempts") => {
                cfg.max_attempts = value
                    .parse()
                    .ok()
                    .filter(|n| *n > 0)
                    .ok_or_else(|| line_err(line, key, format!("`{value}` is not a positive integer")))?
            }
            ("run", "schedule") => cfg.schedule = parse_schedule(line, value)?,
            _ => return Err(line_err(line, key, format!("unknown key in [{sec}]"))),
        }

        let slot = |k: &str| if k.ends_with('1') { 0 } else { 1 };
        match key {
            "state1" | "state2" => label_set[slot(key)] = true,
            "theta1" | "phi1" | "theta2" | "phi2" => angle_set[slot(key)] = true,
            _ => {}
        }
        for i in 0..2 {
            if label_set[i] && angle_set[i] {
                return Err(line_err(line, key, format!("state{} conflicts with theta{0}/phi{0}", i + 1)));
            }
        }
    }
    cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(cfg)
}

/// Serializes every field; `parse_config` of the output reproduces `cfg`.
pub fn write_config(cfg: &ExperimentConfig) -> String {
    let mut s = String::new();
    let em = &cfg.error_model;
    let b = &cfg.budget;
    let _ = writeln!(s, "[prep]");
    let _ = writeln!(s, "theta1 = {:?}\nphi1 = {:?}", cfg.prep1.theta, cfg.prep1.phi);
    let _ = writeln!(s, "theta2 = {:?}\nphi2 = {:?}", cfg.prep2.theta, cfg.prep2.phi);
    let _ = writeln!(s, "\n[errors]");
    let _ = writeln!(s, "mode_overlap = {:?}\neps_det = {:?}", em.mode_overlap, em.eps_det);
    let _ = writeln!(s, "eps_sigma = {:?}\np_false_herald = {:?}", em.eps_sigma, em.p_false_herald);
    let _ = writeln!(s, "\n[budget]");
    let _ = writeln!(s, "p_pi = {:?}\nsolid_angle_fraction = {:?}", b.p_pi, b.solid_angle_fraction);
    let _ = writeln!(s, "t_fiber = {:?}\nt_optics = {:?}\neta = {:?}", b.t_fiber, b.t_optics, b.eta);
    let _ = writeln!(s, "attempt_rate_hz = {:?}", b.attempt_rate_hz);
    let _ = writeln!(s, "\n[run]");
    let _ = writeln!(s, "seed = {}\nfast_mode = {}\nmax_attempts = {}", cfg.seed, cfg.fast_mode, cfg.max_attempts);
    let items: Vec<String> = cfg.schedule.iter().map(|e| format!("{}:{}", e.basis, e.events)).collect();
    let _ = writeln!(s, "schedule = {}", items.join(" "));
    s
}

/// Rounds to six significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Pretty JSON with struct field order preserved and floats at six
/// significant digits.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("report types serialize");
    round_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

fn csv_bytes<F>(header: &[&str], fill: F) -> Vec<u8>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    fill(&mut w).expect("in-memory write");
    w.into_inner().expect("in-memory flush")
}

fn fmt6(x: f64) -> String {
    format!("{}", round_sig(x))
}

pub fn emit_report(report: &RunReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => to_json(report).into_bytes(),
        ReportFormat::Csv => {
            csv_bytes(&["basis", "n_pp", "n_pm", "n_mp", "n_mm", "total", "parity", "parity_std_error"], |w| {
                for r in &report.records {
                    let (p, se) = parity(r).map(|p| (fmt6(p.value), fmt6(p.std_error))).unwrap_or_default();
                    let [a, b, c, d] = r.counts.map(|n| n.to_string());
                    w.write_record([r.basis.to_string(), a, b, c, d, r.total().to_string(), p, se])?;
                }
                Ok(())
            })
        }
    }
}

pub fn table1_text(t: &Table1) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<3} {:<13} {:<12} {:>6} {:>15} {:>11} {:>15} {:>11} {:>6}",
        "row", "input", "expected", "events", "fidelity(sim)", "(reported)", "p_psi(sim)", "(reported)", "theo"
    );
    for r in &t.rows {
        let p = &r.published;
        let pm = |v: Option<(f64, f64)>| v.map_or("-".to_string(), |(a, b)| format!("{a:.2}({b:.2})"));
        let stats = &r.report.herald_stats;
        let _ = writeln!(
            s,
            "{:<3} {:<13} {:<12} {:>6} {:>15} {:>11} {:>15} {:>11} {:>6.3}",
            r.row,
            format!("{}(x){}", p.input1, p.input2),
            p.expected.map_or("0", |t| t.label()),
            r.report.herald_stats.heralds,
            pm(r.fidelity),
            pm(p.fidelity),
            format!("{:.3}({:.3})", stats.p_psi_empirical, stats.p_psi_std_error),
            pm(Some(p.p_psi_measured)),
            stats.p_psi_theory,
        );
    }
    let _ = writeln!(s, "mean fidelity rows 1-7: {:.3} (reported 0.90(2))", t.mean_fidelity());
    s
}

pub fn table1_csv(t: &Table1) -> Vec<u8> {
    csv_bytes(
        &[
            "row",
            "input",
            "expected",
            "events",
            "fidelity_sim",
            "fidelity_sim_err",
            "fidelity_reported",
            "fidelity_reported_err",
            "p_psi_sim",
            "p_psi_sim_err",
            "p_psi_reported",
            "p_psi_reported_err",
            "p_psi_theory",
        ],
        |w| {
            for r in &t.rows {
                let p = &r.published;
                let opt = |v: Option<(f64, f64)>| v.map_or((String::new(), String::new()), |(a, b)| (fmt6(a), fmt6(b)));
                let (fs, fse) = opt(r.fidelity);
                let (fr, fre) = opt(p.fidelity);
                let st = &r.report.herald_stats;
                w.write_record([
                    r.row.to_string(),
                    format!("{}(x){}", p.input1, p.input2),
                    p.expected.map_or("0", |t| t.label()).to_string(),
                    st.heralds.to_string(),
                    fs,
                    fse,
                    fr,
                    fre,
                    fmt6(st.p_psi_empirical),
                    fmt6(st.p_psi_std_error),
                    fmt6(p.p_psi_measured.0),
                    fmt6(p.p_psi_measured.1),
                    fmt6(st.p_psi_theory),
                ])?;
            }
            Ok(())
        },
    )
}

/// JSON summary of a reconstruction: `{re, im, F, C, E_F, ...}`.
pub fn tomography_json(input: &TomographyInput, rec: &ReconstructionResult, seed: Option<u64>) -> Result<String> {
    let rho = &rec.rho_hat;
    let re: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| rho.entry(i, j).re).collect()).collect();
    let im: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| rho.entry(i, j).im).collect()).collect();
    let f = fidelity_pure(rho, &crate::measurement::TargetClass::PsiMinus.state())?;
    let conc = concurrence(rho)?;
    let eof = entanglement_of_formation(rho)?;
    let v = json!({
        "events": input.total_events(),
        "seed": seed,
        "re": re,
        "im": im,
        "F": f,
        "C": conc,
        "E_F": eof,
        "log_likelihood": rec.log_likelihood,
        "converged": rec.converged,
        "iterations": rec.iterations,
    });
    Ok(to_json(&v))
}

/// Bar-chart data for the real and imaginary panels of a density matrix.
pub fn matrix_bars_csv(rec: &ReconstructionResult) -> Vec<u8> {
    const KETS: [&str; 4] = ["00", "01", "10", "11"];
    csv_bytes(&["row", "col", "ket_row", "ket_col", "re", "im"], |w| {
        for (i, ket_i) in KETS.iter().enumerate() {
            for (j, ket_j) in KETS.iter().enumerate() {
                let e = rec.rho_hat.entry(i, j);
                w.write_record([
                    i.to_string(),
                    j.to_string(),
                    (*ket_i).into(),
                    (*ket_j).into(),
                    fmt6(e.re),
                    fmt6(e.im),
                ])?;
            }
        }
        Ok(())
    })
}

#[derive(Debug, Parser)]
#[command(name = "heralded-gate", about = "Heralded remote entangling gate simulator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment and print its report.
    Simulate {
        #[arg(env = CONFIG_ENV)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: ReportFormat,
        /// Also write the count records in text format.
        #[arg(long)]
        counts: Option<PathBuf>,
    },
    /// Regenerate the eight-row results table.
    Table1 {
        #[arg(env = CONFIG_ENV)]
        config: Option<PathBuf>,
        /// Write the comparison as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Replace the config's error model with the calibrated one.
        #[arg(long)]
        calibrated: bool,
    },
    /// Maximum-likelihood tomography from a counts file, or from a simulated
    /// nine-basis dataset described by a config file.
    Tomo {
        #[arg(env = CONFIG_ENV)]
        input: Option<PathBuf>,
        /// Fold the config's eps_det readout model into the likelihood.
        #[arg(long)]
        model_detection: bool,
        /// Readout flip probability assumed for a counts file.
        #[arg(long, default_value_t = 0.0)]
        eps_det: f64,
        /// Bar-chart data file for the matrix panels.
        #[arg(long, default_value = "rho_bars.csv")]
        bars: PathBuf,
    },
    /// Print the photon collection budget.
    Rates {
        #[arg(env = CONFIG_ENV)]
        config: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Config(_) | Error::OutOfRange { .. } => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn read(path: &PathBuf) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn load_config(path: &Option<PathBuf>) -> std::result::Result<ExperimentConfig, Failure> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => {
            let text = read(p)?;
            parse_config(&text).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn write_file(path: &PathBuf, bytes: &[u8]) -> std::result::Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

/// A file is a counts file when its first meaningful line is neither a
/// section header nor a `key = value` pair.
fn looks_like_counts(text: &str) -> bool {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .is_some_and(|l| !l.starts_with('[') && !l.contains('='))
}

fn run(cmd: Command, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Runtime(e.to_string());
    match cmd {
        Command::Simulate { config, format, counts } => {
            let cfg = load_config(&config)?;
            let report = run_experiment(&cfg)?;
            out.write_all(&emit_report(&report, format)).map_err(io)?;
            if let Some(path) = counts {
                write_file(&path, write_count_records(&report.records).as_bytes())?;
            }
        }
        Command::Table1 { config, csv, calibrated } => {
            let mut cfg = load_config(&config)?;
            if calibrated {
                cfg.error_model = ErrorModel::calibrated();
            }
            let table = reproduce_table1(&cfg)?;
            out.write_all(table1_text(&table).as_bytes()).map_err(io)?;
            if let Some(path) = csv {
                write_file(&path, &table1_csv(&table))?;
            }
        }
        Command::Tomo { input, model_detection, eps_det, bars } => {
            let text = match &input {
                Some(p) => read(p)?,
                None => String::new(),
            };
            let (tomo_input, rec, seed) = if looks_like_counts(&text) {
                let records: Vec<CountRecord> = parse_count_records(&text)?;
                let tomo_input = TomographyInput::new(records).map_err(|e| Failure::Config(e.to_string()))?;
                let rec = reconstruct_mle(&tomo_input, eps_det, &MleOptions::default())?;
                (tomo_input, rec, None)
            } else {
                let cfg = if input.is_some() { parse_config(&text)? } else { ExperimentConfig::default() };
                let eps = if model_detection { cfg.error_model.eps_det } else { 0.0 };
                let TomographyReport { input, reconstruction, run, .. } = reproduce_tomography_dataset(&cfg, eps)?;
                (input, reconstruction, Some(run.seed))
            };
            out.write_all(tomography_json(&tomo_input, &rec, seed)?.as_bytes()).map_err(io)?;
            write_file(&bars, &matrix_bars_csv(&rec))?;
        }
        Command::Rates { config } => {
            let cfg = load_config(&config)?;
            out.write_all(breakdown(&cfg.budget).as_bytes()).map_err(io)?;
        }
    }
    Ok(())
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn dispatch<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ =
                if code == EXIT_OK { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match run(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(msg)) => {
            let _ = writeln!(err, "config error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_RUNTIME
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::RateBudget;

    #[test]
    fn empty_config_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.error_model, ErrorModel::ideal());
        assert_eq!(cfg.budget, RateBudget::experiment());
        assert_eq!(cfg.seed, 0);
        assert!(cfg.fast_mode);
    }

    #[test]
    fn range_error_names_key_and_line() {
        let e = parse_config("[errors]\neps_det = 1.5\n").unwrap_err();
        let msg = e.to_string();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        assert!(msg.contains("eps_det"), "{msg}");
    }

    #[test]
    fn budget_key() {
        let cfg = parse_config("[budget]\neta = 0.15\n").unwrap();
        assert_eq!(cfg.budget.eta, 0.15);
    }

    #[test]
    fn unknown_and_malformed() {
        assert!(matches!(parse_config("[run]\nsed = 3"), Err(Error::Parse { line: 2, msg }) if msg.contains("sed")));
        assert!(matches!(parse_config("[errors]\n\n eta = 0.1"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_config("[run\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_config("[other]\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_config("seed = 1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_config("[run]\nseed 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_config("[run]\nseed = 1\nseed = 2"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_config("[run]\nfast_mode = yes"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_config("[run]\nschedule = XX:0"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_config("[prep]\nphi1 = 6.3"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_config("[prep]\nstate1 = 0+1\ntheta1 = 0.3"), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn labels_and_schedule() {
        let cfg =
            parse_config("[prep]\nstate1 = 0+i\nstate2 = 1\n[run]\nschedule = XY:60, YX:60 ZZ:59\nseed = 7").unwrap();
        assert_eq!(cfg.prep1, PrepSetting::from_label("0+i").unwrap());
        assert_eq!(cfg.schedule.len(), 3);
        assert_eq!(cfg.total_events(), 179);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn write_then_parse_is_identity() {
        let mut cfg = ExperimentConfig { seed: u64::MAX, ..Default::default() };
        cfg.error_model = ErrorModel::calibrated();
        cfg.prep1 = PrepSetting::new(1.234_567_890_123, 5.0).unwrap();
        assert_eq!(parse_config(&write_config(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn round_sig_values() {
        assert_eq!(round_sig(0.123456789), 0.123457);
        assert_eq!(round_sig(8.1225e-8), 8.1225e-8);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(123456789.0), 123457000.0);
    }

    #[test]
    fn counts_detection() {
        assert!(looks_like_counts("# c\nX X 1 2 3 4\n"));
        assert!(!looks_like_counts("[run]\nseed = 1"));
        assert!(!looks_like_counts(""));
    }
}
