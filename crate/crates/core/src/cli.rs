//! Command-line front end: required-C/N tables, BER curves, the
//! equal-coverage alpha solver, data-rate arithmetic and scenario-driven
//! simulation.
//!
//! Values cross the CLI boundary in dB; everything inside runs on linear
//! ratios. Every run logs its fully resolved parameter set, CSV outputs
//! carry them as `#` comments, and exit codes distinguish parse errors (2),
//! validation errors (3) and infeasible requests (4).

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::constellation::Alpha;
use crate::link::{
    ber_curve_hier, parse_reference_csv, q_function, required_cnr_local, solve_equal_coverage,
    threshold_table, BerCurve, LinkError, Stream, ThresholdRow,
};
use crate::pilots::{
    user_data_rate, CodeRate, FrameParams, GuardInterval, DEFAULT_FRAMING_OVERHEAD,
};
use crate::sim::{
    run_ber_experiment, run_detection_experiment, run_estimation_experiment, scenario_hash,
    write_ber_csv, write_detection_csv, write_estimation_csv, Scenario, SimError,
};
use crate::units::{db_to_linear, linear_to_db};

/// Reference QPSK thresholds bundled with the tool (also available as a
/// file under `data/`).
pub const BUNDLED_QPSK_THRESHOLDS: &str = include_str!("../data/qpsk_thresholds.csv");

#[derive(Debug, Parser)]
#[command(
    name = "hmsfn",
    version,
    about = "Hierarchical-modulation local-content toolkit for hybrid satellite/terrestrial SFNs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Required-C/N table for the global and local streams at a given alpha.
    Table(TableArgs),
    /// Synthesize a BER-vs-C/N curve for one stream from a QPSK reference.
    Curve(CurveArgs),
    /// Solve for the alpha that gives both streams the same required C/N.
    SolveAlpha(SolveAlphaArgs),
    /// User data rates for an OFDM configuration and code rate.
    Rate(RateArgs),
    /// Run a Monte Carlo experiment described by a scenario file.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Hierarchy parameter (a real >= 1, or "inf").
    #[arg(long)]
    pub alpha: String,
    /// Reference QPSK threshold CSV (code_rate,qpsk_cn_db); bundled table
    /// when omitted.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Comparison CSV (code_rate,sim_global_cn_db,sim_local_cn_db);
    /// adds delta columns.
    #[arg(long)]
    pub compare: Option<PathBuf>,
    /// Write the table as CSV to this path.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Print a JSON summary instead of the plain table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Hierarchy parameter (a real >= 1, or "inf").
    #[arg(long)]
    pub alpha: String,
    /// Which stream to synthesize the curve for.
    #[arg(long, value_parser = parse_stream)]
    pub stream: Stream,
    /// Reference QPSK BER curve CSV (esn0_db,ber); analytic uncoded QPSK
    /// when omitted.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// C/N sweep start (dB).
    #[arg(long, default_value_t = -6.0, allow_hyphen_values = true)]
    pub from: f64,
    /// C/N sweep end (dB).
    #[arg(long, default_value_t = 16.0)]
    pub to: f64,
    /// C/N sweep step (dB).
    #[arg(long, default_value_t = 0.5)]
    pub step: f64,
    /// Write the curve as CSV to this path.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveAlphaArgs {
    /// Required Es/N0 of the global stream, dB.
    #[arg(long, allow_hyphen_values = true)]
    pub global_cn_db: f64,
    /// Required Es/N0 of the local stream, dB.
    #[arg(long, allow_hyphen_values = true)]
    pub local_cn_db: f64,
    /// Print a JSON summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    /// Channel bandwidth in MHz.
    #[arg(long, default_value_t = 5.0)]
    pub bandwidth_mhz: f64,
    /// FFT size.
    #[arg(long, default_value_t = 2048)]
    pub fft_size: usize,
    /// Guard interval (1/4, 1/8, 1/16 or 1/32).
    #[arg(long, default_value = "1/8")]
    pub guard: String,
    /// Data carriers per symbol.
    #[arg(long, default_value_t = 1512)]
    pub data_carriers: usize,
    /// Active carriers per symbol.
    #[arg(long, default_value_t = 1705)]
    pub total_active_carriers: usize,
    /// Code rate as a rational, e.g. 2/3.
    #[arg(long)]
    pub code_rate: String,
    /// Framing efficiency multiplier.
    #[arg(long, default_value_t = DEFAULT_FRAMING_OVERHEAD)]
    pub overhead: f64,
    /// Print a JSON summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file (TOML).
    pub scenario: PathBuf,
    /// Results CSV path; a `<path>.meta.json` sidecar is written alongside.
    #[arg(long, default_value = "results.csv")]
    pub output: PathBuf,
    /// Which experiment to run.
    #[arg(long, default_value = "ber", value_parser = ["ber", "estimation", "detection"])]
    pub experiment: String,
    /// Satellite power sweep (dB, comma separated) for the estimation
    /// experiment.
    #[arg(long, default_value = "0,3,6,10")]
    pub sat_sweep_db: String,
    /// Override the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_stream(s: &str) -> Result<Stream, String> {
    match s {
        "global" => Ok(Stream::Global),
        "local" => Ok(Stream::Local),
        other => Err(format!("stream must be 'global' or 'local', got '{other}'")),
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Infeasible(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Infeasible(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<LinkError> for CliError {
    fn from(e: LinkError) -> Self {
        match e {
            LinkError::InfeasibleGlobal { .. }
            | LinkError::InfeasibleAlpha { .. }
            | LinkError::NoLocalStream => CliError::Infeasible(e.to_string()),
            LinkError::Parse { .. } => CliError::Parse(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Parse(_) => CliError::Parse(e.to_string()),
            SimError::Invalid(_) | SimError::Frame(_) | SimError::Receiver(_) => {
                CliError::Validation(e.to_string())
            }
            SimError::Experiment(_) => CliError::Validation(e.to_string()),
            SimError::Io(io) => CliError::Io(io),
        }
    }
}

fn parse_alpha(s: &str) -> Result<Alpha, CliError> {
    Alpha::parse(s).map_err(|e| CliError::Validation(e.to_string()))
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))
}

/// Run a parsed command, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Table(args) => cmd_table(args, out),
        Command::Curve(args) => cmd_curve(args, out),
        Command::SolveAlpha(args) => cmd_solve_alpha(args, out),
        Command::Rate(args) => cmd_rate(args, out),
        Command::Simulate(args) => cmd_simulate(args, out),
    }
}

/// Comparison values parsed from a `--compare` CSV.
pub struct ComparisonRow {
    pub code_rate: CodeRate,
    pub sim_global_cn_db: f64,
    pub sim_local_cn_db: Option<f64>,
}

/// Parse a comparison CSV (`code_rate,sim_global_cn_db,sim_local_cn_db`;
/// the local field may be empty).
pub fn parse_comparison_csv(text: &str) -> Result<Vec<ComparisonRow>, LinkError> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "code_rate,sim_global_cn_db,sim_local_cn_db" {
                return Err(LinkError::Parse {
                    line: lineno + 1,
                    column: 1,
                    message: format!(
                        "expected header 'code_rate,sim_global_cn_db,sim_local_cn_db', got '{line}'"
                    ),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(LinkError::Parse {
                line: lineno + 1,
                column: fields.len(),
                message: "expected three fields".into(),
            });
        }
        let code_rate = CodeRate::parse(fields[0]).map_err(|e| LinkError::Parse {
            line: lineno + 1,
            column: 1,
            message: e.to_string(),
        })?;
        let sim_global_cn_db: f64 = fields[1].trim().parse().map_err(|_| LinkError::Parse {
            line: lineno + 1,
            column: 2,
            message: format!("bad number '{}'", fields[1]),
        })?;
        let local = fields[2].trim();
        let sim_local_cn_db = if local.is_empty() {
            None
        } else {
            Some(local.parse().map_err(|_| LinkError::Parse {
                line: lineno + 1,
                column: 3,
                message: format!("bad number '{local}'"),
            })?)
        };
        rows.push(ComparisonRow {
            code_rate,
            sim_global_cn_db,
            sim_local_cn_db,
        });
    }
    if rows.is_empty() {
        return Err(LinkError::BadReference(
            "comparison file has no rows".into(),
        ));
    }
    Ok(rows)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into())
}

fn cmd_table(args: TableArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let alpha = parse_alpha(&args.alpha)?;
    let reference_text = match &args.reference {
        Some(p) => read_file(p)?,
        None => BUNDLED_QPSK_THRESHOLDS.to_string(),
    };
    let reference = parse_reference_csv(&reference_text)?;
    let table = threshold_table(&reference, alpha)?;

    let comparison = match &args.compare {
        Some(p) => {
            let rows = parse_comparison_csv(&read_file(p)?)?;
            if rows.len() != table.len() {
                return Err(CliError::Validation(format!(
                    "comparison has {} rows, reference has {}",
                    rows.len(),
                    table.len()
                )));
            }
            for (row, cmp) in table.iter().zip(&rows) {
                if row.code_rate != cmp.code_rate {
                    return Err(CliError::Validation(format!(
                        "comparison code rate {} does not match reference row {}",
                        cmp.code_rate, row.code_rate
                    )));
                }
            }
            Some(rows)
        }
        None => None,
    };

    let mut comments = String::new();
    writeln!(comments, "# hmsfn {} table", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(comments, "# alpha = {alpha}").unwrap();
    writeln!(
        comments,
        "# reference = {}",
        args.reference
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "bundled".into())
    )
    .unwrap();

    if let Some(path) = &args.output {
        let mut csv = comments.clone();
        csv.push_str("code_rate,qpsk_cn_db,global_cn_db,local_cn_db");
        if comparison.is_some() {
            csv.push_str(",sim_global_cn_db,sim_local_cn_db,delta_global_db,delta_local_db");
        }
        csv.push('\n');
        for (i, row) in table.iter().enumerate() {
            let local = row.local_cn_db.map(|v| v.to_string()).unwrap_or_default();
            write!(
                csv,
                "{},{},{},{}",
                row.code_rate, row.qpsk_cn_db, row.global_cn_db, local
            )
            .unwrap();
            if let Some(cmp) = &comparison {
                let c = &cmp[i];
                let dg = row.global_cn_db - c.sim_global_cn_db;
                let dl = match (row.local_cn_db, c.sim_local_cn_db) {
                    (Some(a), Some(b)) => Some(a - b),
                    _ => None,
                };
                write!(
                    csv,
                    ",{},{},{},{}",
                    c.sim_global_cn_db,
                    c.sim_local_cn_db.map(|v| v.to_string()).unwrap_or_default(),
                    dg,
                    dl.map(|v| v.to_string()).unwrap_or_default()
                )
                .unwrap();
            }
            csv.push('\n');
        }
        fs::write(path, csv)?;
        writeln!(out, "wrote table to {}", path.display())?;
    }

    if args.json {
        let rows: Vec<serde_json::Value> = table
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut v = serde_json::json!({
                    "code_rate": row.code_rate.to_string(),
                    "qpsk_cn_db": row.qpsk_cn_db,
                    "global_cn_db": row.global_cn_db,
                    "local_cn_db": row.local_cn_db,
                });
                if let Some(cmp) = &comparison {
                    v["sim_global_cn_db"] = serde_json::json!(cmp[i].sim_global_cn_db);
                    v["sim_local_cn_db"] = serde_json::json!(cmp[i].sim_local_cn_db);
                }
                v
            })
            .collect();
        writeln!(
            out,
            "{}",
            serde_json::json!({ "alpha": alpha.to_string(), "rows": rows })
        )?;
        return Ok(());
    }

    writeln!(out, "required C/N (dB) at alpha = {alpha}")?;
    if comparison.is_some() {
        writeln!(
            out,
            "{:>9} {:>9} {:>9} {:>9} {:>11} {:>11}",
            "code_rate", "qpsk", "global", "local", "d_global", "d_local"
        )?;
    } else {
        writeln!(
            out,
            "{:>9} {:>9} {:>9} {:>9}",
            "code_rate", "qpsk", "global", "local"
        )?;
    }
    for (i, row) in table.iter().enumerate() {
        let ThresholdRow {
            code_rate,
            qpsk_cn_db,
            global_cn_db,
            local_cn_db,
        } = row;
        if let Some(cmp) = &comparison {
            let c = &cmp[i];
            let dg = global_cn_db - c.sim_global_cn_db;
            let dl = match (local_cn_db, c.sim_local_cn_db) {
                (Some(a), Some(b)) => Some(a - b),
                _ => None,
            };
            writeln!(
                out,
                "{:>9} {:>9.2} {:>9.3} {:>9} {:>11.3} {:>11}",
                code_rate.to_string(),
                qpsk_cn_db,
                global_cn_db,
                fmt_opt(*local_cn_db),
                dg,
                fmt_opt(dl)
            )?;
        } else {
            writeln!(
                out,
                "{:>9} {:>9.2} {:>9.3} {:>9}",
                code_rate.to_string(),
                qpsk_cn_db,
                global_cn_db,
                fmt_opt(*local_cn_db)
            )?;
        }
    }
    Ok(())
}

/// Analytic uncoded QPSK BER curve, `Q(sqrt(Es/N0))`, sampled every
/// quarter dB.
fn analytic_qpsk_curve() -> BerCurve {
    let points: Vec<(f64, f64)> = (0..=120)
        .map(|i| {
            let x = -10.0 + i as f64 * 0.25;
            (x, q_function(db_to_linear(x).sqrt()))
        })
        .collect();
    BerCurve::new(points).expect("analytic curve is valid")
}

fn cmd_curve(args: CurveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let alpha = parse_alpha(&args.alpha)?;
    if args.step.is_nan() || args.step <= 0.0 || args.to <= args.from {
        return Err(CliError::Validation(
            "sweep needs step > 0 and to > from".into(),
        ));
    }
    let reference = match &args.reference {
        Some(p) => BerCurve::parse_csv(&read_file(p)?)?,
        None => analytic_qpsk_curve(),
    };
    let mut sweep = Vec::new();
    let mut x = args.from;
    while x <= args.to + 1e-12 {
        sweep.push(x);
        x += args.step;
    }
    let synthesis = ber_curve_hier(&reference, alpha, args.stream, &sweep)?;

    let stream_name = match args.stream {
        Stream::Global => "global",
        Stream::Local => "local",
    };
    let mut csv = String::new();
    writeln!(csv, "# hmsfn {} curve", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(csv, "# alpha = {alpha}").unwrap();
    writeln!(csv, "# stream = {stream_name}").unwrap();
    for omitted in &synthesis.omitted_db {
        writeln!(
            csv,
            "# omitted_cnr_db = {omitted} (effective Es/N0 outside reference)"
        )
        .unwrap();
    }
    writeln!(csv, "cnr_db,ber").unwrap();
    for &(x, ber) in &synthesis.curve {
        writeln!(csv, "{x},{ber}").unwrap();
    }
    match &args.output {
        Some(path) => {
            fs::write(path, csv)?;
            writeln!(
                out,
                "wrote {} curve points to {} ({} omitted)",
                synthesis.curve.len(),
                path.display(),
                synthesis.omitted_db.len()
            )?;
        }
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn cmd_solve_alpha(args: SolveAlphaArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let g_req = db_to_linear(args.global_cn_db);
    let l_req = db_to_linear(args.local_cn_db);
    let alpha = solve_equal_coverage(g_req, l_req)?;
    let common = required_cnr_local(l_req, alpha)?;
    let common_db = linear_to_db(common);
    let w = alpha.power_ratio();
    if args.json {
        writeln!(
            out,
            "{}",
            serde_json::json!({
                "alpha": alpha.value(),
                "one_plus_alpha_sq": w,
                "common_cn_db": common_db,
            })
        )?;
        return Ok(());
    }
    writeln!(out, "equal-coverage solution")?;
    writeln!(out, "  global requirement : {:.2} dB", args.global_cn_db)?;
    writeln!(out, "  local requirement  : {:.2} dB", args.local_cn_db)?;
    writeln!(out, "  (1+alpha)^2        : {w:.4}")?;
    writeln!(out, "  alpha              : {:.4}", alpha.value())?;
    writeln!(out, "  common required C/N: {common_db:.3} dB")?;
    Ok(())
}

fn cmd_rate(args: RateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let guard =
        GuardInterval::parse(&args.guard).map_err(|e| CliError::Validation(e.to_string()))?;
    let params = FrameParams {
        bandwidth_hz: args.bandwidth_mhz * 1e6,
        fft_size: args.fft_size,
        guard,
        data_carriers: args.data_carriers,
        total_active_carriers: args.total_active_carriers,
    };
    params
        .validate()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    if args.overhead.is_nan() || args.overhead <= 0.0 || args.overhead > 1.0 {
        return Err(CliError::Validation("overhead must be in (0, 1]".into()));
    }
    let code_rate =
        CodeRate::parse(&args.code_rate).map_err(|e| CliError::Validation(e.to_string()))?;
    let raw = user_data_rate(&params, code_rate, 1.0);
    let adjusted = user_data_rate(&params, code_rate, args.overhead);
    if args.json {
        writeln!(
            out,
            "{}",
            serde_json::json!({
                "code_rate": code_rate.to_string(),
                "symbol_duration_s": params.symbol_duration_s(),
                "raw_bps": raw,
                "adjusted_bps": adjusted,
                "overhead": args.overhead,
            })
        )?;
        return Ok(());
    }
    writeln!(
        out,
        "user data rate ({} MHz, {}-FFT, GI {}, rate {})",
        args.bandwidth_mhz, args.fft_size, guard, code_rate
    )?;
    writeln!(
        out,
        "  symbol duration : {:.1} us",
        params.symbol_duration_s() * 1e6
    )?;
    writeln!(out, "  raw rate        : {:.4} Mbit/s", raw / 1e6)?;
    writeln!(
        out,
        "  user rate       : {:.4} Mbit/s (overhead {:.4})",
        adjusted / 1e6,
        args.overhead
    )?;
    Ok(())
}

fn cmd_simulate(args: SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let text = read_file(&args.scenario)?;
    let mut scenario = Scenario::from_toml_str(&text)?;
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    let hash = scenario_hash(&text);

    let mut comments = String::new();
    writeln!(comments, "# hmsfn {} simulate", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(comments, "# experiment = {}", args.experiment).unwrap();
    writeln!(comments, "# scenario_sha256 = {hash}").unwrap();
    writeln!(comments, "# seed = {}", scenario.seed).unwrap();
    for line in scenario.to_toml_string().lines() {
        writeln!(comments, "# {line}").unwrap();
    }

    let mut body = Vec::new();
    let summary: serde_json::Value = match args.experiment.as_str() {
        "ber" => {
            let result = run_ber_experiment(&scenario)?;
            write_ber_csv(&result, &mut body)?;
            for p in &result.points {
                writeln!(
                    out,
                    "cnr {:>6.2} dB: hp_ber {:.3e} ({} / {} bits){}",
                    p.cnr_db,
                    p.hp_ber(),
                    p.hp_errors,
                    p.hp_bits,
                    match p.lp_ber() {
                        Some(b) => format!(", lp_ber {b:.3e}"),
                        None => String::new(),
                    }
                )?;
            }
            serde_json::json!({ "points": result.points.len() })
        }
        "estimation" => {
            let sweep: Vec<f64> = args
                .sat_sweep_db
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Validation(format!("bad sweep value '{s}'")))
                })
                .collect::<Result<_, _>>()?;
            let points = run_estimation_experiment(&scenario, &sweep)?;
            write_estimation_csv(&points, &mut body)?;
            for p in &points {
                writeln!(
                    out,
                    "sat {:>5.1} dB: msq_global {:.3e}, msq_local {:.3e} ({} samples)",
                    p.sat_power_db, p.msq_global, p.msq_local, p.n_samples
                )?;
            }
            serde_json::json!({ "points": points.len() })
        }
        "detection" => {
            let points = run_detection_experiment(&scenario)?;
            write_detection_csv(&points, &mut body)?;
            for p in &points {
                writeln!(
                    out,
                    "cnr {:>6.2} dB: detection {}, false alarms {:.3}",
                    p.cnr_db,
                    p.detection_rate
                        .map(|d| format!("{d:.3}"))
                        .unwrap_or_else(|| "-".into()),
                    p.false_alarm_rate
                )?;
            }
            serde_json::json!({ "points": points.len() })
        }
        other => {
            return Err(CliError::Validation(format!(
                "unknown experiment '{other}'"
            )))
        }
    };

    let mut csv = comments.into_bytes();
    csv.extend_from_slice(&body);
    fs::write(&args.output, &csv)?;

    let meta = serde_json::json!({
        "tool": "hmsfn",
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": args.experiment,
        "scenario_file": args.scenario.file_name().and_then(|s| s.to_str()),
        "scenario_sha256": hash,
        "seed": scenario.seed,
        "alpha": scenario.alpha.to_string(),
        "summary": summary,
    });
    let meta_path = sidecar_path(&args.output);
    fs::write(&meta_path, serde_json::to_string_pretty(&meta)?.as_bytes())?;
    writeln!(
        out,
        "wrote {} and {}",
        args.output.display(),
        meta_path.display()
    )?;
    Ok(())
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

/// Metadata sidecar path for a results file: `<path>.meta.json`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_os_string();
    s.push(".meta.json");
    PathBuf::from(s)
}
