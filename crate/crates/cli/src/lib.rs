//! Command-line front end: coefficient dumps, structural checks, truncation
//! studies and global convergence studies.
//!
//! Options come from flags or from a `key = value` config file (same keys as
//! the long flags); flags win over the file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nonlocal_colloc::coeffs::{table_csv, try_plc_weights, try_pqc_weights, PlcCoeffs, PqcCoeffs};
use nonlocal_colloc::oracle::TestFunction;
use nonlocal_colloc::plc::plc_matrix;
use nonlocal_colloc::pqc::pqc_matrix;
use nonlocal_colloc::solver::{structure_report, RowMeasure, StructureReport};
use nonlocal_colloc::study::{parse_real, run_study, StudyConfig};
use nonlocal_colloc::system::PqcNodeOrdering;
use nonlocal_colloc::{emit_table, EvalPoint, Grid, Kernel, Scheme, StudyMode, TableFormat};
use thiserror::Error;

/// Cell count used by `coeffs` and `check` when `--levels` is absent.
pub const DEFAULT_CELLS: usize = 16;

/// Config keys, in the order they are documented.
pub const KEYS: [&str; 10] = [
    "scheme", "gamma", "interval", "levels", "function", "point", "format", "out", "table", "tolerance",
];

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad command line or config file; exit status 2.
    #[error("{0}")]
    Usage(String),
    /// `--help` or `--version` text; exit status 0.
    #[error("{0}")]
    Help(String),
    /// Numerical failure while running; exit status 1.
    #[error(transparent)]
    Numerical(#[from] nonlocal_colloc::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Help(_) => 0,
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn usage(flag: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("invalid --{flag}: {msg}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Coeffs,
    Check,
    Truncation,
    Converge,
}

/// A validated command line.
#[derive(Debug, Clone, PartialEq)]
pub struct CliInvocation {
    pub command: Command,
    pub config: StudyConfig<f64>,
    pub format: TableFormat,
    /// Coefficient table for `coeffs`.
    pub table: String,
    pub output: Option<PathBuf>,
}

#[derive(Parser)]
#[command(name = "nonlocal-colloc", version, about = "Product-integration collocation studies")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Dump one coefficient table as CSV.
    Coeffs(Flags),
    /// Print the structural report of the system matrix.
    Check(Flags),
    /// Truncation-error study at one evaluation point.
    Truncation(Flags),
    /// Global convergence study of the collocation solution.
    Converge(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// plc or pqc
    #[arg(long)]
    scheme: Option<String>,
    /// Kernel exponent in [0, 1)
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    /// Interval as a,b
    #[arg(long, allow_hyphen_values = true)]
    interval: Option<String>,
    /// Cell counts N1,N2,...
    #[arg(long)]
    levels: Option<String>,
    /// const, linear, quadratic or exp
    #[arg(long)]
    function: Option<String>,
    /// center, first or x=<real>
    #[arg(long)]
    point: Option<String>,
    /// csv or markdown
    #[arg(long)]
    format: Option<String>,
    /// Also write the output to this file
    #[arg(long)]
    out: Option<String>,
    /// Config file of `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
    /// Coefficient table name (coeffs only)
    #[arg(long)]
    table: Option<String>,
    /// Oracle tolerance
    #[arg(long)]
    tolerance: Option<String>,
}

impl Flags {
    fn into_map(self) -> BTreeMap<&'static str, String> {
        let Flags {
            scheme,
            gamma,
            interval,
            levels,
            function,
            point,
            format,
            out,
            config: _,
            table,
            tolerance,
        } = self;
        let values = [scheme, gamma, interval, levels, function, point, format, out, table, tolerance];
        KEYS.iter()
            .zip(values)
            .filter_map(|(&k, v)| v.map(|v| (k, v)))
            .collect()
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<&'static str, String>, CliError> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", n + 1)))?;
        let k = k.trim().trim_start_matches("--");
        let key = KEYS
            .iter()
            .find(|&&known| known == k)
            .ok_or_else(|| CliError::Usage(format!("config line {}: unknown key `{k}`", n + 1)))?;
        map.insert(*key, v.trim().to_string());
    }
    Ok(map)
}

fn read_config(path: &Path) -> Result<BTreeMap<&'static str, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage("config", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Parses and validates a full command line (`argv[0]` is the program name).
pub fn parse_args<I, S>(argv: I) -> Result<CliInvocation, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Help(e.to_string()),
            _ => {
                let text = e.to_string();
                let line = text.lines().next().unwrap_or("invalid arguments");
                CliError::Usage(line.trim_start_matches("error: ").to_string())
            }
        }
    })?;
    let (command, flags) = match cli.command {
        Cmd::Coeffs(f) => (Command::Coeffs, f),
        Cmd::Check(f) => (Command::Check, f),
        Cmd::Truncation(f) => (Command::Truncation, f),
        Cmd::Converge(f) => (Command::Converge, f),
    };
    let mut options = match &flags.config {
        Some(path) => read_config(path)?,
        None => BTreeMap::new(),
    };
    options.extend(flags.into_map());
    resolve(command, &options)
}

fn parse_scheme(s: &str) -> Result<Scheme, CliError> {
    s.parse().map_err(|_| usage("scheme", format!("expected plc or pqc, got `{s}`")))
}

fn parse_gamma(s: &str) -> Result<f64, CliError> {
    let g = parse_real(s).map_err(|e| usage("gamma", e))?;
    Kernel::new(g).map_err(|e| usage("gamma", e))?;
    Ok(g)
}

fn parse_interval(s: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| usage("interval", format!("expected a,b, got `{s}`")))?;
    let a = parse_real(a).map_err(|e| usage("interval", e))?;
    let b = parse_real(b).map_err(|e| usage("interval", e))?;
    Ok((a, b))
}

fn parse_levels(s: &str) -> Result<Vec<usize>, CliError> {
    let levels = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| usage("levels", format!("`{t}` is not a cell count"))))
        .collect::<Result<Vec<usize>, _>>()?;
    if levels.is_empty() {
        return Err(usage("levels", "empty list"));
    }
    Ok(levels)
}

fn parse_function(s: &str) -> Result<TestFunction<f64>, CliError> {
    match s {
        "const" => Ok(TestFunction::Constant(1.0)),
        "linear" => Ok(TestFunction::Monomial(1)),
        "quadratic" => Ok(TestFunction::Monomial(2)),
        "exp" => Ok(TestFunction::Exp),
        _ => Err(usage("function", format!("expected const, linear, quadratic or exp, got `{s}`"))),
    }
}

fn resolve(command: Command, opt: &BTreeMap<&'static str, String>) -> Result<CliInvocation, CliError> {
    let get = |k: &str| opt.get(k).map(String::as_str);
    let scheme = parse_scheme(get("scheme").ok_or_else(|| usage("scheme", "required"))?)?;
    let gamma = parse_gamma(get("gamma").ok_or_else(|| usage("gamma", "required"))?)?;
    let mode = match command {
        Command::Truncation => StudyMode::Truncation,
        _ => StudyMode::Global,
    };
    let mut config = StudyConfig::new(scheme, mode, gamma);
    if let Some(s) = get("interval") {
        config.interval = parse_interval(s)?;
    }
    match get("levels") {
        Some(s) => config.levels = parse_levels(s)?,
        None if matches!(command, Command::Coeffs | Command::Check) => config.levels = vec![DEFAULT_CELLS],
        None => {}
    }
    if matches!(command, Command::Coeffs | Command::Check) && config.levels.len() != 1 {
        return Err(usage("levels", "coeffs and check take a single cell count"));
    }
    if let Some(s) = get("function") {
        config.test_function = parse_function(s)?;
    }
    if let Some(s) = get("point") {
        if command != Command::Truncation {
            return Err(usage("point", "only used by truncation"));
        }
        config.eval_points = vec![s.parse::<EvalPoint<f64>>().map_err(|e| usage("point", e))?];
    }
    if let Some(s) = get("tolerance") {
        config.oracle_tolerance = parse_real(s).map_err(|e| usage("tolerance", e))?;
    }
    let format = match get("format") {
        Some(s) => s.parse().map_err(|e| usage("format", e))?,
        None => TableFormat::Csv,
    };
    let tables = match scheme {
        Scheme::Plc => PlcCoeffs::<f64>::TABLES,
        Scheme::Pqc => PqcCoeffs::<f64>::TABLES,
    };
    let table = get("table").unwrap_or(tables[0]).to_string();
    if !tables.contains(&table.as_str()) {
        return Err(usage("table", format!("expected one of {}, got `{table}`", tables.join(", "))));
    }
    config.validate().map_err(|e| {
        let flag = match e {
            nonlocal_colloc::Error::InvalidInterval { .. } => "interval",
            nonlocal_colloc::Error::PointOutside { .. } => "point",
            nonlocal_colloc::Error::InvalidTolerance(_) => "tolerance",
            nonlocal_colloc::Error::MonomialDegree(_) => "function",
            _ => "levels",
        };
        usage(flag, e)
    })?;
    Ok(CliInvocation {
        command,
        config,
        format,
        table,
        output: get("out").map(PathBuf::from),
    })
}

fn grid_of(config: &StudyConfig<f64>) -> Result<Grid, CliError> {
    Ok(Grid::new(config.interval.0, config.interval.1, config.levels[0])?)
}

fn coeffs_text(inv: &CliInvocation) -> Result<String, CliError> {
    let grid = grid_of(&inv.config)?;
    let gamma = inv.config.gamma;
    let (first, values) = match inv.config.scheme {
        Scheme::Plc => {
            let c = try_plc_weights(gamma, &grid)?;
            let (i, v) = c.table(&inv.table).expect("validated table name");
            (i, v.to_vec())
        }
        Scheme::Pqc => {
            let c = try_pqc_weights(gamma, &grid)?;
            let (i, v) = c.table(&inv.table).expect("validated table name");
            (i, v.to_vec())
        }
    };
    Ok(table_csv(first, &values))
}

/// `name = value` lines of a structure report.
pub fn format_report(scheme: Scheme, gamma: f64, n: usize, r: &StructureReport<f64>) -> String {
    let mut s = String::new();
    let opt = |v: Option<String>| v.unwrap_or_else(|| "n/a".into());
    let rows: Vec<String> = r.row_sums.iter().map(|v| format!("{v:e}")).collect();
    let _ = writeln!(s, "scheme = {scheme}");
    let _ = writeln!(s, "gamma = {gamma}");
    let _ = writeln!(s, "cells = {n}");
    let _ = writeln!(s, "diag_positive = {}", r.diag_positive);
    let _ = writeln!(s, "off_diag_negative = {}", r.off_diag_negative);
    let _ = writeln!(s, "min_row_slack = {:e}", r.min_row_slack);
    let _ = writeln!(s, "gershgorin_lower_bound = {:e}", r.gershgorin_lower_bound);
    let _ = writeln!(s, "symmetric = {}", r.symmetric);
    let _ = writeln!(s, "spd_factorization_ok = {}", opt(r.spd_factorization_ok.map(|b| b.to_string())));
    let _ = writeln!(s, "lambda_min_estimate = {}", opt(r.lambda_min_estimate.map(|v| format!("{v:e}"))));
    let _ = writeln!(
        s,
        "{} = {}",
        match scheme {
            Scheme::Plc => "row_sums",
            Scheme::Pqc => "row_slack",
        },
        rows.join(",")
    );
    s
}

fn check_text(inv: &CliInvocation) -> Result<String, CliError> {
    let grid = grid_of(&inv.config)?;
    let gamma = inv.config.gamma;
    let report = match inv.config.scheme {
        Scheme::Plc => structure_report(&plc_matrix(&try_plc_weights(gamma, &grid)?), RowMeasure::Sum)?,
        Scheme::Pqc => structure_report(
            &pqc_matrix(&try_pqc_weights(gamma, &grid)?, PqcNodeOrdering::Blocked),
            RowMeasure::Slack,
        )?,
    };
    Ok(format_report(inv.config.scheme, gamma, grid.cells(), &report))
}

fn study_text(inv: &CliInvocation) -> Result<String, CliError> {
    let reports = run_study(&inv.config)?;
    Ok(reports
        .iter()
        .map(|r| emit_table(r, inv.format))
        .collect::<Vec<_>>()
        .join("\n"))
}

/// Runs a validated invocation and returns the text written to standard
/// output; the same text goes to `--out` when given.
pub fn run(inv: &CliInvocation) -> Result<String, CliError> {
    let text = match inv.command {
        Command::Coeffs => coeffs_text(inv)?,
        Command::Check => check_text(inv)?,
        Command::Truncation | Command::Converge => study_text(inv)?,
    };
    if let Some(path) = &inv.output {
        std::fs::write(path, &text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(text)
}

/// Parses, runs and reports; returns the process exit status.
pub fn main_with<I, S>(argv: I, stdout: &mut impl std::io::Write, stderr: &mut impl std::io::Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let result = parse_args(argv).and_then(|inv| run(&inv));
    match result {
        Ok(text) => {
            let _ = stdout.write_all(text.as_bytes());
            0
        }
        Err(CliError::Help(text)) => {
            let _ = stdout.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = stderr.write_all(format!("error: {e}\n").as_bytes());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        std::iter::once("nonlocal-colloc".to_string())
            .chain(s.split_whitespace().map(String::from))
            .collect()
    }

    #[test]
    fn reference_invocation_parses() {
        let inv = parse_args(args("converge --scheme pqc --gamma 0.3 --levels 16,32,64,128")).unwrap();
        assert_eq!(inv.command, Command::Converge);
        assert_eq!(inv.config.levels, vec![16, 32, 64, 128]);
        assert_eq!(inv.config.test_function, TestFunction::Exp);
        assert_eq!(inv.config.interval, (0.0, 1.0));
    }

    #[test]
    fn gamma_out_of_range_names_the_flag() {
        let e = parse_args(args("converge --scheme plc --gamma 1.2 --levels 16,32")).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("--gamma"));
        let e = parse_args(args("converge --scheme plc --gamma -0.1")).unwrap_err();
        assert!(e.to_string().contains("--gamma"));
    }

    #[test]
    fn empty_and_uneven_levels_are_usage_errors() {
        let e = parse_args(args("converge --scheme plc --gamma 0.3 --levels ,")).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = parse_args(args("converge --scheme plc --gamma 0.3 --levels 16,24")).unwrap_err();
        assert!(e.to_string().contains("--levels"));
    }

    #[test]
    fn unknown_flag_is_rejected() {
        let e = parse_args(args("converge --scheme plc --gamma 0.3 --colour red")).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("--colour"));
    }

    #[test]
    fn config_keys() {
        let m = parse_config("# comment\nscheme = pqc\n\n gamma=0.7 # inline\n").unwrap();
        assert_eq!(m["scheme"], "pqc");
        assert_eq!(m["gamma"], "0.7");
        assert!(parse_config("speed = 3").is_err());
        assert!(parse_config("scheme pqc").is_err());
    }

    #[test]
    fn gamma_zero_plc_dump_is_all_twos() {
        let inv = parse_args(args("coeffs --scheme plc --gamma 0")).unwrap();
        let text = run(&inv).unwrap();
        let rows = nonlocal_colloc::coeffs::parse_table_csv(&text).unwrap();
        assert_eq!(rows.len(), DEFAULT_CELLS - 1);
        assert!(rows.iter().all(|&(_, v)| (v - 2.0).abs() < 1e-14));
    }

    #[test]
    fn point_only_for_truncation() {
        assert!(parse_args(args("converge --scheme plc --gamma 0.3 --point center")).is_err());
        let inv = parse_args(args("truncation --scheme plc --gamma 0.3 --point x=1/3")).unwrap();
        assert_eq!(inv.config.eval_points, vec![EvalPoint::Fixed(1.0 / 3.0)]);
    }
}
