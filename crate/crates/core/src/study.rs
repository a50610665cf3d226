//! Grid-refinement studies: truncation and global errors over a ladder of
//! meshes, observed orders, and CSV/Markdown tables.

use std::fmt;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{KernelParams, NodeSet, UniformGrid, MAX_CELLS};
use crate::oracle::{oracle_problem, Oracle, TestFunction, DEFAULT_TOLERANCE, MIN_TOLERANCE};
use crate::plc::{assemble_plc_system, plc_truncation_at, PlcIntegralRule};
use crate::pqc::{assemble_pqc_system, pqc_truncation_at, PqcIntegralRule};
use crate::scalar::Scalar;
use crate::system::Scheme;

/// Errors below this are reported as "floor" and carry no order.
pub const ERROR_FLOOR: f64 = 1e-12;

/// Which error a study measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StudyMode {
    /// `|I(x) - I_h(x)|` at fixed evaluation points.
    Truncation,
    /// Max-norm error of the solved collocation system.
    Global,
}

impl fmt::Display for StudyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StudyMode::Truncation => "truncation",
            StudyMode::Global => "global",
        })
    }
}

/// Where a truncation error is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalPoint<T> {
    /// Midpoint of the interval.
    Center,
    /// First interior junction `a + h`, re-resolved on every level.
    First,
    Fixed(T),
}

impl<T: Scalar> EvalPoint<T> {
    pub fn resolve(&self, grid: &UniformGrid<T>) -> T {
        match *self {
            EvalPoint::Center => (grid.a() + grid.b()) * T::lit(0.5),
            EvalPoint::First => grid.node(1),
            EvalPoint::Fixed(x) => x,
        }
    }

    /// Short label used in file names and report headers.
    pub fn label(&self) -> String {
        match self {
            EvalPoint::Center => "center".into(),
            EvalPoint::First => "first".into(),
            EvalPoint::Fixed(x) => format!("x={}", x.to_f64_lossy()),
        }
    }
}

/// Parses `center`, `first`, `x=<real>` or `x=<p>/<q>`.
impl FromStr for EvalPoint<f64> {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "center" => Ok(EvalPoint::Center),
            "first" => Ok(EvalPoint::First),
            _ => {
                let v = s
                    .strip_prefix("x=")
                    .ok_or_else(|| Error::Parse(format!("unknown point `{s}`")))?;
                parse_real(v).map(EvalPoint::Fixed)
            }
        }
    }
}

/// Parses a real number or a fraction `p/q`.
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a number: `{s}`"));
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            p / q
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// Full description of one study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig<T> {
    pub scheme: Scheme,
    pub mode: StudyMode,
    pub gamma: T,
    pub interval: (T, T),
    /// Cell counts, coarse to fine.
    pub levels: Vec<usize>,
    pub test_function: TestFunction<T>,
    /// Truncation studies only.
    pub eval_points: Vec<EvalPoint<T>>,
    pub oracle_tolerance: T,
}

impl<T: Scalar> StudyConfig<T> {
    /// Defaults matching the reference experiments: `(0, 1)`, `e^y`, and the
    /// ladders `64..512` (truncation) or `16..128` (global).
    pub fn new(scheme: Scheme, mode: StudyMode, gamma: T) -> Self {
        let levels = match mode {
            StudyMode::Truncation => vec![64, 128, 256, 512],
            StudyMode::Global => vec![16, 32, 64, 128],
        };
        Self {
            scheme,
            mode,
            gamma,
            interval: (T::zero(), T::one()),
            levels,
            test_function: TestFunction::Exp,
            eval_points: vec![EvalPoint::Center],
            oracle_tolerance: T::lit(DEFAULT_TOLERANCE),
        }
    }

    pub fn validate(&self) -> Result<()> {
        KernelParams::new(self.gamma)?;
        let (a, b) = self.interval;
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInterval {
                a: a.to_f64_lossy(),
                b: b.to_f64_lossy(),
            });
        }
        if self.levels.is_empty() {
            return Err(Error::InvalidStudy("no levels given".into()));
        }
        for &n in &self.levels {
            if !(2..=MAX_CELLS).contains(&n) {
                return Err(Error::CellCount {
                    n,
                    min: 2,
                    max: MAX_CELLS,
                });
            }
        }
        for w in self.levels.windows(2) {
            if w[1] <= w[0] || w[1] % w[0] != 0 {
                return Err(Error::InvalidStudy(format!(
                    "levels must increase by integer factors, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if !(self.oracle_tolerance.to_f64_lossy() >= MIN_TOLERANCE) {
            return Err(Error::InvalidTolerance(self.oracle_tolerance.to_f64_lossy()));
        }
        self.test_function.validate()?;
        if self.mode == StudyMode::Truncation {
            if self.eval_points.is_empty() {
                return Err(Error::InvalidStudy("no evaluation points given".into()));
            }
            for p in &self.eval_points {
                if let EvalPoint::Fixed(x) = *p {
                    if !(x > a && x < b) {
                        return Err(Error::PointOutside {
                            x: x.to_f64_lossy(),
                            a: a.to_f64_lossy(),
                            b: b.to_f64_lossy(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// One refinement level of a report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    pub h: f64,
    pub error: f64,
    /// Observed order against the previous row.
    pub order: Option<f64>,
    /// Error below [`ERROR_FLOOR`].
    pub floor: bool,
}

/// Run description carried alongside the rows; not part of emitted tables.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyMetadata {
    pub interval: (f64, f64),
    pub function: String,
    pub oracle_tolerance: f64,
    /// Seconds since the Unix epoch when the study started.
    pub started_at: u64,
    pub elapsed_seconds: f64,
}

/// Result of one study (one evaluation point for truncation studies).
#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub scheme: Scheme,
    pub mode: StudyMode,
    pub gamma: f64,
    /// Evaluation point label for truncation studies.
    pub point: Option<String>,
    /// Always the max norm.
    pub norm: &'static str,
    pub rows: Vec<ReportRow>,
    pub metadata: StudyMetadata,
}

impl StudyReport {
    /// `<scheme>_<mode>_gamma<g>[_<point>].csv`.
    pub fn file_name(&self) -> String {
        let mut s = format!("{}_{}_gamma{}", self.scheme, self.mode, self.gamma);
        if let Some(p) = &self.point {
            s.push('_');
            s.push_str(&p.replace('=', ""));
        }
        s.push_str(".csv");
        s
    }
}

/// `log(e_{k-1}/e_k) / log(h_{k-1}/h_k)`; `None` for the first level and
/// wherever either error is at the floor or not positive.
pub fn estimate_orders(h: &[f64], errors: &[f64]) -> Vec<Option<f64>> {
    let usable = |e: f64| e >= ERROR_FLOOR && e.is_finite();
    (0..errors.len())
        .map(|k| {
            if k == 0 || !usable(errors[k]) || !usable(errors[k - 1]) {
                None
            } else {
                Some((errors[k - 1] / errors[k]).ln() / (h[k - 1] / h[k]).ln())
            }
        })
        .collect()
}

/// Rows with orders and floor flags for errors measured on `levels`.
pub fn build_report_rows(levels: &[usize], h: &[f64], errors: &[f64]) -> Vec<ReportRow> {
    let orders = estimate_orders(h, errors);
    levels
        .iter()
        .zip(h)
        .zip(errors)
        .zip(orders)
        .map(|(((&n, &h), &error), order)| ReportRow {
            n,
            h,
            error,
            order,
            floor: error < ERROR_FLOOR,
        })
        .collect()
}

fn now() -> (u64, std::time::Instant) {
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    (started, std::time::Instant::now())
}

/// Truncation errors at every configured point; one report per point.
pub fn run_truncation_study<T: Scalar>(config: &StudyConfig<T>) -> Result<Vec<StudyReport>> {
    config.validate()?;
    if config.mode != StudyMode::Truncation {
        return Err(Error::InvalidStudy("truncation study needs mode = truncation".into()));
    }
    let (started_at, clock) = now();
    let params = KernelParams::new(config.gamma)?;
    let oracle = Oracle::new(params, config.oracle_tolerance)?;
    let (a, b) = config.interval;
    let u = config.test_function;
    // per level: (h, errors per point)
    let per_level = config
        .levels
        .par_iter()
        .map(|&n| -> Result<(f64, Vec<f64>)> {
            let grid = UniformGrid::new(a, b, n)?;
            let errors = match config.scheme {
                Scheme::Plc => {
                    let rule = PlcIntegralRule::new(params, grid);
                    config
                        .eval_points
                        .iter()
                        .map(|p| plc_truncation_at(&rule, &oracle, &u, p.resolve(&grid)))
                        .collect::<Result<Vec<_>>>()?
                }
                Scheme::Pqc => {
                    let rule = PqcIntegralRule::new(params, grid);
                    config
                        .eval_points
                        .iter()
                        .map(|p| pqc_truncation_at(&rule, &oracle, &u, p.resolve(&grid)))
                        .collect::<Result<Vec<_>>>()?
                }
            };
            Ok((grid.h().to_f64_lossy(), errors.iter().map(|e| e.to_f64_lossy()).collect()))
        })
        .collect::<Result<Vec<_>>>()?;
    let h: Vec<f64> = per_level.iter().map(|l| l.0).collect();
    let elapsed = clock.elapsed().as_secs_f64();
    Ok(config
        .eval_points
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let errors: Vec<f64> = per_level.iter().map(|l| l.1[k]).collect();
            StudyReport {
                scheme: config.scheme,
                mode: StudyMode::Truncation,
                gamma: config.gamma.to_f64_lossy(),
                point: Some(p.label()),
                norm: "max",
                rows: build_report_rows(&config.levels, &h, &errors),
                metadata: metadata(config, started_at, elapsed),
            }
        })
        .collect())
}

fn metadata<T: Scalar>(config: &StudyConfig<T>, started_at: u64, elapsed: f64) -> StudyMetadata {
    StudyMetadata {
        interval: (config.interval.0.to_f64_lossy(), config.interval.1.to_f64_lossy()),
        function: config.test_function.to_string(),
        oracle_tolerance: config.oracle_tolerance.to_f64_lossy(),
        started_at,
        elapsed_seconds: elapsed,
    }
}

/// Max-norm error of the collocation solution over every collocation node.
pub fn global_error<T: Scalar>(
    scheme: Scheme,
    oracle: &Oracle<T>,
    u: &TestFunction<T>,
    grid: &UniformGrid<T>,
) -> Result<T> {
    let params = oracle.params();
    let system = match scheme {
        Scheme::Plc => {
            let prob = oracle_problem(oracle, u, grid, NodeSet::PlcInterior)?;
            assemble_plc_system(params, grid, &prob)?
        }
        Scheme::Pqc => {
            let prob = oracle_problem(oracle, u, grid, NodeSet::PqcAll)?;
            assemble_pqc_system(params, grid, &prob)?
        }
    };
    let values = system.solve()?;
    Ok(system
        .positions
        .iter()
        .zip(&values)
        .map(|(&x, &v)| (u.eval(x) - v).abs())
        .fold(T::zero(), T::max))
}

/// Global convergence study over the configured ladder.
pub fn run_global_study<T: Scalar>(config: &StudyConfig<T>) -> Result<StudyReport> {
    config.validate()?;
    if config.mode != StudyMode::Global {
        return Err(Error::InvalidStudy("global study needs mode = global".into()));
    }
    let (started_at, clock) = now();
    let params = KernelParams::new(config.gamma)?;
    let oracle = Oracle::new(params, config.oracle_tolerance)?;
    let (a, b) = config.interval;
    let per_level = config
        .levels
        .par_iter()
        .map(|&n| -> Result<(f64, f64)> {
            let grid = UniformGrid::new(a, b, n)?;
            let e = global_error(config.scheme, &oracle, &config.test_function, &grid)?;
            Ok((grid.h().to_f64_lossy(), e.to_f64_lossy()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (h, errors): (Vec<f64>, Vec<f64>) = per_level.into_iter().unzip();
    Ok(StudyReport {
        scheme: config.scheme,
        mode: StudyMode::Global,
        gamma: config.gamma.to_f64_lossy(),
        point: None,
        norm: "max",
        rows: build_report_rows(&config.levels, &h, &errors),
        metadata: metadata(config, started_at, clock.elapsed().as_secs_f64()),
    })
}

/// Runs either kind of study; truncation studies yield one report per point.
pub fn run_study<T: Scalar>(config: &StudyConfig<T>) -> Result<Vec<StudyReport>> {
    match config.mode {
        StudyMode::Truncation => run_truncation_study(config),
        StudyMode::Global => run_global_study(config).map(|r| vec![r]),
    }
}

/// Output format of [`emit_table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl FromStr for TableFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            other => Err(Error::Parse(format!("unknown format `{other}`"))),
        }
    }
}

/// `d.dddde-XX`: five significant digits and a signed two-digit exponent.
pub fn format_error(e: f64) -> String {
    let s = format!("{e:.4e}");
    match s.split_once('e') {
        Some((mantissa, exp)) => {
            let (sign, digits) = match exp.strip_prefix('-') {
                Some(d) => ('-', d),
                None => ('+', exp),
            };
            format!("{mantissa}e{sign}{digits:0>2}")
        }
        None => s,
    }
}

fn format_order(row: &ReportRow) -> String {
    match (row.order, row.floor) {
        (_, true) => "floor".into(),
        (Some(p), false) => format!("{p:.4}"),
        (None, false) => String::new(),
    }
}

/// `1/N` style label when `h` is the reciprocal of an integer.
fn format_h(h: f64) -> String {
    let inv = 1.0 / h;
    if (inv - inv.round()).abs() < 1e-9 * inv {
        format!("1/{}", inv.round() as u64)
    } else {
        format!("{h:e}")
    }
}

/// Renders a report. CSV has header `N,h,error,order`; the order column holds
/// `floor` for entries below [`ERROR_FLOOR`] and is empty on the first row.
pub fn emit_table(report: &StudyReport, format: TableFormat) -> String {
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            out.push_str("N,h,error,order\n");
            for r in &report.rows {
                out.push_str(&format!(
                    "{},{:e},{},{}\n",
                    r.n,
                    r.h,
                    format_error(r.error),
                    format_order(r)
                ));
            }
        }
        TableFormat::Markdown => {
            let what = match report.mode {
                StudyMode::Truncation => "truncation error",
                StudyMode::Global => "max-norm error",
            };
            out.push_str(&format!(
                "{} {}, gamma = {}",
                report.scheme.to_string().to_uppercase(),
                what,
                report.gamma
            ));
            if let Some(p) = &report.point {
                out.push_str(&format!(", {p}"));
            }
            out.push_str("\n\n| N | h | error | order |\n|---:|---:|---:|---:|\n");
            for r in &report.rows {
                out.push_str(&format!(
                    "| {} | {} | {} | {} |\n",
                    r.n,
                    format_h(r.h),
                    format_error(r.error),
                    format_order(r)
                ));
            }
        }
    }
    out
}

/// Parses the CSV written by [`emit_table`].
pub fn parse_table(text: &str) -> Result<Vec<ReportRow>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == "N,h,error,order" => {}
        other => return Err(Error::Parse(format!("unexpected header {other:?}"))),
    }
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(Error::Parse(format!("expected 4 fields in `{line}`")));
            }
            let bad = |what: &str| Error::Parse(format!("bad {what} in `{line}`"));
            let n = f[0].trim().parse().map_err(|_| bad("N"))?;
            let h = f[1].trim().parse().map_err(|_| bad("h"))?;
            let error = f[2].trim().parse().map_err(|_| bad("error"))?;
            let (order, floor) = match f[3].trim() {
                "" => (None, false),
                "floor" => (None, true),
                s => (Some(s.parse().map_err(|_| bad("order"))?), false),
            };
            Ok(ReportRow {
                n,
                h,
                error,
                order,
                floor,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(rows: Vec<ReportRow>) -> StudyReport {
        StudyReport {
            scheme: Scheme::Plc,
            mode: StudyMode::Global,
            gamma: 0.0,
            point: None,
            norm: "max",
            rows,
            metadata: StudyMetadata {
                interval: (0.0, 1.0),
                function: "exp(y)".into(),
                oracle_tolerance: 1e-14,
                started_at: 0,
                elapsed_seconds: 0.0,
            },
        }
    }

    #[test]
    fn error_formatting() {
        assert_eq!(format_error(8.9488e-3), "8.9488e-03");
        assert_eq!(format_error(2.6645e-15), "2.6645e-15");
        assert_eq!(format_error(12.5), "1.2500e+01");
        assert_eq!(format_error(0.0), "0.0000e+00");
    }

    #[test]
    fn orders_of_synthetic_errors() {
        let h = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
        let e: Vec<f64> = h.iter().map(|h: &f64| 3.0 * h.powf(2.5)).collect();
        let o = estimate_orders(&h, &e);
        assert_eq!(o[0], None);
        assert!((o[1].unwrap() - 2.5).abs() < 1e-12);
        assert!((o[2].unwrap() - 2.5).abs() < 1e-12);
        let o = estimate_orders(&h, &[1e-10, 1e-13, 1e-14]);
        assert_eq!(o, vec![None, None, None]);
    }

    #[test]
    fn single_row_csv() {
        let rows = build_report_rows(&[16], &[1.0 / 16.0], &[8.9488e-3]);
        let csv = emit_table(&report(rows), TableFormat::Csv);
        assert_eq!(csv, "N,h,error,order\n16,6.25e-2,8.9488e-03,\n");
    }

    #[test]
    fn csv_round_trip() {
        let h = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
        let rows = build_report_rows(&[64, 128, 256], &h, &[1.2613e-11, 7.4474e-13, 4.6185e-14]);
        let r = report(rows);
        let csv = emit_table(&r, TableFormat::Csv);
        let parsed = parse_table(&csv).unwrap();
        assert_eq!(parsed.len(), 3);
        assert!(parsed[1].floor && parsed[2].floor);
        assert_eq!(parsed[0].error, 1.2613e-11);
        assert_eq!(parsed[0].h, h[0]);
        let again = emit_table(&report(parsed), TableFormat::Csv);
        assert_eq!(again, csv);
    }

    #[test]
    fn markdown_shape() {
        let rows = build_report_rows(&[16, 32], &[1.0 / 16.0, 1.0 / 32.0], &[8.9488e-3, 4.4746e-3]);
        let md = emit_table(&report(rows), TableFormat::Markdown);
        assert!(md.contains("| 16 | 1/16 | 8.9488e-03 |  |"));
        assert!(md.contains("| 32 | 1/32 | 4.4746e-03 | 0.9999 |"));
    }

    #[test]
    fn config_validation() {
        let mut c = StudyConfig::new(Scheme::Plc, StudyMode::Global, 0.3_f64);
        assert!(c.validate().is_ok());
        c.levels = vec![16, 24];
        assert!(c.validate().is_err());
        c.levels = vec![];
        assert!(matches!(c.validate(), Err(Error::InvalidStudy(_))));
        let mut c = StudyConfig::new(Scheme::Pqc, StudyMode::Truncation, 0.3_f64);
        c.eval_points = vec![EvalPoint::Fixed(1.5)];
        assert!(matches!(c.validate(), Err(Error::PointOutside { .. })));
        c.gamma = 1.0;
        assert!(matches!(c.validate(), Err(Error::InvalidGamma(_))));
    }

    #[test]
    fn point_parsing() {
        assert_eq!("center".parse::<EvalPoint<f64>>().unwrap(), EvalPoint::Center);
        assert_eq!("x=1/3".parse::<EvalPoint<f64>>().unwrap(), EvalPoint::Fixed(1.0 / 3.0));
        assert_eq!("x=0.25".parse::<EvalPoint<f64>>().unwrap(), EvalPoint::Fixed(0.25));
        assert!("middle".parse::<EvalPoint<f64>>().is_err());
    }

    #[test]
    fn file_names() {
        let mut r = report(vec![]);
        r.gamma = 0.3;
        assert_eq!(r.file_name(), "plc_global_gamma0.3.csv");
        r.mode = StudyMode::Truncation;
        r.point = Some("x=0.5".into());
        assert_eq!(r.file_name(), "plc_truncation_gamma0.3_x0.5.csv");
    }

    #[test]
    fn constant_solution_is_reproduced() {
        let mut c = StudyConfig::new(Scheme::Pqc, StudyMode::Global, 0.5_f64);
        c.test_function = TestFunction::Constant(1.0);
        c.levels = vec![8, 16];
        let r = run_global_study(&c).unwrap();
        assert!(r.rows.iter().all(|row| row.error <= 1e-10 && row.floor));
    }
}
