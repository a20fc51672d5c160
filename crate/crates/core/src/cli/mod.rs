//! Batch runner: `run <config>` and `sweep <config> --param <key> --values <list>`.
//!
//! Exit codes: 0 on success, 1 for configuration or I/O problems, 2 for
//! numerical failures.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;

pub use config::{
    parse_table, set_numeric, ConfigError, Experiment, ExperimentConfig, GaugeSection, IvpSection,
    Mode, Number, OdeSection, OutputsSection, SolverSection,
};

use crate::analysis::{compare_component, wkb2, wkb3_diagonal_path, ErrorReport};
use crate::error::Error;
use crate::gauges::{characteristic_roots, characteristic_values, phase_integral_gauge};
use crate::solve::{solve_companion, solve_split, Trajectory};
use crate::transform::{reconstruct, split_initial, GaugeValues, SplitState};

#[derive(Debug, Parser)]
#[command(name = "gaugesplit", version, about = "Gauge-split ODE experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Directory for CSV files and the summary.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Print nothing on success.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment.
    Run { config: PathBuf },
    /// Run an experiment once per value of a numeric config key.
    Sweep {
        config: PathBuf,
        /// Dotted key, e.g. `params.lambda` or `solver.rel_tol`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Io(PathBuf, std::io::Error),
    Numeric(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(..) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
            CliError::Numeric(e) => match e.time() {
                Some(t) => write!(f, "numerical failure: {} at t = {t}: {e}", e.kind()),
                None => write!(f, "numerical failure: {}: {e}", e.kind()),
            },
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numeric(e)
    }
}

/// What a successful run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub accepted: usize,
    pub rejected: usize,
    pub final_y: Complex64,
    pub comparison: Option<ErrorReport>,
}

/// Sampled output common to both modes.
struct Output {
    times: Vec<f64>,
    parts: Vec<Vec<Complex64>>,
    companion: Vec<Vec<Complex64>>,
    det_abs: Vec<f64>,
    max_gauge: f64,
    accepted: usize,
    rejected: usize,
    rhs_evals: usize,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn sample_times(t1: f64, t_end: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                t_end
            } else {
                t1 + (t_end - t1) * (i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

fn split_output(exp: &Experiment) -> Result<Output, Error> {
    let sol = solve_split(&exp.ode, &exp.gauge, &exp.ivp, &exp.solver)?;
    let parts = (0..sol.trajectory.len())
        .map(|i| sol.parts(i).to_vec())
        .collect();
    Ok(Output {
        times: sol.trajectory.times.clone(),
        parts,
        companion: sol.companion.states.clone(),
        det_abs: sol.det_abs.clone(),
        max_gauge: sol
            .gauge_values
            .iter()
            .map(GaugeValues::max_abs)
            .fold(0.0, f64::max),
        accepted: sol.trajectory.accepted,
        rejected: sol.trajectory.rejected,
        rhs_evals: sol.trajectory.rhs_evals,
    })
}

fn assemble(times: Vec<f64>, parts: Vec<Vec<Complex64>>, values: Vec<GaugeValues>) -> Output {
    let companion = times
        .iter()
        .zip(&parts)
        .zip(&values)
        .map(|((&t, p), v)| {
            reconstruct(
                v,
                &SplitState {
                    t,
                    parts: p.clone(),
                },
            )
            .derivs
        })
        .collect();
    Output {
        det_abs: values.iter().map(|v| v.determinant().norm()).collect(),
        max_gauge: values.iter().map(GaugeValues::max_abs).fold(0.0, f64::max),
        times,
        parts,
        companion,
        accepted: 0,
        rejected: 0,
        rhs_evals: 0,
    }
}

fn wkb_output(exp: &Experiment) -> Result<Output, Error> {
    let (ode, ivp) = (&exp.ode, &exp.ivp);
    let t1 = ivp.t1();
    if ode.order() == 2 {
        let gauge = phase_integral_gauge(ode, None)?;
        let y12 = split_initial(&gauge.values(t1)?, &ivp.initial)?.parts;
        let times = sample_times(t1, ivp.t_end, exp.solver.sample_count);
        let mut parts = Vec::with_capacity(times.len());
        let mut values = Vec::with_capacity(times.len());
        for &t in &times {
            parts.push(wkb2(ode, t1, [y12[0], y12[1]], t)?.to_vec());
            values.push(gauge.values(t)?);
        }
        return Ok(assemble(times, parts, values));
    }
    let path = wkb3_diagonal_path(ode, ivp, &exp.solver)?;
    let mut prev = None;
    let mut values = Vec::with_capacity(path.len());
    for &t in &path.times {
        let roots = characteristic_roots(ode, t, prev.as_ref())?;
        values.push(characteristic_values(&roots));
        prev = Some(roots);
    }
    Ok(assemble(path.times.clone(), path.states.clone(), values))
}

fn trajectory_csv(out: &Output) -> String {
    let n = out.parts.first().map_or(0, Vec::len);
    let mut s = String::from("t");
    for k in 1..=n {
        let _ = write!(s, ",part{k}_re,part{k}_im");
    }
    for k in 0..n {
        let _ = write!(s, ",y_d{k}_re,y_d{k}_im");
    }
    s.push_str(",abs_det\n");
    for i in 0..out.times.len() {
        s.push_str(&num(out.times[i]));
        for v in out.parts[i].iter().chain(&out.companion[i]) {
            let _ = write!(s, ",{},{}", num(v.re), num(v.im));
        }
        let _ = writeln!(s, ",{}", num(out.det_abs[i]));
    }
    s
}

fn comparison_csv(
    times: &[f64],
    ys: &[Complex64],
    oracle: &Trajectory,
    report: &ErrorReport,
) -> String {
    let mut s = String::from("t,y_re,y_im,ref_re,ref_im,abs_err,rel_err\n");
    for (sample, (t, y)) in report.samples.iter().zip(times.iter().zip(ys)) {
        let r = oracle
            .interpolate(*t)
            .map_or(Complex64::new(f64::NAN, f64::NAN), |v| v[0]);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            num(*t),
            num(y.re),
            num(y.im),
            num(r.re),
            num(r.im),
            num(sample.abs),
            num(sample.rel)
        );
    }
    s
}

fn summary_text(exp: &Experiment, out: &Output, cmp: Option<&ErrorReport>) -> String {
    let mut s = String::new();
    let mode = match exp.mode {
        Mode::Split => "split",
        Mode::Wkb => "wkb",
    };
    let _ = writeln!(s, "status: ok");
    let _ = writeln!(s, "mode: {mode}");
    let _ = writeln!(s, "gauge family: {}", exp.gauge.family());
    let _ = writeln!(s, "order: {}", exp.ode.order());
    let _ = writeln!(s, "span: [{}, {}]", exp.ivp.t1(), exp.ivp.t_end);
    let _ = writeln!(s, "samples: {}", out.times.len());
    let _ = writeln!(s, "accepted steps: {}", out.accepted);
    let _ = writeln!(s, "rejected steps: {}", out.rejected);
    let _ = writeln!(s, "rhs evaluations: {}", out.rhs_evals);
    let min_det = out.det_abs.iter().copied().fold(f64::INFINITY, f64::min);
    let max_det = out.det_abs.iter().copied().fold(0.0, f64::max);
    let _ = writeln!(s, "min |D|: {}", num(min_det));
    let _ = writeln!(s, "max |D|: {}", num(max_det));
    let _ = writeln!(s, "max |g|: {}", num(out.max_gauge));
    if let Some(last) = out.companion.last() {
        let _ = writeln!(
            s,
            "final y: re = {}, im = {}",
            num(last[0].re),
            num(last[0].im)
        );
    }
    if let Some(r) = cmp {
        let _ = writeln!(s, "companion comparison:");
        let _ = writeln!(
            s,
            "  max abs error: {} at t = {}",
            num(r.max_abs),
            r.t_of_max
        );
        let _ = writeln!(s, "  max rel error (normwise): {}", num(r.norm_rel));
        let _ = writeln!(
            s,
            "  max rel error (pointwise): {} at t = {}",
            num(r.max_rel),
            r.t_of_max_rel
        );
        let _ = writeln!(s, "  mean abs error: {}", num(r.mean_abs));
    }
    s
}

/// Runs one resolved experiment and writes its artifacts into `out_dir`.
pub fn run_experiment(exp: &Experiment, out_dir: &Path) -> Result<RunReport, CliError> {
    let out = match exp.mode {
        Mode::Split => split_output(exp)?,
        Mode::Wkb => wkb_output(exp)?,
    };
    write_file(&out_dir.join(&exp.csv_path), &trajectory_csv(&out))?;

    let comparison = if exp.compare {
        let oracle = solve_companion(&exp.ode, &exp.ivp, &exp.solver)?;
        let own = Trajectory::from_samples(out.times.clone(), out.companion.clone());
        let report = compare_component(&own, &oracle, 0)?;
        let ys: Vec<Complex64> = out.companion.iter().map(|s| s[0]).collect();
        write_file(
            &out_dir.join("comparison.csv"),
            &comparison_csv(&out.times, &ys, &oracle, &report),
        )?;
        Some(report)
    } else {
        None
    };
    write_file(
        &out_dir.join("summary.txt"),
        &summary_text(exp, &out, comparison.as_ref()),
    )?;
    Ok(RunReport {
        accepted: out.accepted,
        rejected: out.rejected,
        final_y: out
            .companion
            .last()
            .map_or(Complex64::new(0.0, 0.0), |s| s[0]),
        comparison,
    })
}

fn read_table(path: &Path) -> Result<toml::Table, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    Ok(parse_table(&text)?)
}

fn failure_summary(err: &CliError) -> String {
    format!("status: failed\nexit code: {}\n{err}\n", err.exit_code())
}

pub fn run(config: &Path, out_dir: &Path) -> Result<RunReport, CliError> {
    let exp = ExperimentConfig::from_table(read_table(config)?)?.resolve()?;
    run_experiment(&exp, out_dir).inspect_err(|e| {
        if let CliError::Numeric(_) = e {
            let _ = write_file(&out_dir.join("summary.txt"), &failure_summary(e));
        }
    })
}

/// One row of the sweep aggregate.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub result: Result<RunReport, String>,
    pub exit_code: i32,
}

pub fn parse_values(list: &str) -> Result<Vec<f64>, ConfigError> {
    let values: Vec<f64> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>().map_err(|_| ConfigError {
                key: "--values".into(),
                message: format!("'{s}' is not a number"),
            })
        })
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(ConfigError {
            key: "--values".into(),
            message: "no values given".into(),
        });
    }
    Ok(values)
}

/// Runs the experiment once per value with comparison against the
/// companion oracle enabled, each run in its own subdirectory, and writes
/// `sweep.csv`.
pub fn sweep(
    config: &Path,
    param: &str,
    values: &[f64],
    out_dir: &Path,
) -> Result<Vec<SweepRow>, CliError> {
    let base = read_table(config)?;
    // Validate the key and the untouched config before running anything.
    set_numeric(&mut base.clone(), param, values[0])?;
    ExperimentConfig::from_table(base.clone())?.resolve()?;

    let mut rows = Vec::with_capacity(values.len());
    for (i, &value) in values.iter().enumerate() {
        let dir = out_dir.join(format!("run{i:03}_{param}={value}"));
        let attempt = (|| -> Result<RunReport, CliError> {
            let mut table = base.clone();
            set_numeric(&mut table, param, value)?;
            let mut exp = ExperimentConfig::from_table(table)?.resolve()?;
            exp.compare = true;
            run_experiment(&exp, &dir)
        })();
        rows.push(match attempt {
            Ok(r) => SweepRow {
                value,
                result: Ok(r),
                exit_code: 0,
            },
            Err(e) => {
                let _ = write_file(&dir.join("summary.txt"), &failure_summary(&e));
                SweepRow {
                    value,
                    exit_code: e.exit_code(),
                    result: Err(match &e {
                        CliError::Numeric(err) => match err.time() {
                            Some(t) => format!("{}@t={t}", err.kind()),
                            None => err.kind().to_string(),
                        },
                        CliError::Config(_) => "ConfigError".into(),
                        CliError::Io(..) => "IoError".into(),
                    }),
                }
            }
        });
    }

    let mut csv = String::from("value,max_rel_error,steps,status\n");
    for row in &rows {
        match &row.result {
            Ok(r) => {
                let err = r.comparison.as_ref().map_or(f64::NAN, |c| c.norm_rel);
                let _ = writeln!(csv, "{},{},{},ok", num(row.value), num(err), r.accepted);
            }
            Err(status) => {
                let _ = writeln!(csv, "{},,,{status}", num(row.value));
            }
        }
    }
    write_file(&out_dir.join("sweep.csv"), &csv)?;
    Ok(rows)
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match &cli.command {
        Command::Run { config } => match run(config, &cli.out_dir) {
            Ok(report) => {
                if !cli.quiet {
                    println!(
                        "ok: {} accepted steps, y(t_end) = {}",
                        report.accepted, report.final_y
                    );
                    if let Some(c) = &report.comparison {
                        println!(
                            "max relative deviation from companion solution: {:e}",
                            c.norm_rel
                        );
                    }
                }
                0
            }
            Err(e) => {
                eprintln!("{e}");
                e.exit_code()
            }
        },
        Command::Sweep {
            config,
            param,
            values,
        } => {
            let values = match parse_values(values) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return 1;
                }
            };
            match sweep(config, param, &values, &cli.out_dir) {
                Ok(rows) => {
                    if !cli.quiet {
                        for row in &rows {
                            match &row.result {
                                Ok(r) => println!(
                                    "{} = {}: ok, max rel error {:e}",
                                    param,
                                    row.value,
                                    r.comparison.as_ref().map_or(f64::NAN, |c| c.norm_rel)
                                ),
                                Err(s) => println!("{} = {}: failed ({s})", param, row.value),
                            }
                        }
                    }
                    if rows.iter().any(|r| r.result.is_ok()) {
                        0
                    } else {
                        rows.iter().map(|r| r.exit_code).max().unwrap_or(2)
                    }
                }
                Err(e) => {
                    eprintln!("{e}");
                    e.exit_code()
                }
            }
        }
    }
}
