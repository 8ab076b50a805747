//! Run configuration files, deterministic CSV/JSON output and the command
//! implementations behind the `bfn` binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::acceptance::{self, CriterionResult};
use crate::bfn::{figure1_alpha, figure1_config, run_bfn, BfnConfig, BfnReport, FieldSource, Figure1Variant, Flags, IterationRecord, OracleCase};
use crate::burgers::{bn_sequence, inverse_square_coefficients, k0_wellposedness_check, GrowthVerdict};
use crate::equation::{Advection, EquationClass, EquationSpec};
use crate::error::{BfnError, Result};
use crate::field::Profile;
use crate::gain::{Gain, Support, Window};
use crate::grid::{BoundaryKind, Grid1D};
use crate::trajectory::Stepping;

pub const DEFAULT_GRID_N: usize = 512;
pub const DEFAULT_NT: usize = 2048;
/// Largest `N` accepted by the coefficient-growth command.
pub const BN_MAX_N: usize = 256;

/// Parsed `key = value` run configuration.
///
/// Keys and defaults: `equation` (`linear`), `viscosity` (0), `advection`
/// (1; a number, a profile such as `sin_2pi 0.5`, or `c + profile`), `bc`
/// (periodic when inviscid, dirichlet otherwise), `T` (1), `grid_n` (512),
/// `nt` (2048), `record_every` (1), `gain_amplitude` (1), `kappa` (1),
/// `gain_support` (`full` or `a,b`), `gain_window` (`full` or `t1,t2`),
/// `u0` (`sin_2pi 1` periodic, `sin_pi 1` dirichlet), `uobs0` (`zero`),
/// `iterations` (1). Lines starting with `#` are comments.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfigFile {
    pub equation: String,
    pub viscosity: f64,
    pub advection: Option<String>,
    pub bc: Option<BoundaryKind>,
    pub t_final: f64,
    pub grid_n: usize,
    pub nt: usize,
    pub record_every: usize,
    pub gain_amplitude: f64,
    pub kappa: f64,
    pub gain_support: Support,
    pub gain_window: Window,
    pub u0: Option<Profile>,
    pub uobs0: Profile,
    pub iterations: usize,
}

impl Default for RunConfigFile {
    fn default() -> Self {
        Self {
            equation: "linear".into(),
            viscosity: 0.0,
            advection: None,
            bc: None,
            t_final: 1.0,
            grid_n: DEFAULT_GRID_N,
            nt: DEFAULT_NT,
            record_every: 1,
            gain_amplitude: 1.0,
            kappa: 1.0,
            gain_support: Support::Full,
            gain_window: Window::Full,
            u0: None,
            uobs0: Profile::Zero,
            iterations: 1,
        }
    }
}

fn number(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| BfnError::Config(format!("{key}: '{v}' is not a finite number")))
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|_| BfnError::Config(format!("{key}: '{v}' is not a non-negative integer")))
}

fn pair(key: &str, v: &str) -> Result<Option<(f64, f64)>> {
    if v == "full" {
        return Ok(None);
    }
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok(Some((number(key, a)?, number(key, b)?))),
        _ => Err(BfnError::Config(format!("{key}: expected 'full' or 'lo,hi', got '{v}'"))),
    }
}

impl RunConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| BfnError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key.to_string()) {
                return Err(BfnError::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
            seen.push(key.to_string());
            match key {
                "equation" => match value {
                    "linear" | "burgers" => cfg.equation = value.into(),
                    _ => return Err(BfnError::Config(format!("equation: expected linear or burgers, got '{value}'"))),
                },
                "viscosity" => cfg.viscosity = number(key, value)?,
                "advection" => cfg.advection = Some(value.into()),
                "bc" => {
                    cfg.bc = Some(match value {
                        "periodic" => BoundaryKind::Periodic,
                        "dirichlet" => BoundaryKind::Dirichlet,
                        _ => return Err(BfnError::Config(format!("bc: expected periodic or dirichlet, got '{value}'"))),
                    })
                }
                "T" => cfg.t_final = number(key, value)?,
                "grid_n" => cfg.grid_n = count(key, value)?,
                "nt" => cfg.nt = count(key, value)?,
                "record_every" => cfg.record_every = count(key, value)?,
                "gain_amplitude" => cfg.gain_amplitude = number(key, value)?,
                "kappa" => cfg.kappa = number(key, value)?,
                "gain_support" => {
                    cfg.gain_support = match pair(key, value)? {
                        None => Support::Full,
                        Some((a, b)) => Support::Interval { a, b },
                    }
                }
                "gain_window" => {
                    cfg.gain_window = match pair(key, value)? {
                        None => Window::Full,
                        Some((t1, t2)) => Window::Interval { t1, t2 },
                    }
                }
                "u0" => cfg.u0 = Some(Profile::parse(value)?),
                "uobs0" => cfg.uobs0 = Profile::parse(value)?,
                "iterations" => cfg.iterations = count(key, value)?,
                _ => return Err(BfnError::Config(format!("line {}: unknown key '{key}'", lineno + 1))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    fn advection(&self, grid: Grid1D) -> Result<Advection> {
        let Some(text) = &self.advection else {
            return Ok(Advection::Constant(1.0));
        };
        if let Ok(c) = text.parse::<f64>() {
            return Ok(Advection::Constant(c));
        }
        let (offset, profile) = match text.split_once('+') {
            Some((c, p)) => (number("advection", c.trim())?, p.trim()),
            None => (0.0, text.as_str()),
        };
        let p = Profile::parse(profile)?;
        Ok(Advection::Profile(
            grid.nodes().iter().map(|&x| offset + p.eval(x)).collect(),
        ))
    }

    pub fn to_bfn_config(&self) -> Result<BfnConfig> {
        let natural = if self.viscosity > 0.0 {
            BoundaryKind::Dirichlet
        } else {
            BoundaryKind::Periodic
        };
        let bc = self.bc.unwrap_or(natural);
        if bc != natural {
            return Err(BfnError::Config(format!(
                "bc {bc:?} does not match viscosity {} (viscous runs are dirichlet, inviscid periodic)",
                self.viscosity
            )));
        }
        let grid = Grid1D::new(self.grid_n, bc)?;
        let advection = if self.equation == "burgers" {
            if self.advection.is_some() {
                return Err(BfnError::Config("advection does not apply to the burgers equation".into()));
            }
            Advection::SelfAdvection
        } else {
            self.advection(grid)?
        };
        let spec = EquationSpec::new(self.viscosity, advection, grid, self.t_final)?;
        let gain = Gain::new(self.gain_amplitude, self.kappa, self.gain_support, self.gain_window)?;
        let u0 = self.u0.unwrap_or(match bc {
            BoundaryKind::Periodic => Profile::sin_2pi(1.0),
            _ => Profile::sin_pi(1.0),
        });
        Ok(BfnConfig::new(spec, gain, FieldSource::Profile(u0), FieldSource::Profile(self.uobs0))
            .with_iterations(self.iterations)
            .with_nt(self.nt)
            .with_record_every(self.record_every))
    }
}

/// 17 significant digits, `.` separator.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_cell(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

/// Comma-separated table with a header line; `None` cells are left empty.
pub fn csv_table(header: &[String], rows: &[Vec<Option<f64>>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&c| fmt_cell(c)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| BfnError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

/// `report.json` body: everything but the profile, which goes to CSV.
#[derive(Serialize)]
struct ReportFile<'a> {
    class: EquationClass,
    times: &'a [f64],
    iterations: &'a [IterationRecord],
    chi: Option<&'a [f64]>,
    oracle: &'a BTreeMap<OracleCase, f64>,
    flags: &'a Flags,
}

pub fn profile_csv(report: &BfnReport) -> String {
    let p = &report.profile;
    let header = ["x", "w0", "wtilde0", "rate"].map(String::from);
    let rows: Vec<Vec<Option<f64>>> = (0..p.x.len())
        .map(|j| vec![Some(p.x[j]), Some(p.w0[j]), Some(p.wtilde0[j]), p.rate[j]])
        .collect();
    csv_table(&header, &rows)
}

pub fn report_json(report: &BfnReport) -> Result<String> {
    to_json(&ReportFile {
        class: report.class,
        times: &report.times,
        iterations: &report.iterations,
        chi: report.chi.as_deref(),
        oracle: &report.oracle,
        flags: &report.flags,
    })
}

/// Exit code of a failed command: 2 for refused regimes, 1 otherwise.
pub fn exit_code(e: &BfnError) -> i32 {
    match e {
        BfnError::UnsupportedRegime { .. } => 2,
        _ => 1,
    }
}

/// Message for standard error, prefixed with the explaining result if any.
pub fn error_message(e: &BfnError) -> String {
    match e.anchor() {
        Some(anchor) => format!("error [{anchor}]: {e}"),
        None => format!("error: {e}"),
    }
}

pub fn cmd_run(config: &Path, out_dir: &Path) -> Result<BfnReport> {
    let cfg = RunConfigFile::load(config)?.to_bfn_config()?;
    let report = run_bfn(&cfg)?;
    write(out_dir, "report.json", &report_json(&report)?)?;
    write(out_dir, "profile.csv", &profile_csv(&report))?;
    Ok(report)
}

/// Decrease-rate profiles for each final time, one column per `T`.
pub fn cmd_figure1(variant: Figure1Variant, times: &[f64], n: usize, nt: usize, out_dir: &Path) -> Result<String> {
    if times.is_empty() {
        return Err(BfnError::InvalidArgument("need at least one final time".into()));
    }
    let name = match variant {
        Figure1Variant::Linear => "linear",
        Figure1Variant::Burgers => "burgers",
    };
    let reports: Vec<BfnReport> = times
        .par_iter()
        .map(|&t| run_bfn(&figure1_config(variant, t, n, nt)?))
        .collect::<Result<_>>()?;
    let x = &reports[0].profile.x;
    let mut header = vec!["x".to_string()];
    header.extend(times.iter().map(|t| format!("T={t}")));
    let rows: Vec<Vec<Option<f64>>> = (0..x.len())
        .map(|j| {
            let mut row = vec![Some(x[j])];
            row.extend(reports.iter().map(|r| r.profile.rate[j]));
            row
        })
        .collect();
    let csv_name = format!("figure1_{name}.csv");
    write(out_dir, &csv_name, &csv_table(&header, &rows))?;
    let mut plt = String::new();
    writeln!(plt, "set datafile separator ','").ok();
    writeln!(plt, "set xlabel 'x'").ok();
    writeln!(plt, "set ylabel '-log(w~(0,x)/w(0,x))'").ok();
    writeln!(plt, "set key outside right").ok();
    for (t, _) in times.iter().zip(&reports) {
        writeln!(plt, "# T={t}: alpha={}", figure1_alpha(variant, *t)).ok();
    }
    writeln!(
        plt,
        "plot for [i=2:{}] '{csv_name}' using 1:i with lines title columnheader(i)",
        times.len() + 1
    )
    .ok();
    write(out_dir, &format!("figure1_{name}.plt"), &plt)?;
    Ok(csv_name)
}

/// Writes `bn.csv` and returns the summary line.
pub fn cmd_bn_growth(k: f64, kp: f64, nu: f64, t: f64, n: usize, out_dir: &Path) -> Result<String> {
    if n == 0 || n > BN_MAX_N {
        return Err(BfnError::InvalidArgument(format!("N must lie in 1..={BN_MAX_N}, got {n}")));
    }
    let seq = bn_sequence(&inverse_square_coefficients(n), k, kp, nu, t)?;
    let growth = seq.growth();
    let header = ["n", "log10_abs_bn", "g_n"].map(String::from);
    let rows: Vec<Vec<Option<f64>>> = (1..=n)
        .map(|i| {
            let b = seq.b[i - 1];
            let g = if i >= 2 { growth[i - 2].1 } else { None };
            vec![Some(i as f64), (!b.is_zero()).then(|| b.log10_abs()), g]
        })
        .collect();
    write(out_dir, "bn.csv", &csv_table(&header, &rows))?;
    let verdict = seq.verdict();
    let summary = match (verdict, seq.max_growth()) {
        (GrowthVerdict::WellPosedBoundary, _) => format!("{verdict}: all b_n vanish"),
        (_, Some(g)) => format!(
            "{verdict}: max g_n = {g:.6} against threshold 0.4 nu T = {:.6}",
            0.4 * nu * t
        ),
        (_, None) => format!("{verdict}"),
    };
    Ok(summary)
}

/// Relative deviation of the `K = 0` forward/backward round trip.
pub fn cmd_colehopf_check(nu: f64, t: f64, amplitude: f64, n_modes: usize, cap: f64, grid_n: usize) -> Result<f64> {
    let spec = EquationSpec::viscous_burgers(nu, grid_n, t)?;
    let ic = Profile::sin_pi(amplitude).sample(spec.grid());
    k0_wellposedness_check(&spec, &ic, n_modes, cap, Stepping::with_stride(100, 10))
}

#[derive(Serialize)]
struct VerifyFile<'a> {
    all_passed: bool,
    criteria: &'a [CriterionResult],
}

/// Runs the acceptance suite, writes `verify.json` and returns the results.
pub fn cmd_verify(out_dir: &Path) -> Result<Vec<CriterionResult>> {
    let results = acceptance::run_all();
    let file = VerifyFile {
        all_passed: results.iter().all(|r| r.passed),
        criteria: &results,
    };
    write(out_dir, "verify.json", &to_json(&file)?)?;
    Ok(results)
}
