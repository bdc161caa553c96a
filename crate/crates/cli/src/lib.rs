//! Driver behind the `mfg1d` binary: reads a run configuration, calls the
//! solvers and writes JSON or CSV.

pub mod config;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use mfg1d::elliptic;
use mfg1d::regimes;
use mfg1d::solution::JumpFamilyParams;
use mfg1d::viscosity::{self, PiecewiseCandidate};
use mfg1d::{
    Coupling, CurveRow, MfgError, PeriodicPotential, Piece, Regime, SolutionTriple,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use config::{ConfigError, Format, Mode, RunConfig};

/// Exit status when `check` finds no viscosity solution.
pub const EXIT_NOT_VISCOSITY: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Solver(MfgError),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Solver(e) => write!(f, "solver error {}: {e}", e.name()),
            CliError::Io(e) => write!(f, "output error: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<MfgError> for CliError {
    fn from(e: MfgError) -> Self {
        CliError::Solver(e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpOutput {
    pub x: f64,
    pub m_left: f64,
    pub m_right: f64,
    pub ux_left: f64,
    pub ux_right: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOutput {
    pub x: Vec<f64>,
    pub m: Vec<f64>,
    pub u: Vec<f64>,
    pub ux: Vec<f64>,
}

/// The solution JSON written by `solve` and read back by `check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionOutput {
    pub j: f64,
    pub p: f64,
    #[serde(rename = "Hbar")]
    pub hbar: f64,
    pub regime: Regime,
    pub jumps: Vec<JumpOutput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<JumpFamilyParams>,
    pub grid: GridOutput,
    pub pieces: Vec<Piece>,
}

impl SolutionOutput {
    pub fn from_triple(t: &SolutionTriple) -> Self {
        let n = t.n();
        let side = |jumps: &[mfg1d::Jump], x: f64, fallback: f64| {
            jumps
                .iter()
                .find(|jp| jp.x == x)
                .map(|jp| (jp.left, jp.right))
                .unwrap_or((fallback, fallback))
        };
        let jumps = t
            .jump_set
            .iter()
            .map(|&x| {
                let i = ((x * n as f64).round() as usize) % n;
                let (m_left, m_right) = side(&t.m.jumps, x, t.m.values[i]);
                let (ux_left, ux_right) = side(&t.ux.jumps, x, t.ux.values[i]);
                JumpOutput {
                    x,
                    m_left,
                    m_right,
                    ux_left,
                    ux_right,
                }
            })
            .collect();
        SolutionOutput {
            j: t.j,
            p: t.p,
            hbar: t.hbar,
            regime: t.regime,
            jumps,
            family: t.family,
            grid: GridOutput {
                x: (0..n).map(|i| i as f64 / n as f64).collect(),
                m: t.m.values.clone(),
                u: t.u.values.clone(),
                ux: t.ux.values.clone(),
            },
            pieces: t.pieces.clone(),
        }
    }

    pub fn candidate(&self) -> PiecewiseCandidate {
        PiecewiseCandidate {
            j: self.j,
            hbar: self.hbar,
            p: self.p,
            pieces: self.pieces.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimesOutput {
    pub j_lower: f64,
    pub j_upper: f64,
    #[serde(rename = "c_of_V", skip_serializing_if = "Option::is_none")]
    pub c_of_v: Option<f64>,
}

/// Text destined for the main output, plus files written next to it.
#[derive(Debug, Default)]
pub struct Emission {
    pub primary: String,
    /// `(suffix, contents)`; the suffix replaces the extension of the output
    /// path. Skipped when writing to stdout.
    pub siblings: Vec<(String, String)>,
    pub exit: i32,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    s
}

fn csv_table(rows: &[CurveRow]) -> String {
    mfg1d::CurveTable {
        parameter: regimes::CurveParameter::J,
        rows: rows.to_vec(),
    }
    .to_csv()
}

/// Loads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError::new(path.display().to_string(), format!("cannot read: {e}")))?;
    let cfg: RunConfig = config::parse(&text, path)?;
    cfg.validate()?;
    if let Ok(raw) = std::env::var("MFG1D_QUAD_TOL") {
        match raw.trim().parse::<f64>() {
            Ok(t) if t.is_finite() && t > 0.0 => {}
            _ => {
                return Err(ConfigError::new(
                    "MFG1D_QUAD_TOL",
                    format!("must be a positive number, got `{raw}`"),
                ))
            }
        }
    }
    Ok(cfg)
}

/// Runs one configuration; `config_dir` resolves relative input paths.
pub fn execute(cfg: &RunConfig, config_dir: &Path) -> Result<Emission, CliError> {
    let v = PeriodicPotential::from_spec(&cfg.potential)?;
    let c = Coupling::from(cfg.coupling);
    let n = cfg.n;
    match &cfg.mode {
        Mode::Solve { j, p, variant } => {
            let t = match (j, p) {
                (Some(j), _) => mfg1d::solve_current(&c, &v, *j, *variant, n)?,
                (None, Some(p)) => mfg1d::solve_rotation(&c, &v, *p, *variant, n)?,
                (None, None) => unreachable!("validated"),
            };
            let json = to_json(&SolutionOutput::from_triple(&t));
            let csv = t.to_csv();
            Ok(match cfg.format {
                Format::Json => Emission {
                    primary: json,
                    siblings: vec![(".csv".into(), csv)],
                    exit: 0,
                },
                Format::Csv => Emission {
                    primary: csv,
                    siblings: vec![(".json".into(), json)],
                    exit: 0,
                },
            })
        }
        Mode::Sweep {
            j_range,
            p_range,
            samples,
            spacing,
        } => {
            let (range, by_p) = match (j_range, p_range) {
                (Some(r), None) => (*r, false),
                (None, Some(r)) => (*r, true),
                _ => unreachable!("validated"),
            };
            let points = RunConfig::sweep_samples(range, *samples, *spacing);
            let rows = points
                .par_iter()
                .map(|&x| {
                    if by_p {
                        Ok(regimes::hbar_of_p(&c, &v, &[x])?.rows.remove(0))
                    } else {
                        regimes::curve_row(&c, &v, x)
                    }
                })
                .collect::<mfg1d::Result<Vec<_>>>()?;
            let primary = match cfg.format {
                Format::Csv => csv_table(&rows),
                Format::Json => to_json(&mfg1d::CurveTable {
                    parameter: if by_p {
                        regimes::CurveParameter::P
                    } else {
                        regimes::CurveParameter::J
                    },
                    rows,
                }),
            };
            Ok(Emission {
                primary,
                ..Default::default()
            })
        }
        Mode::Regimes => {
            let b = regimes::regime_boundaries(&c, &v)?;
            let out = RegimesOutput {
                j_lower: b.j_lower,
                j_upper: b.j_upper,
                c_of_v: regimes::apriori_current_bound(&c, &v).ok(),
            };
            Ok(Emission {
                primary: to_json(&out),
                ..Default::default()
            })
        }
        Mode::Elliptic { eps, eps_list, j, n: local_n } => {
            let n = local_n.unwrap_or(n);
            let list = match (eps, eps_list) {
                (Some(e), None) => vec![*e],
                (None, Some(l)) => l.clone(),
                _ => unreachable!("validated"),
            };
            let sweep = elliptic::eps_sweep(&c, &v, *j, &list, n)?;
            let reference = elliptic::first_order_reference(&c, &v, *j, n)?;
            let mut siblings: Vec<(String, String)> = sweep
                .solutions
                .iter()
                .map(|s| (format!(".eps_{}.csv", s.eps), s.to_csv()))
                .collect();
            siblings.push((".reference.csv".into(), reference.to_csv()));
            let primary = match cfg.format {
                Format::Csv => sweep.table_csv(),
                Format::Json => to_json(&sweep.rows),
            };
            Ok(Emission {
                primary,
                siblings,
                exit: 0,
            })
        }
        Mode::Check { input } => {
            let path = if input.is_absolute() {
                input.clone()
            } else {
                config_dir.join(input)
            };
            let text = fs::read_to_string(&path)
                .map_err(|e| ConfigError::new(path.display().to_string(), format!("cannot read: {e}")))?;
            let solution: SolutionOutput = config::parse(&text, &path)?;
            let cert = viscosity::check_viscosity_discontinuous(&c, &v, &solution.candidate(), viscosity::DEFAULT_TOL);
            Ok(Emission {
                primary: to_json(&cert),
                siblings: Vec::new(),
                exit: if cert.is_viscosity { 0 } else { EXIT_NOT_VISCOSITY },
            })
        }
    }
}

/// `out` with its extension replaced by `suffix`.
pub fn sibling_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let candidate = out.with_file_name(format!("{stem}{suffix}"));
    if candidate == out {
        out.with_file_name(format!("{}{suffix}", out.file_name().unwrap().to_string_lossy()))
    } else {
        candidate
    }
}

/// Writes an emission to `out`, or its primary text to stdout.
pub fn write(emission: &Emission, out: Option<&Path>) -> Result<(), CliError> {
    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    match out {
        None => {
            print!("{}", emission.primary);
            Ok(())
        }
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
            }
            fs::write(path, &emission.primary).map_err(|e| io(path, e))?;
            for (suffix, text) in &emission.siblings {
                let p = sibling_path(path, suffix);
                fs::write(&p, text).map_err(|e| io(&p, e))?;
            }
            Ok(())
        }
    }
}

/// Full run as the binary performs it; returns the exit status.
pub fn run(mode: &str, config_path: &Path, out: Option<&Path>) -> Result<i32, CliError> {
    let cfg = load_config(config_path)?;
    if cfg.mode.name() != mode {
        return Err(CliError::Config(ConfigError::new(
            "field `mode.kind`",
            format!("config describes `{}` but `{mode}` was requested", cfg.mode.name()),
        )));
    }
    let dir = config_path.parent().unwrap_or(Path::new("."));
    let emission = execute(&cfg, dir)?;
    let target = out.map(Path::to_path_buf).or_else(|| cfg.output.clone());
    write(&emission, target.as_deref())?;
    Ok(emission.exit)
}
