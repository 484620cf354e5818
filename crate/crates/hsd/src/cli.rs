//! Command-line front end.
//!
//! Five commands cover the library surface:
//!
//! - `state-div RHO SIGMA`: hockey-stick divergence between two state files;
//! - `channel-div P Q`: channel divergence between two Choi files;
//! - `audit MECHANISM SET` / `audit CHANNELSET`: QLDP audit of a state set
//!   under a mechanism, or of a channel set;
//! - `table FAMILY`: CSV comparing closed forms against the SDP on a
//!   parameter grid;
//! - `validate FILES..`: parse input files and report what they contain.
//!
//! Every flag has an equivalent field in a JSON [`RunConfig`] passed with
//! `--config`; explicit flags win over the file. The default solver
//! tolerance may also be set through the `HSD_TOL` environment variable
//! (precedence: flag, then config file, then environment, then built-in).
//!
//! Exit codes are a stable contract: 0 success, 1 input error, 2 solver
//! failure, 3 incomplete audit.

use std::ffi::OsString;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chandiv::{
    channel_hs_all_with_tol, channel_hs_ppt_with_tol, depolarizing_channel_all_analytic,
    depolarizing_channel_ppt_analytic, ChannelPair,
};
use crate::divergence::{
    hs_measured_with_tol, isotropic_hs_analytic, isotropic_measured_analytic, werner_hs_analytic,
    werner_measured_analytic, DivergenceQuery, MeasurementClass,
};
use crate::hermlin::ComplexMatrix;
use crate::privacy::{audit_channels_with_tol, audit_states_with_tol, ChannelSet, StateSet};
use crate::qobjects::{
    depolarizing_choi, isotropic_state, werner_state, ChoiOperator, DensityMatrix,
    IsotropicParams, WernerParams,
};
use crate::{sdp, Error, Result};

/// Name of the environment variable overriding the default tolerance.
pub const TOLERANCE_ENV: &str = "HSD_TOL";

const EXIT_INPUT: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_INCOMPLETE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "hsd",
    version,
    about = "Hockey-stick divergences of states and channels under restricted measurements"
)]
struct Cli {
    /// JSON run configuration; explicit flags override its entries.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<String>,
    /// Worker threads for grids and audits (default: logical cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Divergence between two states (JSON density matrix files).
    StateDiv {
        rho: Option<String>,
        sigma: Option<String>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, value_enum)]
        class: Option<ClassArg>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_name = "FILE")]
        out: Option<String>,
    },
    /// Divergence between two channels (JSON Choi or Kraus files).
    ChannelDiv {
        p: Option<String>,
        q: Option<String>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, value_enum)]
        class: Option<ClassArg>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_name = "FILE")]
        out: Option<String>,
    },
    /// QLDP audit: a mechanism plus a state-set file, or one channel-set file.
    Audit {
        inputs: Vec<String>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, value_enum)]
        class: Option<ClassArg>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_name = "FILE")]
        out: Option<String>,
    },
    /// CSV table comparing the family closed form with the SDP on a grid.
    Table {
        family: Option<FamilyArg>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, value_enum)]
        class: Option<ClassArg>,
        /// Parameter range `p0:p1:n` for both grid axes.
        #[arg(long, value_name = "P0:P1:N")]
        grid: Option<String>,
        /// Separate range for the second axis.
        #[arg(long, value_name = "Q0:Q1:N")]
        grid_q: Option<String>,
        /// Local dimensions, comma separated.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_name = "FILE")]
        out: Option<String>,
    },
    /// Parse files and report their content type and validity.
    Validate { inputs: Vec<String> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ClassArg {
    All,
    Ppt,
}

impl From<ClassArg> for MeasurementClass {
    fn from(c: ClassArg) -> MeasurementClass {
        match c {
            ClassArg::All => MeasurementClass::All,
            ClassArg::Ppt => MeasurementClass::Ppt,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FamilyArg {
    Werner,
    Isotropic,
    Depolarizing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum CommandKind {
    StateDiv,
    ChannelDiv,
    Audit,
    Table,
    Validate,
}

/// File form of a run: one JSON object mirroring the command line.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    command: Option<CommandKind>,
    gamma: Option<f64>,
    epsilon: Option<f64>,
    class: Option<ClassArg>,
    tolerance: Option<f64>,
    inputs: Vec<String>,
    output: Option<String>,
    family: Option<FamilyArg>,
    grid: Option<GridSpec>,
    jobs: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GridSpec {
    p: Option<String>,
    q: Option<String>,
    dims: Option<Vec<usize>>,
}

/// Process entry point: parses `std::env::args`, runs, maps errors to the
/// exit-code contract.
pub fn run() -> ExitCode {
    run_from(std::env::args_os())
}

/// Same as [`run`] with explicit arguments (first entry is the program name).
pub fn run_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_INPUT,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::SolverFailure { .. } => EXIT_SOLVER,
                _ => EXIT_INPUT,
            })
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    let file: RunConfig = match &cli.config {
        Some(path) => read_json(path)?,
        None => RunConfig::default(),
    };
    if let Some(n) = cli.jobs.or(file.jobs) {
        // The global pool can only be initialized once; later runs in the
        // same process keep the first size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    match cli.command {
        Some(Command::StateDiv {
            rho,
            sigma,
            gamma,
            class,
            tol,
            out,
        }) => cmd_state_div(
            &pick_inputs(collect(&[rho, sigma]), &file),
            gamma.or(file.gamma),
            class.or(file.class),
            tolerance(tol, &file)?,
            out.or(file.output),
        ),
        Some(Command::ChannelDiv {
            p,
            q,
            gamma,
            class,
            tol,
            out,
        }) => cmd_channel_div(
            &pick_inputs(collect(&[p, q]), &file),
            gamma.or(file.gamma),
            class.or(file.class),
            tolerance(tol, &file)?,
            out.or(file.output),
        ),
        Some(Command::Audit {
            inputs,
            epsilon,
            class,
            tol,
            out,
        }) => cmd_audit(
            &pick_inputs(inputs, &file),
            epsilon.or(file.epsilon),
            class.or(file.class),
            tolerance(tol, &file)?,
            out.or(file.output),
        ),
        Some(Command::Table {
            family,
            gamma,
            class,
            grid,
            grid_q,
            dims,
            tol,
            out,
        }) => {
            let file_grid = file.grid.clone().unwrap_or_default();
            cmd_table(
                family.or(file.family),
                gamma.or(file.gamma),
                class.or(file.class),
                grid.or(file_grid.p),
                grid_q.or(file_grid.q),
                dims.or(file_grid.dims),
                tolerance(tol, &file)?,
                out.or(file.output),
            )
        }
        Some(Command::Validate { inputs }) => cmd_validate(&pick_inputs(inputs, &file)),
        None => match file.command {
            Some(CommandKind::StateDiv) => cmd_state_div(
                &file.inputs,
                file.gamma,
                file.class,
                tolerance(None, &file)?,
                file.output.clone(),
            ),
            Some(CommandKind::ChannelDiv) => cmd_channel_div(
                &file.inputs,
                file.gamma,
                file.class,
                tolerance(None, &file)?,
                file.output.clone(),
            ),
            Some(CommandKind::Audit) => cmd_audit(
                &file.inputs,
                file.epsilon,
                file.class,
                tolerance(None, &file)?,
                file.output.clone(),
            ),
            Some(CommandKind::Table) => {
                let grid = file.grid.clone().unwrap_or_default();
                cmd_table(
                    file.family,
                    file.gamma,
                    file.class,
                    grid.p,
                    grid.q,
                    grid.dims,
                    tolerance(None, &file)?,
                    file.output.clone(),
                )
            }
            Some(CommandKind::Validate) => cmd_validate(&file.inputs),
            None => Err(Error::Cli(
                "no command given (pass a subcommand or a config file with a command field)"
                    .to_string(),
            )),
        },
    }
}

fn collect(slots: &[Option<String>]) -> Vec<String> {
    slots.iter().filter_map(|s| s.clone()).collect()
}

/// Positionals given on the command line replace the config file list
/// wholesale; mixing the two sources would be ambiguous.
fn pick_inputs(cli: Vec<String>, file: &RunConfig) -> Vec<String> {
    if cli.is_empty() {
        file.inputs.clone()
    } else {
        cli
    }
}

fn tolerance(flag: Option<f64>, file: &RunConfig) -> Result<f64> {
    let env = match std::env::var(TOLERANCE_ENV) {
        Ok(s) => Some(s.trim().parse::<f64>().map_err(|_| {
            Error::Cli(format!("{TOLERANCE_ENV}: cannot parse {s:?} as a number"))
        })?),
        Err(_) => None,
    };
    resolve_tolerance(flag, file.tolerance, env)
}

fn resolve_tolerance(flag: Option<f64>, file: Option<f64>, env: Option<f64>) -> Result<f64> {
    let tol = flag.or(file).or(env).unwrap_or(sdp::DEFAULT_TOLERANCE);
    let (lo, hi) = sdp::TOLERANCE_RANGE;
    if !(tol >= lo && tol <= hi) {
        return Err(Error::Cli(format!("tolerance {tol:e} outside [{lo:e}, {hi:e}]")));
    }
    Ok(tol)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_string(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_string(),
        detail: e.to_string(),
    })
}

#[derive(Deserialize)]
struct KrausFile {
    kraus: Vec<ComplexMatrix>,
}

/// Loads a channel given either as a Choi operator or as a Kraus list.
fn load_channel(path: &str) -> Result<ChoiOperator> {
    let value: serde_json::Value = read_json(path)?;
    let parsed = if value.get("kraus").is_some() {
        serde_json::from_value::<KrausFile>(value)
            .map_err(|e| Error::Parse {
                path: path.to_string(),
                detail: e.to_string(),
            })
            .and_then(|k| ChoiOperator::from_kraus(&k.kraus))
    } else {
        serde_json::from_value::<ChoiOperator>(value).map_err(|e| Error::Parse {
            path: path.to_string(),
            detail: e.to_string(),
        })
    };
    parsed.map_err(|e| match e {
        Error::Parse { .. } => e,
        other => Error::Parse {
            path: path.to_string(),
            detail: other.to_string(),
        },
    })
}

fn emit(out: Option<&str>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.to_string(),
            source: e,
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn require<T>(value: Option<T>, what: &str) -> Result<T> {
    value.ok_or_else(|| Error::Cli(format!("missing {what}")))
}

fn cmd_state_div(
    inputs: &[String],
    gamma: Option<f64>,
    class: Option<ClassArg>,
    tol: f64,
    out: Option<String>,
) -> Result<u8> {
    let [rho_path, sigma_path] = two_inputs(inputs, "state files")?;
    let rho: DensityMatrix = read_json(rho_path)?;
    let sigma: DensityMatrix = read_json(sigma_path)?;
    let gamma = require(gamma, "--gamma")?;
    let class: MeasurementClass = require(class, "--class")?.into();
    let query = DivergenceQuery::new(rho, sigma, gamma, class)?;
    let result = hs_measured_with_tol(&query, tol)?;
    emit(out.as_deref(), &to_pretty(&result)?)?;
    Ok(0)
}

fn cmd_channel_div(
    inputs: &[String],
    gamma: Option<f64>,
    class: Option<ClassArg>,
    tol: f64,
    out: Option<String>,
) -> Result<u8> {
    let [p_path, q_path] = two_inputs(inputs, "Choi files")?;
    let p = load_channel(p_path)?;
    let q = load_channel(q_path)?;
    let gamma = require(gamma, "--gamma")?;
    let class = require(class, "--class")?;
    let pair = ChannelPair::new(p, q, gamma)?;
    let result = match class {
        ClassArg::All => channel_hs_all_with_tol(&pair, tol)?,
        ClassArg::Ppt => channel_hs_ppt_with_tol(&pair, tol)?,
    };
    emit(out.as_deref(), &to_pretty(&result)?)?;
    Ok(0)
}

fn cmd_audit(
    inputs: &[String],
    epsilon: Option<f64>,
    class: Option<ClassArg>,
    tol: f64,
    out: Option<String>,
) -> Result<u8> {
    let epsilon = require(epsilon, "--epsilon")?;
    let class: MeasurementClass = require(class, "--class")?.into();
    let report = match inputs {
        [mechanism, set] => {
            let mechanism = load_channel(mechanism)?;
            let set: StateSet = read_json(set)?;
            audit_states_with_tol(&mechanism, &set, epsilon, class, tol)?
        }
        [set] => {
            let set: ChannelSet = read_json(set)?;
            audit_channels_with_tol(&set, epsilon, class, tol)?
        }
        other => {
            return Err(Error::Cli(format!(
                "audit takes a mechanism plus a state-set file, or one channel-set file (got {} inputs)",
                other.len()
            )))
        }
    };
    let complete = report.complete;
    emit(out.as_deref(), &to_pretty(&report)?)?;
    Ok(if complete { 0 } else { EXIT_INCOMPLETE })
}

#[allow(clippy::too_many_arguments)]
fn cmd_table(
    family: Option<FamilyArg>,
    gamma: Option<f64>,
    class: Option<ClassArg>,
    grid_p: Option<String>,
    grid_q: Option<String>,
    dims: Option<Vec<usize>>,
    tol: f64,
    out: Option<String>,
) -> Result<u8> {
    let family = require(family, "table family (werner | isotropic | depolarizing)")?;
    let gamma = gamma.unwrap_or(1.0);
    // Tables exist to confirm the closed forms, so each family defaults to
    // the class its formula is stated for.
    let class = class.unwrap_or(match family {
        FamilyArg::Werner | FamilyArg::Isotropic => ClassArg::Ppt,
        FamilyArg::Depolarizing => ClassArg::All,
    });
    let ps = parse_range(grid_p.as_deref().unwrap_or("0:1:11"))?;
    let qs = match grid_q {
        Some(ref spec) => parse_range(spec)?,
        None => ps.clone(),
    };
    let dims = dims.unwrap_or_else(|| vec![2]);

    let mut cells = Vec::new();
    for &d in &dims {
        for &p in &ps {
            for &q in &qs {
                cells.push((p, q, d));
            }
        }
    }
    let rows: Vec<Result<(f64, f64)>> = cells
        .par_iter()
        .map(|&(p, q, d)| table_cell(family, class, p, q, d, gamma, tol))
        .collect();

    let mut csv = String::from("p,q,d,gamma,analytic,sdp,abs_diff\n");
    let mut max_diff = 0.0f64;
    for (&(p, q, d), row) in cells.iter().zip(rows) {
        let (analytic, sdp_value) = row?;
        let diff = (analytic - sdp_value).abs();
        max_diff = max_diff.max(diff);
        csv.push_str(&format!("{p},{q},{d},{gamma},{analytic},{sdp_value},{diff}\n"));
    }
    eprintln!("max |analytic - sdp| = {max_diff:.3e}");
    emit(out.as_deref(), csv.trim_end())?;
    Ok(0)
}

/// One table entry: the closed form and the matching solver value for the
/// divergence of family member `q` against member `p`.
fn table_cell(
    family: FamilyArg,
    class: ClassArg,
    p: f64,
    q: f64,
    d: usize,
    gamma: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    match family {
        FamilyArg::Werner | FamilyArg::Isotropic => {
            let (rho, sigma, analytic) = if family == FamilyArg::Werner {
                let rho = werner_state(&WernerParams::new(q, d)?);
                let sigma = werner_state(&WernerParams::new(p, d)?);
                let analytic = match class {
                    ClassArg::All => werner_hs_analytic(p, q, gamma)?,
                    ClassArg::Ppt => werner_measured_analytic(p, q, d, gamma)?,
                };
                (rho, sigma, analytic)
            } else {
                let rho = isotropic_state(&IsotropicParams::new(q, d)?);
                let sigma = isotropic_state(&IsotropicParams::new(p, d)?);
                let analytic = match class {
                    ClassArg::All => isotropic_hs_analytic(p, q, gamma)?,
                    ClassArg::Ppt => isotropic_measured_analytic(p, q, d, gamma)?,
                };
                (rho, sigma, analytic)
            };
            let query = DivergenceQuery::new(rho, sigma, gamma, MeasurementClass::from(class))?;
            let solved = hs_measured_with_tol(&query, tol)?;
            Ok((analytic, solved.value))
        }
        FamilyArg::Depolarizing => {
            let pair = ChannelPair::new(depolarizing_choi(q, d)?, depolarizing_choi(p, d)?, gamma)?;
            let (analytic, solved) = match class {
                ClassArg::All => (
                    depolarizing_channel_all_analytic(q, p, d, gamma)?,
                    channel_hs_all_with_tol(&pair, tol)?,
                ),
                ClassArg::Ppt => (
                    depolarizing_channel_ppt_analytic(q, p, d, gamma)?,
                    channel_hs_ppt_with_tol(&pair, tol)?,
                ),
            };
            Ok((analytic, solved.value))
        }
    }
}

fn cmd_validate(inputs: &[String]) -> Result<u8> {
    if inputs.is_empty() {
        return Err(Error::Cli("validate needs at least one file".to_string()));
    }
    let mut all_ok = true;
    for path in inputs {
        match describe_file(path) {
            Ok(desc) => println!("{path}: ok: {desc}"),
            Err(e) => {
                all_ok = false;
                println!("{path}: invalid: {e}");
            }
        }
    }
    Ok(if all_ok { 0 } else { EXIT_INPUT })
}

/// Detects the content of a JSON input file by its discriminating keys and
/// runs it through the corresponding validated parser.
fn describe_file(path: &str) -> Result<String> {
    let value: serde_json::Value = read_json(path)?;
    let reparse = |detail: serde_json::Error| Error::Parse {
        path: path.to_string(),
        detail: detail.to_string(),
    };
    if value.get("kraus").is_some() || value.get("dim_in").is_some() {
        let choi = load_channel(path)?;
        return Ok(format!(
            "channel (Choi operator), input dim {}, output dim {}",
            choi.input_dim(),
            choi.output_dim()
        ));
    }
    if value.get("states").is_some() {
        let set: StateSet = serde_json::from_value(value).map_err(reparse)?;
        return Ok(format!(
            "state set {:?}, {} states of dim {}",
            set.label(),
            set.len(),
            set.dim()
        ));
    }
    if value.get("channels").is_some() {
        let set: ChannelSet = serde_json::from_value(value).map_err(reparse)?;
        return Ok(format!("channel set {:?}, {} channels", set.label(), set.len()));
    }
    if value.get("command").is_some() {
        serde_json::from_value::<RunConfig>(value).map_err(reparse)?;
        return Ok("run configuration".to_string());
    }
    let state: DensityMatrix = serde_json::from_value(value).map_err(reparse)?;
    match state.shape() {
        Some(shape) => Ok(format!("density matrix, dim {} ({shape})", state.dim())),
        None => Ok(format!("density matrix, dim {}", state.dim())),
    }
}

fn two_inputs<'a>(inputs: &'a [String], what: &str) -> Result<[&'a String; 2]> {
    match inputs {
        [a, b] => Ok([a, b]),
        other => Err(Error::Cli(format!("expected two {what}, got {}", other.len()))),
    }
}

fn to_pretty<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Cli(format!("serialization: {e}")))
}

/// Parses `lo:hi:n` into `n` evenly spaced grid points; bounds must lie in
/// `[0, 1]` since every family parameter is a probability weight.
fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::Cli(format!("grid {spec:?}: {why}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad("expected lo:hi:n"));
    };
    let lo: f64 = lo.parse().map_err(|_| bad("lower bound is not a number"))?;
    let hi: f64 = hi.parse().map_err(|_| bad("upper bound is not a number"))?;
    let n: usize = n.parse().map_err(|_| bad("count is not an integer"))?;
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
        return Err(bad("bounds must lie in [0, 1]"));
    }
    if hi < lo {
        return Err(bad("upper bound below lower bound"));
    }
    if n == 0 {
        return Err(bad("count must be positive"));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n).map(|k| lo + step * k as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_range("0.25:0.25:1").unwrap(), vec![0.25]);
        let eleven = parse_range("0:1:11").unwrap();
        assert_eq!(eleven.len(), 11);
        assert!((eleven[10] - 1.0).abs() < 1e-15);
        assert!((eleven[3] - 0.3).abs() < 1e-15);
        for bad in ["0:1", "a:1:3", "0:2:3", "0.5:0.1:3", "0:1:0", "1:0:-2"] {
            assert!(parse_range(bad).is_err(), "{bad} accepted");
        }
    }

    #[test]
    fn tolerance_precedence() {
        assert_eq!(resolve_tolerance(None, None, None).unwrap(), sdp::DEFAULT_TOLERANCE);
        assert_eq!(resolve_tolerance(None, None, Some(1e-5)).unwrap(), 1e-5);
        assert_eq!(resolve_tolerance(None, Some(1e-6), Some(1e-5)).unwrap(), 1e-6);
        assert_eq!(resolve_tolerance(Some(1e-8), Some(1e-6), Some(1e-5)).unwrap(), 1e-8);
        assert!(resolve_tolerance(Some(1e-3), None, None).is_err());
        assert!(resolve_tolerance(None, Some(1e-11), None).is_err());
        assert!(resolve_tolerance(Some(f64::NAN), None, None).is_err());
    }

    #[test]
    fn run_config_rejects_unknown_fields() {
        let err = serde_json::from_str::<RunConfig>(r#"{"commnd": "table"}"#).unwrap_err();
        assert!(err.to_string().contains("commnd"), "{err}");
        let ok: RunConfig =
            serde_json::from_str(r#"{"command": "state-div", "gamma": 2.0, "class": "ppt"}"#)
                .unwrap();
        assert_eq!(ok.command, Some(CommandKind::StateDiv));
        assert_eq!(ok.class, Some(ClassArg::Ppt));
        assert_eq!(ok.gamma, Some(2.0));
    }

    #[test]
    fn cli_positionals_override_config_inputs() {
        let file = RunConfig {
            inputs: vec!["a.json".into(), "b.json".into()],
            ..RunConfig::default()
        };
        assert_eq!(pick_inputs(vec![], &file), vec!["a.json", "b.json"]);
        assert_eq!(pick_inputs(vec!["c.json".into()], &file), vec!["c.json"]);
    }

    #[test]
    fn table_cell_matches_closed_forms() {
        let (analytic, sdp_value) =
            table_cell(FamilyArg::Werner, ClassArg::Ppt, 0.0, 1.0, 2, 1.0, 1e-7).unwrap();
        assert!((analytic - 2.0 / 3.0).abs() < 1e-12);
        assert!((analytic - sdp_value).abs() < 1e-6);

        let (analytic, sdp_value) =
            table_cell(FamilyArg::Depolarizing, ClassArg::All, 0.0, 1.0, 2, 1.0, 1e-7).unwrap();
        assert!((analytic - 0.75).abs() < 1e-12);
        assert!((analytic - sdp_value).abs() < 1e-6);

        let (analytic, sdp_value) =
            table_cell(FamilyArg::Isotropic, ClassArg::All, 0.5, 0.9, 3, 1.5, 1e-7).unwrap();
        assert!((analytic - 0.15).abs() < 1e-12);
        assert!((analytic - sdp_value).abs() < 1e-10, "eigensolve path is exact");
    }

    #[test]
    fn command_kind_spellings() {
        let kinds: Vec<CommandKind> = ["state-div", "channel-div", "audit", "table", "validate"]
            .iter()
            .map(|s| serde_json::from_value(serde_json::Value::String(s.to_string())).unwrap())
            .collect();
        assert_eq!(
            kinds,
            vec![
                CommandKind::StateDiv,
                CommandKind::ChannelDiv,
                CommandKind::Audit,
                CommandKind::Table,
                CommandKind::Validate,
            ]
        );
    }
}
