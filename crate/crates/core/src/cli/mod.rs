//! The `hardy-node` command line: one subcommand per compute module, each
//! reading JSON scenarios and writing JSON-lines results.
//!
//! Exit codes: 0 when every check passes (inconclusive checks count as
//! passing), 1 when any check fails, 2 on a parse or configuration error.

pub mod report;
pub mod scenarios;
pub mod verify;

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use report::{inputs_digest, ScenarioReport};
use scenarios::{Outcome, ScenarioError};
use verify::Suite;

/// Numerical settings shared by every subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Args)]
pub struct Settings {
    /// Fourier truncation `N`: loops carry modes `-N..=N`.
    #[arg(long, global = true, default_value_t = 32)]
    pub truncation: usize,
    /// Sobolev exponent used by every norm.
    #[arg(long = "sobolev-s", global = true, default_value_t = 1.5)]
    pub sobolev_s: f64,
    /// Residual tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { truncation: 32, sobolev_s: 1.5, tol: 1e-10, seed: 0 }
    }
}

impl Settings {
    /// Stable text form that enters the inputs digest.
    pub fn canonical(&self) -> String {
        format!(
            "truncation={};sobolev_s={:e};tol={:e};seed={}",
            self.truncation, self.sobolev_s, self.tol, self.seed
        )
    }
}

#[derive(Debug, Parser)]
#[command(name = "hardy-node", version, about = "Node, extension, Fredholm and moduli checks")]
pub struct Cli {
    #[command(flatten)]
    pub settings: Settings,
    /// Worker threads for multi-file runs (0 picks the core count).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Inputs {
    /// Scenario files; `-` or nothing reads stdin.
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Node membership, charts and boundary traces.
    NodeCheck(Inputs),
    /// Holomorphic extension over disks, disk pairs, annuli and nodes.
    ExtendCheck(Inputs),
    /// Indices of subspace triples, line bundles and parametrized families.
    Index(Inputs),
    /// Finite-dimensional reduction of a graph pair.
    Reduce(Inputs),
    /// Newton solves of the reduced intersection equation.
    Intersect(Inputs),
    /// Neck energies and the energy axiom.
    Energy(Inputs),
    /// Moduli dimensions, stability and genus of nodal configurations.
    ModuliDim(Inputs),
    /// Run a built-in verification suite.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
    },
}

type Handler = fn(&str, &Settings) -> Outcome;

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::NodeCheck(_) => "node-check",
            Command::ExtendCheck(_) => "extend-check",
            Command::Index(_) => "index",
            Command::Reduce(_) => "reduce",
            Command::Intersect(_) => "intersect",
            Command::Energy(_) => "energy",
            Command::ModuliDim(_) => "moduli-dim",
            Command::Verify { .. } => "verify",
        }
    }

    fn handler(&self) -> Option<(Handler, &Inputs)> {
        let h: Handler = match self {
            Command::NodeCheck(_) => scenarios::node_check,
            Command::ExtendCheck(_) => scenarios::extend_check,
            Command::Index(_) => scenarios::index,
            Command::Reduce(_) => scenarios::reduce,
            Command::Intersect(_) => scenarios::intersect,
            Command::Energy(_) => scenarios::energy,
            Command::ModuliDim(_) => scenarios::moduli_dim,
            Command::Verify { .. } => return None,
        };
        match self {
            Command::NodeCheck(i)
            | Command::ExtendCheck(i)
            | Command::Index(i)
            | Command::Reduce(i)
            | Command::Intersect(i)
            | Command::Energy(i)
            | Command::ModuliDim(i) => Some((h, i)),
            Command::Verify { .. } => None,
        }
    }
}

/// A scenario that could not be run, with the source it came from.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{source_name}: {error}")]
pub struct RunError {
    pub source_name: String,
    pub error: ScenarioError,
}

/// Runs one scenario text through `handler`.
pub fn run_scenario(
    command: &str,
    handler: Handler,
    source_name: &str,
    text: &[u8],
    st: &Settings,
) -> Result<ScenarioReport, RunError> {
    let start = Instant::now();
    let fail = |error| RunError { source_name: source_name.to_string(), error };
    let text_str =
        std::str::from_utf8(text).map_err(|e| fail(ScenarioError::Parse(format!("input is not UTF-8: {e}"))))?;
    let (id, results) = handler(text_str, st).map_err(fail)?;
    Ok(ScenarioReport {
        scenario: id.unwrap_or_else(|| source_name.to_string()),
        command: command.to_string(),
        inputs_digest: inputs_digest(text, &st.canonical()),
        results,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn read_source(path: &Path) -> Result<(String, Vec<u8>), RunError> {
    if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf).map_err(|e| RunError {
            source_name: "stdin".into(),
            error: ScenarioError::Config(format!("cannot read stdin: {e}")),
        })?;
        return Ok(("stdin".into(), buf));
    }
    let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    let bytes = std::fs::read(path).map_err(|e| RunError {
        source_name: name.clone(),
        error: ScenarioError::Config(format!("cannot read {}: {e}", path.display())),
    })?;
    Ok((name, bytes))
}

/// Runs `cli`, writing JSON-lines to `out` and summaries and diagnostics to
/// `err`. Returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let st = cli.settings;
    let command = cli.command.name();
    let reports: Vec<Result<ScenarioReport, RunError>> = match &cli.command {
        Command::Verify { suite } => {
            let start = Instant::now();
            let name = format!("verify-{}", suite.name());
            vec![verify::verify_suite(*suite, &st)
                .map(|results| ScenarioReport {
                    scenario: name.clone(),
                    command: command.to_string(),
                    inputs_digest: inputs_digest(suite.name().as_bytes(), &st.canonical()),
                    results,
                    wall_time_s: start.elapsed().as_secs_f64(),
                })
                .map_err(|e| RunError { source_name: name, error: e.into() })]
        }
        _ => {
            let (handler, inputs) = cli.command.handler().expect("scenario command");
            let files: Vec<PathBuf> =
                if inputs.files.is_empty() { vec![PathBuf::from("-")] } else { inputs.files.clone() };
            let job = |p: &PathBuf| {
                let (name, bytes) = read_source(p)?;
                run_scenario(command, handler, &name, &bytes, &st)
            };
            match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
                Ok(pool) => pool.install(|| files.par_iter().map(job).collect()),
                Err(e) => {
                    let _ = writeln!(err, "error: cannot start worker pool: {e}");
                    return 2;
                }
            }
        }
    };

    let mut code = 0;
    for r in reports {
        match r {
            Ok(rep) => {
                let _ = out.write_all(rep.to_json_lines().as_bytes());
                let _ = writeln!(err, "{}", rep.summary_line());
                if !rep.all_pass() && code == 0 {
                    code = 1;
                }
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                code = 2;
            }
        }
    }
    code
}

/// Parses `args` (including the program name) and runs them.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                2
            } else {
                let _ = write!(out, "{}", e.render());
                0
            }
        }
    }
}
