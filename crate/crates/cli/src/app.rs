//! Argument parsing, command dispatch and exit codes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mattolab::characterize::{is_matto, tau_transfer, Flavor};
use mattolab::config::choose_grid;
use mattolab::linalg::{frob, unitary_deviation, CMat};
use mattolab::matfun::{Grid, InnerFunction};
use mattolab::modelspace::{build_model_space, ModelSpace};
use mattolab::ops::{crofoot, crofoot_symbol, matto, tau_between, CrofootParams};
use mattolab::{Error, GlobalConfig};
use serde::Serialize;

use crate::io::{
    self, mat_from_json, InnerInput, InnerSpec, JsonMat, MembershipJson, OperatorSpec, ParseError,
    SpaceSummary, SymbolSpec,
};
use crate::manifest::{Command as ManifestCommand, RunManifest};
use crate::report::{verify_report, VerifyReport};
use crate::verify::{Counts, Ctx, Limits, Tolerances};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    /// Success; for membership commands the operator is a member.
    Ok = 0,
    /// `verify` ran and at least one row failed.
    VerifyFailed = 1,
    /// Bad command line.
    Usage = 2,
    NonMember = 3,
    /// The two membership tests disagree or land between the thresholds.
    Inconsistent = 4,
    /// An input file is not valid JSON or violates its schema.
    Parse = 5,
    /// A file could not be read or written.
    Io = 6,
    /// A numerical precondition or self-check failed.
    Numerical = 7,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Parse(ParseError),
    Io { path: PathBuf, message: String },
    Numerical(Error),
    Inconsistent(Error),
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Usage(_) => Exit::Usage,
            CliError::Parse(_) => Exit::Parse,
            CliError::Io { .. } => Exit::Io,
            CliError::Numerical(_) => Exit::Numerical,
            CliError::Inconsistent(_) => Exit::Inconsistent,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Parse(e) => write!(f, "parse error: {e}"),
            CliError::Io { path, message } => write!(f, "i/o error: {}: {message}", path.display()),
            CliError::Numerical(e) => write!(f, "numerical error: {e}"),
            CliError::Inconsistent(e) => write!(f, "inconsistent decision: {e}"),
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Parse(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Inconsistent { .. } => CliError::Inconsistent(e),
            e => CliError::Numerical(e),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "matto-lab",
    version,
    about = "Model spaces and truncated Toeplitz operators between them"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Commands,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Random seed; the MATTO_LAB_SEED environment variable takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Grid size Q (power of two); chosen automatically when absent.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long = "tol-id", global = true)]
    pub tol_id: Option<f64>,
    #[arg(long = "tol-member", global = true)]
    pub tol_member: Option<f64>,
    #[arg(long = "tol-rank", global = true)]
    pub tol_rank: Option<f64>,
    /// Print JSON on stdout.
    #[arg(long, global = true, conflicts_with = "text")]
    pub json: bool,
    /// Print a plain-text summary on stdout (default).
    #[arg(long, global = true)]
    pub text: bool,
    /// Write a run manifest with input and output digests.
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Commands {
    /// Run the invariant suite on seeded random instances.
    Verify(VerifyArgs),
    /// Model-space construction.
    #[command(subcommand)]
    Modelspace(ModelspaceCmd),
    /// Operators between model spaces.
    #[command(subcommand)]
    Ops(OpsCmd),
    /// Membership decisions and symbol recovery.
    #[command(subcommand)]
    Characterize(CharacterizeCmd),
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Largest coefficient dimension d (at most 4).
    #[arg(long = "max-d", default_value_t = Limits::default().max_d)]
    pub max_d: usize,
    /// Largest McMillan degree (at most 8).
    #[arg(long = "max-degree", default_value_t = Limits::default().max_degree)]
    pub max_degree: usize,
    /// Use the larger instance counts of the acceptance run.
    #[arg(long)]
    pub acceptance: bool,
    /// JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plain-text table path.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum ModelspaceCmd {
    /// Build the canonical orthonormal basis of K_Theta.
    Build {
        #[arg(long)]
        theta: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum OpsCmd {
    /// Matrix of A_Phi from K_Theta1 to K_Theta2.
    Matto {
        #[arg(long)]
        theta1: PathBuf,
        #[arg(long)]
        theta2: PathBuf,
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The unitary tau from K_Theta1 onto K_Theta1~, or with --op the
    /// transferred operator tau2 A tau1*.
    Tau {
        #[arg(long)]
        theta1: PathBuf,
        #[arg(long, requires = "op")]
        theta2: Option<PathBuf>,
        #[arg(long)]
        op: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write Theta1~ as inner.json.
        #[arg(long = "tilde1-out")]
        tilde1_out: Option<PathBuf>,
        /// Where to write Theta2~ as inner.json.
        #[arg(long = "tilde2-out")]
        tilde2_out: Option<PathBuf>,
    },
    /// Crofoot transform J_W on K_Theta1; with --symbol also checks the
    /// transformed symbol against J2 A_Phi J1*.
    Crofoot {
        #[arg(long)]
        theta1: PathBuf,
        /// W1 as a JSON matrix.
        #[arg(long)]
        w1: PathBuf,
        #[arg(long, requires = "w2")]
        theta2: Option<PathBuf>,
        #[arg(long)]
        w2: Option<PathBuf>,
        #[arg(long)]
        symbol: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FlavorArg {
    Plain,
    Tilde,
}

impl From<FlavorArg> for Flavor {
    fn from(f: FlavorArg) -> Self {
        match f {
            FlavorArg::Plain => Flavor::Plain,
            FlavorArg::Tilde => Flavor::Tilde,
        }
    }
}

#[derive(Args, Debug)]
pub struct MembershipArgs {
    #[arg(long)]
    pub theta1: PathBuf,
    #[arg(long)]
    pub theta2: PathBuf,
    #[arg(long)]
    pub op: PathBuf,
    #[arg(long, value_enum, default_value = "plain")]
    pub flavor: FlavorArg,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum CharacterizeCmd {
    /// Decide whether an operator is a truncated Toeplitz operator.
    IsMatto(MembershipArgs),
    /// Decide, recover the symbol, rebuild and compare.
    Recover(MembershipArgs),
}

/// What a command produced, before anything is printed or written.
struct Outcome {
    exit: Exit,
    text: String,
    json: String,
    artifacts: Vec<(PathBuf, String)>,
    inputs: Vec<PathBuf>,
    cfg: Option<GlobalConfig>,
    command: ManifestCommand,
}

/// Settings shared by every command after flags and environment are merged.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub grid: Option<usize>,
    pub tol: Tolerances,
}

impl Settings {
    pub fn from_global(g: &Global, env_seed: Option<&str>) -> CliResult<Self> {
        let seed = match env_seed {
            Some(s) => s.trim().parse().map_err(|_| {
                CliError::Usage(format!("MATTO_LAB_SEED={s:?} is not an unsigned integer"))
            })?,
            None => g.seed,
        };
        let mut tol = Tolerances::default();
        if let Some(t) = g.tol_id {
            tol.tol_id = t;
        }
        if let Some(t) = g.tol_member {
            tol.tol_member = t;
        }
        if let Some(t) = g.tol_rank {
            tol.tol_rank = t;
        }
        for (name, t) in [
            ("tol-id", tol.tol_id),
            ("tol-member", tol.tol_member),
            ("tol-rank", tol.tol_rank),
        ] {
            if !(t > 0.0 && t < 1.0) {
                return Err(CliError::Usage(format!("--{name} {t} outside (0, 1)")));
            }
        }
        if let Some(q) = g.grid {
            if !q.is_power_of_two() || q < 4 {
                return Err(CliError::Usage(format!(
                    "--grid {q} is not a power of two >= 4"
                )));
            }
        }
        Ok(Self {
            seed,
            grid: g.grid,
            tol,
        })
    }

    fn config(&self, d: usize, q: usize) -> GlobalConfig {
        let mut cfg = GlobalConfig::new(d, q).with_seed(self.seed);
        cfg.tol_rank = self.tol.tol_rank;
        cfg.tol_id = self.tol.tol_id;
        cfg.tol_member = self.tol.tol_member;
        cfg
    }

    /// Grid for the given inner functions and symbol band; an explicit
    /// `--grid` wins, then a grid recorded in an operator file.
    fn grid_for(&self, inners: &[&InnerInput], band: usize, recorded: Option<usize>) -> usize {
        self.grid.or(recorded).unwrap_or_else(|| {
            let degree = inners.iter().map(|t| t.degree()).max().unwrap_or(0);
            let radius = inners.iter().map(|t| t.max_radius()).fold(0.0, f64::max);
            choose_grid(degree, band, radius, self.tol.tol_id)
        })
    }
}

fn read(path: &Path, inputs: &mut Vec<PathBuf>) -> CliResult<String> {
    inputs.push(path.to_path_buf());
    io::read_text(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn source(path: &Path) -> String {
    path.display().to_string()
}

fn load_inner(path: &Path, inputs: &mut Vec<PathBuf>) -> CliResult<InnerInput> {
    let text = read(path, inputs)?;
    let spec: InnerSpec = io::parse(&text, &source(path))?;
    Ok(spec.validate(&source(path))?)
}

fn load_matrix(path: &Path, d: usize, inputs: &mut Vec<PathBuf>) -> CliResult<CMat> {
    let text = read(path, inputs)?;
    let m: JsonMat = io::parse(&text, &source(path))?;
    Ok(mat_from_json(&m, Some((d, d)), &source(path), ".")?)
}

fn build_theta(
    input: &InnerInput,
    grid: &Arc<Grid>,
    cfg: &GlobalConfig,
) -> CliResult<InnerFunction> {
    if input.factors.is_empty() {
        Ok(InnerFunction::constant(&input.u0, grid, cfg)?)
    } else {
        Ok(input.build(grid, cfg)?)
    }
}

fn space(input: &InnerInput, grid: &Arc<Grid>, cfg: &GlobalConfig) -> CliResult<Arc<ModelSpace>> {
    let theta = build_theta(input, grid, cfg)?;
    Ok(Arc::new(build_model_space(&theta, cfg)?))
}

fn same_d(a: &InnerInput, b: &InnerInput) -> CliResult<()> {
    if a.d != b.d {
        return Err(CliError::Numerical(Error::DimensionMismatch(format!(
            "inner functions act on C^{} and C^{}",
            a.d, b.d
        ))));
    }
    Ok(())
}

fn e(x: f64) -> String {
    // adding 0.0 turns -0.0 into 0.0
    format!("{:.3e}", x + 0.0)
}

fn outcome(command: ManifestCommand, inputs: Vec<PathBuf>, cfg: GlobalConfig) -> Outcome {
    Outcome {
        exit: Exit::Ok,
        text: String::new(),
        json: String::new(),
        artifacts: Vec::new(),
        inputs,
        cfg: Some(cfg),
        command,
    }
}

fn cmd_build(s: &Settings, theta: &Path, out: Option<&Path>) -> CliResult<Outcome> {
    let mut inputs = Vec::new();
    let t = load_inner(theta, &mut inputs)?;
    let q = s.grid_for(&[&t], 0, None);
    let cfg = s.config(t.d, q);
    let m = space(&t, &Grid::new(q), &cfg)?;
    let summary = SpaceSummary::new(&m, cfg.tol_id * 1e-6);
    let mut o = outcome(ManifestCommand::Build, inputs, cfg);
    o.json = io::to_json(&summary);
    o.text = format!(
        "model space: dim {} over C^{}, grid {}, gram residual {}\n",
        summary.dim,
        summary.d,
        summary.grid,
        e(summary.gram_residual)
    );
    if let Some(p) = out {
        o.artifacts.push((p.to_path_buf(), o.json.clone()));
    }
    Ok(o)
}

fn cmd_matto(
    s: &Settings,
    th1: &Path,
    th2: &Path,
    sym: &Path,
    out: Option<&Path>,
) -> CliResult<Outcome> {
    let mut inputs = Vec::new();
    let t1 = load_inner(th1, &mut inputs)?;
    let t2 = load_inner(th2, &mut inputs)?;
    same_d(&t1, &t2)?;
    let text = read(sym, &mut inputs)?;
    let spec: SymbolSpec = io::parse(&text, &source(sym))?;
    let q = s.grid_for(&[&t1, &t2], spec.band_width(), None);
    let cfg = s.config(t1.d, q);
    let grid = Grid::new(q);
    let phi = spec.to_matfun(&grid, t1.d, &source(sym))?;
    let m1 = space(&t1, &grid, &cfg)?;
    let m2 = space(&t2, &grid, &cfg)?;
    let a = matto(&phi, &m1, &m2, &cfg)?;
    let op = OperatorSpec::from_operator(&a);
    let mut o = outcome(ManifestCommand::Matto, inputs, cfg);
    o.json = io::to_json(&op);
    o.text = format!(
        "operator {} x {} on grid {}, norm {}\n",
        op.dim_out,
        op.dim_in,
        q,
        e(a.norm())
    );
    if let Some(p) = out {
        o.artifacts.push((p.to_path_buf(), o.json.clone()));
    }
    Ok(o)
}

/// Reads an operator file against two spaces built on its recorded grid.
fn load_operator(
    s: &Settings,
    t1: &InnerInput,
    t2: &InnerInput,
    path: &Path,
    inputs: &mut Vec<PathBuf>,
) -> CliResult<(mattolab::ops::OperatorMatrix, GlobalConfig)> {
    let text = read(path, inputs)?;
    let spec: OperatorSpec = io::parse(&text, &source(path))?;
    let q = s.grid_for(&[t1, t2], 0, spec.grid);
    let cfg = s.config(t1.d, q);
    let grid = Grid::new(q);
    let m1 = space(t1, &grid, &cfg)?;
    let m2 = space(t2, &grid, &cfg)?;
    Ok((spec.to_operator(&m1, &m2, &source(path))?, cfg))
}

#[derive(Serialize)]
struct TauJson {
    operator: OperatorSpec,
    unitary_deviation: f64,
    theta1_tilde: InnerSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta2_tilde: Option<InnerSpec>,
}

/// `Θ̃` as an inner.json, and its model space built from the serialized
/// form so that later commands reading that file see the same basis.
fn tilde_of(
    input: &InnerInput,
    grid: &Arc<Grid>,
    cfg: &GlobalConfig,
) -> CliResult<(InnerSpec, Arc<ModelSpace>)> {
    let theta = build_theta(input, grid, cfg)?;
    let t = theta.tilde(cfg)?;
    let spec = InnerSpec::from_parts(t.left_unitary(), t.factors());
    let text = serde_json::to_string(&spec).expect("inner spec serializes");
    let reread: InnerSpec = io::parse(&text, "tilde")?;
    let m = space(&reread.validate("tilde")?, grid, cfg)?;
    Ok((spec, m))
}

#[allow(clippy::too_many_arguments)]
fn cmd_tau(
    s: &Settings,
    th1: &Path,
    th2: Option<&Path>,
    op: Option<&Path>,
    out: Option<&Path>,
    tilde1_out: Option<&Path>,
    tilde2_out: Option<&Path>,
) -> CliResult<Outcome> {
    let mut inputs = Vec::new();
    let t1 = load_inner(th1, &mut inputs)?;
    let (json, cfg) = match op {
        None => {
            let q = s.grid_for(&[&t1], 0, None);
            let cfg = s.config(t1.d, q);
            let grid = Grid::new(q);
            let m1 = space(&t1, &grid, &cfg)?;
            let (spec1, tilde1) = tilde_of(&t1, &grid, &cfg)?;
            let tau = tau_between(&m1, &tilde1, &cfg)?;
            let json = TauJson {
                operator: OperatorSpec::from_operator(&tau),
                unitary_deviation: unitary_deviation(tau.mat()),
                theta1_tilde: spec1,
                theta2_tilde: None,
            };
            (json, cfg)
        }
        Some(op) => {
            let t2 = match th2 {
                Some(p) => load_inner(p, &mut inputs)?,
                None => load_inner(th1, &mut inputs)?,
            };
            same_d(&t1, &t2)?;
            let (a, cfg) = load_operator(s, &t1, &t2, op, &mut inputs)?;
            let grid = a.domain().grid().clone();
            let (spec1, tilde1) = tilde_of(&t1, &grid, &cfg)?;
            let (spec2, tilde2) = tilde_of(&t2, &grid, &cfg)?;
            let tau1 = tau_between(a.domain(), &tilde1, &cfg)?;
            let tau2 = tau_between(a.codomain(), &tilde2, &cfg)?;
            let moved = tau_transfer(&a, &tau1, &tau2)?;
            let json = TauJson {
                operator: OperatorSpec::from_operator(&moved),
                unitary_deviation: unitary_deviation(tau1.mat()).max(unitary_deviation(tau2.mat())),
                theta1_tilde: spec1,
                theta2_tilde: Some(spec2),
            };
            (json, cfg)
        }
    };
    let mut o = outcome(ManifestCommand::Tau, inputs, cfg);
    o.text = format!(
        "tau operator {} x {} on grid {}, unitary deviation {}\n",
        json.operator.dim_out,
        json.operator.dim_in,
        cfg.q,
        e(json.unitary_deviation)
    );
    if let Some(p) = out {
        o.artifacts
            .push((p.to_path_buf(), io::to_json(&json.operator)));
    }
    if let Some(p) = tilde1_out {
        o.artifacts
            .push((p.to_path_buf(), io::to_json(&json.theta1_tilde)));
    }
    if let (Some(p), Some(t)) = (tilde2_out, &json.theta2_tilde) {
        o.artifacts.push((p.to_path_buf(), io::to_json(t)));
    }
    o.json = io::to_json(&json);
    Ok(o)
}

#[derive(Serialize)]
struct CrofootJson {
    operator: OperatorSpec,
    unitary_deviation: f64,
    theta_w0: JsonMat,
    theta_w_inner_deviation: f64,
    theta_w_pure: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    symbol_law_residual: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_crofoot(
    s: &Settings,
    th1: &Path,
    w1: &Path,
    th2: Option<&Path>,
    w2: Option<&Path>,
    sym: Option<&Path>,
    out: Option<&Path>,
) -> CliResult<Outcome> {
    let mut inputs = Vec::new();
    let t1 = load_inner(th1, &mut inputs)?;
    let t2 = match th2 {
        Some(p) => Some(load_inner(p, &mut inputs)?),
        None => None,
    };
    let w1m = load_matrix(w1, t1.d, &mut inputs)?;
    let w2m = match w2 {
        Some(p) => load_matrix(p, t1.d, &mut inputs)?,
        None => w1m.clone(),
    };
    let spec = match sym {
        Some(p) => {
            let text = read(p, &mut inputs)?;
            Some(io::parse::<SymbolSpec>(&text, &source(p))?)
        }
        None => None,
    };
    let t2r = t2.as_ref().unwrap_or(&t1);
    same_d(&t1, t2r)?;
    let band = spec.as_ref().map_or(0, SymbolSpec::band_width);
    let q = s.grid_for(&[&t1, t2r], band, None);
    let cfg = s.config(t1.d, q);
    let grid = Grid::new(q);
    let p1 = CrofootParams::new(w1m, &cfg)?;
    let p2 = CrofootParams::new(w2m, &cfg)?;
    let m1 = space(&t1, &grid, &cfg)?;
    let (theta_w, j1) = crofoot(&m1, &p1, &cfg)?;

    let symbol_law_residual = match &spec {
        None => None,
        Some(spec) => {
            let phi = spec.to_matfun(&grid, t1.d, &source(sym.expect("symbol path")))?;
            let m2 = space(t2r, &grid, &cfg)?;
            let (_, j2) = crofoot(&m2, &p2, &cfg)?;
            let a = matto(&phi, &m1, &m2, &cfg)?;
            let moved = j2.mat() * a.mat() * j1.mat().adjoint();
            let psi = crofoot_symbol(&phi, &p1, &p2, m1.theta(), m2.theta())?;
            let direct = matto(&psi, j1.codomain(), j2.codomain(), &cfg)?;
            Some(frob(&(direct.mat() - &moved)) / frob(&moved).max(1.0))
        }
    };
    let json = CrofootJson {
        operator: OperatorSpec::from_operator(&j1),
        unitary_deviation: unitary_deviation(j1.mat()),
        theta_w0: io::mat_to_json(theta_w.theta0()),
        theta_w_inner_deviation: theta_w.inner_deviation(),
        theta_w_pure: theta_w.is_pure(),
        symbol_law_residual,
    };
    let mut o = outcome(ManifestCommand::Crofoot, inputs, cfg);
    writeln!(
        o.text,
        "Crofoot J {} x {} on grid {}, unitary deviation {}, Theta^W pure: {}",
        json.operator.dim_out,
        json.operator.dim_in,
        q,
        e(json.unitary_deviation),
        json.theta_w_pure
    )
    .unwrap();
    if let Some(r) = symbol_law_residual {
        writeln!(o.text, "symbol law residual {}", e(r)).unwrap();
    }
    o.json = io::to_json(&json);
    if let Some(p) = out {
        o.artifacts.push((p.to_path_buf(), o.json.clone()));
    }
    Ok(o)
}

fn witness_text(out: &mut String, w: &mattolab::characterize::Witness) {
    let fmt = |v: &mattolab::linalg::CVec| {
        v.iter()
            .map(|z| format!("{:+.6e}{:+.6e}i", z.re, z.im))
            .collect::<Vec<_>>()
            .join(" ")
    };
    writeln!(out, "witness |<Q2 R Q1 v, u>| = {}", e(w.value)).unwrap();
    writeln!(out, "  u = [{}]", fmt(&w.u)).unwrap();
    writeln!(out, "  v = [{}]", fmt(&w.v)).unwrap();
}

fn cmd_membership(s: &Settings, args: &MembershipArgs, recover: bool) -> CliResult<Outcome> {
    let mut inputs = Vec::new();
    let t1 = load_inner(&args.theta1, &mut inputs)?;
    let t2 = load_inner(&args.theta2, &mut inputs)?;
    same_d(&t1, &t2)?;
    let (a, cfg) = load_operator(s, &t1, &t2, &args.op, &mut inputs)?;
    let flavor = Flavor::from(args.flavor);
    let command = if recover {
        ManifestCommand::Recover
    } else {
        ManifestCommand::IsMatto
    };
    let report = is_matto(&a, flavor, &cfg)?;
    let json = MembershipJson::new(&report, &cfg);
    let mut o = outcome(command, inputs, cfg);
    o.exit = if report.is_member {
        Exit::Ok
    } else {
        Exit::NonMember
    };
    let t = &mut o.text;
    writeln!(t, "member: {}", if report.is_member { "yes" } else { "no" }).unwrap();
    writeln!(t, "flavor: {}", flavor.name()).unwrap();
    writeln!(
        t,
        "certificate residual (relative): {}",
        e(report.lsq_residual)
    )
    .unwrap();
    writeln!(
        t,
        "compression residual (relative): {}",
        e(report.compression_residual)
    )
    .unwrap();
    if recover && report.is_member {
        let pair = report
            .recovered_symbol
            .as_ref()
            .expect("members carry a symbol");
        writeln!(
            t,
            "recovered symbol: Psi band [0, {}], Xi band [0, {}]",
            json_top(&json, true),
            json_top(&json, false)
        )
        .unwrap();
        writeln!(
            t,
            "symbol analyticity defect: {}",
            e(pair.analyticity_defect())
        )
        .unwrap();
        writeln!(
            t,
            "rebuild |A_(Psi+Xi*) - A| / |A|: {}",
            e(report.roundtrip_error.unwrap_or(0.0))
        )
        .unwrap();
    }
    if let Some(w) = &report.witness {
        witness_text(t, w);
    }
    o.json = io::to_json(&json);
    if let Some(p) = &args.report {
        o.artifacts.push((p.clone(), o.json.clone()));
    }
    Ok(o)
}

fn json_top(j: &MembershipJson, psi: bool) -> i64 {
    j.symbol
        .as_ref()
        .map_or(0, |s| if psi { s.psi.band[1] } else { s.xi.band[1] })
}

fn cmd_verify(s: &Settings, args: &VerifyArgs) -> CliResult<Outcome> {
    let limits = Limits {
        max_d: args.max_d,
        max_degree: args.max_degree,
    };
    limits.validate().map_err(CliError::Usage)?;
    let counts = if args.acceptance {
        Counts::acceptance()
    } else {
        Counts::default()
    };
    let ctx = Ctx::new(s.seed, limits, counts, s.tol, s.grid);
    let report: VerifyReport = verify_report(&ctx);
    let table = report.table();
    let json = report.to_json();
    let mut o = Outcome {
        exit: if report.pass {
            Exit::Ok
        } else {
            Exit::VerifyFailed
        },
        text: table.clone(),
        json: json.clone(),
        artifacts: Vec::new(),
        inputs: Vec::new(),
        cfg: None,
        command: ManifestCommand::Verify,
    };
    if let Some(p) = &args.out {
        o.artifacts.push((p.clone(), json));
    }
    if let Some(p) = &args.table {
        o.artifacts.push((p.clone(), table));
    }
    Ok(o)
}

fn dispatch(s: &Settings, cmd: &Commands) -> CliResult<Outcome> {
    match cmd {
        Commands::Verify(a) => cmd_verify(s, a),
        Commands::Modelspace(ModelspaceCmd::Build { theta, out }) => {
            cmd_build(s, theta, out.as_deref())
        }
        Commands::Ops(OpsCmd::Matto {
            theta1,
            theta2,
            symbol,
            out,
        }) => cmd_matto(s, theta1, theta2, symbol, out.as_deref()),
        Commands::Ops(OpsCmd::Tau {
            theta1,
            theta2,
            op,
            out,
            tilde1_out,
            tilde2_out,
        }) => cmd_tau(
            s,
            theta1,
            theta2.as_deref(),
            op.as_deref(),
            out.as_deref(),
            tilde1_out.as_deref(),
            tilde2_out.as_deref(),
        ),
        Commands::Ops(OpsCmd::Crofoot {
            theta1,
            w1,
            theta2,
            w2,
            symbol,
            out,
        }) => cmd_crofoot(
            s,
            theta1,
            w1,
            theta2.as_deref(),
            w2.as_deref(),
            symbol.as_deref(),
            out.as_deref(),
        ),
        Commands::Characterize(CharacterizeCmd::IsMatto(a)) => cmd_membership(s, a, false),
        Commands::Characterize(CharacterizeCmd::Recover(a)) => cmd_membership(s, a, true),
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Runs a parsed command line and returns the process exit code. Output
/// goes to the given writers.
pub fn run(
    cli: &Cli,
    env_seed: Option<&str>,
    stdout: &mut dyn std::io::Write,
    stderr: &mut dyn std::io::Write,
) -> i32 {
    let result = Settings::from_global(&cli.global, env_seed).and_then(|s| {
        let o = dispatch(&s, &cli.command)?;
        for (path, contents) in &o.artifacts {
            write_file(path, contents)?;
        }
        if let Some(path) = &cli.global.manifest {
            let manifest = RunManifest::new(o.command, s.seed, o.cfg, &o.inputs, &o.artifacts);
            write_file(path, &io::to_json(&manifest))?;
        }
        Ok(o)
    });
    match result {
        Ok(o) => {
            let body = if cli.global.json { &o.json } else { &o.text };
            let _ = stdout.write_all(body.as_bytes());
            o.exit as i32
        }
        Err(err) => {
            let _ = writeln!(stderr, "matto-lab: {err}");
            if cli.global.json {
                let _ = stdout.write_all(io::to_json(&error_json(&err)).as_bytes());
            }
            err.exit() as i32
        }
    }
}

#[derive(Serialize)]
struct ErrorJson {
    error: &'static str,
    exit_code: i32,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    offset: Option<usize>,
}

fn error_json(err: &CliError) -> ErrorJson {
    let (kind, path, offset) = match err {
        CliError::Usage(_) => ("usage", None, None),
        CliError::Parse(p) => ("parse", Some(p.path.clone()), Some(p.offset)),
        CliError::Io { .. } => ("io", None, None),
        CliError::Numerical(_) => ("numerical", None, None),
        CliError::Inconsistent(_) => ("inconsistent", None, None),
    };
    ErrorJson {
        error: kind,
        exit_code: err.exit() as i32,
        message: err.to_string(),
        path,
        offset,
    }
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                Exit::Usage as i32
            } else {
                Exit::Ok as i32
            };
        }
    };
    let env_seed = std::env::var("MATTO_LAB_SEED").ok();
    run(
        &cli,
        env_seed.as_deref(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}
