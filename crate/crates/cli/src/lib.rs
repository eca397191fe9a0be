//! Command-line front end: parameter entry, figure data and single-state
//! reports. All output is CSV with a `#` provenance header.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use hompss::fock::eigen_residual;
use hompss::fock::project_spec;
use hompss::states::default_grid;
use hompss::stats::moment_variances;
use hompss::{
    build_params, canonicity_residual, evaluate_hompss, g2, g4, mean_photon_number, project_state,
    Branch, CanonicalParams64, Grid64, HompssSpec64,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod figures;
pub mod output;

pub use figures::{cmd_figure, FIGURES};
use output::{header, num, sibling, write_file};

pub const THREADS_ENV: &str = "HOMPSS_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("unknown figure '{0}'; expected one of {list}", list = FIGURES.join(", "))]
    UnknownFigure(String),
    #[error(transparent)]
    Numeric(#[from] hompss::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::UnknownFigure(_) => 1,
            CliError::Numeric(_) | CliError::Io { .. } => 2,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// `lo:hi:step`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts[..] else {
            return Err(format!("expected lo:hi:step, got '{s}'"));
        };
        let f = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}"));
        let g = GridSpec {
            lo: f(lo)?,
            hi: f(hi)?,
            step: f(step)?,
        };
        if !(g.lo.is_finite() && g.hi.is_finite() && g.lo < g.hi) {
            return Err(format!("empty range in '{s}'"));
        }
        if !(g.step.is_finite() && g.step > 0.0 && g.step < g.hi - g.lo) {
            return Err(format!(
                "step must be positive and shorter than the range in '{s}'"
            ));
        }
        Ok(g)
    }
}

impl GridSpec {
    pub fn grid(&self) -> Result<Grid64, CliError> {
        Ok(Grid64::from_step(self.lo, self.hi, self.step)?)
    }
}

/// `VAR=lo:hi:n`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub var: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FromStr for SweepSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (var, range) = s
            .split_once('=')
            .ok_or_else(|| format!("expected VAR=lo:hi:n, got '{s}'"))?;
        let parts: Vec<&str> = range.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("expected VAR=lo:hi:n, got '{s}'"));
        };
        let f = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}"));
        let sweep = SweepSpec {
            var: var.trim().to_string(),
            lo: f(lo)?,
            hi: f(hi)?,
            n: n.trim().parse().map_err(|e| format!("'{n}': {e}"))?,
        };
        if !(sweep.lo.is_finite() && sweep.hi.is_finite() && sweep.lo < sweep.hi) {
            return Err(format!("empty range in '{s}'"));
        }
        if sweep.n < 2 {
            return Err("a sweep needs at least 2 steps".into());
        }
        Ok(sweep)
    }
}

impl SweepSpec {
    /// `lo + i (hi - lo)/(n - 1)`, with both ends exact.
    pub fn points(&self) -> Vec<f64> {
        let last = (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                if i + 1 == self.n {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / last
                }
            })
            .collect()
    }
}

fn parse_branch(s: &str) -> Result<Branch, String> {
    match s.parse::<Branch>() {
        Ok(Branch::Generic) | Err(_) => Err(format!("'{s}' is not one of pp, pm, mp, mm")),
        Ok(b) => Ok(b),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hompss",
    version,
    about = "Homodyne multiphoton squeezed states",
    disable_help_subcommand = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the canonicity condition for delta and classify the branch
    Solve(Params),
    /// Write the data behind one figure class
    Figure {
        /// One of mean-n-vs-gamma, mean-n-vs-theta, qfunc, wigner, pnd,
        /// g2-vs-r, g2-vs-theta, g4-vs-r, g4-vs-theta
        name: String,
        #[command(flatten)]
        params: Params,
    },
    /// Wavefunction and Fock amplitudes of one state plus a JSON summary
    State(Params),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Params {
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<f64>,
    /// Squeezing phase; switches off the branch parametrization
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// Nonlinearity phase; requires --phi (solved from canonicity if omitted)
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Homodyne angle
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Nonlinearity strength |gamma|
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Eigenvalue modulus |beta|
    #[arg(long = "beta-mod", visible_alias = "beta", allow_hyphen_values = true)]
    pub beta_mod: Option<f64>,
    /// Eigenvalue phase xi
    #[arg(long = "beta-phase", allow_hyphen_values = true)]
    pub beta_phase: Option<f64>,
    #[arg(long, value_parser = parse_branch)]
    pub branch: Option<Branch>,
    /// Fock cutoff (default: grown until the truncated mass is negligible)
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Sampling axis lo:hi:step
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<GridSpec>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// VAR=lo:hi:n
    #[arg(long, allow_hyphen_values = true)]
    pub sweep: Option<SweepSpec>,
}

/// How `(phi, delta)` are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiMode {
    /// Both angles from `--branch` and `theta`.
    Branch,
    /// `--phi` given, `delta` solved from canonicity.
    SolvedDelta,
    /// `--phi` and `--delta` given.
    Explicit,
}

/// Everything a run depends on; embedded in every output header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub figure: Option<String>,
    pub r: Option<f64>,
    pub theta: Option<f64>,
    pub gamma: Option<f64>,
    pub beta_mod: Option<f64>,
    pub beta_phase: Option<f64>,
    pub branch: Option<String>,
    pub phi_mode: PhiMode,
    pub phi: Option<f64>,
    pub delta: Option<f64>,
    pub cutoff: Option<usize>,
    pub grid: Option<GridSpec>,
    pub out: Option<PathBuf>,
    pub sweep: Option<SweepSpec>,
}

impl RunConfig {
    pub fn from_params(command: &str, figure: Option<String>, p: Params) -> Result<Self, CliError> {
        let phi_mode = match (p.phi, p.delta) {
            (None, None) => PhiMode::Branch,
            (Some(_), None) => PhiMode::SolvedDelta,
            (Some(_), Some(_)) => PhiMode::Explicit,
            (None, Some(_)) => return Err(usage("--delta requires --phi")),
        };
        if phi_mode != PhiMode::Branch && p.branch.is_some() {
            return Err(usage("--branch cannot be combined with --phi"));
        }
        let cfg = RunConfig {
            command: command.to_string(),
            figure,
            r: p.r,
            theta: p.theta,
            gamma: p.gamma,
            beta_mod: p.beta_mod,
            beta_phase: p.beta_phase,
            branch: p.branch.map(|b| b.code().to_string()),
            phi_mode,
            phi: p.phi,
            delta: p.delta,
            cutoff: p.cutoff,
            grid: p.grid,
            out: p.out,
            sweep: p.sweep,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [
            ("r", self.r),
            ("gamma", self.gamma),
            ("beta-mod", self.beta_mod),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(usage(format!("--{name} must be finite and >= 0, got {v}")));
                }
            }
        }
        for (name, v) in [
            ("theta", self.theta),
            ("beta-phase", self.beta_phase),
            ("phi", self.phi),
            ("delta", self.delta),
        ] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(usage(format!("--{name} must be finite")));
                }
            }
        }
        if self.cutoff == Some(0) {
            return Err(usage("--cutoff must be at least 1"));
        }
        Ok(())
    }

    pub fn branch(&self) -> Option<Branch> {
        self.branch
            .as_deref()
            .map(|b| b.parse().expect("validated branch code"))
    }

    /// Parameters for a single state: flags over the given defaults.
    fn canonical(&self, defaults: StateDefaults) -> Result<CanonicalParams64, CliError> {
        let r = self.r.unwrap_or(defaults.r);
        let theta = self.theta.unwrap_or(defaults.theta);
        let gamma = self.gamma.unwrap_or(defaults.gamma);
        let params = match self.phi_mode {
            PhiMode::Branch => {
                build_params(r, theta, gamma, self.branch().unwrap_or(defaults.branch))?
            }
            PhiMode::SolvedDelta => {
                CanonicalParams64::with_solved_delta(r, self.phi.unwrap_or(0.0), theta, gamma)?
            }
            PhiMode::Explicit => CanonicalParams64::new(
                r,
                self.phi.unwrap_or(0.0),
                self.delta.unwrap_or(0.0),
                theta,
                gamma,
            )?,
        };
        Ok(params)
    }

    fn spec(&self, defaults: StateDefaults) -> Result<HompssSpec64, CliError> {
        let params = self.canonical(defaults)?;
        Ok(HompssSpec64::new(
            params,
            self.beta_mod.unwrap_or(defaults.beta_mod),
            self.beta_phase.unwrap_or(0.0),
        )?)
    }
}

#[derive(Debug, Clone, Copy)]
struct StateDefaults {
    r: f64,
    theta: f64,
    gamma: f64,
    beta_mod: f64,
    branch: Branch,
}

/// Without flags `state` describes the vacuum.
const STATE_DEFAULTS: StateDefaults = StateDefaults {
    r: 0.0,
    theta: 0.0,
    gamma: 0.0,
    beta_mod: 0.0,
    branch: Branch::PlusPlus,
};

/// Parses a full command line (program name first).
pub fn parse<I, S>(args: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let (command, figure, params) = match cli.command {
        Command::Solve(p) => ("solve", None, p),
        Command::Figure { name, params } => ("figure", Some(name), params),
        Command::State(p) => ("state", None, p),
    };
    RunConfig::from_params(command, figure, params).map_err(|e| {
        let mut cmd = <Cli as clap::CommandFactory>::command();
        cmd.error(clap::error::ErrorKind::ValueValidation, e.to_string())
    })
}

/// Thread cap from `HOMPSS_THREADS`; unset means rayon's default.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(usage(format!(
                "{THREADS_ENV} must be a positive integer, got '{v}'"
            ))),
        },
        Err(e) => Err(usage(format!("{THREADS_ENV}: {e}"))),
    }
}

/// Runs `f` on a pool of `threads` workers, or the global pool.
pub fn with_threads<R: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> R + Send,
) -> Result<R, CliError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| usage(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Dispatches a parsed config.
pub fn execute(config: &RunConfig, threads: Option<usize>) -> Result<(), CliError> {
    match config.command.as_str() {
        "solve" => {
            let text = cmd_solve(config)?;
            match &config.out {
                Some(path) => write_file(path, text.as_bytes()),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        "figure" => cmd_figure(config, threads).map(|_| ()),
        "state" => with_threads(threads, || cmd_state(config))?.map(|_| ()),
        other => Err(usage(format!("unknown command '{other}'"))),
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let config = match parse(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let text = e.render().to_string();
            eprint!("{text}");
            if !text.contains("Usage:") {
                let usage = <Cli as clap::CommandFactory>::command().render_usage();
                eprintln!("\n{usage}");
            }
            return 1;
        }
    };
    let result = threads_from_env().and_then(|t| execute(&config, t));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn solve_rows(r: f64, phi: f64, theta: f64, gamma: f64) -> Result<Vec<String>, CliError> {
    let roots = hompss::canonical::solve_delta_all(r, phi, theta)?;
    let chosen = hompss::solve_delta(r, phi, theta)?;
    roots
        .iter()
        .enumerate()
        .map(|(i, &delta)| {
            let p = CanonicalParams64::new(r, phi, delta, theta, gamma)?;
            Ok(format!(
                "{i},{},{},{},{}",
                num(delta),
                num(canonicity_residual(&p)),
                p.branch.code(),
                delta == chosen
            ))
        })
        .collect()
}

/// Roots of the canonicity condition in `(-pi, pi]`, their residuals and
/// branch classification. `selected` marks the root [`hompss::solve_delta`]
/// returns.
pub fn cmd_solve(config: &RunConfig) -> Result<String, CliError> {
    if config.phi_mode == PhiMode::Explicit {
        return Err(usage("solve computes delta; drop --delta"));
    }
    let r = config.r.unwrap_or(0.0);
    let theta = config.theta.unwrap_or(0.0);
    let gamma = config.gamma.unwrap_or(0.0);
    let phi = match config.branch() {
        Some(b) => build_params(r, theta, gamma, b)?.phi,
        None => config.phi.unwrap_or(0.0),
    };
    let mut text = header(config, &[]);
    match &config.sweep {
        None => {
            text.push_str("root,delta,residual,branch,selected\n");
            for row in solve_rows(r, phi, theta, gamma)? {
                let _ = writeln!(text, "{row}");
            }
        }
        Some(sweep) => {
            let _ = writeln!(text, "{},root,delta,residual,branch,selected", sweep.var);
            for v in sweep.points() {
                let (r, phi, theta) = match sweep.var.as_str() {
                    "r" => (v, phi, theta),
                    "phi" => (r, v, theta),
                    "theta" => (r, phi, v),
                    other => {
                        return Err(usage(format!(
                            "solve sweeps r, phi or theta, not '{other}'"
                        )))
                    }
                };
                for row in solve_rows(r, phi, theta, gamma)? {
                    let _ = writeln!(text, "{},{row}", num(v));
                }
            }
        }
    }
    Ok(text)
}

/// Derived quantities written next to a state's CSV files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateReport {
    pub config: RunConfig,
    pub r: f64,
    pub phi: f64,
    pub delta: f64,
    pub theta: f64,
    pub gamma_mod: f64,
    pub branch: String,
    pub beta_mod: f64,
    pub beta_phase: f64,
    pub canonicity_residual: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub uncertainty_product: f64,
    pub mean_n: f64,
    /// Absent when `<n> = 0`.
    pub g2: Option<f64>,
    pub g4: Option<f64>,
    pub eigen_residual: f64,
    pub cutoff: usize,
    pub truncated_mass: f64,
    pub wavefunction_csv: PathBuf,
    pub fock_csv: PathBuf,
}

/// Writes `<out>.psi.csv`, `<out>.fock.csv` and `<out>.json` (default
/// prefix `state`).
pub fn cmd_state(config: &RunConfig) -> Result<StateReport, CliError> {
    if config.sweep.is_some() {
        return Err(usage("state takes no --sweep; use figure"));
    }
    let spec = config.spec(STATE_DEFAULTS)?;
    let grid = match &config.grid {
        Some(g) => g.grid()?,
        None => default_grid(&spec)?,
    };
    let wf = evaluate_hompss(&spec, &grid)?;
    let fock = match config.cutoff {
        Some(n) => project_spec(&spec, n)?,
        None => project_state(&spec)?,
    };
    let variances = moment_variances(&spec)?;
    let mean_n = mean_photon_number(&fock)?;
    let optional = |r: hompss::Result<f64>| match r {
        Ok(v) => Ok(Some(v)),
        Err(hompss::Error::ZeroMeanPhoton) => Ok(None),
        Err(e) => Err(e),
    };
    let p = spec.params;
    let base = config.out.clone().unwrap_or_else(|| PathBuf::from("state"));
    let report = StateReport {
        config: config.clone(),
        r: p.r,
        phi: p.phi,
        delta: p.delta,
        theta: p.theta,
        gamma_mod: p.gamma_mod,
        branch: p.branch.code().to_string(),
        beta_mod: spec.beta_mod,
        beta_phase: spec.beta_phase,
        canonicity_residual: p.residual(),
        var_x: variances.var_x,
        var_p: variances.var_p,
        uncertainty_product: variances.product,
        mean_n,
        g2: optional(g2(&fock))?,
        g4: optional(g4(&fock))?,
        eigen_residual: eigen_residual(&spec, &fock)?,
        cutoff: fock.cutoff(),
        truncated_mass: fock.deficit(),
        wavefunction_csv: sibling(&base, ".psi.csv"),
        fock_csv: sibling(&base, ".fock.csv"),
    };

    let state_line = format!(
        "state: r={} phi={} delta={} theta={} gamma={} branch={} beta_mod={} beta_phase={}",
        num(p.r),
        num(p.phi),
        num(p.delta),
        num(p.theta),
        num(p.gamma_mod),
        p.branch.code(),
        num(spec.beta_mod),
        num(spec.beta_phase)
    );
    let mut psi = header(
        config,
        &[
            state_line.clone(),
            format!("representation: X_theta, theta={}", num(wf.angle)),
        ],
    )
    .into_bytes();
    wf.write_csv(&mut psi).expect("write to memory");
    write_file(&report.wavefunction_csv, &psi)?;

    let mut amps = header(config, &[state_line, format!("cutoff: {}", fock.cutoff())]).into_bytes();
    fock.write_csv(&mut amps).expect("write to memory");
    write_file(&report.fock_csv, &amps)?;

    let json = serde_json::to_string_pretty(&serde_json::json!({
        "report": &report,
        "branch_mapping": output::branch_mapping(),
    }))
    .expect("report serializes");
    write_file(&sibling(&base, ".json"), json.as_bytes())?;
    Ok(report)
}

/// Output path for a figure: `--out` or `<name>.csv`.
pub(crate) fn figure_path(config: &RunConfig, name: &str) -> PathBuf {
    config
        .out
        .clone()
        .unwrap_or_else(|| Path::new(&format!("{name}.csv")).to_path_buf())
}
