//! Figure-class data sets with the caption parameters as defaults.
//!
//! Flags override the matching field of every default series; series that
//! become identical are merged. Sweep points run in parallel and rows are
//! written in parameter order.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};
use std::fmt::Write as _;
use std::path::PathBuf;

use hompss::quasiprob::{default_q_axes, default_wigner_axes};
use hompss::states::default_grid;
use hompss::{
    evaluate_hompss, g2, g4, mean_photon_number, pnd, project_state, q_function, wigner, Branch,
    Complex64, HompssSpec64, QuasiProbGrid64,
};
use rayon::prelude::*;

use crate::output::{header, num, write_file};
use crate::{figure_path, usage, with_threads, CliError, PhiMode, RunConfig, SweepSpec};

pub const FIGURES: [&str; 9] = [
    "mean-n-vs-gamma",
    "mean-n-vs-theta",
    "qfunc",
    "wigner",
    "pnd",
    "g2-vs-r",
    "g2-vs-theta",
    "g4-vs-r",
    "g4-vs-theta",
];

/// Largest photon number listed by `pnd`.
pub const PND_MAX_N: usize = 40;

/// One state of a figure; the swept variable is overwritten per point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub branch: Branch,
    pub r: f64,
    pub theta: f64,
    pub gamma: f64,
    pub beta_mod: f64,
    pub beta_phase: f64,
}

impl Point {
    fn caption(branch: Branch, r: f64, gamma: f64, theta: f64) -> Self {
        Point {
            branch,
            r,
            theta,
            gamma,
            beta_mod: 3.0,
            beta_phase: 0.0,
        }
    }

    pub fn spec(&self) -> Result<HompssSpec64, CliError> {
        Ok(HompssSpec64::on_branch(
            self.r,
            self.theta,
            self.gamma,
            self.branch,
            Complex64::from_polar(self.beta_mod, self.beta_phase),
        )?)
    }

    fn set(&mut self, var: Var, v: f64) {
        match var {
            Var::R => self.r = v,
            Var::Theta => self.theta = v,
            Var::Gamma => self.gamma = v,
            Var::BetaMod => self.beta_mod = v,
            Var::BetaPhase => self.beta_phase = v,
        }
    }

    fn describe(&self) -> String {
        format!(
            "branch={} r={} theta={} gamma={} beta_mod={} beta_phase={}",
            self.branch.code(),
            num(self.r),
            num(self.theta),
            num(self.gamma),
            num(self.beta_mod),
            num(self.beta_phase)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    R,
    Theta,
    Gamma,
    BetaMod,
    BetaPhase,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::R => "r",
            Var::Theta => "theta",
            Var::Gamma => "gamma",
            Var::BetaMod => "beta_mod",
            Var::BetaPhase => "beta_phase",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "r" => Var::R,
            "theta" => Var::Theta,
            "gamma" => Var::Gamma,
            "beta" | "beta-mod" | "beta_mod" => Var::BetaMod,
            "beta-phase" | "beta_phase" => Var::BetaPhase,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    MeanN,
    G2,
    G4,
}

impl Quantity {
    fn name(self) -> &'static str {
        match self {
            Quantity::MeanN => "mean_n",
            Quantity::G2 => "g2",
            Quantity::G4 => "g4",
        }
    }

    fn eval(self, p: &Point) -> Result<f64, CliError> {
        let fock = project_state(&p.spec()?)?;
        Ok(match self {
            Quantity::MeanN => mean_photon_number(&fock)?,
            Quantity::G2 => g2(&fock)?,
            Quantity::G4 => g4(&fock)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    Sweep {
        var: Var,
        quantity: Quantity,
        sweep: SweepSpec,
    },
    Pnd,
    Q,
    Wigner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub name: String,
    pub kind: Kind,
    pub series: Vec<Point>,
}

fn sweep(var: Var, quantity: Quantity, lo: f64, hi: f64, n: usize) -> Kind {
    Kind::Sweep {
        var,
        quantity,
        sweep: SweepSpec {
            var: var.name().to_string(),
            lo,
            hi,
            n,
        },
    }
}

/// The caption parameter sets (`beta = 3`, `xi = 0`).
pub fn default_figure(name: &str) -> Result<Figure, CliError> {
    use Branch::{MinusMinus as MM, MinusPlus as MP, PlusPlus as PP};
    let c = Point::caption;
    let (kind, series) = match name {
        "mean-n-vs-gamma" => (
            sweep(Var::Gamma, Quantity::MeanN, 0.0, 1.0, 41),
            [0.0, FRAC_PI_6, FRAC_PI_4]
                .map(|t| c(MM, 0.8, 0.0, t))
                .to_vec(),
        ),
        "mean-n-vs-theta" => (
            sweep(Var::Theta, Quantity::MeanN, 0.0, PI, 61),
            [0.0, 0.5, 1.0].map(|g| c(MM, 0.8, g, 0.0)).to_vec(),
        ),
        "qfunc" | "wigner" => (
            if name == "qfunc" {
                Kind::Q
            } else {
                Kind::Wigner
            },
            vec![c(MP, 0.8, 0.4, FRAC_PI_2), c(MP, 0.8, 0.4, FRAC_PI_3)],
        ),
        "pnd" => (
            Kind::Pnd,
            vec![
                c(MM, 0.8, 0.0, 0.0),
                c(MM, 0.8, 0.4, 0.0),
                c(MM, 0.8, 0.5, FRAC_PI_6),
                c(MM, 0.5, 0.5, FRAC_PI_4),
            ],
        ),
        "g2-vs-r" => (
            sweep(Var::R, Quantity::G2, 0.0, 1.0, 41),
            vec![
                c(MM, 0.0, 0.0, 0.0),
                c(MM, 0.0, 0.4, 0.0),
                c(MM, 0.0, 0.05, FRAC_PI_6),
                c(MM, 0.0, 0.5, FRAC_PI_6),
                c(MP, 0.0, 0.05, 4.0 * PI / 9.0),
                c(MP, 0.0, 0.2, FRAC_PI_3),
                c(MP, 0.0, 0.5, FRAC_PI_3),
            ],
        ),
        "g2-vs-theta" => (
            sweep(Var::Theta, Quantity::G2, 0.0, PI, 61),
            vec![
                c(PP, 0.5, 0.4, 0.0),
                c(PP, 0.4, 0.1, 0.0),
                c(PP, 0.1, 0.1, 0.0),
                c(MP, 0.8, 0.1, 0.0),
                c(MP, 0.5, 0.4, 0.0),
            ],
        ),
        "g4-vs-r" => (
            sweep(Var::R, Quantity::G4, 0.0, 1.0, 41),
            vec![
                c(MM, 0.0, 0.0, 0.0),
                c(MM, 0.0, 0.4, 0.0),
                c(MM, 0.0, 0.4, PI / 12.0),
                c(MM, 0.0, 0.4, FRAC_PI_6),
            ],
        ),
        "g4-vs-theta" => (
            sweep(Var::Theta, Quantity::G4, 0.0, PI, 61),
            vec![c(MM, 0.5, 0.1, 0.0), c(MM, 0.1, 0.2, 0.0)],
        ),
        other => return Err(CliError::UnknownFigure(other.to_string())),
    };
    Ok(Figure {
        name: name.to_string(),
        kind,
        series,
    })
}

/// Applies flag overrides to a default figure.
pub fn configure(config: &RunConfig) -> Result<Figure, CliError> {
    let name = config
        .figure
        .as_deref()
        .ok_or_else(|| usage("figure name missing"))?;
    let mut fig = default_figure(name)?;
    if config.phi_mode != PhiMode::Branch {
        return Err(usage(
            "figures use the branch parametrization; drop --phi/--delta",
        ));
    }
    let swept = match &mut fig.kind {
        Kind::Sweep { var, sweep, .. } => {
            if let Some(s) = &config.sweep {
                if Var::parse(&s.var) != Some(*var) {
                    return Err(usage(format!(
                        "{name} sweeps {}, not '{}'",
                        var.name(),
                        s.var
                    )));
                }
                *sweep = SweepSpec {
                    var: var.name().to_string(),
                    ..s.clone()
                };
            }
            Some(*var)
        }
        _ => {
            if config.sweep.is_some() {
                return Err(usage(format!("{name} takes no --sweep")));
            }
            None
        }
    };
    let overrides = [
        (Var::R, config.r),
        (Var::Theta, config.theta),
        (Var::Gamma, config.gamma),
        (Var::BetaMod, config.beta_mod),
        (Var::BetaPhase, config.beta_phase),
    ];
    for (var, value) in overrides {
        let Some(v) = value else { continue };
        if Some(var) == swept {
            return Err(usage(format!(
                "{name} sweeps {}; set its range with --sweep",
                var.name()
            )));
        }
        for p in &mut fig.series {
            p.set(var, v);
        }
    }
    if let Some(b) = config.branch() {
        for p in &mut fig.series {
            p.branch = b;
        }
    }
    let mut unique: Vec<Point> = Vec::new();
    for p in fig.series {
        if !unique.contains(&p) {
            unique.push(p);
        }
    }
    fig.series = unique;
    Ok(fig)
}

/// Evaluates `f` over `items` in parallel; results (and the first error)
/// come back in input order.
fn ordered<I: Sync, R: Send>(
    items: &[I],
    f: impl Fn(&I) -> Result<R, CliError> + Sync + Send,
) -> Result<Vec<R>, CliError> {
    let results: Vec<Result<R, CliError>> = items.par_iter().map(f).collect();
    results.into_iter().collect()
}

/// Files written by one figure run.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureOutput {
    pub csv: PathBuf,
    pub matrices: Vec<PathBuf>,
}

/// Computes a figure and writes its CSV (plus gnuplot matrices for the
/// phase-space figures).
pub fn cmd_figure(config: &RunConfig, threads: Option<usize>) -> Result<FigureOutput, CliError> {
    let fig = configure(config)?;
    with_threads(threads, || write_figure(config, &fig))?
}

fn series_lines(fig: &Figure) -> Vec<String> {
    let mut lines = vec![format!("figure: {}", fig.name)];
    lines.extend(
        fig.series
            .iter()
            .enumerate()
            .map(|(i, p)| format!("series {i}: {}", p.describe())),
    );
    lines
}

fn write_figure(config: &RunConfig, fig: &Figure) -> Result<FigureOutput, CliError> {
    let path = figure_path(config, &fig.name);
    let mut lines = series_lines(fig);
    let mut matrices = Vec::new();
    let body = match &fig.kind {
        Kind::Sweep {
            var,
            quantity,
            sweep,
        } => {
            lines.push(format!(
                "sweep: {}={}:{}:{}",
                var.name(),
                num(sweep.lo),
                num(sweep.hi),
                sweep.n
            ));
            let xs = sweep.points();
            let tasks: Vec<(usize, f64)> = (0..fig.series.len())
                .flat_map(|s| xs.iter().map(move |&x| (s, x)))
                .collect();
            let values = ordered(&tasks, |&(s, x)| {
                let mut p = fig.series[s];
                p.set(*var, x);
                quantity.eval(&p)
            })?;
            let mut body = format!("series,{},{}\n", var.name(), quantity.name());
            for ((s, x), v) in tasks.iter().zip(values) {
                let _ = writeln!(body, "{s},{},{}", num(*x), num(v));
            }
            body
        }
        Kind::Pnd => {
            let dists = ordered(&fig.series, |p| {
                let fock = project_state(&p.spec()?)?;
                Ok(pnd(&fock.truncated(PND_MAX_N + 1)))
            })?;
            let mut body = String::from("series,n,p\n");
            for (s, dist) in dists.iter().enumerate() {
                for (n, p) in dist.iter().enumerate() {
                    let _ = writeln!(body, "{s},{n},{}", num(*p));
                }
            }
            body
        }
        Kind::Q | Kind::Wigner => {
            let grids = ordered(&fig.series, |p| quasi(config, &fig.kind, p))?;
            let mut body = String::new();
            for (s, g) in grids.iter().enumerate() {
                if s == 0 {
                    let _ = writeln!(body, "series,{},{},value", g.axis1.label, g.axis2.label);
                }
                lines.push(format!(
                    "series {s}: min={} max={} integral={} max_discarded_imag={}",
                    num(g.min()),
                    num(g.max()),
                    num(g.integral()),
                    num(g.max_imag)
                ));
                for i in 0..g.axis1.grid.len {
                    for j in 0..g.axis2.grid.len {
                        let _ = writeln!(
                            body,
                            "{s},{},{},{}",
                            num(g.axis1.grid.x(i)),
                            num(g.axis2.grid.x(j)),
                            num(g.value(i, j))
                        );
                    }
                }
            }
            for (s, g) in grids.iter().enumerate() {
                let mpath = path.with_extension(format!("{s}.matrix"));
                let mut text = header(
                    config,
                    &[
                        format!("series {s}: {}", fig.series[s].describe()),
                        format!("{} nonuniform matrix", g.kind),
                    ],
                )
                .into_bytes();
                g.write_gnuplot_matrix(&mut text).expect("write to memory");
                write_file(&mpath, &text)?;
                matrices.push(mpath);
            }
            body
        }
    };
    let mut text = header(config, &lines);
    text.push_str(&body);
    write_file(&path, text.as_bytes())?;
    Ok(FigureOutput {
        csv: path,
        matrices,
    })
}

fn quasi(config: &RunConfig, kind: &Kind, p: &Point) -> Result<QuasiProbGrid64, CliError> {
    let spec = p.spec()?;
    let axes = |defaults: (hompss::Grid64, hompss::Grid64)| -> Result<_, CliError> {
        match &config.grid {
            Some(g) => Ok((g.grid()?, g.grid()?)),
            None => Ok(defaults),
        }
    };
    Ok(match kind {
        Kind::Q => {
            let fock = project_state(&spec)?;
            let (re, im) = axes(default_q_axes(&spec)?)?;
            q_function(&fock, &re, &im)?
        }
        _ => {
            let wf = evaluate_hompss(&spec, &default_grid(&spec)?)?;
            let (x, pax) = axes(default_wigner_axes(&spec, &wf)?)?;
            wigner(&wf, &x, &pax)?
        }
    })
}
