//! Husimi Q and Wigner quasi-probability distributions on 2-D grids.

use std::fmt;
use std::io::{self, Write};

use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{FockVector, DEFICIT_TOL};
use crate::scalar::{cplx, expi, Real, C};
use crate::states::{phase_space_moments, Grid, GridWavefunction, HompssSpec};

/// Which distribution a [`QuasiProbGrid`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuasiKind {
    /// Axes `(Re alpha, Im alpha)`.
    Q,
    /// Axes `(x_theta, p_theta)`.
    Wigner,
}

impl fmt::Display for QuasiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuasiKind::Q => "Q",
            QuasiKind::Wigner => "Wigner",
        })
    }
}

/// A labeled uniform axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis<T> {
    pub label: String,
    pub grid: Grid<T>,
}

/// Samples `values[i * axis2.len + j]` at `(axis1[i], axis2[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiProbGrid<T> {
    pub kind: QuasiKind,
    pub axis1: Axis<T>,
    pub axis2: Axis<T>,
    pub values: Vec<T>,
    /// Largest imaginary part discarded while forming the samples.
    pub max_imag: T,
}

impl<T: Real> QuasiProbGrid<T> {
    pub fn value(&self, i: usize, j: usize) -> T {
        self.values[i * self.axis2.grid.len + j]
    }

    pub fn cell_area(&self) -> T {
        self.axis1.grid.dx * self.axis2.grid.dx
    }

    /// Riemann sum `sum values dA`.
    pub fn integral(&self) -> T {
        self.values.iter().copied().sum::<T>() * self.cell_area()
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Long-format CSV: one `(axis1, axis2, value)` row per sample.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{},{},value", self.axis1.label, self.axis2.label)?;
        for i in 0..self.axis1.grid.len {
            let x = self.axis1.grid.x(i);
            for j in 0..self.axis2.grid.len {
                writeln!(
                    w,
                    "{:e},{:e},{:e}",
                    x,
                    self.axis2.grid.x(j),
                    self.value(i, j)
                )?;
            }
        }
        Ok(())
    }

    /// ASCII gnuplot `nonuniform matrix`: the first row holds the column
    /// count and the `axis1` coordinates, each following row an `axis2`
    /// coordinate and its values. Plot with `plot 'f' nonuniform matrix with image`.
    pub fn write_gnuplot_matrix<W: Write>(&self, mut w: W) -> io::Result<()> {
        let (n1, n2) = (self.axis1.grid.len, self.axis2.grid.len);
        write!(w, "{n1}")?;
        for i in 0..n1 {
            write!(w, " {:e}", self.axis1.grid.x(i))?;
        }
        writeln!(w)?;
        for j in 0..n2 {
            write!(w, "{:e}", self.axis2.grid.x(j))?;
            for i in 0..n1 {
                write!(w, " {:e}", self.value(i, j))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

const DEFAULT_SIDE: usize = 256;
const X_SPAN: f64 = 8.0;
// Cubic phases leave a slowly decaying Airy tail along p.
const P_SPAN: f64 = 20.0;
const Q_SPAN: f64 = 16.0;
const INTEGRAL_TOL: f64 = 1e-6;

fn centred_axis<T: Real>(mean: T, sigma: T, sigmas: f64) -> Result<Grid<T>> {
    let half = sigma * T::lit(sigmas);
    Grid::new(mean - half, mean + half, DEFAULT_SIDE)
}

/// `(Re alpha, Im alpha)` axes spanning sixteen standard deviations of the Q
/// function around its centre.
pub fn default_q_axes<T: Real>(spec: &HompssSpec<T>) -> Result<(Grid<T>, Grid<T>)> {
    let m = phase_space_moments(spec)?.rotated(T::zero());
    let half = T::lit(0.5);
    let s = T::FRAC_1_SQRT_2();
    // Q adds vacuum noise: Var_Q(Re alpha) = (Var X_1 + 1/2)/2.
    let sx = ((m.var_x + half) * half).sqrt();
    let sp = ((m.var_p + half) * half).sqrt();
    Ok((
        centred_axis(m.mean_x * s, sx, Q_SPAN)?,
        centred_axis(m.mean_p * s, sp, Q_SPAN)?,
    ))
}

/// `Q(alpha) = |<alpha|Psi>|^2 / pi` with
/// `<alpha|Psi> = e^{-|alpha|^2/2} sum_n c_n alpha^{*n} / sqrt(n!)`.
pub fn q_function<T: Real>(
    fock: &FockVector<T>,
    re_axis: &Grid<T>,
    im_axis: &Grid<T>,
) -> Result<QuasiProbGrid<T>> {
    fock.check_deficit(T::lit(DEFICIT_TOL))?;
    let big = T::max_value().sqrt().sqrt();
    let values: Vec<T> = (0..re_axis.len)
        .into_par_iter()
        .flat_map_iter(|i| {
            let re = re_axis.x(i);
            (0..im_axis.len).map(move |j| {
                let alpha_c = cplx(re, -im_axis.x(j));
                let mut log_scale = -alpha_c.norm_sqr() / T::lit(2.0);
                let mut term = cplx(T::one(), T::zero());
                let mut acc = C::<T>::zero();
                for (n, &c) in fock.coeffs.iter().enumerate() {
                    if n > 0 {
                        term = term * alpha_c / T::of_usize(n).sqrt();
                        if term.norm() > big {
                            term /= big;
                            acc /= big;
                            log_scale += big.ln();
                        }
                    }
                    acc += c * term;
                }
                (acc * log_scale.exp()).norm_sqr() / T::PI()
            })
        })
        .collect();
    let grid = QuasiProbGrid {
        kind: QuasiKind::Q,
        axis1: Axis {
            label: "re_alpha".into(),
            grid: *re_axis,
        },
        axis2: Axis {
            label: "im_alpha".into(),
            grid: *im_axis,
        },
        values,
        max_imag: T::zero(),
    };
    let missing = (grid.integral() - fock.norm_sqr()).abs();
    if missing > T::lit(INTEGRAL_TOL) {
        return Err(Error::GridTooNarrow(format!(
            "Q integrates to {} on the grid",
            grid.integral()
        )));
    }
    Ok(grid)
}

/// `x_theta` axis on a subset of the wavefunction samples (eight standard
/// deviations around the mean) and a `p_theta` axis (twenty).
pub fn default_wigner_axes<T: Real>(
    spec: &HompssSpec<T>,
    wf: &GridWavefunction<T>,
) -> Result<(Grid<T>, Grid<T>)> {
    let m = phase_space_moments(spec)?;
    let x = centred_axis(m.mean_x, m.var_x.sqrt(), X_SPAN)?;
    let stride = (x.dx / wf.dx).round().to_usize().unwrap_or(1).max(1);
    let first = ((x.x0 - wf.x0) / wf.dx)
        .round()
        .to_isize()
        .unwrap_or(0)
        .max(0) as usize;
    let len = DEFAULT_SIDE.min((wf.len() - 1 - first) / stride + 1);
    let x = Grid {
        x0: wf.x(first),
        dx: wf.dx * T::of_usize(stride),
        len,
    };
    Ok((x, centred_axis(m.mean_p, m.var_p.sqrt(), P_SPAN)?))
}

/// Wigner function on `(x_theta, p_theta)` by direct quadrature of
///
/// ```text
/// W(x, p) = (1/pi) int dy e^{-2 i p y} psi^*(x - y) psi(x + y)
/// ```
///
/// with `y` on the wavefunction grid. Each `x` sample is snapped to the
/// nearest wavefunction node; the returned `x` axis holds the snapped
/// coordinates (so its step is a multiple of the wavefunction step).
pub fn wigner<T: Real>(
    wf: &GridWavefunction<T>,
    x_axis: &Grid<T>,
    p_axis: &Grid<T>,
) -> Result<QuasiProbGrid<T>> {
    let n = wf.len();
    let snap = |x: T| ((x - wf.x0) / wf.dx).round();
    let first = snap(x_axis.x0);
    let stride = (x_axis.dx / wf.dx).round().max(T::one());
    let last = first + stride * T::of_usize(x_axis.len - 1);
    if first < T::zero() || last > T::of_usize(n - 1) {
        return Err(Error::GridTooNarrow(format!(
            "x axis [{}, {}] leaves the wavefunction grid [{}, {}]",
            x_axis.x0,
            x_axis.hi(),
            wf.x0,
            wf.x(n - 1)
        )));
    }
    let first = first.to_usize().expect("checked non-negative");
    let stride = stride.to_usize().expect("positive");
    let rows: Vec<usize> = (0..x_axis.len).map(|r| first + r * stride).collect();
    let peak = wf.psi.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    let cut = peak * peak * T::epsilon() * T::lit(1e-3);
    let dy = wf.dx;
    let scale = dy / T::PI();

    let results: Vec<(Vec<T>, T)> = rows
        .par_iter()
        .map(|&i| {
            let kmax = i.min(n - 1 - i);
            // f_k = psi^*(x - y_k) psi(x + y_k), k = -kmax..=kmax
            let f: Vec<(isize, C<T>)> = (-(kmax as isize)..=kmax as isize)
                .filter_map(|k| {
                    let z = wf.psi[(i as isize - k) as usize].conj()
                        * wf.psi[(i as isize + k) as usize];
                    (z.norm() > cut).then_some((k, z))
                })
                .collect();
            let mut row = Vec::with_capacity(p_axis.len);
            let mut worst_imag = T::zero();
            for j in 0..p_axis.len {
                let p = p_axis.x(j);
                let mut acc = C::<T>::zero();
                for &(k, z) in &f {
                    acc += z * expi(T::lit(-2.0) * p * dy * T::from_isize(k).expect("index"));
                }
                let w = acc * scale;
                worst_imag = worst_imag.max(w.im.abs());
                row.push(w.re);
            }
            (row, worst_imag)
        })
        .collect();

    let mut values = Vec::with_capacity(rows.len() * p_axis.len);
    let mut max_imag = T::zero();
    for (row, imag) in results {
        values.extend(row);
        max_imag = max_imag.max(imag);
    }
    Ok(QuasiProbGrid {
        kind: QuasiKind::Wigner,
        axis1: Axis {
            label: "x_theta".into(),
            grid: Grid {
                x0: wf.x(first),
                dx: wf.dx * T::of_usize(stride),
                len: x_axis.len,
            },
        },
        axis2: Axis {
            label: "p_theta".into(),
            grid: *p_axis,
        },
        values,
        max_imag,
    })
}

/// Axis of a 2-D grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginalAxis {
    /// Density along `axis1`, integrating over `axis2`.
    First,
    /// Density along `axis2`, integrating over `axis1`.
    Second,
}

/// Projection of a Wigner grid onto one of its axes.
pub fn wigner_marginal<T: Real>(grid: &QuasiProbGrid<T>, axis: MarginalAxis) -> Result<Vec<T>> {
    if grid.kind != QuasiKind::Wigner {
        return Err(Error::WrongKind { expected: "Wigner" });
    }
    let (n1, n2) = (grid.axis1.grid.len, grid.axis2.grid.len);
    Ok(match axis {
        MarginalAxis::First => (0..n1)
            .map(|i| (0..n2).map(|j| grid.value(i, j)).sum::<T>() * grid.axis2.grid.dx)
            .collect(),
        MarginalAxis::Second => (0..n2)
            .map(|j| (0..n1).map(|i| grid.value(i, j)).sum::<T>() * grid.axis1.grid.dx)
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::Branch;
    use crate::fock::project_state;
    use crate::states::{default_grid, evaluate_hompss};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn state(theta: f64, gamma: f64, branch: Branch) -> HompssSpec<f64> {
        HompssSpec::on_branch(0.8, theta, gamma, branch, cplx(3.0, 0.0)).unwrap()
    }

    fn wigner_of(spec: &HompssSpec<f64>) -> (GridWavefunction<f64>, QuasiProbGrid<f64>) {
        let wf = evaluate_hompss(spec, &default_grid(spec).unwrap()).unwrap();
        let (x, p) = default_wigner_axes(spec, &wf).unwrap();
        let w = wigner(&wf, &x, &p).unwrap();
        (wf, w)
    }

    /// Principal-axis angle of the second moments of a Q grid.
    fn principal_angle(q: &QuasiProbGrid<f64>) -> f64 {
        let (mut s, mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..q.axis1.grid.len {
            for j in 0..q.axis2.grid.len {
                let (x, y, v) = (q.axis1.grid.x(i), q.axis2.grid.x(j), q.value(i, j));
                s += v;
                sx += v * x;
                sy += v * y;
                sxx += v * x * x;
                syy += v * y * y;
                sxy += v * x * y;
            }
        }
        let (mx, my) = (sx / s, sy / s);
        let (cxx, cyy, cxy) = (sxx / s - mx * mx, syy / s - my * my, sxy / s - mx * my);
        0.5 * (2.0 * cxy).atan2(cxx - cyy)
    }

    #[test]
    fn coherent_q_peak() {
        let beta = cplx(1.5, -0.5);
        let f = project_state(&HompssSpec::coherent(beta)).unwrap();
        let re = Grid::new(-3.0, 6.0, 181).unwrap();
        let im = Grid::new(-5.0, 4.0, 181).unwrap();
        let q = q_function(&f, &re, &im).unwrap();
        // (1.5, -0.5) is node (90, 90)
        assert!((q.value(90, 90) - 1.0 / PI).abs() < 1e-10);
        assert!((q.integral() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn vacuum_q_is_gaussian() {
        let f = project_state(&HompssSpec::<f64>::vacuum()).unwrap();
        let g = Grid::new(-6.0, 6.0, 121).unwrap();
        let q = q_function(&f, &g, &g).unwrap();
        for i in (0..121).step_by(7) {
            for j in (0..121).step_by(5) {
                let a2 = g.x(i).powi(2) + g.x(j).powi(2);
                assert!((q.value(i, j) - (-a2).exp() / PI).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn q_narrow_grid_is_rejected() {
        let f = project_state(&HompssSpec::coherent(cplx(3.0, 0.0))).unwrap();
        let g = Grid::new(-1.0, 1.0, 41).unwrap();
        assert!(matches!(
            q_function(&f, &g, &g),
            Err(Error::GridTooNarrow(_))
        ));
    }

    #[test]
    fn nonlinearity_rotates_and_elongates_q() {
        let angle_of = |gamma: f64| {
            let s = state(FRAC_PI_3, gamma, Branch::MinusPlus);
            let f = project_state(&s).unwrap();
            let (re, im) = default_q_axes(&s).unwrap();
            let q = q_function(&f, &re, &im).unwrap();
            assert!(q.min() >= 0.0);
            assert!((q.integral() - 1.0).abs() < 1e-6);
            principal_angle(&q)
        };
        let (a0, a1) = (angle_of(0.0), angle_of(0.4));
        assert!((a0 - a1).abs() > 0.05, "{a0} vs {a1}");
    }

    #[test]
    fn vacuum_wigner_at_origin() {
        let spec = HompssSpec::<f64>::vacuum();
        let wf = evaluate_hompss(&spec, &Grid::new(-10.0, 10.0, 2001).unwrap()).unwrap();
        let x = Grid::new(0.0, 1.0, 11).unwrap();
        let p = Grid::new(-1.0, 1.0, 21).unwrap();
        let w = wigner(&wf, &x, &p).unwrap();
        assert!((w.value(0, 10) - 1.0 / PI).abs() < 1e-12);
        let (xs, ps) = (w.axis1.grid.x(4), p.x(3));
        assert!((w.value(4, 3) - (-(xs * xs + ps * ps)).exp() / PI).abs() < 1e-12);
    }

    #[test]
    fn gaussian_wigner_is_positive_with_squeezed_variances() {
        let s = state(0.5, 0.0, Branch::PlusPlus);
        let (_, w) = wigner_of(&s);
        assert!(w.min() > -1e-8);
        assert!(w.max_imag < 1e-10);
        assert!((w.integral() - 1.0).abs() < 1e-6);
        let m = phase_space_moments(&s).unwrap();
        let (mut vx, mut vp) = (0.0, 0.0);
        for i in 0..w.axis1.grid.len {
            for j in 0..w.axis2.grid.len {
                let v = w.value(i, j) * w.cell_area();
                vx += v * (w.axis1.grid.x(i) - m.mean_x).powi(2);
                vp += v * (w.axis2.grid.x(j) - m.mean_p).powi(2);
            }
        }
        assert!((vx - (-1.6f64).exp() / 2.0).abs() < 1e-6);
        assert!((vp - 1.6f64.exp() / 2.0).abs() < 1e-6);
    }

    #[test]
    fn nonlinear_state_has_negative_wigner() {
        let s = state(FRAC_PI_2, 0.4, Branch::MinusPlus);
        let (wf, w) = wigner_of(&s);
        assert!(w.min() < -1e-3, "{}", w.min());
        assert!(w.max() <= 1.0 / PI + 1e-8 && w.min() >= -1.0 / PI - 1e-8);
        assert!(w.max_imag < 1e-10);
        assert!((w.integral() - 1.0).abs() < 1e-6);
        let marginal = wigner_marginal(&w, MarginalAxis::First).unwrap();
        let stride = (w.axis1.grid.dx / wf.dx).round() as usize;
        let first = ((w.axis1.grid.x0 - wf.x0) / wf.dx).round() as usize;
        for (r, m) in marginal.iter().enumerate() {
            let d = wf.psi[first + r * stride].norm_sqr();
            assert!((m - d).abs() < 1e-6, "row {r}: {m} vs {d}");
        }
        let other = wigner_marginal(&w, MarginalAxis::Second).unwrap();
        let total: f64 = other.iter().sum::<f64>() * w.axis2.grid.dx;
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn marginal_needs_wigner() {
        let f = project_state(&HompssSpec::<f64>::vacuum()).unwrap();
        let g = Grid::new(-6.0, 6.0, 61).unwrap();
        let q = q_function(&f, &g, &g).unwrap();
        assert_eq!(
            wigner_marginal(&q, MarginalAxis::First),
            Err(Error::WrongKind { expected: "Wigner" })
        );
    }

    #[test]
    fn gnuplot_matrix_layout() {
        let f = project_state(&HompssSpec::<f64>::vacuum()).unwrap();
        let g = Grid::new(-6.0, 6.0, 61).unwrap();
        let q = q_function(&f, &g, &Grid::new(-6.0, 6.0, 31).unwrap()).unwrap();
        let mut out = Vec::new();
        q.write_gnuplot_matrix(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 32);
        assert_eq!(lines[0].split_whitespace().count(), 62);
        assert_eq!(lines[1].split_whitespace().count(), 62);
    }
}
