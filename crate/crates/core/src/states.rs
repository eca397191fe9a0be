//! HOMPSS wavefunctions on quadrature grids.
//!
//! In the `X_theta` representation the eigenvalue equation `b psi = beta psi`
//! becomes the first order ODE `psi' = -(a x + b F(x) - c) psi` with
//!
//! ```text
//! a = (mu~ + nu~)/(mu~ - nu~),  b = sqrt(2) gamma/(mu~ - nu~),  c = sqrt(2) beta/(mu~ - nu~).
//! ```
//!
//! Canonicity is exactly `Re b = 0`, so `|psi|^2` is always the Gaussian
//! `exp(-Re a (x - Re c/Re a)^2)` and the nonlinearity only enters the phase
//! through `G(x) = int_0^x F`.

use std::io::{self, Write};

use num_traits::Zero;
use rayon::prelude::*;

use crate::canonical::{build_params, Branch, CanonicalParams};
use crate::error::{invalid, Error, Result};
use crate::scalar::{cplx, erfc, expi, real, Real, C};

/// Polynomial nonlinearity `F(x) = sum_k c_k x^k` with real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Real> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("nonlinearity", "coefficients must be finite"));
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Ok(Polynomial { coeffs })
    }

    /// `F(x) = x^2`.
    pub fn quadratic() -> Self {
        Polynomial {
            coeffs: vec![T::zero(), T::zero(), T::one()],
        }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_quadratic(&self) -> bool {
        self.coeffs.len() == 3
            && self.coeffs[0].is_zero()
            && self.coeffs[1].is_zero()
            && self.coeffs[2] == T::one()
    }

    pub fn eval(&self, x: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * x + c)
    }

    /// Antiderivative vanishing at 0.
    pub fn primitive(&self) -> Polynomial<T> {
        let mut out = vec![T::zero(); self.coeffs.len() + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            out[k + 1] = c / T::of_usize(k + 1);
        }
        Polynomial { coeffs: out }
    }

    pub fn derivative(&self) -> Polynomial<T> {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * T::of_usize(k))
            .collect();
        Polynomial { coeffs }
    }
}

/// A canonical transformation together with the eigenvalue `beta = |beta| e^{i xi}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HompssSpec<T> {
    pub params: CanonicalParams<T>,
    pub beta_mod: T,
    pub beta_phase: T,
    pub nonlinearity: Polynomial<T>,
}

impl<T: Real> HompssSpec<T> {
    pub fn new(params: CanonicalParams<T>, beta_mod: T, beta_phase: T) -> Result<Self> {
        params.ensure_canonical()?;
        if !(beta_mod.is_finite() && beta_mod >= T::zero()) {
            return Err(invalid("beta_mod", "must be finite and >= 0"));
        }
        if !beta_phase.is_finite() {
            return Err(invalid("beta_phase", "must be finite"));
        }
        Ok(HompssSpec {
            params,
            beta_mod,
            beta_phase,
            nonlinearity: Polynomial::quadratic(),
        })
    }

    /// Branch-built spec with the quadratic nonlinearity.
    pub fn on_branch(r: T, theta: T, gamma_mod: T, branch: Branch, beta: C<T>) -> Result<Self> {
        Self::new(
            build_params(r, theta, gamma_mod, branch)?,
            beta.norm(),
            beta.arg(),
        )
    }

    /// Coherent state `|beta>`.
    pub fn coherent(beta: C<T>) -> Self {
        Self::on_branch(T::zero(), T::zero(), T::zero(), Branch::PlusPlus, beta)
            .expect("identity transformation is canonical")
    }

    pub fn vacuum() -> Self {
        Self::coherent(C::zero())
    }

    pub fn with_nonlinearity(mut self, f: Polynomial<T>) -> Self {
        self.nonlinearity = f;
        self
    }

    pub fn beta(&self) -> C<T> {
        expi(self.beta_phase) * self.beta_mod
    }

    pub fn is_quadratic(&self) -> bool {
        self.nonlinearity.is_quadratic()
    }
}

/// Coefficients of the `X_theta`-representation ODE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavefunctionCoefficients<T> {
    pub a: C<T>,
    pub b: C<T>,
    pub c: C<T>,
}

impl<T: Real> WavefunctionCoefficients<T> {
    /// Centre and standard deviation of the Gaussian density `|psi|^2`.
    pub fn envelope(&self) -> (T, T) {
        let mean = self.c.re / self.a.re;
        let sigma = (T::lit(2.0) * self.a.re).sqrt().recip();
        (mean, sigma)
    }
}

pub fn wavefunction_coefficients<T: Real>(
    spec: &HompssSpec<T>,
) -> Result<WavefunctionCoefficients<T>> {
    let rot = spec.params.rotated()?;
    let diff = rot.mu_tilde - rot.nu_tilde;
    let s2 = T::SQRT_2();
    Ok(WavefunctionCoefficients {
        a: (rot.mu_tilde + rot.nu_tilde) / diff,
        b: spec.params.gamma() * s2 / diff,
        c: spec.beta() * s2 / diff,
    })
}

/// Uniform sampling axis `x_i = x0 + i dx`, `i < len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    pub x0: T,
    pub dx: T,
    pub len: usize,
}

impl<T: Real> Grid<T> {
    /// `len` points spanning `[lo, hi]` inclusive.
    pub fn new(lo: T, hi: T, len: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(invalid("grid", "need finite lo < hi"));
        }
        if len < 2 {
            return Err(invalid("grid", "need at least 2 points"));
        }
        Ok(Grid {
            x0: lo,
            dx: (hi - lo) / T::of_usize(len - 1),
            len,
        })
    }

    /// Points `lo, lo + step, ...` not exceeding `hi` (up to rounding).
    pub fn from_step(lo: T, hi: T, step: T) -> Result<Self> {
        if !(step.is_finite() && step > T::zero()) {
            return Err(invalid("grid", "step must be > 0"));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(invalid("grid", "need finite lo < hi"));
        }
        let n = ((hi - lo) / step + T::lit(1e-9))
            .floor()
            .to_usize()
            .unwrap_or(0)
            + 1;
        if n < 2 {
            return Err(invalid("grid", "range shorter than one step"));
        }
        Ok(Grid {
            x0: lo,
            dx: step,
            len: n,
        })
    }

    pub fn x(&self, i: usize) -> T {
        self.x0 + self.dx * T::of_usize(i)
    }

    pub fn hi(&self) -> T {
        self.x(self.len - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.len).map(move |i| self.x(i))
    }
}

/// Complex amplitudes on a uniform axis of the quadrature `X_angle`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction<T> {
    pub angle: T,
    pub x0: T,
    pub dx: T,
    pub psi: Vec<C<T>>,
}

impl<T: Real> GridWavefunction<T> {
    pub fn grid(&self) -> Grid<T> {
        Grid {
            x0: self.x0,
            dx: self.dx,
            len: self.psi.len(),
        }
    }

    pub fn x(&self, i: usize) -> T {
        self.x0 + self.dx * T::of_usize(i)
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn density(&self) -> Vec<T> {
        self.psi.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `sum |psi|^2 dx`.
    pub fn norm_sqr(&self) -> T {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<T>() * self.dx
    }

    /// `sum conj(self) other dx` on a shared grid.
    pub fn inner(&self, other: &Self) -> C<T> {
        assert_eq!(self.len(), other.len(), "grids differ");
        self.psi
            .iter()
            .zip(&other.psi)
            .fold(C::zero(), |acc, (a, b)| acc + a.conj() * b)
            * self.dx
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,re_psi,im_psi")?;
        for (i, z) in self.psi.iter().enumerate() {
            writeln!(w, "{:e},{:e},{:e}", self.x(i), z.re, z.im)?;
        }
        Ok(())
    }
}

const ENVELOPE_SIGMAS: f64 = 10.0;
const DEFAULT_POINTS: usize = 4096;
const MAX_POINTS: usize = 1 << 20;
const COVERAGE_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-8;

fn norm_tolerance<T: Real>() -> T {
    T::lit(NORM_TOL).max(T::epsilon() * T::lit(256.0))
}

/// Largest `|d arg psi / dx|` over a sampling of `[lo, hi]`.
fn max_wavenumber<T: Real>(
    coef: &WavefunctionCoefficients<T>,
    f: &Polynomial<T>,
    lo: T,
    hi: T,
) -> T {
    let n = 1024;
    let step = (hi - lo) / T::of_usize(n);
    (0..=n)
        .map(|i| {
            let x = lo + step * T::of_usize(i);
            (coef.a * x + coef.b * f.eval(x) - coef.c).im.abs()
        })
        .fold(T::zero(), T::max)
}

/// Number of points needed on `[lo, hi]` so that a phase with local
/// wavenumber up to `k` advances by at most `pi/4` per step.
fn points_for<T: Real>(lo: T, hi: T, k: T, at_least: usize) -> usize {
    let need = ((hi - lo) * k * T::lit(4.0) / T::PI())
        .ceil()
        .to_usize()
        .unwrap_or(MAX_POINTS);
    need.saturating_add(1).clamp(at_least, MAX_POINTS)
}

/// `x in [mean - 10 sigma, mean + 10 sigma]` with 4096 points, refined when
/// the phase would be undersampled.
pub fn default_grid<T: Real>(spec: &HompssSpec<T>) -> Result<Grid<T>> {
    let coef = wavefunction_coefficients(spec)?;
    let (mean, sigma) = coef.envelope();
    let half = sigma * T::lit(ENVELOPE_SIGMAS);
    let (lo, hi) = (mean - half, mean + half);
    let k = max_wavenumber(&coef, &spec.nonlinearity, lo, hi);
    Grid::new(lo, hi, points_for(lo, hi, k, DEFAULT_POINTS))
}

/// Grid for projecting onto Fock levels `n < levels`: the state envelope,
/// sampled finely enough for both the state phase and the Hermite functions.
pub fn fock_grid<T: Real>(spec: &HompssSpec<T>, levels: usize) -> Result<Grid<T>> {
    let coef = wavefunction_coefficients(spec)?;
    let (mean, sigma) = coef.envelope();
    let half = sigma * T::lit(ENVELOPE_SIGMAS);
    let (lo, hi) = (mean - half, mean + half);
    let k_state = max_wavenumber(&coef, &spec.nonlinearity, lo, hi);
    let k_hermite = T::of_usize(2 * levels + 1).sqrt();
    Grid::new(
        lo,
        hi,
        points_for(lo, hi, k_state + k_hermite, DEFAULT_POINTS),
    )
}

fn check_coverage<T: Real>(mean: T, a_re: T, grid: &Grid<T>) -> Result<()> {
    let scale = a_re.sqrt();
    let half = T::lit(0.5);
    let outside = half * erfc((mean - grid.x0) * scale) + half * erfc((grid.hi() - mean) * scale);
    if outside > T::lit(COVERAGE_TOL) {
        return Err(Error::GridTooNarrow(format!(
            "envelope mass {:e} outside [{}, {}]",
            outside.to_f64().unwrap_or(f64::NAN),
            grid.x0,
            grid.hi()
        )));
    }
    Ok(())
}

// Negated so that a NaN defect also fails.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn check_norm<T: Real>(wf: &GridWavefunction<T>) -> Result<()> {
    let defect = (wf.norm_sqr() - T::one()).abs();
    if !(defect <= norm_tolerance::<T>()) {
        return Err(Error::GridUnderResolved {
            defect: defect.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// HOMPSS wavefunction in the `X_theta` representation.
pub fn evaluate_hompss<T: Real>(
    spec: &HompssSpec<T>,
    grid: &Grid<T>,
) -> Result<GridWavefunction<T>> {
    let coef = wavefunction_coefficients(spec)?;
    let (mean, _) = coef.envelope();
    check_coverage(mean, coef.a.re, grid)?;
    let g = spec.nonlinearity.primitive();
    let half = T::lit(0.5);
    let norm = (coef.a.re / T::PI()).powf(T::lit(0.25));
    let psi: Vec<C<T>> = (0..grid.len)
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            let d = x - mean;
            let modulus = norm * (-half * coef.a.re * d * d).exp();
            let phase = -(coef.b.im * g.eval(x) + half * coef.a.im * x * x - coef.c.im * x);
            expi(phase) * modulus
        })
        .collect();
    let wf = GridWavefunction {
        angle: spec.params.theta,
        x0: grid.x0,
        dx: grid.dx,
        psi,
    };
    check_norm(&wf)?;
    Ok(wf)
}

fn near<T: Real>(a: T, b: T) -> bool {
    (a - b).abs() <= T::lit(1e-12).max(T::epsilon() * T::lit(8.0))
}

/// Single-quadrature multiphoton squeezed state, `theta in {0, pi/2}`, `phi = 0`.
///
/// Written in terms of `alpha = mu beta - nu beta^*` with
/// `r_1 = r`, `r_2 = -r`, `g_1 = Im gamma`, `g_2 = -Re gamma`,
/// `x_1 = sqrt(2) alpha_1`, `x_2 = sqrt(2) alpha_2`,
/// `c_1 = sqrt(2) alpha_2`, `c_2 = -sqrt(2) alpha_1`:
///
/// ```text
/// psi(x) = (pi e^{-2 r_i})^{-1/4} exp(-(x - x_i)^2 / (2 e^{-2 r_i}))
///          exp(i [c_i x - sqrt(2) e^{r_i} g_i G(x)])
/// ```
pub fn evaluate_sqmpss<T: Real>(
    spec: &HompssSpec<T>,
    grid: &Grid<T>,
) -> Result<GridWavefunction<T>> {
    let p = &spec.params;
    let theta = p.theta.wrap_angle();
    let which = if near(theta, T::zero()) {
        1
    } else if near(theta, T::FRAC_PI_2()) {
        2
    } else {
        return Err(Error::WrongAngle {
            theta: theta.to_f64().unwrap_or(f64::NAN),
        });
    };
    if !near(p.phi.wrap_angle(), T::zero()) {
        return Err(Error::WrongAngle {
            theta: theta.to_f64().unwrap_or(f64::NAN),
        });
    }
    p.ensure_canonical()?;
    let beta = spec.beta();
    let (mu, nu) = (p.r.cosh(), p.r.sinh());
    let alpha = beta * mu - beta.conj() * nu;
    let s2 = T::SQRT_2();
    let gamma = p.gamma();
    let (r_i, g_i, centre, c_i) = if which == 1 {
        (p.r, gamma.im, s2 * alpha.re, s2 * alpha.im)
    } else {
        (-p.r, -gamma.re, s2 * alpha.im, -s2 * alpha.re)
    };
    let var2 = (T::lit(-2.0) * r_i).exp();
    // |psi|^2 is exp(-(x - centre)^2 / var2), i.e. Re a = 1/var2.
    check_coverage(centre, var2.recip(), grid)?;
    let g = spec.nonlinearity.primitive();
    let norm = (T::PI() * var2).powf(T::lit(-0.25));
    let k = s2 * r_i.exp() * g_i;
    let two = T::lit(2.0);
    let psi: Vec<C<T>> = (0..grid.len)
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            let d = x - centre;
            expi(c_i * x - k * g.eval(x)) * (norm * (-d * d / (two * var2)).exp())
        })
        .collect();
    let wf = GridWavefunction {
        angle: theta,
        x0: grid.x0,
        dx: grid.dx,
        psi,
    };
    check_norm(&wf)?;
    Ok(wf)
}

/// Re-expresses a wavefunction in the representation of `X_target` using the
/// Mehler kernel for the rotation by `alpha = angle - target`:
///
/// ```text
/// K(x, y) = [pi (1 - e^{2 i alpha})]^{-1/2} exp(i x y / sin(alpha) - i cot(alpha) (x^2 + y^2) / 2)
/// ```
pub fn rotate_representation<T: Real>(
    wf: &GridWavefunction<T>,
    target: T,
    out: &Grid<T>,
) -> Result<GridWavefunction<T>> {
    let alpha = wf.angle - target;
    let s = alpha.sin();
    if s.abs() <= T::lit(1e-9) {
        return Err(Error::DegenerateAngle);
    }
    let cot = alpha.cos() / s;
    let half = T::lit(0.5);
    let pref = (real::<T>(T::one()) - expi(T::lit(2.0) * alpha)) * T::PI();
    let pref = pref.sqrt().inv() * wf.dx;
    let weighted: Vec<C<T>> = wf
        .psi
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let y = wf.x(k);
            p * expi(-half * cot * y * y)
        })
        .collect();
    let y0 = wf.x0;
    let dy = wf.dx;
    let psi: Vec<C<T>> = (0..out.len)
        .into_par_iter()
        .map(|j| {
            let x = out.x(j);
            let step = expi(x * dy / s);
            // Restart the phase recurrence periodically to bound drift.
            let mut acc = C::<T>::zero();
            let mut phase = expi(x * y0 / s);
            for (k, &w) in weighted.iter().enumerate() {
                if k % 256 == 0 {
                    phase = expi(x * (y0 + dy * T::of_usize(k)) / s);
                }
                acc += w * phase;
                phase *= step;
            }
            acc * pref * expi(-half * cot * x * x)
        })
        .collect();
    Ok(GridWavefunction {
        angle: target,
        x0: out.x0,
        dx: out.dx,
        psi,
    })
}

/// Default axis for the `X_1` representation: mean `+- 12` standard
/// deviations of `X_1`, widened to cover the classical image
/// `x cos theta - p(x) sin theta` of the envelope (cubic phases give `X_1` a
/// long Airy tail). At least 2048 points, more if the phase requires it.
pub fn default_x1_grid<T: Real>(spec: &HompssSpec<T>) -> Result<Grid<T>> {
    let m = phase_space_moments(spec)?.rotated(-spec.params.theta);
    let half = m.var_x.sqrt() * T::lit(12.0);
    let (mut lo, mut hi) = (m.mean_x - half, m.mean_x + half);
    let mut k = m.mean_p.abs() + T::lit(12.0) * m.var_p.sqrt();

    let coef = wavefunction_coefficients(spec)?;
    let (mean, sigma) = coef.envelope();
    let (s, c) = spec.params.theta.sin_cos();
    let width = (sigma * sigma * c * c + s * s / (T::lit(4.0) * sigma * sigma)).sqrt();
    let n = 1024;
    for i in 0..=n {
        let x =
            mean + sigma * T::lit(8.0) * (T::lit(2.0) * T::of_usize(i) / T::of_usize(n) - T::one());
        let p = -(coef.a * x + coef.b * spec.nonlinearity.eval(x) - coef.c).im;
        let y = x * c - p * s;
        lo = lo.min(y - T::lit(6.0) * width);
        hi = hi.max(y + T::lit(6.0) * width);
        k = k.max((x * s + p * c).abs() + T::lit(6.0) / width);
    }
    Grid::new(lo, hi, points_for(lo, hi, k, 2048))
}

/// The state in the `X_1` representation, obtained from the `X_theta`
/// wavefunction with the rotation kernel.
pub fn x1_representation<T: Real>(
    spec: &HompssSpec<T>,
    grid: &Grid<T>,
) -> Result<GridWavefunction<T>> {
    let theta = spec.params.theta;
    if theta.sin().abs() <= T::lit(1e-9) {
        return Err(Error::DegenerateAngle);
    }
    let coef = wavefunction_coefficients(spec)?;
    let (mean, sigma) = coef.envelope();
    let half = sigma * T::lit(ENVELOPE_SIGMAS);
    let (lo, hi) = (mean - half, mean + half);
    let x_max = grid.x0.abs().max(grid.hi().abs());
    let k = max_wavenumber(&coef, &spec.nonlinearity, lo, hi)
        + (x_max + lo.abs().max(hi.abs()) * theta.cos().abs()) / theta.sin().abs();
    let source = Grid::new(lo, hi, points_for(lo, hi, k, DEFAULT_POINTS))?;
    let wf = evaluate_hompss(spec, &source)?;
    let out = rotate_representation(&wf, T::zero(), grid)?;
    let defect = (out.norm_sqr() - T::one()).abs();
    if defect > T::lit(1e-6).max(T::epsilon() * T::lit(256.0)) {
        return Err(Error::GridTooNarrow(format!(
            "x1 axis [{}, {}] misses norm {:e}",
            grid.x0,
            grid.hi(),
            defect.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(out)
}

/// First and second moments of `(X_angle, P_angle)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceMoments<T> {
    pub angle: T,
    pub mean_x: T,
    pub mean_p: T,
    pub var_x: T,
    pub var_p: T,
    /// Symmetrized covariance `<(XP + PX)/2> - <X><P>`.
    pub cov_xp: T,
}

impl<T: Real> PhaseSpaceMoments<T> {
    /// Moments of the pair `(X_{angle + t}, P_{angle + t})` for `target = angle + t`.
    pub fn rotated(&self, target: T) -> Self {
        let t = target - self.angle;
        let (s, c) = t.sin_cos();
        let two = T::lit(2.0);
        PhaseSpaceMoments {
            angle: target,
            mean_x: c * self.mean_x + s * self.mean_p,
            mean_p: -s * self.mean_x + c * self.mean_p,
            var_x: c * c * self.var_x + s * s * self.var_p + two * s * c * self.cov_xp,
            var_p: s * s * self.var_x + c * c * self.var_p - two * s * c * self.cov_xp,
            cov_xp: (c * c - s * s) * self.cov_xp + s * c * (self.var_p - self.var_x),
        }
    }

    /// `<a^dag a> = (<X^2> + <P^2> - 1)/2`.
    pub fn mean_photon_number(&self) -> T {
        let two = T::lit(2.0);
        (self.var_x + self.mean_x * self.mean_x + self.var_p + self.mean_p * self.mean_p - T::one())
            / two
    }
}

fn cpoly_mul<T: Real>(p: &[C<T>], q: &[C<T>]) -> Vec<C<T>> {
    let mut out = vec![C::<T>::zero(); p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        for (j, &b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// `E[p(x)]` for `x ~ N(mean, var)`.
fn gaussian_expectation<T: Real>(p: &[C<T>], mean: T, var: T) -> C<T> {
    let mut moments = vec![T::one(), mean];
    while moments.len() < p.len() {
        let k = moments.len();
        let next = mean * moments[k - 1] + T::of_usize(k - 1) * var * moments[k - 2];
        moments.push(next);
    }
    p.iter()
        .zip(&moments)
        .fold(C::<T>::zero(), |acc, (&c, &m)| acc + c * m)
}

/// Exact moments in the `X_theta` frame.
///
/// `P psi = i (a x + b F(x) - c) psi`, so every moment is a polynomial
/// expectation over the Gaussian density.
pub fn phase_space_moments<T: Real>(spec: &HompssSpec<T>) -> Result<PhaseSpaceMoments<T>> {
    let coef = wavefunction_coefficients(spec)?;
    let (mean, sigma) = coef.envelope();
    let var = sigma * sigma;
    let i = cplx(T::zero(), T::one());
    let f = spec.nonlinearity.coeffs();
    let mut g = vec![C::zero(); f.len().max(2)];
    g[0] = -coef.c;
    g[1] = coef.a;
    for (k, &fk) in f.iter().enumerate() {
        g[k] += coef.b * fk;
    }
    let g: Vec<C<T>> = g.into_iter().map(|z| z * i).collect();
    let g_conj: Vec<C<T>> = g.iter().map(|z| z.conj()).collect();
    let mean_p = gaussian_expectation(&g, mean, var).re;
    let p2 = gaussian_expectation(&cpoly_mul(&g, &g_conj), mean, var).re;
    let x_poly = [C::zero(), real(T::one())];
    let xp = gaussian_expectation(&cpoly_mul(&x_poly, &g), mean, var).re;
    Ok(PhaseSpaceMoments {
        angle: spec.params.theta,
        mean_x: mean,
        mean_p,
        var_x: var,
        var_p: p2 - mean_p * mean_p,
        cov_xp: xp - mean * mean_p,
    })
}
