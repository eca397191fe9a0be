//! Parameters of the nonlinear canonical transformation
//! `b = mu a + nu a^dag + gamma F(X_theta)` and their canonicity checks.
//!
//! With `mu = cosh r`, `nu = sinh r e^{i phi}` and `gamma = |gamma| e^{i delta}`
//! the transformation is canonical iff
//!
//! ```text
//! cosh r cos(theta - delta) - sinh r cos(delta + theta - phi) = 0.
//! ```
//!
//! # Branch sign mapping
//!
//! The fixed branches impose `delta - theta = s1 pi/2` and
//! `delta + theta - phi = s2 pi/2`, hence `phi = 2 theta + (s1 - s2) pi/2`.
//! Substituting into the rotated parameters `mu~ = mu e^{i theta}`,
//! `nu~ = nu e^{-i theta}` gives `mu~ +- nu~ = e^{+-eps r} e^{i theta}` with
//!
//! * `eps = +1` when `s1 = s2` (`phi = 2 theta`): the upper sign of every
//!   `+-`/`-+` pair in the closed forms. `X_theta` is squeezed,
//!   `Var X_theta = e^{-2r}/2`.
//! * `eps = -1` when `s1 != s2` (`phi = 2 theta +- pi`): the lower sign.
//!   `X_theta` is anti-squeezed, `Var X_theta = e^{2r}/2`.
//!
//! The mixing exponent is `Im[b] = s1 sqrt(2) |gamma| e^{eps r}`, so its sign
//! follows `s1` alone. [`Branch::squeeze_sign`] and [`Branch::mixing_sign`]
//! expose `eps` and `s1`.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::scalar::{angular_distance, expi, real, Real, C};

/// Sign choice of one of the two branch conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }
}

/// Which solution family of the canonicity equation the parameters belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `(s1, s2) = (+, +)`
    PlusPlus,
    /// `(s1, s2) = (+, -)`
    PlusMinus,
    /// `(s1, s2) = (-, +)`
    MinusPlus,
    /// `(s1, s2) = (-, -)`
    MinusMinus,
    /// `delta` obtained by solving the transcendental equation directly.
    Generic,
}

impl Branch {
    pub const FIXED: [Branch; 4] = [
        Branch::PlusPlus,
        Branch::PlusMinus,
        Branch::MinusPlus,
        Branch::MinusMinus,
    ];

    pub fn from_signs(s1: Sign, s2: Sign) -> Self {
        match (s1, s2) {
            (Sign::Plus, Sign::Plus) => Branch::PlusPlus,
            (Sign::Plus, Sign::Minus) => Branch::PlusMinus,
            (Sign::Minus, Sign::Plus) => Branch::MinusPlus,
            (Sign::Minus, Sign::Minus) => Branch::MinusMinus,
        }
    }

    pub fn signs(self) -> Option<(Sign, Sign)> {
        match self {
            Branch::PlusPlus => Some((Sign::Plus, Sign::Plus)),
            Branch::PlusMinus => Some((Sign::Plus, Sign::Minus)),
            Branch::MinusPlus => Some((Sign::Minus, Sign::Plus)),
            Branch::MinusMinus => Some((Sign::Minus, Sign::Minus)),
            Branch::Generic => None,
        }
    }

    /// `+1` for the upper sign of the closed forms (`s1 = s2`), `-1` for the lower.
    pub fn squeeze_sign(self) -> Option<i32> {
        self.signs().map(|(s1, s2)| if s1 == s2 { 1 } else { -1 })
    }

    /// Sign of `Im[b]`, equal to `s1`.
    pub fn mixing_sign(self) -> Option<i32> {
        self.signs().map(|(s1, _)| match s1 {
            Sign::Plus => 1,
            Sign::Minus => -1,
        })
    }

    pub fn code(self) -> &'static str {
        match self {
            Branch::PlusPlus => "pp",
            Branch::PlusMinus => "pm",
            Branch::MinusPlus => "mp",
            Branch::MinusMinus => "mm",
            Branch::Generic => "generic",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pp" | "++" => Ok(Branch::PlusPlus),
            "pm" | "+-" => Ok(Branch::PlusMinus),
            "mp" | "-+" => Ok(Branch::MinusPlus),
            "mm" | "--" => Ok(Branch::MinusMinus),
            "generic" => Ok(Branch::Generic),
            other => Err(invalid("branch", format!("unknown branch `{other}`"))),
        }
    }
}

/// Transformation parameters `(r, phi, delta, theta, |gamma|)`.
///
/// `|eta|` is fixed to `1/sqrt(2)`, so the nonlinearity acts on the rotated
/// quadrature `X_theta` itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalParams<T> {
    pub r: T,
    pub phi: T,
    pub delta: T,
    pub theta: T,
    pub gamma_mod: T,
    pub branch: Branch,
}

/// Rotated Bogoliubov coefficients `mu~ = mu e^{i theta}`, `nu~ = nu e^{-i theta}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedParams<T> {
    pub mu_tilde: C<T>,
    pub nu_tilde: C<T>,
}

impl<T: Real> RotatedParams<T> {
    /// `|mu~|^2 - |nu~|^2 - 1`.
    pub fn norm_defect(&self) -> T {
        self.mu_tilde.norm_sqr() - self.nu_tilde.norm_sqr() - T::one()
    }

    /// `Re[mu~ gamma^* - nu~^* gamma]`, zero for a canonical transformation.
    pub fn canonical_defect(&self, gamma: C<T>) -> T {
        (self.mu_tilde * gamma.conj() - self.nu_tilde.conj() * gamma).re
    }
}

fn check_nonneg<T: Real>(name: &'static str, v: T) -> Result<()> {
    if v.is_finite() && v >= T::zero() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and >= 0, got {v}")))
    }
}

fn check_finite<T: Real>(name: &'static str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, "must be finite"))
    }
}

impl<T: Real> CanonicalParams<T> {
    /// Parameters on a fixed branch; see [`build_params`].
    pub fn from_branch(r: T, theta: T, gamma_mod: T, branch: Branch) -> Result<Self> {
        build_params(r, theta, gamma_mod, branch)
    }

    /// Raw parameters; the branch is classified from the angles. No canonicity
    /// check is made here, use [`CanonicalParams::is_canonical`].
    pub fn new(r: T, phi: T, delta: T, theta: T, gamma_mod: T) -> Result<Self> {
        check_nonneg("r", r)?;
        check_nonneg("gamma_mod", gamma_mod)?;
        check_finite("phi", phi)?;
        check_finite("delta", delta)?;
        check_finite("theta", theta)?;
        let mut p = CanonicalParams {
            r,
            phi,
            delta,
            theta,
            gamma_mod,
            branch: Branch::Generic,
        };
        p.branch = classify_branch(&p);
        Ok(p)
    }

    /// Solves for `delta` at fixed `(r, phi, theta)`; see [`solve_delta`].
    pub fn with_solved_delta(r: T, phi: T, theta: T, gamma_mod: T) -> Result<Self> {
        let delta = solve_delta(r, phi, theta)?;
        Self::new(r, phi, delta, theta, gamma_mod)
    }

    pub fn mu(&self) -> C<T> {
        real(self.r.cosh())
    }

    pub fn nu(&self) -> C<T> {
        expi(self.phi) * self.r.sinh()
    }

    pub fn gamma(&self) -> C<T> {
        expi(self.delta) * self.gamma_mod
    }

    /// `eta = e^{i theta} / sqrt(2)`.
    pub fn eta(&self) -> C<T> {
        expi(self.theta) * T::FRAC_1_SQRT_2()
    }

    pub fn residual(&self) -> T {
        canonicity_residual(self)
    }

    /// Residual tolerance scaled with the size of the two cosine terms.
    pub fn tolerance(&self) -> T {
        T::loose_tol() * self.r.exp()
    }

    pub fn is_canonical(&self) -> bool {
        self.residual().abs() <= self.tolerance()
    }

    pub fn ensure_canonical(&self) -> Result<()> {
        if self.is_canonical() {
            Ok(())
        } else {
            Err(Error::NotCanonical {
                residual: self.residual().to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    pub fn rotated(&self) -> Result<RotatedParams<T>> {
        rotate_params(self)
    }
}

/// Parameters on the branch `delta - theta = s1 pi/2`, `delta + theta - phi = s2 pi/2`.
///
/// Angles are returned wrapped into `(-pi, pi]`.
pub fn build_params<T: Real>(
    r: T,
    theta: T,
    gamma_mod: T,
    branch: Branch,
) -> Result<CanonicalParams<T>> {
    check_nonneg("r", r)?;
    check_nonneg("gamma_mod", gamma_mod)?;
    check_finite("theta", theta)?;
    let (s1, s2) = branch
        .signs()
        .ok_or_else(|| invalid("branch", "a fixed (s1, s2) branch is required"))?;
    let half_pi = T::FRAC_PI_2();
    let delta = theta + s1.value::<T>() * half_pi;
    let phi = delta + theta - s2.value::<T>() * half_pi;
    Ok(CanonicalParams {
        r,
        phi: phi.wrap_angle(),
        delta: delta.wrap_angle(),
        theta: theta.wrap_angle(),
        gamma_mod,
        branch,
    })
}

/// `cosh r cos(theta - delta) - sinh r cos(delta + theta - phi)`.
pub fn canonicity_residual<T: Real>(p: &CanonicalParams<T>) -> T {
    residual_at(p.r, p.phi, p.theta, p.delta)
}

#[inline]
fn residual_at<T: Real>(r: T, phi: T, theta: T, delta: T) -> T {
    r.cosh() * (theta - delta).cos() - r.sinh() * (delta + theta - phi).cos()
}

/// Rotated parameters, after checking canonicity.
pub fn rotate_params<T: Real>(p: &CanonicalParams<T>) -> Result<RotatedParams<T>> {
    p.ensure_canonical()?;
    Ok(RotatedParams {
        mu_tilde: p.mu() * expi(p.theta),
        nu_tilde: p.nu() * expi(-p.theta),
    })
}

fn classify_branch<T: Real>(p: &CanonicalParams<T>) -> Branch {
    let tol = T::lit(1e-9);
    let half_pi = T::FRAC_PI_2();
    let near = |angle: T, target: T| angular_distance(angle, target) <= tol;
    let first = p.delta - p.theta;
    let second = p.delta + p.theta - p.phi;
    let s1 = if near(first, half_pi) {
        Sign::Plus
    } else if near(first, -half_pi) {
        Sign::Minus
    } else {
        return Branch::Generic;
    };
    let s2 = if near(second, half_pi) {
        Sign::Plus
    } else if near(second, -half_pi) {
        Sign::Minus
    } else {
        return Branch::Generic;
    };
    Branch::from_signs(s1, s2)
}

/// Number of bracketing sub-intervals scanned on `(-pi, pi]`.
pub const SCAN_INTERVALS: usize = 64;

/// Solves the canonicity equation for `delta` and returns the root closest to
/// the `(-, +)` branch value `theta - pi/2`.
pub fn solve_delta<T: Real>(r: T, phi: T, theta: T) -> Result<T> {
    let roots = solve_delta_all(r, phi, theta)?;
    let target = (theta - T::FRAC_PI_2()).wrap_angle();
    roots
        .into_iter()
        .min_by(|a, b| {
            angular_distance(*a, target)
                .partial_cmp(&angular_distance(*b, target))
                .expect("finite roots")
        })
        .ok_or(Error::NoRoot)
}

/// Every root of the canonicity equation in `(-pi, pi]`, ascending.
pub fn solve_delta_all<T: Real>(r: T, phi: T, theta: T) -> Result<Vec<T>> {
    check_nonneg("r", r)?;
    check_finite("phi", phi)?;
    check_finite("theta", theta)?;
    let degenerate_tol = T::lit(1e-12);
    if phi.wrap_angle().abs() <= degenerate_tol && theta.sin().abs() <= degenerate_tol {
        return Err(Error::Degenerate {
            roots: [-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2],
        });
    }

    let f = |d: T| residual_at(r, phi, theta, d);
    let pi = T::PI();
    let step = T::TAU() / T::of_usize(SCAN_INTERVALS);
    let mut roots: Vec<T> = Vec::new();
    let mut lo = -pi;
    let mut f_lo = f(lo);
    for k in 1..=SCAN_INTERVALS {
        let hi = if k == SCAN_INTERVALS {
            pi
        } else {
            -pi + step * T::of_usize(k)
        };
        let f_hi = f(hi);
        if f_hi == T::zero() {
            roots.push(hi);
        } else if f_lo != T::zero() && (f_lo < T::zero()) != (f_hi < T::zero()) {
            roots.push(bisect(&f, lo, hi, f_lo));
        }
        lo = hi;
        f_lo = f_hi;
    }
    // -pi and pi coincide; a root there is reported once as pi.
    if f(-pi) == T::zero() && !roots.contains(&pi) {
        roots.push(pi);
    }

    let mut roots: Vec<T> = roots.into_iter().map(|x| x.wrap_angle()).collect();
    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    roots.dedup_by(|a, b| angular_distance(*a, *b) < T::lit(1e-10));
    if roots.is_empty() {
        Err(Error::NoRoot)
    } else {
        Ok(roots)
    }
}

/// Bisection on a sign-changing bracket, refined until the midpoint no longer
/// moves (well below the `1e-13` width target).
fn bisect<T: Real, F: Fn(T) -> T>(f: &F, mut lo: T, mut hi: T, mut f_lo: T) -> T {
    let two = T::lit(2.0);
    for _ in 0..200 {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == T::zero() {
            return mid;
        }
        if (f_mid < T::zero()) == (f_lo < T::zero()) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}
