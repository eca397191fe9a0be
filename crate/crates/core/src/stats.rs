//! Quadrature uncertainties, photon-number moments and normalized
//! correlation functions.

use crate::canonical::{Branch, CanonicalParams};
use crate::error::{invalid, Error, Result};
use crate::fock::{quadrature_matrix, FockVector, DEFICIT_TOL};
use crate::scalar::{angular_distance, expi, Real, C};
use crate::states::{phase_space_moments, HompssSpec};

/// Variances of the homodyne pair `(X_theta, P_theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyReport<T> {
    pub var_x: T,
    pub var_p: T,
    pub product: T,
    /// `product - 1/4`
    pub heisenberg_excess: T,
}

impl<T: Real> UncertaintyReport<T> {
    fn from_variances(var_x: T, var_p: T) -> Self {
        let product = var_x * var_p;
        UncertaintyReport {
            var_x,
            var_p,
            product,
            heisenberg_excess: product - T::lit(0.25),
        }
    }
}

fn closed_form_sign<T: Real>(spec: &HompssSpec<T>) -> Result<T> {
    if !spec.is_quadratic() {
        return Err(Error::NotQuadratic);
    }
    let eps = match spec.params.branch {
        Branch::Generic => return Err(Error::GenericBranch),
        b => b.squeeze_sign().expect("fixed branch"),
    };
    Ok(if eps > 0 { T::one() } else { -T::one() })
}

/// `{1 + 4|beta|^2 + 4 Re[e^{-2 i theta} beta^2]}`
fn mixing_bracket<T: Real>(spec: &HompssSpec<T>) -> T {
    let beta = spec.beta();
    let four = T::lit(4.0);
    T::one()
        + four * beta.norm_sqr()
        + four * (expi(T::lit(-2.0) * spec.params.theta) * beta * beta).re
}

/// Closed-form variances for `F(x) = x^2` on a fixed branch:
///
/// ```text
/// var X = e^{-2 eps r}/2
/// var P = e^{2 eps r}/2 + e^{-2 eps r} |gamma|^2 {1 + 4|beta|^2 + 4 Re[e^{-2 i theta} beta^2]}
/// ```
pub fn quadrature_variances<T: Real>(spec: &HompssSpec<T>) -> Result<UncertaintyReport<T>> {
    let eps = closed_form_sign(spec)?;
    let p = &spec.params;
    let half = T::lit(0.5);
    let two_r = T::lit(2.0) * eps * p.r;
    let var_x = (-two_r).exp() * half;
    let var_p =
        two_r.exp() * half + (-two_r).exp() * p.gamma_mod * p.gamma_mod * mixing_bracket(spec);
    Ok(UncertaintyReport::from_variances(var_x, var_p))
}

/// `1/4 + |gamma|^2 e^{-4 eps r} {1 + 4|beta|^2 + 4|beta|^2 cos 2(xi - theta)} / 2`.
pub fn uncertainty_product<T: Real>(spec: &HompssSpec<T>) -> Result<T> {
    let eps = closed_form_sign(spec)?;
    let p = &spec.params;
    let half = T::lit(0.5);
    Ok(T::lit(0.25)
        + half
            * p.gamma_mod
            * p.gamma_mod
            * (T::lit(-4.0) * eps * p.r).exp()
            * mixing_bracket(spec))
}

/// Variances from the exact moments of the closed-form wavefunction; valid
/// for any branch and polynomial nonlinearity.
pub fn moment_variances<T: Real>(spec: &HompssSpec<T>) -> Result<UncertaintyReport<T>> {
    let m = phase_space_moments(spec)?;
    Ok(UncertaintyReport::from_variances(m.var_x, m.var_p))
}

/// `(<X>, <X^2>)` of `X_angle` for a number-basis state.
fn quadrature_moments<T: Real>(fock: &FockVector<T>, angle: T) -> (T, T) {
    // One extra level makes X psi exact for the truncated vector.
    let n = fock.cutoff() + 1;
    let psi = fock.truncated(n);
    let x = quadrature_matrix::<T>(n, angle);
    let xpsi = x.apply(&psi.coeffs);
    let norm = psi.norm_sqr();
    let mean = psi
        .coeffs
        .iter()
        .zip(&xpsi)
        .fold(C::new(T::zero(), T::zero()), |acc, (c, y)| {
            acc + c.conj() * y
        })
        .re
        / norm;
    let second = xpsi.iter().map(|z| z.norm_sqr()).sum::<T>() / norm;
    (mean, second)
}

/// Variances of `(X_theta, P_theta)` from number-basis amplitudes.
pub fn fock_variances<T: Real>(fock: &FockVector<T>, theta: T) -> UncertaintyReport<T> {
    let (mx, x2) = quadrature_moments(fock, theta);
    let (mp, p2) = quadrature_moments(fock, theta + T::FRAC_PI_2());
    UncertaintyReport::from_variances(x2 - mx * mx, p2 - mp * mp)
}

fn checked<T: Real>(fock: &FockVector<T>) -> Result<()> {
    fock.check_deficit(T::lit(DEFICIT_TOL))
}

/// `sum n P(n)`.
pub fn mean_photon_number<T: Real>(fock: &FockVector<T>) -> Result<T> {
    checked(fock)?;
    Ok(factorial_moment(fock, 1))
}

/// `<n>` for `|gamma| = 0`, `phi = 2 theta`:
/// `|beta|^2 cosh 2r - Re[beta^*2 e^{2 i theta}] sinh 2r + sinh^2 r`.
pub fn mean_n_analytic<T: Real>(params: &CanonicalParams<T>, beta: C<T>) -> Result<T> {
    if params.gamma_mod != T::zero() {
        return Err(Error::NonzeroGamma {
            gamma_mod: params.gamma_mod.to_f64().unwrap_or(f64::NAN),
        });
    }
    if angular_distance(params.phi, T::lit(2.0) * params.theta) > T::lit(1e-9) {
        return Err(invalid("phi", "closed form requires phi = 2 theta"));
    }
    let two_r = T::lit(2.0) * params.r;
    let cross = (beta.conj() * beta.conj() * expi(T::lit(2.0) * params.theta)).re;
    Ok(beta.norm_sqr() * two_r.cosh() - cross * two_r.sinh() + params.r.sinh().powi(2))
}

/// Photon-number distribution `P(n) = |c_n|^2`.
pub fn pnd<T: Real>(fock: &FockVector<T>) -> Vec<T> {
    fock.probabilities()
}

/// `<n (n - 1) ... (n - k + 1)>`.
pub fn factorial_moment<T: Real>(fock: &FockVector<T>, k: usize) -> T {
    fock.probabilities()
        .iter()
        .enumerate()
        .skip(k)
        .map(|(n, &p)| {
            let falling: T = (0..k)
                .map(|j| T::of_usize(n - j))
                .fold(T::one(), |a, b| a * b);
            falling * p
        })
        .sum()
}

fn normalized_moment<T: Real>(fock: &FockVector<T>, k: usize) -> Result<T> {
    checked(fock)?;
    let mean = factorial_moment(fock, 1);
    if mean <= T::epsilon() {
        return Err(Error::ZeroMeanPhoton);
    }
    Ok(factorial_moment(fock, k) / mean.powi(k as i32))
}

/// `g2(0) = <a^dag2 a^2> / <a^dag a>^2`.
pub fn g2<T: Real>(fock: &FockVector<T>) -> Result<T> {
    normalized_moment(fock, 2)
}

/// `g4(0) = <a^dag4 a^4> / <a^dag a>^4`.
pub fn g4<T: Real>(fock: &FockVector<T>) -> Result<T> {
    normalized_moment(fock, 4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::build_params;
    use crate::fock::project_state;
    use crate::scalar::cplx;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn spec(r: f64, theta: f64, gamma: f64, branch: Branch, beta: C<f64>) -> HompssSpec<f64> {
        HompssSpec::on_branch(r, theta, gamma, branch, beta).unwrap()
    }

    #[test]
    fn squeezed_variance_on_upper_branch() {
        let s = spec(0.8, 0.3, 0.0, Branch::PlusPlus, cplx(0.0, 0.0));
        let u = quadrature_variances(&s).unwrap();
        assert!((u.var_x - (-1.6f64).exp() / 2.0).abs() < 1e-15);
        assert!((u.var_x - 0.100_948).abs() < 1e-6);
        let lower = spec(0.8, 0.3, 0.0, Branch::MinusPlus, cplx(0.0, 0.0));
        assert!(quadrature_variances(&lower).unwrap().var_x > u.var_x);
    }

    #[test]
    fn variances_at_half_pi() {
        // Upper sign: e^{1.6}/2 + e^{-1.6} 0.16 {1 + 36 - 36}
        let up = spec(0.8, FRAC_PI_2, 0.4, Branch::MinusMinus, cplx(3.0, 0.0));
        let u = quadrature_variances(&up).unwrap();
        assert!((u.var_p - 2.508_820).abs() < 1e-6);
        // Lower sign, (-, +): e^{-1.6}/2 + e^{1.6} 0.16
        let low = spec(0.8, FRAC_PI_2, 0.4, Branch::MinusPlus, cplx(3.0, 0.0));
        let u = quadrature_variances(&low).unwrap();
        assert!((u.var_x - 2.476_516).abs() < 1e-6);
        assert!((u.var_p - ((-1.6f64).exp() / 2.0 + 1.6f64.exp() * 0.16)).abs() < 1e-12);
        for s in [up, low] {
            let f = project_state(&s).unwrap();
            let num = fock_variances(&f, s.params.theta);
            let closed = quadrature_variances(&s).unwrap();
            assert!((num.var_x - closed.var_x).abs() < 1e-6);
            assert!((num.var_p - closed.var_p).abs() < 1e-6);
        }
    }

    #[test]
    fn vacuum_variances() {
        let u = quadrature_variances(&HompssSpec::<f64>::vacuum()).unwrap();
        assert_eq!((u.var_x, u.var_p), (0.5, 0.5));
        assert_eq!(u.heisenberg_excess, 0.0);
    }

    #[test]
    fn quasi_minimum_product() {
        // xi - theta = pi/2 on the squeezing branch
        let theta = 0.4;
        let s = HompssSpec::new(
            build_params(0.8, theta, 0.4, Branch::PlusPlus).unwrap(),
            3.0,
            theta + FRAC_PI_2,
        )
        .unwrap();
        let p = uncertainty_product(&s).unwrap();
        assert!((p - (0.25 + 0.08 * (-3.2f64).exp())).abs() < 1e-14);
        assert!((p - 0.253_261).abs() < 1e-6);
        let u = quadrature_variances(&s).unwrap();
        assert!((u.product - p).abs() < 1e-14);
    }

    #[test]
    fn product_minimum_location() {
        let theta = 0.3;
        let params = build_params(0.8, theta, 0.4, Branch::MinusMinus).unwrap();
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..3600 {
            let xi = -PI + k as f64 * PI / 1800.0;
            let s = HompssSpec::new(params, 3.0, xi).unwrap();
            let p = uncertainty_product(&s).unwrap();
            if p < best.0 {
                best = (p, xi);
            }
        }
        let d = angular_distance(best.1 - theta, FRAC_PI_2)
            .min(angular_distance(best.1 - theta, -FRAC_PI_2));
        assert!(d < 2e-3);
        assert!(best.0 >= 0.25);
    }

    #[test]
    fn closed_forms_reject_other_inputs() {
        let s = spec(0.5, 0.2, 0.3, Branch::PlusPlus, cplx(1.0, 0.0))
            .with_nonlinearity(crate::states::Polynomial::new(vec![0.0, 0.0, 0.0, 1.0]).unwrap());
        assert_eq!(quadrature_variances(&s), Err(Error::NotQuadratic));
        let g = HompssSpec::new(
            CanonicalParams::with_solved_delta(0.5, 0.0, 0.7, 0.2).unwrap(),
            1.0,
            0.0,
        )
        .unwrap();
        assert_eq!(uncertainty_product(&g), Err(Error::GenericBranch));
        assert!(moment_variances(&g).unwrap().product >= 0.25 - 1e-12);
    }

    #[test]
    fn analytic_mean_photon_number() {
        let p0 = build_params(0.8f64, 0.0, 0.0, Branch::PlusPlus).unwrap();
        let n0 = mean_n_analytic(&p0, cplx(3.0, 0.0)).unwrap();
        assert!((n0 - (9.0 * (-1.6f64).exp() + 0.8f64.sinh().powi(2))).abs() < 1e-14);
        assert!((n0 - 2.605_801).abs() < 1e-6);
        let p1 = build_params(0.8, FRAC_PI_2, 0.0, Branch::PlusPlus).unwrap();
        let n1 = mean_n_analytic(&p1, cplx(3.0, 0.0)).unwrap();
        assert!((n1 - 45.3660).abs() < 1e-4);
        let id = build_params(0.0f64, 0.3, 0.0, Branch::MinusMinus).unwrap();
        assert!((mean_n_analytic(&id, cplx(1.0, 2.0)).unwrap() - 5.0).abs() < 1e-14);
        let g = build_params(0.8, 0.0, 0.1, Branch::PlusPlus).unwrap();
        assert!(matches!(
            mean_n_analytic(&g, cplx(3.0, 0.0)),
            Err(Error::NonzeroGamma { .. })
        ));
    }

    #[test]
    fn numerical_mean_matches_analytic() {
        for (theta, beta) in [
            (0.0, cplx(3.0, 0.0)),
            (0.9, cplx(1.0, -2.0)),
            (-2.0, cplx(0.5, 0.5)),
        ] {
            let s = spec(0.8, theta, 0.0, Branch::MinusMinus, beta);
            let f = project_state(&s).unwrap();
            let n = mean_photon_number(&f).unwrap();
            let want = mean_n_analytic(&s.params, beta).unwrap();
            assert!((n - want).abs() < 1e-6, "{n} vs {want}");
        }
    }

    #[test]
    fn coherent_statistics() {
        let f = project_state(&HompssSpec::coherent(cplx(3.0f64, 0.0))).unwrap();
        assert!((mean_photon_number(&f).unwrap() - 9.0).abs() < 1e-6);
        let p = pnd(&f);
        assert!((p[9] - 0.131_756).abs() < 1e-6);
        assert!((g2(&f).unwrap() - 1.0).abs() < 1e-6);
        assert!((g4(&f).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn squeezed_vacuum_g2() {
        let s = spec(0.8, 0.0, 0.0, Branch::PlusPlus, cplx(0.0, 0.0));
        let f = project_state(&s).unwrap();
        let want = 3.0 + 1.0 / 0.8f64.sinh().powi(2);
        assert!((g2(&f).unwrap() - want).abs() < 1e-6);
        assert!((want - 4.267_857).abs() < 1e-6);
        let p = pnd(&f);
        assert!(p.iter().skip(1).step_by(2).all(|&x| x < 1e-10));
    }

    #[test]
    fn vacuum_has_no_g2() {
        let f = project_state(&HompssSpec::<f64>::vacuum()).unwrap();
        assert!(mean_photon_number(&f).unwrap() < 1e-15);
        assert_eq!(g2(&f), Err(Error::ZeroMeanPhoton));
    }

    #[test]
    fn statistics_ignore_frame_rotation() {
        let s = spec(0.8, FRAC_PI_3, 0.4, Branch::MinusMinus, cplx(3.0, 0.0));
        let f = project_state(&s).unwrap();
        let rotated = FockVector::new(
            f.coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| c * expi(-(n as f64) * FRAC_PI_3))
                .collect(),
        );
        assert!((g2(&f).unwrap() - g2(&rotated).unwrap()).abs() < 1e-10);
        assert!((g4(&f).unwrap() - g4(&rotated).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn truncated_state_is_rejected() {
        let f = project_state(&HompssSpec::coherent(cplx(3.0, 0.0)))
            .unwrap()
            .truncated(8);
        assert!(matches!(
            mean_photon_number(&f),
            Err(Error::CutoffTooSmall { .. })
        ));
    }
}
