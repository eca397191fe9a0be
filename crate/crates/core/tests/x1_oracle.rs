//! The `X_1` representation against a closed-form Airy oracle.
//!
//! For `F = x^2` the `X_theta` wavefunction is `N exp(-a x^2/2 - b x^3/3 + c x)`
//! with purely imaginary `b`, so the rotation integral is a cubic Gaussian
//! that reduces to `Ai` after completing the cube.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI};

use hompss::states::phase_space_moments;
use hompss::states::{
    default_x1_grid, wavefunction_coefficients, x1_representation, PhaseSpaceMoments,
};
use hompss::{Branch, Complex64, HompssSpec64};
use num_complex::Complex;

const AI0: f64 = 0.355_028_053_887_817_2;
const AIP0: f64 = 0.258_819_403_792_806_8;

fn airy_series(z: Complex64) -> Complex64 {
    let z3 = z * z * z;
    let (mut f, mut g) = (Complex::new(1.0, 0.0), z);
    let (mut tf, mut tg) = (f, g);
    for k in 1..200 {
        let k = k as f64;
        tf = tf * z3 / ((3.0 * k - 1.0) * (3.0 * k));
        tg = tg * z3 / ((3.0 * k) * (3.0 * k + 1.0));
        f += tf;
        g += tg;
        if tf.norm() < 1e-18 * f.norm() && tg.norm() < 1e-18 * g.norm().max(1e-300) {
            break;
        }
    }
    f * AI0 - g * AIP0
}

/// Large-`|z|` expansion, accurate for `|arg z| <= 2 pi / 3`.
fn airy_asymptotic(z: Complex64) -> Complex64 {
    let zeta = z.powf(1.5) * (2.0 / 3.0);
    let (mut sum, mut term) = (Complex::new(1.0, 0.0), Complex::new(1.0, 0.0));
    for k in 1..60 {
        let k = k as f64;
        // u_k / u_{k-1}
        let ratio =
            (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k);
        let next = -term * ratio / zeta;
        if next.norm() > term.norm() || next.norm() < 1e-17 {
            break;
        }
        term = next;
        sum += term;
    }
    (-zeta).exp() / (2.0 * PI.sqrt() * z.powf(0.25)) * sum
}

fn airy_ai(z: Complex64) -> Complex64 {
    if z.norm() < 5.0 {
        return airy_series(z);
    }
    if z.arg().abs() <= 2.0 * PI / 3.0 {
        return airy_asymptotic(z);
    }
    // Ai(z) + w Ai(w z) + w^2 Ai(w^2 z) = 0
    let w = Complex::from_polar(1.0, 2.0 * PI / 3.0);
    -(w * airy_asymptotic(w * z) + w * w * airy_asymptotic(w * w * z))
}

/// `psi_1(y) = int K(y, x) psi_theta(x) dx` in closed form.
fn oracle(spec: &HompssSpec64, y: f64) -> Complex64 {
    let theta = spec.params.theta;
    let w = wavefunction_coefficients(spec).unwrap();
    assert!(w.b.re.abs() < 1e-12);
    let i = Complex::new(0.0, 1.0);
    let norm = (w.a.re / PI).powf(0.25) * (-w.c.re * w.c.re / (2.0 * w.a.re)).exp();
    let (s, cot) = (theta.sin(), theta.cos() / theta.sin());
    let kernel = (Complex::new(PI, 0.0) * (Complex::new(1.0, 0.0) - (i * 2.0 * theta).exp()))
        .powf(-0.5)
        * (-i * cot * y * y / 2.0).exp();

    // exponent -i k x^3 - P x^2/2 + Q x
    let k = w.b.im / 3.0;
    let p = w.a + i * cot;
    let q = w.c + i * y / s;
    let y0 = i * p / (6.0 * k);
    let l = -i * 3.0 * k * y0 * y0 - p * y0 + q;
    let constant = -i * k * y0 * y0 * y0 - p * y0 * y0 / 2.0 + q * y0;
    let root = (3.0 * k.abs()).cbrt();
    let z = if k > 0.0 { i * l / root } else { -i * l / root };
    norm * kernel * constant.exp() * 2.0 * PI / root * airy_ai(z)
}

fn spec(theta: f64, gamma: f64, branch: Branch) -> HompssSpec64 {
    HompssSpec64::on_branch(0.8, theta, gamma, branch, Complex::new(3.0, 0.0)).unwrap()
}

fn check_against_oracle(spec: &HompssSpec64) {
    let grid = default_x1_grid(spec).unwrap();
    let psi = x1_representation(spec, &grid).unwrap();
    let peak = psi.psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let m: PhaseSpaceMoments<f64> = phase_space_moments(spec).unwrap().rotated(0.0);
    let sd = m.var_x.sqrt();
    let mut checked = 0;
    for offset in [-1.5, -0.75, 0.0, 0.6, 1.2] {
        let i = ((m.mean_x + offset * sd - grid.x0) / grid.dx).round() as usize;
        let (y, got) = (grid.x(i), psi.psi[i]);
        if got.norm() < 1e-3 * peak {
            continue;
        }
        let want = oracle(spec, y);
        let rel = (got - want).norm() / want.norm();
        assert!(rel < 1e-4, "y = {y}: {got} vs {want} (rel {rel:e})");
        checked += 1;
    }
    assert!(checked >= 4, "only {checked} points above the floor");
}

#[test]
fn matches_airy_oracle_upper_branch() {
    check_against_oracle(&spec(FRAC_PI_6, 0.4, Branch::MinusMinus));
}

#[test]
fn matches_airy_oracle_lower_branch() {
    check_against_oracle(&spec(FRAC_PI_3, 0.4, Branch::MinusPlus));
}

#[test]
fn matches_airy_oracle_negative_mixing() {
    check_against_oracle(&spec(FRAC_PI_3, 0.2, Branch::PlusMinus));
}

#[test]
fn x1_density_is_not_gaussian() {
    let s = spec(FRAC_PI_3, 0.4, Branch::MinusPlus);
    let grid = default_x1_grid(&s).unwrap();
    let psi = x1_representation(&s, &grid).unwrap();
    let m = phase_space_moments(&s).unwrap().rotated(0.0);
    // L1 distance to the Gaussian with the same first two moments.
    let l1: f64 = (0..grid.len)
        .map(|i| {
            let x = grid.x(i);
            let g = (-(x - m.mean_x).powi(2) / (2.0 * m.var_x)).exp() / (2.0 * PI * m.var_x).sqrt();
            (psi.psi[i].norm_sqr() - g).abs() * grid.dx
        })
        .sum();
    assert!(l1 > 0.05, "L1 distance to Gaussian {l1}");

    let gauss = spec(FRAC_PI_3, 0.0, Branch::MinusPlus);
    let psi0 = x1_representation(&gauss, &default_x1_grid(&gauss).unwrap()).unwrap();
    let m0 = phase_space_moments(&gauss).unwrap().rotated(0.0);
    let l1_0: f64 = (0..psi0.len())
        .map(|i| {
            let x = psi0.x(i);
            let g =
                (-(x - m0.mean_x).powi(2) / (2.0 * m0.var_x)).exp() / (2.0 * PI * m0.var_x).sqrt();
            (psi0.psi[i].norm_sqr() - g).abs() * psi0.dx
        })
        .sum();
    assert!(l1_0 < 1e-8, "gamma = 0 L1 {l1_0}");
}

#[test]
fn airy_reference_values() {
    let cases = [
        (
            Complex::new(1.0, 0.0),
            Complex::new(0.135_292_416_312_881_47, 0.0),
        ),
        (
            Complex::new(-10.0, 0.0),
            Complex::new(0.040_241_238_486_441_955, 0.0),
        ),
        (
            Complex::new(10.0, 0.0),
            Complex::new(1.104_753_255_289_865_4e-10, 0.0),
        ),
        (
            Complex::new(-16.0, 3.0),
            Complex::new(-20_146.384_054_254_87, -11_644.723_152_021_49),
        ),
        (
            Complex::new(0.0, 7.0),
            Complex::new(-1_027.632_482_871_467_3, -324.384_386_015_708_1),
        ),
    ];
    for (z, want) in cases {
        let got = airy_ai(z);
        assert!(
            (got - want).norm() < 1e-9 * want.norm(),
            "Ai({z}) = {got}, want {want}"
        );
    }
}
