//! Truncated Fock-space numerics: Hermite projections, operator matrices, the
//! four-photon Hamiltonian and generation of states by the factorized unitary.

use std::io::{self, Write};

use num_traits::Zero;
use rayon::prelude::*;

use crate::canonical::CanonicalParams;
use crate::error::{invalid, Error, Result};
use crate::linalg::{expm, CMatrix};
use crate::scalar::{cplx, expi, real, Real, C};
use crate::states::{
    evaluate_hompss, fock_grid, phase_space_moments, wavefunction_coefficients, Grid,
    GridWavefunction, HompssSpec, Polynomial,
};

/// Extra levels built beyond the reported cutoff.
pub const DEFAULT_GUARD: usize = 32;
/// Largest tolerated truncated mass `1 - sum |c_n|^2`.
pub const DEFICIT_TOL: f64 = 1e-6;
const MAX_CUTOFF: usize = 4096;

/// Number-basis amplitudes `<n|Psi>`, `n < cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector<T> {
    pub coeffs: Vec<C<T>>,
}

impl<T: Real> FockVector<T> {
    pub fn new(coeffs: Vec<C<T>>) -> Self {
        FockVector { coeffs }
    }

    pub fn basis(n: usize, cutoff: usize) -> Self {
        let mut coeffs = vec![C::zero(); cutoff];
        coeffs[n] = real(T::one());
        FockVector { coeffs }
    }

    pub fn cutoff(&self) -> usize {
        self.coeffs.len()
    }

    pub fn norm_sqr(&self) -> T {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Truncated mass `1 - sum |c_n|^2`.
    pub fn deficit(&self) -> T {
        T::one() - self.norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.coeffs.iter().map(|c| c.norm_sqr()).collect()
    }

    /// First `n` amplitudes (zero padded if `n` exceeds the cutoff).
    pub fn truncated(&self, n: usize) -> Self {
        let mut coeffs: Vec<C<T>> = self.coeffs.iter().take(n).copied().collect();
        coeffs.resize(n, C::zero());
        FockVector { coeffs }
    }

    /// `sum conj(self_n) other_n` over the common levels.
    pub fn inner(&self, other: &Self) -> C<T> {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(C::zero(), |acc, (a, b)| acc + a.conj() * b)
    }

    /// `|<self|other>|^2 / (<self|self> <other|other>)`.
    pub fn fidelity(&self, other: &Self) -> T {
        self.inner(other).norm_sqr() / (self.norm_sqr() * other.norm_sqr())
    }

    pub fn check_deficit(&self, tol: T) -> Result<()> {
        let deficit = self.deficit();
        if deficit > tol {
            return Err(Error::CutoffTooSmall {
                cutoff: self.cutoff(),
                deficit: deficit.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "n,re_c,im_c,prob")?;
        for (n, c) in self.coeffs.iter().enumerate() {
            writeln!(w, "{n},{:e},{:e},{:e}", c.re, c.im, c.norm_sqr())?;
        }
        Ok(())
    }
}

/// Writes `h_0(x) .. h_{n-1}(x)` (orthonormal Hermite functions) into `out`.
///
/// The recurrence runs on a mantissa with a separate logarithmic scale so
/// `e^{-x^2/2}` never underflows before the polynomial growth compensates.
fn hermite_functions<T: Real>(x: T, out: &mut [T]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    let big = T::max_value().sqrt().sqrt();
    let mut log_scale = -x * x / T::lit(2.0);
    let two = T::lit(2.0);
    let mut prev = T::zero();
    let mut cur = T::PI().powf(T::lit(-0.25));
    out[0] = cur * log_scale.exp();
    for k in 1..n {
        let kf = T::of_usize(k);
        let next = (two / kf).sqrt() * x * cur - ((kf - T::one()) / kf).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > big {
            prev /= big;
            cur /= big;
            log_scale += big.ln();
        }
        out[k] = cur * log_scale.exp();
    }
}

/// Hermite functions sampled on a grid.
#[derive(Debug, Clone)]
pub struct HermiteTable<T> {
    pub grid: Grid<T>,
    pub levels: usize,
    /// `values[n * grid.len + i] = h_n(x_i)`.
    pub values: Vec<T>,
}

impl<T: Real> HermiteTable<T> {
    pub fn row(&self, n: usize) -> &[T] {
        &self.values[n * self.grid.len..(n + 1) * self.grid.len]
    }

    /// Trapezoid Gram matrix `sum_i h_m(x_i) h_n(x_i) dx`.
    pub fn gram(&self) -> Vec<Vec<T>> {
        (0..self.levels)
            .map(|m| {
                (0..self.levels)
                    .map(|n| {
                        self.row(m)
                            .iter()
                            .zip(self.row(n))
                            .map(|(a, b)| *a * *b)
                            .sum::<T>()
                            * self.grid.dx
                    })
                    .collect()
            })
            .collect()
    }
}

/// Hermite functions `h_0 .. h_{n_max}` on `grid`, which must reach past the
/// outermost turning point by six units.
pub fn hermite_quadrature<T: Real>(grid: &Grid<T>, n_max: usize) -> Result<HermiteTable<T>> {
    let reach = T::of_usize(2 * n_max + 1).sqrt() + T::lit(6.0);
    if grid.x0 > -reach || grid.hi() < reach {
        return Err(Error::GridTooNarrow(format!(
            "Hermite functions up to n = {n_max} need [-{reach}, {reach}]"
        )));
    }
    let levels = n_max + 1;
    let mut values = vec![T::zero(); levels * grid.len];
    let mut column = vec![T::zero(); levels];
    for i in 0..grid.len {
        hermite_functions(grid.x(i), &mut column);
        for (n, &h) in column.iter().enumerate() {
            values[n * grid.len + i] = h;
        }
    }
    Ok(HermiteTable {
        grid: *grid,
        levels,
        values,
    })
}

const CHUNK: usize = 256;

/// Projection without the deficit check.
///
/// `|x>_theta = e^{i theta n}` applied to `|x>_1`, hence
/// `<n|Psi> = e^{i n theta} int h_n(x) psi_theta(x) dx`. Partial sums are
/// combined in grid order, so the result does not depend on thread count.
pub fn project_unchecked<T: Real>(
    wf: &GridWavefunction<T>,
    cutoff: usize,
) -> Result<FockVector<T>> {
    if cutoff == 0 {
        return Err(invalid("cutoff", "must be >= 1"));
    }
    let peak = wf.psi.iter().map(|z| z.norm_sqr()).fold(T::zero(), T::max);
    let edge = wf.psi[0].norm_sqr().max(wf.psi[wf.len() - 1].norm_sqr());
    if edge > peak * T::lit(1e-10) {
        return Err(Error::GridTooNarrow(
            "wavefunction is not negligible at the grid edges".into(),
        ));
    }
    let partials: Vec<Vec<C<T>>> = wf
        .psi
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(chunk, values)| {
            let mut acc = vec![C::<T>::zero(); cutoff];
            let mut h = vec![T::zero(); cutoff];
            for (k, &p) in values.iter().enumerate() {
                hermite_functions(wf.x(chunk * CHUNK + k), &mut h);
                for (a, &hn) in acc.iter_mut().zip(&h) {
                    *a += p * hn;
                }
            }
            acc
        })
        .collect();
    let mut coeffs = vec![C::<T>::zero(); cutoff];
    for part in &partials {
        for (c, p) in coeffs.iter_mut().zip(part) {
            *c += *p;
        }
    }
    for (n, c) in coeffs.iter_mut().enumerate() {
        *c = *c * wf.dx * expi(T::of_usize(n) * wf.angle);
    }
    Ok(FockVector { coeffs })
}

/// Number-basis amplitudes of a normalized grid wavefunction.
pub fn project_to_fock<T: Real>(wf: &GridWavefunction<T>, cutoff: usize) -> Result<FockVector<T>> {
    let fock = project_unchecked(wf, cutoff)?;
    fock.check_deficit(T::lit(DEFICIT_TOL))?;
    Ok(fock)
}

/// Initial cutoff estimate `<n> + 10 sqrt(<n> + 1) + 20` from the exact
/// second moments of the state.
pub fn auto_cutoff<T: Real>(spec: &HompssSpec<T>) -> Result<usize> {
    let n = phase_space_moments(spec)?
        .mean_photon_number()
        .max(T::zero());
    let est = n + T::lit(10.0) * (n + T::one()).sqrt() + T::lit(20.0);
    Ok(est.ceil().to_usize().unwrap_or(MAX_CUTOFF).min(MAX_CUTOFF))
}

/// Projects the closed-form wavefunction at exactly `cutoff` levels on a grid
/// fine enough for both the state and the Hermite functions.
pub fn project_spec<T: Real>(spec: &HompssSpec<T>, cutoff: usize) -> Result<FockVector<T>> {
    let grid = fock_grid(spec, cutoff)?;
    let wf = evaluate_hompss(spec, &grid)?;
    project_to_fock(&wf, cutoff)
}

/// Truncated mass aimed for by [`project_state`]. Moments weight the tail by
/// powers of `n`, so this is far below [`DEFICIT_TOL`].
pub const PROJECTION_TARGET: f64 = 1e-12;

/// Projects at the automatic cutoff, growing it by 25% until the truncated
/// mass is below [`PROJECTION_TARGET`] (or its floating point floor).
pub fn project_state<T: Real>(spec: &HompssSpec<T>) -> Result<FockVector<T>> {
    let target = T::lit(PROJECTION_TARGET).max(T::epsilon() * T::lit(1e4));
    let mut cutoff = auto_cutoff(spec)?;
    loop {
        let grid = fock_grid(spec, cutoff)?;
        let wf = evaluate_hompss(spec, &grid)?;
        let fock = project_unchecked(&wf, cutoff)?;
        if fock.deficit() <= target {
            return Ok(fock);
        }
        if cutoff >= MAX_CUTOFF {
            fock.check_deficit(T::lit(DEFICIT_TOL))?;
            return Ok(fock);
        }
        cutoff = (cutoff + cutoff / 4).min(MAX_CUTOFF);
    }
}

/// Truncated annihilation and creation matrices.
pub fn ladder_matrices<T: Real>(n: usize) -> (CMatrix<T>, CMatrix<T>) {
    let mut a = CMatrix::zeros(n);
    for k in 1..n {
        a[(k - 1, k)] = real(T::of_usize(k).sqrt());
    }
    let ad = a.adjoint();
    (a, ad)
}

/// `X_theta = (a e^{-i theta} + a^dag e^{i theta}) / sqrt(2)`.
pub fn quadrature_matrix<T: Real>(n: usize, theta: T) -> CMatrix<T> {
    let (a, ad) = ladder_matrices::<T>(n);
    let s = T::FRAC_1_SQRT_2();
    &a.scale(expi(-theta) * s) + &ad.scale(expi(theta) * s)
}

/// `P_theta = X_{theta + pi/2}`.
pub fn conjugate_quadrature_matrix<T: Real>(n: usize, theta: T) -> CMatrix<T> {
    quadrature_matrix(n, theta + T::FRAC_PI_2())
}

/// `sum_k c_k M^k`.
fn matrix_polynomial<T: Real>(m: &CMatrix<T>, f: &Polynomial<T>) -> CMatrix<T> {
    let n = m.dim();
    let mut out = CMatrix::zeros(n);
    for &c in f.coeffs().iter().rev() {
        out = out.matmul(m);
        out = &out + &CMatrix::identity(n).scale(real(c));
    }
    out
}

/// `mu a + nu a^dag + gamma F(X_theta)` at `n` levels, without a canonicity check.
pub fn mode_matrix<T: Real>(
    params: &CanonicalParams<T>,
    f: &Polynomial<T>,
    n: usize,
) -> CMatrix<T> {
    let (a, ad) = ladder_matrices::<T>(n);
    let fx = matrix_polynomial(&quadrature_matrix(n, params.theta), f);
    let lin = &a.scale(params.mu()) + &ad.scale(params.nu());
    &lin + &fx.scale(params.gamma())
}

/// Transformed mode `b` at `n` levels. Rows near the cutoff carry truncation
/// artifacts; build with a guard band and use the interior.
pub fn b_matrix<T: Real>(spec: &HompssSpec<T>, n: usize) -> Result<CMatrix<T>> {
    spec.params.ensure_canonical()?;
    Ok(mode_matrix(&spec.params, &spec.nonlinearity, n))
}

/// `||(b - beta) Psi|| / ||Psi||` over rows `< interior`, with `b` built at
/// the cutoff of `fock`.
pub fn eigen_residual_on<T: Real>(
    spec: &HompssSpec<T>,
    fock: &FockVector<T>,
    interior: usize,
) -> Result<T> {
    let n = fock.cutoff();
    let b = b_matrix(spec, n)?;
    let bpsi = b.apply(&fock.coeffs);
    let beta = spec.beta();
    let res: T = bpsi
        .iter()
        .zip(&fock.coeffs)
        .take(interior.min(n))
        .map(|(bp, c)| (*bp - beta * *c).norm_sqr())
        .sum();
    Ok((res / fock.norm_sqr()).sqrt())
}

/// Eigenvalue residual on the interior `cutoff - DEFAULT_GUARD`.
pub fn eigen_residual<T: Real>(spec: &HompssSpec<T>, fock: &FockVector<T>) -> Result<T> {
    let interior = fock.cutoff().saturating_sub(DEFAULT_GUARD).max(1);
    eigen_residual_on(spec, fock, interior)
}

/// Residual of the state truncated to its first `n` levels, with `b` built
/// at `n + DEFAULT_GUARD` and every row counted. Measures how well `n`
/// levels represent the eigenstate.
pub fn truncation_residual<T: Real>(
    spec: &HompssSpec<T>,
    fock: &FockVector<T>,
    n: usize,
) -> Result<T> {
    let big = fock.truncated(n).truncated(n + DEFAULT_GUARD);
    eigen_residual_on(spec, &big, n + DEFAULT_GUARD)
}

/// Coefficients of `b^dag b` in normal order for `F(x) = x^2`.
///
/// ```text
/// H = A0 + (A1 a^dag + A2 a^dag2 + A3 a^dag3 + A4 a^dag4 + h.c.)
///   + B0 a^dag a + B1 a^dag2 a^2 + (C a^dag2 a + D a^dag3 a + h.c.)
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianCoefficients<T> {
    pub a0: C<T>,
    pub a1: C<T>,
    pub a2: C<T>,
    pub a3: C<T>,
    pub a4: C<T>,
    pub b0: C<T>,
    pub b1: C<T>,
    pub c: C<T>,
    pub d: C<T>,
}

pub fn hamiltonian_coefficients<T: Real>(
    params: &CanonicalParams<T>,
) -> HamiltonianCoefficients<T> {
    let (mu, nu, g) = (params.mu(), params.nu(), params.gamma());
    let e2 = expi(T::lit(2.0) * params.theta);
    let e4 = expi(T::lit(4.0) * params.theta);
    let g2 = g.norm_sqr();
    let half = T::lit(0.5);
    let (c3, c4) = (T::lit(3.0), T::lit(0.75));
    HamiltonianCoefficients {
        a0: real(nu.norm_sqr() + c4 * g2),
        a1: mu.conj() * g * half + nu * g.conj() * T::lit(1.5) + e2 * nu.conj() * g,
        a2: e2 * T::lit(1.5) * g2 + mu.conj() * nu,
        a3: e2 * (mu.conj() * g + nu * g.conj()) * half,
        // The a^dag4 term of |gamma|^2 X^4 is e^{4 i theta} |gamma|^2 a^dag4 / 4.
        a4: e4 * (g2 * T::lit(0.25)),
        b0: real(mu.norm_sqr() + nu.norm_sqr() + c3 * g2),
        b1: real(T::lit(1.5) * g2),
        c: e2 * (mu * g.conj() + nu.conj() * g) * half + mu.conj() * g + nu * g.conj(),
        d: e2 * g2,
    }
}

/// Column index and value of `a^dag^p a^q |n>`, if nonzero.
fn monomial<T: Real>(p: usize, q: usize, n: usize) -> Option<(usize, T)> {
    if q > n {
        return None;
    }
    let mid = n - q;
    let mut v = T::one();
    for k in mid + 1..=n {
        v *= T::of_usize(k).sqrt();
    }
    for k in mid + 1..=mid + p {
        v *= T::of_usize(k).sqrt();
    }
    Some((mid + p, v))
}

/// Four-photon Hamiltonian at `n` levels, assembled from normal-ordered
/// monomials. Every entry is exact for the truncated basis and the matrix is
/// Hermitian by construction.
pub fn hamiltonian_matrix<T: Real>(params: &CanonicalParams<T>, n: usize) -> Result<CMatrix<T>> {
    params.ensure_canonical()?;
    let k = hamiltonian_coefficients(params);
    let mut h = CMatrix::zeros(n);
    for col in 0..n {
        let nf = T::of_usize(col);
        let diag = k.a0.re + k.b0.re * nf + k.b1.re * nf * (nf - T::one());
        h[(col, col)] = real(diag);
    }
    let raising: [(usize, usize, C<T>); 6] = [
        (1, 0, k.a1),
        (2, 0, k.a2),
        (3, 0, k.a3),
        (4, 0, k.a4),
        (2, 1, k.c),
        (3, 1, k.d),
    ];
    for &(p, q, coef) in &raising {
        for col in 0..n {
            if let Some((row, v)) = monomial::<T>(p, q, col) {
                if row < n {
                    let z = coef * v;
                    h[(row, col)] += z;
                    h[(col, row)] += z.conj();
                }
            }
        }
    }
    Ok(h)
}

/// Parameters of `U_hom = U_theta D_theta S_theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryFactors<T> {
    /// `mu~^* beta - nu~ beta^*`
    pub alpha_theta: C<T>,
    /// `r e^{i (phi - 2 theta)}`
    pub zeta_theta: C<T>,
    /// `Im b`
    pub mixing_strength: T,
}

pub fn unitary_factors<T: Real>(spec: &HompssSpec<T>) -> Result<UnitaryFactors<T>> {
    let rot = spec.params.rotated()?;
    let beta = spec.beta();
    let coef = wavefunction_coefficients(spec)?;
    let p = &spec.params;
    Ok(UnitaryFactors {
        alpha_theta: rot.mu_tilde.conj() * beta - rot.nu_tilde * beta.conj(),
        zeta_theta: expi(p.phi - T::lit(2.0) * p.theta) * p.r,
        mixing_strength: coef.b.im,
    })
}

/// One factor of the unitary decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    /// `U_theta = exp(-i Im[b] G(X_theta))`
    Mixing,
    /// `D_theta = exp(alpha a_theta^dag - alpha^* a_theta)`
    Displacement,
    /// `S_theta = exp(-zeta/2 a_theta^dag2 + zeta^*/2 a_theta^2)`
    Squeeze,
}

/// `U_theta D_theta S_theta`, written left to right.
pub const HOMPSS_ORDER: [Factor; 3] = [Factor::Mixing, Factor::Displacement, Factor::Squeeze];

/// Anti-Hermitian generators of the three factors at `n` levels.
fn generator<T: Real>(
    spec: &HompssSpec<T>,
    uf: &UnitaryFactors<T>,
    which: Factor,
    n: usize,
) -> CMatrix<T> {
    let theta = spec.params.theta;
    let (a, ad) = ladder_matrices::<T>(n);
    let a_t = a.scale(expi(-theta));
    let ad_t = ad.scale(expi(theta));
    match which {
        Factor::Displacement => &ad_t.scale(uf.alpha_theta) - &a_t.scale(uf.alpha_theta.conj()),
        Factor::Squeeze => {
            let half = T::lit(0.5);
            let ad2 = ad_t.matmul(&ad_t);
            let a2 = a_t.matmul(&a_t);
            &a2.scale(uf.zeta_theta.conj() * half) - &ad2.scale(uf.zeta_theta * half)
        }
        Factor::Mixing => {
            let g = spec.nonlinearity.primitive();
            let gx = matrix_polynomial(&quadrature_matrix(n, theta), &g);
            gx.scale(cplx(T::zero(), -uf.mixing_strength))
        }
    }
}

/// Unitary matrix of one factor at `n` levels.
pub fn factor_matrix<T: Real>(spec: &HompssSpec<T>, which: Factor, n: usize) -> Result<CMatrix<T>> {
    let uf = unitary_factors(spec)?;
    Ok(expm(&generator(spec, &uf, which, n)))
}

/// `|Psi> = U_theta D_theta S_theta |0>` on `cutoff` levels, built at
/// `cutoff + guard`.
pub fn generate_via_unitary<T: Real>(spec: &HompssSpec<T>, cutoff: usize) -> Result<FockVector<T>> {
    generate_with_order(spec, cutoff, DEFAULT_GUARD, &HOMPSS_ORDER)
}

/// Applies the factors in `order` (leftmost acts last) to the vacuum.
///
/// Returns `CutoffTooSmall` when the retained levels miss more than `1e-6`
/// of the norm.
pub fn generate_with_order<T: Real>(
    spec: &HompssSpec<T>,
    cutoff: usize,
    guard: usize,
    order: &[Factor],
) -> Result<FockVector<T>> {
    if cutoff == 0 {
        return Err(invalid("cutoff", "must be >= 1"));
    }
    let uf = unitary_factors(spec)?;
    let n = cutoff + guard;
    let mut v = FockVector::basis(0, n).coeffs;
    for &which in order.iter().rev() {
        let u = expm(&generator(spec, &uf, which, n));
        v = u.apply(&v);
    }
    let fock = FockVector::new(v).truncated(cutoff);
    fock.check_deficit(T::lit(DEFICIT_TOL))?;
    Ok(fock)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{build_params, Branch};
    use crate::linalg::hermitian_eigenvalues;
    use crate::states::{default_grid, Grid};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn spec(theta: f64, gamma: f64, branch: Branch, beta: C<f64>) -> HompssSpec<f64> {
        HompssSpec::on_branch(0.8, theta, gamma, branch, beta).unwrap()
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn hermite_ground_and_parity() {
        let grid = Grid::<f64>::new(-20.0, 20.0, 4001).unwrap();
        let table = hermite_quadrature(&grid, 60).unwrap();
        for (i, &h) in table.row(0).iter().enumerate() {
            let x = grid.x(i);
            assert!((h - PI.powf(-0.25) * (-x * x / 2.0).exp()).abs() < 1e-15);
        }
        let gram = table.gram();
        assert!(gram[0][1].abs() < 1e-12);
        let mut worst: f64 = 0.0;
        for m in 0..=60 {
            for n in 0..=60 {
                let target = if m == n { 1.0 } else { 0.0 };
                worst = worst.max((gram[m][n] - target).abs());
            }
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn hermite_table_needs_turning_point() {
        let grid = Grid::new(-8.0, 8.0, 801).unwrap();
        assert!(matches!(
            hermite_quadrature(&grid, 60),
            Err(Error::GridTooNarrow(_))
        ));
    }

    #[test]
    fn hermite_far_tail_does_not_underflow_early() {
        // h_n at x = 40 for n = 1500 is finite and nonzero.
        let mut h = vec![0.0f64; 1501];
        hermite_functions(40.0, &mut h);
        assert!(h[1500].is_finite() && h[1500] != 0.0);
        assert!(h.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn vacuum_projects_onto_ground_state() {
        let vac = HompssSpec::<f64>::vacuum();
        let f = project_spec(&vac, 30).unwrap();
        assert!((f.coeffs[0] - cplx(1.0, 0.0)).norm() < 1e-10);
        assert!(f.coeffs[1..].iter().all(|c| c.norm() < 1e-10));
    }

    #[test]
    fn coherent_state_is_poissonian() {
        let coh = HompssSpec::coherent(cplx(1.0, 0.0));
        let f = project_spec(&coh, 40).unwrap();
        for (n, p) in f.probabilities().iter().enumerate() {
            let want = (-1.0f64).exp() / factorial(n);
            assert!((p - want).abs() < 1e-8, "n = {n}");
        }
    }

    #[test]
    fn coherent_amplitudes_have_the_right_phase() {
        let beta = cplx(0.7f64, -1.1);
        let f = project_spec(&HompssSpec::coherent(beta), 40).unwrap();
        // The closed form fixes the global phase differently; compare c_n / c_0.
        assert!((f.coeffs[0].norm() - (-beta.norm_sqr() / 2.0).exp()).abs() < 1e-10);
        for n in 0..20 {
            let want = beta.powu(n as u32) / factorial(n).sqrt();
            assert!((f.coeffs[n] / f.coeffs[0] - want).norm() < 1e-8, "n = {n}");
        }
    }

    #[test]
    fn squeezed_vacuum_has_only_even_levels() {
        let sv = spec(0.0, 0.0, Branch::PlusPlus, cplx(0.0, 0.0));
        let f = project_state(&sv).unwrap();
        for n in (1..f.cutoff()).step_by(2) {
            assert!(f.coeffs[n].norm() < 1e-10);
        }
    }

    #[test]
    fn small_cutoff_is_reported() {
        let coh = HompssSpec::coherent(cplx(3.0, 0.0));
        let wf = evaluate_hompss(&coh, &default_grid(&coh).unwrap()).unwrap();
        assert!(matches!(
            project_to_fock(&wf, 10),
            Err(Error::CutoffTooSmall { cutoff: 10, .. })
        ));
    }

    #[test]
    fn ladder_identities() {
        let (a, ad) = ladder_matrices::<f64>(8);
        let e1 = FockVector::<f64>::basis(1, 8).coeffs;
        let e0 = FockVector::<f64>::basis(0, 8).coeffs;
        assert_eq!(a.apply(&e1), e0);
        assert_eq!(ad.apply(&e0), e1);
        let num = ad.matmul(&a);
        for n in 0..8 {
            assert!((num[(n, n)].re - n as f64).abs() < 1e-14);
        }
        let comm = &a.matmul(&ad) - &num;
        for n in 0..7 {
            assert!((comm[(n, n)].re - 1.0).abs() < 1e-14);
        }
        assert!((comm[(7, 7)].re + 7.0).abs() < 1e-14);
    }

    #[test]
    fn b_matrix_structure() {
        let id = HompssSpec::<f64>::vacuum();
        let (a, _) = ladder_matrices::<f64>(10);
        assert!((&b_matrix(&id, 10).unwrap() - &a).max_abs() < 1e-15);

        let lin = spec(0.3, 0.0, Branch::MinusPlus, cplx(1.0, 0.0));
        let b = b_matrix(&lin, 12).unwrap();
        let quad = spec(0.3, 0.4, Branch::MinusPlus, cplx(1.0, 0.0));
        let bq = b_matrix(&quad, 12).unwrap();
        for i in 0..12usize {
            for j in 0..12usize {
                let d = i.abs_diff(j);
                if d != 1 {
                    assert!(b[(i, j)].norm() < 1e-15);
                }
                if d > 2 {
                    assert!(bq[(i, j)].norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn commutator_is_identity_on_interior() {
        for branch in Branch::FIXED {
            let s = spec(0.6, 0.4, branch, cplx(1.0, 0.0));
            let b = b_matrix(&s, 64).unwrap();
            let comm = &b.matmul(&b.adjoint()) - &b.adjoint().matmul(&b);
            let inner = &comm.top_left(32) - &CMatrix::identity(32);
            assert!(inner.max_abs() < 1e-8, "{branch}: {}", inner.max_abs());
        }
    }

    #[test]
    fn commutator_defect_tracks_the_residual() {
        // [b, b^dag] - 1 = 2 sqrt(2) |gamma| res X_theta for F = x^2.
        let p = CanonicalParams::<f64>::new(0.5, 0.2, 0.9, 0.4, 0.3).unwrap();
        let res = p.residual();
        assert!(res.abs() > 0.1);
        let b = mode_matrix(&p, &Polynomial::quadratic(), 64);
        let comm = &b.matmul(&b.adjoint()) - &b.adjoint().matmul(&b);
        let want = &CMatrix::identity(64)
            + &quadrature_matrix(64, p.theta).scale(real(2.0 * 2f64.sqrt() * 0.3 * res));
        assert!((&comm.top_left(32) - &want.top_left(32)).max_abs() < 1e-10);
    }

    #[test]
    fn coherent_eigen_residual() {
        let coh = HompssSpec::coherent(cplx(2.0, 1.0));
        let f = project_state(&coh).unwrap();
        assert!(eigen_residual(&coh, &f).unwrap() < 1e-8);
    }

    #[test]
    fn hamiltonian_coefficient_examples() {
        let p = build_params(0.8f64, 0.0, 0.4, Branch::MinusMinus).unwrap();
        let k = hamiltonian_coefficients(&p);
        assert!((k.b1.re - 0.24).abs() < 1e-15);
        assert!((k.a0.re - (0.8f64.sinh().powi(2) + 0.12)).abs() < 1e-14);
        assert!((k.a0.re - 0.908_732).abs() < 1e-6);
        // a^dag4 coefficient of |gamma|^2 X^4
        assert!((k.a4 - cplx(0.04, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hamiltonian_reduces_to_number_operator() {
        let id = build_params(0.0, 0.0, 0.0, Branch::PlusPlus).unwrap();
        let h = hamiltonian_matrix(&id, 12).unwrap();
        let (a, ad) = ladder_matrices::<f64>(12);
        assert!((&h - &ad.matmul(&a)).max_abs() < 1e-13);
    }

    #[test]
    fn hamiltonian_equals_b_dagger_b() {
        for (i, branch) in Branch::FIXED.into_iter().enumerate() {
            let p =
                build_params(0.3 + 0.2 * i as f64, -1.0 + 0.7 * i as f64, 0.35, branch).unwrap();
            let s = HompssSpec::new(p, 0.0, 0.0).unwrap();
            let n = 40;
            let b = b_matrix(&s, n + DEFAULT_GUARD).unwrap();
            let btb = b.adjoint().matmul(&b).top_left(n);
            let h = hamiltonian_matrix(&p, n).unwrap();
            let diff = (&h - &btb).max_abs();
            assert!(diff < 1e-8 * (1.0 + h.max_abs()), "{branch}: {diff}");
            assert_eq!(h.hermiticity_defect(), 0.0);
        }
    }

    #[test]
    fn hamiltonian_ground_energy_vanishes() {
        let p = build_params(0.5, FRAC_PI_3, 0.3, Branch::MinusMinus).unwrap();
        let h = hamiltonian_matrix(&p, 80).unwrap();
        let ev = hermitian_eigenvalues(&h);
        assert!(ev[0].abs() < 1e-6, "{}", ev[0]);
    }

    #[test]
    fn unitary_factor_examples() {
        let coh = HompssSpec::coherent(cplx(2.0, 0.0));
        let uf = unitary_factors(&coh).unwrap();
        assert!((uf.alpha_theta - cplx(2.0, 0.0)).norm() < 1e-15);
        assert!(uf.zeta_theta.norm() < 1e-15);

        let s = spec(0.4, 0.4, Branch::PlusPlus, cplx(3.0, 0.0));
        let uf = unitary_factors(&s).unwrap();
        assert!((uf.zeta_theta - cplx(0.8, 0.0)).norm() < 1e-14);

        let s = spec(FRAC_PI_2, 0.4, Branch::MinusPlus, cplx(3.0, 0.0));
        let uf = unitary_factors(&s).unwrap();
        assert!((uf.mixing_strength.abs() - 2f64.sqrt() * 0.4 * (-0.8f64).exp()).abs() < 1e-14);
        assert!((uf.zeta_theta.norm() - 0.8).abs() < 1e-14);
    }

    #[test]
    fn gaussian_generation_matches_projection() {
        let s = spec(0.7, 0.0, Branch::MinusMinus, cplx(1.0, 0.5));
        let u = generate_via_unitary(&s, 60).unwrap();
        let p = project_spec(&s, 60).unwrap();
        assert!(1.0 - p.fidelity(&u) < 1e-10);
    }

    #[test]
    fn mixing_factor_is_unitary_on_interior() {
        let s = spec(FRAC_PI_3, 0.4, Branch::MinusMinus, cplx(3.0, 0.0));
        let u = factor_matrix(&s, Factor::Mixing, 96).unwrap();
        let uu = u.adjoint().matmul(&u).top_left(48);
        assert!((&uu - &CMatrix::identity(48)).max_abs() < 1e-8);
    }

    #[test]
    fn zero_beta_state_has_conjugation_parity() {
        // psi(-x) = conj(psi(x)) at theta = 0, so c_n^* = (-1)^n c_n.
        let s = spec(0.0, 0.3, Branch::PlusPlus, cplx(0.0, 0.0));
        let f = generate_via_unitary(&s, 48).unwrap();
        for (n, c) in f.coeffs.iter().enumerate() {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((c.conj() - c * sign).norm() < 1e-8, "n = {n}");
        }
    }
}
