//! Dense square complex matrices: products, Pade matrix exponential and a
//! Hermitian eigenvalue solver.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_traits::Zero;
use rayon::prelude::*;

use crate::scalar::{real, Real, C};

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    n: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![C::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = real(T::one());
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        CMatrix { n, data }
    }

    pub fn from_diagonal(diag: &[C<T>]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = vec![C::zero(); n * n];
        out.par_chunks_mut(n.max(1))
            .enumerate()
            .for_each(|(i, row)| {
                for k in 0..n {
                    let a = self.data[i * n + k];
                    if a.is_zero() {
                        continue;
                    }
                    let other_row = &other.data[k * n..(k + 1) * n];
                    for (o, &b) in row.iter_mut().zip(other_row) {
                        *o += a * b;
                    }
                }
            });
        CMatrix { n, data: out }
    }

    pub fn apply(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(self.n, v.len(), "dimension mismatch");
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(C::zero(), |acc, (&a, &x)| acc + a * x)
            })
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C<T>) -> Self {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> T {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|x| x.norm()).fold(T::zero(), T::max)
    }

    /// Leading `m x m` block.
    pub fn top_left(&self, m: usize) -> Self {
        assert!(m <= self.n);
        Self::from_fn(m, |i, j| self[(i, j)])
    }

    pub fn trace(&self) -> C<T> {
        (0..self.n)
            .map(|i| self[(i, i)])
            .fold(C::zero(), |a, b| a + b)
    }

    /// Largest `|H_ij - conj(H_ji)|`.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Solves `self * X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Option<Self> {
        let n = self.n;
        assert_eq!(n, rhs.n, "dimension mismatch");
        let mut a = self.data.clone();
        let mut b = rhs.data.clone();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| {
                    a[x * n + col]
                        .norm()
                        .partial_cmp(&a[y * n + col].norm())
                        .expect("finite entries")
                })
                .expect("non-empty range");
            if a[pivot * n + col].norm() == T::zero() {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                    b.swap(col * n + j, pivot * n + j);
                }
            }
            let inv = C::new(T::one(), T::zero()) / a[col * n + col];
            for row in col + 1..n {
                let factor = a[row * n + col] * inv;
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = a[col * n + j];
                    a[row * n + j] -= factor * v;
                }
                for j in 0..n {
                    let v = b[col * n + j];
                    b[row * n + j] -= factor * v;
                }
            }
        }
        for col in (0..n).rev() {
            let inv = C::new(T::one(), T::zero()) / a[col * n + col];
            for j in 0..n {
                let mut acc = b[col * n + j];
                for k in col + 1..n {
                    acc -= a[col * n + k] * b[k * n + j];
                }
                b[col * n + j] = acc * inv;
            }
        }
        Some(CMatrix { n, data: b })
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.n + j]
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: Self) -> CMatrix<T> {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        CMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: Self) -> CMatrix<T> {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        CMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: Self) -> CMatrix<T> {
        self.matmul(rhs)
    }
}

/// `sum_k c_k M_k`
fn lincomb<T: Real>(terms: &[(T, &CMatrix<T>)]) -> CMatrix<T> {
    let n = terms[0].1.n;
    let mut out = CMatrix::zeros(n);
    for &(c, m) in terms {
        for (o, &x) in out.data.iter_mut().zip(&m.data) {
            *o += x * c;
        }
    }
    out
}

// Higham (2005), scaling and squaring with diagonal Pade approximants.
const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA_F64: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13_F64: f64 = 5.371920351148152;

const THETA_F32: [(usize, f64); 2] = [(3, 4.258730016922831e-1), (5, 1.880152677804762e0)];
const THETA7_F32: f64 = 3.925_724_783_138_66;

/// Matrix exponential.
pub fn expm<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let n = a.n;
    if n == 0 {
        return a.clone();
    }
    let single = T::epsilon() > T::lit(1e-10);
    let norm = a.norm1().to_f64().unwrap_or(f64::INFINITY);
    let (low, top_degree, top_theta) = if single {
        (&THETA_F32[..], 7, THETA7_F32)
    } else {
        (&THETA_F64[..], 13, THETA13_F64)
    };
    for &(m, theta) in low {
        if norm <= theta {
            return pade(a, m);
        }
    }
    let s = if norm > top_theta {
        (norm / top_theta).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a.scale(real(T::lit(0.5f64.powi(s))));
    let mut r = pade(&scaled, top_degree);
    for _ in 0..s {
        r = r.matmul(&r);
    }
    r
}

fn pade<T: Real>(a: &CMatrix<T>, m: usize) -> CMatrix<T> {
    let ident = CMatrix::identity(a.n);
    let a2 = a.matmul(a);
    let (u, v) = match m {
        3 | 5 | 7 | 9 => {
            let b: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let mut powers = vec![ident.clone(), a2.clone()];
            while powers.len() <= m / 2 {
                let next = powers.last().expect("non-empty").matmul(&a2);
                powers.push(next);
            }
            let odd: Vec<(T, &CMatrix<T>)> = powers
                .iter()
                .enumerate()
                .map(|(k, p)| (T::lit(b[2 * k + 1]), p))
                .collect();
            let even: Vec<(T, &CMatrix<T>)> = powers
                .iter()
                .enumerate()
                .map(|(k, p)| (T::lit(b[2 * k]), p))
                .collect();
            (a.matmul(&lincomb(&odd)), lincomb(&even))
        }
        13 => {
            let b = |k: usize| T::lit(B13[k]);
            let a4 = a2.matmul(&a2);
            let a6 = a4.matmul(&a2);
            let inner_u = lincomb(&[(b(13), &a6), (b(11), &a4), (b(9), &a2)]);
            let u = a6.matmul(&inner_u);
            let u = &u + &lincomb(&[(b(7), &a6), (b(5), &a4), (b(3), &a2), (b(1), &ident)]);
            let u = a.matmul(&u);
            let inner_v = lincomb(&[(b(12), &a6), (b(10), &a4), (b(8), &a2)]);
            let v = a6.matmul(&inner_v);
            let v = &v + &lincomb(&[(b(6), &a6), (b(4), &a4), (b(2), &a2), (b(0), &ident)]);
            (u, v)
        }
        _ => unreachable!("unsupported Pade degree {m}"),
    };
    let p = &v + &u;
    let q = &v - &u;
    q.solve(&p).expect("Pade denominator is nonsingular")
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// `H = A + iB` is embedded as the real symmetric `[[A, -B], [B, A]]`, whose
/// spectrum is that of `H` with every eigenvalue doubled.
pub fn hermitian_eigenvalues<T: Real>(h: &CMatrix<T>) -> Vec<T> {
    let n = h.n;
    let m = 2 * n;
    let mut s = vec![T::zero(); m * m];
    for i in 0..n {
        for j in 0..n {
            // Symmetrize so rounding in the input does not leak into the solver.
            let z = (h[(i, j)] + h[(j, i)].conj()) / T::lit(2.0);
            s[i * m + j] = z.re;
            s[(i + n) * m + j + n] = z.re;
            s[(i + n) * m + j] = z.im;
            s[i * m + j + n] = -z.im;
        }
    }
    let (mut d, mut e) = tridiagonalize(&mut s, m);
    tql(&mut d, &mut e);
    d.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    d.into_iter().step_by(2).collect()
}

/// Householder reduction of a real symmetric matrix to tridiagonal form.
/// Returns the diagonal and the sub-diagonal (`e[i]` couples `i` and `i + 1`).
fn tridiagonalize<T: Real>(a: &mut [T], n: usize) -> (Vec<T>, Vec<T>) {
    let mut v = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    for k in 0..n.saturating_sub(2) {
        let norm = (k + 1..n).map(|i| a[i * n + k].powi(2)).sum::<T>().sqrt();
        if norm == T::zero() {
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let alpha = if x0 > T::zero() { -norm } else { norm };
        for i in k + 1..n {
            v[i] = a[i * n + k];
        }
        v[k + 1] -= alpha;
        let vnorm = (k + 1..n).map(|i| v[i] * v[i]).sum::<T>().sqrt();
        if vnorm == T::zero() {
            continue;
        }
        for i in k + 1..n {
            v[i] /= vnorm;
        }
        // A <- H A H on the trailing block, H = I - 2 v v^T.
        for i in k..n {
            w[i] = (k + 1..n).map(|j| a[i * n + j] * v[j]).sum();
        }
        let kk: T = (k + 1..n).map(|i| v[i] * w[i]).sum();
        let two = T::lit(2.0);
        for i in k..n {
            let vi = if i > k { v[i] } else { T::zero() };
            for j in k..n {
                let vj = if j > k { v[j] } else { T::zero() };
                a[i * n + j] += -two * vi * w[j] - two * w[i] * vj + T::lit(4.0) * kk * vi * vj;
            }
        }
    }
    let d = (0..n).map(|i| a[i * n + i]).collect();
    let mut e: Vec<T> = (0..n.saturating_sub(1))
        .map(|i| a[(i + 1) * n + i])
        .collect();
    e.push(T::zero());
    (d, e)
}

/// Implicit QL iteration on a symmetric tridiagonal matrix.
fn tql<T: Real>(d: &mut [T], e: &mut [T]) {
    let n = d.len();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            assert!(iterations < 100, "QL iteration failed to converge");
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r } else { -r });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
}
