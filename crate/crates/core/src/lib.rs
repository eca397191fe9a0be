//! Higher-order nonlinear minimum-uncertainty squeezed states.
//!
//! A state is the eigenvector of `b = mu a + nu a^dag + gamma F(X_theta)` for
//! canonical parameters, with `F(x) = x^2` by default. Everything is generic
//! over `f32`/`f64` through [`Real`]; the `*64` aliases fix the scalar.

#![allow(clippy::needless_range_loop)]

pub mod canonical;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod quasiprob;
pub mod scalar;
pub mod states;
pub mod stats;

pub use canonical::{
    build_params, canonicity_residual, solve_delta, Branch, CanonicalParams, Sign,
};
pub use error::{Error, Result};
pub use fock::{generate_via_unitary, project_state, project_to_fock, FockVector};
pub use quasiprob::{q_function, wigner, wigner_marginal, QuasiKind, QuasiProbGrid};
pub use scalar::{Real, C};
pub use states::{evaluate_hompss, Grid, GridWavefunction, HompssSpec, Polynomial};
pub use stats::{g2, g4, mean_photon_number, pnd, quadrature_variances, uncertainty_product};

pub type CanonicalParams64 = CanonicalParams<f64>;
pub type HompssSpec64 = HompssSpec<f64>;
pub type Grid64 = Grid<f64>;
pub type GridWavefunction64 = GridWavefunction<f64>;
pub type FockVector64 = FockVector<f64>;
pub type QuasiProbGrid64 = QuasiProbGrid<f64>;
pub type Complex64 = C<f64>;
