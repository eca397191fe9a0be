use thiserror::Error;

/// Errors raised by the library.
///
/// Numeric payloads are carried as `f64` so the type stays independent of the
/// scalar the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no sign change of the canonicity residual on (-pi, pi]")]
    NoRoot,

    #[error("degenerate homodyne angle: theta = 0 (mod pi) with phi = 0 forces cos(delta) = 0, roots {roots:?}")]
    Degenerate { roots: [f64; 2] },

    #[error("transformation is not canonical (residual {residual:e})")]
    NotCanonical { residual: f64 },

    #[error("grid does not cover the state: {0}")]
    GridTooNarrow(String),

    #[error("grid spacing too coarse: normalization off by {defect:e}")]
    GridUnderResolved { defect: f64 },

    #[error("Fock cutoff {cutoff} too small: truncated mass {deficit:e}")]
    CutoffTooSmall { cutoff: usize, deficit: f64 },

    #[error("operation requires theta in {{0, pi/2}} and phi = 0, got theta = {theta}")]
    WrongAngle { theta: f64 },

    #[error("representation change undefined for a rotation angle that is a multiple of pi")]
    DegenerateAngle,

    #[error("closed forms require the quadratic nonlinearity F(x) = x^2")]
    NotQuadratic,

    #[error("closed forms require one of the four fixed sign branches")]
    GenericBranch,

    #[error("analytic photon number requires |gamma| = 0 (got {gamma_mod})")]
    NonzeroGamma { gamma_mod: f64 },

    #[error("normalized correlation undefined for zero mean photon number")]
    ZeroMeanPhoton,

    #[error("expected a {expected} distribution")]
    WrongKind { expected: &'static str },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
