//! Crate-wide error type.

use crate::linalg::State;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("eigenvalue gap {gap:.3e} below hyperbolicity tolerance at ({:.6}, {:.6})", state.u1, state.u2)]
    NonHyperbolic { state: State, gap: f64 },

    #[error("state ({:.6}, {:.6}) outside the validated ball of `{system}`", state.u1, state.u2)]
    OutOfDomain { system: String, state: State },

    #[error("system `{0}` carries no entropy pair")]
    NoEntropy(String),

    #[error("wave-curve trajectory left the validated ball at parameter {at}")]
    LeftDomain { at: f64 },

    #[error("shock-curve continuation stalled at parameter {at}: {detail}")]
    ContinuationFailure { at: f64, detail: String },

    #[error("computed shock branch violates Lax admissibility by {excess:.3e} at parameter {at}")]
    LaxViolation { at: f64, excess: f64 },

    #[error("no Riemann-invariant chart available for `{system}`: {detail}")]
    NoChart { system: String, detail: String },

    #[error("Newton iteration for the Riemann problem did not converge (residual {residual:.3e})")]
    NewtonDivergence { residual: f64 },

    #[error("wave fan speeds are not strictly increasing: {detail}")]
    FanOrderingViolation { detail: String },

    #[error("initial data violates the smallness domain: {detail}")]
    DomainViolation { detail: String },

    #[error("interaction count exceeded the cap of {cap}")]
    InteractionOverflow { cap: usize },

    #[error("companion traces unavailable at t={t}, x={x}")]
    TraceUnavailable { t: f64, x: f64 },

    #[error("weight ratio {ratio} outside the admissible bracket [{lo}, {hi}]")]
    WeightBracketViolation { ratio: f64, lo: f64, hi: f64 },

    #[error("weight exponent {c} outside the admissible range [{lo}, {hi}]")]
    CRangeViolation { c: f64, lo: f64, hi: f64 },

    #[error("grid spacing {dx:.3e} too coarse for mollification width {delta:.3e}")]
    ResolutionTooCoarse { dx: f64, delta: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
