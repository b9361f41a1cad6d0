//! Front-tracking solver and stability diagnostics for 1-D 2x2 genuinely
//! nonlinear hyperbolic conservation laws
//!
//! ```text
//! u_t + [f(u)]_x = 0,    u = (u1, u2)
//! ```
//!
//! The crate provides, bottom to top:
//!
//! * [`system`] — flux systems, eigenstructure, entropy pairs, and the
//!   structural hypothesis checks (genuine nonlinearity, cross-family
//!   convexity, entropy compatibility);
//! * [`curves`] — shock and rarefaction wave curves, Rankine-Hugoniot
//!   speeds, Riemann invariants;
//! * [`riemann`] — the approximate Riemann solver with rarefactions split
//!   into pieces of strength at most `nu` and weak shocks on interpolated
//!   curves;
//! * [`fronttrack`] — event-driven evolution of piecewise-constant
//!   solutions (classical and shifted), Glimm functional bookkeeping;
//! * [`weight`] — the exponential weight `a(t,x)` built from the wave
//!   configuration, with front-ratio and decay checks;
//! * [`relent`] — relative entropy machinery: pseudo-distances for shocks
//!   and rarefaction fans, dissipation functionals, positivity scans;
//! * [`data`] — rough initial data generators, mollification, fractional
//!   Sobolev seminorms, commutator decay measurements.

pub mod curves;
pub mod data;
pub mod error;
pub mod fronttrack;
pub mod linalg;
pub mod regression;
pub mod relent;
pub mod riemann;
pub mod system;
pub mod weight;

pub use error::{Error, Result};
pub use linalg::{Mat2, State};
