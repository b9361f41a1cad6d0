//! 2x2 flux systems: eigenstructure, entropy pairs, and structural checks.
//!
//! A [`FluxSystem`] is validated on a ball `B_r(d)` around its center state
//! `d`. Inside that ball the Jacobian must be strictly hyperbolic and both
//! characteristic fields genuinely nonlinear; the checks in this module
//! measure exactly that on sampled grids.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, State};

/// Minimal eigenvalue gap accepted before a state is declared non-hyperbolic.
pub const HYPERBOLICITY_TOL: f64 = 1e-6;

/// Entropy / entropy-flux pair `(eta, q)` with `grad q = grad eta * f'`.
pub trait EntropyPair: Send + Sync {
    fn eta(&self, u: State) -> f64;
    fn grad_eta(&self, u: State) -> State;
    fn hess_eta(&self, u: State) -> Mat2;
    fn q(&self, u: State) -> f64;
}

/// Coordinates in which rarefaction curves are straight coordinate lines:
/// `v2` is constant along 1-rarefaction curves and `v1` along 2-curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RCoords {
    pub v1: f64,
    pub v2: f64,
}

impl RCoords {
    pub fn new(v1: f64, v2: f64) -> Self {
        RCoords { v1, v2 }
    }

    pub fn component(self, family: u8) -> f64 {
        match family {
            1 => self.v1,
            2 => self.v2,
            _ => panic!("family must be 1 or 2"),
        }
    }

    pub fn dist(self, o: RCoords) -> f64 {
        ((self.v1 - o.v1).powi(2) + (self.v2 - o.v2).powi(2)).sqrt()
    }
}

/// Closed-form chart between physical states and Riemann coordinates.
#[allow(clippy::wrong_self_convention)]
pub trait RiemannChart: Send + Sync {
    fn to_coords(&self, u: State) -> RCoords;
    fn from_coords(&self, v: RCoords) -> State;
}

/// A 2x2 flux with analytic Jacobian and second derivative, validated on a
/// ball around a reference state.
pub trait FluxSystem: Send + Sync {
    fn name(&self) -> &str;
    fn flux(&self, u: State) -> State;
    fn jacobian(&self, u: State) -> Mat2;
    /// Hessians of the two flux components, so that
    /// `f''(u)(a, b) = (a^T H1 b, a^T H2 b)`.
    fn hessians(&self, u: State) -> (Mat2, Mat2);
    /// Reference state `d` at the center of the validated neighborhood.
    fn center(&self) -> State;
    /// Radius of the validated neighborhood.
    fn radius(&self) -> f64;
    /// Cap on the shock-curve continuation parameter.
    fn max_shock_param(&self) -> f64;
    /// Bound on |lambda_i| over the validated ball.
    fn speed_bound(&self) -> f64;

    fn entropy(&self) -> Option<&dyn EntropyPair> {
        None
    }

    fn chart(&self) -> Option<&dyn RiemannChart> {
        None
    }

    /// Bilinear second derivative `f''(u)(a, b)`.
    fn second_derivative(&self, u: State, a: State, b: State) -> State {
        let (h1, h2) = self.hessians(u);
        State::new(h1.quad(a, b), h2.quad(a, b))
    }

    fn contains(&self, u: State) -> bool {
        u.is_finite() && (u - self.center()).norm() <= self.radius() + 1e-9
    }

    /// Speed of information: dominates all wave and shift speeds as well as
    /// the constant in the `|q(a;b)| <= c eta(a|b)` domination.
    fn info_speed(&self) -> f64 {
        2.0 * self.speed_bound()
    }
}

/// Eigenstructure of the Jacobian at one state. Right eigenvectors are unit
/// length and oriented so the field is genuinely nonlinear with positive
/// sign; left eigenvectors satisfy `l_i . r_j = delta_ij`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EigenData {
    pub lambda1: f64,
    pub lambda2: f64,
    pub r1: State,
    pub r2: State,
    pub l1: State,
    pub l2: State,
}

impl EigenData {
    pub fn lambda(&self, family: u8) -> f64 {
        match family {
            1 => self.lambda1,
            2 => self.lambda2,
            _ => panic!("family must be 1 or 2"),
        }
    }

    pub fn r(&self, family: u8) -> State {
        match family {
            1 => self.r1,
            2 => self.r2,
            _ => panic!("family must be 1 or 2"),
        }
    }

    pub fn l(&self, family: u8) -> State {
        match family {
            1 => self.l1,
            2 => self.l2,
            _ => panic!("family must be 1 or 2"),
        }
    }
}

fn eigenvector_for(a: Mat2, lambda: f64) -> State {
    // (A - lambda I) v = 0; pick the better-conditioned row.
    let c1 = State::new(a.b, lambda - a.a);
    let c2 = State::new(lambda - a.d, a.c);
    let v = if c1.norm() >= c2.norm() { c1 } else { c2 };
    v.normalized()
}

/// Eigenstructure of `f'(u)`, with orientation fixed so that
/// `grad lambda_i . r_i > 0` (falling back to a positive leading component
/// for linearly degenerate directions).
pub fn eigensystem(sys: &dyn FluxSystem, u: State) -> Result<EigenData> {
    if !sys.contains(u) {
        return Err(Error::OutOfDomain {
            system: sys.name().to_string(),
            state: u,
        });
    }
    let a = sys.jacobian(u);
    let disc = a.trace() * a.trace() - 4.0 * a.det();
    if disc <= 0.0 {
        return Err(Error::NonHyperbolic {
            state: u,
            gap: if disc.is_finite() { 0.0 } else { f64::NAN },
        });
    }
    let gap = disc.sqrt();
    if gap < HYPERBOLICITY_TOL {
        return Err(Error::NonHyperbolic { state: u, gap });
    }
    let lambda1 = 0.5 * (a.trace() - gap);
    let lambda2 = 0.5 * (a.trace() + gap);

    let mut r1 = eigenvector_for(a, lambda1);
    let mut r2 = eigenvector_for(a, lambda2);

    // Left eigenvectors as rows of [r1 r2]^{-1}.
    let det = r1.u1 * r2.u2 - r1.u2 * r2.u1;
    if det.abs() < 1e-12 {
        return Err(Error::NonHyperbolic { state: u, gap });
    }
    let mut l1 = State::new(r2.u2 / det, -r2.u1 / det);
    let mut l2 = State::new(-r1.u2 / det, r1.u1 / det);

    // Orientation: grad lambda_i . r_i = l_i f''(r_i, r_i) must be positive.
    let orient = |r: &mut State, l: &mut State| {
        let g = l.dot(sys.second_derivative(u, *r, *r));
        if g < -1e-10 {
            *r = -*r;
            *l = -*l;
        } else if g.abs() <= 1e-10 {
            let lead = if r.u1.abs() > 1e-12 { r.u1 } else { r.u2 };
            if lead < 0.0 {
                *r = -*r;
                *l = -*l;
            }
        }
    };
    orient(&mut r1, &mut l1);
    orient(&mut r2, &mut l2);

    Ok(EigenData {
        lambda1,
        lambda2,
        r1,
        r2,
        l1,
        l2,
    })
}

/// Gradient of `lambda_family` at `u`, from first-order eigenvalue
/// perturbation: `d lambda_i [w] = l_i . f''(r_i, w)`.
pub fn grad_lambda(sys: &dyn FluxSystem, u: State, ed: &EigenData, family: u8) -> State {
    let r = ed.r(family);
    let l = ed.l(family);
    let d1 = l.dot(sys.second_derivative(u, r, State::new(1.0, 0.0)));
    let d2 = l.dot(sys.second_derivative(u, r, State::new(0.0, 1.0)));
    State::new(d1, d2)
}

/// Directional derivative of the unit eigenvector field `r_family` along `w`,
/// from eigenvector perturbation theory (with the unit-norm constraint).
pub fn eigvec_derivative(
    sys: &dyn FluxSystem,
    u: State,
    ed: &EigenData,
    family: u8,
    w: State,
) -> State {
    let (ri, rj, lj, li_lam, lj_lam) = match family {
        1 => (ed.r1, ed.r2, ed.l2, ed.lambda1, ed.lambda2),
        2 => (ed.r2, ed.r1, ed.l1, ed.lambda2, ed.lambda1),
        _ => panic!("family must be 1 or 2"),
    };
    let beta = lj.dot(sys.second_derivative(u, ri, w)) / (li_lam - lj_lam);
    let alpha = -beta * ri.dot(rj);
    ri * alpha + rj * beta
}

/// One grid entry of the genuine-nonlinearity report: the quantity
/// `l_i f''(r_i, r_i) = (grad lambda_i . r_i)(l_i . r_i)`.
#[derive(Debug, Clone, Serialize)]
pub struct GnlEntry {
    pub state: State,
    pub family: u8,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GnlReport {
    pub entries: Vec<GnlEntry>,
    /// States/families where the quantity fails to be strictly positive.
    pub flagged: Vec<GnlEntry>,
}

impl GnlReport {
    pub fn all_positive(&self) -> bool {
        self.flagged.is_empty()
    }

    pub fn min_value(&self) -> f64 {
        self.entries.iter().map(|e| e.value).fold(f64::INFINITY, f64::min)
    }
}

/// Per-state, per-family genuine nonlinearity quantities on a grid.
pub fn check_genuine_nonlinearity(sys: &dyn FluxSystem, grid: &[State]) -> Result<GnlReport> {
    let mut entries = Vec::with_capacity(grid.len() * 2);
    let mut flagged = Vec::new();
    for &u in grid {
        let ed = eigensystem(sys, u)?;
        for family in [1u8, 2u8] {
            let r = ed.r(family);
            let value = ed.l(family).dot(sys.second_derivative(u, r, r));
            let entry = GnlEntry { state: u, family, value };
            if value <= 0.0 {
                flagged.push(entry.clone());
            }
            entries.push(entry);
        }
    }
    Ok(GnlReport { entries, flagged })
}

/// One entry of the cross-family convexity report: `l_i f''(r_j, r_j)` for
/// `i != j`.
#[derive(Debug, Clone, Serialize)]
pub struct CrossFamilyEntry {
    pub state: State,
    /// The `(i, j)` pair, `i != j`.
    pub left_family: u8,
    pub vector_family: u8,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SmollerJohnsonReport {
    pub entries: Vec<CrossFamilyEntry>,
    /// Non-strict verdict: every cross value `>= -tol`.
    pub passes: bool,
}

impl SmollerJohnsonReport {
    pub fn min_value(&self) -> f64 {
        self.entries.iter().map(|e| e.value).fold(f64::INFINITY, f64::min)
    }
}

/// Cross-family second-derivative signs: the necessary condition for the
/// convexity/concavity hypothesis on `u -> l_i . f(u)`.
pub fn check_smoller_johnson(sys: &dyn FluxSystem, grid: &[State]) -> Result<SmollerJohnsonReport> {
    let mut entries = Vec::with_capacity(grid.len() * 2);
    let mut passes = true;
    for &u in grid {
        let ed = eigensystem(sys, u)?;
        for (i, j) in [(1u8, 2u8), (2u8, 1u8)] {
            let rj = ed.r(j);
            let value = ed.l(i).dot(sys.second_derivative(u, rj, rj));
            if value < -1e-12 {
                passes = false;
            }
            entries.push(CrossFamilyEntry {
                state: u,
                left_family: i,
                vector_family: j,
                value,
            });
        }
    }
    Ok(SmollerJohnsonReport { entries, passes })
}

/// Max residual of the compatibility relation `grad q - grad eta * f'` over
/// the grid. The gradient of `q` is taken by five-point finite differences
/// so a corrupted flux shows up directly.
pub fn check_entropy_pair(sys: &dyn FluxSystem, grid: &[State]) -> Result<f64> {
    let ent = sys
        .entropy()
        .ok_or_else(|| Error::NoEntropy(sys.name().to_string()))?;
    let h = 1e-3;
    let mut max_residual: f64 = 0.0;
    for &u in grid {
        let grad_q = State::new(
            fd5(|x| ent.q(State::new(x, u.u2)), u.u1, h),
            fd5(|y| ent.q(State::new(u.u1, y)), u.u2, h),
        );
        let expected = sys.jacobian(u).vec_mul(ent.grad_eta(u));
        max_residual = max_residual.max((grad_q - expected).norm());
    }
    Ok(max_residual)
}

/// Five-point centered derivative, O(h^4).
fn fd5(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Finite-difference Jacobian (centered), for validating analytic forms.
pub fn fd_jacobian(sys: &dyn FluxSystem, u: State, h: f64) -> Mat2 {
    let e1 = State::new(h, 0.0);
    let e2 = State::new(0.0, h);
    let d1 = (sys.flux(u + e1) - sys.flux(u - e1)) / (2.0 * h);
    let d2 = (sys.flux(u + e2) - sys.flux(u - e2)) / (2.0 * h);
    Mat2::new(d1.u1, d2.u1, d1.u2, d2.u2)
}

/// Finite-difference directional second derivative `f''(u)(w, w)`.
pub fn fd_second_derivative(sys: &dyn FluxSystem, u: State, w: State, h: f64) -> State {
    let p = sys.flux(u + w * h);
    let m = sys.flux(u - w * h);
    let c = sys.flux(u);
    (p + m - c * 2.0) / (h * h)
}

/// Square grid of `n x n` states covering the ball of the given radius
/// around the center (points outside the ball are dropped).
pub fn ball_grid(center: State, radius: f64, n: usize) -> Vec<State> {
    let mut grid = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x = -radius + 2.0 * radius * (i as f64) / ((n - 1) as f64);
            let y = -radius + 2.0 * radius * (j as f64) / ((n - 1) as f64);
            let u = center + State::new(x, y);
            if (u - center).norm() <= radius {
                grid.push(u);
            }
        }
    }
    grid
}

/// Sampled extreme values of `lambda_family` over the validated ball.
pub fn speed_interval(sys: &dyn FluxSystem, family: u8) -> Result<(f64, f64)> {
    let grid = ball_grid(sys.center(), sys.radius(), 21);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for u in grid {
        let ed = eigensystem(sys, u)?;
        let l = ed.lambda(family);
        lo = lo.min(l);
        hi = hi.max(l);
    }
    Ok((lo, hi))
}

// ---------------------------------------------------------------------------
// Builtin systems
// ---------------------------------------------------------------------------

/// Quadratic flux fixture: genuinely nonlinear near the origin in both
/// families, yet with `l_1 f''(r_2, r_2) < 0`, so the cross-family
/// convexity hypothesis fails on every neighborhood of the origin.
pub struct QuadraticFlux;

impl FluxSystem for QuadraticFlux {
    fn name(&self) -> &str {
        "appendix-a-quadratic"
    }

    fn flux(&self, u: State) -> State {
        let (x, y) = (u.u1, u.u2);
        State::new(
            (x - 1.0) * (x - 1.0) + 3.0 * x * y - y * y,
            (y + 1.0) * (y + 1.0) + 3.0 * x * y - x * x,
        )
    }

    fn jacobian(&self, u: State) -> Mat2 {
        let (x, y) = (u.u1, u.u2);
        Mat2::new(
            2.0 * (x - 1.0) + 3.0 * y,
            3.0 * x - 2.0 * y,
            3.0 * y - 2.0 * x,
            2.0 * (y + 1.0) + 3.0 * x,
        )
    }

    fn hessians(&self, _u: State) -> (Mat2, Mat2) {
        (Mat2::new(2.0, 3.0, 3.0, -2.0), Mat2::new(-2.0, 3.0, 3.0, 2.0))
    }

    fn center(&self) -> State {
        State::ZERO
    }

    fn radius(&self) -> f64 {
        0.15
    }

    fn max_shock_param(&self) -> f64 {
        0.12
    }

    fn speed_bound(&self) -> f64 {
        3.0
    }
}

/// Isentropic gas dynamics in Lagrangian coordinates with pressure law
/// `p(v) = v^{-gamma}`: state `(v, w)` with flux `(-w, p(v))`.
pub struct PSystem {
    gamma: f64,
    name: String,
    chart: PSystemChart,
    entropy: PSystemEntropy,
}

impl PSystem {
    pub fn new(gamma: f64) -> Self {
        let center = State::new(1.0, 0.0);
        let name = if (gamma - gamma.round()).abs() < 1e-12 {
            format!("p-system-gamma{}", gamma.round() as i64)
        } else {
            format!("p-system-gamma{gamma}")
        };
        PSystem {
            gamma,
            name,
            chart: PSystemChart::new(gamma, center),
            entropy: PSystemEntropy { gamma },
        }
    }

    fn pressure(&self, v: f64) -> f64 {
        v.powf(-self.gamma)
    }

    fn dp(&self, v: f64) -> f64 {
        -self.gamma * v.powf(-self.gamma - 1.0)
    }

    fn d2p(&self, v: f64) -> f64 {
        self.gamma * (self.gamma + 1.0) * v.powf(-self.gamma - 2.0)
    }
}

impl FluxSystem for PSystem {
    fn name(&self) -> &str {
        &self.name
    }

    fn flux(&self, u: State) -> State {
        State::new(-u.u2, self.pressure(u.u1))
    }

    fn jacobian(&self, u: State) -> Mat2 {
        Mat2::new(0.0, -1.0, self.dp(u.u1), 0.0)
    }

    fn hessians(&self, u: State) -> (Mat2, Mat2) {
        (Mat2::new(0.0, 0.0, 0.0, 0.0), Mat2::new(self.d2p(u.u1), 0.0, 0.0, 0.0))
    }

    fn center(&self) -> State {
        State::new(1.0, 0.0)
    }

    fn radius(&self) -> f64 {
        0.45
    }

    fn max_shock_param(&self) -> f64 {
        0.4
    }

    fn speed_bound(&self) -> f64 {
        // |lambda| = sqrt(gamma) v^{-(gamma+1)/2}, maximal at the smallest
        // volume in the ball.
        let vmin = self.center().u1 - self.radius();
        self.gamma.sqrt() * vmin.powf(-(self.gamma + 1.0) / 2.0) * 1.05
    }

    fn entropy(&self) -> Option<&dyn EntropyPair> {
        Some(&self.entropy)
    }

    fn chart(&self) -> Option<&dyn RiemannChart> {
        Some(&self.chart)
    }
}

struct PSystemEntropy {
    gamma: f64,
}

impl PSystemEntropy {
    /// Potential with `P'(v) = -p(v)`, anchored at the center volume.
    fn potential(&self, v: f64) -> f64 {
        if (self.gamma - 1.0).abs() < 1e-12 {
            -v.ln()
        } else {
            (v.powf(1.0 - self.gamma) - 1.0) / (self.gamma - 1.0)
        }
    }
}

impl EntropyPair for PSystemEntropy {
    fn eta(&self, u: State) -> f64 {
        0.5 * u.u2 * u.u2 + self.potential(u.u1)
    }

    fn grad_eta(&self, u: State) -> State {
        State::new(-u.u1.powf(-self.gamma), u.u2)
    }

    fn hess_eta(&self, u: State) -> Mat2 {
        Mat2::diag(self.gamma * u.u1.powf(-self.gamma - 1.0), 1.0)
    }

    fn q(&self, u: State) -> f64 {
        u.u2 * u.u1.powf(-self.gamma)
    }
}

/// Closed-form Riemann coordinates for the p-system, scaled so coordinate
/// increments match arclength at the center state.
struct PSystemChart {
    gamma: f64,
    center: State,
    scale: f64,
}

impl PSystemChart {
    fn new(gamma: f64, center: State) -> Self {
        let cs = gamma.sqrt() * center.u1.powf(-(gamma + 1.0) / 2.0);
        let scale = (1.0 + cs * cs).sqrt() / (2.0 * cs);
        PSystemChart { gamma, center, scale }
    }

    /// `W(v) = int_{v0}^{v} sqrt(-p'(s)) ds`.
    fn w_integral(&self, v: f64) -> f64 {
        let g = self.gamma;
        let v0 = self.center.u1;
        if (g - 1.0).abs() < 1e-12 {
            // sqrt(-p') = v^{-1}
            (v / v0).ln()
        } else {
            let e = (1.0 - g) / 2.0;
            2.0 * g.sqrt() / (1.0 - g) * (v.powf(e) - v0.powf(e))
        }
    }

    fn w_inverse(&self, w: f64) -> f64 {
        let g = self.gamma;
        let v0 = self.center.u1;
        if (g - 1.0).abs() < 1e-12 {
            v0 * w.exp()
        } else {
            let e = (1.0 - g) / 2.0;
            (v0.powf(e) + w * (1.0 - g) / (2.0 * g.sqrt())).powf(1.0 / e)
        }
    }
}

impl RiemannChart for PSystemChart {
    fn to_coords(&self, u: State) -> RCoords {
        let w = self.w_integral(u.u1);
        let dv = u.u2 - self.center.u2;
        RCoords::new(self.scale * (dv + w), self.scale * (dv - w))
    }

    fn from_coords(&self, v: RCoords) -> State {
        let z1 = v.v1 / self.scale;
        let z2 = v.v2 / self.scale;
        let w = 0.5 * (z1 - z2);
        State::new(self.w_inverse(w), self.center.u2 + 0.5 * (z1 + z2))
    }
}

/// Linear system with flux `f(u) = A u`, `A = diag(-1, 1)`: both fields
/// linearly degenerate, useful as a degenerate control fixture.
pub struct LinearSystem {
    a: Mat2,
    entropy: LinearEntropy,
}

impl LinearSystem {
    pub fn advection2() -> Self {
        let a = Mat2::diag(-1.0, 1.0);
        LinearSystem {
            a,
            entropy: LinearEntropy { a },
        }
    }
}

impl FluxSystem for LinearSystem {
    fn name(&self) -> &str {
        "linear-advection2"
    }

    fn flux(&self, u: State) -> State {
        self.a.mul_vec(u)
    }

    fn jacobian(&self, _u: State) -> Mat2 {
        self.a
    }

    fn hessians(&self, _u: State) -> (Mat2, Mat2) {
        (Mat2::new(0.0, 0.0, 0.0, 0.0), Mat2::new(0.0, 0.0, 0.0, 0.0))
    }

    fn center(&self) -> State {
        State::ZERO
    }

    fn radius(&self) -> f64 {
        0.5
    }

    fn max_shock_param(&self) -> f64 {
        0.4
    }

    fn speed_bound(&self) -> f64 {
        1.0
    }

    fn entropy(&self) -> Option<&dyn EntropyPair> {
        Some(&self.entropy)
    }

    fn chart(&self) -> Option<&dyn RiemannChart> {
        Some(&IDENTITY_CHART)
    }
}

struct LinearEntropy {
    a: Mat2,
}

impl EntropyPair for LinearEntropy {
    fn eta(&self, u: State) -> f64 {
        0.5 * u.norm_sq()
    }

    fn grad_eta(&self, u: State) -> State {
        u
    }

    fn hess_eta(&self, _u: State) -> Mat2 {
        Mat2::IDENTITY
    }

    fn q(&self, u: State) -> f64 {
        0.5 * self.a.quad(u, u)
    }
}

struct IdentityChart;

static IDENTITY_CHART: IdentityChart = IdentityChart;

impl RiemannChart for IdentityChart {
    fn to_coords(&self, u: State) -> RCoords {
        RCoords::new(u.u1, u.u2)
    }

    fn from_coords(&self, v: RCoords) -> State {
        State::new(v.v1, v.v2)
    }
}

/// The builtin fixture systems.
pub fn builtin_systems() -> Vec<Arc<dyn FluxSystem>> {
    vec![
        Arc::new(QuadraticFlux),
        Arc::new(PSystem::new(2.0)),
        Arc::new(LinearSystem::advection2()),
    ]
}

/// Lookup a builtin system by its name string.
pub fn system_by_name(name: &str) -> Option<Arc<dyn FluxSystem>> {
    builtin_systems().into_iter().find(|s| s.name() == name)
}
