//! Shock and rarefaction wave curves, Rankine-Hugoniot speeds, and
//! Riemann invariants.
//!
//! Conventions: the rarefaction curve through `base` integrates the unit
//! eigenvector field forward (`d/ds R = r_i(R)`, so `lambda_i` increases);
//! the shock curve leaves `base` in the `-r_i` direction and is
//! parametrized by the chord `|S(s) - base| = s`, with `base` the left
//! state of an admissible jump for both families.

use crate::error::{Error, Result};
use crate::linalg::{solve3, State};
use crate::system::{
    eigensystem, eigvec_derivative, grad_lambda, FluxSystem, RCoords,
};

/// Fixed arclength step for the rarefaction ODE (classical RK4).
pub const RAREFACTION_STEP: f64 = 1e-3;

/// Continuation step for the shock curve.
pub const SHOCK_STEP: f64 = 1e-3;

/// Newton tolerance for the shock-curve corrector.
pub const SHOCK_NEWTON_TOL: f64 = 1e-12;

/// A point on a wave curve. `sigma` is the Rankine-Hugoniot speed and is
/// only present on shock curves.
#[derive(Debug, Clone, Copy)]
pub struct WaveCurvePoint {
    pub s: f64,
    pub state: State,
    pub sigma: Option<f64>,
}

fn rhs(sys: &dyn FluxSystem, u: State, family: u8, direction: f64) -> Result<State> {
    let ed = eigensystem(sys, u)?;
    Ok(ed.r(family) * direction)
}

/// Integrate `d/ds R = dir * r_family(R)` from `base` over `[0, s]` with
/// classical RK4 at fixed step. `s >= 0`.
pub(crate) fn flow(
    sys: &dyn FluxSystem,
    base: State,
    family: u8,
    s: f64,
    direction: f64,
) -> Result<State> {
    debug_assert!(s >= 0.0);
    if s == 0.0 {
        return Ok(base);
    }
    let n = (s / RAREFACTION_STEP).ceil() as usize;
    let h = s / n as f64;
    let mut u = base;
    for step in 0..n {
        let k1 = rhs(sys, u, family, direction)?;
        let k2 = rhs(sys, u + k1 * (h / 2.0), family, direction)?;
        let k3 = rhs(sys, u + k2 * (h / 2.0), family, direction)?;
        let k4 = rhs(sys, u + k3 * h, family, direction)?;
        u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if !sys.contains(u) {
            return Err(Error::LeftDomain {
                at: (step + 1) as f64 * h,
            });
        }
    }
    Ok(u)
}

/// Same as [`flow`] but with a signed parameter.
pub(crate) fn flow_signed(sys: &dyn FluxSystem, base: State, family: u8, s: f64) -> Result<State> {
    if s >= 0.0 {
        flow(sys, base, family, s, 1.0)
    } else {
        flow(sys, base, family, -s, -1.0)
    }
}

/// Sample the rarefaction curve from `base` on a uniform parameter grid of
/// the given step, including both endpoints.
pub fn rarefaction_samples(
    sys: &dyn FluxSystem,
    base: State,
    family: u8,
    s0: f64,
    step: f64,
) -> Result<Vec<(f64, State)>> {
    let n = ((s0 / step).ceil() as usize).max(1);
    let h = s0 / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    let mut u = base;
    out.push((0.0, u));
    for k in 1..=n {
        let k1 = rhs(sys, u, family, 1.0)?;
        let k2 = rhs(sys, u + k1 * (h / 2.0), family, 1.0)?;
        let k3 = rhs(sys, u + k2 * (h / 2.0), family, 1.0)?;
        let k4 = rhs(sys, u + k3 * h, family, 1.0)?;
        u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if !sys.contains(u) {
            return Err(Error::LeftDomain { at: k as f64 * h });
        }
        out.push((k as f64 * h, u));
    }
    Ok(out)
}

/// Rarefaction curve point at arclength `s >= 0` from `base`.
pub fn rarefaction_curve(
    sys: &dyn FluxSystem,
    base: State,
    family: u8,
    s: f64,
) -> Result<WaveCurvePoint> {
    if s < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "rarefaction parameter must be nonnegative, got {s}"
        )));
    }
    let state = flow(sys, base, family, s, 1.0)?;
    Ok(WaveCurvePoint { s, state, sigma: None })
}

/// Shock curve point at chord parameter `s >= 0` from `base`, together with
/// the Rankine-Hugoniot speed: the branch on which `base` is the left state
/// of an admissible jump (leaving `base` along `-r_i`). Continuation with
/// Newton correction on
///
/// ```text
/// f(S) - f(base) = sigma (S - base),    |S - base|^2 = s^2.
/// ```
pub fn shock_curve(
    sys: &dyn FluxSystem,
    base: State,
    family: u8,
    s: f64,
) -> Result<WaveCurvePoint> {
    hugoniot_branch(sys, base, family, s, -1.0)
}

/// The other branch of the Hugoniot locus: `base` is the right state of an
/// admissible jump and the curve of left states leaves along `+r_i`.
/// Matches the family-2 parametrization by the right state.
pub fn shock_curve_from_right(
    sys: &dyn FluxSystem,
    base: State,
    family: u8,
    s: f64,
) -> Result<WaveCurvePoint> {
    hugoniot_branch(sys, base, family, s, 1.0)
}

fn hugoniot_branch(
    sys: &dyn FluxSystem,
    base: State,
    family: u8,
    s: f64,
    dir: f64,
) -> Result<WaveCurvePoint> {
    if s < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "shock parameter must be nonnegative, got {s}"
        )));
    }
    if s > sys.max_shock_param() {
        return Err(Error::ContinuationFailure {
            at: s,
            detail: format!(
                "parameter beyond the continuation cap {} of `{}`",
                sys.max_shock_param(),
                sys.name()
            ),
        });
    }
    let ed0 = eigensystem(sys, base)?;
    if s == 0.0 {
        return Ok(WaveCurvePoint {
            s: 0.0,
            state: base,
            sigma: Some(ed0.lambda(family)),
        });
    }

    let r0 = ed0.r(family);
    let rpr0 = eigvec_derivative(sys, base, &ed0, family, r0);
    let gl0 = grad_lambda(sys, base, &ed0, family).dot(r0);

    let n = (s / SHOCK_STEP).ceil() as usize;
    let mut prev: Option<(State, f64, f64)> = None; // (state, sigma, s)
    let mut cur_state = base;
    let mut cur_sigma = ed0.lambda(family);
    let mut cur_s = 0.0;

    for k in 1..=n {
        let sk = s * k as f64 / n as f64;
        // Predictor: weak-shock asymptotics near the base, then secant
        // extrapolation along the branch.
        let (mut state, mut sigma) = match prev {
            None => (
                base + r0 * (dir * sk) + rpr0 * (0.5 * sk * sk),
                ed0.lambda(family) + 0.5 * dir * gl0 * sk,
            ),
            Some((ps, psig, pss)) => {
                let ds = sk - cur_s;
                let den = cur_s - pss;
                let tangent_state = (cur_state - ps) / den;
                let tangent_sigma = (cur_sigma - psig) / den;
                (cur_state + tangent_state * ds, cur_sigma + tangent_sigma * ds)
            }
        };

        // Newton on (RH residual, chord constraint).
        let mut converged = false;
        for _ in 0..40 {
            let diff = state - base;
            let res = sys.flux(state) - sys.flux(base) - diff * sigma;
            let chord = diff.norm_sq() - sk * sk;
            let rnorm = res.norm().max(chord.abs());
            if rnorm < SHOCK_NEWTON_TOL {
                converged = true;
                break;
            }
            let j = sys.jacobian(state);
            let m = [
                [j.a - sigma, j.b, -diff.u1],
                [j.c, j.d - sigma, -diff.u2],
                [2.0 * diff.u1, 2.0 * diff.u2, 0.0],
            ];
            let rhs = [-res.u1, -res.u2, -chord];
            let delta = solve3(m, rhs).ok_or(Error::ContinuationFailure {
                at: sk,
                detail: "singular Newton system".to_string(),
            })?;
            state += State::new(delta[0], delta[1]);
            sigma += delta[2];
        }
        if !converged {
            return Err(Error::ContinuationFailure {
                at: sk,
                detail: "Newton corrector did not converge".to_string(),
            });
        }
        if !sys.contains(state) {
            return Err(Error::LeftDomain { at: sk });
        }
        prev = Some((cur_state, cur_sigma, cur_s));
        cur_state = state;
        cur_sigma = sigma;
        cur_s = sk;
    }

    // Lax admissibility at the endpoint, within tolerance. On the standard
    // branch lambda_i(S) < sigma < lambda_i(base); reversed on the other.
    let ed_s = eigensystem(sys, cur_state)?;
    let (lo, hi) = if dir < 0.0 {
        (ed_s.lambda(family), ed0.lambda(family))
    } else {
        (ed0.lambda(family), ed_s.lambda(family))
    };
    let excess = (lo - cur_sigma).max(cur_sigma - hi);
    if excess > 1e-8 {
        return Err(Error::LaxViolation { at: s, excess });
    }

    Ok(WaveCurvePoint {
        s,
        state: cur_state,
        sigma: Some(cur_sigma),
    })
}

/// Riemann invariants of a state: the system's closed-form chart when
/// available, otherwise the numeric chart built from the wave-curve
/// foliation through the center state.
pub fn riemann_invariants(sys: &dyn FluxSystem, u: State) -> Result<RCoords> {
    if let Some(chart) = sys.chart() {
        return Ok(chart.to_coords(u));
    }
    numeric_invariants(sys, u)
}

/// Inverse of [`riemann_invariants`].
pub fn riemann_invariants_inverse(sys: &dyn FluxSystem, v: RCoords) -> Result<State> {
    if let Some(chart) = sys.chart() {
        return Ok(chart.from_coords(v));
    }
    numeric_invariants_inverse(sys, v)
}

/// Meeting point of the `family_a` curve through `p` and the `family_b`
/// curve through `q`: solves `flow(p, a, s) = flow(q, b, t)` by Newton,
/// returning `(s, t)`.
fn curve_intersection(
    sys: &dyn FluxSystem,
    p: State,
    family_a: u8,
    q: State,
    family_b: u8,
    guess: (f64, f64),
) -> Result<(f64, f64)> {
    let (mut s, mut t) = guess;
    for _ in 0..30 {
        let pa = flow_signed(sys, p, family_a, s)?;
        let qb = flow_signed(sys, q, family_b, t)?;
        let res = pa - qb;
        if res.norm() < 1e-11 {
            return Ok((s, t));
        }
        let ra = eigensystem(sys, pa)?.r(family_a);
        let rb = eigensystem(sys, qb)?.r(family_b);
        // Jacobian columns: d/ds = r_a(pa), d/dt = -r_b(qb).
        let det = ra.u1 * (-rb.u2) - (-rb.u1) * ra.u2;
        if det.abs() < 1e-12 {
            break;
        }
        let ds = (res.u1 * (-rb.u2) - (-rb.u1) * res.u2) / det;
        let dt = (ra.u1 * res.u2 - res.u1 * ra.u2) / det;
        s -= ds;
        t -= dt;
    }
    Err(Error::NoChart {
        system: sys.name().to_string(),
        detail: "curve-intersection Newton did not converge".to_string(),
    })
}

/// Numeric chart: `v1(u)` is the parameter at which the 2-curve through `u`
/// meets the 1-curve through the center, and symmetrically for `v2(u)`.
pub fn numeric_invariants(sys: &dyn FluxSystem, u: State) -> Result<RCoords> {
    let d = sys.center();
    if !sys.contains(u) {
        return Err(Error::OutOfDomain {
            system: sys.name().to_string(),
            state: u,
        });
    }
    let ed = eigensystem(sys, d)?;
    let p = u - d;
    let alpha = ed.l1.dot(p);
    let beta = ed.l2.dot(p);
    // v1: follow the 2-curve from u onto the base 1-curve.
    let (_, t1) = curve_intersection(sys, u, 2, d, 1, (-beta, alpha))?;
    // v2: follow the 1-curve from u onto the base 2-curve.
    let (_, t2) = curve_intersection(sys, u, 1, d, 2, (-alpha, beta))?;
    Ok(RCoords::new(t1, t2))
}

/// Inverse numeric chart: the state on the 2-curve through `R1_d(v1)` that
/// also lies on the 1-curve through `R2_d(v2)`.
pub fn numeric_invariants_inverse(sys: &dyn FluxSystem, v: RCoords) -> Result<State> {
    let d = sys.center();
    let anchor1 = flow_signed(sys, d, 1, v.v1)?;
    let anchor2 = flow_signed(sys, d, 2, v.v2)?;
    let (s, _) = curve_intersection(sys, anchor1, 2, anchor2, 1, (v.v2, v.v1))?;
    flow_signed(sys, anchor1, 2, s)
}

/// One grid entry of the strengthening report along a shock curve.
#[derive(Debug, Clone)]
pub struct StrengtheningEntry {
    pub s: f64,
    /// Centered difference of `eta(base | S(s))`.
    pub d_eta_ds: f64,
    /// Centered difference of the Rankine-Hugoniot speed.
    pub d_sigma_ds: f64,
}

#[derive(Debug, Clone)]
pub struct StrengtheningReport {
    pub family: u8,
    pub entries: Vec<StrengtheningEntry>,
    /// All relative-entropy derivatives strictly positive.
    pub strengthens: bool,
    /// Speed monotone in the family's admissible direction
    /// (decreasing for family 1, increasing for family 2).
    pub speed_monotone: bool,
}

/// Monotonicity of `s -> eta(base | S(s))` and of the shock speed along the
/// shock curve, by centered differences on the given parameter grid. The
/// family-1 curve is parametrized by the left state, the family-2 curve by
/// the right state, so both run over admissible jumps.
pub fn check_strengthening(
    sys: &dyn FluxSystem,
    base: State,
    family: u8,
    s_grid: &[f64],
) -> Result<StrengtheningReport> {
    let ent = sys
        .entropy()
        .ok_or_else(|| Error::NoEntropy(sys.name().to_string()))?;
    let rel = |b: State| -> Result<f64> {
        // eta(base | b) = eta(base) - eta(b) - grad eta(b) . (base - b)
        Ok(ent.eta(base) - ent.eta(b) - ent.grad_eta(b).dot(base - b))
    };
    let curve = |s: f64| match family {
        1 => shock_curve(sys, base, family, s),
        _ => shock_curve_from_right(sys, base, family, s),
    };
    let mut entries = Vec::with_capacity(s_grid.len());
    let mut strengthens = true;
    let mut speed_monotone = true;
    for &s in s_grid {
        let h = (1e-4f64).min(0.5 * s.max(1e-6));
        let plus = curve(s + h)?;
        let minus = curve((s - h).max(0.0))?;
        let span = plus.s - minus.s;
        let d_eta_ds = (rel(plus.state)? - rel(minus.state)?) / span;
        let d_sigma_ds = (plus.sigma.unwrap() - minus.sigma.unwrap()) / span;
        if d_eta_ds <= 0.0 {
            strengthens = false;
        }
        let ok = match family {
            1 => d_sigma_ds < 0.0,
            _ => d_sigma_ds > 0.0,
        };
        if !ok {
            speed_monotone = false;
        }
        entries.push(StrengtheningEntry { s, d_eta_ds, d_sigma_ds });
    }
    Ok(StrengtheningReport {
        family,
        entries,
        strengthens,
        speed_monotone,
    })
}
