//! Approximate Riemann solver with parameter `nu`.
//!
//! Waves are measured in Riemann coordinates: a jump of size `sigma > 0` in
//! the family's coordinate is a rarefaction, `sigma < 0` a shock. Weak
//! shocks ride an interpolation between the shock and rarefaction curves;
//! rarefactions are split into pieces of strength at most `nu` whose speeds
//! are the characteristic speeds at half-grid states.

use serde::{Deserialize, Serialize};

use crate::curves::shock_curve;
use crate::error::{Error, Result};
use crate::linalg::{Mat2, State};
use crate::system::{eigensystem, FluxSystem, RCoords};

/// Below this strength a shock is resolved by weak-jump asymptotics instead
/// of curve continuation.
const TINY_SHOCK: f64 = 1e-9;

/// Relative snap onto the coordinate grid, so endpoints that land within
/// rounding of a grid point do not spawn sliver pieces.
const GRID_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveKind {
    Shock,
    RarefactionPiece,
}

/// One elementary wave of a Riemann fan.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ElementaryWave {
    pub family: u8,
    pub kind: WaveKind,
    pub left: State,
    pub right: State,
    pub speed: f64,
    /// Signed strength: the jump in the family's Riemann coordinate,
    /// negative for shocks.
    pub strength: f64,
}

/// Solution of one Riemann problem: the wave list with its states in both
/// physical and Riemann coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiemannFan {
    pub left: State,
    pub middle: State,
    pub right: State,
    pub left_coords: RCoords,
    pub middle_coords: RCoords,
    pub right_coords: RCoords,
    pub sigma1: f64,
    pub sigma2: f64,
    pub waves: Vec<ElementaryWave>,
}

impl RiemannFan {
    /// Evaluate the self-similar fan at slope `xi = x/t`.
    pub fn sample(&self, xi: f64) -> State {
        let mut state = self.left;
        for w in &self.waves {
            if xi > w.speed {
                state = w.right;
            } else {
                break;
            }
        }
        state
    }

    pub fn total_strength(&self) -> f64 {
        self.waves.iter().map(|w| w.strength.abs()).sum()
    }
}

/// The transition profile: `1` for `s <= -2`, `0` for `s >= -1`, monotone
/// with derivative in `[-2, 0]` in between (a quintic smoothstep, so the
/// evaluation is C^2).
pub fn interpolation_phi(s: f64) -> f64 {
    if s <= -2.0 {
        1.0
    } else if s >= -1.0 {
        0.0
    } else {
        let t = s + 2.0; // in (0, 1)
        1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

/// Derivative of [`interpolation_phi`].
pub fn interpolation_phi_deriv(s: f64) -> f64 {
    if !(-2.0..-1.0).contains(&s) {
        0.0
    } else {
        let t = s + 2.0;
        -30.0 * t * t * (1.0 - t) * (1.0 - t)
    }
}

fn to_coords(sys: &dyn FluxSystem, u: State) -> Result<RCoords> {
    crate::curves::riemann_invariants(sys, u)
}

fn from_coords(sys: &dyn FluxSystem, v: RCoords) -> Result<State> {
    crate::curves::riemann_invariants_inverse(sys, v)
}

fn translate(v: RCoords, family: u8, sigma: f64) -> RCoords {
    match family {
        1 => RCoords::new(v.v1 + sigma, v.v2),
        _ => RCoords::new(v.v1, v.v2 + sigma),
    }
}

/// A point on the shock curve located by its coordinate increment
/// `sigma <= 0`, with the Rankine-Hugoniot speed of the jump.
struct ShockPoint {
    coords: RCoords,
    state: State,
    sigma_rh: f64,
}

/// Follow the physical shock curve from `v` until the family's Riemann
/// coordinate has dropped by `|sigma|`.
fn shock_point(sys: &dyn FluxSystem, v: RCoords, family: u8, sigma: f64) -> Result<ShockPoint> {
    debug_assert!(sigma <= 0.0);
    let base = from_coords(sys, v)?;
    if -sigma < TINY_SHOCK {
        // Weak-jump asymptotics: curves agree to O(sigma^3).
        let coords = translate(v, family, sigma);
        let state = from_coords(sys, coords)?;
        let mid = from_coords(sys, translate(v, family, 0.5 * sigma))?;
        let sigma_rh = eigensystem(sys, mid)?.lambda(family);
        return Ok(ShockPoint { coords, state, sigma_rh });
    }

    let g = |s: f64| -> Result<(f64, ShockPoint)> {
        let p = shock_curve(sys, base, family, s)?;
        let coords = to_coords(sys, p.state)?;
        let drop = coords.component(family) - v.component(family);
        Ok((
            drop - sigma,
            ShockPoint {
                coords,
                state: p.state,
                sigma_rh: p.sigma.unwrap(),
            },
        ))
    };

    // Secant iteration on the chord parameter; the coordinate drops at
    // rate ~ -1 per unit chord near the base.
    let s0 = (-sigma).min(sys.max_shock_param());
    let (g0, best0) = g(s0)?;
    if g0.abs() < 5e-14 {
        return Ok(best0);
    }
    let mut sa = s0;
    let mut ga = g0;
    let mut sb = (s0 * 1.05 + 1e-6).min(sys.max_shock_param());
    let (mut gb, mut bestb) = g(sb)?;
    for _ in 0..60 {
        if gb.abs() < 5e-14 {
            return Ok(bestb);
        }
        let denom = gb - ga;
        if denom.abs() < 1e-300 {
            break;
        }
        let s2 = (sb - gb * (sb - sa) / denom).clamp(0.0, sys.max_shock_param());
        let (g2, b2) = g(s2)?;
        sa = sb;
        ga = gb;
        sb = s2;
        gb = g2;
        bestb = b2;
    }
    if gb.abs() < 1e-10 {
        return Ok(bestb);
    }
    Err(Error::ContinuationFailure {
        at: sb,
        detail: format!("coordinate root-find stalled, residual {gb:.3e}"),
    })
}

/// Interpolation between the shock and rarefaction curves in Riemann
/// coordinates: matches the rarefaction curve exactly for
/// `sigma >= -sqrt(nu)` and the shock curve exactly for
/// `sigma <= -2 sqrt(nu)`.
pub fn interpolated_curve(
    sys: &dyn FluxSystem,
    v: RCoords,
    family: u8,
    sigma: f64,
    nu: f64,
) -> Result<RCoords> {
    let w = interpolation_phi(sigma / nu.sqrt());
    let rare = translate(v, family, sigma);
    if w == 0.0 {
        return Ok(rare);
    }
    let shock = shock_point(sys, v, family, sigma)?.coords;
    if w == 1.0 {
        return Ok(shock);
    }
    Ok(RCoords::new(
        w * shock.v1 + (1.0 - w) * rare.v1,
        w * shock.v2 + (1.0 - w) * rare.v2,
    ))
}

/// Half-grid state for family-1 cells: `((j + 1/2) nu, v2)`; for family-2
/// cells `(v1, (j + 1/2) nu)`.
fn half_grid(sys: &dyn FluxSystem, family: u8, other: f64, j: i64, nu: f64) -> Result<State> {
    let c = (j as f64 + 0.5) * nu;
    let v = match family {
        1 => RCoords::new(c, other),
        _ => RCoords::new(other, c),
    };
    from_coords(sys, v)
}

/// Measure-weighted average of the half-grid characteristic speeds over the
/// (unordered) coordinate interval between `a` and `b`.
fn grid_average_speed(
    sys: &dyn FluxSystem,
    family: u8,
    other: f64,
    a: f64,
    b: f64,
    nu: f64,
) -> Result<f64> {
    let lo = a.min(b);
    let hi = a.max(b);
    let len = hi - lo;
    debug_assert!(len > 0.0);
    let j_lo = (lo / nu).floor() as i64;
    let j_hi = (hi / nu).ceil() as i64;
    let mut acc = 0.0;
    for j in j_lo..j_hi {
        let cell_lo = j as f64 * nu;
        let cell_hi = cell_lo + nu;
        let overlap = (cell_hi.min(hi) - cell_lo.max(lo)).max(0.0);
        if overlap > 0.0 {
            let state = half_grid(sys, family, other, j, nu)?;
            acc += overlap * eigensystem(sys, state)?.lambda(family);
        }
    }
    Ok(acc / len)
}

/// Interpolated shock speed: a blend of the Rankine-Hugoniot speed and the
/// grid-averaged characteristic speed.
fn interpolated_shock_speed(
    sys: &dyn FluxSystem,
    v_left: RCoords,
    family: u8,
    sigma: f64,
    nu: f64,
    sigma_rh: f64,
) -> Result<f64> {
    let w = interpolation_phi(sigma / nu.sqrt());
    if w == 1.0 {
        return Ok(sigma_rh);
    }
    let (other, a) = match family {
        1 => (v_left.v2, v_left.v1),
        _ => (v_left.v1, v_left.v2),
    };
    let lam_r = grid_average_speed(sys, family, other, a, a + sigma, nu)?;
    Ok(w * sigma_rh + (1.0 - w) * lam_r)
}

/// Curve and speed deviations of the interpolated wave from the true shock:
/// `|Phi^nu - phi^-|` and `|lambda^phi - lambda^s|`. Both vanish for
/// `sigma <= -2 sqrt(nu)`.
pub fn approx_speed_error(
    sys: &dyn FluxSystem,
    v_left: RCoords,
    family: u8,
    sigma: f64,
    nu: f64,
) -> Result<(f64, f64)> {
    if sigma >= 0.0 {
        return Err(Error::InvalidArgument(
            "speed-error comparison needs sigma < 0".to_string(),
        ));
    }
    let sp = shock_point(sys, v_left, family, sigma)?;
    let interp = interpolated_curve(sys, v_left, family, sigma, nu)?;
    let curve_error = interp.dist(sp.coords);
    let lam_phi = interpolated_shock_speed(sys, v_left, family, sigma, nu, sp.sigma_rh)?;
    Ok((curve_error, (lam_phi - sp.sigma_rh).abs()))
}

/// Waves of a single family emitted from the left coordinates `v_from`.
fn build_family_waves(
    sys: &dyn FluxSystem,
    family: u8,
    v_from: RCoords,
    sigma: f64,
    nu: f64,
    waves: &mut Vec<ElementaryWave>,
) -> Result<RCoords> {
    if sigma == 0.0 {
        return Ok(v_from);
    }
    if sigma > 0.0 {
        // Rarefaction split at the coordinate grid j * nu.
        let (a, other) = match family {
            1 => (v_from.v1, v_from.v2),
            _ => (v_from.v2, v_from.v1),
        };
        let b = a + sigma;
        let mut breaks = vec![a];
        let mut j = (a / nu + GRID_SNAP).floor() as i64 + 1;
        while (j as f64) * nu < b - GRID_SNAP * nu {
            let x = j as f64 * nu;
            if x > a {
                breaks.push(x);
            }
            j += 1;
        }
        breaks.push(b);

        let coords_of = |c: f64| match family {
            1 => RCoords::new(c, other),
            _ => RCoords::new(other, c),
        };
        let mut states = Vec::with_capacity(breaks.len());
        for &c in &breaks {
            states.push(from_coords(sys, coords_of(c))?);
        }
        let mut emitted = 0.0;
        for seg in 0..breaks.len() - 1 {
            let lo = breaks[seg];
            let hi = breaks[seg + 1];
            if hi <= lo {
                continue;
            }
            let last = seg + 2 == breaks.len();
            let strength = if last { sigma - emitted } else { hi - lo };
            emitted += strength;
            let cell = (lo / nu + GRID_SNAP).floor() as i64;
            let mid = half_grid(sys, family, other, cell, nu)?;
            let speed = eigensystem(sys, mid)?.lambda(family);
            waves.push(ElementaryWave {
                family,
                kind: WaveKind::RarefactionPiece,
                left: states[seg],
                right: states[seg + 1],
                speed,
                strength,
            });
        }
        Ok(coords_of(b))
    } else {
        // Single shock on the interpolated curve; in the pure-shock regime
        // the right state is the exact curve endpoint.
        let sp = shock_point(sys, v_from, family, sigma)?;
        let w = interpolation_phi(sigma / nu.sqrt());
        let (target, right) = if w == 1.0 {
            (sp.coords, sp.state)
        } else {
            let rare = translate(v_from, family, sigma);
            let target = if w == 0.0 {
                rare
            } else {
                RCoords::new(
                    w * sp.coords.v1 + (1.0 - w) * rare.v1,
                    w * sp.coords.v2 + (1.0 - w) * rare.v2,
                )
            };
            (target, from_coords(sys, target)?)
        };
        let speed = interpolated_shock_speed(sys, v_from, family, sigma, nu, sp.sigma_rh)?;
        let left = from_coords(sys, v_from)?;
        waves.push(ElementaryWave {
            family,
            kind: WaveKind::Shock,
            left,
            right,
            speed,
            strength: sigma,
        });
        Ok(target)
    }
}

/// Solve the Riemann problem `(u_l, u_r)`: find `(sigma1, sigma2)` such
/// that composing the two interpolated curves joins the data, then emit the
/// wave fan.
pub fn solve_riemann(sys: &dyn FluxSystem, nu: f64, u_l: State, u_r: State) -> Result<RiemannFan> {
    if nu <= 0.0 {
        return Err(Error::InvalidArgument(format!("nu must be positive, got {nu}")));
    }
    let v_l = to_coords(sys, u_l)?;
    let v_r = to_coords(sys, u_r)?;

    if (u_l - u_r).norm() == 0.0 {
        return Ok(RiemannFan {
            left: u_l,
            middle: u_l,
            right: u_r,
            left_coords: v_l,
            middle_coords: v_l,
            right_coords: v_r,
            sigma1: 0.0,
            sigma2: 0.0,
            waves: Vec::new(),
        });
    }

    let residual = |s1: f64, s2: f64| -> Result<(f64, f64)> {
        let vm = interpolated_curve(sys, v_l, 1, s1, nu)?;
        let c = interpolated_curve(sys, vm, 2, s2, nu)?;
        Ok((c.v1 - v_r.v1, c.v2 - v_r.v2))
    };

    let mut s1 = v_r.v1 - v_l.v1;
    let mut s2 = v_r.v2 - v_l.v2;
    let (mut g1, mut g2) = residual(s1, s2)?;
    let tol = 2.5e-13;

    // The composition is an O(sigma^2) perturbation of a coordinate
    // translation, so the fixed-point update converges at small amplitude.
    let mut ok = false;
    for _ in 0..14 {
        if g1.abs().max(g2.abs()) < tol {
            ok = true;
            break;
        }
        s1 -= g1;
        s2 -= g2;
        let (h1, h2) = residual(s1, s2)?;
        g1 = h1;
        g2 = h2;
    }
    if !ok {
        // Finite-difference Newton fallback.
        for _ in 0..25 {
            if g1.abs().max(g2.abs()) < tol {
                ok = true;
                break;
            }
            let h1s = 1e-7 * (1.0 + s1.abs());
            let h2s = 1e-7 * (1.0 + s2.abs());
            let (a1, a2) = residual(s1 + h1s, s2)?;
            let (b1, b2) = residual(s1, s2 + h2s)?;
            let j = Mat2::new(
                (a1 - g1) / h1s,
                (b1 - g1) / h2s,
                (a2 - g2) / h1s,
                (b2 - g2) / h2s,
            );
            let delta = j.solve(State::new(g1, g2)).ok_or(Error::NewtonDivergence {
                residual: g1.abs().max(g2.abs()),
            })?;
            s1 -= delta.u1;
            s2 -= delta.u2;
            let (h1, h2) = residual(s1, s2)?;
            g1 = h1;
            g2 = h2;
        }
    }
    if !ok && g1.abs().max(g2.abs()) > 1e-12 {
        return Err(Error::NewtonDivergence {
            residual: g1.abs().max(g2.abs()),
        });
    }

    // Strengths below the composition tolerance are rounding debris.
    if s1.abs() < 1e-14 {
        s1 = 0.0;
    }
    if s2.abs() < 1e-14 {
        s2 = 0.0;
    }

    let mut waves = Vec::new();
    let v_m = build_family_waves(sys, 1, v_l, s1, nu, &mut waves)?;
    let n1 = waves.len();
    let v_end = build_family_waves(sys, 2, v_m, s2, nu, &mut waves)?;
    debug_assert!(v_end.dist(v_r) < 1e-10);

    let middle = if n1 == 0 { u_l } else { waves[n1 - 1].right };

    // Snap the chain ends to the given data so neighboring fans in a
    // front-tracking run share states bitwise.
    if let Some(first) = waves.first_mut() {
        first.left = u_l;
    }
    if let Some(last) = waves.last_mut() {
        last.right = u_r;
    }

    // Fan ordering: strictly increasing speeds, family 1 before family 2.
    for pair in waves.windows(2) {
        if pair[1].speed <= pair[0].speed {
            return Err(Error::FanOrderingViolation {
                detail: format!(
                    "speeds {:.6} (family {}) then {:.6} (family {})",
                    pair[0].speed, pair[0].family, pair[1].speed, pair[1].family
                ),
            });
        }
        if pair[0].family > pair[1].family {
            return Err(Error::FanOrderingViolation {
                detail: "family-2 wave precedes a family-1 wave".to_string(),
            });
        }
    }

    Ok(RiemannFan {
        left: u_l,
        middle,
        right: u_r,
        left_coords: v_l,
        middle_coords: v_m,
        right_coords: v_r,
        sigma1: s1,
        sigma2: s2,
        waves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{rarefaction_curve, riemann_invariants, riemann_invariants_inverse};
    use crate::regression::fit_loglog;
    use crate::system::PSystem;

    fn psys() -> PSystem {
        PSystem::new(2.0)
    }

    #[test]
    fn phi_plateau_values() {
        assert_eq!(interpolation_phi(-3.0), 1.0);
        assert_eq!(interpolation_phi(-2.0), 1.0);
        assert_eq!(interpolation_phi(-1.0), 0.0);
        assert_eq!(interpolation_phi(0.0), 0.0);
    }

    #[test]
    fn phi_transition_and_derivative_bound() {
        let mid = interpolation_phi(-1.5);
        assert!(mid > 0.0 && mid < 1.0);
        let d = interpolation_phi_deriv(-1.5);
        assert!((-2.0..=0.0).contains(&d));
        // Monotone nonincreasing with derivative in [-2, 0] throughout.
        let mut last = 1.0;
        for k in 0..=200 {
            let s = -2.0 + k as f64 / 200.0;
            let v = interpolation_phi(s);
            assert!(v <= last + 1e-15);
            last = v;
            let dv = interpolation_phi_deriv(s);
            assert!((-2.0..=1e-15).contains(&dv), "phi'({s}) = {dv}");
        }
        // C^2 join: derivative vanishes at the plateau edges.
        assert!(interpolation_phi_deriv(-2.0 + 1e-9).abs() < 1e-6);
        assert!(interpolation_phi_deriv(-1.0 - 1e-9).abs() < 1e-6);
    }

    #[test]
    fn interpolated_curve_fixes_base_point() {
        let sys = psys();
        let v = riemann_invariants(&sys, sys.center()).unwrap();
        let out = interpolated_curve(&sys, v, 1, 0.0, 0.01).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn interpolated_curve_pure_rarefaction_regime() {
        let sys = psys();
        let v = riemann_invariants(&sys, sys.center()).unwrap();
        let out = interpolated_curve(&sys, v, 1, 0.3, 0.01).unwrap();
        assert_eq!(out, RCoords::new(v.v1 + 0.3, v.v2));
    }

    #[test]
    fn interpolated_curve_pure_shock_regime() {
        let sys = psys();
        let v = riemann_invariants(&sys, sys.center()).unwrap();
        // sigma = -0.3, nu = 0.01: sigma/sqrt(nu) = -3 <= -2.
        let out = interpolated_curve(&sys, v, 1, -0.3, 0.01).unwrap();
        let sp = shock_point(&sys, v, 1, -0.3).unwrap();
        assert_eq!(out, sp.coords);
        let (curve_err, speed_err) = approx_speed_error(&sys, v, 1, -0.3, 0.01).unwrap();
        assert_eq!(curve_err, 0.0);
        assert_eq!(speed_err, 0.0);
    }

    #[test]
    fn shock_point_drops_coordinate_exactly() {
        let sys = psys();
        let v = riemann_invariants(&sys, sys.center()).unwrap();
        for family in [1u8, 2u8] {
            let sp = shock_point(&sys, v, family, -0.04).unwrap();
            let drop = sp.coords.component(family) - v.component(family);
            assert!((drop + 0.04).abs() < 1e-12, "family {family}: drop {drop}");
            // Rankine-Hugoniot residual of the located pair.
            let base = sys.center();
            let res = sys.flux(sp.state) - sys.flux(base) - (sp.state - base) * sp.sigma_rh;
            assert!(res.norm() < 1e-10);
        }
    }

    #[test]
    fn riemann_of_equal_states_is_empty() {
        let sys = psys();
        let fan = solve_riemann(&sys, 1e-3, sys.center(), sys.center()).unwrap();
        assert!(fan.waves.is_empty());
        assert_eq!(fan.sigma1, 0.0);
        assert_eq!(fan.sigma2, 0.0);
    }

    #[test]
    fn rarefaction_fan_piece_structure() {
        // Data on the 1-rarefaction curve with coordinate gap 2.5 nu,
        // aligned to the grid: three pieces of strengths (nu, nu, nu/2).
        let sys = psys();
        let nu = 0.01;
        let u_l = riemann_invariants_inverse(&sys, RCoords::new(3.0 * nu, 0.0)).unwrap();
        let v_l = riemann_invariants(&sys, u_l).unwrap();
        let u_r =
            riemann_invariants_inverse(&sys, RCoords::new(v_l.v1 + 2.5 * nu, v_l.v2)).unwrap();
        let fan = solve_riemann(&sys, nu, u_l, u_r).unwrap();
        assert!(
            fan.waves.len() == 3,
            "expected 3 pieces, got {} (sigma1 = {}, sigma2 = {:.2e})",
            fan.waves.len(),
            fan.sigma1,
            fan.sigma2
        );
        for w in &fan.waves {
            assert_eq!(w.kind, WaveKind::RarefactionPiece);
            assert_eq!(w.family, 1);
            assert!(w.strength > 0.0 && w.strength <= nu + 1e-15);
        }
        let speeds: Vec<f64> = fan.waves.iter().map(|w| w.speed).collect();
        assert!(speeds.windows(2).all(|p| p[1] > p[0]));
        assert!(fan.sigma2.abs() < 1e-10);
    }

    #[test]
    fn shock_fan_in_pure_regime_has_rh_speed() {
        let sys = psys();
        let nu: f64 = 1e-4;
        let sigma = -3.0 * nu.sqrt();
        let u_l = sys.center();
        let v_l = riemann_invariants(&sys, u_l).unwrap();
        // Construct the right state from the wave-curve machinery directly.
        let sp = shock_point(&sys, v_l, 1, sigma).unwrap();
        let u_r = sp.state;
        let fan = solve_riemann(&sys, nu, u_l, u_r).unwrap();
        let shocks: Vec<&ElementaryWave> =
            fan.waves.iter().filter(|w| w.kind == WaveKind::Shock).collect();
        assert_eq!(shocks.len(), 1);
        assert!((fan.sigma1 - sigma).abs() < 1e-9);
        assert!(fan.sigma2.abs() < 1e-9);
        // phi = 1 regime: the wave moves at the Rankine-Hugoniot speed.
        assert!(
            (shocks[0].speed - sp.sigma_rh).abs() < 1e-9,
            "speed {} vs RH {}",
            shocks[0].speed,
            sp.sigma_rh
        );
        // Lax admissibility of the emitted shock.
        let lam_l = eigensystem(&sys, u_l).unwrap().lambda1;
        let lam_r = eigensystem(&sys, u_r).unwrap().lambda1;
        assert!(lam_r < shocks[0].speed && shocks[0].speed < lam_l);
    }

    #[test]
    fn middle_state_composition_residual() {
        let sys = psys();
        let u_l = State::new(1.02, 0.01);
        let u_r = State::new(0.99, -0.015);
        let fan = solve_riemann(&sys, 1e-3, u_l, u_r).unwrap();
        let vm = interpolated_curve(&sys, fan.left_coords, 1, fan.sigma1, 1e-3).unwrap();
        let vr = interpolated_curve(&sys, vm, 2, fan.sigma2, 1e-3).unwrap();
        assert!((vr.v1 - fan.right_coords.v1).abs() < 1e-12);
        assert!((vr.v2 - fan.right_coords.v2).abs() < 1e-12);
    }

    #[test]
    fn state_chain_is_consistent() {
        let sys = psys();
        let u_l = State::new(1.03, -0.01);
        let u_r = State::new(0.985, 0.012);
        let fan = solve_riemann(&sys, 2e-3, u_l, u_r).unwrap();
        assert!(fan.waves.len() >= 2);
        assert_eq!(fan.waves.first().unwrap().left, u_l);
        assert_eq!(fan.waves.last().unwrap().right, u_r);
        for pair in fan.waves.windows(2) {
            assert_eq!(pair[0].right, pair[1].left);
        }
    }

    #[test]
    fn total_strength_bookkeeping() {
        let sys = psys();
        let u_l = State::new(1.025, 0.005);
        let u_r = State::new(0.99, 0.02);
        let fan = solve_riemann(&sys, 1e-3, u_l, u_r).unwrap();
        let total = fan.total_strength();
        let expected = fan.sigma1.abs() + fan.sigma2.abs();
        assert!(
            (total - expected).abs() <= 1e-15 * (1.0 + expected),
            "{total} vs {expected}"
        );
    }

    #[test]
    fn family_speeds_separated() {
        let sys = psys();
        let u_l = State::new(1.02, 0.01);
        let u_r = State::new(0.98, -0.01);
        let fan = solve_riemann(&sys, 1e-3, u_l, u_r).unwrap();
        let max1 = fan
            .waves
            .iter()
            .filter(|w| w.family == 1)
            .map(|w| w.speed)
            .fold(f64::NEG_INFINITY, f64::max);
        let min2 = fan
            .waves
            .iter()
            .filter(|w| w.family == 2)
            .map(|w| w.speed)
            .fold(f64::INFINITY, f64::min);
        assert!(max1 < min2);
    }

    #[test]
    fn curve_error_cubic_in_sigma() {
        let sys = psys();
        let v = riemann_invariants(&sys, sys.center()).unwrap();
        let nu = 0.01;
        let mut sigmas = Vec::new();
        let mut errs = Vec::new();
        // Stay above -sqrt(nu) so the interpolation is the rarefaction
        // curve and the deviation from the shock curve is visible.
        for k in 0..7 {
            let s = -0.01 - 0.012 * k as f64; // in [-0.1, -0.01], sqrt(nu) = 0.1
            let (ce, _) = approx_speed_error(&sys, v, 1, s, nu).unwrap();
            if ce > 1e-15 {
                sigmas.push(-s);
                errs.push(ce);
            }
        }
        let fit = fit_loglog(&sigmas, &errs).unwrap();
        assert!(fit.slope >= 2.5, "slope {}", fit.slope);
    }

    #[test]
    fn speed_error_linear_in_nu() {
        let sys = psys();
        let v = riemann_invariants(&sys, sys.center()).unwrap();
        let mut ratios = Vec::new();
        for nu in [4e-3f64, 2e-3, 1e-3, 5e-4] {
            let sigma = -1.5 * nu.sqrt();
            let (_, se) = approx_speed_error(&sys, v, 1, sigma, nu).unwrap();
            ratios.push(se / nu);
        }
        let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(max < 50.0, "speed_error/nu ratios {ratios:?}");
    }

    #[test]
    fn fan_matches_scalar_rarefaction_oracle() {
        // A pure small 1-rarefaction fan sampled at t = 1 against the exact
        // self-similar solution mapped through the rarefaction curve.
        let sys = psys();
        let s0 = 0.03;
        let u_l = sys.center();
        let u_r = rarefaction_curve(&sys, u_l, 1, s0).unwrap().state;
        for nu in [2e-3, 1e-3] {
            let fan = solve_riemann(&sys, nu, u_l, u_r).unwrap();
            let lam_l = eigensystem(&sys, u_l).unwrap().lambda1;
            let lam_r = eigensystem(&sys, u_r).unwrap().lambda1;
            // Exact solution at slope xi: the state R(y) with
            // lambda_1(R(y)) = xi, located by bisection on y.
            let exact = |xi: f64| -> State {
                if xi <= lam_l {
                    return u_l;
                }
                if xi >= lam_r {
                    return u_r;
                }
                let mut lo = 0.0;
                let mut hi = s0;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let st = rarefaction_curve(&sys, u_l, 1, mid).unwrap().state;
                    if eigensystem(&sys, st).unwrap().lambda1 < xi {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                rarefaction_curve(&sys, u_l, 1, 0.5 * (lo + hi)).unwrap().state
            };
            // L1 difference over the fan interval at t = 1.
            let n = 600;
            let a = lam_l - 0.01;
            let b = lam_r + 0.01;
            let dx = (b - a) / n as f64;
            let mut l1 = 0.0;
            for i in 0..n {
                let xi = a + (i as f64 + 0.5) * dx;
                l1 += (fan.sample(xi) - exact(xi)).norm() * dx;
            }
            assert!(l1 <= 5.0 * nu, "nu={nu}: L1 {l1}");
        }
    }
}
