//! The piecewise-constant exponential weight built from a front
//! configuration:
//!
//! ```text
//! a(t, x) = exp( (3 C1/4) ( V + (3 kappa/2) Q + int_{-inf}^x mu ) ),
//! ```
//!
//! where `mu` puts mass `-|sigma|` on every 1-wave and `+|sigma|` on every
//! 2-wave. The weight drops by `e^{-3C1|sigma|/4}` across 1-waves, rises by
//! the reciprocal across 2-waves, and decays in time at interactions.

use serde::{Deserialize, Serialize};

use crate::fronttrack::{
    glimm_functionals_of, EventKind, Front, PiecewiseSolution, RunHistory,
};

/// Weight evaluated from wave positions and signed strength masses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightProfile {
    pub time: f64,
    pub breakpoints: Vec<f64>,
    /// Mass at each breakpoint: `-|sigma|` for 1-waves, `+|sigma|` for 2-waves.
    pub signed_masses: Vec<f64>,
    pub v: f64,
    pub q: f64,
    pub c1: f64,
    pub kappa: f64,
}

impl WeightProfile {
    fn from_fronts(time: f64, fronts: &[Front], v: f64, q: f64, c1: f64, kappa: f64) -> Self {
        WeightProfile {
            time,
            breakpoints: fronts.iter().map(|f| f.position).collect(),
            signed_masses: fronts
                .iter()
                .map(|f| {
                    let m = f.strength.abs();
                    if f.family == 1 {
                        -m
                    } else {
                        m
                    }
                })
                .collect(),
            v,
            q,
            c1,
            kappa,
        }
    }

    /// Exponent prefactor `(3 C1/4)(V + (3 kappa/2) Q)`.
    pub fn log_base(&self) -> f64 {
        0.75 * self.c1 * (self.v + 1.5 * self.kappa * self.q)
    }

    /// Cumulative mass strictly left of `x` (left-closed convention: a mass
    /// at `x_i` counts only for `x > x_i`).
    fn mass_below(&self, x: f64, inclusive: bool) -> f64 {
        let mut acc = 0.0;
        for (bp, m) in self.breakpoints.iter().zip(&self.signed_masses) {
            if *bp < x || (inclusive && *bp == x) {
                acc += m;
            } else if *bp > x {
                break;
            }
        }
        acc
    }

    /// Left limit `a(x-)`.
    pub fn eval_left(&self, x: f64) -> f64 {
        (self.log_base() + 0.75 * self.c1 * self.mass_below(x, false)).exp()
    }

    /// Right limit `a(x+)`.
    pub fn eval_right(&self, x: f64) -> f64 {
        (self.log_base() + 0.75 * self.c1 * self.mass_below(x, true)).exp()
    }

    /// Value away from breakpoints.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_right(x)
    }

    /// Ratio `a(x_i+)/a(x_i-)` across front `i`: exactly
    /// `exp(+-3 C1 |sigma_i| / 4)`.
    pub fn ratio_across(&self, i: usize) -> f64 {
        (0.75 * self.c1 * self.signed_masses[i]).exp()
    }
}

/// Build the weight from a solution snapshot; `V` and `Q` are recomputed
/// from its fronts.
pub fn weight_profile(sol: &PiecewiseSolution, c1: f64, kappa: f64) -> WeightProfile {
    let gf = glimm_functionals_of(&sol.fronts, kappa);
    WeightProfile::from_fronts(sol.time, &sol.fronts, gf.v, gf.q, c1, kappa)
}

/// Per-front bracket check of the weight ratio against the linearized
/// admissible interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BracketEntry {
    pub position: f64,
    pub family: u8,
    pub strength: f64,
    pub ratio: f64,
    pub lo: f64,
    pub hi: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BracketReport {
    pub entries: Vec<BracketEntry>,
    pub violations: usize,
}

/// Check that every 1-front ratio lies in `[1 - 2C1|s|, 1 - C1|s|/2]` and
/// every 2-front ratio in `[1 + C1|s|/2, 1 + 2C1|s|]`.
pub fn check_front_brackets(profile: &WeightProfile, sol: &PiecewiseSolution) -> BracketReport {
    let c1 = profile.c1;
    let mut entries = Vec::with_capacity(sol.fronts.len());
    let mut violations = 0;
    for (i, f) in sol.fronts.iter().enumerate() {
        let s = f.strength.abs();
        let ratio = profile.ratio_across(i);
        let (lo, hi) = if f.family == 1 {
            (1.0 - 2.0 * c1 * s, 1.0 - 0.5 * c1 * s)
        } else {
            (1.0 + 0.5 * c1 * s, 1.0 + 2.0 * c1 * s)
        };
        let ok = ratio >= lo - 1e-14 && ratio <= hi + 1e-14;
        if !ok {
            violations += 1;
        }
        entries.push(BracketEntry {
            position: f.position,
            family: f.family,
            strength: f.strength,
            ratio,
            lo,
            hi,
            ok,
        });
    }
    BracketReport {
        entries,
        violations,
    }
}

/// A pointwise violation of the time decay of the weight at an interaction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecayViolation {
    pub time: f64,
    pub x: f64,
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub interactions: usize,
    pub points_checked: usize,
    pub violations: Vec<DecayViolation>,
}

/// Verify `a(t+, x) <= a(t-, x) (1 + 1e-10)` across every interaction of a
/// recorded run, at all one-sided limits of both profiles, excluding the
/// interaction point itself.
pub fn check_interaction_decay(hist: &RunHistory, c1: f64, kappa: f64) -> DecayReport {
    let mut report = DecayReport {
        interactions: 0,
        points_checked: 0,
        violations: Vec::new(),
    };
    for k in 1..hist.epochs.len() {
        let EventKind::Interaction { x: x_star } = hist.epochs[k].event else {
            continue;
        };
        report.interactions += 1;
        let t = hist.epochs[k].t0;
        let prev = &hist.epochs[k - 1];
        let dt = t - prev.t0;
        let moved: Vec<Front> = prev
            .fronts
            .iter()
            .map(|f| Front {
                position: f.position + f.speed * dt,
                ..*f
            })
            .collect();
        let before = WeightProfile::from_fronts(t, &moved, prev.v, prev.q, c1, kappa);
        let cur = &hist.epochs[k];
        let after = WeightProfile::from_fronts(t, &cur.fronts, cur.v, cur.q, c1, kappa);

        let tol = 1e-9 * (1.0 + x_star.abs());
        let mut points: Vec<f64> = before
            .breakpoints
            .iter()
            .chain(after.breakpoints.iter())
            .cloned()
            .filter(|x| (x - x_star).abs() > tol)
            .collect();
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.dedup();
        // Also probe far field and midpoints.
        let mut probes = vec![x_star - 1e3, x_star + 1e3];
        for w in points.windows(2) {
            probes.push(0.5 * (w[0] + w[1]));
        }
        probes.extend(points.iter().cloned());

        for &x in &probes {
            if (x - x_star).abs() <= tol {
                continue;
            }
            for (b, a) in [
                (before.eval_left(x), after.eval_left(x)),
                (before.eval_right(x), after.eval_right(x)),
            ] {
                report.points_checked += 1;
                if a > b * (1.0 + 1e-10) {
                    report.violations.push(DecayViolation {
                        time: t,
                        x,
                        before: b,
                        after: a,
                    });
                }
            }
        }
    }
    report
}

/// Exact sup of the weight and of its reciprocal over the line.
pub fn global_bounds(profile: &WeightProfile) -> (f64, f64) {
    let mut running = 0.0;
    let mut max_prefix = 0.0f64;
    let mut min_prefix = 0.0f64;
    for m in &profile.signed_masses {
        running += m;
        max_prefix = max_prefix.max(running);
        min_prefix = min_prefix.min(running);
    }
    let base = profile.log_base();
    let sup_a = (base + 0.75 * profile.c1 * max_prefix).exp();
    let sup_inv = (-(base + 0.75 * profile.c1 * min_prefix)).exp();
    (sup_a, sup_inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fronttrack::{Evolution, EvolutionParams, Mode};
    use crate::linalg::State;
    use crate::riemann::WaveKind;
    use crate::system::{FluxSystem, PSystem};

    fn empty_sol() -> PiecewiseSolution {
        PiecewiseSolution {
            time: 0.0,
            leftmost: State::new(1.0, 0.0),
            fronts: Vec::new(),
            mode: Mode::Classical,
            interaction_log: Vec::new(),
        }
    }

    fn front(x: f64, family: u8, sigma: f64) -> Front {
        Front {
            position: x,
            speed: 0.0,
            classical_speed: 0.0,
            family,
            kind: if sigma < 0.0 {
                WaveKind::Shock
            } else {
                WaveKind::RarefactionPiece
            },
            strength: sigma,
            left: State::new(1.0, 0.0),
            right: State::new(1.0, 0.0),
        }
    }

    #[test]
    fn empty_solution_weight_is_one() {
        let sol = empty_sol();
        let w = weight_profile(&sol, 1.0, 40.0);
        assert_eq!(w.eval(0.0), 1.0);
        assert_eq!(global_bounds(&w), (1.0, 1.0));
    }

    #[test]
    fn single_one_shock_ratio() {
        let mut sol = empty_sol();
        let s = 0.03;
        sol.fronts = vec![front(0.0, 1, -s)];
        let w = weight_profile(&sol, 1.0, 40.0);
        let ratio = w.eval_right(0.0) / w.eval_left(0.0);
        assert!((ratio - (-0.75 * s).exp()).abs() < 1e-15);
        assert!((ratio - w.ratio_across(0)).abs() < 1e-15);
    }

    #[test]
    fn single_two_wave_ratio() {
        let mut sol = empty_sol();
        let s = 0.02;
        sol.fronts = vec![front(0.0, 2, s)];
        let w = weight_profile(&sol, 1.0, 40.0);
        let ratio = w.eval_right(0.0) / w.eval_left(0.0);
        assert!((ratio - (0.75 * s).exp()).abs() < 1e-15);
    }

    #[test]
    fn left_closed_mass_convention() {
        let mut sol = empty_sol();
        sol.fronts = vec![front(0.0, 1, -0.04)];
        let w = weight_profile(&sol, 1.0, 40.0);
        // The mass at 0 counts only for x > 0.
        assert_eq!(w.eval_left(0.0), w.eval(-1.0));
        assert_eq!(w.eval_right(0.0), w.eval(1.0));
        assert!(w.eval_right(0.0) < w.eval_left(0.0));
    }

    #[test]
    fn bracket_small_strength_holds() {
        let mut sol = empty_sol();
        sol.fronts = vec![front(0.0, 1, -1e-3)];
        let w = weight_profile(&sol, 1.0, 40.0);
        let report = check_front_brackets(&w, &sol);
        assert_eq!(report.violations, 0);
        let e = &report.entries[0];
        // e^{-3e-3/4} ~ 0.99925 inside [0.998, 0.9995].
        assert!(e.ratio > 0.998 && e.ratio < 0.9995);
    }

    #[test]
    fn bracket_large_strength_reported() {
        // The exponential ratio escapes the linearized bracket once the
        // strength is no longer small: e^{-1.125} = 0.325 exceeds the upper
        // edge 1 - 0.75 = 0.25 for a 1-wave of strength 1.5.
        let mut sol = empty_sol();
        sol.fronts = vec![front(0.0, 1, -1.5)];
        let w = weight_profile(&sol, 1.0, 40.0);
        let report = check_front_brackets(&w, &sol);
        assert_eq!(report.violations, 1);
        // Small strengths stay inside.
        sol.fronts = vec![front(0.0, 1, -0.05)];
        let w = weight_profile(&sol, 1.0, 40.0);
        assert_eq!(check_front_brackets(&w, &sol).violations, 0);
    }

    #[test]
    fn zero_strength_front_is_neutral() {
        let mut sol = empty_sol();
        sol.fronts = vec![front(-1.0, 1, -0.03), front(1.0, 2, 0.02)];
        let w1 = weight_profile(&sol, 1.0, 40.0);
        sol.fronts.insert(1, front(0.0, 1, 0.0));
        let w2 = weight_profile(&sol, 1.0, 40.0);
        for x in [-2.0, -0.5, 0.5, 2.0] {
            assert_eq!(w1.eval(x), w2.eval(x));
        }
    }

    #[test]
    fn exp_log_roundtrip() {
        let mut sol = empty_sol();
        sol.fronts = vec![
            front(-1.0, 1, -0.02),
            front(0.0, 2, 0.015),
            front(1.0, 1, 0.01),
        ];
        let w = weight_profile(&sol, 1.0, 40.0);
        // Direct evaluation against the exp of the accumulated sum.
        let mut acc = w.log_base();
        for (i, (bp, m)) in w.breakpoints.iter().zip(&w.signed_masses).enumerate() {
            acc += 0.75 * w.c1 * m;
            let direct = w.eval_right(*bp);
            assert!((direct.ln() - acc).abs() < 1e-14, "front {i}");
        }
    }

    #[test]
    fn global_bounds_single_wave() {
        let mut sol = empty_sol();
        sol.fronts = vec![front(0.0, 1, -0.1)];
        let w = weight_profile(&sol, 1.0, 40.0);
        let (sup_a, sup_inv) = global_bounds(&w);
        // V = 0.1, Q = 0: sup a = exp(0.75 * 0.1) left of the front.
        assert!((sup_a - (0.075f64).exp()).abs() < 1e-14);
        assert!((sup_inv - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cumulative_mass_bound() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut sol = empty_sol();
        for k in 0..20 {
            let fam = if rng.gen::<bool>() { 1 } else { 2 };
            let s = 0.01 * rng.gen::<f64>();
            let sigma = if rng.gen::<bool>() { -s } else { s };
            sol.fronts.push(front(k as f64, fam, sigma));
        }
        let w = weight_profile(&sol, 1.0, 40.0);
        let (sup_a, sup_inv) = global_bounds(&w);
        let bound = (0.75 * (2.0 * w.v + 3.0 * w.kappa * w.q)).exp();
        assert!(sup_a * sup_inv <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn interaction_decay_on_head_on_collision() {
        let sys = PSystem::new(2.0);
        let d = sys.center();
        let m = crate::curves::shock_curve(&sys, d, 2, 0.03).unwrap().state;
        let b = crate::curves::shock_curve(&sys, m, 1, 0.03).unwrap().state;
        let mut evo =
            Evolution::new(&sys, EvolutionParams::new(1e-4), d, &[(-0.1, m), (0.1, b)]).unwrap();
        evo.advance(1.0).unwrap();
        let report = check_interaction_decay(evo.history(), 1.0, evo.params.kappa);
        assert_eq!(report.interactions, 1);
        assert!(report.points_checked > 0);
        assert!(
            report.violations.is_empty(),
            "violations: {:?}",
            report.violations
        );
    }

    #[test]
    fn interaction_decay_on_random_run() {
        use rand::{Rng, SeedableRng};
        let sys = PSystem::new(2.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut jumps = Vec::new();
        let mut x = -1.0;
        for _ in 0..10 {
            x += 0.05 + rng.gen::<f64>() * 0.15;
            jumps.push((
                x,
                State::new(
                    1.0 + 0.01 * (rng.gen::<f64>() - 0.5),
                    0.01 * (rng.gen::<f64>() - 0.5),
                ),
            ));
        }
        let mut evo = Evolution::new(&sys, EvolutionParams::new(1e-3), sys.center(), &jumps).unwrap();
        evo.advance(4.0).unwrap();
        let report = check_interaction_decay(evo.history(), 1.0, evo.params.kappa);
        assert!(report.interactions > 0);
        assert!(
            report.violations.is_empty(),
            "{} violations of {} checks",
            report.violations.len(),
            report.points_checked
        );
    }
}
