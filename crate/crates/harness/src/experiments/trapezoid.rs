//! Short-time stability through a trapezoid tiling: front tracking is run
//! on overlapping trapezoids whose base length keeps the local variation
//! small, the pieces are stitched on their cores, and the distance to a
//! finer-resolution perturbed run must scale linearly in the initial L2
//! perturbation size.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ftlab_core::data::{clamp_into_ball, fbm_path, mollify, Grid};
use ftlab_core::fronttrack::{l1_distance, Evolution, EvolutionParams, Profile};
use ftlab_core::regression::fit_loglog;
use ftlab_core::State;

use crate::config::ExperimentConfig;
use crate::report::ExperimentReport;

/// Variation budget per trapezoid base.
const DELTA0: f64 = 0.01;

pub fn run(config: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    let sys = super::fetch_system(&config.system)?;
    let mut report = ExperimentReport::new(config);
    let c = super::cone_speed(sys.as_ref());
    let r_meas = config.radius.min(0.6);
    let delta = config.delta.unwrap_or(0.05);
    let amplitude = 1e-3;

    // Mollified rough data, shared by every run as one global step sample.
    let half_domain = r_meas + 0.6;
    let grid = Grid::uniform(-half_domain, half_domain, 16385);
    let raw = fbm_path(0.55, config.seed, grid);
    let v0 = clamp_into_ball(&raw, sys.center(), amplitude);
    let v_delta = mollify(&v0, delta)?;
    let sup = v_delta.sup_distance(sys.center());
    let spacing = delta / 16.0;
    let (v_leftmost, v_jumps) = super::steps_from_sampled(&v_delta, spacing);

    // Trapezoid geometry: base length from the variation budget, height
    // set by the information speed.
    let base_len = (delta * DELTA0 / (2.0 * sup)).min(2.0 * r_meas);
    let t_star = base_len / (4.0 * c);
    let expected_count = (4.0 * r_meas / base_len).ceil() as usize;
    report.record("base_length", base_len);
    report.record("t_star", t_star);
    report.record("trapezoid_count_expected", expected_count as f64);

    let params = EvolutionParams {
        eps_max: config.epsilon,
        record_history: false,
        ..EvolutionParams::new(config.nu)
    };
    let params_fine = EvolutionParams {
        eps_max: config.epsilon,
        record_history: false,
        ..EvolutionParams::new(config.nu / 16.0)
    };

    // Tile [-r, r] with bases spaced base_len/2 apart and evolve each
    // trapezoid's restricted data.
    let n_min = ((-r_meas - c * t_star) / (0.5 * base_len)).floor() as i64 - 1;
    let n_max = ((r_meas + c * t_star) / (0.5 * base_len)).ceil() as i64;
    let mut cores: Vec<(f64, f64, Profile)> = Vec::new();
    let mut overlap_floor: f64 = 0.0;
    for n in n_min..=n_max {
        let base_lo = 0.5 * base_len * n as f64;
        let base_hi = base_lo + base_len;
        // Restrict the shared step data to the base, constant outside.
        let mut leftmost = v_leftmost;
        let mut jumps: Vec<(f64, State)> = Vec::new();
        let mut current = v_leftmost;
        for &(x, s) in &v_jumps {
            if x <= base_lo {
                leftmost = s;
                current = s;
            } else if x < base_hi {
                jumps.push((x, s));
                current = s;
            }
        }
        let _ = current;
        let mut evo = Evolution::new(sys.as_ref(), params, leftmost, &jumps)?;
        evo.advance(t_star)?;
        let profile = evo.solution().profile();
        // Overlap agreement with the previous trapezoid on the shared cone.
        if let Some((prev_lo, _, prev)) = cores.last() {
            let shared = (base_lo + c * t_star, prev_lo + 0.5 * base_len);
            if shared.1 > shared.0 {
                overlap_floor = overlap_floor.max(l1_distance(prev, &profile, shared));
            }
        }
        cores.push((base_lo + c * t_star, base_lo + c * t_star + 0.5 * base_len, profile));
    }
    report.record("trapezoid_count", cores.len() as f64);
    report.record("overlap_disagreement", overlap_floor);
    // The tiling covers the cone base, which is slightly wider than the
    // window itself.
    let count_ok =
        cores.len() >= expected_count && cores.len() <= expected_count + 6;
    report.criterion(
        "tiling_count",
        if count_ok {
            crate::report::Status::Pass
        } else {
            crate::report::Status::Fail
        },
        cores.len() as f64,
        expected_count as f64,
        "tiles spaced half a base apart covering the window",
    );

    let stitched_eval = |x: f64| -> State {
        for (lo, hi, p) in &cores {
            if x >= *lo && x < *hi {
                return p.eval(x);
            }
        }
        cores.last().map(|(_, _, p)| p.eval(x)).unwrap_or(State::ZERO)
    };

    // Perturbation sweep: finer-resolution runs from perturbed data.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x7A70);
    let magnitudes = [1e-4, 2.5e-4, 6e-4, 1.5e-3];
    let mut samples = Vec::new();
    for (k, &target) in magnitudes.iter().enumerate() {
        let pieces = 6;
        let width = 1.2 / pieces as f64;
        let mut pert: Vec<(f64, f64, State)> = (0..pieces)
            .map(|j| {
                let a = -0.6 + j as f64 * width;
                (a, a + width, State::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            })
            .collect();
        let l2: f64 = pert.iter().map(|(a, b, p)| p.norm_sq() * (b - a)).sum::<f64>().sqrt();
        for (_, _, p) in &mut pert {
            *p = *p * (target / l2);
        }
        let pert_at = |x: f64| {
            pert.iter()
                .find(|(a, b, _)| x >= *a && x < *b)
                .map(|(_, _, p)| *p)
                .unwrap_or(State::ZERO)
        };
        // Shared step sample plus perturbation steps.
        let mut jumps: Vec<(f64, State)> = Vec::new();
        let mut xs: Vec<f64> = v_jumps.iter().map(|(x, _)| *x).collect();
        for (a, b, _) in &pert {
            xs.push(*a);
            xs.push(*b);
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let base_state = |x: f64| {
            let mut s = v_leftmost;
            for &(xx, ss) in &v_jumps {
                if xx <= x {
                    s = ss;
                } else {
                    break;
                }
            }
            s
        };
        for &x in &xs {
            let probe = x + 1e-9;
            jumps.push((x, base_state(probe) + pert_at(probe)));
        }
        let mut u_run = Evolution::new(sys.as_ref(), params_fine, v_leftmost, &jumps)?;
        u_run.advance(t_star)?;
        let u_profile = u_run.solution().profile();

        // L1 against the stitched solution on the shrunk window.
        let window = (-r_meas + c * t_star, r_meas - c * t_star);
        let cuts = 4000;
        let mut l1 = 0.0;
        let dw = (window.1 - window.0) / cuts as f64;
        for i in 0..cuts {
            let x = window.0 + (i as f64 + 0.5) * dw;
            l1 += (u_profile.eval(x) - stitched_eval(x)).norm() * dw;
        }
        report.record(&format!("l1_m{k}"), l1);
        samples.push((target, l1));
    }

    let fit = fit_loglog(
        &samples.iter().map(|p| p.0).collect::<Vec<_>>(),
        &samples.iter().map(|p| p.1).collect::<Vec<_>>(),
    );
    report.slope_in_band("stitched_l1_vs_l2", fit.as_ref(), 0.9, 1.1);
    Ok(report)
}
