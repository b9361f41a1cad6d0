//! Riemann self-similarity oracle: evolved single-jump data must coincide
//! with the wave fan translated to the target time, exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ftlab_core::fronttrack::{l1_distance, Evolution, EvolutionParams, Profile};
use ftlab_core::riemann::{solve_riemann, RiemannFan};
use ftlab_core::State;

use crate::config::ExperimentConfig;
use crate::report::{ExperimentReport, Status};

fn fan_profile(fan: &RiemannFan, x0: f64, t: f64) -> Profile {
    let mut breaks = Vec::with_capacity(fan.waves.len());
    let mut states = Vec::with_capacity(fan.waves.len());
    for w in &fan.waves {
        breaks.push(x0 + w.speed * t);
        states.push(w.right);
    }
    Profile {
        leftmost: fan.left,
        breaks,
        states,
    }
}

pub fn run(config: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    let sys = super::fetch_system(&config.system)?;
    let mut report = ExperimentReport::new(config);
    let cases = config.cases.unwrap_or(100);
    let nu = config.nu;
    let amplitude = 0.01; // per-state offset, jump size at most 0.02

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut max_l1: f64 = 0.0;
    let mut ordering_violations = 0usize;
    let mut match_violations = 0usize;

    for case in 0..cases {
        let offset = |rng: &mut ChaCha8Rng| {
            State::new(
                amplitude * (2.0 * rng.gen::<f64>() - 1.0),
                amplitude * (2.0 * rng.gen::<f64>() - 1.0),
            )
        };
        let u_l = sys.center() + offset(&mut rng);
        let u_r = sys.center() + offset(&mut rng);
        let fan = solve_riemann(sys.as_ref(), nu, u_l, u_r)?;
        let mut increasing = true;
        for pair in fan.waves.windows(2) {
            if pair[1].speed <= pair[0].speed {
                increasing = false;
            }
        }
        if !increasing {
            ordering_violations += 1;
            report.violations.push(format!("case {case}: fan speeds not increasing"));
        }

        let mut evo = Evolution::new(sys.as_ref(), EvolutionParams::new(nu), u_l, &[(0.0, u_r)])?;
        evo.advance(1.0)?;
        let evolved = evo.solution().profile();
        let expected = fan_profile(&fan, 0.0, 1.0);
        let c = sys.info_speed();
        let d = l1_distance(&evolved, &expected, (-c - 1.0, c + 1.0));
        max_l1 = max_l1.max(d);
        if d >= 1e-12 {
            match_violations += 1;
            report
                .violations
                .push(format!("case {case}: evolved/fan L1 distance {d:.3e}"));
        }
    }

    // One representative evolved profile for plots.
    {
        let u_l = sys.center();
        let u_r = sys.center() + State::new(0.008, -0.006);
        let fan = solve_riemann(sys.as_ref(), nu, u_l, u_r)?;
        let prof = fan_profile(&fan, 0.0, 1.0);
        report.attach_csv(
            "fan_profile_t1",
            crate::artifacts::profile_csv(&prof, (-3.0, 3.0), 600),
        );
    }

    report.record("cases", cases as f64);
    report.record("max_l1", max_l1);
    report.criterion(
        "fan_match",
        if match_violations == 0 { Status::Pass } else { Status::Fail },
        max_l1,
        1e-12,
        "largest L1 gap between evolved data and the self-similar fan at t=1",
    );
    report.zero_violations("fan_ordering", ordering_violations, "fans with non-increasing speeds");
    Ok(report)
}
