//! Algebraic decay of `||u(t) - u^0||_{L1}` for rough initial data: the run
//! starts from data mollified at width `delta = t^{1 - s/2}` and the
//! distance to the original data is measured on the shrinking cone, for a
//! grid of target times.

use ftlab_core::data::{clamp_into_ball, fbm_path, mollify, weierstrass, Grid};
use ftlab_core::fronttrack::{Evolution, EvolutionParams};
use ftlab_core::regression::fit_loglog;

use crate::config::{ExperimentConfig, GeneratorSpec};
use crate::report::ExperimentReport;

pub fn run(config: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    let sys = super::fetch_system(&config.system)?;
    let mut report = ExperimentReport::new(config);
    let c = super::cone_speed(sys.as_ref());
    let r_meas = config.radius.min(0.4);
    let t_max = config.t_final.min(0.1).min(0.8 * r_meas / c);
    let t_min = t_max / 10.0;
    let s = config.regularity.unwrap_or(0.5);
    let amplitude = 3e-4;

    // Carrier wide enough that the cone base of the measurement window sits
    // inside the data domain, with a mollification margin.
    let delta_max = t_max.powf(1.0 - s / 2.0);
    let half_domain = r_meas + c * t_max + 2.0 * delta_max + 0.1;
    let n = 8192;
    let grid = Grid::uniform(-half_domain, half_domain, n + 1);
    let raw = match config.data {
        Some(GeneratorSpec::Weierstrass { alpha }) => weierstrass(alpha, Some(config.seed), grid),
        Some(GeneratorSpec::Fbm { hurst }) => fbm_path(hurst, config.seed, grid),
        _ => fbm_path(s, config.seed, grid),
    };
    let u0 = clamp_into_ball(&raw, sys.center(), amplitude);

    let n_times = 5;
    let mut samples = Vec::new();
    for k in 0..n_times {
        let t = t_min * (t_max / t_min).powf(k as f64 / (n_times - 1) as f64);
        let delta = t.powf(1.0 - s / 2.0);
        let u_delta = mollify(&u0, delta)?;
        let spacing = delta / 12.0;
        let (leftmost, jumps) = super::steps_from_sampled(&u_delta, spacing);
        let params = EvolutionParams {
            eps_max: config.epsilon,
            sigma_max: 0.06,
            record_history: false,
            ..EvolutionParams::new(config.nu)
        };
        let mut evo = Evolution::new(sys.as_ref(), params, leftmost, &jumps)?;
        evo.advance(t)?;
        let profile = evo.solution().profile();
        let window = (-r_meas + c * t, r_meas - c * t);
        let l1 = super::l1_profile_vs_sampled(&profile, &u0, window);
        report.record(&format!("l1_t{k}"), l1);
        report.record(&format!("window_t{k}"), window.1 - window.0);
        samples.push((t, l1));
    }

    report.attach_csv("l1_vs_t", crate::artifacts::sweep_csv("t", "l1", &samples));
    let fit = fit_loglog(
        &samples.iter().map(|p| p.0).collect::<Vec<_>>(),
        &samples.iter().map(|p| p.1).collect::<Vec<_>>(),
    );
    let floor = samples.iter().all(|&(_, v)| v < 1e-14);
    report.record("regularity", s);
    if floor {
        report.criterion(
            "decay_slope",
            crate::report::Status::Inconclusive,
            f64::NAN,
            s / 2.0 - 0.1,
            "distances at numerical floor; fit skipped",
        );
    } else {
        report.slope_at_least("decay_slope", fit.as_ref(), s / 2.0 - 0.1);
    }
    Ok(report)
}
