//! Quantitative mollification rates on rough fixtures: the `L/delta` total
//! variation band, L2 convergence rates, and the fractional-TV ratios for
//! Sobolev fixtures on both sides of `p = 2`.

use ftlab_core::data::{
    clamp_into_ball, fbm_path, mollify, random_step, tv_exact, weierstrass, Grid, SampledFunction,
};
use ftlab_core::regression::fit_loglog;
use ftlab_core::State;

use crate::config::ExperimentConfig;
use crate::report::{ExperimentReport, Status};

/// Measured bounds for the fractional-TV ratios, frozen from calibration
/// with a factor-two margin.
const STEP_RATIO_BOUND: f64 = 2.0;
const FBM_RATIO_BOUND: f64 = 6.0;

fn tv_over(u: &SampledFunction, interval: (f64, f64)) -> f64 {
    let mut acc = 0.0;
    for i in 0..u.grid.n - 1 {
        let x = u.grid.x(i);
        if x >= interval.0 && x <= interval.1 {
            acc += (u.values[i + 1] - u.values[i]).norm();
        }
    }
    acc
}

pub fn run(config: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    let mut report = ExperimentReport::new(config);
    let deltas: Vec<f64> = (0..7).map(|k| 1e-3 * 10f64.powf(2.0 * k as f64 / 6.0)).collect();

    // (a) Saturating band: a lacunary fixture with exponent near zero keeps
    // TV(u_delta; L) delta / (sup L) within a factor-two band.
    {
        let grid = Grid::uniform(-1.5, 1.5, 24001);
        let u = weierstrass(0.1, Some(config.seed ^ 1), grid);
        let sup = u.sup_distance(State::ZERO);
        let window = 1.0;
        let mut ratios = Vec::new();
        for &delta in &deltas {
            let ud = mollify(&u, delta)?;
            let ratio = tv_exact(&ud, window) * delta / (sup * window);
            ratios.push(ratio);
            report.record(&format!("band_ratio_d{:.0e}", delta), ratio);
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        report.record("band_min", lo);
        report.record("band_max", hi);
        report.criterion(
            "tv_band_factor_two",
            if hi <= 2.0 * lo { Status::Pass } else { Status::Fail },
            hi / lo,
            2.0,
            "max/min of TV(u_delta;L) delta / (sup L) over the delta sweep",
        );
    }

    // (b) L2 mollification-error slopes for fractional-regularity fixtures.
    for (tag, s) in [("low", 0.5), ("high", 0.8)] {
        let grid = Grid::uniform(-2.0, 2.0, 16385);
        let u = fbm_path(s, config.seed ^ 2, grid);
        let mut ds = Vec::new();
        let mut errs = Vec::new();
        for &delta in &deltas {
            if delta < 3e-3 {
                continue;
            }
            let ud = mollify(&u, delta)?;
            ds.push(delta);
            errs.push(u.lp_distance(&ud, 2.0, (-1.5, 1.5)));
        }
        let fit = fit_loglog(&ds, &errs);
        report.slope_in_band(&format!("l2_rate_{tag}"), fit.as_ref(), s - 0.1, s + 0.15);
    }

    // (c) Fractional-TV ratio for a p < 2 fixture: a step path, declared in
    // W^{s,p} with s p < 1, and its L2 interpolation rate.
    {
        let (s, p) = (0.8, 1.2);
        let q = p / (p - 1.0);
        let grid = Grid::uniform(-1.5, 1.5, 24001);
        let u = clamp_into_ball(&random_step(config.seed ^ 3, 8, grid), State::ZERO, 0.5);
        let interval = (-1.0, 1.0);
        let len: f64 = interval.1 - interval.0;
        let mut worst: f64 = 0.0;
        let mut ds = Vec::new();
        let mut errs = Vec::new();
        for &delta in &deltas {
            let ud = mollify(&u, delta)?;
            let ratio = tv_over(&ud, interval) * delta.powf(1.0 - s) / len.powf(1.0 / q);
            worst = worst.max(ratio);
            ds.push(delta);
            errs.push(u.lp_distance(&ud, 2.0, interval));
        }
        report.record("step_ratio_max", worst);
        report.criterion(
            "fractional_tv_p_below_2",
            if worst <= STEP_RATIO_BOUND { Status::Pass } else { Status::Fail },
            worst,
            STEP_RATIO_BOUND,
            "sup of TV(u_delta) delta^{1-s} / L^{1/q} for the step fixture",
        );
        let fit = fit_loglog(&ds, &errs);
        report.slope_at_least("l2_rate_p_below_2", fit.as_ref(), s * p / 2.0 - 0.1);
    }

    // (d) Fractional-TV ratio for a p > 2 fixture.
    {
        let (s, p) = (0.5, 4.0);
        let q = p / (p - 1.0);
        let grid = Grid::uniform(-1.5, 1.5, 24001);
        let u = fbm_path(0.6, config.seed ^ 4, grid);
        let interval = (-1.0, 1.0);
        let len: f64 = interval.1 - interval.0;
        let mut worst: f64 = 0.0;
        for &delta in &deltas {
            let ud = mollify(&u, delta)?;
            let ratio = tv_over(&ud, interval) * delta.powf(1.0 - s) / len.powf(1.0 / q);
            worst = worst.max(ratio);
        }
        report.record("fbm_ratio_max", worst);
        report.criterion(
            "fractional_tv_p_above_2",
            if worst <= FBM_RATIO_BOUND { Status::Pass } else { Status::Fail },
            worst,
            FBM_RATIO_BOUND,
            "sup of TV(u_delta) delta^{1-s} / L^{1/q} for the fractional-path fixture",
        );
    }

    Ok(report)
}
