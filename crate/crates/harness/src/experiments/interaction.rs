//! Interaction and weight suites: seeded ensembles of pairwise collisions
//! and longer random runs, checked against the interaction bookkeeping and
//! the weight decay properties.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ftlab_core::curves::{rarefaction_curve, shock_curve};
use ftlab_core::system::FluxSystem;
use ftlab_core::fronttrack::{
    Evolution, EvolutionParams, Mode, PiecewiseSolution, RunHistory,
};
use ftlab_core::weight::{check_front_brackets, check_interaction_decay, global_bounds, WeightProfile};
use ftlab_core::State;

use crate::config::ExperimentConfig;
use crate::report::ExperimentReport;

pub(crate) struct SuiteRun {
    pub label: String,
    pub history: RunHistory,
    pub records: Vec<ftlab_core::fronttrack::InteractionRecord>,
    pub kappa: f64,
}

fn curve_state(
    sys: &dyn FluxSystem,
    base: State,
    family: u8,
    signed: f64,
) -> anyhow::Result<State> {
    Ok(if signed >= 0.0 {
        rarefaction_curve(sys, base, family, signed)?.state
    } else {
        shock_curve(sys, base, family, -signed)?.state
    })
}

/// One head-on configuration: a right-moving 2-wave followed by a
/// left-moving 1-wave, guaranteed to collide.
fn build_head_on<'a>(
    sys: &'a dyn FluxSystem,
    params: EvolutionParams,
    rng: &mut ChaCha8Rng,
) -> anyhow::Result<Evolution<'a>> {
    let amp = |rng: &mut ChaCha8Rng| {
        let s = 0.005 + 0.03 * rng.gen::<f64>();
        if rng.gen::<bool>() {
            s
        } else {
            -s
        }
    };
    let a = sys.center()
        + State::new(
            0.01 * (rng.gen::<f64>() - 0.5),
            0.01 * (rng.gen::<f64>() - 0.5),
        );
    let m = curve_state(sys, a, 2, amp(rng))?;
    let b = curve_state(sys, m, 1, amp(rng))?;
    Ok(Evolution::new(sys, params, a, &[(-0.2, m), (0.2, b)])?)
}

fn build_random_run<'a>(
    sys: &'a dyn FluxSystem,
    params: EvolutionParams,
    seed: u64,
    jumps: usize,
    amplitude: f64,
) -> anyhow::Result<Evolution<'a>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::new();
    let mut x = -1.0;
    for _ in 0..jumps {
        x += 0.03 + rng.gen::<f64>() * 0.12;
        data.push((
            x,
            sys.center()
                + State::new(
                    amplitude * (rng.gen::<f64>() - 0.5),
                    amplitude * (rng.gen::<f64>() - 0.5),
                ),
        ));
    }
    Ok(Evolution::new(sys, params, sys.center(), &data)?)
}

/// All runs of the suite: `pair_cases` head-on collisions plus a few longer
/// random runs, deterministic in the seed.
pub(crate) fn suite_runs(
    config: &ExperimentConfig,
) -> anyhow::Result<(Vec<SuiteRun>, usize, usize)> {
    let sys = super::fetch_system(&config.system)?;
    let params = EvolutionParams {
        eps_max: config.epsilon,
        ..EvolutionParams::new(config.nu)
    };
    let pair_cases = config.cases.unwrap_or(200);
    let mut runs = Vec::new();
    let mut pairwise_interactions = 0usize;
    let mut total_interactions = 0usize;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut case = 0usize;
    while pairwise_interactions < pair_cases {
        let mut evo = build_head_on(sys.as_ref(), params, &mut rng)?;
        evo.advance(1.0)?;
        let records = evo.solution().interaction_log.clone();
        pairwise_interactions += records
            .iter()
            .filter(|r| r.incoming.len() == 2)
            .count();
        total_interactions += records.len();
        runs.push(SuiteRun {
            label: format!("pair-{case}"),
            history: evo.into_history(),
            records,
            kappa: params.kappa,
        });
        case += 1;
        anyhow::ensure!(case < 20 * pair_cases, "pairwise ensemble failed to fill");
    }

    for k in 0..3u64 {
        let mut evo = build_random_run(
            sys.as_ref(),
            params,
            config.seed ^ (0xA5A5_0000 + k),
            12,
            0.008,
        )?;
        evo.advance(8.0)?;
        let records = evo.solution().interaction_log.clone();
        total_interactions += records.len();
        runs.push(SuiteRun {
            label: format!("run-{k}"),
            history: evo.into_history(),
            records,
            kappa: params.kappa,
        });
    }
    Ok((runs, pairwise_interactions, total_interactions))
}

/// Largest product of approaching incoming strengths of one interaction.
fn strongest_pair(incoming: &[(u8, f64)]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in incoming.iter().enumerate() {
        for b in incoming.iter().skip(i + 1) {
            let approaching =
                a.0 > b.0 || (a.0 == b.0 && (a.1 < 0.0 || b.1 < 0.0));
            if approaching {
                best = best.max((a.1 * b.1).abs());
            }
        }
    }
    best
}

pub fn run_interactions(config: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    let mut report = ExperimentReport::new(config);
    let (runs, pairwise, total) = suite_runs(config)?;
    report.record("pairwise_interactions", pairwise as f64);
    report.record("total_interactions", total as f64);
    anyhow::ensure!(total <= 10_000, "suite exceeded the interaction budget");

    let kappa = runs[0].kappa;
    let mut bound_violations = 0usize;
    let mut monotone_violations = 0usize;
    let mut worst_margin = f64::NEG_INFINITY;
    for run in &runs {
        for rec in &run.records {
            let pair = strongest_pair(&rec.incoming);
            let bound = -0.5 * kappa * pair;
            let margin = rec.delta_u - bound;
            worst_margin = worst_margin.max(margin);
            if margin > 1e-10 {
                bound_violations += 1;
                report.violations.push(format!(
                    "{}: delta_u {} above bound {} at t = {}",
                    run.label, rec.delta_u, bound, rec.time
                ));
            }
            if rec.delta_u > 1e-10 {
                monotone_violations += 1;
            }
        }
    }
    report.record("worst_bound_margin", worst_margin);
    if let Some(run) = runs.iter().find(|r| !r.records.is_empty()) {
        report.attach_csv(
            "interaction_log",
            crate::artifacts::interaction_log_csv(&run.records),
        );
    }
    report.zero_violations(
        "interaction_bound",
        bound_violations,
        "interactions with delta_u above -(kappa/2)|sigma_i sigma_j| + 1e-10",
    );
    report.zero_violations("u_monotone", monotone_violations, "interactions with increasing U");
    Ok(report)
}

pub fn run_weights(config: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    let mut report = ExperimentReport::new(config);
    let (runs, pairwise, total) = suite_runs(config)?;
    report.record("pairwise_interactions", pairwise as f64);
    report.record("total_interactions", total as f64);

    let c1 = 1.0;
    let mut bracket_violations = 0usize;
    let mut decay_violations = 0usize;
    let mut bound_violations = 0usize;
    let mut points = 0usize;

    for run in &runs {
        for epoch in &run.history.epochs {
            let sol = PiecewiseSolution {
                time: epoch.t0,
                leftmost: run.history.leftmost,
                fronts: epoch.fronts.clone(),
                mode: Mode::Classical,
                interaction_log: Vec::new(),
            };
            let profile = WeightProfile {
                time: epoch.t0,
                breakpoints: epoch.fronts.iter().map(|f| f.position).collect(),
                signed_masses: epoch
                    .fronts
                    .iter()
                    .map(|f| {
                        if f.family == 1 {
                            -f.strength.abs()
                        } else {
                            f.strength.abs()
                        }
                    })
                    .collect(),
                v: epoch.v,
                q: epoch.q,
                c1,
                kappa: run.kappa,
            };
            let brackets = check_front_brackets(&profile, &sol);
            bracket_violations += brackets.violations;
            let (sup_a, sup_inv) = global_bounds(&profile);
            let bound = (0.75 * c1 * (2.0 * epoch.v + 3.0 * run.kappa * epoch.q)).exp();
            if sup_a * sup_inv > bound * (1.0 + 1e-12) {
                bound_violations += 1;
                report.violations.push(format!(
                    "{}: sup a sup 1/a = {} above cumulative-mass bound {}",
                    run.label,
                    sup_a * sup_inv,
                    bound
                ));
            }
        }
        let decay = check_interaction_decay(&run.history, c1, run.kappa);
        points += decay.points_checked;
        decay_violations += decay.violations.len();
        for v in decay.violations.iter().take(5) {
            report.violations.push(format!(
                "{}: weight grew at t = {}, x = {}: {} -> {}",
                run.label, v.time, v.x, v.before, v.after
            ));
        }
    }
    report.record("decay_points_checked", points as f64);
    if let Some(run) = runs.first() {
        if let Some(epoch) = run.history.epochs.first() {
            let sol = PiecewiseSolution {
                time: epoch.t0,
                leftmost: run.history.leftmost,
                fronts: epoch.fronts.clone(),
                mode: Mode::Classical,
                interaction_log: Vec::new(),
            };
            let profile = ftlab_core::weight::weight_profile(&sol, c1, run.kappa);
            report.attach_csv("weight_profile", crate::artifacts::weight_csv(&profile));
        }
    }
    report.zero_violations("front_brackets", bracket_violations, "front ratios outside the admissible bracket");
    report.zero_violations("weight_decay", decay_violations, "points where the weight grew across an interaction");
    report.zero_violations("global_bounds", bound_violations, "sup a sup 1/a above the cumulative-mass bound");
    Ok(report)
}
