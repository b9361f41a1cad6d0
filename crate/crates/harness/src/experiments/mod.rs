//! The experiment implementations, one module per experiment, plus shared
//! machinery: cone-speed calibration, step-data builders, and distances.

use std::sync::Arc;

use anyhow::Context;
use ftlab_core::data::SampledFunction;
use ftlab_core::fronttrack::Profile;
use ftlab_core::relent::q_eta_domination;
use ftlab_core::system::{ball_grid, eigensystem, system_by_name, FluxSystem};
use ftlab_core::State;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::report::ExperimentReport;

mod commutator;
mod contraction;
mod decay;
mod hypotheses;
mod interaction;
mod mollification;
mod riemann_oracle;
mod sampling_chain;
mod trapezoid;
mod weak_bv;

/// Per-state hypothesis rows for the `check` subcommand's JSON export.
pub fn hypothesis_rows_json(system: &str, grid_radius: f64) -> anyhow::Result<serde_json::Value> {
    hypotheses::hypothesis_rows(system, grid_radius)
}

pub fn dispatch(config: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    match config.experiment {
        ExperimentKind::Hypotheses => hypotheses::run(config),
        ExperimentKind::RiemannOracle => riemann_oracle::run(config),
        ExperimentKind::InteractionSuite => interaction::run_interactions(config),
        ExperimentKind::WeightSuite => interaction::run_weights(config),
        ExperimentKind::ShockContraction => contraction::run_shock(config),
        ExperimentKind::RarefactionContraction => contraction::run_rarefaction(config),
        ExperimentKind::TrapezoidStability => trapezoid::run(config),
        ExperimentKind::DecayRate => decay::run(config),
        ExperimentKind::WeakBvStability => weak_bv::run(config),
        ExperimentKind::SamplingChain => sampling_chain::run(config),
        ExperimentKind::MollificationRates => mollification::run(config),
        ExperimentKind::CommutatorDecay => commutator::run(config),
    }
}

pub(crate) fn fetch_system(name: &str) -> anyhow::Result<Arc<dyn FluxSystem>> {
    system_by_name(name).with_context(|| format!("unknown system `{name}`"))
}

/// Speed of information for desk-scale runs: the measured `q/eta`
/// domination constant and the largest wave speed over the state range the
/// experiments actually visit (a small neighborhood of the center), with a
/// safety margin.
pub(crate) fn cone_speed(sys: &dyn FluxSystem) -> f64 {
    let radius = (0.12f64).min(0.8 * sys.radius());
    let grid = ball_grid(sys.center(), radius, 9);
    let domination = q_eta_domination(sys, &grid).unwrap_or(0.0);
    let mut speed: f64 = 0.0;
    for &u in &grid {
        if let Ok(ed) = eigensystem(sys, u) {
            speed = speed.max(ed.lambda1.abs()).max(ed.lambda2.abs());
        }
    }
    1.05 * domination.max(speed)
}

/// Resample a smooth carrier into step data for the solver: cells of the
/// given spacing, each carrying the value at its midpoint. Returns the
/// leftmost state and the jump list.
pub(crate) fn steps_from_sampled(
    u: &SampledFunction,
    spacing: f64,
) -> (State, Vec<(f64, State)>) {
    let lo = u.grid.x0;
    let hi = u.grid.x_end();
    let cells = ((hi - lo) / spacing).ceil().max(1.0) as usize;
    let width = (hi - lo) / cells as f64;
    let mut leftmost = u.eval(lo + 0.5 * width);
    let mut jumps = Vec::new();
    let mut current = leftmost;
    for k in 1..cells {
        let state = u.eval(lo + (k as f64 + 0.5) * width);
        if state != current {
            jumps.push((lo + k as f64 * width, state));
            current = state;
        }
    }
    if jumps.is_empty() {
        // Degenerate constant carrier.
        leftmost = u.eval(0.5 * (lo + hi));
    }
    (leftmost, jumps)
}

/// Exact squared-L2 distance of two piecewise-constant profiles.
pub(crate) fn l2_distance(a: &Profile, b: &Profile, interval: (f64, f64)) -> f64 {
    let (lo, hi) = interval;
    if hi <= lo {
        return 0.0;
    }
    let mut cuts: Vec<f64> = Vec::with_capacity(a.breaks.len() + b.breaks.len() + 2);
    cuts.push(lo);
    for &x in a.breaks.iter().chain(b.breaks.iter()) {
        if x > lo && x < hi {
            cuts.push(x);
        }
    }
    cuts.push(hi);
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        if len > 0.0 {
            let mid = 0.5 * (w[0] + w[1]);
            acc += (a.eval(mid) - b.eval(mid)).norm_sq() * len;
        }
    }
    acc.sqrt()
}

/// L1 distance between a solver profile and a sampled carrier, by grid
/// quadrature over an interval.
pub(crate) fn l1_profile_vs_sampled(
    profile: &Profile,
    u: &SampledFunction,
    interval: (f64, f64),
) -> f64 {
    let mut acc = 0.0;
    for i in 0..u.grid.n {
        let x = u.grid.x(i);
        if x < interval.0 || x > interval.1 {
            continue;
        }
        acc += (profile.eval(x) - u.values[i]).norm() * u.grid.dx;
    }
    acc
}

/// Install a scoped rayon pool when a thread count is requested.
pub(crate) fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        _ => f(),
    }
}
