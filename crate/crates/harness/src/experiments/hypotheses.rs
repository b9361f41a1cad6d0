//! Structural hypothesis checks of a flux system on a state grid: strict
//! hyperbolicity, genuine nonlinearity, the cross-family convexity sign,
//! and entropy compatibility.

use ftlab_core::system::{
    ball_grid, check_entropy_pair, check_genuine_nonlinearity, check_smoller_johnson, eigensystem,
};

use crate::config::ExperimentConfig;
use crate::report::{ExperimentReport, Status};

pub fn run(config: &ExperimentConfig) -> anyhow::Result<ExperimentReport> {
    let sys = super::fetch_system(&config.system)?;
    let mut report = ExperimentReport::new(config);

    let grid_radius = config.delta.unwrap_or(0.1).min(sys.radius());
    let grid = ball_grid(sys.center(), grid_radius, 50);
    report.record("grid_points", grid.len() as f64);
    report.record("grid_radius", grid_radius);

    // Hyperbolic gap and eigenvector duality over the grid.
    let mut min_gap = f64::INFINITY;
    let mut max_duality_err: f64 = 0.0;
    for &u in &grid {
        let ed = eigensystem(sys.as_ref(), u)?;
        min_gap = min_gap.min(ed.lambda2 - ed.lambda1);
        max_duality_err = max_duality_err
            .max((ed.l1.dot(ed.r1) - 1.0).abs())
            .max((ed.l2.dot(ed.r2) - 1.0).abs())
            .max(ed.l1.dot(ed.r2).abs())
            .max(ed.l2.dot(ed.r1).abs());
    }
    report.record("min_eigen_gap", min_gap);
    report.record("max_duality_error", max_duality_err);
    report.criterion(
        "hyperbolicity_gap",
        if min_gap > 1e-6 { Status::Pass } else { Status::Fail },
        min_gap,
        1e-6,
        "smallest eigenvalue gap on the grid",
    );
    report.criterion(
        "eigenvector_duality",
        if max_duality_err < 1e-10 { Status::Pass } else { Status::Fail },
        max_duality_err,
        1e-10,
        "max |l_i . r_j - delta_ij|",
    );

    let gnl = check_genuine_nonlinearity(sys.as_ref(), &grid)?;
    report.record("min_gnl", gnl.min_value());
    report.record("gnl_flagged", gnl.flagged.len() as f64);
    report.criterion(
        "genuine_nonlinearity",
        if gnl.all_positive() { Status::Pass } else { Status::Fail },
        gnl.min_value(),
        0.0,
        "min of l_i f''(r_i, r_i) over states and families",
    );

    let sj = check_smoller_johnson(sys.as_ref(), &grid)?;
    let (mut sj_min, mut sj_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for e in &sj.entries {
        sj_min = sj_min.min(e.value);
        sj_max = sj_max.max(e.value);
    }
    report.record("sj_min", sj_min);
    report.record("sj_max", sj_max);
    report.record("sj_passes", if sj.passes { 1.0 } else { 0.0 });
    if !sj.passes {
        report
            .violations
            .push(format!("cross-family convexity sign fails: min value {sj_min:.4}"));
    }

    match check_entropy_pair(sys.as_ref(), &grid) {
        Ok(residual) => {
            report.record("entropy_residual", residual);
            report.criterion(
                "entropy_compatibility",
                if residual < 1e-8 { Status::Pass } else { Status::Fail },
                residual,
                1e-8,
                "max |grad q - grad eta f'| over the grid",
            );
        }
        Err(_) => {
            report.record("entropy_residual", f64::NAN);
        }
    }

    Ok(report)
}

/// Per-state hypothesis rows for the JSON export of `ftlab check`.
pub fn hypothesis_rows(system: &str, grid_radius: f64) -> anyhow::Result<serde_json::Value> {
    let sys = super::fetch_system(system)?;
    let grid = ball_grid(sys.center(), grid_radius.min(sys.radius()), 50);
    let gnl = check_genuine_nonlinearity(sys.as_ref(), &grid)?;
    let sj = check_smoller_johnson(sys.as_ref(), &grid)?;
    let mut rows = Vec::with_capacity(gnl.entries.len());
    for (g, s) in gnl.entries.iter().zip(sj.entries.iter()) {
        rows.push(serde_json::json!({
            "state": [g.state.u1, g.state.u2],
            "family": g.family,
            "gnl_value": g.value,
            "sj_value": s.value,
            "verdict": if g.value > 0.0 { "gnl_ok" } else { "gnl_fail" },
        }));
    }
    Ok(serde_json::json!({
        "system": system,
        "sj_overall": if sj.passes { "PASSES" } else { "FAILS" },
        "rows": rows,
    }))
}
