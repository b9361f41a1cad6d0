//! Plot-ready CSV and JSON artifacts: one directory per run holding
//! `config.json`, `report.json`, and the experiment's CSV exports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ftlab_core::data::SampledFunction;
use ftlab_core::fronttrack::{InteractionRecord, Profile};
use ftlab_core::weight::WeightProfile;

use crate::config::ExperimentConfig;
use crate::report::ExperimentReport;

pub fn write_run_outputs(
    dir: &Path,
    config: &ExperimentConfig,
    report: &ExperimentReport,
    csvs: &[(String, String)],
) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(config)?)?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)?)?;
    for (name, body) in csvs {
        fs::write(dir.join(format!("{name}.csv")), body)?;
    }
    Ok(())
}

/// Uniformly sampled solution profile as `x,u1,u2`.
pub fn profile_csv(profile: &Profile, interval: (f64, f64), n: usize) -> String {
    let mut out = String::from("x,u1,u2\n");
    for i in 0..n {
        let x = interval.0 + (interval.1 - interval.0) * i as f64 / (n - 1) as f64;
        let u = profile.eval(x);
        let _ = writeln!(out, "{x},{},{}", u.u1, u.u2);
    }
    out
}

/// Solution breakpoints as `x,u1_left,u2_left,u1_right,u2_right`.
pub fn breakpoints_csv(profile: &Profile) -> String {
    let mut out = String::from("x,u1_left,u2_left,u1_right,u2_right\n");
    for &x in &profile.breaks {
        let l = profile.eval_left(x);
        let r = profile.eval(x);
        let _ = writeln!(out, "{x},{},{},{},{}", l.u1, l.u2, r.u1, r.u2);
    }
    out
}

pub fn interaction_log_csv(log: &[InteractionRecord]) -> String {
    let mut out = String::from("time,position,incoming,outgoing,delta_v,delta_q,delta_u\n");
    for rec in log {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            rec.time,
            rec.position,
            rec.incoming.len(),
            rec.outgoing.len(),
            rec.delta_v,
            rec.delta_q,
            rec.delta_u
        );
    }
    out
}

/// Weight breakpoints as `x,a_left,a_right`.
pub fn weight_csv(profile: &WeightProfile) -> String {
    let mut out = String::from("x,a_left,a_right\n");
    for &x in &profile.breakpoints {
        let _ = writeln!(out, "{x},{},{}", profile.eval_left(x), profile.eval_right(x));
    }
    out
}

/// Time series as `t,value`.
pub fn series_csv(header: &str, series: &[(f64, f64)]) -> String {
    let mut out = format!("t,{header}\n");
    for (t, v) in series {
        let _ = writeln!(out, "{t},{v}");
    }
    out
}

/// Sweep samples as `x,value` (for rate fits).
pub fn sweep_csv(x_name: &str, y_name: &str, samples: &[(f64, f64)]) -> String {
    let mut out = format!("{x_name},{y_name}\n");
    for (x, y) in samples {
        let _ = writeln!(out, "{x},{y}");
    }
    out
}

/// Wave-curve dump as `s,u1,u2,sigma` (sigma empty on rarefaction curves).
pub fn curve_dump_csv(points: &[(f64, ftlab_core::State, Option<f64>)]) -> String {
    let mut out = String::from("s,u1,u2,sigma\n");
    for (s, u, sigma) in points {
        match sigma {
            Some(v) => {
                let _ = writeln!(out, "{s},{},{},{v}", u.u1, u.u2);
            }
            None => {
                let _ = writeln!(out, "{s},{},{},", u.u1, u.u2);
            }
        }
    }
    out
}

pub fn sampled_function_csv(u: &SampledFunction) -> String {
    let mut out = String::from("x,u1,u2\n");
    for i in 0..u.grid.n {
        let _ = writeln!(out, "{},{},{}", u.grid.x(i), u.values[i].u1, u.values[i].u2);
    }
    out
}
