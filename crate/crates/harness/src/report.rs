//! Machine-readable experiment reports.

use std::collections::BTreeMap;

use ftlab_core::regression::LogLogFit;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The measurement did not meet the fit-quality bar (at least four
    /// samples and R^2 >= 0.9), so no verdict is issued.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: String,
    pub status: Status,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedFit {
    pub name: String,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub measured: BTreeMap<String, f64>,
    pub slopes: Vec<NamedFit>,
    pub criteria: Vec<CriterionResult>,
    pub violations: Vec<String>,
    pub runtime_seconds: f64,
    /// Plot-ready CSV bodies written next to the report, keyed by file stem.
    #[serde(skip)]
    pub artifacts: Vec<(String, String)>,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        ExperimentReport {
            config: config.clone(),
            measured: BTreeMap::new(),
            slopes: Vec::new(),
            criteria: Vec::new(),
            violations: Vec::new(),
            runtime_seconds: 0.0,
            artifacts: Vec::new(),
        }
    }

    pub fn attach_csv(&mut self, name: &str, body: String) {
        self.artifacts.push((name.to_string(), body));
    }

    pub fn record(&mut self, name: &str, value: f64) {
        self.measured.insert(name.to_string(), value);
    }

    pub fn record_fit(&mut self, name: &str, fit: &LogLogFit) {
        self.slopes.push(NamedFit {
            name: name.to_string(),
            slope: fit.slope,
            intercept: fit.intercept,
            r2: fit.r2,
            n: fit.n,
        });
    }

    pub fn criterion(&mut self, name: &str, status: Status, value: f64, threshold: f64, detail: impl Into<String>) {
        self.criteria.push(CriterionResult {
            name: name.to_string(),
            status,
            value,
            threshold,
            detail: detail.into(),
        });
    }

    /// Pass/fail gate on a count of violations (zero passes).
    pub fn zero_violations(&mut self, name: &str, count: usize, detail: impl Into<String>) {
        self.criterion(
            name,
            if count == 0 { Status::Pass } else { Status::Fail },
            count as f64,
            0.0,
            detail,
        );
    }

    /// Slope-based criterion: a fit must carry at least four samples and
    /// R^2 >= 0.9 to produce a verdict, otherwise it is inconclusive.
    pub fn slope_at_least(&mut self, name: &str, fit: Option<&LogLogFit>, min_slope: f64) {
        match fit {
            Some(f) if f.n >= 4 && f.r2 >= 0.9 => {
                self.record_fit(name, f);
                self.criterion(
                    name,
                    if f.slope >= min_slope { Status::Pass } else { Status::Fail },
                    f.slope,
                    min_slope,
                    format!("slope {:.4} (r2 {:.4}, n {})", f.slope, f.r2, f.n),
                );
            }
            Some(f) => {
                self.record_fit(name, f);
                self.criterion(
                    name,
                    Status::Inconclusive,
                    f.slope,
                    min_slope,
                    format!("fit quality below bar: r2 {:.4}, n {}", f.r2, f.n),
                );
            }
            None => {
                self.criterion(name, Status::Inconclusive, f64::NAN, min_slope, "no fit available");
            }
        }
    }

    /// Slope confined to a band, same quality bar as [`slope_at_least`].
    pub fn slope_in_band(&mut self, name: &str, fit: Option<&LogLogFit>, lo: f64, hi: f64) {
        match fit {
            Some(f) if f.n >= 4 && f.r2 >= 0.9 => {
                self.record_fit(name, f);
                let ok = f.slope >= lo && f.slope <= hi;
                self.criterion(
                    name,
                    if ok { Status::Pass } else { Status::Fail },
                    f.slope,
                    lo,
                    format!("slope {:.4} target [{lo}, {hi}] (r2 {:.4})", f.slope, f.r2),
                );
            }
            Some(f) => {
                self.record_fit(name, f);
                self.criterion(
                    name,
                    Status::Inconclusive,
                    f.slope,
                    lo,
                    format!("fit quality below bar: r2 {:.4}, n {}", f.r2, f.n),
                );
            }
            None => {
                self.criterion(name, Status::Inconclusive, f64::NAN, lo, "no fit available");
            }
        }
    }

    /// The report passes when no criterion failed (inconclusive results are
    /// accepted by design).
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.status != Status::Fail)
    }

    /// Serialization with the runtime zeroed, for byte-identity checks of
    /// deterministic reruns.
    pub fn canonical_json(&self) -> serde_json::Result<String> {
        let mut clone = self.clone();
        clone.runtime_seconds = 0.0;
        serde_json::to_string_pretty(&clone)
    }

    pub fn summary_lines(&self) -> Vec<String> {
        self.criteria
            .iter()
            .map(|c| {
                let tag = match c.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Inconclusive => "INCONCLUSIVE",
                };
                format!(
                    "[{tag}] {}: value {:.6e} (threshold {:.6e}) {}",
                    c.name, c.value, c.threshold, c.detail
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentConfig, ExperimentKind};

    #[test]
    fn pass_fail_gating() {
        let cfg = ExperimentConfig::new(ExperimentKind::Hypotheses);
        let mut r = ExperimentReport::new(&cfg);
        r.zero_violations("a", 0, "");
        assert!(r.passed());
        r.criterion("b", Status::Inconclusive, 0.0, 0.0, "");
        assert!(r.passed());
        r.zero_violations("c", 3, "");
        assert!(!r.passed());
    }

    #[test]
    fn slope_quality_bar() {
        let cfg = ExperimentConfig::new(ExperimentKind::DecayRate);
        let mut r = ExperimentReport::new(&cfg);
        let good = LogLogFit { slope: 0.5, intercept: 0.0, r2: 0.99, n: 6 };
        let poor = LogLogFit { slope: 0.5, intercept: 0.0, r2: 0.5, n: 6 };
        let few = LogLogFit { slope: 0.5, intercept: 0.0, r2: 0.99, n: 3 };
        r.slope_at_least("good", Some(&good), 0.4);
        r.slope_at_least("poor", Some(&poor), 0.4);
        r.slope_at_least("few", Some(&few), 0.4);
        assert_eq!(r.criteria[0].status, Status::Pass);
        assert_eq!(r.criteria[1].status, Status::Inconclusive);
        assert_eq!(r.criteria[2].status, Status::Inconclusive);
    }

    #[test]
    fn canonical_json_zeroes_runtime() {
        let cfg = ExperimentConfig::new(ExperimentKind::Hypotheses);
        let mut a = ExperimentReport::new(&cfg);
        let mut b = ExperimentReport::new(&cfg);
        a.runtime_seconds = 1.23;
        b.runtime_seconds = 4.56;
        assert_eq!(a.canonical_json().unwrap(), b.canonical_json().unwrap());
    }
}
