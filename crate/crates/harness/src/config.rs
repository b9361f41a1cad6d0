//! Experiment configuration: a versioned JSON schema consumed by the CLI
//! and the experiment runners.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Hypotheses,
    RiemannOracle,
    InteractionSuite,
    WeightSuite,
    ShockContraction,
    RarefactionContraction,
    TrapezoidStability,
    DecayRate,
    WeakBvStability,
    SamplingChain,
    MollificationRates,
    CommutatorDecay,
}

impl ExperimentKind {
    pub fn all() -> &'static [ExperimentKind] {
        use ExperimentKind::*;
        &[
            Hypotheses,
            RiemannOracle,
            InteractionSuite,
            WeightSuite,
            ShockContraction,
            RarefactionContraction,
            TrapezoidStability,
            DecayRate,
            WeakBvStability,
            SamplingChain,
            MollificationRates,
            CommutatorDecay,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Hypotheses => "hypotheses",
            ExperimentKind::RiemannOracle => "riemann_oracle",
            ExperimentKind::InteractionSuite => "interaction_suite",
            ExperimentKind::WeightSuite => "weight_suite",
            ExperimentKind::ShockContraction => "shock_contraction",
            ExperimentKind::RarefactionContraction => "rarefaction_contraction",
            ExperimentKind::TrapezoidStability => "trapezoid_stability",
            ExperimentKind::DecayRate => "decay_rate",
            ExperimentKind::WeakBvStability => "weak_bv_stability",
            ExperimentKind::SamplingChain => "sampling_chain",
            ExperimentKind::MollificationRates => "mollification_rates",
            ExperimentKind::CommutatorDecay => "commutator_decay",
        }
    }
}

/// Initial-data generator, serialized with explicit seeds for
/// reproducibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Fbm { hurst: f64 },
    Weierstrass { alpha: f64 },
    RandomStep { n_jumps: usize },
    Constant,
}

fn default_system() -> String {
    "p-system-gamma2".to_string()
}

fn default_nu() -> f64 {
    1e-3
}

fn default_epsilon() -> f64 {
    0.3
}

fn default_t() -> f64 {
    0.25
}

fn default_r() -> f64 {
    0.8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub experiment: ExperimentKind,
    #[serde(default = "default_system")]
    pub system: String,
    #[serde(default = "default_nu")]
    pub nu: f64,
    /// Mollification width, where the experiment uses a single one.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Smallness bound on the Glimm functional of initial data.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(rename = "T", default = "default_t")]
    pub t_final: f64,
    #[serde(rename = "R", default = "default_r")]
    pub radius: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub data: Option<GeneratorSpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Ensemble size for suite experiments.
    #[serde(default)]
    pub cases: Option<usize>,
    /// Declared Sobolev regularity for rate experiments.
    #[serde(default)]
    pub regularity: Option<f64>,
    /// Worker threads for sweep parallelism.
    #[serde(default)]
    pub jobs: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            version: CONFIG_VERSION,
            experiment,
            system: default_system(),
            nu: default_nu(),
            delta: None,
            epsilon: default_epsilon(),
            t_final: default_t(),
            radius: default_r(),
            seed: 0,
            data: None,
            output_dir: None,
            cases: None,
            regularity: None,
            jobs: None,
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(
            self.version == CONFIG_VERSION,
            "unsupported config version {} (expected {})",
            self.version,
            CONFIG_VERSION
        );
        anyhow::ensure!(self.nu > 0.0, "nu must be positive");
        anyhow::ensure!(self.t_final > 0.0, "T must be positive");
        anyhow::ensure!(self.radius > 0.0, "R must be positive");
        Ok(())
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_roundtrip_and_defaults() {
        let text = r#"{"version": 1, "experiment": "riemann_oracle", "seed": 7}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.system, "p-system-gamma2");
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.nu, 1e-3);
        let back = serde_json::to_string(&cfg).unwrap();
        let again = ExperimentConfig::from_json(&back).unwrap();
        assert_eq!(again.experiment, ExperimentKind::RiemannOracle);
    }

    #[test]
    fn version_checked() {
        let text = r#"{"version": 2, "experiment": "hypotheses"}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = r#"{"version": 1, "experiment": "hypotheses", "bogus": 3}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
    }

    #[test]
    fn generator_spec_tags() {
        let spec: GeneratorSpec =
            serde_json::from_str(r#"{"kind": "fbm", "hurst": 0.5}"#).unwrap();
        assert_eq!(spec, GeneratorSpec::Fbm { hurst: 0.5 });
    }
}
