//! `ftlab`: run stability experiments, list the builtin systems, and emit
//! hypothesis reports.

use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};

use ftlab::config::{ExperimentConfig, ExperimentKind};
use ftlab::{run_experiment, Status};

#[derive(Parser)]
#[command(name = "ftlab", about = "Front-tracking stability laboratory", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON configuration.
    Run {
        config: PathBuf,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for config/report/CSV artifacts.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the wave-strength resolution.
        #[arg(long)]
        nu: Option<f64>,
        /// Worker threads for sweep parallelism.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List the builtin flux systems.
    ListSystems,
    /// Run the hypothesis checks on one system and emit the report.
    Check {
        system: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Grid radius around the center state.
        #[arg(long, default_value_t = 0.1)]
        grid_radius: f64,
    },
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            nu,
            jobs,
        } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = ExperimentConfig::from_json(&text)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = nu {
                cfg.nu = n;
            }
            if let Some(j) = jobs {
                cfg.jobs = Some(j);
            }
            if let Some(dir) = out {
                cfg.output_dir = Some(dir);
            }
            let report = run_experiment(&cfg)?;
            for line in report.summary_lines() {
                println!("{line}");
            }
            println!(
                "{}: {} in {:.2}s",
                cfg.experiment.name(),
                if report.passed() { "ok" } else { "FAILED" },
                report.runtime_seconds
            );
            if let Some(dir) = &cfg.output_dir {
                ftlab::artifacts::write_run_outputs(dir, &cfg, &report, &report.artifacts)?;
                println!("artifacts written to {}", dir.display());
            }
            if !report.passed() {
                std::process::exit(1);
            }
        }
        Command::ListSystems => {
            for sys in ftlab_core::system::builtin_systems() {
                let entropy = if sys.entropy().is_some() { "entropy" } else { "no entropy" };
                println!(
                    "{:24} center ({:.3}, {:.3})  radius {:.3}  {}",
                    sys.name(),
                    sys.center().u1,
                    sys.center().u2,
                    sys.radius(),
                    entropy
                );
            }
            println!();
            println!("experiments:");
            for kind in ExperimentKind::all() {
                println!("  {}", kind.name());
            }
        }
        Command::Check {
            system,
            out,
            grid_radius,
        } => {
            let mut cfg = ExperimentConfig::new(ExperimentKind::Hypotheses);
            cfg.system = system.clone();
            cfg.delta = Some(grid_radius);
            let report = run_experiment(&cfg)?;
            for line in report.summary_lines() {
                println!("{line}");
            }
            let rows = ftlab::experiments::hypothesis_rows_json(&system, grid_radius)?;
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(
                    dir.join("hypotheses.json"),
                    serde_json::to_string_pretty(&rows)?,
                )?;
                // Wave-curve dumps for both families.
                let sys = ftlab_core::system::system_by_name(&system)
                    .ok_or_else(|| anyhow::anyhow!("unknown system `{system}`"))?;
                for family in [1u8, 2u8] {
                    let mut shock_points = Vec::new();
                    let mut rare_points = Vec::new();
                    let s_max = (0.1f64).min(sys.max_shock_param());
                    for k in 0..=60 {
                        let s = s_max * k as f64 / 60.0;
                        if let Ok(p) = ftlab_core::curves::shock_curve(sys.as_ref(), sys.center(), family, s)
                        {
                            shock_points.push((p.s, p.state, p.sigma));
                        }
                        if let Ok(p) =
                            ftlab_core::curves::rarefaction_curve(sys.as_ref(), sys.center(), family, s)
                        {
                            rare_points.push((p.s, p.state, p.sigma));
                        }
                    }
                    std::fs::write(
                        dir.join(format!("shock_curve_family{family}.csv")),
                        ftlab::artifacts::curve_dump_csv(&shock_points),
                    )?;
                    std::fs::write(
                        dir.join(format!("rarefaction_curve_family{family}.csv")),
                        ftlab::artifacts::curve_dump_csv(&rare_points),
                    )?;
                }
                ftlab::artifacts::write_run_outputs(&dir, &cfg, &report, &report.artifacts)?;
                println!("report written to {}", dir.display());
            } else {
                let failing = report.criteria.iter().filter(|c| c.status == Status::Fail).count();
                println!("verdicts: {} criteria, {failing} failing", report.criteria.len());
            }
            if !report.passed() {
                std::process::exit(1);
            }
        }
    }
    Ok(())
}
