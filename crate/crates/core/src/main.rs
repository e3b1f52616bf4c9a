use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hmfem::harness::{export_matrices, run_to_dir, RunConfig, StopReason};
use hmfem::problems::{preset, PRESETS};
use hmfem::verify::{run_suite, SuiteOptions};
use hmfem::{Error, Result};

#[derive(Parser)]
#[command(name = "hmfem", version, about = "Periodic Hasegawa-Mima P1 finite-element solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration file, optionally with overrides.
    Run {
        /// Config file (`key = value` lines). Defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Overrides,
    },
    /// Run a named preset.
    Preset {
        name: String,
        #[command(flatten)]
        common: Overrides,
    },
    /// Write M.mtx, K.mtx, R.mtx and S0.mtx.
    ExportMatrices {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Start from a preset instead of a config file.
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// Constant density gradient (exponential profile `p = k x`).
        #[arg(long)]
        k: Option<f64>,
        #[command(flatten)]
        common: Overrides,
    },
    /// Run the verification suites and write a JSON report.
    Verify {
        #[arg(long, default_value = "verify_report.json")]
        out: PathBuf,
        #[arg(long, default_value_t = SuiteOptions::default().seed)]
        seed: u64,
        /// Randomized oracle instances.
        #[arg(long, default_value_t = SuiteOptions::default().cases)]
        cases: usize,
        #[arg(long, default_value_t = SuiteOptions::default().samples)]
        samples: usize,
    },
    /// List preset names.
    ListPresets,
}

#[derive(Args)]
struct Overrides {
    /// Output directory (overrides run.output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    length: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long = "t-end")]
    t_end: Option<String>,
    #[arg(long = "u-max")]
    u_max: Option<String>,
    /// semilinear | fixedpoint
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long = "snapshot-every")]
    snapshot_every: Option<usize>,
    /// Extra `key=value` settings, e.g. `scheme.fp_tol=1e-12`.
    #[arg(value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Overrides {
    fn pairs(&self) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        let mut add = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        add("mesh.n", self.n.map(|v| v.to_string()));
        add("mesh.length", self.length.clone());
        add("scheme.tau", self.tau.clone());
        add("run.t_end", self.t_end.clone());
        add("run.u_max", self.u_max.clone());
        add("scheme.type", self.scheme.clone());
        add("run.snapshot_every", self.snapshot_every.map(|v| v.to_string()));
        add("run.output_dir", self.out.as_ref().map(|p| p.display().to_string()));
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::config(s.as_str(), "expected key=value"))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(out)
    }

    fn apply(&self, cfg: &RunConfig) -> Result<RunConfig> {
        let pairs = self.pairs()?;
        let cfg = cfg.with_overrides(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn output_dir(cfg: &RunConfig, fallback: &str) -> PathBuf {
    cfg.run.output_dir.clone().unwrap_or_else(|| PathBuf::from(fallback))
}

fn simulate(cfg: &RunConfig, fallback: &str) -> Result<bool> {
    let dir = output_dir(cfg, fallback);
    let stats = run_to_dir(cfg, &dir)?;
    for w in &stats.warnings {
        eprintln!("warning: {w}");
    }
    let last = stats.records.last();
    println!(
        "{} steps, t = {:.4}, max|u| = {:.6e}, stop: {}",
        stats.steps,
        stats.final_t,
        last.map_or(0.0, |r| r.u_max),
        serde_json::to_value(stats.stop_reason)?.as_str().unwrap_or("?"),
    );
    println!("output written to {}", dir.display());
    if let Some(e) = &stats.error {
        eprintln!("error: run aborted: {e}");
    }
    Ok(stats.stop_reason != StopReason::Error)
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, common } => {
            let base = match &config {
                Some(p) => RunConfig::load(p)?,
                None => RunConfig::default(),
            };
            simulate(&common.apply(&base)?, "out")
        }
        Command::Preset { name, common } => {
            let cfg = common.apply(&preset(&name)?)?;
            simulate(&cfg, &format!("out/{name}"))
        }
        Command::ExportMatrices {
            config,
            preset: name,
            k,
            common,
        } => {
            let mut base = match (&config, &name) {
                (Some(p), _) => RunConfig::load(p)?,
                (None, Some(n)) => preset(n)?,
                (None, None) => RunConfig::default(),
            };
            if let Some(k) = k {
                base = base.with_overrides([("problem.density", "exponential"), ("problem.density.a", k.to_string().as_str())])?;
            }
            let cfg = common.apply(&base)?;
            let dir = output_dir(&cfg, "matrices");
            for p in export_matrices(&cfg, &dir)? {
                println!("{}", p.display());
            }
            Ok(true)
        }
        Command::Verify {
            out,
            seed,
            cases,
            samples,
        } => {
            let opts = SuiteOptions {
                seed,
                cases,
                samples,
                ..SuiteOptions::default()
            };
            let report = run_suite(&opts)?;
            for c in &report.checks {
                println!("{} {} ({:.3e}) {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.max_violation, c.detail);
            }
            report.write(&out)?;
            println!("report written to {}", out.display());
            Ok(report.passed)
        }
        Command::ListPresets => {
            for p in PRESETS {
                println!("{:<12} {}", p.name, p.description);
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
