//! Configuration, output files and the drivers behind the command line.

mod config;
mod snapshot;

pub use config::{parse_pairs, MeshConfig, ProblemConfig, RunConfig, RunControl};
pub use snapshot::{read_snapshot, read_snapshot_rows, snapshot_csv, write_snapshot};

pub use crate::stepper::{RunStats, StepRecord, StopReason};

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::assembly::Assembler;
use crate::error::Result;
use crate::sparse::write_matrix_market;
use crate::stepper::run_with;

#[derive(Serialize)]
struct StatsFile<'a> {
    config: BTreeMap<String, String>,
    #[serde(flatten)]
    stats: &'a RunStats,
}

pub fn snapshot_name(step: usize) -> String {
    format!("snapshot_{step:06}.csv")
}

pub fn write_stats(cfg: &RunConfig, stats: &RunStats, path: impl AsRef<Path>) -> Result<()> {
    let file = StatsFile {
        config: cfg.to_map(),
        stats,
    };
    fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

/// Run `cfg`, writing `config.txt`, snapshot CSVs and `stats.json` into `dir`.
/// Stats are written even when a step fails.
pub fn run_to_dir(cfg: &RunConfig, dir: impl AsRef<Path>) -> Result<RunStats> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    cfg.save(dir.join("config.txt"))?;
    let mesh = cfg.build_mesh()?;
    let (_, stats) = run_with(cfg, &mut |step, state| write_snapshot(&mesh, state, dir.join(snapshot_name(step))))?;
    write_stats(cfg, &stats, dir.join("stats.json"))?;
    Ok(stats)
}

/// Write `M.mtx`, `K.mtx`, `R.mtx` and `S0.mtx` (S at the initial condition).
pub fn export_matrices(cfg: &RunConfig, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mesh = cfg.build_mesh()?;
    let asm = Assembler::new(&mesh)?;
    let initial = &cfg.problem.initial;
    let u0 = mesh.interpolate(|x, y| initial.eval(x, y));
    let mats = [
        ("M.mtx", asm.mass()),
        ("K.mtx", asm.h1()),
        ("R.mtx", cfg.problem.density.with_field(|p| asm.r(p))),
        ("S0.mtx", asm.s(&u0)?),
    ];
    let mut paths = Vec::new();
    for (name, m) in mats {
        let p = dir.join(name);
        write_matrix_market(&m, &p)?;
        paths.push(p);
    }
    Ok(paths)
}
