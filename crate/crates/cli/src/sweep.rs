//! Runs every cell of a [`SweepSpec`] and writes the result tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use wpt_relay::mechanism::Mechanism;
use wpt_relay::sim::{run_experiment, Metrics};

use crate::config::{Cell, Mode, SweepSpec};
use crate::error::CliError;

pub const CSV_HEADER: &str = "n,alpha,gamma,mechanism,outage_prob,mean_power_cond_w,\
mean_power_uncond_w,mean_harvested_w,mean_surplus_w,trials,seed";

/// Environment variable naming the directory for relative output paths.
pub const OUT_DIR_ENV: &str = "WPT_RELAY_OUT_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: Cell,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub selection_path: Option<PathBuf>,
    pub rows: usize,
}

/// `results.csv` becomes `results.manifest`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest")
}

/// `results.csv` becomes `results_selection.csv`.
pub fn selection_path(csv: &Path) -> PathBuf {
    let stem = csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    csv.with_file_name(format!("{stem}_selection.csv"))
}

/// Simulates all cells in parallel; results come back in cell order.
pub fn run_cells(spec: &SweepSpec, progress: bool) -> Result<Vec<CellResult>, CliError> {
    let cells = spec.cells();
    let total = cells.len();
    let done = AtomicUsize::new(0);
    cells
        .into_par_iter()
        .map(|cell| {
            let metrics = run_experiment(&cell.config).map_err(|e| {
                CliError::Simulation(format!(
                    "n={} alpha={} gamma={}: {e}",
                    cell.n, cell.alpha, cell.gamma
                ))
            })?;
            if progress {
                let k = done.fetch_add(1, Ordering::Relaxed) + 1;
                eprintln!(
                    "[{k}/{total}] n={} alpha={} gamma={} done",
                    cell.n, cell.alpha, cell.gamma
                );
            }
            Ok(CellResult { cell, metrics })
        })
        .collect()
}

pub fn render_csv(spec: &SweepSpec, results: &[CellResult]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in results {
        for &m in &spec.mechanisms {
            let mm = r.metrics.get(m);
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6},{:.8e},{:.8e},{:.8e},{:.8e},{},{}",
                r.cell.n,
                r.cell.alpha,
                r.cell.gamma,
                m.name(),
                mm.outage_prob,
                mm.mean_source_power_cond,
                mm.mean_source_power_uncond,
                mm.mean_harvested,
                mm.mean_surplus,
                r.metrics.trial_count,
                r.cell.config.seed,
            );
        }
    }
    out
}

/// Per-candidate win frequencies; the remainder of each row is the source
/// transmitting directly.
pub fn render_selection_csv(spec: &SweepSpec, results: &[CellResult]) -> String {
    let n = results.first().map_or(0, |r| r.cell.n);
    let mut out = String::from("alpha,gamma,mechanism");
    for i in 1..=n {
        let _ = write!(out, ",freq_{i}");
    }
    out.push_str(",trials,seed\n");
    for r in results {
        for &m in spec.mechanisms.iter().filter(|&&m| m != Mechanism::Direct) {
            let _ = write!(out, "{},{},{}", r.cell.alpha, r.cell.gamma, m.name());
            for f in &r.metrics.get(m).selection_freq {
                let _ = write!(out, ",{f:.6}");
            }
            let _ = writeln!(out, ",{},{}", r.metrics.trial_count, r.cell.config.seed);
        }
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Runs the sweep and writes the CSV, the manifest and, in
/// selection-frequency mode, the selection table.
pub fn run_sweep(spec: &SweepSpec, progress: bool) -> Result<SweepOutput, CliError> {
    spec.validate()?;
    let results = run_cells(spec, progress)?;
    let csv_path = spec.output_path.clone();
    let csv = render_csv(spec, &results);
    write_file(&csv_path, &csv)?;
    let manifest = manifest_path(&csv_path);
    write_file(&manifest, &spec.to_config_text())?;
    let selection = if spec.mode == Mode::SelectionFreq {
        let path = selection_path(&csv_path);
        write_file(&path, &render_selection_csv(spec, &results))?;
        Some(path)
    } else {
        None
    };
    Ok(SweepOutput {
        csv_path,
        manifest_path: manifest,
        selection_path: selection,
        rows: csv.lines().count() - 1,
    })
}
