//! Experiment stages. Each stage writes below `<out>/<stage>/` and returns
//! the files it wrote; later stages read earlier ones back from disk.

mod analysis;
mod load;
mod simulate;

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use benard_core::snapshot::Snapshot;

use crate::config::ExperimentConfig;
use crate::manifest::write_manifest;
use crate::CliError;

pub use analysis::{bounds, homogenize, meanfield};
pub use load::{load_cells, load_sweep, read_gradp0, LoadedCell};
pub use simulate::{cell, initial_theta, run, sweep};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Run,
    Sweep,
    Cell,
    Homogenize,
    Meanfield,
    Bounds,
    ExportCsv,
}

impl Stage {
    pub const PIPELINE: [Stage; 6] = [
        Stage::Run,
        Stage::Sweep,
        Stage::Cell,
        Stage::Homogenize,
        Stage::Meanfield,
        Stage::Bounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Run => "run",
            Stage::Sweep => "sweep",
            Stage::Cell => "cell",
            Stage::Homogenize => "homogenize",
            Stage::Meanfield => "meanfield",
            Stage::Bounds => "bounds",
            Stage::ExportCsv => "export-csv",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub(crate) fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
    if let Some(d) = path.parent() {
        fs::create_dir_all(d)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{header}")?;
    for r in rows {
        writeln!(w, "{}", r.join(","))?;
    }
    w.flush()?;
    Ok(path.to_path_buf())
}

/// Runs one stage into `out`.
pub fn run_stage(stage: Stage, cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let r = match stage {
        Stage::Run => run(cfg, out),
        Stage::Sweep => sweep(cfg, &cfg.eps, out),
        Stage::Cell => cell(cfg, out),
        Stage::Homogenize => homogenize(cfg, &out.join("sweep"), &out.join("cell"), out),
        Stage::Meanfield => meanfield(cfg, &out.join("cell"), out),
        Stage::Bounds => bounds(cfg, Some(&out.join("run")), out),
        Stage::ExportCsv => export_csv(&out.join("run"), &out.join("csv")),
    };
    r.map_err(|e| e.in_stage(stage))
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

/// All pipeline stages in order, then `MANIFEST.txt`. A failing stage still
/// leaves a manifest of everything written before it.
pub fn pipeline_full(cfg: &ExperimentConfig, out: &Path) -> Result<PipelineOutput, CliError> {
    fs::create_dir_all(out)?;
    let cfg_path = out.join("config.txt");
    fs::write(&cfg_path, cfg.serialize())?;
    let mut files = vec![cfg_path];
    for stage in Stage::PIPELINE {
        log::info!("stage {stage}");
        match run_stage(stage, cfg, out) {
            Ok(f) => files.extend(f),
            Err(e) => {
                let m = write_manifest(out, &files)?;
                log::error!("stage {stage} failed; manifest of completed stages at {}", m.display());
                return Err(e);
            }
        }
    }
    let manifest = write_manifest(out, &files)?;
    Ok(PipelineOutput { files, manifest })
}

/// Converts a snapshot, or every snapshot below a directory, to CSV files
/// under `dest` mirroring the source layout.
pub fn export_csv(src: &Path, dest: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    let sources: Vec<(PathBuf, PathBuf)> = if src.is_dir() {
        crate::manifest::list_files(src)?
            .into_iter()
            .filter(|r| r.ends_with(".bhf"))
            .map(|r| (src.join(&r), dest.join(&r).with_extension("csv")))
            .collect()
    } else {
        let name = src
            .file_name()
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("snapshot"));
        vec![(src.to_path_buf(), dest.join(name).with_extension("csv"))]
    };
    for (from, to) in sources {
        let snap = Snapshot::<f64>::load(&from)?;
        if let Some(d) = to.parent() {
            fs::create_dir_all(d)?;
        }
        let mut w = BufWriter::new(File::create(&to)?);
        snap.write_csv(&mut w)?;
        written.push(to);
    }
    Ok(written)
}
