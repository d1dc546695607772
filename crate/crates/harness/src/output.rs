//! Files written for a run. Angles in radians, probabilities as fractions.
//!
//! | file            | contents                                                      |
//! |-----------------|---------------------------------------------------------------|
//! | `fig3b.csv`     | `j,operator,value,ideal`: postselected ⟨X⟩,⟨Y⟩,⟨Z⟩ per input     |
//! | `fig3c.csv`     | `j,fidelity,std`: output-state fidelity per input               |
//! | `fig4.json`     | `experiment` and `ideal` χ as real/imag 4×4 grids, fidelity     |
//! | `ramsey.csv`    | `theta,p1_control0,p1_control1` (device backends only)          |
//! | `dataset.csv`   | tomography readouts, `input_index,setting,q1_outcome,q4_outcome,count` |
//! | `report.json`   | the whole report bundle                                        |
//! | `metadata.json` | seed, version and wall-clock timestamp                          |
//!
//! Everything except `metadata.json` is a deterministic function of the
//! config.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hhl_core::tomography::{ChiJson, TomographyDataset};
use serde::Serialize;

use crate::error::HarnessError;
use crate::pipeline::{ReportBundle, RamseyReport};

const OPERATORS: [&str; 3] = ["X", "Y", "Z"];

pub fn fig3b_csv(bundle: &ReportBundle) -> String {
    let mut out = String::from("j,operator,value,ideal\n");
    for r in &bundle.records {
        for (k, op) in OPERATORS.iter().enumerate() {
            let _ = writeln!(out, "{},{},{:?},{:?}", r.index, op, r.expectations[k], r.ideal[k]);
        }
    }
    out
}

pub fn fig3c_csv(bundle: &ReportBundle) -> String {
    let mut out = String::from("j,fidelity,std\n");
    for r in &bundle.records {
        let _ = writeln!(out, "{},{:?},{:?}", r.index, r.fidelity, r.fidelity_std);
    }
    out
}

#[derive(Serialize)]
struct Fig4<'a> {
    experiment: &'a ChiJson,
    ideal: &'a ChiJson,
    process_fidelity: f64,
    process_fidelity_std: f64,
}

pub fn fig4_json(bundle: &ReportBundle) -> String {
    let p = &bundle.process;
    let fig = Fig4 {
        experiment: &p.chi_exp,
        ideal: &p.chi_id,
        process_fidelity: p.fidelity,
        process_fidelity_std: p.fidelity_std,
    };
    serde_json::to_string_pretty(&fig).expect("serialisable")
}

pub fn ramsey_csv(r: &RamseyReport) -> String {
    let mut out = String::from("theta,p1_control0,p1_control1\n");
    for (k, t) in r.thetas.iter().enumerate() {
        let _ = writeln!(out, "{:?},{:?},{:?}", t, r.curves[0][k], r.curves[1][k]);
    }
    out
}

pub fn report_json(bundle: &ReportBundle) -> String {
    serde_json::to_string_pretty(bundle).expect("serialisable")
}

pub fn load_report(path: &Path) -> Result<ReportBundle, HarnessError> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

fn write(dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<(), HarnessError> {
    let path = dir.join(name);
    fs::write(&path, contents)?;
    written.push(path);
    Ok(())
}

/// Figure data, report and (if given) the tomography dataset.
pub fn emit_figures_data(
    bundle: &ReportBundle,
    dataset: Option<&TomographyDataset>,
    dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    write(dir, "fig3b.csv", &fig3b_csv(bundle), &mut written)?;
    write(dir, "fig3c.csv", &fig3c_csv(bundle), &mut written)?;
    write(dir, "fig4.json", &fig4_json(bundle), &mut written)?;
    if let Some(r) = &bundle.ramsey {
        write(dir, "ramsey.csv", &ramsey_csv(r), &mut written)?;
    }
    if let Some(d) = dataset {
        write(dir, "dataset.csv", &d.to_csv(), &mut written)?;
    }
    write(dir, "report.json", &report_json(bundle), &mut written)?;
    Ok(written)
}

#[derive(Serialize)]
struct Metadata<'a> {
    version: &'a str,
    seed: u64,
    backend: &'a str,
    unix_time: u64,
}

pub fn write_metadata(bundle: &ReportBundle, dir: &Path) -> Result<PathBuf, HarnessError> {
    fs::create_dir_all(dir)?;
    let unix_time = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = Metadata { version: &bundle.version, seed: bundle.seed, backend: bundle.backend.name(), unix_time };
    let path = dir.join("metadata.json");
    fs::write(&path, serde_json::to_string_pretty(&meta).expect("serialisable"))?;
    Ok(path)
}
