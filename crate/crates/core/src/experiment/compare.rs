use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::plot::{render_svg, Series};
use super::run::RunReport;
use super::{write_file, ExperimentError};

pub const COMPARE_HEADER: &str = "report,label,generation,mean,min,max";

/// Across-seed statistics of best-per-generation fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    /// Position of the report on the command line.
    pub report: usize,
    pub label: String,
    pub generation: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

pub fn compare_reports(reports: &[RunReport]) -> Result<Vec<CompareRow>, ExperimentError> {
    let Some(first) = reports.first() else {
        return Err(ExperimentError::Config("compare needs at least one report".into()));
    };
    let horizon = first.seeds.first().map_or(0, |s| s.best_fitness.len());
    let mut rows = Vec::new();
    for (ri, r) in reports.iter().enumerate() {
        if r.seeds.is_empty() {
            return Err(ExperimentError::Config(format!("report {ri} has no seeds")));
        }
        for s in &r.seeds {
            if s.best_fitness.len() != horizon {
                return Err(ExperimentError::MismatchedHorizons(format!(
                    "report {ri} seed {} has {} generations, expected {horizon}",
                    s.seed,
                    s.best_fitness.len()
                )));
            }
        }
        for g in 0..horizon {
            let vals: Vec<f64> = r.seeds.iter().map(|s| s.best_fitness[g]).collect();
            rows.push(CompareRow {
                report: ri,
                label: r.label(),
                generation: g,
                mean: vals.iter().sum::<f64>() / vals.len() as f64,
                min: vals.iter().copied().fold(f64::INFINITY, f64::min),
                max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            });
        }
    }
    Ok(rows)
}

/// Loads the reports, writes `compare.csv` and `compare.svg` into `out`.
pub fn compare(report_paths: &[PathBuf], out: &Path) -> Result<Vec<CompareRow>, ExperimentError> {
    let reports = report_paths.iter().map(|p| RunReport::load(p)).collect::<Result<Vec<_>, _>>()?;
    let rows = compare_reports(&reports)?;

    let mut csv = String::from(COMPARE_HEADER);
    csv.push('\n');
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{},{},{}", r.report, r.label, r.generation, r.mean, r.min, r.max);
    }
    write_file(&out.join("compare.csv"), csv)?;

    let series: Vec<Series> = (0..reports.len())
        .map(|ri| {
            let mine: Vec<&CompareRow> = rows.iter().filter(|r| r.report == ri).collect();
            Series {
                label: reports[ri].label(),
                x: mine.iter().map(|r| r.generation as f64).collect(),
                y: mine.iter().map(|r| r.mean).collect(),
                band: Some((mine.iter().map(|r| r.min).collect(), mine.iter().map(|r| r.max).collect())),
            }
        })
        .collect();
    write_file(&out.join("compare.svg"), render_svg("best fitness across seeds", "generation", "best fitness", &series))?;
    Ok(rows)
}
