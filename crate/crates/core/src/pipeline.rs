//! Image to pen plan in one call.
//!
//! Writes into `out_dir`:
//! `contour.png`, `segments.json`, `path.json` (only when there is at least
//! one segment), `plan.svg` and `report.json`.

use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::PipelineConfig;
use crate::contour::extract_contours;
use crate::formats::SegmentFile;
use crate::gtsp::{build_instance, FitnessReport};
use crate::image_io::{load_gray, save_gray};
use crate::output::PenPlan;
use crate::solver::solve;
use crate::trace::trace_segments;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Load,
    Contour,
    Trace,
    Plan,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Contour => "contour",
            Stage::Trace => "trace",
            Stage::Plan => "plan",
            Stage::Write => "write",
        })
    }
}

#[derive(Debug, Error)]
#[error("{stage} stage failed: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
}

fn fail<E: fmt::Display>(stage: Stage) -> impl Fn(E) -> PipelineError {
    move |e| PipelineError {
        stage,
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub load_s: f64,
    pub contour_s: f64,
    pub trace_s: f64,
    pub plan_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub input: String,
    pub width: usize,
    pub height: usize,
    pub segment_count: usize,
    pub method: String,
    pub seed: u64,
    /// Absent when the image produced no segments.
    pub fitness: Option<FitnessReport>,
    pub notes: Vec<String>,
    pub artifacts: Vec<String>,
    pub timings: Timings,
}

pub fn run_pipeline(cfg: &PipelineConfig, input: &Path, out_dir: &Path) -> Result<PipelineReport, PipelineError> {
    let started = Instant::now();
    cfg.validate().map_err(fail(Stage::Config))?;
    fs::create_dir_all(out_dir).map_err(fail(Stage::Write))?;
    let mut timings = Timings::default();
    let mut artifacts = Vec::new();
    let mut notes = Vec::new();

    let t = Instant::now();
    let img = load_gray(input).map_err(fail(Stage::Load))?;
    timings.load_s = t.elapsed().as_secs_f64();
    let (width, height) = (img.width(), img.height());

    let t = Instant::now();
    let mask = extract_contours(&img, &cfg.fdog).map_err(fail(Stage::Contour))?;
    timings.contour_s = t.elapsed().as_secs_f64();
    let contour_path = out_dir.join("contour.png");
    save_gray(&mask.to_gray(), &contour_path).map_err(fail(Stage::Write))?;
    artifacts.push("contour.png".to_string());

    let t = Instant::now();
    let segments = trace_segments(&mask, &cfg.trace);
    timings.trace_s = t.elapsed().as_secs_f64();
    let segment_count = segments.len();
    SegmentFile::new(width, height, segments.clone())
        .save(out_dir.join("segments.json"))
        .map_err(fail(Stage::Write))?;
    artifacts.push("segments.json".to_string());

    let t = Instant::now();
    let plan = if segments.is_empty() {
        notes.push("no segments found; nothing to draw".to_string());
        PenPlan::empty(width, height, cfg.home, cfg.cost_lift)
    } else {
        let inst = build_instance(segments, cfg.home, cfg.cost_lift).map_err(fail(Stage::Plan))?;
        let (path, _) = solve(&inst, cfg.method, &cfg.ga_with_seed()).map_err(fail(Stage::Plan))?;
        let plan = PenPlan::new(&inst, &path, width, height).map_err(fail(Stage::Plan))?;
        plan.save(out_dir.join("path.json")).map_err(fail(Stage::Write))?;
        artifacts.push("path.json".to_string());
        plan
    };
    timings.plan_s = t.elapsed().as_secs_f64();
    plan.save_svg(out_dir.join("plan.svg")).map_err(fail(Stage::Write))?;
    artifacts.push("plan.svg".to_string());
    artifacts.push("report.json".to_string());

    timings.total_s = started.elapsed().as_secs_f64();
    let report = PipelineReport {
        input: input.display().to_string(),
        width,
        height,
        segment_count,
        method: cfg.method.label().to_string(),
        seed: cfg.seed,
        fitness: plan.report.clone(),
        notes,
        artifacts,
        timings,
    };
    let text = serde_json::to_string_pretty(&report).expect("reports always serialize");
    fs::write(out_dir.join("report.json"), text).map_err(fail(Stage::Write))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image_io::GrayImage;

    #[test]
    fn blank_image_succeeds_without_path_file() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("blank.png");
        save_gray(&GrayImage::filled(24, 16, 1.0), &input).unwrap();
        let out = dir.path().join("out");
        let report = run_pipeline(&PipelineConfig::default(), &input, &out).unwrap();
        assert_eq!(report.segment_count, 0);
        assert!(report.fitness.is_none());
        assert!(!report.notes.is_empty());
        assert!(!out.join("path.json").exists());
        for f in ["contour.png", "segments.json", "plan.svg", "report.json"] {
            assert!(out.join(f).exists(), "{f}");
        }
    }

    #[test]
    fn missing_input_is_a_load_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = run_pipeline(&PipelineConfig::default(), &dir.path().join("nope.png"), dir.path()).unwrap_err();
        assert_eq!(err.stage, Stage::Load);
        assert!(err.to_string().starts_with("load stage failed"));
    }

    #[test]
    fn invalid_config_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = PipelineConfig::default();
        cfg.fdog.rho = 0.5;
        let err = run_pipeline(&cfg, &dir.path().join("x.png"), dir.path()).unwrap_err();
        assert_eq!(err.stage, Stage::Config);
    }
}
