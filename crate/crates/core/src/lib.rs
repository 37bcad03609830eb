//! drawpath: turn line-art raster images into ordered, directed pen paths.
//!
//! The toolchain runs in stages:
//! grayscale image -> ETF + FDoG contours -> binary mask -> clean, thin,
//! prune, extend, split at junctions -> traced segments -> GTSP instance ->
//! greedy / 2-opt / Lin-Kernighan / random-key GA -> pen plan (JSON + SVG).
//!
//! Every stage is a pure function over in-memory values; file formats live
//! in [`formats`] and [`output`].

pub mod config;
pub mod contour;
pub mod formats;
pub mod gtsp;
pub mod image_io;
pub mod output;
pub mod pipeline;
pub mod solver;
pub mod synth;
pub mod trace;

pub use config::{ConfigError, PipelineConfig};
pub use contour::{compute_etf, fdog, EtfField, FdogParams};
pub use gtsp::{
    build_instance, decode, encode, evaluate, Chromosome, DirectedNode, Direction, DrawingPath,
    FitnessReport, GtspError, GtspInstance, Point,
};
pub use image_io::{binarize, load_gray, save_gray, BinaryImage, GrayImage, ImageError};
pub use output::{bench, BenchmarkResult, PenPlan};
pub use pipeline::{run_pipeline, PipelineError, PipelineReport};
pub use solver::{GaConfig, Method, SolveStats};
pub use trace::{LineSegment, TraceParams};
