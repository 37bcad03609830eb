//! Regenerates the bundled benchmark suite under `data/`.
//!
//! cargo run --release -p drawpath --example make_suite

use std::path::Path;

use drawpath::contour::extract_contours;
use drawpath::formats::SegmentFile;
use drawpath::image_io::save_gray;
use drawpath::synth::sketch;
use drawpath::trace::trace_segments;
use drawpath::{FdogParams, TraceParams};

const SIZE: usize = 320;
const GRID: usize = 2;

fn main() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&data).expect("create data dir");
    let mut total = 0;
    for i in 1..=5u64 {
        let img = sketch(i, SIZE, GRID);
        let mask = extract_contours(&img, &FdogParams::default()).expect("valid params");
        let segs = trace_segments(&mask, &TraceParams::default());
        total += segs.len();
        println!("sketch{i}: {} segments", segs.len());
        SegmentFile::new(SIZE, SIZE, segs)
            .save(data.join(format!("sketch{i}.json")))
            .expect("write instance");
        if i == 1 {
            save_gray(&img, data.join("sketch.png")).expect("write sketch");
        }
    }
    println!("mean: {:.1}", total as f64 / 5.0);
}
