//! Pen plans (JSON), SVG previews and the method benchmark.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gtsp::{build_instance, evaluate, Direction, DrawingPath, FitnessReport, GtspError, GtspInstance, Point};
use crate::solver::{solve, GaConfig, Method, SolverError};
use crate::trace::{LineSegment, Pixel};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("malformed plan {path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error(transparent)]
    Gtsp(#[from] GtspError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("benchmark needs at least one trial")]
    NoTrials,
    #[error("cannot build thread pool: {0}")]
    Threads(String),
}

fn write_file(path: &Path, text: &str) -> Result<(), OutputError> {
    fs::write(path, text).map_err(|source| OutputError::Write {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pen", rename_all = "lowercase")]
pub enum Move {
    /// Travel with the pen lifted.
    Up { from: Point, to: Point },
    /// Draw a segment; `points` are already in drawing order.
    Down {
        segment_id: usize,
        direction: Direction,
        points: Vec<Pixel>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenPlan {
    pub width: usize,
    pub height: usize,
    pub home: Point,
    pub cost_lift: f64,
    pub moves: Vec<Move>,
    /// Absent for an empty plan.
    pub report: Option<FitnessReport>,
}

impl PenPlan {
    /// Ordered pen moves for `path`. Transitions of zero length keep the pen
    /// down and get no `Up` record, so the number of `Up` moves is `n_lift`.
    pub fn new(inst: &GtspInstance, path: &DrawingPath, width: usize, height: usize) -> Result<Self, GtspError> {
        let report = evaluate(inst, path)?;
        let mut moves = Vec::with_capacity(2 * path.len() + 1);
        let mut pos = inst.home();
        for &(id, dir) in &path.tour {
            let start = inst.start(id, dir);
            if moves.is_empty() || pos != start {
                moves.push(Move::Up { from: pos, to: start });
            }
            let mut points = inst.segments()[id].points.clone();
            if dir == Direction::Reverse {
                points.reverse();
            }
            moves.push(Move::Down {
                segment_id: id,
                direction: dir,
                points,
            });
            pos = inst.end(id, dir);
        }
        moves.push(Move::Up {
            from: pos,
            to: inst.home(),
        });
        Ok(Self {
            width,
            height,
            home: inst.home(),
            cost_lift: inst.cost_lift(),
            moves,
            report: Some(report),
        })
    }

    pub fn empty(width: usize, height: usize, home: Point, cost_lift: f64) -> Self {
        Self {
            width,
            height,
            home,
            cost_lift,
            moves: Vec::new(),
            report: None,
        }
    }

    /// Rebuilds the instance and the drawing path the plan was made from.
    pub fn to_instance(&self) -> Result<(GtspInstance, DrawingPath), GtspError> {
        let mut segments = Vec::new();
        let mut tour = Vec::new();
        for m in &self.moves {
            if let Move::Down {
                segment_id,
                direction,
                points,
            } = m
            {
                let mut pts = points.clone();
                if *direction == Direction::Reverse {
                    pts.reverse();
                }
                let seg = LineSegment::new(*segment_id, pts).map_err(|e| GtspError::BadSegment(e.to_string()))?;
                segments.push(seg);
                tour.push((*segment_id, *direction));
            }
        }
        let inst = build_instance(segments, self.home, self.cost_lift)?;
        let path = DrawingPath::new(tour);
        if !path.is_valid_for(inst.len()) {
            return Err(GtspError::InvalidPath(inst.len()));
        }
        Ok((inst, path))
    }

    pub fn pen_up_count(&self) -> usize {
        self.moves.iter().filter(|m| matches!(m, Move::Up { .. })).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plans always serialize")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), OutputError> {
        write_file(path.as_ref(), &self.to_json())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, OutputError> {
        let path = path.as_ref();
        let shown = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|source| OutputError::Read {
            path: shown.clone(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| OutputError::Parse { path: shown, source })
    }

    /// SVG preview: solid polylines for strokes, dashed lines for pen-up
    /// travel, a circle at home.
    pub fn to_svg(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            w = self.width,
            h = self.height
        );
        let _ = writeln!(s, r#"<rect width="{}" height="{}" fill="white"/>"#, self.width, self.height);
        for m in &self.moves {
            match m {
                Move::Up { from, to } => {
                    let _ = writeln!(
                        s,
                        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#d04040" stroke-width="0.5" stroke-dasharray="2,2"/>"##,
                        from.x, from.y, to.x, to.y
                    );
                }
                Move::Down { segment_id, points, .. } => {
                    let pts: Vec<String> = points.iter().map(|p| format!("{},{}", p[0], p[1])).collect();
                    let _ = writeln!(
                        s,
                        r#"<polyline data-segment="{}" points="{}" fill="none" stroke="black" stroke-width="1"/>"#,
                        segment_id,
                        pts.join(" ")
                    );
                }
            }
        }
        let _ = writeln!(
            s,
            r##"<circle cx="{}" cy="{}" r="2" fill="#2060d0"/>"##,
            self.home.x, self.home.y
        );
        s.push_str("</svg>\n");
        s
    }

    pub fn save_svg(&self, path: impl AsRef<Path>) -> Result<(), OutputError> {
        write_file(path.as_ref(), &self.to_svg())
    }
}

/// Writes the plan for `p` as JSON.
pub fn export_path(
    p: &DrawingPath,
    inst: &GtspInstance,
    width: usize,
    height: usize,
    path: impl AsRef<Path>,
) -> Result<(), OutputError> {
    PenPlan::new(inst, p, width, height)?.save(path)
}

pub fn render_svg(
    p: &DrawingPath,
    inst: &GtspInstance,
    width: usize,
    height: usize,
    path: impl AsRef<Path>,
) -> Result<(), OutputError> {
    PenPlan::new(inst, p, width, height)?.save_svg(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub instance_name: String,
    pub method: String,
    pub trials: usize,
    pub mean_fitness: f64,
    pub improvement_over_greedy_pct: f64,
}

pub fn improvement_pct(greedy: f64, mean: f64) -> f64 {
    100.0 * (greedy - mean) / greedy
}

/// Runs every method `trials` times on every instance (trial `t` uses seed
/// `base_seed + t`) and compares mean fitness with the greedy tour. Rows
/// come out instance-major in the order given.
pub fn bench<S: AsRef<str>>(
    instances: &[(String, GtspInstance)],
    methods: &[S],
    trials: usize,
    base_seed: u64,
    cfg: &GaConfig,
) -> Result<Vec<BenchmarkResult>, OutputError> {
    if trials == 0 {
        return Err(OutputError::NoTrials);
    }
    let methods: Vec<Method> = methods
        .iter()
        .map(|m| m.as_ref().parse())
        .collect::<Result<_, SolverError>>()?;
    cfg.validate()?;

    let run = |inst: &GtspInstance, method: Method, seed: u64| -> Result<f64, OutputError> {
        let cfg = GaConfig { seed, ..cfg.clone() };
        let (path, _) = solve(inst, method, &cfg)?;
        Ok(evaluate(inst, &path)?.v_fitness)
    };

    let greedy: Vec<f64> = instances
        .iter()
        .map(|(_, inst)| run(inst, Method::Greedy, base_seed))
        .collect::<Result<_, _>>()?;

    let cells: Vec<(usize, usize, usize)> = (0..instances.len())
        .flat_map(|i| (0..methods.len()).flat_map(move |m| (0..trials).map(move |t| (i, m, t))))
        .collect();
    let scores: Vec<f64> = cells
        .par_iter()
        .map(|&(i, m, t)| run(&instances[i].1, methods[m], base_seed.wrapping_add(t as u64)))
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::with_capacity(instances.len() * methods.len());
    for (i, (name, _)) in instances.iter().enumerate() {
        for (m, method) in methods.iter().enumerate() {
            let start = (i * methods.len() + m) * trials;
            let mean = scores[start..start + trials].iter().sum::<f64>() / trials as f64;
            rows.push(BenchmarkResult {
                instance_name: name.clone(),
                method: method.label().to_string(),
                trials,
                mean_fitness: mean,
                improvement_over_greedy_pct: improvement_pct(greedy[i], mean),
            });
        }
    }
    Ok(rows)
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, OutputError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| OutputError::Threads(e.to_string()))?;
    Ok(pool.install(f))
}

fn distinct<'a>(items: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for it in items {
        if !out.contains(&it) {
            out.push(it);
        }
    }
    out
}

/// Improvement table: one row per method, one column per instance, plus
/// the average over instances.
pub fn bench_table(rows: &[BenchmarkResult]) -> String {
    let instances = distinct(rows.iter().map(|r| r.instance_name.as_str()));
    let methods = distinct(rows.iter().map(|r| r.method.as_str()));
    let width = instances.iter().map(|s| s.len()).max().unwrap_or(0).max(8);
    let mut s = format!("{:<14}", "method");
    for name in &instances {
        let _ = write!(s, " {name:>width$}");
    }
    let _ = writeln!(s, " {:>8}", "Avg.");
    for m in &methods {
        let _ = write!(s, "{m:<14}");
        let mut sum = 0.0;
        let mut n = 0;
        for name in &instances {
            match rows.iter().find(|r| r.method == *m && r.instance_name == *name) {
                Some(r) => {
                    let _ = write!(s, " {:>width$}", format!("{:.1}%", r.improvement_over_greedy_pct));
                    sum += r.improvement_over_greedy_pct;
                    n += 1;
                }
                None => {
                    let _ = write!(s, " {:>width$}", "-");
                }
            }
        }
        let avg = if n > 0 { format!("{:.1}%", sum / n as f64) } else { "-".into() };
        let _ = writeln!(s, " {avg:>8}");
    }
    s
}

/// Machine-readable rows; floats use the shortest exact representation.
pub fn bench_csv(rows: &[BenchmarkResult]) -> String {
    let mut s = String::from("instance,method,trials,mean_fitness,improvement_over_greedy_pct\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.instance_name, r.method, r.trials, r.mean_fitness, r.improvement_over_greedy_pct
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::greedy;
    use crate::synth::random_instance;
    use Direction::{Forward as F, Reverse as R};

    fn chained() -> GtspInstance {
        build_instance(
            vec![
                LineSegment::new(0, vec![[0, 0], [1, 0], [2, 0]]).unwrap(),
                LineSegment::new(1, vec![[2, 0], [2, 1], [2, 2]]).unwrap(),
                LineSegment::new(2, vec![[9, 9], [8, 8]]).unwrap(),
            ],
            Point::new(5.0, 5.0),
            30.0,
        )
        .unwrap()
    }

    #[test]
    fn single_segment_plan_shape() {
        let inst = build_instance(
            vec![LineSegment::new(0, vec![[3, 3], [4, 3]]).unwrap()],
            Point::default(),
            30.0,
        )
        .unwrap();
        let plan = PenPlan::new(&inst, &DrawingPath::new(vec![(0, F)]), 10, 10).unwrap();
        assert_eq!(plan.moves.len(), 3);
        assert_eq!(plan.pen_up_count(), 2);
    }

    #[test]
    fn chained_transition_keeps_pen_down() {
        let inst = chained();
        let path = DrawingPath::new(vec![(0, F), (1, F), (2, R)]);
        let plan = PenPlan::new(&inst, &path, 10, 10).unwrap();
        assert!(matches!(plan.moves[1], Move::Down { segment_id: 0, .. }));
        assert!(matches!(plan.moves[2], Move::Down { segment_id: 1, .. }));
        assert_eq!(plan.pen_up_count(), plan.report.as_ref().unwrap().n_lift);
        if let Move::Down { points, .. } = &plan.moves[4] {
            assert_eq!(points, &vec![[8, 8], [9, 9]]);
        } else {
            panic!("expected a stroke");
        }
    }

    #[test]
    fn export_import_round_trip() {
        let inst = random_instance(12, 60, 5);
        let path = greedy(&inst);
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plan.json");
        export_path(&path, &inst, 60, 60, &file).unwrap();
        let plan = PenPlan::load(&file).unwrap();
        let (inst2, path2) = plan.to_instance().unwrap();
        assert_eq!(path2, path);
        let a = evaluate(&inst, &path).unwrap().v_fitness;
        let b = evaluate(&inst2, &path2).unwrap().v_fitness;
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn svg_element_counts() {
        let inst = chained();
        let path = DrawingPath::new(vec![(2, F), (0, R), (1, F)]);
        let plan = PenPlan::new(&inst, &path, 10, 10).unwrap();
        let svg = plan.to_svg();
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert_eq!(svg.matches("stroke-dasharray").count(), plan.report.unwrap().n_lift);
        assert!(svg.contains(r#"viewBox="0 0 10 10""#));
    }

    #[test]
    fn empty_plan_svg_has_home_only() {
        let svg = PenPlan::empty(10, 10, Point::default(), 30.0).to_svg();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert_eq!(svg.matches("<polyline").count(), 0);
        assert_eq!(svg.matches("<line").count(), 0);
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    fn quick_cfg() -> GaConfig {
        GaConfig {
            population_size: 12,
            max_generations: 5,
            ..GaConfig::default()
        }
    }

    #[test]
    fn greedy_against_itself_is_zero() {
        let inst = vec![("a".to_string(), random_instance(10, 50, 1))];
        let rows = bench(&inst, &["greedy"], 2, 0, &quick_cfg()).unwrap();
        assert_eq!(rows[0].improvement_over_greedy_pct, 0.0);
    }

    #[test]
    fn bench_rejects_bad_input() {
        let inst = vec![("a".to_string(), random_instance(4, 50, 1))];
        assert!(matches!(
            bench(&inst, &["nope"], 1, 0, &quick_cfg()),
            Err(OutputError::Solver(SolverError::UnknownMethod(_)))
        ));
        assert!(matches!(bench(&inst, &["greedy"], 0, 0, &quick_cfg()), Err(OutputError::NoTrials)));
    }

    #[test]
    fn bench_rows_follow_formula_and_render() {
        let inst = vec![
            ("a".to_string(), random_instance(10, 50, 1)),
            ("b".to_string(), random_instance(10, 50, 2)),
        ];
        let rows = bench(&inst, &["greedy2opt", "rkga2opt"], 2, 7, &quick_cfg()).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            let inst = &inst.iter().find(|i| i.0 == r.instance_name).unwrap().1;
            let g = evaluate(inst, &greedy(inst)).unwrap().v_fitness;
            assert_eq!(r.improvement_over_greedy_pct, improvement_pct(g, r.mean_fitness));
            assert!(r.improvement_over_greedy_pct >= -1e-9);
        }
        let table = bench_table(&rows);
        assert!(table.contains("Avg."));
        assert_eq!(table.lines().count(), 3);
        let csv = bench_csv(&rows);
        assert_eq!(csv.lines().count(), 5);
        assert_eq!(csv, bench_csv(&bench(&inst, &["greedy2opt", "rkga2opt"], 2, 7, &quick_cfg()).unwrap()));
    }
}
