use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};

use drawpath::contour::extract_contours;
use drawpath::formats::SegmentFile;
use drawpath::pipeline::Stage;
use drawpath::output::{bench, bench_csv, bench_table, with_threads, PenPlan};
use drawpath::solver::solve;
use drawpath::synth::bundled_suite;
use drawpath::trace::trace_segments;
use drawpath::{binarize, build_instance, load_gray, run_pipeline, save_gray, Method, PipelineConfig, Point};

#[derive(Parser)]
#[command(name = "drawpath", version, about = "Turn line-art images into optimized pen-drawing paths")]
struct Cli {
    /// TOML config file. Command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract binary contours (ETF + FDoG) from an image.
    Contour {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        fdog: FdogArgs,
    },
    /// Skeletonize a binary image and trace it into segments.
    Trace {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Pixels darker than this are ink.
        #[arg(long)]
        threshold: Option<f64>,
        #[command(flatten)]
        trace: TraceArgs,
    },
    /// Order and orient the segments of a segment file.
    Plan {
        segments: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        ga: GaArgs,
    },
    /// Render a plan file as SVG.
    Render {
        plan: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compare methods against the greedy tour.
    Bench {
        /// Segment files; defaults to the bundled synthetic suite.
        #[arg(long, num_args = 1..)]
        instances: Vec<PathBuf>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Trial t runs with seed + t.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "greedy2opt,greedy2optlk,rkga2opt,rkga2optlk")]
        methods: Vec<String>,
        /// Also write the results as CSV.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        ga: GaArgs,
    },
    /// Image to contours, segments, plan, SVG and report in one go.
    Pipeline {
        input: PathBuf,
        /// Output directory.
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[command(flatten)]
        fdog: FdogArgs,
        #[command(flatten)]
        trace: TraceArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        ga: GaArgs,
    },
}

#[derive(Args)]
struct FdogArgs {
    #[arg(long)]
    sigma_c: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    sigma_m: Option<f64>,
    #[arg(long)]
    line_length: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    etf_radius: Option<usize>,
    #[arg(long)]
    etf_iterations: Option<usize>,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    min_component_px: Option<usize>,
    #[arg(long)]
    max_spur_px: Option<usize>,
    #[arg(long)]
    max_extension_px: Option<usize>,
}

#[derive(Args)]
struct ProblemArgs {
    /// Pen rest position as x,y.
    #[arg(long, allow_hyphen_values = true)]
    home: Option<Point>,
    #[arg(long)]
    cost_lift: Option<f64>,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct GaArgs {
    #[arg(long)]
    population_size: Option<usize>,
    #[arg(long)]
    elite_count: Option<usize>,
    #[arg(long)]
    p_crossover: Option<f64>,
    #[arg(long)]
    p_mutation: Option<f64>,
    #[arg(long)]
    key_inherit_p: Option<f64>,
    #[arg(long)]
    reverse_p: Option<f64>,
    #[arg(long)]
    shuffle_p: Option<f64>,
    #[arg(long)]
    flip_p: Option<f64>,
    #[arg(long)]
    tournament_k: Option<usize>,
    #[arg(long)]
    thres_base: Option<f64>,
    #[arg(long)]
    thres_step: Option<f64>,
    #[arg(long)]
    thres_cap: Option<f64>,
    #[arg(long)]
    max_generations: Option<usize>,
    #[arg(long)]
    stall_limit: Option<usize>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl FdogArgs {
    fn apply(self, cfg: &mut PipelineConfig) {
        let f = &mut cfg.fdog;
        set(&mut f.sigma_c, self.sigma_c);
        set(&mut f.rho, self.rho);
        set(&mut f.sigma_m, self.sigma_m);
        set(&mut f.line_length, self.line_length);
        set(&mut f.tau, self.tau);
        set(&mut f.etf_radius, self.etf_radius);
        set(&mut f.etf_iterations, self.etf_iterations);
    }
}

impl TraceArgs {
    fn apply(self, cfg: &mut PipelineConfig) {
        let t = &mut cfg.trace;
        set(&mut t.min_component_px, self.min_component_px);
        set(&mut t.max_spur_px, self.max_spur_px);
        set(&mut t.max_extension_px, self.max_extension_px);
    }
}

impl ProblemArgs {
    fn apply(self, cfg: &mut PipelineConfig) {
        set(&mut cfg.home, self.home);
        set(&mut cfg.cost_lift, self.cost_lift);
    }
}

impl SolverArgs {
    fn apply(self, cfg: &mut PipelineConfig) {
        set(&mut cfg.method, self.method);
        set(&mut cfg.seed, self.seed);
    }
}

impl GaArgs {
    fn apply(self, cfg: &mut PipelineConfig) {
        let g = &mut cfg.ga;
        set(&mut g.population_size, self.population_size);
        set(&mut g.elite_count, self.elite_count);
        set(&mut g.p_crossover, self.p_crossover);
        set(&mut g.p_mutation, self.p_mutation);
        set(&mut g.key_inherit_p, self.key_inherit_p);
        set(&mut g.reverse_p, self.reverse_p);
        set(&mut g.shuffle_p, self.shuffle_p);
        set(&mut g.flip_p, self.flip_p);
        set(&mut g.tournament_k, self.tournament_k);
        set(&mut g.thres_base, self.thres_base);
        set(&mut g.thres_step, self.thres_step);
        set(&mut g.thres_cap, self.thres_cap);
        set(&mut g.max_generations, self.max_generations);
        set(&mut g.stall_limit, self.stall_limit);
    }
}

/// Failure classes map to exit codes 1 (input) and 2 (config).
enum Failure {
    Input(anyhow::Error),
    Config(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.into())
    }
}

fn config_error(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

/// Config file (or defaults), then the subcommand's flags, then validation.
fn resolve(file: Option<&Path>, overrides: impl FnOnce(&mut PipelineConfig)) -> Result<PipelineConfig, Failure> {
    let mut cfg = match file {
        Some(path) => PipelineConfig::load(path).map_err(config_error)?,
        None => PipelineConfig::default(),
    };
    overrides(&mut cfg);
    cfg.validate().map_err(config_error)?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = cli.config.as_deref();
    match cli.command {
        Command::Contour { input, output, fdog } => {
            let cfg = resolve(file, |c| fdog.apply(c))?;
            let img = load_gray(&input)?;
            let mask = extract_contours(&img, &cfg.fdog).map_err(config_error)?;
            save_gray(&mask.to_gray(), &output)?;
            println!("{}: {} ink pixels", output.display(), mask.count_ink());
        }
        Command::Trace {
            input,
            output,
            threshold,
            trace,
        } => {
            let cfg = resolve(file, |c| {
                set(&mut c.threshold, threshold);
                trace.apply(c);
            })?;
            let img = load_gray(&input)?;
            let mask = binarize(&img, cfg.threshold);
            let segments = trace_segments(&mask, &cfg.trace);
            let count = segments.len();
            SegmentFile::new(img.width(), img.height(), segments).save(&output)?;
            println!("{}: {count} segments", output.display());
        }
        Command::Plan {
            segments,
            output,
            problem,
            solver,
            ga,
        } => {
            let cfg = resolve(file, |c| {
                problem.apply(c);
                solver.apply(c);
                ga.apply(c);
            })?;
            let file = SegmentFile::load(&segments)?;
            let plan = if file.segments.is_empty() {
                PenPlan::empty(file.width, file.height, cfg.home, cfg.cost_lift)
            } else {
                let inst = build_instance(file.segments, cfg.home, cfg.cost_lift)?;
                let started = Instant::now();
                let (path, stats) = solve(&inst, cfg.method, &cfg.ga_with_seed())?;
                let plan = PenPlan::new(&inst, &path, file.width, file.height)?;
                if let Some(r) = &plan.report {
                    println!(
                        "{}: {} segments, fitness {:.3} ({} lifts), {} generations, {:.2}s",
                        cfg.method,
                        inst.len(),
                        r.v_fitness,
                        r.n_lift,
                        stats.best_fitness_per_generation.len(),
                        started.elapsed().as_secs_f64()
                    );
                }
                plan
            };
            plan.save(&output)?;
        }
        Command::Render { plan, output } => {
            let plan = PenPlan::load(&plan)?;
            plan.save_svg(&output)?;
            println!("{}: {} moves", output.display(), plan.moves.len());
        }
        Command::Bench {
            instances,
            trials,
            seed,
            methods,
            csv,
            threads,
            problem,
            ga,
        } => {
            let cfg = resolve(file, |c| {
                problem.apply(c);
                ga.apply(c);
            })?;
            if trials == 0 {
                return Err(config_error(anyhow!("--trials must be at least 1")));
            }
            for m in &methods {
                m.parse::<Method>().map_err(config_error)?;
            }
            let suite = if instances.is_empty() {
                bundled_suite(cfg.home, cfg.cost_lift)
            } else {
                let mut out = Vec::new();
                for path in &instances {
                    let f = SegmentFile::load(path)?;
                    let name = path
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| path.display().to_string());
                    let inst = build_instance(f.segments, cfg.home, cfg.cost_lift)
                        .map_err(|e| anyhow!("instance {}: {e}", path.display()))?;
                    out.push((name, inst));
                }
                out
            };
            let work = || bench(&suite, &methods, trials, seed, &cfg.ga);
            let rows = match threads {
                Some(n) => with_threads(n, work)??,
                None => work()?,
            };
            print!("{}", bench_table(&rows));
            if let Some(path) = csv {
                std::fs::write(&path, bench_csv(&rows)).map_err(|e| anyhow!("cannot write {}: {e}", path.display()))?;
            }
        }
        Command::Pipeline {
            input,
            output,
            threshold,
            fdog,
            trace,
            problem,
            solver,
            ga,
        } => {
            let cfg = resolve(file, |c| {
                set(&mut c.threshold, threshold);
                fdog.apply(c);
                trace.apply(c);
                problem.apply(c);
                solver.apply(c);
                ga.apply(c);
            })?;
            let report = run_pipeline(&cfg, &input, &output).map_err(|e| match e.stage {
                Stage::Config => config_error(e),
                _ => Failure::Input(e.into()),
            })?;
            match &report.fitness {
                Some(r) => println!(
                    "{} segments, fitness {:.3} ({} lifts), outputs in {}",
                    report.segment_count,
                    r.v_fitness,
                    r.n_lift,
                    output.display()
                ),
                None => println!("no segments found; outputs in {}", output.display()),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
