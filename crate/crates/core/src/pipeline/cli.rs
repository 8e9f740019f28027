//! The `segment` command line front-end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgGroup, Parser};

use crate::energy::FittingWeights;
use crate::error::{Result, SegError};
use crate::grid::{GridShape, ScalarField};
use crate::labels::PhaseLabeling;
use crate::metrics::full_report;
use crate::pipeline::io::{load_image, write_atomic};
use crate::pipeline::output::{emit_labeling, emit_phase_histograms};
use crate::pipeline::phantom::{generate_phantom, PhantomLayout, PhantomSpec};
use crate::pipeline::report::{report_csv_bytes, RunReport};
use crate::solver::{solve_four_phase, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BAD_ARGS: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "segment",
    about = "Four-phase convex segmentation of grayscale images",
    group(ArgGroup::new("source").required(true).args(["input", "phantom"]))
)]
pub struct Args {
    /// Grayscale P5 graymap or PNG; may be repeated.
    #[arg(long, value_name = "PATH")]
    pub input: Vec<PathBuf>,

    /// Generate a synthetic phantom instead of reading an image.
    #[arg(long, value_name = "LAYOUT", value_parser = clap::value_parser!(PhantomLayout))]
    pub phantom: Option<PhantomLayout>,

    /// Phantom side length in pixels.
    #[arg(long, default_value_t = 128)]
    pub size: usize,

    /// Phantom noise standard deviation on the [0, 1] intensity scale.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,

    /// Phantom bias-field amplitude.
    #[arg(long, default_value_t = 0.0)]
    pub rf: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Coupling weight theta for both phases [default: 0.001].
    #[arg(long)]
    pub theta: Option<f64>,

    /// TV weight for both phases [default: 0.1].
    #[arg(long)]
    pub mu: Option<f64>,

    /// Fidelity weight for all four phases [default: 1].
    #[arg(long)]
    pub lambda: Option<f64>,

    /// Dual step, at most 0.25 [default: 0.125].
    #[arg(long)]
    pub dt: Option<f64>,

    /// Dual iterations per phase update [default: 5].
    #[arg(long)]
    pub inner_iters: Option<usize>,

    /// Maximum outer iterations [default: 100].
    #[arg(long)]
    pub outer_iters: Option<usize>,

    /// Stop when no cell of u1 or u2 moves by this much [default: 1e-4].
    #[arg(long)]
    pub tol: Option<f64>,

    /// Binarization threshold in (0, 1) [default: 0.5].
    #[arg(long)]
    pub tau: Option<f64>,

    /// Refresh the phase means every N outer iterations [default: 1].
    #[arg(long)]
    pub mean_period: Option<usize>,

    /// Score the result against the phantom's ground truth.
    #[arg(long)]
    pub truth_metrics: bool,

    #[arg(long, default_value = "results")]
    pub out_dir: PathBuf,

    /// Report CSV path (default: OUT_DIR/report.csv).
    #[arg(long)]
    pub report_csv: Option<PathBuf>,
}

impl Args {
    pub fn solver_config(&self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::default();
        if let Some(t) = self.theta {
            cfg.theta1 = t;
            cfg.theta2 = t;
        }
        let mut w = FittingWeights::default();
        if let Some(l) = self.lambda {
            w = FittingWeights::equal(l, w.mu1);
        }
        if let Some(m) = self.mu {
            w.mu1 = m;
            w.mu2 = m;
        }
        cfg.weights = w;
        if let Some(v) = self.dt {
            cfg.dt = v;
        }
        if let Some(v) = self.inner_iters {
            cfg.inner_dual_iters = v;
        }
        if let Some(v) = self.outer_iters {
            cfg.outer_iters = v;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.tau {
            cfg.threshold_tau = v;
        }
        if let Some(v) = self.mean_period {
            cfg.mean_update_period = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

struct Job {
    name: String,
    stem: String,
    image: ScalarField,
    truth: Option<PhaseLabeling>,
}

/// Output file paths for one segmented image.
#[derive(Debug, Clone)]
pub struct JobOutputs {
    pub label_map: PathBuf,
    pub overlay: PathBuf,
    pub histograms: PathBuf,
    pub report: PathBuf,
}

impl JobOutputs {
    pub fn new(out_dir: &Path, stem: &str) -> Self {
        JobOutputs {
            label_map: out_dir.join(format!("{stem}_labels.pgm")),
            overlay: out_dir.join(format!("{stem}_overlay.png")),
            histograms: out_dir.join(format!("{stem}_histograms.csv")),
            report: out_dir.join(format!("{stem}_report.txt")),
        }
    }
}

fn collect_jobs(args: &Args) -> Result<Vec<Job>> {
    if let Some(layout) = args.phantom {
        let spec = PhantomSpec {
            shape: GridShape::new(args.size, args.size)
                .map_err(|e| SegError::InvalidConfig(e.to_string()))?,
            phase_values: [0.8, 0.6, 0.4, 0.2],
            layout,
            noise_sigma: args.noise,
            inhomogeneity_amplitude: args.rf,
            seed: args.seed,
        };
        let p = generate_phantom(&spec)?;
        let stem = format!("phantom_{layout}");
        return Ok(vec![Job {
            name: stem.clone(),
            stem,
            image: p.image,
            truth: args.truth_metrics.then_some(p.truth),
        }]);
    }
    let mut jobs: Vec<Job> = Vec::with_capacity(args.input.len());
    for path in &args.input {
        let image = load_image(path)?;
        let base = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "image".into());
        let mut stem = base.clone();
        let mut n = 1;
        while jobs.iter().any(|j| j.stem == stem) {
            n += 1;
            stem = format!("{base}_{n}");
        }
        jobs.push(Job {
            name: path.display().to_string(),
            stem,
            image,
            truth: None,
        });
    }
    Ok(jobs)
}

fn run_job(job: &Job, cfg: &SolverConfig, out_dir: &Path) -> Result<RunReport> {
    let start = Instant::now();
    let state = solve_four_phase(&job.image, None, cfg)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let labels = state.labeling(cfg.threshold_tau)?;
    let metrics = match &job.truth {
        Some(t) => Some(full_report(&labels, t)?),
        None => None,
    };
    let shape = job.image.shape();
    let report = RunReport {
        source: job.name.clone(),
        width: shape.width(),
        height: shape.height(),
        config: cfg.clone(),
        iterations: state.iteration,
        converged: state.converged,
        wall_time_s,
        final_energy: state.final_energy(),
        means: state.c,
        phase_counts: labels.counts(),
        metrics,
    };
    let out = JobOutputs::new(out_dir, &job.stem);
    emit_labeling(&labels, &out.label_map, &out.overlay)?;
    emit_phase_histograms(&job.image, &labels, &out.histograms)?;
    write_atomic(&out.report, report.to_text().as_bytes())?;
    Ok(report)
}

fn run_jobs(jobs: &[Job], cfg: &SolverConfig, out_dir: &Path) -> Result<Vec<RunReport>> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut reports = Vec::with_capacity(jobs.len());
    for chunk in jobs.chunks(workers) {
        let results: Vec<Result<RunReport>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|job| scope.spawn(move || run_job(job, cfg, out_dir)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("segmentation worker panicked"))
                .collect()
        });
        for r in results {
            reports.push(r?);
        }
    }
    Ok(reports)
}

/// Runs the pipeline for parsed arguments.
pub fn execute(args: &Args) -> Result<Vec<RunReport>> {
    if args.truth_metrics && args.phantom.is_none() {
        return Err(SegError::InvalidConfig(
            "--truth-metrics needs --phantom".into(),
        ));
    }
    let cfg = args.solver_config()?;
    // load everything before touching the output directory
    let jobs = collect_jobs(args)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| SegError::io(&args.out_dir, e))?;
    let reports = run_jobs(&jobs, &cfg, &args.out_dir)?;
    let csv_path = args
        .report_csv
        .clone()
        .unwrap_or_else(|| args.out_dir.join("report.csv"));
    write_atomic(&csv_path, &report_csv_bytes(&reports)?)?;
    Ok(reports)
}

/// Parses `argv`, runs the pipeline and returns the process exit code.
pub fn run_segment<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_BAD_ARGS } else { EXIT_OK };
        }
    };
    match execute(&args) {
        Ok(reports) => {
            for r in &reports {
                print!("{}", r.to_text());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("segment: error: {e}");
            e.exit_code()
        }
    }
}
