//! `texscan`: calibrate, detect, scan, stream and bench front ends.
//!
//! Exit codes: 0 no defects, 2 defects found, 1 any error (including usage).

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use texscan::synth::{stripe_texture, StripeSpec};
use texscan::{
    annotate, calibrate, compute_counts, extract_window, load_pgm, quantize, save_pgm, scan_frame, tile_grid,
    total_computations, trace_csv, CalibrationProfile64, DetectionReport64, Detector64, GrayImage,
};

use crate::config::{ParamArgs, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "texscan",
    version,
    about = "Co-occurrence texture defect detection for grayscale fabric frames"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Learn reference energy statistics from defect-free frames
    Calibrate {
        #[command(flatten)]
        params: ParamArgs,
        /// Profile path (default: <out-dir>/profile.json)
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Defect-free PGM frames
        #[arg(required = true)]
        frames: Vec<PathBuf>,
    },
    /// Score one frame against a profile; writes a JSON report and an annotated PGM
    Detect {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        run: DetectArgs,
        frame: PathBuf,
    },
    /// Export the per-window feature trace of one frame as CSV
    Scan {
        #[command(flatten)]
        params: ParamArgs,
        /// CSV path (default: stdout)
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Also dump every window's co-occurrence counts as CSV into this directory
        #[arg(long)]
        dump_glcm: Option<PathBuf>,
        frame: PathBuf,
    },
    /// Process every PGM in a directory, one frame at a time, with latency accounting
    Stream {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        run: DetectArgs,
        frame_dir: PathBuf,
    },
    /// Print the operation-count table with measured time per frame
    Bench {
        #[arg(long, default_value_t = 461)]
        rows: usize,
        #[arg(long, default_value_t = 512)]
        cols: usize,
        #[arg(long, default_value_t = 256)]
        levels: u16,
        #[arg(long, value_delimiter = ',', default_values_t = vec![30, 50, 100])]
        windows: Vec<usize>,
        /// Timed repetitions per window size
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Debug, Clone, Args)]
struct DetectArgs {
    /// Calibration profile JSON
    #[arg(long)]
    profile: PathBuf,
    /// Record wall time in reports (makes them non-reproducible)
    #[arg(long)]
    timestamps: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Clean,
    Defects,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Defects) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn init_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Calibrate {
            params,
            output,
            frames,
        } => {
            init_threads(params.threads)?;
            let cfg = params.resolve()?;
            run_calibrate(&cfg, &frames, output)
        }
        Command::Detect { params, run, frame } => {
            init_threads(params.threads)?;
            let cfg = params.resolve()?;
            run_detect(&cfg, &run, &frame)
        }
        Command::Scan {
            params,
            output,
            dump_glcm,
            frame,
        } => {
            init_threads(params.threads)?;
            let cfg = params.resolve()?;
            run_scan(&cfg, &frame, output.as_deref(), dump_glcm.as_deref())
        }
        Command::Stream {
            params,
            run,
            frame_dir,
        } => {
            init_threads(params.threads)?;
            let cfg = params.resolve()?;
            run_stream(&cfg, &run, &frame_dir)
        }
        Command::Bench {
            rows,
            cols,
            levels,
            windows,
            reps,
            threads,
        } => {
            init_threads(threads)?;
            run_bench(rows, cols, levels, &windows, reps.max(1))
        }
    }
}

fn read_frame(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    load_pgm(&bytes).with_context(|| format!("decoding {}", path.display()))
}

fn frame_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn run_calibrate(cfg: &RunConfig, frames: &[PathBuf], output: Option<PathBuf>) -> Result<Outcome> {
    let settings = cfg.settings()?;
    let mut images = Vec::with_capacity(frames.len());
    let mut failed = 0usize;
    for path in frames {
        match read_frame(path) {
            Ok(img) => images.push(img),
            Err(e) => {
                eprintln!("error: {e:#}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        bail!(
            "{failed} of {} calibration frames could not be read",
            frames.len()
        );
    }
    let profile = calibrate::<f64>(&images, &settings)?;
    let path = output.unwrap_or_else(|| cfg.out_dir.join("profile.json"));
    write_file(&path, profile.to_json()?.as_bytes())?;
    println!(
        "calibrated {} windows from {} frames: mean_energy={} std_energy={} -> {}",
        profile.n_windows,
        images.len(),
        profile.mean_energy,
        profile.std_energy,
        path.display()
    );
    Ok(Outcome::Clean)
}

fn load_detector(cfg: &RunConfig, profile_path: &Path) -> Result<Detector64> {
    let text = fs::read_to_string(profile_path)
        .with_context(|| format!("reading profile {}", profile_path.display()))?;
    let profile = CalibrationProfile64::from_json(&text)
        .with_context(|| format!("loading profile {}", profile_path.display()))?;
    Ok(Detector64::new(profile, &cfg.settings()?, cfg.threshold()?)?)
}

/// Loads, scores, annotates and writes one frame.
fn process_frame(
    cfg: &RunConfig,
    det: &Detector64,
    frame: &Path,
    timestamps: bool,
) -> Result<DetectionReport64> {
    let start = Instant::now();
    let img = read_frame(frame)?;
    let id = frame_id(frame);
    let mut report = det.detect(&id, &img)?;
    report.area_cm2 = cfg.area_cm2;
    let annotated = annotate(&img, &report)?;
    if timestamps {
        report.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    write_file(
        &cfg.out_dir.join(format!("{id}.report.json")),
        report.to_json()?.as_bytes(),
    )?;
    write_file(
        &cfg.out_dir.join(format!("{id}.annotated.pgm")),
        &save_pgm(&annotated),
    )?;
    Ok(report)
}

fn run_detect(cfg: &RunConfig, args: &DetectArgs, frame: &Path) -> Result<Outcome> {
    let det = load_detector(cfg, &args.profile)?;
    let report = process_frame(cfg, &det, frame, args.timestamps)?;
    println!(
        "{}: {} of {} windows flagged",
        report.frame_id,
        report.n_flagged,
        report.windows.len()
    );
    Ok(if report.n_flagged > 0 {
        Outcome::Defects
    } else {
        Outcome::Clean
    })
}

fn run_scan(
    cfg: &RunConfig,
    frame: &Path,
    output: Option<&Path>,
    dump_glcm: Option<&Path>,
) -> Result<Outcome> {
    let settings = cfg.settings()?;
    let img = read_frame(frame)?;
    let windows = scan_frame::<f64>(&img, &settings)?;
    let csv = trace_csv(&windows);
    match output {
        Some(path) => write_file(path, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    if let Some(dir) = dump_glcm {
        let q = quantize(&img, settings.glcm.g_levels)?;
        for w in &windows {
            let counts = compute_counts(&extract_window(&q, w.rect)?, &settings.glcm)?;
            write_file(
                &dir.join(format!("glcm_{:04}.csv", w.index)),
                counts.to_csv().as_bytes(),
            )?;
        }
    }
    Ok(Outcome::Clean)
}

fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut frames: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading frame directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
        .collect();
    frames.sort();
    Ok(frames)
}

fn run_stream(cfg: &RunConfig, args: &DetectArgs, dir: &Path) -> Result<Outcome> {
    let det = load_detector(cfg, &args.profile)?;
    let frames = list_frames(dir)?;
    if frames.is_empty() {
        eprintln!("warning: no .pgm frames in {}", dir.display());
        println!("frames=0 failed=0 flagged_frames=0 flagged_windows=0 mean_ms=0 max_ms=0 over_budget=0");
        return Ok(Outcome::Clean);
    }

    let mut latencies = Vec::with_capacity(frames.len());
    let (mut failed, mut flagged_frames, mut flagged_windows, mut over_budget) =
        (0usize, 0usize, 0usize, 0usize);
    for path in &frames {
        let start = Instant::now();
        let result = process_frame(cfg, &det, path, args.timestamps);
        let ms = start.elapsed().as_secs_f64() * 1e3;
        match result {
            Ok(report) => {
                latencies.push(ms);
                let over = ms > cfg.budget_ms;
                over_budget += usize::from(over);
                flagged_windows += report.n_flagged;
                flagged_frames += usize::from(report.n_flagged > 0);
                println!(
                    "frame {} {:.3} ms {} flagged{}",
                    report.frame_id,
                    ms,
                    report.n_flagged,
                    if over { " OVER BUDGET" } else { "" }
                );
            }
            Err(e) => {
                failed += 1;
                eprintln!("error: frame {}: {e:#}", path.display());
            }
        }
    }

    let mean = if latencies.is_empty() {
        0.0
    } else {
        latencies.iter().sum::<f64>() / latencies.len() as f64
    };
    let max = latencies.iter().copied().fold(0.0, f64::max);
    println!(
        "frames={} failed={failed} flagged_frames={flagged_frames} flagged_windows={flagged_windows} \
         mean_ms={mean:.3} max_ms={max:.3} over_budget={over_budget} budget_ms={}",
        frames.len(),
        cfg.budget_ms
    );
    if failed > 0 {
        bail!("{failed} of {} frames failed", frames.len());
    }
    Ok(if flagged_frames > 0 {
        Outcome::Defects
    } else {
        Outcome::Clean
    })
}

fn run_bench(rows: usize, cols: usize, levels: u16, windows: &[usize], reps: usize) -> Result<Outcome> {
    let frame = stripe_texture(&StripeSpec::default(), cols, rows, 0);
    println!(
        "{:>11}  {:>6}  {:>14}  {:>12}  {:>17}",
        "window_size", "steps", "total_ops", "total_ops_e9", "wall_ms_per_frame"
    );
    for &w in windows {
        let cost = total_computations(rows, cols, w, levels)?;
        let settings = texscan::ScanSettings {
            glcm: texscan::GlcmParams {
                g_levels: levels,
                ..Default::default()
            },
            window: w,
            stride: w,
        };
        debug_assert_eq!(tile_grid(rows, cols, w, w)?.len() as u64, cost.steps);
        let start = Instant::now();
        for _ in 0..reps {
            scan_frame::<f64>(&frame, &settings)?;
        }
        let ms = start.elapsed().as_secs_f64() * 1e3 / reps as f64;
        println!(
            "{:>11}  {:>6}  {:>14}  {:>12}  {:>17.3}",
            w,
            cost.steps,
            cost.total_ops,
            cost.total_ops_e9(),
            ms
        );
    }
    Ok(Outcome::Clean)
}
