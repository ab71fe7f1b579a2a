//! Command-line front end for the NLFM design pipeline.
//!
//! Precedence for every setting: command-line flag, then the JSON config
//! file given with `--config`, then the built-in defaults. `NLFM_OUT_DIR`
//! stands in for `--out` when the flag is absent.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::Parser;
use nlfm::pipeline::{run_pipeline, Method, Report, RunConfig};
use nlfm::{Execution, WindowKind, WindowSpec};

pub const OUT_DIR_ENV: &str = "NLFM_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "nlfm",
    version,
    about = "Design NLFM radar pulses and measure their sidelobes"
)]
pub struct Args {
    /// Swept bandwidth in Hz.
    #[arg(long, value_name = "HZ")]
    pub bandwidth: Option<f64>,

    /// Pulse width in seconds.
    #[arg(long, value_name = "S")]
    pub pulse_width: Option<f64>,

    /// Sample rate in Hz.
    #[arg(long, value_name = "HZ")]
    pub sample_rate: Option<f64>,

    /// Comma-separated windows, each with its default parameters.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub windows: Option<Vec<WindowKind>>,

    /// Comma-separated subset of spm,pm.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub methods: Option<Vec<Method>>,

    /// Iteration cap for the refinement.
    #[arg(long, value_name = "N")]
    pub iterations: Option<usize>,

    /// Relative change in the error below which the refinement stops.
    #[arg(long, value_name = "REL")]
    pub tolerance: Option<f64>,

    /// Transform length K (defaults to the next power of two >= 2N).
    #[arg(long, value_name = "K")]
    pub transform_length: Option<usize>,

    /// Output directory (falls back to $NLFM_OUT_DIR).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// JSON file with any subset of the run configuration fields.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Run designs one after another instead of on the thread pool.
    #[arg(long)]
    pub sequential: bool,

    /// Suppress the results table.
    #[arg(long, short)]
    pub quiet: bool,
}

/// A bad invocation: exits with [`EXIT_USAGE`].
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Merge flags, config file and defaults, then validate.
pub fn build_config(args: &Args, env_out: Option<PathBuf>) -> Result<RunConfig, UsageError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };

    if let Some(v) = args.bandwidth {
        cfg.bandwidth_hz = v;
    }
    if let Some(v) = args.pulse_width {
        cfg.pulse_width_s = v;
    }
    if let Some(v) = args.sample_rate {
        cfg.sample_rate_hz = v;
    }
    if let Some(kinds) = &args.windows {
        cfg.windows = kinds.iter().map(|&k| WindowSpec::default_for(k)).collect();
    }
    if let Some(methods) = &args.methods {
        let mut seen = Vec::new();
        for &m in methods {
            if seen.contains(&m) {
                return Err(UsageError(format!("method '{m}' given more than once")));
            }
            seen.push(m);
        }
        cfg.methods = seen;
    }
    if let Some(v) = args.iterations {
        cfg.optimizer.max_iterations = v;
    }
    if let Some(v) = args.tolerance {
        cfg.optimizer.rel_tolerance = v;
    }
    if let Some(v) = args.transform_length {
        cfg.transform_length_override = Some(v);
    }
    if let Some(dir) = args.out.clone().or(env_out) {
        cfg.output_dir = dir;
    }

    cfg.validate().map_err(|e| UsageError(e.to_string()))?;
    Ok(cfg)
}

fn fmt_db(v: Option<f64>) -> String {
    v.map_or_else(|| "-inf".to_string(), |v| format!("{v:.2}"))
}

/// Human-readable summary of a finished run.
pub fn render_table(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:<6} {:>10} {:>8}",
        "window", "method", "psl_db", "iters"
    );
    for r in &report.runs {
        let iters = r
            .iterations_run
            .map_or_else(|| "-".to_string(), |n| n.to_string());
        let _ = writeln!(
            out,
            "{:<16} {:<6} {:>10} {:>8}",
            r.dir.split('/').next().unwrap_or(""),
            r.method.name(),
            fmt_db(r.psl_db.0.is_finite().then_some(r.psl_db.0)),
            iters
        );
    }
    if !report.improvements.is_empty() {
        let _ = writeln!(
            out,
            "mean improvement (pm - spm): {} dB",
            fmt_db(
                report
                    .mean_improvement_db
                    .0
                    .is_finite()
                    .then_some(report.mean_improvement_db.0)
            )
        );
    }
    out
}

/// Parse, run and report. Returns the process exit code.
pub fn run<I, T>(argv: I, env_out: Option<OsString>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match build_config(&args, env_out.map(PathBuf::from)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match run_pipeline(&cfg, exec) {
        Ok(report) => {
            if !args.quiet {
                print!("{}", render_table(&report));
                println!("results written to {}", cfg.output_dir.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}
