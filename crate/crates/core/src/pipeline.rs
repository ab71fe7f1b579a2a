//! Batch driver: design every requested (window, method) pair, measure it
//! and write plot-ready result files.
//!
//! Output layout under `output_dir`:
//!
//! ```text
//! report.json
//! <window>/<method>/signal.csv       n,t_s,phase_rad,inst_freq_hz,re,im
//! <window>/<method>/acf.csv          lag_s,magnitude_db
//! <window>/<method>/spectrum.csv     f_hz,target_mag,achieved_mag
//! <window>/<method>/convergence.csv  iteration,e_min,e_min_normalized   (pm only)
//! <window>/<method>/summary.json
//! ```
//!
//! Numbers are written with 12 significant digits so repeated runs are
//! byte-identical.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::metrics::{
    autocorrelation, improvement_report, peak_sidelobe_level, Acf, PslStatus, SidelobeReport,
};
use crate::optimizer::{self, OptimizerConfig, OptimizerTrace, StopReason};
use crate::spectral::{DesignGrid, Spectral};
use crate::stationary_phase::{synthesize_spm, NlfmSignal};
use crate::windows::{evaluate_window, WindowSpec};

pub const TOOL_NAME: &str = "nlfm";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const DEFAULT_BANDWIDTH_HZ: f64 = 100e6;
pub const DEFAULT_PULSE_WIDTH_S: f64 = 2.5e-6;
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 1e9;
pub const DEFAULT_OUTPUT_DIR: &str = "nlfm-results";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Stationary-phase synthesis.
    Spm,
    /// Iterative constrained refinement.
    Pm,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Spm, Method::Pm];

    pub fn name(self) -> &'static str {
        match self {
            Method::Spm => "spm",
            Method::Pm => "pm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spm" => Ok(Method::Spm),
            "pm" => Ok(Method::Pm),
            other => Err(format!("unknown method '{other}' (valid: spm, pm)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub bandwidth_hz: f64,
    pub pulse_width_s: f64,
    pub sample_rate_hz: f64,
    pub windows: Vec<WindowSpec>,
    pub methods: Vec<Method>,
    pub optimizer: OptimizerConfig,
    pub output_dir: PathBuf,
    pub transform_length_override: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            bandwidth_hz: DEFAULT_BANDWIDTH_HZ,
            pulse_width_s: DEFAULT_PULSE_WIDTH_S,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            windows: WindowSpec::defaults(),
            methods: Method::ALL.to_vec(),
            optimizer: OptimizerConfig::default(),
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
            transform_length_override: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        for (name, v) in [
            ("bandwidth_hz", self.bandwidth_hz),
            ("pulse_width_s", self.pulse_width_s),
            ("sample_rate_hz", self.sample_rate_hz),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        if self.bandwidth_hz > self.sample_rate_hz {
            return bad(format!(
                "bandwidth_hz ({}) must not exceed sample_rate_hz ({})",
                self.bandwidth_hz, self.sample_rate_hz
            ));
        }
        if self.pulse_width_s * self.sample_rate_hz < 8.0 {
            return bad("pulse_width_s * sample_rate_hz must be >= 8".into());
        }
        if self.windows.is_empty() {
            return bad("no windows selected".into());
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        for w in &self.windows {
            w.validate()?;
        }
        self.optimizer.validate()?;
        self.grid()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<DesignGrid> {
        DesignGrid::new(
            self.bandwidth_hz,
            self.pulse_width_s,
            self.sample_rate_hz,
            self.transform_length_override,
        )
    }
}

/// Everything measured for one (window, method) pair.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub spec: WindowSpec,
    pub method: Method,
    pub signal: NlfmSignal,
    pub acf: Acf,
    pub sidelobes: SidelobeReport,
    pub trace: Option<OptimizerTrace>,
    /// `sqrt(window)` on the in-band bins, bins in `grid.bins_by_frequency()` order.
    pub target_mag: Vec<f64>,
    /// `|W x|` rescaled to the target's energy, same bin order.
    pub achieved_mag: Vec<f64>,
}

fn run_one(
    spectral: &Spectral,
    spec: WindowSpec,
    method: Method,
    opt: &OptimizerConfig,
) -> Result<RunOutcome> {
    let grid = spectral.grid();
    let (signal, trace) = match method {
        Method::Spm => (synthesize_spm(spec, grid)?, None),
        Method::Pm => {
            let trace = optimizer::design(spectral, spec, opt)?;
            (trace.final_signal.clone(), Some(trace))
        }
    };
    let acf = autocorrelation(&signal.samples)?;
    let sidelobes = peak_sidelobe_level(&acf);

    let target = spectral.band_magnitude(&evaluate_window(spec, grid.m())?)?;
    let spectrum = spectral.forward(&signal.samples)?;
    let scale = (target.energy() / (grid.k() * grid.n()) as f64).sqrt();
    let order = grid.bins_by_frequency();
    let target_mag = order.iter().map(|&k| target.values()[k]).collect();
    let achieved_mag = order.iter().map(|&k| spectrum[k].norm() * scale).collect();

    Ok(RunOutcome {
        spec,
        method,
        signal,
        acf,
        sidelobes,
        trace,
        target_mag,
        achieved_mag,
    })
}

/// Design and measure every (window, method) pair, in config order.
pub fn design_all(cfg: &RunConfig, exec: Execution) -> Result<Vec<RunOutcome>> {
    cfg.validate()?;
    let spectral = Spectral::new(cfg.grid()?);
    let jobs: Vec<(WindowSpec, Method)> = cfg
        .windows
        .iter()
        .flat_map(|&w| cfg.methods.iter().map(move |&m| (w, m)))
        .collect();
    exec.map(&jobs, |&(spec, method)| {
        run_one(&spectral, spec, method, &cfg.optimizer)
    })
    .into_iter()
    .collect()
}

/// Validate, design, and write all result files. Returns the report that
/// was written to `report.json`.
pub fn run_pipeline(cfg: &RunConfig, exec: Execution) -> Result<Report> {
    let outcomes = design_all(cfg, exec)?;
    write_outputs(cfg, &outcomes)
}

/// Number rendered with 12 significant digits; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(format_sig(self.0).parse().unwrap_or(self.0))
        } else {
            s.serialize_none()
        }
    }
}

/// `%.12g`-style formatting.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowEcho {
    pub kind: String,
    pub params: std::collections::BTreeMap<String, Num>,
}

impl From<WindowSpec> for WindowEcho {
    fn from(spec: WindowSpec) -> Self {
        Self {
            kind: spec.kind().name().to_string(),
            params: spec
                .params()
                .into_iter()
                .map(|(k, v)| (k.to_string(), Num(v)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub window: WindowEcho,
    pub method: Method,
    pub dir: String,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub bandwidth_hz: Num,
    pub pulse_width_s: Num,
    pub sample_rate_hz: Num,
    pub psl_db: Num,
    pub psl_status: PslStatus,
    pub mainlobe_null_width_s: Num,
    pub iterations_run: Option<usize>,
    pub stop_reason: Option<StopReason>,
    pub e_min_first: Option<Num>,
    pub e_min_last: Option<Num>,
    pub degenerate_entries: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ImprovementRow {
    pub window: String,
    pub spm_psl_db: Num,
    pub pm_psl_db: Num,
    pub delta_db: Num,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub config: ConfigEcho,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub runs: Vec<RunSummary>,
    pub improvements: Vec<ImprovementRow>,
    pub mean_improvement_db: Num,
    pub improvements_excluded: Vec<String>,
}

/// Config as echoed into the report. The output directory is left out so
/// identical runs into different directories produce identical files.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub bandwidth_hz: Num,
    pub pulse_width_s: Num,
    pub sample_rate_hz: Num,
    pub windows: Vec<WindowEcho>,
    pub methods: Vec<Method>,
    pub optimizer: OptimizerEcho,
    pub transform_length_override: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizerEcho {
    pub max_iterations: usize,
    pub rel_tolerance: Num,
    pub initial_phase: &'static str,
    pub out_of_band: optimizer::OutOfBand,
}

impl From<&RunConfig> for ConfigEcho {
    fn from(cfg: &RunConfig) -> Self {
        Self {
            bandwidth_hz: Num(cfg.bandwidth_hz),
            pulse_width_s: Num(cfg.pulse_width_s),
            sample_rate_hz: Num(cfg.sample_rate_hz),
            windows: cfg.windows.iter().map(|&w| w.into()).collect(),
            methods: cfg.methods.clone(),
            optimizer: OptimizerEcho {
                max_iterations: cfg.optimizer.max_iterations,
                rel_tolerance: Num(cfg.optimizer.rel_tolerance),
                initial_phase: match cfg.optimizer.initial_phase {
                    optimizer::InitialPhase::StationaryPhase => "stationary-phase",
                    optimizer::InitialPhase::Custom(_) => "custom",
                },
                out_of_band: cfg.optimizer.out_of_band,
            },
            transform_length_override: cfg.transform_length_override,
        }
    }
}

/// Directory names: the window kind, suffixed `-2`, `-3`, ... on repeats.
fn window_dirs(windows: &[WindowSpec]) -> Vec<String> {
    let mut seen = std::collections::HashMap::new();
    windows
        .iter()
        .map(|w| {
            let name = w.kind().name();
            let count = seen.entry(name).or_insert(0);
            *count += 1;
            if *count == 1 {
                name.to_string()
            } else {
                format!("{name}-{count}")
            }
        })
        .collect()
}

fn write_csv<I>(path: &Path, header: &str, rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(header.as_bytes())?;
    out.write_all(b"\n")?;
    for row in rows {
        out.write_all(row.join(",").as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Write every result file and `report.json`.
pub fn write_outputs(cfg: &RunConfig, outcomes: &[RunOutcome]) -> Result<Report> {
    let grid = cfg.grid()?;
    let fs_hz = grid.sample_rate_hz();
    let dirs = window_dirs(&cfg.windows);
    let root = &cfg.output_dir;
    fs::create_dir_all(root)?;

    let mut runs = Vec::with_capacity(outcomes.len());
    for (i, o) in outcomes.iter().enumerate() {
        let window_dir = &dirs[i / cfg.methods.len()];
        let rel = format!("{window_dir}/{}", o.method);
        let dir = root.join(window_dir).join(o.method.name());
        fs::create_dir_all(&dir)?;

        let s = &o.signal;
        write_csv(
            &dir.join("signal.csv"),
            "n,t_s,phase_rad,inst_freq_hz,re,im",
            (0..s.len()).map(|n| {
                vec![
                    n.to_string(),
                    format_sig(grid.time_of_sample(n)),
                    format_sig(s.phase[n]),
                    format_sig(s.inst_freq[n]),
                    format_sig(s.samples[n].re),
                    format_sig(s.samples[n].im),
                ]
            }),
        )?;
        write_csv(
            &dir.join("acf.csv"),
            "lag_s,magnitude_db",
            o.acf
                .lag_seconds(fs_hz)
                .iter()
                .zip(&o.acf.magnitude_db)
                .map(|(&l, &m)| vec![format_sig(l), format_sig(m)]),
        )?;
        let order = grid.bins_by_frequency();
        write_csv(
            &dir.join("spectrum.csv"),
            "f_hz,target_mag,achieved_mag",
            order.iter().enumerate().map(|(j, &k)| {
                vec![
                    format_sig(grid.frequency_of_bin(k)),
                    format_sig(o.target_mag[j]),
                    format_sig(o.achieved_mag[j]),
                ]
            }),
        )?;
        if let Some(trace) = &o.trace {
            write_csv(
                &dir.join("convergence.csv"),
                "iteration,e_min,e_min_normalized",
                trace
                    .e_min
                    .iter()
                    .zip(trace.e_min_normalized())
                    .enumerate()
                    .map(|(r, (&e, en))| vec![(r + 1).to_string(), format_sig(e), format_sig(en)]),
            )?;
        }

        let summary = RunSummary {
            tool: TOOL_NAME,
            tool_version: TOOL_VERSION,
            window: o.spec.into(),
            method: o.method,
            dir: rel,
            n: grid.n(),
            k: grid.k(),
            m: grid.m(),
            bandwidth_hz: Num(grid.bandwidth_hz()),
            pulse_width_s: Num(grid.pulse_width_s()),
            sample_rate_hz: Num(fs_hz),
            psl_db: Num(o.sidelobes.psl_db),
            psl_status: o.sidelobes.status,
            mainlobe_null_width_s: Num(o
                .sidelobes
                .mainlobe_width
                .map_or(f64::NAN, |w| w as f64 / fs_hz)),
            iterations_run: o.trace.as_ref().map(|t| t.iterations_run),
            stop_reason: o.trace.as_ref().map(|t| t.stop_reason),
            e_min_first: o
                .trace
                .as_ref()
                .and_then(|t| t.e_min.first())
                .map(|&e| Num(e)),
            e_min_last: o
                .trace
                .as_ref()
                .and_then(|t| t.e_min.last())
                .map(|&e| Num(e)),
            degenerate_entries: o.trace.as_ref().map(|t| t.degenerate_entries),
        };
        write_json(&dir.join("summary.json"), &summary)?;
        runs.push(summary);
    }

    let mut pairs = Vec::new();
    for (wi, name) in dirs.iter().enumerate() {
        let find = |m: Method| {
            outcomes[wi * cfg.methods.len()..(wi + 1) * cfg.methods.len()]
                .iter()
                .find(|o| o.method == m)
        };
        if let (Some(spm), Some(pm)) = (find(Method::Spm), find(Method::Pm)) {
            pairs.push((name.as_str(), &spm.sidelobes, &pm.sidelobes));
        }
    }
    let imp = improvement_report(pairs);
    let report = Report {
        tool: TOOL_NAME,
        tool_version: TOOL_VERSION,
        config: cfg.into(),
        n: grid.n(),
        k: grid.k(),
        m: grid.m(),
        runs,
        improvements: imp
            .rows
            .iter()
            .map(|r| ImprovementRow {
                window: r.label.clone(),
                spm_psl_db: Num(r.spm_psl_db.unwrap_or(f64::NAN)),
                pm_psl_db: Num(r.pm_psl_db.unwrap_or(f64::NAN)),
                delta_db: Num(r.delta_db.unwrap_or(f64::NAN)),
            })
            .collect(),
        mean_improvement_db: Num(imp.mean_delta_db.unwrap_or(f64::NAN)),
        improvements_excluded: imp.excluded,
    };
    write_json(&root.join("report.json"), &report)?;
    Ok(report)
}
