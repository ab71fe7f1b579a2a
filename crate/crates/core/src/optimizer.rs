//! Iterative phase-only refinement under a unit-modulus constraint.
//!
//! Each iteration solves
//!
//! ```text
//! min_x || Y_theta - W x ||^2   s.t. |x(n)| = 1
//! ```
//!
//! in closed form. The Lagrangian stationarity condition with `W^H W = K I`
//! gives `x(n) = g(n) / (K + lambda_n)` with `g = W^H Y_theta`. The
//! constraint forces `K + lambda_n = |g(n)|` on the minimizing branch, so
//! `x(n) = g(n) / |g(n)|`. The spectral phase is then replaced with
//! `theta = arg(W x)` and the loop repeats. Neither step can increase the
//! residual, so the recorded minimum error is nonincreasing.
//!
//! Out-of-band bins are handled per [`OutOfBand`]:
//!
//! * `Free` (default): the residual is only charged inside the design band.
//!   Out-of-band bins of `Y_theta` track the current spectrum. This is a
//!   block-coordinate step on the band-limited error and stays monotone.
//! * `Zero`: the target is zero outside the band, so out-of-band energy is
//!   penalized as error.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{autocorrelation, peak_sidelobe_level};
use crate::spectral::{BandMagnitude, Spectral};
use crate::stationary_phase::{synthesize_spm, NlfmSignal};
use crate::windows::{evaluate_window, WindowSpec};

/// Exact-fit threshold on `E_min / (K N)`: below this the iteration has
/// reached a fixed point.
const EXACT_FIT: f64 = 1e-24;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutOfBand {
    #[default]
    Free,
    Zero,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialPhase {
    /// Spectral phase of the stationary-phase design.
    #[default]
    StationaryPhase,
    /// Caller-supplied `K` phases (radians).
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Stop once `|E(r) - E(r-1)| / E(r)` falls below this.
    pub rel_tolerance: f64,
    pub initial_phase: InitialPhase,
    pub out_of_band: OutOfBand,
    /// Record the ACF peak sidelobe level of every iterate. Costs one
    /// extra correlation per iteration.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub track_psl: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            rel_tolerance: 1e-8,
            initial_phase: InitialPhase::StationaryPhase,
            out_of_band: OutOfBand::Free,
            track_psl: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::Optimizer("max_iterations must be >= 1".into()));
        }
        if !(self.rel_tolerance >= 0.0 && self.rel_tolerance.is_finite()) {
            return Err(Error::Optimizer(format!(
                "rel_tolerance must be finite and >= 0, got {}",
                self.rel_tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct OptimizerTrace {
    /// `E_min` after each iteration, starting at iteration 1.
    pub e_min: Vec<f64>,
    /// Per-iteration PSL in dB, only filled when `track_psl` is set.
    pub psl_db: Vec<f64>,
    pub iterations_run: usize,
    pub stop_reason: StopReason,
    /// Total count of zero-magnitude entries replaced during the run.
    pub degenerate_entries: usize,
    pub final_signal: NlfmSignal,
    /// `theta` after the last iteration, `K` entries in `(-pi, pi]`.
    pub final_spectral_phase: Vec<f64>,
}

impl OptimizerTrace {
    /// `E_min(r) / E_min(1)`; all zeros when the first error is zero.
    pub fn e_min_normalized(&self) -> Vec<f64> {
        let first = self.e_min.first().copied().unwrap_or(0.0);
        self.e_min
            .iter()
            .map(|e| if first > 0.0 { e / first } else { 0.0 })
            .collect()
    }

    /// `E(r+1) <= E(r) + slack * E(1)` for every step and `E >= 0` throughout.
    pub fn is_nonincreasing(&self, slack: f64) -> bool {
        let first = self.e_min.first().copied().unwrap_or(0.0);
        self.e_min.iter().all(|&e| e >= 0.0)
            && self.e_min.windows(2).all(|w| w[1] <= w[0] + slack * first)
    }
}

/// Result of the closed-form unit-modulus step.
#[derive(Debug, Clone)]
pub struct UnitModulus {
    pub samples: Vec<Complex64>,
    /// Entries where `|g(n)| = 0` and `x(n) = 1` was substituted.
    pub degenerate: usize,
}

fn target_spectrum(magnitude: &[f64], theta: &[f64]) -> Vec<Complex64> {
    magnitude
        .iter()
        .zip(theta)
        .map(|(&m, &t)| Complex64::from_polar(m, t))
        .collect()
}

fn check_k(spectral: &Spectral, len: usize) -> Result<()> {
    let k = spectral.grid().k();
    if len == k {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: k,
            actual: len,
        })
    }
}

/// `x = Lambda_1 W^H Y_theta` with `Y_theta(k) = |Y(k)| exp(j theta(k))`.
pub fn unit_modulus_step(
    spectral: &Spectral,
    magnitude: &[f64],
    theta: &[f64],
) -> Result<UnitModulus> {
    check_k(spectral, magnitude.len())?;
    check_k(spectral, theta.len())?;
    let g = spectral.adjoint(&target_spectrum(magnitude, theta))?;
    let mut degenerate = 0;
    let samples = g
        .into_iter()
        .map(|v| {
            let r = v.norm();
            if r > 0.0 {
                v / r
            } else {
                degenerate += 1;
                Complex64::new(1.0, 0.0)
            }
        })
        .collect();
    Ok(UnitModulus {
        samples,
        degenerate,
    })
}

/// Principal argument in `(-pi, pi]`; zero for an empty bin.
fn principal_arg(v: Complex64) -> f64 {
    if v.re == 0.0 && v.im == 0.0 {
        return 0.0;
    }
    let a = v.arg();
    if a <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        a
    }
}

fn spectral_phase(spectrum: &[Complex64]) -> Vec<f64> {
    spectrum.iter().map(|&v| principal_arg(v)).collect()
}

/// `theta = arg(W x)`.
pub fn phase_update(spectral: &Spectral, x: &[Complex64]) -> Result<Vec<f64>> {
    Ok(spectral_phase(&spectral.forward(x)?))
}

fn residual(magnitude: &[f64], theta: &[f64], spectrum: &[Complex64]) -> f64 {
    magnitude
        .iter()
        .zip(theta)
        .zip(spectrum)
        .map(|((&m, &t), &x)| (Complex64::from_polar(m, t) - x).norm_sqr())
        .sum()
}

/// `sum_k |Y_theta(k) - X(k)|^2` with `X = W x`.
pub fn minimum_error(
    spectral: &Spectral,
    magnitude: &[f64],
    theta: &[f64],
    x: &[Complex64],
) -> Result<f64> {
    check_k(spectral, magnitude.len())?;
    check_k(spectral, theta.len())?;
    Ok(residual(magnitude, theta, &spectral.forward(x)?))
}

/// Run from a spectral phase alone. Out-of-band magnitudes start at zero.
pub fn run(
    spectral: &Spectral,
    target: &BandMagnitude,
    theta0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptimizerTrace> {
    check_k(spectral, theta0.len())?;
    let oob = vec![0.0; spectral.grid().k()];
    iterate(spectral, target, theta0.to_vec(), oob, cfg)
}

/// Run from an initial signal: `theta0 = arg(W x0)` and, for
/// [`OutOfBand::Free`], out-of-band magnitudes `|W x0|`.
pub fn run_from_signal(
    spectral: &Spectral,
    target: &BandMagnitude,
    x0: &[Complex64],
    cfg: &OptimizerConfig,
) -> Result<OptimizerTrace> {
    let spectrum = spectral.forward(x0)?;
    let theta0 = spectral_phase(&spectrum);
    let oob = spectrum.iter().map(|v| v.norm()).collect();
    iterate(spectral, target, theta0, oob, cfg)
}

fn iterate(
    spectral: &Spectral,
    target: &BandMagnitude,
    mut theta: Vec<f64>,
    mut current_mag: Vec<f64>,
    cfg: &OptimizerConfig,
) -> Result<OptimizerTrace> {
    cfg.validate()?;
    check_k(spectral, target.len())?;
    let grid = spectral.grid();
    let energy = (grid.k() * grid.n()) as f64;
    // Every unit-modulus x has sum |X(k)|^2 = K N; give the target the same
    // energy so the in-band magnitudes are commensurate with the spectrum.
    let target = target.scaled_to_energy(energy)?;
    let mask = grid.in_band_mask();

    let mut magnitude = vec![0.0; grid.k()];
    let mut e_min = Vec::new();
    let mut psl_db = Vec::new();
    let mut degenerate_entries = 0;
    let mut stop_reason = StopReason::MaxIterations;
    let mut x = Vec::new();

    for _ in 0..cfg.max_iterations {
        for (k, m) in magnitude.iter_mut().enumerate() {
            *m = if mask[k] {
                target.values()[k]
            } else {
                match cfg.out_of_band {
                    OutOfBand::Free => current_mag[k],
                    OutOfBand::Zero => 0.0,
                }
            };
        }

        let step = unit_modulus_step(spectral, &magnitude, &theta)?;
        degenerate_entries += step.degenerate;
        x = step.samples;
        let spectrum = spectral.forward(&x)?;
        let e = residual(&magnitude, &theta, &spectrum);

        theta = spectral_phase(&spectrum);
        for (m, v) in current_mag.iter_mut().zip(&spectrum) {
            *m = v.norm();
        }
        if cfg.track_psl {
            psl_db.push(peak_sidelobe_level(&autocorrelation(&x)?).psl_db);
        }

        let prev = e_min.last().copied();
        e_min.push(e);
        if e <= EXACT_FIT * energy {
            stop_reason = StopReason::Converged;
            break;
        }
        if let Some(p) = prev {
            if (p - e).abs() < cfg.rel_tolerance * e {
                stop_reason = StopReason::Converged;
                break;
            }
        }
    }

    Ok(OptimizerTrace {
        iterations_run: e_min.len(),
        e_min,
        psl_db,
        stop_reason,
        degenerate_entries,
        final_signal: NlfmSignal::from_samples(&x, grid),
        final_spectral_phase: theta,
    })
}

/// Full refined design for one window: builds the target from the window,
/// resolves the starting phase and runs the iteration.
pub fn design(
    spectral: &Spectral,
    spec: WindowSpec,
    cfg: &OptimizerConfig,
) -> Result<OptimizerTrace> {
    let window = evaluate_window(spec, spectral.grid().m())?;
    let target = spectral.band_magnitude(&window)?;
    match &cfg.initial_phase {
        InitialPhase::StationaryPhase => {
            let spm = synthesize_spm(spec, spectral.grid())?;
            run_from_signal(spectral, &target, &spm.samples, cfg)
        }
        InitialPhase::Custom(theta0) => run(spectral, &target, theta0, cfg),
    }
}
