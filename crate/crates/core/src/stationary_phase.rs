//! Stationary-phase NLFM synthesis.
//!
//! The window is read as the power spectral density of the pulse. Its
//! cumulative integral, pinned to `T_g(-B/2) = -T/2` and `T_g(B/2) = T/2`, is
//! the group delay. Inverting the group delay gives the instantaneous
//! frequency as a function of time and integrating that gives the phase.
//! The proportionality and integration constants never appear explicitly:
//! pinning both endpoints fixes them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::erf;
use crate::spectral::DesignGrid;
use crate::windows::{evaluate_window, taylor_coefficients, SampledWindow, WindowKind, WindowSpec};

/// Points used to tabulate the group delay over `[-B/2, B/2]`. Odd, so
/// `f = 0` is on the grid.
pub const GROUP_DELAY_POINTS: usize = 4097;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupDelaySource {
    ClosedForm(WindowKind),
    Numerical,
}

/// Monotone tabulation of the group delay `T_g(f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupDelayTable {
    frequencies: Vec<f64>,
    delays: Vec<f64>,
    source: GroupDelaySource,
}

impl GroupDelayTable {
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn delays(&self) -> &[f64] {
        &self.delays
    }

    pub fn source(&self) -> GroupDelaySource {
        self.source
    }

    fn lo(&self) -> f64 {
        self.delays[0]
    }

    fn hi(&self) -> f64 {
        *self.delays.last().unwrap()
    }

    /// `f(t) = T_g^{-1}(t)`: binary search plus linear interpolation. A time
    /// that hits a flat run of the table resolves to the run's left edge.
    pub fn invert(&self, t: f64) -> Result<f64> {
        if !(t >= self.lo() && t <= self.hi()) {
            return Err(Error::TimeOutOfRange {
                t,
                lo: self.lo(),
                hi: self.hi(),
            });
        }
        let i = self.delays.partition_point(|&d| d < t);
        if self.delays[i] == t || i == 0 {
            return Ok(self.frequencies[i]);
        }
        let (d0, d1) = (self.delays[i - 1], self.delays[i]);
        let (f0, f1) = (self.frequencies[i - 1], self.frequencies[i]);
        Ok(f0 + (f1 - f0) * (t - d0) / (d1 - d0))
    }

    /// `T_g(f)` by linear interpolation; `f` is clamped to the band.
    pub fn delay_at(&self, f: f64) -> f64 {
        let fr = &self.frequencies;
        let f = f.clamp(fr[0], fr[fr.len() - 1]);
        let i = fr.partition_point(|&x| x < f).max(1);
        let (f0, f1) = (fr[i - 1], fr[i]);
        let (d0, d1) = (self.delays[i - 1], self.delays[i]);
        d0 + (d1 - d0) * (f - f0) / (f1 - f0)
    }
}

/// `points` frequencies over `[-B/2, B/2]`, symmetric with an exact zero.
fn band_frequencies(bandwidth: f64, points: usize) -> Vec<f64> {
    let c = ((points - 1) / 2) as i64;
    let span = (points - 1) as f64;
    (0..points as i64)
        .map(|i| bandwidth * (i - c) as f64 / span)
        .collect()
}

fn pin_endpoints(delays: &mut [f64], pulse_width: f64) {
    let last = delays.len() - 1;
    delays[0] = -0.5 * pulse_width;
    delays[last] = 0.5 * pulse_width;
}

/// Tabulate the closed-form group delay for the kinds that have one
/// (raised cosine, Taylor, Gaussian, Poisson).
pub fn group_delay_closed_form(spec: WindowSpec, grid: &DesignGrid) -> Result<GroupDelayTable> {
    spec.validate()?;
    let b = grid.bandwidth_hz();
    let t = grid.pulse_width_s();
    let law: Box<dyn Fn(f64) -> f64> = match spec {
        WindowSpec::RaisedCosine { k } => {
            let c = (1.0 - k) / (1.0 + k);
            Box::new(move |f| t * f / b + t / (2.0 * PI) * c * (2.0 * PI * f / b).sin())
        }
        WindowSpec::Taylor { eta_db, n_bar } => {
            let coeffs = taylor_coefficients(eta_db, n_bar);
            Box::new(move |f| {
                t * f / b
                    + t / (2.0 * PI)
                        * coeffs
                            .iter()
                            .enumerate()
                            .map(|(i, c)| {
                                let m = (i + 1) as f64;
                                c / m * (2.0 * PI * m * f / b).sin()
                            })
                            .sum::<f64>()
            })
        }
        WindowSpec::Gaussian { k } => {
            let rk = k.sqrt();
            let norm = 2.0 * erf(rk / 4.0);
            Box::new(move |f| t / norm * erf(f * rk / (2.0 * b)))
        }
        WindowSpec::Poisson { k } => {
            let norm = 2.0 * (1.0 - (-k / 2.0).exp());
            Box::new(move |f: f64| {
                let s = if f > 0.0 {
                    1.0
                } else if f < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                t * s / norm * (1.0 - (-k * f.abs() / b).exp())
            })
        }
        WindowSpec::Chebyshev { .. } | WindowSpec::Kaiser { .. } => {
            return Err(Error::NoClosedForm(spec.kind()))
        }
    };

    let frequencies = band_frequencies(b, GROUP_DELAY_POINTS);
    let mut delays: Vec<f64> = frequencies.iter().map(|&f| law(f)).collect();
    pin_endpoints(&mut delays, t);
    Ok(GroupDelayTable {
        frequencies,
        delays,
        source: GroupDelaySource::ClosedForm(spec.kind()),
    })
}

/// Group delay from the trapezoidal cumulative integral of the window,
/// which is laid out linearly over `[-B/2, B/2]`.
pub fn group_delay_numerical(window: &SampledWindow, grid: &DesignGrid) -> Result<GroupDelayTable> {
    let w = window.values();
    let mut cumulative = Vec::with_capacity(w.len());
    let mut acc = 0.0;
    cumulative.push(0.0);
    for pair in w.windows(2) {
        acc += 0.5 * (pair[0] + pair[1]);
        cumulative.push(acc);
    }
    if acc.is_nan() || acc <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let t = grid.pulse_width_s();
    let mut delays: Vec<f64> = cumulative.iter().map(|c| -0.5 * t + t * c / acc).collect();
    pin_endpoints(&mut delays, t);
    Ok(GroupDelayTable {
        frequencies: band_frequencies(grid.bandwidth_hz(), w.len()),
        delays,
        source: GroupDelaySource::Numerical,
    })
}

/// The group delay used for synthesis: closed form where one exists,
/// numerical otherwise.
pub fn group_delay(spec: WindowSpec, grid: &DesignGrid) -> Result<GroupDelayTable> {
    match group_delay_closed_form(spec, grid) {
        Err(Error::NoClosedForm(_)) => {
            let window = evaluate_window(spec, GROUP_DELAY_POINTS)?;
            group_delay_numerical(&window, grid)
        }
        other => other,
    }
}

/// Constant-modulus pulse with its phase and frequency laws.
#[derive(Debug, Clone, PartialEq)]
pub struct NlfmSignal {
    pub samples: Vec<Complex64>,
    /// Phase in radians, zero at the first sample.
    pub phase: Vec<f64>,
    /// Instantaneous frequency in Hz.
    pub inst_freq: Vec<f64>,
    pub pulse_width_s: f64,
    pub sample_rate_hz: f64,
    pub bandwidth_hz: f64,
    pub amplitude: f64,
}

impl NlfmSignal {
    /// Wrap arbitrary unit-modulus samples. The samples are rotated so the
    /// first one is real and positive; phase is the unwrapped argument and the
    /// instantaneous frequency its central difference.
    pub fn from_samples(samples: &[Complex64], grid: &DesignGrid) -> Self {
        let rot = samples
            .first()
            .map(|s| s.conj() / s.norm())
            .filter(|r| r.is_finite())
            .unwrap_or(Complex64::new(1.0, 0.0));
        let samples: Vec<Complex64> = samples.iter().map(|s| s * rot).collect();
        let phase = unwrap_phase(&samples);
        let fs = grid.sample_rate_hz();
        let n = phase.len();
        let inst_freq = (0..n)
            .map(|i| {
                let (a, b) = match (i, n) {
                    (_, 0 | 1) => return 0.0,
                    (0, _) => (0, 1),
                    (i, n) if i == n - 1 => (n - 2, n - 1),
                    (i, _) => (i - 1, i + 1),
                };
                (phase[b] - phase[a]) / ((b - a) as f64) * fs / (2.0 * PI)
            })
            .collect();
        Self {
            samples,
            phase,
            inst_freq,
            pulse_width_s: grid.pulse_width_s(),
            sample_rate_hz: fs,
            bandwidth_hz: grid.bandwidth_hz(),
            amplitude: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `max_n | |x(n)| - A |`.
    pub fn max_modulus_error(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.norm() - self.amplitude).abs())
            .fold(0.0, f64::max)
    }
}

fn unwrap_phase(samples: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(samples.len());
    let mut prev = 0.0;
    let mut offset = 0.0;
    for (i, s) in samples.iter().enumerate() {
        let a = s.arg();
        if i > 0 {
            let d = a - prev;
            if d > PI {
                offset -= 2.0 * PI;
            } else if d < -PI {
                offset += 2.0 * PI;
            }
        }
        prev = a;
        out.push(a + offset);
    }
    if let Some(&first) = out.first() {
        out.iter_mut().for_each(|p| *p -= first);
    }
    out
}

/// Sample the frequency law at `t_n = -T/2 + n/fs` and integrate it with the
/// trapezoid rule, `phi(-T/2) = 0`.
pub fn synthesize_from_table(table: &GroupDelayTable, grid: &DesignGrid) -> Result<NlfmSignal> {
    let n = grid.n();
    let fs = grid.sample_rate_hz();
    let inst_freq = (0..n)
        .map(|i| table.invert(grid.time_of_sample(i)))
        .collect::<Result<Vec<f64>>>()?;

    let mut phase = Vec::with_capacity(n);
    let mut acc = 0.0;
    phase.push(0.0);
    for pair in inst_freq.windows(2) {
        acc += PI * (pair[0] + pair[1]) / fs;
        phase.push(acc);
    }
    let samples = phase
        .iter()
        .map(|&p| Complex64::from_polar(1.0, p))
        .collect();
    Ok(NlfmSignal {
        samples,
        phase,
        inst_freq,
        pulse_width_s: grid.pulse_width_s(),
        sample_rate_hz: fs,
        bandwidth_hz: grid.bandwidth_hz(),
        amplitude: 1.0,
    })
}

/// Stationary-phase NLFM design for `spec`.
pub fn synthesize_spm(spec: WindowSpec, grid: &DesignGrid) -> Result<NlfmSignal> {
    let table = group_delay(spec, grid)?;
    synthesize_from_table(&table, grid)
}
