//! Zero-padded DFT operators and the design frequency grid.
//!
//! `forward` is the `K x N` matrix `[W]_{k,n} = exp(-j 2 pi k n / K)` applied
//! to a length-`N` signal and `adjoint` is its conjugate transpose. Both are
//! backed by FFT plans; `naive_forward`/`naive_adjoint` evaluate the defining
//! sums directly and exist as reference implementations.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::windows::SampledWindow;

/// Sampling geometry shared by every stage of a design.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignGrid {
    bandwidth_hz: f64,
    pulse_width_s: f64,
    sample_rate_hz: f64,
    n: usize,
    k: usize,
    in_band: Vec<usize>,
}

impl DesignGrid {
    /// Build a grid. `transform_len` overrides the default `K`, the smallest
    /// power of two `>= 2N`.
    pub fn new(
        bandwidth_hz: f64,
        pulse_width_s: f64,
        sample_rate_hz: f64,
        transform_len: Option<usize>,
    ) -> Result<Self> {
        for (name, v) in [
            ("bandwidth", bandwidth_hz),
            ("pulse width", pulse_width_s),
            ("sample rate", sample_rate_hz),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Grid(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if bandwidth_hz > sample_rate_hz {
            return Err(Error::Grid(format!(
                "bandwidth {bandwidth_hz} Hz exceeds sample rate {sample_rate_hz} Hz"
            )));
        }
        let n = (pulse_width_s * sample_rate_hz).round() as usize;
        if n < 2 {
            return Err(Error::Grid(format!(
                "pulse holds {n} samples, need at least 2"
            )));
        }
        let k = transform_len.unwrap_or_else(|| (2 * n).next_power_of_two());
        if k < 2 * n {
            return Err(Error::Grid(format!(
                "transform length {k} is below 2N = {}",
                2 * n
            )));
        }

        // |f| <= B/2 selects a set symmetric about DC. The only way to get an
        // even count is the unpaired Nyquist bin when B == fs; drop it.
        let df = sample_rate_hz / k as f64;
        let half = 0.5 * bandwidth_hz * (1.0 + 1e-12);
        let mut in_band: Vec<usize> = (0..k)
            .filter(|&i| bin_frequency(i, k, df).abs() <= half)
            .collect();
        in_band.sort_by(|&a, &b| bin_frequency(a, k, df).total_cmp(&bin_frequency(b, k, df)));
        if in_band.len().is_multiple_of(2) {
            in_band.remove(0);
        }
        if in_band.len() < 3 {
            return Err(Error::Grid(format!(
                "only {} bins fall inside the band; raise K or the bandwidth",
                in_band.len()
            )));
        }

        Ok(Self {
            bandwidth_hz,
            pulse_width_s,
            sample_rate_hz,
            n,
            k,
            in_band,
        })
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }

    pub fn pulse_width_s(&self) -> f64 {
        self.pulse_width_s
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// Signal length `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Transform length `K`.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of in-band bins `M` (odd).
    pub fn m(&self) -> usize {
        self.in_band.len()
    }

    /// In-band bin indices in ascending baseband frequency.
    pub fn in_band_bins(&self) -> &[usize] {
        &self.in_band
    }

    /// Per-bin in-band flag, length `K`.
    pub fn in_band_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.k];
        for &b in &self.in_band {
            mask[b] = true;
        }
        mask
    }

    /// Baseband frequency of bin `k` with wrap-around above `K/2`.
    pub fn frequency_of_bin(&self, k: usize) -> f64 {
        bin_frequency(k, self.k, self.sample_rate_hz / self.k as f64)
    }

    /// Bin indices sorted by ascending baseband frequency.
    pub fn bins_by_frequency(&self) -> Vec<usize> {
        let h = self.k / 2;
        (h..self.k).chain(0..h).collect()
    }

    /// Sample time `t_n = -T/2 + n / fs`.
    pub fn time_of_sample(&self, n: usize) -> f64 {
        -0.5 * self.pulse_width_s + n as f64 / self.sample_rate_hz
    }
}

fn bin_frequency(k: usize, len: usize, df: f64) -> f64 {
    if k < len / 2 {
        k as f64 * df
    } else {
        (k as f64 - len as f64) * df
    }
}

/// Target magnitude `|Y(k)|` on all `K` bins: the square root of the window
/// on the in-band bins and zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMagnitude(Vec<f64>);

impl BandMagnitude {
    /// Wrap an arbitrary nonnegative magnitude vector.
    pub fn from_values(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `sum |Y(k)|^2`.
    pub fn energy(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    /// Copy rescaled so that `energy() == target`.
    pub fn scaled_to_energy(&self, target: f64) -> Result<Self> {
        let e = self.energy();
        if e.is_nan() || e <= 0.0 {
            return Err(Error::ZeroEnergy);
        }
        let s = (target / e).sqrt();
        Ok(Self(self.0.iter().map(|v| v * s).collect()))
    }
}

/// FFT-backed operators for one grid. Plans are shared read-only, so a
/// `Spectral` can be used from many threads at once.
#[derive(Clone)]
pub struct Spectral {
    grid: DesignGrid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

impl Spectral {
    pub fn new(grid: DesignGrid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.k);
        let inv = planner.plan_fft_inverse(grid.k);
        Self { grid, fwd, inv }
    }

    pub fn grid(&self) -> &DesignGrid {
        &self.grid
    }

    /// `X = W x`: zero-padded `K`-point DFT of a length-`N` signal.
    pub fn forward(&self, signal: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.grid.n, signal.len())?;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.grid.k];
        buf[..signal.len()].copy_from_slice(signal);
        self.fwd.process(&mut buf);
        Ok(buf)
    }

    /// `g = W^H X`: unnormalized inverse DFT truncated to `N` samples.
    pub fn adjoint(&self, spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.grid.k, spectrum.len())?;
        let mut buf = spectrum.to_vec();
        self.inv.process(&mut buf);
        buf.truncate(self.grid.n);
        Ok(buf)
    }

    /// Place `sqrt(window)` on the in-band bins, ascending in frequency.
    pub fn band_magnitude(&self, window: &SampledWindow) -> Result<BandMagnitude> {
        check_len(self.grid.m(), window.len())?;
        let mut mag = vec![0.0; self.grid.k];
        for (&bin, &w) in self.grid.in_band.iter().zip(window.values()) {
            mag[bin] = w.max(0.0).sqrt();
        }
        Ok(BandMagnitude(mag))
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}

/// `X(k) = sum_n x(n) exp(-j 2 pi k n / K)` by direct summation.
pub fn naive_forward(signal: &[Complex64], k_len: usize) -> Vec<Complex64> {
    (0..k_len)
        .map(|k| {
            signal
                .iter()
                .enumerate()
                .map(|(n, &x)| x * twiddle(-1.0, k, n, k_len))
                .sum()
        })
        .collect()
}

/// `g(n) = sum_k X(k) exp(+j 2 pi k n / K)` for `n < n_len`, by direct summation.
pub fn naive_adjoint(spectrum: &[Complex64], n_len: usize) -> Vec<Complex64> {
    let k_len = spectrum.len();
    (0..n_len)
        .map(|n| {
            spectrum
                .iter()
                .enumerate()
                .map(|(k, &y)| y * twiddle(1.0, k, n, k_len))
                .sum()
        })
        .collect()
}

fn twiddle(sign: f64, k: usize, n: usize, k_len: usize) -> Complex64 {
    // Reduce k*n mod K first so the angle stays small and accurate.
    let r = (k as u128 * n as u128 % k_len as u128) as f64;
    Complex64::from_polar(1.0, sign * 2.0 * PI * r / k_len as f64)
}
