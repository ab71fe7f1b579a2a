//! Reference implementations used only by the integration tests. Everything
//! here is written out from the defining sums and matrices, without touching
//! the FFT-backed code paths under test.

#![allow(dead_code)]

use std::f64::consts::PI;

use nlfm::{Complex64, DesignGrid};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type CMatrix = Vec<Vec<Complex64>>;

/// `[W]_{k,n} = exp(-j 2 pi k n / K)`, `K x N`.
pub fn dft_matrix(k_len: usize, n_len: usize) -> CMatrix {
    (0..k_len)
        .map(|k| {
            (0..n_len)
                .map(|n| Complex64::from_polar(1.0, -2.0 * PI * (k * n) as f64 / k_len as f64))
                .collect()
        })
        .collect()
}

pub fn conj_transpose(a: &CMatrix) -> CMatrix {
    let (r, c) = (a.len(), a[0].len());
    (0..c)
        .map(|j| (0..r).map(|i| a[i][j].conj()).collect())
        .collect()
}

pub fn mat_vec(a: &CMatrix, x: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn mat_mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (r, inner, c) = (a.len(), b.len(), b[0].len());
    (0..r)
        .map(|i| {
            (0..c)
                .map(|j| (0..inner).map(|t| a[i][t] * b[t][j]).sum())
                .collect()
        })
        .collect()
}

/// One refinement iteration built from explicit matrices.
pub struct DenseIteration {
    /// `Y_theta(k) = |Y(k)| exp(j theta(k))`.
    pub y: Vec<Complex64>,
    /// Lagrange multipliers, positive root of `(K + lambda)^2 = |g|^2`.
    pub lambda: Vec<f64>,
    /// Diagonal of `Lambda_1`, `1 / |[W^H Y]_n|`.
    pub lambda1: Vec<f64>,
    /// `x(n) = [W^H Y]_n / (K + lambda_n)`, i.e. `Lambda_1 W^H Y`.
    pub x: Vec<Complex64>,
    /// `Y^H (I - W (2 Lambda_1 - K Lambda_1^2) W^H) Y`.
    pub e_quadratic: f64,
    /// `|| Y - W x ||^2`.
    pub e_residual: f64,
    /// `arg(W x)`.
    pub theta_next: Vec<f64>,
}

pub fn dense_iteration(magnitude: &[f64], theta: &[f64], n_len: usize) -> DenseIteration {
    let k_len = magnitude.len();
    let kf = k_len as f64;
    let w = dft_matrix(k_len, n_len);
    let wh = conj_transpose(&w);
    let y: Vec<Complex64> = magnitude
        .iter()
        .zip(theta)
        .map(|(&m, &t)| Complex64::new(m * t.cos(), m * t.sin()))
        .collect();

    let g = mat_vec(&wh, &y);
    let lambda: Vec<f64> = g.iter().map(|v| v.norm() - kf).collect();
    let lambda1: Vec<f64> = g.iter().map(|v| 1.0 / v.norm()).collect();
    let x: Vec<Complex64> = g.iter().zip(&lambda).map(|(v, l)| v / (kf + l)).collect();

    // Middle = W (2 Lambda_1 - K Lambda_1^2) W^H, then I - Middle.
    let d: Vec<f64> = lambda1.iter().map(|l| 2.0 * l - kf * l * l).collect();
    let w_d: CMatrix = w
        .iter()
        .map(|row| row.iter().zip(&d).map(|(v, s)| v * s).collect())
        .collect();
    let middle = mat_mul(&w_d, &wh);
    let mut p = middle;
    for (i, row) in p.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            } - *v;
        }
    }
    let py = mat_vec(&p, &y);
    let e_quadratic = y
        .iter()
        .zip(&py)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        .re;

    let wx = mat_vec(&w, &x);
    let e_residual = y.iter().zip(&wx).map(|(a, b)| (a - b).norm_sqr()).sum();
    let theta_next = wx.iter().map(|v| v.im.atan2(v.re)).collect();

    DenseIteration {
        y,
        lambda,
        lambda1,
        x,
        e_quadratic,
        e_residual,
        theta_next,
    }
}

/// `r(m) = sum_n x(n) conj(x(n - m))`, `m = -(N-1) ..= N-1`, by double loop.
pub fn brute_acf(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len() as i64;
    (-(n - 1)..n)
        .map(|m| {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                let j = i - m;
                if (0..n).contains(&j) {
                    acc += x[i as usize] * x[j as usize].conj();
                }
            }
            acc
        })
        .collect()
}

pub fn random_unimodular(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::from_polar(1.0, rng.gen_range(-PI..PI)))
        .collect()
}

pub fn random_phases(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.gen_range(-PI..PI)).collect()
}

/// Toy grid with `fs = 1`, `N` samples and transform length `K`.
pub fn toy_grid(rng: &mut ChaCha8Rng, max_n: usize, max_k: usize) -> DesignGrid {
    let n = rng.gen_range(4..=max_n);
    let k = rng.gen_range(2 * n..=max_k);
    let b = rng.gen_range(0.2..0.9);
    DesignGrid::new(b, n as f64, 1.0, Some(k)).unwrap()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Phases compared on the unit circle so wrap-around does not matter.
pub fn max_phase_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (Complex64::from_polar(1.0, *p) - Complex64::from_polar(1.0, *q)).norm())
        .fold(0.0, f64::max)
}

/// Worst-case relative disagreement between one library iteration and the
/// dense construction.
#[derive(Debug, Clone, Copy)]
pub struct IterationCheck {
    pub x: f64,
    pub e_residual: f64,
    pub e_quadratic: f64,
    pub theta: f64,
}

impl IterationCheck {
    pub fn worst(&self) -> f64 {
        self.x
            .max(self.e_residual)
            .max(self.e_quadratic)
            .max(self.theta)
    }
}

/// Run exactly one refinement iteration through the public optimizer entry
/// point and rebuild the same iteration densely.
///
/// `Zero`: random starting phase, target zero outside the band.
/// `Free`: started from a random unimodular signal, so out-of-band bins of
/// the augmented target carry that signal's spectrum.
pub fn check_run_iteration(seed: u64, mode: nlfm::OutOfBand) -> IterationCheck {
    use nlfm::optimizer::{run, run_from_signal};
    use nlfm::{BandMagnitude, OptimizerConfig, OutOfBand, Spectral};
    use rand::SeedableRng;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = toy_grid(&mut rng, 16, 64);
    let (n, k) = (grid.n(), grid.k());
    let mask = grid.in_band_mask();
    let raw: Vec<f64> = mask
        .iter()
        .map(|&inb| if inb { rng.gen_range(0.1..1.0) } else { 0.0 })
        .collect();
    let energy: f64 = raw.iter().map(|v| v * v).sum();
    let scale = ((k * n) as f64 / energy).sqrt();
    let target = BandMagnitude::from_values(raw.clone());
    let spectral = Spectral::new(grid);
    let cfg = OptimizerConfig {
        max_iterations: 1,
        out_of_band: mode,
        ..OptimizerConfig::default()
    };

    let (trace, magnitude, theta0) = match mode {
        OutOfBand::Zero => {
            let theta0 = random_phases(&mut rng, k);
            let trace = run(&spectral, &target, &theta0, &cfg).unwrap();
            let magnitude: Vec<f64> = raw.iter().map(|v| v * scale).collect();
            (trace, magnitude, theta0)
        }
        OutOfBand::Free => {
            let x0 = random_unimodular(&mut rng, n);
            let trace = run_from_signal(&spectral, &target, &x0, &cfg).unwrap();
            let spectrum0 = mat_vec(&dft_matrix(k, n), &x0);
            let magnitude: Vec<f64> = (0..k)
                .map(|b| {
                    if mask[b] {
                        raw[b] * scale
                    } else {
                        spectrum0[b].norm()
                    }
                })
                .collect();
            let theta0 = spectrum0.iter().map(|v| v.im.atan2(v.re)).collect();
            (trace, magnitude, theta0)
        }
    };
    let dense = dense_iteration(&magnitude, &theta0, n);

    // The returned signal is rotated so its first sample is real.
    let rot = dense.x[0].conj() / dense.x[0].norm();
    let x_ref: Vec<Complex64> = dense.x.iter().map(|v| v * rot).collect();
    let x_err = max_abs_diff(&trace.final_signal.samples, &x_ref);

    let e_lib = trace.e_min[0];
    let e_residual = (e_lib - dense.e_residual).abs() / dense.e_residual;
    let e_quadratic = (e_lib - dense.e_quadratic).abs() / dense.e_quadratic;

    // Bins where W x is essentially zero have an arbitrary phase.
    let wx = mat_vec(&dft_matrix(k, n), &dense.x);
    let big = max_abs(&wx);
    let (a, b): (Vec<f64>, Vec<f64>) = trace
        .final_spectral_phase
        .iter()
        .zip(&dense.theta_next)
        .zip(&wx)
        .filter(|(_, v)| v.norm() > 1e-6 * big)
        .map(|((p, q), _)| (*p, *q))
        .unzip();
    IterationCheck {
        x: x_err,
        e_residual,
        e_quadratic,
        theta: max_phase_diff(&a, &b),
    }
}
