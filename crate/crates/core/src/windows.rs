//! The six spectral tapers used as design targets.
//!
//! Every window is sampled on the symmetric index grid
//! `n = -(M-1)/2 ..= (M-1)/2` (so `M` must be odd) and peak-normalized to 1.
//! Here the window plays the role of a power spectral density over the
//! design band: index `-(M-1)/2` sits at `-B/2` and `+(M-1)/2` at `+B/2`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::bessel_i0;

/// Imaginary residue tolerated from the Chebyshev inverse DFT, relative to the peak.
const CHEBYSHEV_RESIDUE_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    RaisedCosine,
    Taylor,
    Chebyshev,
    Gaussian,
    Poisson,
    Kaiser,
}

impl WindowKind {
    pub const ALL: [WindowKind; 6] = [
        WindowKind::RaisedCosine,
        WindowKind::Taylor,
        WindowKind::Chebyshev,
        WindowKind::Gaussian,
        WindowKind::Poisson,
        WindowKind::Kaiser,
    ];

    /// CLI / config name.
    pub fn name(self) -> &'static str {
        match self {
            WindowKind::RaisedCosine => "raised-cosine",
            WindowKind::Taylor => "taylor",
            WindowKind::Chebyshev => "chebyshev",
            WindowKind::Gaussian => "gaussian",
            WindowKind::Poisson => "poisson",
            WindowKind::Kaiser => "kaiser",
        }
    }

    pub fn valid_names() -> String {
        Self::ALL.map(WindowKind::name).join(", ")
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownWindow(pub String);

impl fmt::Display for UnknownWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown window '{}' (valid: {})",
            self.0,
            WindowKind::valid_names()
        )
    }
}

impl std::error::Error for UnknownWindow {}

impl FromStr for WindowKind {
    type Err = UnknownWindow;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        WindowKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownWindow(s.to_string()))
    }
}

/// A window kind together with its shape parameters.
///
/// Serialized as `{"kind": "raised-cosine", "k": 0.17}`. On input, a bare
/// name (`"kaiser"`) and objects with omitted parameters are accepted and
/// filled from the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", try_from = "WindowRepr")]
pub enum WindowSpec {
    RaisedCosine {
        k: f64,
    },
    /// `eta_db` is the design sidelobe ratio, `n_bar` the number of
    /// nearly-constant sidelobes.
    Taylor {
        eta_db: f64,
        n_bar: u32,
    },
    /// Sidelobe ratio is `10^alpha`, used literally.
    Chebyshev {
        alpha: f64,
    },
    Gaussian {
        k: f64,
    },
    Poisson {
        k: f64,
    },
    /// `beta = pi * alpha`.
    Kaiser {
        beta: f64,
    },
}

impl WindowSpec {
    pub fn default_for(kind: WindowKind) -> Self {
        match kind {
            WindowKind::RaisedCosine => WindowSpec::RaisedCosine { k: 0.17 },
            WindowKind::Taylor => WindowSpec::Taylor {
                eta_db: 88.5,
                n_bar: 2,
            },
            WindowKind::Chebyshev => WindowSpec::Chebyshev { alpha: 2.0 },
            WindowKind::Gaussian => WindowSpec::Gaussian { k: 35.51 },
            WindowKind::Poisson => WindowSpec::Poisson { k: 2.5 },
            WindowKind::Kaiser => WindowSpec::Kaiser { beta: 4.5 },
        }
    }

    /// The six windows with their default parameters.
    pub fn defaults() -> Vec<WindowSpec> {
        WindowKind::ALL.into_iter().map(Self::default_for).collect()
    }

    pub fn kind(&self) -> WindowKind {
        match self {
            WindowSpec::RaisedCosine { .. } => WindowKind::RaisedCosine,
            WindowSpec::Taylor { .. } => WindowKind::Taylor,
            WindowSpec::Chebyshev { .. } => WindowKind::Chebyshev,
            WindowSpec::Gaussian { .. } => WindowKind::Gaussian,
            WindowSpec::Poisson { .. } => WindowKind::Poisson,
            WindowSpec::Kaiser { .. } => WindowKind::Kaiser,
        }
    }

    /// Named parameters, in declaration order.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            WindowSpec::RaisedCosine { k }
            | WindowSpec::Gaussian { k }
            | WindowSpec::Poisson { k } => vec![("k", k)],
            WindowSpec::Taylor { eta_db, n_bar } => {
                vec![("eta_db", eta_db), ("n_bar", n_bar as f64)]
            }
            WindowSpec::Chebyshev { alpha } => vec![("alpha", alpha)],
            WindowSpec::Kaiser { beta } => vec![("beta", beta)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, value: f64) -> Result<()> {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(Error::WindowParameter {
                    name,
                    value,
                    reason: "must be finite and > 0",
                })
            }
        }
        match *self {
            WindowSpec::RaisedCosine { k }
            | WindowSpec::Gaussian { k }
            | WindowSpec::Poisson { k } => positive("k", k),
            WindowSpec::Taylor { eta_db, n_bar } => {
                positive("eta_db", eta_db)?;
                if n_bar < 1 {
                    return Err(Error::WindowParameter {
                        name: "n_bar",
                        value: n_bar as f64,
                        reason: "must be >= 1",
                    });
                }
                Ok(())
            }
            WindowSpec::Chebyshev { alpha } => positive("alpha", alpha),
            WindowSpec::Kaiser { beta } => positive("beta", beta),
        }
    }
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec::default_for(WindowKind::RaisedCosine)
    }
}

impl From<WindowKind> for WindowSpec {
    fn from(kind: WindowKind) -> Self {
        WindowSpec::default_for(kind)
    }
}

// Input form of `WindowSpec`: a bare name or a tagged object with optional params.
#[derive(Deserialize)]
#[serde(untagged)]
enum WindowRepr {
    Name(String),
    Full(FullRepr),
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum FullRepr {
    RaisedCosine {
        k: Option<f64>,
    },
    Taylor {
        eta_db: Option<f64>,
        n_bar: Option<u32>,
    },
    Chebyshev {
        alpha: Option<f64>,
    },
    Gaussian {
        k: Option<f64>,
    },
    Poisson {
        k: Option<f64>,
    },
    Kaiser {
        beta: Option<f64>,
    },
}

impl TryFrom<WindowRepr> for WindowSpec {
    type Error = String;

    fn try_from(repr: WindowRepr) -> std::result::Result<Self, String> {
        let spec = match repr {
            WindowRepr::Name(name) => {
                let kind: WindowKind = name.parse().map_err(|e: UnknownWindow| e.to_string())?;
                WindowSpec::default_for(kind)
            }
            WindowRepr::Full(full) => {
                let d = |kind| WindowSpec::default_for(kind).params();
                match full {
                    FullRepr::RaisedCosine { k } => WindowSpec::RaisedCosine {
                        k: k.unwrap_or(d(WindowKind::RaisedCosine)[0].1),
                    },
                    FullRepr::Taylor { eta_db, n_bar } => WindowSpec::Taylor {
                        eta_db: eta_db.unwrap_or(88.5),
                        n_bar: n_bar.unwrap_or(2),
                    },
                    FullRepr::Chebyshev { alpha } => WindowSpec::Chebyshev {
                        alpha: alpha.unwrap_or(2.0),
                    },
                    FullRepr::Gaussian { k } => WindowSpec::Gaussian {
                        k: k.unwrap_or(d(WindowKind::Gaussian)[0].1),
                    },
                    FullRepr::Poisson { k } => WindowSpec::Poisson {
                        k: k.unwrap_or(d(WindowKind::Poisson)[0].1),
                    },
                    FullRepr::Kaiser { beta } => WindowSpec::Kaiser {
                        beta: beta.unwrap_or(4.5),
                    },
                }
            }
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

/// `M` window samples on the symmetric grid, peak-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWindow {
    spec: Option<WindowSpec>,
    values: Vec<f64>,
}

impl SampledWindow {
    /// Arbitrary window samples on the symmetric grid. Length must be odd
    /// and at least 3; values must be finite and nonnegative. No
    /// normalization is applied.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 || values.len().is_multiple_of(2) {
            return Err(Error::WindowLength(values.len()));
        }
        if let Some(&bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::WindowParameter {
                name: "value",
                value: bad,
                reason: "window samples must be finite and >= 0",
            });
        }
        Ok(Self { spec: None, values })
    }

    /// The generating spec, if the window came from `evaluate_window`.
    pub fn spec(&self) -> Option<WindowSpec> {
        self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(M-1)/2`.
    pub fn half_width(&self) -> i64 {
        (self.values.len() as i64 - 1) / 2
    }

    /// Value at symmetric index `n`, `|n| <= (M-1)/2`.
    pub fn at(&self, n: i64) -> Option<f64> {
        let i = n + self.half_width();
        (0..self.values.len() as i64)
            .contains(&i)
            .then(|| self.values[i as usize])
    }

    /// Symmetric indices paired with values.
    pub fn indexed(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let h = self.half_width();
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (i as i64 - h, v))
    }
}

/// Sample `spec` on `m` points (odd, at least 3) and normalize the peak to 1.
pub fn evaluate_window(spec: WindowSpec, m: usize) -> Result<SampledWindow> {
    if m < 3 || m.is_multiple_of(2) {
        return Err(Error::WindowLength(m));
    }
    spec.validate()?;

    let h = ((m - 1) / 2) as i64;
    let span = (m - 1) as f64;
    let grid = (-h..=h).map(|n| n as f64);

    let mut values: Vec<f64> = match spec {
        WindowSpec::RaisedCosine { k } => grid
            .map(|n| {
                let c = (PI * n / span).cos();
                k + (1.0 - k) * c * c
            })
            .collect(),
        WindowSpec::Taylor { eta_db, n_bar } => {
            let coeffs = taylor_coefficients(eta_db, n_bar);
            grid.map(|n| {
                1.0 + coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, f)| f * (2.0 * PI * (i + 1) as f64 * n / span).cos())
                    .sum::<f64>()
            })
            .collect()
        }
        WindowSpec::Chebyshev { alpha } => chebyshev_window(alpha, m)?,
        WindowSpec::Gaussian { k } => grid
            .map(|n| {
                let u = n / (2.0 * span);
                (-k * u * u).exp()
            })
            .collect(),
        WindowSpec::Poisson { k } => grid.map(|n| (-k * n.abs() / span).exp()).collect(),
        WindowSpec::Kaiser { beta } => {
            let norm = bessel_i0(beta);
            let half = m as f64 / 2.0;
            grid.map(|n| {
                let r = n / half;
                bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / norm
            })
            .collect()
        }
    };

    // Exact symmetry; the formulas are even but rounding of n/span is not
    // guaranteed to be.
    for i in 0..(m - 1) / 2 {
        let j = m - 1 - i;
        let avg = 0.5 * (values[i] + values[j]);
        values[i] = avg;
        values[j] = avg;
    }

    let peak = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if peak.is_nan() || peak <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    for v in &mut values {
        *v = (*v / peak).max(0.0);
    }
    Ok(SampledWindow {
        spec: Some(spec),
        values,
    })
}

/// Taylor coefficients `F_1 .. F_{n_bar-1}` for the series
/// `w = 1 + sum F_m cos(2 pi m n / (M-1))`.
///
/// The usual Taylor expansion is written `1 + 2 sum F_m cos(..)`; the factor 2
/// is folded into the coefficients returned here.
pub fn taylor_coefficients(eta_db: f64, n_bar: u32) -> Vec<f64> {
    let ratio = 10f64.powf(eta_db / 20.0);
    let a = ratio.acosh() / PI;
    let a2 = a * a;
    let nb = n_bar as f64;
    let sigma2 = nb * nb / (a2 + (nb - 0.5).powi(2));

    (1..n_bar)
        .map(|m| {
            let mf = m as f64;
            let num: f64 = (1..n_bar)
                .map(|i| 1.0 - mf * mf / sigma2 / (a2 + (i as f64 - 0.5).powi(2)))
                .product();
            let den: f64 = (1..n_bar)
                .filter(|&i| i != m)
                .map(|i| 1.0 - mf * mf / (i as f64).powi(2))
                .product();
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            sign * num / den
        })
        .collect()
}

/// Chebyshev polynomial `T_order(x)` valid on the whole real line.
fn chebyshev_poly(order: usize, x: f64) -> f64 {
    let o = order as f64;
    if x.abs() <= 1.0 {
        (o * x.acos()).cos()
    } else {
        let v = (o * x.abs().acosh()).cosh();
        if x < 0.0 && order % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

/// DFT-domain samples `W(m)`, `m = 0..M-1`, of the Dolph-Chebyshev window.
///
/// Uses polynomial order `M - 1`. With odd `M` this keeps `W` real and even
/// under `m -> M - m`, so the inverse DFT is real and peaks at `n = 0`.
pub fn chebyshev_spectrum(alpha: f64, m: usize) -> Vec<f64> {
    let order = m - 1;
    let beta = ((10f64.powf(alpha)).acosh() / order as f64).cosh();
    let norm = chebyshev_poly(order, beta);
    (0..m)
        .map(|i| chebyshev_poly(order, beta * (PI * i as f64 / m as f64).cos()) / norm)
        .collect()
}

fn chebyshev_window(alpha: f64, m: usize) -> Result<Vec<f64>> {
    let mut buf: Vec<Complex64> = chebyshev_spectrum(alpha, m)
        .into_iter()
        .map(|w| Complex64::new(w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);

    let peak = buf.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
    let residue = buf.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if residue > CHEBYSHEV_RESIDUE_LIMIT * peak {
        return Err(Error::ChebyshevResidue(residue / peak));
    }

    // Inverse DFT index n' = n mod M; reorder onto n = -(M-1)/2 ..= (M-1)/2.
    let h = (m - 1) / 2;
    Ok((0..m)
        .map(|i| {
            let idx = (i + m - h) % m;
            buf[idx].re / m as f64
        })
        .collect())
}
