//! Autocorrelation and peak sidelobe level.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};

/// Floor applied before taking `20 log10`.
pub const DB_FLOOR: f64 = -300.0;

/// Autocorrelation magnitude over lags `-(N-1) ..= N-1`, normalized to the
/// zero-lag value.
#[derive(Debug, Clone, PartialEq)]
pub struct Acf {
    pub lags: Vec<i64>,
    pub magnitude: Vec<f64>,
    pub magnitude_db: Vec<f64>,
}

impl Acf {
    /// Index of lag 0.
    pub fn zero_index(&self) -> usize {
        self.lags.len() / 2
    }

    pub fn lag_seconds(&self, sample_rate_hz: f64) -> Vec<f64> {
        self.lags
            .iter()
            .map(|&l| l as f64 / sample_rate_hz)
            .collect()
    }
}

fn to_db(v: f64) -> f64 {
    if v > 0.0 {
        (20.0 * v.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// `r(m) = sum_n x(n) conj(x(n-m))` via a zero-padded FFT of length
/// `>= 2N`. Negative lags are mirrored from positive ones, which is exact
/// for magnitudes since `r(-m) = conj(r(m))`.
pub fn autocorrelation(x: &[Complex64]) -> Result<Acf> {
    let n = x.len();
    if n < 2 {
        return Err(Error::SignalTooShort(n));
    }
    let len = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::new();
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    buf[..n].copy_from_slice(x);
    planner.plan_fft_forward(len).process(&mut buf);
    for v in &mut buf {
        *v = Complex64::new(v.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);

    let peak = buf[0].norm();
    let positive: Vec<f64> = buf[..n]
        .iter()
        .map(|v| if peak > 0.0 { v.norm() / peak } else { 0.0 })
        .collect();

    let mut magnitude = Vec::with_capacity(2 * n - 1);
    magnitude.extend(positive[1..].iter().rev());
    magnitude.extend_from_slice(&positive);
    magnitude[n - 1] = 1.0;
    let magnitude_db = magnitude.iter().map(|&v| to_db(v)).collect();
    let lags = (-(n as i64 - 1)..=(n as i64 - 1)).collect();
    Ok(Acf {
        lags,
        magnitude,
        magnitude_db,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PslStatus {
    Ok,
    /// The magnitude falls monotonically on both sides; there are no
    /// sidelobes and the PSL is reported as negative infinity.
    NoSidelobes,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SidelobeReport {
    pub psl_db: f64,
    pub status: PslStatus,
    /// Lags of the first strict local minima either side of zero.
    pub mainlobe_edges: Option<(i64, i64)>,
    /// Null-to-null mainlobe width in samples.
    pub mainlobe_width: Option<u64>,
}

impl SidelobeReport {
    pub fn psl(&self) -> Option<f64> {
        self.psl_db.is_finite().then_some(self.psl_db)
    }
}

/// Mainlobe = lags between the first strict local minima of `|r|` on each
/// side of zero; PSL = largest level outside it.
pub fn peak_sidelobe_level(acf: &Acf) -> SidelobeReport {
    let z = acf.zero_index();
    let mag = &acf.magnitude;
    // Positive side; the negative side is its mirror image.
    let edge =
        (z + 1..mag.len().saturating_sub(1)).find(|&i| mag[i] < mag[i - 1] && mag[i] < mag[i + 1]);

    match edge {
        None => SidelobeReport {
            psl_db: f64::NEG_INFINITY,
            status: PslStatus::NoSidelobes,
            mainlobe_edges: None,
            mainlobe_width: None,
        },
        Some(right) => {
            let left = 2 * z - right;
            let outside = acf.magnitude_db[..=left]
                .iter()
                .chain(&acf.magnitude_db[right..]);
            let psl_db = outside.cloned().fold(f64::NEG_INFINITY, f64::max);
            let half = (right - z) as i64;
            SidelobeReport {
                psl_db,
                status: PslStatus::Ok,
                mainlobe_edges: Some((-half, half)),
                mainlobe_width: Some(2 * half as u64),
            }
        }
    }
}

/// One row of the SPM-versus-refined comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Improvement {
    pub label: String,
    pub spm_psl_db: Option<f64>,
    pub pm_psl_db: Option<f64>,
    /// `pm - spm`; `None` when either side has no sidelobes.
    pub delta_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImprovementReport {
    pub rows: Vec<Improvement>,
    /// Mean of the defined deltas.
    pub mean_delta_db: Option<f64>,
    /// Labels excluded from the mean.
    pub excluded: Vec<String>,
}

/// Per-window PSL deltas (`pm - spm`) and their mean.
pub fn improvement_report<'a, I>(pairs: I) -> ImprovementReport
where
    I: IntoIterator<Item = (&'a str, &'a SidelobeReport, &'a SidelobeReport)>,
{
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for (label, spm, pm) in pairs {
        let delta_db = match (spm.psl(), pm.psl()) {
            (Some(a), Some(b)) => Some(b - a),
            _ => {
                excluded.push(label.to_string());
                None
            }
        };
        rows.push(Improvement {
            label: label.to_string(),
            spm_psl_db: spm.psl(),
            pm_psl_db: pm.psl(),
            delta_db,
        });
    }
    let deltas: Vec<f64> = rows.iter().filter_map(|r| r.delta_db).collect();
    let mean_delta_db =
        (!deltas.is_empty()).then(|| deltas.iter().sum::<f64>() / deltas.len() as f64);
    ImprovementReport {
        rows,
        mean_delta_db,
        excluded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lfm(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|i| {
                let t = i as f64 / n as f64 - 0.5;
                Complex64::from_polar(1.0, std::f64::consts::PI * 40.0 * t * t)
            })
            .collect()
    }

    #[test]
    fn unmodulated_pulse_has_no_sidelobes() {
        let acf = autocorrelation(&vec![Complex64::new(1.0, 0.0); 50]).unwrap();
        assert_eq!(acf.lags.len(), 99);
        assert!((acf.magnitude[acf.zero_index() + 10] - 40.0 / 50.0).abs() < 1e-12);
        let r = peak_sidelobe_level(&acf);
        assert_eq!(r.status, PslStatus::NoSidelobes);
        assert_eq!(r.psl_db, f64::NEG_INFINITY);
        assert_eq!(r.psl(), None);
    }

    #[test]
    fn zero_lag_and_symmetry() {
        let acf = autocorrelation(&lfm(64)).unwrap();
        let z = acf.zero_index();
        assert_eq!(acf.lags[z], 0);
        assert_eq!(acf.magnitude_db[z], 0.0);
        for m in 1..64 {
            assert_eq!(acf.magnitude_db[z - m], acf.magnitude_db[z + m]);
        }
    }

    #[test]
    fn lfm_psl_near_sinc_level() {
        // Large time-bandwidth LFM: first sidelobe close to -13.3 dB.
        let n = 2000;
        let x: Vec<Complex64> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64 - 0.5;
                Complex64::from_polar(1.0, std::f64::consts::PI * 400.0 * t * t)
            })
            .collect();
        let r = peak_sidelobe_level(&autocorrelation(&x).unwrap());
        assert_eq!(r.status, PslStatus::Ok);
        assert!((r.psl_db + 13.3).abs() < 0.5, "{}", r.psl_db);
        let (l, h) = r.mainlobe_edges.unwrap();
        assert_eq!(l, -h);
    }

    #[test]
    fn psl_invariant_to_rotation_and_scale() {
        let x = lfm(128);
        let y: Vec<Complex64> = x
            .iter()
            .map(|v| v * Complex64::from_polar(3.5, 1.1))
            .collect();
        let a = peak_sidelobe_level(&autocorrelation(&x).unwrap());
        let b = peak_sidelobe_level(&autocorrelation(&y).unwrap());
        assert!((a.psl_db - b.psl_db).abs() < 1e-9);
        assert_eq!(a.mainlobe_edges, b.mainlobe_edges);
    }

    #[test]
    fn short_signal_rejected() {
        assert!(matches!(
            autocorrelation(&[Complex64::new(1.0, 0.0)]),
            Err(Error::SignalTooShort(1))
        ));
    }

    #[test]
    fn improvements_and_exclusions() {
        let ok = |v| SidelobeReport {
            psl_db: v,
            status: PslStatus::Ok,
            mainlobe_edges: Some((-3, 3)),
            mainlobe_width: Some(6),
        };
        let none = SidelobeReport {
            psl_db: f64::NEG_INFINITY,
            status: PslStatus::NoSidelobes,
            mainlobe_edges: None,
            mainlobe_width: None,
        };
        let (a, b, c, d) = (ok(-20.0), ok(-30.0), ok(-25.0), ok(-25.0));
        let rep = improvement_report([("p", &a, &b), ("q", &c, &d), ("r", &none, &a)]);
        assert_eq!(rep.rows[0].delta_db, Some(-10.0));
        assert_eq!(rep.rows[1].delta_db, Some(0.0));
        assert_eq!(rep.rows[2].delta_db, None);
        assert_eq!(rep.excluded, vec!["r".to_string()]);
        assert_eq!(rep.mean_delta_db, Some(-5.0));
    }
}
