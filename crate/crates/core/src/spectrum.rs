//! Periodogram features for the frequency-domain baseline classifier.

use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};
use crate::ingest::TimeSeries;

/// Number of log-spaced feature frequencies.
pub const FEATURE_LEN: usize = 2000;
pub const FEATURE_MIN_HZ: f64 = 10.0;
pub const FEATURE_MAX_HZ: f64 = 10_000.0;

/// The `FEATURE_LEN` frequencies, log-spaced from 10 Hz to 10 kHz inclusive.
pub fn feature_frequencies() -> Vec<f64> {
    let ratio = (FEATURE_MAX_HZ / FEATURE_MIN_HZ).ln();
    (0..FEATURE_LEN)
        .map(|i| {
            if i == FEATURE_LEN - 1 {
                FEATURE_MAX_HZ
            } else {
                FEATURE_MIN_HZ * (ratio * i as f64 / (FEATURE_LEN - 1) as f64).exp()
            }
        })
        .collect()
}

/// Two-sided periodogram `|X_k|² / N` over all `N` bins, so that the bins
/// sum to the signal energy `Σ x²`. With `taper`, a Hann window is applied
/// first.
pub fn periodogram(samples: &[f64], taper: bool) -> Vec<f64> {
    let n = samples.len();
    if n == 0 {
        return Vec::new();
    }
    let mut buf: Vec<Complex<f64>> = samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let w = if taper {
                0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos())
            } else {
                1.0
            };
            Complex::new(x * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().map(|c| c.norm_sqr() / n as f64).collect()
}

/// Power spectrum sampled at [`feature_frequencies`], interpolating linearly
/// between DFT bins.
pub fn fft_features(ts: &TimeSeries, taper: bool) -> Result<Vec<f64>> {
    let rate = ts.rate();
    if rate <= 2.0 * FEATURE_MAX_HZ {
        return Err(Error::Unsupported(format!(
            "sample rate {rate} Hz cannot resolve {FEATURE_MAX_HZ} Hz"
        )));
    }
    let n = ts.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "power spectrum".into(),
            required: 2,
            available: n,
        });
    }
    let power = periodogram(ts.samples(), taper);
    let last = n / 2;
    Ok(feature_frequencies()
        .into_iter()
        .map(|f| {
            let pos = f * n as f64 / rate;
            let k = (pos.floor() as usize).min(last);
            if k >= last {
                return power[last];
            }
            let frac = pos - k as f64;
            power[k] * (1.0 - frac) + power[k + 1] * frac
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, n: usize, rate: f64) -> TimeSeries {
        TimeSeries::new(
            (0..n).map(|t| (2.0 * PI * freq * t as f64 / rate).sin()).collect(),
            rate,
        )
        .unwrap()
    }

    #[test]
    fn grid_endpoints() {
        let f = feature_frequencies();
        assert_eq!(f.len(), 2000);
        assert_eq!(f[0], 10.0);
        assert_eq!(f[1999], 10_000.0);
        assert!(f.windows(2).all(|w| w[0] < w[1]));
        let r0 = f[1] / f[0];
        let r1 = f[1999] / f[1998];
        assert!((r0 - r1).abs() < 1e-9);
    }

    #[test]
    fn sine_peak_location() {
        let ts = sine(440.0, 2205, 44100.0);
        let feats = fft_features(&ts, false).unwrap();
        let grid = feature_frequencies();
        let argmax = (0..feats.len()).max_by(|&a, &b| feats[a].total_cmp(&feats[b])).unwrap();
        let nearest = (0..grid.len())
            .min_by(|&a, &b| (grid[a] - 440.0).abs().total_cmp(&(grid[b] - 440.0).abs()))
            .unwrap();
        assert_eq!(argmax, nearest);
    }

    #[test]
    fn zero_signal() {
        let ts = TimeSeries::new(vec![0.0; 1000], 44100.0).unwrap();
        assert!(fft_features(&ts, false).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn parseval() {
        let x: Vec<f64> = (0..1234)
            .map(|i| ((i * 37 % 101) as f64 / 50.0 - 1.0) * (i as f64).cos())
            .collect();
        let energy: f64 = x.iter().map(|v| v * v).sum();
        let total: f64 = periodogram(&x, false).iter().sum();
        assert!(((total - energy) / energy).abs() < 1e-6);
    }

    #[test]
    fn low_rate_rejected() {
        let ts = TimeSeries::new(vec![0.0; 100], 16000.0).unwrap();
        assert!(matches!(fft_features(&ts, false), Err(Error::Unsupported(_))));
    }
}
