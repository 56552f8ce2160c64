//! Deterministic synthetic tones used as stand-ins for instrument
//! recordings.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::ingest::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToneKind {
    /// A single partial.
    Sine,
    /// Odd harmonics only, amplitude `1/n²`.
    ClarinetLike,
    /// Every harmonic, with slowly decaying comparable amplitudes.
    ViolLike,
    /// Every harmonic with amplitude `1/n`, slightly stretched upward.
    PianoLike,
}

impl ToneKind {
    pub fn default_partials(self) -> usize {
        match self {
            ToneKind::Sine => 1,
            ToneKind::ClarinetLike => 4,
            ToneKind::ViolLike => 6,
            ToneKind::PianoLike => 5,
        }
    }

    /// `(frequency multiple, amplitude)` for each of `partials` partials.
    pub fn partials(self, partials: usize) -> Vec<(f64, f64)> {
        (1..=partials)
            .map(|i| {
                let n = i as f64;
                match self {
                    ToneKind::Sine => (n, 1.0),
                    ToneKind::ClarinetLike => {
                        let odd = 2.0 * n - 1.0;
                        (odd, 1.0 / (odd * odd))
                    }
                    ToneKind::ViolLike => (n, 1.0 / (1.0 + 0.15 * (n - 1.0))),
                    // Stiff-string stretch with inharmonicity 4e-4.
                    ToneKind::PianoLike => (n * (1.0 + 4e-4 * n * n).sqrt(), 1.0 / n),
                }
            })
            .take(if self == ToneKind::Sine { 1 } else { partials })
            .collect()
    }
}

impl FromStr for ToneKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sine" => Ok(Self::Sine),
            "clarinet" | "clarinet-like" => Ok(Self::ClarinetLike),
            "viol" | "viol-like" => Ok(Self::ViolLike),
            "piano" | "piano-like" => Ok(Self::PianoLike),
            other => Err(Error::invalid(format!("unknown tone kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToneSpec {
    pub kind: ToneKind,
    pub freq: f64,
    pub duration: f64,
    pub rate: f64,
    pub partials: usize,
    /// Standard deviation of additive white noise, relative to a unit
    /// fundamental.
    pub noise: f64,
    /// Seeds the noise.
    pub seed: u64,
    /// Seeds the partial phases, which fix the waveform shape.
    pub phase_seed: u64,
}

impl ToneSpec {
    pub fn new(kind: ToneKind, freq: f64, duration: f64, rate: f64) -> Self {
        Self {
            kind,
            freq,
            duration,
            rate,
            partials: kind.default_partials(),
            noise: 0.0,
            seed: 0,
            phase_seed: 0,
        }
    }

    pub fn with_noise(mut self, noise: f64, seed: u64) -> Self {
        self.noise = noise;
        self.seed = seed;
        self
    }
}

/// Renders the tone, scaled so its peak amplitude is 0.9.
///
/// Partial phases are 0 for a sine and drawn from `phase_seed` otherwise, so
/// tones that differ only in `seed` share a waveform shape.
pub fn synthesize(spec: &ToneSpec) -> Result<TimeSeries> {
    if !(spec.duration.is_finite() && spec.duration > 0.0) {
        return Err(Error::invalid(format!(
            "duration must be positive, got {}",
            spec.duration
        )));
    }
    if !(spec.freq.is_finite() && spec.freq > 0.0) {
        return Err(Error::invalid(format!("frequency must be positive, got {}", spec.freq)));
    }
    if !(spec.rate.is_finite() && spec.rate > 0.0) {
        return Err(Error::invalid(format!(
            "sample rate must be positive, got {}",
            spec.rate
        )));
    }
    if spec.partials == 0 {
        return Err(Error::invalid("a tone needs at least one partial"));
    }
    if !(spec.noise.is_finite() && spec.noise >= 0.0) {
        return Err(Error::invalid(format!(
            "noise level must be nonnegative, got {}",
            spec.noise
        )));
    }

    let mut phases = ChaCha8Rng::seed_from_u64(spec.phase_seed);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let partials: Vec<(f64, f64, f64)> = spec
        .kind
        .partials(spec.partials)
        .into_iter()
        .map(|(mult, amp)| {
            let phase = if spec.kind == ToneKind::Sine {
                0.0
            } else {
                phases.random_range(0.0..2.0 * PI)
            };
            (mult * spec.freq, amp, phase)
        })
        .collect();
    let noise = Normal::new(0.0, spec.noise).map_err(|e| Error::invalid(e.to_string()))?;

    let n = crate::ingest::samples_in(spec.duration, spec.rate);
    let mut x: Vec<f64> = (0..n)
        .map(|t| {
            let time = t as f64 / spec.rate;
            let tone: f64 = partials
                .iter()
                .map(|&(f, a, p)| a * (2.0 * PI * f * time + p).sin())
                .sum();
            tone + noise.sample(&mut rng)
        })
        .collect();

    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        x.iter_mut().for_each(|v| *v *= 0.9 / peak);
    }
    TimeSeries::new(x, spec.rate)
}
