//! Membership classifiers: a rank-function model over β₁ diagrams and a
//! power-spectrum baseline, both accepting a sample when its L² distance to
//! the class mean is below `k·σ`. Also ROC sweeps over `k`.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::embed::{delay_embed, distances, select_landmarks_with, DelayParams, DistanceMatrix, LandmarkStrategy};
use crate::error::{Error, Result};
use crate::filtration::{build_filtration, epsilon_max_rule, DEFAULT_MAX_DIM, DEFAULT_STOP_DIM};
use crate::homology::{persistence, PersistenceDiagram};
use crate::ingest::TimeSeries;
use crate::prf::{l2_distance, mean_prf, population_std, prf, PrfGrid, DEFAULT_RESOLUTION};
use crate::spectrum::fft_features;

/// Everything needed to turn one raw window into a persistence diagram and
/// rank function.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub delay: DelayParams,
    pub landmarks: usize,
    pub strategy: LandmarkStrategy,
    pub resolution: usize,
    /// Fixed scale cap; `None` derives it from the data.
    pub eps_max: Option<f64>,
    pub max_dim: usize,
    pub stop_dim: usize,
    /// Homology dimension of the rank functions.
    pub homology_dim: usize,
    /// Cap on the number of witnesses taken from each window.
    pub max_witnesses: Option<usize>,
}

impl PipelineConfig {
    pub fn new(delay: DelayParams, landmarks: usize) -> Self {
        Self {
            delay,
            landmarks,
            strategy: LandmarkStrategy::EvenTime,
            resolution: DEFAULT_RESOLUTION,
            eps_max: None,
            max_dim: DEFAULT_MAX_DIM,
            stop_dim: DEFAULT_STOP_DIM,
            homology_dim: 1,
            max_witnesses: None,
        }
    }

    /// Peak-normalizes the window, reconstructs it, picks landmarks and
    /// returns the landmark–witness distances.
    pub fn distance_matrix(&self, window: &TimeSeries) -> Result<DistanceMatrix> {
        let mut cloud = delay_embed(&window.peak_normalized(), self.delay)?;
        if let Some(cap) = self.max_witnesses {
            cloud = cloud.truncated(cap);
        }
        let landmarks = select_landmarks_with(&cloud, self.landmarks, self.strategy)?;
        distances(&cloud, &landmarks)
    }

    /// Scale cap for one window: the configured value, else the
    /// first-`stop_dim`-simplex rule.
    pub fn window_eps_max(&self, d: &DistanceMatrix) -> f64 {
        self.eps_max.unwrap_or_else(|| epsilon_max_rule(d, self.stop_dim))
    }

    pub fn diagram_from(&self, d: &DistanceMatrix, eps_max: f64) -> Result<PersistenceDiagram> {
        let f = build_filtration(d, self.max_dim, eps_max)?;
        persistence(&f, self.homology_dim)
    }

    pub fn rank_function_from(&self, d: &DistanceMatrix, eps_max: f64) -> Result<PrfGrid> {
        let dgm = self.diagram_from(d, eps_max)?;
        prf(&dgm, self.homology_dim, self.resolution)
    }
}

/// Outcome of one membership test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub accepted: bool,
    pub distance: f64,
}

/// A class model that accepts samples closer than `k·σ` to its mean.
pub trait MembershipModel {
    /// L² distance from the sample's feature to the class mean.
    fn distance(&self, sample: &TimeSeries) -> Result<f64>;

    fn sigma(&self) -> f64;

    fn membership(&self, sample: &TimeSeries, k: f64) -> Result<Membership> {
        let distance = self.distance(sample)?;
        Ok(Membership {
            accepted: accepts(distance, k, self.sigma()),
            distance,
        })
    }
}

fn accepts(distance: f64, k: f64, sigma: f64) -> bool {
    distance < k * sigma
}

fn check_training_windows(windows: &[TimeSeries]) -> Result<()> {
    if windows.len() < 2 {
        return Err(Error::invalid(format!(
            "training needs at least 2 windows, got {}",
            windows.len()
        )));
    }
    let (len, rate) = (windows[0].len(), windows[0].rate());
    for (index, w) in windows.iter().enumerate() {
        if w.len() != len || w.rate() != rate {
            return Err(Error::Window {
                index,
                source: Box::new(Error::invalid(format!(
                    "window has {} samples at {} Hz, expected {len} at {rate} Hz",
                    w.len(),
                    w.rate()
                ))),
            });
        }
    }
    Ok(())
}

fn check_sample(sample: &TimeSeries, len: usize, rate: f64) -> Result<()> {
    if sample.len() != len || sample.rate() != rate {
        return Err(Error::invalid(format!(
            "sample has {} samples at {} Hz, model expects {len} at {rate} Hz",
            sample.len(),
            sample.rate()
        )));
    }
    Ok(())
}

fn per_window<T: Send>(windows: &[TimeSeries], f: impl Fn(&TimeSeries) -> Result<T> + Sync) -> Result<Vec<T>> {
    windows
        .par_iter()
        .enumerate()
        .map(|(index, w)| {
            f(w).map_err(|e| Error::Window {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Mean β₁ rank function and spread of a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct PrfModel {
    /// Pipeline settings, with `eps_max` fixed to the training value.
    pub config: PipelineConfig,
    pub mean: PrfGrid,
    pub sigma: f64,
    pub window_len: usize,
    pub rate: f64,
}

impl PrfModel {
    pub fn eps_max(&self) -> f64 {
        self.mean.eps_max()
    }

    /// Rank function of one sample on the model's grid.
    pub fn rank_function(&self, sample: &TimeSeries) -> Result<PrfGrid> {
        check_sample(sample, self.window_len, self.rate)?;
        let d = self.config.distance_matrix(sample)?;
        self.config.rank_function_from(&d, self.eps_max())
    }

    pub fn diagram(&self, sample: &TimeSeries) -> Result<PersistenceDiagram> {
        check_sample(sample, self.window_len, self.rate)?;
        let d = self.config.distance_matrix(sample)?;
        self.config.diagram_from(&d, self.eps_max())
    }
}

impl MembershipModel for PrfModel {
    fn distance(&self, sample: &TimeSeries) -> Result<f64> {
        l2_distance(&self.rank_function(sample)?, &self.mean)
    }

    fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Trains the rank-function model.
///
/// Every window shares one scale cap so that the grids are comparable: the
/// configured `eps_max` if set, else the largest per-window rule value.
pub fn train_prf(windows: &[TimeSeries], config: &PipelineConfig) -> Result<PrfModel> {
    check_training_windows(windows)?;
    let matrices = per_window(windows, |w| config.distance_matrix(w))?;
    let eps_max = match config.eps_max {
        Some(e) => e,
        None => matrices.iter().map(|d| config.window_eps_max(d)).fold(0.0, f64::max),
    };
    if !(eps_max.is_finite() && eps_max > 0.0) {
        return Err(Error::Degenerate(format!(
            "training scale cap is {eps_max}; the windows carry no usable structure"
        )));
    }
    let grids: Vec<PrfGrid> = matrices
        .par_iter()
        .enumerate()
        .map(|(index, d)| {
            config.rank_function_from(d, eps_max).map_err(|e| Error::Window {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let mean = mean_prf(&grids)?;
    let sigma = crate::prf::sigma(&grids, &mean)?;
    Ok(PrfModel {
        config: PipelineConfig {
            eps_max: Some(eps_max),
            ..config.clone()
        },
        mean,
        sigma,
        window_len: windows[0].len(),
        rate: windows[0].rate(),
    })
}

/// Mean power-spectrum feature vector and spread of a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct FftModel {
    pub mean: Vec<f64>,
    pub sigma: f64,
    pub taper: bool,
    pub window_len: usize,
    pub rate: f64,
}

impl FftModel {
    /// Spectral features of a peak-normalized sample.
    pub fn features(&self, sample: &TimeSeries) -> Result<Vec<f64>> {
        check_sample(sample, self.window_len, self.rate)?;
        fft_features(&sample.peak_normalized(), self.taper)
    }
}

fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl MembershipModel for FftModel {
    fn distance(&self, sample: &TimeSeries) -> Result<f64> {
        Ok(euclidean_distance(&self.features(sample)?, &self.mean))
    }

    fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Trains the spectral baseline on peak-normalized windows.
pub fn train_fft(windows: &[TimeSeries], taper: bool) -> Result<FftModel> {
    check_training_windows(windows)?;
    let feats = per_window(windows, |w| fft_features(&w.peak_normalized(), taper))?;
    let dim = feats[0].len();
    let mut mean = vec![0.0; dim];
    for f in &feats {
        mean.iter_mut().zip(f).for_each(|(m, v)| *m += v);
    }
    let n = feats.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    let dists: Vec<f64> = feats.iter().map(|f| euclidean_distance(f, &mean)).collect();
    Ok(FftModel {
        sigma: population_std(&dists),
        mean,
        taper,
        window_len: windows[0].len(),
        rate: windows[0].rate(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub k: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// True/false positive rates along a grid of threshold multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    /// CSV with columns `k,tpr,fpr`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "k,tpr,fpr")?;
        for p in &self.points {
            writeln!(out, "{},{},{}", p.k, p.tpr, p.fpr)?;
        }
        Ok(())
    }
}

/// `count` multipliers evenly spaced in `(0, max]`.
pub fn k_grid(max: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|i| max * i as f64 / count as f64).collect()
}

/// 100 multipliers evenly spaced in `(0, 5]`.
pub fn default_k_grid() -> Vec<f64> {
    k_grid(5.0, 100)
}

/// Sweeps `k` given precomputed distances of positive and negative samples.
pub fn roc_from_distances(sigma: f64, positives: &[f64], negatives: &[f64], ks: &[f64]) -> Result<RocCurve> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::invalid(
            "ROC needs at least one positive and one negative sample",
        ));
    }
    let rate = |ds: &[f64], k: f64| ds.iter().filter(|&&d| accepts(d, k, sigma)).count() as f64 / ds.len() as f64;
    Ok(RocCurve {
        points: ks
            .iter()
            .map(|&k| RocPoint {
                k,
                tpr: rate(positives, k),
                fpr: rate(negatives, k),
            })
            .collect(),
    })
}

/// Distances of every sample to the model mean.
pub fn distances_to_model<M: MembershipModel + Sync>(model: &M, samples: &[TimeSeries]) -> Result<Vec<f64>> {
    per_window(samples, |s| model.distance(s))
}

pub fn roc<M: MembershipModel + Sync>(
    model: &M,
    positives: &[TimeSeries],
    negatives: &[TimeSeries],
    ks: &[f64],
) -> Result<RocCurve> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::invalid(
            "ROC needs at least one positive and one negative sample",
        ));
    }
    let pos = distances_to_model(model, positives)?;
    let neg = distances_to_model(model, negatives)?;
    roc_from_distances(model.sigma(), &pos, &neg, ks)
}
