//! Persistent rank functions on a regular grid and the L² geometry used by
//! the membership classifier.
//!
//! The rank function of a diagram at `a ≤ b` is the number of classes born
//! by `a` and still alive past `b`: the rank of the map on homology induced
//! by including the scale-`a` complex into the scale-`b` complex.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::homology::PersistenceDiagram;

/// Default grid resolution.
pub const DEFAULT_RESOLUTION: usize = 64;

/// Rank function sampled at `(aᵢ, bⱼ) = (i·h, j·h)`, `h = eps_max / G`,
/// for `0 ≤ i, j < G`. Cells with `i > j` are outside the domain and hold 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PrfGrid {
    resolution: usize,
    eps_max: f64,
    values: Vec<f64>,
}

impl PrfGrid {
    pub fn zeros(resolution: usize, eps_max: f64) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::invalid(format!(
                "grid resolution must be at least 2, got {resolution}"
            )));
        }
        if !(eps_max.is_finite() && eps_max > 0.0) {
            return Err(Error::invalid(format!("grid extent must be positive, got {eps_max}")));
        }
        Ok(Self {
            resolution,
            eps_max,
            values: vec![0.0; resolution * resolution],
        })
    }

    /// Builds a grid from a function of the cell indices; cells below the
    /// diagonal are forced to 0.
    pub fn from_fn(resolution: usize, eps_max: f64, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut g = Self::zeros(resolution, eps_max)?;
        for i in 0..resolution {
            for j in i..resolution {
                g.values[i * resolution + j] = f(i, j);
            }
        }
        Ok(g)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn eps_max(&self) -> f64 {
        self.eps_max
    }

    /// Grid spacing.
    pub fn step(&self) -> f64 {
        self.eps_max / self.resolution as f64
    }

    /// Scale of grid index `i`.
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.eps_max / self.resolution as f64
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.resolution + j]
    }

    /// Row-major values, `values()[i * G + j] = value(i, j)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn check_compatible(&self, other: &PrfGrid) -> Result<()> {
        if self.resolution != other.resolution || self.eps_max != other.eps_max {
            return Err(Error::invalid(format!(
                "grids differ: {}×{} over {} vs {}×{} over {}",
                self.resolution, self.resolution, self.eps_max, other.resolution, other.resolution, other.eps_max
            )));
        }
        Ok(())
    }

    /// CSV of `a,b,value` for every cell, row-major.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "a,b,value")?;
        for i in 0..self.resolution {
            for j in 0..self.resolution {
                writeln!(out, "{},{},{}", self.coord(i), self.coord(j), self.value(i, j))?;
            }
        }
        Ok(())
    }
}

/// Rank function of the dimension-`k` points of `diagram` on a `G × G` grid
/// spanning `[0, eps_max)` of the diagram. Essential points never die.
pub fn prf(diagram: &PersistenceDiagram, k: usize, resolution: usize) -> Result<PrfGrid> {
    let mut grid = PrfGrid::zeros(resolution, diagram.eps_max())?;
    let points: Vec<_> = diagram.in_dim(k).collect();
    for i in 0..resolution {
        let a = grid.coord(i);
        for j in i..resolution {
            let b = grid.coord(j);
            grid.values[i * resolution + j] = points
                .iter()
                .filter(|p| p.birth <= a && p.death.map_or(true, |d| d > b))
                .count() as f64;
        }
    }
    Ok(grid)
}

/// L² distance over the half-plane `a ≤ b`. Each cell is weighted by the
/// area of its intersection with the domain: `h²` off the diagonal and
/// `h²/2` on it, so a constant function integrates exactly.
pub fn l2_distance(f: &PrfGrid, g: &PrfGrid) -> Result<f64> {
    f.check_compatible(g)?;
    let n = f.resolution;
    let h2 = f.step() * f.step();
    let mut sum = 0.0;
    for i in 0..n {
        for j in i..n {
            let diff = f.value(i, j) - g.value(i, j);
            let weight = if i == j { 0.5 } else { 1.0 };
            sum += weight * diff * diff;
        }
    }
    Ok((sum * h2).sqrt())
}

/// Pointwise mean of compatible grids.
pub fn mean_prf(grids: &[PrfGrid]) -> Result<PrfGrid> {
    let first = grids
        .first()
        .ok_or_else(|| Error::invalid("mean of an empty set of rank functions"))?;
    let mut mean = PrfGrid::zeros(first.resolution, first.eps_max)?;
    for g in grids {
        first.check_compatible(g)?;
        for (m, v) in mean.values.iter_mut().zip(&g.values) {
            *m += v;
        }
    }
    let n = grids.len() as f64;
    mean.values.iter_mut().for_each(|m| *m /= n);
    Ok(mean)
}

/// Population standard deviation of the L² distances from each grid to `mean`.
pub fn sigma(grids: &[PrfGrid], mean: &PrfGrid) -> Result<f64> {
    if grids.len() < 2 {
        return Err(Error::invalid(format!(
            "spread needs at least 2 rank functions, got {}",
            grids.len()
        )));
    }
    let dists = grids
        .iter()
        .map(|g| l2_distance(g, mean))
        .collect::<Result<Vec<f64>>>()?;
    Ok(population_std(&dists))
}

pub(crate) fn population_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt()
}
