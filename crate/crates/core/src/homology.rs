//! Persistent homology over the two-element field.
//!
//! [`persistence`] pairs simplices by reducing the filtered boundary matrix
//! (standard column reduction with clearing). [`betti_at`] computes Betti
//! numbers of a single sublevel complex by rank–nullity and shares no code
//! with the reduction, so the two can check each other.

use std::io::{self, Write};

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::filtration::{Simplex, WitnessFiltration};

/// One homology class: born at `birth`, dies at `death` (`None` when still
/// alive at the filtration's cap).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePoint {
    pub dim: usize,
    pub birth: f64,
    pub death: Option<f64>,
}

impl PersistencePoint {
    pub fn is_essential(&self) -> bool {
        self.death.is_none()
    }

    /// Born and killed at the same scale.
    pub fn is_zero_persistence(&self) -> bool {
        self.death == Some(self.birth)
    }

    /// Death, with essential classes cut off at `cap`.
    pub fn death_or(&self, cap: f64) -> f64 {
        self.death.unwrap_or(cap)
    }

    /// Lifetime, with essential classes cut off at `cap`.
    pub fn persistence(&self, cap: f64) -> f64 {
        self.death_or(cap) - self.birth
    }

    /// Whether the class exists in the complex at scale `eps`.
    pub fn alive_at(&self, eps: f64) -> bool {
        self.birth <= eps && self.death.map_or(true, |d| eps < d)
    }
}

/// Multiset of persistence points for one filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    points: Vec<PersistencePoint>,
    eps_max: f64,
}

impl PersistenceDiagram {
    pub fn new(points: Vec<PersistencePoint>, eps_max: f64) -> Self {
        Self { points, eps_max }
    }

    pub fn points(&self) -> &[PersistencePoint] {
        &self.points
    }

    pub fn eps_max(&self) -> f64 {
        self.eps_max
    }

    pub fn in_dim(&self, k: usize) -> impl Iterator<Item = &PersistencePoint> + '_ {
        self.points.iter().filter(move |p| p.dim == k)
    }

    /// Number of dimension-`k` classes alive at `eps`.
    pub fn betti_at(&self, eps: f64, k: usize) -> usize {
        self.in_dim(k).filter(|p| p.alive_at(eps)).count()
    }

    /// Lifetimes of the dimension-`k` points, longest first.
    pub fn lifetimes(&self, k: usize) -> Vec<f64> {
        let mut l: Vec<f64> = self.in_dim(k).map(|p| p.persistence(self.eps_max)).collect();
        l.sort_by(|a, b| b.total_cmp(a));
        l
    }

    pub fn without_zero_persistence(&self) -> PersistenceDiagram {
        PersistenceDiagram {
            points: self
                .points
                .iter()
                .filter(|p| !p.is_zero_persistence())
                .copied()
                .collect(),
            eps_max: self.eps_max,
        }
    }

    /// CSV with columns `k,birth,death,essential`. Essential points are
    /// written with `death = eps_max`. Zero-persistence points are skipped
    /// unless `keep_zero`.
    pub fn write_csv<W: Write>(&self, mut out: W, keep_zero: bool) -> io::Result<()> {
        writeln!(out, "k,birth,death,essential")?;
        for p in &self.points {
            if !keep_zero && p.is_zero_persistence() {
                continue;
            }
            writeln!(
                out,
                "{},{},{},{}",
                p.dim,
                p.birth,
                p.death_or(self.eps_max),
                u8::from(p.is_essential())
            )?;
        }
        Ok(())
    }
}

/// Sparse Z/2 column: sorted row indices.
type Column = Vec<usize>;

fn add_into(target: &mut Column, other: &Column) {
    let mut out = Vec::with_capacity(target.len() + other.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() && j < other.len() {
        match target[i].cmp(&other[j]) {
            std::cmp::Ordering::Less => {
                out.push(target[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(other[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&target[i..]);
    out.extend_from_slice(&other[j..]);
    *target = out;
}

/// Persistence pairs in dimensions `0..=max_k`.
///
/// Requires `max_k < f.max_dim()`: deaths of `k`-classes are caused by
/// `(k+1)`-simplices. Zero-persistence pairs are included; use
/// [`PersistenceDiagram::without_zero_persistence`] to drop them.
pub fn persistence(f: &WitnessFiltration, max_k: usize) -> Result<PersistenceDiagram> {
    if max_k >= f.max_dim() {
        return Err(Error::invalid(format!(
            "homology in dimension {max_k} needs simplices of dimension {}, filtration stops at {}",
            max_k + 1,
            f.max_dim()
        )));
    }
    let entries: Vec<_> = f.entries().iter().filter(|e| e.simplex.dim() <= max_k + 1).collect();
    let index: FxHashMap<&Simplex, usize> = entries.iter().enumerate().map(|(i, e)| (&e.simplex, i)).collect();

    let mut columns: Vec<Column> = Vec::with_capacity(entries.len());
    for (j, e) in entries.iter().enumerate() {
        let mut col = Vec::with_capacity(e.simplex.dim() + 1);
        for face in e.simplex.facets() {
            match index.get(&face) {
                Some(&i) if i < j => col.push(i),
                Some(_) => {
                    return Err(Error::Integrity(format!(
                        "face {{{face}}} enters after its coface {{{}}}",
                        e.simplex
                    )))
                }
                None => {
                    return Err(Error::Integrity(format!(
                        "face {{{face}}} of {{{}}} is missing",
                        e.simplex
                    )))
                }
            }
        }
        col.sort_unstable();
        columns.push(col);
    }

    // Reduce from the top dimension down so that every pivot found clears
    // the column of the creator it pairs with.
    let mut pivot_owner: Vec<Option<usize>> = vec![None; entries.len()];
    let mut cleared = vec![false; entries.len()];
    for dim in (1..=max_k + 1).rev() {
        for j in 0..entries.len() {
            if entries[j].simplex.dim() != dim {
                continue;
            }
            if cleared[j] {
                columns[j].clear();
                continue;
            }
            while let Some(&low) = columns[j].last() {
                match pivot_owner[low] {
                    Some(owner) => {
                        let other = std::mem::take(&mut columns[owner]);
                        add_into(&mut columns[j], &other);
                        columns[owner] = other;
                    }
                    None => {
                        pivot_owner[low] = Some(j);
                        cleared[low] = true;
                        break;
                    }
                }
            }
        }
    }

    let mut points = Vec::new();
    for (i, e) in entries.iter().enumerate() {
        let dim = e.simplex.dim();
        if dim > max_k || !columns[i].is_empty() {
            continue;
        }
        let death = pivot_owner[i].map(|j| entries[j].birth);
        points.push(PersistencePoint {
            dim,
            birth: e.birth,
            death,
        });
    }
    Ok(PersistenceDiagram::new(points, f.eps_max()))
}

/// Rank of the `k`-th homology group of `{σ : birth(σ) ≤ eps}`, by
/// rank–nullity on the boundary matrices: `β_k = n_k − rank ∂_k − rank ∂_{k+1}`.
pub fn betti_at(f: &WitnessFiltration, eps: f64, k: usize) -> Result<usize> {
    if k >= f.max_dim() {
        return Err(Error::invalid(format!(
            "β_{k} needs simplices of dimension {}, filtration stops at {}",
            k + 1,
            f.max_dim()
        )));
    }
    if !(0.0..=f.eps_max()).contains(&eps) {
        return Err(Error::invalid(format!("scale {eps} outside [0, {}]", f.eps_max())));
    }
    let complex = f.complex_at(eps);
    let by_dim = |d: usize| -> Vec<&Simplex> { complex.iter().copied().filter(|s| s.dim() == d).collect() };
    let faces_k_minus = if k > 0 { by_dim(k - 1) } else { Vec::new() };
    let cells_k = by_dim(k);
    let cells_k_plus = by_dim(k + 1);

    let rank_k = if k == 0 {
        0
    } else {
        boundary_rank(&faces_k_minus, &cells_k)?
    };
    let rank_k_plus = boundary_rank(&cells_k, &cells_k_plus)?;
    Ok(cells_k.len() - rank_k - rank_k_plus)
}

/// Rank over Z/2 of the boundary map from `cells` to `faces`, by Gaussian
/// elimination on dense bit vectors.
fn boundary_rank(faces: &[&Simplex], cells: &[&Simplex]) -> Result<usize> {
    let row_of: FxHashMap<&Simplex, usize> = faces.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let words = faces.len().div_ceil(64).max(1);
    // basis[p] holds a reduced vector whose highest set bit is p.
    let mut basis: FxHashMap<usize, Vec<u64>> = FxHashMap::default();
    let mut rank = 0;
    for cell in cells {
        let mut v = vec![0u64; words];
        for face in cell.facets() {
            let &r = row_of
                .get(&face)
                .ok_or_else(|| Error::Integrity(format!("face {{{face}}} of {{{cell}}} is missing")))?;
            v[r / 64] ^= 1 << (r % 64);
        }
        while let Some(top) = highest_bit(&v) {
            match basis.get(&top) {
                Some(b) => v.iter_mut().zip(b).for_each(|(x, y)| *x ^= y),
                None => {
                    basis.insert(top, v);
                    rank += 1;
                    break;
                }
            }
        }
    }
    Ok(rank)
}

fn highest_bit(v: &[u64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .rev()
        .find(|(_, &w)| w != 0)
        .map(|(i, &w)| i * 64 + 63 - w.leading_zeros() as usize)
}
