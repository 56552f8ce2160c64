//! Čech complex at a single scale, up to triangles. Used as the dense
//! reference the witness complex is compared against.

use rayon::prelude::*;

use crate::embed::{euclidean, PointCloud};
use crate::error::{Error, Result};

/// Čech complex on every point of a cloud: vertices, edges and triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct CechComplex {
    pub vertices: usize,
    pub edges: Vec<[u32; 2]>,
    pub triangles: Vec<[u32; 3]>,
    pub eps: f64,
}

impl CechComplex {
    pub fn simplex_count(&self) -> usize {
        self.vertices + self.edges.len() + self.triangles.len()
    }
}

/// Radius of the smallest ball containing three points with the given
/// pairwise distances.
///
/// For a right or obtuse triangle this is half the longest side; otherwise
/// it is the circumradius.
pub fn enclosing_radius(ab: f64, bc: f64, ca: f64) -> f64 {
    let mut s = [ab, bc, ca];
    s.sort_by(f64::total_cmp);
    let [a, b, c] = s;
    if a * a + b * b <= c * c {
        return c / 2.0;
    }
    let denom = (a + b + c) * (-a + b + c) * (a - b + c) * (a + b - c);
    a * b * c / denom.sqrt()
}

/// Edge `{i,j}` iff `|x_i − x_j| ≤ ε`; triangle iff the smallest ball
/// enclosing its three points has radius `≤ ε/2` (the three `ε/2`-balls
/// then share a point).
pub fn cech_complex(cloud: &PointCloud, eps: f64, max_dim: usize) -> Result<CechComplex> {
    if max_dim > 2 {
        return Err(Error::Unsupported(format!(
            "Čech reference complex stops at triangles, asked for dimension {max_dim}"
        )));
    }
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::invalid(format!("scale must be nonnegative, got {eps}")));
    }
    let n = cloud.len();

    // Upper neighbours of each vertex, sorted, with distances.
    let neighbours: Vec<Vec<(u32, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = cloud.point(i);
            (i + 1..n)
                .filter_map(|j| {
                    let d = euclidean(p, cloud.point(j));
                    (d <= eps).then_some((j as u32, d))
                })
                .collect()
        })
        .collect();

    let edges: Vec<[u32; 2]> = if max_dim >= 1 {
        neighbours
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().map(move |&(j, _)| [i as u32, j]))
            .collect()
    } else {
        Vec::new()
    };

    let half = eps / 2.0;
    let triangles: Vec<[u32; 3]> = if max_dim >= 2 {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let nb = &neighbours[i];
                let mut found = Vec::new();
                for (a, &(j, dij)) in nb.iter().enumerate() {
                    let nj = &neighbours[j as usize];
                    for &(k, dik) in &nb[a + 1..] {
                        if let Ok(pos) = nj.binary_search_by(|probe| probe.0.cmp(&k)) {
                            let djk = nj[pos].1;
                            if enclosing_radius(dij, djk, dik) <= half {
                                found.push([i as u32, j, k]);
                            }
                        }
                    }
                }
                found
            })
            .flatten()
            .collect()
    } else {
        Vec::new()
    };

    Ok(CechComplex {
        vertices: n,
        edges,
        triangles,
        eps,
    })
}
