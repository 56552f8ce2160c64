//! Witness-complex filtrations with exact per-simplex birth scales.
//!
//! A witness `w` witnesses a simplex `σ` at scale `ε` when every vertex of
//! `σ` is within `ε` of being the landmark closest to `w`:
//!
//! ```text
//! max_{l ∈ σ} D[l][w] ≤ min_m D[m][w] + ε
//! ```
//!
//! The birth of `σ` is the smallest such `ε` over all witnesses. The closed
//! inequality is used, so a simplex is present *at* its birth value; for
//! generic data this agrees with the strict form everywhere except on a
//! measure-zero set of scales.

mod cech;

use std::cmp::Ordering;
use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::embed::DistanceMatrix;
use crate::error::{Error, Result};

pub use cech::{cech_complex, enclosing_radius, CechComplex};

/// Default top dimension of the simplices kept in a filtration.
pub const DEFAULT_MAX_DIM: usize = 2;

/// Dimension whose first witnessed simplex fixes the scale cap.
pub const DEFAULT_STOP_DIM: usize = 20;

/// A set of landmark indices, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex(SmallVec<[u32; 4]>);

impl Simplex {
    pub fn new(vertices: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut v: SmallVec<[u32; 4]> = vertices.into_iter().collect();
        if v.is_empty() {
            return Err(Error::invalid("a simplex needs at least one vertex"));
        }
        v.sort_unstable();
        if v.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::invalid(format!("repeated vertex in {v:?}")));
        }
        Ok(Simplex(v))
    }

    fn from_sorted(v: SmallVec<[u32; 4]>) -> Self {
        debug_assert!(v.windows(2).all(|p| p[0] < p[1]));
        Simplex(v)
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-one faces, in the order obtained by dropping vertex 0, 1, ...
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = if self.0.len() > 1 { self.0.len() } else { 0 };
        (0..n).map(move |skip| {
            Simplex(
                self.0
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect(),
            )
        })
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// A simplex together with the scale at which it enters the filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSimplex {
    pub simplex: Simplex,
    pub birth: f64,
}

/// Filtration order: birth, then dimension, then vertices lexicographically.
/// Faces sort before cofaces of equal birth through the dimension key.
pub fn filtration_order(a: &FilteredSimplex, b: &FilteredSimplex) -> Ordering {
    a.birth
        .total_cmp(&b.birth)
        .then(a.simplex.dim().cmp(&b.simplex.dim()))
        .then_with(|| a.simplex.cmp(&b.simplex))
}

/// Face-closed list of simplices over landmarks, each tagged with its birth.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessFiltration {
    entries: Vec<FilteredSimplex>,
    eps_max: f64,
    max_dim: usize,
}

impl WitnessFiltration {
    /// Wraps arbitrary entries, sorting them into filtration order. No
    /// structural validation happens here; [`crate::homology::persistence`]
    /// rejects inputs that are not face-closed with monotone births.
    pub fn from_entries(mut entries: Vec<FilteredSimplex>, eps_max: f64, max_dim: usize) -> Self {
        entries.sort_by(filtration_order);
        Self {
            entries,
            eps_max,
            max_dim,
        }
    }

    pub fn entries(&self) -> &[FilteredSimplex] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn eps_max(&self) -> f64 {
        self.eps_max
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// Number of landmarks (0-simplices).
    pub fn vertex_count(&self) -> usize {
        self.entries.iter().filter(|e| e.simplex.dim() == 0).count()
    }

    /// The complex at a single scale: every simplex born at or before `eps`.
    pub fn complex_at(&self, eps: f64) -> Vec<&Simplex> {
        let end = self.entries.partition_point(|e| e.birth <= eps);
        self.entries[..end].iter().map(|e| &e.simplex).collect()
    }

    /// Simplex counts per dimension at scale `eps`.
    pub fn counts_at(&self, eps: f64) -> Vec<usize> {
        let mut counts = vec![0; self.max_dim + 1];
        for s in self.complex_at(eps) {
            counts[s.dim()] += 1;
        }
        counts
    }

    /// CSV with columns `dim,vertices,birth`, in filtration order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "dim,vertices,birth")?;
        for e in &self.entries {
            writeln!(out, "{},{},{}", e.simplex.dim(), e.simplex, e.birth)?;
        }
        Ok(())
    }
}

/// `steps` evenly spaced scales in `(0, eps_max]`.
pub fn epsilon_grid(eps_max: f64, steps: usize) -> Vec<f64> {
    (1..=steps)
        .map(|i| {
            if i == steps {
                eps_max
            } else {
                eps_max * i as f64 / steps as f64
            }
        })
        .collect()
}

fn nearest(column: &[f64]) -> f64 {
    column.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Smallest scale at which some witness witnesses `simplex`.
pub fn simplex_birth(simplex: &Simplex, d: &DistanceMatrix) -> f64 {
    d.columns()
        .map(|col| {
            let far = simplex
                .vertices()
                .iter()
                .map(|&l| col[l as usize])
                .fold(f64::NEG_INFINITY, f64::max);
            far - nearest(col)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Builds every simplex of dimension at most `max_dim` whose birth is at most
/// `eps_max`, tagged with its exact birth.
///
/// Candidates are generated per witness: the landmarks within `eps_max` of
/// the witness's nearest landmark, ranked by excess distance, span every
/// simplex that witness can certify, and each such simplex's value for that
/// witness is the excess of its farthest vertex. Births are the minimum
/// over witnesses.
pub fn build_filtration(d: &DistanceMatrix, max_dim: usize, eps_max: f64) -> Result<WitnessFiltration> {
    if max_dim < 1 {
        return Err(Error::invalid("max_dim must be at least 1"));
    }
    if d.landmarks() < max_dim + 1 {
        return Err(Error::invalid(format!(
            "{} landmarks cannot span a {max_dim}-simplex",
            d.landmarks()
        )));
    }
    if !eps_max.is_finite() || eps_max < 0.0 {
        return Err(Error::invalid(format!(
            "eps_max must be finite and nonnegative, got {eps_max}"
        )));
    }
    if eps_max == 0.0 {
        return Err(Error::Degenerate(
            "eps_max is 0; the filtration would contain only isolated vertices".into(),
        ));
    }

    let radix = d.landmarks() as u64 + 1;
    let packable = (max_dim as u32 + 1)
        .checked_mul(64 - radix.leading_zeros())
        .is_some_and(|bits| bits <= 63);
    let entries: Vec<FilteredSimplex> = if packable {
        packed_births(d, max_dim, eps_max, radix)
            .into_iter()
            .map(|(k, birth)| FilteredSimplex {
                simplex: Simplex::from_sorted(unpack(k, radix)),
                birth,
            })
            .collect()
    } else {
        wide_births(d, max_dim, eps_max)
            .into_iter()
            .map(|(v, birth)| FilteredSimplex {
                simplex: Simplex::from_sorted(v),
                birth,
            })
            .collect()
    };
    Ok(WitnessFiltration::from_entries(entries, eps_max, max_dim))
}

/// Inverse of the packing in `packed_births`: digits `v + 1` in base `radix`.
fn unpack(mut key: u64, radix: u64) -> SmallVec<[u32; 4]> {
    let mut v = SmallVec::new();
    while key > 0 {
        v.push((key % radix - 1) as u32);
        key /= radix;
    }
    v.reverse();
    v
}

type Births<K> = FxHashMap<K, f64>;

fn keep_min<K: std::hash::Hash + Eq>(acc: &mut Births<K>, key: K, value: f64) {
    acc.entry(key).and_modify(|cur| *cur = cur.min(value)).or_insert(value);
}

/// Births keyed by packed vertex lists; the key grows one digit per level.
fn packed_births(d: &DistanceMatrix, max_dim: usize, eps_max: f64, radix: u64) -> Births<u64> {
    fn extend(pool: &[(u32, f64)], levels: usize, key: u64, value: f64, radix: u64, acc: &mut Births<u64>) {
        for (i, &(v, excess)) in pool.iter().enumerate() {
            let key = key * radix + u64::from(v) + 1;
            let value = value.max(excess);
            keep_min(acc, key, value);
            if levels > 1 {
                extend(&pool[i + 1..], levels - 1, key, value, radix, acc);
            }
        }
    }
    fold_witnesses(d, eps_max, |pool, acc| extend(pool, max_dim + 1, 0, 0.0, radix, acc))
}

/// Births keyed by explicit vertex lists, for landmark counts too large to pack.
fn wide_births(d: &DistanceMatrix, max_dim: usize, eps_max: f64) -> Births<SmallVec<[u32; 4]>> {
    fn extend(
        pool: &[(u32, f64)],
        max_len: usize,
        value: f64,
        chosen: &mut SmallVec<[u32; 4]>,
        acc: &mut Births<SmallVec<[u32; 4]>>,
    ) {
        for (i, &(v, excess)) in pool.iter().enumerate() {
            let value = value.max(excess);
            chosen.push(v);
            keep_min(acc, chosen.clone(), value);
            if chosen.len() < max_len {
                extend(&pool[i + 1..], max_len, value, chosen, acc);
            }
            chosen.pop();
        }
    }
    fold_witnesses(d, eps_max, |pool, acc| {
        extend(pool, max_dim + 1, 0.0, &mut SmallVec::new(), acc)
    })
}

/// Runs `visit` on each witness's candidate pool: the landmarks whose
/// distance exceeds the witness's nearest by at most `eps_max`, in vertex
/// order, paired with that excess. Witnesses are split into one block per
/// thread; block maps merge by minimum.
fn fold_witnesses<K, F>(d: &DistanceMatrix, eps_max: f64, visit: F) -> Births<K>
where
    K: std::hash::Hash + Eq + Send,
    F: Fn(&[(u32, f64)], &mut Births<K>) + Sync,
{
    let n = d.witnesses();
    let block = n.div_ceil(rayon::current_num_threads()).max(1);
    (0..n.div_ceil(block))
        .into_par_iter()
        .map(|b| {
            let mut acc = Births::default();
            let mut pool = Vec::new();
            for w in b * block..((b + 1) * block).min(n) {
                let column = d.column(w);
                let near = nearest(column);
                pool.clear();
                pool.extend(
                    column
                        .iter()
                        .enumerate()
                        .map(|(l, &dist)| (l as u32, dist - near))
                        .filter(|&(_, excess)| excess <= eps_max),
                );
                visit(&pool, &mut acc);
            }
            acc
        })
        .reduce(Births::default, merge_min)
}

fn merge_min<K: std::hash::Hash + Eq>(mut a: Births<K>, b: Births<K>) -> Births<K> {
    if a.len() < b.len() {
        return merge_min(b, a);
    }
    for (k, v) in b {
        keep_min(&mut a, k, v);
    }
    a
}

/// First scale at which some witness witnesses a `stop_dim`-simplex:
/// `min_w (d₍stop_dim+1₎(w) − d₍₁₎(w))` with `d₍ᵢ₎(w)` the i-th smallest
/// landmark distance from `w`.
///
/// With `stop_dim` or fewer landmarks the rule cannot fire, and the landmark
/// diameter is returned instead.
pub fn epsilon_max_rule(d: &DistanceMatrix, stop_dim: usize) -> f64 {
    if d.landmarks() <= stop_dim {
        return d.landmark_diameter();
    }
    d.columns()
        .map(|col| {
            let mut sorted = col.to_vec();
            let (_, kth, _) = sorted.select_nth_unstable_by(stop_dim, f64::total_cmp);
            *kth - nearest(col)
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{distances, LandmarkSet, PointCloud};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn simplex(v: &[u32]) -> Simplex {
        Simplex::new(v.iter().copied()).unwrap()
    }

    /// Landmarks (0,0), (1,0), (0,1) plus a lone extra witness at (0.4, 0).
    fn three_landmarks() -> DistanceMatrix {
        let cloud = PointCloud::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.4, 0.0]]).unwrap();
        distances(&cloud, &LandmarkSet::new(vec![0, 1, 2], 4).unwrap()).unwrap()
    }

    /// Smallest grid scale at which a witness certifies `s`, read off the
    /// closed witness relation directly.
    fn grid_birth(s: &Simplex, d: &DistanceMatrix, step: f64) -> f64 {
        let mut k = 0usize;
        loop {
            let eps = k as f64 * step;
            let hit = (0..d.witnesses()).any(|w| {
                let col = d.column(w);
                let min = col.iter().copied().fold(f64::INFINITY, f64::min);
                s.vertices().iter().all(|&l| col[l as usize] <= min + eps)
            });
            if hit {
                return eps;
            }
            k += 1;
        }
    }

    #[test]
    fn simplex_basics() {
        let s = simplex(&[3, 1, 2]);
        assert_eq!(s.vertices(), &[1, 2, 3]);
        assert_eq!(s.dim(), 2);
        let facets: Vec<Simplex> = s.facets().collect();
        assert_eq!(facets, vec![simplex(&[2, 3]), simplex(&[1, 3]), simplex(&[1, 2])]);
        assert_eq!(simplex(&[4]).facets().count(), 0);
        assert!(Simplex::new([1, 1]).is_err());
        assert_eq!(s.to_string(), "1 2 3");
    }

    #[test]
    fn hand_computed_births() {
        let d = three_landmarks();
        for l in 0..3 {
            assert_eq!(simplex_birth(&simplex(&[l]), &d), 0.0);
        }
        let edge = simplex_birth(&simplex(&[0, 1]), &d);
        assert!((edge - 0.2).abs() < 1e-12);
        let tri = simplex_birth(&simplex(&[0, 1, 2]), &d);
        assert!((tri - (1.16f64.sqrt() - 0.4)).abs() < 1e-12);

        let step = 1e-4;
        for s in [
            simplex(&[0, 1]),
            simplex(&[0, 2]),
            simplex(&[1, 2]),
            simplex(&[0, 1, 2]),
        ] {
            let exact = simplex_birth(&s, &d);
            let grid = grid_birth(&s, &d, step);
            assert!(
                grid >= exact - 1e-12 && grid - exact < step + 1e-12,
                "{s}: {exact} vs {grid}"
            );
        }
    }

    #[test]
    fn three_landmark_filtration() {
        let d = three_landmarks();
        let f = build_filtration(&d, 2, 1.0).unwrap();
        let got: Vec<(Vec<u32>, f64)> = f
            .entries()
            .iter()
            .map(|e| (e.simplex.vertices().to_vec(), e.birth))
            .collect();

        // Exhaustive: every nonempty subset of {0,1,2}, minimized over all four witnesses.
        let mut expected = Vec::new();
        for mask in 1u32..8 {
            let verts: Vec<u32> = (0..3).filter(|b| mask & (1 << b) != 0).collect();
            let mut best = f64::INFINITY;
            for w in 0..d.witnesses() {
                let col = d.column(w);
                let min = col.iter().copied().fold(f64::INFINITY, f64::min);
                let far = verts.iter().map(|&l| col[l as usize]).fold(0.0, f64::max);
                best = best.min(far - min);
            }
            if best <= 1.0 {
                expected.push((verts, best));
            }
        }
        expected.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.len().cmp(&b.0.len())).then(a.0.cmp(&b.0)));
        assert_eq!(got, expected);
        assert_eq!(f.len(), 7);
        assert!((got[3].1 - 0.2).abs() < 1e-12 && got[3].0 == vec![0, 1]);
    }

    #[test]
    fn vertices_only_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.random(), rng.random()]).collect();
        let cloud = PointCloud::from_points(&pts).unwrap();
        let lm = LandmarkSet::new((0..10).map(|i| i * 4).collect(), 40).unwrap();
        let d = distances(&cloud, &lm).unwrap();
        let f = build_filtration(&d, 2, 0.5).unwrap();
        assert_eq!(f.counts_at(0.0), vec![10, 0, 0]);
    }

    #[test]
    fn build_rejects_bad_arguments() {
        let d = three_landmarks();
        assert!(matches!(build_filtration(&d, 0, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_filtration(&d, 3, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_filtration(&d, 2, 0.0), Err(Error::Degenerate(_))));
        assert!(build_filtration(&d, 2, f64::NAN).is_err());
    }

    #[test]
    fn eps_rule_degenerate_equidistant_witness() {
        // 21 landmarks on a circle; the centre witness is equidistant to all.
        let mut pts: Vec<Vec<f64>> = (0..21)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / 21.0;
                vec![3.0 + 2.0 * a.cos(), 3.0 + 2.0 * a.sin()]
            })
            .collect();
        pts.push(vec![3.0, 3.0]);
        let cloud = PointCloud::from_points(&pts).unwrap();
        let d = distances(&cloud, &LandmarkSet::new((0..21).collect(), 22).unwrap()).unwrap();
        assert!(epsilon_max_rule(&d, 20).abs() < 1e-12);
    }

    #[test]
    fn eps_rule_fallback_is_diameter() {
        let d = three_landmarks();
        assert_eq!(epsilon_max_rule(&d, 20), 2f64.sqrt());
        assert_eq!(epsilon_max_rule(&d, 3), 2f64.sqrt());
    }

    #[test]
    fn eps_rule_matches_grid_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<Vec<f64>> = (0..120)
            .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let cloud = PointCloud::from_points(&pts).unwrap();
        let d = distances(
            &cloud,
            &LandmarkSet::new((0..30).map(|i| 4 * i).collect(), 120).unwrap(),
        )
        .unwrap();
        let rule = epsilon_max_rule(&d, 20);

        // First grid scale at which any witness has 21 landmarks within ε of its nearest.
        let step = 1e-4;
        let mut k = 0usize;
        let first = loop {
            let eps = k as f64 * step;
            let fired = (0..d.witnesses()).any(|w| {
                let col = d.column(w);
                let min = col.iter().copied().fold(f64::INFINITY, f64::min);
                col.iter().filter(|&&x| x <= min + eps).count() >= 21
            });
            if fired {
                break eps;
            }
            k += 1;
        };
        assert!(
            first >= rule - 1e-12 && first - rule <= step + 1e-12,
            "{rule} vs {first}"
        );
    }

    fn pack(vertices: &[u32], radix: u64) -> u64 {
        vertices.iter().fold(0, |k, &v| k * radix + u64::from(v) + 1)
    }

    #[test]
    fn packed_and_wide_keys_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<Vec<f64>> = (0..60).map(|_| vec![rng.random(), rng.random()]).collect();
        let cloud = PointCloud::from_points(&pts).unwrap();
        let d = distances(&cloud, &crate::embed::select_landmarks(&cloud, 15).unwrap()).unwrap();
        let radix = 16;
        let packed = packed_births(&d, 3, 0.3, radix);
        let wide = wide_births(&d, 3, 0.3);
        assert_eq!(packed.len(), wide.len());
        for (k, b) in &packed {
            assert_eq!(wide[&unpack(*k, radix)], *b);
        }
        assert_eq!(unpack(pack(&[0, 7, 14], radix), radix).as_slice(), &[0, 7, 14]);
    }

    proptest! {
        #[test]
        fn births_are_monotone_and_face_closed(seed in 0u64..500, n in 6usize..30, max_dim in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random(), rng.random(), rng.random()]).collect();
            let cloud = PointCloud::from_points(&pts).unwrap();
            let l = (n / 2).max(max_dim + 1);
            let d = distances(&cloud, &crate::embed::select_landmarks(&cloud, l).unwrap()).unwrap();
            let eps_max = rng.random_range(0.05..1.0);
            let f = build_filtration(&d, max_dim, eps_max).unwrap();
            let index: FxHashMap<&Simplex, f64> = f.entries().iter().map(|e| (&e.simplex, e.birth)).collect();
            for e in f.entries() {
                prop_assert!(e.birth <= eps_max);
                prop_assert!(e.simplex.dim() <= max_dim);
                prop_assert_eq!(e.birth, simplex_birth(&e.simplex, &d));
                for face in e.simplex.facets() {
                    let fb = index.get(&face).copied();
                    prop_assert!(fb.is_some(), "missing face {}", face);
                    prop_assert!(fb.unwrap() <= e.birth);
                }
            }
            // Nesting of the sublevel complexes.
            let grid = epsilon_grid(eps_max, 7);
            for pair in grid.windows(2) {
                let lo: Vec<_> = f.complex_at(pair[0]);
                let hi: rustc_hash::FxHashSet<_> = f.complex_at(pair[1]).into_iter().collect();
                prop_assert!(lo.iter().all(|s| hi.contains(s)));
            }
        }
    }
}
