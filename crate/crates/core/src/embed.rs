//! Delay-coordinate reconstruction, landmark selection and the
//! landmark-to-witness distance matrix.

use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::TimeSeries;

/// Delay `tau` (in samples) and reconstruction dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelayParams {
    pub tau: usize,
    pub dim: usize,
}

impl DelayParams {
    pub fn new(tau: usize, dim: usize) -> Result<Self> {
        if tau < 1 {
            return Err(Error::invalid("delay tau must be at least 1 sample"));
        }
        if dim < 2 {
            return Err(Error::invalid(format!(
                "reconstruction dimension must be at least 2, got {dim}"
            )));
        }
        Ok(Self { tau, dim })
    }

    /// Samples consumed by the delay window: `(dim - 1) * tau`.
    pub fn span(&self) -> usize {
        (self.dim - 1) * self.tau
    }
}

/// Time-ordered reconstructed states, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    first_time: usize,
}

impl PointCloud {
    /// Builds a cloud from explicit points, with source times `0, 1, …`.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::invalid("points have unequal dimension"));
        }
        Ok(Self {
            dim,
            coords: points.iter().flatten().copied().collect(),
            first_time: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim.max(1))
    }

    /// Index in the source series of point `i`.
    pub fn source_time(&self, i: usize) -> usize {
        self.first_time + i
    }

    /// Keeps only the first `n` points.
    pub fn truncated(&self, n: usize) -> PointCloud {
        let n = n.min(self.len());
        PointCloud {
            dim: self.dim,
            coords: self.coords[..n * self.dim].to_vec(),
            first_time: self.first_time,
        }
    }

    /// One row per point: `t,x0,x1,...`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "t")?;
        for c in 0..self.dim {
            write!(out, ",x{c}")?;
        }
        writeln!(out)?;
        for (i, p) in self.points().enumerate() {
            write!(out, "{}", self.source_time(i))?;
            for v in p {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

impl PointCloud {
    /// Reads points from CSV, one per row. A non-numeric first row is a
    /// header; when it names a leading `t` column, that column is dropped.
    /// A header-only file gives an empty cloud.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<PointCloud> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut rows = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .peekable();
        let mut skip = 0;
        let mut dim = None;
        if let Some((_, first)) = rows.peek() {
            let fields: Vec<&str> = first.split(',').map(str::trim).collect();
            if fields.iter().any(|f| f.parse::<f64>().is_err()) {
                skip = usize::from(fields[0] == "t");
                dim = Some(fields.len() - skip);
                rows.next();
            }
        }
        let mut coords = Vec::new();
        let mut first_time = None;
        for (idx, line) in rows {
            let values = line
                .split(',')
                .map(|f| match f.trim().parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(Error::Parse {
                        line: idx + 1,
                        message: format!("expected a real number, found {:?}", f.trim()),
                    }),
                })
                .collect::<Result<Vec<f64>>>()?;
            let d = *dim.get_or_insert(values.len() - skip);
            if values.len() != d + skip {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected {} fields, found {}", d + skip, values.len()),
                });
            }
            if skip == 1 && first_time.is_none() {
                first_time = Some(values[0] as usize);
            }
            coords.extend_from_slice(&values[skip..]);
        }
        Ok(PointCloud {
            dim: dim.unwrap_or(0),
            coords,
            first_time: first_time.unwrap_or(0),
        })
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Delay reconstruction: point `t` is `(x_t, x_{t-tau}, ..., x_{t-(dim-1)tau})`
/// for `t` from `(dim-1)·tau` to `N-1`.
pub fn delay_embed(ts: &TimeSeries, params: DelayParams) -> Result<PointCloud> {
    let x = ts.samples();
    let span = params.span();
    if x.len() < span + 1 {
        return Err(Error::InsufficientData {
            what: format!("delay reconstruction with tau={} dim={}", params.tau, params.dim),
            required: span + 1,
            available: x.len(),
        });
    }
    let n = x.len() - span;
    let mut coords = Vec::with_capacity(n * params.dim);
    for t in span..x.len() {
        coords.extend((0..params.dim).map(|j| x[t - j * params.tau]));
    }
    Ok(PointCloud {
        dim: params.dim,
        coords,
        first_time: span,
    })
}

/// Delay of `1/(f·π)` seconds expressed in whole samples, at least 1.
///
/// The continuous delay is rounded to the nearest sample, so the effective
/// delay differs from `1/(f·π)` by up to half a sample period.
pub fn suggest_tau(rate: f64, freq: f64) -> Result<usize> {
    if !(rate > 0.0 && freq > 0.0 && rate.is_finite() && freq.is_finite()) {
        return Err(Error::invalid(format!(
            "rate and frequency must be positive, got {rate} and {freq}"
        )));
    }
    Ok(((rate / (freq * PI)).round() as usize).max(1))
}

/// Indices (into a point cloud) of the complex vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LandmarkSet {
    indices: Vec<usize>,
}

impl LandmarkSet {
    pub fn new(mut indices: Vec<usize>, cloud_len: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() {
            return Err(Error::invalid("landmark set is empty"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= cloud_len) {
            return Err(Error::invalid(format!(
                "landmark index {bad} outside a cloud of {cloud_len} points"
            )));
        }
        Ok(Self { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// How landmarks are chosen from the witness cloud.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LandmarkStrategy {
    /// Evenly spaced in time order.
    #[default]
    EvenTime,
    /// Greedy farthest-point sampling seeded with the first point.
    MaxMin,
}

impl std::str::FromStr for LandmarkStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" | "even-time" => Ok(Self::EvenTime),
            "maxmin" | "max-min" => Ok(Self::MaxMin),
            other => Err(Error::invalid(format!("unknown landmark strategy {other:?}"))),
        }
    }
}

impl std::fmt::Display for LandmarkStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::EvenTime => "even",
            Self::MaxMin => "maxmin",
        })
    }
}

/// Landmarks at indices `⌊k·n/ℓ⌋`, `k = 0..ℓ`.
pub fn select_landmarks(cloud: &PointCloud, count: usize) -> Result<LandmarkSet> {
    let n = cloud.len();
    check_landmark_count(count, n)?;
    Ok(LandmarkSet {
        indices: (0..count).map(|k| k * n / count).collect(),
    })
}

pub fn select_landmarks_with(cloud: &PointCloud, count: usize, strategy: LandmarkStrategy) -> Result<LandmarkSet> {
    match strategy {
        LandmarkStrategy::EvenTime => select_landmarks(cloud, count),
        LandmarkStrategy::MaxMin => select_landmarks_maxmin(cloud, count),
    }
}

/// Farthest-point sampling: repeatedly adds the point farthest from the
/// current landmarks (lowest index wins ties).
pub fn select_landmarks_maxmin(cloud: &PointCloud, count: usize) -> Result<LandmarkSet> {
    let n = cloud.len();
    check_landmark_count(count, n)?;
    let mut chosen = vec![0usize];
    let mut nearest: Vec<f64> = cloud.points().map(|p| euclidean(p, cloud.point(0))).collect();
    while chosen.len() < count {
        let (next, _) = nearest.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |best, (i, &d)| {
                if d > best.1 {
                    (i, d)
                } else {
                    best
                }
            },
        );
        chosen.push(next);
        let anchor = cloud.point(next);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(euclidean(cloud.point(i), anchor));
        }
    }
    LandmarkSet::new(chosen, n)
}

fn check_landmark_count(count: usize, n: usize) -> Result<()> {
    if count == 0 || count > n {
        return Err(Error::invalid(format!(
            "cannot choose {count} landmarks from {n} points"
        )));
    }
    Ok(())
}

/// Euclidean distances from every landmark to every witness.
///
/// Stored witness-major, so `column(w)` (all landmark distances of one
/// witness) is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    landmarks: usize,
    witnesses: usize,
    data: Vec<f64>,
    landmark_witness: Vec<usize>,
}

impl DistanceMatrix {
    pub fn landmarks(&self) -> usize {
        self.landmarks
    }

    pub fn witnesses(&self) -> usize {
        self.witnesses
    }

    /// Distance from landmark `l` to witness `w`.
    pub fn get(&self, l: usize, w: usize) -> f64 {
        self.data[w * self.landmarks + l]
    }

    /// Distances from witness `w` to each landmark.
    pub fn column(&self, w: usize) -> &[f64] {
        &self.data[w * self.landmarks..(w + 1) * self.landmarks]
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.landmarks)
    }

    /// Witness index at which landmark `l` sits.
    pub fn landmark_witness(&self, l: usize) -> usize {
        self.landmark_witness[l]
    }

    /// Largest distance between two landmarks.
    pub fn landmark_diameter(&self) -> f64 {
        let mut diam = 0.0f64;
        for &w in &self.landmark_witness {
            for &d in self.column(w) {
                diam = diam.max(d);
            }
        }
        diam
    }

    /// One row per landmark: `landmark,witness_index,d_0,...,d_{N-1}`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "landmark,witness")?;
        for w in 0..self.witnesses {
            write!(out, ",w{w}")?;
        }
        writeln!(out)?;
        for l in 0..self.landmarks {
            write!(out, "{l},{}", self.landmark_witness[l])?;
            for w in 0..self.witnesses {
                write!(out, ",{}", self.get(l, w))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Computes the ℓ × N_w landmark–witness distance matrix.
pub fn distances(cloud: &PointCloud, landmarks: &LandmarkSet) -> Result<DistanceMatrix> {
    if let Some(&bad) = landmarks.indices().iter().find(|&&i| i >= cloud.len()) {
        return Err(Error::invalid(format!(
            "landmark index {bad} outside a cloud of {} points",
            cloud.len()
        )));
    }
    let l = landmarks.len();
    let anchors: Vec<&[f64]> = landmarks.indices().iter().map(|&i| cloud.point(i)).collect();
    let mut data = vec![0.0; l * cloud.len()];
    data.par_chunks_mut(l.max(1)).enumerate().for_each(|(w, col)| {
        let p = cloud.point(w);
        for (d, a) in col.iter_mut().zip(&anchors) {
            *d = euclidean(a, p);
        }
    });
    Ok(DistanceMatrix {
        landmarks: l,
        witnesses: cloud.len(),
        data,
        landmark_witness: landmarks.indices().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ts(samples: Vec<f64>) -> TimeSeries {
        TimeSeries::new(samples, 1.0).unwrap()
    }

    #[test]
    fn cloud_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let series = ts((0..40).map(|i| (i as f64 * 0.3).sin()).collect());
        let cloud = delay_embed(&series, DelayParams::new(3, 3).unwrap()).unwrap();
        let path = dir.path().join("cloud.csv");
        let mut buf = Vec::new();
        cloud.write_csv(&mut buf).unwrap();
        fs::write(&path, &buf).unwrap();
        assert_eq!(PointCloud::read_csv(&path).unwrap(), cloud);

        fs::write(&path, "t,x0,x1\n").unwrap();
        let empty = PointCloud::read_csv(&path).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.dim(), 2);

        fs::write(&path, "0.5,1\n2,3\n").unwrap();
        assert_eq!(PointCloud::read_csv(&path).unwrap().point(1), &[2.0, 3.0]);

        fs::write(&path, "x,y\n1,2\n3\n").unwrap();
        assert!(matches!(PointCloud::read_csv(&path), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn embed_ramp() {
        let cloud = delay_embed(&ts(vec![0.0, 1.0, 2.0, 3.0, 4.0]), DelayParams::new(1, 2).unwrap()).unwrap();
        let pts: Vec<Vec<f64>> = cloud.points().map(<[f64]>::to_vec).collect();
        assert_eq!(
            pts,
            vec![vec![1.0, 0.0], vec![2.0, 1.0], vec![3.0, 2.0], vec![4.0, 3.0]]
        );
        assert_eq!(cloud.source_time(0), 1);
    }

    #[test]
    fn embed_constant() {
        let cloud = delay_embed(&ts(vec![0.7; 40]), DelayParams::new(3, 4).unwrap()).unwrap();
        assert_eq!(cloud.len(), 40 - 9);
        assert!(cloud.points().all(|p| p.iter().all(|&v| v == 0.7)));
    }

    #[test]
    fn embed_sine_lies_on_circle() {
        let x: Vec<f64> = (0..256).map(|t| (2.0 * PI * t as f64 / 64.0).sin()).collect();
        let cloud = delay_embed(&ts(x), DelayParams::new(16, 2).unwrap()).unwrap();
        for p in cloud.points() {
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((r - 1.0).abs() < 1e-9, "radius {r}");
        }
    }

    #[test]
    fn embed_too_short() {
        let err = delay_embed(&ts(vec![1.0; 5]), DelayParams::new(5, 2).unwrap()).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientData {
                required: 6,
                available: 5,
                ..
            }
        ));
        assert!(DelayParams::new(0, 2).is_err());
        assert!(DelayParams::new(1, 1).is_err());
    }

    #[test]
    fn tau_suggestions() {
        assert_eq!(suggest_tau(44100.0, 261.62).unwrap(), 54);
        assert_eq!(suggest_tau(44100.0, 440.0).unwrap(), 32);
        assert_eq!(suggest_tau(1000.0, 10000.0).unwrap(), 1);
        assert!(suggest_tau(0.0, 1.0).is_err());
    }

    fn line_cloud(n: usize) -> PointCloud {
        let pts: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64, 0.0]).collect();
        PointCloud::from_points(&pts).unwrap()
    }

    #[test]
    fn landmark_spacing() {
        let lm = select_landmarks(&line_cloud(2000), 200).unwrap();
        let expected: Vec<usize> = (0..200).map(|k| 10 * k).collect();
        assert_eq!(lm.indices(), expected.as_slice());

        let lm = select_landmarks(&line_cloud(10), 3).unwrap();
        assert_eq!(lm.indices(), &[0, 3, 6]);

        let lm = select_landmarks(&line_cloud(7), 7).unwrap();
        assert_eq!(lm.indices(), &[0, 1, 2, 3, 4, 5, 6]);

        assert!(select_landmarks(&line_cloud(5), 6).is_err());
        assert!(select_landmarks(&line_cloud(5), 0).is_err());
    }

    #[test]
    fn maxmin_landmarks_spread_out() {
        let lm = select_landmarks_maxmin(&line_cloud(11), 3).unwrap();
        assert_eq!(lm.indices(), &[0, 5, 10]);
    }

    #[test]
    fn distance_examples() {
        let cloud = PointCloud::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.4, 0.0]]).unwrap();
        let lm = LandmarkSet::new(vec![0, 1], 3).unwrap();
        let d = distances(&cloud, &lm).unwrap();
        assert_eq!(d.column(2), &[0.4, 0.6]);
        assert_eq!(d.get(0, 0), 0.0);
        assert_eq!(d.get(1, 1), 0.0);
        assert_eq!(d.landmark_diameter(), 1.0);
    }

    #[test]
    fn distances_match_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let cloud = PointCloud::from_points(&pts).unwrap();
        let lm = LandmarkSet::new(vec![0, 2, 3, 5, 7], 8).unwrap();
        let d = distances(&cloud, &lm).unwrap();
        for (i, &li) in lm.indices().iter().enumerate() {
            for j in 0..8 {
                let s: f64 = pts[li].iter().zip(&pts[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                assert_eq!(d.get(i, j), s.sqrt());
            }
        }
    }

    proptest! {
        #[test]
        fn embed_length(n in 2usize..300, tau in 1usize..20, dim in 2usize..5) {
            let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
            let p = DelayParams::new(tau, dim).unwrap();
            match delay_embed(&ts(x), p) {
                Ok(cloud) => prop_assert_eq!(cloud.len(), n - (dim - 1) * tau),
                Err(_) => prop_assert!(n < (dim - 1) * tau + 1),
            }
        }

        #[test]
        fn landmarks_strictly_increasing(n in 1usize..500, frac in 0.0f64..1.0) {
            let count = 1 + ((n - 1) as f64 * frac) as usize;
            let lm = select_landmarks(&line_cloud(n), count).unwrap();
            prop_assert_eq!(lm.len(), count);
            prop_assert!(lm.indices().windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn landmark_rows_have_a_zero(n in 2usize..60, seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random(), rng.random()]).collect();
            let cloud = PointCloud::from_points(&pts).unwrap();
            let lm = select_landmarks(&cloud, 1 + n / 3).unwrap();
            let d = distances(&cloud, &lm).unwrap();
            for l in 0..d.landmarks() {
                prop_assert!((0..d.witnesses()).any(|w| d.get(l, w) == 0.0));
            }
        }
    }
}
