//! Finite metric spaces, benchmark generators and empirical geometry constants.
//!
//! A [`MetricSpace`] is either an explicit distance matrix or a Euclidean point
//! cloud whose distances are evaluated on demand. Both are immutable once built.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::sample::seeded;

/// Default cap on generated point counts.
pub const DEFAULT_POINT_CAP: usize = 50_000;

/// Triangle checks are exhaustive up to this many points, sampled above.
pub const EXHAUSTIVE_TRIANGLE_LIMIT: usize = 2000;

const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Index of a point in a [`MetricSpace`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(pub u32);

impl PointId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for PointId {
    fn from(i: usize) -> Self {
        PointId(i as u32)
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug)]
enum Storage {
    Matrix(Vec<f64>),
    Euclidean { dim: usize, coords: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct MetricSpace {
    n: usize,
    storage: Storage,
    resolution: f64,
    /// Point ids sorted by first coordinate (Euclidean only).
    sweep: Vec<u32>,
}

impl MetricSpace {
    /// Validates a raw distance matrix and wraps it.
    pub fn from_matrix(raw: &[Vec<f64>]) -> Result<Self> {
        let n = raw.len();
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        for (row, r) in raw.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NotSquare { rows: n, row, len: r.len() });
            }
        }
        for i in 0..n {
            if raw[i][i] != 0.0 {
                return Err(Error::NonzeroDiagonal { index: i.into() });
            }
            for j in (i + 1)..n {
                let (a, b) = (raw[i][j], raw[j][i]);
                if !a.is_finite() || !b.is_finite() || a <= 0.0 || b <= 0.0 {
                    return Err(Error::InvalidDistance { a: i.into(), b: j.into(), value: a.min(b) });
                }
                if (a - b).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::AsymmetricInput { a: i.into(), b: j.into() });
                }
            }
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                // symmetrize exactly, keeping the upper triangle
                data[i * n + j] = if i <= j { raw[i][j] } else { raw[j][i] };
            }
        }
        check_triangle(n, &data)?;
        let mut resolution = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                resolution = resolution.min(data[i * n + j]);
            }
        }
        Ok(MetricSpace { n, storage: Storage::Matrix(data), resolution, sweep: Vec::new() })
    }

    /// Euclidean point cloud with `dim` coordinates per point, row-major.
    pub fn from_points(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(Error::InvalidInput(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        let n = coords.len() / dim;
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".to_string()));
        }
        let mut sweep: Vec<u32> = (0..n as u32).collect();
        sweep.sort_by(|&a, &b| {
            let (x, y) = (coords[a as usize * dim], coords[b as usize * dim]);
            x.total_cmp(&y).then(a.cmp(&b))
        });
        let mut space = MetricSpace {
            n,
            storage: Storage::Euclidean { dim, coords },
            resolution: f64::INFINITY,
            sweep,
        };
        space.resolution = space.closest_pair_sweep()?;
        Ok(space)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Smallest nonzero pairwise distance (infinite for a single point).
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> {
        (0..self.n as u32).map(PointId)
    }

    #[inline]
    pub fn dist(&self, a: PointId, b: PointId) -> f64 {
        match &self.storage {
            Storage::Matrix(d) => d[a.index() * self.n + b.index()],
            Storage::Euclidean { dim, coords } => {
                let (pa, pb) = (a.index() * dim, b.index() * dim);
                let mut s = 0.0;
                for t in 0..*dim {
                    let diff = coords[pa + t] - coords[pb + t];
                    s += diff * diff;
                }
                libm::sqrt(s)
            }
        }
    }

    /// Coordinates of a point, when the space is a point cloud.
    pub fn coords(&self, p: PointId) -> Option<&[f64]> {
        match &self.storage {
            Storage::Matrix(_) => None,
            Storage::Euclidean { dim, coords } => Some(&coords[p.index() * dim..(p.index() + 1) * dim]),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match &self.storage {
            Storage::Matrix(_) => None,
            Storage::Euclidean { dim, .. } => Some(*dim),
        }
    }

    /// Exact diameter; quadratic in the point count.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for a in 0..self.n {
            for b in (a + 1)..self.n {
                best = best.max(self.dist(a.into(), b.into()));
            }
        }
        best
    }

    /// Cheap upper bound on the diameter (exact for matrices).
    pub fn diameter_upper_bound(&self) -> f64 {
        match &self.storage {
            Storage::Matrix(d) => d.iter().copied().fold(0.0, f64::max),
            Storage::Euclidean { dim, coords } => {
                let mut s = 0.0;
                for t in 0..*dim {
                    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                    for p in 0..self.n {
                        let c = coords[p * dim + t];
                        lo = lo.min(c);
                        hi = hi.max(c);
                    }
                    s += (hi - lo) * (hi - lo);
                }
                libm::sqrt(s)
            }
        }
    }

    /// Calls `f(z, d)` for every `z` with `d = dist(center, z) < radius`.
    pub fn for_each_in_ball(&self, center: PointId, radius: f64, mut f: impl FnMut(PointId, f64)) {
        match &self.storage {
            Storage::Matrix(_) => {
                for z in self.points() {
                    let d = self.dist(center, z);
                    if d < radius {
                        f(z, d);
                    }
                }
            }
            Storage::Euclidean { dim, coords } => {
                let x0 = coords[center.index() * dim];
                let start = self.sweep.partition_point(|&p| coords[p as usize * dim] <= x0 - radius);
                for &p in &self.sweep[start..] {
                    if coords[p as usize * dim] >= x0 + radius {
                        break;
                    }
                    let z = PointId(p);
                    let d = self.dist(center, z);
                    if d < radius {
                        f(z, d);
                    }
                }
            }
        }
    }

    /// First `z` (in scan order) with `dist(center, z) < radius` and `pred(z, d)`.
    pub fn find_in_ball(&self, center: PointId, radius: f64, mut pred: impl FnMut(PointId, f64) -> bool) -> Option<PointId> {
        let mut test = |z: PointId| {
            let d = self.dist(center, z);
            (d < radius && pred(z, d)).then_some(z)
        };
        match &self.storage {
            Storage::Matrix(_) => self.points().find_map(test),
            Storage::Euclidean { dim, coords } => {
                let x0 = coords[center.index() * dim];
                let start = self.sweep.partition_point(|&p| coords[p as usize * dim] <= x0 - radius);
                self.sweep[start..]
                    .iter()
                    .take_while(|&&p| coords[p as usize * dim] < x0 + radius)
                    .find_map(|&p| test(PointId(p)))
            }
        }
    }

    /// A point lying in both open balls `B(a, radius)` and `B(b, radius)`.
    pub fn balls_meet(&self, a: PointId, b: PointId, radius: f64) -> Option<PointId> {
        let ab = self.dist(a, b);
        if ab >= 2.0 * radius {
            return None;
        }
        if ab < radius {
            return Some(a);
        }
        self.find_in_ball(a, radius, |z, _| self.dist(z, b) < radius)
    }

    /// Points of the open ball `B(center, radius)` in index order.
    pub fn ball(&self, center: PointId, radius: f64) -> Vec<PointId> {
        let mut out = Vec::new();
        self.for_each_in_ball(center, radius, |z, _| out.push(z));
        out.sort_unstable();
        out
    }

    /// All unordered pairs `a < b` with `d(a,b) <= radius`.
    pub fn contact_pairs(&self, radius: f64) -> Vec<(PointId, PointId)> {
        let mut out = Vec::new();
        if radius < 0.0 {
            return out;
        }
        let open = next_up(radius);
        for a in self.points() {
            self.for_each_in_ball(a, open, |b, d| {
                if a < b && d <= radius {
                    out.push((a, b));
                }
            });
        }
        out.sort_unstable();
        out
    }

    fn closest_pair_sweep(&self) -> Result<f64> {
        let Storage::Euclidean { dim, coords } = &self.storage else {
            unreachable!("sweep on matrix storage")
        };
        let mut best = f64::INFINITY;
        for (i, &a) in self.sweep.iter().enumerate() {
            let xa = coords[a as usize * dim];
            for &b in &self.sweep[i + 1..] {
                if coords[b as usize * dim] - xa >= best {
                    break;
                }
                let d = self.dist(PointId(a), PointId(b));
                if d == 0.0 {
                    let (a, b) = (a.min(b), a.max(b));
                    return Err(Error::InvalidDistance { a: PointId(a), b: PointId(b), value: 0.0 });
                }
                best = best.min(d);
            }
        }
        Ok(best)
    }
}

/// Builds a [`MetricSpace`] from a raw `n x n` distance matrix.
pub fn load_distance_matrix(raw: &[Vec<f64>]) -> Result<MetricSpace> {
    MetricSpace::from_matrix(raw)
}

fn check_triangle(n: usize, d: &[f64]) -> Result<()> {
    let violates = |a: usize, b: usize, c: usize| {
        let (ac, ab, bc) = (d[a * n + c], d[a * n + b], d[b * n + c]);
        ac > ab + bc + 1e-12 * ac.max(1.0)
    };
    if n <= EXHAUSTIVE_TRIANGLE_LIMIT {
        for a in 0..n {
            for c in (a + 1)..n {
                for b in 0..n {
                    if b != a && b != c && violates(a, b, c) {
                        return Err(Error::TriangleViolation { a: a.into(), b: b.into(), c: c.into() });
                    }
                }
            }
        }
    } else {
        let mut rng = seeded(0x7472_6961);
        for _ in 0..4_000_000 {
            let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            if a != b && b != c && a != c && violates(a, b, c) {
                return Err(Error::TriangleViolation { a: a.into(), b: b.into(), c: c.into() });
            }
        }
    }
    Ok(())
}

pub(crate) fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}

/// Benchmark space descriptors, written `interval:1025`, `grid:33`, `cantor:6`, `gasket:5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorSpec {
    /// `n` evenly spaced points of `[0,1]`.
    Interval(usize),
    /// `m x m` lattice points of the unit square.
    Grid(usize),
    /// Endpoints of the middle-thirds construction at a level.
    Cantor(u32),
    /// Vertices of the Sierpinski gasket approximation at a level.
    Gasket(u32),
}

impl GeneratorSpec {
    pub fn point_count(&self) -> usize {
        match *self {
            GeneratorSpec::Interval(n) => n,
            GeneratorSpec::Grid(m) => m.saturating_mul(m),
            GeneratorSpec::Cantor(level) => 1usize.checked_shl(level + 1).unwrap_or(usize::MAX),
            GeneratorSpec::Gasket(level) => 3usize
                .checked_pow(level + 1)
                .map(|p| (p + 3) / 2)
                .unwrap_or(usize::MAX),
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Interval(n) => write!(f, "interval:{n}"),
            GeneratorSpec::Grid(m) => write!(f, "grid:{m}"),
            GeneratorSpec::Cantor(l) => write!(f, "cantor:{l}"),
            GeneratorSpec::Gasket(l) => write!(f, "gasket:{l}"),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadDescriptor(s.to_string());
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let arg: u64 = arg.trim().parse().map_err(|_| bad())?;
        let spec = match kind.trim() {
            "interval" => GeneratorSpec::Interval(arg as usize),
            "grid" => GeneratorSpec::Grid(arg as usize),
            "cantor" => GeneratorSpec::Cantor(u32::try_from(arg).map_err(|_| bad())?),
            "gasket" => GeneratorSpec::Gasket(u32::try_from(arg).map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        if spec.point_count() == 0 {
            return Err(bad());
        }
        Ok(spec)
    }
}

/// Generates a benchmark space with the default point cap.
pub fn generate_space(spec: GeneratorSpec) -> Result<MetricSpace> {
    generate_space_capped(spec, DEFAULT_POINT_CAP)
}

pub fn generate_space_capped(spec: GeneratorSpec, cap: usize) -> Result<MetricSpace> {
    let points = spec.point_count();
    if points > cap {
        return Err(Error::SpecTooLarge { points, cap });
    }
    match spec {
        GeneratorSpec::Interval(n) => {
            let denom = (n.max(2) - 1) as f64;
            let coords = (0..n).map(|i| i as f64 / denom).collect();
            MetricSpace::from_points(1, coords)
        }
        GeneratorSpec::Grid(m) => {
            let denom = (m.max(2) - 1) as f64;
            let mut coords = Vec::with_capacity(2 * m * m);
            for i in 0..m {
                for j in 0..m {
                    coords.push(i as f64 / denom);
                    coords.push(j as f64 / denom);
                }
            }
            MetricSpace::from_points(2, coords)
        }
        GeneratorSpec::Cantor(level) => {
            // interval left ends in units of 3^-level
            let mut starts: Vec<u64> = vec![0];
            for l in 0..level {
                let len = 3u64.pow(level - l - 1);
                starts = starts.iter().flat_map(|&a| [a, a + 2 * len]).collect();
            }
            let denom = libm::pow(3.0, level as f64);
            let mut coords = Vec::with_capacity(2 * starts.len());
            for a in starts {
                coords.push(a as f64 / denom);
                coords.push((a + 1) as f64 / denom);
            }
            MetricSpace::from_points(1, coords)
        }
        GeneratorSpec::Gasket(level) => {
            // lattice coordinates (i, j) at spacing 2^-level; x = (i + j/2) h, y = j h sqrt(3)/2
            let size = 1u64 << level;
            let mut vertices = BTreeSet::new();
            let mut stack = vec![(0u64, 0u64, size)];
            while let Some((i, j, s)) = stack.pop() {
                if s == 1 {
                    vertices.insert((2 * i + j, j));
                    vertices.insert((2 * (i + 1) + j, j));
                    vertices.insert((2 * i + j + 1, j + 1));
                    continue;
                }
                let h = s / 2;
                stack.push((i, j, h));
                stack.push((i + h, j, h));
                stack.push((i, j + h, h));
            }
            let h = 1.0 / size as f64;
            let rise = libm::sqrt(3.0) / 2.0;
            let mut coords = Vec::with_capacity(2 * vertices.len());
            for (twice_x, j) in vertices {
                coords.push(twice_x as f64 * h / 2.0);
                coords.push(j as f64 * h * rise);
            }
            MetricSpace::from_points(2, coords)
        }
    }
}

/// Incremental spatial hash over a subset of points with exact radius queries.
///
/// Point clouds of dimension at most three are bucketed on a cubic lattice of
/// side `cell`; everything else falls back to a linear scan.
#[derive(Clone, Debug)]
pub struct PointIndex {
    cell: f64,
    bucketed: bool,
    buckets: BTreeMap<[i64; 3], Vec<PointId>>,
    all: Vec<PointId>,
}

impl PointIndex {
    pub fn new(space: &MetricSpace, cell: f64) -> Self {
        let bucketed = matches!(space.dim(), Some(d) if d <= 3) && cell.is_finite() && cell > 0.0;
        PointIndex { cell, bucketed, buckets: BTreeMap::new(), all: Vec::new() }
    }

    pub fn with_points(space: &MetricSpace, cell: f64, points: &[PointId]) -> Self {
        let mut idx = PointIndex::new(space, cell);
        for &p in points {
            idx.insert(space, p);
        }
        idx
    }

    fn key(&self, coords: &[f64]) -> [i64; 3] {
        let mut key = [0i64; 3];
        for (k, c) in key.iter_mut().zip(coords) {
            *k = libm::floor(c / self.cell) as i64;
        }
        key
    }

    pub fn insert(&mut self, space: &MetricSpace, p: PointId) {
        self.all.push(p);
        if self.bucketed {
            let key = self.key(space.coords(p).expect("point cloud"));
            self.buckets.entry(key).or_default().push(p);
        }
    }

    pub fn len(&self) -> usize {
        self.all.len()
    }

    pub fn is_empty(&self) -> bool {
        self.all.is_empty()
    }

    /// Calls `f(p, d)` for indexed `p` with `d = dist(q, p) < radius`, in insertion order
    /// within each bucket.
    pub fn for_each_within(&self, space: &MetricSpace, q: PointId, radius: f64, mut f: impl FnMut(PointId, f64)) {
        let span = if self.bucketed { libm::ceil(radius / self.cell) } else { f64::INFINITY };
        let dim = space.dim().unwrap_or(0);
        let cells = libm::pow(2.0 * span + 1.0, dim as f64);
        if !self.bucketed || !(cells <= 4096.0) || cells > self.buckets.len() as f64 * 4.0 {
            for &p in &self.all {
                let d = space.dist(q, p);
                if d < radius {
                    f(p, d);
                }
            }
            return;
        }
        let span = span as i64;
        let center = self.key(space.coords(q).expect("point cloud"));
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for t in 0..dim {
            lo[t] = center[t] - span;
            hi[t] = center[t] + span;
        }
        let mut key = lo;
        loop {
            if let Some(bucket) = self.buckets.get(&key) {
                for &p in bucket {
                    let d = space.dist(q, p);
                    if d < radius {
                        f(p, d);
                    }
                }
            }
            let mut t = 0;
            loop {
                if t == dim {
                    return;
                }
                key[t] += 1;
                if key[t] <= hi[t] {
                    break;
                }
                key[t] = lo[t];
                t += 1;
            }
            if dim == 0 {
                return;
            }
        }
    }

    /// True when some indexed point lies within `radius` (open) of `q`.
    pub fn any_within(&self, space: &MetricSpace, q: PointId, radius: f64) -> bool {
        let mut hit = false;
        self.for_each_within(space, q, radius, |_, _| hit = true);
        hit
    }

    /// Nearest indexed point within `radius`, ties broken by smaller id.
    pub fn nearest_within(&self, space: &MetricSpace, q: PointId, radius: f64) -> Option<(PointId, f64)> {
        let mut best: Option<(PointId, f64)> = None;
        self.for_each_within(space, q, radius, |p, d| match best {
            Some((bp, bd)) if bd < d || (bd == d && bp < p) => {}
            _ => best = Some((p, d)),
        });
        best
    }
}

/// Empirical uniform-perfectness constant.
///
/// Probes centers `x` (all of them when `probes >= n` and `n <= 2048`, a seeded
/// sample otherwise) against radii just above pairwise-distance quantiles, and
/// returns `1.01 * max next(x, r) / r` where `next(x, r)` is the smallest
/// distance from `x` that is at least `r`, over probes with `B(x, r) != X`.
pub fn estimate_gamma(space: &MetricSpace, probes: usize) -> Result<f64> {
    let n = space.len();
    if n == 0 {
        return Err(Error::EmptySpace);
    }
    if n == 1 {
        return Err(Error::DegenerateSpace);
    }
    if probes == 0 {
        return Err(Error::InvalidInput("probes must be at least 1".to_string()));
    }
    let centers: Vec<PointId> = if probes >= n && n <= 2048 {
        space.points().collect()
    } else {
        let mut rng = seeded(0x67616d6d61);
        let mut picked = BTreeSet::new();
        while picked.len() < probes.min(n) {
            picked.insert(PointId(rng.gen_range(0..n as u32)));
        }
        picked.into_iter().collect()
    };
    let rows: Vec<Vec<f64>> = centers
        .iter()
        .map(|&x| {
            let mut row: Vec<f64> = space.points().filter(|&z| z != x).map(|z| space.dist(x, z)).collect();
            row.sort_unstable_by(f64::total_cmp);
            row
        })
        .collect();
    let mut all: Vec<f64> = rows.iter().flatten().copied().collect();
    all.sort_unstable_by(f64::total_cmp);
    all.dedup();
    let quantiles = 2048.min(all.len()).max(1);
    let mut radii: Vec<f64> = (0..quantiles)
        .map(|i| all[i * (all.len() - 1) / quantiles.max(2).saturating_sub(1).max(1)])
        .collect();
    radii.push(space.resolution());
    radii.sort_unstable_by(f64::total_cmp);
    radii.dedup();

    let mut worst = 1.0f64;
    for row in &rows {
        let far = *row.last().expect("at least two points");
        for &q in &radii {
            let r = next_up(q);
            if r < space.resolution() || r > far {
                // B(x, r) is the whole space once r exceeds the eccentricity
                continue;
            }
            let i = row.partition_point(|&d| d < r);
            if let Some(&next) = row.get(i) {
                worst = worst.max(next / r);
            }
        }
    }
    Ok(1.01 * worst)
}

/// Size of a greedy `separation`-separated subset of `B(center, radius)`, scanning
/// ball points in index order.
pub fn packing_number(space: &MetricSpace, center: PointId, radius: f64, separation: f64) -> usize {
    let mut picked: Vec<PointId> = Vec::new();
    for z in space.ball(center, radius) {
        if picked.iter().all(|&p| space.dist(p, z) >= separation) {
            picked.push(z);
        }
    }
    picked.len()
}

/// Empirical geometric constants of a space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometryEstimate {
    pub gamma: f64,
    /// Packing supremum with ball radius `alpha1 * s` and separation `c_star * s`.
    pub n_pack: usize,
    /// Greedy covering count of `B(x, 2s)` by `s`-balls.
    pub doubling_n: usize,
}

/// Geometric scales probed for packing suprema: `s >= resolution / c_star`, ratio `sqrt 2`.
fn probe_scales(space: &MetricSpace, c_star: f64, alpha1: f64) -> Vec<f64> {
    let lo = space.resolution() / c_star;
    let hi = 2.0 * space.diameter_upper_bound() / alpha1.min(c_star).max(f64::MIN_POSITIVE);
    let mut scales = Vec::new();
    let mut s = lo;
    while s <= hi && scales.len() < 200 {
        scales.push(s);
        s *= core::f64::consts::SQRT_2;
    }
    if scales.is_empty() {
        scales.push(lo);
    }
    scales
}

fn probe_centers(space: &MetricSpace, probes: usize, seed: u64) -> Vec<PointId> {
    let n = space.len();
    if probes >= n {
        return space.points().collect();
    }
    let mut rng = seeded(seed);
    let mut picked = BTreeSet::new();
    while picked.len() < probes {
        picked.insert(PointId(rng.gen_range(0..n as u32)));
    }
    picked.into_iter().collect()
}

/// The packing constant `N` by maximizing [`packing_number`] over a probe grid.
pub fn estimate_packing(space: &MetricSpace, alpha1: f64, c_star: f64, probes: usize) -> usize {
    let scales = probe_scales(space, c_star, alpha1);
    let mut best = 1;
    for x in probe_centers(space, probes, 0x7061636b) {
        for &s in &scales {
            best = best.max(packing_number(space, x, alpha1 * s, c_star * s));
        }
    }
    best
}

/// All three constants; `alpha1` and `c_star` fix the packing shape.
pub fn estimate_geometry(space: &MetricSpace, alpha1: f64, c_star: f64, probes: usize) -> Result<GeometryEstimate> {
    let gamma = estimate_gamma(space, probes)?;
    let n_pack = estimate_packing(space, alpha1, c_star, probes);
    let mut doubling_n = 1;
    for x in probe_centers(space, probes, 0x646f75626c65) {
        for &s in &probe_scales(space, 1.0, 2.0) {
            doubling_n = doubling_n.max(packing_number(space, x, 2.0 * s, s));
        }
    }
    Ok(GeometryEstimate { gamma, n_pack, doubling_n })
}
