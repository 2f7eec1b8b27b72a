//! Scale-indexed nets: per level `k`, centers pairwise at least `c* r^k` apart whose
//! open `C* r^k`-balls cover the space.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::space::{MetricSpace, PointId, PointIndex};

/// Node `(k, n)` of the hierarchy; `ordinal` is 1-based in discovery order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    pub level: i32,
    pub ordinal: u32,
}

impl NodeId {
    pub fn new(level: i32, ordinal: u32) -> Self {
        NodeId { level, ordinal }
    }

    /// Zero-based position within its level.
    #[inline]
    pub fn slot(self) -> usize {
        self.ordinal as usize - 1
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.level, self.ordinal)
    }
}

/// `r^k` for integer `k`.
#[inline]
pub fn scale(r: f64, k: i32) -> f64 {
    libm::pow(r, k as f64)
}

/// Greedy net extension: `seeds` first, then every point in index order that is at
/// least `separation` from everything picked so far.
pub fn build_net(space: &MetricSpace, seeds: &[PointId], separation: f64, covering: f64) -> Result<Vec<PointId>> {
    if !(separation > 0.0) || !(covering >= separation) {
        return Err(Error::InvalidInput(alloc::format!(
            "need 0 < separation <= covering, got {separation} and {covering}"
        )));
    }
    let mut index = PointIndex::new(space, separation);
    let mut picked = Vec::with_capacity(seeds.len());
    let mut taken = vec![false; space.len()];
    for &s in seeds {
        if s.index() >= space.len() {
            return Err(Error::InvalidInput(alloc::format!("seed {s} outside the space")));
        }
        if let Some((p, d)) = index.nearest_within(space, s, separation) {
            let (a, b) = (p.min(s), p.max(s));
            return Err(Error::SeedsTooClose { a, b, distance: d });
        }
        index.insert(space, s);
        picked.push(s);
        taken[s.index()] = true;
    }
    let everything = separation <= space.resolution();
    for p in space.points() {
        if taken[p.index()] {
            continue;
        }
        if everything || !index.any_within(space, p, separation) {
            if !everything {
                index.insert(space, p);
            }
            picked.push(p);
        }
    }
    Ok(picked)
}

/// Default scale window: the coarsest level is a single node and the finest level
/// contains every point.
pub fn default_window(space: &MetricSpace, r: f64, c_star: f64) -> (i32, i32) {
    let diam = space.diameter_upper_bound();
    let mut k = 0i32;
    if c_star > diam {
        while c_star * scale(r, k + 1) > diam {
            k += 1;
        }
    } else {
        while c_star * scale(r, k) <= diam {
            k -= 1;
        }
    }
    let k_min = k;
    let resolution = space.resolution();
    let mut k_max = k_min;
    if resolution.is_finite() {
        while c_star * scale(r, k_max) > resolution {
            k_max += 1;
        }
    }
    (k_min, k_max)
}

/// Non-fatal observations made while building a hierarchy.
#[derive(Clone, Debug, PartialEq)]
pub enum NetWarning {
    /// Several levels sit at or below the resolution and all contain every point.
    RedundantFineLevels { levels: usize },
    /// The finest level misses some points, so cube checks see only net points.
    NotExhaustive { missing: usize },
}

#[derive(Clone, Debug)]
pub struct NetHierarchy {
    space: Arc<MetricSpace>,
    pub r: f64,
    pub c_star: f64,
    pub big_c_star: f64,
    pub k_min: i32,
    pub k_max: i32,
    pub base: PointId,
    levels: Vec<Vec<PointId>>,
    /// Per level, point index → ordinal (0 when absent).
    lookup: Vec<Vec<u32>>,
    pub warnings: Vec<NetWarning>,
}

impl NetHierarchy {
    /// Wraps prebuilt levels without validating them (see [`verify_net`]).
    pub fn from_levels(
        space: Arc<MetricSpace>,
        r: f64,
        c_star: f64,
        big_c_star: f64,
        k_min: i32,
        levels: Vec<Vec<PointId>>,
        base: PointId,
    ) -> Self {
        let lookup = levels
            .iter()
            .map(|lvl| {
                let mut map = vec![0u32; space.len()];
                for (i, p) in lvl.iter().enumerate().rev() {
                    map[p.index()] = i as u32 + 1;
                }
                map
            })
            .collect();
        let k_max = k_min + levels.len() as i32 - 1;
        NetHierarchy { space, r, c_star, big_c_star, k_min, k_max, base, levels, lookup, warnings: Vec::new() }
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<MetricSpace> {
        &self.space
    }

    pub fn level_range(&self) -> core::ops::RangeInclusive<i32> {
        self.k_min..=self.k_max
    }

    pub fn contains_level(&self, k: i32) -> bool {
        self.k_min <= k && k <= self.k_max
    }

    /// Centers of level `k` in ordinal order.
    pub fn centers(&self, k: i32) -> &[PointId] {
        &self.levels[(k - self.k_min) as usize]
    }

    pub fn node_count(&self, k: i32) -> usize {
        self.centers(k).len()
    }

    pub fn nodes(&self, k: i32) -> impl Iterator<Item = NodeId> + '_ {
        (1..=self.node_count(k) as u32).map(move |n| NodeId::new(k, n))
    }

    pub fn all_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.level_range().flat_map(move |k| self.nodes(k))
    }

    #[inline]
    pub fn point(&self, node: NodeId) -> PointId {
        self.centers(node.level)[node.slot()]
    }

    /// The node of level `k` centered at `p`, if any.
    pub fn node_at(&self, k: i32, p: PointId) -> Option<NodeId> {
        match self.lookup[(k - self.k_min) as usize][p.index()] {
            0 => None,
            n => Some(NodeId::new(k, n)),
        }
    }

    #[inline]
    pub fn dist(&self, a: NodeId, b: NodeId) -> f64 {
        self.space.dist(self.point(a), self.point(b))
    }

    /// `r^k`.
    #[inline]
    pub fn rk(&self, k: i32) -> f64 {
        scale(self.r, k)
    }

    /// Spatial index over the centers of level `k`.
    pub fn index(&self, k: i32, cell: f64) -> PointIndex {
        PointIndex::with_points(&self.space, cell, self.centers(k))
    }
}

/// Builds every level of the window with `build_net(seeds = [base])`.
pub fn build_hierarchy(
    space: Arc<MetricSpace>,
    r: f64,
    c_star: f64,
    big_c_star: f64,
    k_min: i32,
    k_max: i32,
    base: PointId,
) -> Result<NetHierarchy> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidInput(alloc::format!("ratio {r} outside (0,1)")));
    }
    if !(c_star > 0.0 && c_star <= big_c_star) {
        return Err(Error::InvalidInput(alloc::format!(
            "need 0 < c* <= C*, got {c_star} and {big_c_star}"
        )));
    }
    if k_min > k_max {
        return Err(Error::WindowEmpty { k_min, k_max });
    }
    if base.index() >= space.len() {
        return Err(Error::InvalidInput(alloc::format!("base point {base} outside the space")));
    }
    let levels = (k_min..=k_max)
        .map(|k| build_net(&space, &[base], c_star * scale(r, k), big_c_star * scale(r, k)))
        .collect::<Result<Vec<_>>>()?;
    let resolution = space.resolution();
    let mut h = NetHierarchy::from_levels(space, r, c_star, big_c_star, k_min, levels, base);
    let redundant = h.level_range().filter(|&k| c_star * h.rk(k) <= resolution).count();
    if redundant > 1 {
        h.warnings.push(NetWarning::RedundantFineLevels { levels: redundant });
    }
    let missing = h.space().len() - h.node_count(k_max);
    if missing > 0 {
        h.warnings.push(NetWarning::NotExhaustive { missing });
    }
    Ok(h)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationViolation {
    pub a: NodeId,
    pub b: NodeId,
    pub distance: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoveringViolation {
    pub level: i32,
    pub point: PointId,
    /// Closest center, with its distance (at least the bound).
    pub nearest: Option<(NodeId, f64)>,
    pub bound: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NetReport {
    pub levels_checked: usize,
    pub pairs_checked: u64,
    pub separation: Vec<SeparationViolation>,
    pub covering: Vec<CoveringViolation>,
    /// Levels whose centers do not include the base point.
    pub missing_base: Vec<i32>,
}

impl NetReport {
    pub fn passes(&self) -> bool {
        self.separation.is_empty() && self.covering.is_empty() && self.missing_base.is_empty()
    }
}

/// Exhaustive check of separation over all within-level pairs and covering over all points.
pub fn verify_net(h: &NetHierarchy) -> NetReport {
    let space = h.space();
    let mut report = NetReport::default();
    for k in h.level_range() {
        report.levels_checked += 1;
        let centers = h.centers(k);
        let sep = h.c_star * h.rk(k);
        let cover = h.big_c_star * h.rk(k);
        let n = centers.len() as u64;
        report.pairs_checked += n * n.saturating_sub(1) / 2;
        if !centers.contains(&h.base) {
            report.missing_base.push(k);
        }
        let mut slot_of = alloc::collections::BTreeMap::new();
        for (i, &p) in centers.iter().enumerate() {
            slot_of.entry(p).or_insert_with(Vec::new).push(i);
        }
        let distinct: Vec<PointId> = slot_of.keys().copied().collect();
        let index = PointIndex::with_points(space, sep, &distinct);
        for (i, &p) in centers.iter().enumerate() {
            index.for_each_within(space, p, sep, |q, d| {
                for &j in &slot_of[&q] {
                    if j > i {
                        report.separation.push(SeparationViolation {
                            a: NodeId::new(k, i as u32 + 1),
                            b: NodeId::new(k, j as u32 + 1),
                            distance: d,
                            bound: sep,
                        });
                    }
                }
            });
        }
        let index = PointIndex::with_points(space, cover, &distinct);
        for y in space.points() {
            if index.any_within(space, y, cover) {
                continue;
            }
            let nearest = centers
                .iter()
                .enumerate()
                .map(|(i, &c)| (NodeId::new(k, i as u32 + 1), space.dist(y, c)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            report.covering.push(CoveringViolation { level: k, point: y, nearest, bound: cover });
        }
    }
    report.separation.sort_by(|a, b| (a.a, a.b).cmp(&(b.a, b.b)));
    report
}
