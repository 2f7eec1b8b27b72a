//! The parent map between consecutive levels and the checks it must pass.
//!
//! Children of level `k+1` fall into three classes: `A` nodes sit within
//! `α₂ r^k` of a coarse center and take it as parent; `B` nodes sit within
//! `α₆ r^{k+1}` of a greedily selected far child `f(i)` and form a block in which
//! designated pairs of children bridge every pair of nearby coarse centers; all
//! remaining nodes take the smallest-ordinal coarse center within `C* r^k`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::certify::{ConstantBundle, Mode};
use crate::error::{Error, Result};
use crate::nets::{NetHierarchy, NodeId};
use crate::space::{packing_number, MetricSpace, PointId, PointIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeClass {
    A,
    /// Member of block `i` (1-based, in selection order).
    B(u32),
    C,
}

impl NodeClass {
    pub fn tag(self) -> char {
        match self {
            NodeClass::A => 'A',
            NodeClass::B(_) => 'B',
            NodeClass::C => 'C',
        }
    }

    pub fn block(self) -> Option<u32> {
        match self {
            NodeClass::B(i) => Some(i),
            _ => None,
        }
    }
}

/// Children `a`, `b` designated for the `j`-th close parent pair of a block.
#[derive(Clone, Debug, PartialEq)]
pub struct Designation {
    pub pair: (u32, u32),
    pub a: u32,
    pub b: u32,
    pub y: PointId,
    pub z: PointId,
    /// An annulus was empty and the relaxed-mode fallback point was used.
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    /// Ordinal `f(i)` of the selected far child.
    pub f: u32,
    pub members: Vec<u32>,
    /// Coarse ordinals within `(α₁ - α₆ r) r^k` of `x_f`.
    pub neighbors: Vec<u32>,
    /// All pairs `p < q` of `neighbors`, lexicographic.
    pub pairs: Vec<(u32, u32)>,
    pub designations: Vec<Designation>,
}

/// Parent assignment from level `level` to `level - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub level: i32,
    /// Parent ordinal per child slot.
    pub parent: Vec<u32>,
    pub class: Vec<NodeClass>,
    pub f_list: Vec<u32>,
    pub blocks: Vec<Block>,
    /// Children of each coarse slot, ascending ordinals.
    pub children: Vec<Vec<u32>>,
}

impl Transition {
    fn from_parents(level: i32, coarse: usize, parent: Vec<u32>, class: Vec<NodeClass>) -> Self {
        let mut children = vec![Vec::new(); coarse];
        for (slot, &p) in parent.iter().enumerate() {
            children[p as usize - 1].push(slot as u32 + 1);
        }
        Transition { level, parent, class, f_list: Vec::new(), blocks: Vec::new(), children }
    }
}

#[derive(Clone, Debug)]
pub struct ParentMap {
    hierarchy: NetHierarchy,
    bundle: ConstantBundle,
    /// Indexed by `level - k_min - 1`.
    transitions: Vec<Transition>,
}

impl ParentMap {
    /// Wraps an explicit assignment `parents[level - k_min - 1][slot]` with every class `C`.
    /// Used for planted maps; no rule is enforced.
    pub fn from_assignment(hierarchy: NetHierarchy, bundle: ConstantBundle, parents: Vec<Vec<u32>>) -> Self {
        let transitions = parents
            .into_iter()
            .enumerate()
            .map(|(i, parent)| {
                let level = hierarchy.k_min + i as i32 + 1;
                let class = vec![NodeClass::C; parent.len()];
                Transition::from_parents(level, hierarchy.node_count(level - 1), parent, class)
            })
            .collect();
        ParentMap { hierarchy, bundle, transitions }
    }

    pub fn hierarchy(&self) -> &NetHierarchy {
        &self.hierarchy
    }

    pub fn bundle(&self) -> &ConstantBundle {
        &self.bundle
    }

    pub fn space(&self) -> &MetricSpace {
        self.hierarchy.space()
    }

    /// Transition into child level `level`.
    pub fn transition(&self, level: i32) -> &Transition {
        &self.transitions[(level - self.hierarchy.k_min - 1) as usize]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        if node.level <= self.hierarchy.k_min {
            return None;
        }
        let t = self.transition(node.level);
        Some(NodeId::new(node.level - 1, t.parent[node.slot()]))
    }

    pub fn class(&self, node: NodeId) -> Option<NodeClass> {
        (node.level > self.hierarchy.k_min).then(|| self.transition(node.level).class[node.slot()])
    }

    /// Child ordinals at `node.level + 1`.
    pub fn child_ordinals(&self, node: NodeId) -> &[u32] {
        if node.level >= self.hierarchy.k_max {
            return &[];
        }
        &self.transition(node.level + 1).children[node.slot()]
    }

    pub fn children(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let k = node.level + 1;
        self.child_ordinals(node).iter().map(move |&m| NodeId::new(k, m))
    }

    /// Ancestor of `node` at level `level <= node.level`.
    pub fn ancestor(&self, mut node: NodeId, level: i32) -> NodeId {
        while node.level > level {
            node = self.parent(node).expect("level above the window");
        }
        node
    }
}

/// Smallest-index `z` with `inner <= d(center, z) < outer`.
pub fn find_annulus_point(space: &MetricSpace, center: PointId, inner: f64, outer: f64) -> Result<PointId> {
    if !(inner < outer) {
        return Err(Error::InvalidInput(format!("annulus [{inner}, {outer}) is empty by definition")));
    }
    let mut best: Option<PointId> = None;
    space.for_each_in_ball(center, outer, |z, d| {
        if d >= inner && best.map_or(true, |b| z < b) {
            best = Some(z);
        }
    });
    best.ok_or_else(|| {
        let (mut below, mut above): (Option<(PointId, f64)>, Option<(PointId, f64)>) = (None, None);
        for z in space.points() {
            let d = space.dist(center, z);
            if d < inner && below.map_or(true, |(_, e)| d > e) {
                below = Some((z, d));
            }
            if d >= outer && above.map_or(true, |(_, e)| d < e) {
                above = Some((z, d));
            }
        }
        Error::EmptyAnnulus { center, inner, outer, below, above }
    })
}

/// The fallback witness: the point whose distance from `center` is closest to the annulus midpoint.
fn annulus_fallback(space: &MetricSpace, center: PointId, inner: f64, outer: f64) -> PointId {
    let mid = 0.5 * (inner + outer);
    space
        .points()
        .min_by(|&a, &b| {
            let (da, db) = ((space.dist(center, a) - mid).abs(), (space.dist(center, b) - mid).abs());
            da.total_cmp(&db).then(a.cmp(&b))
        })
        .expect("nonempty space")
}

/// Ordinal of the smallest-ordinal center of `level` within `radius` of `y`.
fn min_ordinal_within(h: &NetHierarchy, index: &PointIndex, level: i32, y: PointId, radius: f64) -> Option<u32> {
    let mut best: Option<u32> = None;
    index.for_each_within(h.space(), y, radius, |p, _| {
        let n = h.node_at(level, p).expect("indexed center").ordinal;
        best = Some(best.map_or(n, |b| b.min(n)));
    });
    best
}

/// Class of every child of level `k+1` plus the far-child list `f_{k+1}`.
pub fn classify_level(h: &NetHierarchy, b: &ConstantBundle, k: i32) -> (Vec<NodeClass>, Vec<u32>) {
    let space = h.space();
    let (rk, rk1) = (h.rk(k), h.rk(k + 1));
    let coarse = h.index(k, b.big_c_star * rk);
    let a_radius = b.alpha2 * rk;
    let far_radius = (b.alpha2 + b.alpha6 * h.r) * rk;
    let block_radius = b.alpha6 * rk1;
    let fine = h.centers(k + 1);

    let everything_near = far_radius > space.diameter_upper_bound();
    let mut f_index = PointIndex::new(space, 2.0 * block_radius);
    let mut f_list = Vec::new();
    if !everything_near {
        for (slot, &p) in fine.iter().enumerate() {
            if !coarse.any_within(space, p, far_radius) && !f_index.any_within(space, p, 2.0 * block_radius) {
                f_index.insert(space, p);
                f_list.push(slot as u32 + 1);
            }
        }
    }
    let class = fine
        .iter()
        .map(|&p| {
            if coarse.any_within(space, p, a_radius) {
                return NodeClass::A;
            }
            match f_index.nearest_within(space, p, block_radius) {
                Some((f, _)) => {
                    let m = h.node_at(k + 1, f).expect("far child").ordinal;
                    let i = f_list.iter().position(|&x| x == m).expect("listed") as u32 + 1;
                    NodeClass::B(i)
                }
                None => NodeClass::C,
            }
        })
        .collect();
    (class, f_list)
}

fn build_transition(h: &NetHierarchy, b: &ConstantBundle, k: i32) -> Result<Transition> {
    let space = h.space();
    let (rk, rk1) = (h.rk(k), h.rk(k + 1));
    let coarse = h.index(k, b.big_c_star * rk);
    let fine_index = h.index(k + 1, b.big_c_star * rk1);
    let fine = h.centers(k + 1);
    let (class, f_list) = classify_level(h, b, k);

    let mut parent = vec![0u32; fine.len()];
    for (slot, &p) in fine.iter().enumerate() {
        parent[slot] = match class[slot] {
            NodeClass::A => {
                let (q, _) = coarse.nearest_within(space, p, b.alpha2 * rk).expect("A node has a close center");
                h.node_at(k, q).expect("center").ordinal
            }
            _ => min_ordinal_within(h, &coarse, k, p, b.big_c_star * rk).ok_or_else(|| {
                Error::InvalidInput(format!("point {p} is not covered at level {k}"))
            })?,
        };
    }

    let mut members: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (slot, c) in class.iter().enumerate() {
        if let NodeClass::B(i) = c {
            members.entry(*i).or_default().push(slot as u32 + 1);
        }
    }
    let mut designated: BTreeMap<u32, u32> = BTreeMap::new();
    let mut blocks = Vec::with_capacity(f_list.len());
    for (idx, &f) in f_list.iter().enumerate() {
        let i = idx as u32 + 1;
        let xf = h.point(NodeId::new(k + 1, f));
        let node = NodeId::new(k + 1, f);
        let reach = (b.alpha1 - b.alpha6 * h.r) * rk;
        let neighbors: Vec<u32> = h
            .nodes(k)
            .filter(|&n| space.dist(xf, h.point(n)) < reach)
            .map(|n| n.ordinal)
            .collect();
        let mut pairs = Vec::new();
        for (x, &p) in neighbors.iter().enumerate() {
            for &q in &neighbors[x + 1..] {
                pairs.push((p, q));
            }
        }
        if pairs.len() > b.pair_bound() {
            return Err(Error::PairingOverflow { node, pairs: pairs.len(), bound: b.pair_bound() });
        }
        let own = members.remove(&i).unwrap_or_default();
        let mut designations = Vec::with_capacity(pairs.len());
        for (j, &(p, q)) in pairs.iter().enumerate() {
            let inner = (b.beta(j as u32) + (2.0 + b.gamma) * b.big_c_star) * rk1;
            let mut fallback = false;
            let mut witness = |center: PointId, lo: f64, hi: f64| -> Result<PointId> {
                match find_annulus_point(space, center, lo, hi) {
                    Ok(z) => Ok(z),
                    Err(e @ Error::EmptyAnnulus { .. }) if b.mode == Mode::Strict => Err(e),
                    Err(Error::EmptyAnnulus { .. }) => {
                        fallback = true;
                        Ok(annulus_fallback(space, center, lo, hi))
                    }
                    Err(e) => Err(e),
                }
            };
            let y = witness(xf, inner, b.gamma * inner)?;
            let cover = b.big_c_star * rk1;
            let a = min_ordinal_within(h, &fine_index, k + 1, y, cover).expect("covering");
            let xa = h.point(NodeId::new(k + 1, a));
            let z = witness(xa, cover, b.gamma * cover)?;
            let bb = min_ordinal_within(h, &fine_index, k + 1, z, cover).expect("covering");
            for (m, target) in [(a, p), (bb, q)] {
                if own.binary_search(&m).is_err() {
                    return Err(Error::DesignationConflict {
                        node,
                        detail: format!("designated child {m} for pair {} lies outside the block", j + 1),
                    });
                }
                if let Some(prev) = designated.insert(m, target) {
                    return Err(Error::DesignationConflict {
                        node,
                        detail: format!("child {m} designated twice (parents {prev} and {target})"),
                    });
                }
                parent[m as usize - 1] = target;
            }
            designations.push(Designation { pair: (p, q), a, b: bb, y, z, fallback });
        }
        blocks.push(Block { f, members: own, neighbors, pairs, designations });
    }

    let mut t = Transition::from_parents(k + 1, h.node_count(k), parent, class);
    t.f_list = f_list;
    t.blocks = blocks;
    Ok(t)
}

/// Builds the parent map for every transition of the window.
pub fn assign_parents(h: NetHierarchy, b: ConstantBundle) -> Result<ParentMap> {
    if h.r != b.r || h.c_star != b.c_star || h.big_c_star != b.big_c_star {
        return Err(Error::InvalidInput(format!(
            "hierarchy (r={}, c*={}, C*={}) and bundle (r={}, c*={}, C*={}) disagree",
            h.r, h.c_star, h.big_c_star, b.r, b.c_star, b.big_c_star
        )));
    }
    let transitions = (h.k_min..h.k_max).map(|k| build_transition(&h, &b, k)).collect::<Result<Vec<_>>>()?;
    Ok(ParentMap { hierarchy: h, bundle: b, transitions })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceViolation {
    pub child: NodeId,
    pub parent: NodeId,
    pub distance: f64,
    pub bound: f64,
}

/// A child within `α₂ r^k` of a center other than its parent.
#[derive(Clone, Debug, PartialEq)]
pub struct CloseViolation {
    pub child: NodeId,
    pub assigned: NodeId,
    pub close: NodeId,
    pub distance: f64,
}

/// Two coarse nodes whose `α₃`-balls meet (at `witness`) without a meeting pair of children.
#[derive(Clone, Debug, PartialEq)]
pub struct BridgeFailure {
    pub a: NodeId,
    pub b: NodeId,
    pub witness: PointId,
    /// The far child that triggered the check, for the far-child condition.
    pub far_child: Option<NodeId>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TReport {
    pub orphans: Vec<NodeId>,
    pub max_fan_in: usize,
    /// Parents whose fan-in exceeds the greedy packing count of their `α₁`-ball (informational).
    pub fan_in_above_packing: Vec<(NodeId, usize, usize)>,
    pub t2: Vec<DistanceViolation>,
    pub t3: Vec<CloseViolation>,
    pub t4_pairs: usize,
    pub t4: Vec<BridgeFailure>,
    pub t5_cases: usize,
    pub t5: Vec<BridgeFailure>,
    /// Coarse levels too large for the bridging checks.
    pub skipped_levels: Vec<i32>,
}

impl TReport {
    pub fn t1_passes(&self) -> bool {
        self.orphans.is_empty()
    }

    pub fn passes_t1_to_t3(&self) -> bool {
        self.t1_passes() && self.t2.is_empty() && self.t3.is_empty()
    }

    pub fn passes(&self) -> bool {
        self.passes_t1_to_t3() && self.t4.is_empty() && self.t5.is_empty()
    }
}

/// Bridging checks run only on coarse levels with at most this many nodes.
pub const BRIDGE_LEVEL_LIMIT: usize = 2000;

/// A pair of children of `a` and `b` whose `α₃ r^{k+1}`-balls meet.
fn children_meet(pm: &ParentMap, a: NodeId, b: NodeId, radius: f64) -> bool {
    let h = pm.hierarchy();
    let space = h.space();
    pm.children(a).any(|ca| {
        let pa = h.point(ca);
        pm.children(b).any(|cb| space.balls_meet(pa, h.point(cb), radius).is_some())
    })
}

/// Checks T1–T3 on every transition and the bridging conditions T4, T5 on levels up to `bridge_limit` nodes.
pub fn verify_t(pm: &ParentMap) -> TReport {
    verify_t_limited(pm, BRIDGE_LEVEL_LIMIT)
}

pub fn verify_t_limited(pm: &ParentMap, bridge_limit: usize) -> TReport {
    let h = pm.hierarchy();
    let b = pm.bundle();
    let space = h.space();
    let mut report = TReport::default();
    for k in h.k_min..h.k_max {
        let (rk, rk1) = (h.rk(k), h.rk(k + 1));
        let t = pm.transition(k + 1);
        for parent in h.nodes(k) {
            let fan = t.children[parent.slot()].len();
            if fan == 0 {
                report.orphans.push(parent);
            }
            report.max_fan_in = report.max_fan_in.max(fan);
            let pack = packing_number(space, h.point(parent), b.alpha1 * rk, h.c_star * rk1);
            if fan > pack {
                report.fan_in_above_packing.push((parent, fan, pack));
            }
        }
        let coarse = h.index(k, b.alpha2 * rk);
        for child in h.nodes(k + 1) {
            let parent = pm.parent(child).expect("transition");
            let d = h.dist(child, parent);
            if !(d < b.alpha1 * rk) {
                report.t2.push(DistanceViolation { child, parent, distance: d, bound: b.alpha1 * rk });
            }
            coarse.for_each_within(space, h.point(child), b.alpha2 * rk, |q, d| {
                let close = h.node_at(k, q).expect("center");
                if close != parent {
                    report.t3.push(CloseViolation { child, assigned: parent, close, distance: d });
                }
            });
        }
        if h.node_count(k) > bridge_limit {
            report.skipped_levels.push(k);
            continue;
        }
        let ball = b.alpha3 * rk;
        let child_ball = b.alpha3 * rk1;
        let mut memo: BTreeMap<(NodeId, NodeId), bool> = BTreeMap::new();
        let mut meet = |x: NodeId, y: NodeId| -> bool {
            if x == y {
                return !pm.child_ordinals(x).is_empty();
            }
            let key = (x.min(y), x.max(y));
            *memo.entry(key).or_insert_with(|| children_meet(pm, key.0, key.1, child_ball))
        };
        let pairs_index = h.index(k, 2.0 * ball);
        for a in h.nodes(k) {
            let mut near = BTreeSet::new();
            pairs_index.for_each_within(space, h.point(a), 2.0 * ball, |q, _| {
                let other = h.node_at(k, q).expect("center");
                if other > a {
                    near.insert(other);
                }
            });
            for other in near {
                if let Some(witness) = space.balls_meet(h.point(a), h.point(other), ball) {
                    report.t4_pairs += 1;
                    if !meet(a, other) {
                        report.t4.push(BridgeFailure { a, b: other, witness, far_child: None });
                    }
                }
            }
        }
        let near_index = h.index(k, ball);
        for child in h.nodes(k + 1) {
            let parent = pm.parent(child).expect("transition");
            if h.dist(child, parent) < h.big_c_star * rk {
                continue;
            }
            let mut targets = Vec::new();
            near_index.for_each_within(space, h.point(child), ball, |q, _| {
                targets.push(h.node_at(k, q).expect("center"));
            });
            targets.sort_unstable();
            for n in targets {
                report.t5_cases += 1;
                if !meet(parent, n) {
                    report.t5.push(BridgeFailure { a: parent, b: n, witness: h.point(child), far_child: Some(child) });
                }
            }
        }
    }
    report
}
