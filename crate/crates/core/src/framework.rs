//! The cube tree as a tree with a reference point, scale sections and the
//! quasi-metric `δ_M` built from section graphs.
//!
//! The partition attached to a node is its cube `Q` (a finite set is its own
//! closure). Section graphs join nodes whose cubes touch under the cube
//! system's contact radius.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::cubes::{CubeSystem, Family};
use crate::error::{Error, Result};
use crate::nets::NodeId;
use crate::sample::{derive_seed, seeded};
use crate::space::PointId;

/// Levels `k₀..=k_max` of the cube system, with `k₀` the finest single-node level.
#[derive(Clone, Debug)]
pub struct RefTree {
    pub k0: i32,
    pub k_max: i32,
    offsets: Vec<usize>,
    parent: Vec<u32>,
    children: Vec<Vec<u32>>,
    /// Nodes whose containment parent differs from the parent map.
    pub parent_mismatches: usize,
}

impl RefTree {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn index(&self, node: NodeId) -> usize {
        self.offsets[(node.level - self.k0) as usize] + node.slot()
    }

    pub fn node(&self, idx: usize) -> NodeId {
        let li = self.offsets.partition_point(|&o| o <= idx) - 1;
        NodeId::new(self.k0 + li as i32, (idx - self.offsets[li]) as u32 + 1)
    }

    pub fn parent(&self, idx: usize) -> usize {
        self.parent[idx] as usize
    }

    pub fn children(&self, idx: usize) -> &[u32] {
        &self.children[idx]
    }

    /// `[w]`: distance in levels below the root.
    pub fn depth(&self, idx: usize) -> i32 {
        self.node(idx).level - self.k0
    }

    /// Nodes of `[w] = depth`.
    pub fn level_nodes(&self, depth: i32) -> core::ops::Range<usize> {
        let li = depth as usize;
        self.offsets[li]..self.offsets[li + 1]
    }

    /// `b(w, v)`: steps from `w` up to the first ancestor shared with `v`.
    pub fn b(&self, w: usize, v: usize) -> usize {
        let (mut a, mut c) = (w, v);
        let (mut da, dc) = (self.depth(a), self.depth(c));
        let mut steps = 0;
        while da > dc {
            a = self.parent(a);
            da -= 1;
            steps += 1;
        }
        while da < self.depth(c) {
            c = self.parent(c);
        }
        while a != c {
            a = self.parent(a);
            c = self.parent(c);
            steps += 1;
        }
        steps
    }

    /// The set of periodic points (`π^n(w) = w`), which the tree requires to have at most one element.
    pub fn periodic_points(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&w| {
                let mut x = self.parent(w);
                for _ in 0..=(self.k_max - self.k0) {
                    if x == w {
                        return true;
                    }
                    x = self.parent(x);
                }
                x == w
            })
            .collect()
    }

    /// Every node reaches the root.
    pub fn has_common_ancestors(&self) -> bool {
        (0..self.len()).all(|w| {
            let mut x = w;
            for _ in 0..=(self.k_max - self.k0) {
                x = self.parent(x);
            }
            x == self.root()
        })
    }
}

/// Tree from cube containment, rooted at the finest level with a single node.
pub fn to_tree(cs: &CubeSystem) -> Result<RefTree> {
    let h = cs.hierarchy();
    if h.node_count(h.k_min) != 1 {
        return Err(Error::NoSingletonRoot { level: h.k_min, nodes: h.node_count(h.k_min) });
    }
    let k0 = h.level_range().filter(|&k| h.node_count(k) == 1).max().expect("coarsest level");
    let mut offsets = vec![0usize];
    for k in k0..=h.k_max {
        offsets.push(offsets.last().unwrap() + h.node_count(k));
    }
    let total = *offsets.last().unwrap();
    let mut parent = vec![0u32; total];
    let mut mismatches = 0;
    for k in (k0 + 1)..=h.k_max {
        for node in h.nodes(k) {
            let q = cs.q_set(node);
            let map_parent = cs.parent_map().parent(node).expect("below the root");
            let by_containment = q.first().and_then(|&p| {
                cs.holders(Family::Q, k - 1, PointId(p)).next().filter(|&cand| {
                    let big = cs.q_set(cand);
                    q.iter().all(|x| big.binary_search(x).is_ok())
                })
            });
            let chosen = by_containment.unwrap_or(map_parent);
            if chosen != map_parent {
                mismatches += 1;
            }
            let li = (k - k0) as usize;
            parent[offsets[li] + node.slot()] = (offsets[li - 1] + chosen.slot()) as u32;
        }
    }
    let mut children = vec![Vec::new(); total];
    for w in 1..total {
        children[parent[w] as usize].push(w as u32);
    }
    Ok(RefTree { k0, k_max: h.k_max, offsets, parent, children, parent_mismatches: mismatches })
}

/// Exact diameter of a node's cube.
pub fn diam_g(cs: &CubeSystem, node: NodeId) -> f64 {
    let space = cs.space();
    let q = cs.q_set(node);
    let mut best = 0.0f64;
    for (i, &a) in q.iter().enumerate() {
        for &b in &q[i + 1..] {
            best = best.max(space.dist(PointId(a), PointId(b)));
        }
    }
    best
}

/// A section `Λ_s` with its graph.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleSection {
    pub s: f64,
    /// Tree indices, ascending.
    pub nodes: Vec<usize>,
    /// Unordered edges `(a, b)`, `a < b`.
    pub edges: Vec<(usize, usize)>,
}

/// Tree, cube diameters, section intervals and the candidate section edges.
#[derive(Clone, Debug)]
pub struct Framework<'a> {
    cs: &'a CubeSystem,
    pub tree: RefTree,
    g: Vec<f64>,
    size: Vec<usize>,
    /// Per node: neighbors `(v, lo, hi)`, adjacent on sections with `lo <= s < hi`.
    adjacency: Vec<Vec<(u32, f64, f64)>>,
    /// Cube path of each point: tree index per depth, finest last.
    paths: Vec<Vec<u32>>,
    /// Ascending distinct positive cube diameters.
    pub breakpoints: Vec<f64>,
}

impl<'a> Framework<'a> {
    pub fn new(cs: &'a CubeSystem) -> Result<Self> {
        let tree = to_tree(cs)?;
        let n_nodes = tree.len();
        let g: Vec<f64> = (0..n_nodes).map(|w| diam_g(cs, tree.node(w))).collect();
        let size: Vec<usize> = (0..n_nodes).map(|w| cs.q_set(tree.node(w)).len()).collect();
        let space = cs.space();
        let depths = (tree.k_max - tree.k0 + 1) as usize;
        let paths: Vec<Vec<u32>> = space
            .points()
            .map(|p| {
                let p = cs.representative(p);
                (0..depths)
                    .map(|d| {
                        let k = tree.k0 + d as i32;
                        cs.holders(Family::Q, k, p).next().map(|n| tree.index(n) as u32).unwrap_or(u32::MAX)
                    })
                    .collect()
            })
            .collect();
        let mut fw = Framework { cs, tree, g, size, adjacency: vec![Vec::new(); n_nodes], paths, breakpoints: Vec::new() };
        let mut bp: Vec<f64> = (0..n_nodes).filter(|&w| fw.size[w] >= 2).map(|w| fw.g[w]).filter(|&g| g > 0.0).collect();
        bp.sort_unstable_by(f64::total_cmp);
        bp.dedup();
        fw.breakpoints = bp;

        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for &(a, b) in cs.contacts() {
            let (pa, pb) = (&fw.paths[a as usize], &fw.paths[b as usize]);
            for &x in pa {
                for &y in pb {
                    if x != y && x != u32::MAX && y != u32::MAX {
                        pairs.push((x.min(y), x.max(y)));
                    }
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        for (x, y) in pairs {
            let (lx, hx) = fw.interval(x as usize);
            let (ly, hy) = fw.interval(y as usize);
            let (lo, hi) = (lx.max(ly), hx.min(hy));
            if lo < hi {
                fw.adjacency[x as usize].push((y, lo, hi));
                fw.adjacency[y as usize].push((x, lo, hi));
            }
        }
        Ok(fw)
    }

    pub fn cubes(&self) -> &CubeSystem {
        self.cs
    }

    pub fn g(&self, w: usize) -> f64 {
        self.g[w]
    }

    pub fn size(&self, w: usize) -> usize {
        self.size[w]
    }

    /// Scales `s` with `w ∈ Λ_s`: `[g(w), g(π(w)))`, empty for the root and single points.
    pub fn interval(&self, w: usize) -> (f64, f64) {
        if w == self.tree.root() || self.size[w] < 2 {
            return (0.0, 0.0);
        }
        (self.g[w], self.g[self.tree.parent(w)])
    }

    pub fn in_section(&self, w: usize, s: f64) -> bool {
        let (lo, hi) = self.interval(w);
        lo <= s && s < hi
    }

    /// Removes a section edge (mutation testing).
    pub fn remove_edge(&mut self, w: usize, v: usize) {
        self.adjacency[w].retain(|e| e.0 as usize != v);
        self.adjacency[v].retain(|e| e.0 as usize != w);
    }

    fn neighbors_at(&self, w: usize, s: f64) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[w].iter().filter(move |e| e.1 <= s && s < e.2).map(|e| e.0 as usize)
    }

    /// Section node holding `p` at scale `s`.
    pub fn section_node(&self, p: PointId, s: f64) -> Option<usize> {
        let path = &self.paths[p.index()];
        path.iter().rev().map(|&w| w as usize).find(|&w| w != u32::MAX as usize && self.in_section(w, s))
    }

    pub fn scale_section(&self, s: f64) -> ScaleSection {
        let nodes: Vec<usize> = (0..self.tree.len()).filter(|&w| self.in_section(w, s)).collect();
        let mut edges = Vec::new();
        for &w in &nodes {
            for v in self.neighbors_at(w, s) {
                if w < v {
                    edges.push((w, v));
                }
            }
        }
        edges.sort_unstable();
        ScaleSection { s, nodes, edges }
    }

    /// Hop distance from `a` to `b` in the section graph at `s`, if at most `limit`.
    fn hops_within(&self, a: usize, b: usize, s: f64, limit: usize) -> Option<usize> {
        if a == b {
            return Some(0);
        }
        let mut frontier = vec![a];
        let mut seen = vec![a];
        for depth in 1..=limit {
            let mut next = Vec::new();
            for &w in &frontier {
                for v in self.neighbors_at(w, s) {
                    if v == b {
                        return Some(depth);
                    }
                    if !seen.contains(&v) {
                        seen.push(v);
                        next.push(v);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        None
    }

    /// Smallest breakpoint at which the section cubes of `x` and `y` are at most `m` hops apart.
    pub fn delta_m(&self, x: PointId, y: PointId, m: usize) -> f64 {
        let (x, y) = (self.cs.representative(x), self.cs.representative(y));
        if x == y {
            return 0.0;
        }
        for &s in &self.breakpoints {
            if let (Some(a), Some(b)) = (self.section_node(x, s), self.section_node(y, s)) {
                if self.hops_within(a, b, s, m).is_some() {
                    return s;
                }
            }
        }
        f64::INFINITY
    }

    /// First breakpoint at which the closed one-hop neighborhood of the section cube of `x`
    /// leaves the subtree of `w`.
    fn escape_scale(&self, w: usize, x: PointId) -> f64 {
        let inside = |v: usize| {
            let mut a = v;
            while self.tree.depth(a) > self.tree.depth(w) {
                a = self.tree.parent(a);
            }
            a == w
        };
        for &s in &self.breakpoints {
            if let Some(a) = self.section_node(x, s) {
                if !inside(a) || self.neighbors_at(a, s).any(|v| !inside(v)) {
                    return s;
                }
            }
        }
        f64::INFINITY
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameworkConfig {
    pub m: usize,
    pub pair_budget: usize,
    pub seed: u64,
}

impl Default for FrameworkConfig {
    fn default() -> Self {
        FrameworkConfig { m: 2, pair_budget: 2000, seed: 0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrameworkReport {
    pub m: usize,
    pub periodic_points: usize,
    pub common_ancestors: bool,
    pub parent_mismatches: usize,
    pub pairs: usize,
    /// `max(δ_M/d, d/δ_M)` over sampled pairs.
    pub eta1: f64,
    /// `min_w` of the largest thickness ratio over nodes with at least two points.
    pub eta2: f64,
    /// Largest closed one-hop neighborhood over all sections.
    pub max_degree: usize,
    /// `max(g/r^[w], r^[w]/g)` over nodes with at least two points.
    pub eta3: f64,
    pub max_fan_in: usize,
    /// Nodes with an empty exclusive part.
    pub empty_interior: Vec<NodeId>,
    /// Leaves whose cube is not a single point.
    pub thick_leaves: Vec<NodeId>,
}

impl FrameworkReport {
    pub fn finite(&self) -> bool {
        self.eta1.is_finite() && self.eta2.is_finite() && self.eta2 > 0.0 && self.eta3.is_finite()
    }

    pub fn passes(&self) -> bool {
        self.finite()
            && self.periodic_points <= 1
            && self.common_ancestors
            && self.empty_interior.is_empty()
            && self.thick_leaves.is_empty()
    }
}

pub fn verify_basic_framework(fw: &Framework<'_>, config: &FrameworkConfig) -> FrameworkReport {
    let cs = fw.cubes();
    let tree = &fw.tree;
    let space = cs.space();
    let r = cs.hierarchy().r;
    let mut rep = FrameworkReport {
        m: config.m,
        periodic_points: tree.periodic_points().len(),
        common_ancestors: tree.has_common_ancestors(),
        parent_mismatches: tree.parent_mismatches,
        eta2: f64::INFINITY,
        ..Default::default()
    };

    let avail = cs.available();
    let mut rng = seeded(derive_seed(config.seed, 0xb1));
    for _ in 0..config.pair_budget {
        if avail.len() < 2 {
            break;
        }
        let x = PointId(avail[rng.gen_range(0..avail.len())]);
        let y = PointId(avail[rng.gen_range(0..avail.len())]);
        if x == y {
            continue;
        }
        let d = space.dist(x, y);
        let delta = fw.delta_m(x, y, config.m);
        rep.pairs += 1;
        rep.eta1 = rep.eta1.max((delta / d).max(d / delta));
    }

    for w in 0..tree.len() {
        if w == tree.root() || fw.size(w) < 2 {
            continue;
        }
        let up = fw.g(tree.parent(w));
        if up <= 0.0 {
            continue;
        }
        let node = tree.node(w);
        let center = cs.hierarchy().point(node);
        let x = if cs.q_set(node).binary_search(&center.0).is_ok() { center } else { PointId(cs.q_set(node)[0]) };
        rep.eta2 = rep.eta2.min(fw.escape_scale(w, x) / up);
    }

    let bp = &fw.breakpoints;
    for &s in bp {
        for w in 0..tree.len() {
            if fw.in_section(w, s) {
                rep.max_degree = rep.max_degree.max(1 + fw.neighbors_at(w, s).count());
            }
        }
    }

    for w in 0..tree.len() {
        rep.max_fan_in = rep.max_fan_in.max(tree.children(w).len());
        let node = tree.node(w);
        if fw.size(w) == 0 {
            rep.empty_interior.push(node);
        }
        if tree.children(w).is_empty() && fw.size(w) > 1 {
            rep.thick_leaves.push(node);
        }
        if fw.size(w) >= 2 {
            let scale = libm::pow(r, tree.depth(w) as f64);
            let g = fw.g(w);
            rep.eta3 = rep.eta3.max((g / scale).max(scale / g));
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::{relaxed_constants, AlphaOverrides};
    use crate::nets::{build_hierarchy, default_window};
    use crate::parent::assign_parents;
    use crate::space::{generate_space, GeneratorSpec};
    use alloc::sync::Arc;

    fn cubes(n: usize) -> CubeSystem {
        let s = Arc::new(generate_space(GeneratorSpec::Interval(n)).unwrap());
        let b = relaxed_constants(0.9, 1.0, 2.02, 4, 0.25, &AlphaOverrides::default()).unwrap();
        let (k0, k1) = default_window(&s, 0.25, 0.9);
        let h = build_hierarchy(s, 0.25, 0.9, 1.0, k0, k1, PointId(0)).unwrap();
        CubeSystem::build(assign_parents(h, b).unwrap()).unwrap()
    }

    #[test]
    fn tree_axioms_and_sibling_b() {
        let cs = cubes(257);
        let fw = Framework::new(&cs).unwrap();
        assert_eq!(fw.tree.periodic_points(), vec![0]);
        assert!(fw.tree.has_common_ancestors());
        assert_eq!(fw.tree.parent_mismatches, 0);
        let kids = fw.tree.children(0);
        let (a, b) = (kids[0] as usize, kids[1] as usize);
        assert_eq!((fw.tree.b(a, b), fw.tree.b(b, a)), (1, 1));
        assert_eq!(fw.g(0), 1.0);
    }

    #[test]
    fn sections_are_antichains_covering_points() {
        let cs = cubes(257);
        let fw = Framework::new(&cs).unwrap();
        assert!(fw.scale_section(1.0).nodes.is_empty());
        for &s in &fw.breakpoints {
            let sec = fw.scale_section(s);
            let mut seen = vec![0usize; 257];
            for &w in &sec.nodes {
                for &p in cs.q_set(fw.tree.node(w)) {
                    seen[p as usize] += 1;
                }
            }
            assert!(seen.iter().all(|&c| c <= 1));
        }
    }

    #[test]
    fn delta_basic_properties() {
        let cs = cubes(257);
        let fw = Framework::new(&cs).unwrap();
        assert_eq!(fw.delta_m(PointId(3), PointId(3), 2), 0.0);
        let a = fw.delta_m(PointId(3), PointId(140), 2);
        assert_eq!(a, fw.delta_m(PointId(140), PointId(3), 2));
        assert!(fw.delta_m(PointId(3), PointId(140), 4) <= a);
        let rep = verify_basic_framework(&fw, &FrameworkConfig::default());
        assert!(rep.passes(), "{rep:?}");
    }
}
