//! Discrete p-energies on level graphs, their decay in depth, and the
//! resulting conformal-dimension estimate.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::cubes::Family;
use crate::error::{Error, Result};
use crate::framework::Framework;
use crate::nets::NodeId;
use crate::sample::{derive_seed, sample_indices, seeded};

/// Undirected simple graph on `0..n`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(u32, u32)>,
}

impl Graph {
    pub fn path(len: usize) -> Self {
        Graph { n: len + 1, edges: (0..len as u32).map(|i| (i, i + 1)).collect() }
    }

    fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        adj
    }
}

/// Where an assembled problem came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Origin {
    pub w: NodeId,
    pub k: usize,
    pub m: usize,
}

/// Dirichlet problem: `fixed[u]` holds the boundary value, `None` marks a free vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyProblem {
    pub p: f64,
    pub graph: Graph,
    pub fixed: Vec<Option<f64>>,
    pub origin: Option<Origin>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyResult {
    pub value: f64,
    pub potential: Vec<f64>,
    /// Reweighting rounds.
    pub iterations: usize,
    /// Total conjugate-gradient steps.
    pub inner_iterations: usize,
    /// Last relative energy change.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_inner: usize,
    pub max_outer: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-10, max_inner: 10_000, max_outer: 2_000 }
    }
}

/// `Σ |f(u) − f(v)|^p` over unordered edges.
pub fn energy_of(graph: &Graph, p: f64, f: &[f64]) -> f64 {
    graph.edges.iter().fold(0.0, |acc, &(a, b)| acc + libm::pow(libm::fabs(f[a as usize] - f[b as usize]), p))
}

const WEIGHT_FLOOR: f64 = 1e-12;
const EPS_START: f64 = 1e-1;
const EPS_FLOOR: f64 = 1e-10;

/// `(Δ² + ε²)^{p/2}` with its first and (floored) second derivative in `Δ`.
fn smoothed(p: f64, gap: f64, eps: f64) -> (f64, f64, f64) {
    let q = gap * gap + eps * eps;
    let v = libm::pow(q, 0.5 * p);
    let d1 = p * gap * v / q;
    let d2 = p * v / (q * q) * ((p - 1.0) * gap * gap + eps * eps);
    (v, d1, d2.max(WEIGHT_FLOOR))
}

/// Boundary-distance interpolation `d_sink / (d_source + d_sink)`; two-valued
/// boundaries map to their min/max.
fn initial_potential(problem: &EnergyProblem, adj: &[Vec<u32>]) -> Vec<f64> {
    let n = problem.graph.n;
    let vals: Vec<f64> = problem.fixed.iter().flatten().copied().collect();
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let bfs = |target: f64| {
        let mut d = vec![usize::MAX; n];
        let mut q = VecDeque::new();
        for (u, v) in problem.fixed.iter().enumerate() {
            if *v == Some(target) {
                d[u] = 0;
                q.push_back(u);
            }
        }
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                let v = v as usize;
                if d[v] == usize::MAX && problem.fixed[v].is_none() {
                    d[v] = d[u] + 1;
                    q.push_back(v);
                }
            }
        }
        d
    };
    let (dh, dl) = (bfs(hi), bfs(lo));
    (0..n)
        .map(|u| match problem.fixed[u] {
            Some(v) => v,
            None => match (dh[u], dl[u]) {
                (usize::MAX, usize::MAX) => lo,
                (usize::MAX, _) => lo,
                (_, usize::MAX) => hi,
                (a, b) => lo + (hi - lo) * b as f64 / (a + b) as f64,
            },
        })
        .collect()
}

/// Jacobi-preconditioned CG for the weighted Laplacian restricted to the free
/// vertices (edges into the boundary only add to the diagonal). `x` is indexed by slot.
fn cg(adj_w: &[Vec<(u32, f64)>], free: &[usize], slot: &[usize], rhs: &[f64], x: &mut [f64], max_inner: usize, rtol: f64) -> (usize, bool) {
    let m = free.len();
    let diag: Vec<f64> = free.iter().map(|&u| adj_w[u].iter().map(|e| e.1).sum()).collect();
    let apply = |v: &[f64], out: &mut [f64]| {
        for (i, &u) in free.iter().enumerate() {
            let mut acc = diag[i] * v[i];
            for &(nb, w) in &adj_w[u] {
                let s = slot[nb as usize];
                if s != usize::MAX {
                    acc -= w * v[s];
                }
            }
            out[i] = acc;
        }
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut ax = vec![0.0; m];
    apply(x, &mut ax);
    let mut res: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let bnorm = libm::sqrt(dot(rhs, rhs)).max(f64::MIN_POSITIVE);
    let mut z: Vec<f64> = res.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut dir = z.clone();
    let mut rz = dot(&res, &z);
    let mut steps = 0;
    while libm::sqrt(dot(&res, &res)) > rtol * bnorm {
        if steps >= max_inner {
            return (steps, false);
        }
        apply(&dir, &mut ax);
        let denom = dot(&dir, &ax);
        if denom <= 0.0 {
            break;
        }
        let alpha = rz / denom;
        for i in 0..m {
            x[i] += alpha * dir[i];
            res[i] -= alpha * ax[i];
            z[i] = res[i] / diag[i];
        }
        let rz_new = dot(&res, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..m {
            dir[i] = z[i] + beta * dir[i];
        }
        steps += 1;
    }
    (steps, true)
}

/// Minimizes the p-energy. `p = 2` is one linear solve. Otherwise damped Newton
/// steps (reweighted least squares with curvature weights) on the smoothed
/// terms `(Δ² + ε²)^{p/2}`, with `ε` shrunk from 0.1 to 1e-10; the returned
/// value is the exact energy of the final potential. Free components without
/// boundary are left at their initial constant.
pub fn solve_p_harmonic(problem: &EnergyProblem, config: &SolverConfig) -> Result<EnergyResult> {
    let p = problem.p;
    if !(p > 1.0) || !(config.tol > 0.0) {
        return Err(Error::InvalidInput("p must exceed 1 and tol must be positive".into()));
    }
    let g = &problem.graph;
    let adj = g.adjacency();
    let mut f = initial_potential(problem, &adj);

    // Free vertices reachable from the boundary.
    let mut reach = vec![false; g.n];
    let mut q: VecDeque<usize> = (0..g.n).filter(|&u| problem.fixed[u].is_some()).collect();
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            let v = v as usize;
            if problem.fixed[v].is_none() && !reach[v] {
                reach[v] = true;
                q.push_back(v);
            }
        }
    }
    let free: Vec<usize> = (0..g.n).filter(|&u| reach[u]).collect();
    if free.is_empty() {
        let value = energy_of(g, p, &f);
        return Ok(EnergyResult { value, potential: f, iterations: 0, inner_iterations: 0, residual: 0.0 });
    }
    let mut slot = vec![usize::MAX; g.n];
    for (i, &u) in free.iter().enumerate() {
        slot[u] = i;
    }
    let edges: Vec<(usize, usize)> = g
        .edges
        .iter()
        .map(|&(a, b)| (a as usize, b as usize))
        .filter(|&(a, b)| reach[a] || reach[b])
        .collect();

    if p == 2.0 {
        let mut adj_w = vec![Vec::new(); g.n];
        let mut rhs = vec![0.0; free.len()];
        for &(a, b) in &edges {
            adj_w[a].push((b as u32, 1.0));
            adj_w[b].push((a as u32, 1.0));
            for (x, y) in [(a, b), (b, a)] {
                if let (true, Some(val)) = (slot[x] != usize::MAX, problem.fixed[y]) {
                    rhs[slot[x]] += val;
                }
            }
        }
        let mut x: Vec<f64> = free.iter().map(|&u| f[u]).collect();
        let (steps, ok) = cg(&adj_w, &free, &slot, &rhs, &mut x, config.max_inner, 1e-13);
        if !ok {
            return Err(Error::NoConvergence { iterations: steps });
        }
        for (i, &u) in free.iter().enumerate() {
            f[u] = x[i];
        }
        let value = energy_of(g, p, &f);
        return Ok(EnergyResult { value, potential: f, iterations: 1, inner_iterations: steps, residual: 0.0 });
    }

    let smooth = |f: &[f64], eps: f64| edges.iter().fold(0.0, |acc, &(a, b)| acc + smoothed(p, f[a] - f[b], eps).0);
    let (mut outer, mut inner) = (0usize, 0usize);
    let mut residual;
    let mut eps = EPS_START;
    loop {
        let mut e = smooth(&f, eps);
        loop {
            if outer >= config.max_outer {
                return Err(Error::NoConvergence { iterations: inner });
            }
            outer += 1;
            let mut grad = vec![0.0; free.len()];
            let mut adj_w = vec![Vec::new(); g.n];
            for &(a, b) in &edges {
                let (_, d1, d2) = smoothed(p, f[a] - f[b], eps);
                if slot[a] != usize::MAX {
                    grad[slot[a]] += d1;
                }
                if slot[b] != usize::MAX {
                    grad[slot[b]] -= d1;
                }
                adj_w[a].push((b as u32, d2));
                adj_w[b].push((a as u32, d2));
            }
            let rhs: Vec<f64> = grad.iter().map(|v| -v).collect();
            let mut dir = vec![0.0; free.len()];
            inner += cg(&adj_w, &free, &slot, &rhs, &mut dir, config.max_inner, 1e-6).0;
            let slope: f64 = grad.iter().zip(&dir).map(|(a, b)| a * b).sum();
            residual = if e > 0.0 { -slope / e } else { 0.0 };
            if !(slope < 0.0) || residual < config.tol {
                break;
            }
            let mut theta = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let trial: Vec<f64> = {
                    let mut t = f.clone();
                    for (i, &u) in free.iter().enumerate() {
                        t[u] += theta * dir[i];
                    }
                    t
                };
                let et = smooth(&trial, eps);
                if et <= e + 1e-4 * theta * slope {
                    f = trial;
                    e = et;
                    moved = true;
                    break;
                }
                theta *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if eps <= EPS_FLOOR {
            break;
        }
        eps = (eps * 0.1).max(EPS_FLOOR);
    }
    let value = energy_of(g, p, &f);
    Ok(EnergyResult { value, potential: f, iterations: outer, inner_iterations: inner, residual })
}

/// Runs independent jobs, returning results in job order.
pub trait JobRunner: Sync {
    fn run<T, R, F>(&self, jobs: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl JobRunner for Sequential {
    fn run<T, R, F>(&self, jobs: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        jobs.into_iter().map(f).collect()
    }
}

/// Level graphs of the tree, indexed by depth and slot.
pub struct EnergyContext<'a> {
    fw: &'a Framework<'a>,
    graphs: Vec<Vec<Vec<u32>>>,
}

impl<'a> EnergyContext<'a> {
    pub fn new(fw: &'a Framework<'a>) -> Self {
        let t = &fw.tree;
        let graphs = (t.k0..=t.k_max).map(|k| fw.cubes().level_graph(Family::Q, k)).collect();
        EnergyContext { fw, graphs }
    }

    pub fn framework(&self) -> &Framework<'a> {
        self.fw
    }

    /// Deepest available depth.
    pub fn max_depth(&self) -> usize {
        self.graphs.len() - 1
    }

    fn start(&self, depth: usize) -> usize {
        self.fw.tree.level_nodes(depth as i32).start
    }

    /// Nodes of the same level within `m` hops of `w` (tree indices, BFS order).
    fn near(&self, w: usize, m: usize) -> Vec<usize> {
        let depth = self.fw.tree.depth(w) as usize;
        let (g, base) = (&self.graphs[depth], self.start(depth));
        let mut seen = vec![w - base];
        let mut frontier = vec![w - base];
        for _ in 0..m {
            let mut next = Vec::new();
            for &a in &frontier {
                for &b in &g[a] {
                    let b = b as usize;
                    if !seen.contains(&b) {
                        seen.push(b);
                        next.push(b);
                    }
                }
            }
            frontier = next;
        }
        seen.into_iter().map(|s| s + base).collect()
    }

    /// Whether some same-level node lies more than `m` hops from `w`.
    pub fn has_sink(&self, w: usize, m: usize) -> bool {
        let depth = self.fw.tree.depth(w) as usize;
        self.near(w, m).len() < self.graphs[depth].len()
    }

    /// Builds the problem for `w` refined `k` levels with sink beyond `m` hops.
    pub fn assemble(&self, p: f64, w: NodeId, k: usize, m: usize) -> Result<EnergyProblem> {
        let t = &self.fw.tree;
        let wi = t.index(w);
        let target = t.depth(wi) as usize + k;
        if k == 0 || target > self.max_depth() {
            return Err(Error::DepthUnavailable { level: w.level + k as i32, finest: t.k_max });
        }
        // (tree index, is source) for the refinements of the near set.
        let mut layer: Vec<(usize, bool)> = self.near(wi, m).into_iter().map(|v| (v, v == wi)).collect();
        for _ in 0..k {
            layer = layer.iter().flat_map(|&(v, src)| t.children(v).iter().map(move |&c| (c as usize, src))).collect();
        }
        let base = self.start(target);
        let g = &self.graphs[target];
        let mut local = vec![u32::MAX; g.len()];
        let mut fixed = Vec::new();
        for &(v, src) in &layer {
            local[v - base] = fixed.len() as u32;
            fixed.push(if src { Some(1.0) } else { None });
        }
        let mut edges = Vec::new();
        for &(v, _) in &layer {
            let a = v - base;
            for &b in &g[a] {
                let b = b as usize;
                if local[b] == u32::MAX {
                    local[b] = fixed.len() as u32;
                    fixed.push(Some(0.0));
                }
                let (x, y) = (local[a], local[b]);
                if fixed[y as usize] == Some(0.0) || x < y {
                    edges.push((x, y));
                }
            }
        }
        edges.sort_unstable();
        Ok(EnergyProblem { p, graph: Graph { n: fixed.len(), edges }, fixed, origin: Some(Origin { w, k, m }) })
    }

    pub fn energy(&self, p: f64, w: NodeId, k: usize, m: usize, config: &SolverConfig) -> Result<EnergyResult> {
        solve_p_harmonic(&self.assemble(p, w, k, m)?, config)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Decaying,
    Flat,
    Growing,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Decaying => "decaying",
            Verdict::Flat => "flat",
            Verdict::Growing => "growing",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DepthRow {
    pub k: usize,
    pub sup_energy: f64,
    pub argmax: NodeId,
    pub solves: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayProfile {
    pub p: f64,
    pub rows: Vec<DepthRow>,
    /// Least-squares slope of `ln sup E` against `k`; `-inf` once the sup vanishes.
    pub slope: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayConfig {
    pub m: usize,
    /// Depth offsets tried, `1..=max_k`.
    pub max_k: usize,
    pub w_budget: usize,
    pub seed: u64,
    /// Flat band as a multiple of `|ln r|`.
    pub band: f64,
    pub solver: SolverConfig,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig { m: 2, max_k: 6, w_budget: 16, seed: 0, band: 0.05, solver: SolverConfig { tol: 1e-8, ..SolverConfig::default() } }
    }
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Sampled `sup_w E_{p,k,w,M}` per depth offset and its decay verdict.
pub fn decay_profile<R: JobRunner>(ctx: &EnergyContext<'_>, p: f64, config: &DecayConfig, runner: &R) -> Result<DecayProfile> {
    let t = &ctx.framework().tree;
    let depth_max = ctx.max_depth();
    // One node sample for every k so rows differ only in refinement depth.
    let mut top = config.max_k.min(depth_max);
    let mut sample = Vec::new();
    while top > 0 {
        sample.clear();
        for depth in 0..=(depth_max - top) {
            let eligible: Vec<usize> = t.level_nodes(depth as i32).filter(|&w| ctx.has_sink(w, config.m)).collect();
            let mut rng = seeded(derive_seed(config.seed, depth as u64));
            sample.extend(sample_indices(&mut rng, eligible.len(), config.w_budget).into_iter().map(|i| t.node(eligible[i])));
        }
        if !sample.is_empty() {
            break;
        }
        top -= 1;
    }
    if top < 3 {
        return Err(Error::InsufficientDepth { usable: top });
    }
    let jobs: Vec<(usize, NodeId)> = (1..=top).flat_map(|k| sample.iter().map(move |&w| (k, w))).collect();
    let results = runner.run(jobs.clone(), |(k, w)| ctx.energy(p, w, k, config.m, &config.solver));
    let mut rows: Vec<DepthRow> = Vec::new();
    for ((k, w), res) in jobs.into_iter().zip(results) {
        let e = res?.value;
        match rows.last_mut() {
            Some(row) if row.k == k => {
                row.solves += 1;
                if e > row.sup_energy {
                    row.sup_energy = e;
                    row.argmax = w;
                }
            }
            _ => rows.push(DepthRow { k, sup_energy: e, argmax: w, solves: 1 }),
        }
    }
    let band = config.band * libm::fabs(libm::log(ctx.framework().cubes().hierarchy().r));
    let (slope, verdict) = if rows.last().map_or(true, |r| r.sup_energy <= 0.0) {
        (f64::NEG_INFINITY, Verdict::Decaying)
    } else {
        let pos: Vec<&DepthRow> = rows.iter().filter(|r| r.sup_energy > 0.0).collect();
        let xs: Vec<f64> = pos.iter().map(|r| r.k as f64).collect();
        let ys: Vec<f64> = pos.iter().map(|r| libm::log(r.sup_energy)).collect();
        let s = if xs.len() < 2 { 0.0 } else { ls_slope(&xs, &ys) };
        let v = if s < -band {
            Verdict::Decaying
        } else if s > band {
            Verdict::Growing
        } else {
            Verdict::Flat
        };
        (s, v)
    };
    Ok(DecayProfile { p, rows, slope, verdict })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArcConfig {
    pub p_min: f64,
    pub p_max: f64,
    pub step: f64,
    pub decay: DecayConfig,
}

impl Default for ArcConfig {
    fn default() -> Self {
        ArcConfig { p_min: 1.001, p_max: 6.0, step: 0.05, decay: DecayConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArcEstimate {
    pub p_low: f64,
    pub p_high: f64,
    pub estimate: f64,
    /// Every tested exponent decays: only an upper bound `1 + step` is visible.
    pub floor: bool,
    /// No tested exponent decays: only the lower bound `p_max` is visible.
    pub ceiling: bool,
    /// Profiles in ascending `p`.
    pub profiles: Vec<DecayProfile>,
}

/// Bisection on `p` between a non-decaying and a decaying exponent.
pub fn estimate_arc_dim<R: JobRunner>(ctx: &EnergyContext<'_>, config: &ArcConfig, runner: &R) -> Result<ArcEstimate> {
    let mut profiles = Vec::new();
    let low = decay_profile(ctx, config.p_min, &config.decay, runner)?;
    let low_decays = low.verdict == Verdict::Decaying;
    profiles.push(low);
    let mut out = if low_decays {
        ArcEstimate { p_low: 1.0, p_high: config.p_min, estimate: 1.0 + config.step, floor: true, ceiling: false, profiles: Vec::new() }
    } else {
        let high = decay_profile(ctx, config.p_max, &config.decay, runner)?;
        let high_decays = high.verdict == Verdict::Decaying;
        profiles.push(high);
        if !high_decays {
            ArcEstimate { p_low: config.p_max, p_high: config.p_max, estimate: config.p_max, floor: false, ceiling: true, profiles: Vec::new() }
        } else {
            let (mut lo, mut hi) = (config.p_min, config.p_max);
            while hi - lo > config.step {
                let mid = 0.5 * (lo + hi);
                let prof = decay_profile(ctx, mid, &config.decay, runner)?;
                if prof.verdict == Verdict::Decaying {
                    hi = mid;
                } else {
                    lo = mid;
                }
                profiles.push(prof);
            }
            ArcEstimate { p_low: lo, p_high: hi, estimate: 0.5 * (lo + hi), floor: false, ceiling: false, profiles: Vec::new() }
        }
    };
    profiles.sort_by(|a, b| a.p.total_cmp(&b.p));
    out.profiles = profiles;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_problem(len: usize, p: f64, hi: f64) -> EnergyProblem {
        let mut fixed = vec![None; len + 1];
        fixed[0] = Some(hi);
        fixed[len] = Some(0.0);
        EnergyProblem { p, graph: Graph::path(len), fixed, origin: None }
    }

    #[test]
    fn path_closed_form() {
        for (p, want) in [(2.0, 0.25), (3.0, 0.0625)] {
            let r = solve_p_harmonic(&path_problem(4, p, 1.0), &SolverConfig::default()).unwrap();
            assert!((r.value - want).abs() < 1e-9, "{p}: {}", r.value);
        }
        let r = solve_p_harmonic(&path_problem(4, 2.0, 1.0), &SolverConfig::default()).unwrap();
        for (i, v) in r.potential.iter().enumerate() {
            assert!((v - (1.0 - i as f64 / 4.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn no_free_vertices() {
        let g = Graph { n: 3, edges: vec![(0, 1), (0, 2), (1, 2)] };
        let prob = EnergyProblem { p: 1.5, graph: g, fixed: vec![Some(1.0), Some(0.0), Some(0.0)], origin: None };
        assert_eq!(solve_p_harmonic(&prob, &SolverConfig::default()).unwrap().value, 2.0);
    }

    #[test]
    fn boundary_scaling() {
        let a = solve_p_harmonic(&path_problem(5, 2.5, 1.0), &SolverConfig::default()).unwrap().value;
        let b = solve_p_harmonic(&path_problem(5, 2.5, 3.0), &SolverConfig::default()).unwrap().value;
        assert!((b / a - libm::pow(3.0, 2.5)).abs() < 1e-6 * b);
    }

    #[test]
    fn isolated_free_component_is_ignored() {
        let g = Graph { n: 5, edges: vec![(0, 1), (1, 2), (3, 4)] };
        let prob = EnergyProblem { p: 3.0, graph: g, fixed: vec![Some(1.0), None, Some(0.0), None, None], origin: None };
        let r = solve_p_harmonic(&prob, &SolverConfig::default()).unwrap();
        assert!((r.value - 0.25).abs() < 1e-8);
    }

    fn interval_cubes(n: usize) -> crate::cubes::CubeSystem {
        use crate::certify::{relaxed_constants, AlphaOverrides};
        use crate::nets::{build_hierarchy, default_window};
        use crate::space::{generate_space, GeneratorSpec, PointId};
        use alloc::sync::Arc;
        let s = Arc::new(generate_space(GeneratorSpec::Interval(n)).unwrap());
        let b = relaxed_constants(0.9, 1.0, 2.02, 4, 0.25, &AlphaOverrides::default()).unwrap();
        let (k0, k1) = default_window(&s, 0.25, 0.9);
        let h = build_hierarchy(s, 0.25, 0.9, 1.0, k0, k1, PointId(0)).unwrap();
        crate::cubes::CubeSystem::build(crate::parent::assign_parents(h, b).unwrap()).unwrap()
    }

    #[test]
    fn assembly_boundaries() {
        let cs = interval_cubes(257);
        let fw = Framework::new(&cs).unwrap();
        let ctx = EnergyContext::new(&fw);
        let root = fw.tree.node(0);
        let e = ctx.energy(2.0, root, 2, 2, &SolverConfig::default()).unwrap();
        assert_eq!(e.value, 0.0);
        let too_deep = ctx.max_depth() + 1;
        assert!(matches!(ctx.assemble(2.0, root, too_deep, 2), Err(Error::DepthUnavailable { .. })));
        let w = fw.tree.level_nodes(2).find(|&w| ctx.has_sink(w, 2)).unwrap();
        let prob = ctx.assemble(2.0, fw.tree.node(w), 1, 2).unwrap();
        assert!(prob.fixed.iter().any(|v| *v == Some(1.0)) && prob.fixed.iter().any(|v| *v == Some(0.0)));
    }

    #[test]
    fn energy_nonincreasing_in_m() {
        let cs = interval_cubes(257);
        let fw = Framework::new(&cs).unwrap();
        let ctx = EnergyContext::new(&fw);
        let w = fw.tree.node(fw.tree.level_nodes(3).start + 3);
        let mut last = f64::INFINITY;
        for m in 1..=4 {
            let e = ctx.energy(2.5, w, 2, m, &SolverConfig::default()).unwrap().value;
            assert!(e <= last * (1.0 + 1e-9), "M={m}: {e} > {last}");
            last = e;
        }
    }

    #[test]
    fn interval_decays_at_two() {
        let cs = interval_cubes(1025);
        let fw = Framework::new(&cs).unwrap();
        let ctx = EnergyContext::new(&fw);
        let prof = decay_profile(&ctx, 2.0, &DecayConfig::default(), &Sequential).unwrap();
        assert_eq!(prof.verdict, Verdict::Decaying);
        let predicted = -libm::log(4.0);
        assert!(((prof.slope - predicted) / predicted).abs() < 0.25, "{}", prof.slope);
    }
}
