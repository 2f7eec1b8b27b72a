//! Brute-force reimplementation of the parent rule.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dyadic_core::certify::{derive_constants, relaxed_constants, AlphaOverrides, ConstantBundle, Mode};
use dyadic_core::nets::{build_hierarchy, default_window, NetHierarchy};
use dyadic_core::parent::{assign_parents, classify_level, NodeClass};
use dyadic_core::space::{generate_space, MetricSpace, PointId};

#[derive(Debug, PartialEq)]
pub struct Oracle {
    pub parent: Vec<u32>,
    pub class: Vec<NodeClass>,
    pub f_list: Vec<u32>,
    /// (a, b, y, z, fallback) per designation, blocks concatenated.
    pub designations: Vec<(u32, u32, PointId, PointId, bool)>,
}

pub fn pts(h: &NetHierarchy, k: i32) -> Vec<PointId> {
    h.centers(k).to_vec()
}

/// Ordinal (1-based) of the lowest-ordinal point of `set` strictly within `radius` of `y`.
pub fn lowest_within(s: &MetricSpace, set: &[PointId], y: PointId, radius: f64) -> Option<u32> {
    set.iter().position(|&c| s.dist(c, y) < radius).map(|i| i as u32 + 1)
}

/// Index into `set` of the nearest point strictly within `radius`, ties to the smaller point id.
pub fn nearest(s: &MetricSpace, set: &[PointId], y: PointId, radius: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &c) in set.iter().enumerate() {
        let d = s.dist(c, y);
        if d >= radius {
            continue;
        }
        best = match best {
            Some((j, e)) if e < d || (e == d && set[j] < c) => Some((j, e)),
            _ => Some((i, d)),
        };
    }
    best.map(|(i, _)| i)
}

pub fn classes(h: &NetHierarchy, b: &ConstantBundle, k: i32) -> (Vec<NodeClass>, Vec<u32>) {
    let s = h.space();
    let rk = b.r.powi(k);
    let rk1 = b.r.powi(k + 1);
    let (coarse, fine) = (pts(h, k), pts(h, k + 1));
    let far = (b.alpha2 + b.alpha6 * b.r) * rk;
    let block = b.alpha6 * rk1;
    let mut f_pts: Vec<PointId> = Vec::new();
    let mut f_list = Vec::new();
    for (slot, &p) in fine.iter().enumerate() {
        let isolated = coarse.iter().all(|&c| s.dist(c, p) >= far);
        if isolated && f_pts.iter().all(|&f| s.dist(f, p) >= 2.0 * block) {
            f_pts.push(p);
            f_list.push(slot as u32 + 1);
        }
    }
    let class = fine
        .iter()
        .map(|&p| {
            if coarse.iter().any(|&c| s.dist(c, p) < b.alpha2 * rk) {
                NodeClass::A
            } else if let Some(i) = nearest(s, &f_pts, p, block) {
                NodeClass::B(i as u32 + 1)
            } else {
                NodeClass::C
            }
        })
        .collect();
    (class, f_list)
}

pub fn annulus(s: &MetricSpace, x: PointId, lo: f64, hi: f64, strict: bool) -> Result<(PointId, bool), ()> {
    if let Some(z) = s.points().find(|&z| (lo..hi).contains(&s.dist(x, z))) {
        return Ok((z, false));
    }
    if strict {
        return Err(());
    }
    let mid = 0.5 * (lo + hi);
    let mut best = PointId(0);
    for z in s.points() {
        if (s.dist(x, z) - mid).abs() < (s.dist(x, best) - mid).abs() {
            best = z;
        }
    }
    Ok((best, true))
}

pub fn transition(h: &NetHierarchy, b: &ConstantBundle, k: i32) -> Result<Oracle, ()> {
    let s = h.space();
    let rk = b.r.powi(k);
    let rk1 = b.r.powi(k + 1);
    let (coarse, fine) = (pts(h, k), pts(h, k + 1));
    let (class, f_list) = classes(h, b, k);
    let mut parent = Vec::with_capacity(fine.len());
    for (slot, &p) in fine.iter().enumerate() {
        parent.push(if class[slot] == NodeClass::A {
            nearest(s, &coarse, p, b.alpha2 * rk).unwrap() as u32 + 1
        } else {
            lowest_within(s, &coarse, p, b.big_c_star * rk).ok_or(())?
        });
    }
    let mut used = vec![false; fine.len()];
    let mut designations = Vec::new();
    for (i, &f) in f_list.iter().enumerate() {
        let xf = fine[f as usize - 1];
        let near: Vec<u32> = (1..=coarse.len() as u32)
            .filter(|&c| s.dist(xf, coarse[c as usize - 1]) < (b.alpha1 - b.alpha6 * b.r) * rk)
            .collect();
        let mut pairs = Vec::new();
        for x in 0..near.len() {
            for y in x + 1..near.len() {
                pairs.push((near[x], near[y]));
            }
        }
        let n = b.n_pack;
        if pairs.len() > n * n.saturating_sub(1) / 2 {
            return Err(());
        }
        let strict = b.mode == Mode::Strict;
        let cover = b.big_c_star * rk1;
        for (j, &(p, q)) in pairs.iter().enumerate() {
            let inner = (b.beta(j as u32) + (2.0 + b.gamma) * b.big_c_star) * rk1;
            let (y, fy) = annulus(s, xf, inner, b.gamma * inner, strict)?;
            let a = lowest_within(s, &fine, y, cover).unwrap();
            let (z, fz) = annulus(s, fine[a as usize - 1], cover, b.gamma * cover, strict)?;
            let c = lowest_within(s, &fine, z, cover).unwrap();
            for (m, target) in [(a, p), (c, q)] {
                let slot = m as usize - 1;
                if class[slot] != NodeClass::B(i as u32 + 1) || used[slot] {
                    return Err(());
                }
                used[slot] = true;
                parent[slot] = target;
            }
            designations.push((a, c, y, z, fy || fz));
        }
    }
    Ok(Oracle { parent, class, f_list, designations })
}

pub fn random_cloud(seed: u64, n: usize, dim: usize) -> MetricSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<f64> = (0..n * dim).map(|_| rng.gen::<f64>()).collect();
    MetricSpace::from_points(dim, coords).unwrap()
}

pub fn as_matrix(s: &MetricSpace) -> MetricSpace {
    let rows: Vec<Vec<f64>> = s.points().map(|a| s.points().map(|b| s.dist(a, b)).collect()).collect();
    MetricSpace::from_matrix(&rows).unwrap()
}

pub fn spaces() -> Vec<(String, Arc<MetricSpace>)> {
    let mut out: Vec<(String, Arc<MetricSpace>)> = ["interval:200", "grid:14", "cantor:6", "gasket:4"]
        .iter()
        .map(|d| (d.to_string(), Arc::new(generate_space(d.parse().unwrap()).unwrap())))
        .collect();
    out.push(("cloud2".into(), Arc::new(random_cloud(7, 150, 2))));
    out.push(("cloud3-matrix".into(), Arc::new(as_matrix(&random_cloud(11, 120, 3)))));
    out
}

pub fn bundles() -> Vec<(&'static str, ConstantBundle)> {
    let none = AlphaOverrides::default();
    let small6 = AlphaOverrides { alpha6: Some(0.5), ..none };
    let wide6 = AlphaOverrides { alpha6: Some(6.0), ..none };
    vec![
        ("relaxed", relaxed_constants(0.9, 1.0, 2.1, 9, 0.25, &none).unwrap()),
        ("small-a6", relaxed_constants(0.9, 1.0, 2.1, 9, 0.25, &small6).unwrap()),
        ("wide-a6", relaxed_constants(0.9, 1.0, 2.1, 2, 0.1, &wide6).unwrap()),
        ("strict", derive_constants(1.0, 1.0, 2.0, 2).unwrap()),
    ]
}

/// Counts from a successful comparison.
#[derive(Debug, Default)]
pub struct Agreement {
    pub runs: usize,
    pub built: usize,
    pub block_members: usize,
}

/// Runs every space against every bundle; `Err` names the first disagreement.
pub fn compare_all() -> Result<Agreement, String> {
    let mut out = Agreement::default();
    for (name, s) in spaces() {
        if s.len() > 200 {
            return Err(format!("{name} has {} points", s.len()));
        }
        for (label, b) in bundles() {
            out.runs += 1;
            let (k0, k1) = default_window(&s, b.r, b.c_star);
            let h = build_hierarchy(s.clone(), b.r, b.c_star, b.big_c_star, k0, k1, PointId(0)).unwrap();
            for k in k0..k1 {
                let got = classify_level(&h, &b, k);
                if got != classes(&h, &b, k) {
                    return Err(format!("{name}/{label}: classes differ at level {k}"));
                }
                out.block_members += got.0.iter().filter(|c| c.block().is_some()).count();
            }
            let expected: Vec<Result<Oracle, ()>> = (k0..k1).map(|k| transition(&h, &b, k)).collect();
            match assign_parents(h, b.clone()) {
                Ok(pm) => {
                    out.built += 1;
                    for (t, e) in pm.transitions().iter().zip(expected) {
                        let Ok(e) = e else {
                            return Err(format!("{name}/{label}: oracle rejects level {}", t.level));
                        };
                        let d: Vec<_> = t
                            .blocks
                            .iter()
                            .flat_map(|bl| bl.designations.iter().map(|x| (x.a, x.b, x.y, x.z, x.fallback)))
                            .collect();
                        let same = t.parent == e.parent && t.class == e.class && t.f_list == e.f_list;
                        if !same || d != e.designations {
                            return Err(format!("{name}/{label}: assignment differs at level {}", t.level));
                        }
                    }
                }
                Err(err) if expected.iter().all(|e| e.is_ok()) => {
                    return Err(format!("{name}/{label}: builder failed ({err}), oracle succeeded"));
                }
                Err(_) => {}
            }
        }
    }
    Ok(out)
}
