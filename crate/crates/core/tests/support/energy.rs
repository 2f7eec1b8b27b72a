//! Independent references for the p-harmonic solver.

use std::collections::BTreeSet;

use dyadic_core::energy::{energy_of, EnergyProblem, Graph};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_problem(rng: &mut ChaCha8Rng, n: usize, boundary: usize, p: f64) -> EnergyProblem {
    let mut edges = BTreeSet::new();
    for v in 1..n as u32 {
        let u = rng.gen_range(0..v);
        edges.insert((u, v));
    }
    for _ in 0..rng.gen_range(0..=n) {
        let (a, b) = (rng.gen_range(0..n as u32), rng.gen_range(0..n as u32));
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let mut fixed = vec![None; n];
    let mut order: Vec<usize> = (0..n).collect();
    for i in 0..boundary {
        let j = rng.gen_range(i..n);
        order.swap(i, j);
        fixed[order[i]] = Some(match i {
            0 => 1.0,
            1 => 0.0,
            _ => rng.gen::<f64>(),
        });
    }
    EnergyProblem { p, graph: Graph { n, edges: edges.into_iter().collect() }, fixed, origin: None }
}

/// Solves the reduced Laplacian system directly.
pub fn dense_harmonic(pr: &EnergyProblem) -> Vec<f64> {
    let free: Vec<usize> = (0..pr.graph.n).filter(|&u| pr.fixed[u].is_none()).collect();
    let mut pos = vec![usize::MAX; pr.graph.n];
    for (i, &u) in free.iter().enumerate() {
        pos[u] = i;
    }
    let m = free.len();
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for &(u, v) in &pr.graph.edges {
        for (x, y) in [(u as usize, v as usize), (v as usize, u as usize)] {
            if pos[x] == usize::MAX {
                continue;
            }
            a[(pos[x], pos[x])] += 1.0;
            match pr.fixed[y] {
                Some(val) => rhs[pos[x]] += val,
                None => a[(pos[x], pos[y])] -= 1.0,
            }
        }
    }
    let sol = a.cholesky().expect("connected to the boundary").solve(&rhs);
    (0..pr.graph.n).map(|u| pr.fixed[u].unwrap_or_else(|| sol[pos[u]])).collect()
}

/// Convex search: a full grid of step 0.02, then two finer windows down to step 1e-3.
pub fn grid_minimum(pr: &EnergyProblem) -> f64 {
    let free: Vec<usize> = (0..pr.graph.n).filter(|&u| pr.fixed[u].is_none()).collect();
    let base: Vec<f64> = pr.fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
    let mut center = vec![0.5; free.len()];
    let mut best = f64::INFINITY;
    for (step, half) in [(0.02, 25i64), (0.002, 15), (0.001, 4)] {
        let mut f = base.clone();
        let mut idx = vec![-half; free.len()];
        let mut arg = center.clone();
        'scan: loop {
            for (i, &u) in free.iter().enumerate() {
                f[u] = (center[i] + idx[i] as f64 * step).clamp(0.0, 1.0);
            }
            let e = energy_of(&pr.graph, pr.p, &f);
            if e < best {
                best = e;
                arg = free.iter().map(|&u| f[u]).collect();
            }
            for slot in idx.iter_mut() {
                *slot += 1;
                if *slot <= half {
                    continue 'scan;
                }
                *slot = -half;
            }
            break;
        }
        center = arg;
    }
    best
}
