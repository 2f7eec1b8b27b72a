//! Relaxed-mode builds with the command-line defaults.

use std::sync::Arc;

use dyadic_core::certify::{relaxed_constants, AlphaOverrides, ConstantBundle};
use dyadic_core::cubes::CubeSystem;
use dyadic_core::nets::{build_hierarchy, default_window, NetHierarchy};
use dyadic_core::parent::{assign_parents, ParentMap};
use dyadic_core::space::{estimate_gamma, estimate_packing, generate_space, MetricSpace, PointId};

pub const R: f64 = 0.25;
pub const C_STAR: f64 = 0.9;

pub fn space(spec: &str) -> Arc<MetricSpace> {
    Arc::new(generate_space(spec.parse().unwrap()).unwrap())
}

pub fn relaxed_bundle(s: &MetricSpace) -> ConstantBundle {
    let gamma = estimate_gamma(s, 2048).unwrap();
    let alpha3 = 1.05 * gamma;
    let alpha1 = (2.0 * alpha3).max(alpha3 + 2.0 * C_STAR);
    let n = estimate_packing(s, alpha1, C_STAR, 64);
    relaxed_constants(C_STAR, 1.0, gamma, n, R, &AlphaOverrides::default()).unwrap()
}

pub fn hierarchy(s: Arc<MetricSpace>) -> NetHierarchy {
    let (k0, k1) = default_window(&s, R, C_STAR);
    build_hierarchy(s, R, C_STAR, 1.0, k0, k1, PointId(0)).unwrap()
}

pub fn parents(spec: &str) -> ParentMap {
    let s = space(spec);
    let b = relaxed_bundle(&s);
    assign_parents(hierarchy(s), b).unwrap()
}

pub fn cubes(spec: &str) -> CubeSystem {
    CubeSystem::build(parents(spec)).unwrap()
}
