use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use dyadic_core::certify::{derive_constants, relaxed_constants, AlphaOverrides, ConstantBundle, Mode};
use dyadic_core::cubes::{verify_d, CubeSystem, DConfig, DReport, Family};
use dyadic_core::energy::{estimate_arc_dim, ArcConfig, ArcEstimate, DecayConfig, EnergyContext, SolverConfig};
use dyadic_core::framework::{verify_basic_framework, Framework, FrameworkConfig, FrameworkReport};
use dyadic_core::nets::{build_hierarchy, default_window, verify_net, NetReport, NodeId};
use dyadic_core::parent::{assign_parents, verify_t, ParentMap, TReport};
use dyadic_core::sample::derive_seed;
use dyadic_core::space::{estimate_gamma, estimate_packing, MetricSpace, PointId};
use dyadic_core::Error as CoreError;
use serde_json::{json, Map, Value};

use crate::artifacts::*;
use crate::config::{FamilyArg, ModeArg, RunConfig};
use crate::input;
use crate::runner::{worker_count, PoolRunner};

/// Result of a checking command: exit code 0 or 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Violations,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Violations => 2,
        }
    }
}

const LIST_CAP: usize = 50;
const GAMMA_PROBES: usize = 2048;
const PACKING_PROBES: usize = 64;

fn ms(t: Instant) -> Value {
    json!(t.elapsed().as_millis() as u64)
}

fn node(n: NodeId) -> Value {
    json!([n.level, n.ordinal])
}

fn capped<T>(items: &[T], f: impl Fn(&T) -> Value) -> Value {
    Value::Array(items.iter().take(LIST_CAP).map(f).collect())
}

fn load_space(cfg: &RunConfig, copy_dir: Option<&Path>) -> Result<(MetricSpace, Option<String>)> {
    match (&cfg.space, &cfg.input) {
        (Some(desc), _) => Ok((input::generated(desc)?, None)),
        (None, Some(path)) => {
            let path = match copy_dir {
                Some(dir) => dir.join(INPUT_COPY),
                None => path.clone(),
            };
            let (space, text) = input::load_file(&path, cfg.format)?;
            Ok((space, Some(text)))
        }
        (None, None) => bail!("either --space or --input is required"),
    }
}

fn constants(cfg: &RunConfig, space: &MetricSpace) -> Result<(ConstantBundle, &'static str, &'static str)> {
    let overrides = AlphaOverrides { alpha1: cfg.alpha1, alpha2: cfg.alpha2, alpha3: cfg.alpha3, alpha6: cfg.alpha6 };
    let (gamma, gamma_src) = match cfg.gamma {
        Some(g) => (g, "given"),
        None => (estimate_gamma(space, GAMMA_PROBES)?, "estimated"),
    };
    let (n_pack, n_src) = match cfg.n_pack {
        Some(n) => (n, "given"),
        None => {
            let alpha1 = relaxed_constants(cfg.c_star, cfg.big_c_star, gamma, 2, 0.25, &overrides)?.alpha1;
            (estimate_packing(space, alpha1, cfg.c_star, PACKING_PROBES), "estimated")
        }
    };
    let bundle = match cfg.mode {
        ModeArg::Strict => {
            if overrides != AlphaOverrides::default() {
                bail!("alpha overrides are only accepted in relaxed mode");
            }
            let b = derive_constants(cfg.c_star, cfg.big_c_star, gamma, n_pack)?;
            match cfg.r {
                Some(r) => b.with_ratio(r)?,
                None => b,
            }
        }
        ModeArg::Relaxed => relaxed_constants(cfg.c_star, cfg.big_c_star, gamma, n_pack, cfg.r.unwrap_or(0.25), &overrides)?,
    };
    Ok((bundle, gamma_src, n_src))
}

/// Runs the construction and writes every artifact. Nothing is written when a stage fails.
pub fn cmd_build(cfg: &RunConfig) -> Result<Manifest> {
    let mut timings = Map::new();
    let t = Instant::now();
    let (space, raw) = load_space(cfg, None)?;
    let space = Arc::new(space);
    timings.insert("load".into(), ms(t));

    let t = Instant::now();
    let (bundle, gamma_src, n_src) = constants(cfg, &space)?;
    timings.insert("constants".into(), ms(t));

    let t = Instant::now();
    let r = bundle.r;
    let (k_min, k_max) = match cfg.window {
        Some(w) => (w.k_min, w.k_max),
        None => default_window(&space, r, cfg.c_star),
    };
    if cfg.base as usize >= space.len() {
        bail!("base point {} out of range", cfg.base);
    }
    let h = build_hierarchy(space.clone(), r, cfg.c_star, cfg.big_c_star, k_min, k_max, PointId(cfg.base))?;
    timings.insert("hierarchy".into(), ms(t));

    let t = Instant::now();
    let pm = assign_parents(h, bundle.clone())?;
    timings.insert("parents".into(), ms(t));

    let t = Instant::now();
    let cs = CubeSystem::build(pm)?;
    timings.insert("cubes".into(), ms(t));

    let dir = &cfg.out;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files = Vec::new();
    if let Some(text) = raw {
        std::fs::write(dir.join(INPUT_COPY), text)?;
        files.push(INPUT_COPY.to_string());
    }
    write_json(dir, BUNDLE, &BundleFile::new(&bundle, gamma_src, n_src))?;
    write_json(dir, HIERARCHY, &HierarchyFile::new(cs.hierarchy()))?;
    write_json(dir, PARENTS, &ParentsFile::new(cs.parent_map()))?;
    write_json(dir, CUBES, &CubesFile::new(&cs))?;
    files.extend([BUNDLE, HIERARCHY, PARENTS, CUBES].map(String::from));
    let manifest = Manifest {
        schema: MANIFEST_SCHEMA.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        core_version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        points: space.len(),
        files,
        timings_ms: timings,
    };
    write_json(dir, MANIFEST, &manifest)?;
    Ok(manifest)
}

/// Artifacts of a build directory, reloaded and reassembled.
pub struct Loaded {
    pub manifest: Manifest,
    pub parent_map: ParentMap,
}

pub fn load_build(dir: &Path) -> Result<Loaded> {
    let manifest = load_manifest(dir)?;
    let (space, _) = load_space(&manifest.config, Some(dir))?;
    if space.len() != manifest.points {
        return Err(ArtifactError::CorruptArtifact {
            file: dir.join(MANIFEST),
            reason: format!("{} points recorded, {} loaded", manifest.points, space.len()),
        }
        .into());
    }
    let space = Arc::new(space);
    let bundle = load_bundle(dir)?;
    let h = load_hierarchy(dir, space)?;
    let parents = load_parents(dir, &h)?;
    Ok(Loaded { manifest, parent_map: ParentMap::from_assignment(h, bundle, parents) })
}

fn record_timing(dir: &Path, key: &str, value: Value) -> Result<()> {
    let mut m = load_manifest(dir)?;
    m.timings_ms.insert(key.into(), value);
    write_json(dir, MANIFEST, &m)
}

fn net_json(r: &NetReport) -> Value {
    json!({
        "schema": "dyadic-report-net/1",
        "pass": r.passes(),
        "levels_checked": r.levels_checked,
        "pairs_checked": r.pairs_checked,
        "separation_violations": r.separation.len(),
        "covering_violations": r.covering.len(),
        "missing_base": r.missing_base,
        "separation": capped(&r.separation, |v| json!({"a": node(v.a), "b": node(v.b), "distance": num(v.distance), "bound": num(v.bound)})),
        "covering": capped(&r.covering, |v| json!({"level": v.level, "point": v.point.0, "nearest": v.nearest.map(|(n, d)| json!({"node": node(n), "distance": num(d)})), "bound": num(v.bound)})),
    })
}

fn t_json(r: &TReport) -> Value {
    let bridge = |v: &dyadic_core::parent::BridgeFailure| {
        json!({"a": node(v.a), "b": node(v.b), "witness": v.witness.0, "far_child": v.far_child.map(node)})
    };
    json!({
        "schema": "dyadic-report-t/1",
        "pass": r.passes(),
        "t1_to_t3_pass": r.passes_t1_to_t3(),
        "t1": {"orphans": r.orphans.len(), "max_fan_in": r.max_fan_in, "fan_in_above_packing": r.fan_in_above_packing.len(), "witnesses": capped(&r.orphans, |n| node(*n))},
        "t2": {"violations": r.t2.len(), "witnesses": capped(&r.t2, |v| json!({"child": node(v.child), "parent": node(v.parent), "distance": num(v.distance), "bound": num(v.bound)}))},
        "t3": {"violations": r.t3.len(), "witnesses": capped(&r.t3, |v| json!({"child": node(v.child), "assigned": node(v.assigned), "close": node(v.close), "distance": num(v.distance)}))},
        "t4": {"pairs": r.t4_pairs, "violations": r.t4.len(), "witnesses": capped(&r.t4, bridge)},
        "t5": {"cases": r.t5_cases, "violations": r.t5.len(), "witnesses": capped(&r.t5, bridge)},
        "skipped_levels": r.skipped_levels,
    })
}

fn d_json(r: &DReport, export_matches: bool) -> Value {
    let ball = |v: &(NodeId, PointId, f64)| json!({"node": node(v.0), "point": v.1 .0, "distance": num(v.2)});
    json!({
        "schema": "dyadic-report-d/1",
        "pass": r.passes() && export_matches,
        "export_matches": export_matches,
        "d1": {"violations": r.d1.len(), "witnesses": capped(&r.d1, |v| json!({"level": v.level, "point": v.point.0, "count": v.count}))},
        "d2": {"pass": r.d2.passes(), "o_outside_q": capped(&r.d2.o_outside_q, |n| node(*n)), "q_outside_k": capped(&r.d2.q_outside_k, |n| node(*n)), "empty_interior": capped(&r.d2.empty_interior, |n| node(*n))},
        "d3": {"violations": r.d3.len(), "witnesses": capped(&r.d3, |v| json!([node(v.0), node(v.1)]))},
        "d4": {
            "pass": r.d4.passes(), "c1": num(r.d4.c1), "c2": num(r.d4.c2),
            "measured_c1": num(r.d4.measured_c1), "measured_c2": num(r.d4.measured_c2),
            "inner_violations": r.d4.inner.len(), "outer_violations": r.d4.outer.len(),
            "inner": capped(&r.d4.inner, ball), "outer": capped(&r.d4.outer, ball),
        },
        "d5": {
            "pass": r.d5.passes(), "c3": num(r.d5.c3), "failing_ratio": num(r.d5.failing_ratio),
            "levels": r.d5.levels.iter().map(|l| json!({
                "level": l.level, "pairs": l.pairs, "exhaustive": l.exhaustive, "failures": l.failures.len(),
                "witnesses": capped(&l.failures, |f| json!({"y": f.y.0, "z": f.z.0, "distance": num(f.distance)})),
            })).collect::<Vec<_>>(),
        },
    })
}

fn framework_json(r: &FrameworkReport) -> Value {
    json!({
        "schema": "dyadic-report-framework/1",
        "pass": r.passes(),
        "m": r.m,
        "periodic_points": r.periodic_points,
        "common_ancestors": r.common_ancestors,
        "parent_mismatches": r.parent_mismatches,
        "pairs": r.pairs,
        "eta1": num(r.eta1),
        "eta2": num(r.eta2),
        "eta3": num(r.eta3),
        "max_degree": r.max_degree,
        "max_fan_in": r.max_fan_in,
        "empty_interior": capped(&r.empty_interior, |n| node(*n)),
        "thick_leaves": capped(&r.thick_leaves, |n| node(*n)),
    })
}

fn d_config(cfg: &RunConfig, mode: Mode) -> DConfig {
    DConfig {
        d5_budget: cfg.chain_budget,
        seed: derive_seed(cfg.seed, 0xd5),
        bundle_ball_constants: mode == Mode::Strict,
        c3: None,
    }
}

/// Re-checks a build directory and writes one report per property family.
pub fn cmd_verify(dir: &Path) -> Result<Outcome> {
    let start = Instant::now();
    let loaded = load_build(dir)?;
    let stored_cubes = load_cubes(dir)?;
    let cfg = loaded.manifest.config.clone();
    let pm = loaded.parent_map;
    let mode = pm.bundle().mode;

    let net = verify_net(pm.hierarchy());
    write_json(dir, "report-net.json", &net_json(&net))?;
    let t = verify_t(&pm);
    write_json(dir, "report-t.json", &t_json(&t))?;
    let mut pass = net.passes() && t.passes();
    let mut summary = json!({"net": net.passes(), "t1_to_t3": t.passes_t1_to_t3(), "t": t.passes()});

    match CubeSystem::build_with_contact(pm, stored_cubes.contact) {
        Ok(cs) => {
            let export_matches = CubesFile::new(&cs) == stored_cubes;
            let d = verify_d(&cs, &d_config(&cfg, mode));
            write_json(dir, "report-d.json", &d_json(&d, export_matches))?;
            let d_pass = d.passes() && export_matches;
            summary["d"] = json!(d_pass);
            pass &= d_pass;
            let fw_value = match Framework::new(&cs) {
                Ok(fw) => {
                    let fc = FrameworkConfig { m: cfg.m, pair_budget: cfg.pair_budget, seed: derive_seed(cfg.seed, 0xb1) };
                    let rep = verify_basic_framework(&fw, &fc);
                    pass &= rep.passes();
                    summary["framework"] = json!(rep.passes());
                    framework_json(&rep)
                }
                Err(e) => {
                    pass = false;
                    summary["framework"] = json!(false);
                    json!({"schema": "dyadic-report-framework/1", "pass": false, "error": e.to_string()})
                }
            };
            write_json(dir, "report-framework.json", &fw_value)?;
        }
        Err(e @ CoreError::BallBoundViolated { .. }) => {
            pass = false;
            summary["d"] = json!(false);
            write_json(dir, "report-d.json", &json!({"schema": "dyadic-report-d/1", "pass": false, "error": e.to_string()}))?;
        }
        Err(e) => return Err(e.into()),
    }
    summary["pass"] = json!(pass);
    let mut summary_obj = json!({"schema": "dyadic-report-verify/1"});
    summary_obj["families"] = summary;
    summary_obj["pass"] = json!(pass);
    write_json(dir, "report-verify.json", &summary_obj)?;
    record_timing(dir, "verify", ms(start))?;
    Ok(if pass { Outcome::Pass } else { Outcome::Violations })
}

pub fn arc_config(cfg: &RunConfig) -> ArcConfig {
    ArcConfig {
        p_min: cfg.p_min,
        p_max: cfg.p_max,
        step: cfg.p_step,
        decay: DecayConfig {
            m: cfg.m,
            max_k: cfg.max_k,
            w_budget: cfg.w_budget,
            seed: derive_seed(cfg.seed, 0xe7),
            band: 0.05,
            solver: SolverConfig { tol: cfg.tol, ..SolverConfig::default() },
        },
    }
}

fn slope_table(est: &ArcEstimate) -> String {
    let mut out = String::from("# p k sup_energy slope verdict\n");
    for prof in &est.profiles {
        for row in &prof.rows {
            out.push_str(&format!("{} {} {:e} {} {}\n", prof.p, row.k, row.sup_energy, prof.slope, prof.verdict.name()));
        }
    }
    out
}

/// Runs the exponent search and writes the summary and slope table.
pub fn cmd_estimate(dir: &Path, workers: Option<usize>) -> Result<ArcEstimate> {
    let start = Instant::now();
    let loaded = load_build(dir)?;
    let cfg = loaded.manifest.config.clone();
    let contact = load_cubes(dir)?.contact;
    let cs = CubeSystem::build_with_contact(loaded.parent_map, contact)?;
    let fw = Framework::new(&cs)?;
    let ctx = EnergyContext::new(&fw);
    let runner = PoolRunner::new(worker_count(workers))?;
    let est = estimate_arc_dim(&ctx, &arc_config(&cfg), &runner)?;
    let summary = json!({
        "schema": "dyadic-report-estimate/1",
        "m": cfg.m,
        "estimate": num(est.estimate),
        "p_low": num(est.p_low),
        "p_high": num(est.p_high),
        "floor": est.floor,
        "ceiling": est.ceiling,
        "note": if est.floor {
            format!("every tested p decays; the estimator only sees p > 1, so the value is at most {}", est.estimate)
        } else if est.ceiling {
            format!("no tested p decays up to {}", cfg.p_max)
        } else {
            format!("decay starts between {} and {}", est.p_low, est.p_high)
        },
        "profiles": est.profiles.iter().map(|p| json!({
            "p": p.p, "slope": num(p.slope), "verdict": p.verdict.name(),
            "rows": p.rows.iter().map(|r| json!({"k": r.k, "sup_energy": num(r.sup_energy), "argmax": node(r.argmax), "solves": r.solves})).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    });
    write_json(dir, "report-estimate.json", &summary)?;
    std::fs::write(dir.join("slopes.txt"), slope_table(&est))?;
    record_timing(dir, "estimate", ms(start))?;
    Ok(est)
}

/// Writes a level graph or a scale section as `node`/`edge` lines; returns the path.
pub fn cmd_export_graph(dir: &Path, level: Option<i32>, scale: Option<f64>, family: FamilyArg, output: Option<&Path>) -> Result<std::path::PathBuf> {
    let loaded = load_build(dir)?;
    let contact = load_cubes(dir)?.contact;
    let cs = CubeSystem::build_with_contact(loaded.parent_map, contact)?;
    let space = cs.space();
    let diam = |set: &[u32]| {
        let mut g = 0.0f64;
        for (i, &a) in set.iter().enumerate() {
            for &b in &set[i + 1..] {
                g = g.max(space.dist(PointId(a), PointId(b)));
            }
        }
        g
    };
    let fam = match family {
        FamilyArg::K => Family::K,
        FamilyArg::Q => Family::Q,
    };
    let mut text = String::from("# node <id> <k> <n> <g>\n# edge <id> <id>\n");
    let name = match (level, scale) {
        (Some(k), _) => {
            let h = cs.hierarchy();
            if !h.contains_level(k) {
                bail!("level {k} is outside the window {}..{}", h.k_min, h.k_max);
            }
            for n in h.nodes(k) {
                text.push_str(&format!("node {} {} {} {}\n", n.slot(), n.level, n.ordinal, diam(cs.set(fam, n))));
            }
            for (a, nbrs) in cs.level_graph(fam, k).iter().enumerate() {
                for &b in nbrs.iter().filter(|&&b| b as usize > a) {
                    text.push_str(&format!("edge {a} {b}\n"));
                }
            }
            format!("graph-level{k}-{}.txt", if fam == Family::K { "k" } else { "q" })
        }
        (None, Some(s)) => {
            let fw = Framework::new(&cs)?;
            let sec = fw.scale_section(s);
            for &w in &sec.nodes {
                let n = fw.tree.node(w);
                text.push_str(&format!("node {w} {} {} {}\n", n.level, n.ordinal, fw.g(w)));
            }
            for (a, b) in &sec.edges {
                text.push_str(&format!("edge {a} {b}\n"));
            }
            format!("section-{s}.txt")
        }
        (None, None) => bail!("one of --level or --scale is required"),
    };
    let path = output.map(Path::to_path_buf).unwrap_or_else(|| dir.join(name));
    std::fs::write(&path, text)?;
    Ok(path)
}
