//! On-disk schemas. Every file carries a `schema` tag; loaders reject anything
//! that does not fit the space it claims to describe.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Result;
use dyadic_core::certify::{ConstantBundle, Mode};
use dyadic_core::cubes::CubeSystem;
use dyadic_core::nets::{NetHierarchy, NetWarning};
use dyadic_core::parent::ParentMap;
use dyadic_core::space::{MetricSpace, PointId};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::config::RunConfig;

pub const MANIFEST: &str = "manifest.json";
pub const BUNDLE: &str = "bundle.json";
pub const HIERARCHY: &str = "hierarchy.json";
pub const PARENTS: &str = "parents.json";
pub const CUBES: &str = "cubes.json";
pub const INPUT_COPY: &str = "input.txt";

#[derive(Debug)]
pub enum ArtifactError {
    Missing(PathBuf),
    CorruptArtifact { file: PathBuf, reason: String },
}

impl fmt::Display for ArtifactError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArtifactError::Missing(p) => write!(f, "missing artifact {}", p.display()),
            ArtifactError::CorruptArtifact { file, reason } => write!(f, "corrupt artifact {}: {reason}", file.display()),
        }
    }
}

impl std::error::Error for ArtifactError {}

fn corrupt(file: &Path, reason: impl Into<String>) -> anyhow::Error {
    ArtifactError::CorruptArtifact { file: file.to_path_buf(), reason: reason.into() }.into()
}

/// JSON number, or a string for values JSON cannot carry.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else if x.is_nan() {
        Value::from("nan")
    } else if x > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

mod real {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        num(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Value::deserialize(d)? {
            Value::Number(n) => n.as_f64().ok_or_else(|| serde::de::Error::custom("number out of range")),
            Value::String(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom("expected a number")),
            },
            _ => Err(serde::de::Error::custom("expected a number")),
        }
    }
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(dir: &Path, name: &str) -> Result<T> {
    let path = dir.join(name);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(ArtifactError::Missing(path).into()),
        Err(e) => return Err(e.into()),
    };
    serde_json::from_str(&text).map_err(|e| corrupt(&path, e.to_string()))
}

fn check_schema(dir: &Path, name: &str, found: &str, want: &str) -> Result<()> {
    if found != want {
        return Err(corrupt(&dir.join(name), format!("schema {found:?}, expected {want:?}")));
    }
    Ok(())
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct Manifest {
    pub schema: String,
    pub tool_version: String,
    pub core_version: String,
    pub config: RunConfig,
    pub points: usize,
    pub files: Vec<String>,
    /// Wall-clock milliseconds per stage; the only non-reproducible content.
    pub timings_ms: serde_json::Map<String, Value>,
}

pub const MANIFEST_SCHEMA: &str = "dyadic-manifest/1";

pub fn load_manifest(dir: &Path) -> Result<Manifest> {
    let m: Manifest = read_json(dir, MANIFEST)?;
    check_schema(dir, MANIFEST, &m.schema, MANIFEST_SCHEMA)?;
    Ok(m)
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct BundleFile {
    pub schema: String,
    pub mode: String,
    /// Whether gamma and n_pack were measured on the data or supplied.
    pub gamma_source: String,
    pub n_pack_source: String,
    #[serde(with = "real")]
    pub c_star: f64,
    #[serde(with = "real")]
    pub big_c_star: f64,
    #[serde(with = "real")]
    pub gamma: f64,
    pub n_pack: usize,
    #[serde(with = "real")]
    pub alpha1: f64,
    #[serde(with = "real")]
    pub alpha2: f64,
    #[serde(with = "real")]
    pub alpha3: f64,
    #[serde(with = "real")]
    pub alpha4: f64,
    #[serde(with = "real")]
    pub alpha5: f64,
    #[serde(with = "real")]
    pub alpha6: f64,
    #[serde(with = "real")]
    pub r0: f64,
    #[serde(with = "real")]
    pub r: f64,
    #[serde(with = "real")]
    pub c1: f64,
    #[serde(with = "real")]
    pub c2: f64,
    #[serde(with = "real")]
    pub c3: f64,
}

pub const BUNDLE_SCHEMA: &str = "dyadic-bundle/1";

impl BundleFile {
    pub fn new(b: &ConstantBundle, gamma_source: &str, n_pack_source: &str) -> Self {
        BundleFile {
            schema: BUNDLE_SCHEMA.into(),
            mode: b.mode.to_string(),
            gamma_source: gamma_source.into(),
            n_pack_source: n_pack_source.into(),
            c_star: b.c_star,
            big_c_star: b.big_c_star,
            gamma: b.gamma,
            n_pack: b.n_pack,
            alpha1: b.alpha1,
            alpha2: b.alpha2,
            alpha3: b.alpha3,
            alpha4: b.alpha4,
            alpha5: b.alpha5,
            alpha6: b.alpha6,
            r0: b.r0,
            r: b.r,
            c1: b.c1,
            c2: b.c2,
            c3: b.c3,
        }
    }

    pub fn bundle(&self) -> Option<ConstantBundle> {
        let mode = match self.mode.as_str() {
            "strict" => Mode::Strict,
            "relaxed" => Mode::Relaxed,
            _ => return None,
        };
        Some(ConstantBundle {
            mode,
            c_star: self.c_star,
            big_c_star: self.big_c_star,
            gamma: self.gamma,
            n_pack: self.n_pack,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            alpha3: self.alpha3,
            alpha4: self.alpha4,
            alpha5: self.alpha5,
            alpha6: self.alpha6,
            r0: self.r0,
            r: self.r,
            c1: self.c1,
            c2: self.c2,
            c3: self.c3,
        })
    }
}

pub fn load_bundle(dir: &Path) -> Result<ConstantBundle> {
    let f: BundleFile = read_json(dir, BUNDLE)?;
    check_schema(dir, BUNDLE, &f.schema, BUNDLE_SCHEMA)?;
    f.bundle().ok_or_else(|| corrupt(&dir.join(BUNDLE), format!("unknown mode {:?}", f.mode)))
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct LevelFile {
    pub k: i32,
    /// `[ordinal, point]` pairs in ordinal order.
    pub centers: Vec<[u32; 2]>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct HierarchyFile {
    pub schema: String,
    #[serde(with = "real")]
    pub r: f64,
    #[serde(with = "real")]
    pub c_star: f64,
    #[serde(with = "real")]
    pub big_c_star: f64,
    pub window: [i32; 2],
    pub base: u32,
    pub warnings: Vec<String>,
    pub levels: Vec<LevelFile>,
}

pub const HIERARCHY_SCHEMA: &str = "dyadic-hierarchy/1";

fn warning_text(w: &NetWarning) -> String {
    match w {
        NetWarning::RedundantFineLevels { levels } => format!("{levels} fine levels hold every point"),
        NetWarning::NotExhaustive { missing } => format!("finest level misses {missing} points"),
    }
}

impl HierarchyFile {
    pub fn new(h: &NetHierarchy) -> Self {
        HierarchyFile {
            schema: HIERARCHY_SCHEMA.into(),
            r: h.r,
            c_star: h.c_star,
            big_c_star: h.big_c_star,
            window: [h.k_min, h.k_max],
            base: h.base.0,
            warnings: h.warnings.iter().map(warning_text).collect(),
            levels: h
                .level_range()
                .map(|k| LevelFile { k, centers: h.centers(k).iter().enumerate().map(|(i, p)| [i as u32 + 1, p.0]).collect() })
                .collect(),
        }
    }
}

pub fn load_hierarchy(dir: &Path, space: Arc<MetricSpace>) -> Result<NetHierarchy> {
    let path = dir.join(HIERARCHY);
    let f: HierarchyFile = read_json(dir, HIERARCHY)?;
    check_schema(dir, HIERARCHY, &f.schema, HIERARCHY_SCHEMA)?;
    let [k_min, k_max] = f.window;
    if k_max < k_min || f.levels.len() != (k_max - k_min + 1) as usize {
        return Err(corrupt(&path, "window does not match the level list"));
    }
    let n = space.len() as u32;
    if f.base >= n {
        return Err(corrupt(&path, "base point out of range"));
    }
    let mut levels = Vec::with_capacity(f.levels.len());
    for (i, lvl) in f.levels.iter().enumerate() {
        if lvl.k != k_min + i as i32 {
            return Err(corrupt(&path, format!("level {} out of order", lvl.k)));
        }
        if lvl.centers.is_empty() {
            return Err(corrupt(&path, format!("level {} is empty", lvl.k)));
        }
        let mut pts = Vec::with_capacity(lvl.centers.len());
        for (j, &[ord, p]) in lvl.centers.iter().enumerate() {
            if ord != j as u32 + 1 || p >= n {
                return Err(corrupt(&path, format!("level {} entry {} is invalid", lvl.k, j + 1)));
            }
            pts.push(PointId(p));
        }
        levels.push(pts);
    }
    if !(f.r > 0.0 && f.r < 1.0 && f.c_star > 0.0 && f.big_c_star > 0.0) {
        return Err(corrupt(&path, "scale constants out of range"));
    }
    Ok(NetHierarchy::from_levels(space, f.r, f.c_star, f.big_c_star, k_min, levels, PointId(f.base)))
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct DesignationFile {
    pub pair: [u32; 2],
    pub a: u32,
    pub b: u32,
    pub y: u32,
    pub z: u32,
    pub fallback: bool,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct BlockFile {
    pub f: u32,
    pub members: Vec<u32>,
    pub neighbors: Vec<u32>,
    pub designations: Vec<DesignationFile>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct TransitionFile {
    /// Level of the children.
    pub k: i32,
    pub parent: Vec<u32>,
    /// One letter per child: A, B or C.
    pub class: String,
    pub f_list: Vec<u32>,
    pub blocks: Vec<BlockFile>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct ParentsFile {
    pub schema: String,
    pub transitions: Vec<TransitionFile>,
}

pub const PARENTS_SCHEMA: &str = "dyadic-parents/1";

impl ParentsFile {
    pub fn new(pm: &ParentMap) -> Self {
        let transitions = pm
            .transitions()
            .iter()
            .map(|t| TransitionFile {
                k: t.level,
                parent: t.parent.clone(),
                class: t.class.iter().map(|c| c.tag()).collect(),
                f_list: t.f_list.clone(),
                blocks: t
                    .blocks
                    .iter()
                    .map(|b| BlockFile {
                        f: b.f,
                        members: b.members.clone(),
                        neighbors: b.neighbors.clone(),
                        designations: b
                            .designations
                            .iter()
                            .map(|d| DesignationFile { pair: [d.pair.0, d.pair.1], a: d.a, b: d.b, y: d.y.0, z: d.z.0, fallback: d.fallback })
                            .collect(),
                    })
                    .collect(),
            })
            .collect();
        ParentsFile { schema: PARENTS_SCHEMA.into(), transitions }
    }
}

/// Parent ordinals per transition, checked against the hierarchy.
pub fn load_parents(dir: &Path, h: &NetHierarchy) -> Result<Vec<Vec<u32>>> {
    let path = dir.join(PARENTS);
    let f: ParentsFile = read_json(dir, PARENTS)?;
    check_schema(dir, PARENTS, &f.schema, PARENTS_SCHEMA)?;
    if f.transitions.len() != (h.k_max - h.k_min) as usize {
        return Err(corrupt(&path, "transition count does not match the window"));
    }
    let mut out = Vec::with_capacity(f.transitions.len());
    for (i, t) in f.transitions.iter().enumerate() {
        let k = h.k_min + 1 + i as i32;
        if t.k != k || t.parent.len() != h.node_count(k) || t.class.chars().count() != t.parent.len() {
            return Err(corrupt(&path, format!("transition to level {k} has the wrong shape")));
        }
        let coarse = h.node_count(k - 1) as u32;
        if t.parent.iter().any(|&p| p == 0 || p > coarse) {
            return Err(corrupt(&path, format!("transition to level {k} names a missing parent")));
        }
        out.push(t.parent.clone());
    }
    Ok(out)
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct CubeLevelFile {
    pub k: i32,
    pub k_sets: Vec<Vec<u32>>,
    pub q_sets: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct CubesFile {
    pub schema: String,
    #[serde(with = "real")]
    pub contact: f64,
    pub levels: Vec<CubeLevelFile>,
}

pub const CUBES_SCHEMA: &str = "dyadic-cubes/1";

impl CubesFile {
    pub fn new(cs: &CubeSystem) -> Self {
        let h = cs.hierarchy();
        CubesFile {
            schema: CUBES_SCHEMA.into(),
            contact: cs.contact,
            levels: h
                .level_range()
                .map(|k| CubeLevelFile {
                    k,
                    k_sets: h.nodes(k).map(|n| cs.k_set(n).to_vec()).collect(),
                    q_sets: h.nodes(k).map(|n| cs.q_set(n).to_vec()).collect(),
                })
                .collect(),
        }
    }
}

pub fn load_cubes(dir: &Path) -> Result<CubesFile> {
    let f: CubesFile = read_json(dir, CUBES)?;
    check_schema(dir, CUBES, &f.schema, CUBES_SCHEMA)?;
    Ok(f)
}
