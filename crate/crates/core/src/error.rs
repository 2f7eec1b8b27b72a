use core::fmt;

use alloc::string::String;

use crate::nets::NodeId;
use crate::space::PointId;

/// Errors raised by the construction pipeline.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Distance matrix is not square.
    NotSquare { rows: usize, row: usize, len: usize },
    /// `d(a,b)` and `d(b,a)` differ by more than the symmetry tolerance.
    AsymmetricInput { a: PointId, b: PointId },
    /// A diagonal entry is nonzero.
    NonzeroDiagonal { index: PointId },
    /// Distinct points at distance zero (or a negative/non-finite entry).
    InvalidDistance { a: PointId, b: PointId, value: f64 },
    /// `d(a,c) > d(a,b) + d(b,c)`.
    TriangleViolation { a: PointId, b: PointId, c: PointId },
    /// A generator would produce more points than the configured cap.
    SpecTooLarge { points: usize, cap: usize },
    /// Unparseable generator descriptor.
    BadDescriptor(String),
    /// A one-point space has no scales to probe.
    DegenerateSpace,
    EmptySpace,
    /// Seed points closer than the requested separation.
    SeedsTooClose { a: PointId, b: PointId, distance: f64 },
    WindowEmpty { k_min: i32, k_max: i32 },
    InvalidInput(String),
    /// The constant recipe produced no admissible ratio.
    Infeasible(String),
    /// No point `z` with `inner <= d(center, z) < outer`.
    EmptyAnnulus {
        center: PointId,
        inner: f64,
        outer: f64,
        below: Option<(PointId, f64)>,
        above: Option<(PointId, f64)>,
    },
    /// More close parent pairs than `N(N-1)/2`; the packing estimate was too small.
    PairingOverflow { node: NodeId, pairs: usize, bound: usize },
    /// A child index was designated twice, or a designation left its block.
    DesignationConflict { node: NodeId, detail: String },
    /// `K` left the ball prescribed by the chain bound.
    BallBoundViolated { node: NodeId, point: PointId, distance: f64, bound: f64 },
    NoSingletonRoot { level: i32, nodes: usize },
    DepthUnavailable { level: i32, finest: i32 },
    InsufficientDepth { usable: usize },
    NoConvergence { iterations: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotSquare { rows, row, len } => {
                write!(f, "matrix with {rows} rows has row {row} of length {len}")
            }
            Error::AsymmetricInput { a, b } => write!(f, "asymmetric input at ({a}, {b})"),
            Error::NonzeroDiagonal { index } => write!(f, "nonzero diagonal entry at {index}"),
            Error::InvalidDistance { a, b, value } => {
                write!(f, "invalid distance {value} between {a} and {b}")
            }
            Error::TriangleViolation { a, b, c } => {
                write!(f, "triangle inequality violated: d({a},{c}) > d({a},{b}) + d({b},{c})")
            }
            Error::SpecTooLarge { points, cap } => {
                write!(f, "generator needs {points} points, cap is {cap}")
            }
            Error::BadDescriptor(s) => write!(f, "bad generator descriptor: {s}"),
            Error::DegenerateSpace => write!(f, "space has a single point"),
            Error::EmptySpace => write!(f, "space has no points"),
            Error::SeedsTooClose { a, b, distance } => {
                write!(f, "seeds {a} and {b} are only {distance} apart")
            }
            Error::WindowEmpty { k_min, k_max } => write!(f, "empty scale window [{k_min}, {k_max}]"),
            Error::InvalidInput(s) => write!(f, "invalid input: {s}"),
            Error::Infeasible(s) => write!(f, "infeasible constants: {s}"),
            Error::EmptyAnnulus { center, inner, outer, .. } => {
                write!(f, "no point z with {inner} <= d({center}, z) < {outer}")
            }
            Error::PairingOverflow { node, pairs, bound } => {
                write!(f, "block at {node} has {pairs} parent pairs, bound is {bound}")
            }
            Error::DesignationConflict { node, detail } => {
                write!(f, "designation conflict at {node}: {detail}")
            }
            Error::BallBoundViolated { node, point, distance, bound } => {
                write!(f, "point {point} of K{node} is at {distance} > {bound}")
            }
            Error::NoSingletonRoot { level, nodes } => {
                write!(f, "coarsest level {level} has {nodes} nodes, expected 1")
            }
            Error::DepthUnavailable { level, finest } => {
                write!(f, "level {level} is beyond the finest level {finest}")
            }
            Error::InsufficientDepth { usable } => {
                write!(f, "only {usable} usable depths, need at least 3")
            }
            Error::NoConvergence { iterations } => {
                write!(f, "no convergence after {iterations} iterations")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
