//! Permutations of rectangular grids that maximally separate neighbors.
//!
//! A permutation `pi` of the `n1 x n2` grid is scored by summing, over all
//! pairs of adjacent cells, the L1 distance between their images. This crate
//! computes that objective and its signed multiset decomposition ([`grid`]),
//! analyzes the corner/boundary/defect structure that controls it
//! ([`structure`]), provides the layer/disk machinery around the grid center
//! ([`disks`]), constructs and certifies the permutations attaining the
//! maximum ([`construct`]), handles the toroidal variant ([`torus`]), and
//! ships independent search oracles — exhaustive, branch-and-bound, and
//! simulated annealing — for desk-scale validation ([`solver`]).
//!
//! All arithmetic is exact integer arithmetic; every function is pure and
//! safe to call concurrently.

pub mod construct;
pub mod disks;
pub mod grid;
pub mod solver;
pub mod structure;
pub mod torus;

pub use construct::{
    build_exceptional, build_optimal, family_status, max_value, oned_is_optimal, oned_max,
    verify_optimal, BuildChoices, BuildMode, Certificate, DefectKind, DefectLine, FailedCondition,
    FamilyStatus, HetSide, OnedMax,
};
pub use disks::{
    ball_identity_check, center, greedy_disk, is_disk, layer_cells, layers, min_weight, weight,
    CenterDoubled, Layer,
};
pub use grid::{
    decompose, neighbors, score, Cell, Decomposition, EdgeSet, GridDims, GridFile,
    GridPermutation, Topology,
};
pub use solver::{anneal, bnb_max, exhaustive_argmax, exhaustive_max, Schedule, SearchResult};
pub use structure::{
    bichromatic_edges, color_class, exact_identity_check, key_lower_bound_doubled,
    naive_upper_bound, structure_report, CellColor, ColorClass, StructureReport,
};
pub use torus::{torus_build, torus_max_value, torus_verify, TorusCertificate, TorusFailedCondition};

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("grid dimensions must be positive, got {0}x{1}")]
    InvalidDims(u32, u32),
    #[error("operation requires even dimensions, got {0}x{1}; odd dimensions are an open problem")]
    OddDims(u32, u32),
    #[error("operation requires n1 <= n2, got {0}x{1}")]
    DimsNotSorted(u32, u32),
    #[error("cell ({0},{1}) lies outside the {2}x{3} grid")]
    CellOutOfRange(u32, u32, u32, u32),
    #[error("images do not form a bijection of the grid: {0}")]
    NotBijective(String),
    #[error("k = {0} out of range 0..={1}")]
    SubsetSizeOutOfRange(usize, usize),
    #[error("cells are not distinct: ({0},{1}) repeats")]
    DuplicateCell(u32, u32),
    #[error("the optimal family is empty for {n1}x{n2}: {reason}")]
    EmptyFamily { n1: u32, n2: u32, reason: String },
    #[error("infeasible build choices for {n1}x{n2}: {reason}")]
    InfeasibleChoices { n1: u32, n2: u32, reason: String },
    #[error("{0}x{1} is not an exceptional square (n1 = n2 in {{4, 8, 12, 16}})")]
    NotExceptional(u32, u32),
    #[error("search target {target} not reached within budget; best score found {best}")]
    TargetNotReached { target: i64, best: i64 },
    #[error("exhaustive search over {cells} cells refused: requires {permutations} permutations (budget {budget} cells)")]
    SearchBudgetExceeded {
        cells: u32,
        permutations: u128,
        budget: u32,
    },
    #[error("sequence is not a permutation of 1..={0}")]
    NotAPermutation(usize),
    #[error("sequence length {0} too short, need n >= 2")]
    SequenceTooShort(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
