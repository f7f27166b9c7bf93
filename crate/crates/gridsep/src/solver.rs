//! Independent search oracles: exhaustive enumeration, depth-first
//! branch-and-bound with an admissible bound, and simulated annealing over
//! transposition moves. These validate the closed forms at desk scale and
//! never share code with the constructions they check.

use crate::construct::{build_exceptional, build_optimal, BuildChoices};
use crate::grid::{neighbors, Cell, GridDims, GridFile, GridPermutation, Topology};
use crate::torus::torus_build;
use crate::{score, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Annealing schedule: `steps` proposals starting at temperature `t0`,
/// multiplied by `cooling` after each proposal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub steps: u64,
    pub t0: f64,
    pub cooling: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            steps: 1_000_000,
            t0: 3.0,
            cooling: 0.99999,
        }
    }
}

/// Outcome of a search run.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Number of maximizers; reported by exhaustive search only.
    pub argmax_count: Option<u64>,
    pub max_score: i64,
    pub nodes_explored: u64,
    /// True only for exhaustive or completed branch-and-bound runs.
    pub proven_optimal: bool,
    pub witness: GridPermutation,
}

impl SearchResult {
    /// JSON rendering with sorted keys; the witness uses the interchange
    /// format under the given topology.
    pub fn to_json(&self, topology: Topology) -> serde_json::Value {
        serde_json::json!({
            "argmax_count": self.argmax_count,
            "max_score": self.max_score,
            "nodes_explored": self.nodes_explored,
            "proven_optimal": self.proven_optimal,
            "witness": GridFile::new(&self.witness, topology),
        })
    }
}

const DEFAULT_CELL_BUDGET: u32 = 9;

fn factorial_saturating(n: u32) -> u128 {
    (1..=u128::from(n)).fold(1u128, |acc, k| acc.saturating_mul(k))
}

fn check_cell_budget(dims: GridDims, cell_budget: Option<u32>) -> Result<()> {
    let budget = cell_budget.unwrap_or(DEFAULT_CELL_BUDGET);
    let cells = dims.cells() as u32;
    if cells > budget {
        return Err(Error::SearchBudgetExceeded {
            cells,
            permutations: factorial_saturating(cells),
            budget,
        });
    }
    Ok(())
}

/// Edges as position-index pairs `(lo, hi)`, `lo <= hi`, duplicates kept.
fn edge_indices(dims: GridDims, topology: Topology) -> Vec<(usize, usize)> {
    let cells: Vec<Cell> = dims.cell_iter().collect();
    let pos = |c: Cell| cells.binary_search(&c).expect("cell in grid");
    neighbors(dims, topology)
        .edges()
        .iter()
        .map(|&(x, y)| {
            let (a, b) = (pos(x), pos(y));
            (a.min(b), a.max(b))
        })
        .collect()
}

/// Enumerates all permutations in lexicographic image order, streaming the
/// score of each leaf. Scores are maintained incrementally.
fn enumerate<F: FnMut(&[Cell], i64)>(dims: GridDims, topology: Topology, mut on_leaf: F) {
    let cells: Vec<Cell> = dims.cell_iter().collect();
    let n = cells.len();
    // edges bucketed by their later endpoint, so assigning position k closes
    // exactly the edges in bucket k
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (lo, hi) in edge_indices(dims, topology) {
        buckets[hi].push(lo);
    }
    let mut images: Vec<Cell> = vec![Cell::new(0, 0); n];
    let mut used = vec![false; n];

    fn recurse<F: FnMut(&[Cell], i64)>(
        k: usize,
        partial: i64,
        cells: &[Cell],
        buckets: &[Vec<usize>],
        images: &mut Vec<Cell>,
        used: &mut Vec<bool>,
        on_leaf: &mut F,
    ) {
        let n = cells.len();
        if k == n {
            on_leaf(images, partial);
            return;
        }
        for vi in 0..n {
            if used[vi] {
                continue;
            }
            let v = cells[vi];
            images[k] = v;
            used[vi] = true;
            let added: i64 = buckets[k].iter().map(|&lo| images[lo].l1(v)).sum();
            recurse(k + 1, partial + added, cells, buckets, images, used, on_leaf);
            used[vi] = false;
        }
    }
    recurse(0, 0, &cells, &buckets, &mut images, &mut used, &mut on_leaf);
}

/// Exact maximum, lexicographically smallest witness, and argmax count over
/// all `(n1*n2)!` permutations. Refuses grids above the cell budget
/// (default 9 cells).
pub fn exhaustive_max(
    dims: GridDims,
    topology: Topology,
    cell_budget: Option<u32>,
) -> Result<SearchResult> {
    check_cell_budget(dims, cell_budget)?;
    let mut best = i64::MIN;
    let mut count = 0u64;
    let mut leaves = 0u64;
    let mut witness: Option<Vec<Cell>> = None;
    enumerate(dims, topology, |images, s| {
        leaves += 1;
        if s > best {
            best = s;
            count = 1;
            witness = Some(images.to_vec());
        } else if s == best {
            count += 1;
        }
    });
    Ok(SearchResult {
        argmax_count: Some(count),
        max_score: best,
        nodes_explored: leaves,
        proven_optimal: true,
        witness: GridPermutation::new(dims, witness.expect("at least one permutation"))?,
    })
}

/// Exact maximum together with the complete argmax set, in lexicographic
/// order.
pub fn exhaustive_argmax(
    dims: GridDims,
    topology: Topology,
    cell_budget: Option<u32>,
) -> Result<(i64, Vec<GridPermutation>)> {
    check_cell_budget(dims, cell_budget)?;
    let mut best = i64::MIN;
    let mut arg: Vec<Vec<Cell>> = Vec::new();
    enumerate(dims, topology, |images, s| {
        if s > best {
            best = s;
            arg.clear();
            arg.push(images.to_vec());
        } else if s == best {
            arg.push(images.to_vec());
        }
    });
    let arg = arg
        .into_iter()
        .map(|images| GridPermutation::new(dims, images))
        .collect::<Result<Vec<_>>>()?;
    Ok((best, arg))
}

/// Best known permutation to seed the branch-and-bound incumbent.
fn initial_incumbent(dims: GridDims, topology: Topology) -> Option<GridPermutation> {
    if !dims.is_even() {
        return None;
    }
    match topology {
        Topology::Planar => build_optimal(dims, &BuildChoices::default())
            .or_else(|_| build_exceptional(dims, 0))
            .ok(),
        Topology::Torus => torus_build(dims, &BuildChoices::default()).ok(),
    }
}

struct BnbState {
    cells: Vec<Cell>,
    buckets: Vec<Vec<usize>>,        // edges closed by each depth
    edges: Vec<(usize, usize)>,
    edge_cap: i64,
    images: Vec<Cell>,
    used: Vec<bool>,
    incumbent_score: i64,
    incumbent: Option<Vec<Cell>>,
    nodes: u64,
    node_budget: u64,
    exhausted: bool,
}

impl BnbState {
    /// Admissible upper bound for all completions of the first `k` images:
    /// exact on closed edges, per-edge maximum over remaining values on
    /// half-assigned edges, and the global cap on open edges.
    fn bound(&self, k: usize, partial: i64) -> i64 {
        let mut b = partial;
        for &(lo, hi) in &self.edges {
            if hi < k {
                continue; // closed, already in partial
            }
            if lo < k {
                let anchor = self.images[lo];
                let mut best = 0;
                for (vi, &v) in self.cells.iter().enumerate() {
                    if !self.used[vi] {
                        best = best.max(anchor.l1(v));
                    }
                }
                b += best;
            } else {
                b += self.edge_cap;
            }
        }
        b
    }

    fn dfs(&mut self, k: usize, partial: i64) {
        if self.exhausted {
            return;
        }
        if self.nodes >= self.node_budget {
            self.exhausted = true;
            return;
        }
        self.nodes += 1;
        if k == self.cells.len() {
            if partial > self.incumbent_score
                || (partial == self.incumbent_score
                    && self
                        .incumbent
                        .as_ref()
                        .is_none_or(|w| self.images.as_slice() < w.as_slice()))
            {
                self.incumbent_score = partial;
                self.incumbent = Some(self.images.clone());
            }
            return;
        }
        for vi in 0..self.cells.len() {
            if self.used[vi] {
                continue;
            }
            let v = self.cells[vi];
            self.images[k] = v;
            self.used[vi] = true;
            let added: i64 = self.buckets[k].iter().map(|&lo| self.images[lo].l1(v)).sum();
            let next = partial + added;
            if self.bound(k + 1, next) > self.incumbent_score {
                self.dfs(k + 1, next);
            }
            self.used[vi] = false;
            if self.exhausted {
                return;
            }
        }
    }
}

/// Depth-first branch-and-bound in row-major cell order with row-major value
/// order. The incumbent is initialized from the constructive optimum when
/// one is available; `proven_optimal` is true iff the search completed
/// within the node budget.
pub fn bnb_max(dims: GridDims, topology: Topology, node_budget: u64) -> Result<SearchResult> {
    let cells: Vec<Cell> = dims.cell_iter().collect();
    let n = cells.len();
    let edges = edge_indices(dims, topology);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(lo, hi) in &edges {
        buckets[hi].push(lo);
    }
    let incumbent = initial_incumbent(dims, topology);
    let (incumbent_score, incumbent_images) = match &incumbent {
        Some(pi) => (score(pi, topology), Some(pi.images().to_vec())),
        None => (i64::MIN, None),
    };
    let mut state = BnbState {
        edge_cap: i64::from(dims.n1()) - 1 + i64::from(dims.n2()) - 1,
        cells,
        buckets,
        edges,
        images: vec![Cell::new(0, 0); n],
        used: vec![false; n],
        incumbent_score,
        incumbent: incumbent_images,
        nodes: 0,
        node_budget,
        exhausted: false,
    };
    state.dfs(0, 0);
    let witness = GridPermutation::new(dims, state.incumbent.expect("incumbent or full search"))?;
    Ok(SearchResult {
        argmax_count: None,
        max_score: state.incumbent_score,
        nodes_explored: state.nodes,
        proven_optimal: !state.exhausted,
        witness,
    })
}

/// Transposition-move simulated annealing from a seeded random start.
/// Deterministic given `(dims, topology, seed, schedule)`; stops early when
/// `target` is reached; `proven_optimal` is always false.
pub fn anneal(
    dims: GridDims,
    topology: Topology,
    target: Option<i64>,
    seed: u64,
    schedule: &Schedule,
) -> SearchResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start = GridPermutation::identity(dims);
    let n = dims.cells();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        start.swap_indices(i, j);
    }
    anneal_with_rng(start, topology, target, rng, schedule.steps, schedule.t0, schedule.cooling)
}

/// Annealing from a caller-supplied start state (used by the exceptional
/// construction).
pub(crate) fn anneal_from(
    start: GridPermutation,
    topology: Topology,
    target: Option<i64>,
    seed: u64,
    steps: u64,
    t0: f64,
    cooling: f64,
) -> SearchResult {
    let rng = ChaCha8Rng::seed_from_u64(seed);
    anneal_with_rng(start, topology, target, rng, steps, t0, cooling)
}

fn anneal_with_rng(
    start: GridPermutation,
    topology: Topology,
    target: Option<i64>,
    mut rng: ChaCha8Rng,
    steps: u64,
    t0: f64,
    cooling: f64,
) -> SearchResult {
    let dims = start.dims();
    let n = dims.cells();
    let edges = edge_indices(dims, topology);
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ei, &(lo, hi)) in edges.iter().enumerate() {
        incident[lo].push(ei);
        if hi != lo {
            incident[hi].push(ei);
        }
    }
    let mut pi = start;
    let mut current = score(&pi, topology);
    let mut best_score = current;
    let mut best = pi.clone();
    let mut temperature = t0;
    let mut proposals = 0u64;

    let edge_len = |pi: &GridPermutation, ei: usize| {
        let (lo, hi) = edges[ei];
        pi.images()[lo].l1(pi.images()[hi])
    };

    if target.is_some_and(|t| best_score >= t) {
        // already there; report without moving
    } else if n >= 2 {
        for _ in 0..steps {
            proposals += 1;
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n);
            while b == a {
                b = rng.gen_range(0..n);
            }
            // touched edge instances, counting the a-b edge once
            let mut old = 0i64;
            for &ei in &incident[a] {
                old += edge_len(&pi, ei);
            }
            for &ei in &incident[b] {
                let (lo, hi) = edges[ei];
                if lo != a && hi != a {
                    old += edge_len(&pi, ei);
                }
            }
            pi.swap_indices(a, b);
            let mut new = 0i64;
            for &ei in &incident[a] {
                new += edge_len(&pi, ei);
            }
            for &ei in &incident[b] {
                let (lo, hi) = edges[ei];
                if lo != a && hi != a {
                    new += edge_len(&pi, ei);
                }
            }
            let delta = new - old;
            let accept = delta >= 0 || {
                let p = (delta as f64 / temperature.max(1e-12)).exp();
                rng.gen::<f64>() < p
            };
            if accept {
                current += delta;
                if current > best_score {
                    best_score = current;
                    best = pi.clone();
                    if target.is_some_and(|t| best_score >= t) {
                        break;
                    }
                }
            } else {
                pi.swap_indices(a, b);
            }
            temperature *= cooling;
        }
    }

    SearchResult {
        argmax_count: None,
        max_score: best_score,
        nodes_explored: proposals,
        proven_optimal: false,
        witness: best,
    }
}
