//! The family of score-maximizing permutations: existence test, constructive
//! generator, optimality certificate, closed-form maxima, the four
//! exceptional squares, and the 1-D baseline.
//!
//! A permutation attains the maximum exactly when four equality conditions
//! hold: the corners carry the four central values, the grid splits into a
//! homogeneous and a heterogeneous half with the minimal number of defects
//! all across the cut, every defect value is `t_i` or `t_i + 1`, and the
//! boundary values form a disk. The generator places values in that order —
//! corners, boundary (a disk, four color classes at a time), the defect
//! line, then the remaining cells under the double checkerboard — using
//! backtracking where the admissible value orderings are not forced.

use crate::disks::{is_disk, layer_cells, layer_size, min_weight};
use crate::grid::{Cell, GridDims, GridPermutation, Topology};
use crate::solver::anneal_from;
use crate::structure::{color_class, defect_multisets, ColorClass};
use crate::{score, Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// The squares on which the optimal family is empty and the maximum drops
/// by two.
pub(crate) const EXCEPTIONAL_SQUARES: [u32; 4] = [4, 8, 12, 16];

/// Orientation of the straight cut carrying all defects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectLine {
    Vertical,
    Horizontal,
}

/// Which half of the grid holds the heterogeneous (red) values. For a
/// horizontal defect line read `Right` as bottom and `Left` as top.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HetSide {
    Right,
    Left,
}

/// Whether the defect values come from rows `t1, t1+1` or columns `t2, t2+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectKind {
    RowDefects,
    ColumnDefects,
}

/// Canonical mode emits the lexicographically first admissible completion;
/// Random mode shuffles the admissible value orderings deterministically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuildMode {
    Canonical,
    Random(u64),
}

/// Free choices of the construction. The defaults give the canonical build:
/// vertical defect line, heterogeneous half on the right, row defects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildChoices {
    pub defect_line: DefectLine,
    pub heterogeneous_side: HetSide,
    pub defect_kind: DefectKind,
    pub mode: BuildMode,
}

impl Default for BuildChoices {
    fn default() -> Self {
        BuildChoices {
            defect_line: DefectLine::Vertical,
            heterogeneous_side: HetSide::Right,
            defect_kind: DefectKind::RowDefects,
            mode: BuildMode::Canonical,
        }
    }
}

/// Whether the optimal family is nonempty, and which build choices are
/// feasible when it is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyStatus {
    Empty,
    Nonempty {
        vertical_row_defects: bool,
        vertical_column_defects: bool,
        horizontal_allowed: bool,
    },
}

/// The specific equality condition an optimality certificate failed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailedCondition {
    CornersNotLambda1,
    DefectCountNotMinimal,
    NoCleanSplit,
    DefectValuesWrong,
    BoundaryNotDisk,
}

/// Optimality verdict: pass iff all four equality conditions hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub failed: Option<FailedCondition>,
    pub pass: bool,
}

impl Certificate {
    fn pass() -> Self {
        Certificate {
            failed: None,
            pass: true,
        }
    }

    fn fail(cond: FailedCondition) -> Self {
        Certificate {
            failed: Some(cond),
            pass: false,
        }
    }
}

fn class_idx(c: ColorClass) -> usize {
    match c {
        ColorClass::LightBlue => 0,
        ColorClass::DarkBlue => 1,
        ColorClass::LightRed => 2,
        ColorClass::DarkRed => 3,
    }
}

/// Smallest `r` with `sum_{i<=r} |layer_i| >= |B u C|`, plus that sum.
fn boundary_layer_cover(dims: GridDims) -> Result<(u32, u64)> {
    let bc = 2 * u64::from(dims.n1()) + 2 * u64::from(dims.n2()) - 4;
    let mut r = 0;
    let mut acc = 0u64;
    while acc < bc {
        r += 1;
        acc += layer_size(dims, r)?;
    }
    Ok((r, acc))
}

/// Feasibility of the optimal family for even `n1 <= n2`, per defect kind.
///
/// Row-defect feasibility follows the layer-cover case split; the family is
/// empty exactly when that fails, which happens only for the four
/// exceptional squares. Column-defect feasibility counts the values in
/// columns `t2, t2+1` available inside the disk (boundary defects) and
/// outside it (interior defects).
pub fn family_status(dims: GridDims) -> Result<FamilyStatus> {
    let (t1, t2) = dims.halves()?;
    dims.require_sorted()?;
    let bc = 2 * i64::from(dims.n1()) + 2 * i64::from(dims.n2()) - 4;
    let (r, lam) = boundary_layer_cover(dims)?;
    let (r_i, lam) = (i64::from(r), lam as i64);

    let row_ok = if lam == bc {
        2 * r_i <= 2 * t2 - t1 + 1
    } else {
        2 * r_i <= 2 * t2 - t1 + 3
    };

    let col_ok = if dims.n2() == 2 {
        // cut pairs coincide with the corners, which carry the central values
        true
    } else if dims.n1() == 2 {
        // every value in columns t2, t2+1 lies in the first layer
        false
    } else {
        let partial = lam > bc;
        let rho = if partial { r_i - 1 } else { r_i };
        let fixed_in = 2 * (rho.min(t1) - 1);
        let flex = if partial && r_i <= t1 { 2 } else { 0 };
        let fixed_out = 2 * (t1 - r_i).max(0);
        let (need_in, need_out) = (1, t1 - 1);
        fixed_in + flex >= need_in
            && fixed_out + flex >= need_out
            && fixed_in + fixed_out + flex >= need_in + need_out
    };

    if !row_ok {
        return Ok(FamilyStatus::Empty);
    }
    Ok(FamilyStatus::Nonempty {
        vertical_row_defects: true,
        vertical_column_defects: col_ok,
        horizontal_allowed: dims.n1() == dims.n2(),
    })
}

/// The maximum of the objective over all permutations:
/// `n1*n2*(n1+n2) - 4 - n1 - w_{2n1+2n2-4}`, two less on the exceptional
/// squares. Accepts dims in either order.
pub fn max_value(dims: GridDims) -> Result<i64> {
    let (ta, tb) = dims.halves()?;
    let (t1, t2) = (ta.min(tb), ta.max(tb));
    let (n1, n2) = (2 * t1, 2 * t2);
    let k = (2 * n1 + 2 * n2 - 4) as usize;
    let base = n1 * n2 * (n1 + n2) - 4 - n1 - min_weight(dims, k)?;
    if n1 == n2 && EXCEPTIONAL_SQUARES.contains(&(n1 as u32)) {
        Ok(base - 2)
    } else {
        Ok(base)
    }
}

/// Position class under the vertical-cut double checkerboard: homogeneous
/// half on the left, heterogeneous on the right, phases fixed so that the
/// cut edges carry defects of the requested kind.
fn position_class(pos: Cell, t2: i64, axis: usize) -> ColorClass {
    let even = (pos.i + pos.j) % 2 == 0;
    if i64::from(pos.j) <= t2 {
        if even {
            ColorClass::LightBlue
        } else {
            ColorClass::DarkBlue
        }
    } else if axis == 0 {
        if even {
            ColorClass::DarkRed
        } else {
            ColorClass::LightRed
        }
    } else if even {
        ColorClass::LightRed
    } else {
        ColorClass::DarkRed
    }
}

struct Builder {
    dims: GridDims,
    t2: i64,
    axis: usize,
    small_target: i64,
    large_target: i64,
    pos_class: Vec<ColorClass>,
    assign: Vec<Option<Cell>>,
    used: Vec<bool>,
    disk_pools: [Vec<Cell>; 4],
    rng: Option<ChaCha8Rng>,
}

struct CutPair {
    hom: usize,
    het: usize,
    need: i64,
}

impl Builder {
    fn idx(&self, c: Cell) -> usize {
        (c.i as usize - 1) * self.dims.n2() as usize + (c.j as usize - 1)
    }

    fn value_class(&self, v: Cell) -> usize {
        class_idx(color_class(v, self.dims).expect("even dims"))
    }

    fn maybe_shuffle(&mut self, v: &mut [Cell]) {
        if let Some(rng) = self.rng.as_mut() {
            v.shuffle(rng);
        }
    }

    fn place(&mut self, pos: usize, v: Cell) {
        self.assign[pos] = Some(v);
        self.used[self.idx(v)] = true;
    }

    fn unplace(&mut self, pos: usize, v: Cell) {
        self.assign[pos] = None;
        self.used[self.idx(v)] = false;
    }

    fn pair_satisfiable(&self, p: &CutPair) -> bool {
        let has_need = |pos: usize| {
            self.assign[pos].is_some_and(|v| v.coord(self.axis) == p.need)
        };
        if has_need(p.hom) || has_need(p.het) {
            return true;
        }
        if self.assign[p.hom].is_some() && self.assign[p.het].is_some() {
            return false;
        }
        [p.hom, p.het].into_iter().any(|pos| {
            self.assign[pos].is_none()
                && self.disk_pools[class_idx(self.pos_class[pos])]
                    .iter()
                    .any(|v| !self.used[self.idx(v)] && v.coord(self.axis) == p.need)
        })
    }

    fn fill_boundary(&mut self, ring: &[usize], k: usize, pairs: &[CutPair]) -> bool {
        if k == ring.len() {
            return pairs.iter().all(|p| self.pair_satisfiable(p));
        }
        let pos = ring[k];
        let pool = self.disk_pools[class_idx(self.pos_class[pos])].clone();
        for v in pool {
            if self.used[self.idx(v)] {
                continue;
            }
            self.place(pos, v);
            if pairs.iter().all(|p| self.pair_satisfiable(p))
                && self.fill_boundary(ring, k + 1, pairs)
            {
                return true;
            }
            self.unplace(pos, v);
        }
        false
    }

    fn fill_contributors(&mut self, pairs: &[CutPair], k: usize, values: &[Vec<Cell>; 4]) -> bool {
        if k == pairs.len() {
            return true;
        }
        let p = &pairs[k];
        for pos in [p.hom, p.het] {
            let pool = &values[class_idx(self.pos_class[pos])];
            for vi in 0..pool.len() {
                let v = pool[vi];
                if self.used[self.idx(v)] || v.coord(self.axis) != p.need {
                    continue;
                }
                self.place(pos, v);
                if self.fill_contributors(pairs, k + 1, values) {
                    return true;
                }
                self.unplace(pos, v);
            }
        }
        false
    }
}

/// Vertical-line construction on normalized dims (`n1 <= n2`, even).
fn build_vertical(dims: GridDims, axis: usize, mode: BuildMode) -> Result<GridPermutation> {
    let (t1, t2) = dims.halves()?;
    let (n1, n2) = (dims.n1(), dims.n2());
    let (small_target, large_target) = if axis == 0 { (t1, t1 + 1) } else { (t2, t2 + 1) };

    let pos_class: Vec<ColorClass> = dims
        .cell_iter()
        .map(|p| position_class(p, t2, axis))
        .collect();
    let rng = match mode {
        BuildMode::Canonical => None,
        BuildMode::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    let mut b = Builder {
        dims,
        t2,
        axis,
        small_target,
        large_target,
        pos_class,
        assign: vec![None; dims.cells()],
        used: vec![false; dims.cells()],
        disk_pools: [Vec::new(), Vec::new(), Vec::new(), Vec::new()],
        rng,
    };

    // corners take the four central values, matched by class
    let lambda1 = layer_cells(dims, 1)?;
    for corner in [
        Cell::new(1, 1),
        Cell::new(1, n2),
        Cell::new(n1, 1),
        Cell::new(n1, n2),
    ] {
        let ci = b.idx(corner);
        let want = b.pos_class[ci];
        let v = *lambda1
            .iter()
            .find(|&&v| color_class(v, dims).unwrap() == want)
            .expect("layer 1 holds one value of each class");
        b.place(ci, v);
    }

    // the boundary multiset is a disk: full layers plus a balanced part of
    // the next, keeping the defect-kind values out of the partial layer
    let bc_size = (2 * n1 + 2 * n2 - 8) as usize; // non-corner boundary cells
    let mut remaining = bc_size;
    let mut layer = 2u32;
    while remaining > 0 {
        let cells = layer_cells(dims, layer)?;
        if cells.len() <= remaining {
            remaining -= cells.len();
            for v in cells {
                b.disk_pools[b.value_class(v)].push(v);
            }
        } else {
            let per_class = remaining / 4;
            let is_defect_value = |v: &Cell| {
                v.coord(axis) == small_target || v.coord(axis) == large_target
            };
            for q in 0..4 {
                let mut cand: Vec<Cell> = cells
                    .iter()
                    .copied()
                    .filter(|v| b.value_class(*v) == q && !is_defect_value(v))
                    .collect();
                b.maybe_shuffle(&mut cand);
                let mut defect: Vec<Cell> = cells
                    .iter()
                    .copied()
                    .filter(|v| b.value_class(*v) == q && is_defect_value(v))
                    .collect();
                cand.append(&mut defect);
                cand.truncate(per_class);
                cand.sort_unstable();
                b.disk_pools[q].extend(cand);
            }
            remaining = 0;
        }
        layer += 1;
    }
    for q in 0..4 {
        b.disk_pools[q].sort_unstable();
        let mut pool = std::mem::take(&mut b.disk_pools[q]);
        b.maybe_shuffle(&mut pool);
        b.disk_pools[q] = pool;
    }

    // clockwise boundary ring from the top-left corner
    let mut ring: Vec<usize> = Vec::with_capacity(bc_size);
    for j in 2..n2 {
        ring.push(b.idx(Cell::new(1, j)));
    }
    for i in 2..n1 {
        ring.push(b.idx(Cell::new(i, n2)));
    }
    for j in (2..n2).rev() {
        ring.push(b.idx(Cell::new(n1, j)));
    }
    for i in (2..n1).rev() {
        ring.push(b.idx(Cell::new(i, 1)));
    }

    let cut_pair = |b: &Builder, i: u32| {
        let hom = b.idx(Cell::new(i, t2 as u32));
        let het = b.idx(Cell::new(i, t2 as u32 + 1));
        let need = if b.pos_class[hom] == ColorClass::LightBlue {
            b.small_target
        } else {
            b.large_target
        };
        CutPair { hom, het, need }
    };
    let boundary_pairs: Vec<CutPair> = [1, n1].iter().map(|&i| cut_pair(&b, i)).collect();
    if !b.fill_boundary(&ring, 0, &boundary_pairs) {
        return Err(Error::InfeasibleChoices {
            n1,
            n2,
            reason: "no disk assignment satisfies the boundary defect values".into(),
        });
    }

    // one defect contributor per interior row of the cut
    let interior_pairs: Vec<CutPair> = (2..n1).map(|i| cut_pair(&b, i)).collect();
    let mut interior_values = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for v in dims.cell_iter() {
        if !b.used[b.idx(v)] {
            interior_values[b.value_class(v)].push(v);
        }
    }
    for pool in &mut interior_values {
        let mut p = std::mem::take(pool);
        b.maybe_shuffle(&mut p);
        *pool = p;
    }
    if !b.fill_contributors(&interior_pairs, 0, &interior_values) {
        return Err(Error::InfeasibleChoices {
            n1,
            n2,
            reason: "not enough defect values left outside the boundary disk".into(),
        });
    }

    // remaining cells: least unused value of the forced class, row-major
    let mut rest = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for v in dims.cell_iter() {
        if !b.used[b.idx(v)] {
            rest[b.value_class(v)].push(v);
        }
    }
    for pool in &mut rest {
        let mut p = std::mem::take(pool);
        b.maybe_shuffle(&mut p);
        p.reverse();
        *pool = p;
    }
    for pi in 0..dims.cells() {
        if b.assign[pi].is_none() {
            let v = rest[class_idx(b.pos_class[pi])]
                .pop()
                .expect("class counts match by construction");
            b.assign[pi] = Some(v);
        }
    }

    let images: Vec<Cell> = b.assign.into_iter().map(Option::unwrap).collect();
    GridPermutation::new(dims, images)
}

/// Constructs a member of the optimal family realizing the given choices.
///
/// Dims may come in either order; internally the grid is normalized to
/// `n1 <= n2` (choices are interpreted in that orientation) and the result
/// transposed back. Errors report the violated feasibility condition.
pub fn build_optimal(dims: GridDims, choices: &BuildChoices) -> Result<GridPermutation> {
    let transpose_input = dims.n1() > dims.n2();
    let norm = if transpose_input { dims.transposed() } else { dims };
    let (t1, t2) = norm.halves()?;

    let status = family_status(norm)?;
    let (row_ok, col_ok, horiz_ok) = match status {
        FamilyStatus::Empty => {
            let (r, lam) = boundary_layer_cover(norm)?;
            let bc = 2 * i64::from(norm.n1()) + 2 * i64::from(norm.n2()) - 4;
            return Err(Error::EmptyFamily {
                n1: dims.n1(),
                n2: dims.n2(),
                reason: format!(
                    "boundary needs {bc} cells, layers 1..{r} supply {lam}, and r = {r} \
                     exceeds t2 - t1/2 + {} / 2 = {}/2 (no defect values remain)",
                    if lam as i64 == bc { 1 } else { 3 },
                    2 * t2 - t1 + if lam as i64 == bc { 1 } else { 3 },
                ),
            });
        }
        FamilyStatus::Nonempty {
            vertical_row_defects,
            vertical_column_defects,
            horizontal_allowed,
        } => (vertical_row_defects, vertical_column_defects, horizontal_allowed),
    };

    let horizontal = choices.defect_line == DefectLine::Horizontal;
    if horizontal && !horiz_ok {
        return Err(Error::InfeasibleChoices {
            n1: dims.n1(),
            n2: dims.n2(),
            reason: "horizontal defect line requires n1 = n2".into(),
        });
    }
    // a horizontal line with one defect kind is the transpose of a vertical
    // line with the other kind
    let effective_kind = match (horizontal, choices.defect_kind) {
        (false, k) => k,
        (true, DefectKind::RowDefects) => DefectKind::ColumnDefects,
        (true, DefectKind::ColumnDefects) => DefectKind::RowDefects,
    };
    let feasible = match effective_kind {
        DefectKind::RowDefects => row_ok,
        DefectKind::ColumnDefects => col_ok,
    };
    if !feasible {
        return Err(Error::InfeasibleChoices {
            n1: dims.n1(),
            n2: dims.n2(),
            reason: "column defects are infeasible: too few values in columns t2, t2+1 \
                     remain outside the boundary disk"
                .into(),
        });
    }

    let axis = match effective_kind {
        DefectKind::RowDefects => 0,
        DefectKind::ColumnDefects => 1,
    };
    let mut pi = build_vertical(norm, axis, choices.mode)?;
    if choices.heterogeneous_side == HetSide::Left {
        pi = pi.columns_reversed();
    }
    if horizontal {
        pi = pi.transposed();
    }
    if transpose_input {
        pi = pi.transposed();
    }
    debug_assert_eq!(score(&pi, Topology::Planar), max_value(dims)?);
    Ok(pi)
}

/// Checks the four equality conditions characterizing the optimal family.
/// Transposes internally when `n1 > n2`.
pub fn verify_optimal(pi: &GridPermutation) -> Result<Certificate> {
    if pi.dims().n1() > pi.dims().n2() {
        return verify_optimal(&pi.transposed());
    }
    let dims = pi.dims();
    let (t1, t2) = dims.halves()?;
    let (n1, n2) = (dims.n1(), dims.n2());

    let mut corners: Vec<Cell> = [
        Cell::new(1, 1),
        Cell::new(1, n2),
        Cell::new(n1, 1),
        Cell::new(n1, n2),
    ]
    .iter()
    .map(|&p| pi.image(p))
    .collect();
    corners.sort_unstable();
    let mut lambda1 = layer_cells(dims, 1)?;
    lambda1.sort_unstable();
    if corners != lambda1 {
        return Ok(Certificate::fail(FailedCondition::CornersNotLambda1));
    }

    let [d1s, d1l, d2s, d2l] = defect_multisets(pi, Topology::Planar)?;
    if (d1s.len() + d1l.len() + d2s.len() + d2l.len()) as u32 != n1 {
        return Ok(Certificate::fail(FailedCondition::DefectCountNotMinimal));
    }

    let hom = |p: Cell| color_class(pi.image(p), dims).unwrap().is_homogeneous();
    let column_split = (1..=n1).all(|i| {
        (2..=t2 as u32).all(|j| hom(Cell::new(i, j)) == hom(Cell::new(i, 1)))
            && (t2 as u32 + 1..=n2).all(|j| hom(Cell::new(i, j)) != hom(Cell::new(i, 1)))
    }) && (1..=n1).all(|i| hom(Cell::new(i, 1)) == hom(Cell::new(1, 1)));
    let row_split = n1 == n2
        && (1..=n2).all(|j| {
            (2..=t1 as u32).all(|i| hom(Cell::new(i, j)) == hom(Cell::new(1, j)))
                && (t1 as u32 + 1..=n1).all(|i| hom(Cell::new(i, j)) != hom(Cell::new(1, j)))
        })
        && (1..=n2).all(|j| hom(Cell::new(1, j)) == hom(Cell::new(1, 1)));
    if !column_split && !row_split {
        return Ok(Certificate::fail(FailedCondition::NoCleanSplit));
    }

    if d1s.iter().any(|&v| v != t1)
        || d1l.iter().any(|&v| v != t1 + 1)
        || d2s.iter().any(|&v| v != t2)
        || d2l.iter().any(|&v| v != t2 + 1)
    {
        return Ok(Certificate::fail(FailedCondition::DefectValuesWrong));
    }

    if !is_disk(dims, &crate::disks::boundary_values(pi))? {
        return Ok(Certificate::fail(FailedCondition::BoundaryNotDisk));
    }
    Ok(Certificate::pass())
}

/// Generic construction with the interior defect values relaxed to the
/// nearest available ones. On the exceptional squares this lands exactly two
/// below the reduced maximum's base, giving a warm start for the search.
fn relaxed_build(dims: GridDims) -> Result<GridPermutation> {
    let (t1, t2) = dims.halves()?;
    let (n1, n2) = (dims.n1(), dims.n2());
    let axis = 0usize;
    let (small_target, large_target) = (t1, t1 + 1);
    let pos_class: Vec<ColorClass> = dims
        .cell_iter()
        .map(|p| position_class(p, t2, axis))
        .collect();
    let mut b = Builder {
        dims,
        t2,
        axis,
        small_target,
        large_target,
        pos_class,
        assign: vec![None; dims.cells()],
        used: vec![false; dims.cells()],
        disk_pools: [Vec::new(), Vec::new(), Vec::new(), Vec::new()],
        rng: None,
    };
    let lambda1 = layer_cells(dims, 1)?;
    for corner in [
        Cell::new(1, 1),
        Cell::new(1, n2),
        Cell::new(n1, 1),
        Cell::new(n1, n2),
    ] {
        let ci = b.idx(corner);
        let want = b.pos_class[ci];
        let v = *lambda1
            .iter()
            .find(|&&v| color_class(v, dims).unwrap() == want)
            .unwrap();
        b.place(ci, v);
    }
    let bc_size = (2 * n1 + 2 * n2 - 8) as usize;
    let mut remaining = bc_size;
    let mut layer = 2u32;
    while remaining > 0 {
        let cells = layer_cells(dims, layer)?;
        if cells.len() <= remaining {
            remaining -= cells.len();
            for v in cells {
                b.disk_pools[b.value_class(v)].push(v);
            }
        } else {
            let per_class = remaining / 4;
            let is_defect_value =
                |v: &Cell| v.coord(axis) == small_target || v.coord(axis) == large_target;
            for q in 0..4 {
                let mut cand: Vec<Cell> = cells
                    .iter()
                    .copied()
                    .filter(|v| b.value_class(*v) == q && !is_defect_value(v))
                    .collect();
                cand.extend(
                    cells
                        .iter()
                        .copied()
                        .filter(|v| b.value_class(*v) == q && is_defect_value(v)),
                );
                cand.truncate(per_class);
                b.disk_pools[q].extend(cand);
            }
            remaining = 0;
        }
        layer += 1;
    }
    for q in 0..4 {
        b.disk_pools[q].sort_unstable();
    }
    // boundary: satisfy the two boundary defect pairs greedily, then fill
    for i in [1, n1] {
        let hom = b.idx(Cell::new(i, t2 as u32));
        let need = if b.pos_class[hom] == ColorClass::LightBlue {
            small_target
        } else {
            large_target
        };
        let q = class_idx(b.pos_class[hom]);
        if let Some(&v) = b.disk_pools[q]
            .iter()
            .find(|v| !b.used[b.idx(**v)] && v.coord(axis) == need)
        {
            b.place(hom, v);
        }
    }
    let mut ring: Vec<usize> = Vec::new();
    for j in 2..n2 {
        ring.push(b.idx(Cell::new(1, j)));
    }
    for i in 2..n1 {
        ring.push(b.idx(Cell::new(i, n2)));
    }
    for j in (2..n2).rev() {
        ring.push(b.idx(Cell::new(n1, j)));
    }
    for i in (2..n1).rev() {
        ring.push(b.idx(Cell::new(i, 1)));
    }
    for pos in ring {
        if b.assign[pos].is_some() {
            continue;
        }
        let q = class_idx(b.pos_class[pos]);
        let v = *b.disk_pools[q]
            .iter()
            .find(|v| !b.used[b.idx(**v)])
            .expect("disk pool sized to the boundary");
        b.place(pos, v);
    }
    // interior defect cells: nearest available coordinate
    for i in 2..n1 {
        let hom = b.idx(Cell::new(i, t2 as u32));
        let het = b.idx(Cell::new(i, t2 as u32 + 1));
        let need = if b.pos_class[hom] == ColorClass::LightBlue {
            small_target
        } else {
            large_target
        };
        let mut best: Option<(i64, usize, Cell)> = None;
        for pos in [hom, het] {
            for v in dims.cell_iter() {
                if b.used[b.idx(v)]
                    || class_idx(color_class(v, dims).unwrap()) != class_idx(b.pos_class[pos])
                {
                    continue;
                }
                let gap = (v.coord(axis) - need).abs();
                if best.map_or(true, |(g, _, _)| gap < g) {
                    best = Some((gap, pos, v));
                }
            }
        }
        let (_, pos, v) = best.expect("interior values remain");
        b.place(pos, v);
    }
    let mut rest = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for v in dims.cell_iter() {
        if !b.used[b.idx(v)] {
            rest[b.value_class(v)].push(v);
        }
    }
    for pool in &mut rest {
        pool.reverse();
    }
    for pi in 0..dims.cells() {
        if b.assign[pi].is_none() {
            b.assign[pi] = Some(rest[class_idx(b.pos_class[pi])].pop().unwrap());
        }
    }
    GridPermutation::new(dims, b.assign.into_iter().map(Option::unwrap).collect())
}

/// Finds a permutation scoring exactly the reduced maximum on one of the
/// four exceptional squares, by annealing from a near-optimal start. Fails
/// loudly with the best score found if the target is not reached.
pub fn build_exceptional(dims: GridDims, seed: u64) -> Result<GridPermutation> {
    let (t1, t2) = dims.halves()?;
    if t1 != t2 || !EXCEPTIONAL_SQUARES.contains(&dims.n1()) {
        return Err(Error::NotExceptional(dims.n1(), dims.n2()));
    }
    let target = max_value(dims)?;
    let start = relaxed_build(dims)?;
    let mut best_seen = score(&start, Topology::Planar);
    for attempt in 0..5u64 {
        let steps = 2_000_000;
        let result = anneal_from(
            start.clone(),
            Topology::Planar,
            Some(target),
            seed.wrapping_add(attempt),
            steps,
            1.5,
            0.99999,
        );
        best_seen = best_seen.max(result.max_score);
        if result.max_score >= target {
            debug_assert_eq!(result.max_score, target);
            return Ok(result.witness);
        }
    }
    Err(Error::TargetNotReached {
        target,
        best: best_seen,
    })
}

/// Maximum total 1-D neighbor separation as (numerator, denominator, total):
/// the average maximum is `numerator / denominator`, and `total` is the
/// integer maximum of the sum over the `n - 1` adjacent pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OnedMax {
    pub numerator: i64,
    pub denominator: i64,
    pub total: i64,
}

pub fn oned_max(n: usize) -> Result<OnedMax> {
    if n < 2 {
        return Err(Error::SequenceTooShort(n));
    }
    let t = (n / 2) as i64;
    Ok(if n % 2 == 0 {
        OnedMax {
            numerator: 2 * t * t - 1,
            denominator: 2 * t - 1,
            total: 2 * t * t - 1,
        }
    } else {
        OnedMax {
            numerator: 2 * t * t + 2 * t - 1,
            denominator: 2 * t,
            total: 2 * t * t + 2 * t - 1,
        }
    })
}

/// True iff the sequence oscillates between the prescribed halves with the
/// prescribed endpoint pair; for odd `n` both half-splits are admissible.
pub fn oned_is_optimal(seq: &[u32]) -> Result<bool> {
    let n = seq.len();
    if n < 2 {
        return Err(Error::SequenceTooShort(n));
    }
    let mut seen = vec![false; n];
    for &v in seq {
        if v == 0 || v as usize > n || seen[v as usize - 1] {
            return Err(Error::NotAPermutation(n));
        }
        seen[v as usize - 1] = true;
    }
    let t = (n / 2) as u32;
    let oscillates = |lo_max: u32| {
        seq.windows(2)
            .all(|w| (w[0] <= lo_max) != (w[1] <= lo_max))
    };
    let ends = (seq[0], seq[n - 1]);
    Ok(if n % 2 == 0 {
        oscillates(t) && (ends == (t, t + 1) || ends == (t + 1, t))
    } else {
        (oscillates(t) && (ends == (t + 1, t + 2) || ends == (t + 2, t + 1)))
            || (oscillates(t + 1) && (ends == (t, t + 1) || ends == (t + 1, t)))
    })
}
