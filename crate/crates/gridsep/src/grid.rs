//! Grid geometry, the neighbor relation, the objective, and its signed
//! multiset decomposition.
//!
//! Cells are 1-based `(row, column)` pairs in matrix orientation: `(1,1)` is
//! the top left corner. A [`GridPermutation`] stores its images row-major and
//! is validated to be a bijection on construction, so every downstream
//! operation can assume it.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dimensions of an `n1 x n2` grid (rows x columns), both positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridDims {
    n1: u32,
    n2: u32,
}

impl GridDims {
    pub fn new(n1: u32, n2: u32) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidDims(n1, n2));
        }
        Ok(GridDims { n1, n2 })
    }

    pub fn n1(&self) -> u32 {
        self.n1
    }

    pub fn n2(&self) -> u32 {
        self.n2
    }

    pub fn cells(&self) -> usize {
        self.n1 as usize * self.n2 as usize
    }

    pub fn is_even(&self) -> bool {
        self.n1 % 2 == 0 && self.n2 % 2 == 0
    }

    /// Half of `n1`, defined only for even `n1`.
    pub fn t1(&self) -> Option<u32> {
        (self.n1 % 2 == 0).then_some(self.n1 / 2)
    }

    /// Half of `n2`, defined only for even `n2`.
    pub fn t2(&self) -> Option<u32> {
        (self.n2 % 2 == 0).then_some(self.n2 / 2)
    }

    pub fn transposed(&self) -> GridDims {
        GridDims {
            n1: self.n2,
            n2: self.n1,
        }
    }

    pub fn contains(&self, cell: Cell) -> bool {
        (1..=self.n1).contains(&cell.i) && (1..=self.n2).contains(&cell.j)
    }

    /// Row-major iteration over all cells.
    pub fn cell_iter(&self) -> impl Iterator<Item = Cell> {
        let (n1, n2) = (self.n1, self.n2);
        (1..=n1).flat_map(move |i| (1..=n2).map(move |j| Cell::new(i, j)))
    }

    pub(crate) fn index_of(&self, cell: Cell) -> usize {
        debug_assert!(self.contains(cell));
        (cell.i as usize - 1) * self.n2 as usize + (cell.j as usize - 1)
    }

    /// Both halves as signed integers, or an error for odd dimensions.
    pub(crate) fn halves(&self) -> Result<(i64, i64)> {
        if !self.is_even() {
            return Err(Error::OddDims(self.n1, self.n2));
        }
        Ok((i64::from(self.n1 / 2), i64::from(self.n2 / 2)))
    }

    pub(crate) fn require_sorted(&self) -> Result<()> {
        if self.n1 > self.n2 {
            return Err(Error::DimsNotSorted(self.n1, self.n2));
        }
        Ok(())
    }
}

/// A grid cell `(i, j)`, 1-based, row first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(u32, u32)", into = "(u32, u32)")]
pub struct Cell {
    pub i: u32,
    pub j: u32,
}

impl Cell {
    pub fn new(i: u32, j: u32) -> Self {
        Cell { i, j }
    }

    /// L1 distance to another cell.
    pub fn l1(self, other: Cell) -> i64 {
        (i64::from(self.i) - i64::from(other.i)).abs()
            + (i64::from(self.j) - i64::from(other.j)).abs()
    }

    pub fn transposed(self) -> Cell {
        Cell {
            i: self.j,
            j: self.i,
        }
    }

    pub(crate) fn coord(self, axis: usize) -> i64 {
        match axis {
            0 => i64::from(self.i),
            _ => i64::from(self.j),
        }
    }
}

impl From<(u32, u32)> for Cell {
    fn from((i, j): (u32, u32)) -> Self {
        Cell { i, j }
    }
}

impl From<Cell> for (u32, u32) {
    fn from(c: Cell) -> Self {
        (c.i, c.j)
    }
}

/// Whether the neighbor relation wraps around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Planar,
    Torus,
}

/// The multiset of unordered neighbor pairs of a grid.
///
/// Planar grids have `n1(n2-1) + n2(n1-1)` edges. Toroidal grids are
/// 4-regular with `2*n1*n2` edges counted as a multiset: when a dimension has
/// length 2 the wrap edge coincides with the direct edge and the pair appears
/// twice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSet {
    edges: Vec<(Cell, Cell)>,
}

impl EdgeSet {
    pub fn edges(&self) -> &[(Cell, Cell)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Unordered neighbor pairs at L1 distance 1 (planar), or the 4-regular
/// wrap-around edge multiset (torus).
pub fn neighbors(dims: GridDims, topology: Topology) -> EdgeSet {
    let (n1, n2) = (dims.n1(), dims.n2());
    let mut edges = Vec::with_capacity(2 * dims.cells());
    for i in 1..=n1 {
        for j in 1..=n2 {
            match topology {
                Topology::Planar => {
                    if i < n1 {
                        edges.push((Cell::new(i, j), Cell::new(i + 1, j)));
                    }
                    if j < n2 {
                        edges.push((Cell::new(i, j), Cell::new(i, j + 1)));
                    }
                }
                Topology::Torus => {
                    edges.push((Cell::new(i, j), Cell::new(i % n1 + 1, j)));
                    edges.push((Cell::new(i, j), Cell::new(i, j % n2 + 1)));
                }
            }
        }
    }
    EdgeSet { edges }
}

/// A bijection of the grid onto itself, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridPermutation {
    dims: GridDims,
    images: Vec<Cell>,
}

impl GridPermutation {
    /// Builds a permutation from row-major images, rejecting anything that is
    /// not a bijection of the grid.
    pub fn new(dims: GridDims, images: Vec<Cell>) -> Result<Self> {
        if images.len() != dims.cells() {
            return Err(Error::NotBijective(format!(
                "expected {} images, got {}",
                dims.cells(),
                images.len()
            )));
        }
        let mut seen = vec![false; dims.cells()];
        for &img in &images {
            if !dims.contains(img) {
                return Err(Error::CellOutOfRange(img.i, img.j, dims.n1(), dims.n2()));
            }
            let idx = dims.index_of(img);
            if seen[idx] {
                return Err(Error::NotBijective(format!(
                    "cell ({},{}) appears more than once",
                    img.i, img.j
                )));
            }
            seen[idx] = true;
        }
        Ok(GridPermutation { dims, images })
    }

    pub fn identity(dims: GridDims) -> Self {
        GridPermutation {
            images: dims.cell_iter().collect(),
            dims,
        }
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn image(&self, cell: Cell) -> Cell {
        self.images[self.dims.index_of(cell)]
    }

    pub fn images(&self) -> &[Cell] {
        &self.images
    }

    /// Simultaneous relabeling of positions and values by transposition.
    /// Preserves the score on the planar grid.
    pub fn transposed(&self) -> GridPermutation {
        let tdims = self.dims.transposed();
        let mut images = vec![Cell::new(0, 0); self.images.len()];
        for pos in self.dims.cell_iter() {
            let img = self.image(pos);
            images[tdims.index_of(pos.transposed())] = img.transposed();
        }
        GridPermutation {
            dims: tdims,
            images,
        }
    }

    /// Simultaneous relabeling by column reversal `j -> n2 + 1 - j`.
    pub(crate) fn columns_reversed(&self) -> GridPermutation {
        let n2 = self.dims.n2();
        let mut images = vec![Cell::new(0, 0); self.images.len()];
        for pos in self.dims.cell_iter() {
            let img = self.image(pos);
            let rpos = Cell::new(pos.i, n2 + 1 - pos.j);
            images[self.dims.index_of(rpos)] = Cell::new(img.i, n2 + 1 - img.j);
        }
        GridPermutation {
            dims: self.dims,
            images,
        }
    }

    pub(crate) fn swap_images(&mut self, a: Cell, b: Cell) {
        let (ia, ib) = (self.dims.index_of(a), self.dims.index_of(b));
        self.images.swap(ia, ib);
    }

    pub(crate) fn swap_indices(&mut self, ia: usize, ib: usize) {
        self.images.swap(ia, ib);
    }
}

/// Total L1 separation of neighboring cells' images.
pub fn score(pi: &GridPermutation, topology: Topology) -> i64 {
    neighbors(pi.dims(), topology)
        .edges()
        .iter()
        .map(|&(x, y)| pi.image(x).l1(pi.image(y)))
        .sum()
}

/// The four signed multisets whose signed sum reproduces the score: per edge
/// and per coordinate, the larger value joins the plus multiset and the
/// smaller the minus multiset (ties contribute the same value to both).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub s1_plus: Vec<i64>,
    pub s1_minus: Vec<i64>,
    pub s2_plus: Vec<i64>,
    pub s2_minus: Vec<i64>,
}

impl Decomposition {
    pub fn signed_sum(&self) -> i64 {
        let sum = |v: &[i64]| v.iter().sum::<i64>();
        sum(&self.s1_plus) - sum(&self.s1_minus) + sum(&self.s2_plus) - sum(&self.s2_minus)
    }

    pub fn len(&self) -> usize {
        self.s1_plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s1_plus.is_empty()
    }
}

/// Splits the score into the four multisets of [`Decomposition`], each sorted
/// ascending; the signed sum equals `score(pi, topology)`.
pub fn decompose(pi: &GridPermutation, topology: Topology) -> Decomposition {
    let edges = neighbors(pi.dims(), topology);
    let n = edges.len();
    let mut dec = Decomposition {
        s1_plus: Vec::with_capacity(n),
        s1_minus: Vec::with_capacity(n),
        s2_plus: Vec::with_capacity(n),
        s2_minus: Vec::with_capacity(n),
    };
    for &(x, y) in edges.edges() {
        let (a, b) = (pi.image(x), pi.image(y));
        dec.s1_plus.push(i64::from(a.i.max(b.i)));
        dec.s1_minus.push(i64::from(a.i.min(b.i)));
        dec.s2_plus.push(i64::from(a.j.max(b.j)));
        dec.s2_minus.push(i64::from(a.j.min(b.j)));
    }
    dec.s1_plus.sort_unstable();
    dec.s1_minus.sort_unstable();
    dec.s2_plus.sort_unstable();
    dec.s2_minus.sort_unstable();
    dec
}

/// Grid interchange file: `{"n1":..,"n2":..,"perm":[[[i,j],..],..],"topology":..}`
/// with row-major, 1-based `[i,j]` pairs. Round-trips bit-exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridFile {
    pub n1: u32,
    pub n2: u32,
    pub perm: Vec<Vec<Cell>>,
    pub topology: Topology,
}

impl GridFile {
    pub fn new(pi: &GridPermutation, topology: Topology) -> Self {
        let (n1, n2) = (pi.dims().n1(), pi.dims().n2());
        let perm = (0..n1 as usize)
            .map(|r| pi.images()[r * n2 as usize..(r + 1) * n2 as usize].to_vec())
            .collect();
        GridFile {
            n1,
            n2,
            perm,
            topology,
        }
    }

    pub fn into_permutation(self) -> Result<(GridPermutation, Topology)> {
        let dims = GridDims::new(self.n1, self.n2)?;
        if self.perm.len() != self.n1 as usize
            || self.perm.iter().any(|row| row.len() != self.n2 as usize)
        {
            return Err(Error::NotBijective(format!(
                "perm must be {} rows of {} cells",
                self.n1, self.n2
            )));
        }
        let images = self.perm.into_iter().flatten().collect();
        Ok((GridPermutation::new(dims, images)?, self.topology))
    }

    /// Single-line JSON with keys in sorted order.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("grid file serialization cannot fail")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::NotBijective(format!("malformed grid JSON: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn paper_2x3() -> GridPermutation {
        let dims = GridDims::new(2, 3).unwrap();
        let images = [(2, 2), (1, 3), (2, 1), (1, 2), (1, 1), (2, 3)]
            .iter()
            .map(|&(i, j)| Cell::new(i, j))
            .collect();
        GridPermutation::new(dims, images).unwrap()
    }

    #[test]
    fn edge_counts_match_closed_forms() {
        for n1 in 1..=12 {
            for n2 in 1..=12 {
                let dims = GridDims::new(n1, n2).unwrap();
                let planar = neighbors(dims, Topology::Planar).len();
                assert_eq!(planar as u32, n1 * (n2 - 1) + n2 * (n1 - 1), "{n1}x{n2}");
                let torus = neighbors(dims, Topology::Torus).len();
                assert_eq!(torus as u32, 2 * n1 * n2, "{n1}x{n2}");
            }
        }
    }

    #[test]
    fn small_edge_count_examples() {
        let e = |n1, n2, t| neighbors(GridDims::new(n1, n2).unwrap(), t).len();
        assert_eq!(e(2, 2, Topology::Planar), 4);
        assert_eq!(e(2, 3, Topology::Planar), 7);
        assert_eq!(e(6, 6, Topology::Torus), 72);
    }

    #[test]
    fn paper_2x3_scores_14() {
        assert_eq!(score(&paper_2x3(), Topology::Planar), 14);
    }

    #[test]
    fn paper_2x3_decomposition() {
        let dec = decompose(&paper_2x3(), Topology::Planar);
        assert_eq!(dec.s1_plus, vec![1, 1, 2, 2, 2, 2, 2]);
        assert_eq!(dec.s1_minus, vec![1, 1, 1, 1, 1, 1, 2]);
        assert_eq!(dec.s2_plus, vec![2, 2, 3, 3, 3, 3, 3]);
        assert_eq!(dec.s2_minus, vec![1, 1, 1, 1, 1, 2, 2]);
        assert_eq!(dec.signed_sum(), 14);
    }

    #[test]
    fn identity_scores_edge_count() {
        for (n1, n2) in [(2, 2), (3, 5), (4, 6)] {
            let dims = GridDims::new(n1, n2).unwrap();
            let id = GridPermutation::identity(dims);
            assert_eq!(
                score(&id, Topology::Planar),
                neighbors(dims, Topology::Planar).len() as i64
            );
        }
    }

    #[test]
    fn decomposition_cardinality_4x6() {
        let dims = GridDims::new(4, 6).unwrap();
        let dec = decompose(&GridPermutation::identity(dims), Topology::Planar);
        assert_eq!(dec.len(), 38);
        assert_eq!(dec.s1_minus.len(), 38);
        assert_eq!(dec.s2_plus.len(), 38);
        assert_eq!(dec.s2_minus.len(), 38);
    }

    #[test]
    fn rejects_non_bijections() {
        let dims = GridDims::new(2, 2).unwrap();
        let dup = vec![
            Cell::new(1, 1),
            Cell::new(1, 1),
            Cell::new(2, 1),
            Cell::new(2, 2),
        ];
        assert!(matches!(
            GridPermutation::new(dims, dup),
            Err(Error::NotBijective(_))
        ));
        let out = vec![
            Cell::new(1, 1),
            Cell::new(1, 2),
            Cell::new(2, 1),
            Cell::new(3, 2),
        ];
        assert!(matches!(
            GridPermutation::new(dims, out),
            Err(Error::CellOutOfRange(3, 2, 2, 2))
        ));
    }

    #[test]
    fn score_invariant_under_transposition() {
        let pi = paper_2x3();
        assert_eq!(
            score(&pi, Topology::Planar),
            score(&pi.transposed(), Topology::Planar)
        );
    }

    #[test]
    fn grid_file_round_trip() {
        let pi = paper_2x3();
        let file = GridFile::new(&pi, Topology::Planar);
        let json = file.to_json_string();
        let back = GridFile::from_json_str(&json).unwrap();
        assert_eq!(file, back);
        let (pi2, topo) = back.into_permutation().unwrap();
        assert_eq!(pi, pi2);
        assert_eq!(topo, Topology::Planar);
        assert!(json.starts_with("{\"n1\":2,\"n2\":3,\"perm\":[[[2,2],[1,3],[2,1]]"));
    }
}
