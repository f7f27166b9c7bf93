//! Layers around the geometric center, subset weights, and best
//! approximations to disks.
//!
//! The geometric center `O = ((n1+1)/2, (n2+1)/2)` is not a lattice point;
//! for even dimensions every cell sits at an integer L1 distance from it.
//! The `i`th layer collects the cells at distance exactly `i`, and a set is
//! a disk when its total center distance is minimal for its cardinality —
//! equivalently, when it consists of full layers plus part of the next one.

use crate::grid::{Cell, GridDims, GridPermutation};
use crate::structure::{boundary_positions, corner_positions, structure_report};
use crate::{Error, Result};
use serde::Serialize;

/// Doubled coordinates of the geometric center, exact in integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CenterDoubled {
    pub oi2: i64,
    pub oj2: i64,
}

impl CenterDoubled {
    /// Twice the L1 distance from `cell` to the center.
    pub fn dist_doubled(&self, cell: Cell) -> i64 {
        (2 * i64::from(cell.i) - self.oi2).abs() + (2 * i64::from(cell.j) - self.oj2).abs()
    }
}

pub fn center(dims: GridDims) -> CenterDoubled {
    CenterDoubled {
        oi2: i64::from(dims.n1()) + 1,
        oj2: i64::from(dims.n2()) + 1,
    }
}

/// L1 distance from a cell to the center; an integer for even dims.
fn center_distance(dims: GridDims, cell: Cell) -> i64 {
    let d2 = center(dims).dist_doubled(cell);
    debug_assert_eq!(d2 % 2, 0, "even dims give integer center distances");
    d2 / 2
}

/// A layer index together with its cardinality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Layer {
    pub index: u32,
    pub size: u64,
}

/// Cardinality of layer `i` by the piecewise closed form; orientation does
/// not matter.
fn layer_size(dims: GridDims, i: u32) -> Result<u64> {
    let (ta, tb) = dims.halves()?;
    let (t1, t2) = (ta.min(tb), ta.max(tb));
    let i = i64::from(i);
    Ok(if i < 1 {
        0
    } else if i <= t1 {
        4 * i as u64
    } else if i <= t2 {
        4 * t1 as u64
    } else if i <= t1 + t2 {
        (2 * (2 * t1 + 2 * t2 - 2 * i)) as u64
    } else {
        0
    })
}

/// All nonempty layers `1..=t1+t2` in order. The sizes partition the grid.
pub fn layers(dims: GridDims) -> Result<Vec<Layer>> {
    let (t1, t2) = dims.halves()?;
    (1..=(t1 + t2) as u32)
        .map(|i| {
            Ok(Layer {
                index: i,
                size: layer_size(dims, i)?,
            })
        })
        .collect()
}

/// The cells at center distance exactly `i`, in row-major order.
pub fn layer_cells(dims: GridDims, i: u32) -> Result<Vec<Cell>> {
    dims.halves()?;
    Ok(dims
        .cell_iter()
        .filter(|&c| center_distance(dims, c) == i64::from(i))
        .collect())
}

/// Total center distance of a multiset of cells.
pub fn weight(dims: GridDims, cells: &[Cell]) -> Result<i64> {
    dims.halves()?;
    let mut total = 0;
    for &c in cells {
        if !dims.contains(c) {
            return Err(Error::CellOutOfRange(c.i, c.j, dims.n1(), dims.n2()));
        }
        total += center_distance(dims, c);
    }
    Ok(total)
}

/// Minimal total center distance over all `k`-cell subsets:
/// `w_k = (r+1)*k - sum_{i<=r} (r+1-i)*|layer_i|` where `r` is the largest
/// integer with `sum_{i<=r} |layer_i| <= k`.
pub fn min_weight(dims: GridDims, k: usize) -> Result<i64> {
    dims.halves()?;
    if k > dims.cells() {
        return Err(Error::SubsetSizeOutOfRange(k, dims.cells()));
    }
    let mut r = 0u32;
    let mut filled = 0u64;
    let mut weighted = 0i64; // sum_{i<=r} (r+1-i)*|layer_i| accumulated below
    loop {
        let next = layer_size(dims, r + 1)?;
        if next == 0 || filled + next > k as u64 {
            break;
        }
        r += 1;
        filled += next;
    }
    for i in 1..=r {
        weighted += i64::from(r + 1 - i) * layer_size(dims, i)? as i64;
    }
    Ok(i64::from(r + 1) * k as i64 - weighted)
}

/// `k` cells chosen by nondecreasing center distance, ties broken row-major.
/// Realizes the minimum: `weight(greedy_disk(k)) == min_weight(k)`.
pub fn greedy_disk(dims: GridDims, k: usize) -> Result<Vec<Cell>> {
    dims.halves()?;
    if k > dims.cells() {
        return Err(Error::SubsetSizeOutOfRange(k, dims.cells()));
    }
    let mut cells: Vec<Cell> = dims.cell_iter().collect();
    cells.sort_by_key(|&c| (center_distance(dims, c), c));
    cells.truncate(k);
    Ok(cells)
}

/// True iff the cells are full layers `1..=r` plus a subset of layer `r+1`,
/// tested by weight minimality. Cells must be distinct and in the grid.
pub fn is_disk(dims: GridDims, cells: &[Cell]) -> Result<bool> {
    let mut seen = vec![false; dims.cells()];
    for &c in cells {
        if !dims.contains(c) {
            return Err(Error::CellOutOfRange(c.i, c.j, dims.n1(), dims.n2()));
        }
        let idx = (c.i as usize - 1) * dims.n2() as usize + (c.j as usize - 1);
        if seen[idx] {
            return Err(Error::DuplicateCell(c.i, c.j));
        }
        seen[idx] = true;
    }
    Ok(weight(dims, cells)? == min_weight(dims, cells.len())?)
}

/// True iff `2*weight(B u C) == 2h + sum_i (2*t_i + 1) * x_i`, the identity
/// connecting boundary values to the center distance. Holds for every
/// permutation of an even-by-even grid.
pub fn ball_identity_check(pi: &GridPermutation) -> Result<bool> {
    let dims = pi.dims();
    let (t1, t2) = dims.halves()?;
    let report = structure_report(pi)?;
    let mut bc: Vec<Cell> = corner_positions(dims).iter().map(|&p| pi.image(p)).collect();
    bc.extend(boundary_positions(dims).iter().map(|&p| pi.image(p)));
    let lhs = 2 * weight(dims, &bc)?;
    let rhs = 2 * report.h + (2 * t1 + 1) * report.x1 + (2 * t2 + 1) * report.x2;
    Ok(lhs == rhs)
}

/// The values of a permutation on the full boundary (corners included).
pub(crate) fn boundary_values(pi: &GridPermutation) -> Vec<Cell> {
    let dims = pi.dims();
    let mut bc: Vec<Cell> = corner_positions(dims).iter().map(|&p| pi.image(p)).collect();
    bc.extend(boundary_positions(dims).iter().map(|&p| pi.image(p)));
    bc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridDims, GridPermutation};

    fn dims(n1: u32, n2: u32) -> GridDims {
        GridDims::new(n1, n2).unwrap()
    }

    #[test]
    fn layer_sizes_4xwide() {
        let d = dims(4, 8);
        assert_eq!(layer_cells(d, 1).unwrap().len(), 4);
        assert_eq!(layer_cells(d, 2).unwrap().len(), 8);
        assert_eq!(layer_cells(d, 3).unwrap().len(), 8);
    }

    #[test]
    fn layer_sizes_6x6() {
        let d = dims(6, 6);
        assert_eq!(layer_cells(d, 4).unwrap().len(), 8);
        let total: usize = (1..=7).map(|i| layer_cells(d, i).unwrap().len()).sum();
        assert_eq!(total, 36);
    }

    #[test]
    fn layer_formula_matches_enumeration() {
        for n1 in (2..=12).step_by(2) {
            for n2 in (2..=12).step_by(2) {
                let d = dims(n1, n2);
                for i in 1..=(n1 / 2 + n2 / 2 + 1) {
                    assert_eq!(
                        layer_size(d, i).unwrap(),
                        layer_cells(d, i).unwrap().len() as u64,
                        "layer {i} of {n1}x{n2}"
                    );
                }
            }
        }
    }

    #[test]
    fn weight_examples() {
        let d22 = dims(2, 2);
        let all: Vec<Cell> = d22.cell_iter().collect();
        assert_eq!(weight(d22, &all).unwrap(), 4);
        let d66 = dims(6, 6);
        let mut l12 = layer_cells(d66, 1).unwrap();
        l12.extend(layer_cells(d66, 2).unwrap());
        assert_eq!(weight(d66, &l12).unwrap(), 20);
        assert!(matches!(
            weight(d66, &[Cell::new(7, 1)]),
            Err(Error::CellOutOfRange(7, 1, 6, 6))
        ));
    }

    #[test]
    fn min_weight_spot_values() {
        assert_eq!(min_weight(dims(2, 2), 4).unwrap(), 4);
        assert_eq!(min_weight(dims(6, 6), 20).unwrap(), 44);
        assert_eq!(min_weight(dims(4, 12), 28).unwrap(), 76);
        assert_eq!(min_weight(dims(4, 4), 12).unwrap(), 20);
        assert_eq!(min_weight(dims(2, 4), 8).unwrap(), 12);
        assert_eq!(min_weight(dims(8, 8), 28).unwrap(), 72);
    }

    #[test]
    fn min_weight_rejects_out_of_range() {
        assert!(matches!(
            min_weight(dims(2, 2), 5),
            Err(Error::SubsetSizeOutOfRange(5, 4))
        ));
    }

    #[test]
    fn greedy_disk_examples() {
        let d66 = dims(6, 6);
        assert!(greedy_disk(d66, 0).unwrap().is_empty());
        let central = greedy_disk(d66, 4).unwrap();
        let mut expected = layer_cells(d66, 1).unwrap();
        expected.sort_unstable();
        let mut got = central.clone();
        got.sort_unstable();
        assert_eq!(got, expected);
        assert_eq!(weight(d66, &greedy_disk(d66, 20).unwrap()).unwrap(), 44);
    }

    #[test]
    fn greedy_matches_min_weight_everywhere() {
        for n1 in (2..=12).step_by(2) {
            for n2 in (n1..=12).step_by(2) {
                let d = dims(n1, n2);
                for k in 0..=d.cells() {
                    let g = greedy_disk(d, k).unwrap();
                    assert_eq!(
                        weight(d, &g).unwrap(),
                        min_weight(d, k).unwrap(),
                        "{n1}x{n2} k={k}"
                    );
                    assert!(is_disk(d, &g).unwrap());
                }
            }
        }
    }

    #[test]
    fn min_weight_increments_follow_layers()  {
        let d = dims(6, 8);
        for k in 0..d.cells() {
            let step = min_weight(d, k + 1).unwrap() - min_weight(d, k).unwrap();
            let kth = greedy_disk(d, k + 1).unwrap()[k];
            assert_eq!(step, center_distance(d, kth));
        }
    }

    #[test]
    fn disk_predicate_examples() {
        let d66 = dims(6, 6);
        let mut a = layer_cells(d66, 1).unwrap();
        a.push(layer_cells(d66, 2).unwrap()[0]);
        assert!(is_disk(d66, &a).unwrap());
        let lone = vec![layer_cells(d66, 2).unwrap()[0]];
        assert!(!is_disk(d66, &lone).unwrap());
    }

    // The marked boundary-and-corner cells of the 6x6 construction diagram:
    // layers 1..3 minus the four cells of layer 3 in the defect rows.
    #[test]
    fn marked_6x6_boundary_is_a_disk_of_weight_44() {
        let d66 = dims(6, 6);
        let mut bc = layer_cells(d66, 1).unwrap();
        bc.extend(layer_cells(d66, 2).unwrap());
        bc.extend(
            layer_cells(d66, 3)
                .unwrap()
                .into_iter()
                .filter(|c| !matches!((c.i, c.j), (3, 1) | (3, 6) | (4, 1) | (4, 6))),
        );
        assert_eq!(bc.len(), 20);
        assert_eq!(weight(d66, &bc).unwrap(), 44);
        assert!(is_disk(d66, &bc).unwrap());
    }

    // B u C of the 4x12 construction diagram equals layers 1..4 exactly.
    #[test]
    fn boundary_4x12_diagram_is_the_first_four_layers() {
        let d = dims(4, 12);
        let rows: [[(u32, u32); 12]; 2] = [
            [(2,7),(4,6),(2,8),(3,5),(1,7),(3,3),(3,9),(2,5),(4,7),(1,6),(3,8),(2,6)],
            [(3,6),(2,9),(4,5),(1,9),(4,4),(2,10),(2,3),(4,9),(1,4),(3,10),(1,5),(3,7)],
        ];
        let mut bc: Vec<Cell> = rows
            .iter()
            .flatten()
            .map(|&(i, j)| Cell::new(i, j))
            .collect();
        bc.extend([Cell::new(3, 4), Cell::new(4, 8), Cell::new(1, 8), Cell::new(2, 4)]);
        assert_eq!(bc.len(), 28);
        assert!(is_disk(d, &bc).unwrap());
        let mut layers_1_to_4: Vec<Cell> = (1..=4)
            .flat_map(|i| layer_cells(d, i).unwrap())
            .collect();
        layers_1_to_4.sort_unstable();
        bc.sort_unstable();
        assert_eq!(bc, layers_1_to_4);
    }

    #[test]
    fn ball_identity_on_identity_permutation() {
        let id = GridPermutation::identity(dims(4, 4));
        assert!(ball_identity_check(&id).unwrap());
    }
}
