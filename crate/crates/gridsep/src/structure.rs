//! Small/large value classes, corner/boundary/defect extraction, and the
//! exact structural quantities controlling the objective.
//!
//! For even dimensions `n_i = 2*t_i`, a coordinate value is *small* if it
//! lies in `1..=t_i` and *large* otherwise. A neighbor pair whose images are
//! both small (or both large) in some coordinate is a *defect*; the recorded
//! defect value is the max of the two (small side) or the min (large side).
//! The quantity `g` built from boundary, corner and defect values satisfies
//! `score = n1*n2*(n1+n2) - g` exactly, so maximizing the score means
//! minimizing `g`.

use crate::grid::{neighbors, Cell, GridDims, GridPermutation, Topology};
use crate::{score, Error, Result};
use serde::Serialize;

/// Quadrant of the value grid a cell's value falls in, named by the paper's
/// cell coloring: dark blue = (large, large), light blue = (small, small),
/// dark red = (large, small), light red = (small, large).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ColorClass {
    DarkBlue,
    LightBlue,
    DarkRed,
    LightRed,
}

impl ColorClass {
    /// Blue classes (both coordinates small or both large).
    pub fn is_homogeneous(self) -> bool {
        matches!(self, ColorClass::DarkBlue | ColorClass::LightBlue)
    }
}

/// Classifies a value by (small/large, small/large). Requires even dims.
pub fn color_class(value: Cell, dims: GridDims) -> Result<ColorClass> {
    let (t1, t2) = dims.halves()?;
    if !dims.contains(value) {
        return Err(Error::CellOutOfRange(value.i, value.j, dims.n1(), dims.n2()));
    }
    let s1 = i64::from(value.i) <= t1;
    let s2 = i64::from(value.j) <= t2;
    Ok(match (s1, s2) {
        (true, true) => ColorClass::LightBlue,
        (false, false) => ColorClass::DarkBlue,
        (false, true) => ColorClass::DarkRed,
        (true, false) => ColorClass::LightRed,
    })
}

/// The four corner positions of the grid.
pub(crate) fn corner_positions(dims: GridDims) -> [Cell; 4] {
    let (n1, n2) = (dims.n1(), dims.n2());
    [
        Cell::new(1, 1),
        Cell::new(1, n2),
        Cell::new(n1, 1),
        Cell::new(n1, n2),
    ]
}

/// Boundary positions excluding the corners, in row-major order.
pub(crate) fn boundary_positions(dims: GridDims) -> Vec<Cell> {
    let (n1, n2) = (dims.n1(), dims.n2());
    dims.cell_iter()
        .filter(|c| {
            let on_boundary = c.i == 1 || c.i == n1 || c.j == 1 || c.j == n2;
            let corner = (c.i == 1 || c.i == n1) && (c.j == 1 || c.j == n2);
            on_boundary && !corner
        })
        .collect()
}

/// Defect multisets `[d1_small, d1_large, d2_small, d2_large]`, sorted.
pub(crate) fn defect_multisets(pi: &GridPermutation, topology: Topology) -> Result<[Vec<i64>; 4]> {
    let (t1, t2) = pi.dims().halves()?;
    let mut d = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for &(x, y) in neighbors(pi.dims(), topology).edges() {
        let (a, b) = (pi.image(x), pi.image(y));
        for (axis, t) in [(0usize, t1), (1usize, t2)] {
            let (u, v) = (a.coord(axis), b.coord(axis));
            if u <= t && v <= t {
                d[2 * axis].push(u.max(v));
            } else if u > t && v > t {
                d[2 * axis + 1].push(u.min(v));
            }
        }
    }
    for m in &mut d {
        m.sort_unstable();
    }
    Ok(d)
}

/// Corners, boundary, defect multisets and the derived scalars of a planar
/// permutation of an even-by-even grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    pub boundary: Vec<Cell>,
    pub corners: Vec<Cell>,
    pub d1_large: Vec<i64>,
    pub d1_small: Vec<i64>,
    pub d2_large: Vec<i64>,
    pub d2_small: Vec<i64>,
    pub g: i64,
    pub h: i64,
    pub x1: i64,
    pub x2: i64,
}

impl StructureReport {
    pub fn defect_count(&self) -> usize {
        self.d1_small.len() + self.d1_large.len() + self.d2_small.len() + self.d2_large.len()
    }
}

/// Computes the full structure report: `C` and `B` from the position sets,
/// the defect multisets over all planar edges, and `h`, `x1`, `x2`, `g`.
pub fn structure_report(pi: &GridPermutation) -> Result<StructureReport> {
    let dims = pi.dims();
    let (t1, t2) = dims.halves()?;
    let mut corners: Vec<Cell> = corner_positions(dims).iter().map(|&p| pi.image(p)).collect();
    let mut boundary: Vec<Cell> = boundary_positions(dims).iter().map(|&p| pi.image(p)).collect();
    corners.sort_unstable();
    boundary.sort_unstable();
    let [d1_small, d1_large, d2_small, d2_large] = defect_multisets(pi, Topology::Planar)?;

    let mut g = 0i64;
    let mut h = 0i64;
    let mut x = [0i64; 2];
    for (axis, t, ds, dl) in [(0usize, t1, &d1_small, &d1_large), (1, t2, &d2_small, &d2_large)] {
        let mut b_small = 0i64;
        let mut b_large = 0i64;
        let mut nb_small = 0i64;
        let mut nb_large = 0i64;
        for v in &boundary {
            let c = v.coord(axis);
            if c <= t {
                b_small += c;
                nb_small += 1;
            } else {
                b_large += c;
                nb_large += 1;
            }
        }
        let mut c_small = 0i64;
        let mut c_large = 0i64;
        let mut nc_small = 0i64;
        let mut nc_large = 0i64;
        for v in &corners {
            let c = v.coord(axis);
            if c <= t {
                c_small += c;
                nc_small += 1;
            } else {
                c_large += c;
                nc_large += 1;
            }
        }
        let sum_ds: i64 = ds.iter().sum();
        let sum_dl: i64 = dl.iter().sum();
        g += (b_large + 2 * c_large + 2 * sum_dl) - (b_small + 2 * c_small + 2 * sum_ds);
        h += b_large + c_large - b_small - c_small;
        x[axis] = nb_small + nc_small - nb_large - nc_large;
    }

    Ok(StructureReport {
        boundary,
        corners,
        d1_large,
        d1_small,
        d2_large,
        d2_small,
        g,
        h,
        x1: x[0],
        x2: x[1],
    })
}

/// The unattainable upper bound `n1*n2*(n1+n2)` on the score of any
/// permutation of an even-by-even grid.
pub fn naive_upper_bound(dims: GridDims) -> Result<i64> {
    let (t1, t2) = dims.halves()?;
    let (n1, n2) = (2 * t1, 2 * t2);
    Ok(n1 * n2 * (n1 + n2))
}

/// True iff `score = naive_upper_bound - g`, the exact identity relating the
/// objective to the structure report. Holds for every permutation.
pub fn exact_identity_check(pi: &GridPermutation) -> Result<bool> {
    let report = structure_report(pi)?;
    Ok(score(pi, Topology::Planar) == naive_upper_bound(pi.dims())? - report.g)
}

/// The doubled key lower bound `2h + 8 + 2*n1 + sum_i (2*t_i + 1) * x_i`.
/// Contract: `2 * g >= key_lower_bound_doubled` for every permutation with
/// `n1 <= n2`. Doubling keeps the half-integer terms exact.
pub fn key_lower_bound_doubled(pi: &GridPermutation) -> Result<i64> {
    let dims = pi.dims();
    let (t1, t2) = dims.halves()?;
    dims.require_sorted()?;
    let report = structure_report(pi)?;
    Ok(2 * report.h + 8 + 2 * (2 * t1) + (2 * t1 + 1) * report.x1 + (2 * t2 + 1) * report.x2)
}

/// A two-coloring of grid cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellColor {
    Red,
    Blue,
}

/// Number of edges whose endpoints differ in color. For balanced colorings
/// of even grids with `n1 <= n2` this is at least `n1` on the plane and at
/// least `2*n1` on the torus.
pub fn bichromatic_edges<F>(dims: GridDims, topology: Topology, color: F) -> usize
where
    F: Fn(Cell) -> CellColor,
{
    neighbors(dims, topology)
        .edges()
        .iter()
        .filter(|&&(x, y)| color(x) != color(y))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridPermutation;

    fn grid(dims: (u32, u32), rows: &[&[(u32, u32)]]) -> GridPermutation {
        let dims = GridDims::new(dims.0, dims.1).unwrap();
        let images = rows
            .iter()
            .flat_map(|r| r.iter().map(|&(i, j)| Cell::new(i, j)))
            .collect();
        GridPermutation::new(dims, images).unwrap()
    }

    // 4x6 permutation with all defects in the second coordinate.
    fn defect_example() -> GridPermutation {
        grid(
            (4, 6),
            &[
                &[(2, 6), (3, 1), (1, 1), (3, 4), (1, 4), (3, 6)],
                &[(4, 3), (2, 5), (3, 2), (1, 2), (3, 5), (2, 2)],
                &[(2, 4), (4, 2), (1, 3), (4, 6), (2, 1), (4, 4)],
                &[(4, 1), (1, 6), (3, 3), (1, 5), (4, 5), (2, 3)],
            ],
        )
    }

    #[test]
    fn color_class_examples() {
        let d66 = GridDims::new(6, 6).unwrap();
        let d46 = GridDims::new(4, 6).unwrap();
        assert_eq!(color_class(Cell::new(1, 1), d66).unwrap(), ColorClass::LightBlue);
        assert_eq!(color_class(Cell::new(3, 6), d46).unwrap(), ColorClass::DarkBlue);
        assert_eq!(color_class(Cell::new(2, 6), d46).unwrap(), ColorClass::LightRed);
        let odd = GridDims::new(3, 4).unwrap();
        assert!(matches!(
            color_class(Cell::new(1, 1), odd),
            Err(Error::OddDims(3, 4))
        ));
    }

    #[test]
    fn defect_example_multisets() {
        let report = structure_report(&defect_example()).unwrap();
        assert!(report.d1_small.is_empty());
        assert!(report.d1_large.is_empty());
        assert_eq!(report.d2_small, vec![1, 2, 2, 3, 3, 3]);
        assert_eq!(report.d2_large, vec![4, 4, 4, 5, 5]);
        // corner first coordinates: small {2,2}, large {3,4}
        let c1: Vec<i64> = report.corners.iter().map(|c| i64::from(c.i)).collect();
        let small: Vec<i64> = c1.iter().copied().filter(|&v| v <= 2).collect();
        let large: Vec<i64> = c1.iter().copied().filter(|&v| v > 2).collect();
        assert_eq!(small, vec![2, 2]);
        assert_eq!(large, vec![3, 4]);
    }

    #[test]
    fn defect_example_satisfies_exact_identity() {
        assert!(exact_identity_check(&defect_example()).unwrap());
    }

    #[test]
    fn identity_satisfies_exact_identity() {
        let id = GridPermutation::identity(GridDims::new(4, 4).unwrap());
        assert!(exact_identity_check(&id).unwrap());
    }

    #[test]
    fn naive_upper_bound_values() {
        let ub = |n1, n2| naive_upper_bound(GridDims::new(n1, n2).unwrap()).unwrap();
        assert_eq!(ub(2, 2), 16);
        assert_eq!(ub(6, 6), 432);
        assert_eq!(ub(2, 4), 48);
    }

    #[test]
    fn report_counts() {
        let report = structure_report(&defect_example()).unwrap();
        assert_eq!(report.corners.len(), 4);
        assert_eq!(report.boundary.len(), 2 * 4 + 2 * 6 - 8);
    }

    #[test]
    fn balance_equation_on_examples() {
        for pi in [
            defect_example(),
            GridPermutation::identity(GridDims::new(4, 6).unwrap()),
        ] {
            let report = structure_report(&pi).unwrap();
            let (t1, t2) = pi.dims().halves().unwrap();
            for (axis, t, ds, dl) in [
                (0usize, t1, &report.d1_small, &report.d1_large),
                (1, t2, &report.d2_small, &report.d2_large),
            ] {
                let count =
                    |vs: &[Cell], small: bool| vs.iter().filter(|v| (v.coord(axis) <= t) == small).count() as i64;
                let lhs = count(&report.boundary, false)
                    + 2 * count(&report.corners, false)
                    + 2 * dl.len() as i64;
                let rhs = count(&report.boundary, true)
                    + 2 * count(&report.corners, true)
                    + 2 * ds.len() as i64;
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn key_lower_bound_vanishing_x_terms() {
        // With x1 = x2 = 0 the doubled bound is 2h + 8 + 2*n1.
        let pi = defect_example();
        let report = structure_report(&pi).unwrap();
        if report.x1 == 0 && report.x2 == 0 {
            assert_eq!(
                key_lower_bound_doubled(&pi).unwrap(),
                2 * report.h + 8 + 2 * 4
            );
        }
        assert!(2 * report.g >= key_lower_bound_doubled(&pi).unwrap());
    }

    #[test]
    fn identity_4x4_key_inequality_strict() {
        let id = GridPermutation::identity(GridDims::new(4, 4).unwrap());
        let report = structure_report(&id).unwrap();
        assert!(2 * report.g > key_lower_bound_doubled(&id).unwrap());
    }

    #[test]
    fn bichromatic_min_over_balanced_2x2() {
        let dims = GridDims::new(2, 2).unwrap();
        let cells: Vec<Cell> = dims.cell_iter().collect();
        let mut min = usize::MAX;
        for mask in 0u32..16 {
            if mask.count_ones() != 2 {
                continue;
            }
            let count = bichromatic_edges(dims, Topology::Planar, |c| {
                let idx = cells.iter().position(|&x| x == c).unwrap();
                if mask & (1 << idx) != 0 {
                    CellColor::Red
                } else {
                    CellColor::Blue
                }
            });
            min = min.min(count);
        }
        assert_eq!(min, 2);
    }

    #[test]
    fn bichromatic_equality_cases() {
        // vertical half-split of (4,6): n1 red-blue edges
        let dims = GridDims::new(4, 6).unwrap();
        let cut = bichromatic_edges(dims, Topology::Planar, |c| {
            if c.j <= 3 {
                CellColor::Red
            } else {
                CellColor::Blue
            }
        });
        assert_eq!(cut, 4);
        // two vertical cuts of (2,4) on the torus: 2*n1
        let dims = GridDims::new(2, 4).unwrap();
        let cut = bichromatic_edges(dims, Topology::Torus, |c| {
            if c.j <= 2 {
                CellColor::Red
            } else {
                CellColor::Blue
            }
        });
        assert_eq!(cut, 4);
    }
}
