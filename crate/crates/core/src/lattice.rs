//! Graded subspace lattices relative to a reference flag, and the incidence
//! operators acting on them.
//!
//! `PairGround` grades the subspaces y of a space by `(i, j)` where
//! `i = dim(y ∩ x)` and `dim y = i + j` for a fixed reference subspace x.
//! `TripleGround` refines this inside a one-larger ambient space with a
//! distinguished hyperplane `H ⊇ x`: the grade is `(i, j, k)` with
//! `i = dim(y ∩ x)`, `i + j = dim(y ∩ H)`, `k = dim y - dim(y ∩ H) ∈ {0,1}`.
//!
//! Lowering operators send a point to the sum of its hyperplanes in a fixed
//! adjacent cell; raising operators are their transposes. Points are ordered
//! cell-major (grade lexicographic, then the canonical subspace order), so
//! every cell is a contiguous index range and the grounds are reproducible.

use std::collections::BTreeMap;

use crate::check::CheckReport;
use crate::error::Result;
use crate::gf::GfField;
use crate::qarith::{bracket, cell_size_pair, cell_size_triple, subspace_count};
use crate::sparse::BinMat;
use crate::subspace::{enumerate_all_subspaces, Subspace};
use crate::Int;

/// Express an intrinsic subspace of `F^m` in the coordinates of an
/// m-dimensional `space` sitting inside a larger ambient space.
fn lift(field: &GfField, space: &Subspace, intrinsic: &Subspace) -> Subspace {
    let n = space.ambient();
    let rows: Vec<Vec<u16>> = (0..intrinsic.dim())
        .map(|r| {
            let coef = intrinsic.row(r);
            let mut acc = vec![0u16; n];
            for (m, &c) in coef.iter().enumerate() {
                if c != 0 {
                    for (slot, &s) in acc.iter_mut().zip(space.row(m)) {
                        *slot = field.add(*slot, field.mul(c, s));
                    }
                }
            }
            acc
        })
        .collect();
    Subspace::from_rows(field, n, &rows)
}

#[derive(Debug)]
pub struct PairGround {
    pub field: GfField,
    pub a: usize,
    pub b: usize,
    /// The space whose subspaces form the ground set, in outer coordinates.
    pub space: Subspace,
    /// Reference subspace of dimension `a` inside `space`.
    pub x: Subspace,
    pub points: Vec<Subspace>,
    pub cell_of: Vec<(usize, usize)>,
    cells: BTreeMap<(usize, usize), Vec<u32>>,
    index: BTreeMap<Subspace, u32>,
}

/// Lowering/raising incidence operators of a pair ground.
/// Columns index the source point: `l1[z, y] = 1` iff z is a hyperplane of y
/// with `dim(z ∩ x) = dim(y ∩ x) - 1`; `l2` covers the complementary drop.
#[derive(Debug)]
pub struct PairOps {
    pub l1: BinMat,
    pub l2: BinMat,
    pub r1: BinMat,
    pub r2: BinMat,
}

impl PairGround {
    /// Ground set of all subspaces of `F_q^{a+b}` with the coordinate prefix
    /// of dimension `a` as reference.
    pub fn standalone(q: u64, a: usize, b: usize) -> Result<PairGround> {
        let field = GfField::new(q)?;
        let n = a + b;
        PairGround::in_space(
            field,
            Subspace::full(n),
            Subspace::coordinate_prefix(n, a),
        )
    }

    /// Ground set of all subspaces of `space` (given in outer coordinates),
    /// graded by intersection with `x ⊆ space`.
    pub fn in_space(field: GfField, space: Subspace, x: Subspace) -> Result<PairGround> {
        if !space.contains(&field, &x) {
            return Err(crate::Error::domain(
                "reference subspace must lie inside the ground space",
            ));
        }
        let a = x.dim();
        let b = space.dim() - a;
        let intrinsic = enumerate_all_subspaces(&field, space.dim());
        let mut graded: Vec<((usize, usize), Subspace)> = intrinsic
            .iter()
            .map(|s| {
                let y = lift(&field, &space, s);
                let i = y.dim_meet(&field, &x);
                let j = y.dim() - i;
                ((i, j), y)
            })
            .collect();
        graded.sort();
        let mut points = Vec::with_capacity(graded.len());
        let mut cell_of = Vec::with_capacity(graded.len());
        let mut cells: BTreeMap<(usize, usize), Vec<u32>> = BTreeMap::new();
        let mut index = BTreeMap::new();
        for (id, (cell, y)) in graded.into_iter().enumerate() {
            cells.entry(cell).or_default().push(id as u32);
            index.insert(y.clone(), id as u32);
            cell_of.push(cell);
            points.push(y);
        }
        Ok(PairGround {
            field,
            a,
            b,
            space,
            x,
            points,
            cell_of,
            cells,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn id_of(&self, y: &Subspace) -> Option<u32> {
        self.index.get(y).copied()
    }

    pub fn cell_ids(&self, i: usize, j: usize) -> &[u32] {
        self.cells.get(&(i, j)).map_or(&[], Vec::as_slice)
    }

    pub fn cells(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<u32>)> {
        self.cells.iter()
    }

    /// Diagonal 0/1 projection onto cell `(i, j)`.
    pub fn estar(&self, i: usize, j: usize) -> BinMat {
        let n = self.len();
        BinMat::from_entries(n, n, self.cell_ids(i, j).iter().map(|&id| (id, id)))
    }

    pub fn ops(&self) -> PairOps {
        let n = self.len();
        let mut l1 = BinMat::new(n, n);
        let mut l2 = BinMat::new(n, n);
        for (yi, y) in self.points.iter().enumerate() {
            let (i, j) = self.cell_of[yi];
            for z in y.hyperplanes(&self.field) {
                let zi = self.index[&z] as usize;
                let (zi_cell, zj_cell) = self.cell_of[zi];
                if zi_cell + 1 == i && zj_cell == j {
                    l1.set(zi, yi);
                } else {
                    debug_assert_eq!((zi_cell, zj_cell + 1), (i, j));
                    l2.set(zi, yi);
                }
            }
        }
        let r1 = l1.transpose();
        let r2 = l2.transpose();
        PairOps { l1, l2, r1, r2 }
    }

    /// Structural invariants: grading bounds, cell sizes against the product
    /// formula, and hyperplane counts per point.
    pub fn verify_structure(&self, report: &mut CheckReport) {
        let q = self.field.q as u64;
        let total = subspace_count((self.a + self.b) as u32, q);
        report.record(
            "pair ground size",
            Int::from(self.len()) == total,
            format!("{} points, expected {}", self.len(), total),
        );
        let mut cells_ok = true;
        let mut details = String::new();
        for i in 0..=self.a {
            for j in 0..=self.b {
                let want = cell_size_pair(self.a as i64, self.b as i64, i as i64, j as i64, q);
                let got = Int::from(self.cell_ids(i, j).len());
                if got != want {
                    cells_ok = false;
                    details = format!("cell ({i},{j}): {got} points, expected {want}");
                }
            }
        }
        let listed: usize = self.cells.values().map(Vec::len).sum();
        if listed != self.len() {
            cells_ok = false;
            details = format!("cells cover {listed} of {} points", self.len());
        }
        report.record(
            "pair cell sizes",
            cells_ok,
            if cells_ok { "all cells match the product formula".into() } else { details },
        );

        let ops = self.ops();
        let hyper_ok = (0..self.len()).all(|yi| {
            // Row yi of a raising operator lists the lowering images of yi.
            let down = ops.r1.row(yi).len() + ops.r2.row(yi).len();
            Int::from(down) == bracket(self.points[yi].dim() as i64, q)
        });
        report.record(
            "pair lowering degrees",
            hyper_ok,
            "every point lowers to exactly its hyperplanes",
        );
    }
}

#[derive(Debug)]
pub struct TripleGround {
    pub field: GfField,
    pub a: usize,
    pub b: usize,
    /// Distinguished hyperplane: the coordinate prefix of dimension a+b.
    pub h: Subspace,
    /// Reference subspace: the coordinate prefix of dimension a.
    pub x: Subspace,
    pub points: Vec<Subspace>,
    pub cell_of: Vec<(usize, usize, usize)>,
    cells: BTreeMap<(usize, usize, usize), Vec<u32>>,
    index: BTreeMap<Subspace, u32>,
}

/// Lowering/raising operators of a triple ground. `l3` drops a point out of
/// the k = 1 layer onto its intersection with H; the others fix the layer.
#[derive(Debug)]
pub struct TripleOps {
    pub l1: BinMat,
    pub l2: BinMat,
    pub l3: BinMat,
    pub r1: BinMat,
    pub r2: BinMat,
    pub r3: BinMat,
}

impl TripleGround {
    pub fn new(q: u64, a: usize, b: usize) -> Result<TripleGround> {
        let field = GfField::new(q)?;
        let n = a + b + 1;
        let h = Subspace::coordinate_prefix(n, a + b);
        let x = Subspace::coordinate_prefix(n, a);
        let mut graded: Vec<((usize, usize, usize), Subspace)> =
            enumerate_all_subspaces(&field, n)
                .into_iter()
                .map(|y| {
                    let i = y.dim_meet_prefix(&field, a);
                    let m = y.dim_meet_prefix(&field, a + b);
                    let k = y.dim() - m;
                    ((i, m - i, k), y)
                })
                .collect();
        graded.sort();
        let mut points = Vec::with_capacity(graded.len());
        let mut cell_of = Vec::with_capacity(graded.len());
        let mut cells: BTreeMap<(usize, usize, usize), Vec<u32>> = BTreeMap::new();
        let mut index = BTreeMap::new();
        for (id, (cell, y)) in graded.into_iter().enumerate() {
            cells.entry(cell).or_default().push(id as u32);
            index.insert(y.clone(), id as u32);
            cell_of.push(cell);
            points.push(y);
        }
        Ok(TripleGround {
            field,
            a,
            b,
            h,
            x,
            points,
            cell_of,
            cells,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn id_of(&self, y: &Subspace) -> Option<u32> {
        self.index.get(y).copied()
    }

    pub fn cell_ids(&self, i: usize, j: usize, k: usize) -> &[u32] {
        self.cells.get(&(i, j, k)).map_or(&[], Vec::as_slice)
    }

    pub fn cells(&self) -> impl Iterator<Item = (&(usize, usize, usize), &Vec<u32>)> {
        self.cells.iter()
    }

    pub fn estar(&self, i: usize, j: usize, k: usize) -> BinMat {
        let n = self.len();
        BinMat::from_entries(n, n, self.cell_ids(i, j, k).iter().map(|&id| (id, id)))
    }

    pub fn ops(&self) -> TripleOps {
        let n = self.len();
        let mut l1 = BinMat::new(n, n);
        let mut l2 = BinMat::new(n, n);
        let mut l3 = BinMat::new(n, n);
        for (yi, y) in self.points.iter().enumerate() {
            let (i, j, k) = self.cell_of[yi];
            for z in y.hyperplanes(&self.field) {
                let zi = self.index[&z] as usize;
                let cell = self.cell_of[zi];
                if cell == (i.wrapping_sub(1), j, k) {
                    l1.set(zi, yi);
                } else if cell == (i, j.wrapping_sub(1), k) {
                    l2.set(zi, yi);
                } else {
                    debug_assert_eq!(cell, (i, j, k.wrapping_sub(1)));
                    l3.set(zi, yi);
                }
            }
        }
        let r1 = l1.transpose();
        let r2 = l2.transpose();
        let r3 = l3.transpose();
        TripleOps {
            l1,
            l2,
            l3,
            r1,
            r2,
            r3,
        }
    }

    pub fn verify_structure(&self, report: &mut CheckReport) {
        let q = self.field.q as u64;
        let total = subspace_count((self.a + self.b + 1) as u32, q);
        report.record(
            "triple ground size",
            Int::from(self.len()) == total,
            format!("{} points, expected {}", self.len(), total),
        );
        let mut cells_ok = true;
        let mut details = String::new();
        for i in 0..=self.a {
            for j in 0..=self.b {
                for k in 0..=1usize {
                    let want = cell_size_triple(
                        self.a as i64,
                        self.b as i64,
                        i as i64,
                        j as i64,
                        k as i64,
                        q,
                    );
                    let got = Int::from(self.cell_ids(i, j, k).len());
                    if got != want {
                        cells_ok = false;
                        details = format!("cell ({i},{j},{k}): {got} points, expected {want}");
                    }
                }
            }
        }
        let listed: usize = self.cells.values().map(Vec::len).sum();
        if listed != self.len() {
            cells_ok = false;
            details = format!("cells cover {listed} of {} points", self.len());
        }
        report.record(
            "triple cell sizes",
            cells_ok,
            if cells_ok { "all cells match the product formula".into() } else { details },
        );

        let ops = self.ops();
        let hyper_ok = (0..self.len()).all(|yi| {
            let down = ops.r1.row(yi).len() + ops.r2.row(yi).len() + ops.r3.row(yi).len();
            Int::from(down) == bracket(self.points[yi].dim() as i64, q)
        });
        report.record(
            "triple lowering degrees",
            hyper_ok,
            "every point lowers to exactly its hyperplanes",
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_ground_1_2_cells() {
        let g = PairGround::standalone(2, 1, 2).unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g.cell_ids(0, 0).len(), 1);
        assert_eq!(g.cell_ids(1, 0).len(), 1);
        assert_eq!(g.cell_ids(0, 1).len(), 6);
        assert_eq!(g.cell_ids(1, 2).len(), 1);
        let mut report = CheckReport::new();
        g.verify_structure(&mut report);
        assert!(report.all_passed(), "{:?}", report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn pair_ops_move_between_adjacent_cells() {
        let g = PairGround::standalone(2, 1, 2).unwrap();
        let ops = g.ops();
        for (r, c) in ops.l1.entries() {
            let (ri, rj) = g.cell_of[r as usize];
            let (ci, cj) = g.cell_of[c as usize];
            assert_eq!((ri + 1, rj), (ci, cj));
            assert!(g.points[c as usize].contains(&g.field, &g.points[r as usize]));
        }
        for (r, c) in ops.r2.entries() {
            let (ri, rj) = g.cell_of[r as usize];
            let (ci, cj) = g.cell_of[c as usize];
            assert_eq!((ci, cj + 1), (ri, rj));
        }
    }

    #[test]
    fn pair_ground_inside_hyperplane_matches_standalone() {
        let field = GfField::new(2).unwrap();
        let space = Subspace::coordinate_prefix(4, 3);
        let x = Subspace::coordinate_prefix(4, 1);
        let inside = PairGround::in_space(field, space, x).unwrap();
        let standalone = PairGround::standalone(2, 1, 2).unwrap();
        assert_eq!(inside.len(), standalone.len());
        for ((ci, cj), ids) in inside.cells() {
            assert_eq!(ids.len(), standalone.cell_ids(*ci, *cj).len());
        }
        // Points of the embedded ground really live inside the hyperplane.
        for y in &inside.points {
            assert!(inside.space.contains(&inside.field, y));
        }
    }

    #[test]
    fn triple_ground_1_1_structure() {
        let g = TripleGround::new(2, 1, 1).unwrap();
        assert_eq!(g.len(), 16);
        // k = 0 layer is the subspace lattice of H, here of dimension 2.
        let k0: usize = g.cells().filter(|((_, _, k), _)| *k == 0).map(|(_, v)| v.len()).sum();
        assert_eq!(k0, 5);
        let mut report = CheckReport::new();
        g.verify_structure(&mut report);
        assert!(report.all_passed(), "{:?}", report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn triple_l3_drops_the_layer_and_preserves_trace() {
        let g = TripleGround::new(2, 1, 2).unwrap();
        let ops = g.ops();
        assert!(ops.l3.nnz() > 0);
        for (r, c) in ops.l3.entries() {
            let (ri, rj, rk) = g.cell_of[r as usize];
            let (ci, cj, ck) = g.cell_of[c as usize];
            assert_eq!((ri, rj, rk + 1), (ci, cj, ck));
            // The drop is onto the intersection with H: unique hyperplane of
            // y inside H, so each k = 1 point has exactly one l3 image.
            let meet = g.points[c as usize].meet(&g.field, &g.h);
            assert_eq!(g.id_of(&meet), Some(r));
        }
        let mut report = CheckReport::new();
        g.verify_structure(&mut report);
        assert!(report.all_passed());
    }

    #[test]
    fn grounds_build_identically_twice() {
        let g1 = TripleGround::new(2, 1, 1).unwrap();
        let g2 = TripleGround::new(2, 1, 1).unwrap();
        assert_eq!(g1.points, g2.points);
        let p1 = PairGround::standalone(3, 1, 1).unwrap();
        let p2 = PairGround::standalone(3, 1, 1).unwrap();
        assert_eq!(p1.points, p2.points);
    }
}
