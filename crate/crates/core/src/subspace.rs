//! Subspaces of `F_q^n` in reduced row echelon form.
//!
//! A subspace is stored as its unique RREF basis matrix (row-major, entries
//! are field indices), which makes equality, hashing, and the deterministic
//! global order `(ambient, dimension, lexicographic entries)` structural.
//! All lattice operations (meet, join, containment, hyperplane and cover
//! enumeration) work in ambient coordinates so that sub-lattices of a fixed
//! subspace can be handled by the same code paths.

use std::cmp::Ordering;

use crate::gf::GfField;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    n: u8,
    /// RREF rows, flattened row-major; `rows.len() = dim * n`.
    rows: Vec<u16>,
}

impl PartialOrd for Subspace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Subspace {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.dim().cmp(&other.dim()))
            .then_with(|| self.rows.cmp(&other.rows))
    }
}

/// Reduce `rows` to RREF over `field`; returns pivot columns.
/// Zero rows are removed.
pub fn rref_in_place(field: &GfField, rows: &mut Vec<Vec<u16>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = field.inv(rows[r][c]);
        if inv != 1 {
            for x in rows[r].iter_mut() {
                *x = field.mul(*x, inv);
            }
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let factor = rows[i][c];
                for j in c..ncols {
                    let t = field.mul(factor, rows[r][j]);
                    rows[i][j] = field.sub(rows[i][j], t);
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn rank(field: &GfField, mut rows: Vec<Vec<u16>>) -> usize {
    rref_in_place(field, &mut rows);
    rows.len()
}

impl Subspace {
    pub fn zero(n: usize) -> Subspace {
        Subspace {
            n: n as u8,
            rows: Vec::new(),
        }
    }

    /// Span of the first `k` standard basis vectors.
    pub fn coordinate_prefix(n: usize, k: usize) -> Subspace {
        assert!(k <= n);
        let mut rows = vec![0u16; k * n];
        for r in 0..k {
            rows[r * n + r] = 1;
        }
        Subspace { n: n as u8, rows }
    }

    pub fn full(n: usize) -> Subspace {
        Subspace::coordinate_prefix(n, n)
    }

    pub fn from_rows(field: &GfField, n: usize, rows: &[Vec<u16>]) -> Subspace {
        let mut m: Vec<Vec<u16>> = rows.iter().filter(|r| !r.is_empty()).cloned().collect();
        for r in &m {
            assert_eq!(r.len(), n, "row length must match ambient dimension");
        }
        rref_in_place(field, &mut m);
        let mut flat = Vec::with_capacity(m.len() * n);
        for r in &m {
            flat.extend_from_slice(r);
        }
        Subspace {
            n: n as u8,
            rows: flat,
        }
    }

    pub fn ambient(&self) -> usize {
        self.n as usize
    }

    pub fn dim(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            self.rows.len() / self.n as usize
        }
    }

    pub fn row(&self, r: usize) -> &[u16] {
        let n = self.n as usize;
        &self.rows[r * n..(r + 1) * n]
    }

    pub fn row_vecs(&self) -> Vec<Vec<u16>> {
        (0..self.dim()).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn pivots(&self) -> Vec<usize> {
        (0..self.dim())
            .map(|r| self.row(r).iter().position(|&x| x != 0).unwrap())
            .collect()
    }

    /// Reduce `v` against the RREF basis; returns the residue.
    fn reduce_vector(&self, field: &GfField, v: &[u16]) -> Vec<u16> {
        let mut v = v.to_vec();
        for r in 0..self.dim() {
            let row = self.row(r);
            let p = row.iter().position(|&x| x != 0).unwrap();
            if v[p] != 0 {
                let factor = v[p];
                for j in p..v.len() {
                    let t = field.mul(factor, row[j]);
                    v[j] = field.sub(v[j], t);
                }
            }
        }
        v
    }

    pub fn contains_vector(&self, field: &GfField, v: &[u16]) -> bool {
        self.reduce_vector(field, v).iter().all(|&x| x == 0)
    }

    pub fn contains(&self, field: &GfField, other: &Subspace) -> bool {
        debug_assert_eq!(self.n, other.n);
        (0..other.dim()).all(|r| self.contains_vector(field, other.row(r)))
    }

    pub fn join(&self, field: &GfField, other: &Subspace) -> Subspace {
        debug_assert_eq!(self.n, other.n);
        let mut rows = self.row_vecs();
        rows.extend(other.row_vecs());
        Subspace::from_rows(field, self.ambient(), &rows)
    }

    /// Intersection via the Zassenhaus block construction.
    pub fn meet(&self, field: &GfField, other: &Subspace) -> Subspace {
        debug_assert_eq!(self.n, other.n);
        let n = self.ambient();
        let mut block: Vec<Vec<u16>> = Vec::with_capacity(self.dim() + other.dim());
        for r in 0..self.dim() {
            let mut row = vec![0u16; 2 * n];
            row[..n].copy_from_slice(self.row(r));
            row[n..].copy_from_slice(self.row(r));
            block.push(row);
        }
        for r in 0..other.dim() {
            let mut row = vec![0u16; 2 * n];
            row[..n].copy_from_slice(other.row(r));
            block.push(row);
        }
        rref_in_place(field, &mut block);
        let meet_rows: Vec<Vec<u16>> = block
            .iter()
            .filter(|row| row[..n].iter().all(|&x| x == 0))
            .map(|row| row[n..].to_vec())
            .collect();
        Subspace::from_rows(field, n, &meet_rows)
    }

    pub fn dim_meet(&self, field: &GfField, other: &Subspace) -> usize {
        let mut rows = self.row_vecs();
        rows.extend(other.row_vecs());
        self.dim() + other.dim() - rank(field, rows)
    }

    /// `dim(self ∩ span{e_0..e_{k-1}})`, computed as `dim - rank` of the
    /// projection onto the trailing coordinates.
    pub fn dim_meet_prefix(&self, field: &GfField, k: usize) -> usize {
        let n = self.ambient();
        debug_assert!(k <= n);
        let tails: Vec<Vec<u16>> = (0..self.dim())
            .map(|r| self.row(r)[k..].to_vec())
            .collect();
        self.dim() - rank(field, tails)
    }

    /// All codimension-1 subspaces of `self`, canonicalized in ambient
    /// coordinates.  There are `[dim 1]_q` of them.
    pub fn hyperplanes(&self, field: &GfField) -> Vec<Subspace> {
        let d = self.dim();
        if d == 0 {
            return Vec::new();
        }
        let n = self.ambient();
        // Hyperplanes correspond to kernels of nonzero functionals on the
        // local coordinates, one per projective point of the dual.
        let mut out = Vec::new();
        for phi in projective_points(field, d) {
            // Kernel basis of phi in local coordinates: standard construction
            // off the last nonzero position.
            let p = phi.iter().rposition(|&x| x != 0).unwrap();
            let inv = field.inv(phi[p]);
            let mut local: Vec<Vec<u16>> = Vec::with_capacity(d - 1);
            for i in 0..d {
                if i == p {
                    continue;
                }
                let mut v = vec![0u16; d];
                v[i] = 1;
                v[p] = field.neg(field.mul(phi[i], inv));
                local.push(v);
            }
            let rows: Vec<Vec<u16>> = local
                .iter()
                .map(|coef| {
                    let mut acc = vec![0u16; n];
                    for (i, &c) in coef.iter().enumerate() {
                        if c != 0 {
                            for j in 0..n {
                                let t = field.mul(c, self.row(i)[j]);
                                acc[j] = field.add(acc[j], t);
                            }
                        }
                    }
                    acc
                })
                .collect();
            out.push(Subspace::from_rows(field, n, &rows));
        }
        debug_assert_eq!(
            out.len(),
            crate::qarith::bracket(d as i64, field.q as u64)
                .try_into()
                .unwrap_or(usize::MAX)
        );
        out
    }

    /// Image under a linear map given row-wise; re-canonicalized.
    pub fn transform<F>(&self, field: &GfField, map: F) -> Subspace
    where
        F: Fn(&[u16]) -> Vec<u16>,
    {
        let rows: Vec<Vec<u16>> = (0..self.dim()).map(|r| map(self.row(r))).collect();
        Subspace::from_rows(field, self.ambient(), &rows)
    }

    /// All `q^dim` vectors of the subspace (including zero), in ambient
    /// coordinates.
    pub fn vectors(&self, field: &GfField) -> Vec<Vec<u16>> {
        let n = self.ambient();
        let mut out = Vec::new();
        for coef in all_vectors(field.q as usize, self.dim()) {
            let mut acc = vec![0u16; n];
            for (i, &c) in coef.iter().enumerate() {
                if c != 0 {
                    for j in 0..n {
                        let t = field.mul(c, self.row(i)[j]);
                        acc[j] = field.add(acc[j], t);
                    }
                }
            }
            out.push(acc);
        }
        out
    }
}

/// All vectors of `F_q^len` in odometer order (first coordinate fastest).
pub fn all_vectors(q: usize, len: usize) -> Vec<Vec<u16>> {
    let total = q.pow(len as u32);
    let mut out = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut v = vec![0u16; len];
        for slot in v.iter_mut() {
            *slot = (idx % q) as u16;
            idx /= q;
        }
        out.push(v);
    }
    out
}

/// One representative per 1-dimensional subspace of `F_q^len`:
/// vectors whose last nonzero coordinate is 1.
pub fn projective_points(field: &GfField, len: usize) -> Vec<Vec<u16>> {
    all_vectors(field.q as usize, len)
        .into_iter()
        .filter(|v| matches!(v.iter().rfind(|&&x| x != 0), Some(&1)))
        .collect()
}

/// All `d`-dimensional subspaces of `F_q^n`, sorted in the global order.
pub fn enumerate_subspaces(field: &GfField, n: usize, d: usize) -> Vec<Subspace> {
    assert!(d <= n);
    let q = field.q as usize;
    let mut out = Vec::new();
    for pivots in combinations(n, d) {
        // Free entries: row r, column c with c > pivots[r] and c not a pivot.
        let mut free_cells = Vec::new();
        for (r, &p) in pivots.iter().enumerate() {
            for c in (p + 1)..n {
                if !pivots.contains(&c) {
                    free_cells.push((r, c));
                }
            }
        }
        for assignment in all_vectors(q, free_cells.len()) {
            let mut rows = vec![0u16; d * n];
            for (r, &p) in pivots.iter().enumerate() {
                rows[r * n + p] = 1;
            }
            for (&(r, c), &v) in free_cells.iter().zip(&assignment) {
                rows[r * n + c] = v;
            }
            out.push(Subspace { n: n as u8, rows });
        }
    }
    out.sort();
    out
}

/// Every subspace of `F_q^n`, sorted by `(dimension, lexicographic basis)`.
pub fn enumerate_all_subspaces(field: &GfField, n: usize) -> Vec<Subspace> {
    let mut out = Vec::new();
    for d in 0..=n {
        out.extend(enumerate_subspaces(field, n, d));
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for c in start..n {
            cur.push(c);
            rec(c + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Packed `u64` bit-rows for fast rank computations over `F_2`.
pub fn bit_rows(s: &Subspace) -> Vec<u64> {
    debug_assert!(s.ambient() <= 64);
    (0..s.dim())
        .map(|r| {
            s.row(r)
                .iter()
                .enumerate()
                .fold(0u64, |acc, (j, &x)| acc | ((x as u64 & 1) << j))
        })
        .collect()
}

/// Rank of a set of `F_2` bit-rows (destructive).
pub fn bit_rank(rows: &mut [u64]) -> usize {
    let mut rank = 0;
    for c in 0..64 {
        let mask = 1u64 << c;
        let Some(p) = (rank..rows.len()).find(|&i| rows[i] & mask != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && *row & mask != 0 {
                *row ^= pivot;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qarith::gaussian_binomial;
    use proptest::prelude::*;

    fn f2() -> GfField {
        GfField::new(2).unwrap()
    }

    fn f3() -> GfField {
        GfField::new(3).unwrap()
    }

    #[test]
    fn rref_known_example() {
        let field = f2();
        let s = Subspace::from_rows(&field, 3, &[vec![1, 0, 1], vec![1, 1, 1]]);
        assert_eq!(s.row_vecs(), vec![vec![1, 0, 1], vec![0, 1, 0]]);
        assert_eq!(s.pivots(), vec![0, 1]);
    }

    #[test]
    fn enumeration_counts_match_binomials() {
        for (q, field) in [(2u64, f2()), (3, f3())] {
            for n in 0..=4usize {
                for d in 0..=n {
                    let subs = enumerate_subspaces(&field, n, d);
                    assert_eq!(
                        subs.len() as i64,
                        i64::try_from(gaussian_binomial(n as i64, d as i64, q)).unwrap()
                    );
                    // All distinct and sorted.
                    for w in subs.windows(2) {
                        assert!(w[0] < w[1]);
                    }
                }
            }
        }
    }

    #[test]
    fn meet_join_on_lines_of_f2_cubed() {
        let field = f2();
        let e01 = Subspace::from_rows(&field, 3, &[vec![1, 0, 0], vec![0, 1, 0]]);
        let e12 = Subspace::from_rows(&field, 3, &[vec![0, 1, 0], vec![0, 0, 1]]);
        let meet = e01.meet(&field, &e12);
        assert_eq!(meet.dim(), 1);
        assert!(meet.contains_vector(&field, &[0, 1, 0]));
        let join = e01.join(&field, &e12);
        assert_eq!(join.dim(), 3);
    }

    #[test]
    fn hyperplane_count_and_membership() {
        let field = f2();
        let s = Subspace::full(4);
        let hs = s.hyperplanes(&field);
        assert_eq!(hs.len(), 15);
        for h in &hs {
            assert_eq!(h.dim(), 3);
            assert!(s.contains(&field, h));
        }
        let mut uniq = hs.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 15);
    }

    #[test]
    fn prefix_meet_matches_generic_meet() {
        let field = f3();
        for s in enumerate_subspaces(&field, 4, 2) {
            for k in 0..=4usize {
                let prefix = Subspace::coordinate_prefix(4, k);
                assert_eq!(s.dim_meet_prefix(&field, k), s.dim_meet(&field, &prefix));
            }
        }
    }

    #[test]
    fn bit_rank_matches_field_rank() {
        let field = f2();
        for s in enumerate_subspaces(&field, 5, 3) {
            let mut bits = bit_rows(&s);
            assert_eq!(bit_rank(&mut bits), 3);
        }
    }

    proptest! {
        #[test]
        fn rref_is_idempotent_and_lattice_laws_hold(
            seed in proptest::collection::vec(0u16..3, 0..12)
        ) {
            let field = f3();
            let n = 4;
            let rows: Vec<Vec<u16>> = seed.chunks(n).map(|c| {
                let mut r = c.to_vec();
                r.resize(n, 0);
                r
            }).collect();
            let s = Subspace::from_rows(&field, n, &rows);
            let again = Subspace::from_rows(&field, n, &s.row_vecs());
            prop_assert_eq!(&s, &again);

            let t = Subspace::from_rows(&field, n, &rows.iter().rev().cloned().collect::<Vec<_>>());
            prop_assert_eq!(&s, &t);

            let prefix = Subspace::coordinate_prefix(n, 2);
            let meet = s.meet(&field, &prefix);
            let join = s.join(&field, &prefix);
            prop_assert!(s.contains(&field, &meet));
            prop_assert!(prefix.contains(&field, &meet));
            prop_assert!(join.contains(&field, &s));
            prop_assert_eq!(
                meet.dim() + join.dim(),
                s.dim() + prefix.dim()
            );
            prop_assert_eq!(meet.dim(), s.dim_meet(&field, &prefix));
        }
    }
}
