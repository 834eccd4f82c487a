//! Sparse matrices: 0/1 incidence matrices and scalar-valued sparse
//! matrices with sorted coordinate rows.
//!
//! Products, sums, and transposes are implemented here directly; the sizes
//! this crate targets (ground sets up to a few tens of thousands) never
//! justify an external solver, and owning the arithmetic keeps every
//! verification path exact.

use num_traits::Zero;
use std::fmt::Debug;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Scalar;

/// Entry types storable in a sparse matrix (exact equality, ring ops).
pub trait SpElem:
    Clone
    + Debug
    + PartialEq
    + Zero
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
}

impl<T> SpElem for T where
    T: Clone
        + Debug
        + PartialEq
        + Zero
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
        + Send
        + Sync
        + 'static
{
}

/// 0/1 matrix stored as sorted column indices per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinMat {
    pub nrows: usize,
    pub ncols: usize,
    rows: Vec<Vec<u32>>,
}

impl BinMat {
    pub fn new(nrows: usize, ncols: usize) -> BinMat {
        BinMat {
            nrows,
            ncols,
            rows: vec![Vec::new(); nrows],
        }
    }

    pub fn from_entries(
        nrows: usize,
        ncols: usize,
        entries: impl IntoIterator<Item = (u32, u32)>,
    ) -> BinMat {
        let mut m = BinMat::new(nrows, ncols);
        for (r, c) in entries {
            m.rows[r as usize].push(c);
        }
        for row in &mut m.rows {
            row.sort_unstable();
            row.dedup();
        }
        m
    }

    pub fn set(&mut self, r: usize, c: usize) {
        let row = &mut self.rows[r];
        match row.binary_search(&(c as u32)) {
            Ok(_) => {}
            Err(pos) => row.insert(pos, c as u32),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].binary_search(&(c as u32)).is_ok()
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.rows[r]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn transpose(&self) -> BinMat {
        let mut rows = vec![Vec::new(); self.ncols];
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row {
                rows[c as usize].push(r as u32);
            }
        }
        BinMat {
            nrows: self.ncols,
            ncols: self.nrows,
            rows,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self == &self.transpose()
    }

    /// Integer product: `(self * other)[r][c]` counts paths `r -> k -> c`.
    pub fn mul_bin(&self, other: &BinMat) -> SparseMat<i64> {
        assert_eq!(self.ncols, other.nrows);
        let mut out = SparseMat::zero(self.nrows, other.ncols);
        let mut scratch: Vec<i64> = vec![0; other.ncols];
        let mut touched: Vec<u32> = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            for &k in row {
                for &c in &other.rows[k as usize] {
                    if scratch[c as usize] == 0 {
                        touched.push(c);
                    }
                    scratch[c as usize] += 1;
                }
            }
            touched.sort_unstable();
            let entries: Vec<(u32, i64)> = touched
                .iter()
                .map(|&c| {
                    let v = scratch[c as usize];
                    scratch[c as usize] = 0;
                    (c, v)
                })
                .collect();
            out.rows[r] = entries;
            touched.clear();
        }
        out
    }

    /// Apply to a dense vector: `y[r] = Σ_{c ∈ row r} v[c]`.
    pub fn apply<S: SpElem>(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.ncols);
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .fold(S::zero(), |acc, &c| acc + v[c as usize].clone())
            })
            .collect()
    }

    pub fn to_mat<S: SpElem + num_traits::One>(&self) -> SparseMat<S> {
        let rows = self
            .rows
            .iter()
            .map(|row| row.iter().map(|&c| (c, S::one())).collect())
            .collect();
        SparseMat {
            nrows: self.nrows,
            ncols: self.ncols,
            rows,
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&c| (r as u32, c)))
    }
}

/// Sparse matrix with sorted `(column, value)` rows; stored values nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMat<T: SpElem> {
    pub nrows: usize,
    pub ncols: usize,
    pub rows: Vec<Vec<(u32, T)>>,
}

/// Merge two sorted sparse rows as `a + f(b)`, dropping exact zeros.
fn row_merge<T: SpElem>(a: &[(u32, T)], b: &[(u32, T)], f: impl Fn(&T) -> T) -> Vec<(u32, T)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map(|&(c, _)| c).unwrap_or(u32::MAX);
        let cb = b.get(j).map(|&(c, _)| c).unwrap_or(u32::MAX);
        if ca < cb {
            out.push(a[i].clone());
            i += 1;
        } else if cb < ca {
            let v = f(&b[j].1);
            if !v.is_zero() {
                out.push((cb, v));
            }
            j += 1;
        } else {
            let v = a[i].1.clone() + f(&b[j].1);
            if !v.is_zero() {
                out.push((ca, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// `a + coef * b` on sorted sparse rows.
pub fn row_add_scaled<T: SpElem>(a: &[(u32, T)], b: &[(u32, T)], coef: &T) -> Vec<(u32, T)> {
    row_merge(a, b, |v| coef.clone() * v.clone())
}

impl<T: SpElem> SparseMat<T> {
    pub fn zero(nrows: usize, ncols: usize) -> SparseMat<T> {
        SparseMat {
            nrows,
            ncols,
            rows: vec![Vec::new(); nrows],
        }
    }

    pub fn identity(n: usize) -> SparseMat<T>
    where
        T: num_traits::One,
    {
        let rows = (0..n).map(|i| vec![(i as u32, T::one())]).collect();
        SparseMat {
            nrows: n,
            ncols: n,
            rows,
        }
    }

    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (u32, u32, T)>,
    ) -> SparseMat<T> {
        let mut buckets: Vec<Vec<(u32, T)>> = vec![Vec::new(); nrows];
        for (r, c, v) in triplets {
            buckets[r as usize].push((c, v));
        }
        let rows = buckets
            .into_iter()
            .map(|mut row| {
                row.sort_by_key(|&(c, _)| c);
                let mut merged: Vec<(u32, T)> = Vec::with_capacity(row.len());
                for (c, v) in row {
                    match merged.last_mut() {
                        Some((lc, lv)) if *lc == c => *lv = lv.clone() + v,
                        _ => merged.push((c, v)),
                    }
                }
                merged.retain(|(_, v)| !v.is_zero());
                merged
            })
            .collect();
        SparseMat {
            nrows,
            ncols,
            rows,
        }
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.rows[r]
            .binary_search_by_key(&(c as u32), |&(cc, _)| cc)
            .map(|pos| self.rows[r][pos].1.clone())
            .unwrap_or_else(|_| T::zero())
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        let row = &mut self.rows[r];
        match row.binary_search_by_key(&(c as u32), |&(cc, _)| cc) {
            Ok(pos) => {
                if v.is_zero() {
                    row.remove(pos);
                } else {
                    row[pos].1 = v;
                }
            }
            Err(pos) => {
                if !v.is_zero() {
                    row.insert(pos, (c as u32, v));
                }
            }
        }
    }

    pub fn transpose(&self) -> SparseMat<T> {
        let mut rows: Vec<Vec<(u32, T)>> = vec![Vec::new(); self.ncols];
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                rows[*c as usize].push((r as u32, v.clone()));
            }
        }
        SparseMat {
            nrows: self.ncols,
            ncols: self.nrows,
            rows,
        }
    }

    pub fn add(&self, other: &SparseMat<T>) -> SparseMat<T> {
        self.merge_with(other, |v| v.clone())
    }

    pub fn sub(&self, other: &SparseMat<T>) -> SparseMat<T> {
        self.merge_with(other, |v| -v.clone())
    }

    pub fn add_scaled(&self, other: &SparseMat<T>, coef: &T) -> SparseMat<T> {
        self.merge_with(other, |v| coef.clone() * v.clone())
    }

    fn merge_with(&self, other: &SparseMat<T>, f: impl Fn(&T) -> T + Copy) -> SparseMat<T> {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| row_merge(a, b, f))
            .collect();
        SparseMat {
            nrows: self.nrows,
            ncols: self.ncols,
            rows,
        }
    }

    pub fn scale(&self, coef: &T) -> SparseMat<T> {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .filter_map(|(c, v)| {
                        let w = coef.clone() * v.clone();
                        if w.is_zero() {
                            None
                        } else {
                            Some((*c, w))
                        }
                    })
                    .collect()
            })
            .collect();
        SparseMat {
            nrows: self.nrows,
            ncols: self.ncols,
            rows,
        }
    }

    pub fn mul(&self, other: &SparseMat<T>) -> SparseMat<T> {
        assert_eq!(self.ncols, other.nrows);
        let mut out = SparseMat::zero(self.nrows, other.ncols);
        for (r, row) in self.rows.iter().enumerate() {
            let mut acc: Vec<(u32, T)> = Vec::new();
            for (k, v) in row {
                acc = row_add_scaled(&acc, &other.rows[*k as usize], v);
            }
            out.rows[r] = acc;
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.ncols);
        self.rows
            .iter()
            .map(|row| {
                row.iter().fold(T::zero(), |acc, (c, x)| {
                    acc + x.clone() * v[*c as usize].clone()
                })
            })
            .collect()
    }

    /// Submatrix on the given row/column index lists (in their given order).
    pub fn restrict(&self, row_ids: &[u32], col_ids: &[u32]) -> SparseMat<T> {
        let mut col_map: Vec<Option<u32>> = vec![None; self.ncols];
        for (new, &old) in col_ids.iter().enumerate() {
            col_map[old as usize] = Some(new as u32);
        }
        let rows = row_ids
            .iter()
            .map(|&old| {
                self.rows[old as usize]
                    .iter()
                    .filter_map(|(c, v)| col_map[*c as usize].map(|nc| (nc, v.clone())))
                    .collect()
            })
            .collect();
        SparseMat {
            nrows: row_ids.len(),
            ncols: col_ids.len(),
            rows,
        }
    }

    pub fn map<U: SpElem>(&self, f: impl Fn(&T) -> U) -> SparseMat<U> {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .filter_map(|(c, v)| {
                        let w = f(v);
                        if w.is_zero() {
                            None
                        } else {
                            Some((*c, w))
                        }
                    })
                    .collect()
            })
            .collect();
        SparseMat {
            nrows: self.nrows,
            ncols: self.ncols,
            rows,
        }
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.ncols]; self.nrows];
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                out[r][*c as usize] = v.clone();
            }
        }
        out
    }
}

impl<T: Scalar> SparseMat<T> {
    /// Largest entry magnitude (0 for the zero matrix).
    pub fn max_magnitude(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|row| row.iter().map(|(_, v)| v.magnitude()))
            .fold(0.0, f64::max)
    }

    /// `max |self - other|`, for tolerance-based identity checks.
    pub fn max_diff(&self, other: &SparseMat<T>) -> f64 {
        self.sub(other).max_magnitude()
    }
}

/// Apply a 0/1 operator to a sparse vector, given the operator's transpose
/// (whose rows are the operator's columns): `op v = Σ_z v_z op[:, z]`.
pub fn apply_transposed_bin<T: SpElem>(op_t: &BinMat, v: &[(u32, T)]) -> Vec<(u32, T)> {
    let mut acc: Vec<(u32, T)> = Vec::new();
    for (z, coef) in v {
        let col: Vec<(u32, T)> = op_t
            .row(*z as usize)
            .iter()
            .map(|&r| (r, coef.clone()))
            .collect();
        acc = row_merge(&acc, &col, |x| x.clone());
    }
    acc
}

/// Scale a sparse vector, dropping entries that become exactly zero.
pub fn scale_sparse<T: SpElem>(v: &[(u32, T)], coef: &T) -> Vec<(u32, T)> {
    v.iter()
        .filter_map(|(c, x)| {
            let w = coef.clone() * x.clone();
            if w.is_zero() {
                None
            } else {
                Some((*c, w))
            }
        })
        .collect()
}

/// Matrix Market (coordinate, integer, general) serialization.
pub fn matrix_market_i64(m: &SparseMat<i64>) -> String {
    let mut s = String::new();
    s.push_str("%%MatrixMarket matrix coordinate integer general\n");
    let _ = writeln!(s, "{} {} {}", m.nrows, m.ncols, m.nnz());
    for (r, row) in m.rows.iter().enumerate() {
        for (c, v) in row {
            let _ = writeln!(s, "{} {} {}", r + 1, c + 1, v);
        }
    }
    s
}

pub fn matrix_market_bin(m: &BinMat) -> String {
    matrix_market_i64(&m.to_mat::<i64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;

    #[test]
    fn bin_product_counts_paths() {
        // 2x3 and 3x2 incidence matrices.
        let a = BinMat::from_entries(2, 3, [(0, 0), (0, 1), (1, 1), (1, 2)]);
        let b = BinMat::from_entries(3, 2, [(0, 0), (1, 0), (1, 1), (2, 1)]);
        let p = a.mul_bin(&b);
        assert_eq!(p.get(0, 0), 2);
        assert_eq!(p.get(0, 1), 1);
        assert_eq!(p.get(1, 0), 1);
        assert_eq!(p.get(1, 1), 2);
    }

    #[test]
    fn transpose_round_trip() {
        let a = BinMat::from_entries(3, 4, [(0, 3), (1, 0), (2, 2), (2, 3)]);
        assert_eq!(a.transpose().transpose(), a);
        let m: SparseMat<i64> = a.to_mat();
        assert_eq!(m.transpose().transpose(), m);
    }

    #[test]
    fn sparse_mul_matches_dense() {
        let a: SparseMat<Rat> = SparseMat::from_triplets(
            2,
            2,
            [
                (0, 0, Rat::from_integer(1.into())),
                (0, 1, Rat::from_integer(2.into())),
                (1, 1, Rat::from_integer(3.into())),
            ],
        );
        let sq = a.mul(&a);
        assert_eq!(sq.get(0, 0), Rat::from_integer(1.into()));
        assert_eq!(sq.get(0, 1), Rat::from_integer(8.into()));
        assert_eq!(sq.get(1, 1), Rat::from_integer(9.into()));
        assert_eq!(sq.get(1, 0), Rat::from_integer(0.into()));
    }

    #[test]
    fn zero_entries_are_dropped() {
        let a: SparseMat<i64> =
            SparseMat::from_triplets(1, 2, [(0, 0, 5), (0, 0, -5), (0, 1, 7)]);
        assert_eq!(a.nnz(), 1);
        let b = a.sub(&a);
        assert!(b.is_zero_matrix());
    }

    #[test]
    fn matrix_market_format() {
        let a: SparseMat<i64> = SparseMat::from_triplets(2, 2, [(0, 1, 3), (1, 0, -1)]);
        let text = matrix_market_i64(&a);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "%%MatrixMarket matrix coordinate integer general");
        assert_eq!(lines[1], "2 2 2");
        assert_eq!(lines[2], "1 2 3");
        assert_eq!(lines[3], "2 1 -1");
    }
}
