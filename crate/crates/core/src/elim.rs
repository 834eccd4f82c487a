//! Linear algebra over exact and floating scalars: incremental echelon
//! tracking, sparse kernels, dense rank/kernel/determinant, and a modular
//! sparse rank for systems too large for rational elimination.
//!
//! Pivot selection is deterministic everywhere: exact scalars take the first
//! admissible pivot, floating scalars the largest magnitude (ties broken by
//! lowest index).

use std::collections::BTreeMap;

use crate::scalar::Scalar;
use crate::sparse::{row_add_scaled, SparseMat};

/// Incremental row-echelon basis with a pivot-column cutoff.
///
/// Stored rows are kept fully reduced (a pivot column appears in no other
/// stored row) and normalized to pivot coefficient 1. Pivots are only chosen
/// among columns `< limit`; inserting a vector whose block part (columns
/// `< limit`) lies in the current span returns the leftover tail instead of
/// absorbing it. With `limit = ncols` this is a plain span tracker.
pub struct EchelonTracker<S: Scalar> {
    limit: u32,
    tol: f64,
    rows: Vec<Vec<(u32, S)>>,
    by_pivot: BTreeMap<u32, usize>,
}

impl<S: Scalar> EchelonTracker<S> {
    pub fn new(limit: usize, tol: f64) -> EchelonTracker<S> {
        EchelonTracker {
            limit: limit as u32,
            tol,
            rows: Vec::new(),
            by_pivot: BTreeMap::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.by_pivot.len()
    }

    /// Reduce `v` against the stored rows without inserting it.
    pub fn reduce(&self, mut v: Vec<(u32, S)>) -> Vec<(u32, S)> {
        loop {
            let hit = v
                .iter()
                .find_map(|(c, x)| self.by_pivot.get(c).map(|&idx| (idx, x.clone())));
            match hit {
                Some((idx, x)) => v = row_add_scaled(&v, &self.rows[idx], &-x),
                None => break,
            }
        }
        if !S::EXACT {
            v.retain(|(_, x)| !x.is_negligible(self.tol));
        }
        v
    }

    /// Insert a vector. `None` means it extended the span (a new pivot row);
    /// `Some(tail)` means its block part was dependent, and `tail` is the
    /// residual supported on columns `>= limit`.
    pub fn insert(&mut self, v: Vec<(u32, S)>) -> Option<Vec<(u32, S)>> {
        let v = self.reduce(v);
        let pivot = if S::EXACT {
            v.iter().find(|(c, _)| *c < self.limit).cloned()
        } else {
            v.iter()
                .filter(|(c, _)| *c < self.limit)
                .max_by(|a, b| {
                    a.1.magnitude()
                        .partial_cmp(&b.1.magnitude())
                        .unwrap()
                        .then(b.0.cmp(&a.0))
                })
                .cloned()
        };
        let Some((pc, pv)) = pivot else {
            return Some(v.into_iter().filter(|(c, _)| *c >= self.limit).collect());
        };
        let inv = S::one() / pv;
        let new_row: Vec<(u32, S)> = v
            .into_iter()
            .map(|(c, x)| (c, x * inv.clone()))
            .collect();
        for row in &mut self.rows {
            if let Ok(pos) = row.binary_search_by_key(&pc, |&(c, _)| c) {
                let coef = -row[pos].1.clone();
                *row = row_add_scaled(row, &new_row, &coef);
            }
        }
        self.by_pivot.insert(pc, self.rows.len());
        self.rows.push(new_row);
        None
    }
}

/// Kernel basis of a sparse matrix (vectors `v` with `m v = 0`), found by
/// echelon-reducing the columns with bookkeeping coordinates appended.
pub fn kernel_sparse<S: Scalar>(m: &SparseMat<S>, tol: f64) -> Vec<Vec<(u32, S)>> {
    let nr = m.nrows as u32;
    let t = m.transpose();
    let mut tracker: EchelonTracker<S> = EchelonTracker::new(m.nrows, tol);
    let mut kernel = Vec::new();
    for j in 0..m.ncols {
        let mut v = t.rows[j].clone();
        v.push((nr + j as u32, S::one()));
        if let Some(tail) = tracker.insert(v) {
            kernel.push(tail.into_iter().map(|(c, x)| (c - nr, x)).collect());
        }
    }
    kernel
}

pub fn rank_sparse<S: Scalar>(m: &SparseMat<S>, tol: f64) -> usize {
    let mut tracker: EchelonTracker<S> = EchelonTracker::new(m.ncols, tol);
    for row in &m.rows {
        tracker.insert(row.clone());
    }
    tracker.rank()
}

/// Dense rank. Exact scalars: first nonzero pivot; floats: partial pivoting.
pub fn rank_dense<S: Scalar>(mut m: Vec<Vec<S>>, tol: f64) -> usize {
    let nrows = m.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = m[0].len();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let pivot = pick_pivot(&m, rank, col, tol);
        let Some(prow) = pivot else { continue };
        m.swap(rank, prow);
        let inv = S::one() / m[rank][col].clone();
        for r in rank + 1..nrows {
            if m[r][col].is_negligible(tol) {
                continue;
            }
            let factor = m[r][col].clone() * inv.clone();
            for c in col..ncols {
                let delta = factor.clone() * m[rank][c].clone();
                m[r][c] = m[r][c].clone() - delta;
            }
        }
        rank += 1;
    }
    rank
}

fn pick_pivot<S: Scalar>(m: &[Vec<S>], from_row: usize, col: usize, tol: f64) -> Option<usize> {
    if S::EXACT {
        (from_row..m.len()).find(|&r| !m[r][col].is_zero())
    } else {
        let (best, mag) = (from_row..m.len())
            .map(|r| (r, m[r][col].magnitude()))
            .fold((from_row, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        (mag > tol).then_some(best)
    }
}

pub fn nullity_dense<S: Scalar>(m: Vec<Vec<S>>, tol: f64) -> usize {
    let ncols = m.first().map_or(0, Vec::len);
    ncols - rank_dense(m, tol)
}

/// Kernel basis of a dense matrix, one vector per free column.
pub fn kernel_dense<S: Scalar>(mut m: Vec<Vec<S>>, ncols: usize, tol: f64) -> Vec<Vec<S>> {
    let nrows = m.len();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(prow) = pick_pivot(&m, rank, col, tol) else {
            continue;
        };
        m.swap(rank, prow);
        let inv = S::one() / m[rank][col].clone();
        for c in col..ncols {
            m[rank][c] = m[rank][c].clone() * inv.clone();
        }
        for r in 0..nrows {
            if r == rank || m[r][col].is_negligible(tol) {
                continue;
            }
            let factor = m[r][col].clone();
            for c in col..ncols {
                let delta = factor.clone() * m[rank][c].clone();
                m[r][c] = m[r][c].clone() - delta;
            }
        }
        pivots.push((rank, col));
        rank += 1;
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivot_cols.contains(c)) {
        let mut v = vec![S::zero(); ncols];
        v[free] = S::one();
        for &(r, c) in &pivots {
            v[c] = -m[r][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Determinant of a square dense matrix by elimination.
pub fn det_dense<S: Scalar>(mut m: Vec<Vec<S>>, tol: f64) -> S {
    let n = m.len();
    assert!(m.iter().all(|row| row.len() == n), "determinant needs a square matrix");
    let mut det = S::one();
    for col in 0..n {
        let Some(prow) = pick_pivot(&m, col, col, tol) else {
            return S::zero();
        };
        if prow != col {
            m.swap(col, prow);
            det = -det;
        }
        det = det * m[col][col].clone();
        let inv = S::one() / m[col][col].clone();
        for r in col + 1..n {
            if m[r][col].is_negligible(tol) {
                continue;
            }
            let factor = m[r][col].clone() * inv.clone();
            for c in col..n {
                let delta = factor.clone() * m[col][c].clone();
                m[r][c] = m[r][c].clone() - delta;
            }
        }
    }
    det
}

/// Sparse rank over the prime field `F_p` (`p < 2^32` so products fit u64).
///
/// Min-fill heuristic: pivot rows by fewest entries, pivot columns by
/// shortest column list. Since an r-by-r minor that is nonzero mod p is
/// nonzero over the rationals, for integer input this rank is a lower bound
/// on the rational rank (equivalently, the mod-p nullity bounds the rational
/// nullity from above).
pub fn rank_sparse_modp(rows: Vec<Vec<(u32, i64)>>, ncols: usize, p: u64) -> usize {
    assert!(p < (1u64 << 32), "modulus too large for u64 products");
    let reduce = |v: i64| -> u64 { v.rem_euclid(p as i64) as u64 };
    let mut active: Vec<Option<Vec<(u32, u64)>>> = rows
        .into_iter()
        .map(|row| {
            let r: Vec<(u32, u64)> = row
                .into_iter()
                .filter_map(|(c, v)| {
                    let v = reduce(v);
                    (v != 0).then_some((c, v))
                })
                .collect();
            Some(r)
        })
        .collect();
    let mut col_rows: Vec<Vec<u32>> = vec![Vec::new(); ncols];
    let mut heap = std::collections::BinaryHeap::new();
    for (rid, row) in active.iter().enumerate() {
        let row = row.as_ref().unwrap();
        for &(c, _) in row {
            col_rows[c as usize].push(rid as u32);
        }
        if !row.is_empty() {
            heap.push(std::cmp::Reverse((row.len(), rid as u32)));
        }
    }
    let mut rank = 0;
    while let Some(std::cmp::Reverse((nnz, rid))) = heap.pop() {
        let Some(row) = active[rid as usize].take() else {
            continue;
        };
        if row.len() != nnz {
            active[rid as usize] = Some(row);
            continue;
        }
        // Shortest column list is a cheap proxy for least fill-in; stale ids
        // in the lists only make the estimate pessimistic, never wrong.
        let pc = row
            .iter()
            .map(|&(c, _)| c)
            .min_by_key(|&c| (col_rows[c as usize].len(), c))
            .unwrap();
        let pinv = modp_inv(
            row.iter().find(|&&(c, _)| c == pc).unwrap().1,
            p,
        );
        let pivot_row: Vec<(u32, u64)> =
            row.iter().map(|&(c, v)| (c, v * pinv % p)).collect();
        let victims = std::mem::take(&mut col_rows[pc as usize]);
        for rid2 in victims {
            if rid2 == rid {
                continue;
            }
            let Some(other) = active[rid2 as usize].take() else {
                continue;
            };
            let Ok(pos) = other.binary_search_by_key(&pc, |&(c, _)| c) else {
                active[rid2 as usize] = Some(other);
                continue;
            };
            let coef = p - other[pos].1;
            let merged = modp_row_add(&other, &pivot_row, coef, p);
            if merged.is_empty() {
                continue;
            }
            for &(c, _) in &pivot_row {
                if c != pc {
                    col_rows[c as usize].push(rid2);
                }
            }
            heap.push(std::cmp::Reverse((merged.len(), rid2)));
            active[rid2 as usize] = Some(merged);
        }
        rank += 1;
    }
    rank
}

fn modp_row_add(a: &[(u32, u64)], b: &[(u32, u64)], coef: u64, p: u64) -> Vec<(u32, u64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map(|&(c, _)| c).unwrap_or(u32::MAX);
        let cb = b.get(j).map(|&(c, _)| c).unwrap_or(u32::MAX);
        if ca < cb {
            out.push(a[i]);
            i += 1;
        } else if cb < ca {
            let v = b[j].1 * coef % p;
            if v != 0 {
                out.push((cb, v));
            }
            j += 1;
        } else {
            let v = (a[i].1 + b[j].1 * coef % p) % p;
            if v != 0 {
                out.push((ca, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn modp_inv(x: u64, p: u64) -> u64 {
    // Fermat: x^(p-2) mod p.
    let mut base = x % p;
    let mut exp = p - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

const MERSENNE31: u64 = (1 << 31) - 1;

/// Product mod p for operands already reduced below p (p < 2^32). The
/// Mersenne prime 2^31 - 1 gets a division-free fold; anything else pays a
/// u128 remainder.
#[inline]
fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    if p == MERSENNE31 {
        // a, b < 2^31 so the product fits u64; two folds land below 2^31 + 1.
        let t = a * b;
        let r = (t & MERSENNE31) + (t >> 31);
        let r = (r & MERSENNE31) + (r >> 31);
        if r >= p {
            r - p
        } else {
            r
        }
    } else {
        ((a as u128) * (b as u128) % (p as u128)) as u64
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Minimal linear recurrence of `s` over F_p, as connection coefficients
/// `c` with `c[0] = 1` and `sum_i c[i] * s[n-i] = 0` for all `n >= len(c)-1`.
fn berlekamp_massey_modp(s: &[u64], p: u64) -> Vec<u64> {
    let mut c = vec![1u64];
    let mut b = vec![1u64];
    let mut l = 0usize;
    let mut m = 1usize;
    let mut last_d = 1u64;
    for n in 0..s.len() {
        let mut d = s[n] % p;
        for i in 1..=l {
            d = (d + mulmod(c[i], s[n - i], p)) % p;
        }
        if d == 0 {
            m += 1;
            continue;
        }
        let coef = mulmod(d, modp_inv(last_d, p), p);
        if 2 * l <= n {
            let keep = c.clone();
            if c.len() < b.len() + m {
                c.resize(b.len() + m, 0);
            }
            for (i, &bi) in b.iter().enumerate() {
                c[i + m] = (c[i + m] + p - mulmod(coef, bi, p)) % p;
            }
            l = n + 1 - l;
            b = keep;
            last_d = d;
            m = 1;
        } else {
            if c.len() < b.len() + m {
                c.resize(b.len() + m, 0);
            }
            for (i, &bi) in b.iter().enumerate() {
                c[i + m] = (c[i + m] + p - mulmod(coef, bi, p)) % p;
            }
            m += 1;
        }
    }
    c.truncate(l + 1);
    c
}

/// Certified lower bound on the F_p rank of a sparse integer matrix B,
/// via the Krylov sequence of W = D1 B^T D2^2 B D1 with random diagonal
/// preconditioners.
///
/// The Berlekamp-Massey generator of u^T W^i v (taken to length 2n+2, past
/// twice any minimal-polynomial degree) divides the minimal polynomial of W,
/// and the degree of a minimal polynomial away from its root at zero never
/// exceeds the rank, so the returned value is a true lower bound on
/// rank_p(B) for every seed — hence `ncols - bound` always bounds the mod-p
/// (and so the rational) nullity from above. With random preconditioners the
/// bound is tight with high probability; callers confirm tightness against
/// an independently computed value.
///
/// Memory stays linear in the number of nonzero entries, unlike elimination,
/// whose fill-in is quadratic in the worst case. Entries equal to +-1 avoid
/// multiplication entirely in the two matrix passes.
pub fn rank_lower_bound_modp(
    rows: &[Vec<(u32, i64)>],
    ncols: usize,
    p: u64,
    seed: u64,
) -> usize {
    assert!(p < (1u64 << 32), "modulus too large for u64 products");
    let nrows = rows.len();
    if nrows == 0 || ncols == 0 {
        return 0;
    }
    // Unreduced accumulators sum at most max(nrows, ncols) terms below p.
    assert!(nrows.max(ncols) < (1 << 31), "dimension overflows accumulators");
    let reduce = |v: i64| -> u64 { v.rem_euclid(p as i64) as u64 };
    // CSR copy with entries reduced once up front.
    let mut row_ptr = Vec::with_capacity(nrows + 1);
    let mut col_ix: Vec<u32> = Vec::new();
    let mut val: Vec<u64> = Vec::new();
    row_ptr.push(0usize);
    for row in rows {
        for &(c, v) in row {
            let v = reduce(v);
            if v != 0 {
                col_ix.push(c);
                val.push(v);
            }
        }
        row_ptr.push(col_ix.len());
    }

    let mut state = seed;
    let mut unit = || 1 + splitmix64(&mut state) % (p - 1);
    let d1: Vec<u64> = (0..ncols).map(|_| unit()).collect();
    // Row preconditioner enters squared (once per side of B^T B).
    let d2sq: Vec<u64> = (0..nrows).map(|_| { let x = unit(); mulmod(x, x, p) }).collect();
    let u: Vec<u64> = (0..ncols).map(|_| splitmix64(&mut state) % p).collect();
    let mut w: Vec<u64> = (0..ncols).map(|_| splitmix64(&mut state) % p).collect();

    let mut t = vec![0u64; nrows];
    let mut z = vec![0u64; ncols];
    let steps = 2 * ncols + 2;
    let mut seq = Vec::with_capacity(steps);
    for _ in 0..steps {
        // Sums of terms below p fit u64 (dimension assert above); mod once.
        let dot: u64 = u.iter().zip(&w).map(|(&a, &b)| mulmod(a, b, p)).sum();
        seq.push(dot % p);
        // w <- D1 B^T D2^2 B D1 w, fusing D1 into the read and write.
        for r in 0..nrows {
            let mut acc = 0u64;
            for k in row_ptr[r]..row_ptr[r + 1] {
                let x = mulmod(d1[col_ix[k] as usize], w[col_ix[k] as usize], p);
                let e = val[k];
                acc += if e == 1 {
                    x
                } else if e == p - 1 {
                    p - x
                } else {
                    mulmod(e, x, p)
                };
            }
            t[r] = mulmod(acc % p, d2sq[r], p);
        }
        z.iter_mut().for_each(|c| *c = 0);
        for r in 0..nrows {
            let x = t[r];
            if x == 0 {
                continue;
            }
            for k in row_ptr[r]..row_ptr[r + 1] {
                let e = val[k];
                z[col_ix[k] as usize] += if e == 1 {
                    x
                } else if e == p - 1 {
                    p - x
                } else {
                    mulmod(e, x, p)
                };
            }
        }
        for (wc, (&zc, &dc)) in w.iter_mut().zip(z.iter().zip(&d1)) {
            *wc = mulmod(zc % p, dc, p);
        }
    }

    // Generator f(y) = y^l + c[1] y^(l-1) + ... + c[l]; strip the power of y.
    let c = berlekamp_massey_modp(&seq, p);
    let l = c.len() - 1;
    let ord = c.iter().rev().take_while(|&&x| x == 0).count();
    l - ord.min(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Cpx, Rat, DEFAULT_TOL};
    use num_traits::Zero;

    fn rat(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    fn rat_rows(rows: &[&[i64]]) -> Vec<Vec<Rat>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| rat(v)).collect())
            .collect()
    }

    #[test]
    fn tracker_counts_independent_rows() {
        let mut t: EchelonTracker<Rat> = EchelonTracker::new(3, 0.0);
        assert!(t.insert(vec![(0, rat(1)), (1, rat(2))]).is_none());
        assert!(t.insert(vec![(1, rat(1)), (2, rat(1))]).is_none());
        // (2, 4, 2) = 2*(1,2,0) + 2*(0,1,1) - 2*(0,0,... ) check dependence:
        // 2*(1,2,0) + 0*(0,1,1) = (2,4,0); (2,4,2) - that = (0,0,2) independent.
        assert!(t.insert(vec![(0, rat(2)), (1, rat(4)), (2, rat(2))]).is_none());
        assert_eq!(t.rank(), 3);
        let dep = t.insert(vec![(0, rat(1)), (1, rat(1)), (2, rat(1))]);
        assert_eq!(dep, Some(vec![]));
        assert_eq!(t.rank(), 3);
    }

    #[test]
    fn tracker_tail_reports_dependence_combination() {
        // Columns 0..2 are the block; 2.. the bookkeeping tail.
        let mut t: EchelonTracker<Rat> = EchelonTracker::new(2, 0.0);
        assert!(t.insert(vec![(0, rat(1)), (1, rat(1)), (2, rat(1))]).is_none());
        let tail = t
            .insert(vec![(0, rat(2)), (1, rat(2)), (3, rat(1))])
            .expect("block part is dependent");
        assert_eq!(tail, vec![(2, rat(-2)), (3, rat(1))]);
    }

    #[test]
    fn sparse_kernel_vectors_annihilate() {
        // 2x4 matrix of rank 2 => kernel dimension 2.
        let m: SparseMat<Rat> = SparseMat::from_triplets(
            2,
            4,
            [
                (0, 0, rat(1)),
                (0, 1, rat(1)),
                (0, 2, rat(1)),
                (1, 1, rat(1)),
                (1, 3, rat(1)),
            ],
        );
        let ker = kernel_sparse(&m, 0.0);
        assert_eq!(ker.len(), 2);
        for v in &ker {
            let mut dense = vec![Rat::from_integer(0.into()); 4];
            for (c, x) in v {
                dense[*c as usize] = x.clone();
            }
            let image = m.mul_vec(&dense);
            assert!(image.iter().all(num_traits::Zero::is_zero));
        }
    }

    #[test]
    fn dense_rank_and_kernel_are_consistent() {
        let m = rat_rows(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        assert_eq!(rank_dense(m.clone(), 0.0), 2);
        let ker = kernel_dense(m.clone(), 3, 0.0);
        assert_eq!(ker.len(), 1);
        for v in &ker {
            for row in &m {
                let dot = row
                    .iter()
                    .zip(v)
                    .fold(rat(0), |acc, (a, b)| acc + a.clone() * b.clone());
                assert!(dot.is_zero());
            }
        }
    }

    #[test]
    fn determinant_signs_and_singularity() {
        assert_eq!(det_dense(rat_rows(&[&[0, 1], &[1, 0]]), 0.0), rat(-1));
        assert_eq!(det_dense(rat_rows(&[&[2, 1], &[4, 2]]), 0.0), rat(0));
        assert_eq!(
            det_dense(rat_rows(&[&[1, 2, 0], &[0, 1, 3], &[4, 0, 1]]), 0.0),
            rat(25)
        );
    }

    #[test]
    fn float_rank_tolerates_noise() {
        let eps = 1e-13;
        let m = vec![
            vec![Cpx::new(1.0, 0.0), Cpx::new(2.0, 0.0)],
            vec![Cpx::new(2.0, eps), Cpx::new(4.0, -eps)],
        ];
        assert_eq!(rank_dense(m, DEFAULT_TOL), 1);
    }

    #[test]
    fn modp_rank_matches_rational_rank() {
        let rows = vec![
            vec![(0, 1), (1, 2), (2, 3)],
            vec![(0, 2), (1, 4), (2, 6)],
            vec![(1, 1), (3, 5)],
            vec![(0, 1), (3, -5), (2, 3)],
        ];
        let dense = rat_rows(&[&[1, 2, 3, 0], &[2, 4, 6, 0], &[0, 1, 0, 5], &[1, 0, 3, -5]]);
        let want = rank_dense(dense, 0.0);
        assert_eq!(rank_sparse_modp(rows, 4, 1_000_000_007), want);
    }

    #[test]
    fn berlekamp_massey_recovers_fibonacci_recurrence() {
        let p = MERSENNE31;
        let mut s = vec![1u64, 1];
        for i in 2..24 {
            s.push((s[i - 1] + s[i - 2]) % p);
        }
        // s_n - s_{n-1} - s_{n-2} = 0.
        assert_eq!(berlekamp_massey_modp(&s, p), vec![1, p - 1, p - 1]);
    }

    #[test]
    fn krylov_bound_matches_elimination_on_fixed_systems() {
        let cases: Vec<(Vec<Vec<(u32, i64)>>, usize)> = vec![
            // Rank 2 with a duplicated row.
            (
                vec![
                    vec![(0, 1), (1, 2), (2, 3)],
                    vec![(0, 2), (1, 4), (2, 6)],
                    vec![(1, 1), (3, 5)],
                    vec![(0, 1), (3, -5), (2, 3)],
                ],
                4,
            ),
            // Signs only, rectangular, rank 3.
            (
                vec![
                    vec![(0, 1), (1, -1)],
                    vec![(1, 1), (2, -1)],
                    vec![(2, 1), (3, -1)],
                    vec![(0, 1), (3, -1)],
                    vec![(0, -1), (2, 1)],
                ],
                4,
            ),
            // Zero matrix.
            (vec![vec![], vec![]], 3),
            // Full rank square.
            (
                vec![vec![(0, 1)], vec![(1, 7)], vec![(2, -2)]],
                3,
            ),
        ];
        for (rows, ncols) in cases {
            let want = rank_sparse_modp(rows.clone(), ncols, MERSENNE31);
            for p in [MERSENNE31, 1_000_000_007] {
                assert_eq!(rank_lower_bound_modp(&rows, ncols, p, 7), want);
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn krylov_bound_never_exceeds_elimination_rank(
            entries in proptest::collection::vec(-2i64..=2, 20),
            seed in 0u64..1u64 << 48,
        ) {
            let rows: Vec<Vec<(u32, i64)>> = entries
                .chunks(5)
                .map(|ch| {
                    ch.iter()
                        .enumerate()
                        .filter(|(_, &v)| v != 0)
                        .map(|(c, &v)| (c as u32, v))
                        .collect()
                })
                .collect();
            let rank = rank_sparse_modp(rows.clone(), 5, MERSENNE31);
            let bound = rank_lower_bound_modp(&rows, 5, MERSENNE31, seed);
            proptest::prop_assert!(bound <= rank);
        }

        #[test]
        fn dense_and_modp_ranks_agree_on_small_integers(
            entries in proptest::collection::vec(-4i64..=4, 16)
        ) {
            // Minors of a 4x4 with entries in [-4,4] are far below the
            // modulus, so mod-p rank equals rational rank here.
            let dense: Vec<Vec<Rat>> = entries
                .chunks(4)
                .map(|ch| ch.iter().map(|&v| rat(v)).collect())
                .collect();
            let sparse: Vec<Vec<(u32, i64)>> = entries
                .chunks(4)
                .map(|ch| {
                    ch.iter()
                        .enumerate()
                        .filter(|(_, &v)| v != 0)
                        .map(|(c, &v)| (c as u32, v))
                        .collect()
                })
                .collect();
            let dr = rank_dense(dense, 0.0);
            let mr = rank_sparse_modp(sparse, 4, 1_000_000_007);
            proptest::prop_assert_eq!(dr, mr);
        }

        #[test]
        fn kernel_rank_sums_to_ncols(
            entries in proptest::collection::vec(-3i64..=3, 12)
        ) {
            let m: SparseMat<Rat> = SparseMat::from_triplets(
                3,
                4,
                entries.chunks(4).enumerate().flat_map(|(r, ch)| {
                    ch.iter()
                        .enumerate()
                        .map(move |(c, &v)| (r as u32, c as u32, rat(v)))
                        .collect::<Vec<_>>()
                }),
            );
            let rank = rank_sparse(&m, 0.0);
            let ker = kernel_sparse(&m, 0.0).len();
            proptest::prop_assert_eq!(rank + ker, 4);
        }
    }
}
