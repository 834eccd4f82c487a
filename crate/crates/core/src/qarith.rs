//! q-arithmetic: Pochhammer products, Gaussian binomials, subspace counts,
//! cell sizes, and dual eigenvalues.
//!
//! Everything here is exact integer/rational arithmetic; no floating point.
//! Conventions: `[m n]_q = 0` whenever `n < 0`, `m < 0`, or `n > m`, and the
//! one-row bracket `[m]_q = [m 1]_q` vanishes for `m <= 0`.  These zero
//! extensions let coefficient formulas be evaluated verbatim on boundary
//! indices.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::{Int, Rat};

/// `q^e` as an exact rational, supporting negative exponents.
pub fn q_pow(q: u64, e: i64) -> Rat {
    let base = Int::from(q);
    if e >= 0 {
        Rat::from_integer(base.pow(e as u32))
    } else {
        Rat::new(Int::one(), base.pow((-e) as u32))
    }
}

/// `q^e` as an exact integer; `e >= 0`.
pub fn q_pow_int(q: u64, e: u32) -> Int {
    Int::from(q).pow(e)
}

/// q-Pochhammer `(α; q)_i = ∏_{ℓ=0}^{i-1} (1 - α q^ℓ)`.
pub fn q_pochhammer(alpha: &Rat, i: u32, q: u64) -> Rat {
    let mut acc = Rat::one();
    let mut factor = alpha.clone();
    let qr = Rat::from_integer(Int::from(q));
    for _ in 0..i {
        acc *= Rat::one() - &factor;
        factor *= &qr;
    }
    acc
}

/// `(q)_m = (q; q)_m = ∏_{k=1}^{m} (1 - q^k)`, an integer.
pub fn poch_q(q: u64, m: u32) -> Int {
    let mut acc = Int::one();
    let mut qk = Int::from(q);
    let qi = Int::from(q);
    for _ in 0..m {
        acc *= Int::one() - &qk;
        qk *= &qi;
    }
    acc
}

/// Gaussian binomial `[m n]_q`, zero outside `0 <= n <= m`.
pub fn gaussian_binomial(m: i64, n: i64, q: u64) -> Int {
    assert!(q >= 2, "field order must be at least 2");
    if n < 0 || m < 0 || n > m {
        return Int::zero();
    }
    let n = n.min(m - n);
    let mut num = Int::one();
    let mut den = Int::one();
    for i in 1..=n {
        num *= q_pow_int(q, (m - n + i) as u32) - Int::one();
        den *= q_pow_int(q, i as u32) - Int::one();
    }
    let (quot, rem) = num_integer::Integer::div_rem(&num, &den);
    debug_assert!(rem.is_zero(), "Gaussian binomial must divide exactly");
    quot
}

/// One-column bracket `[m]_q = [m 1]_q = 1 + q + ... + q^{m-1}`, zero for `m <= 0`.
pub fn bracket(m: i64, q: u64) -> Int {
    gaussian_binomial(m, 1, q)
}

/// Total number of subspaces of `F_q^n`: `s_q(n) = Σ_k [n k]_q`.
pub fn subspace_count(n: u32, q: u64) -> Int {
    (0..=n as i64)
        .map(|k| gaussian_binomial(n as i64, k, q))
        .sum()
}

/// Size of the cell `P_{i,j}`: the `(i+j)`-dimensional subspaces `y` of
/// `F_q^{a+b}` with `dim(x ∩ y) = i` for the fixed `a`-dimensional `x`.
pub fn cell_size_pair(a: i64, b: i64, i: i64, j: i64, q: u64) -> Int {
    if i < 0 || j < 0 || i > a || j > b {
        return Int::zero();
    }
    q_pow_int(q, ((a - i) * j) as u32)
        * gaussian_binomial(a, i, q)
        * gaussian_binomial(b, j, q)
}

/// Size of the cell `P̃_{i,j,k}` in the extended ambient `F_q^{a+b+1}`:
/// `i = dim(x ∩ y)`, `i + j = dim(H ∩ y)`, `k = dim y - dim(H ∩ y) ∈ {0,1}`.
pub fn cell_size_triple(a: i64, b: i64, i: i64, j: i64, k: i64, q: u64) -> Int {
    if i < 0 || j < 0 || i > a || j > b || !(0..=1).contains(&k) {
        return Int::zero();
    }
    q_pow_int(q, ((a - i) * j + (a + b - i - j) * k) as u32)
        * gaussian_binomial(a, i, q)
        * gaussian_binomial(b, j, q)
}

/// Dual eigenvalue `θ_i = q [D]_q [D+1]_q - [i]_q [2D-i+2]_q` for `0 <= i <= D`.
pub fn theta(q: u64, big_d: u32, i: u32) -> Result<Int> {
    if i > big_d {
        return Err(Error::domain(format!(
            "theta index {i} outside 0..={big_d}"
        )));
    }
    let d = big_d as i64;
    Ok(Int::from(q) * bracket(d, q) * bracket(d + 1, q)
        - bracket(i as i64, q) * bracket(2 * d - i as i64 + 2, q))
}

/// Binomial coefficient `C(n, 2)`, zero for `n < 2`.
pub fn choose2(n: i64) -> i64 {
    if n < 2 {
        0
    } else {
        n * (n - 1) / 2
    }
}

/// Exact integer extraction for a rational that must be a whole number.
pub fn rat_to_int(r: &Rat, context: &str) -> Result<Int> {
    if r.is_integer() {
        Ok(r.to_integer())
    } else {
        Err(Error::inconsistency(format!(
            "{context}: expected integer, got {r}"
        )))
    }
}

/// Exact positive-integer extraction (counts, multiplicities, dimensions).
pub fn rat_to_positive_int(r: &Rat, context: &str) -> Result<Int> {
    let n = rat_to_int(r, context)?;
    if n.is_positive() {
        Ok(n)
    } else {
        Err(Error::inconsistency(format!(
            "{context}: expected positive integer, got {n}"
        )))
    }
}
