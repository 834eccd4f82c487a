//! Scalar abstraction over the two coefficient regimes.
//!
//! Everything defined over the rationals runs on exact [`Rat`]; character
//! sums over fields with odd characteristic need complex roots of unity and
//! run on [`Cpx`] with a tolerance.  The linear-algebra layer is generic
//! over this trait so both regimes share one implementation.

use num_traits::{One, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::{Cpx, Int, Rat};

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True when arithmetic is exact and zero tests need no tolerance.
    const EXACT: bool;

    fn from_i64(n: i64) -> Self;

    fn from_rat(r: &Rat) -> Self;

    /// Complex conjugate (identity on real scalars).
    fn conj(&self) -> Self;

    /// Magnitude estimate used for pivot selection and zero thresholds.
    fn magnitude(&self) -> f64;

    /// Zero test: exact equality for exact scalars, `|x| <= tol` otherwise.
    fn is_negligible(&self, tol: f64) -> bool;

    /// Primitive `p`-th root of unity raised to the `k`-th power.
    ///
    /// Exact scalars only support `p <= 2`; `None` signals the caller to
    /// switch to the complex regime.
    fn root_of_unity(p: u64, k: u64) -> Option<Self>;

    /// Nearest integer if within `tol`, else `None`.
    fn to_integer(&self, tol: f64) -> Option<Int>;
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn from_i64(n: i64) -> Self {
        Rat::from_integer(Int::from(n))
    }

    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }

    fn conj(&self) -> Self {
        self.clone()
    }

    fn magnitude(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.to_f64().map(f64::abs).unwrap_or(f64::INFINITY)
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn root_of_unity(p: u64, k: u64) -> Option<Self> {
        match p {
            1 => Some(Rat::one()),
            2 => Some(if k % 2 == 0 { Rat::one() } else { -Rat::one() }),
            _ => None,
        }
    }

    fn to_integer(&self, _tol: f64) -> Option<Int> {
        if self.is_integer() {
            Some(self.to_integer())
        } else {
            None
        }
    }
}

impl Scalar for Cpx {
    const EXACT: bool = false;

    fn from_i64(n: i64) -> Self {
        Cpx::new(n as f64, 0.0)
    }

    fn from_rat(r: &Rat) -> Self {
        use num_traits::ToPrimitive;
        Cpx::new(r.to_f64().expect("rational out of f64 range"), 0.0)
    }

    fn conj(&self) -> Self {
        Cpx::new(self.re, -self.im)
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    fn root_of_unity(p: u64, k: u64) -> Option<Self> {
        let angle = 2.0 * std::f64::consts::PI * (k % p) as f64 / p as f64;
        Some(Cpx::new(angle.cos(), angle.sin()))
    }

    fn to_integer(&self, tol: f64) -> Option<Int> {
        if self.im.abs() > tol {
            return None;
        }
        let rounded = self.re.round();
        if (self.re - rounded).abs() > tol {
            return None;
        }
        Some(Int::from(rounded as i64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_roots_of_unity_are_signs() {
        assert_eq!(<Rat as Scalar>::root_of_unity(2, 0), Some(Rat::one()));
        assert_eq!(<Rat as Scalar>::root_of_unity(2, 3), Some(-Rat::one()));
        assert_eq!(<Rat as Scalar>::root_of_unity(3, 1), None);
    }

    #[test]
    fn complex_third_roots_sum_to_zero() {
        let sum: Cpx = (0..3)
            .map(|k| <Cpx as Scalar>::root_of_unity(3, k).unwrap())
            .fold(Cpx::zero(), |a, b| a + b);
        assert!(sum.is_negligible(1e-12));
    }

    #[test]
    fn integer_snap_respects_tolerance() {
        let z = Cpx::new(4.0 + 1e-9, -1e-9);
        assert_eq!(z.to_integer(1e-6), Some(Int::from(4)));
        let w = Cpx::new(4.01, 0.0);
        assert_eq!(w.to_integer(1e-6), None);
    }
}
