//! Small finite fields `F_q` with table-driven arithmetic.
//!
//! Elements are indices `0..q`.  For prime `q` the index is the residue
//! itself; for `q = p^e` the index encodes a polynomial over `F_p` in base-p
//! digits (constant digit first), reduced modulo a fixed irreducible monic
//! polynomial (the lexicographically smallest one, so the construction is
//! deterministic).  Intended for desk-scale `q`; tables are `q x q`.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct GfField {
    pub q: u16,
    pub p: u16,
    pub e: u8,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
    /// Field trace `Tr(x) = x + x^p + ... + x^{p^{e-1}}` as an `F_p` residue.
    trace: Vec<u16>,
}

fn is_prime(n: u16) -> bool {
    if n < 2 {
        return false;
    }
    let n = n as u32;
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Multiply polynomials over F_p and reduce modulo `modulus` (monic, degree e).
fn polymul_mod(x: &[u16], y: &[u16], modulus: &[u16], p: u16) -> Vec<u16> {
    let e = modulus.len() - 1;
    let mut prod = vec![0u16; x.len() + y.len()];
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0 {
            continue;
        }
        for (j, &yj) in y.iter().enumerate() {
            prod[i + j] = (prod[i + j] + xi * yj) % p;
        }
    }
    for d in (e..prod.len()).rev() {
        let c = prod[d];
        if c == 0 {
            continue;
        }
        prod[d] = 0;
        for (k, &mk) in modulus.iter().enumerate().take(e) {
            let idx = d - e + k;
            prod[idx] = (prod[idx] + c * (p - mk % p)) % p;
        }
    }
    prod.truncate(e.max(1));
    prod
}

fn digits(mut n: u16, p: u16, e: u8) -> Vec<u16> {
    let mut out = Vec::with_capacity(e as usize);
    for _ in 0..e {
        out.push(n % p);
        n /= p;
    }
    out
}

fn undigits(ds: &[u16], p: u16) -> u16 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Smallest monic irreducible polynomial of degree `e >= 2` over `F_p`,
/// as coefficients constant-first including the leading 1.
fn find_irreducible(p: u16, e: u8) -> Vec<u16> {
    debug_assert!(e >= 2);
    let pe = (p as u32).pow(e as u32);
    'cand: for low in 0..pe {
        let mut coeffs = digits(low as u16, p, e);
        coeffs.push(1);
        // A reducible monic polynomial has a monic factor of degree <= e/2.
        for d in 1..=e / 2 {
            let pd = (p as u32).pow(d as u32);
            for dl in 0..pd {
                let mut div = digits(dl as u16, p, d);
                div.push(1);
                if poly_divides(&div, &coeffs, p) {
                    continue 'cand;
                }
            }
        }
        return coeffs;
    }
    unreachable!("irreducible polynomial of degree {e} over F_{p} exists");
}

fn poly_divides(d: &[u16], n: &[u16], p: u16) -> bool {
    let mut rem: Vec<u16> = n.to_vec();
    let dd = d.len() - 1;
    while rem.len() > dd {
        let lead = *rem.last().unwrap();
        if lead != 0 {
            let shift = rem.len() - 1 - dd;
            // d is monic, so the quotient coefficient is `lead`.
            for (k, &dk) in d.iter().enumerate() {
                let idx = shift + k;
                rem[idx] = (rem[idx] + lead * (p - dk % p)) % p;
            }
        }
        rem.pop();
    }
    rem.iter().all(|&c| c == 0)
}

impl GfField {
    pub fn new(q: u64) -> Result<GfField> {
        if q < 2 || q > 512 {
            return Err(Error::domain(format!("field order {q} unsupported")));
        }
        let q = q as u16;
        let (p, e) = {
            let mut p = 2u16;
            loop {
                if q % p == 0 {
                    break;
                }
                p += 1;
            }
            let mut e = 0u8;
            let mut n = q;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            if n != 1 {
                return Err(Error::domain(format!("{q} is not a prime power")));
            }
            (p, e)
        };
        debug_assert!(is_prime(p));

        let qs = q as usize;
        let mut add = vec![0u16; qs * qs];
        let mut mul = vec![0u16; qs * qs];
        let mut neg = vec![0u16; qs];
        let mut inv = vec![0u16; qs];
        let mut trace = vec![0u16; qs];

        if e == 1 {
            for x in 0..q {
                neg[x as usize] = (q - x) % q;
                trace[x as usize] = x;
                for y in 0..q {
                    add[x as usize * qs + y as usize] = (x + y) % q;
                    mul[x as usize * qs + y as usize] =
                        ((x as u32 * y as u32) % q as u32) as u16;
                }
            }
        } else {
            let modulus = find_irreducible(p, e);
            for x in 0..q {
                let xd = digits(x, p, e);
                let negd: Vec<u16> = xd.iter().map(|&c| (p - c) % p).collect();
                neg[x as usize] = undigits(&negd, p);
                for y in 0..q {
                    let yd = digits(y, p, e);
                    let sum: Vec<u16> = xd
                        .iter()
                        .zip(&yd)
                        .map(|(&a, &b)| (a + b) % p)
                        .collect();
                    add[x as usize * qs + y as usize] = undigits(&sum, p);
                    let prod = polymul_mod(&xd, &yd, &modulus, p);
                    mul[x as usize * qs + y as usize] = undigits(&prod, p);
                }
            }
            for x in 0..q {
                // Tr(x) = x + x^p + ... + x^{p^{e-1}} lies in F_p, so summing
                // constant digits of the Frobenius images gives its residue.
                let xd = digits(x, p, e);
                let mut tr = xd[0];
                let mut frob = xd;
                for _ in 1..e {
                    let base = frob.clone();
                    for _ in 1..p {
                        frob = polymul_mod(&frob, &base, &modulus, p);
                    }
                    tr = (tr + frob[0]) % p;
                }
                trace[x as usize] = tr;
            }
        }

        for x in 1..q {
            let mut found = 0u16;
            for y in 1..q {
                if mul[x as usize * qs + y as usize] == 1 {
                    found = y;
                    break;
                }
            }
            debug_assert_ne!(found, 0, "every nonzero element has an inverse");
            inv[x as usize] = found;
        }

        Ok(GfField {
            q,
            p,
            e,
            add,
            mul,
            neg,
            inv,
            trace,
        })
    }

    #[inline]
    pub fn add(&self, x: u16, y: u16) -> u16 {
        self.add[x as usize * self.q as usize + y as usize]
    }

    #[inline]
    pub fn mul(&self, x: u16, y: u16) -> u16 {
        self.mul[x as usize * self.q as usize + y as usize]
    }

    #[inline]
    pub fn neg(&self, x: u16) -> u16 {
        self.neg[x as usize]
    }

    #[inline]
    pub fn inv(&self, x: u16) -> u16 {
        debug_assert_ne!(x, 0, "zero has no inverse");
        self.inv[x as usize]
    }

    #[inline]
    pub fn sub(&self, x: u16, y: u16) -> u16 {
        self.add(x, self.neg(y))
    }

    /// Field trace into `F_p`, as a residue `0..p`.
    #[inline]
    pub fn trace(&self, x: u16) -> u16 {
        self.trace[x as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_field_axioms(f: &GfField) {
        let q = f.q;
        for x in 0..q {
            assert_eq!(f.add(x, 0), x);
            assert_eq!(f.mul(x, 1), x);
            assert_eq!(f.add(x, f.neg(x)), 0);
            if x != 0 {
                assert_eq!(f.mul(x, f.inv(x)), 1);
            }
            for y in 0..q {
                assert_eq!(f.add(x, y), f.add(y, x));
                assert_eq!(f.mul(x, y), f.mul(y, x));
                for z in 0..q {
                    assert_eq!(f.mul(x, f.add(y, z)), f.add(f.mul(x, y), f.mul(x, z)));
                }
            }
        }
    }

    #[test]
    fn prime_fields() {
        for q in [2u64, 3, 5, 7] {
            check_field_axioms(&GfField::new(q).unwrap());
        }
    }

    #[test]
    fn prime_power_fields() {
        for q in [4u64, 8, 9] {
            let f = GfField::new(q).unwrap();
            check_field_axioms(&f);
            // Multiplicative group is cyclic of order q-1: some generator exists.
            let order = |g: u16| {
                let mut x = g;
                let mut n = 1;
                while x != 1 {
                    x = f.mul(x, g);
                    n += 1;
                }
                n
            };
            assert!((1..f.q).any(|g| order(g) == f.q - 1));
        }
    }

    #[test]
    fn non_prime_power_rejected() {
        assert!(GfField::new(6).is_err());
        assert!(GfField::new(1).is_err());
    }

    #[test]
    fn trace_is_additive_and_onto() {
        for q in [4u64, 9] {
            let f = GfField::new(q).unwrap();
            for x in 0..f.q {
                for y in 0..f.q {
                    assert_eq!(
                        f.trace(f.add(x, y)),
                        (f.trace(x) + f.trace(y)) % f.p
                    );
                }
            }
            // The trace form is non-degenerate: some element has nonzero trace.
            assert!((0..f.q).any(|x| f.trace(x) != 0));
        }
    }
}
