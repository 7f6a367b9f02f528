//! Prime fields GF(p) and their quadratic extensions GF(p^2).
//!
//! Elements are stored as coordinate pairs `c0 + c1*s` where `s^2 = t` for the
//! least quadratic non-residue `t` mod p. Over a prime field `c1` is always 0.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// A field element. Only meaningful together with the [`Field`] that made it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fe {
    pub c0: u32,
    pub c1: u32,
}

impl Fe {
    pub const ZERO: Fe = Fe { c0: 0, c1: 0 };
    pub const ONE: Fe = Fe { c0: 1, c1: 0 };

    #[inline]
    pub fn is_zero(self) -> bool {
        self.c0 == 0 && self.c1 == 0
    }
}

/// GF(p) or GF(p^2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Field {
    p: u32,
    /// Non-residue `t` with `s^2 = t`; `None` for the prime field.
    t: Option<u32>,
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn legendre(a: u32, p: u32) -> bool {
    let a = a % p;
    if a == 0 {
        return true;
    }
    pow_mod(a as u64, ((p - 1) / 2) as u64, p as u64) == 1
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Builds GF(p), or GF(p^2) when `need_roots` is set and one of `sqrt(-1)`,
/// `sqrt(2)` is missing mod p.
pub fn make_field(p: u32, need_roots: bool) -> Result<Field> {
    let f = Field::prime(p)?;
    if !need_roots || (legendre(p - 1, p) && legendre(2, p)) {
        return Ok(f);
    }
    Ok(f.quadratic_extension())
}

impl Field {
    /// GF(p) for a prime `p > 3`.
    pub fn prime(p: u32) -> Result<Field> {
        if p <= 3 || !is_prime(p as u64) {
            return Err(Error::Parameter(format!("characteristic must be a prime greater than 3, got {p}")));
        }
        if p > 46_000 {
            return Err(Error::Parameter(format!("prime {p} is too large")));
        }
        Ok(Field { p, t: None })
    }

    /// GF(p^2) = GF(p)[s]/(s^2 - t) with `t` the least non-residue.
    pub fn quadratic_extension(self) -> Field {
        let t = (2..self.p).find(|&a| !legendre(a, self.p)).expect("odd prime has a non-residue");
        Field { p: self.p, t: Some(t) }
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        if self.t.is_some() {
            2
        } else {
            1
        }
    }

    /// Number of elements.
    pub fn order(&self) -> u64 {
        (self.p as u64).pow(self.degree())
    }

    /// The constant `t` of the defining polynomial `s^2 - t`, if an extension.
    pub fn nonresidue(&self) -> Option<u32> {
        self.t
    }

    pub fn name(&self) -> String {
        format!("GF({})", self.order())
    }

    /// Defining polynomial, e.g. `s^2 - 2`, or `-` for a prime field.
    pub fn polynomial(&self) -> String {
        match self.t {
            Some(t) => format!("s^2 - {t}"),
            None => "-".to_string(),
        }
    }

    #[inline]
    pub fn zero(&self) -> Fe {
        Fe::ZERO
    }

    #[inline]
    pub fn one(&self) -> Fe {
        Fe::ONE
    }

    #[inline]
    pub fn from_i64(&self, v: i64) -> Fe {
        Fe { c0: v.rem_euclid(self.p as i64) as u32, c1: 0 }
    }

    /// `c0 + c1*s`; `c1` must be 0 over a prime field.
    pub fn element(&self, c0: i64, c1: i64) -> Result<Fe> {
        let e = Fe { c0: c0.rem_euclid(self.p as i64) as u32, c1: c1.rem_euclid(self.p as i64) as u32 };
        if e.c1 != 0 && self.t.is_none() {
            return Err(Error::Domain(format!("{} has no element with s-coordinate", self.name())));
        }
        Ok(e)
    }

    pub fn contains(&self, a: Fe) -> bool {
        a.c0 < self.p && a.c1 < self.p && (self.t.is_some() || a.c1 == 0)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let p = self.p;
        let mut c0 = a.c0 + b.c0;
        if c0 >= p {
            c0 -= p;
        }
        let mut c1 = a.c1 + b.c1;
        if c1 >= p {
            c1 -= p;
        }
        Fe { c0, c1 }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        let p = self.p;
        Fe { c0: if a.c0 == 0 { 0 } else { p - a.c0 }, c1: if a.c1 == 0 { 0 } else { p - a.c1 } }
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        let p = self.p as u64;
        match self.t {
            None => Fe { c0: ((a.c0 as u64 * b.c0 as u64) % p) as u32, c1: 0 },
            Some(t) => {
                let (a0, a1, b0, b1) = (a.c0 as u64, a.c1 as u64, b.c0 as u64, b.c1 as u64);
                let c0 = (a0 * b0 + (a1 * b1 % p) * t as u64) % p;
                let c1 = (a0 * b1 + a1 * b0) % p;
                Fe { c0: c0 as u32, c1: c1 as u32 }
            }
        }
    }

    /// `acc + a*b`.
    #[inline]
    pub fn mul_add(&self, acc: Fe, a: Fe, b: Fe) -> Fe {
        self.add(acc, self.mul(a, b))
    }

    pub fn pow(&self, a: Fe, mut e: u64) -> Fe {
        let mut r = Fe::ONE;
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let p = self.p as u64;
        match self.t {
            None => Ok(Fe { c0: pow_mod(a.c0 as u64, p - 2, p) as u32, c1: 0 }),
            Some(t) => {
                // (a0 + a1 s)^-1 = (a0 - a1 s) / (a0^2 - t a1^2)
                let (a0, a1) = (a.c0 as u64, a.c1 as u64);
                let norm = (a0 * a0 % p + p - (a1 * a1 % p) * t as u64 % p) % p;
                let ni = pow_mod(norm, p - 2, p);
                Ok(Fe { c0: (a0 * ni % p) as u32, c1: ((p - a1) % p * ni % p) as u32 })
            }
        }
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn is_square(&self, a: Fe) -> bool {
        a.is_zero() || self.pow(a, (self.order() - 1) / 2) == Fe::ONE
    }

    /// Canonical square root: the root with the lexicographically smallest
    /// coordinate pair `(c0, c1)`.
    pub fn sqrt(&self, a: Fe) -> Result<Fe> {
        if a.is_zero() {
            return Ok(Fe::ZERO);
        }
        let p = self.p;
        if a.c1 == 0 {
            if let Some(r) = (1..p).find(|&r| (r as u64 * r as u64 % p as u64) as u32 == a.c0) {
                return Ok(Fe { c0: r.min(p - r), c1: 0 });
            }
            if let Some(t) = self.t {
                // a = t * k^2, root = k s
                let q = self.div(a, Fe { c0: t, c1: 0 })?;
                if let Some(k) = (1..p).find(|&k| (k as u64 * k as u64 % p as u64) as u32 == q.c0) {
                    return Ok(Fe { c0: 0, c1: k.min(p - k) });
                }
            }
            return Err(Error::NoSquareRoot(self.format(a), self.name()));
        }
        self.elements().find(|&r| self.mul(r, r) == a).ok_or_else(|| Error::NoSquareRoot(self.format(a), self.name()))
    }

    pub fn sqrt_minus_one(&self) -> Result<Fe> {
        self.sqrt(self.from_i64(-1))
    }

    pub fn sqrt_two(&self) -> Result<Fe> {
        self.sqrt(self.from_i64(2))
    }

    /// All elements in lexicographic coordinate order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> + '_ {
        let p = self.p;
        let n1 = if self.t.is_some() { p } else { 1 };
        (0..p).flat_map(move |c0| (0..n1).map(move |c1| Fe { c0, c1 }))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        let c0 = rng.random_range(0..self.p);
        let c1 = if self.t.is_some() { rng.random_range(0..self.p) } else { 0 };
        Fe { c0, c1 }
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        loop {
            let a = self.random(rng);
            if !a.is_zero() {
                return a;
            }
        }
    }

    /// Human readable form, `3`, `2s` or `1+4s`.
    pub fn format(&self, a: Fe) -> String {
        match (a.c0, a.c1) {
            (c0, 0) => format!("{c0}"),
            (0, c1) => format!("{c1}s"),
            (c0, c1) => format!("{c0}+{c1}s"),
        }
    }

    /// Inverse of `k!` for `k < p`.
    pub fn inv_factorial(&self, k: u32) -> Fe {
        let mut f = Fe::ONE;
        for i in 2..=k {
            f = self.mul(f, self.from_i64(i as i64));
        }
        self.inv(f).expect("k < p")
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_characteristic() {
        for p in [0, 1, 2, 3, 4, 9, 15] {
            assert!(Field::prime(p).is_err(), "p={p}");
        }
        assert!(make_field(4, true).is_err());
    }

    #[test]
    fn extension_choice() {
        assert_eq!(make_field(5, true).unwrap().order(), 25);
        assert_eq!(make_field(7, true).unwrap().order(), 49);
        assert_eq!(make_field(17, true).unwrap().order(), 17);
        assert_eq!(make_field(5, false).unwrap().order(), 5);
        assert_eq!(make_field(5, true).unwrap().nonresidue(), Some(2));
        assert_eq!(make_field(7, true).unwrap().nonresidue(), Some(3));
    }

    #[test]
    fn roots_square_correctly() {
        for p in [5, 7, 11, 13, 17] {
            let f = make_field(p, true).unwrap();
            let i = f.sqrt_minus_one().unwrap();
            let r2 = f.sqrt_two().unwrap();
            assert_eq!(f.mul(i, i), f.from_i64(-1));
            assert_eq!(f.mul(r2, r2), f.from_i64(2));
        }
    }

    #[test]
    fn sqrt_is_canonical_exhaustively() {
        for p in [5, 7] {
            for f in [Field::prime(p).unwrap(), make_field(p, true).unwrap()] {
                for a in f.elements() {
                    let roots: Vec<Fe> = f.elements().filter(|&r| f.mul(r, r) == a).collect();
                    match f.sqrt(a) {
                        Ok(r) => assert_eq!(Some(&r), roots.iter().min()),
                        Err(_) => assert!(roots.is_empty()),
                    }
                    assert_eq!(f.is_square(a), !roots.is_empty());
                }
            }
        }
    }

    #[test]
    fn inverse_and_division_by_zero() {
        let f = make_field(7, true).unwrap();
        for a in f.elements().filter(|a| !a.is_zero()) {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), Fe::ONE);
        }
        assert!(matches!(f.inv(Fe::ZERO), Err(Error::DivisionByZero)));
    }
}
