//! The divided-power superalgebra O(m, n) = O(m) (x) Lambda(n).
//!
//! A monomial `x^(alpha) x^u` stores the even exponents `alpha` (each at most
//! p-1) and the odd factors as a bitmask `u` (bit k is variable m+1+k). Odd
//! factors are written in increasing index order. Variables are indexed from 1:
//! `1..=m` even, `m+1..=m+n` odd.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{domain, Error, Result};
use crate::exactla::Matrix;
use crate::scalars::{Fe, Field};

pub const MAX_EVEN: usize = 8;
pub const MAX_ODD: usize = 16;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial {
    pub alpha: [u8; MAX_EVEN],
    pub mask: u16,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { alpha: [0; MAX_EVEN], mask: 0 };

    /// Total degree with every variable of weight 1.
    pub fn std_degree(&self) -> u32 {
        self.alpha.iter().map(|&a| a as u32).sum::<u32>() + self.mask.count_ones()
    }

    pub fn parity(&self) -> u8 {
        (self.mask.count_ones() & 1) as u8
    }

    pub fn is_one(&self) -> bool {
        *self == Monomial::ONE
    }
}

/// Graded, then reverse lexicographic on `alpha`, then mask as an integer.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.std_degree()
            .cmp(&other.std_degree())
            .then_with(|| self.alpha.iter().rev().cmp(other.alpha.iter().rev()))
            .then_with(|| self.mask.cmp(&other.mask))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A super polynomial: a finite sum of monomials with nonzero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<Monomial, Fe>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn term(mono: Monomial, c: Fe) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(mono, c);
        }
        p
    }

    pub fn constant(c: Fe) -> Poly {
        Poly::term(Monomial::ONE, c)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Fe)> {
        self.terms.iter()
    }

    pub fn coeff(&self, mono: &Monomial) -> Fe {
        self.terms.get(mono).copied().unwrap_or(Fe::ZERO)
    }

    pub fn add_term(&mut self, f: &Field, mono: Monomial, c: Fe) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(mono).or_insert(Fe::ZERO);
        *e = f.add(*e, c);
        if e.is_zero() {
            self.terms.remove(&mono);
        }
    }

    pub fn add_scaled(&mut self, f: &Field, other: &Poly, c: Fe) {
        if c.is_zero() {
            return;
        }
        for (m, &v) in &other.terms {
            self.add_term(f, *m, f.mul(v, c));
        }
    }

    pub fn add(&self, f: &Field, other: &Poly) -> Poly {
        let mut r = self.clone();
        r.add_scaled(f, other, Fe::ONE);
        r
    }

    pub fn sub(&self, f: &Field, other: &Poly) -> Poly {
        let mut r = self.clone();
        r.add_scaled(f, other, f.from_i64(-1));
        r
    }

    pub fn scale(&self, f: &Field, c: Fe) -> Poly {
        let mut r = Poly::zero();
        r.add_scaled(f, self, c);
        r
    }

    /// Drops the constant term.
    pub fn without_constant(mut self) -> Poly {
        self.terms.remove(&Monomial::ONE);
        self
    }

    pub fn remove(&mut self, mono: &Monomial) {
        self.terms.remove(mono);
    }
}

/// Arithmetic context for O(m, n) over a field.
///
/// With `contact` set the last even variable `x_m` (written `z`) has degree 2,
/// as needed for the contact family.
#[derive(Clone, Debug)]
pub struct Superspace {
    m: usize,
    n: usize,
    field: Field,
    contact: bool,
    /// binom[a * p + b] = C(a + b, a) mod p, for a + b < p.
    binom: Vec<Fe>,
}

impl Superspace {
    pub fn new(field: Field, m: usize, n: usize, contact: bool) -> Result<Superspace> {
        if m > MAX_EVEN || n > MAX_ODD {
            return Err(Error::Parameter(format!("at most {MAX_EVEN} even and {MAX_ODD} odd variables are supported")));
        }
        if contact && m == 0 {
            return Err(Error::Parameter("the contact grading needs an even variable".into()));
        }
        let p = field.characteristic() as usize;
        let mut pascal = vec![vec![0u64; p]; p];
        for (i, row) in pascal.iter_mut().enumerate() {
            row[0] = 1;
            row[i] = 1;
        }
        for i in 1..p {
            for j in 1..i {
                pascal[i][j] = (pascal[i - 1][j - 1] + pascal[i - 1][j]) % p as u64;
            }
        }
        let mut binom = vec![Fe::ZERO; p * p];
        for a in 0..p {
            for b in 0..p - a {
                binom[a * p + b] = field.from_i64(pascal[a + b][a] as i64);
            }
        }
        Ok(Superspace { m, n, field, contact, binom })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.field.characteristic()
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_contact(&self) -> bool {
        self.contact
    }

    pub fn num_vars(&self) -> usize {
        self.m + self.n
    }

    pub fn var_parity(&self, i: usize) -> u8 {
        u8::from(i > self.m)
    }

    pub fn var_degree(&self, i: usize) -> i32 {
        if self.contact && i == self.m {
            2
        } else {
            1
        }
    }

    /// Degree in the grading of this space.
    pub fn degree(&self, mono: &Monomial) -> i32 {
        let s = mono.std_degree() as i32;
        if self.contact {
            s + mono.alpha[self.m - 1] as i32
        } else {
            s
        }
    }

    /// Highest degree of a monomial.
    pub fn xi(&self) -> i32 {
        let p1 = self.p() as i32 - 1;
        (self.m as i32 + i32::from(self.contact)) * p1 + self.n as i32
    }

    pub fn num_monomials(&self) -> usize {
        (self.p() as usize).pow(self.m as u32) << self.n
    }

    /// Dense index of a monomial in `0..num_monomials()`.
    #[inline]
    pub fn mono_id(&self, mono: &Monomial) -> usize {
        let p = self.p() as usize;
        let mut id = mono.mask as usize;
        for i in (0..self.m).rev() {
            id = id * p + mono.alpha[i] as usize;
        }
        id
    }

    pub fn mono_from_id(&self, mut id: usize) -> Monomial {
        let p = self.p() as usize;
        let mut mono = Monomial::ONE;
        for i in 0..self.m {
            mono.alpha[i] = (id % p) as u8;
            id /= p;
        }
        mono.mask = id as u16;
        mono
    }

    /// Every monomial, sorted by degree and then by the monomial order.
    pub fn monomials(&self) -> Vec<Monomial> {
        let mut all: Vec<Monomial> = (0..self.num_monomials()).map(|id| self.mono_from_id(id)).collect();
        all.sort_by(|a, b| self.degree(a).cmp(&self.degree(b)).then_with(|| a.cmp(b)));
        all
    }

    pub fn monomials_of_degree(&self, d: i32) -> Vec<Monomial> {
        self.monomials().into_iter().filter(|m| self.degree(m) == d).collect()
    }

    pub fn check_var(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.m + self.n {
            return domain(format!("variable index {i} outside 1..={}", self.m + self.n));
        }
        Ok(())
    }

    pub fn variable(&self, i: usize) -> Monomial {
        let mut mono = Monomial::ONE;
        if i <= self.m {
            mono.alpha[i - 1] = 1;
        } else {
            mono.mask = 1 << (i - self.m - 1);
        }
        mono
    }

    pub fn var_poly(&self, i: usize) -> Poly {
        Poly::term(self.variable(i), Fe::ONE)
    }

    /// `x^(pi) x^(omega)`, the monomial of highest degree.
    pub fn top(&self) -> Monomial {
        let mut mono = Monomial::ONE;
        for i in 0..self.m {
            mono.alpha[i] = (self.p() - 1) as u8;
        }
        mono.mask = if self.n == 0 { 0 } else { ((1u32 << self.n) - 1) as u16 };
        mono
    }

    /// Builds a monomial from explicit exponents and odd indices (1-based).
    pub fn monomial(&self, alpha: &[u8], odd: &[usize]) -> Result<Monomial> {
        if alpha.len() != self.m {
            return domain(format!("expected {} even exponents", self.m));
        }
        let mut mono = Monomial::ONE;
        for (i, &a) in alpha.iter().enumerate() {
            if a as u32 >= self.p() {
                return domain(format!("exponent {a} exceeds p-1"));
            }
            mono.alpha[i] = a;
        }
        for &j in odd {
            if j <= self.m || j > self.m + self.n {
                return domain(format!("{j} is not an odd variable"));
            }
            let bit = 1u16 << (j - self.m - 1);
            if mono.mask & bit != 0 {
                return domain(format!("odd variable {j} repeated"));
            }
            mono.mask |= bit;
        }
        Ok(mono)
    }

    /// Product of two monomials, `None` when it vanishes.
    #[inline]
    pub fn mul_mono(&self, a: &Monomial, b: &Monomial) -> Option<(Fe, Monomial)> {
        if a.mask & b.mask != 0 {
            return None;
        }
        let p = self.p() as usize;
        let f = &self.field;
        let mut c = Fe::ONE;
        let mut out = Monomial { alpha: [0; MAX_EVEN], mask: a.mask | b.mask };
        for i in 0..self.m {
            let (x, y) = (a.alpha[i] as usize, b.alpha[i] as usize);
            if x + y >= p {
                return None;
            }
            if x != 0 && y != 0 {
                c = f.mul(c, self.binom[x * p + y]);
                if c.is_zero() {
                    return None;
                }
            }
            out.alpha[i] = (x + y) as u8;
        }
        if merge_sign_odd(a.mask, b.mask) {
            c = f.neg(c);
        }
        Some((c, out))
    }

    /// `d_i` applied to a monomial, `None` when it vanishes.
    #[inline]
    pub fn derive_mono(&self, i: usize, a: &Monomial) -> Option<(Fe, Monomial)> {
        let mut out = *a;
        if i <= self.m {
            if a.alpha[i - 1] == 0 {
                return None;
            }
            out.alpha[i - 1] -= 1;
            Some((Fe::ONE, out))
        } else {
            let k = i - self.m - 1;
            let bit = 1u16 << k;
            if a.mask & bit == 0 {
                return None;
            }
            out.mask &= !bit;
            let before = (a.mask & (bit - 1)).count_ones();
            let c = if before & 1 == 1 { self.field.from_i64(-1) } else { Fe::ONE };
            Some((c, out))
        }
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        let f = &self.field;
        let mut r = Poly::zero();
        for (ma, &ca) in a.terms() {
            for (mb, &cb) in b.terms() {
                if let Some((c, mono)) = self.mul_mono(ma, mb) {
                    r.add_term(f, mono, f.mul(f.mul(ca, cb), c));
                }
            }
        }
        r
    }

    pub fn derive(&self, i: usize, a: &Poly) -> Poly {
        let f = &self.field;
        let mut r = Poly::zero();
        for (mono, &c) in a.terms() {
            if let Some((s, out)) = self.derive_mono(i, mono) {
                r.add_term(f, out, f.mul(s, c));
            }
        }
        r
    }

    /// Eigenvalue of the degree derivation `sum x_i d_i` on a monomial. With
    /// `skip_last_even` the term `x_m d_m` is omitted.
    pub fn euler_weight(&self, mono: &Monomial, skip_last_even: bool) -> Fe {
        let mut w: u32 = mono.mask.count_ones();
        for i in 0..self.m {
            if !(skip_last_even && i == self.m - 1) {
                w += mono.alpha[i] as u32;
            }
        }
        self.field.from_i64(w as i64)
    }

    /// `sum x_i d_i (a)`, over all variables or omitting `x_m`.
    pub fn degree_derivation(&self, a: &Poly, skip_last_even: bool) -> Poly {
        let f = &self.field;
        let mut r = Poly::zero();
        for (mono, &c) in a.terms() {
            r.add_term(f, *mono, f.mul(c, self.euler_weight(mono, skip_last_even)));
        }
        r
    }

    /// `2a - D(a)` with `D` omitting `x_m`.
    pub fn delta(&self, a: &Poly) -> Poly {
        let f = &self.field;
        let mut r = Poly::zero();
        for (mono, &c) in a.terms() {
            let w = f.sub(f.from_i64(2), self.euler_weight(mono, true));
            r.add_term(f, *mono, f.mul(c, w));
        }
        r
    }

    /// Homogeneous degree and parity, if `a` is homogeneous and nonzero.
    pub fn homogeneity(&self, a: &Poly) -> Option<(i32, u8)> {
        let mut it = a.terms();
        let (first, _) = it.next()?;
        let key = (self.degree(first), first.parity());
        for (mono, _) in it {
            if (self.degree(mono), mono.parity()) != key {
                return None;
            }
        }
        Some(key)
    }

    /// `a^(k) = a^k / k!` for an even `a` without constant term and `k < p`.
    pub fn divided_power(&self, a: &Poly, k: u32) -> Poly {
        let f = &self.field;
        if k == 0 {
            return Poly::constant(Fe::ONE);
        }
        let mut r = a.clone();
        for _ in 1..k {
            r = self.mul(&r, a);
        }
        r.scale(f, f.inv_factorial(k))
    }

    /// Checks that `images[i-1]`, the image of `x_i`, is homogeneous of the
    /// degree and parity of `x_i`, and that the linear parts form an invertible
    /// matrix.
    pub fn substitution(&self, images: Vec<Poly>) -> Result<Substitution> {
        let nv = self.num_vars();
        if images.len() != nv {
            return Err(Error::Dimension(format!("{} images for {nv} variables", images.len())));
        }
        let mut lin = Matrix::zeros(nv, nv);
        for (k, img) in images.iter().enumerate() {
            let i = k + 1;
            match self.homogeneity(img) {
                Some((d, par)) if d == self.var_degree(i) && par == self.var_parity(i) => {}
                _ => return domain(format!("image of x_{i} is not homogeneous of the degree and parity of x_{i}")),
            }
            for j in 1..=nv {
                lin.set(k, j - 1, img.coeff(&self.variable(j)));
            }
        }
        if lin.rank(&self.field) != nv {
            return domain("substitution is not invertible");
        }
        let p = self.p();
        let mut powers = Vec::with_capacity(self.m);
        for img in images.iter().take(self.m) {
            let mut row = vec![Poly::constant(Fe::ONE)];
            for k in 1..p {
                row.push(self.divided_power(img, k));
            }
            powers.push(row);
        }
        Ok(Substitution { images, powers })
    }

    /// Substitution `x_i -> sum_j rows[i][j] x_j`, a linear change of variables.
    pub fn linear_substitution(&self, rows: &Matrix) -> Result<Substitution> {
        let nv = self.num_vars();
        if rows.rows() != nv || rows.cols() != nv {
            return Err(Error::Dimension("linear substitution must be square".into()));
        }
        let f = &self.field;
        let images = (0..nv)
            .map(|i| {
                let mut img = Poly::zero();
                for j in 0..nv {
                    img.add_term(f, self.variable(j + 1), rows.get(i, j));
                }
                img
            })
            .collect();
        self.substitution(images)
    }

    pub fn substitute(&self, s: &Substitution, a: &Poly) -> Poly {
        let f = &self.field;
        let mut r = Poly::zero();
        for (mono, &c) in a.terms() {
            let mut acc = Poly::constant(c);
            for i in 0..self.m {
                let k = mono.alpha[i] as usize;
                if k > 0 {
                    acc = self.mul(&acc, &s.powers[i][k]);
                }
            }
            for k in 0..self.n {
                if mono.mask & (1 << k) != 0 {
                    acc = self.mul(&acc, &s.images[self.m + k]);
                }
            }
            r.add_scaled(f, &acc, Fe::ONE);
        }
        r
    }
}

/// `true` when bringing `x^u x^v` into increasing order flips the sign.
#[inline]
fn merge_sign_odd(u: u16, v: u16) -> bool {
    let mut inversions = 0u32;
    let mut rest = v;
    while rest != 0 {
        let b = rest.trailing_zeros();
        inversions += (u as u32 >> (b + 1)).count_ones();
        rest &= rest - 1;
    }
    inversions & 1 == 1
}

/// An even endomorphism of O(m, n) given by the images of the generators.
#[derive(Clone, Debug)]
pub struct Substitution {
    images: Vec<Poly>,
    /// powers[i][k] = image(x_{i+1})^(k)
    powers: Vec<Vec<Poly>>,
}

impl Substitution {
    pub fn image(&self, i: usize) -> &Poly {
        &self.images[i - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::Field;

    fn space(p: u32, m: usize, n: usize) -> Superspace {
        Superspace::new(Field::prime(p).unwrap(), m, n, false).unwrap()
    }

    fn factorial(k: u64) -> u64 {
        (1..=k).product()
    }

    #[test]
    fn divided_power_product() {
        let s = space(5, 2, 2);
        let a = s.monomial(&[1, 0], &[]).unwrap();
        let b = s.monomial(&[2, 0], &[]).unwrap();
        let (c, out) = s.mul_mono(&a, &b).unwrap();
        assert_eq!(c, s.field().from_i64(3));
        assert_eq!(out, s.monomial(&[3, 0], &[]).unwrap());
        let c4 = s.monomial(&[4, 0], &[]).unwrap();
        assert!(s.mul_mono(&c4, &a).is_none());
    }

    #[test]
    fn odd_products_anticommute() {
        let s = space(5, 2, 2);
        let f = s.field();
        let x3 = s.var_poly(3);
        let x4 = s.var_poly(4);
        assert_eq!(s.mul(&x4, &x3), s.mul(&x3, &x4).scale(f, f.from_i64(-1)));
        assert!(s.mul(&x3, &x3).is_zero());
        let x34 = s.mul(&x3, &x4);
        assert_eq!(s.derive(4, &x34), x3.scale(f, f.from_i64(-1)));
        assert_eq!(s.derive(3, &x34), x4);
    }

    #[test]
    fn product_matches_factorial_oracle() {
        // x^(a) x^(b) = (a+b)!/(a! b!) x^(a+b), computed over the integers.
        let s = space(7, 3, 0);
        for a in s.monomials() {
            for b in s.monomials() {
                let mut coeff: u64 = 1;
                let mut overflow = false;
                for i in 0..3 {
                    let (x, y) = (a.alpha[i] as u64, b.alpha[i] as u64);
                    if x + y > 6 {
                        overflow = true;
                    }
                    coeff *= factorial(x + y) / (factorial(x) * factorial(y));
                }
                match s.mul_mono(&a, &b) {
                    None => assert!(overflow || coeff.is_multiple_of(7)),
                    Some((c, _)) => assert_eq!(c, s.field().from_i64((coeff % 7) as i64)),
                }
            }
        }
    }

    #[test]
    fn sign_matches_permutation_oracle() {
        let s = space(5, 1, 4);
        let f = s.field();
        for u in 0u16..16 {
            for v in 0u16..16 {
                if u & v != 0 {
                    continue;
                }
                let mut seq: Vec<u32> = (0..4).filter(|k| u >> k & 1 == 1).collect();
                seq.extend((0..4).filter(|k| v >> k & 1 == 1));
                let mut inv = 0;
                for i in 0..seq.len() {
                    for j in i + 1..seq.len() {
                        if seq[i] > seq[j] {
                            inv += 1;
                        }
                    }
                }
                let a = Monomial { mask: u, ..Monomial::ONE };
                let b = Monomial { mask: v, ..Monomial::ONE };
                let (c, _) = s.mul_mono(&a, &b).unwrap();
                assert_eq!(c, f.from_i64(if inv % 2 == 0 { 1 } else { -1 }));
            }
        }
    }

    #[test]
    fn id_roundtrip_and_ordering() {
        let s = space(5, 2, 2);
        for id in 0..s.num_monomials() {
            assert_eq!(s.mono_id(&s.mono_from_id(id)), id);
        }
        let all = s.monomials();
        assert_eq!(all.len(), 100);
        assert!(all[0].is_one());
        assert_eq!(*all.last().unwrap(), s.top());
        assert_eq!(s.xi(), 10);
    }

    #[test]
    fn contact_grading() {
        let s = Superspace::new(Field::prime(5).unwrap(), 3, 2, true).unwrap();
        let z = s.variable(3);
        assert_eq!(s.degree(&z), 2);
        assert_eq!(s.xi(), 18);
        let zp = s.var_poly(3);
        assert_eq!(s.delta(&zp), zp.scale(s.field(), s.field().from_i64(2)));
        let x1 = s.var_poly(1);
        assert_eq!(s.delta(&x1), x1);
    }

    #[test]
    fn linear_form_divided_power() {
        let s = space(5, 2, 2);
        let f = s.field();
        let mut img1 = s.var_poly(1);
        img1.add_term(f, s.variable(2), Fe::ONE);
        let images = vec![img1, s.var_poly(2), s.var_poly(3), s.var_poly(4)];
        let sub = s.substitution(images).unwrap();
        let x1sq = Poly::term(s.monomial(&[2, 0], &[]).unwrap(), Fe::ONE);
        let mut want = Poly::zero();
        for alpha in [[2u8, 0], [1, 1], [0, 2]] {
            want.add_term(f, s.monomial(&alpha, &[]).unwrap(), Fe::ONE);
        }
        assert_eq!(s.substitute(&sub, &x1sq), want);
    }

    #[test]
    fn substitution_rejects_parity_mixing() {
        let s = space(5, 2, 2);
        let f = s.field();
        let mut img = s.var_poly(1);
        img.add_term(f, s.variable(3), Fe::ONE);
        let images = vec![img, s.var_poly(2), s.var_poly(3), s.var_poly(4)];
        assert!(s.substitution(images).is_err());
    }
}
