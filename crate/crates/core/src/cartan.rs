//! The Cartan-type superalgebras W, S, H, K over a finite field.
//!
//! Every algebra has an ordered basis sorted by degree, so each graded
//! component `L_d` is a contiguous index range. Elements of S are stored in
//! coordinates of an echelonized basis living inside W. H is realized on
//! monomials of degree `1..xi-1` of O (constants are dropped), K on all of O
//! with `z = x_m` of degree 2.

use std::fmt;
use std::ops::RangeInclusive;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use dashmap::DashMap;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exactla::{GradedSubspace, HomVec, Matrix, Subspace};
use crate::scalars::{make_field, Fe, Field};
use crate::superspace::{Monomial, Poly, Substitution, Superspace};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    W,
    S,
    H,
    K,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::W, Family::S, Family::H, Family::K];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::W => "W",
            Family::S => "S",
            Family::H => "H",
            Family::K => "K",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Family::W => 0,
            Family::S => 1,
            Family::H => 2,
            Family::K => 3,
        }
    }

    pub fn from_code(c: u8) -> Option<Family> {
        Family::ALL.get(c as usize).copied()
    }

    /// H and K need `sqrt(-1)` and `sqrt(2)` in the field.
    pub fn needs_roots(self) -> bool {
        matches!(self, Family::H | Family::K)
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Family> {
        match s.trim().to_ascii_uppercase().as_str() {
            "W" => Ok(Family::W),
            "S" => Ok(Family::S),
            "H" => Ok(Family::H),
            "K" => Ok(Family::K),
            other => Err(Error::Parameter(format!("unknown family {other:?}"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a basis vector is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisLabel {
    /// `x^mono d_var` in W.
    Field { mono: Monomial, var: usize },
    /// The class of a monomial (H, K).
    Poly { mono: Monomial },
    /// An echelon row of S, named by its leading W basis vector.
    Row { mono: Monomial, var: usize },
}

/// A vector field `sum_i coeffs[i-1] d_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    pub coeffs: Vec<Poly>,
}

impl VectorField {
    pub fn zero(nv: usize) -> VectorField {
        VectorField { coeffs: vec![Poly::zero(); nv] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add_scaled(&mut self, f: &Field, other: &VectorField, c: Fe) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            a.add_scaled(f, b, c);
        }
    }

    /// `g * self`.
    pub fn left_mul(&self, sp: &Superspace, g: &Poly) -> VectorField {
        VectorField { coeffs: self.coeffs.iter().map(|c| sp.mul(g, c)).collect() }
    }
}

/// A sparse element of one algebra; terms sorted by basis index, no zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Element {
    algebra: u64,
    terms: Vec<(usize, Fe)>,
}

impl Element {
    pub fn terms(&self) -> &[(usize, Fe)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn algebra_id(&self) -> u64 {
        self.algebra
    }
}

#[derive(Clone, Copy, Debug)]
struct Component {
    degree: i32,
    offset: usize,
    dim: usize,
}

/// Structure constants `[e_a, e_b]` for `a in L_i`, `b in L_j`, in local
/// coordinates of `L_{i+j}`.
pub struct Block {
    dj: usize,
    offsets: Vec<u32>,
    entries: Vec<(u32, Fe)>,
}

impl Block {
    #[inline]
    pub fn get(&self, a: usize, b: usize) -> &[(u32, Fe)] {
        let k = a * self.dj + b;
        &self.entries[self.offsets[k] as usize..self.offsets[k + 1] as usize]
    }
}

pub struct CartanAlgebra {
    id: u64,
    family: Family,
    m: usize,
    n: usize,
    space: Superspace,
    labels: Vec<BasisLabel>,
    parity: Vec<u8>,
    degree_of: Vec<i32>,
    comps: Vec<Component>,
    /// W: mono_id * nv + var - 1 -> basis index.
    field_index: Vec<u32>,
    /// H, K: mono_id -> basis index.
    poly_index: Vec<u32>,
    /// S: the ambient W and the echelon rows, per degree, in local W coordinates.
    ambient: Option<Box<CartanAlgebra>>,
    s_rows: Vec<Subspace>,
    blocks: DashMap<(i32, i32), Arc<Block>>,
}

const NONE: u32 = u32::MAX;

impl fmt::Debug for CartanAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Builds `family(m, n)` over GF(p), or over `make_field(p, true)` for H and K.
pub fn build(family: Family, p: u32, m: usize, n: usize) -> Result<CartanAlgebra> {
    let field = make_field(p, family.needs_roots())?;
    build_algebra(family, m, n, field)
}

pub fn build_algebra(family: Family, m: usize, n: usize, field: Field) -> Result<CartanAlgebra> {
    if m < 2 || n < 2 {
        return Err(Error::Parameter(format!("need m, n >= 2, got m={m}, n={n}")));
    }
    match family {
        Family::H if !m.is_multiple_of(2) => return Err(Error::Parameter(format!("H needs m even, got {m}"))),
        Family::K if m.is_multiple_of(2) => return Err(Error::Parameter(format!("K needs m odd, got {m}"))),
        _ => {}
    }
    if family.needs_roots() && (field.sqrt_minus_one().is_err() || field.sqrt_two().is_err()) {
        return Err(Error::Parameter(format!("{} lacks sqrt(-1) or sqrt(2); use make_field(p, true)", field.name())));
    }
    let space = Superspace::new(field, m, n, family == Family::K)?;
    let alg = match family {
        Family::W => build_w(space),
        Family::S => build_s(space)?,
        Family::H | Family::K => build_poly(family, space),
    };
    Ok(alg)
}

fn empty(family: Family, space: Superspace) -> CartanAlgebra {
    CartanAlgebra {
        id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
        family,
        m: space.m(),
        n: space.n(),
        space,
        labels: Vec::new(),
        parity: Vec::new(),
        degree_of: Vec::new(),
        comps: Vec::new(),
        field_index: Vec::new(),
        poly_index: Vec::new(),
        ambient: None,
        s_rows: Vec::new(),
        blocks: DashMap::new(),
    }
}

fn set_components(alg: &mut CartanAlgebra, lo: i32, hi: i32) {
    let mut comps = Vec::new();
    let mut offset = 0;
    for d in lo..=hi {
        let dim = alg.degree_of[offset..].iter().take_while(|&&x| x == d).count();
        comps.push(Component { degree: d, offset, dim });
        offset += dim;
    }
    assert_eq!(offset, alg.labels.len(), "basis must be sorted by degree");
    alg.comps = comps;
}

fn build_w(space: Superspace) -> CartanAlgebra {
    let nv = space.num_vars();
    let mut items: Vec<(i32, Monomial, usize)> = Vec::new();
    for mono in space.monomials() {
        for var in 1..=nv {
            items.push((space.degree(&mono) - space.var_degree(var), mono, var));
        }
    }
    items.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut alg = empty(Family::W, space);
    alg.field_index = vec![NONE; alg.space.num_monomials() * nv];
    for (idx, &(d, mono, var)) in items.iter().enumerate() {
        alg.labels.push(BasisLabel::Field { mono, var });
        alg.parity.push((mono.parity() + alg.space.var_parity(var)) % 2);
        alg.degree_of.push(d);
        alg.field_index[alg.space.mono_id(&mono) * nv + var - 1] = idx as u32;
    }
    let hi = alg.space.xi() - 1;
    set_components(&mut alg, -1, hi);
    alg
}

fn build_s(space: Superspace) -> Result<CartanAlgebra> {
    let w = build_w(space.clone());
    let f = *space.field();
    let nv = space.num_vars();
    let mut alg = empty(Family::S, space);
    let mut rows = Vec::new();
    let mut lo = None;
    let mut hi = -1;
    for d in w.degrees() {
        let mut sub = Subspace::zero(w.comp_dim(d));
        for mono in w.space.monomials_of_degree(d + 2) {
            let a = Poly::term(mono, Fe::ONE);
            for i in 1..=nv {
                for j in 1..=nv {
                    let v = alg.space.d_ij(&a, i, j);
                    let e = w.from_vector_field(&v)?;
                    if !e.is_zero() {
                        sub.insert(&f, w.to_hom(&e)?.coords);
                    }
                }
            }
        }
        if sub.dim() > 0 {
            lo.get_or_insert(d);
            hi = d;
        }
        let off = w.comp_offset(d);
        for (r, &p) in sub.rows().iter().zip(sub.pivots()) {
            let BasisLabel::Field { mono, var } = w.labels[off + p] else { unreachable!() };
            alg.labels.push(BasisLabel::Row { mono, var });
            alg.parity.push(w.parity[off + p]);
            alg.degree_of.push(d);
            debug_assert!(r.iter().enumerate().all(|(k, x)| x.is_zero() || w.parity[off + k] == w.parity[off + p]));
        }
        rows.push(sub);
    }
    let lo = lo.unwrap_or(-1);
    // Keep one subspace per degree of S.
    alg.s_rows = rows.into_iter().skip((lo + 1) as usize).take((hi - lo + 1) as usize).collect();
    alg.ambient = Some(Box::new(w));
    set_components(&mut alg, lo, hi);
    Ok(alg)
}

/// `n - m - 3 = 0 mod p`, the case where the top of K is dropped.
pub fn k_drops_top(p: u32, m: usize, n: usize) -> bool {
    (n as i64 - m as i64 - 3).rem_euclid(p as i64) == 0
}

fn build_poly(family: Family, space: Superspace) -> CartanAlgebra {
    let xi = space.xi();
    let top = space.top();
    let drop_top = family == Family::H || k_drops_top(space.p(), space.m(), space.n());
    let monos: Vec<Monomial> =
        space.monomials().into_iter().filter(|mono| !(family == Family::H && mono.is_one()) && !(drop_top && *mono == top)).collect();
    let mut alg = empty(family, space);
    alg.poly_index = vec![NONE; alg.space.num_monomials()];
    for (idx, mono) in monos.iter().enumerate() {
        alg.labels.push(BasisLabel::Poly { mono: *mono });
        alg.parity.push(mono.parity());
        alg.degree_of.push(alg.space.degree(mono) - 2);
        alg.poly_index[alg.space.mono_id(mono)] = idx as u32;
    }
    let (lo, hi) = if family == Family::H { (-1, xi - 3) } else { (-2, xi - 2 - i32::from(drop_top)) };
    set_components(&mut alg, lo, hi);
    alg
}

impl CartanAlgebra {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.space.p()
    }

    pub fn field(&self) -> &Field {
        self.space.field()
    }

    pub fn space(&self) -> &Superspace {
        &self.space
    }

    /// The ambient W of an S algebra.
    pub fn ambient_w(&self) -> Option<&CartanAlgebra> {
        self.ambient.as_deref()
    }

    pub fn name(&self) -> String {
        format!("{}({},{}) over {}", self.family, self.m, self.n, self.field().name())
    }

    /// `r = floor(m/2)`.
    pub fn r(&self) -> usize {
        self.m / 2
    }

    /// 1 for W, S, H and 2 for K.
    pub fn depth(&self) -> i32 {
        -self.min_degree()
    }

    pub fn xi(&self) -> i32 {
        self.space.xi()
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn min_degree(&self) -> i32 {
        self.comps.first().map_or(0, |c| c.degree)
    }

    pub fn max_degree(&self) -> i32 {
        self.comps.last().map_or(-1, |c| c.degree)
    }

    pub fn degrees(&self) -> RangeInclusive<i32> {
        self.min_degree()..=self.max_degree()
    }

    fn comp(&self, d: i32) -> Option<&Component> {
        let k = d - self.min_degree();
        if k < 0 {
            return None;
        }
        self.comps.get(k as usize)
    }

    pub fn comp_dim(&self, d: i32) -> usize {
        self.comp(d).map_or(0, |c| c.dim)
    }

    pub fn comp_offset(&self, d: i32) -> usize {
        self.comp(d).map_or(self.dim(), |c| c.offset)
    }

    pub fn label(&self, idx: usize) -> BasisLabel {
        self.labels[idx]
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn parity_of(&self, idx: usize) -> u8 {
        self.parity[idx]
    }

    pub fn degree_of(&self, idx: usize) -> i32 {
        self.degree_of[idx]
    }

    /// Degree and local index of a basis vector.
    pub fn local(&self, idx: usize) -> (i32, usize) {
        let d = self.degree_of[idx];
        (d, idx - self.comp_offset(d))
    }

    /// Parity of local basis vector `k` of `L_d`.
    pub fn local_parity(&self, d: i32, k: usize) -> u8 {
        self.parity[self.comp_offset(d) + k]
    }

    /// Echelon rows of `S_d` in local W coordinates.
    pub fn s_rows(&self, d: i32) -> Option<&Subspace> {
        if self.family != Family::S {
            return None;
        }
        let k = d - self.min_degree();
        if k < 0 {
            return None;
        }
        self.s_rows.get(k as usize)
    }

    pub fn describe(&self, idx: usize) -> String {
        match self.labels[idx] {
            BasisLabel::Field { mono, var } => format!("{} d{}", self.describe_mono(&mono), var),
            BasisLabel::Row { mono, var } => format!("row[{} d{}]", self.describe_mono(&mono), var),
            BasisLabel::Poly { mono } => self.describe_mono(&mono),
        }
    }

    pub fn describe_mono(&self, mono: &Monomial) -> String {
        let mut s = String::new();
        if mono.alpha[..self.m].iter().any(|&a| a > 0) {
            let a: Vec<String> = mono.alpha[..self.m].iter().map(|x| x.to_string()).collect();
            s.push_str(&format!("x^({})", a.join(",")));
        }
        for k in 0..self.n {
            if mono.mask >> k & 1 == 1 {
                s.push_str(&format!("x{}", self.m + 1 + k));
            }
        }
        if s.is_empty() {
            s.push('1');
        }
        s
    }

    // ----- elements -----

    pub fn zero(&self) -> Element {
        Element { algebra: self.id, terms: Vec::new() }
    }

    pub fn basis_element(&self, idx: usize) -> Element {
        assert!(idx < self.dim(), "basis index out of range");
        Element { algebra: self.id, terms: vec![(idx, Fe::ONE)] }
    }

    pub fn element(&self, terms: impl IntoIterator<Item = (usize, Fe)>) -> Result<Element> {
        let f = self.field();
        let mut dense: std::collections::BTreeMap<usize, Fe> = Default::default();
        for (i, c) in terms {
            if i >= self.dim() {
                return domain(format!("basis index {i} out of range for {}", self.name()));
            }
            let e = dense.entry(i).or_insert(Fe::ZERO);
            *e = f.add(*e, c);
        }
        Ok(Element { algebra: self.id, terms: dense.into_iter().filter(|(_, c)| !c.is_zero()).collect() })
    }

    fn check(&self, a: &Element) -> Result<()> {
        if a.algebra != self.id {
            return domain("element belongs to a different algebra");
        }
        Ok(())
    }

    pub fn add(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        self.element(a.terms.iter().chain(&b.terms).copied())
    }

    pub fn scale(&self, a: &Element, c: Fe) -> Element {
        let f = self.field();
        Element { algebra: a.algebra, terms: a.terms.iter().map(|&(i, x)| (i, f.mul(x, c))).filter(|(_, x)| !x.is_zero()).collect() }
    }

    pub fn unit(&self, d: i32, k: usize) -> HomVec {
        let mut coords = vec![Fe::ZERO; self.comp_dim(d)];
        coords[k] = Fe::ONE;
        HomVec { degree: d, coords }
    }

    pub fn to_hom(&self, a: &Element) -> Result<HomVec> {
        self.check(a)?;
        let Some(&(first, _)) = a.terms.first() else {
            return domain("cannot place the zero element in a single degree");
        };
        let d = self.degree_of[first];
        let off = self.comp_offset(d);
        let mut coords = vec![Fe::ZERO; self.comp_dim(d)];
        for &(i, c) in &a.terms {
            if self.degree_of[i] != d {
                return domain("element is not homogeneous");
            }
            coords[i - off] = c;
        }
        Ok(HomVec { degree: d, coords })
    }

    pub fn from_hom(&self, v: &HomVec) -> Element {
        let off = self.comp_offset(v.degree);
        Element { algebra: self.id, terms: v.coords.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, &c)| (off + k, c)).collect() }
    }

    /// Splits an element into homogeneous components.
    pub fn homogeneous_parts(&self, a: &Element) -> Result<Vec<HomVec>> {
        self.check(a)?;
        let mut parts: Vec<HomVec> = Vec::new();
        for &(i, c) in &a.terms {
            let (d, k) = self.local(i);
            if parts.last().is_none_or(|p| p.degree != d) {
                parts.push(HomVec { degree: d, coords: vec![Fe::ZERO; self.comp_dim(d)] });
            }
            parts.last_mut().unwrap().coords[k] = c;
        }
        Ok(parts)
    }

    /// Random vector of `L_d`, optionally restricted to one parity.
    pub fn random_hom<R: Rng + ?Sized>(&self, rng: &mut R, d: i32, parity: Option<u8>) -> HomVec {
        let f = *self.field();
        let coords = (0..self.comp_dim(d))
            .map(|k| if parity.is_some_and(|p| p != self.local_parity(d, k)) { Fe::ZERO } else { f.random(rng) })
            .collect();
        HomVec { degree: d, coords }
    }

    // ----- brackets -----

    pub fn bracket(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        let f = self.field();
        let mut acc: std::collections::BTreeMap<usize, Fe> = Default::default();
        for pa in self.homogeneous_parts(a)? {
            for pb in self.homogeneous_parts(b)? {
                if let Some(r) = self.bracket_hom(&pa, &pb) {
                    let off = self.comp_offset(r.degree);
                    for (k, c) in r.coords.into_iter().enumerate() {
                        if !c.is_zero() {
                            let e = acc.entry(off + k).or_insert(Fe::ZERO);
                            *e = f.add(*e, c);
                        }
                    }
                }
            }
        }
        Ok(Element { algebra: self.id, terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() })
    }

    /// `[a, b]` for homogeneous dense vectors; `None` when `L_{i+j}` is absent.
    pub fn bracket_hom(&self, a: &HomVec, b: &HomVec) -> Option<HomVec> {
        let d = a.degree + b.degree;
        let dt = self.comp_dim(d);
        if dt == 0 {
            return None;
        }
        let block = self.block(a.degree, b.degree);
        let f = self.field();
        let mut out = vec![Fe::ZERO; dt];
        let nz_b: Vec<(usize, Fe)> = b.coords.iter().copied().enumerate().filter(|(_, c)| !c.is_zero()).collect();
        for (ia, &ca) in a.coords.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for &(ib, cb) in &nz_b {
                let entries = block.get(ia, ib);
                if entries.is_empty() {
                    continue;
                }
                let c = f.mul(ca, cb);
                for &(k, s) in entries {
                    let slot = &mut out[k as usize];
                    *slot = f.mul_add(*slot, c, s);
                }
            }
        }
        Some(HomVec { degree: d, coords: out })
    }

    /// `[e_a, e_b]` for basis indices, as sparse global terms.
    pub fn bracket_basis(&self, a: usize, b: usize) -> Vec<(usize, Fe)> {
        let (da, ka) = self.local(a);
        let (db, kb) = self.local(b);
        let d = da + db;
        if self.comp_dim(d) == 0 {
            return Vec::new();
        }
        let off = self.comp_offset(d);
        self.block(da, db).get(ka, kb).iter().map(|&(k, c)| (off + k as usize, c)).collect()
    }

    /// Memoized structure constants for `L_i x L_j`.
    pub fn block(&self, i: i32, j: i32) -> Arc<Block> {
        if let Some(b) = self.blocks.get(&(i, j)) {
            return Arc::clone(&b);
        }
        let b = Arc::new(self.compute_block(i, j));
        Arc::clone(self.blocks.entry((i, j)).or_insert(b).value())
    }

    fn compute_block(&self, i: i32, j: i32) -> Block {
        let (di, dj) = (self.comp_dim(i), self.comp_dim(j));
        let d = i + j;
        let dt = self.comp_dim(d);
        let f = *self.field();
        let mut offsets = Vec::with_capacity(di * dj + 1);
        let mut entries: Vec<(u32, Fe)> = Vec::new();
        offsets.push(0u32);
        let mut scratch = vec![Fe::ZERO; dt];
        let mut touched: Vec<usize> = Vec::new();
        let (oi, oj, ot) = (self.comp_offset(i), self.comp_offset(j), self.comp_offset(d));
        for a in 0..di {
            for b in 0..dj {
                if dt > 0 {
                    match self.family {
                        Family::S => self.s_raw(i, a, j, b, &mut scratch, &mut touched),
                        _ => {
                            let mut emit = |global: usize, c: Fe| {
                                let k = global - ot;
                                if scratch[k].is_zero() {
                                    touched.push(k);
                                }
                                scratch[k] = f.add(scratch[k], c);
                            };
                            match self.family {
                                Family::W => self.w_raw(oi + a, oj + b, &mut emit),
                                _ => self.poly_raw(oi + a, oj + b, &mut emit),
                            }
                        }
                    }
                    touched.sort_unstable();
                    touched.dedup();
                    for &k in &touched {
                        if !scratch[k].is_zero() {
                            entries.push((k as u32, scratch[k]));
                        }
                        scratch[k] = Fe::ZERO;
                    }
                    touched.clear();
                }
                offsets.push(entries.len() as u32);
            }
        }
        Block { dj, offsets, entries }
    }

    fn w_raw(&self, a: usize, b: usize, emit: &mut impl FnMut(usize, Fe)) {
        let sp = &self.space;
        let f = sp.field();
        let nv = sp.num_vars();
        let (BasisLabel::Field { mono: fa, var: i }, BasisLabel::Field { mono: gb, var: j }) = (self.labels[a], self.labels[b]) else {
            unreachable!("W basis")
        };
        // f d_i(g) d_j
        if let Some((c1, dg)) = sp.derive_mono(i, &gb) {
            if let Some((c2, prod)) = sp.mul_mono(&fa, &dg) {
                let idx = self.field_index[sp.mono_id(&prod) * nv + j - 1];
                emit(idx as usize, f.mul(c1, c2));
            }
        }
        // -(-1)^{|a||b|} g d_j(f) d_i
        if let Some((c1, df)) = sp.derive_mono(j, &fa) {
            if let Some((c2, prod)) = sp.mul_mono(&gb, &df) {
                let idx = self.field_index[sp.mono_id(&prod) * nv + i - 1];
                let mut c = f.neg(f.mul(c1, c2));
                if self.parity[a] & self.parity[b] == 1 {
                    c = f.neg(c);
                }
                emit(idx as usize, c);
            }
        }
    }

    fn s_raw(&self, i: i32, a: usize, j: i32, b: usize, scratch: &mut [Fe], touched: &mut Vec<usize>) {
        let w = self.ambient.as_deref().expect("S has an ambient W");
        let ra = HomVec { degree: i, coords: self.s_rows(i).unwrap().rows()[a].clone() };
        let rb = HomVec { degree: j, coords: self.s_rows(j).unwrap().rows()[b].clone() };
        let Some(v) = w.bracket_hom(&ra, &rb) else { return };
        let target = self.s_rows(i + j).unwrap();
        for (k, &p) in target.pivots().iter().enumerate() {
            if !v.coords[p].is_zero() {
                scratch[k] = v.coords[p];
                touched.push(k);
            }
        }
    }

    fn poly_raw(&self, a: usize, b: usize, emit: &mut impl FnMut(usize, Fe)) {
        let (BasisLabel::Poly { mono: ma }, BasisLabel::Poly { mono: mb }) = (self.labels[a], self.labels[b]) else {
            unreachable!("polynomial basis")
        };
        let f = *self.field();
        let mut acc: Vec<(Monomial, Fe)> = Vec::new();
        self.space.contact_bracket_terms(self.family == Family::K, &ma, &mb, &mut |mono, c| acc.push((mono, c)));
        // Merge equal monomials before looking up, so cancellations at the top
        // are seen.
        acc.sort_by_key(|x| x.0);
        let mut k = 0;
        while k < acc.len() {
            let mono = acc[k].0;
            let mut c = Fe::ZERO;
            while k < acc.len() && acc[k].0 == mono {
                c = f.add(c, acc[k].1);
                k += 1;
            }
            if c.is_zero() {
                continue;
            }
            let idx = self.poly_index[self.space.mono_id(&mono)];
            if idx == NONE {
                assert!(
                    self.family == Family::H && mono.is_one(),
                    "bracket in {} produced {} outside the basis",
                    self.name(),
                    self.describe_mono(&mono)
                );
                continue;
            }
            emit(idx as usize, c);
        }
    }

    // ----- W, S as vector fields -----

    pub fn to_vector_field(&self, a: &Element) -> Result<VectorField> {
        self.check(a)?;
        let f = self.field();
        let nv = self.space.num_vars();
        let mut v = VectorField::zero(nv);
        match self.family {
            Family::W => {
                for &(i, c) in &a.terms {
                    let BasisLabel::Field { mono, var } = self.labels[i] else { unreachable!() };
                    v.coeffs[var - 1].add_term(f, mono, c);
                }
            }
            Family::S => {
                let w = self.ambient_w().unwrap();
                for &(i, c) in &a.terms {
                    let (d, k) = self.local(i);
                    let row = &self.s_rows(d).unwrap().rows()[k];
                    let we = w.from_hom(&HomVec { degree: d, coords: row.clone() });
                    v.add_scaled(f, &w.to_vector_field(&we)?, c);
                }
            }
            _ => return domain("only W and S elements are vector fields here; use d_h or d_k"),
        }
        Ok(v)
    }

    /// The element of W (or S) equal to a vector field.
    pub fn from_vector_field(&self, v: &VectorField) -> Result<Element> {
        let nv = self.space.num_vars();
        if v.coeffs.len() != nv {
            return Err(Error::Dimension(format!("vector field has {} coefficients, expected {nv}", v.coeffs.len())));
        }
        match self.family {
            Family::W => {
                let mut terms = Vec::new();
                for (k, coeff) in v.coeffs.iter().enumerate() {
                    for (mono, &c) in coeff.terms() {
                        terms.push((self.field_index[self.space.mono_id(mono) * nv + k] as usize, c));
                    }
                }
                self.element(terms)
            }
            Family::S => {
                let w = self.ambient_w().unwrap();
                let we = w.from_vector_field(v)?;
                let mut terms = Vec::new();
                for part in w.homogeneous_parts(&we)? {
                    let Some(rows) = self.s_rows(part.degree) else {
                        return domain("vector field is not in S");
                    };
                    if !rows.contains(self.field(), &part.coords) {
                        return domain("vector field is not in S");
                    }
                    let off = self.comp_offset(part.degree);
                    for (k, c) in rows.coordinates(&part.coords).into_iter().enumerate() {
                        terms.push((off + k, c));
                    }
                }
                self.element(terms)
            }
            _ => domain("vector fields are elements of W or S only"),
        }
    }

    /// `div` of a W or S element.
    pub fn divergence(&self, a: &Element) -> Result<Poly> {
        Ok(self.space.divergence(&self.to_vector_field(a)?))
    }

    // ----- H, K as polynomials -----

    pub fn to_poly(&self, a: &Element) -> Result<Poly> {
        self.check(a)?;
        if !matches!(self.family, Family::H | Family::K) {
            return domain("only H and K elements are polynomials");
        }
        let f = self.field();
        let mut p = Poly::zero();
        for &(i, c) in &a.terms {
            let BasisLabel::Poly { mono } = self.labels[i] else { unreachable!() };
            p.add_term(f, mono, c);
        }
        Ok(p)
    }

    /// Class of a polynomial; constants are dropped in H.
    pub fn from_poly(&self, a: &Poly) -> Result<Element> {
        if !matches!(self.family, Family::H | Family::K) {
            return domain("only H and K elements are polynomials");
        }
        let mut terms = Vec::new();
        for (mono, &c) in a.terms() {
            let idx = self.poly_index[self.space.mono_id(mono)];
            if idx == NONE {
                if self.family == Family::H && mono.is_one() {
                    continue;
                }
                return domain(format!("{} is not in {}", self.describe_mono(mono), self.name()));
            }
            terms.push((idx as usize, c));
        }
        self.element(terms)
    }

    /// Basis index of the degree -1 element attached to variable `i`:
    /// `d_i` for W, S and `x_i` for H, K.
    pub fn var_basis_index(&self, i: usize) -> Result<usize> {
        self.space.check_var(i)?;
        let nv = self.space.num_vars();
        match self.family {
            Family::W => Ok(self.field_index[self.space.mono_id(&Monomial::ONE) * nv + i - 1] as usize),
            Family::S => {
                let w = self.ambient_w().unwrap();
                let widx = w.var_basis_index(i)?;
                let (_, k) = w.local(widx);
                let rows = self.s_rows(-1).unwrap();
                let pos = rows.pivots().iter().position(|&p| p == k).expect("S_-1 = W_-1");
                Ok(self.comp_offset(-1) + pos)
            }
            Family::H | Family::K => {
                if self.family == Family::K && i == self.m {
                    return domain("z is not in K_-1");
                }
                Ok(self.poly_index[self.space.mono_id(&self.space.variable(i))] as usize)
            }
        }
    }

    /// Variables spanning `L_-1`: all of them, except `z` for K.
    pub fn l_minus_one_vars(&self) -> Vec<usize> {
        let nv = self.space.num_vars();
        (1..=nv).filter(|&i| !(self.family == Family::K && i == self.m)).collect()
    }

    // ----- sigma and primes -----

    /// `sigma(i)`: -1 on `r+1..2r`, else 1.
    pub fn sigma(&self, i: usize) -> i64 {
        self.space.sigma(i)
    }

    /// `i'`: `i +- r` on the even part `1..2r`, else `i`.
    pub fn prime(&self, i: usize) -> usize {
        self.space.prime(i)
    }

    /// `D_H(a)` in x-coordinates.
    pub fn d_h(&self, a: &Poly) -> Result<VectorField> {
        if !matches!(self.family, Family::H | Family::K) {
            return domain("D_H is defined for H and K");
        }
        Ok(self.space.d_h(a, self.family == Family::K))
    }

    /// `D_H(a)` written in the y-coordinates `ys`.
    pub fn e_h(&self, a: &Poly, ys: &YCoords) -> Result<VectorField> {
        if !matches!(self.family, Family::H | Family::K) {
            return domain("E_H is defined for H and K");
        }
        let sp = &self.space;
        let f = sp.field();
        let mut out = VectorField::zero(sp.num_vars());
        for i in ys.index_set() {
            let di_a = ys.apply_d(sp, i, a);
            let mut signed = Poly::zero();
            for (mono, &c) in di_a.terms() {
                // |D_i| |a| with |a| the parity of the original term: D_i is
                // homogeneous, so the parity of a term of D_i(a) shifts by |D_i|.
                let pa = (mono.parity() + sp.var_parity(i)) % 2;
                let s = if sp.var_parity(i) & pa == 1 { -1 } else { 1 } * sp.sigma(i);
                signed.add_term(f, *mono, f.mul(c, f.from_i64(s)));
            }
            let tilde = ys.tilde(i);
            out.add_scaled(f, &ys.d_field(tilde).left_mul(sp, &signed), Fe::ONE);
        }
        Ok(out)
    }

    /// `D_K(a) = D_H(a) + d_m(a) D + Delta(a) d_m`.
    pub fn d_k(&self, a: &Poly) -> Result<VectorField> {
        if self.family != Family::K {
            return domain("D_K is defined for K");
        }
        let base = self.d_h(a)?;
        Ok(self.space.contact_extend(base, a))
    }

    /// The y-coordinate form of `D_K`.
    pub fn e_k(&self, a: &Poly, ys: &YCoords) -> Result<VectorField> {
        if self.family != Family::K {
            return domain("E_K is defined for K");
        }
        let base = self.e_h(a, ys)?;
        Ok(self.space.contact_extend(base, a))
    }

    /// Gram matrix of `[x_i, x_j]` on `L_-1` (constant part of `D_H(x_i)(x_j)`),
    /// indexed by `l_minus_one_vars()`.
    pub fn beta_gram_x(&self) -> Matrix {
        let vars = self.l_minus_one_vars();
        let f = self.field();
        let mut g = Matrix::zeros(vars.len(), vars.len());
        for (a, &i) in vars.iter().enumerate() {
            for (b, &j) in vars.iter().enumerate() {
                if self.prime(i) == j {
                    let mut s = self.sigma(i);
                    if self.space.var_parity(i) == 1 {
                        s = -s;
                    }
                    g.set(a, b, f.from_i64(s));
                }
            }
        }
        g
    }

    // ----- automorphisms -----

    /// The automorphism induced by a change of basis of `L_-1`. `images[k]`
    /// is the image of the k-th basis vector of `L_-1`.
    pub fn induced_automorphism(&self, images: &[HomVec]) -> Result<Automorphism> {
        let vars = self.l_minus_one_vars();
        if images.len() != vars.len() || images.iter().any(|v| v.degree != -1 || v.coords.len() != vars.len()) {
            return Err(Error::Dimension(format!("need {} images in L_-1", vars.len())));
        }
        let f = *self.field();
        // B[k][l]: coefficient of basis vector l in the image of basis vector k.
        let mut b = Matrix::zeros(vars.len(), vars.len());
        for (k, img) in images.iter().enumerate() {
            for (l, &c) in img.coords.iter().enumerate() {
                let (pk, pl) = (self.local_parity(-1, k), self.local_parity(-1, l));
                if !c.is_zero() && pk != pl {
                    return domain("change of basis mixes parities");
                }
                b.set(k, l, c);
            }
        }
        let b_inv = b.inverse(&f)?;
        // Variable order of L_-1 basis vectors.
        let var_of: Vec<usize> = (0..vars.len())
            .map(|k| *vars.iter().find(|&&v| self.var_basis_index(v).unwrap() == self.comp_offset(-1) + k).unwrap())
            .collect();
        let sp = &self.space;
        let nv = sp.num_vars();
        let mut phi = Matrix::identity(nv);
        let mut phi_inv = Matrix::identity(nv);
        match self.family {
            Family::W | Family::S => {
                // phi(x_k) = sum_l (B^-1)_{lk} x_l, phi^-1(x_k) = sum_l B_{lk} x_l.
                for k in 0..nv {
                    for l in 0..nv {
                        phi.set(var_of[k] - 1, var_of[l] - 1, b_inv.get(l, k));
                        phi_inv.set(var_of[k] - 1, var_of[l] - 1, b.get(l, k));
                    }
                }
            }
            Family::H | Family::K => {
                let gram = self.beta_gram_x();
                // Gram in the L_-1 basis order.
                let mut g = Matrix::zeros(vars.len(), vars.len());
                for k in 0..vars.len() {
                    for l in 0..vars.len() {
                        let (vk, vl) =
                            (vars.iter().position(|&v| v == var_of[k]).unwrap(), vars.iter().position(|&v| v == var_of[l]).unwrap());
                        g.set(k, l, gram.get(vk, vl));
                    }
                }
                let moved = b.mul(&f, &g)?.mul(&f, &b.transpose())?;
                if moved != g {
                    return domain("change of basis does not preserve the bilinear form on L_-1");
                }
                for k in 0..vars.len() {
                    for l in 0..vars.len() {
                        phi.set(var_of[k] - 1, var_of[l] - 1, b.get(k, l));
                        phi_inv.set(var_of[k] - 1, var_of[l] - 1, b_inv.get(k, l));
                    }
                }
            }
        }
        Ok(Automorphism { algebra: self.id, phi: sp.linear_substitution(&phi)?, phi_inv_rows: phi_inv })
    }

    pub fn apply_automorphism(&self, g: &Automorphism, a: &Element) -> Result<Element> {
        self.check(a)?;
        if g.algebra != self.id {
            return domain("automorphism belongs to a different algebra");
        }
        let sp = &self.space;
        let f = sp.field();
        match self.family {
            Family::W | Family::S => {
                let v = self.to_vector_field(a)?;
                let nv = sp.num_vars();
                let mut out = VectorField::zero(nv);
                for j in 0..nv {
                    // phi( sum_k B_{kj} f_k ), with phi^-1(x_j) = sum_k B_{kj} x_k
                    let mut inner = Poly::zero();
                    for k in 0..nv {
                        inner.add_scaled(f, &v.coeffs[k], g.phi_inv_rows.get(j, k));
                    }
                    out.coeffs[j] = sp.substitute(&g.phi, &inner);
                }
                self.from_vector_field(&out)
            }
            Family::H | Family::K => {
                let p = self.to_poly(a)?;
                self.from_poly(&sp.substitute(&g.phi, &p))
            }
        }
    }

    pub fn apply_automorphism_hom(&self, g: &Automorphism, v: &HomVec) -> Result<HomVec> {
        let e = self.apply_automorphism(g, &self.from_hom(v))?;
        if e.is_zero() {
            return Ok(HomVec { degree: v.degree, coords: vec![Fe::ZERO; self.comp_dim(v.degree)] });
        }
        self.to_hom(&e)
    }

    pub fn apply_automorphism_subspace(&self, g: &Automorphism, s: &GradedSubspace) -> Result<GradedSubspace> {
        let mut out = GradedSubspace::zero(self);
        for v in s.basis() {
            let w = self.apply_automorphism_hom(g, &v)?;
            out.insert_hom(self.field(), w);
        }
        Ok(out)
    }
}

/// An automorphism of `L` induced by a linear substitution of O.
#[derive(Clone, Debug)]
pub struct Automorphism {
    algebra: u64,
    phi: Substitution,
    /// Row j: coefficients of `phi^-1(x_j)`.
    phi_inv_rows: Matrix,
}

/// The y-coordinates attached to an odd-part split `q = floor((n-d)/2)`.
#[derive(Clone, Debug)]
pub struct YCoords {
    m: usize,
    n: usize,
    q: usize,
    contact: bool,
    /// rows[i-1]: coefficients of `y_i` in the x's.
    rows: Matrix,
    /// d[i-1]: coefficients of `D_i` in the partials.
    d: Matrix,
    to_x: Substitution,
    to_y: Substitution,
}

impl YCoords {
    /// y-coordinates for an odd-part nondegenerate dimension `d`.
    pub fn new(alg: &CartanAlgebra, d: usize) -> Result<YCoords> {
        if !matches!(alg.family, Family::H | Family::K) {
            return domain("y-coordinates are defined for H and K");
        }
        let (m, n) = (alg.m, alg.n);
        if d > n {
            return Err(Error::Parameter(format!("d = {d} exceeds n = {n}")));
        }
        let q = (n - d) / 2;
        let f = *alg.field();
        let i_unit = f.sqrt_minus_one()?;
        let inv_r2 = f.inv(f.sqrt_two()?)?;
        let nv = m + n;
        let mut rows = Matrix::identity(nv);
        for i in m + 1..=m + q {
            let (a, b) = (i - 1, i + q - 1);
            rows.set(a, a, inv_r2);
            rows.set(a, b, f.mul(i_unit, inv_r2));
            // y_{i+q} = (x_i - sqrt(-1) x_{i+q}) / sqrt 2
            rows.set(b, a, inv_r2);
            rows.set(b, b, f.neg(f.mul(i_unit, inv_r2)));
        }
        let d_mat = rows.transpose().inverse(&f)?;
        let sp = alg.space();
        let to_x = sp.linear_substitution(&rows)?;
        let to_y = sp.linear_substitution(&rows.inverse(&f)?)?;
        Ok(YCoords { m, n, q, contact: alg.family == Family::K, rows, d: d_mat, to_x, to_y })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Paired indices `I`, without `m` for K.
    pub fn index_set(&self) -> Vec<usize> {
        (1..=self.m + self.n).filter(|&i| !(self.contact && i == self.m)).collect()
    }

    /// `y_i` as a linear form in the x's.
    pub fn y(&self, sp: &Superspace, i: usize) -> Poly {
        let f = sp.field();
        let mut p = Poly::zero();
        for j in 0..self.m + self.n {
            p.add_term(f, sp.variable(j + 1), self.rows.get(i - 1, j));
        }
        p
    }

    /// Coefficients of `y_i` in the x's.
    pub fn y_row(&self, i: usize) -> &[Fe] {
        self.rows.row(i - 1)
    }

    /// `D_i` as a vector field.
    pub fn d_field(&self, i: usize) -> VectorField {
        let nv = self.m + self.n;
        VectorField { coeffs: (0..nv).map(|j| Poly::constant(self.d.get(i - 1, j))).collect() }
    }

    pub fn apply_d(&self, sp: &Superspace, i: usize, a: &Poly) -> Poly {
        let f = sp.field();
        let mut out = Poly::zero();
        for j in 0..self.m + self.n {
            let c = self.d.get(i - 1, j);
            if !c.is_zero() {
                out.add_scaled(f, &sp.derive(j + 1, a), c);
            }
        }
        out
    }

    /// `i~`: the y-pairing partner.
    pub fn tilde(&self, i: usize) -> usize {
        let (m, q) = (self.m, self.q);
        if i > m && i <= m + q {
            i + q
        } else if i > m + q && i <= m + 2 * q {
            i - q
        } else if i <= m {
            let r = m / 2;
            if i <= r {
                i + r
            } else if i <= 2 * r {
                i - r
            } else {
                i
            }
        } else {
            i
        }
    }

    /// Rewrites a polynomial in the y's as a polynomial in the x's.
    pub fn to_x(&self, sp: &Superspace, a: &Poly) -> Poly {
        sp.substitute(&self.to_x, a)
    }

    /// Rewrites a polynomial in the x's in terms of the y's.
    pub fn to_y(&self, sp: &Superspace, a: &Poly) -> Poly {
        sp.substitute(&self.to_y, a)
    }
}

impl Superspace {
    pub fn r(&self) -> usize {
        self.m() / 2
    }

    pub fn sigma(&self, i: usize) -> i64 {
        let r = self.r();
        if i > r && i <= 2 * r {
            -1
        } else {
            1
        }
    }

    pub fn prime(&self, i: usize) -> usize {
        let r = self.r();
        if i <= r {
            i + r
        } else if i <= 2 * r {
            i - r
        } else {
            i
        }
    }

    /// Indices summed over in `D_H`: `1..2r` and the odd variables.
    pub fn hamiltonian_indices(&self) -> impl Iterator<Item = usize> + '_ {
        let r = self.r();
        (1..=2 * r).chain(self.m() + 1..=self.m() + self.n())
    }

    /// `sum_i f_i d_i (g)`.
    pub fn apply_field(&self, v: &VectorField, g: &Poly) -> Poly {
        let f = self.field();
        let mut out = Poly::zero();
        for (i, c) in v.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            out.add_scaled(f, &self.mul(c, &self.derive(i + 1, g)), Fe::ONE);
        }
        out
    }

    /// Splits a vector field into even and odd parts.
    pub fn field_parts(&self, v: &VectorField) -> [VectorField; 2] {
        let f = self.field();
        let nv = self.num_vars();
        let mut parts = [VectorField::zero(nv), VectorField::zero(nv)];
        for (i, c) in v.coeffs.iter().enumerate() {
            for (mono, &x) in c.terms() {
                let par = (mono.parity() + self.var_parity(i + 1)) % 2;
                parts[par as usize].coeffs[i].add_term(f, *mono, x);
            }
        }
        parts
    }

    /// Super-commutator of vector fields.
    pub fn field_bracket(&self, a: &VectorField, b: &VectorField) -> VectorField {
        let f = *self.field();
        let nv = self.num_vars();
        let mut out = VectorField::zero(nv);
        let pa = self.field_parts(a);
        let pb = self.field_parts(b);
        for (sa, va) in pa.iter().enumerate() {
            for (sb, vb) in pb.iter().enumerate() {
                if va.is_zero() || vb.is_zero() {
                    continue;
                }
                let sign = if sa & sb == 1 { f.from_i64(-1) } else { Fe::ONE };
                for j in 0..nv {
                    out.coeffs[j].add_scaled(&f, &self.apply_field(va, &vb.coeffs[j]), Fe::ONE);
                    out.coeffs[j].add_scaled(&f, &self.apply_field(vb, &va.coeffs[j]), f.neg(sign));
                }
            }
        }
        out
    }

    /// `div(sum f_i d_i) = sum (-1)^{|f_i||d_i|} d_i(f_i)`.
    pub fn divergence(&self, v: &VectorField) -> Poly {
        let f = self.field();
        let mut out = Poly::zero();
        for (k, c) in v.coeffs.iter().enumerate() {
            let i = k + 1;
            for (mono, &x) in c.terms() {
                if let Some((s, dm)) = self.derive_mono(i, mono) {
                    let mut coef = f.mul(s, x);
                    if mono.parity() & self.var_parity(i) == 1 {
                        coef = f.neg(coef);
                    }
                    out.add_term(f, dm, coef);
                }
            }
        }
        out
    }

    /// `D_ij(a) = (-1)^{|d_i||d_j|} d_i(a) d_j - (-1)^{(|d_i|+|d_j|)|a|} d_j(a) d_i`.
    pub fn d_ij(&self, a: &Poly, i: usize, j: usize) -> VectorField {
        let f = *self.field();
        let mut out = VectorField::zero(self.num_vars());
        let (pi, pj) = (self.var_parity(i), self.var_parity(j));
        for (mono, &c) in a.terms() {
            let pa = mono.parity();
            if let Some((s, dm)) = self.derive_mono(i, mono) {
                let mut coef = f.mul(s, c);
                if pi & pj == 1 {
                    coef = f.neg(coef);
                }
                out.coeffs[j - 1].add_term(&f, dm, coef);
            }
            if let Some((s, dm)) = self.derive_mono(j, mono) {
                let mut coef = f.neg(f.mul(s, c));
                if ((pi + pj) & pa) & 1 == 1 {
                    coef = f.neg(coef);
                }
                out.coeffs[i - 1].add_term(&f, dm, coef);
            }
        }
        out
    }

    /// `D_H(a) = sum sigma(i) (-1)^{|d_i||a|} d_i(a) d_{i'}`.
    pub fn d_h(&self, a: &Poly, _contact: bool) -> VectorField {
        let f = *self.field();
        let mut out = VectorField::zero(self.num_vars());
        let idx: Vec<usize> = self.hamiltonian_indices().collect();
        for (mono, &c) in a.terms() {
            for &i in &idx {
                if let Some((s, dm)) = self.derive_mono(i, mono) {
                    let mut sg = self.sigma(i);
                    if self.var_parity(i) & mono.parity() == 1 {
                        sg = -sg;
                    }
                    out.coeffs[self.prime(i) - 1].add_term(&f, dm, f.mul(f.mul(s, c), f.from_i64(sg)));
                }
            }
        }
        out
    }

    /// Adds `d_m(a) D + Delta(a) d_m` to `base`.
    fn contact_extend(&self, mut base: VectorField, a: &Poly) -> VectorField {
        let f = *self.field();
        let m = self.m();
        let dm = self.derive(m, a);
        for i in 1..=self.num_vars() {
            if i == m {
                continue;
            }
            let xi = self.var_poly(i);
            base.coeffs[i - 1].add_scaled(&f, &self.mul(&dm, &xi), Fe::ONE);
        }
        base.coeffs[m - 1].add_scaled(&f, &self.delta(a), Fe::ONE);
        base
    }

    /// Terms of the H bracket `D_H(a)(b)` or, with `contact`, the K bracket
    /// `D_H(a)(b) + Delta(a) d_m(b) - d_m(a) Delta(b)`, on monomials.
    pub fn contact_bracket_terms(&self, contact: bool, a: &Monomial, b: &Monomial, emit: &mut impl FnMut(Monomial, Fe)) {
        let f = *self.field();
        let r = self.r();
        let pa = a.parity();
        let idx = (1..=2 * r).chain(self.m() + 1..=self.m() + self.n());
        for i in idx {
            let Some((s1, da)) = self.derive_mono(i, a) else { continue };
            let Some((s2, db)) = self.derive_mono(self.prime(i), b) else { continue };
            let Some((s3, prod)) = self.mul_mono(&da, &db) else { continue };
            let mut sg = self.sigma(i);
            if self.var_parity(i) & pa == 1 {
                sg = -sg;
            }
            emit(prod, f.mul(f.mul(f.mul(s1, s2), s3), f.from_i64(sg)));
        }
        if contact {
            let m = self.m();
            let two = f.from_i64(2);
            if let Some((s1, db)) = self.derive_mono(m, b) {
                let wa = f.sub(two, self.euler_weight(a, true));
                if let Some((s2, prod)) = self.mul_mono(a, &db) {
                    emit(prod, f.mul(f.mul(s1, s2), wa));
                }
            }
            if let Some((s1, da)) = self.derive_mono(m, a) {
                let wb = f.sub(two, self.euler_weight(b, true));
                if let Some((s2, prod)) = self.mul_mono(&da, b) {
                    emit(prod, f.neg(f.mul(f.mul(s1, s2), wb)));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono_poly(alg: &CartanAlgebra, alpha: &[u8], odd: &[usize]) -> Poly {
        Poly::term(alg.space().monomial(alpha, odd).unwrap(), Fe::ONE)
    }

    fn w_elem(alg: &CartanAlgebra, alpha: &[u8], odd: &[usize], var: usize) -> Element {
        let mut v = VectorField::zero(alg.space().num_vars());
        v.coeffs[var - 1] = mono_poly(alg, alpha, odd);
        alg.from_vector_field(&v).unwrap()
    }

    #[test]
    fn dimensions() {
        assert_eq!(build(Family::W, 5, 2, 2).unwrap().dim(), 400);
        let h = build(Family::H, 5, 2, 2).unwrap();
        assert_eq!(h.dim(), 98);
        assert_eq!(h.comp_dim(-1), 4);
        let k = build(Family::K, 5, 3, 2).unwrap();
        assert_eq!(k.dim(), 500);
        assert_eq!(k.depth(), 2);
        assert_eq!(k.comp_dim(-2), 1);
        assert_eq!(k.comp_dim(0), 9);
        assert_eq!(k.field().order(), 25);
    }

    #[test]
    fn parameter_errors() {
        assert!(build(Family::H, 5, 3, 2).is_err());
        assert!(build(Family::K, 5, 2, 2).is_err());
        assert!(build(Family::W, 4, 2, 2).is_err());
        assert!(build(Family::W, 5, 1, 2).is_err());
        let gf5 = Field::prime(5).unwrap();
        assert!(build_algebra(Family::H, 2, 2, gf5).is_err());
    }

    #[test]
    fn w_bracket_example() {
        let w = build(Family::W, 5, 2, 2).unwrap();
        let d1 = w_elem(&w, &[0, 0], &[], 1);
        let x1d2 = w_elem(&w, &[1, 0], &[], 2);
        let d2 = w_elem(&w, &[0, 0], &[], 2);
        assert_eq!(w.bracket(&d1, &x1d2).unwrap(), d2);
    }

    #[test]
    fn divergence_examples() {
        let w = build(Family::W, 5, 2, 2).unwrap();
        let f = w.field();
        assert_eq!(w.divergence(&w_elem(&w, &[1, 0], &[], 1)).unwrap(), Poly::constant(Fe::ONE));
        assert_eq!(w.divergence(&w_elem(&w, &[0, 0], &[3], 3)).unwrap(), Poly::constant(f.from_i64(-1)));
    }

    #[test]
    fn d_ij_examples() {
        let w = build(Family::W, 5, 2, 2).unwrap();
        let sp = w.space();
        let f = w.field();
        let a = mono_poly(&w, &[1, 1], &[]);
        let v = sp.d_ij(&a, 1, 2);
        let want = w.add(&w_elem(&w, &[0, 1], &[], 2), &w.scale(&w_elem(&w, &[1, 0], &[], 1), f.from_i64(-1))).unwrap();
        assert_eq!(w.from_vector_field(&v).unwrap(), want);
        assert!(sp.d_ij(&mono_poly(&w, &[2, 0], &[]), 1, 1).is_zero());
    }

    #[test]
    fn hamiltonian_examples() {
        let h = build(Family::H, 5, 2, 2).unwrap();
        let f = h.field();
        let x1 = h.from_poly(&mono_poly(&h, &[1, 0], &[])).unwrap();
        let x2 = h.from_poly(&mono_poly(&h, &[0, 1], &[])).unwrap();
        assert!(h.bracket(&x1, &x2).unwrap().is_zero());
        let v = h.d_h(&mono_poly(&h, &[1, 1], &[])).unwrap();
        let mut want = VectorField::zero(4);
        want.coeffs[1] = mono_poly(&h, &[0, 1], &[]);
        want.coeffs[0] = mono_poly(&h, &[1, 0], &[]).scale(f, f.from_i64(-1));
        assert_eq!(v, want);
        assert!(h.d_h(&Poly::constant(Fe::ONE)).unwrap().is_zero());
    }

    #[test]
    fn contact_examples() {
        let k = build(Family::K, 5, 3, 2).unwrap();
        let f = *k.field();
        let sp = k.space();
        let one = k.from_poly(&Poly::constant(Fe::ONE)).unwrap();
        let z = k.from_poly(&mono_poly(&k, &[0, 0, 1], &[])).unwrap();
        let two = k.from_poly(&Poly::constant(f.from_i64(2))).unwrap();
        assert_eq!(k.bracket(&one, &z).unwrap(), two);
        let dk1 = k.d_k(&Poly::constant(Fe::ONE)).unwrap();
        let mut want = VectorField::zero(5);
        want.coeffs[2] = Poly::constant(f.from_i64(2));
        assert_eq!(dk1, want);
        // D_K(z) = sum_{i != m} x_i d_i + 2 z d_z
        let dkz = k.d_k(&mono_poly(&k, &[0, 0, 1], &[])).unwrap();
        let mut want = VectorField::zero(5);
        for i in [1, 2, 4, 5] {
            want.coeffs[i - 1] = sp.var_poly(i);
        }
        want.coeffs[2] = sp.var_poly(3).scale(&f, f.from_i64(2));
        assert_eq!(dkz, want);
    }

    #[test]
    fn y_coordinates_dual_and_gram() {
        let h = build(Family::H, 5, 2, 2).unwrap();
        let f = *h.field();
        let sp = h.space();
        for d in 0..=2 {
            let ys = YCoords::new(&h, d).unwrap();
            for i in 1..=4 {
                for j in 1..=4 {
                    let v = ys.apply_d(sp, i, &ys.y(sp, j));
                    assert_eq!(v, if i == j { Poly::constant(Fe::ONE) } else { Poly::zero() });
                }
            }
            // Printed form of D_i on the paired odd block.
            let ru = f.sqrt_minus_one().unwrap();
            let ir2 = f.inv(f.sqrt_two().unwrap()).unwrap();
            let q = ys.q();
            for i in 3..3 + q {
                let di = ys.d_field(i);
                assert_eq!(di.coeffs[i - 1], Poly::constant(ir2));
                assert_eq!(di.coeffs[i + q - 1], Poly::constant(f.neg(f.mul(ru, ir2))));
                let dj = ys.d_field(i + q);
                assert_eq!(dj.coeffs[i - 1], Poly::constant(ir2));
                assert_eq!(dj.coeffs[i + q - 1], Poly::constant(f.mul(ru, ir2)));
            }
        }
    }
}
