//! Exact linear algebra: dense matrices, echelonized subspaces, graded
//! subspaces of a Cartan algebra, constraint solving and bracket closure.

use std::collections::{BTreeMap, VecDeque};

use crate::cartan::{CartanAlgebra, Element};
use crate::error::{domain, Error, Result};
use crate::scalars::{Fe, Field};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![Fe::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Fe::ONE);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Fe>]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Matrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            m.data[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Fe {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Fe) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Fe] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, f: &Field, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!("{}x{} times {}x{}", self.rows, self.cols, other.rows, other.cols)));
        }
        let mut r = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = f.mul_add(r.get(i, j), a, other.get(k, j));
                    r.set(i, j, v);
                }
            }
        }
        Ok(r)
    }

    /// Reduces in place to reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self, f: &Field) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else { continue };
            if pr != r {
                for j in 0..self.cols {
                    self.data.swap(pr * self.cols + j, r * self.cols + j);
                }
            }
            let inv = f.inv(self.get(r, c)).expect("nonzero pivot");
            for j in c..self.cols {
                let v = f.mul(self.get(r, j), inv);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self.get(i, c);
                if factor.is_zero() {
                    continue;
                }
                for j in c..self.cols {
                    let v = f.sub(self.get(i, j), f.mul(factor, self.get(r, j)));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, f: &Field) -> usize {
        self.clone().rref(f).len()
    }

    /// Basis of `{x : self * x = 0}`.
    pub fn nullspace(&self, f: &Field) -> Vec<Vec<Fe>> {
        let mut m = self.clone();
        let pivots = m.rref(f);
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![Fe::ZERO; self.cols];
            v[free] = Fe::ONE;
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = f.neg(m.get(r, free));
            }
            basis.push(v);
        }
        basis
    }

    pub fn inverse(&self, f: &Field) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::Dimension("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, n + i, Fe::ONE);
        }
        let pivots = aug.rref(f);
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return domain("matrix is singular");
        }
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, aug.get(i, n + j));
            }
        }
        Ok(inv)
    }
}

/// A subspace of `F^ambient` held as reduced row echelon rows, sorted by pivot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    rows: Vec<Vec<Fe>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Subspace {
        Subspace { ambient, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ambient: usize) -> Subspace {
        let rows = (0..ambient)
            .map(|i| {
                let mut v = vec![Fe::ZERO; ambient];
                v[i] = Fe::ONE;
                v
            })
            .collect();
        Subspace { ambient, rows, pivots: (0..ambient).collect() }
    }

    pub fn span<'a>(f: &Field, ambient: usize, vectors: impl IntoIterator<Item = &'a Vec<Fe>>) -> Subspace {
        let mut s = Subspace::zero(ambient);
        for v in vectors {
            s.insert(f, v.clone());
        }
        s
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn codim(&self) -> usize {
        self.ambient - self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Fe>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ambient
    }

    /// Subtracts the rows so that `v` vanishes on every pivot column.
    pub fn reduce(&self, f: &Field, v: &mut [Fe]) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = v[p];
            if c.is_zero() {
                continue;
            }
            for (x, &r) in v.iter_mut().zip(row).skip(p) {
                if !r.is_zero() {
                    *x = f.sub(*x, f.mul(c, r));
                }
            }
        }
    }

    pub fn contains(&self, f: &Field, v: &[Fe]) -> bool {
        let mut w = v.to_vec();
        self.reduce(f, &mut w);
        w.iter().all(|x| x.is_zero())
    }

    /// Inserts `v`; returns whether the dimension grew.
    pub fn insert(&mut self, f: &Field, mut v: Vec<Fe>) -> bool {
        assert_eq!(v.len(), self.ambient, "vector length must match the ambient dimension");
        self.reduce(f, &mut v);
        let Some(p) = v.iter().position(|x| !x.is_zero()) else { return false };
        let inv = f.inv(v[p]).expect("nonzero");
        for x in v.iter_mut().skip(p) {
            *x = f.mul(*x, inv);
        }
        for row in &mut self.rows {
            let c = row[p];
            if c.is_zero() {
                continue;
            }
            for (x, &y) in row.iter_mut().zip(&v).skip(p) {
                if !y.is_zero() {
                    *x = f.sub(*x, f.mul(c, y));
                }
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.rows.insert(at, v);
        self.pivots.insert(at, p);
        true
    }

    /// Coordinates of `v` modulo this subspace: the entries of the reduced
    /// vector at the non-pivot columns.
    pub fn quotient_coords(&self, f: &Field, v: &[Fe]) -> Vec<Fe> {
        let mut w = v.to_vec();
        self.reduce(f, &mut w);
        let mut out = Vec::with_capacity(self.codim());
        let mut next = 0;
        for (j, x) in w.into_iter().enumerate() {
            if next < self.pivots.len() && self.pivots[next] == j {
                next += 1;
            } else {
                out.push(x);
            }
        }
        out
    }

    /// Unit vectors at the non-pivot columns; they span a complement.
    pub fn complement_basis(&self) -> Vec<Vec<Fe>> {
        let mut out = Vec::new();
        let mut next = 0;
        for j in 0..self.ambient {
            if next < self.pivots.len() && self.pivots[next] == j {
                next += 1;
                continue;
            }
            let mut v = vec![Fe::ZERO; self.ambient];
            v[j] = Fe::ONE;
            out.push(v);
        }
        out
    }

    /// Coefficients of `v` in the row basis, assuming `v` lies in the span.
    pub fn coordinates(&self, v: &[Fe]) -> Vec<Fe> {
        self.pivots.iter().map(|&p| v[p]).collect()
    }

    pub fn is_subspace_of(&self, f: &Field, other: &Subspace) -> bool {
        self.rows.iter().all(|r| other.contains(f, r))
    }

    pub fn sum(&self, f: &Field, other: &Subspace) -> Subspace {
        let mut s = self.clone();
        for r in &other.rows {
            s.insert(f, r.clone());
        }
        s
    }

    pub fn intersection(&self, f: &Field, other: &Subspace) -> Subspace {
        // Solve sum a_i r_i = sum b_j s_j.
        let (d1, d2) = (self.dim(), other.dim());
        let mut m = Matrix::zeros(self.ambient, d1 + d2);
        for (i, r) in self.rows.iter().enumerate() {
            for (k, &x) in r.iter().enumerate() {
                m.set(k, i, x);
            }
        }
        for (j, s) in other.rows.iter().enumerate() {
            for (k, &x) in s.iter().enumerate() {
                m.set(k, d1 + j, f.neg(x));
            }
        }
        let mut out = Subspace::zero(self.ambient);
        for sol in m.nullspace(f) {
            let mut v = vec![Fe::ZERO; self.ambient];
            for (i, r) in self.rows.iter().enumerate() {
                if !sol[i].is_zero() {
                    for k in 0..self.ambient {
                        v[k] = f.mul_add(v[k], sol[i], r[k]);
                    }
                }
            }
            out.insert(f, v);
        }
        out
    }
}

/// A dense vector in one graded component `L_degree`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomVec {
    pub degree: i32,
    pub coords: Vec<Fe>,
}

impl HomVec {
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }
}

/// A subspace of a Cartan algebra that is a direct sum of its homogeneous
/// components. Every degree of the algebra has an entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedSubspace {
    algebra: u64,
    comps: BTreeMap<i32, Subspace>,
}

impl GradedSubspace {
    pub fn zero(alg: &CartanAlgebra) -> GradedSubspace {
        let comps = alg.degrees().map(|d| (d, Subspace::zero(alg.comp_dim(d)))).collect();
        GradedSubspace { algebra: alg.id(), comps }
    }

    pub fn full(alg: &CartanAlgebra) -> GradedSubspace {
        let comps = alg.degrees().map(|d| (d, Subspace::full(alg.comp_dim(d)))).collect();
        GradedSubspace { algebra: alg.id(), comps }
    }

    /// `L_lo + ... + L_hi`.
    pub fn components(alg: &CartanAlgebra, lo: i32, hi: i32) -> GradedSubspace {
        let mut g = GradedSubspace::zero(alg);
        for d in lo.max(alg.min_degree())..=hi.min(alg.max_degree()) {
            g.set(d, Subspace::full(alg.comp_dim(d)));
        }
        g
    }

    pub fn algebra_id(&self) -> u64 {
        self.algebra
    }

    pub fn check_algebra(&self, alg: &CartanAlgebra) -> Result<()> {
        if self.algebra != alg.id() {
            return domain("graded subspace belongs to a different algebra");
        }
        Ok(())
    }

    pub fn comp(&self, d: i32) -> Option<&Subspace> {
        self.comps.get(&d)
    }

    pub fn comps(&self) -> impl Iterator<Item = (i32, &Subspace)> {
        self.comps.iter().map(|(&d, s)| (d, s))
    }

    pub fn set(&mut self, d: i32, s: Subspace) {
        let slot = self.comps.get_mut(&d).expect("degree of the algebra");
        assert_eq!(slot.ambient(), s.ambient(), "component ambient mismatch");
        *slot = s;
    }

    pub fn dim(&self) -> usize {
        self.comps.values().map(|s| s.dim()).sum()
    }

    pub fn dim_at(&self, d: i32) -> usize {
        self.comps.get(&d).map_or(0, |s| s.dim())
    }

    pub fn contains_hom(&self, f: &Field, v: &HomVec) -> bool {
        match self.comps.get(&v.degree) {
            Some(s) => s.contains(f, &v.coords),
            None => v.is_zero(),
        }
    }

    pub fn insert_hom(&mut self, f: &Field, v: HomVec) -> bool {
        self.comps.get_mut(&v.degree).expect("degree of the algebra").insert(f, v.coords)
    }

    pub fn is_subspace_of(&self, f: &Field, other: &GradedSubspace) -> bool {
        self.comps.iter().all(|(d, s)| other.comps.get(d).is_some_and(|o| s.is_subspace_of(f, o)))
    }

    pub fn sum(&self, f: &Field, other: &GradedSubspace) -> GradedSubspace {
        let mut out = self.clone();
        for (d, s) in &other.comps {
            let slot = out.comps.get_mut(d).expect("same algebra");
            *slot = slot.sum(f, s);
        }
        out
    }

    /// Homogeneous basis vectors, by degree.
    pub fn basis(&self) -> Vec<HomVec> {
        self.comps.iter().flat_map(|(&d, s)| s.rows().iter().map(move |r| HomVec { degree: d, coords: r.clone() })).collect()
    }

    /// Per-degree dimensions, listing only nonzero components.
    pub fn dims(&self) -> Vec<(i32, usize)> {
        self.comps.iter().filter(|(_, s)| s.dim() > 0).map(|(&d, s)| (d, s.dim())).collect()
    }
}

/// Inserts a homogeneous element; errors on a non-homogeneous one.
pub fn echelon_insert(alg: &CartanAlgebra, s: &mut GradedSubspace, v: &Element) -> Result<bool> {
    s.check_algebra(alg)?;
    let h = alg.to_hom(v)?;
    Ok(s.insert_hom(alg.field(), h))
}

/// One clause of an ad-constraint: `[gen, u]` must lie in `target`, a
/// subspace of the component of degree `gen.degree + i`.
pub struct AdConstraint<'a> {
    pub gens: &'a [HomVec],
    pub target: &'a Subspace,
}

/// `{u in L_i : [g, u] in target for every clause and generator}`.
pub fn solve_ad_constraint(alg: &CartanAlgebra, i: i32, clauses: &[AdConstraint<'_>]) -> Result<Subspace> {
    let di = alg.comp_dim(i);
    if di == 0 && !alg.degrees().any(|d| d == i) {
        return domain(format!("degree {i} outside the grading of {}", alg.name()));
    }
    let f = alg.field();
    let mut columns: Vec<Vec<Fe>> = vec![Vec::new(); di];
    for clause in clauses {
        for g in clause.gens {
            let target_deg = g.degree + i;
            if alg.comp_dim(target_deg) == 0 {
                continue;
            }
            for (k, col) in columns.iter_mut().enumerate() {
                let e = alg.unit(i, k);
                let br = alg.bracket_hom(g, &e).expect("nonzero target component");
                col.extend(clause.target.quotient_coords(f, &br.coords));
            }
        }
    }
    let nrows = columns.first().map_or(0, |c| c.len());
    let mut sys = Matrix::zeros(nrows, di);
    for (k, col) in columns.iter().enumerate() {
        for (r, &x) in col.iter().enumerate() {
            sys.set(r, k, x);
        }
    }
    let null = sys.nullspace(f);
    let rank = sys.rank(f);
    assert_eq!(null.len() + rank, di, "rank-nullity");
    Ok(Subspace::span(f, di, &null))
}

/// `alg(seed)`, the least subalgebra containing the seed.
pub fn bracket_closure(alg: &CartanAlgebra, seed: &GradedSubspace) -> GradedSubspace {
    let mut closed = GradedSubspace::zero(alg);
    let seeds = seed.basis();
    extend_closure(alg, &mut closed, seeds, &|_| false);
    closed
}

/// Grows a subalgebra `closed` by `extra` to the least subalgebra containing
/// both. Stops early, with a partial result, as soon as `stop` holds.
///
/// Each new vector is bracketed first with the negative-degree part and only
/// later with the rest, so descending chains are found before the expensive
/// products. Every pair of spanning vectors is still bracketed once.
///
/// Returns `true` if it stopped early.
pub fn extend_closure(
    alg: &CartanAlgebra,
    closed: &mut GradedSubspace,
    extra: Vec<HomVec>,
    stop: &dyn Fn(&GradedSubspace) -> bool,
) -> bool {
    let f = *alg.field();
    let mut low: VecDeque<HomVec> = VecDeque::new();
    let mut high: VecDeque<HomVec> = VecDeque::new();
    for v in extra {
        if closed.insert_hom(&f, v.clone()) {
            low.push_back(v);
        }
    }
    if stop(closed) {
        return true;
    }
    loop {
        let (v, negative) = match low.pop_front() {
            Some(v) => (v, true),
            None => match high.pop_front() {
                Some(v) => (v, false),
                None => return false,
            },
        };
        let degrees: Vec<i32> = closed.comps.keys().copied().filter(|&d| (d < 0) == negative).collect();
        for d in degrees {
            if alg.comp_dim(v.degree + d) == 0 {
                continue;
            }
            let rows: Vec<Vec<Fe>> = closed.comps[&d].rows().to_vec();
            for r in rows {
                let w = HomVec { degree: d, coords: r };
                let Some(b) = alg.bracket_hom(&v, &w) else { continue };
                if b.is_zero() {
                    continue;
                }
                if closed.insert_hom(&f, b.clone()) {
                    low.push_back(b);
                    if stop(closed) {
                        return true;
                    }
                }
            }
        }
        if negative {
            high.push_back(v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(f: &Field, v: &[i64]) -> Vec<Fe> {
        v.iter().map(|&x| f.from_i64(x)).collect()
    }

    #[test]
    fn subspace_insert_idempotent() {
        let f = Field::prime(5).unwrap();
        let mut s = Subspace::zero(4);
        assert!(s.insert(&f, fe(&f, &[1, 0, 0, 0])));
        assert!(!s.insert(&f, fe(&f, &[1, 0, 0, 0])));
        assert!(s.insert(&f, fe(&f, &[0, 1, 0, 0])));
        assert!(!s.insert(&f, fe(&f, &[1, 1, 0, 0])));
        assert_eq!(s.dim(), 2);
        assert_eq!(s.quotient_coords(&f, &fe(&f, &[3, 2, 1, 4])), fe(&f, &[1, 4]));
    }

    #[test]
    fn rref_is_reduced() {
        let f = Field::prime(7).unwrap();
        let mut s = Subspace::zero(3);
        s.insert(&f, fe(&f, &[0, 2, 3]));
        s.insert(&f, fe(&f, &[1, 1, 1]));
        for (r, &p) in s.rows().iter().zip(s.pivots()) {
            assert_eq!(r[p], Fe::ONE);
            for (r2, &p2) in s.rows().iter().zip(s.pivots()) {
                if p2 != p {
                    assert!(r2[p].is_zero());
                }
            }
        }
    }

    #[test]
    fn nullspace_of_zero_system_is_everything() {
        let f = Field::prime(5).unwrap();
        let m = Matrix::zeros(3, 4);
        assert_eq!(m.nullspace(&f).len(), 4);
    }

    #[test]
    fn inverse_roundtrip() {
        let f = Field::prime(7).unwrap();
        let m = Matrix::from_rows(&[fe(&f, &[1, 2, 0]), fe(&f, &[0, 1, 3]), fe(&f, &[4, 0, 1])]);
        let inv = m.inverse(&f).unwrap();
        assert_eq!(m.mul(&f, &inv).unwrap(), Matrix::identity(3));
        let sing = Matrix::from_rows(&[fe(&f, &[1, 2]), fe(&f, &[2, 4])]);
        assert!(sing.inverse(&f).is_err());
    }

    #[test]
    fn intersection_dimension() {
        let f = Field::prime(5).unwrap();
        let a = Subspace::span(&f, 3, &[fe(&f, &[1, 0, 0]), fe(&f, &[0, 1, 0])]);
        let b = Subspace::span(&f, 3, &[fe(&f, &[0, 1, 0]), fe(&f, &[0, 0, 1])]);
        let i = a.intersection(&f, &b);
        assert_eq!(i.dim(), 1);
        assert!(i.contains(&f, &fe(&f, &[0, 3, 0])));
    }
}
