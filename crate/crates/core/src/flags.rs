//! Invariants of subspaces of `L_-1`: superdimensions for W and S, the
//! bilinear form `beta` and beta-dimensions `(a, b, c, d)` for H and K, the
//! index partition `J1, J2, J2bar, J3`, and the value `nu` of y-monomials.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cartan::{CartanAlgebra, Family, YCoords};
use crate::error::{domain, Error, Result};
use crate::exactla::{GradedSubspace, HomVec, Subspace};
use crate::scalars::{Fe, Field};
use crate::superspace::Monomial;

/// `(dim V_0, dim V_1)` for W and S.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SuperDim {
    pub k: usize,
    pub l: usize,
}

/// beta-dimension `(a, b, c, d)` for H and K.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BetaProfile {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

impl BetaProfile {
    pub fn new(a: usize, b: usize, c: usize, d: usize) -> BetaProfile {
        BetaProfile { a, b, c, d }
    }

    pub fn dim(&self) -> usize {
        self.a + self.b + self.c + self.d
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.a == self.b && self.c == 0
    }

    pub fn is_isotropic(&self) -> bool {
        self.a == 0 && self.d == 0
    }

    /// `q = floor((n - d) / 2)`.
    pub fn q(&self, n: usize) -> usize {
        (n - self.d) / 2
    }

    pub fn is_admissible(&self, r: usize, n: usize) -> bool {
        self.a <= self.b && self.b <= r && self.d <= n && self.c <= (n - self.d) / 2
    }
}

impl fmt::Display for BetaProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.a, self.b, self.c, self.d)
    }
}

impl fmt::Display for SuperDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k, self.l)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Profile {
    Super(SuperDim),
    Beta(BetaProfile),
}

impl Profile {
    pub fn as_beta(&self) -> Option<BetaProfile> {
        match self {
            Profile::Beta(b) => Some(*b),
            Profile::Super(_) => None,
        }
    }

    pub fn as_super(&self) -> Option<SuperDim> {
        match self {
            Profile::Super(s) => Some(*s),
            Profile::Beta(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Profile::Super(s) => s.k + s.l,
            Profile::Beta(b) => b.dim(),
        }
    }

    /// Components as a list, for reports.
    pub fn tuple(&self) -> Vec<usize> {
        match self {
            Profile::Super(s) => vec![s.k, s.l],
            Profile::Beta(b) => vec![b.a, b.b, b.c, b.d],
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Super(s) => s.fmt(f),
            Profile::Beta(b) => b.fmt(f),
        }
    }
}

/// The index sets of a beta-dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexPartition {
    pub m: usize,
    pub i01: Vec<usize>,
    pub i01bar: Vec<usize>,
    pub i02: Vec<usize>,
    pub i02bar: Vec<usize>,
    pub i11: Vec<usize>,
    pub i12: Vec<usize>,
    pub i12bar: Vec<usize>,
    pub i03: Vec<usize>,
    pub i13: Vec<usize>,
    pub j1: Vec<usize>,
    pub j2: Vec<usize>,
    pub j2bar: Vec<usize>,
    pub j3: Vec<usize>,
}

/// Which block of the partition a variable belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Block {
    J1,
    J2,
    J2Bar,
    J3,
}

impl IndexPartition {
    fn odd_count(&self, set: &[usize]) -> Option<usize> {
        if set.iter().any(|&i| i <= self.m) {
            None
        } else {
            Some(set.len())
        }
    }

    /// No even index and exactly one odd index.
    pub fn is_single(&self, set: &[usize]) -> bool {
        self.odd_count(set) == Some(1)
    }

    /// No even index and exactly two odd indices.
    pub fn is_twinned(&self, set: &[usize]) -> bool {
        self.odd_count(set) == Some(2)
    }

    pub fn block_of(&self, i: usize) -> Option<Block> {
        if self.j1.contains(&i) {
            Some(Block::J1)
        } else if self.j2.contains(&i) {
            Some(Block::J2)
        } else if self.j2bar.contains(&i) {
            Some(Block::J2Bar)
        } else if self.j3.contains(&i) {
            Some(Block::J3)
        } else {
            None
        }
    }

    /// All indices covered, in increasing order.
    pub fn indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.j1.iter().chain(&self.j2).chain(&self.j2bar).chain(&self.j3).copied().collect();
        v.sort_unstable();
        v
    }
}

/// Symbolic `nu`: zero, or `(1/3)^j2bar * 2^j3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Nu {
    Zero,
    Pair { j2bar: u32, j3: u32 },
}

impl Nu {
    pub const ONE: Nu = Nu::Pair { j2bar: 0, j3: 0 };
}

fn range(lo: usize, hi: usize) -> Vec<usize> {
    if lo > hi {
        Vec::new()
    } else {
        (lo..=hi).collect()
    }
}

fn require_beta(alg: &CartanAlgebra) -> Result<()> {
    if matches!(alg.family(), Family::H | Family::K) {
        Ok(())
    } else {
        domain(format!("beta is defined for H and K, not {}", alg.family()))
    }
}

/// `beta(u, v)` on `L_-1`: the constant term of `D_H(u)(v)`.
pub fn beta_form(alg: &CartanAlgebra, u: &HomVec, v: &HomVec) -> Result<Fe> {
    require_beta(alg)?;
    let dim = alg.comp_dim(-1);
    if u.degree != -1 || v.degree != -1 || u.coords.len() != dim || v.coords.len() != dim {
        return domain("beta takes two vectors of L_-1");
    }
    let g = beta_gram(alg);
    let f = alg.field();
    let mut s = Fe::ZERO;
    for (i, &ui) in u.coords.iter().enumerate() {
        if ui.is_zero() {
            continue;
        }
        for (j, &vj) in v.coords.iter().enumerate() {
            let gij = g[i][j];
            if !vj.is_zero() && !gij.is_zero() {
                s = f.add(s, f.mul(f.mul(ui, vj), gij));
            }
        }
    }
    Ok(s)
}

/// Gram matrix of beta in the local basis of `L_-1`.
pub fn beta_gram(alg: &CartanAlgebra) -> Vec<Vec<Fe>> {
    let vars = alg.l_minus_one_vars();
    let dim = vars.len();
    let off = alg.comp_offset(-1);
    let gx = alg.beta_gram_x();
    let mut g = vec![vec![Fe::ZERO; dim]; dim];
    for (a, &i) in vars.iter().enumerate() {
        for (b, &j) in vars.iter().enumerate() {
            let li = alg.var_basis_index(i).unwrap() - off;
            let lj = alg.var_basis_index(j).unwrap() - off;
            g[li][lj] = gx.get(a, b);
        }
    }
    g
}

/// `y_i` as a vector of `L_-1`.
pub fn y_vector(alg: &CartanAlgebra, ys: &YCoords, i: usize) -> HomVec {
    let off = alg.comp_offset(-1);
    let mut coords = vec![Fe::ZERO; alg.comp_dim(-1)];
    for (j, &c) in ys.y_row(i).iter().enumerate() {
        if !c.is_zero() {
            let idx = alg.var_basis_index(j + 1).expect("y_i avoids z");
            coords[idx - off] = c;
        }
    }
    HomVec { degree: -1, coords }
}

/// `d_i` (W, S) or `x_i` (H, K) as a vector of `L_-1`.
pub fn var_vector(alg: &CartanAlgebra, i: usize) -> Result<HomVec> {
    let idx = alg.var_basis_index(i)?;
    let mut coords = vec![Fe::ZERO; alg.comp_dim(-1)];
    coords[idx - alg.comp_offset(-1)] = Fe::ONE;
    Ok(HomVec { degree: -1, coords })
}

fn split_parity(alg: &CartanAlgebra, v: &Subspace) -> Result<[Subspace; 2]> {
    let f = alg.field();
    let dim = alg.comp_dim(-1);
    let mut parts = [Subspace::zero(dim), Subspace::zero(dim)];
    for row in v.rows() {
        for (par, part) in parts.iter_mut().enumerate() {
            let proj: Vec<Fe> =
                row.iter().enumerate().map(|(k, &c)| if alg.local_parity(-1, k) as usize == par { c } else { Fe::ZERO }).collect();
            part.insert(f, proj);
        }
    }
    if parts[0].dim() + parts[1].dim() != v.dim() {
        return domain("subspace of L_-1 is not Z2-graded");
    }
    Ok(parts)
}

fn dot(f: &Field, g: &[Vec<Fe>], u: &[Fe], v: &[Fe]) -> Fe {
    let mut s = Fe::ZERO;
    for (i, &ui) in u.iter().enumerate() {
        if ui.is_zero() {
            continue;
        }
        for (j, &vj) in v.iter().enumerate() {
            if !vj.is_zero() && !g[i][j].is_zero() {
                s = f.add(s, f.mul(f.mul(ui, vj), g[i][j]));
            }
        }
    }
    s
}

fn axpy(f: &Field, y: &mut [Fe], a: Fe, x: &[Fe]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = f.mul_add(*yi, a, xi);
    }
}

/// The beta-dimension of a graded subspace of `L_-1` together with a
/// beta-basis in the printed order
/// `e_1..e_a, e_{r+1}..e_{r+a}, e_{a+1}..e_b | e_{m+1}..e_{m+c}, e_{m+n-d+1}..e_{m+n}`.
pub fn beta_profile(alg: &CartanAlgebra, v: &GradedSubspace) -> Result<(BetaProfile, Vec<HomVec>)> {
    require_beta(alg)?;
    v.check_algebra(alg)?;
    if v.comps().any(|(d, s)| d != -1 && s.dim() > 0) {
        return domain("subspace is not contained in L_-1");
    }
    let f = *alg.field();
    let g = beta_gram(alg);
    let v1 = v.comp(-1).cloned().unwrap_or_else(|| Subspace::zero(alg.comp_dim(-1)));
    let [even, odd] = split_parity(alg, &v1)?;

    beta_basis(&f, &g, even.rows().to_vec(), odd.rows().to_vec())
}

/// Runs the beta Gram-Schmidt on explicit even and odd spanning vectors of
/// `L_-1`, keeping their order. The output basis is in the printed order of
/// `beta_profile`.
pub fn beta_basis(f: &Field, g: &[Vec<Fe>], even: Vec<Vec<Fe>>, odd: Vec<Vec<Fe>>) -> Result<(BetaProfile, Vec<HomVec>)> {
    let f = *f;
    // Even part: peel hyperbolic pairs, the rest is the radical.
    let mut work: Vec<Vec<Fe>> = even;
    let mut es = Vec::new();
    let mut fs = Vec::new();
    loop {
        let mut found = None;
        'outer: for i in 0..work.len() {
            for j in i + 1..work.len() {
                if !dot(&f, g, &work[i], &work[j]).is_zero() {
                    found = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((i, j)) = found else { break };
        let e = work[i].clone();
        let mut fv = work[j].clone();
        let c = f.inv(dot(&f, g, &e, &fv))?;
        fv.iter_mut().for_each(|x| *x = f.mul(*x, c));
        let mut rest = Vec::new();
        for (k, mut w) in work.into_iter().enumerate() {
            if k == i || k == j {
                continue;
            }
            let bwf = dot(&f, g, &w, &fv);
            let bwe = dot(&f, g, &w, &e);
            axpy(&f, &mut w, f.neg(bwf), &e);
            axpy(&f, &mut w, bwe, &fv);
            rest.push(w);
        }
        work = rest;
        es.push(e);
        fs.push(fv);
    }
    let radical0 = work;

    // Odd part: peel vectors normalized to beta = -1, the rest is the radical.
    let minus_one = f.from_i64(-1);
    let mut work: Vec<Vec<Fe>> = odd;
    let mut aniso = Vec::new();
    while let Some((k, vec)) = normalized_anisotropic(&f, g, &work, minus_one)? {
        let mut rest = Vec::new();
        // Drop one vector the new one is combined from, keep the span.
        for (idx, mut w) in work.into_iter().enumerate() {
            if idx == k {
                continue;
            }
            // beta(vec, vec) = -1, so w + beta(w, vec) vec is orthogonal to vec.
            let c = dot(&f, g, &w, &vec);
            axpy(&f, &mut w, c, &vec);
            rest.push(w);
        }
        work = rest;
        aniso.push(vec);
    }
    let radical1 = work;

    let prof = BetaProfile { a: es.len(), b: es.len() + radical0.len(), c: radical1.len(), d: aniso.len() };
    let basis = es.into_iter().chain(fs).chain(radical0).chain(radical1).chain(aniso).map(|coords| HomVec { degree: -1, coords }).collect();
    Ok((prof, basis))
}

/// Finds a vector in the span of `work` with `beta = target`, built from
/// `work[k]` plus multiples of the others, so replacing `work[k]` keeps the span.
fn normalized_anisotropic(f: &Field, g: &[Vec<Fe>], work: &[Vec<Fe>], target: Fe) -> Result<Option<(usize, Vec<Fe>)>> {
    let scale_to = |v: &[Fe]| -> Option<Vec<Fe>> {
        let q = dot(f, g, v, v);
        if q.is_zero() {
            return None;
        }
        let ratio = f.div(target, q).ok()?;
        let s = f.sqrt(ratio).ok()?;
        Some(v.iter().map(|&x| f.mul(x, s)).collect())
    };
    let mut any_nonzero = false;
    for (k, v) in work.iter().enumerate() {
        if !dot(f, g, v, v).is_zero() {
            any_nonzero = true;
        }
        if let Some(w) = scale_to(v) {
            return Ok(Some((k, w)));
        }
    }
    // v_k + t v_l for all pairs and scalars t.
    for k in 0..work.len() {
        for l in 0..work.len() {
            if k == l {
                continue;
            }
            if !dot(f, g, &work[k], &work[l]).is_zero() {
                any_nonzero = true;
            }
            for t in f.elements() {
                let mut w = work[k].clone();
                axpy(f, &mut w, t, &work[l]);
                if let Some(w) = scale_to(&w) {
                    return Ok(Some((k, w)));
                }
            }
        }
    }
    if any_nonzero {
        return Err(Error::NoSquareRoot("odd part of beta cannot be normalized to -1".into(), f.name()));
    }
    Ok(None)
}

/// The standard subspace of `L_-1` with the given profile.
pub fn standard_subspace(alg: &CartanAlgebra, profile: &Profile) -> Result<GradedSubspace> {
    let f = *alg.field();
    let (m, n) = (alg.m(), alg.n());
    let mut out = GradedSubspace::zero(alg);
    let total = alg.comp_dim(-1);
    match (alg.family(), profile) {
        (Family::W | Family::S, Profile::Super(s)) => {
            if s.k > m || s.l > n {
                return Err(Error::Parameter(format!("superdimension {s} is not admissible for m={m}, n={n}")));
            }
            for i in (1..=s.k).chain(m + 1..=m + s.l) {
                out.insert_hom(&f, var_vector(alg, i)?);
            }
        }
        (Family::H | Family::K, Profile::Beta(b)) => {
            let r = alg.r();
            if !b.is_admissible(r, n) {
                return Err(Error::Parameter(format!("beta-dimension {b} is not admissible for r={r}, n={n}")));
            }
            let ys = YCoords::new(alg, b.d)?;
            let idx = (1..=b.a).chain(r + 1..=r + b.a).chain(b.a + 1..=b.b).chain(m + 1..=m + b.c).chain(m + n - b.d + 1..=m + n);
            for i in idx {
                out.insert_hom(&f, y_vector(alg, &ys, i));
            }
        }
        _ => return domain(format!("profile {profile} does not fit family {}", alg.family())),
    }
    let dim = out.dim();
    if dim == 0 || dim == total {
        return domain(format!("profile {profile} gives a trivial or full subspace of L_-1"));
    }
    Ok(out)
}

/// The partition of the index set attached to a beta-dimension.
pub fn index_partition(alg: &CartanAlgebra, b: &BetaProfile) -> Result<IndexPartition> {
    require_beta(alg)?;
    partition_for(alg.family(), alg.m(), alg.n(), b)
}

/// `index_partition` from the family parameters alone.
pub fn partition_for(family: Family, m: usize, n: usize, b: &BetaProfile) -> Result<IndexPartition> {
    if !matches!(family, Family::H | Family::K) {
        return domain(format!("index partitions are defined for H and K, not {family}"));
    }
    let r = m / 2;
    if !b.is_admissible(r, n) {
        return Err(Error::Parameter(format!("beta-dimension {b} is not admissible for r={r}, n={n}")));
    }
    let q = b.q(n);
    let even_top = if family == Family::K { 2 * r } else { m };
    let i01 = range(1, b.a);
    let i01bar = range(r + 1, r + b.a);
    let i02 = range(b.a + 1, b.b);
    let i02bar = range(r + b.a + 1, r + b.b);
    let i11 = range(m + n - b.d + 1, m + n);
    let i12 = range(m + 1, m + b.c);
    let i12bar = range(m + q + 1, m + q + b.c);
    let mut i03 = range(b.b + 1, r);
    i03.extend(range(r + b.b + 1, even_top));
    let mut i13 = range(m + b.c + 1, m + q);
    i13.extend(range(m + q + b.c + 1, m + n - b.d));
    let cat = |a: &[usize], b: &[usize], c: &[usize]| -> Vec<usize> {
        let mut v: Vec<usize> = a.iter().chain(b).chain(c).copied().collect();
        v.sort_unstable();
        v
    };
    Ok(IndexPartition {
        m,
        j1: cat(&i01, &i01bar, &i11),
        j2: cat(&i02, &i12, &[]),
        j2bar: cat(&i02bar, &i12bar, &[]),
        j3: cat(&i03, &i13, &[]),
        i01,
        i01bar,
        i02,
        i02bar,
        i11,
        i12,
        i12bar,
        i03,
        i13,
    })
}

/// `nu` of a y-monomial. Variables outside the partition (`z` in K)
/// contribute no factor.
pub fn nu_value(mono: &Monomial, part: &IndexPartition, m: usize, n: usize) -> Nu {
    let (mut k, mut l) = (0u32, 0u32);
    let mut factor = |i: usize, mult: u32| -> bool {
        match part.block_of(i) {
            Some(Block::J2) => return false,
            Some(Block::J2Bar) => k += mult,
            Some(Block::J3) => l += mult,
            Some(Block::J1) | None => {}
        }
        true
    };
    for i in 1..=m {
        let e = mono.alpha[i - 1] as u32;
        if e > 0 && !factor(i, e) {
            return Nu::Zero;
        }
    }
    for j in 0..n {
        if mono.mask >> j & 1 == 1 && !factor(m + 1 + j, 1) {
            return Nu::Zero;
        }
    }
    Nu::Pair { j2bar: k, j3: l }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProfileFamily {
    /// Every nontrivial proper subspace.
    All,
    /// `J3` neither single nor twinned.
    Script,
    /// `J3` not twinned (K only).
    WScript,
    /// Nondegenerate, `J1` and `J3` not twinned.
    N,
    /// Isotropic, `J3` not twinned.
    I,
    /// Degenerate, `J3` empty, `J1` not twinned.
    D,
}

impl std::str::FromStr for ProfileFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<ProfileFamily> {
        Ok(match s {
            "all" | "V_all" => ProfileFamily::All,
            "script" | "V_script" => ProfileFamily::Script,
            "wscript" | "W_script" => ProfileFamily::WScript,
            "n" | "V_n" => ProfileFamily::N,
            "i" | "V_i" => ProfileFamily::I,
            "d" | "V_d" => ProfileFamily::D,
            _ => return Err(Error::Parameter(format!("unknown profile family {s:?}"))),
        })
    }
}

/// Profiles of nontrivial proper subspaces of `L_-1` in the selected family,
/// in lexicographic order.
pub fn enumerate_profiles(alg: &CartanAlgebra, sel: ProfileFamily) -> Result<Vec<Profile>> {
    let (m, n) = (alg.m(), alg.n());
    match alg.family() {
        Family::W | Family::S => {
            if sel != ProfileFamily::All {
                return domain(format!("selector {sel:?} applies to H and K only"));
            }
            let mut out = Vec::new();
            for k in 0..=m {
                for l in 0..=n {
                    if k + l > 0 && k + l < m + n {
                        out.push(Profile::Super(SuperDim { k, l }));
                    }
                }
            }
            Ok(out)
        }
        fam @ (Family::H | Family::K) => {
            if sel == ProfileFamily::WScript && fam != Family::K {
                return domain("the not-twinned family is defined for K only");
            }
            let r = alg.r();
            let total = 2 * r + n;
            let mut out = Vec::new();
            for a in 0..=r {
                for b in a..=r {
                    for d in 0..=n {
                        for c in 0..=(n - d) / 2 {
                            let prof = BetaProfile { a, b, c, d };
                            if prof.dim() == 0 || prof.dim() == total {
                                continue;
                            }
                            let part = index_partition(alg, &prof)?;
                            let j3_single = part.is_single(&part.j3);
                            let j3_twin = part.is_twinned(&part.j3);
                            let keep = match sel {
                                ProfileFamily::All => true,
                                ProfileFamily::Script => !j3_single && !j3_twin,
                                ProfileFamily::WScript => !j3_twin,
                                ProfileFamily::N => prof.is_nondegenerate() && !part.is_twinned(&part.j1) && !j3_twin,
                                ProfileFamily::I => prof.is_isotropic() && !j3_twin,
                                ProfileFamily::D => !prof.is_nondegenerate() && part.j3.is_empty() && !part.is_twinned(&part.j1),
                            };
                            if keep {
                                out.push(Profile::Beta(prof));
                            }
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::build;

    fn bp(a: usize, b: usize, c: usize, d: usize) -> Profile {
        Profile::Beta(BetaProfile { a, b, c, d })
    }

    #[test]
    fn beta_examples() {
        let h = build(Family::H, 5, 2, 2).unwrap();
        let f = *h.field();
        let ys = YCoords::new(&h, 0).unwrap();
        let y = |i| y_vector(&h, &ys, i);
        assert_eq!(beta_form(&h, &y(1), &y(2)).unwrap(), Fe::ONE);
        assert_eq!(beta_form(&h, &y(2), &y(1)).unwrap(), f.from_i64(-1));
        // In the q = 1 coordinates the odd block is [[0,-1],[-1,0]].
        assert_eq!(beta_form(&h, &y(3), &y(4)).unwrap(), f.from_i64(-1));
        assert!(beta_form(&h, &y(3), &y(3)).unwrap().is_zero());
    }

    #[test]
    fn gram_is_j_in_every_y_basis() {
        for (fam, m, n) in [(Family::H, 2, 2), (Family::H, 4, 3), (Family::K, 3, 2), (Family::K, 5, 3)] {
            let alg = build(fam, 5, m, n).unwrap();
            let f = *alg.field();
            let r = alg.r();
            for d in 0..=n {
                let ys = YCoords::new(&alg, d).unwrap();
                let q = ys.q();
                let idx: Vec<usize> = (1..=2 * r).chain(m + 1..=m + n).collect();
                for (a, &i) in idx.iter().enumerate() {
                    for (b, &j) in idx.iter().enumerate() {
                        let want = if a < 2 * r && b < 2 * r {
                            if j == i + r {
                                1
                            } else if i == j + r {
                                -1
                            } else {
                                0
                            }
                        } else if a >= 2 * r && b >= 2 * r {
                            let (x, y) = (i - m, j - m);
                            if (x <= q && y == x + q) || (y <= q && x == y + q) || (x > 2 * q && x == y) {
                                -1
                            } else {
                                0
                            }
                        } else {
                            0
                        };
                        let got = beta_form(&alg, &y_vector(&alg, &ys, i), &y_vector(&alg, &ys, j)).unwrap();
                        assert_eq!(got, f.from_i64(want), "{} d={d} ({i},{j})", alg.name());
                    }
                }
            }
        }
    }

    #[test]
    fn profile_examples() {
        let h = build(Family::H, 5, 2, 2).unwrap();
        let ys = YCoords::new(&h, 2).unwrap();
        let f = *h.field();
        let mut v = GradedSubspace::zero(&h);
        v.insert_hom(&f, y_vector(&h, &ys, 1));
        assert_eq!(beta_profile(&h, &v).unwrap().0, BetaProfile::new(0, 1, 0, 0));
        v.insert_hom(&f, y_vector(&h, &ys, 2));
        assert_eq!(beta_profile(&h, &v).unwrap().0, BetaProfile::new(1, 1, 0, 0));
        let mut w = GradedSubspace::zero(&h);
        w.insert_hom(&f, y_vector(&h, &ys, 3));
        w.insert_hom(&f, y_vector(&h, &ys, 4));
        assert_eq!(beta_profile(&h, &w).unwrap().0, BetaProfile::new(0, 0, 0, 2));
    }

    #[test]
    fn partition_examples() {
        let h = build(Family::H, 5, 2, 2).unwrap();
        let p = index_partition(&h, &BetaProfile::new(1, 1, 0, 0)).unwrap();
        assert_eq!((p.j1.clone(), p.j3.clone()), (vec![1, 2], vec![3, 4]));
        assert!(p.j2.is_empty() && p.j2bar.is_empty() && p.is_twinned(&p.j3));
        let p = index_partition(&h, &BetaProfile::new(0, 0, 1, 0)).unwrap();
        assert_eq!((p.j2.clone(), p.j2bar.clone(), p.j3.clone()), (vec![3], vec![4], vec![1, 2]));
        assert!(!p.is_twinned(&p.j3));
        let p = index_partition(&h, &BetaProfile::new(0, 0, 0, 1)).unwrap();
        assert_eq!((p.j1.clone(), p.i03.clone(), p.i13.clone()), (vec![4], vec![1, 2], vec![3]));
        assert!(!p.is_single(&p.j3) && !p.is_twinned(&p.j3));
    }

    #[test]
    fn nu_examples() {
        let h = build(Family::H, 5, 2, 2).unwrap();
        let sp = h.space();
        let p = index_partition(&h, &BetaProfile::new(0, 0, 1, 0)).unwrap();
        assert_eq!(nu_value(&sp.variable(3), &p, 2, 2), Nu::Zero);
        assert_eq!(nu_value(&sp.variable(4), &p, 2, 2), Nu::Pair { j2bar: 1, j3: 0 });
        let p = index_partition(&h, &BetaProfile::new(1, 1, 0, 0)).unwrap();
        assert_eq!(nu_value(&sp.monomial(&[1, 0], &[3]).unwrap(), &p, 2, 2), Nu::Pair { j2bar: 0, j3: 1 });
        // A J2bar variable squared.
        let p = index_partition(&h, &BetaProfile::new(0, 1, 0, 0)).unwrap();
        assert_eq!(p.j2bar, vec![2]);
        assert_eq!(nu_value(&sp.monomial(&[0, 2], &[]).unwrap(), &p, 2, 2), Nu::Pair { j2bar: 2, j3: 0 });
    }

    #[test]
    fn enumeration_examples() {
        let w = build(Family::W, 5, 2, 2).unwrap();
        assert_eq!(enumerate_profiles(&w, ProfileFamily::All).unwrap().len(), 7);
        let h = build(Family::H, 5, 2, 2).unwrap();
        let mut v = enumerate_profiles(&h, ProfileFamily::Script).unwrap();
        v.sort();
        let mut want = vec![bp(0, 0, 1, 0), bp(0, 1, 1, 0), bp(1, 1, 1, 0), bp(0, 0, 0, 1), bp(0, 1, 0, 2), bp(0, 0, 0, 2)];
        want.sort();
        assert_eq!(v, want);
        assert_eq!(enumerate_profiles(&h, ProfileFamily::N).unwrap(), vec![bp(0, 0, 0, 1), bp(1, 1, 0, 1)]);
        assert_eq!(enumerate_profiles(&h, ProfileFamily::I).unwrap(), vec![bp(0, 0, 1, 0), bp(0, 1, 1, 0)]);
    }

    #[test]
    fn standard_profiles_round_trip() {
        for (fam, m) in [(Family::H, 2), (Family::K, 3)] {
            let alg = build(fam, 5, m, 2).unwrap();
            for prof in enumerate_profiles(&alg, ProfileFamily::All).unwrap() {
                let v = standard_subspace(&alg, &prof).unwrap();
                let (got, basis) = beta_profile(&alg, &v).unwrap();
                assert_eq!(Profile::Beta(got), prof);
                assert_eq!(basis.len(), prof.dim());
            }
        }
    }

    #[test]
    fn standard_w_subspace() {
        let w = build(Family::W, 5, 2, 2).unwrap();
        let v = standard_subspace(&w, &Profile::Super(SuperDim { k: 1, l: 1 })).unwrap();
        assert_eq!(v.dim(), 2);
        assert!(v.contains_hom(w.field(), &var_vector(&w, 1).unwrap()));
        assert!(v.contains_hom(w.field(), &var_vector(&w, 3).unwrap()));
        assert!(standard_subspace(&w, &Profile::Super(SuperDim { k: 2, l: 2 })).is_err());
    }
}
