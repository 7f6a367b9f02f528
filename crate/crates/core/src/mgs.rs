//! Constructions of maximal graded subalgebras and the closed-form
//! dimensions and class counts they are compared against.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cartan::{k_drops_top, BasisLabel, CartanAlgebra, Family, VectorField, YCoords};
use crate::error::{domain, Error, Result};
use crate::exactla::{solve_ad_constraint, AdConstraint, GradedSubspace, HomVec, Matrix, Subspace};
use crate::flags::{
    beta_profile, enumerate_profiles, index_partition, nu_value, standard_subspace, BetaProfile, IndexPartition, Nu, Profile,
    ProfileFamily, SuperDim,
};
use crate::scalars::Fe;
use crate::superspace::{Monomial, Poly};
use crate::verify::is_graded_subalgebra;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MgsType {
    I,
    II,
    #[serde(rename = "III-R")]
    IIIR,
    #[serde(rename = "III-S")]
    IIIS,
}

impl fmt::Display for MgsType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MgsType::I => "I",
            MgsType::II => "II",
            MgsType::IIIR => "III-R",
            MgsType::IIIS => "III-S",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    /// `W_-1 + W_0 + sum W'_i`.
    WPrime,
    /// `W_-1 + W_0 + W''_1`.
    WDoublePrime,
    /// `S_-1 + S_0`.
    SLocal,
    /// `S_-1 + S_0 + S''_1`.
    SDoublePrime,
    /// `H_-1 + H_0`.
    HLocal,
    /// `K_-2 + K_-1 + K_0 + sum K_i0`.
    KPrime,
    /// `K_-2 + K_-1 + K_0 + K_11 + K_22`.
    KDoublePrime,
    /// `M(V)`.
    MV,
    /// `M^K(1, V)`.
    MK1V,
    /// `M(L_-1, G_0)`.
    MG0,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::WPrime => "W-prime",
            Variant::WDoublePrime => "W-doubleprime",
            Variant::SLocal => "S-local",
            Variant::SDoublePrime => "S-doubleprime",
            Variant::HLocal => "H-local",
            Variant::KPrime => "K-prime",
            Variant::KDoublePrime => "K-doubleprime",
            Variant::MV => "M(V)",
            Variant::MK1V => "MK(1,V)",
            Variant::MG0 => "M(L-1,G0)",
        })
    }
}

/// The parameters of an algebra, enough to evaluate closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Params {
    pub family: Family,
    pub p: u32,
    pub m: usize,
    pub n: usize,
}

impl Params {
    pub fn of(alg: &CartanAlgebra) -> Params {
        Params { family: alg.family(), p: alg.p(), m: alg.m(), n: alg.n() }
    }

    pub fn r(&self) -> usize {
        self.m / 2
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(p={},m={},n={})", self.family, self.p, self.m, self.n)
    }
}

pub struct MgsDescriptor {
    pub params: Params,
    pub mgs_type: MgsType,
    pub variant: Variant,
    pub profile: Option<Profile>,
    /// Name of a user-supplied or library `G_0`.
    pub g0: Option<String>,
    pub subspace: GradedSubspace,
    pub dim: usize,
    pub formula: Option<i64>,
}

impl MgsDescriptor {
    pub fn matches(&self) -> Option<bool> {
        self.formula.map(|f| f == self.dim as i64)
    }

    pub fn label(&self) -> String {
        match (&self.profile, &self.g0) {
            (Some(p), _) => format!("{} {}", self.variant, p),
            (None, Some(g)) => format!("{} {}", self.variant, g),
            _ => self.variant.to_string(),
        }
    }
}

fn emit(
    alg: &CartanAlgebra,
    mgs_type: MgsType,
    variant: Variant,
    profile: Option<Profile>,
    g0: Option<String>,
    subspace: GradedSubspace,
    formula: Option<i64>,
) -> Result<MgsDescriptor> {
    if !is_graded_subalgebra(alg, &subspace)? {
        return domain(format!("{variant} construction in {} is not closed under the bracket", alg.name()));
    }
    Ok(MgsDescriptor { params: Params::of(alg), mgs_type, variant, profile, g0, dim: subspace.dim(), subspace, formula })
}

// ----- helper subspaces -----

fn w_algebra(alg: &CartanAlgebra) -> Result<&CartanAlgebra> {
    match alg.family() {
        Family::W => Ok(alg),
        Family::S => Ok(alg.ambient_w().expect("S has an ambient W")),
        _ => domain("vector-field constructions apply to W and S"),
    }
}

/// `ker div` on `L_d` for W or S.
pub fn divergence_kernel(alg: &CartanAlgebra, d: i32) -> Result<Subspace> {
    let dim = alg.comp_dim(d);
    let off = alg.comp_offset(d);
    let sp = alg.space();
    let f = *alg.field();
    let targets = sp.monomials_of_degree(d);
    let mut mat = Matrix::zeros(targets.len(), dim);
    for k in 0..dim {
        let div = alg.divergence(&alg.basis_element(off + k))?;
        for (row, mono) in targets.iter().enumerate() {
            mat.set(row, k, div.coeff(mono));
        }
        debug_assert!(div.terms().all(|(mono, _)| targets.contains(mono)));
    }
    Ok(Subspace::span(&f, dim, &mat.nullspace(&f)))
}

/// `{f D : f in O_d}` inside `L_d` (W or S); errors if some `f D` is not in S.
pub fn degree_derivation_multiples(alg: &CartanAlgebra, d: i32) -> Result<Subspace> {
    let sp = alg.space();
    let f = *alg.field();
    let nv = sp.num_vars();
    let mut s = Subspace::zero(alg.comp_dim(d));
    for mono in sp.monomials_of_degree(d) {
        let g = Poly::term(mono, Fe::ONE);
        let mut v = VectorField::zero(nv);
        for i in 1..=nv {
            v.coeffs[i - 1] = sp.mul(&g, &sp.var_poly(i));
        }
        let e = alg.from_vector_field(&v)?;
        if !e.is_zero() {
            s.insert(&f, alg.to_hom(&e)?.coords);
        }
    }
    Ok(s)
}

/// `K_ij = { f z^j : f in O_{i+2-2j}, [1, f] = 0 }`.
pub fn k_ij(alg: &CartanAlgebra, i: i32, j: u8) -> Result<Subspace> {
    if alg.family() != Family::K {
        return domain("K_ij is defined for K");
    }
    let m = alg.m();
    let off = alg.comp_offset(i);
    let mut s = Subspace::zero(alg.comp_dim(i));
    for k in 0..alg.comp_dim(i) {
        let BasisLabel::Poly { mono } = alg.label(off + k) else { unreachable!() };
        if mono.alpha[m - 1] == j {
            let mut v = vec![Fe::ZERO; alg.comp_dim(i)];
            v[k] = Fe::ONE;
            s.insert(alg.field(), v);
        }
    }
    Ok(s)
}

/// Graded subspace with a single nonzero component.
fn single(alg: &CartanAlgebra, d: i32, s: Subspace) -> GradedSubspace {
    let mut g = GradedSubspace::zero(alg);
    g.set(d, s);
    g
}

// ----- type I -----

/// All type-I constructions of the family, with formula values.
pub fn type1_subalgebras(alg: &CartanAlgebra) -> Result<Vec<MgsDescriptor>> {
    let pr = Params::of(alg);
    let p = alg.p() as i64;
    let (m, n) = (alg.m(), alg.n());
    let critical = (m as i64 - n as i64 + 1).rem_euclid(p) == 0;
    let mut out = Vec::new();
    match alg.family() {
        Family::W => {
            let mut mp = GradedSubspace::components(alg, -1, 0);
            for d in 1..=alg.xi() - 2 {
                mp.set(d, divergence_kernel(alg, d)?);
            }
            out.push(emit(
                alg,
                MgsType::I,
                Variant::WPrime,
                None,
                None,
                mp,
                Some(formula_dimension(&Formula::Type1(Variant::WPrime), &pr)?),
            )?);
            if !critical {
                let mut mpp = GradedSubspace::components(alg, -1, 0);
                mpp.set(1, degree_derivation_multiples(alg, 1)?);
                let fd = formula_dimension(&Formula::Type1(Variant::WDoublePrime), &pr)?;
                out.push(emit(alg, MgsType::I, Variant::WDoublePrime, None, None, mpp, Some(fd))?);
            }
        }
        Family::S => {
            let mut loc = GradedSubspace::components(alg, -1, 0);
            let variant = if critical {
                loc.set(1, degree_derivation_multiples(alg, 1)?);
                Variant::SDoublePrime
            } else {
                Variant::SLocal
            };
            let fd = formula_dimension(&Formula::Type1(variant), &pr)?;
            out.push(emit(alg, MgsType::I, variant, None, None, loc, Some(fd))?);
        }
        Family::H => {
            let loc = GradedSubspace::components(alg, -1, 0);
            let fd = formula_dimension(&Formula::Type1(Variant::HLocal), &pr)?;
            out.push(emit(alg, MgsType::I, Variant::HLocal, None, None, loc, Some(fd))?);
        }
        Family::K => {
            let mut mp = GradedSubspace::components(alg, -2, 0);
            for d in 1..=alg.max_degree() {
                mp.set(d, k_ij(alg, d, 0)?);
            }
            let fd = formula_dimension(&Formula::Type1(Variant::KPrime), &pr)?;
            out.push(emit(alg, MgsType::I, Variant::KPrime, None, None, mp, Some(fd))?);
            let mut mpp = GradedSubspace::components(alg, -2, 0);
            if alg.max_degree() >= 1 {
                mpp.set(1, k_ij(alg, 1, 1)?);
            }
            if alg.max_degree() >= 2 {
                mpp.set(2, k_ij(alg, 2, 2)?);
            }
            let fd = formula_dimension(&Formula::Type1(Variant::KDoublePrime), &pr)?;
            out.push(emit(alg, MgsType::I, Variant::KDoublePrime, None, None, mpp, Some(fd))?);
        }
    }
    Ok(out)
}

// ----- the recursive constructions -----

fn check_v(alg: &CartanAlgebra, v: &GradedSubspace) -> Result<Subspace> {
    v.check_algebra(alg)?;
    if v.comps().any(|(d, s)| d != -1 && s.dim() > 0) {
        return domain("V must lie in L_-1");
    }
    let v1 = v.comp(-1).cloned().unwrap_or_else(|| Subspace::zero(alg.comp_dim(-1)));
    if v1.dim() == 0 || v1.is_full() {
        return domain("V must be a nontrivial proper subspace of L_-1");
    }
    Ok(v1)
}

fn hom_basis(d: i32, s: &Subspace) -> Vec<HomVec> {
    s.rows().iter().map(|r| HomVec { degree: d, coords: r.clone() }).collect()
}

/// `M(V)` as a graded subspace.
pub fn m_of_v_space(alg: &CartanAlgebra, v: &GradedSubspace) -> Result<GradedSubspace> {
    let v1 = check_v(alg, v)?;
    let f = *alg.field();
    let mut out = GradedSubspace::zero(alg);
    out.set(-1, v1.clone());
    let gens = hom_basis(-1, &v1);
    if alg.comp_dim(-2) > 0 {
        let mut s = Subspace::zero(alg.comp_dim(-2));
        for a in &gens {
            for b in &gens {
                if let Some(br) = alg.bracket_hom(a, b) {
                    s.insert(&f, br.coords);
                }
            }
        }
        out.set(-2, s);
    }
    let mut prev = v1;
    for i in 0..=alg.max_degree() {
        let sol = solve_ad_constraint(alg, i, &[AdConstraint { gens: &gens, target: &prev }])?;
        out.set(i, sol.clone());
        prev = sol;
    }
    Ok(out)
}

/// `M(V)` for a nontrivial proper graded `V` in `L_-1`.
pub fn m_of_v(alg: &CartanAlgebra, v: &GradedSubspace, profile: Option<Profile>) -> Result<MgsDescriptor> {
    let space = m_of_v_space(alg, v)?;
    let formula = match profile {
        Some(p) => Some(formula_dimension(&Formula::Type2(p), &Params::of(alg))?),
        None => None,
    };
    emit(alg, MgsType::II, Variant::MV, profile, None, space, formula)
}

/// `M^K(1, V)` for isotropic `V` in K.
pub fn mk1_of_v(alg: &CartanAlgebra, v: &GradedSubspace, profile: Option<Profile>) -> Result<MgsDescriptor> {
    if alg.family() != Family::K {
        return domain("M^K(1, V) is defined for K");
    }
    let v1 = check_v(alg, v)?;
    let (bp, _) = beta_profile(alg, v)?;
    if !bp.is_isotropic() {
        return domain(format!("M^K(1, V) needs isotropic V, got beta-dimension {bp}"));
    }
    let mut out = GradedSubspace::zero(alg);
    out.set(-2, Subspace::full(alg.comp_dim(-2)));
    out.set(-1, v1.clone());
    let gens = hom_basis(-1, &v1);
    let one = vec![alg.unit(-2, 0)];
    let mut prev2 = Subspace::full(alg.comp_dim(-2));
    let mut prev = v1;
    for i in 0..=alg.max_degree() {
        let sol = solve_ad_constraint(alg, i, &[AdConstraint { gens: &gens, target: &prev }, AdConstraint { gens: &one, target: &prev2 }])?;
        out.set(i, sol.clone());
        prev2 = std::mem::replace(&mut prev, sol);
    }
    let formula = match profile {
        Some(p) => Some(formula_dimension(&Formula::Type2K1(p), &Params::of(alg))?),
        None => None,
    };
    emit(alg, MgsType::II, Variant::MK1V, profile, None, out, formula)
}

/// `M(L_-1, G_0)` as a graded subspace.
pub fn m_of_g0_space(alg: &CartanAlgebra, g0: &Subspace) -> Result<GradedSubspace> {
    if g0.ambient() != alg.comp_dim(0) {
        return Err(Error::Dimension("G_0 must be a subspace of L_0".into()));
    }
    if g0.is_full() {
        return domain("G_0 must be a proper subalgebra of L_0");
    }
    let g = single(alg, 0, g0.clone());
    if !is_graded_subalgebra(alg, &g)? {
        return domain("G_0 is not a subalgebra of L_0");
    }
    let mut out = GradedSubspace::components(alg, alg.min_degree(), -1);
    out.set(0, g0.clone());
    let gens = hom_basis(-1, &Subspace::full(alg.comp_dim(-1)));
    let mut prev = g0.clone();
    for i in 1..=alg.max_degree() {
        let sol = solve_ad_constraint(alg, i, &[AdConstraint { gens: &gens, target: &prev }])?;
        out.set(i, sol.clone());
        prev = sol;
    }
    Ok(out)
}

/// `M(L_-1, G_0)`; `profile` is the `V` with `G_0 = M_0(V)` for R-subalgebras.
pub fn m_of_g0(alg: &CartanAlgebra, g0: &Subspace, profile: Option<Profile>, name: Option<String>) -> Result<MgsDescriptor> {
    let space = m_of_g0_space(alg, g0)?;
    let (ty, formula) = match profile {
        Some(p) => (MgsType::IIIR, Some(formula_dimension(&Formula::Type3R(p), &Params::of(alg))?)),
        None => (MgsType::IIIS, None),
    };
    emit(alg, ty, Variant::MG0, profile, name, space, formula)
}

/// The degree-zero part of `M(V)` from the recursion, and from the printed basis.
pub struct M0Result {
    pub recursive: Subspace,
    pub printed: Option<Subspace>,
}

impl M0Result {
    pub fn agrees(&self) -> Option<bool> {
        self.printed.as_ref().map(|p| p == &self.recursive)
    }
}

/// `M_0(V)` for the standard `V` of a profile.
pub fn m0_of_v(alg: &CartanAlgebra, profile: &Profile) -> Result<M0Result> {
    let v = standard_subspace(alg, profile)?;
    let v1 = check_v(alg, &v)?;
    let gens = hom_basis(-1, &v1);
    let recursive = solve_ad_constraint(alg, 0, &[AdConstraint { gens: &gens, target: &v1 }])?;
    let printed = Some(printed_m0(alg, profile)?);
    Ok(M0Result { recursive, printed })
}

/// `x_i d_j` in local coordinates of `W_0`.
fn w0_vector(w: &CartanAlgebra, terms: &[(usize, usize, Fe)]) -> Result<VectorField> {
    let sp = w.space();
    let f = sp.field();
    let mut v = VectorField::zero(sp.num_vars());
    for &(i, j, c) in terms {
        v.coeffs[j - 1].add_scaled(f, &sp.var_poly(i), c);
    }
    Ok(v)
}

fn printed_m0(alg: &CartanAlgebra, profile: &Profile) -> Result<Subspace> {
    let f = *alg.field();
    let mut s = Subspace::zero(alg.comp_dim(0));
    match (alg.family(), profile) {
        (Family::W | Family::S, Profile::Super(SuperDim { k, l })) => {
            let w = w_algebra(alg)?;
            let (m, n) = (alg.m(), alg.n());
            let inside: Vec<usize> = (1..=*k).chain(m + 1..=m + l).collect();
            let all: Vec<usize> = (1..=m + n).collect();
            let outside: Vec<usize> = all.iter().copied().filter(|i| !inside.contains(i)).collect();
            let mut fields = Vec::new();
            let special = alg.family() == Family::S;
            for &i in &inside {
                for &j in &inside {
                    if !special || i != j {
                        fields.push(w0_vector(w, &[(i, j, Fe::ONE)])?);
                    }
                }
            }
            for &i in &outside {
                for &j in &all {
                    if !special || i != j {
                        fields.push(w0_vector(w, &[(i, j, Fe::ONE)])?);
                    }
                }
            }
            if special {
                for i in 2..=m + n {
                    let sign = if alg.space().var_parity(i) == 1 { Fe::ONE } else { f.from_i64(-1) };
                    fields.push(w0_vector(w, &[(1, 1, Fe::ONE), (i, i, sign)])?);
                }
            }
            for v in fields {
                let e = alg.from_vector_field(&v)?;
                s.insert(&f, alg.to_hom(&e)?.coords);
            }
        }
        (Family::H | Family::K, Profile::Beta(bp)) => {
            let part = index_partition(alg, bp)?;
            let ys = YCoords::new(alg, bp.d)?;
            let sp = alg.space();
            let m = alg.m();
            for mono in sp.monomials_of_degree(2) {
                let is_z = alg.family() == Family::K && mono.alpha[m - 1] > 0;
                let keep = is_z || lemma_48_value(nu_value(&mono, &part, m, alg.n()));
                if keep {
                    s.insert(&f, y_monomial_vector(alg, &ys, &mono)?.coords);
                }
            }
        }
        _ => return domain(format!("profile {profile} does not fit family {}", alg.family())),
    }
    Ok(s)
}

/// Values `0`, `1`, or `(1/3)^k 2^l` with `l > 1`.
pub fn lemma_48_value(nu: Nu) -> bool {
    match nu {
        Nu::Zero => true,
        Nu::Pair { j2bar, j3 } => (j2bar == 0 && j3 == 0) || j3 > 1,
    }
}

/// A y-monomial as a homogeneous vector of H or K.
pub fn y_monomial_vector(alg: &CartanAlgebra, ys: &YCoords, mono: &Monomial) -> Result<HomVec> {
    let x = ys.to_x(alg.space(), &Poly::term(*mono, Fe::ONE));
    let e = alg.from_poly(&x)?;
    let d = alg.space().degree(mono) - 2;
    if e.is_zero() {
        return Ok(HomVec { degree: d, coords: vec![Fe::ZERO; alg.comp_dim(d)] });
    }
    alg.to_hom(&e)
}

/// The span of basis y-monomials of H selected by `keep`.
fn y_monomial_span(alg: &CartanAlgebra, ys: &YCoords, keep: impl Fn(&Monomial) -> bool) -> Result<GradedSubspace> {
    let f = *alg.field();
    let mut out = GradedSubspace::zero(alg);
    let top = alg.space().top();
    for mono in alg.space().monomials() {
        if mono.is_one() || (alg.family() == Family::H && mono == top) {
            continue;
        }
        if keep(&mono) {
            out.insert_hom(&f, y_monomial_vector(alg, ys, &mono)?);
        }
    }
    Ok(out)
}

fn vars_of(mono: &Monomial, m: usize, n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (1..=m).filter(|&i| mono.alpha[i - 1] > 0).collect();
    v.extend((0..n).filter(|&j| mono.mask >> j & 1 == 1).map(|j| m + 1 + j));
    v
}

/// The closed description of `M(H_-1, M_0(V))`: `O_J1 + O_J3` for
/// nondegenerate V and `O_{J2 u J3} + O+_J2 Q_J2bar` for isotropic V.
pub fn printed_r_subalgebra(alg: &CartanAlgebra, bp: &BetaProfile) -> Result<GradedSubspace> {
    if alg.family() != Family::H {
        return domain("the closed R-subalgebra description is for H");
    }
    let part = index_partition(alg, bp)?;
    let ys = YCoords::new(alg, bp.d)?;
    let (m, n) = (alg.m(), alg.n());
    let within = |vars: &[usize], set: &[usize]| vars.iter().all(|i| set.contains(i));
    if bp.is_nondegenerate() {
        y_monomial_span(alg, &ys, |mono| {
            let vars = vars_of(mono, m, n);
            within(&vars, &part.j1) || within(&vars, &part.j3)
        })
    } else if bp.is_isotropic() {
        let j23: Vec<usize> = part.j2.iter().chain(&part.j3).copied().collect();
        y_monomial_span(alg, &ys, |mono| {
            let vars = vars_of(mono, m, n);
            if within(&vars, &j23) {
                return true;
            }
            let bar: Vec<usize> = vars.iter().copied().filter(|i| part.j2bar.contains(i)).collect();
            bar.len() == 1 && (bar[0] > m || mono.alpha[bar[0] - 1] == 1) && vars.iter().all(|i| part.j2.contains(i) || *i == bar[0])
        })
    } else {
        domain(format!("closed description needs nondegenerate or isotropic V, got {bp}"))
    }
}

/// `V^perp` in `L_-1`.
pub fn perp(alg: &CartanAlgebra, v: &GradedSubspace) -> Result<GradedSubspace> {
    let v1 = check_v(alg, v)?;
    let f = *alg.field();
    let g = crate::flags::beta_gram(alg);
    let dim = alg.comp_dim(-1);
    let mut mat = Matrix::zeros(v1.dim(), dim);
    for (r, row) in v1.rows().iter().enumerate() {
        for (j, gcol) in (0..dim).map(|j| (j, &g)) {
            let mut s = Fe::ZERO;
            for (i, &c) in row.iter().enumerate() {
                s = f.mul_add(s, c, gcol[i][j]);
            }
            mat.set(r, j, s);
        }
    }
    let mut out = GradedSubspace::zero(alg);
    out.set(-1, Subspace::span(&f, dim, &mat.nullspace(&f)));
    Ok(out)
}

// ----- enumerations -----

pub struct Enumeration {
    pub descriptors: Vec<MgsDescriptor>,
    /// Number of profiles enumerated.
    pub raw_count: usize,
    /// Number of isomorphism classes after the identifications the theory
    /// makes (`V ~ V^perp` for nondegenerate V in type III-R of H).
    pub class_count: usize,
}

fn family_guard(alg: &CartanAlgebra, sel: ProfileFamily) -> Result<Vec<Profile>> {
    enumerate_profiles(alg, sel)
}

/// Every type-II construction of the algebra.
pub fn enumerate_type2(alg: &CartanAlgebra) -> Result<Enumeration> {
    let jobs: Vec<(Profile, bool)> = match alg.family() {
        Family::W | Family::S | Family::H => {
            let sel = if alg.family() == Family::H { ProfileFamily::Script } else { ProfileFamily::All };
            family_guard(alg, sel)?.into_iter().map(|p| (p, false)).collect()
        }
        Family::K => {
            let script = family_guard(alg, ProfileFamily::Script)?;
            let wscript = family_guard(alg, ProfileFamily::WScript)?;
            let nd_or_iso = |p: &Profile| {
                let b = p.as_beta().unwrap();
                b.is_nondegenerate() || b.is_isotropic()
            };
            let mut jobs: Vec<(Profile, bool)> = script.iter().filter(|p| !nd_or_iso(p)).map(|p| (*p, false)).collect();
            jobs.extend(wscript.iter().filter(|p| nd_or_iso(p)).map(|p| (*p, false)));
            jobs.extend(script.iter().filter(|p| p.as_beta().unwrap().is_isotropic()).map(|p| (*p, true)));
            jobs
        }
    };
    let raw_count = jobs.len();
    let descriptors: Vec<MgsDescriptor> = jobs
        .par_iter()
        .map(|&(prof, k1)| {
            let v = standard_subspace(alg, &prof)?;
            if k1 {
                mk1_of_v(alg, &v, Some(prof))
            } else {
                m_of_v(alg, &v, Some(prof))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let descriptors = dedup(descriptors);
    Ok(Enumeration { class_count: raw_count, raw_count, descriptors })
}

/// Every type-III R-subalgebra construction `M(L_-1, M_0(V))`.
pub fn enumerate_type3r(alg: &CartanAlgebra) -> Result<Enumeration> {
    let profiles: Vec<Profile> = match alg.family() {
        Family::W | Family::S => family_guard(alg, ProfileFamily::All)?,
        Family::H => {
            let mut v = family_guard(alg, ProfileFamily::N)?;
            v.extend(family_guard(alg, ProfileFamily::I)?);
            v
        }
        Family::K => family_guard(alg, ProfileFamily::I)?,
    };
    let raw_count = profiles.len();
    let descriptors: Vec<MgsDescriptor> = profiles
        .par_iter()
        .map(|prof| {
            let m0 = m0_of_v(alg, prof)?;
            m_of_g0(alg, &m0.recursive, Some(*prof), None)
        })
        .collect::<Result<Vec<_>>>()?;
    let class_count = if alg.family() == Family::H {
        let (r, n) = (alg.r(), alg.n());
        let mut classes: Vec<Profile> = Vec::new();
        for p in &profiles {
            let b = p.as_beta().unwrap();
            let dual = Profile::Beta(BetaProfile { a: r - b.a, b: r - b.b, c: 0, d: n - b.d });
            if !(b.is_nondegenerate() && classes.contains(&dual)) {
                classes.push(*p);
            }
        }
        classes.len()
    } else {
        raw_count
    };
    let descriptors = dedup(descriptors);
    Ok(Enumeration { descriptors, raw_count, class_count })
}

fn dedup(descs: Vec<MgsDescriptor>) -> Vec<MgsDescriptor> {
    let mut out: Vec<MgsDescriptor> = Vec::new();
    for d in descs {
        if !out.iter().any(|o| o.subspace == d.subspace) {
            out.push(d);
        }
    }
    out
}

// ----- closed forms -----

/// A closed-form dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formula {
    Type1(Variant),
    /// `M(V)` for the given profile.
    Type2(Profile),
    /// `M^K(1, V)`.
    Type2K1(Profile),
    /// `M(L_-1, M_0(V))`.
    Type3R(Profile),
}

/// A closed-form class count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassCount {
    Type2,
    Type3R,
}

fn pw(b: i128, e: usize) -> i128 {
    b.pow(e as u32)
}

fn exact_div(num: i128, den: i128, what: &str) -> Result<i128> {
    if num % den != 0 {
        return Err(Error::NonIntegral(format!("{what}: {num}/{den}")));
    }
    Ok(num / den)
}

fn partition_of(pr: &Params, b: &BetaProfile) -> Result<IndexPartition> {
    // Only the combinatorics of the family are needed, so build over a tiny
    // case-independent description.
    crate::flags::partition_for(pr.family, pr.m, pr.n, b)
}

fn beta_of(pr: &Params, prof: &Profile) -> Result<BetaProfile> {
    match (pr.family, prof) {
        (Family::H | Family::K, Profile::Beta(b)) if b.is_admissible(pr.r(), pr.n) => Ok(*b),
        _ => Err(Error::Parameter(format!("profile {prof} does not fit {pr}"))),
    }
}

fn super_of(pr: &Params, prof: &Profile) -> Result<SuperDim> {
    match (pr.family, prof) {
        (Family::W | Family::S, Profile::Super(s)) if s.k <= pr.m && s.l <= pr.n => Ok(*s),
        _ => Err(Error::Parameter(format!("profile {prof} does not fit {pr}"))),
    }
}

/// Exact value of a closed-form dimension.
pub fn formula_dimension(sel: &Formula, pr: &Params) -> Result<i64> {
    let p = pr.p as i128;
    let (m, n, r) = (pr.m as i128, pr.n as i128, pr.r() as i128);
    let (mu, nu) = (pr.m, pr.n);
    let delta = i128::from(k_drops_top(pr.p, pr.m, pr.n));
    let base = pw(2, nu) * pw(p, mu);
    let v = match (pr.family, sel) {
        (Family::W, Formula::Type1(Variant::WPrime)) => (m + n - 1) * base + 2,
        (Family::W, Formula::Type1(Variant::WDoublePrime)) => (m + n) * (m + n + 2),
        (Family::S, Formula::Type1(Variant::SDoublePrime)) => (m + n) * (m + n) + 2 * (m + n) - 1,
        (Family::S, Formula::Type1(Variant::SLocal)) => (m + n) * (m + n) + (m + n) - 1,
        (Family::H, Formula::Type1(Variant::HLocal)) => (m + n) * (m + n) + m,
        (Family::K, Formula::Type1(Variant::KPrime)) => pw(2, nu) * pw(p, 2 * pr.r()) + 1,
        (Family::K, Formula::Type1(Variant::KDoublePrime)) => (2 * r + n) * (2 * r + n) + 4 * r + n + 3,
        (Family::W, Formula::Type2(prof)) => {
            let s = super_of(pr, prof)?;
            base * (m + n) - pw(2, s.l) * pw(p, s.k) * (m + n - s.k as i128 - s.l as i128)
        }
        (Family::S, Formula::Type2(prof)) => {
            let s = super_of(pr, prof)?;
            base * (m + n - 1) + 1 - pw(2, s.l) * pw(p, s.k) * (m + n - s.k as i128 - s.l as i128)
        }
        (Family::H, Formula::Type2(prof)) => {
            let b = beta_of(pr, prof)?;
            let (bb, c, d) = (b.b as i128, b.c as i128, b.d as i128);
            base + pw(p, 2 * b.a) * pw(2, b.d) - pw(p, b.a + b.b) * pw(2, b.c + b.d) * (m - 2 * bb + n - d - 2 * c + 1) - 2
        }
        (Family::K, Formula::Type2(prof)) => {
            let b = beta_of(pr, prof)?;
            let (a, bb, c, d) = (b.a as i128, b.b as i128, b.c as i128, b.d as i128);
            if b.is_isotropic() {
                base - pw(p, b.b) * pw(2, b.c) * (m - 2 * bb + n - 2 * c) - delta
            } else {
                let part = partition_of(pr, &b)?;
                if b.is_nondegenerate() && part.is_single(&part.j3) {
                    base - (2 * r - 2 * a + n - d) * pw(p, 2 * b.a + 1) * pw(2, b.d) - p
                } else {
                    base + pw(p, 2 * b.a + 1) * pw(2, b.d) - pw(p, b.a + b.b + 1) * pw(2, b.c + b.d) * (m - 2 * bb + n - d - 2 * c) - delta
                }
            }
        }
        (Family::K, Formula::Type2K1(prof)) => {
            let b = beta_of(pr, prof)?;
            if !b.is_isotropic() {
                return Err(Error::Parameter(format!("M^K(1, V) needs isotropic V, got {b}")));
            }
            let (bb, c) = (b.b as i128, b.c as i128);
            base - pw(p, b.b + 1) * pw(2, b.c) * (m - 2 * bb + n - 2 * c) + p - delta
        }
        (Family::W, Formula::Type3R(prof)) => {
            let s = super_of(pr, prof)?;
            let (k, l) = (s.k as i128, s.l as i128);
            pw(2, nu - s.l) * pw(p, mu - s.k) * (m + n - k - l) + base * (k + l)
        }
        (Family::S, Formula::Type3R(prof)) => {
            let s = super_of(pr, prof)?;
            let (k, l) = (s.k as i128, s.l as i128);
            pw(2, nu - s.l) * pw(p, mu - s.k) * (m + n) + base * (k + l - 1) - k - 1
        }
        (Family::H, Formula::Type3R(prof)) => {
            let b = beta_of(pr, prof)?;
            if b.is_nondegenerate() {
                pw(p, 2 * b.a) * pw(2, b.d) + pw(p, 2 * (pr.r() - b.a)) * pw(2, nu - b.d) - 2
            } else if b.is_isotropic() {
                pw(p, mu - b.b) * pw(2, nu - b.c) + (b.b + b.c) as i128 * pw(p, b.b) * pw(2, b.c) - 1
            } else {
                return Err(Error::Parameter(format!("no closed form for R-subalgebra with {b}")));
            }
        }
        (Family::K, Formula::Type3R(prof)) => {
            let b = beta_of(pr, prof)?;
            if !b.is_isotropic() {
                return Err(Error::Parameter(format!("no closed form for R-subalgebra with {b}")));
            }
            let part = partition_of(pr, &b)?;
            let (bb, c) = (b.b as i128, b.c as i128);
            if part.j3.is_empty() {
                pw(p, b.b + 1) * pw(2, b.c) * (bb + c + 1)
            } else {
                pw(p, b.b) * pw(2, b.c) * (pw(p, mu - 2 * b.b) * pw(2, nu - 2 * b.c) + bb + c)
            }
        }
        _ => return Err(Error::Parameter(format!("no closed form {sel:?} for {pr}"))),
    };
    i64::try_from(v).map_err(|_| Error::Parameter("formula value overflows".into()))
}

/// Exact value of a closed-form class count.
pub fn formula_class_count(sel: ClassCount, pr: &Params) -> Result<i64> {
    let (m, n, r) = (pr.m as i128, pr.n as i128, pr.r() as i128);
    let odd = pr.n % 2 == 1;
    let v = match (sel, pr.family) {
        (_, Family::W | Family::S) => (m + 1) * (n + 1) - 2,
        (ClassCount::Type2, Family::H) => {
            let num =
                if odd { (r + 1) * (r * (n + 2) * (n + 2) + 2 * n * n + 6 - r) } else { (r + 1) * (r * (n + 2) * (n + 2) + 2 * n * n + 8) };
            exact_div(num, 8, "type II class count of H")? - 2
        }
        (ClassCount::Type2, Family::K) => {
            if odd {
                exact_div((r + 1) * (r * (n + 2) * (n + 2) + 2 * n * n + 4 * n + 2 - r), 8, "type II class count of K")? + r - 1
            } else {
                exact_div((r + 1) * (r * (n + 2) * (n + 2) + 2 * n * n + 4 * n + 8), 8, "type II class count of K")? + r - 2
            }
        }
        (ClassCount::Type3R, Family::H) => {
            let num = if odd { n * r + 3 * n + r - 1 } else { n * r + 3 * n + 2 * r - 2 };
            exact_div(num, 2, "R-subalgebra class count of H")? + (r / 2) * (n + 1)
        }
        (ClassCount::Type3R, Family::K) => {
            let num = if odd { r * n + n + r - 1 } else { r * n + n + 2 * r - 2 };
            exact_div(num, 2, "R-subalgebra class count of K")?
        }
    };
    i64::try_from(v).map_err(|_| Error::Parameter("class count overflows".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::build;

    fn pr(family: Family, p: u32, m: usize, n: usize) -> Params {
        Params { family, p, m, n }
    }

    fn sd(k: usize, l: usize) -> Profile {
        Profile::Super(SuperDim { k, l })
    }

    fn bp(a: usize, b: usize, c: usize, d: usize) -> Profile {
        Profile::Beta(BetaProfile { a, b, c, d })
    }

    #[test]
    fn formula_examples() {
        assert_eq!(formula_dimension(&Formula::Type2(sd(2, 1)), &pr(Family::W, 5, 2, 2)).unwrap(), 350);
        assert_eq!(formula_dimension(&Formula::Type2(bp(0, 0, 0, 2)), &pr(Family::H, 5, 2, 2)).unwrap(), 90);
        assert_eq!(formula_dimension(&Formula::Type3R(bp(0, 1, 1, 0)), &pr(Family::H, 5, 2, 2)).unwrap(), 29);
        assert_eq!(formula_dimension(&Formula::Type2K1(bp(0, 1, 0, 0)), &pr(Family::K, 5, 3, 2)).unwrap(), 430);
        assert_eq!(formula_dimension(&Formula::Type3R(sd(1, 1)), &pr(Family::W, 5, 2, 2)).unwrap(), 220);
        assert_eq!(formula_dimension(&Formula::Type3R(sd(1, 1)), &pr(Family::S, 5, 2, 2)).unwrap(), 138);
        assert!(formula_dimension(&Formula::Type2(sd(1, 1)), &pr(Family::H, 5, 2, 2)).is_err());
    }

    #[test]
    fn class_count_examples() {
        assert_eq!(formula_class_count(ClassCount::Type2, &pr(Family::W, 5, 2, 2)).unwrap(), 7);
        assert_eq!(formula_class_count(ClassCount::Type2, &pr(Family::H, 5, 2, 2)).unwrap(), 6);
        assert_eq!(formula_class_count(ClassCount::Type3R, &pr(Family::H, 5, 2, 2)).unwrap(), 4);
        assert_eq!(formula_class_count(ClassCount::Type2, &pr(Family::K, 5, 3, 2)).unwrap(), 9);
        assert_eq!(formula_class_count(ClassCount::Type3R, &pr(Family::K, 5, 3, 2)).unwrap(), 2);
    }

    #[test]
    fn w_type1_dims() {
        let w = build(Family::W, 5, 2, 2).unwrap();
        let t = type1_subalgebras(&w).unwrap();
        let dims: Vec<(usize, Option<i64>)> = t.iter().map(|d| (d.dim, d.formula)).collect();
        assert_eq!(dims, vec![(302, Some(302)), (24, Some(24))]);
    }

    #[test]
    fn w_m_of_v_and_m0() {
        let w = build(Family::W, 5, 2, 2).unwrap();
        let v = standard_subspace(&w, &sd(1, 1)).unwrap();
        assert_eq!(m_of_v(&w, &v, Some(sd(1, 1))).unwrap().dim, 380);
        let m0 = m0_of_v(&w, &sd(1, 1)).unwrap();
        assert_eq!(m0.recursive.dim(), 12);
        assert_eq!(m0.agrees(), Some(true));
    }

    #[test]
    fn h_closed_descriptions() {
        let h = build(Family::H, 5, 2, 2).unwrap();
        for (prof, dim) in [(BetaProfile::new(0, 0, 0, 1), 50), (BetaProfile::new(0, 0, 1, 0), 51)] {
            let m0 = m0_of_v(&h, &Profile::Beta(prof)).unwrap();
            assert_eq!(m0.agrees(), Some(true));
            let built = m_of_g0_space(&h, &m0.recursive).unwrap();
            let printed = printed_r_subalgebra(&h, &prof).unwrap();
            assert_eq!(printed.dim(), dim);
            assert_eq!(built, printed);
        }
    }
}
