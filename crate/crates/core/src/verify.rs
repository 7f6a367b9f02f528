//! Closure and maximality certification, type classification and the
//! check suites that turn constructions into findings.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cartan::{CartanAlgebra, Family, VectorField};
use crate::error::{domain, Error, Result};
use crate::exactla::{bracket_closure, extend_closure, solve_ad_constraint, AdConstraint, GradedSubspace, HomVec, Subspace};
use crate::flags::{beta_basis, beta_gram, index_partition, standard_subspace, BetaProfile, Profile};
use crate::mgs::{
    self, degree_derivation_multiples, divergence_kernel, enumerate_type2, enumerate_type3r, formula_class_count, m0_of_v, m_of_g0,
    m_of_v_space, printed_r_subalgebra, type1_subalgebras, ClassCount, MgsDescriptor, MgsType, Params,
};
use crate::scalars::Fe;
use crate::superspace::{Monomial, Poly};

// ----- findings -----

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Match,
    Mismatch,
    SampledPass,
    SampledFail,
}

impl Status {
    pub fn is_failure(self) -> bool {
        matches!(self, Status::Mismatch | Status::SampledFail)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Match => "match",
            Status::Mismatch => "mismatch",
            Status::SampledPass => "sampled-pass",
            Status::SampledFail => "sampled-fail",
        })
    }
}

/// One checked claim. Boolean claims use 1 for true.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub claim: String,
    pub params: Params,
    /// What the claim is about inside the algebra, e.g. a profile.
    pub subject: String,
    pub expected: i64,
    pub computed: i64,
    pub status: Status,
    pub evidence: String,
    /// Set when the failure is a known discrepancy of a closed form.
    pub documented: Option<String>,
}

impl Finding {
    fn exact(claim: &str, pr: Params, subject: impl Into<String>, expected: i64, computed: i64, evidence: impl Into<String>) -> Finding {
        let status = if expected == computed { Status::Match } else { Status::Mismatch };
        let mut f = Finding {
            claim: claim.to_string(),
            params: pr,
            subject: subject.into(),
            expected,
            computed,
            status,
            evidence: evidence.into(),
            documented: None,
        };
        if status.is_failure() {
            f.documented = documented_discrepancy(&f).map(str::to_string);
        }
        f
    }

    fn flag(claim: &str, pr: Params, subject: impl Into<String>, holds: bool, evidence: impl Into<String>) -> Finding {
        Finding::exact(claim, pr, subject, 1, i64::from(holds), evidence)
    }

    /// A failure that is not on the allowlist.
    pub fn is_unexpected_failure(&self) -> bool {
        self.status.is_failure() && self.documented.is_none()
    }
}

/// Claims whose closed form disagrees with direct construction, with the reason.
pub const DOCUMENTED_DISCREPANCIES: &[(&str, Family, &str)] = &[
    (
        "structure.dim",
        Family::S,
        "closed form (m+n-1)2^n p^m + 1 is dim ker div; S is spanned by the D_ij images and misses the classes x^(pi-(p-1)e_i) x^omega d_i",
    ),
    ("type1.h.local.dim", Family::H, "closed form (m+n)^2+m exceeds dim H_-1 + dim H_0"),
    ("type1.k.m_doubleprime.dim", Family::K, "closed form (2r+n)^2+4r+n+3 exceeds the direct count of K_-2+K_-1+K_0+K_11+K_22"),
    ("type2.s.dim", Family::S, "closed form assumes dim S = (m+n-1)2^n p^m + 1; the construction equals M^W(V) meet S degree by degree"),
    (
        "type2.k.single_j3.dim",
        Family::K,
        "closed form for nondegenerate V with J3 single disagrees; the construction matches the general nondegenerate branch",
    ),
    ("type3r.s.dim", Family::S, "closed form disagrees; the construction equals M^W(L_-1, M_0(V)) meet S degree by degree"),
    ("type3r.h.class_count", Family::H, "identifying V with its orthogonal complement leaves fewer classes than the closed form"),
];

fn documented_discrepancy(f: &Finding) -> Option<&'static str> {
    DOCUMENTED_DISCREPANCIES.iter().find(|(claim, fam, _)| *claim == f.claim && *fam == f.params.family).map(|(_, _, why)| *why)
}

// ----- closure -----

/// `[M_i, M_j] in M_{i+j}` for every pair of stored components, checked on
/// all pairs of basis vectors.
pub fn is_graded_subalgebra(alg: &CartanAlgebra, m: &GradedSubspace) -> Result<bool> {
    Ok(closure_witness(alg, m)?.is_none())
}

/// A pair of basis vectors whose bracket leaves `M`, if any.
pub fn closure_witness(alg: &CartanAlgebra, m: &GradedSubspace) -> Result<Option<(HomVec, HomVec)>> {
    m.check_algebra(alg)?;
    let f = *alg.field();
    let comps: Vec<(i32, &Subspace)> = m.comps().filter(|(_, s)| s.dim() > 0).collect();
    let mut jobs = Vec::new();
    for (a, &(i, si)) in comps.iter().enumerate() {
        for &(j, sj) in &comps[a..] {
            if alg.comp_dim(i + j) == 0 {
                continue;
            }
            for (ka, ra) in si.rows().iter().enumerate() {
                let start = if i == j { ka } else { 0 };
                jobs.push((i, ra, j, sj, start));
            }
        }
    }
    let bad = jobs.par_iter().find_map_first(|&(i, ra, j, sj, start)| {
        let target = m.comp(i + j).expect("degree of the algebra");
        let u = HomVec { degree: i, coords: ra.clone() };
        for rb in &sj.rows()[start..] {
            let v = HomVec { degree: j, coords: rb.clone() };
            if let Some(b) = alg.bracket_hom(&u, &v) {
                if !target.contains(&f, &b.coords) {
                    return Some((u, v));
                }
            }
        }
        None
    });
    Ok(bad)
}

// ----- maximality -----

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaxMode {
    Exhaustive,
    Sampled,
}

impl FromStr for MaxMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<MaxMode> {
        match s {
            "exhaustive" => Ok(MaxMode::Exhaustive),
            "sampled" => Ok(MaxMode::Sampled),
            _ => Err(Error::Parameter(format!("unknown maximality mode {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxOptions {
    pub mode: MaxMode,
    /// Samples per complement component.
    pub samples: usize,
    pub seed: u64,
    /// Largest number of projective points enumerated in exhaustive mode.
    pub exhaustive_points: u64,
}

impl Default for MaxOptions {
    fn default() -> Self {
        MaxOptions { mode: MaxMode::Sampled, samples: 200, seed: 0, exhaustive_points: 156 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    TrueExhaustive,
    TrueSampled,
    False,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub degree: i32,
    pub complement_dim: usize,
    pub checked: usize,
    pub exhaustive: bool,
}

#[derive(Clone, Debug)]
pub struct MaximalityReport {
    pub verdict: Verdict,
    pub coverage: Vec<Coverage>,
    /// A homogeneous vector whose closure with `M` is proper.
    pub witness: Option<HomVec>,
    /// Dimension of that proper closure.
    pub intermediate_dim: Option<usize>,
}

impl MaximalityReport {
    pub fn samples(&self) -> usize {
        self.coverage.iter().map(|c| c.checked).sum()
    }

    pub fn min_per_degree(&self) -> usize {
        self.coverage.iter().map(|c| c.checked).min().unwrap_or(0)
    }
}

/// True when the degrees `-2..=1` of `s` are full. Every Cartan algebra here
/// is generated by its local part, so such a subalgebra is all of `L`.
fn local_part_full(alg: &CartanAlgebra, s: &GradedSubspace) -> bool {
    (alg.min_degree()..=1.min(alg.max_degree())).all(|d| s.dim_at(d) == alg.comp_dim(d))
}

fn closure_reaches_all(alg: &CartanAlgebra, m: &GradedSubspace, u: HomVec) -> bool {
    let mut closed = m.clone();
    extend_closure(alg, &mut closed, vec![u], &|s| local_part_full(alg, s))
}

fn combine(alg: &CartanAlgebra, d: i32, basis: &[Vec<Fe>], coeffs: &[Fe]) -> HomVec {
    let f = alg.field();
    let mut coords = vec![Fe::ZERO; alg.comp_dim(d)];
    for (row, &c) in basis.iter().zip(coeffs) {
        if !c.is_zero() {
            for (x, &y) in coords.iter_mut().zip(row) {
                *x = f.mul_add(*x, c, y);
            }
        }
    }
    HomVec { degree: d, coords }
}

/// Coefficient vectors of the projective points of `F^k`, normalized so the
/// first nonzero entry is 1.
fn projective_points(alg: &CartanAlgebra, k: usize) -> Vec<Vec<Fe>> {
    let f = alg.field();
    let elems: Vec<Fe> = f.elements().collect();
    let mut out = Vec::new();
    for lead in 0..k {
        let free = k - lead - 1;
        let count = elems.len().pow(free as u32);
        for mut idx in 0..count {
            let mut v = vec![Fe::ZERO; k];
            v[lead] = Fe::ONE;
            for slot in v.iter_mut().skip(lead + 1) {
                *slot = elems[idx % elems.len()];
                idx /= elems.len();
            }
            out.push(v);
        }
    }
    out
}

fn sample_seed(seed: u64, d: i32, k: usize) -> u64 {
    seed ^ (d as i64 as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (k as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9)
}

/// Checks that adding any homogeneous vector outside `M` generates `L`.
pub fn is_maximal_graded(alg: &CartanAlgebra, m: &GradedSubspace, opts: &MaxOptions) -> Result<MaximalityReport> {
    if let Some((u, v)) = closure_witness(alg, m)? {
        return domain(format!("subspace is not closed: bracket of degree {} and {} vectors leaves it", u.degree, v.degree));
    }
    if m.dim() == alg.dim() {
        return domain("subspace is all of L");
    }
    let f = *alg.field();
    let q = f.order();
    let mut coverage = Vec::new();
    let mut all_exhaustive = true;
    for d in alg.degrees() {
        let s = m.comp(d).expect("degree of the algebra");
        let comp = s.complement_basis();
        if comp.is_empty() {
            continue;
        }
        let k = comp.len();
        let points = (q.checked_pow(k as u32).unwrap_or(u64::MAX) - 1) / (q - 1);
        let exhaustive = opts.mode == MaxMode::Exhaustive && points <= opts.exhaustive_points;
        all_exhaustive &= exhaustive;
        let coeffs: Vec<Vec<Fe>> = if exhaustive {
            projective_points(alg, k)
        } else {
            (0..opts.samples)
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(opts.seed, d, i));
                    loop {
                        let c: Vec<Fe> = (0..k).map(|_| f.random(&mut rng)).collect();
                        if c.iter().any(|x| !x.is_zero()) {
                            break c;
                        }
                    }
                })
                .collect()
        };
        let fail = coeffs.par_iter().map(|c| combine(alg, d, &comp, c)).find_first(|u| !closure_reaches_all(alg, m, u.clone()));
        coverage.push(Coverage { degree: d, complement_dim: k, checked: coeffs.len(), exhaustive });
        if let Some(u) = fail {
            let mut closed = m.clone();
            extend_closure(alg, &mut closed, vec![u.clone()], &|_| false);
            return Ok(MaximalityReport { verdict: Verdict::False, coverage, witness: Some(u), intermediate_dim: Some(closed.dim()) });
        }
    }
    let verdict = if all_exhaustive { Verdict::TrueExhaustive } else { Verdict::TrueSampled };
    Ok(MaximalityReport { verdict, coverage, witness: None, intermediate_dim: None })
}

// ----- classification -----

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MgsClass {
    I,
    II,
    III,
    /// `M_-1 = 0`: the nonnegative part and its relatives.
    NonNegative,
}

impl fmt::Display for MgsClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MgsClass::I => "I",
            MgsClass::II => "II",
            MgsClass::III => "III",
            MgsClass::NonNegative => "nonnegative",
        })
    }
}

impl MgsClass {
    pub fn of_type(t: MgsType) -> MgsClass {
        match t {
            MgsType::I => MgsClass::I,
            MgsType::II => MgsClass::II,
            MgsType::IIIR | MgsType::IIIS => MgsClass::III,
        }
    }
}

/// Type of a proper graded subalgebra from its degree -1 and 0 parts.
pub fn classify_mgs_type(alg: &CartanAlgebra, m: &GradedSubspace) -> Result<MgsClass> {
    m.check_algebra(alg)?;
    let (d1, d0) = (m.dim_at(-1), m.dim_at(0));
    let (f1, f0) = (alg.comp_dim(-1), alg.comp_dim(0));
    Ok(if d1 == 0 {
        MgsClass::NonNegative
    } else if d1 < f1 {
        MgsClass::II
    } else if d0 == f0 {
        MgsClass::I
    } else {
        MgsClass::III
    })
}

// ----- random automorphisms -----

/// Images of the `L_-1` basis under a random admissible change of basis:
/// an even invertible matrix for W and S, a form-preserving one for H and K.
pub fn random_basis_change<R: Rng + ?Sized>(alg: &CartanAlgebra, rng: &mut R) -> Result<Vec<HomVec>> {
    let f = *alg.field();
    let dim = alg.comp_dim(-1);
    let vars = alg.l_minus_one_vars();
    let local = |i: usize| alg.var_basis_index(i).map(|k| k - alg.comp_offset(-1));
    let random_basis = |rng: &mut R, par: u8| -> Vec<Vec<Fe>> {
        let idx: Vec<usize> = (0..dim).filter(|&k| alg.local_parity(-1, k) == par).collect();
        loop {
            let mut s = Subspace::zero(dim);
            let rows: Vec<Vec<Fe>> = idx
                .iter()
                .map(|_| {
                    let mut v = vec![Fe::ZERO; dim];
                    for &k in &idx {
                        v[k] = f.random(rng);
                    }
                    v
                })
                .collect();
            if rows.iter().all(|r| s.insert(&f, r.clone())) {
                return rows;
            }
        }
    };
    let mut images = vec![HomVec { degree: -1, coords: vec![] }; dim];
    match alg.family() {
        Family::W | Family::S => {
            let (even, odd) = (random_basis(rng, 0), random_basis(rng, 1));
            let (mut e, mut o) = (even.into_iter(), odd.into_iter());
            for (k, img) in images.iter_mut().enumerate() {
                let row = if alg.local_parity(-1, k) == 0 { e.next() } else { o.next() };
                *img = HomVec { degree: -1, coords: row.expect("parity counts") };
            }
        }
        Family::H | Family::K => {
            let g = beta_gram(alg);
            let (even, odd) = (random_basis(rng, 0), random_basis(rng, 1));
            let (prof, basis) = beta_basis(&f, &g, even, odd)?;
            let r = alg.r();
            if prof != (BetaProfile { a: r, b: r, c: 0, d: alg.n() }) {
                return domain(format!("L_-1 has beta-dimension {prof}"));
            }
            let m = alg.m();
            // Printed order: x_1..x_r, x_{r+1}..x_{2r}, odd variables.
            let order: Vec<usize> = (1..=2 * r).chain(m + 1..=m + alg.n()).collect();
            for (v, img) in order.iter().zip(basis) {
                images[local(*v)?] = img;
            }
        }
    }
    debug_assert_eq!(vars.len(), dim);
    Ok(images)
}

// ----- suites -----

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Type1,
    Type2,
    Type3r,
    Type3s,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Identities, Suite::Type1, Suite::Type2, Suite::Type3r, Suite::Type3s];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Type1 => "type1",
            Suite::Type2 => "type2",
            Suite::Type3r => "type3r",
            Suite::Type3s => "type3s",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL.into_iter().find(|x| x.as_str() == s).ok_or_else(|| Error::Parameter(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub suites: Vec<Suite>,
    pub max: MaxOptions,
    /// Random triples for the Jacobi and related identities.
    pub identity_samples: usize,
    /// Random pairs for the bracket identities of `f D`.
    pub pair_samples: usize,
    /// Maximality checks per suite; the rest of the descriptors are only
    /// certified closed.
    pub max_checks: usize,
    /// Random automorphisms for the equivariance check.
    pub automorphisms: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            suites: Suite::ALL.to_vec(),
            max: MaxOptions::default(),
            identity_samples: 1000,
            pair_samples: 200,
            max_checks: 2,
            automorphisms: 5,
        }
    }
}

/// Runs the selected suites in order and returns their findings.
pub fn run_suite(alg: &CartanAlgebra, opts: &SuiteOptions) -> Vec<Finding> {
    let pr = Params::of(alg);
    let mut out = Vec::new();
    for suite in Suite::ALL {
        if !opts.suites.contains(&suite) {
            continue;
        }
        let res = match suite {
            Suite::Identities => identity_suite(alg, opts),
            Suite::Type1 => type1_suite(alg, opts),
            Suite::Type2 => type2_suite(alg, opts),
            Suite::Type3r => type3r_suite(alg, opts),
            Suite::Type3s => type3s_suite(alg, opts),
        };
        match res {
            Ok(fs) => out.extend(fs),
            Err(e) => out.push(Finding::flag(&format!("{}.error", suite.as_str()), pr, "", false, e.to_string())),
        }
    }
    out
}

fn fam(alg: &CartanAlgebra) -> String {
    alg.family().as_str().to_lowercase()
}

fn sign(f: &crate::scalars::Field, odd: bool) -> Fe {
    if odd {
        f.from_i64(-1)
    } else {
        Fe::ONE
    }
}

fn hom_or_zero(alg: &CartanAlgebra, v: Option<HomVec>, d: i32) -> Vec<Fe> {
    v.map(|h| h.coords).unwrap_or_else(|| vec![Fe::ZERO; alg.comp_dim(d)])
}

fn random_degree<R: Rng + ?Sized>(alg: &CartanAlgebra, rng: &mut R) -> i32 {
    rng.random_range(alg.min_degree()..=alg.max_degree())
}

/// Counts super-Jacobi, super-anticommutativity and grading violations on
/// random homogeneous triples.
pub fn identity_violations(alg: &CartanAlgebra, samples: usize, seed: u64) -> (usize, usize, usize) {
    let f = *alg.field();
    let results: Vec<(bool, bool, bool)> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(seed, 17, k));
            let pick = |rng: &mut ChaCha8Rng| {
                let d = random_degree(alg, rng);
                let par = rng.random_range(0..2u8);
                (alg.random_hom(rng, d, Some(par)), par)
            };
            let (a, pa) = pick(&mut rng);
            let (b, pb) = pick(&mut rng);
            let (c, pc) = pick(&mut rng);
            let br = |x: &HomVec, y: &HomVec| alg.bracket_hom(x, y);
            let nest = |x: &HomVec, y: &HomVec, z: &HomVec| br(y, z).and_then(|yz| br(x, &yz));
            let deg = a.degree + b.degree + c.degree;
            let mut sum = vec![Fe::ZERO; alg.comp_dim(deg)];
            let terms = [(nest(&a, &b, &c), pa & pc == 1), (nest(&b, &c, &a), pb & pa == 1), (nest(&c, &a, &b), pc & pb == 1)];
            for (t, odd) in terms {
                if let Some(t) = t {
                    for (s, x) in sum.iter_mut().zip(t.coords) {
                        *s = f.mul_add(*s, sign(&f, odd), x);
                    }
                }
            }
            let jacobi = sum.iter().all(|x| x.is_zero());
            let ab = hom_or_zero(alg, br(&a, &b), a.degree + b.degree);
            let ba = hom_or_zero(alg, br(&b, &a), a.degree + b.degree);
            let s = sign(&f, pa & pb == 1);
            let anti = ab.iter().zip(&ba).all(|(&x, &y)| f.mul_add(x, s, y).is_zero());
            let graded = match alg.bracket(&alg.from_hom(&a), &alg.from_hom(&b)) {
                Ok(e) if e.is_zero() => ab.iter().all(|x| x.is_zero()),
                Ok(e) => alg.to_hom(&e).is_ok_and(|h| h.degree == a.degree + b.degree && h.coords == ab),
                Err(_) => false,
            };
            (jacobi, anti, graded)
        })
        .collect();
    let count = |sel: fn(&(bool, bool, bool)) -> bool| results.iter().filter(|r| !sel(r)).count();
    (count(|r| r.0), count(|r| r.1), count(|r| r.2))
}

/// `{ f D : f in O_s }` as a vector field.
fn f_times_d(alg: &CartanAlgebra, fpoly: &Poly) -> VectorField {
    let sp = alg.space();
    let mut v = VectorField::zero(sp.num_vars());
    for i in 1..=sp.num_vars() {
        v.coeffs[i - 1] = sp.mul(fpoly, &sp.var_poly(i));
    }
    v
}

/// Violations of `div(f D) = (m-n+s) f` on every monomial and of
/// `[f D, g D] = (t-s) f g D` on random monomial pairs, in W.
pub fn degree_derivation_violations(alg: &CartanAlgebra, pairs: usize, seed: u64) -> Result<(usize, usize)> {
    if alg.family() != Family::W {
        return domain("the degree-derivation identities are checked in W");
    }
    let sp = alg.space();
    let f = *alg.field();
    let (m, n) = (alg.m() as i64, alg.n() as i64);
    let monos = sp.monomials();
    let mut div_bad = 0;
    for mono in &monos {
        let p = Poly::term(*mono, Fe::ONE);
        let s = mono.std_degree() as i64;
        let lhs = sp.divergence(&f_times_d(alg, &p));
        if lhs != p.scale(&f, f.from_i64(m - n + s)) {
            div_bad += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut br_bad = 0;
    for _ in 0..pairs {
        let a: Monomial = monos[rng.random_range(0..monos.len())];
        let b: Monomial = monos[rng.random_range(0..monos.len())];
        let (pa, pb) = (Poly::term(a, Fe::ONE), Poly::term(b, Fe::ONE));
        let lhs = sp.field_bracket(&f_times_d(alg, &pa), &f_times_d(alg, &pb));
        let c = f.from_i64(b.std_degree() as i64 - a.std_degree() as i64);
        let mut rhs = f_times_d(alg, &sp.mul(&pa, &pb));
        rhs.coeffs.iter_mut().for_each(|x| *x = x.scale(&f, c));
        if lhs != rhs {
            br_bad += 1;
        }
    }
    Ok((div_bad, br_bad))
}

/// Violations of the derivation law: W and S act on O by derivations
/// compatible with the bracket; for H and K the map to W is a homomorphism.
fn derivation_violations(alg: &CartanAlgebra, samples: usize, seed: u64) -> Result<usize> {
    let sp = alg.space();
    let f = *alg.field();
    let monos = sp.monomials();
    let mut bad = 0;
    for k in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(seed, 31, k));
        let (da, db) = (random_degree(alg, &mut rng), random_degree(alg, &mut rng));
        let (pa, pb) = (rng.random_range(0..2u8), rng.random_range(0..2u8));
        let a = alg.random_hom(&mut rng, da, Some(pa));
        let b = alg.random_hom(&mut rng, db, Some(pb));
        let (ea, eb) = (alg.from_hom(&a), alg.from_hom(&b));
        let ab = alg.bracket(&ea, &eb)?;
        let ok = match alg.family() {
            Family::W | Family::S => {
                let (va, vb, vab) = (alg.to_vector_field(&ea)?, alg.to_vector_field(&eb)?, alg.to_vector_field(&ab)?);
                let g = Poly::term(monos[rng.random_range(0..monos.len())], Fe::ONE);
                let lhs = sp.apply_field(&vab, &g);
                let rhs = sp
                    .apply_field(&va, &sp.apply_field(&vb, &g))
                    .sub(&f, &sp.apply_field(&vb, &sp.apply_field(&va, &g)).scale(&f, sign(&f, pa & pb == 1)));
                lhs == rhs
            }
            Family::H | Family::K => {
                let to_w = |e| -> Result<VectorField> {
                    let p = alg.to_poly(e)?;
                    if alg.family() == Family::H {
                        alg.d_h(&p)
                    } else {
                        alg.d_k(&p)
                    }
                };
                sp.field_bracket(&to_w(&ea)?, &to_w(&eb)?) == to_w(&ab)?
            }
        };
        if !ok {
            bad += 1;
        }
    }
    Ok(bad)
}

/// Dimension of `{u in L_i : [L_-1, u] = 0}` summed over `i >= 0`.
pub fn transitivity_defect(alg: &CartanAlgebra) -> Result<usize> {
    let gens: Vec<HomVec> = (0..alg.comp_dim(-1)).map(|k| alg.unit(-1, k)).collect();
    let mut total = 0;
    for i in 0..=alg.max_degree() {
        let zero = Subspace::zero(alg.comp_dim(i - 1));
        total += solve_ad_constraint(alg, i, &[AdConstraint { gens: &gens, target: &zero }])?.dim();
    }
    Ok(total)
}

/// The closed-form dimension of the algebra.
pub fn structure_dim_formula(pr: &Params) -> i64 {
    let base = 2i64.pow(pr.n as u32) * (pr.p as i64).pow(pr.m as u32);
    let (m, n) = (pr.m as i64, pr.n as i64);
    match pr.family {
        Family::W => base * (m + n),
        Family::S => (m + n - 1) * base + 1,
        Family::H => base - 2,
        Family::K => base - i64::from(crate::cartan::k_drops_top(pr.p, pr.m, pr.n)),
    }
}

fn identity_suite(alg: &CartanAlgebra, opts: &SuiteOptions) -> Result<Vec<Finding>> {
    let pr = Params::of(alg);
    let seed = opts.max.seed;
    let mut out = Vec::new();
    out.push(Finding::exact("structure.dim", pr, "", structure_dim_formula(&pr), alg.dim() as i64, "basis count"));
    let n = opts.identity_samples;
    let (jac, anti, grad) = identity_violations(alg, n, seed);
    let ev = format!("{n} random homogeneous triples");
    out.push(Finding::exact("identities.jacobi", pr, "", 0, jac as i64, ev.clone()));
    out.push(Finding::exact("identities.anticommutativity", pr, "", 0, anti as i64, ev.clone()));
    out.push(Finding::exact("identities.grading", pr, "", 0, grad as i64, ev));
    let der = derivation_violations(alg, opts.pair_samples, seed)?;
    out.push(Finding::exact("identities.derivation", pr, "", 0, der as i64, format!("{} random pairs", opts.pair_samples)));
    if alg.family() == Family::W {
        let (div_bad, br_bad) = degree_derivation_violations(alg, opts.pair_samples, seed)?;
        out.push(Finding::exact("identities.w.fd_divergence", pr, "", 0, div_bad as i64, "every monomial f"));
        out.push(Finding::exact("identities.w.fd_bracket", pr, "", 0, br_bad as i64, format!("{} random pairs", opts.pair_samples)));
        let f = *alg.field();
        let p = alg.p() as i64;
        for s in 1..=alg.max_degree() {
            let wp = divergence_kernel(alg, s)?;
            let wpp = degree_derivation_multiples(alg, s)?;
            let critical = (alg.m() as i64 - alg.n() as i64 + s as i64).rem_euclid(p) == 0;
            let holds = if critical {
                wpp.is_subspace_of(&f, &wp)
            } else {
                wp.intersection(&f, &wpp).dim() == 0 && wp.dim() + wpp.dim() == alg.comp_dim(s)
            };
            let what = if critical { "W''_s inside W'_s" } else { "W_s = W'_s + W''_s direct" };
            out.push(Finding::flag(
                "identities.w.split",
                pr,
                format!("s={s}"),
                holds,
                format!("{what}; dims {} and {}", wp.dim(), wpp.dim()),
            ));
        }
    }
    let t = transitivity_defect(alg)?;
    out.push(Finding::exact("identities.transitivity", pr, "", 0, t as i64, "dim of ad L_-1 kernels in degrees >= 0"));
    let local = GradedSubspace::components(alg, alg.min_degree(), 1);
    let gen = bracket_closure(alg, &local).dim();
    out.push(Finding::exact("identities.local_generation", pr, "", alg.dim() as i64, gen as i64, "closure of the local part"));
    Ok(out)
}

fn descriptor_findings(alg: &CartanAlgebra, prefix: &str, d: &MgsDescriptor, check_max: bool, opts: &SuiteOptions) -> Result<Vec<Finding>> {
    let pr = d.params;
    let subject = d.label();
    let mut out = Vec::new();
    if let Some(fd) = d.formula {
        let claim = if single_j3_branch(alg, d) { format!("{prefix}.single_j3.dim") } else { format!("{prefix}.dim") };
        out.push(Finding::exact(&claim, pr, subject.clone(), fd, d.dim as i64, format!("dims by degree {:?}", d.subspace.dims())));
    }
    out.push(Finding::flag(&format!("{prefix}.closed"), pr, subject.clone(), is_graded_subalgebra(alg, &d.subspace)?, "all basis pairs"));
    let class = classify_mgs_type(alg, &d.subspace)?;
    out.push(Finding::flag(
        &format!("{prefix}.type"),
        pr,
        subject.clone(),
        class == MgsClass::of_type(d.mgs_type),
        format!("classified as {class}"),
    ));
    if check_max {
        out.push(maximality_finding(alg, &format!("{prefix}.maximal"), &subject, &d.subspace, &opts.max, true)?);
    }
    Ok(out)
}

/// The K branch whose closed form is `p^m 2^n - (2r-2a+n-d) p^(2a+1) 2^d - p`.
fn single_j3_branch(alg: &CartanAlgebra, d: &MgsDescriptor) -> bool {
    if alg.family() != Family::K || d.variant != mgs::Variant::MV {
        return false;
    }
    let Some(b) = d.profile.and_then(|p| p.as_beta()) else { return false };
    b.is_nondegenerate() && index_partition(alg, &b).is_ok_and(|part| part.is_single(&part.j3))
}

fn maximality_finding(
    alg: &CartanAlgebra,
    claim: &str,
    subject: &str,
    m: &GradedSubspace,
    max: &MaxOptions,
    expect: bool,
) -> Result<Finding> {
    let rep = is_maximal_graded(alg, m, max)?;
    let holds = rep.verdict != Verdict::False;
    let evidence = match (&rep.witness, rep.intermediate_dim) {
        (Some(w), Some(dim)) => format!("witness in degree {} generates a proper subalgebra of dim {dim}", w.degree),
        _ => format!("{:?}, {} extensions, at least {} per degree", rep.verdict, rep.samples(), rep.min_per_degree()),
    };
    let mut f = Finding::flag(claim, Params::of(alg), subject, holds == expect, evidence);
    f.expected = i64::from(expect);
    f.computed = i64::from(holds);
    f.status = match (holds == expect, rep.verdict == Verdict::TrueSampled) {
        (true, false) => Status::Match,
        (false, false) => Status::Mismatch,
        (true, true) => Status::SampledPass,
        (false, true) => Status::SampledFail,
    };
    if f.status.is_failure() {
        f.documented = documented_discrepancy(&f).map(str::to_string);
    }
    Ok(f)
}

fn type1_suite(alg: &CartanAlgebra, opts: &SuiteOptions) -> Result<Vec<Finding>> {
    let mut out = Vec::new();
    let descs = type1_subalgebras(alg)?;
    out.push(Finding::exact(&format!("type1.{}.count", fam(alg)), Params::of(alg), "", type1_count(alg), descs.len() as i64, ""));
    for (k, d) in descs.iter().enumerate() {
        let prefix = format!("type1.{}.{}", fam(alg), variant_key(d.variant));
        out.extend(descriptor_findings(alg, &prefix, d, k < opts.max_checks, opts)?);
    }
    Ok(out)
}

fn type1_count(alg: &CartanAlgebra) -> i64 {
    let critical = (alg.m() as i64 - alg.n() as i64 + 1).rem_euclid(alg.p() as i64) == 0;
    match alg.family() {
        Family::W => {
            if critical {
                1
            } else {
                2
            }
        }
        Family::S | Family::H => 1,
        Family::K => 2,
    }
}

fn variant_key(v: mgs::Variant) -> &'static str {
    use mgs::Variant::*;
    match v {
        WPrime | KPrime => "m_prime",
        WDoublePrime | SDoublePrime | KDoublePrime => "m_doubleprime",
        SLocal | HLocal => "local",
        MV => "m_v",
        MK1V => "mk1_v",
        MG0 => "m_g0",
    }
}

fn type2_suite(alg: &CartanAlgebra, opts: &SuiteOptions) -> Result<Vec<Finding>> {
    let pr = Params::of(alg);
    let f = fam(alg);
    let mut out = Vec::new();
    let en = enumerate_type2(alg)?;
    let cc = formula_class_count(ClassCount::Type2, &pr)?;
    out.push(Finding::exact(
        &format!("type2.{f}.class_count"),
        pr,
        "",
        cc,
        en.class_count as i64,
        format!("{} distinct subalgebras", en.descriptors.len()),
    ));
    for (k, d) in en.descriptors.iter().enumerate() {
        out.extend(descriptor_findings(alg, &format!("type2.{f}"), d, k < opts.max_checks, opts)?);
    }
    // Distinct profiles give distinct dimensions or at least distinct subspaces.
    out.push(Finding::exact(
        &format!("type2.{f}.distinct"),
        pr,
        "",
        en.raw_count as i64,
        en.descriptors.len() as i64,
        "after dedup by subspace",
    ));
    if let Some(first) = en.descriptors.first() {
        let prof = first.profile.expect("type II descriptors carry a profile");
        let v = standard_subspace(alg, &prof)?;
        let (ok, total) = equivariance_check(alg, &v, opts.automorphisms, opts.max.seed)?;
        out.push(Finding::exact(
            &format!("type2.{f}.equivariance"),
            pr,
            first.label(),
            total as i64,
            ok as i64,
            format!("{total} random admissible basis changes"),
        ));
    }
    Ok(out)
}

/// How many of `count` random automorphisms satisfy `phi(M(V)) = M(phi V)`.
pub fn equivariance_check(alg: &CartanAlgebra, v: &GradedSubspace, count: usize, seed: u64) -> Result<(usize, usize)> {
    let base = m_of_v_space(alg, v)?;
    let results: Vec<Result<bool>> = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(seed, 53, k));
            let images = random_basis_change(alg, &mut rng)?;
            let g = alg.induced_automorphism(&images)?;
            let lhs = alg.apply_automorphism_subspace(&g, &base)?;
            let rhs = m_of_v_space(alg, &alg.apply_automorphism_subspace(&g, v)?)?;
            Ok(lhs == rhs)
        })
        .collect();
    let mut ok = 0;
    for r in results {
        ok += usize::from(r?);
    }
    Ok((ok, count))
}

fn type3r_suite(alg: &CartanAlgebra, opts: &SuiteOptions) -> Result<Vec<Finding>> {
    let pr = Params::of(alg);
    let f = fam(alg);
    let mut out = Vec::new();
    let en = enumerate_type3r(alg)?;
    let cc = formula_class_count(ClassCount::Type3R, &pr)?;
    out.push(Finding::exact(
        &format!("type3r.{f}.class_count"),
        pr,
        "",
        cc,
        en.class_count as i64,
        format!("{} profiles, {} distinct subalgebras", en.raw_count, en.descriptors.len()),
    ));
    for (k, d) in en.descriptors.iter().enumerate() {
        out.extend(descriptor_findings(alg, &format!("type3r.{f}"), d, k < opts.max_checks, opts)?);
        let prof = d.profile.expect("R-subalgebras carry a profile");
        let m0 = m0_of_v(alg, &prof)?;
        out.push(Finding::flag(
            &format!("type3r.{f}.m0_printed"),
            pr,
            d.label(),
            m0.agrees() == Some(true),
            format!("dim {}", m0.recursive.dim()),
        ));
        if alg.family() == Family::H {
            let b = prof.as_beta().expect("beta profile");
            if b.is_nondegenerate() || b.is_isotropic() {
                let printed = printed_r_subalgebra(alg, &b)?;
                out.push(Finding::flag(
                    &format!("type3r.{f}.closed_form_space"),
                    pr,
                    d.label(),
                    printed == d.subspace,
                    format!("printed dim {}", printed.dim()),
                ));
            }
            if b.is_nondegenerate() {
                let dual = Profile::Beta(BetaProfile { a: alg.r() - b.a, b: alg.r() - b.b, c: 0, d: alg.n() - b.d });
                let m0d = m0_of_v(alg, &dual)?;
                let dd = mgs::m_of_g0_space(alg, &m0d.recursive)?.dim();
                out.push(Finding::exact(
                    &format!("type3r.{f}.perp_symmetry"),
                    pr,
                    d.label(),
                    d.dim as i64,
                    dd as i64,
                    format!("against {dual}"),
                ));
            }
        }
    }
    Ok(out)
}

/// Example irreducible subalgebras of `L_0` for the S-subalgebra criteria.
pub fn g0_library(alg: &CartanAlgebra) -> Result<Vec<(String, Subspace)>> {
    let f = *alg.field();
    let sp = alg.space();
    let mut out = Vec::new();
    match alg.family() {
        Family::W | Family::S => {
            if alg.family() == Family::W {
                out.push(("sl".to_string(), divergence_kernel(alg, 0)?));
            }
            if alg.m().is_multiple_of(2) {
                let mut s = Subspace::zero(alg.comp_dim(0));
                for mono in sp.monomials_of_degree(2) {
                    let v = sp.d_h(&Poly::term(mono, Fe::ONE), false);
                    s.insert(&f, alg.to_hom(&alg.from_vector_field(&v)?)?.coords);
                }
                // D lies in S_0 exactly when p divides m - n.
                if let Ok(d) = degree_derivation_multiples(alg, 0) {
                    s = s.sum(&f, &d);
                }
                out.push(("cosp".to_string(), s));
            }
        }
        Family::H => {}
        Family::K => {
            let m = alg.m();
            let mut s = Subspace::zero(alg.comp_dim(0));
            let off = alg.comp_offset(0);
            for k in 0..alg.comp_dim(0) {
                let crate::cartan::BasisLabel::Poly { mono } = alg.label(off + k) else { unreachable!() };
                if mono.alpha[m - 1] == 0 {
                    s.insert(&f, alg.unit(0, k).coords);
                }
            }
            out.push(("osp".to_string(), s));
        }
    }
    Ok(out)
}

/// Whether `L_-1` is an irreducible `G_0`-module, by generating the
/// submodule of every projective point.
pub fn is_irreducible(alg: &CartanAlgebra, g0: &Subspace) -> Result<bool> {
    const MAX_POINTS: u64 = 20_000;
    let f = *alg.field();
    let n = alg.comp_dim(-1);
    let q = f.order();
    let points = (q.checked_pow(n as u32).unwrap_or(u64::MAX) - 1) / (q - 1);
    if points > MAX_POINTS {
        return domain(format!("irreducibility check needs {points} points"));
    }
    let gens: Vec<HomVec> = g0.rows().iter().map(|r| HomVec { degree: 0, coords: r.clone() }).collect();
    let reducible = projective_points(alg, n).into_par_iter().any(|c| {
        let mut s = Subspace::zero(n);
        let mut queue = vec![c];
        while let Some(v) = queue.pop() {
            if !s.insert(&f, v.clone()) {
                continue;
            }
            let hv = HomVec { degree: -1, coords: v };
            for g in &gens {
                queue.push(alg.bracket_hom(g, &hv).expect("L_-1 is nonzero").coords);
            }
        }
        s.dim() < n
    });
    Ok(!reducible)
}

fn degree0_closure(alg: &CartanAlgebra, g0: &Subspace, u: HomVec) -> Subspace {
    let mut g = GradedSubspace::zero(alg);
    g.set(0, g0.clone());
    extend_closure(alg, &mut g, vec![u], &|_| false);
    g.comp(0).expect("degree 0").clone()
}

/// Enlarges an irreducible `G_0` while some one-vector extension is a
/// proper irreducible subalgebra. Candidates are the complement basis and
/// `samples` random complement vectors per round.
pub fn grow_to_maximal_irreducible(alg: &CartanAlgebra, g0: &Subspace, samples: usize, seed: u64) -> Result<Subspace> {
    let f = *alg.field();
    let full = alg.comp_dim(0);
    let mut cur = g0.clone();
    'grow: loop {
        let comp = cur.complement_basis();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cands: Vec<HomVec> = comp.iter().map(|r| HomVec { degree: 0, coords: r.clone() }).collect();
        for _ in 0..samples {
            let c: Vec<Fe> = (0..comp.len()).map(|_| f.random(&mut rng)).collect();
            cands.push(combine(alg, 0, &comp, &c));
        }
        for u in cands {
            if u.is_zero() {
                continue;
            }
            let bigger = degree0_closure(alg, &cur, u);
            if bigger.dim() < full && is_irreducible(alg, &bigger)? {
                cur = bigger;
                continue 'grow;
            }
        }
        return Ok(cur);
    }
}

/// The S-subalgebra criterion for `M(L_-1, G_0)`.
pub fn s_subalgebra_criterion(alg: &CartanAlgebra, m: &GradedSubspace) -> Result<bool> {
    let m1 = m.comp(1).cloned().unwrap_or_else(|| Subspace::zero(0));
    Ok(match alg.family() {
        Family::W => {
            let mut any = false;
            for row in m1.rows() {
                let e = alg.from_hom(&HomVec { degree: 1, coords: row.clone() });
                any |= !alg.divergence(&e)?.is_zero();
            }
            any
        }
        Family::S | Family::H => m1.dim() > 0,
        Family::K => {
            let one = alg.unit(-2, 0);
            m1.rows().iter().any(|row| alg.bracket_hom(&one, &HomVec { degree: 1, coords: row.clone() }).is_some_and(|b| !b.is_zero()))
        }
    })
}

fn type3s_suite(alg: &CartanAlgebra, opts: &SuiteOptions) -> Result<Vec<Finding>> {
    let pr = Params::of(alg);
    let f = fam(alg);
    let mut out = Vec::new();
    for (name, g0) in g0_library(alg)? {
        let irreducible = is_irreducible(alg, &g0)?;
        out.push(Finding::flag(&format!("type3s.{f}.irreducible"), pr, name.clone(), irreducible, format!("dim {}", g0.dim())));
        if !irreducible {
            continue;
        }
        let grown = grow_to_maximal_irreducible(alg, &g0, 20, opts.max.seed)?;
        let subject = if grown.dim() == g0.dim() { name.clone() } else { format!("{name}, grown to dim {}", grown.dim()) };
        let d = m_of_g0(alg, &grown, None, Some(subject.clone()))?;
        let crit = s_subalgebra_criterion(alg, &d.subspace)?;
        let mut fm = maximality_finding(alg, &format!("type3s.{f}.criterion"), &subject, &d.subspace, &opts.max, crit)?;
        fm.evidence = format!("criterion {crit}, dims {:?}; {}", d.subspace.dims(), fm.evidence);
        out.push(fm);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::build;
    use crate::flags::{var_vector, SuperDim};

    #[test]
    fn closure_examples() {
        let w = build(Family::W, 5, 2, 2).unwrap();
        assert!(is_graded_subalgebra(&w, &GradedSubspace::components(&w, 0, w.max_degree())).unwrap());
        let f = *w.field();
        let mut s = GradedSubspace::zero(&w);
        s.insert_hom(&f, var_vector(&w, 1).unwrap());
        let sp = w.space();
        for (i, j) in [(1, 2), (2, 1)] {
            let mut v = VectorField::zero(4);
            v.coeffs[j - 1] = sp.var_poly(i);
            s.insert_hom(&f, w.to_hom(&w.from_vector_field(&v).unwrap()).unwrap());
        }
        assert!(!is_graded_subalgebra(&w, &s).unwrap());
    }

    #[test]
    fn maximality_examples() {
        let w = build(Family::W, 5, 2, 2).unwrap();
        let opts = MaxOptions { samples: 10, ..MaxOptions::default() };
        let mut partial = GradedSubspace::components(&w, -1, -1);
        partial.set(0, divergence_kernel(&w, 0).unwrap());
        let rep = is_maximal_graded(&w, &partial, &opts).unwrap();
        assert_eq!(rep.verdict, Verdict::False);
        assert_eq!(rep.witness.unwrap().degree, 0);
        assert_eq!(rep.intermediate_dim, Some(20));
        let nonneg = GradedSubspace::components(&w, 0, w.max_degree());
        assert_eq!(is_maximal_graded(&w, &nonneg, &opts).unwrap().verdict, Verdict::TrueSampled);
        assert_eq!(classify_mgs_type(&w, &nonneg).unwrap(), MgsClass::NonNegative);
    }

    #[test]
    fn exhaustive_points() {
        let w = build(Family::W, 5, 2, 2).unwrap();
        assert_eq!(projective_points(&w, 2).len(), 6);
        assert_eq!(projective_points(&w, 4).len(), 156);
    }

    #[test]
    fn random_changes_preserve_the_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (fam, m) in [(Family::W, 2), (Family::H, 2), (Family::K, 3)] {
            let alg = build(fam, 5, m, 2).unwrap();
            let images = random_basis_change(&alg, &mut rng).unwrap();
            alg.induced_automorphism(&images).unwrap();
        }
        let _ = SuperDim { k: 1, l: 1 };
    }
}
