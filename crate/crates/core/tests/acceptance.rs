//! Acceptance criteria 1 to 12, one PASS/FAIL line each.
//!
//! Criteria that cannot hold because a printed constant disagrees with the
//! direct construction are listed in `KNOWN_DEFECTS`; the test fails on any
//! other FAIL.

use std::time::Instant;

use cartan_mgs::cartan::{CartanAlgebra, VectorField};
use cartan_mgs::cli::{cmd_verify, CommandKind, RunConfig};
use cartan_mgs::exactla::GradedSubspace;
use cartan_mgs::flags::{standard_subspace, BetaProfile, Profile, SuperDim};
use cartan_mgs::mgs::{
    divergence_kernel, enumerate_type2, enumerate_type3r, formula_class_count, formula_dimension, m0_of_v, m_of_g0, printed_r_subalgebra,
    type1_subalgebras, ClassCount, Formula, MgsDescriptor, Params, Variant,
};
use cartan_mgs::superspace::Poly;
use cartan_mgs::verify::{
    equivariance_check, identity_violations, is_graded_subalgebra, is_maximal_graded, run_suite, MaxOptions, MaximalityReport, Suite,
    SuiteOptions, Verdict,
};
use cartan_mgs::{build, Family, Fe};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KNOWN_DEFECTS: &[(u32, &str)] = &[
    (2, "dim S(2,2) at p=5 is 299; 301 is dim ker div"),
    (7, "the S closed form for M(V) assumes dim S = 301; the construction equals M^W(V) meet S"),
    (9, "dim M^S(L_-1, M_0(V)) for (1,1) is 129, not 138; the construction equals M^W meet S"),
];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn alg(fam: Family, p: u32, m: usize, n: usize) -> CartanAlgebra {
    build(fam, p, m, n).expect("valid parameters")
}

fn params(a: &CartanAlgebra) -> Params {
    Params::of(a)
}

fn formula(sel: Formula, a: &CartanAlgebra) -> i64 {
    formula_dimension(&sel, &params(a)).expect("formula evaluates")
}

/// Every scanned component saw at least `min` vectors or was enumerated.
fn covered(rep: &MaximalityReport, min: usize) -> bool {
    rep.verdict != Verdict::False && rep.coverage.iter().all(|c| c.exhaustive || c.checked >= min)
}

fn sampled(samples: usize, seed: u64) -> MaxOptions {
    MaxOptions { samples, seed, ..MaxOptions::default() }
}

fn c1() -> Outcome {
    let start = Instant::now();
    let points = [
        (Family::W, 5, 2, 2),
        (Family::S, 5, 2, 2),
        (Family::H, 5, 2, 2),
        (Family::W, 7, 2, 2),
        (Family::S, 7, 2, 2),
        (Family::H, 7, 2, 2),
        (Family::K, 5, 3, 2),
    ];
    let mut bad = Vec::new();
    for (fam, p, m, n) in points {
        let a = alg(fam, p, m, n);
        let v = identity_violations(&a, 1000, 11);
        if v != (0, 0, 0) {
            bad.push(format!("{} p={p}: {v:?}", a.name()));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(bad.is_empty() && secs < 60.0, format!("7 points x 1000 triples, violations {bad:?}, {secs:.1} s"))
}

fn c2() -> Outcome {
    // Basis counts: O(m, n) has 2^n p^m monomials.
    let o = |p: i64, m: u32, n: u32| 2i64.pow(n) * p.pow(m);
    let w = alg(Family::W, 5, 2, 2);
    let s = alg(Family::S, 5, 2, 2);
    let h = alg(Family::H, 5, 2, 2);
    let k = alg(Family::K, 5, 3, 2);
    let kernel: usize = w.degrees().map(|d| divergence_kernel(&w, d).unwrap().dim()).sum();
    let checks = [
        ("W", w.dim() as i64, 400, o(5, 2, 2) * 4),
        ("S", s.dim() as i64, 301, kernel as i64),
        ("H", h.dim() as i64, 98, o(5, 2, 2) - 2),
        ("K", k.dim() as i64, 500, o(5, 3, 2)),
    ];
    let pass = checks.iter().all(|&(_, got, want, _)| got == want);
    let detail: Vec<String> = checks.iter().map(|(n, got, want, oracle)| format!("{n} {got} (expected {want}, oracle {oracle})")).collect();
    outcome(pass, detail.join(", "))
}

fn f_d(a: &CartanAlgebra, f: &Poly) -> VectorField {
    let sp = a.space();
    VectorField { coeffs: (1..=sp.num_vars()).map(|i| sp.mul(f, &sp.var_poly(i))).collect() }
}

fn c3() -> Outcome {
    // Checked through the structure constants, not the vector-field bracket.
    let a = alg(Family::W, 5, 2, 2);
    let sp = a.space();
    let fld = *a.field();
    let (m, n) = (a.m() as i64, a.n() as i64);
    let monos = sp.monomials();
    let mut div_bad = 0;
    for mono in &monos {
        let f = Poly::term(*mono, Fe::ONE);
        let e = a.from_vector_field(&f_d(&a, &f)).unwrap();
        let s = mono.std_degree() as i64;
        if a.divergence(&e).unwrap() != f.scale(&fld, fld.from_i64(m - n + s)) {
            div_bad += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut br_bad = 0;
    for _ in 0..200 {
        let x = monos[rng.random_range(0..monos.len())];
        let y = monos[rng.random_range(0..monos.len())];
        let (f, g) = (Poly::term(x, Fe::ONE), Poly::term(y, Fe::ONE));
        let lhs = a.bracket(&a.from_vector_field(&f_d(&a, &f)).unwrap(), &a.from_vector_field(&f_d(&a, &g)).unwrap()).unwrap();
        let c = fld.from_i64(y.std_degree() as i64 - x.std_degree() as i64);
        let rhs = a.scale(&a.from_vector_field(&f_d(&a, &sp.mul(&f, &g))).unwrap(), c);
        if lhs != rhs {
            br_bad += 1;
        }
    }
    outcome(
        div_bad == 0 && br_bad == 0,
        format!("{} monomials: {div_bad} divergence failures; 200 pairs: {br_bad} bracket failures", monos.len()),
    )
}

fn pick(ds: &[MgsDescriptor], v: Variant) -> Vec<&MgsDescriptor> {
    ds.iter().filter(|d| d.variant == v).collect()
}

fn c4() -> Outcome {
    let a = alg(Family::W, 5, 2, 2);
    let ds = type1_subalgebras(&a).unwrap();
    let mut notes = vec![format!("{} constructions", ds.len())];
    let mut pass = ds.len() == 2;
    for (v, want) in [(Variant::WPrime, 302), (Variant::WDoublePrime, 24)] {
        let d = pick(&ds, v);
        let Some(d) = d.first() else {
            notes.push(format!("{v} missing"));
            pass = false;
            continue;
        };
        let closed = is_graded_subalgebra(&a, &d.subspace).unwrap();
        let rep = is_maximal_graded(&a, &d.subspace, &sampled(500, 4)).unwrap();
        let ok = d.dim == want && formula(Formula::Type1(v), &a) == want as i64 && closed && covered(&rep, 500);
        pass &= ok;
        notes.push(format!(
            "{v} dim {} formula {} closed {closed} {:?} min {}",
            d.dim,
            formula(Formula::Type1(v), &a),
            rep.verdict,
            rep.min_per_degree()
        ));
    }
    outcome(pass, notes.join("; "))
}

fn c5() -> Outcome {
    let a = alg(Family::S, 5, 2, 2);
    let ds = type1_subalgebras(&a).unwrap();
    let d = pick(&ds, Variant::SLocal);
    let got = d.first().map(|d| d.dim as i64);
    let f = formula(Formula::Type1(Variant::SLocal), &a);
    let mn = (a.m() + a.n()) as i64;
    let oracle = mn * mn + mn - 1;
    outcome(got == Some(19) && f == 19 && oracle == 19, format!("S-local dim {got:?}, formula {f}, (m+n)^2+(m+n)-1 = {oracle}"))
}

fn c6() -> Outcome {
    let a = alg(Family::K, 5, 3, 2);
    let ds = type1_subalgebras(&a).unwrap();
    let kp = pick(&ds, Variant::KPrime).first().map(|d| d.dim as i64);
    let r = a.r() as u32;
    let oracle = 2i64.pow(a.n() as u32) * 5i64.pow(2 * r) + 1;
    let kpp = pick(&ds, Variant::KDoublePrime);
    let closed = kpp.first().is_some_and(|d| is_graded_subalgebra(&a, &d.subspace).unwrap());
    let opts = SuiteOptions { suites: vec![Suite::Type1], max_checks: 0, ..SuiteOptions::default() };
    let findings = run_suite(&a, &opts);
    let f = findings.iter().find(|f| f.claim == "type1.k.m_doubleprime.dim");
    let emitted = f.is_some_and(|f| f.expected == 25 && Some(f.computed as usize) == kpp.first().map(|d| d.dim) && f.documented.is_some());
    outcome(
        kp == Some(101) && oracle == 101 && closed && emitted,
        format!(
            "M' dim {kp:?} (2^n p^(2r)+1 = {oracle}); M'' closed {closed}, finding {:?}",
            f.map(|f| (f.expected, f.computed, f.status, f.documented.is_some()))
        ),
    )
}

fn c7() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut notes = Vec::new();
    for fam in [Family::W, Family::S] {
        let a = alg(fam, 5, 2, 2);
        let en = enumerate_type2(&a).unwrap();
        let cc = formula_class_count(ClassCount::Type2, &params(&a)).unwrap();
        let mut wrong = Vec::new();
        for d in &en.descriptors {
            let want = formula(Formula::Type2(d.profile.unwrap()), &a);
            if want != d.dim as i64 {
                wrong.push(format!("{} {} vs {want}", d.profile.unwrap(), d.dim));
            }
        }
        let ok = en.descriptors.len() == 7 && en.class_count == 7 && cc == 7 && wrong.is_empty();
        pass &= ok;
        notes.push(format!("{fam}: {} profiles, classes {}, formula {cc}, dim mismatches {wrong:?}", en.descriptors.len(), en.class_count));
        if fam == Family::W {
            let d = &en.descriptors[0];
            let rep = is_maximal_graded(&a, &d.subspace, &sampled(1000, 7)).unwrap();
            let ok = covered(&rep, 1000);
            pass &= ok;
            notes.push(format!("maximality of {}: {:?}, {} samples", d.label(), rep.verdict, rep.samples()));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 300.0;
    notes.push(format!("{secs:.1} s"));
    outcome(pass, notes.join("; "))
}

fn c8() -> Outcome {
    let a = alg(Family::H, 5, 2, 2);
    let en = enumerate_type2(&a).unwrap();
    let phi = formula_class_count(ClassCount::Type2, &params(&a)).unwrap();
    let closed = en.descriptors.iter().all(|d| is_graded_subalgebra(&a, &d.subspace).unwrap());
    let flags: Vec<String> = en
        .descriptors
        .iter()
        .map(|d| {
            format!("{} {}/{} {}", d.profile.unwrap(), d.dim, formula(Formula::Type2(d.profile.unwrap()), &a), d.matches() == Some(true))
        })
        .collect();
    outcome(
        en.descriptors.len() == 6 && phi == 6 && closed,
        format!("{} profiles, phi(1,2) = {phi}, all closed {closed}; {}", en.descriptors.len(), flags.join(", ")),
    )
}

fn m0_and_r(a: &CartanAlgebra, k: usize, l: usize) -> (usize, usize, bool) {
    let mut agree = true;
    for (kk, ll) in [(0, 1), (0, 2), (1, 0), (1, 1), (1, 2), (2, 0), (2, 1)] {
        agree &= m0_of_v(a, &Profile::Super(SuperDim { k: kk, l: ll })).unwrap().agrees() == Some(true);
    }
    let p = Profile::Super(SuperDim { k, l });
    let m0 = m0_of_v(a, &p).unwrap();
    let d = m_of_g0(a, &m0.recursive, Some(p), None).unwrap();
    (d.dim, m0.recursive.dim(), agree)
}

fn c9() -> Outcome {
    let w = alg(Family::W, 5, 2, 2);
    let s = alg(Family::S, 5, 2, 2);
    let (dw, _, aw) = m0_and_r(&w, 1, 1);
    let (ds, _, as_) = m0_and_r(&s, 1, 1);
    outcome(
        dw == 220 && ds == 138 && aw && as_,
        format!("W (1,1) {dw} (expected 220), S (1,1) {ds} (expected 138), printed M_0 spans agree W {aw} S {as_}"),
    )
}

fn c10() -> Outcome {
    let a = alg(Family::H, 5, 2, 2);
    let en = enumerate_type3r(&a).unwrap();
    let (mut nondeg, mut iso) = (0, 0);
    let mut pass = true;
    let mut notes = Vec::new();
    for d in &en.descriptors {
        let b = d.profile.unwrap().as_beta().unwrap();
        if !(b.is_nondegenerate() || b.is_isotropic()) {
            continue;
        }
        let eq = printed_r_subalgebra(&a, &b).unwrap() == d.subspace;
        pass &= eq;
        if b.is_nondegenerate() {
            nondeg += 1;
        } else {
            iso += 1;
        }
        notes.push(format!("{b} {eq}"));
    }
    outcome(pass && nondeg > 0 && iso > 0, format!("{nondeg} nondegenerate, {iso} isotropic: {}", notes.join(", ")))
}

fn c11() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let cases: [(Family, usize, Profile); 3] = [
        (Family::W, 2, Profile::Super(SuperDim { k: 1, l: 1 })),
        (Family::H, 2, Profile::Beta(BetaProfile::new(1, 1, 0, 1))),
        (Family::H, 2, Profile::Beta(BetaProfile::new(0, 1, 1, 0))),
    ];
    for (fam, m, p) in cases {
        let a = alg(fam, 5, m, 2);
        let v: GradedSubspace = standard_subspace(&a, &p).unwrap();
        let (ok, total) = equivariance_check(&a, &v, 20, 11).unwrap();
        pass &= ok == total && total == 20;
        notes.push(format!("{fam} {p}: {ok}/{total}"));
    }
    outcome(pass, notes.join(", "))
}

fn c12() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for (fam, m, suites) in [(Family::H, 2, Suite::ALL.to_vec()), (Family::W, 2, vec![Suite::Identities, Suite::Type2])] {
        let mut config = RunConfig::point(CommandKind::Verify, fam, 5, m, 2);
        config.suite.suites = suites;
        config.suite.max.seed = 12;
        let a = cmd_verify(&config).unwrap();
        let b = cmd_verify(&config).unwrap();
        let same = a.findings_json() == b.findings_json();
        pass &= same;
        notes.push(format!("{fam}: {} findings, identical {same}", a.findings.len()));
    }
    outcome(pass, notes.join(", "))
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 12] =
        [(1, c1), (2, c2), (3, c3), (4, c4), (5, c5), (6, c6), (7, c7), (8, c8), (9, c9), (10, c10), (11, c11), (12, c12)];
    let mut unexpected = Vec::new();
    for (n, run) in criteria {
        let start = Instant::now();
        let o = run();
        let known = KNOWN_DEFECTS.iter().find(|(k, _)| *k == n);
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2}: {tag} ({:.1} s) {}", start.elapsed().as_secs_f64(), o.detail);
        match (o.pass, known) {
            (false, Some((_, why))) => println!("              known defect: {why}"),
            (false, None) => unexpected.push(n),
            (true, Some(_)) => println!("              listed as a known defect but passed"),
            (true, None) => {}
        }
    }
    if !unexpected.is_empty() {
        eprintln!("criteria failed outside KNOWN_DEFECTS: {unexpected:?}");
        std::process::exit(1);
    }
}
