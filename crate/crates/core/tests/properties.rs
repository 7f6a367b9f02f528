use cartan_mgs::cartan::CartanAlgebra;
use cartan_mgs::cli::{CommandKind, Report, RunConfig};
use cartan_mgs::exactla::{bracket_closure, GradedSubspace, Matrix, Subspace};
use cartan_mgs::flags::{beta_profile, enumerate_profiles, standard_subspace, Profile, ProfileFamily};
use cartan_mgs::mgs::Params;
use cartan_mgs::superspace::{Monomial, Poly, Superspace};
use cartan_mgs::verify::{random_basis_change, Finding, Status};
use cartan_mgs::{build, make_field, Family, Fe, Field};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn fields() -> [Field; 3] {
    [make_field(5, false).unwrap(), make_field(7, false).unwrap(), make_field(5, false).unwrap().quadratic_extension()]
}

fn elem(f: &Field, a: u32, b: u32) -> Fe {
    let p = f.characteristic() as i64;
    let c1 = if f.degree() == 2 { b as i64 % p } else { 0 };
    f.element(a as i64 % p, c1).unwrap()
}

fn space() -> &'static Superspace {
    static S: OnceLock<Superspace> = OnceLock::new();
    S.get_or_init(|| Superspace::new(make_field(5, false).unwrap(), 2, 2, false).unwrap())
}

fn w22() -> &'static CartanAlgebra {
    static A: OnceLock<CartanAlgebra> = OnceLock::new();
    A.get_or_init(|| build(Family::W, 5, 2, 2).unwrap())
}

fn h22() -> &'static CartanAlgebra {
    static A: OnceLock<CartanAlgebra> = OnceLock::new();
    A.get_or_init(|| build(Family::H, 5, 2, 2).unwrap())
}

/// A parity-homogeneous polynomial from up to four (monomial, coefficient) picks.
fn poly(sp: &Superspace, parity: u8, picks: &[(usize, u32)]) -> Poly {
    let monos: Vec<Monomial> = sp.monomials().into_iter().filter(|m| m.parity() == parity).collect();
    let f = sp.field();
    let mut p = Poly::zero();
    for &(k, c) in picks {
        p.add_term(f, monos[k % monos.len()], f.from_i64(c as i64));
    }
    p
}

fn picks() -> impl Strategy<Value = Vec<(usize, u32)>> {
    prop::collection::vec((0usize..1000, 1u32..5), 1..4)
}

fn sign(f: &Field, odd: bool) -> Fe {
    if odd {
        f.from_i64(-1)
    } else {
        Fe::ONE
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn field_axioms(k in 0usize..3, a in (0u32..50, 0u32..50), b in (0u32..50, 0u32..50), c in (0u32..50, 0u32..50)) {
        let f = fields()[k];
        let (a, b, c) = (elem(&f, a.0, a.1), elem(&f, b.0, b.1), elem(&f, c.0, c.1));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.add(a, f.neg(a)), Fe::ZERO);
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), Fe::ONE);
        }
    }

    #[test]
    fn supercommutative_and_associative(pa in 0u8..2, pb in 0u8..2, a in picks(), b in picks(), c in picks()) {
        let sp = space();
        let f = sp.field();
        let (x, y, z) = (poly(sp, pa, &a), poly(sp, pb, &b), poly(sp, 0, &c));
        let yx = sp.mul(&y, &x).scale(f, sign(f, pa == 1 && pb == 1));
        prop_assert_eq!(sp.mul(&x, &y), yx);
        prop_assert_eq!(sp.mul(&sp.mul(&x, &y), &z), sp.mul(&x, &sp.mul(&y, &z)));
    }

    #[test]
    fn derivations_obey_the_super_leibniz_rule(i in 1usize..=4, pa in 0u8..2, a in picks(), b in picks()) {
        let sp = space();
        let f = sp.field();
        let (x, y) = (poly(sp, pa, &a), poly(sp, 0, &b));
        let lhs = sp.derive(i, &sp.mul(&x, &y));
        let odd = sp.var_parity(i) == 1 && pa == 1;
        let rhs = sp.mul(&sp.derive(i, &x), &y).add(f, &sp.mul(&x, &sp.derive(i, &y)).scale(f, sign(f, odd)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn linear_substitution_is_multiplicative(e in prop::collection::vec(0u32..5, 8), a in picks(), b in picks()) {
        let sp = space();
        let f = sp.field();
        let mut g = Matrix::zeros(4, 4);
        for (k, v) in e.iter().enumerate() {
            let (blk, r, c) = (k / 4, (k % 4) / 2, k % 2);
            g.set(2 * blk + r, 2 * blk + c, f.from_i64(*v as i64));
        }
        let Ok(s) = sp.linear_substitution(&g) else { return Ok(()) };
        let (x, y) = (poly(sp, 0, &a), poly(sp, 1, &b));
        prop_assert_eq!(sp.substitute(&s, &sp.mul(&x, &y)), sp.mul(&sp.substitute(&s, &x), &sp.substitute(&s, &y)));
    }

    #[test]
    fn bracket_is_super_anticommutative(i in 0usize..400, j in 0usize..400) {
        let alg = w22();
        let f = alg.field();
        let (a, b) = (alg.basis_element(i), alg.basis_element(j));
        let odd = alg.parity_of(i) == 1 && alg.parity_of(j) == 1;
        let ba = alg.bracket(&b, &a).unwrap();
        prop_assert_eq!(alg.bracket(&a, &b).unwrap(), alg.scale(&ba, f.neg(sign(f, odd))));
    }

    #[test]
    fn super_jacobi_on_basis_triples(i in 0usize..98, j in 0usize..98, k in 0usize..98) {
        let alg = h22();
        let f = alg.field();
        let e = |t| alg.basis_element(t);
        let par = |t| alg.parity_of(t) == 1;
        let term = |a: usize, b: usize, c: usize| {
            let inner = alg.bracket(&e(b), &e(c)).unwrap();
            alg.scale(&alg.bracket(&e(a), &inner).unwrap(), sign(f, par(a) && par(c)))
        };
        let sum = alg.add(&alg.add(&term(i, j, k), &term(j, k, i)).unwrap(), &term(k, i, j)).unwrap();
        prop_assert!(sum.is_zero());
    }

    #[test]
    fn grading_is_additive(i in 0usize..400, j in 0usize..400) {
        let alg = w22();
        let d = alg.degree_of(i) + alg.degree_of(j);
        for (k, _) in alg.bracket_basis(i, j) {
            prop_assert_eq!(alg.degree_of(k), d);
        }
    }

    #[test]
    fn subspace_dimension_formula(a in prop::collection::vec(prop::collection::vec(0u32..5, 6), 0..5), b in prop::collection::vec(prop::collection::vec(0u32..5, 6), 0..5)) {
        let f = make_field(5, false).unwrap();
        let conv = |v: &Vec<Vec<u32>>| -> Vec<Vec<Fe>> { v.iter().map(|r| r.iter().map(|&c| f.from_i64(c as i64)).collect()).collect() };
        let (va, vb) = (conv(&a), conv(&b));
        let sa = Subspace::span(&f, 6, &va);
        let sb = Subspace::span(&f, 6, &vb);
        prop_assert_eq!(sa.sum(&f, &sb).dim() + sa.intersection(&f, &sb).dim(), sa.dim() + sb.dim());
        prop_assert!(sa.intersection(&f, &sb).is_subspace_of(&f, &sa));
    }

    #[test]
    fn rank_plus_nullity(rows in prop::collection::vec(prop::collection::vec(0u32..7, 5), 1..6)) {
        let f = make_field(7, false).unwrap();
        let rows: Vec<Vec<Fe>> = rows.iter().map(|r| r.iter().map(|&c| f.from_i64(c as i64)).collect()).collect();
        let m = Matrix::from_rows(&rows);
        let null = m.nullspace(&f);
        prop_assert_eq!(m.rank(&f) + null.len(), 5);
        for v in &null {
            for r in &rows {
                let dot = r.iter().zip(v).fold(Fe::ZERO, |acc, (&x, &y)| f.mul_add(acc, x, y));
                prop_assert!(dot.is_zero());
            }
        }
    }

    #[test]
    fn report_json_round_trips(
        claims in prop::collection::vec(("[a-z0-9.]{1,20}", -5i64..500, -5i64..500, 0usize..4, any::<bool>()), 0..6),
        p in prop::sample::select(vec![5u32, 7, 11]),
    ) {
        let mut r = Report::new(RunConfig::point(CommandKind::Verify, Family::W, p, 2, 2));
        let st = [Status::Match, Status::Mismatch, Status::SampledPass, Status::SampledFail];
        for (claim, e, c, s, doc) in claims {
            r.findings.push(Finding {
                claim,
                params: Params { family: Family::W, p, m: 2, n: 2 },
                subject: "x \"quoted\", with commas".into(),
                expected: e,
                computed: c,
                status: st[s],
                evidence: "e".into(),
                documented: doc.then(|| "why".to_string()),
            });
        }
        r.finish();
        let back = Report::from_json(&r.to_json()).unwrap();
        prop_assert_eq!(back, r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn closure_is_idempotent_and_monotone(picks in prop::collection::vec((0usize..400, 0usize..400), 1..3)) {
        let alg = w22();
        let f = *alg.field();
        // Seeds from degree >= 1 keep the closure proper.
        let high: Vec<usize> = (0..alg.dim()).filter(|&i| alg.degree_of(i) >= 1).collect();
        let mut small = GradedSubspace::zero(alg);
        for &(a, _) in &picks {
            let (d, k) = alg.local(high[a % high.len()]);
            small.insert_hom(&f, alg.unit(d, k));
        }
        let mut big = small.clone();
        for &(_, b) in &picks {
            let (d, k) = alg.local(high[b % high.len()]);
            big.insert_hom(&f, alg.unit(d, k));
        }
        let cs = bracket_closure(alg, &small);
        let cb = bracket_closure(alg, &big);
        prop_assert_eq!(bracket_closure(alg, &cs), cs.clone());
        prop_assert!(small.is_subspace_of(&f, &cs));
        prop_assert!(cs.is_subspace_of(&f, &cb));
        for u in cs.basis() {
            for v in cs.basis() {
                if let Some(w) = alg.bracket_hom(&u, &v) {
                    prop_assert!(cs.contains_hom(&f, &w));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn beta_profile_is_invariant_under_form_preserving_maps(k in 0usize..64, seed in any::<u64>()) {
        let alg = h22();
        let profiles = enumerate_profiles(alg, ProfileFamily::All).unwrap();
        let prof = profiles[k % profiles.len()];
        let v = standard_subspace(alg, &prof).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = alg.induced_automorphism(&random_basis_change(alg, &mut rng).unwrap()).unwrap();
        let image = alg.apply_automorphism_subspace(&g, &v).unwrap();
        prop_assert_eq!(Profile::Beta(beta_profile(alg, &image).unwrap().0), prof);
    }
}
