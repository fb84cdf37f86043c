use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use tdchsh_core::algebra::{
    is_normal, normal_order, normal_order_random, Generator, OperatorExpr, Qi2, RealSurd, RewriteRules, Scalar,
    Statistics,
};
use tdchsh_core::sampling::rng;
use tdchsh_core::td::CaseSpec;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn surd() -> impl Strategy<Value = RealSurd> {
    (-20i64..20, 1i64..7, -20i64..20, 1i64..7).prop_map(|(a, b, c, d)| RealSurd::new(q(a, b), q(c, d)))
}

fn field() -> impl Strategy<Value = Qi2> {
    (surd(), surd()).prop_map(|(r, i)| Qi2::new(r, i))
}

/// Ladder letters of the canonical four-mode system.
fn ladder_pool(s: Statistics) -> Vec<Generator> {
    let base = [Generator::a(1, s), Generator::a(2, s), Generator::b(1, s), Generator::b(2, s)];
    base.iter().flat_map(|g| [g.clone(), g.dag()]).collect()
}

/// Letters of the perturbed case: ladders, perturbations and their adjoints.
fn td_pool(s: Statistics) -> Vec<Generator> {
    let mut pool = ladder_pool(s);
    for i in 1..=2 {
        for g in [Generator::cal_a(i, s), Generator::cal_b(i, s)] {
            pool.push(g.dag());
            pool.push(g);
        }
    }
    pool
}

fn expr(pool: Vec<Generator>, max_len: usize) -> impl Strategy<Value = OperatorExpr> {
    let n = pool.len();
    proptest::collection::vec((proptest::collection::vec(0..n, 0..=max_len), -3i64..=3), 0..4).prop_map(move |terms| {
        let mut e = OperatorExpr::zero();
        for (letters, c) in terms {
            let w = letters.iter().map(|&k| pool[k].clone()).collect();
            e = e + OperatorExpr::term(w, Scalar::int(c));
        }
        e
    })
}

fn canonical(s: Statistics) -> RewriteRules {
    let pool = ladder_pool(s);
    let ann: Vec<Generator> = pool.into_iter().filter(|g| !g.dagger).collect();
    RewriteRules::canonical(&ann, s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(a in field(), b in field(), c in field()) {
        prop_assert_eq!((a.clone() + b.clone()) + c.clone(), a.clone() + (b.clone() + c.clone()));
        prop_assert_eq!((a.clone() * b.clone()) * c.clone(), a.clone() * (b.clone() * c.clone()));
        prop_assert_eq!(a.clone() * (b.clone() + c.clone()), a.clone() * b.clone() + a.clone() * c.clone());
        prop_assert_eq!((a.clone() * b.clone()).conj(), a.conj() * b.conj());
        if let Some(inv) = a.inverse() {
            prop_assert_eq!(a.clone() * inv, Qi2::one());
        } else {
            prop_assert!(a.is_zero());
        }
    }

    #[test]
    fn exact_sign_agrees_with_float(x in surd()) {
        let f = x.to_f64();
        if f.abs() > 1e-9 {
            prop_assert_eq!(x.signum(), f.partial_cmp(&0.0).unwrap());
        }
    }

    #[test]
    fn ring_axioms(x in expr(ladder_pool(Statistics::Bosonic), 3), y in expr(ladder_pool(Statistics::Bosonic), 3), z in expr(ladder_pool(Statistics::Bosonic), 3)) {
        prop_assert_eq!((x.clone() + y.clone()) + z.clone(), x.clone() + (y.clone() + z.clone()));
        prop_assert_eq!(x.clone() + y.clone(), y.clone() + x.clone());
        prop_assert_eq!(x.times(&y).times(&z), x.times(&y.times(&z)));
        prop_assert_eq!(x.times(&(y.clone() + z.clone())), x.times(&y) + x.times(&z));
        prop_assert_eq!((y.clone() + z.clone()).times(&x), y.times(&x) + z.times(&x));
        prop_assert!((x.clone() - x.clone()).is_zero());
        prop_assert_eq!(x.times(&OperatorExpr::one()), x.clone());
    }

    #[test]
    fn adjoint_is_an_anti_automorphism(x in expr(td_pool(Statistics::Bosonic), 3), y in expr(td_pool(Statistics::Bosonic), 3)) {
        prop_assert_eq!(x.times(&y).adjoint(), y.adjoint().times(&x.adjoint()));
        prop_assert_eq!(x.adjoint().adjoint(), x.clone());
        prop_assert_eq!((x.clone() + y.clone()).adjoint(), x.adjoint() + y.adjoint());
    }

    #[test]
    fn normal_ordering_is_idempotent_and_linear(
        fermionic in any::<bool>(),
        x in expr(ladder_pool(Statistics::Bosonic), 4),
        y in expr(ladder_pool(Statistics::Bosonic), 4),
    ) {
        let s = if fermionic { Statistics::Fermionic } else { Statistics::Bosonic };
        let relabel = |e: &OperatorExpr| e.substitute(|g| {
            let mut h = g.clone();
            h.statistics = s;
            Some(OperatorExpr::gen(h))
        });
        let (x, y) = (relabel(&x), relabel(&y));
        let rules = canonical(s);
        let nx = normal_order(&x, &rules).unwrap();
        prop_assert!(is_normal(&nx, &rules));
        prop_assert_eq!(normal_order(&nx, &rules).unwrap(), nx.clone());
        let ny = normal_order(&y, &rules).unwrap();
        prop_assert_eq!(normal_order(&(x + y), &rules).unwrap(), nx + ny);
    }

    #[test]
    fn canonical_rules_are_confluent(fermionic in any::<bool>(), x in expr(ladder_pool(Statistics::Bosonic), 5), seed in any::<u64>()) {
        let s = if fermionic { Statistics::Fermionic } else { Statistics::Bosonic };
        let x = x.substitute(|g| {
            let mut h = g.clone();
            h.statistics = s;
            Some(OperatorExpr::gen(h))
        });
        let rules = canonical(s);
        let mut r = rng(seed);
        prop_assert_eq!(normal_order_random(&x, &rules, &mut r).unwrap(), normal_order(&x, &rules).unwrap());
    }

    #[test]
    fn perturbed_rules_are_confluent(fermionic in any::<bool>(), x in expr(td_pool(Statistics::Bosonic), 4), seed in any::<u64>()) {
        let s = if fermionic { Statistics::Fermionic } else { Statistics::Bosonic };
        let x = x.substitute(|g| {
            let mut h = g.clone();
            h.statistics = s;
            Some(OperatorExpr::gen(h))
        });
        let case = CaseSpec::new(s, tdchsh_core::td::Convention::Canonical);
        let mut r = rng(seed);
        prop_assert_eq!(normal_order_random(&x, &case.rules, &mut r).unwrap(), normal_order(&x, &case.rules).unwrap());
    }

    #[test]
    fn truncation_is_a_projection(x in expr(td_pool(Statistics::Bosonic), 4), y in expr(td_pool(Statistics::Bosonic), 4)) {
        let t = x.epsilon_truncate();
        prop_assert_eq!(t.epsilon_truncate(), t.clone());
        prop_assert!(t.max_grade() <= 1);
        prop_assert_eq!((x.clone() + y.clone()).epsilon_truncate(), t + y.epsilon_truncate());
        let e = x.effective_part();
        prop_assert_eq!(e.effective_part(), e);
    }
}
