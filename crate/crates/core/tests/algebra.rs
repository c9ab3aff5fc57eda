use std::sync::Arc;

use proptest::prelude::*;
use superfield::graded::{
    ratio, series_invert, AlgebraMap, Generator, GeneratorTable, Monomial, MultiIndex, OddSet, Parity, SuperPoly,
};
use superfield::io::parse_poly;

fn super_table() -> Arc<GeneratorTable> {
    GeneratorTable::builder().base(["x", "y"]).odd(["t1", "t2", "t3"]).build().unwrap()
}

fn target_table() -> Arc<GeneratorTable> {
    GeneratorTable::builder().base(["z"]).odd(["s1", "s2", "s3", "s4"]).build().unwrap()
}

fn formal_table() -> Arc<GeneratorTable> {
    GeneratorTable::builder().base(["x"]).formal(["u", "v"]).truncation(4).build().unwrap()
}

type RawTerm = (i64, i64, Vec<u32>, Vec<u32>, u64);

fn raw_terms(max_terms: usize) -> impl Strategy<Value = Vec<RawTerm>> {
    prop::collection::vec(
        (
            -5i64..=5,
            1i64..=4,
            prop::collection::vec(0u32..=2, 2),
            prop::collection::vec(0u32..=2, 2),
            0u64..16,
        ),
        0..=max_terms,
    )
}

/// Builds a polynomial from raw terms, keeping only odd sets of the given
/// parity when one is requested.
fn build(table: &Arc<GeneratorTable>, terms: &[RawTerm], parity: Option<Parity>) -> SuperPoly {
    let n_odd = table.odd().len();
    let mut p = SuperPoly::zero(table);
    for (num, den, base, formal, mask) in terms {
        let odd = OddSet(mask & ((1u64 << n_odd) - 1));
        if parity.is_some_and(|par| Parity::from_bits(odd.len()) != par) {
            continue;
        }
        let m = Monomial {
            formal: MultiIndex(formal[..table.formal().len()].to_vec()),
            odd,
            base: base[..table.base().len()].to_vec(),
        };
        p = &p + &SuperPoly::monomial(table, m, ratio(*num, *den));
    }
    p
}

fn parity() -> impl Strategy<Value = Parity> {
    prop_oneof![Just(Parity::Even), Just(Parity::Odd)]
}

fn sign(a: Parity, b: Parity) -> i64 {
    if a.is_odd() && b.is_odd() {
        -1
    } else {
        1
    }
}

proptest! {
    #[test]
    fn supercommutativity(ta in raw_terms(4), tb in raw_terms(4), pa in parity(), pb in parity()) {
        let t = super_table();
        let (a, b) = (build(&t, &ta, Some(pa)), build(&t, &tb, Some(pb)));
        prop_assert_eq!(&a * &b, (&b * &a).scale(&ratio(sign(pa, pb), 1)));
    }

    #[test]
    fn associative_and_distributive(ta in raw_terms(4), tb in raw_terms(4), tc in raw_terms(4)) {
        let t = super_table();
        let (a, b, c) = (build(&t, &ta, None), build(&t, &tb, None), build(&t, &tc, None));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
    }

    #[test]
    fn graded_leibniz(ta in raw_terms(4), tb in raw_terms(4), pa in parity(), g in 0usize..5) {
        let t = super_table();
        let a = build(&t, &ta, Some(pa));
        let b = build(&t, &tb, None);
        let gen = if g < 2 { Generator::Base(g) } else { Generator::Odd(g - 2) };
        let d = |p: &SuperPoly| p.derive_by(gen);
        let twist = if gen.parity().is_odd() { sign(pa, Parity::Odd) } else { 1 };
        let rhs = &(&d(&a) * &b) + &(&a * &d(&b)).scale(&ratio(twist, 1));
        prop_assert_eq!(d(&(&a * &b)), rhs);
    }

    #[test]
    fn substitution_is_a_homomorphism(
        ta in raw_terms(4),
        tb in raw_terms(4),
        images in prop::collection::vec(raw_terms(3), 5),
    ) {
        let (src, dst) = (super_table(), target_table());
        let names = ["x", "y", "t1", "t2", "t3"];
        let assignments: Vec<(&str, SuperPoly)> = names
            .iter()
            .zip(&images)
            .enumerate()
            .map(|(i, (n, raw))| (*n, build(&dst, raw, Some(if i < 2 { Parity::Even } else { Parity::Odd }))))
            .collect();
        let map = AlgebraMap::new(&src, &dst, assignments).unwrap();
        let (a, b) = (build(&src, &ta, None), build(&src, &tb, None));
        prop_assert_eq!(map.apply(&(&a * &b)).unwrap(), &map.apply(&a).unwrap() * &map.apply(&b).unwrap());
        prop_assert_eq!(map.apply(&(&a + &b)).unwrap(), &map.apply(&a).unwrap() + &map.apply(&b).unwrap());
    }

    #[test]
    fn series_inverse_both_ways(higher in prop::collection::vec(raw_terms(4), 2)) {
        let t = formal_table();
        let xi: Vec<SuperPoly> = (0..2).map(|i| SuperPoly::from_generator(&t, Generator::Formal(i))).collect();
        let v: Vec<SuperPoly> = higher
            .iter()
            .zip(&xi)
            .map(|(raw, x)| x + &build(&t, raw, None).filter(|m| m.formal_degree() >= 2))
            .collect();
        let w = series_invert(&v).unwrap();
        let compose = |outer: &[SuperPoly], inner: &[SuperPoly]| -> Vec<SuperPoly> {
            let map = AlgebraMap::new(&t, &t, ["u", "v"].into_iter().zip(inner.iter().cloned())).unwrap();
            outer.iter().map(|p| map.apply(p).unwrap()).collect()
        };
        prop_assert_eq!(compose(&v, &w), xi.clone());
        prop_assert_eq!(compose(&w, &v), xi);
    }

    #[test]
    fn print_parse_round_trip(ta in raw_terms(6), tf in raw_terms(4)) {
        for (t, raw) in [(super_table(), &ta), (formal_table(), &tf)] {
            let p = build(&t, raw, None);
            let text = p.to_string();
            let back = parse_poly(&text, &t).unwrap();
            prop_assert_eq!(&back, &p);
            prop_assert_eq!(back.to_string(), text);
        }
    }
}

#[test]
fn canonical_examples() {
    let t = GeneratorTable::builder().base(["x"]).formal(["xi"]).truncation(3).build().unwrap();
    let p = parse_poly("(x + xi)^2 - x^2*xi^2", &t).unwrap();
    assert_eq!(p.to_string(), "x^2 + 2*x*xi + xi^2 - x^2*xi^2");
    assert_eq!(SuperPoly::zero(&t).to_string(), "0");
    let s = GeneratorTable::builder().odd(["th1", "th2"]).build().unwrap();
    assert_eq!(parse_poly("th2*th1", &s).unwrap().to_string(), "-th1*th2");
    let c = GeneratorTable::builder().base(["x"]).build().unwrap();
    let q = parse_poly("1/2*x^2 - 3", &c).unwrap();
    assert_eq!(q.to_string(), "-3 + 1/2*x^2");
    assert!(parse_poly("x^-1", &c).is_err());
}
