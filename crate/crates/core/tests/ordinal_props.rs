mod common;

use common::{algebras, positive_body, tuples, x};
use fixelim::game::{SuppPair, Word};
use fixelim::gen::{atoms, Gen};
use fixelim::heyting::{Compiled, Elem, FiniteHeytingAlgebra};
use fixelim::ordinal::{closure_ordinal, family_atop, ruitenburg_number, verify_bounds};
use fixelim::prover::equiv;
use fixelim::{Formula, Sym};
use proptest::prelude::*;

fn j(h: &FiniteHeytingAlgebra, a: Elem, b: Elem, v: Elem) -> Elem {
    h.imp(h.imp(v, a), b)
}

#[test]
fn atop_image_and_inflation() {
    for h in algebras(5) {
        tuples(h, 3, |v| {
            let (a, b, p) = (v[0], v[1], v[2]);
            let jp = j(h, a, b, p);
            let ab = h.imp(a, b);
            assert_eq!(h.leq(p, jp), h.leq(p, ab));
            assert!(h.leq(b, jp) && h.leq(jp, ab));
            assert_eq!(jp, h.meet(j(h, h.meet(a, b), b, p), ab));
        });
    }
}

#[test]
fn atop_middle() {
    for h in algebras(5) {
        tuples(h, 4, |v| {
            let (a, b, c, p) = (v[0], v[1], v[2], v[3]);
            let iff = h.meet(h.imp(b, c), h.imp(c, b));
            assert_eq!(j(h, a, b, p) == j(h, a, c, p), h.leq(h.imp(p, a), iff));
        });
    }
}

/// Strong monotone maps on a small algebra, as positive polynomials in `x`
/// with the parameter `a`.
fn polynomial(f: &Formula) -> Compiled {
    Compiled::new(f, &[Sym::new("a"), x()]).unwrap()
}

fn param_body() -> impl Strategy<Value = Formula> {
    any::<u64>().prop_map(|s| Gen::new(s).positive_body(x(), &atoms(1), 7))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn guarded_inflation(f in param_body()) {
        let g = polynomial(&f);
        for h in algebras(5) {
            let mut ok = true;
            tuples(h, 4, |v| {
                let (pa, a, b, p) = (v[0], v[1], v[2], v[3]);
                let lhs = j(h, a, b, g.eval(h, &[pa, p]));
                let rhs = j(h, a, b, g.eval(h, &[pa, j(h, a, b, p)]));
                ok &= h.leq(lhs, rhs);
            });
            prop_assert!(ok, "{}", f);
        }
    }

    #[test]
    fn prefixed_points_closed_under_exponent(f in param_body()) {
        let g = polynomial(&f);
        for h in algebras(5) {
            let mut ok = true;
            tuples(h, 3, |v| {
                let (pa, c, p) = (v[0], v[1], v[2]);
                if h.leq(g.eval(h, &[pa, c]), c) {
                    let e = h.imp(p, c);
                    ok &= h.leq(g.eval(h, &[pa, e]), e);
                }
            });
            prop_assert!(ok, "{}", f);
        }
    }

    #[test]
    fn atops_preserve_prefixed_points(f in param_body()) {
        let g = polynomial(&f);
        for h in algebras(5) {
            let mut ok = true;
            tuples(h, 5, |v| {
                let (pa, c, e, lo, p) = (v[0], v[1], v[2], v[3], v[4]);
                let top = h.imp(e, lo);
                let pre = |y: Elem| h.leq(g.eval(h, &[pa, y]), y);
                if pre(c) && h.leq(lo, c) && h.leq(c, top) && h.leq(c, p) && h.leq(p, top) {
                    ok &= pre(j(h, e, lo, p));
                }
            });
            prop_assert!(ok, "{}", f);
        }
    }

    #[test]
    fn closure_ordinal_below_ruitenburg(f in positive_body(8)) {
        let cl = closure_ordinal(&f, x(), None).unwrap();
        let rho = ruitenburg_number(&f, x(), None).unwrap();
        prop_assert!(!cl.cap_hit && !rho.cap_hit);
        prop_assert!(cl.value <= rho.value, "{}: cl {} > rho {}", f, cl.value, rho.value);
    }

    #[test]
    fn bounds_hold(f in positive_body(8)) {
        verify_bounds(&f, x()).unwrap();
    }

    #[test]
    fn random_atops_converge_in_three(seed in any::<u64>(), count in 1..=3usize) {
        let mut gen = Gen::new(seed);
        let pairs = gen.atop_pairs(&atoms(3), count, 3);
        let f = family_atop(&pairs, x());
        prop_assume!(f.has_free(x()));
        let cl = closure_ordinal(&f, x(), None).unwrap();
        prop_assert!(cl.value <= if count == 1 { 2 } else { 3 }, "{}: {}", f, cl.value);
    }

    #[test]
    fn word_letter_algebra(seed in any::<u64>()) {
        let heads = [Sym::new("al1"), Sym::new("al2")];
        let sides = [Sym::new("be1"), Sym::new("be2")];
        let mut gen = Gen::new(seed);
        let letter = |gen: &mut Gen| gen.word(&heads, &sides, 1).0.pop().unwrap_or_default();
        let (l0, l1) = (letter(&mut gen), letter(&mut gen));
        let phi = gen.fragment(x(), &heads, &sides, 2);
        let xs = x();
        let comp = |f: &Formula, g: &Formula| f.substitute(xs, g);
        let pf = |p: &SuppPair| p.formula(xs);
        let a0 = SuppPair { a: l0.a.clone(), b: Default::default() };
        let merged = SuppPair { a: &l0.a | &l1.a, b: l1.b.clone() };
        let first = equiv(&comp(&pf(&a0), &pf(&l1)), &pf(&merged)).unwrap();
        prop_assert!(first);
        let b1 = SuppPair { a: Default::default(), b: l1.b.clone() };
        let merged = SuppPair { a: l0.a.clone(), b: &l0.b | &l1.b };
        let second = equiv(&comp(&pf(&l0), &pf(&b1)), &pf(&merged)).unwrap();
        prop_assert!(second);
        let left = comp(&pf(&l0), &comp(&phi, &pf(&l1)));
        let right = comp(
            &pf(&SuppPair { a: l0.a.clone(), b: &l0.b - &l1.b }),
            &comp(&phi, &pf(&SuppPair { a: &l1.a - &l0.a, b: l1.b.clone() })),
        );
        prop_assert!(equiv(&left, &right).unwrap(), "{} / {} / {}", l0, phi, l1);
        prop_assert_eq!(Word(vec![l0.clone()]).formula(xs), pf(&l0));
    }
}
