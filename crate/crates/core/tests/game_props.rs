mod common;

use common::x;
use fixelim::game::{
    br, closed_form_below_iterate, play_game, supp, triangle_less, StarConjunction, SuppPair, Word,
    DEFAULT_BUDGET,
};
use fixelim::gen::Gen;
use fixelim::ordinal::ruitenburg_number;
use fixelim::prover::{entails, equiv};
use fixelim::{Formula, Sym};
use proptest::prelude::*;

fn heads() -> [Sym; 2] {
    [Sym::new("al1"), Sym::new("al2")]
}

fn sides() -> [Sym; 2] {
    [Sym::new("be1"), Sym::new("be2")]
}

fn fragment(depth: usize) -> impl Strategy<Value = Formula> {
    any::<u64>().prop_map(move |s| Gen::new(s).fragment(x(), &heads(), &sides(), depth))
}

fn word(max_len: usize) -> impl Strategy<Value = Word> {
    any::<u64>().prop_map(move |s| Gen::new(s).word(&heads(), &sides(), max_len))
}

fn star(n: usize, m: usize, conjuncts: usize, word_len: usize) -> impl Strategy<Value = StarConjunction> {
    any::<u64>().prop_map(move |s| Gen::new(s).star_conjunction(n, m, conjuncts, 2, word_len))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn branches_keep_support(f in fragment(4)) {
        let b = br(&f, x()).unwrap();
        prop_assert_eq!(supp(&b, x()).unwrap(), supp(&f, x()).unwrap());
    }

    #[test]
    fn branches_are_below(f in fragment(4)) {
        let b = br(&f, x()).unwrap();
        prop_assert!(entails(&[b], &f).unwrap());
    }

    #[test]
    fn support_formula_is_above(f in fragment(4)) {
        let s = supp(&f, x()).unwrap().formula(x());
        prop_assert!(entails(&[f], &s).unwrap());
    }

    #[test]
    fn word_squares_to_support(w in word(3)) {
        let phi = w.formula(x());
        let square = phi.substitute(x(), &phi);
        prop_assert!(entails(&[phi.clone()], &square).unwrap());
        prop_assert!(equiv(&square, &w.supp().formula(x())).unwrap(), "{}", w);
    }

    #[test]
    fn less_implies_order(w in word(3), a in 0..4u8, b in 0..4u8) {
        let pick = |mask: u8, atoms: [Sym; 2]| atoms.into_iter().enumerate().filter(move |(i, _)| mask >> i & 1 == 1).map(|(_, s)| s);
        let p = SuppPair::new(pick(a, heads()), pick(b, sides()));
        if triangle_less(&p, &w) {
            prop_assert!(entails(&[p.formula(x())], &w.formula(x())).unwrap(), "{} {}", p, w);
        }
    }

    #[test]
    fn less_is_stable_under_extension(w in word(3), v in word(2), a in 0..4u8, b in 0..4u8) {
        let pick = |mask: u8, atoms: [Sym; 2]| atoms.into_iter().enumerate().filter(move |(i, _)| mask >> i & 1 == 1).map(|(_, s)| s);
        let p = SuppPair::new(pick(a, heads()), pick(b, sides()));
        if triangle_less(&p, &w) {
            prop_assert!(triangle_less(&p, &w.concat(&v)));
            prop_assert!(triangle_less(&p, &v.concat(&w)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn winning_game_bounds_iterate(s in star(1, 2, 2, 2)) {
        let (n, m) = s.dims();
        for k in 1..=((n + 1) * (m + 1)).min(4) {
            let out = play_game(&s, k, DEFAULT_BUDGET).unwrap();
            if out.eve_wins_all {
                prop_assert!(closed_form_below_iterate(&s, k).unwrap(), "K = {} on {}", k, s.formula());
            }
        }
    }

    #[test]
    fn ruitenburg_bound_for_star_conjunctions(s in star(2, 2, 3, 2)) {
        let (n, m) = s.dims();
        let bound = (n + 1) * (m + 1);
        prop_assert!(play_game(&s, bound, DEFAULT_BUDGET).unwrap().eve_wins_all);
        let rho = ruitenburg_number(&s.formula(), x(), None).unwrap();
        prop_assert!(!rho.cap_hit && rho.value <= bound, "{}: {}", s.formula(), rho.value);
        prop_assert!(equiv(&s.closed_form(), &rho.approximants[rho.value]).unwrap());
    }
}
