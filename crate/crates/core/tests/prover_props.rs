mod common;

use common::{algebras, formula, raw, tuples};
use fixelim::heyting::{refute_equiv, Compiled};
use fixelim::prover::{Prover, Sequent};
use fixelim::{Formula, Sym};
use proptest::prelude::*;

fn inputs() -> Vec<Sym> {
    ["a", "b", "c", "x"].iter().map(|s| Sym::new(s)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn derivable_sequents_hold_in_small_algebras(
        ctx in prop::collection::vec(formula(true, 3), 0..3),
        goal in formula(true, 3),
    ) {
        let mut p = Prover::new();
        prop_assume!(p.entails(&ctx, &goal).unwrap());
        let lhs = Compiled::new(&Formula::and(ctx.clone()), &inputs()).unwrap();
        let rhs = Compiled::new(&goal, &inputs()).unwrap();
        for h in algebras(5) {
            let mut ok = true;
            tuples(h, 4, |v| ok &= h.leq(lhs.eval(h, v), rhs.eval(h, v)));
            prop_assert!(ok);
        }
    }

    #[test]
    fn underivable_sequents_have_small_countermodels(
        ctx in prop::collection::vec(raw(3, 2), 0..3),
        goal in raw(3, 3),
    ) {
        let ctx: Vec<Formula> = ctx.iter().map(|r| r.to_formula()).collect();
        let goal = goal.to_formula();
        let mut p = Prover::new();
        prop_assume!(!p.entails(&ctx, &goal).unwrap());
        let f = Formula::imp(Formula::and(ctx), goal);
        prop_assert!(refute_equiv(&f, &Formula::top(), 4).is_some(), "no countermodel for {}", f);
    }

    #[test]
    fn proving_is_deterministic(ctx in prop::collection::vec(formula(true, 3), 0..3), goal in formula(true, 3)) {
        let s = Sequent::new(ctx, goal);
        let mut p = Prover::new();
        let first = p.prove(&s).unwrap();
        let second = p.prove(&s).unwrap();
        let fresh = Prover::new().prove(&s).unwrap();
        prop_assert_eq!(first.derivable, second.derivable);
        prop_assert_eq!(first, fresh);
    }

    #[test]
    fn memo_agrees_with_fresh_search(goals in prop::collection::vec(formula(true, 4), 1..12)) {
        let mut shared = Prover::new();
        for g in &goals {
            let cached = shared.valid(g).unwrap();
            let fresh = Prover::with_capacity(0).valid(g).unwrap();
            prop_assert_eq!(cached, fresh, "{}", g);
        }
        for g in &goals {
            prop_assert_eq!(shared.valid(g).unwrap(), Prover::new().valid(g).unwrap());
        }
    }
}
