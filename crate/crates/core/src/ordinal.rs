//! Closure ordinals, Ruitenburg numbers, the bound calculators and the
//! families that make them tight.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::elim::wn_decompose;
use crate::error::{Error, Result};
use crate::formula::{classify, Formula, Kind, Sym, VarClass};
use crate::heyting::{FiniteHeytingAlgebra, FinitePoset, Valuation};
use crate::normal::{head_side, is_disjunctive, to_normal_form};
use crate::prover::with_prover;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrdinalResult {
    pub value: usize,
    /// `φ⁰..φ^value`, starting from `⊥` for closure ordinals and from `x`
    /// for Ruitenburg numbers.
    pub approximants: Vec<Formula>,
    pub cap_hit: bool,
}

/// `2·n + 2`, where `n` is the larger of the two size conventions.
pub fn default_cap(f: &Formula) -> usize {
    let n = f.size().max(f.imp_var_count()) as usize;
    2 * n + 2
}

fn check_input(f: &Formula, x: Sym) -> Result<()> {
    if !f.is_fixpoint_free() {
        return Err(Error::FixpointInProver);
    }
    if !classify(f, x).is_positive() {
        return Err(Error::NotPositiveVar(x.name().to_owned()));
    }
    Ok(())
}

/// Least `n` with `φⁿ⁺¹(⊥) ≡ φⁿ(⊥)`. Only `φⁿ⁺¹(⊥) ⊢ φⁿ(⊥)` is checked,
/// since the approximants form an increasing chain.
pub fn closure_ordinal(f: &Formula, x: Sym, cap: Option<usize>) -> Result<OrdinalResult> {
    check_input(f, x)?;
    let cap = cap.unwrap_or_else(|| default_cap(f));
    let mut approx = vec![Formula::bot()];
    with_prover(|p| {
        for n in 0..=cap {
            let next = f.substitute(x, &approx[n]);
            if next == approx[n] || p.entails(std::slice::from_ref(&next), &approx[n])? {
                return Ok(OrdinalResult {
                    value: n,
                    approximants: approx,
                    cap_hit: false,
                });
            }
            if n == cap {
                break;
            }
            approx.push(next);
        }
        Ok(OrdinalResult {
            value: cap,
            approximants: approx,
            cap_hit: true,
        })
    })
}

/// Least `n` with `φⁿ ≡ φⁿ⁺²`, iterating with `x` free.
pub fn ruitenburg_number(f: &Formula, x: Sym, cap: Option<usize>) -> Result<OrdinalResult> {
    check_input(f, x)?;
    let cap = cap.unwrap_or_else(|| default_cap(f));
    let mut it = vec![Formula::sym(x)];
    with_prover(|p| {
        for n in 0..=cap {
            while it.len() < n + 3 {
                let next = f.substitute(x, it.last().unwrap());
                it.push(next);
            }
            if p.equiv(&it[n], &it[n + 2])? {
                it.truncate(n + 1);
                return Ok(OrdinalResult {
                    value: n,
                    approximants: it,
                    cap_hit: false,
                });
            }
        }
        it.truncate(cap + 1);
        Ok(OrdinalResult {
            value: cap,
            approximants: it,
            cap_hit: true,
        })
    })
}

/// `|Head(d)| + 1`.
pub fn bound_disjunctive(d: &Formula, x: Sym) -> Result<usize> {
    Ok(head_side(d, x)?.head.len() + 1)
}

/// `n + 1` where `n` is the number of cut points of the weakly negative
/// decomposition.
pub fn bound_weakly_negative(f: &Formula, x: Sym) -> Result<usize> {
    Ok(wn_decompose(f, x)?.vars.len() + 1)
}

/// Folds `cl(f ∧ g) ≤ cl(f) + cl(g) − 1`. The empty conjunction is `⊤`,
/// whose closure ordinal is 1.
pub fn bound_conjunction(bounds: &[usize]) -> usize {
    match bounds.split_first() {
        None => 1,
        Some((first, rest)) => rest.iter().fold(*first, |a, b| (a + b).saturating_sub(1)),
    }
}

/// `(m + 1)(n + 1) − 1` for a pair whose inner component converges in `m`
/// steps and whose reduced outer map converges in `n`.
pub fn bound_bekic(m: usize, n: usize) -> usize {
    (m + 1) * (n + 1) - 1
}

pub fn bound_roll(inner: usize) -> usize {
    inner + 1
}

pub fn bound_diag(n: usize, m: usize) -> usize {
    n * m
}

/// Bound on the Ruitenburg number of a conjunction of disjunctive formulas
/// with `big_n` distinct heads and `big_m` distinct sides.
pub fn bound_spos(big_n: usize, big_m: usize) -> usize {
    (big_n + 1) * (big_m + 1)
}

/// `b ∨ ⋁ᵢ (aᵢ → x)` over `a1..an`.
pub fn family_phi_n(n: usize) -> Formula {
    let x = Formula::var("x");
    Formula::or(
        std::iter::once(Formula::var("b"))
            .chain((1..=n).map(|i| Formula::imp(Formula::var(&format!("a{i}")), x.clone()))),
    )
}

/// The upset algebra of subsets of `{1..n}` under reverse inclusion, with
/// `b` true only at the empty set and `aᵢ` true at the sets missing `i`.
pub fn family_phi_n_model(n: usize) -> Result<(FiniteHeytingAlgebra, Valuation)> {
    if n > 5 {
        return Err(Error::InvalidArgument(format!("n = {n} exceeds the model limit 5")));
    }
    let h = FiniteHeytingAlgebra::upset_algebra(&FinitePoset::subsets_reversed(n))?;
    let mut v = Valuation::new();
    v.insert(Sym::new("b"), h.element_of_upset(1).expect("upset"));
    for i in 1..=n {
        let mask = (0..1usize << n)
            .filter(|s| s >> (i - 1) & 1 == 0)
            .fold(0u64, |m, s| m | 1 << s);
        v.insert(
            Sym::new(&format!("a{i}")),
            h.element_of_upset(mask).expect("upset"),
        );
    }
    Ok((h, v))
}

/// `⋀_{j=1..k−1} (x → a_{j−1}) → a_j` on the `(k+2)`-chain
/// `⊥ < a₀ < … < a_{k−1} < ⊤`; iteration from `⊥` needs exactly `k` steps.
pub fn family_chain_conj(k: usize) -> Result<(Formula, FiniteHeytingAlgebra, Valuation)> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let x = Formula::var("x");
    let a = |i: usize| Formula::var(&format!("a{i}"));
    let f = Formula::and((1..k).map(|j| {
        Formula::imp(Formula::imp(x.clone(), a(j - 1)), a(j))
    }));
    let h = FiniteHeytingAlgebra::chain(k + 2)?;
    let v = (0..k).map(|i| (Sym::new(&format!("a{i}")), i + 1)).collect();
    Ok((f, h, v))
}

/// `⋁ᵢ (x → aᵢ) → bᵢ`.
pub fn family_atop(pairs: &[(Formula, Formula)], x: Sym) -> Formula {
    let xf = Formula::sym(x);
    Formula::or(
        pairs
            .iter()
            .map(|(a, b)| Formula::imp(Formula::imp(xf.clone(), a.clone()), b.clone())),
    )
}

/// `family_atop` over fresh atoms `a1, b1, …, an, bn`.
pub fn family_atop_generic(n: usize) -> Formula {
    let pairs: Vec<_> = (1..=n)
        .map(|i| (Formula::var(&format!("a{i}")), Formula::var(&format!("b{i}"))))
        .collect();
    family_atop(&pairs, Sym::new("x"))
}

/// Whether `f` is a disjunction of maps `(x → a) → b` with `a`, `b` free
/// of `x`.
pub fn is_atop_disjunction(f: &Formula, x: Sym) -> bool {
    let is_atop = |g: &Formula| match g.kind() {
        Kind::Imp(l, b) => match l.kind() {
            Kind::Imp(v, a) => v.as_var() == Some(x) && !a.has_free(x) && !b.has_free(x),
            _ => false,
        },
        _ => false,
    };
    match f.kind() {
        Kind::Or(cs) => cs.iter().all(is_atop),
        _ => is_atop(f),
    }
}

/// Runs the pair map on `P × Q` that makes the product bound tight, with
/// `P` the `(n+1)`-chain and `Q` the `((n+1)m+1)`-chain. Returns the
/// number of steps from `(⊥, ⊥)` to the least fixed point.
pub fn bekic_tight_instance(m: usize, n: usize) -> Result<usize> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("m and n must be positive".into()));
    }
    let q_top = (n + 1) * m;
    let succ = |x: usize| (x + 1).min(n);
    let f = |x: usize, y: usize| if y / m <= x { x } else { succ(x) };
    // Agrees with `xm + k + 1` (for `y = zm + k`, `z = x`) and `(x + 1)m`
    // (for `z > x`) everywhere the iteration goes; below that it is
    // flattened to `xm + 1` so the map stays monotone.
    let g = |x: usize, y: usize| ((x + 1) * m).min(y.max(x * m) + 1);
    // Both components must be monotone for the count to mean anything.
    for x in 0..=n {
        for y in 0..=q_top {
            for x2 in x..=n {
                for y2 in y..=q_top {
                    if f(x, y) > f(x2, y2) || g(x, y) > g(x2, y2) {
                        return Err(Error::VerificationFailed("pair map is not monotone".into()));
                    }
                }
            }
        }
    }
    let mut cur = (0, 0);
    for steps in 0.. {
        let next = (f(cur.0, cur.1), g(cur.0, cur.1));
        if next == cur {
            return Ok(steps);
        }
        cur = next;
    }
    unreachable!()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub formula: Formula,
    pub var: Sym,
    pub cl_bounds: BTreeMap<String, usize>,
    pub rho_bounds: BTreeMap<String, usize>,
    pub cl: OrdinalResult,
    pub rho: OrdinalResult,
}

impl BoundReport {
    pub fn min_cl_bound(&self) -> Option<usize> {
        self.cl_bounds.values().copied().min()
    }

    pub fn min_rho_bound(&self) -> Option<usize> {
        self.rho_bounds.values().copied().min()
    }
}

/// Bounds on `cl` that apply to `f`, keyed by rule name.
pub fn applicable_cl_bounds(f: &Formula, x: Sym) -> Result<BTreeMap<String, usize>> {
    let mut out = BTreeMap::new();
    match classify(f, x) {
        VarClass::Absent => {
            out.insert("constant".into(), 1);
        }
        VarClass::StronglyPositive => {
            if is_disjunctive(f, x) {
                out.insert("disjunctive".into(), bound_disjunctive(f, x)?);
            }
            let nf = to_normal_form(f, x)?;
            let mut parts = Vec::new();
            if !nf.x_free_part.is_top() {
                parts.push(1);
            }
            for d in &nf.disjuncts {
                parts.push(bound_disjunctive(d, x)?);
            }
            out.insert("conjunction".into(), bound_conjunction(&parts));
        }
        VarClass::WeaklyNegative => {
            out.insert("weakly_negative".into(), bound_weakly_negative(f, x)?);
            if is_atop_disjunction(f, x) {
                out.insert("atop".into(), 3);
            }
        }
        VarClass::MixedPositive => {}
        VarClass::NonPositive => return Err(Error::NotPositiveVar(x.name().to_owned())),
    }
    Ok(out)
}

/// Bounds on `ρ` that apply to `f`, keyed by rule name.
pub fn applicable_rho_bounds(f: &Formula, x: Sym) -> Result<BTreeMap<String, usize>> {
    let mut out = BTreeMap::new();
    out.insert("safety".into(), default_cap(f));
    if classify(f, x) == VarClass::StronglyPositive {
        let nf = to_normal_form(f, x)?;
        if nf.x_free_part.is_top() {
            let mut heads = BTreeSet::new();
            let mut sides = BTreeSet::new();
            for d in &nf.disjuncts {
                let hs = head_side(d, x)?;
                heads.extend(hs.head);
                sides.extend(hs.side);
            }
            out.insert("spos".into(), bound_spos(heads.len(), sides.len()));
        }
    }
    Ok(out)
}

/// Computes `cl` and `ρ` and checks them against every applicable bound
/// and against `cl ≤ ρ`.
pub fn verify_bounds(f: &Formula, x: Sym) -> Result<BoundReport> {
    check_input(f, x)?;
    let cl_bounds = applicable_cl_bounds(f, x)?;
    let rho_bounds = applicable_rho_bounds(f, x)?;
    let cl = closure_ordinal(f, x, None)?;
    if cl.cap_hit {
        return Err(Error::CapExceeded(cl.value));
    }
    let rho = ruitenburg_number(f, x, None)?;
    if rho.cap_hit {
        return Err(Error::CapExceeded(rho.value));
    }
    for (rule, bound) in &cl_bounds {
        if cl.value > *bound {
            return Err(Error::BoundViolation {
                rule: rule.clone(),
                bound: *bound,
                value: cl.value,
            });
        }
    }
    for (rule, bound) in &rho_bounds {
        if rho.value > *bound {
            return Err(Error::BoundViolation {
                rule: rule.clone(),
                bound: *bound,
                value: rho.value,
            });
        }
    }
    if cl.value > rho.value {
        return Err(Error::BoundViolation {
            rule: "cl<=rho".into(),
            bound: rho.value,
            value: cl.value,
        });
    }
    Ok(BoundReport {
        formula: f.clone(),
        var: x,
        cl_bounds,
        rho_bounds,
        cl,
        rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heyting::lfp_iterate;
    use crate::prover::equiv;
    use crate::syntax::parse;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn x() -> Sym {
        Sym::new("x")
    }

    #[test]
    fn roll_example() {
        let r = closure_ordinal(&p("(x -> b) -> a"), x(), None).unwrap();
        assert_eq!(r.value, 2);
        assert_eq!(r.approximants[1], p("a"));
        assert_eq!(r.approximants[2], p("(a -> b) -> a"));
        assert!(!equiv(&r.approximants[1], &r.approximants[2]).unwrap());
        assert_eq!(closure_ordinal(&p("x"), x(), None).unwrap().value, 0);
    }

    #[test]
    fn phi_n_ordinals() {
        for n in 1..=3 {
            let f = family_phi_n(n);
            assert_eq!(closure_ordinal(&f, x(), None).unwrap().value, n + 1);
            let (h, v) = family_phi_n_model(n).unwrap();
            assert_eq!(lfp_iterate(&f, x(), &h, &v).unwrap().1, n + 1);
        }
        assert_eq!(family_phi_n(0), p("b"));
        assert_eq!(family_phi_n(1), p("b \\/ (a1 -> x)"));
    }

    #[test]
    fn ruitenburg_examples() {
        let r = ruitenburg_number(&p("a1 /\\ a2 -> b1 \\/ x"), x(), None).unwrap();
        assert_eq!(r.value, 1);
        let w = p("a1 -> b1 \\/ (a2 -> b2 \\/ x)");
        assert_eq!(ruitenburg_number(&w, x(), None).unwrap().value, 2);
        assert_eq!(ruitenburg_number(&p("x"), x(), None).unwrap().value, 0);
    }

    #[test]
    fn bound_calculators() {
        assert_eq!(bound_disjunctive(&p("al -> be \\/ x"), x()).unwrap(), 2);
        assert_eq!(bound_disjunctive(&p("be \\/ x"), x()).unwrap(), 1);
        assert_eq!(bound_disjunctive(&p("(a1 -> x) \\/ (a2 -> x)"), x()).unwrap(), 3);
        assert_eq!(bound_weakly_negative(&p("(x -> b) -> a"), x()).unwrap(), 2);
        assert_eq!(
            bound_weakly_negative(&p("((x -> c) -> a) \\/ ((x -> d) -> b)"), x()).unwrap(),
            3
        );
        assert_eq!(bound_weakly_negative(&p("a"), x()).unwrap(), 1);
        assert_eq!(bound_conjunction(&[2, 2]), 3);
        assert_eq!(bound_conjunction(&[1]), 1);
        assert_eq!(bound_conjunction(&[4, 3]), 6);
        assert_eq!(bound_bekic(1, 1), 3);
        assert_eq!(bound_bekic(0, 5), 5);
        assert_eq!(bound_roll(1), 2);
        assert_eq!(bound_roll(0), 1);
        assert_eq!(bound_diag(2, 2), 4);
        assert_eq!(bound_diag(0, 7), 0);
        assert_eq!(bound_diag(1, 7), 7);
        assert_eq!(bound_spos(1, 1), 4);
        assert_eq!(bound_spos(0, 0), 1);
        assert_eq!(bound_spos(2, 3), 12);
    }

    #[test]
    fn bekic_instance_is_tight() {
        assert_eq!(bekic_tight_instance(2, 2).unwrap(), 8);
        for m in 1..=3 {
            for n in 1..=3 {
                assert_eq!(bekic_tight_instance(m, n).unwrap(), bound_bekic(m, n));
            }
        }
    }

    #[test]
    fn chain_conj_steps() {
        for k in 1..=4 {
            let (f, h, v) = family_chain_conj(k).unwrap();
            let (fix, steps) = lfp_iterate(&f, x(), &h, &v).unwrap();
            assert_eq!(steps, k);
            assert_eq!(fix, h.top());
        }
        assert!(family_chain_conj(1).unwrap().0.is_top());
        assert!(family_chain_conj(0).is_err());
    }

    #[test]
    fn atop_family() {
        let one = family_atop(&[(p("a"), p("b"))], x());
        assert_eq!(one, p("(x -> a) -> b"));
        assert!(family_atop(&[], x()).is_bot());
        assert!(is_atop_disjunction(&family_atop_generic(3), x()));
        for n in 2..=3 {
            let r = closure_ordinal(&family_atop_generic(n), x(), None).unwrap();
            assert_eq!(r.value, 3);
        }
    }

    #[test]
    fn verify_examples() {
        let r = verify_bounds(&p("((x -> c) -> a) \\/ ((x -> d) -> b)"), x()).unwrap();
        assert_eq!(r.cl_bounds["weakly_negative"], 3);
        assert!(r.cl.value <= 3);
        let r = verify_bounds(&family_atop_generic(2), x()).unwrap();
        assert_eq!(r.cl_bounds["atop"], 3);
        let r = verify_bounds(&p("x"), x()).unwrap();
        assert_eq!(r.cl.value, 0);
        let r = verify_bounds(&p("(a1 -> b1 \\/ x) /\\ (a2 -> x)"), x()).unwrap();
        assert_eq!(r.rho_bounds["spos"], 6);
    }
}
