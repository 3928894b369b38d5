//! Decision procedure for intuitionistic propositional logic.
//!
//! A contraction-free sequent calculus in the style of Dyckhoff's G4ip.
//! Contexts are kept saturated under the invertible left rules (conjunction
//! splitting, atomic modus ponens, currying of `(A ∧ B) → C`, splitting of
//! `(A ∨ B) → C`), so a search node only ever branches on `∨L`, `∨R` and the
//! left rule for `(C → D) → B`. Sequents refuted by a classical truth table
//! are cut off early, and results are memoized on the canonical sequent.

use std::cell::RefCell;
use std::rc::Rc;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::formula::{Formula, Kind, Sym};

/// `context ⊢ goal`; both sides fixed-point free.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Sequent {
    pub context: Vec<Formula>,
    pub goal: Formula,
}

impl Sequent {
    pub fn new(context: Vec<Formula>, goal: Formula) -> Sequent {
        Sequent { context, goal }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ProofStats {
    pub nodes: u64,
    pub max_depth: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ProofOutcome {
    pub derivable: bool,
    pub stats: ProofStats,
}

const DEFAULT_MEMO_CAP: usize = 1 << 20;
const MAX_TABLE_ATOMS: usize = 14;

/// Reads the memo capacity from `FIXELIM_MEMO_CAP`.
pub fn memo_cap_from_env() -> usize {
    std::env::var("FIXELIM_MEMO_CAP")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MEMO_CAP)
}

/// A prover instance owning its memo table.
pub struct Prover {
    memo: FxHashMap<Box<[u64]>, bool>,
    cap: usize,
}

impl Default for Prover {
    fn default() -> Self {
        Prover::with_capacity(memo_cap_from_env())
    }
}

impl Prover {
    pub fn new() -> Prover {
        Prover::default()
    }

    /// A prover whose memo is cleared whenever it grows past `cap` entries.
    /// `cap = 0` disables memoization.
    pub fn with_capacity(cap: usize) -> Prover {
        Prover {
            memo: FxHashMap::default(),
            cap,
        }
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    pub fn clear(&mut self) {
        self.memo.clear();
    }

    pub fn prove(&mut self, s: &Sequent) -> Result<ProofOutcome> {
        if !s.goal.is_fixpoint_free() || s.context.iter().any(|f| !f.is_fixpoint_free()) {
            return Err(Error::FixpointInProver);
        }
        let mut atoms: Vec<Sym> = Vec::new();
        let mut seen = FxHashSet::default();
        for f in s.context.iter().chain(std::iter::once(&s.goal)) {
            for a in f.free_vars() {
                if seen.insert(*a) {
                    atoms.push(*a);
                }
            }
        }
        let mut search = Search {
            memo: &mut self.memo,
            cap: self.cap,
            table: Truth::new(atoms),
            stats: ProofStats::default(),
        };
        let derivable = match saturate(&[], s.context.clone()) {
            None => true,
            Some(ctx) => search.run(&ctx, &s.goal, 0),
        };
        Ok(ProofOutcome {
            derivable,
            stats: search.stats,
        })
    }

    pub fn entails(&mut self, context: &[Formula], goal: &Formula) -> Result<bool> {
        Ok(self
            .prove(&Sequent::new(context.to_vec(), goal.clone()))?
            .derivable)
    }

    pub fn valid(&mut self, f: &Formula) -> Result<bool> {
        self.entails(&[], f)
    }

    /// `⊢ f → g` and `⊢ g → f`.
    pub fn equiv(&mut self, f: &Formula, g: &Formula) -> Result<bool> {
        if f == g {
            if !f.is_fixpoint_free() {
                return Err(Error::FixpointInProver);
            }
            return Ok(true);
        }
        Ok(self.entails(std::slice::from_ref(f), g)? && self.entails(std::slice::from_ref(g), f)?)
    }
}

thread_local! {
    static DEFAULT: RefCell<Prover> = RefCell::new(Prover::default());
}

/// Runs `op` with this thread's shared prover.
pub fn with_prover<T>(op: impl FnOnce(&mut Prover) -> T) -> T {
    DEFAULT.with(|p| op(&mut p.borrow_mut()))
}

pub fn prove(s: &Sequent) -> Result<ProofOutcome> {
    with_prover(|p| p.prove(s))
}

pub fn entails(context: &[Formula], goal: &Formula) -> Result<bool> {
    with_prover(|p| p.entails(context, goal))
}

pub fn equiv(f: &Formula, g: &Formula) -> Result<bool> {
    with_prover(|p| p.equiv(f, g))
}

pub fn valid(f: &Formula) -> Result<bool> {
    with_prover(|p| p.valid(f))
}

// ---------------------------------------------------------------------------
// Saturation
// ---------------------------------------------------------------------------

/// Closes `base ∪ add` under the invertible left rules. Returns `None` when
/// `⊥` becomes derivable. The result is sorted by node id and contains only
/// atoms, disjunctions, `p → B` with `p` absent, and `(C → D) → B`.
fn saturate(base: &[Formula], add: Vec<Formula>) -> Option<Vec<Formula>> {
    let mut items: FxHashMap<u64, Formula> =
        base.iter().map(|f| (f.id(), f.clone())).collect();
    let mut atoms: FxHashSet<Sym> = base.iter().filter_map(|f| f.as_var()).collect();
    let mut work = add;
    while let Some(f) = work.pop() {
        if items.contains_key(&f.id()) {
            continue;
        }
        match f.kind() {
            Kind::Bot => return None,
            Kind::Top => {}
            Kind::Var(p) => {
                let p = *p;
                atoms.insert(p);
                items.insert(f.id(), f.clone());
                let fired: Vec<u64> = items
                    .iter()
                    .filter(|(_, g)| matches!(g.kind(), Kind::Imp(a, _) if a.as_var() == Some(p)))
                    .map(|(id, _)| *id)
                    .collect();
                for id in fired {
                    if let Some(g) = items.remove(&id) {
                        if let Kind::Imp(_, b) = g.kind() {
                            work.push(b.clone());
                        }
                    }
                }
            }
            Kind::And(cs) => work.extend(cs.iter().cloned()),
            Kind::Or(_) => {
                items.insert(f.id(), f.clone());
            }
            Kind::Imp(a, b) => match a.kind() {
                Kind::Var(p) => {
                    if atoms.contains(p) {
                        work.push(b.clone());
                    } else {
                        items.insert(f.id(), f.clone());
                    }
                }
                Kind::And(cs) => {
                    let rest = Formula::and(cs[1..].iter().cloned());
                    work.push(Formula::imp(cs[0].clone(), Formula::imp(rest, b.clone())));
                }
                Kind::Or(cs) => {
                    work.extend(cs.iter().map(|c| Formula::imp(c.clone(), b.clone())));
                }
                Kind::Imp(..) => {
                    items.insert(f.id(), f.clone());
                }
                // Canonical constructors never leave ⊤ or ⊥ as antecedent.
                Kind::Top => work.push(b.clone()),
                Kind::Bot => {}
                Kind::Mu(..) | Kind::Nu(..) => unreachable!("checked at entry"),
            },
            Kind::Mu(..) | Kind::Nu(..) => unreachable!("checked at entry"),
        }
    }
    let mut out: Vec<Formula> = items.into_values().collect();
    out.sort_by_key(|f| f.id());
    Some(out)
}

fn without(ctx: &[Formula], i: usize) -> Vec<Formula> {
    let mut v = Vec::with_capacity(ctx.len() - 1);
    v.extend_from_slice(&ctx[..i]);
    v.extend_from_slice(&ctx[i + 1..]);
    v
}

// ---------------------------------------------------------------------------
// Classical truth tables
// ---------------------------------------------------------------------------

/// Truth tables over a fixed atom list, as packed bitsets.
struct Truth {
    atoms: Vec<Sym>,
    words: usize,
    mask: u64,
    cache: FxHashMap<u64, Rc<[u64]>>,
}

impl Truth {
    fn new(atoms: Vec<Sym>) -> Truth {
        let n = atoms.len().min(MAX_TABLE_ATOMS);
        let rows = 1usize << n;
        let words = rows.div_ceil(64);
        let mask = if rows >= 64 { u64::MAX } else { (1u64 << rows) - 1 };
        Truth {
            atoms,
            words,
            mask,
            cache: FxHashMap::default(),
        }
    }

    fn enabled(&self) -> bool {
        self.atoms.len() <= MAX_TABLE_ATOMS
    }

    fn atom(&self, s: Sym) -> Vec<u64> {
        let i = self.atoms.iter().position(|a| *a == s).expect("atom indexed");
        let mut out = vec![0u64; self.words];
        for (w, word) in out.iter_mut().enumerate() {
            let mut bits = 0u64;
            for b in 0..64 {
                let row = w * 64 + b;
                if (row >> i) & 1 == 1 {
                    bits |= 1 << b;
                }
            }
            *word = bits & self.mask;
        }
        out
    }

    fn eval(&mut self, f: &Formula) -> Rc<[u64]> {
        if let Some(t) = self.cache.get(&f.id()) {
            return t.clone();
        }
        let mask = self.mask;
        let words = self.words;
        let out: Vec<u64> = match f.kind() {
            Kind::Var(s) => self.atom(*s),
            Kind::Top => vec![mask; words],
            Kind::Bot => vec![0; words],
            Kind::And(cs) => {
                let mut acc = vec![mask; words];
                for c in cs.iter() {
                    let t = self.eval(c);
                    acc.iter_mut().zip(t.iter()).for_each(|(a, b)| *a &= b);
                }
                acc
            }
            Kind::Or(cs) => {
                let mut acc = vec![0; words];
                for c in cs.iter() {
                    let t = self.eval(c);
                    acc.iter_mut().zip(t.iter()).for_each(|(a, b)| *a |= b);
                }
                acc
            }
            Kind::Imp(a, b) => {
                let ta = self.eval(a);
                let tb = self.eval(b);
                ta.iter().zip(tb.iter()).map(|(x, y)| (!x | y) & mask).collect()
            }
            Kind::Mu(..) | Kind::Nu(..) => unreachable!("checked at entry"),
        };
        let rc: Rc<[u64]> = out.into();
        self.cache.insert(f.id(), rc.clone());
        rc
    }

    /// Some classical valuation satisfies the context and falsifies the goal.
    fn refutes(&mut self, ctx: &[Formula], goal: &Formula) -> bool {
        if !self.enabled() {
            return false;
        }
        let mut acc: Vec<u64> = self.eval(goal).iter().map(|w| !w & self.mask).collect();
        for f in ctx {
            let t = self.eval(f);
            acc.iter_mut().zip(t.iter()).for_each(|(a, b)| *a &= b);
            if acc.iter().all(|w| *w == 0) {
                return false;
            }
        }
        acc.iter().any(|w| *w != 0)
    }
}

// ---------------------------------------------------------------------------
// Search
// ---------------------------------------------------------------------------

struct Search<'a> {
    memo: &'a mut FxHashMap<Box<[u64]>, bool>,
    cap: usize,
    table: Truth,
    stats: ProofStats,
}

fn in_context(ctx: &[Formula], f: &Formula) -> bool {
    ctx.binary_search_by_key(&f.id(), |g| g.id()).is_ok()
}

impl Search<'_> {
    fn run(&mut self, ctx: &[Formula], goal: &Formula, depth: u32) -> bool {
        self.stats.nodes += 1;
        self.stats.max_depth = self.stats.max_depth.max(depth);
        match goal.kind() {
            Kind::Top => return true,
            Kind::And(cs) => return cs.iter().all(|c| self.run(ctx, c, depth + 1)),
            Kind::Imp(a, b) => {
                return match saturate(ctx, vec![a.clone()]) {
                    None => true,
                    Some(c2) => self.run(&c2, b, depth + 1),
                }
            }
            _ => {}
        }
        if in_context(ctx, goal) {
            return true;
        }
        if let Kind::Or(ds) = goal.kind() {
            if ds.iter().any(|d| in_context(ctx, d)) {
                return true;
            }
        }

        let key: Box<[u64]> = ctx
            .iter()
            .map(|f| f.id())
            .chain(std::iter::once(goal.id()))
            .collect();
        if let Some(r) = self.memo.get(&key) {
            return *r;
        }
        let result = self.branch(ctx, goal, depth);
        if self.cap > 0 {
            if self.memo.len() >= self.cap {
                self.memo.clear();
            }
            self.memo.insert(key, result);
        }
        result
    }

    fn branch(&mut self, ctx: &[Formula], goal: &Formula, depth: u32) -> bool {
        if self.table.refutes(ctx, goal) {
            return false;
        }
        // ∨L is invertible: split on the first disjunction in the context.
        if let Some(i) = ctx.iter().position(|f| matches!(f.kind(), Kind::Or(_))) {
            let Kind::Or(ds) = ctx[i].kind() else { unreachable!() };
            let rest = without(ctx, i);
            return ds.iter().all(|d| match saturate(&rest, vec![d.clone()]) {
                None => true,
                Some(c2) => self.run(&c2, goal, depth + 1),
            });
        }
        if let Kind::Or(ds) = goal.kind() {
            if ds.iter().any(|d| self.run(ctx, d, depth + 1)) {
                return true;
            }
        }
        for (i, f) in ctx.iter().enumerate() {
            let Kind::Imp(cd, b) = f.kind() else { continue };
            let Kind::Imp(c, d) = cd.kind() else { continue };
            let rest = without(ctx, i);
            let first = match saturate(&rest, vec![Formula::imp(d.clone(), b.clone())]) {
                None => true,
                Some(c1) => self.run(&c1, &Formula::imp(c.clone(), d.clone()), depth + 1),
            };
            if !first {
                continue;
            }
            let second = match saturate(&rest, vec![b.clone()]) {
                None => true,
                Some(c2) => self.run(&c2, goal, depth + 1),
            };
            if second {
                return true;
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn valid_str(s: &str) -> bool {
        valid(&p(s)).unwrap()
    }

    #[test]
    fn spec_examples() {
        assert!(valid_str("a -> a"));
        assert!(!valid_str("((a -> b) -> a) -> a"));
        assert!(entails(&[p("a"), p("a -> b")], &p("b")).unwrap());
        assert!(entails(&[], &Formula::top()).unwrap());
        assert!(entails(&[Formula::bot()], &p("a")).unwrap());
        assert!(!entails(&[p("a \\/ b")], &p("a")).unwrap());
        assert!(!equiv(&p("a"), &p("b")).unwrap());
        assert!(equiv(&p("a /\\ (a -> b)"), &p("a /\\ b")).unwrap());
    }

    #[test]
    fn phi_top_idempotent() {
        let x = Sym::new("x");
        let f = p("(x -> b) -> a");
        let once = f.substitute(x, &Formula::top());
        let twice = f.substitute(x, &once);
        assert!(equiv(&once, &twice).unwrap());
    }

    #[test]
    fn classical_non_theorems() {
        assert!(!valid_str("a \\/ (a -> F)"));
        assert!(!valid_str("((a -> F) -> F) -> a"));
        assert!(!valid_str("(a -> b) \\/ (b -> a)"));
        assert!(!valid_str("(a -> b \\/ c) -> (a -> b) \\/ (a -> c)"));
    }

    #[test]
    fn intuitionistic_theorems() {
        assert!(valid_str("((a \\/ (a -> F)) -> F) -> F"));
        assert!(valid_str("(a -> b) -> ((b -> c) -> (a -> c))"));
        assert!(valid_str("((a \\/ b) -> c) -> ((a -> c) /\\ (b -> c))"));
        assert!(valid_str("(a /\\ (b \\/ c)) -> ((a /\\ b) \\/ (a /\\ c))"));
        assert!(valid_str("((((a -> b) -> a) -> a) -> F) -> F"));
        assert!(valid_str("((((a -> b) -> a) -> a) -> b) -> b"));
        assert!(valid_str("(a -> (b /\\ c)) -> ((a -> b) /\\ (a -> c))"));
    }

    #[test]
    fn rejects_binders() {
        let m = p("mu x. (a \\/ x)");
        assert_eq!(valid(&m), Err(Error::FixpointInProver));
    }

    #[test]
    fn memo_coherent_with_fresh() {
        let cases = [
            "((a -> b) -> c) -> (b -> c)",
            "((a -> b) -> a) -> a",
            "(a \\/ b) -> (b \\/ a)",
            "((c -> a) -> b) -> ((a -> b) -> c) -> c",
        ];
        let mut warm = Prover::new();
        for s in cases {
            warm.valid(&p(s)).unwrap();
        }
        for s in cases {
            let mut cold = Prover::with_capacity(0);
            assert_eq!(warm.valid(&p(s)).unwrap(), cold.valid(&p(s)).unwrap(), "{s}");
        }
    }

    #[test]
    fn stats_are_recorded() {
        let out = prove(&Sequent::new(vec![], p("((a -> b) -> c) -> (b -> c)"))).unwrap();
        assert!(out.derivable);
        assert!(out.stats.nodes >= 1);
    }
}
