//! Supports, word formulas, branches and the Adam/Eve game that bounds
//! Ruitenburg numbers of conjunctions of star formulas.
//!
//! Fragment formulas are built from `x`, `[A]φ = ⋀A → φ`, `⋁B ∨ φ` and
//! `φ ∨ φ`. The head atoms (those in some `A`) and the side atoms (those in
//! some `B`) are inferred from the formula and must be disjoint.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{Formula, Kind, Sym};
use crate::prover::with_prover;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SuppPair {
    pub a: BTreeSet<Sym>,
    pub b: BTreeSet<Sym>,
}

impl SuppPair {
    pub fn new<I: IntoIterator<Item = Sym>, J: IntoIterator<Item = Sym>>(a: I, b: J) -> SuppPair {
        SuppPair {
            a: a.into_iter().collect(),
            b: b.into_iter().collect(),
        }
    }

    pub fn union(&self, other: &SuppPair) -> SuppPair {
        SuppPair {
            a: self.a.union(&other.a).copied().collect(),
            b: self.b.union(&other.b).copied().collect(),
        }
    }

    /// `φ_(A,B) = [⋀A](⋁B ∨ x)`.
    pub fn formula(&self, x: Sym) -> Formula {
        Word(vec![self.clone()]).formula(x)
    }
}

impl fmt::Display for SuppPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |s: &BTreeSet<Sym>| s.iter().map(|v| v.name()).collect::<Vec<_>>().join(",");
        write!(f, "({};{})", join(&self.a), join(&self.b))
    }
}

/// A word over `P(𝒜) × P(ℬ)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<SuppPair>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word(self.0.iter().chain(&other.0).cloned().collect())
    }

    /// Union of the letters.
    pub fn supp(&self) -> SuppPair {
        self.0.iter().fold(SuppPair::default(), |acc, l| acc.union(l))
    }

    /// `φ_ε = x`, `φ_{(A,B)w} = φ_(A,B) ∘ φ_w`.
    pub fn formula(&self, x: Sym) -> Formula {
        self.0.iter().rev().fold(Formula::sym(x), |inner, l| {
            let body = Formula::or(l.b.iter().map(|b| Formula::sym(*b)).chain([inner]));
            Formula::imp(Formula::and(l.a.iter().map(|a| Formula::sym(*a))), body)
        })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Parse tree of a fragment formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Frag {
    X,
    Box(BTreeSet<Sym>, Box<Frag>),
    Side(BTreeSet<Sym>, Box<Frag>),
    Or(Vec<Frag>),
}

fn outside(f: &Formula, why: &str) -> Error {
    Error::OutsideFragment(format!("{f}: {why}"))
}

impl Frag {
    pub fn parse(f: &Formula, x: Sym) -> Result<Frag> {
        let frag = Frag::parse_rec(f, x)?;
        let (heads, sides) = frag.atoms();
        if let Some(v) = heads.intersection(&sides).next() {
            return Err(outside(f, &format!("{v} is used both as a head and as a side atom")));
        }
        Ok(frag)
    }

    fn parse_rec(f: &Formula, x: Sym) -> Result<Frag> {
        match f.kind() {
            Kind::Var(v) if *v == x => Ok(Frag::X),
            Kind::Imp(a, body) => {
                let atoms: Vec<Formula> = match a.kind() {
                    Kind::And(cs) => cs.to_vec(),
                    _ => vec![a.clone()],
                };
                let mut set = BTreeSet::new();
                for atom in atoms {
                    match atom.as_var() {
                        Some(v) if v != x => {
                            set.insert(v);
                        }
                        _ => return Err(outside(f, "antecedent is not a conjunction of atoms")),
                    }
                }
                Ok(Frag::Box(set, Box::new(Frag::parse_rec(body, x)?)))
            }
            Kind::Or(cs) => {
                let mut side = BTreeSet::new();
                let mut rest = Vec::new();
                for c in cs.iter() {
                    if c.has_free(x) {
                        rest.push(Frag::parse_rec(c, x)?);
                    } else {
                        match c.as_var() {
                            Some(v) => {
                                side.insert(v);
                            }
                            None => return Err(outside(f, "side disjunct is not an atom")),
                        }
                    }
                }
                let inner = match rest.len() {
                    0 => return Err(outside(f, "x does not occur")),
                    1 => rest.pop().unwrap(),
                    _ => Frag::Or(rest),
                };
                if side.is_empty() {
                    Ok(inner)
                } else {
                    Ok(Frag::Side(side, Box::new(inner)))
                }
            }
            _ => Err(outside(f, "not generated by the fragment grammar")),
        }
    }

    /// Head atoms and side atoms.
    pub fn atoms(&self) -> (BTreeSet<Sym>, BTreeSet<Sym>) {
        let s = self.supp();
        (s.a, s.b)
    }

    pub fn supp(&self) -> SuppPair {
        match self {
            Frag::X => SuppPair::default(),
            Frag::Box(a, f) => {
                let mut s = f.supp();
                s.a.extend(a.iter().copied());
                s
            }
            Frag::Side(b, f) => {
                let mut s = f.supp();
                s.b.extend(b.iter().copied());
                s
            }
            Frag::Or(fs) => fs.iter().fold(SuppPair::default(), |acc, f| acc.union(&f.supp())),
        }
    }

    pub fn branches(&self) -> BTreeSet<Word> {
        let prefix = |letter: SuppPair, rest: &Frag| {
            rest.branches()
                .into_iter()
                .map(|w| Word(vec![letter.clone()]).concat(&w))
                .collect()
        };
        match self {
            Frag::X => [Word::empty()].into_iter().collect(),
            Frag::Box(a, f) => prefix(SuppPair::new(a.iter().copied(), []), f),
            Frag::Side(b, f) => prefix(SuppPair::new([], b.iter().copied()), f),
            Frag::Or(fs) => fs.iter().flat_map(|f| f.branches()).collect(),
        }
    }
}

/// `Supp(f)` for a fragment formula.
pub fn supp(f: &Formula, x: Sym) -> Result<SuppPair> {
    Ok(Frag::parse(f, x)?.supp())
}

pub fn word_formula(w: &Word, x: Sym) -> Formula {
    w.formula(x)
}

pub fn branches(f: &Formula, x: Sym) -> Result<BTreeSet<Word>> {
    Ok(Frag::parse(f, x)?.branches())
}

/// `br(f) = ⋁ { φ_w | w ∈ Branches(f) }`.
pub fn br(f: &Formula, x: Sym) -> Result<Formula> {
    Ok(Formula::or(branches(f, x)?.iter().map(|w| w.formula(x))))
}

/// Whether `br(f) = f` syntactically.
pub fn is_star(f: &Formula, x: Sym) -> Result<bool> {
    Ok(br(f, x)? == *f)
}

/// `(A, B) ◁ w`: some split point `l ∈ 0..=k` has `A` inside the heads of
/// the first `l` letters and `B` inside the sides of letters `l..=k`
/// (letters numbered from 1; empty unions are empty).
pub fn triangle_less(p: &SuppPair, w: &Word) -> bool {
    let k = w.len();
    (0..=k).any(|l| {
        let heads: BTreeSet<Sym> = w.0[..l].iter().flat_map(|s| s.a.iter().copied()).collect();
        let from = l.max(1) - 1;
        let sides: BTreeSet<Sym> = w.0[from..].iter().flat_map(|s| s.b.iter().copied()).collect();
        p.a.is_subset(&heads) && p.b.is_subset(&sides)
    })
}

/// `⋀ᵢ φ_Supp(fᵢ)`.
pub fn closed_form(fs: &[Formula], x: Sym) -> Result<Formula> {
    let parts = fs
        .iter()
        .map(|f| Ok(supp(f, x)?.formula(x)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Formula::and(parts))
}

/// A conjunction `⋀ᵢ ⋁ⱼ φ_{w_ij}` of star formulas, given by its words.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarConjunction {
    pub var: Sym,
    pub conjuncts: Vec<Vec<Word>>,
}

impl StarConjunction {
    /// Reads each formula through its branches, so non-star fragment
    /// formulas are replaced by `br(fᵢ)`.
    pub fn from_formulas(fs: &[Formula], x: Sym) -> Result<StarConjunction> {
        let conjuncts = fs
            .iter()
            .map(|f| Ok(branches(f, x)?.into_iter().collect()))
            .collect::<Result<Vec<_>>>()?;
        let all = StarConjunction { var: x, conjuncts };
        let (heads, sides) = all.alphabet();
        if let Some(v) = heads.intersection(&sides).next() {
            return Err(Error::OutsideFragment(format!(
                "{v} is used both as a head and as a side atom"
            )));
        }
        Ok(all)
    }

    pub fn alphabet(&self) -> (BTreeSet<Sym>, BTreeSet<Sym>) {
        let s = self
            .conjuncts
            .iter()
            .flatten()
            .fold(SuppPair::default(), |acc, w| acc.union(&w.supp()));
        (s.a, s.b)
    }

    /// `(N, M)`: number of head atoms and of side atoms.
    pub fn dims(&self) -> (usize, usize) {
        let (a, b) = self.alphabet();
        (a.len(), b.len())
    }

    pub fn conjunct_formula(&self, i: usize) -> Formula {
        Formula::or(self.conjuncts[i].iter().map(|w| w.formula(self.var)))
    }

    pub fn formula(&self) -> Formula {
        Formula::and((0..self.conjuncts.len()).map(|i| self.conjunct_formula(i)))
    }

    pub fn supports(&self) -> Vec<SuppPair> {
        self.conjuncts
            .iter()
            .map(|ws| ws.iter().fold(SuppPair::default(), |acc, w| acc.union(&w.supp())))
            .collect()
    }

    pub fn closed_form(&self) -> Formula {
        Formula::and(self.supports().iter().map(|s| s.formula(self.var)))
    }

    /// Pads every conjunct with `ε` up to the widest one.
    pub fn padded(&self) -> StarConjunction {
        let width = self.conjuncts.iter().map(Vec::len).max().unwrap_or(0);
        let conjuncts = self
            .conjuncts
            .iter()
            .map(|ws| {
                let mut ws = ws.clone();
                ws.resize(width, Word::empty());
                ws
            })
            .collect();
        StarConjunction {
            var: self.var,
            conjuncts,
        }
    }
}

/// The family where Adam beats Eve's memory strategy in few rounds:
/// conjuncts `⋁_{β ∈ B} φ_({α_k},{β})` for every `k ∈ 1..=n` and every
/// `B ⊆ {β₁..βₙ}` of size `k`.
pub fn adversarial_family(n: usize) -> Result<StarConjunction> {
    if n == 0 || n > 10 {
        return Err(Error::InvalidArgument(format!("n = {n} is out of range 1..=10")));
    }
    let alpha = |k: usize| Sym::new(&format!("al{k}"));
    let beta = |k: usize| Sym::new(&format!("be{k}"));
    let mut conjuncts = Vec::new();
    for k in 1..=n {
        for mask in 0u32..1 << n {
            if mask.count_ones() as usize != k {
                continue;
            }
            let words = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| Word(vec![SuppPair::new([alpha(k)], [beta(i + 1)])]))
                .collect();
            conjuncts.push(words);
        }
    }
    Ok(StarConjunction {
        var: Sym::new("x"),
        conjuncts,
    })
}

/// Result of running Eve's memory strategy against every Adam.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub rounds: usize,
    pub eve_wins_all: bool,
    /// A full play `(i₁,j₁)…(i_K,j_K)` that Eve loses.
    pub losing_play: Option<Vec<(usize, usize)>>,
    pub positions: u64,
}

/// Default bound on the number of visited positions.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

#[derive(Clone, Copy)]
struct Letter {
    a: u64,
    b: u64,
}

struct Arena {
    words: Vec<Vec<Vec<Letter>>>,
    word_supp: Vec<Vec<Letter>>,
    targets: Vec<Letter>,
    rounds: usize,
    budget: u64,
    visited: AtomicU64,
}

fn masks(star: &StarConjunction) -> Result<Arena> {
    let (heads, sides) = star.alphabet();
    if heads.len() > 64 || sides.len() > 64 {
        return Err(Error::InvalidArgument("more than 64 atoms of one kind".into()));
    }
    let heads: Vec<Sym> = heads.into_iter().collect();
    let sides: Vec<Sym> = sides.into_iter().collect();
    let bits = |set: &BTreeSet<Sym>, universe: &[Sym]| {
        set.iter()
            .map(|s| 1u64 << universe.binary_search(s).expect("alphabet member"))
            .fold(0, |m, b| m | b)
    };
    let letter = |p: &SuppPair| Letter {
        a: bits(&p.a, &heads),
        b: bits(&p.b, &sides),
    };
    let padded = star.padded();
    let words: Vec<Vec<Vec<Letter>>> = padded
        .conjuncts
        .iter()
        .map(|ws| ws.iter().map(|w| w.0.iter().map(letter).collect()).collect())
        .collect();
    let word_supp = padded
        .conjuncts
        .iter()
        .map(|ws| ws.iter().map(|w| letter(&w.supp())).collect())
        .collect();
    let targets = star.supports().iter().map(letter).collect();
    Ok(Arena {
        words,
        word_supp,
        targets,
        rounds: 0,
        budget: 0,
        visited: AtomicU64::new(0),
    })
}

fn less(p: Letter, w: &[Letter]) -> bool {
    let k = w.len();
    let mut suffix = vec![0u64; k + 1];
    for l in (0..k).rev() {
        suffix[l] = suffix[l + 1] | w[l].b;
    }
    let mut heads = 0u64;
    for l in 0..=k {
        if l > 0 {
            heads |= w[l - 1].a;
        }
        let sides = suffix[l.max(1) - 1];
        if p.a & !heads == 0 && p.b & !sides == 0 {
            return true;
        }
    }
    false
}

impl Arena {
    fn eve_wins(&self, w: &[Letter]) -> bool {
        self.targets.iter().any(|t| less(*t, w))
    }

    // Eve first tries to grow the head part of the history's support, then
    // the side part of her memory, and otherwise plays the first move.
    fn eve_move(&self, i: usize, mem: Letter) -> (usize, Letter) {
        let supps = &self.word_supp[i];
        if let Some(j) = supps.iter().position(|s| s.a & !mem.a != 0) {
            return (
                j,
                Letter {
                    a: mem.a | supps[j].a,
                    b: 0,
                },
            );
        }
        if let Some(j) = supps.iter().position(|s| s.b & !mem.b != 0) {
            return (
                j,
                Letter {
                    a: mem.a,
                    b: mem.b | supps[j].b,
                },
            );
        }
        (0, mem)
    }

    /// Returns a losing continuation of `history`, if Adam has one.
    fn explore(
        &self,
        history: &mut Vec<(usize, usize)>,
        w: &mut Vec<Letter>,
        mem: Letter,
    ) -> Result<Option<Vec<(usize, usize)>>> {
        if self.visited.fetch_add(1, Ordering::Relaxed) >= self.budget {
            return Err(Error::BudgetExceeded);
        }
        // Winning is preserved by extending the history.
        if self.eve_wins(w) {
            return Ok(None);
        }
        if history.len() == self.rounds {
            return Ok(Some(history.clone()));
        }
        for i in 0..self.words.len() {
            if let Some(lost) = self.step(history, w, mem, i)? {
                return Ok(Some(lost));
            }
        }
        Ok(None)
    }

    fn step(
        &self,
        history: &mut Vec<(usize, usize)>,
        w: &mut Vec<Letter>,
        mem: Letter,
        i: usize,
    ) -> Result<Option<Vec<(usize, usize)>>> {
        let (j, mem2) = self.eve_move(i, mem);
        let added = &self.words[i][j];
        history.push((i, j));
        w.extend_from_slice(added);
        let out = self.explore(history, w, mem2);
        w.truncate(w.len() - added.len());
        history.pop();
        out
    }
}

/// Plays Eve's memory strategy for `rounds` rounds against every sequence
/// of Adam moves. Adam's first moves are explored in parallel.
pub fn play_game(star: &StarConjunction, rounds: usize, budget: u64) -> Result<GameOutcome> {
    if star.conjuncts.is_empty() || star.conjuncts.iter().any(Vec::is_empty) {
        return Err(Error::InvalidArgument("every conjunct needs at least one word".into()));
    }
    let mut arena = masks(star)?;
    arena.rounds = rounds;
    arena.budget = budget;
    let empty = Letter { a: 0, b: 0 };
    let losing = if rounds == 0 || arena.eve_wins(&[]) {
        if arena.eve_wins(&[]) {
            None
        } else {
            Some(Vec::new())
        }
    } else {
        let results: Vec<Result<Option<Vec<(usize, usize)>>>> = (0..arena.words.len())
            .into_par_iter()
            .map(|i| arena.step(&mut Vec::new(), &mut Vec::new(), empty, i))
            .collect();
        let mut first = None;
        for r in results {
            if let Some(lost) = r? {
                first.get_or_insert(lost);
            }
        }
        first
    };
    Ok(GameOutcome {
        rounds,
        eve_wins_all: losing.is_none(),
        losing_play: losing,
        positions: arena.visited.load(Ordering::Relaxed),
    })
}

/// Asks the prover whether `⋀ᵢ φ_Supp(φᵢ) ⊢ φ^K`.
pub fn closed_form_below_iterate(star: &StarConjunction, rounds: usize) -> Result<bool> {
    let phi = star.formula();
    let iterate = phi.iterate(star.var, rounds, &Formula::sym(star.var));
    let closed = star.closed_form();
    with_prover(|p| p.entails(&[closed], &iterate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prover::{entails, equiv};
    use crate::syntax::parse;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn x() -> Sym {
        Sym::new("x")
    }

    fn s(n: &str) -> Sym {
        Sym::new(n)
    }

    #[test]
    fn supports() {
        assert_eq!(supp(&p("x"), x()).unwrap(), SuppPair::default());
        assert_eq!(
            supp(&p("al -> be \\/ x"), x()).unwrap(),
            SuppPair::new([s("al")], [s("be")])
        );
        let f = p("(a1 -> x) \\/ (b1 \\/ (a2 -> x))");
        assert_eq!(
            supp(&f, x()).unwrap(),
            SuppPair::new([s("a1"), s("a2")], [s("b1")])
        );
        assert!(supp(&p("(a -> x) \\/ (b -> a \\/ x)"), x()).is_err());
        assert!(supp(&p("(x -> a) -> x"), x()).is_err());
    }

    #[test]
    fn word_formulas() {
        assert_eq!(Word::empty().formula(x()), p("x"));
        let l = SuppPair::new([s("a1"), s("a2")], [s("b1")]);
        assert_eq!(l.formula(x()), p("a1 /\\ a2 -> b1 \\/ x"));
        let w = Word(vec![
            SuppPair::new([s("a1")], []),
            SuppPair::new([], [s("b1")]),
        ]);
        assert_eq!(w.formula(x()), p("a1 -> b1 \\/ x"));
    }

    #[test]
    fn branch_examples() {
        assert_eq!(
            branches(&p("x"), x()).unwrap(),
            [Word::empty()].into_iter().collect()
        );
        let w = branches(&p("al -> be \\/ x"), x()).unwrap();
        let expected = Word(vec![
            SuppPair::new([s("al")], []),
            SuppPair::new([], [s("be")]),
        ]);
        assert_eq!(w, [expected].into_iter().collect());
        assert_eq!(br(&p("be \\/ x"), x()).unwrap(), p("be \\/ x"));
        let f = p("(a1 -> x) \\/ (a2 -> b1 \\/ x)");
        assert_eq!(branches(&f, x()).unwrap().len(), 2);
        assert!(is_star(&f, x()).unwrap());
    }

    #[test]
    fn br_is_below() {
        let f = p("a1 -> (a2 -> x) \\/ (b1 \\/ x)");
        let b = br(&f, x()).unwrap();
        assert!(entails(&[b.clone()], &f).unwrap());
        assert_eq!(supp(&b, x()).unwrap(), supp(&f, x()).unwrap());
    }

    #[test]
    fn triangle() {
        let ab = SuppPair::new([s("al")], [s("be")]);
        let good = Word(vec![
            SuppPair::new([s("al")], []),
            SuppPair::new([], [s("be")]),
        ]);
        let bad = Word(vec![
            SuppPair::new([], [s("be")]),
            SuppPair::new([s("al")], []),
        ]);
        assert!(triangle_less(&ab, &good));
        assert!(!triangle_less(&ab, &bad));
        assert!(triangle_less(&SuppPair::default(), &Word::empty()));
        // The prover agrees on both instances.
        assert!(entails(&[ab.formula(x())], &good.formula(x())).unwrap());
        assert!(!entails(&[ab.formula(x())], &bad.formula(x())).unwrap());
    }

    #[test]
    fn closed_forms() {
        let f = p("al -> be \\/ x");
        assert_eq!(closed_form(&[f.clone()], x()).unwrap(), f);
        assert_eq!(closed_form(&[p("x")], x()).unwrap(), p("x"));
        let fs = [p("(a1 -> x) \\/ (b1 \\/ x)"), p("a1 -> b1 \\/ x")];
        let cf = closed_form(&fs, x()).unwrap();
        let phi = Formula::and(fs.iter().cloned());
        let rho = crate::ordinal::ruitenburg_number(&phi, x(), None).unwrap();
        assert!(equiv(&cf, &phi.iterate(x(), rho.value, &p("x"))).unwrap());
    }

    #[test]
    fn single_conjunct_one_round() {
        let star = StarConjunction::from_formulas(&[p("al -> be \\/ x")], x()).unwrap();
        let out = play_game(&star, 1, DEFAULT_BUDGET).unwrap();
        assert!(out.eve_wins_all);
    }

    #[test]
    fn adversarial_family_beats_eve() {
        let star = adversarial_family(3).unwrap();
        assert_eq!(star.conjuncts.len(), 7);
        for k in 1..3 {
            let out = play_game(&star, k, DEFAULT_BUDGET).unwrap();
            assert!(!out.eve_wins_all, "K = {k}");
            assert_eq!(out.losing_play.unwrap().len(), k);
        }
        let (n, m) = star.dims();
        let out = play_game(&star, (n + 1) * (m + 1), DEFAULT_BUDGET).unwrap();
        assert!(out.eve_wins_all);
    }

    #[test]
    fn budget_is_enforced() {
        let star = adversarial_family(3).unwrap();
        assert_eq!(play_game(&star, 10, 5), Err(Error::BudgetExceeded));
    }

    #[test]
    fn winning_game_orders_closed_form() {
        let fs = [p("(a1 -> x) \\/ (b1 \\/ x)"), p("a2 -> b1 \\/ x")];
        let star = StarConjunction::from_formulas(&fs, x()).unwrap();
        let (n, m) = star.dims();
        let k = (n + 1) * (m + 1);
        assert!(play_game(&star, k, DEFAULT_BUDGET).unwrap().eve_wins_all);
        assert!(closed_form_below_iterate(&star, k).unwrap());
    }
}
