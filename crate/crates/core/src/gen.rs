//! Seeded random generators for test corpora and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::{Formula, Sym};
use crate::game::{StarConjunction, SuppPair, Word};

/// Shape limits for random formulas.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub max_size: usize,
    pub atoms: usize,
    pub max_depth: usize,
}

impl Default for Shape {
    fn default() -> Shape {
        Shape {
            max_size: 12,
            atoms: 3,
            max_depth: 2,
        }
    }
}

pub struct Gen {
    rng: ChaCha8Rng,
}

#[derive(Clone, Copy)]
struct Bound {
    var: Sym,
    positive: bool,
}

const BINDERS: [&str; 3] = ["x", "y", "z"];

pub fn atoms(n: usize) -> Vec<Sym> {
    ["a", "b", "c", "d", "e"][..n.min(5)].iter().map(|s| Sym::new(s)).collect()
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn leaf(&mut self, atoms: &[Sym], env: &[Bound]) -> Formula {
        let bound: Vec<Sym> = env.iter().filter(|b| b.positive).map(|b| b.var).collect();
        let roll = self.rng.gen_range(0..20);
        if roll == 0 {
            return Formula::top();
        }
        if roll == 1 {
            return Formula::bot();
        }
        if !bound.is_empty() && (atoms.is_empty() || self.rng.gen_bool(0.5)) {
            return Formula::sym(*bound.choose(&mut self.rng).unwrap());
        }
        match atoms.choose(&mut self.rng) {
            Some(a) => Formula::sym(*a),
            None => Formula::bot(),
        }
    }

    fn build(&mut self, budget: usize, atoms: &[Sym], env: &mut Vec<Bound>, depth: usize, strong: bool) -> Formula {
        if budget <= 1 {
            return self.leaf(atoms, env);
        }
        let binder_ok = depth > 0 && budget >= 3 && env.len() < BINDERS.len();
        let choice = self.rng.gen_range(0..if binder_ok { 5 } else { 3 });
        let rest = budget - 1;
        match choice {
            0 | 1 => {
                let l = self.rng.gen_range(1..rest.max(2));
                let a = self.build(l, atoms, env, depth, strong);
                let b = self.build(rest.saturating_sub(l).max(1), atoms, env, depth, strong);
                if choice == 0 {
                    Formula::and2(a, b)
                } else {
                    Formula::or2(a, b)
                }
            }
            2 => {
                let l = self.rng.gen_range(1..rest.max(2));
                // Crossing an antecedent flips every polarity; in strong mode
                // bound variables are hidden there altogether.
                let mut flipped: Vec<Bound> = if strong {
                    Vec::new()
                } else {
                    env.iter()
                        .map(|b| Bound {
                            var: b.var,
                            positive: !b.positive,
                        })
                        .collect()
                };
                let a = self.build(l, atoms, &mut flipped, depth, strong);
                let b = self.build(rest.saturating_sub(l).max(1), atoms, env, depth, strong);
                Formula::imp(a, b)
            }
            _ => {
                let var = Sym::new(BINDERS[env.len()]);
                env.push(Bound { var, positive: true });
                let body = self.build(rest - 1, atoms, env, depth - 1, strong);
                env.pop();
                let f = if choice == 3 {
                    Formula::mu(var, body)
                } else {
                    Formula::nu(var, body)
                };
                f.expect("generated bodies are positive")
            }
        }
    }

    /// A μ-IPC formula over the first `shape.atoms` atoms; every bound
    /// variable occurs positively.
    pub fn mu_formula(&mut self, shape: Shape) -> Formula {
        let atoms = atoms(shape.atoms);
        loop {
            let budget = self.rng.gen_range(3..=shape.max_size.max(3));
            let f = self.build(budget, &atoms, &mut Vec::new(), shape.max_depth, false);
            if f.size() <= shape.max_size as u64 {
                return f;
            }
        }
    }

    /// A μ-IPC formula that contains at least one binder.
    pub fn mu_formula_with_binder(&mut self, shape: Shape) -> Formula {
        loop {
            let f = self.mu_formula(shape);
            if !f.is_fixpoint_free() {
                return f;
            }
        }
    }

    pub fn fixpoint_free(&mut self, atoms: &[Sym], max_size: usize) -> Formula {
        loop {
            let budget = self.rng.gen_range(1..=max_size.max(1));
            let f = self.build(budget, atoms, &mut Vec::new(), 0, false);
            if f.size() <= max_size as u64 {
                return f;
            }
        }
    }

    /// A fixpoint-free formula in which `x` is positive and occurs.
    pub fn positive_body(&mut self, x: Sym, atoms: &[Sym], max_size: usize) -> Formula {
        self.body(x, atoms, max_size, false)
    }

    /// A fixpoint-free formula in which `x` occurs, never in an antecedent.
    pub fn strongly_positive_body(&mut self, x: Sym, atoms: &[Sym], max_size: usize) -> Formula {
        self.body(x, atoms, max_size, true)
    }

    fn body(&mut self, x: Sym, atoms: &[Sym], max_size: usize, strong: bool) -> Formula {
        loop {
            let budget = self.rng.gen_range(1..=max_size.max(1));
            let mut env = vec![Bound { var: x, positive: true }];
            let f = self.build(budget, atoms, &mut env, 0, strong);
            if f.has_free(x) && f.size() <= max_size as u64 {
                return f;
            }
        }
    }

    /// A formula of the grammar `x | α → φ | β ∨ φ | φ ∨ φ` with x-free
    /// `α`, `β` of size at most `side_size`. Samples whose canonical form
    /// loses `x` (say `⊤ ∨ x`) are redrawn.
    pub fn disjunctive(&mut self, x: Sym, atoms: &[Sym], depth: usize, side_size: usize) -> Formula {
        loop {
            let f = self.disjunctive_rec(x, atoms, depth, side_size);
            if f.has_free(x) && crate::normal::is_disjunctive(&f, x) {
                return f;
            }
        }
    }

    fn disjunctive_rec(&mut self, x: Sym, atoms: &[Sym], depth: usize, side_size: usize) -> Formula {
        if depth == 0 {
            return Formula::sym(x);
        }
        match self.rng.gen_range(0..8) {
            0 => Formula::sym(x),
            1..=3 => {
                let a = self.fixpoint_free(atoms, side_size);
                Formula::imp(a, self.disjunctive_rec(x, atoms, depth - 1, side_size))
            }
            4 | 5 => {
                let b = self.fixpoint_free(atoms, side_size);
                Formula::or2(b, self.disjunctive_rec(x, atoms, depth - 1, side_size))
            }
            _ => {
                let l = self.disjunctive_rec(x, atoms, depth - 1, side_size);
                let r = self.disjunctive_rec(x, atoms, depth - 1, side_size);
                Formula::or2(l, r)
            }
        }
    }

    fn nonempty_subset(&mut self, from: &[Sym]) -> Vec<Sym> {
        loop {
            let s: Vec<Sym> = from.iter().copied().filter(|_| self.rng.gen_bool(0.5)).collect();
            if !s.is_empty() || from.is_empty() {
                return s;
            }
        }
    }

    fn subset(&mut self, from: &[Sym]) -> Vec<Sym> {
        from.iter().copied().filter(|_| self.rng.gen_bool(0.5)).collect()
    }

    /// A formula of the word-game fragment over the given head and side atoms.
    pub fn fragment(&mut self, x: Sym, heads: &[Sym], sides: &[Sym], depth: usize) -> Formula {
        if depth == 0 {
            return Formula::sym(x);
        }
        let choice = self.rng.gen_range(0..4);
        match choice {
            1 if !heads.is_empty() => {
                let a = self.nonempty_subset(heads);
                let body = self.fragment(x, heads, sides, depth - 1);
                Formula::imp(Formula::and(a.into_iter().map(Formula::sym)), body)
            }
            2 if !sides.is_empty() => {
                let b = self.nonempty_subset(sides);
                let body = self.fragment(x, heads, sides, depth - 1);
                Formula::or(b.into_iter().map(Formula::sym).chain([body]))
            }
            3 => {
                let l = self.fragment(x, heads, sides, depth - 1);
                let r = self.fragment(x, heads, sides, depth - 1);
                Formula::or2(l, r)
            }
            _ => Formula::sym(x),
        }
    }

    pub fn word(&mut self, heads: &[Sym], sides: &[Sym], max_len: usize) -> Word {
        let len = self.rng.gen_range(0..=max_len);
        Word(
            (0..len)
                .map(|_| {
                    let a = self.subset(heads);
                    let b = self.subset(sides);
                    SuppPair::new(a, b)
                })
                .collect(),
        )
    }

    /// `⋀ᵢ ⋁ⱼ φ_{w_ij}` with up to `n` head atoms, `m` side atoms,
    /// `conjuncts` conjuncts of up to `width` words of length up to `word_len`.
    pub fn star_conjunction(
        &mut self,
        n: usize,
        m: usize,
        conjuncts: usize,
        width: usize,
        word_len: usize,
    ) -> StarConjunction {
        let heads: Vec<Sym> = (1..=n).map(|i| Sym::new(&format!("al{i}"))).collect();
        let sides: Vec<Sym> = (1..=m).map(|i| Sym::new(&format!("be{i}"))).collect();
        let count = self.rng.gen_range(1..=conjuncts.max(1));
        let conjuncts = (0..count)
            .map(|_| {
                let w = self.rng.gen_range(1..=width.max(1));
                let mut ws: Vec<Word> = (0..w).map(|_| self.word(&heads, &sides, word_len)).collect();
                ws.sort();
                ws.dedup();
                ws
            })
            .collect();
        StarConjunction {
            var: Sym::new("x"),
            conjuncts,
        }
    }

    /// A sequent with up to two fixpoint-free hypotheses.
    pub fn sequent(&mut self, atoms: &[Sym], max_size: usize) -> (Vec<Formula>, Formula) {
        let n = self.rng.gen_range(0..=2);
        let ctx = (0..n).map(|_| self.fixpoint_free(atoms, max_size)).collect();
        let goal = self.fixpoint_free(atoms, max_size);
        (ctx, goal)
    }

    /// Pairs `(aᵢ, bᵢ)` of x-free formulas for an atop disjunction.
    pub fn atop_pairs(&mut self, atoms: &[Sym], count: usize, max_size: usize) -> Vec<(Formula, Formula)> {
        (0..count)
            .map(|_| (self.fixpoint_free(atoms, max_size), self.fixpoint_free(atoms, max_size)))
            .collect()
    }
}
