//! Finite Heyting algebras and brute-force evaluation.
//!
//! Algebras are stored as full operation tables. Fixed points are always
//! computed by Knaster–Tarski iteration, never by elimination, so this
//! module can serve as an independent semantic oracle.

use std::collections::BTreeMap;
use std::fmt;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::formula::{classify, Formula, Kind, Sym, VarClass};

/// An element of a finite algebra, as an index into its carrier.
pub type Elem = usize;

/// Assignment of algebra elements to variables.
pub type Valuation = BTreeMap<Sym, Elem>;

/// Largest supported carrier.
pub const MAX_ELEMS: usize = 256;

// ---------------------------------------------------------------------------
// Posets
// ---------------------------------------------------------------------------

/// A finite partial order on `0..n`, with `n <= 64`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FinitePoset {
    n: usize,
    /// `up[i]` has bit `j` set iff `i <= j`.
    up: Vec<u64>,
}

impl FinitePoset {
    /// Validates `leq` as a partial order.
    pub fn from_relation(n: usize, leq: impl Fn(usize, usize) -> bool) -> Result<FinitePoset> {
        if n > 64 {
            return Err(Error::InvalidPoset(format!("{n} elements exceed 64")));
        }
        let mut up = vec![0u64; n];
        for (i, row) in up.iter_mut().enumerate() {
            for j in 0..n {
                if leq(i, j) {
                    *row |= 1 << j;
                }
            }
        }
        let p = FinitePoset { n, up };
        p.validate()?;
        Ok(p)
    }

    /// Reflexive-transitive closure of the strict pairs `i < j`.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<FinitePoset> {
        if n > 64 {
            return Err(Error::InvalidPoset(format!("{n} elements exceed 64")));
        }
        let mut up: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
        for &(i, j) in pairs {
            if i >= n || j >= n {
                return Err(Error::InvalidPoset(format!("pair {i}<{j} out of range")));
            }
            up[i] |= 1 << j;
        }
        // Warshall closure.
        for k in 0..n {
            for i in 0..n {
                if up[i] >> k & 1 == 1 {
                    up[i] |= up[k];
                }
            }
        }
        let p = FinitePoset { n, up };
        p.validate()?;
        Ok(p)
    }

    pub fn antichain(n: usize) -> FinitePoset {
        FinitePoset::from_pairs(n, &[]).expect("antichain")
    }

    /// `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> FinitePoset {
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        FinitePoset::from_pairs(n, &pairs).expect("chain")
    }

    /// Subsets of `{1..n}` (element `s` is the bitmask) with `s <= t` iff
    /// `t ⊆ s`.
    pub fn subsets_reversed(n: usize) -> FinitePoset {
        FinitePoset::from_relation(1 << n, |s, t| t & !s == 0).expect("subset order")
    }

    fn validate(&self) -> Result<()> {
        for i in 0..self.n {
            if self.up[i] >> i & 1 == 0 {
                return Err(Error::InvalidPoset(format!("not reflexive at {i}")));
            }
            for j in 0..self.n {
                if i != j && self.leq(i, j) && self.leq(j, i) {
                    return Err(Error::InvalidPoset(format!("{i} and {j} form a cycle")));
                }
                if self.leq(i, j) && self.up[j] & !self.up[i] != 0 {
                    return Err(Error::InvalidPoset(format!("not transitive through {j}")));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.up[i] >> j & 1 == 1
    }

    pub fn up_set(&self, i: usize) -> u64 {
        self.up[i]
    }

    /// Strict covering-or-not pairs `i < j`.
    pub fn strict_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j && self.leq(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Every upward-closed subset, as bitmasks in increasing numeric order.
    pub fn upsets(&self) -> Result<Vec<u64>> {
        if self.n > 24 {
            return Err(Error::InvalidPoset(format!(
                "{} elements too many to enumerate upsets",
                self.n
            )));
        }
        Ok((0u64..1 << self.n).filter(|&m| self.is_upset(m)).collect())
    }

    pub fn is_upset(&self, mask: u64) -> bool {
        (0..self.n).all(|i| mask >> i & 1 == 0 || self.up[i] & !mask == 0)
    }

    /// Parses `n` followed by lines `i<j`.
    pub fn parse(text: &str) -> Result<FinitePoset> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::InvalidPoset("missing element count".into()))?
            .parse()
            .map_err(|_| Error::InvalidPoset("element count is not a number".into()))?;
        let mut pairs = Vec::new();
        for line in lines {
            let (a, b) = line
                .split_once('<')
                .ok_or_else(|| Error::InvalidPoset(format!("expected i<j, got '{line}'")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidPoset(format!("bad index in '{line}'")))
            };
            pairs.push((parse(a)?, parse(b)?));
        }
        FinitePoset::from_pairs(n, &pairs)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (i, j) in self.strict_pairs() {
            out.push_str(&format!("{i}<{j}\n"));
        }
        out
    }
}

impl fmt::Debug for FinitePoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FinitePoset({}, {:?})", self.n, self.strict_pairs())
    }
}

/// All posets on `n` elements up to isomorphism. Supports `n <= 5`.
pub fn enumerate_posets(n: usize) -> Vec<FinitePoset> {
    assert!(n <= 5, "poset enumeration supports at most 5 elements");
    let slots: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let perms = permutations(n);
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    // Every poset has a linear extension, so restricting to i < j as
    // numbers loses nothing.
    for bits in 0u32..1 << slots.len() {
        let pairs: Vec<_> = slots
            .iter()
            .enumerate()
            .filter(|(k, _)| bits >> k & 1 == 1)
            .map(|(_, p)| *p)
            .collect();
        let rel = |i: usize, j: usize| {
            i == j
                || slots
                    .iter()
                    .position(|&p| p == (i, j))
                    .is_some_and(|k| bits >> k & 1 == 1)
        };
        let transitive = (0..n).all(|i| {
            (0..n).all(|j| (0..n).all(|k| !(rel(i, j) && rel(j, k)) || rel(i, k)))
        });
        if !transitive {
            continue;
        }
        let canon = perms
            .iter()
            .map(|perm| {
                let mut code = 0u64;
                for &(i, j) in &pairs {
                    code |= 1 << (perm[i] * n + perm[j]);
                }
                code
            })
            .min()
            .unwrap_or(0);
        if seen.insert(canon) {
            out.push(FinitePoset::from_pairs(n, &pairs).expect("transitive"));
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// All posets with `1..=max_n` elements up to isomorphism.
pub fn posets_up_to(max_n: usize) -> Vec<FinitePoset> {
    (1..=max_n).flat_map(enumerate_posets).collect()
}

// ---------------------------------------------------------------------------
// Algebras
// ---------------------------------------------------------------------------

/// A finite Heyting algebra given by full operation tables.
#[derive(Clone)]
pub struct FiniteHeytingAlgebra {
    n: usize,
    leq: Vec<bool>,
    meet: Vec<u8>,
    join: Vec<u8>,
    imp: Vec<u8>,
    bot: Elem,
    top: Elem,
    /// Upset bitmask of each element, for upset algebras.
    upsets: Option<Vec<u64>>,
}

impl fmt::Debug for FiniteHeytingAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteHeytingAlgebra({} elements)", self.n)
    }
}

impl FiniteHeytingAlgebra {
    /// Builds an algebra from an order and implication, deriving meet and
    /// join, and checks the Heyting laws exhaustively.
    pub fn from_order(
        n: usize,
        leq: impl Fn(Elem, Elem) -> bool,
        imp: impl Fn(Elem, Elem) -> Elem,
    ) -> Result<FiniteHeytingAlgebra> {
        if n == 0 || n > MAX_ELEMS {
            return Err(Error::AlgebraLaw(format!("carrier size {n} unsupported")));
        }
        let le: Vec<bool> = (0..n * n).map(|k| leq(k / n, k % n)).collect();
        let at = |x: Elem, y: Elem| le[x * n + y];
        let bound = |lower: bool| -> Result<Elem> {
            (0..n)
                .find(|&b| (0..n).all(|y| if lower { at(b, y) } else { at(y, b) }))
                .ok_or_else(|| Error::AlgebraLaw("missing bound".into()))
        };
        let bot = bound(true)?;
        let top = bound(false)?;
        let mut meet = vec![0u8; n * n];
        let mut join = vec![0u8; n * n];
        for x in 0..n {
            for y in 0..n {
                let glb = (0..n)
                    .filter(|&z| at(z, x) && at(z, y))
                    .find(|&z| (0..n).all(|w| !(at(w, x) && at(w, y)) || at(w, z)))
                    .ok_or_else(|| Error::AlgebraLaw(format!("no meet of {x},{y}")))?;
                let lub = (0..n)
                    .filter(|&z| at(x, z) && at(y, z))
                    .find(|&z| (0..n).all(|w| !(at(x, w) && at(y, w)) || at(z, w)))
                    .ok_or_else(|| Error::AlgebraLaw(format!("no join of {x},{y}")))?;
                meet[x * n + y] = glb as u8;
                join[x * n + y] = lub as u8;
            }
        }
        let imp: Vec<u8> = (0..n * n)
            .map(|k| {
                let r = imp(k / n, k % n);
                r.min(255) as u8
            })
            .collect();
        let alg = FiniteHeytingAlgebra {
            n,
            leq: le,
            meet,
            join,
            imp,
            bot,
            top,
            upsets: None,
        };
        alg.check_laws()?;
        Ok(alg)
    }

    /// The `k`-element chain `0 < 1 < ... < k-1`.
    pub fn chain(k: usize) -> Result<FiniteHeytingAlgebra> {
        if k == 0 {
            return Err(Error::InvalidArgument("chain needs at least one element".into()));
        }
        FiniteHeytingAlgebra::from_order(k, |x, y| x <= y, |x, y| if x <= y { k - 1 } else { y })
    }

    /// Upward-closed subsets of `p` ordered by inclusion.
    pub fn upset_algebra(p: &FinitePoset) -> Result<FiniteHeytingAlgebra> {
        let ups = p.upsets()?;
        if ups.len() > MAX_ELEMS {
            return Err(Error::AlgebraLaw(format!(
                "{} upsets exceed the table limit",
                ups.len()
            )));
        }
        let index: FxHashMap<u64, usize> = ups.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let n_pts = p.len();
        let imp_mask = |u: u64, v: u64| -> u64 {
            let mut out = 0u64;
            for i in 0..n_pts {
                let above = p.up_set(i);
                if above & u & !v == 0 {
                    out |= 1 << i;
                }
            }
            out
        };
        let mut alg = FiniteHeytingAlgebra::from_order(
            ups.len(),
            |x, y| ups[x] & !ups[y] == 0,
            |x, y| index[&imp_mask(ups[x], ups[y])],
        )?;
        alg.upsets = Some(ups);
        Ok(alg)
    }

    fn check_laws(&self) -> Result<()> {
        let n = self.n;
        for x in 0..n {
            if !self.leq(self.bot, x) || !self.leq(x, self.top) {
                return Err(Error::AlgebraLaw("bounds".into()));
            }
            for y in 0..n {
                let xy = self.imp(x, y);
                if self.meet(x, xy) != self.meet(x, y) {
                    return Err(Error::AlgebraLaw(format!("x ∧ (x → y) = x ∧ y at {x},{y}")));
                }
                for z in 0..n {
                    // Residuation: z ≤ x → y iff z ∧ x ≤ y.
                    if self.leq(z, xy) != self.leq(self.meet(z, x), y) {
                        return Err(Error::AlgebraLaw(format!("residuation at {x},{y},{z}")));
                    }
                    if self.imp(x, self.meet(y, z)) != self.meet(xy, self.imp(x, z)) {
                        return Err(Error::AlgebraLaw(format!(
                            "x → (y ∧ z) = (x → y) ∧ (x → z) at {x},{y},{z}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bot(&self) -> Elem {
        self.bot
    }

    pub fn top(&self) -> Elem {
        self.top
    }

    pub fn leq(&self, x: Elem, y: Elem) -> bool {
        self.leq[x * self.n + y]
    }

    pub fn meet(&self, x: Elem, y: Elem) -> Elem {
        self.meet[x * self.n + y] as Elem
    }

    pub fn join(&self, x: Elem, y: Elem) -> Elem {
        self.join[x * self.n + y] as Elem
    }

    pub fn imp(&self, x: Elem, y: Elem) -> Elem {
        self.imp[x * self.n + y] as Elem
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.n
    }

    /// Upset bitmask of an element, for upset algebras.
    pub fn upset_of(&self, x: Elem) -> Option<u64> {
        self.upsets.as_ref().map(|u| u[x])
    }

    /// Element whose upset is `mask`, for upset algebras.
    pub fn element_of_upset(&self, mask: u64) -> Option<Elem> {
        self.upsets.as_ref()?.iter().position(|&m| m == mask)
    }
}

/// All Heyting algebras with at most `max_elems` elements, up to
/// isomorphism (every finite Heyting algebra is the upset algebra of its
/// poset of join-prime elements).
pub fn small_algebras(max_elems: usize) -> Vec<FiniteHeytingAlgebra> {
    let max_pts = max_elems.saturating_sub(1).min(5);
    posets_up_to(max_pts)
        .iter()
        .filter_map(|p| FiniteHeytingAlgebra::upset_algebra(p).ok())
        .filter(|a| a.len() <= max_elems)
        .collect()
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
enum Instr {
    Load(usize),
    Top,
    Bot,
    Meet(usize, usize),
    Join(usize, usize),
    Imp(usize, usize),
    /// Fixed point over the next `len` instructions, binding `slot`; the body
    /// value is left in register `out`.
    Fix {
        mu: bool,
        slot: usize,
        len: usize,
        out: usize,
    },
}

/// A formula compiled to straight-line code over its shared DAG.
#[derive(Clone, Debug)]
pub struct Compiled {
    code: Vec<Instr>,
    out: usize,
    slots: usize,
    inputs: Vec<Sym>,
}

struct Compiler {
    code: Vec<Instr>,
    slot_of: FxHashMap<Sym, usize>,
    slots: usize,
    scopes: Vec<FxHashMap<u64, usize>>,
}

impl Compiler {
    fn lookup(&self, id: u64) -> Option<usize> {
        self.scopes.iter().rev().find_map(|s| s.get(&id).copied())
    }

    fn emit(&mut self, i: Instr) -> usize {
        self.code.push(i);
        self.code.len() - 1
    }

    fn compile(&mut self, f: &Formula) -> Result<usize> {
        if let Some(r) = self.lookup(f.id()) {
            return Ok(r);
        }
        let reg = match f.kind() {
            Kind::Var(s) => {
                let slot = *self
                    .slot_of
                    .get(s)
                    .ok_or_else(|| Error::UnboundVariable(s.name().to_owned()))?;
                self.emit(Instr::Load(slot))
            }
            Kind::Top => self.emit(Instr::Top),
            Kind::Bot => self.emit(Instr::Bot),
            Kind::And(cs) | Kind::Or(cs) => {
                let conj = matches!(f.kind(), Kind::And(_));
                let mut acc = self.compile(&cs[0])?;
                for c in &cs[1..] {
                    let r = self.compile(c)?;
                    acc = self.emit(if conj {
                        Instr::Meet(acc, r)
                    } else {
                        Instr::Join(acc, r)
                    });
                }
                acc
            }
            Kind::Imp(a, b) => {
                let ra = self.compile(a)?;
                let rb = self.compile(b)?;
                self.emit(Instr::Imp(ra, rb))
            }
            Kind::Mu(x, body) | Kind::Nu(x, body) => {
                let mu = matches!(f.kind(), Kind::Mu(..));
                let slot = self.slots;
                self.slots += 1;
                let saved = self.slot_of.insert(*x, slot);
                let at = self.emit(Instr::Fix {
                    mu,
                    slot,
                    len: 0,
                    out: 0,
                });
                self.scopes.push(FxHashMap::default());
                let out = self.compile(body)?;
                self.scopes.pop();
                match saved {
                    Some(s) => self.slot_of.insert(*x, s),
                    None => self.slot_of.remove(x),
                };
                let len = self.code.len() - at - 1;
                self.code[at] = Instr::Fix { mu, slot, len, out };
                at
            }
        };
        self.scopes.last_mut().unwrap().insert(f.id(), reg);
        Ok(reg)
    }
}

impl Compiled {
    /// Compiles `f` with the given input variables, which occupy slots
    /// `0..inputs.len()` in order. Every free variable must be an input.
    pub fn new(f: &Formula, inputs: &[Sym]) -> Result<Compiled> {
        let f = f.alpha_normalize();
        let mut c = Compiler {
            code: Vec::new(),
            slot_of: inputs.iter().enumerate().map(|(i, s)| (*s, i)).collect(),
            slots: inputs.len(),
            scopes: vec![FxHashMap::default()],
        };
        let out = c.compile(&f)?;
        Ok(Compiled {
            code: c.code,
            out,
            slots: c.slots,
            inputs: inputs.to_vec(),
        })
    }

    pub fn inputs(&self) -> &[Sym] {
        &self.inputs
    }

    /// Evaluates with `values[i]` assigned to `inputs[i]`.
    pub fn eval(&self, h: &FiniteHeytingAlgebra, values: &[Elem]) -> Elem {
        let mut regs = vec![0 as Elem; self.code.len()];
        let mut env = vec![0 as Elem; self.slots];
        env[..values.len()].copy_from_slice(values);
        self.exec(h, 0, self.code.len(), &mut regs, &mut env);
        regs[self.out]
    }

    fn exec(&self, h: &FiniteHeytingAlgebra, lo: usize, hi: usize, regs: &mut [Elem], env: &mut [Elem]) {
        let mut i = lo;
        while i < hi {
            match self.code[i] {
                Instr::Load(s) => regs[i] = env[s],
                Instr::Top => regs[i] = h.top(),
                Instr::Bot => regs[i] = h.bot(),
                Instr::Meet(a, b) => regs[i] = h.meet(regs[a], regs[b]),
                Instr::Join(a, b) => regs[i] = h.join(regs[a], regs[b]),
                Instr::Imp(a, b) => regs[i] = h.imp(regs[a], regs[b]),
                Instr::Fix { mu, slot, len, out } => {
                    env[slot] = if mu { h.bot() } else { h.top() };
                    loop {
                        self.exec(h, i + 1, i + 1 + len, regs, env);
                        if regs[out] == env[slot] {
                            break;
                        }
                        env[slot] = regs[out];
                    }
                    regs[i] = env[slot];
                    i += len;
                }
            }
            i += 1;
        }
    }
}

/// Standard interpretation of `f`; binders are computed by iteration.
pub fn eval(f: &Formula, h: &FiniteHeytingAlgebra, v: &Valuation) -> Result<Elem> {
    let inputs: Vec<Sym> = f.free_vars().to_vec();
    let values = inputs
        .iter()
        .map(|s| {
            v.get(s)
                .copied()
                .ok_or_else(|| Error::UnboundVariable(s.name().to_owned()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Compiled::new(f, &inputs)?.eval(h, &values))
}

fn fix_iterate(
    f: &Formula,
    x: Sym,
    h: &FiniteHeytingAlgebra,
    v: &Valuation,
    start: Elem,
) -> Result<(Elem, usize)> {
    if !classify(f, x).is_positive() {
        return Err(Error::NotPositiveVar(x.name().to_owned()));
    }
    let mut inputs = vec![x];
    inputs.extend(f.free_vars().iter().copied().filter(|s| *s != x));
    let mut values = vec![start];
    for s in &inputs[1..] {
        values.push(
            v.get(s)
                .copied()
                .ok_or_else(|| Error::UnboundVariable(s.name().to_owned()))?,
        );
    }
    let prog = Compiled::new(f, &inputs)?;
    let mut steps = 0;
    loop {
        let next = prog.eval(h, &values);
        if next == values[0] {
            return Ok((next, steps));
        }
        values[0] = next;
        steps += 1;
    }
}

/// Least fixed point of `h ↦ f(h)` by iteration from `⊥`, together with the
/// least `n` such that `hₙ₊₁ = hₙ`.
pub fn lfp_iterate(
    f: &Formula,
    x: Sym,
    h: &FiniteHeytingAlgebra,
    v: &Valuation,
) -> Result<(Elem, usize)> {
    fix_iterate(f, x, h, v, h.bot())
}

/// Greatest fixed point by iteration from `⊤`.
pub fn gfp_iterate(
    f: &Formula,
    x: Sym,
    h: &FiniteHeytingAlgebra,
    v: &Valuation,
) -> Result<(Elem, usize)> {
    fix_iterate(f, x, h, v, h.top())
}

/// Calls `visit` with every assignment of elements of `h` to `k` inputs.
pub fn for_each_assignment(h: &FiniteHeytingAlgebra, k: usize, mut visit: impl FnMut(&[Elem]) -> bool) -> bool {
    let mut vals = vec![0; k];
    loop {
        if !visit(&vals) {
            return false;
        }
        let mut i = 0;
        loop {
            if i == k {
                return true;
            }
            vals[i] += 1;
            if vals[i] < h.len() {
                break;
            }
            vals[i] = 0;
            i += 1;
        }
    }
}

/// A semantic counterexample to an equivalence.
#[derive(Clone, Debug)]
pub struct Witness {
    pub poset: FinitePoset,
    pub valuation: Valuation,
    pub left: Elem,
    pub right: Elem,
}

/// Searches upset algebras of posets with up to `max_poset` elements,
/// smallest first, for a valuation separating `f` and `g`.
pub fn refute_equiv(f: &Formula, g: &Formula, max_poset: usize) -> Option<Witness> {
    let mut inputs: Vec<Sym> = f.free_vars().to_vec();
    for s in g.free_vars() {
        if !inputs.contains(s) {
            inputs.push(*s);
        }
    }
    inputs.sort();
    let pf = Compiled::new(f, &inputs).ok()?;
    let pg = Compiled::new(g, &inputs).ok()?;
    for poset in posets_up_to(max_poset.min(5)) {
        let Ok(h) = FiniteHeytingAlgebra::upset_algebra(&poset) else {
            continue;
        };
        let mut found = None;
        for_each_assignment(&h, inputs.len(), |vals| {
            let (l, r) = (pf.eval(&h, vals), pg.eval(&h, vals));
            if l != r {
                found = Some((vals.to_vec(), l, r));
                return false;
            }
            true
        });
        if let Some((vals, left, right)) = found {
            return Some(Witness {
                poset,
                valuation: inputs.iter().copied().zip(vals).collect(),
                left,
                right,
            });
        }
    }
    None
}

/// `f` and `g` agree on every upset algebra of every poset with up to
/// `max_poset` elements.
pub fn semantically_equal(f: &Formula, g: &Formula, max_poset: usize) -> bool {
    refute_equiv(f, g, max_poset).is_none()
}

/// Variables that are positive in `f` (including absent ones) pass; others
/// are reported.
pub fn check_positive(f: &Formula, x: Sym) -> Result<()> {
    if classify(f, x) == VarClass::NonPositive {
        Err(Error::NotPositiveVar(x.name().to_owned()))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn val(pairs: &[(&str, Elem)]) -> Valuation {
        pairs.iter().map(|(k, v)| (Sym::new(k), *v)).collect()
    }

    #[test]
    fn upset_algebra_sizes() {
        let a1 = FiniteHeytingAlgebra::upset_algebra(&FinitePoset::antichain(1)).unwrap();
        assert_eq!(a1.len(), 2);
        // 2-chain: upsets ∅, {1}, {0,1}.
        let c2 = FiniteHeytingAlgebra::upset_algebra(&FinitePoset::chain(2)).unwrap();
        assert_eq!(c2.len(), 3);
        let d = FiniteHeytingAlgebra::upset_algebra(&FinitePoset::antichain(2)).unwrap();
        assert_eq!(d.len(), 4);
        // The diamond is Boolean: every element has a complement.
        assert!(d
            .elements()
            .all(|x| d.join(x, d.imp(x, d.bot())) == d.top()));
        // The 3-chain is not.
        assert!(c2
            .elements()
            .any(|x| c2.join(x, c2.imp(x, c2.bot())) != c2.top()));
    }

    #[test]
    fn chain_implication() {
        let c = FiniteHeytingAlgebra::chain(3).unwrap();
        assert_eq!(c.imp(1, 0), 0);
        assert_eq!(c.imp(0, 1), 2);
        assert!(FiniteHeytingAlgebra::chain(0).is_err());
        assert_eq!(FiniteHeytingAlgebra::chain(2).unwrap().len(), 2);
    }

    #[test]
    fn rejects_bad_relations() {
        assert!(FinitePoset::from_pairs(2, &[(0, 1), (1, 0)]).is_err());
        assert!(FinitePoset::from_relation(3, |i, j| i == j || (i == 0 && j == 1) || (i == 1 && j == 2)).is_err());
        assert!(FinitePoset::from_pairs(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn poset_counts() {
        let counts: Vec<usize> = (1..=5).map(|n| enumerate_posets(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 5, 16, 63]);
    }

    #[test]
    fn small_algebra_counts() {
        // Heyting algebras (= finite distributive lattices) with 1..=5 elements
        // besides the trivial one: sizes 2, 3, 4, 4, 5, 5, 5.
        let sizes: Vec<usize> = small_algebras(5).iter().map(|a| a.len()).collect();
        let mut sorted = sizes.clone();
        sorted.sort();
        assert_eq!(sorted, vec![2, 3, 4, 4, 5, 5, 5]);
    }

    #[test]
    fn poset_text_round_trip() {
        let p = FinitePoset::parse("3\n0<1\n0<2\n").unwrap();
        assert_eq!(FinitePoset::parse(&p.to_text()).unwrap(), p);
        assert!(FinitePoset::parse("x").is_err());
        assert!(FinitePoset::parse("2\n0-1").is_err());
    }

    #[test]
    fn eval_examples() {
        let c = FiniteHeytingAlgebra::chain(3).unwrap();
        assert_eq!(eval(&p("T -> a"), &c, &val(&[("a", 1)])).unwrap(), 1);
        assert_eq!(eval(&p("mu x. (b \\/ x)"), &c, &val(&[("b", 1)])).unwrap(), 1);
        let v = val(&[("a", 1), ("b", 0)]);
        assert_eq!(eval(&p("(a -> b) -> a"), &c, &v).unwrap(), 2);
        assert_eq!(eval(&p("((a -> b) -> a) -> a"), &c, &v).unwrap(), 1);
        assert!(matches!(
            eval(&p("a"), &c, &Valuation::new()),
            Err(Error::UnboundVariable(_))
        ));
    }

    #[test]
    fn iteration_examples() {
        let x = Sym::new("x");
        let c = FiniteHeytingAlgebra::chain(3).unwrap();
        assert_eq!(lfp_iterate(&p("b \\/ x"), x, &c, &val(&[("b", 1)])).unwrap(), (1, 1));
        assert_eq!(gfp_iterate(&p("x"), x, &c, &Valuation::new()).unwrap(), (2, 0));
        assert_eq!(gfp_iterate(&p("a /\\ x"), x, &c, &val(&[("a", 1)])).unwrap(), (1, 1));
        assert!(lfp_iterate(&p("x -> a"), x, &c, &val(&[("a", 1)])).is_err());
    }

    #[test]
    fn gfp_of_polynomials_needs_at_most_one_step() {
        let x = Sym::new("x");
        for h in small_algebras(5) {
            for s in ["(x -> b) -> a", "a \\/ (b -> x)", "(a /\\ x) \\/ b"] {
                let f = p(s);
                for_each_assignment(&h, 2, |v| {
                    let val = val(&[("a", v[0]), ("b", v[1])]);
                    assert!(gfp_iterate(&f, x, &h, &val).unwrap().1 <= 1);
                    true
                });
            }
        }
    }

    #[test]
    fn phi_n_on_kn() {
        let x = Sym::new("x");
        for n in 1..=3usize {
            let poset = FinitePoset::subsets_reversed(n);
            let h = FiniteHeytingAlgebra::upset_algebra(&poset).unwrap();
            let mut v = Valuation::new();
            v.insert(Sym::new("b"), h.element_of_upset(1).unwrap());
            let mut parts = vec![Formula::var("b")];
            for i in 1..=n {
                let mask: u64 = (0..1u64 << n)
                    .filter(|s| s >> (i - 1) & 1 == 0)
                    .fold(0, |m, s| m | 1 << s);
                let name = format!("a{i}");
                v.insert(Sym::new(&name), h.element_of_upset(mask).unwrap());
                parts.push(Formula::imp(Formula::var(&name), Formula::sym(x)));
            }
            let f = Formula::or(parts);
            let (fix, steps) = lfp_iterate(&f, x, &h, &v).unwrap();
            assert_eq!(steps, n + 1);
            assert_eq!(fix, h.top());
        }
    }

    #[test]
    fn refutations() {
        let w = refute_equiv(&p("((a -> b) -> a) -> a"), &Formula::top(), 3).unwrap();
        assert_eq!(w.poset.len(), 2);
        assert!(refute_equiv(&p("a"), &p("a"), 3).is_none());
        let lem = refute_equiv(&p("a \\/ (a -> F)"), &Formula::top(), 3).unwrap();
        assert_eq!(lem.poset, FinitePoset::chain(2));
    }

    #[test]
    fn nested_binders_evaluate() {
        let h = FiniteHeytingAlgebra::chain(4).unwrap();
        let f = p("mu x. nu z. ((x \\/ z) /\\ b)");
        for b in 0..4 {
            assert_eq!(eval(&f, &h, &val(&[("b", b)])).unwrap(), b);
        }
    }
}
