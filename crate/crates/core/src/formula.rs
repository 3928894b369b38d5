//! Hash-consed formulas of the intuitionistic propositional mu-calculus.
//!
//! Every [`Formula`] is interned: two formulas are structurally equal iff
//! they share the same node, so equality and hashing are O(1) and iterated
//! substitution produces DAGs whose node count grows linearly.
//!
//! Construction always goes through the canonicalizing constructors
//! ([`Formula::and`], [`Formula::or`], [`Formula::imp`], ...) which flatten,
//! sort and deduplicate n-ary connectives and apply the unit rewrites
//! `⊥ ∨ a = a`, `⊤ ∧ a = a`, `⊤ ∨ a = ⊤`, `⊥ ∧ a = ⊥`, `a → ⊤ = ⊤`,
//! `⊤ → a = a` and `⊥ → a = ⊤`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::{Arc, LazyLock, Mutex, Weak};

use rustc_hash::{FxHashMap, FxHashSet};
use smallvec::SmallVec;

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Symbols
// ---------------------------------------------------------------------------

struct SymData {
    name: &'static str,
    hash: u64,
}

/// An interned propositional variable name.
#[derive(Clone, Copy)]
pub struct Sym(&'static SymData);

static SYMBOLS: LazyLock<Mutex<FxHashMap<&'static str, &'static SymData>>> =
    LazyLock::new(|| Mutex::new(FxHashMap::default()));

impl Sym {
    pub fn new(name: &str) -> Sym {
        let mut table = SYMBOLS.lock().unwrap();
        if let Some(data) = table.get(name) {
            return Sym(data);
        }
        let name: &'static str = Box::leak(name.to_owned().into_boxed_str());
        let data: &'static SymData = Box::leak(Box::new(SymData {
            name,
            hash: fnv(name.as_bytes()),
        }));
        table.insert(name, data);
        Sym(data)
    }

    pub fn name(self) -> &'static str {
        self.0.name
    }
}

impl PartialEq for Sym {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.0, other.0)
    }
}
impl Eq for Sym {}

impl Hash for Sym {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl Ord for Sym {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            Ordering::Equal
        } else {
            natural_cmp(self.name(), other.name())
        }
    }
}
impl PartialOrd for Sym {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Orders `a2` before `a10`: alphabetic prefix first, then numeric suffix.
fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn split(s: &str) -> (&str, Option<u64>) {
        let idx = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (head, tail) = s.split_at(idx);
        (head, tail.parse().ok())
    }
    let (ha, na) = split(a);
    let (hb, nb) = split(b);
    ha.cmp(hb).then(na.cmp(&nb)).then(a.cmp(b))
}

fn fnv(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn mix(h: u64, v: u64) -> u64 {
    let x = (h ^ v).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x ^ (x >> 29)
}

// ---------------------------------------------------------------------------
// Nodes
// ---------------------------------------------------------------------------

/// Shape of a formula node. Children of `And`/`Or` are flattened, sorted and
/// deduplicated, with at least two members.
pub enum Kind {
    Var(Sym),
    Top,
    Bot,
    And(Box<[Formula]>),
    Or(Box<[Formula]>),
    Imp(Formula, Formula),
    Mu(Sym, Formula),
    Nu(Sym, Formula),
}

pub(crate) struct Node {
    kind: Kind,
    hash: u64,
    id: u64,
    size: u64,
    imp_var_count: u64,
    free: Box<[Sym]>,
    has_binder: bool,
}

/// An immutable, interned formula.
#[derive(Clone)]
pub struct Formula(Arc<Node>);

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}
impl Eq for Formula {}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl Ord for Formula {
    fn cmp(&self, other: &Self) -> Ordering {
        canonical_cmp(self, other)
    }
}
impl PartialOrd for Formula {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn rank(k: &Kind) -> u8 {
    match k {
        Kind::Var(_) => 0,
        Kind::Top => 1,
        Kind::Bot => 2,
        Kind::And(_) => 3,
        Kind::Or(_) => 4,
        Kind::Imp(..) => 5,
        Kind::Mu(..) => 6,
        Kind::Nu(..) => 7,
    }
}

fn canonical_cmp(a: &Formula, b: &Formula) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let (ka, kb) = (a.kind(), b.kind());
    rank(ka).cmp(&rank(kb)).then_with(|| match (ka, kb) {
        (Kind::Var(x), Kind::Var(y)) => x.cmp(y),
        (Kind::And(xs), Kind::And(ys)) | (Kind::Or(xs), Kind::Or(ys)) => {
            for (x, y) in xs.iter().zip(ys.iter()) {
                let o = canonical_cmp(x, y);
                if o != Ordering::Equal {
                    return o;
                }
            }
            xs.len().cmp(&ys.len())
        }
        (Kind::Imp(a1, b1), Kind::Imp(a2, b2)) => {
            canonical_cmp(a1, a2).then_with(|| canonical_cmp(b1, b2))
        }
        (Kind::Mu(x, f), Kind::Mu(y, g)) | (Kind::Nu(x, f), Kind::Nu(y, g)) => {
            x.cmp(y).then_with(|| canonical_cmp(f, g))
        }
        _ => Ordering::Equal,
    })
}

// ---------------------------------------------------------------------------
// Interning
// ---------------------------------------------------------------------------

const SHARDS: usize = 64;

#[derive(Default)]
struct Shard {
    map: FxHashMap<u64, SmallVec<[Weak<Node>; 1]>>,
    entries: usize,
    sweep_at: usize,
}

static TABLE: LazyLock<Vec<Mutex<Shard>>> = LazyLock::new(|| {
    (0..SHARDS)
        .map(|_| {
            Mutex::new(Shard {
                sweep_at: 4096,
                ..Shard::default()
            })
        })
        .collect()
});

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn kind_hash(k: &Kind) -> u64 {
    match k {
        Kind::Var(s) => mix(1, s.0.hash),
        Kind::Top => 2,
        Kind::Bot => 3,
        Kind::And(cs) => cs.iter().fold(mix(4, cs.len() as u64), |h, c| mix(h, c.0.hash)),
        Kind::Or(cs) => cs.iter().fold(mix(5, cs.len() as u64), |h, c| mix(h, c.0.hash)),
        Kind::Imp(a, b) => mix(mix(6, a.0.hash), b.0.hash),
        Kind::Mu(x, b) => mix(mix(7, x.0.hash), b.0.hash),
        Kind::Nu(x, b) => mix(mix(8, x.0.hash), b.0.hash),
    }
}

fn shallow_eq(a: &Kind, b: &Kind) -> bool {
    match (a, b) {
        (Kind::Var(x), Kind::Var(y)) => x == y,
        (Kind::Top, Kind::Top) | (Kind::Bot, Kind::Bot) => true,
        (Kind::And(xs), Kind::And(ys)) | (Kind::Or(xs), Kind::Or(ys)) => xs[..] == ys[..],
        (Kind::Imp(a1, b1), Kind::Imp(a2, b2)) => a1 == a2 && b1 == b2,
        (Kind::Mu(x, f), Kind::Mu(y, g)) | (Kind::Nu(x, f), Kind::Nu(y, g)) => x == y && f == g,
        _ => false,
    }
}

fn merge_free<'a>(parts: impl Iterator<Item = &'a [Sym]>) -> Box<[Sym]> {
    let mut out: Vec<Sym> = Vec::new();
    for p in parts {
        out.extend_from_slice(p);
    }
    out.sort_by_key(|s| s.0 as *const SymData as usize);
    out.dedup();
    out.into_boxed_slice()
}

fn intern(kind: Kind) -> Formula {
    let hash = kind_hash(&kind);
    let shard = &TABLE[(hash as usize) % SHARDS];
    let mut guard = shard.lock().unwrap();
    if let Some(bucket) = guard.map.get(&hash) {
        for weak in bucket {
            if let Some(node) = weak.upgrade() {
                if shallow_eq(&node.kind, &kind) {
                    return Formula(node);
                }
            }
        }
    }

    let (size, imp_var_count, free, has_binder) = match &kind {
        Kind::Var(s) => (1, 1, vec![*s].into_boxed_slice(), false),
        Kind::Top | Kind::Bot => (1, 0, Box::default(), false),
        Kind::And(cs) | Kind::Or(cs) => (
            cs.iter().fold(1u64, |acc, c| acc.saturating_add(c.0.size)),
            cs.iter().fold(0u64, |acc, c| acc.saturating_add(c.0.imp_var_count)),
            merge_free(cs.iter().map(|c| &c.0.free[..])),
            cs.iter().any(|c| c.0.has_binder),
        ),
        Kind::Imp(a, b) => (
            1u64.saturating_add(a.0.size).saturating_add(b.0.size),
            1u64.saturating_add(a.0.imp_var_count)
                .saturating_add(b.0.imp_var_count),
            merge_free([&a.0.free[..], &b.0.free[..]].into_iter()),
            a.0.has_binder || b.0.has_binder,
        ),
        Kind::Mu(x, b) | Kind::Nu(x, b) => (
            2u64.saturating_add(b.0.size),
            b.0.imp_var_count,
            b.0.free.iter().copied().filter(|s| s != x).collect(),
            true,
        ),
    };
    let node = Arc::new(Node {
        kind,
        hash,
        id: NEXT_ID.fetch_add(1, AtomicOrdering::Relaxed),
        size,
        imp_var_count,
        free,
        has_binder,
    });
    guard
        .map
        .entry(hash)
        .or_default()
        .push(Arc::downgrade(&node));
    guard.entries += 1;
    if guard.entries >= guard.sweep_at {
        let shard = &mut *guard;
        shard.map.retain(|_, bucket| {
            bucket.retain(|w| w.strong_count() > 0);
            !bucket.is_empty()
        });
        shard.entries = shard.map.values().map(|b| b.len()).sum();
        shard.sweep_at = (shard.entries * 2).max(4096);
    }
    Formula(node)
}

static TOP: LazyLock<Formula> = LazyLock::new(|| intern(Kind::Top));
static BOT: LazyLock<Formula> = LazyLock::new(|| intern(Kind::Bot));

// ---------------------------------------------------------------------------
// Constructors and accessors
// ---------------------------------------------------------------------------

impl Formula {
    pub fn var(name: &str) -> Formula {
        intern(Kind::Var(Sym::new(name)))
    }

    pub fn sym(s: Sym) -> Formula {
        intern(Kind::Var(s))
    }

    pub fn top() -> Formula {
        TOP.clone()
    }

    pub fn bot() -> Formula {
        BOT.clone()
    }

    /// Canonical conjunction: flattened, sorted, deduplicated, `⊤` dropped,
    /// `⊥` absorbing. The empty conjunction is `⊤`.
    pub fn and<I: IntoIterator<Item = Formula>>(parts: I) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p.kind() {
                Kind::Top => {}
                Kind::Bot => return Formula::bot(),
                Kind::And(cs) => out.extend(cs.iter().cloned()),
                _ => out.push(p),
            }
        }
        nary(out, true)
    }

    /// Canonical disjunction, dual to [`Formula::and`]. The empty disjunction is `⊥`.
    pub fn or<I: IntoIterator<Item = Formula>>(parts: I) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p.kind() {
                Kind::Bot => {}
                Kind::Top => return Formula::top(),
                Kind::Or(cs) => out.extend(cs.iter().cloned()),
                _ => out.push(p),
            }
        }
        nary(out, false)
    }

    pub fn and2(a: Formula, b: Formula) -> Formula {
        Formula::and([a, b])
    }

    pub fn or2(a: Formula, b: Formula) -> Formula {
        Formula::or([a, b])
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        match (a.kind(), b.kind()) {
            (_, Kind::Top) => Formula::top(),
            (Kind::Top, _) => b,
            (Kind::Bot, _) => Formula::top(),
            _ => intern(Kind::Imp(a, b)),
        }
    }

    /// `a → ⊥`.
    pub fn not(a: Formula) -> Formula {
        Formula::imp(a, Formula::bot())
    }

    /// Least fixed point binder; `x` must occur only positively in `body`.
    pub fn mu(x: Sym, body: Formula) -> Result<Formula> {
        check_binder(x, &body, "mu")?;
        Ok(intern(Kind::Mu(x, body)))
    }

    /// Greatest fixed point binder; `x` must occur only positively in `body`.
    pub fn nu(x: Sym, body: Formula) -> Result<Formula> {
        check_binder(x, &body, "nu")?;
        Ok(intern(Kind::Nu(x, body)))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    /// Unique identity of this interned node while it is alive. Ids are
    /// never reused.
    pub fn id(&self) -> u64 {
        self.0.id
    }

    /// Tree node count: one node per connective (n-ary connectives count once)
    /// plus one per leaf; binders count the binder and its variable.
    pub fn size(&self) -> u64 {
        self.0.size
    }

    /// Alternative size: number of implication subformulas plus variable
    /// occurrences, counted on the tree.
    pub fn imp_var_count(&self) -> u64 {
        self.0.imp_var_count
    }

    /// Number of distinct nodes in the shared DAG.
    pub fn dag_size(&self) -> usize {
        let mut seen = FxHashSet::default();
        let mut stack = vec![self.clone()];
        while let Some(f) = stack.pop() {
            if seen.insert(f.id()) {
                stack.extend(f.children().cloned());
            }
        }
        seen.len()
    }

    pub fn children(&self) -> impl Iterator<Item = &Formula> {
        let slice: &[Formula] = match self.kind() {
            Kind::And(cs) | Kind::Or(cs) => cs,
            Kind::Imp(a, b) => return ChildIter::Two(Some(a), Some(b)),
            Kind::Mu(_, b) | Kind::Nu(_, b) => std::slice::from_ref(b),
            _ => &[],
        };
        ChildIter::Slice(slice.iter())
    }

    pub fn free_vars(&self) -> &[Sym] {
        &self.0.free
    }

    pub fn has_free(&self, x: Sym) -> bool {
        self.0.free.contains(&x)
    }

    /// Free variables in canonical (natural name) order.
    pub fn free_var_set(&self) -> BTreeSet<Sym> {
        self.0.free.iter().copied().collect()
    }

    /// All variable names, free or bound.
    pub fn all_vars(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        let mut seen = FxHashSet::default();
        let mut stack = vec![self.clone()];
        while let Some(f) = stack.pop() {
            if !seen.insert(f.id()) {
                continue;
            }
            match f.kind() {
                Kind::Var(s) => {
                    out.insert(*s);
                }
                Kind::Mu(s, _) | Kind::Nu(s, _) => {
                    out.insert(*s);
                }
                _ => {}
            }
            stack.extend(f.children().cloned());
        }
        out
    }

    pub fn is_fixpoint_free(&self) -> bool {
        !self.0.has_binder
    }

    pub fn is_top(&self) -> bool {
        matches!(self.kind(), Kind::Top)
    }

    pub fn is_bot(&self) -> bool {
        matches!(self.kind(), Kind::Bot)
    }

    pub fn as_var(&self) -> Option<Sym> {
        match self.kind() {
            Kind::Var(s) => Some(*s),
            _ => None,
        }
    }

    /// Replaces every free occurrence of `x` by `g`, renaming binders of
    /// `self` that would capture free variables of `g`.
    pub fn substitute(&self, x: Sym, g: &Formula) -> Formula {
        if !self.has_free(x) {
            return self.clone();
        }
        let mut memo = FxHashMap::default();
        subst_rec(self, x, g, &mut memo)
    }

    /// Simultaneous substitution of several variables.
    pub fn substitute_many(&self, map: &[(Sym, Formula)]) -> Formula {
        if map.iter().all(|(x, _)| !self.has_free(*x)) {
            return self.clone();
        }
        let mut memo = FxHashMap::default();
        subst_many_rec(self, map, &mut memo)
    }

    /// `fⁿ(base)`: `n`-fold substitution of `self` for `x`, starting at `base`.
    pub fn iterate(&self, x: Sym, n: usize, base: &Formula) -> Formula {
        let mut cur = base.clone();
        for _ in 0..n {
            cur = self.substitute(x, &cur);
        }
        cur
    }

    /// Renames binders so that bound variables are pairwise distinct and
    /// distinct from every free variable. Idempotent.
    pub fn alpha_normalize(&self) -> Formula {
        if !self.0.has_binder {
            return self.clone();
        }
        let mut used: BTreeSet<Sym> = self.free_var_set();
        alpha_rec(self, &mut used)
    }
}

enum ChildIter<'a> {
    Slice(std::slice::Iter<'a, Formula>),
    Two(Option<&'a Formula>, Option<&'a Formula>),
}

impl<'a> Iterator for ChildIter<'a> {
    type Item = &'a Formula;
    fn next(&mut self) -> Option<&'a Formula> {
        match self {
            ChildIter::Slice(it) => it.next(),
            ChildIter::Two(a, b) => a.take().or_else(|| b.take()),
        }
    }
}

fn nary(mut parts: Vec<Formula>, conj: bool) -> Formula {
    parts.sort();
    parts.dedup();
    match parts.len() {
        0 => {
            if conj {
                Formula::top()
            } else {
                Formula::bot()
            }
        }
        1 => parts.pop().unwrap(),
        _ => {
            let cs = parts.into_boxed_slice();
            intern(if conj { Kind::And(cs) } else { Kind::Or(cs) })
        }
    }
}

fn check_binder(x: Sym, body: &Formula, binder: &'static str) -> Result<()> {
    if classify(body, x) == VarClass::NonPositive {
        return Err(Error::NotPositive {
            var: x.name().to_owned(),
            binder,
        });
    }
    Ok(())
}

/// Smallest `base`, `base1`, `base2`, ... not in `avoid`.
pub fn fresh_sym(base: &str, avoid: &BTreeSet<Sym>) -> Sym {
    let s = Sym::new(base);
    if !avoid.contains(&s) {
        return s;
    }
    fresh_indexed(base, 1, avoid)
}

/// Smallest `base{i}` with `i >= start` not in `avoid`.
pub fn fresh_indexed(base: &str, start: usize, avoid: &BTreeSet<Sym>) -> Sym {
    (start..)
        .map(|i| Sym::new(&format!("{base}{i}")))
        .find(|s| !avoid.contains(s))
        .expect("unbounded")
}

fn rebuild(f: &Formula, mut map: impl FnMut(&Formula) -> Formula) -> Formula {
    match f.kind() {
        Kind::Var(_) | Kind::Top | Kind::Bot => f.clone(),
        Kind::And(cs) => Formula::and(cs.iter().map(&mut map)),
        Kind::Or(cs) => Formula::or(cs.iter().map(&mut map)),
        Kind::Imp(a, b) => {
            let a2 = map(a);
            let b2 = map(b);
            Formula::imp(a2, b2)
        }
        Kind::Mu(y, b) => intern(Kind::Mu(*y, map(b))),
        Kind::Nu(y, b) => intern(Kind::Nu(*y, map(b))),
    }
}

fn subst_rec(f: &Formula, x: Sym, g: &Formula, memo: &mut FxHashMap<u64, Formula>) -> Formula {
    if !f.has_free(x) {
        return f.clone();
    }
    if let Some(r) = memo.get(&f.id()) {
        return r.clone();
    }
    let out = match f.kind() {
        Kind::Var(_) => g.clone(),
        Kind::Mu(y, body) | Kind::Nu(y, body) => {
            let is_mu = matches!(f.kind(), Kind::Mu(..));
            let (y2, body2) = if g.has_free(*y) {
                let mut avoid = body.all_vars();
                avoid.extend(g.free_vars().iter().copied());
                avoid.insert(x);
                let fresh = fresh_indexed(y.name(), 1, &avoid);
                (fresh, body.substitute(*y, &Formula::sym(fresh)))
            } else {
                (*y, body.clone())
            };
            let inner = subst_rec(&body2, x, g, memo);
            intern(if is_mu {
                Kind::Mu(y2, inner)
            } else {
                Kind::Nu(y2, inner)
            })
        }
        _ => rebuild(f, |c| subst_rec(c, x, g, memo)),
    };
    memo.insert(f.id(), out.clone());
    out
}

fn subst_many_rec(
    f: &Formula,
    map: &[(Sym, Formula)],
    memo: &mut FxHashMap<u64, Formula>,
) -> Formula {
    if map.iter().all(|(x, _)| !f.has_free(*x)) {
        return f.clone();
    }
    if let Some(r) = memo.get(&f.id()) {
        return r.clone();
    }
    let out = match f.kind() {
        Kind::Var(s) => map
            .iter()
            .find(|(x, _)| x == s)
            .map(|(_, g)| g.clone())
            .unwrap_or_else(|| f.clone()),
        Kind::Mu(y, body) | Kind::Nu(y, body) => {
            let is_mu = matches!(f.kind(), Kind::Mu(..));
            let inner_map: Vec<(Sym, Formula)> =
                map.iter().filter(|(x, _)| x != y).cloned().collect();
            let capture = inner_map.iter().any(|(_, g)| g.has_free(*y));
            let (y2, body2) = if capture {
                let mut avoid = body.all_vars();
                for (x, g) in &inner_map {
                    avoid.insert(*x);
                    avoid.extend(g.free_vars().iter().copied());
                }
                let fresh = fresh_indexed(y.name(), 1, &avoid);
                (fresh, body.substitute(*y, &Formula::sym(fresh)))
            } else {
                (*y, body.clone())
            };
            let mut inner_memo = FxHashMap::default();
            let inner = subst_many_rec(&body2, &inner_map, &mut inner_memo);
            intern(if is_mu {
                Kind::Mu(y2, inner)
            } else {
                Kind::Nu(y2, inner)
            })
        }
        _ => rebuild(f, |c| subst_many_rec(c, map, memo)),
    };
    memo.insert(f.id(), out.clone());
    out
}

fn alpha_rec(f: &Formula, used: &mut BTreeSet<Sym>) -> Formula {
    if !f.0.has_binder {
        return f.clone();
    }
    match f.kind() {
        Kind::Mu(y, body) | Kind::Nu(y, body) => {
            let is_mu = matches!(f.kind(), Kind::Mu(..));
            let (y2, body2) = if used.contains(y) {
                let mut avoid = used.clone();
                avoid.extend(body.all_vars());
                let fresh = fresh_indexed(y.name(), 1, &avoid);
                (fresh, body.substitute(*y, &Formula::sym(fresh)))
            } else {
                (*y, body.clone())
            };
            used.insert(y2);
            let inner = alpha_rec(&body2, used);
            intern(if is_mu {
                Kind::Mu(y2, inner)
            } else {
                Kind::Nu(y2, inner)
            })
        }
        _ => rebuild(f, |c| alpha_rec(c, used)),
    }
}

// ---------------------------------------------------------------------------
// Polarity
// ---------------------------------------------------------------------------

/// Sign of a variable occurrence: parity of antecedent crossings on its path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    Positive,
    Negative,
}

/// Whether an occurrence sits inside the antecedent of some implication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strength {
    StronglyPositive,
    WeaklyNegative,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Occurrence {
    pub path: Vec<usize>,
    pub sign: Sign,
    pub strength: Strength,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PolarityReport {
    pub variable: String,
    pub occurrences: Vec<Occurrence>,
}

/// Aggregate classification of the free occurrences of a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum VarClass {
    Absent,
    StronglyPositive,
    WeaklyNegative,
    MixedPositive,
    NonPositive,
}

impl VarClass {
    /// Every occurrence positive (vacuously true when absent).
    pub fn is_positive(self) -> bool {
        self != VarClass::NonPositive
    }
}

const OCC_POS_STRONG: u8 = 1;
const OCC_POS_WEAK: u8 = 2;
const OCC_NEG: u8 = 4;

fn occ_flags(
    f: &Formula,
    x: Sym,
    negative: bool,
    weak: bool,
    memo: &mut FxHashMap<(u64, bool, bool), u8>,
) -> u8 {
    if !f.has_free(x) {
        return 0;
    }
    let key = (f.id(), negative, weak);
    if let Some(v) = memo.get(&key) {
        return *v;
    }
    let out = match f.kind() {
        Kind::Var(_) => {
            if negative {
                OCC_NEG
            } else if weak {
                OCC_POS_WEAK
            } else {
                OCC_POS_STRONG
            }
        }
        Kind::Imp(a, b) => {
            occ_flags(a, x, !negative, true, memo) | occ_flags(b, x, negative, weak, memo)
        }
        _ => f
            .children()
            .fold(0, |acc, c| acc | occ_flags(c, x, negative, weak, memo)),
    };
    memo.insert(key, out);
    out
}

/// Classifies the free occurrences of `x` in `f`.
pub fn classify(f: &Formula, x: Sym) -> VarClass {
    let flags = occ_flags(f, x, false, false, &mut FxHashMap::default());
    if flags == 0 {
        VarClass::Absent
    } else if flags & OCC_NEG != 0 {
        VarClass::NonPositive
    } else if flags == OCC_POS_STRONG {
        VarClass::StronglyPositive
    } else if flags == OCC_POS_WEAK {
        VarClass::WeaklyNegative
    } else {
        VarClass::MixedPositive
    }
}

/// Every free occurrence of `x` is negative (vacuously true when absent).
pub fn is_negative_in(f: &Formula, x: Sym) -> bool {
    let flags = occ_flags(f, x, false, false, &mut FxHashMap::default());
    flags & (OCC_POS_STRONG | OCC_POS_WEAK) == 0
}

/// Lists every free occurrence of `x` with its tree path. The path indexes
/// children in canonical order (`Imp` has antecedent 0, consequent 1).
/// Enumerates the unfolded tree, so intended for modestly sized inputs.
pub fn polarity_report(f: &Formula, x: Sym) -> PolarityReport {
    fn walk(
        f: &Formula,
        x: Sym,
        path: &mut Vec<usize>,
        negative: bool,
        weak: bool,
        out: &mut Vec<Occurrence>,
    ) {
        if !f.has_free(x) {
            return;
        }
        match f.kind() {
            Kind::Var(_) => out.push(Occurrence {
                path: path.clone(),
                sign: if negative { Sign::Negative } else { Sign::Positive },
                strength: if weak {
                    Strength::WeaklyNegative
                } else {
                    Strength::StronglyPositive
                },
            }),
            Kind::Imp(a, b) => {
                path.push(0);
                walk(a, x, path, !negative, true, out);
                path.pop();
                path.push(1);
                walk(b, x, path, negative, weak, out);
                path.pop();
            }
            _ => {
                for (i, c) in f.children().enumerate() {
                    path.push(i);
                    walk(c, x, path, negative, weak, out);
                    path.pop();
                }
            }
        }
    }
    let mut occurrences = Vec::new();
    walk(f, x, &mut Vec::new(), false, false, &mut occurrences);
    PolarityReport {
        variable: x.name().to_owned(),
        occurrences,
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::syntax::print(self))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print(self))
    }
}

impl serde::Serialize for Sym {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> serde::Deserialize<'de> for Sym {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Ok(Sym::new(&text))
    }
}

impl serde::Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&crate::syntax::print(self))
    }
}

impl<'de> serde::Deserialize<'de> for Formula {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        crate::syntax::parse(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn v(s: &str) -> Formula {
        Formula::var(s)
    }

    #[test]
    fn interning_gives_pointer_equality() {
        let a = Formula::imp(v("a"), Formula::or2(v("b"), v("c")));
        let b = Formula::imp(v("a"), Formula::or2(v("c"), v("b")));
        assert_eq!(a, b);
        assert_eq!(a.id(), b.id());
    }

    #[test]
    fn unit_rewrites() {
        assert_eq!(Formula::or2(v("b"), Formula::bot()), v("b"));
        assert_eq!(Formula::and2(v("b"), Formula::top()), v("b"));
        assert!(Formula::or2(v("b"), Formula::top()).is_top());
        assert!(Formula::and2(v("b"), Formula::bot()).is_bot());
        assert!(Formula::imp(v("a"), Formula::top()).is_top());
        assert_eq!(Formula::imp(Formula::top(), v("a")), v("a"));
        assert!(Formula::imp(Formula::bot(), v("a")).is_top());
        assert_eq!(Formula::and(std::iter::empty()), Formula::top());
        assert_eq!(Formula::or(std::iter::empty()), Formula::bot());
    }

    #[test]
    fn flatten_and_dedup() {
        let f = Formula::or2(Formula::and2(v("a"), v("a")), v("b"));
        assert_eq!(f, Formula::or2(v("a"), v("b")));
        let g = Formula::or2(Formula::or2(v("a"), v("b")), Formula::or2(v("c"), v("a")));
        match g.kind() {
            Kind::Or(cs) => assert_eq!(cs.len(), 3),
            _ => panic!(),
        }
    }

    #[test]
    fn natural_order_of_names() {
        let f = Formula::or([v("a10"), v("a2"), v("b")]);
        assert_eq!(f.to_string(), "a2 \\/ a10 \\/ b");
    }

    #[test]
    fn sizes() {
        assert_eq!(v("a").size(), 1);
        assert_eq!(Formula::imp(v("a"), v("b")).size(), 3);
        assert_eq!(Formula::or([v("a"), v("b"), v("c")]).size(), 4);
        assert_eq!(Formula::imp(v("a"), v("b")).imp_var_count(), 3);
    }

    #[test]
    fn substitution_examples() {
        let x = Sym::new("x");
        assert_eq!(p("b \\/ x").substitute(x, &Formula::bot()), v("b"));
        let g = p("c /\\ d");
        assert_eq!(p("x -> a").substitute(x, &g), Formula::imp(g.clone(), v("a")));
        let bound = p("mu x. (b \\/ x)");
        assert_eq!(bound.substitute(x, &v("a")), bound);
    }

    #[test]
    fn substitution_avoids_capture() {
        let x = Sym::new("x");
        let f = p("mu y. (y \\/ x)");
        let out = f.substitute(x, &v("y"));
        match out.kind() {
            Kind::Mu(b, body) => {
                assert_ne!(*b, Sym::new("y"));
                assert!(body.has_free(Sym::new("y")));
                assert!(body.has_free(*b));
            }
            _ => panic!("expected binder"),
        }
    }

    #[test]
    fn iterate_examples() {
        let x = Sym::new("x");
        assert_eq!(p("b \\/ x").iterate(x, 2, &Formula::bot()), v("b"));
        assert_eq!(p("b \\/ x").iterate(x, 0, &Formula::top()), Formula::top());
        assert_eq!(p("(x -> b) -> a").iterate(x, 1, &Formula::bot()), v("a"));
        assert_eq!(
            p("(x -> b) -> a").iterate(x, 2, &Formula::bot()),
            p("(a -> b) -> a")
        );
    }

    #[test]
    fn iterates_share_structure() {
        let x = Sym::new("x");
        let f = p("((x -> a1) -> b1) \\/ ((x -> a2) -> b2) \\/ ((x -> a3) -> b3)");
        let it = f.iterate(x, 8, &Formula::bot());
        assert!(it.dag_size() < 200);
        assert!(it.size() > 10_000);
    }

    #[test]
    fn classification_examples() {
        let x = Sym::new("x");
        assert_eq!(classify(&p("b \\/ x"), x), VarClass::StronglyPositive);
        assert_eq!(classify(&p("(x -> c) -> a"), x), VarClass::WeaklyNegative);
        assert_eq!(classify(&p("a"), x), VarClass::Absent);
        assert_eq!(classify(&p("(x -> c) -> (a \\/ x)"), x), VarClass::MixedPositive);
        assert_eq!(classify(&p("x -> a"), x), VarClass::NonPositive);
    }

    #[test]
    fn report_lists_paths() {
        let x = Sym::new("x");
        let f = p("((x -> y) -> z) \\/ (x -> w)");
        let r = polarity_report(&f, x);
        assert_eq!(r.occurrences.len(), 2);
        let signs: Vec<Sign> = r.occurrences.iter().map(|o| o.sign).collect();
        assert_eq!(signs, vec![Sign::Negative, Sign::Positive]);
        assert!(r
            .occurrences
            .iter()
            .all(|o| o.strength == Strength::WeaklyNegative));
        assert_eq!(r.occurrences[1].path, vec![1, 0, 0]);
    }

    #[test]
    fn binder_positivity_is_checked() {
        let x = Sym::new("x");
        assert!(Formula::mu(x, p("x -> a")).is_err());
        assert!(Formula::nu(x, p("(x -> a) -> b")).is_ok());
    }

    #[test]
    fn fresh_names() {
        let avoid: BTreeSet<Sym> = [Sym::new("y"), Sym::new("y1")].into_iter().collect();
        assert_eq!(fresh_sym("y", &avoid).name(), "y2");
        assert_eq!(fresh_sym("z", &avoid).name(), "z");
        assert_eq!(fresh_indexed("y", 1, &BTreeSet::new()).name(), "y1");
    }

    #[test]
    fn alpha_normalization_separates_binders() {
        let y = Sym::new("y");
        let inner = Formula::mu(y, Formula::or2(Formula::sym(y), v("a"))).unwrap();
        let f = Formula::and2(Formula::sym(y), inner);
        let g = f.alpha_normalize();
        assert_ne!(f, g);
        assert_eq!(g.alpha_normalize(), g);
        assert_eq!(parse(&g.to_string()).unwrap(), g);
    }
}
