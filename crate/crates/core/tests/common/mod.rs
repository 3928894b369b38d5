#![allow(dead_code)]

use std::sync::OnceLock;

use fixelim::gen::{Gen, Shape};
use fixelim::heyting::{small_algebras, Elem, FiniteHeytingAlgebra};
use fixelim::{Formula, Sym};
use proptest::prelude::*;

/// Uncanonicalized syntax tree, evaluated directly as an oracle.
#[derive(Clone, Debug)]
pub enum Raw {
    Var(usize),
    Top,
    Bot,
    And(Box<Raw>, Box<Raw>),
    Or(Box<Raw>, Box<Raw>),
    Imp(Box<Raw>, Box<Raw>),
}

pub const NAMES: [&str; 4] = ["a", "b", "c", "x"];

pub fn sym(i: usize) -> Sym {
    Sym::new(NAMES[i])
}

pub fn x() -> Sym {
    Sym::new("x")
}

impl Raw {
    pub fn to_formula(&self) -> Formula {
        match self {
            Raw::Var(i) => Formula::sym(sym(*i)),
            Raw::Top => Formula::top(),
            Raw::Bot => Formula::bot(),
            Raw::And(a, b) => Formula::and2(a.to_formula(), b.to_formula()),
            Raw::Or(a, b) => Formula::or2(a.to_formula(), b.to_formula()),
            Raw::Imp(a, b) => Formula::imp(a.to_formula(), b.to_formula()),
        }
    }

    /// `vals[i]` is the value of `NAMES[i]`.
    pub fn eval(&self, h: &FiniteHeytingAlgebra, vals: &[Elem]) -> Elem {
        match self {
            Raw::Var(i) => vals[*i],
            Raw::Top => h.top(),
            Raw::Bot => h.bot(),
            Raw::And(a, b) => h.meet(a.eval(h, vals), b.eval(h, vals)),
            Raw::Or(a, b) => h.join(a.eval(h, vals), b.eval(h, vals)),
            Raw::Imp(a, b) => h.imp(a.eval(h, vals), b.eval(h, vals)),
        }
    }

    /// Fully parenthesized text in the concrete syntax.
    pub fn text(&self) -> String {
        match self {
            Raw::Var(i) => NAMES[*i].to_string(),
            Raw::Top => "T".into(),
            Raw::Bot => "F".into(),
            Raw::And(a, b) => format!("({} /\\ {})", a.text(), b.text()),
            Raw::Or(a, b) => format!("({} \\/ {})", a.text(), b.text()),
            Raw::Imp(a, b) => format!("({} -> {})", a.text(), b.text()),
        }
    }
}

/// Fixpoint-free raw trees over the first `vars` names.
pub fn raw(vars: usize, depth: u32) -> impl Strategy<Value = Raw> {
    let leaf = prop_oneof![
        8 => (0..vars).prop_map(Raw::Var),
        1 => Just(Raw::Top),
        1 => Just(Raw::Bot),
    ];
    leaf.prop_recursive(depth, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Raw::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Raw::Or(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Raw::Imp(Box::new(a), Box::new(b))),
        ]
    })
}

/// Fixpoint-free formulas over `a, b, c` and, when `with_x`, `x`.
pub fn formula(with_x: bool, depth: u32) -> impl Strategy<Value = Formula> {
    raw(if with_x { 4 } else { 3 }, depth).prop_map(|r| r.to_formula())
}

/// μ-IPC formulas from the seeded generator.
pub fn mu_formula(shape: Shape) -> impl Strategy<Value = Formula> {
    any::<u64>().prop_map(move |seed| Gen::new(seed).mu_formula(shape))
}

pub fn positive_body(max_size: usize) -> impl Strategy<Value = Formula> {
    any::<u64>().prop_map(move |seed| {
        Gen::new(seed).positive_body(x(), &fixelim::gen::atoms(2), max_size)
    })
}

pub fn strongly_positive_body(max_size: usize) -> impl Strategy<Value = Formula> {
    any::<u64>().prop_map(move |seed| {
        Gen::new(seed).strongly_positive_body(x(), &fixelim::gen::atoms(3), max_size)
    })
}

/// Every Heyting algebra with at most `n` elements, built once.
pub fn algebras(n: usize) -> &'static [FiniteHeytingAlgebra] {
    static CACHE: OnceLock<Vec<Vec<FiniteHeytingAlgebra>>> = OnceLock::new();
    let all = CACHE.get_or_init(|| (0..=8).map(small_algebras).collect());
    &all[n.min(8)]
}

/// Calls `f` with every tuple of `k` elements.
pub fn tuples(h: &FiniteHeytingAlgebra, k: usize, mut f: impl FnMut(&[Elem])) {
    fixelim::heyting::for_each_assignment(h, k, |v| {
        f(v);
        true
    });
}
