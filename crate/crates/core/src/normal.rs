//! Strength splitting, the conjunction-of-disjunctive normal form, and
//! head/side extraction.

use std::collections::BTreeSet;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{classify, fresh_sym, Formula, Kind, Sym, VarClass};
use crate::trace::Obligation;

/// `renamed[x/wneg_var]` is the original formula.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitResult {
    pub renamed: Formula,
    pub spos_var: Sym,
    pub wneg_var: Sym,
}

impl SplitResult {
    /// Whether any occurrence was renamed.
    pub fn uses_wneg(&self) -> bool {
        self.renamed.has_free(self.wneg_var)
    }

    pub fn restore(&self) -> Formula {
        self.renamed
            .substitute(self.wneg_var, &Formula::sym(self.spos_var))
    }
}

/// Renames the weakly negative occurrences of `x` to a fresh variable, so
/// that what remains of `x` is strongly positive.
pub fn split(f: &Formula, x: Sym) -> Result<SplitResult> {
    if !classify(f, x).is_positive() {
        return Err(Error::NotPositiveVar(x.name().to_owned()));
    }
    let mut avoid = f.all_vars();
    avoid.insert(x);
    let y = fresh_sym("y", &avoid);
    let yf = Formula::sym(y);
    let mut memo = FxHashMap::default();
    let renamed = rename_weak(f, x, &yf, false, &mut memo);
    Ok(SplitResult {
        renamed,
        spos_var: x,
        wneg_var: y,
    })
}

fn rename_weak(
    f: &Formula,
    x: Sym,
    y: &Formula,
    weak: bool,
    memo: &mut FxHashMap<(u64, bool), Formula>,
) -> Formula {
    if !f.has_free(x) {
        return f.clone();
    }
    if let Some(r) = memo.get(&(f.id(), weak)) {
        return r.clone();
    }
    let out = match f.kind() {
        Kind::Var(_) => {
            if weak {
                y.clone()
            } else {
                f.clone()
            }
        }
        Kind::And(cs) => Formula::and(cs.iter().map(|c| rename_weak(c, x, y, weak, memo))),
        Kind::Or(cs) => Formula::or(cs.iter().map(|c| rename_weak(c, x, y, weak, memo))),
        Kind::Imp(a, b) => {
            let a2 = rename_weak(a, x, y, true, memo);
            Formula::imp(a2, rename_weak(b, x, y, weak, memo))
        }
        Kind::Mu(v, b) => Formula::mu(*v, rename_weak(b, x, y, weak, memo))
            .expect("renaming preserves positivity"),
        Kind::Nu(v, b) => Formula::nu(*v, rename_weak(b, x, y, weak, memo))
            .expect("renaming preserves positivity"),
        Kind::Top | Kind::Bot => f.clone(),
    };
    memo.insert((f.id(), weak), out.clone());
    out
}

/// `x_free_part ∧ ⋀ disjuncts` is equivalent to the source formula.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalForm {
    pub var: Sym,
    pub x_free_part: Formula,
    pub disjuncts: Vec<Formula>,
}

impl NormalForm {
    pub fn to_formula(&self) -> Formula {
        Formula::and(
            std::iter::once(self.x_free_part.clone()).chain(self.disjuncts.iter().cloned()),
        )
    }

    /// The equivalence between the source and the normal form.
    pub fn obligation(&self, source: &Formula) -> Obligation {
        Obligation::new(source.clone(), self.to_formula())
    }
}

/// Computes `c(f)` and `tr(f)` and packages them as a normal form.
pub fn to_normal_form(f: &Formula, x: Sym) -> Result<NormalForm> {
    match classify(f, x) {
        VarClass::Absent => return Err(Error::VarAbsent(x.name().to_owned())),
        VarClass::StronglyPositive => {}
        _ => return Err(Error::NotStronglyPositive(x.name().to_owned())),
    }
    let (tr, c) = tr_c(f, x)?;
    let mut x_free = vec![c];
    let mut disjuncts = BTreeSet::new();
    for d in tr {
        if d.has_free(x) {
            disjuncts.insert(d);
        } else {
            x_free.push(d);
        }
    }
    Ok(NormalForm {
        var: x,
        x_free_part: Formula::and(x_free),
        disjuncts: disjuncts.into_iter().collect(),
    })
}

type TrC = (Vec<Formula>, Formula);

fn tr_c(f: &Formula, x: Sym) -> Result<TrC> {
    match f.kind() {
        Kind::Var(v) if *v == x => Ok((vec![Formula::sym(x)], Formula::top())),
        Kind::Imp(a, b) => {
            let (tr, c) = tr_c(b, x)?;
            Ok((
                tr.into_iter().map(|d| Formula::imp(a.clone(), d)).collect(),
                Formula::imp(a.clone(), c),
            ))
        }
        Kind::Or(cs) => {
            let (side, with_x): (Vec<_>, Vec<_>) = cs.iter().partition(|c| !c.has_free(x));
            let mut acc: Option<TrC> = None;
            for child in with_x {
                let (tr2, c2) = tr_c(child, x)?;
                acc = Some(match acc {
                    None => (tr2, c2),
                    Some((tr1, c1)) => {
                        let mut tr = Vec::new();
                        tr.extend(tr2.iter().map(|d2| Formula::or2(c1.clone(), d2.clone())));
                        tr.extend(tr1.iter().map(|d1| Formula::or2(c2.clone(), d1.clone())));
                        for d1 in &tr1 {
                            tr.extend(tr2.iter().map(|d2| Formula::or2(d1.clone(), d2.clone())));
                        }
                        dedup(&mut tr);
                        (tr, Formula::or2(c1, c2))
                    }
                });
            }
            let (tr, c) = acc.expect("x occurs in some disjunct");
            if side.is_empty() {
                return Ok((tr, c));
            }
            let beta = Formula::or(side.into_iter().cloned());
            Ok((
                tr.into_iter()
                    .map(|d| Formula::or2(beta.clone(), d))
                    .collect(),
                Formula::or2(beta, c),
            ))
        }
        Kind::And(cs) => {
            let mut tr = Vec::new();
            let mut c = Vec::new();
            for child in cs.iter() {
                if child.has_free(x) {
                    let (t, ci) = tr_c(child, x)?;
                    tr.extend(t);
                    c.push(ci);
                } else {
                    c.push(child.clone());
                }
            }
            dedup(&mut tr);
            Ok((tr, Formula::and(c)))
        }
        Kind::Mu(..) | Kind::Nu(..) => Err(Error::InvalidArgument(format!(
            "{x} occurs under a fixed-point binder"
        ))),
        _ => unreachable!("x-free subformulas are handled by the caller"),
    }
}

fn dedup(v: &mut Vec<Formula>) {
    v.sort();
    v.dedup();
}

/// Membership in the disjunctive grammar `x | α → φ | β ∨ φ | φ ∨ φ`.
pub fn is_disjunctive(f: &Formula, x: Sym) -> bool {
    match f.kind() {
        Kind::Var(v) => *v == x,
        Kind::Imp(a, b) => !a.has_free(x) && is_disjunctive(b, x),
        Kind::Or(cs) => {
            let mut any = false;
            for c in cs.iter().filter(|c| c.has_free(x)) {
                if !is_disjunctive(c, x) {
                    return false;
                }
                any = true;
            }
            any
        }
        _ => false,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadSide {
    pub head: BTreeSet<Formula>,
    pub side: BTreeSet<Formula>,
}

/// Head (antecedent) and side (x-free disjunct) leaves of a disjunctive
/// formula. Each x-free child of a disjunction is its own side formula.
pub fn head_side(d: &Formula, x: Sym) -> Result<HeadSide> {
    if !is_disjunctive(d, x) {
        return Err(Error::NotDisjunctive(x.name().to_owned()));
    }
    let mut out = HeadSide::default();
    collect(d, x, &mut out);
    Ok(out)
}

fn collect(f: &Formula, x: Sym, out: &mut HeadSide) {
    match f.kind() {
        Kind::Imp(a, b) => {
            out.head.insert(a.clone());
            collect(b, x, out);
        }
        Kind::Or(cs) => {
            for c in cs.iter() {
                if c.has_free(x) {
                    collect(c, x, out);
                } else {
                    out.side.insert(c.clone());
                }
            }
        }
        _ => {}
    }
}
