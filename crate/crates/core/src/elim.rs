//! Fixed-point elimination: `μ` and `ν` binders are replaced by provably
//! equivalent fixed-point-free formulas.

use std::collections::BTreeSet;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{classify, fresh_indexed, Formula, Kind, Sym, VarClass};
use crate::normal::{head_side, split, to_normal_form};
use crate::prover::with_prover;
use crate::trace::{Rule, Trace};

fn require_positive(f: &Formula, x: Sym) -> Result<VarClass> {
    let class = classify(f, x);
    if !class.is_positive() {
        return Err(Error::NotPositiveVar(x.name().to_owned()));
    }
    Ok(class)
}

fn require_fixpoint_free(f: &Formula) -> Result<()> {
    if f.is_fixpoint_free() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "formula still contains fixed-point binders".into(),
        ))
    }
}

/// `νx.f = f(⊤)`.
pub fn nu_eliminate(f: &Formula, x: Sym) -> Result<Formula> {
    let mut trace = Trace::new();
    nu_traced(f, x, &mut trace)
}

fn nu_traced(f: &Formula, x: Sym, trace: &mut Trace) -> Result<Formula> {
    require_positive(f, x)?;
    require_fixpoint_free(f)?;
    let out = f.substitute(x, &Formula::top());
    trace.step(Rule::NuTop, f, &out);
    trace.oblige(out.clone(), f.substitute(x, &out));
    Ok(out)
}

/// `μx.d = (⋀ Head(d)) → (⋁ Side(d))` for `d` disjunctive in `x`.
pub fn mu_disjunctive(d: &Formula, x: Sym) -> Result<Formula> {
    let hs = head_side(d, x)?;
    Ok(Formula::imp(Formula::and(hs.head), Formula::or(hs.side)))
}

/// `f = psi0[psis/vars]`, with every `vars[i]` negative in `psi0` and `x`
/// negative in every `psis[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WnDecomposition {
    pub var: Sym,
    pub psi0: Formula,
    pub vars: Vec<Sym>,
    pub psis: Vec<Formula>,
}

impl WnDecomposition {
    pub fn recompose(&self) -> Formula {
        let map: Vec<_> = self
            .vars
            .iter()
            .copied()
            .zip(self.psis.iter().cloned())
            .collect();
        self.psi0.substitute_many(&map)
    }
}

/// Cuts `f` at every maximal antecedent containing `x`. Identical
/// antecedents share one variable; variables are numbered in the order
/// the walk meets them.
pub fn wn_decompose(f: &Formula, x: Sym) -> Result<WnDecomposition> {
    match require_positive(f, x)? {
        VarClass::Absent | VarClass::WeaklyNegative => {}
        _ => return Err(Error::NotWeaklyNegative(x.name().to_owned())),
    }
    require_fixpoint_free(f)?;
    let mut avoid = f.all_vars();
    avoid.insert(x);
    let mut st = Cut {
        x,
        avoid,
        vars: Vec::new(),
        psis: Vec::new(),
        memo: FxHashMap::default(),
    };
    let psi0 = st.walk(f);
    Ok(WnDecomposition {
        var: x,
        psi0,
        vars: st.vars,
        psis: st.psis,
    })
}

struct Cut {
    x: Sym,
    avoid: BTreeSet<Sym>,
    vars: Vec<Sym>,
    psis: Vec<Formula>,
    memo: FxHashMap<u64, Formula>,
}

impl Cut {
    fn walk(&mut self, f: &Formula) -> Formula {
        if !f.has_free(self.x) {
            return f.clone();
        }
        if let Some(r) = self.memo.get(&f.id()) {
            return r.clone();
        }
        let out = match f.kind() {
            Kind::And(cs) => Formula::and(cs.iter().map(|c| self.walk(c)).collect::<Vec<_>>()),
            Kind::Or(cs) => Formula::or(cs.iter().map(|c| self.walk(c)).collect::<Vec<_>>()),
            Kind::Imp(a, b) => {
                let a2 = if a.has_free(self.x) {
                    Formula::sym(self.var_for(a))
                } else {
                    a.clone()
                };
                Formula::imp(a2, self.walk(b))
            }
            _ => unreachable!("weakly negative occurrences sit under antecedents"),
        };
        self.memo.insert(f.id(), out.clone());
        out
    }

    fn var_for(&mut self, a: &Formula) -> Sym {
        if let Some(i) = self.psis.iter().position(|p| p == a) {
            return self.vars[i];
        }
        let y = fresh_indexed("y", 1, &self.avoid);
        self.avoid.insert(y);
        self.vars.push(y);
        self.psis.push(a.clone());
        y
    }
}

/// The system `vars[i] = rhs[i]`, whose greatest solution is wanted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GfpSystem {
    pub vars: Vec<Sym>,
    pub rhs: Vec<Formula>,
}

impl GfpSystem {
    /// `yᵢ = ψᵢ(ψ₀(y⃗))`.
    pub fn from_decomposition(d: &WnDecomposition) -> GfpSystem {
        GfpSystem {
            vars: d.vars.clone(),
            rhs: d.psis.iter().map(|p| p.substitute(d.var, &d.psi0)).collect(),
        }
    }
}

/// Greatest solution by Bekić elimination, solving the last variable
/// first. Each one-variable greatest fixed point is obtained by
/// substituting `⊤`.
pub fn solve_gfp_system(sys: &GfpSystem) -> Result<Vec<Formula>> {
    let mut trace = Trace::new();
    solve_traced(sys, &mut trace)
}

fn solve_traced(sys: &GfpSystem, trace: &mut Trace) -> Result<Vec<Formula>> {
    let n = sys.vars.len();
    if sys.rhs.len() != n {
        return Err(Error::MalformedSystem(format!(
            "{} variables but {} equations",
            n,
            sys.rhs.len()
        )));
    }
    let distinct: BTreeSet<_> = sys.vars.iter().collect();
    if distinct.len() != n {
        return Err(Error::MalformedSystem("repeated variable".into()));
    }
    for (i, r) in sys.rhs.iter().enumerate() {
        require_fixpoint_free(r)?;
        for y in &sys.vars {
            if !classify(r, *y).is_positive() {
                return Err(Error::MalformedSystem(format!(
                    "{y} is not positive in equation {}",
                    i + 1
                )));
            }
        }
    }
    let top = Formula::top();
    let mut eqs = sys.rhs.clone();
    let mut solved: Vec<Formula> = vec![top.clone(); n];
    for k in (0..n).rev() {
        let s = eqs[k].substitute(sys.vars[k], &top);
        trace.step(Rule::BekicStep, &eqs[k], &s);
        for e in eqs.iter_mut().take(k) {
            *e = e.substitute(sys.vars[k], &s);
        }
        solved[k] = s;
    }
    let mut nus: Vec<Formula> = Vec::with_capacity(n);
    for k in 0..n {
        let map: Vec<_> = sys.vars[..k]
            .iter()
            .copied()
            .zip(nus.iter().cloned())
            .collect();
        nus.push(solved[k].substitute_many(&map));
    }
    let all: Vec<_> = sys.vars.iter().copied().zip(nus.iter().cloned()).collect();
    for (nu, r) in nus.iter().zip(&sys.rhs) {
        trace.oblige(nu.clone(), r.substitute_many(&all));
    }
    Ok(nus)
}

/// `μx.f` for `f` weakly negative in `x`.
pub fn mu_weakly_negative(f: &Formula, x: Sym) -> Result<Formula> {
    let mut trace = Trace::new();
    mu_wn_traced(f, x, &mut trace)
}

fn mu_wn_traced(f: &Formula, x: Sym, trace: &mut Trace) -> Result<Formula> {
    let d = wn_decompose(f, x)?;
    if d.vars.is_empty() {
        return Ok(f.clone());
    }
    trace.step(Rule::WnDecompose, f, &d.psi0);
    let sys = GfpSystem::from_decomposition(&d);
    let nus = solve_traced(&sys, trace)?;
    let map: Vec<_> = d.vars.iter().copied().zip(nus).collect();
    let out = d.psi0.substitute_many(&map);
    trace.step(Rule::Rolling, &d.psi0, &out);
    trace.oblige(out.clone(), f.substitute(x, &out));
    Ok(out)
}

/// `μx.f` for fixed-point-free `f` positive in `x`.
pub fn mu_eliminate(f: &Formula, x: Sym) -> Result<(Formula, Trace)> {
    let mut trace = Trace::new();
    let out = mu_traced(f, x, &mut trace)?;
    Ok((out, trace))
}

fn mu_traced(f: &Formula, x: Sym, trace: &mut Trace) -> Result<Formula> {
    let class = require_positive(f, x)?;
    require_fixpoint_free(f)?;
    match class {
        VarClass::Absent => Ok(f.clone()),
        VarClass::WeaklyNegative => mu_wn_traced(f, x, trace),
        VarClass::StronglyPositive => mu_strong(f, x, trace),
        VarClass::MixedPositive => {
            let s = split(f, x)?;
            trace.step(Rule::Split, f, &s.renamed);
            let chi = mu_strong(&s.renamed, x, trace)?;
            let out = match classify(&chi, s.wneg_var) {
                VarClass::Absent => chi,
                VarClass::WeaklyNegative => {
                    let out = mu_wn_traced(&chi, s.wneg_var, trace)?;
                    trace.oblige(out.clone(), f.substitute(x, &out));
                    out
                }
                other => {
                    return Err(Error::VerificationFailed(format!(
                        "renamed variable classified {other:?} after strongly positive elimination"
                    )))
                }
            };
            Ok(out)
        }
        VarClass::NonPositive => unreachable!(),
    }
}

// Normal form, then the closed form per disjunct; x-free conjuncts pass
// through.
fn mu_strong(f: &Formula, x: Sym, trace: &mut Trace) -> Result<Formula> {
    let nf = to_normal_form(f, x)?;
    let nf_formula = nf.to_formula();
    trace.step(Rule::NormalForm, f, &nf_formula);
    trace.oblige(f.clone(), nf_formula);
    let mut parts = vec![nf.x_free_part.clone()];
    for d in &nf.disjuncts {
        let m = mu_disjunctive(d, x)?;
        trace.step(Rule::DisjunctiveMu, d, &m);
        trace.oblige(m.clone(), d.substitute(x, &m));
        parts.push(m);
    }
    let out = Formula::and(parts);
    trace.oblige(out.clone(), f.substitute(x, &out));
    Ok(out)
}

/// Options for [`eliminate_all_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ElimOptions {
    /// Discharge every obligation with the prover.
    pub verify: bool,
    /// Run [`simplify`] on the result.
    pub simplify: bool,
}

/// Removes every binder, innermost first.
pub fn eliminate_all(f: &Formula) -> Result<(Formula, Trace)> {
    eliminate_all_with(f, ElimOptions::default())
}

pub fn eliminate_all_with(f: &Formula, opts: ElimOptions) -> Result<(Formula, Trace)> {
    let mut trace = Trace::new();
    let mut memo = FxHashMap::default();
    let mut out = elim_rec(&f.alpha_normalize(), &mut trace, &mut memo)?;
    if opts.simplify {
        let s = simplify(&out)?;
        if s != out {
            trace.oblige(out.clone(), s.clone());
            out = s;
        }
    }
    if opts.verify {
        trace.verify()?;
    }
    Ok((out, trace))
}

fn elim_rec(f: &Formula, trace: &mut Trace, memo: &mut FxHashMap<u64, Formula>) -> Result<Formula> {
    if f.is_fixpoint_free() {
        return Ok(f.clone());
    }
    if let Some(r) = memo.get(&f.id()) {
        return Ok(r.clone());
    }
    let out = match f.kind() {
        Kind::And(cs) => {
            let parts = cs
                .iter()
                .map(|c| elim_rec(c, trace, memo))
                .collect::<Result<Vec<_>>>()?;
            Formula::and(parts)
        }
        Kind::Or(cs) => {
            let parts = cs
                .iter()
                .map(|c| elim_rec(c, trace, memo))
                .collect::<Result<Vec<_>>>()?;
            Formula::or(parts)
        }
        Kind::Imp(a, b) => {
            let a2 = elim_rec(a, trace, memo)?;
            Formula::imp(a2, elim_rec(b, trace, memo)?)
        }
        Kind::Mu(x, b) => {
            let body = elim_rec(b, trace, memo)?;
            let out = mu_traced(&body, *x, trace)?;
            trace.step(Rule::Recurse, f, &out);
            out
        }
        Kind::Nu(x, b) => {
            let body = elim_rec(b, trace, memo)?;
            let out = nu_traced(&body, *x, trace)?;
            trace.step(Rule::Recurse, f, &out);
            out
        }
        Kind::Var(_) | Kind::Top | Kind::Bot => f.clone(),
    };
    memo.insert(f.id(), out.clone());
    Ok(out)
}

/// Bottom-up pruning: a subformula becomes `⊤` when it is valid and `⊥`
/// when it entails `⊥`. The result is provably equivalent to the input.
pub fn simplify(f: &Formula) -> Result<Formula> {
    require_fixpoint_free(f)?;
    with_prover(|p| {
        let mut memo: FxHashMap<u64, Formula> = FxHashMap::default();
        simp_rec(f, p, &mut memo)
    })
}

fn simp_rec(
    f: &Formula,
    p: &mut crate::prover::Prover,
    memo: &mut FxHashMap<u64, Formula>,
) -> Result<Formula> {
    if let Some(r) = memo.get(&f.id()) {
        return Ok(r.clone());
    }
    let rebuilt = match f.kind() {
        Kind::And(cs) => Formula::and(
            cs.iter()
                .map(|c| simp_rec(c, p, memo))
                .collect::<Result<Vec<_>>>()?,
        ),
        Kind::Or(cs) => Formula::or(
            cs.iter()
                .map(|c| simp_rec(c, p, memo))
                .collect::<Result<Vec<_>>>()?,
        ),
        Kind::Imp(a, b) => {
            let a2 = simp_rec(a, p, memo)?;
            Formula::imp(a2, simp_rec(b, p, memo)?)
        }
        _ => f.clone(),
    };
    let out = if rebuilt.is_top() || rebuilt.is_bot() || rebuilt.as_var().is_some() {
        rebuilt
    } else if p.valid(&rebuilt)? {
        Formula::top()
    } else if p.entails(std::slice::from_ref(&rebuilt), &Formula::bot())? {
        Formula::bot()
    } else {
        rebuilt
    };
    memo.insert(f.id(), out.clone());
    Ok(out)
}
