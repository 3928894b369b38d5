//! Structured records of elimination runs.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::formula::Formula;
use crate::prover::with_prover;

/// Pipeline stage that produced a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    Split,
    NormalForm,
    DisjunctiveMu,
    WnDecompose,
    BekicStep,
    NuTop,
    Rolling,
    Recurse,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub step: usize,
    pub rule: Rule,
    pub input: Formula,
    pub output: Formula,
}

/// A claimed provable equivalence `lhs ≡ rhs`. `verified` stays `None`
/// until the prover has looked at it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Obligation {
    pub lhs: Formula,
    pub rhs: Formula,
    pub verified: Option<bool>,
}

impl Obligation {
    pub fn new(lhs: Formula, rhs: Formula) -> Obligation {
        Obligation {
            lhs,
            rhs,
            verified: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub steps: Vec<Step>,
    pub obligations: Vec<Obligation>,
    pub verified: Option<bool>,
}

impl Trace {
    pub fn new() -> Trace {
        Trace::default()
    }

    pub fn step(&mut self, rule: Rule, input: &Formula, output: &Formula) {
        let step = self.steps.len();
        self.steps.push(Step {
            step,
            rule,
            input: input.clone(),
            output: output.clone(),
        });
    }

    pub fn oblige(&mut self, lhs: Formula, rhs: Formula) {
        if lhs != rhs {
            self.obligations.push(Obligation::new(lhs, rhs));
        }
    }

    pub fn append(&mut self, other: Trace) {
        let base = self.steps.len();
        self.steps.extend(other.steps.into_iter().map(|mut s| {
            s.step += base;
            s
        }));
        self.obligations.extend(other.obligations);
    }

    /// Discharges every pending obligation with the prover. Returns whether
    /// all of them hold; the result is also stored in `verified`.
    pub fn verify(&mut self) -> Result<bool> {
        let mut all = true;
        with_prover(|p| -> Result<()> {
            for ob in &mut self.obligations {
                if ob.verified.is_none() {
                    ob.verified = Some(p.equiv(&ob.lhs, &ob.rhs)?);
                }
                all &= ob.verified == Some(true);
            }
            Ok(())
        })?;
        self.verified = Some(all);
        Ok(all)
    }

    /// First obligation the prover rejected, if any.
    pub fn failed(&self) -> Option<&Obligation> {
        self.obligations.iter().find(|o| o.verified == Some(false))
    }
}
