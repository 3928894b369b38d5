//! Report records and their text, JSON and CSV renderings.

use std::collections::BTreeMap;

use fixelim::game::GameOutcome;
use fixelim::ordinal::BoundReport;
use fixelim::trace::Trace;
use fixelim::{Formula, Sym};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Countermodel {
    /// Poset in the `n` / `i<j` text format.
    pub poset: String,
    /// Each atom's value as the list of points of its upset.
    pub valuation: BTreeMap<String, Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub family: String,
    pub param: usize,
    pub formula: Formula,
    pub cl: usize,
    pub rho: usize,
    pub bounds: BTreeMap<String, usize>,
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Report {
    Eliminate {
        input: Formula,
        output: Formula,
        trace: Trace,
    },
    Prove {
        formula: Formula,
        derivable: bool,
        nodes: u64,
    },
    CheckEquiv {
        left: Formula,
        right: Formula,
        equivalent: bool,
        countermodel: Option<Countermodel>,
    },
    Normalize {
        input: Formula,
        var: Sym,
        x_free_part: Formula,
        disjuncts: Vec<Formula>,
        output: Formula,
    },
    ClosureOrdinal {
        formula: Formula,
        var: Sym,
        value: usize,
        cap_hit: bool,
        approximants: Vec<Formula>,
    },
    Ruitenburg {
        formula: Formula,
        var: Sym,
        value: usize,
        cap_hit: bool,
        approximants: Vec<Formula>,
    },
    Bounds {
        report: BoundReport,
    },
    Bench {
        row: BenchRow,
    },
    Game {
        formula: Formula,
        heads: usize,
        sides: usize,
        outcome: GameOutcome,
        /// Prover check of the closed form against the K-th iterate, run
        /// when Eve loses.
        closed_form_below: Option<bool>,
    },
    ModelCheck {
        formula: Formula,
        poset: String,
        valid: bool,
        countermodel: Option<Countermodel>,
    },
    Error {
        input: String,
        message: String,
    },
}

impl Report {
    /// Whether the report states a logical failure (exit status 1).
    pub fn failed(&self) -> bool {
        match self {
            Report::Eliminate { trace, .. } => trace.verified == Some(false),
            Report::Prove { derivable, .. } => !derivable,
            Report::CheckEquiv { equivalent, .. } => !equivalent,
            Report::ClosureOrdinal { cap_hit, .. } | Report::Ruitenburg { cap_hit, .. } => *cap_hit,
            Report::Game { outcome, .. } => !outcome.eve_wins_all,
            Report::ModelCheck { valid, .. } => !valid,
            Report::Error { .. } => true,
            Report::Normalize { .. } | Report::Bounds { .. } | Report::Bench { .. } => false,
        }
    }

    pub fn text(&self) -> String {
        match self {
            Report::Eliminate { output, trace, .. } => {
                let mut out = output.to_string();
                match trace.verified {
                    Some(true) => out.push_str(&format!("\nverified: {} obligations", trace.obligations.len())),
                    Some(false) => {
                        for o in trace.obligations.iter().filter(|o| o.verified == Some(false)) {
                            out.push_str(&format!("\nfailed obligation: {} == {}", o.lhs, o.rhs));
                        }
                    }
                    None => {}
                }
                out
            }
            Report::Prove { derivable, .. } => {
                if *derivable { "derivable" } else { "not derivable" }.to_string()
            }
            Report::CheckEquiv { equivalent, countermodel, .. } => {
                let mut out = if *equivalent { "equivalent" } else { "not equivalent" }.to_string();
                if let Some(c) = countermodel {
                    out.push_str(&format!("\n{}", c.text()));
                }
                out
            }
            Report::Normalize { output, .. } => output.to_string(),
            Report::ClosureOrdinal { value, cap_hit, .. } | Report::Ruitenburg { value, cap_hit, .. } => {
                if *cap_hit {
                    format!("cap {value} reached without convergence")
                } else {
                    value.to_string()
                }
            }
            Report::Bounds { report } => {
                let mut out = format!("cl = {}, rho = {}", report.cl.value, report.rho.value);
                for (name, b) in &report.cl_bounds {
                    out.push_str(&format!("\ncl <= {b} ({name})"));
                }
                for (name, b) in &report.rho_bounds {
                    out.push_str(&format!("\nrho <= {b} ({name})"));
                }
                out
            }
            Report::Bench { row } => format!(
                "{} {}: cl = {}, rho = {}, {:.3}s",
                row.family, row.param, row.cl, row.rho, row.wall_time
            ),
            Report::Game { outcome, closed_form_below, .. } => {
                if outcome.eve_wins_all {
                    format!("Eve wins every play of {} rounds", outcome.rounds)
                } else {
                    let play = outcome
                        .losing_play
                        .iter()
                        .flatten()
                        .map(|(i, j)| format!("({i},{j})"))
                        .collect::<Vec<_>>()
                        .join(" ");
                    let mut out = format!("Eve loses in {} rounds: {play}", outcome.rounds);
                    if let Some(below) = closed_form_below {
                        out.push_str(&format!("\nclosed form below iterate: {below}"));
                    }
                    out
                }
            }
            Report::ModelCheck { valid, countermodel, .. } => {
                let mut out = if *valid { "valid" } else { "refuted" }.to_string();
                if let Some(c) = countermodel {
                    out.push_str(&format!("\n{}", c.text()));
                }
                out
            }
            Report::Error { input, message } => format!("error: {message} (input: {input})"),
        }
    }

    pub fn csv_header(&self) -> Vec<&'static str> {
        match self {
            Report::Eliminate { .. } => vec!["input", "output", "verified"],
            Report::Prove { .. } => vec!["formula", "derivable"],
            Report::CheckEquiv { .. } => vec!["left", "right", "equivalent"],
            Report::Normalize { .. } => vec!["input", "output"],
            Report::ClosureOrdinal { .. } => vec!["formula", "cl", "cap_hit"],
            Report::Ruitenburg { .. } => vec!["formula", "rho", "cap_hit"],
            Report::Bounds { .. } | Report::Bench { .. } => vec!["formula", "cl", "rho", "bounds", "wall_time"],
            Report::Game { .. } => vec!["formula", "rounds", "eve_wins_all"],
            Report::ModelCheck { .. } => vec!["formula", "valid"],
            Report::Error { .. } => vec!["input", "error"],
        }
    }

    pub fn csv_row(&self) -> Vec<String> {
        let bounds = |cl: &BTreeMap<String, usize>, rho: &BTreeMap<String, usize>| {
            cl.iter()
                .map(|(k, v)| format!("cl.{k}={v}"))
                .chain(rho.iter().map(|(k, v)| format!("rho.{k}={v}")))
                .collect::<Vec<_>>()
                .join(";")
        };
        match self {
            Report::Eliminate { input, output, trace } => vec![
                input.to_string(),
                output.to_string(),
                trace.verified.map(|v| v.to_string()).unwrap_or_default(),
            ],
            Report::Prove { formula, derivable, .. } => vec![formula.to_string(), derivable.to_string()],
            Report::CheckEquiv { left, right, equivalent, .. } => {
                vec![left.to_string(), right.to_string(), equivalent.to_string()]
            }
            Report::Normalize { input, output, .. } => vec![input.to_string(), output.to_string()],
            Report::ClosureOrdinal { formula, value, cap_hit, .. }
            | Report::Ruitenburg { formula, value, cap_hit, .. } => {
                vec![formula.to_string(), value.to_string(), cap_hit.to_string()]
            }
            Report::Bounds { report } => vec![
                report.formula.to_string(),
                report.cl.value.to_string(),
                report.rho.value.to_string(),
                bounds(&report.cl_bounds, &report.rho_bounds),
                String::new(),
            ],
            Report::Bench { row } => vec![
                row.formula.to_string(),
                row.cl.to_string(),
                row.rho.to_string(),
                row.bounds.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";"),
                format!("{:.6}", row.wall_time),
            ],
            Report::Game { formula, outcome, .. } => vec![
                formula.to_string(),
                outcome.rounds.to_string(),
                outcome.eve_wins_all.to_string(),
            ],
            Report::ModelCheck { formula, valid, .. } => vec![formula.to_string(), valid.to_string()],
            Report::Error { input, message } => vec![input.clone(), message.clone()],
        }
    }
}

impl Countermodel {
    pub fn text(&self) -> String {
        let vals = self
            .valuation
            .iter()
            .map(|(k, v)| {
                let pts = v.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",");
                format!("{k}={{{pts}}}")
            })
            .collect::<Vec<_>>()
            .join(" ");
        let order = self.poset.trim().replace('\n', " ");
        format!("countermodel on poset [{order}]: {vals}")
    }
}
