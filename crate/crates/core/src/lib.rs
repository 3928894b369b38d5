//! Fixed-point elimination for the intuitionistic propositional mu-calculus.
pub mod elim;
pub mod error;
pub mod formula;
pub mod game;
pub mod gen;
pub mod heyting;
pub mod normal;
pub mod ordinal;
pub mod prover;
pub mod syntax;
pub mod trace;

pub use error::{Error, Result};
pub use formula::{classify, polarity_report, Formula, Kind, PolarityReport, Sym, VarClass};
pub use syntax::{parse, print};
