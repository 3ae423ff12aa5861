//! Text formats: the AMAS description language and the formula grammar.
//!
//! An AMAS source is a sequence of agent blocks:
//!
//! ```text
//! agent Voter1 {
//!   states q0, q_a, q_b
//!   init q0
//!   events vote_1_a, vote_1_b
//!   transitions
//!     q0 -vote_1_a-> q_a
//!     q0 -vote_1_b-> q_b
//!   repertoire
//!     q0: [{vote_1_a}, {vote_1_b}]
//!     q_a: [{vote_1_a}]
//!     q_b: [{vote_1_b}]
//!   labels
//!     q_a: voted_1_a
//! }
//! ```
//!
//! Events are shared by name: an event declared by two agents synchronises
//! them. Formulas use `<<A,B>>`, `F G U R`, `! & |` and parentheses.

mod amas;
mod formula;
mod lexer;

pub use amas::{parse_amas, parse_amas_unchecked, render};
pub use formula::{parse_formula, parse_spec_file, Formula, Goal, PropFormula, Strategic};
pub use lexer::Pos;

use thiserror::Error;

use crate::model::Diagnostic;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DslError {
    #[error("{}:{}: {message}", pos.line, pos.col)]
    Syntax { pos: Pos, message: String },
    #[error("invalid AMAS: {}", join_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
}

impl DslError {
    pub(crate) fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        DslError::Syntax {
            pos,
            message: message.into(),
        }
    }

    pub fn message(&self) -> String {
        match self {
            DslError::Syntax { message, .. } => message.clone(),
            DslError::Invalid(diags) => join_diagnostics(diags),
        }
    }
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
