//! Execution semantics: the I/O iCGS of an AMAS, enabled events, outcome
//! subgraphs of memoryless strategies and the simple-ATL checker.

mod check;
mod dot;
mod explore;
mod model;
mod modelfile;
mod outcome;
mod strategy;

pub use check::{all_paths_satisfy, check_ir, check_strategic, IrVerdict, ModalityResult};
pub use dot::{export_dot, outcome_dot, DotOptions};
pub use explore::Explorer;
pub use model::{build_model, Model, Move, Transition};
pub use modelfile::{digest, parse_model_file, serialize_model, ModelFile, ModelKind};
pub use outcome::{outcome_subgraph, OutcomeGraph};
pub use strategy::{StrategyIr, StrategySpace};

use std::fmt;

use thiserror::Error;

use crate::model::{AgentId, LocalId};

/// A tuple of local states, one per agent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalState(pub Vec<LocalId>);

impl GlobalState {
    /// Agent `i`'s component.
    pub fn local(&self, agent: AgentId) -> LocalId {
        self.0[agent.index()]
    }

    pub fn locals(&self) -> &[LocalId] {
        &self.0
    }
}

/// Per-agent choice, as an index into the agent's repertoire at the source
/// local state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChoiceTuple(pub Vec<u32>);

impl ChoiceTuple {
    pub fn choice(&self, agent: AgentId) -> usize {
        self.0[agent.index()] as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutcomeMode {
    /// Opponents choose freely, including miscoordination.
    Std,
    /// ε-steps only where the coalition's own choices deadlock.
    React,
}

impl fmt::Display for OutcomeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutcomeMode::Std => "std",
            OutcomeMode::React => "react",
        })
    }
}

/// Resource bounds for exploration and strategy enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_states: usize,
    pub max_strategies: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_states: 2_000_000,
            max_strategies: 10_000_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("model too large: more than {limit} states")]
    ModelTooLarge { limit: usize },
    #[error("enumeration too large: {count} strategies exceed the limit of {limit}")]
    EnumerationTooLarge { count: u128, limit: u128 },
    #[error("unknown state")]
    UnknownState,
    #[error("choice {choice} not in repertoire of agent {} at this state", .agent.0 + 1)]
    ChoiceNotInRepertoire { agent: AgentId, choice: usize },
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("formula refers to unknown agent {}", .0 .0 + 1)]
    UnknownAgent(AgentId),
    #[error("malformed model file: line {line}: {message}")]
    ModelFile { line: usize, message: String },
}
