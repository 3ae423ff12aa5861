use std::collections::{HashMap, VecDeque};

use crate::model::{EventId, StateId, EPSILON};

use super::{Model, OutcomeMode, StrategyIr};

/// The part of a model a strategy allows, rooted at the initial state
/// (node 0). Its infinite paths are exactly the strategy's outcome paths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeGraph {
    /// Node index → model state.
    pub nodes: Vec<StateId>,
    /// `(from, event, to)` over node indices, grouped by source node.
    pub edges: Vec<(usize, EventId, usize)>,
    /// Successor nodes, deduplicated.
    pub succ: Vec<Vec<usize>>,
}

impl OutcomeGraph {
    pub fn node_of(&self, state: StateId) -> Option<usize> {
        self.nodes.iter().position(|&s| s == state)
    }
}

/// Kept events at `state`: proper moves whose owners in the coalition chose
/// them, and ε when a deadlock tuple agrees with the strategy (React: only
/// if nothing proper is kept).
pub(crate) fn kept_events(
    model: &Model,
    state: StateId,
    partial: &[Option<u32>],
    mode: OutcomeMode,
) -> (Vec<usize>, bool) {
    let kept: Vec<usize> = model
        .moves(state)
        .iter()
        .enumerate()
        .filter(|(_, m)| model.move_agrees(state, m.event, partial))
        .map(|(i, _)| i)
        .collect();
    let eps = model.eps_agrees(state, partial)
        && match mode {
            OutcomeMode::Std => true,
            OutcomeMode::React => kept.is_empty(),
        };
    (kept, eps)
}

pub fn outcome_subgraph(model: &Model, strategy: &StrategyIr, mode: OutcomeMode) -> OutcomeGraph {
    let mut nodes = vec![model.initial()];
    let mut seen = HashMap::from([(model.initial(), 0usize)]);
    let mut edges = Vec::new();
    let mut succ = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);

    while let Some(n) = queue.pop_front() {
        let state = nodes[n];
        let partial = strategy.partial(model.state(state));
        let (kept, eps) = kept_events(model, state, &partial, mode);
        let mut targets: Vec<(EventId, StateId)> = kept
            .into_iter()
            .map(|i| {
                let m = model.moves(state)[i];
                (m.event, m.target)
            })
            .collect();
        if eps {
            targets.push((EPSILON, state));
        }
        for (event, target) in targets {
            let t = *seen.entry(target).or_insert_with(|| {
                nodes.push(target);
                succ.push(Vec::new());
                queue.push_back(nodes.len() - 1);
                nodes.len() - 1
            });
            edges.push((n, event, t));
            succ[n].push(t);
        }
        succ[n].sort_unstable();
        succ[n].dedup();
    }
    OutcomeGraph { nodes, edges, succ }
}
