use std::collections::BTreeSet;

use crate::model::{AgentId, EventId, StateId, EPSILON};
use crate::semantics::Model;

/// The model as seen by one agent: proper events of other agents become ε,
/// and only the agent's own choice is kept on labels.
#[derive(Clone, Debug)]
pub struct Projection {
    pub agent: AgentId,
    /// Per state: `(choice, event, target)`, sorted; `event` is ε for moves
    /// that do not involve the agent and for ε-loops.
    pub transitions: Vec<Vec<(u32, EventId, StateId)>>,
}

impl Projection {
    /// ε-successors of `s`, ignoring choice labels.
    pub fn eps_successors(&self, s: StateId) -> impl Iterator<Item = StateId> + '_ {
        self.transitions[s.index()]
            .iter()
            .filter(|t| t.1 == EPSILON)
            .map(|t| t.2)
    }

    /// Proper transitions of the agent at `s` under `choice`.
    pub fn proper_under(&self, s: StateId, choice: u32) -> impl Iterator<Item = (EventId, StateId)> + '_ {
        self.transitions[s.index()]
            .iter()
            .filter(move |t| t.0 == choice && t.1 != EPSILON)
            .map(|t| (t.1, t.2))
    }
}

pub fn project(model: &Model, agent: AgentId) -> Projection {
    let module = model.amas().agent(agent);
    let transitions = model
        .state_ids()
        .map(|s| {
            let local = model.state(s).local(agent);
            let choices = module.choices(local);
            let mut out = BTreeSet::new();
            for m in model.moves(s) {
                if module.events.contains(&m.event) {
                    for (c, choice) in choices.iter().enumerate() {
                        if choice.contains(m.event) {
                            out.insert((c as u32, m.event, m.target));
                        }
                    }
                } else {
                    for c in 0..choices.len() {
                        out.insert((c as u32, EPSILON, m.target));
                    }
                }
            }
            for tuple in model.deadlocks(s) {
                out.insert((tuple.choice(agent) as u32, EPSILON, s));
            }
            out.into_iter().collect()
        })
        .collect();
    Projection { agent, transitions }
}

/// Least superset of `seed` closed under the projection's ε-transitions.
/// Returned sorted.
pub fn eps_closure(projection: &Projection, seed: impl IntoIterator<Item = StateId>) -> Vec<StateId> {
    let mut seen: BTreeSet<StateId> = BTreeSet::new();
    let mut stack: Vec<StateId> = Vec::new();
    for s in seed {
        if seen.insert(s) {
            stack.push(s);
        }
    }
    while let Some(s) = stack.pop() {
        for t in projection.eps_successors(s) {
            if seen.insert(t) {
                stack.push(t);
            }
        }
    }
    seen.into_iter().collect()
}
