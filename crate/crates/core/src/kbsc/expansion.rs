use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::model::{AgentId, EventId, LocalId, StateId};
use crate::semantics::Model;

use super::projection::{eps_closure, Projection};

/// The knowledge-state automaton of one agent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentExpansion {
    pub agent: AgentId,
    /// Knowledge states as sorted global-state lists, in discovery order;
    /// index 0 is the initial one.
    pub states: Vec<Vec<StateId>>,
    /// The agent's local state shared by all members of each knowledge state.
    pub locs: Vec<LocalId>,
    /// `(from, event, to)` over knowledge-state indices.
    pub transitions: BTreeSet<(usize, EventId, usize)>,
    /// Successor knowledge states reached under each `(state, choice)`.
    pub successors: BTreeMap<(usize, u32), Vec<usize>>,
}

impl AgentExpansion {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Worklist subset construction: from each knowledge state and each choice,
/// collect the agent's proper successors, close them under ε and split the
/// result by the agent's local state.
pub fn expand(model: &Model, projection: &Projection) -> AgentExpansion {
    let agent = projection.agent;
    let module = model.amas().agent(agent);
    let loc = |s: StateId| model.state(s).local(agent);

    let initial = eps_closure(projection, [model.initial()]);
    let mut index: HashMap<Vec<StateId>, usize> = HashMap::new();
    index.insert(initial.clone(), 0);
    let mut states = vec![initial];
    let mut locs = vec![loc(model.initial())];
    let mut transitions = BTreeSet::new();
    let mut successors = BTreeMap::new();
    let mut queue = VecDeque::from([0usize]);

    while let Some(k) = queue.pop_front() {
        let here = locs[k];
        for c in 0..module.choices(here).len() as u32 {
            let mut steps: Vec<(StateId, EventId, StateId)> = Vec::new();
            for &g in &states[k] {
                for (event, target) in projection.proper_under(g, c) {
                    steps.push((g, event, target));
                }
            }
            let closure = eps_closure(projection, steps.iter().map(|s| s.2));
            let mut parts: BTreeMap<LocalId, Vec<StateId>> = BTreeMap::new();
            for s in closure {
                parts.entry(loc(s)).or_default().push(s);
            }
            let mut reached = Vec::new();
            let mut part_index: BTreeMap<LocalId, usize> = BTreeMap::new();
            for (l, part) in parts {
                let id = match index.get(&part) {
                    Some(&id) => id,
                    None => {
                        let id = states.len();
                        index.insert(part.clone(), id);
                        states.push(part);
                        locs.push(l);
                        queue.push_back(id);
                        id
                    }
                };
                part_index.insert(l, id);
                reached.push(id);
            }
            for (_, event, target) in steps {
                transitions.insert((k, event, part_index[&loc(target)]));
            }
            successors.insert((k, c), reached);
        }
    }

    AgentExpansion {
        agent,
        states,
        locs,
        transitions,
        successors,
    }
}
