use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use crate::model::{AgentId, Amas, EventId, PropId, StateId, EPSILON};

use super::explore::{Explorer, TupleIter};
use super::{ChoiceTuple, GlobalState, Limits, SemanticsError};

/// A proper (non-ε) transition out of a state, independent of choices: it
/// fires under every choice tuple whose owners' choices contain `event`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    pub event: EventId,
    pub target: StateId,
}

/// One explicit I/O transition `(g, in, out, g')`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub source: StateId,
    pub input: ChoiceTuple,
    pub event: EventId,
    pub target: StateId,
}

/// The I/O iCGS of an AMAS, restricted to reachable states.
///
/// Transitions are stored compactly: proper moves per state plus the choice
/// tuples that produce an ε-loop. The explicit relation is recovered by
/// [`Model::transitions`].
#[derive(Clone, Debug)]
pub struct Model {
    amas: Arc<Amas>,
    states: Vec<GlobalState>,
    index: HashMap<GlobalState, StateId>,
    initial: StateId,
    moves: Vec<Vec<Move>>,
    deadlocks: Vec<Vec<ChoiceTuple>>,
    valuation: Vec<BTreeSet<PropId>>,
    agents_of: Vec<Vec<AgentId>>,
}

pub fn build_model(amas: Arc<Amas>, limits: &Limits) -> Result<Model, SemanticsError> {
    let explorer = Explorer::new(&amas);
    let mut states = vec![explorer.initial()];
    let mut index = HashMap::new();
    index.insert(states[0].clone(), StateId(0));
    let mut moves = Vec::new();
    let mut deadlocks = Vec::new();
    let mut queue = VecDeque::from([StateId(0)]);

    while let Some(id) = queue.pop_front() {
        let g = states[id.index()].clone();
        let mut out = Vec::new();
        for (event, target) in explorer.enabled_moves(&g) {
            let target = match index.get(&target) {
                Some(&t) => t,
                None => {
                    if states.len() >= limits.max_states {
                        return Err(SemanticsError::ModelTooLarge {
                            limit: limits.max_states,
                        });
                    }
                    let t = StateId::from_index(states.len());
                    index.insert(target.clone(), t);
                    states.push(target);
                    queue.push_back(t);
                    t
                }
            };
            out.push(Move { event, target });
        }
        let events: Vec<EventId> = out.iter().map(|m| m.event).collect();
        deadlocks.push(explorer.deadlock_tuples(&g, &events));
        moves.push(out);
    }

    Ok(Model::from_parts(amas, states, StateId(0), moves, deadlocks))
}

impl Model {
    /// Assembles a model from explicit parts. `moves[s]` is sorted on return.
    pub fn from_parts(
        amas: Arc<Amas>,
        states: Vec<GlobalState>,
        initial: StateId,
        mut moves: Vec<Vec<Move>>,
        deadlocks: Vec<Vec<ChoiceTuple>>,
    ) -> Self {
        for list in &mut moves {
            list.sort();
            list.dedup();
        }
        let index = states
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), StateId::from_index(i)))
            .collect();
        let valuation = states
            .iter()
            .map(|g| {
                amas.agents
                    .iter()
                    .flat_map(|a| a.valuation[g.local(a.index).index()].iter().copied())
                    .collect()
            })
            .collect();
        let agents_of = amas.agents_by_event();
        Self {
            amas,
            states,
            index,
            initial,
            moves,
            deadlocks,
            valuation,
            agents_of,
        }
    }

    pub fn amas(&self) -> &Amas {
        &self.amas
    }

    pub fn amas_arc(&self) -> &Arc<Amas> {
        &self.amas
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_ids(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len()).map(StateId::from_index)
    }

    pub fn state(&self, id: StateId) -> &GlobalState {
        &self.states[id.index()]
    }

    pub fn states(&self) -> &[GlobalState] {
        &self.states
    }

    pub fn lookup(&self, g: &GlobalState) -> Option<StateId> {
        self.index.get(g).copied()
    }

    pub fn moves(&self, id: StateId) -> &[Move] {
        &self.moves[id.index()]
    }

    /// Choice tuples at `id` that produce an ε-loop.
    pub fn deadlocks(&self, id: StateId) -> &[ChoiceTuple] {
        &self.deadlocks[id.index()]
    }

    pub fn has_eps_loop(&self, id: StateId) -> bool {
        !self.deadlocks[id.index()].is_empty()
    }

    pub fn valuation(&self, id: StateId) -> &BTreeSet<PropId> {
        &self.valuation[id.index()]
    }

    pub fn agents_of(&self, event: EventId) -> &[AgentId] {
        &self.agents_of[event.index()]
    }

    /// Number of proper moves, not counting choice multiplicity.
    pub fn move_count(&self) -> usize {
        self.moves.iter().map(Vec::len).sum()
    }

    /// Number of states carrying an ε-loop.
    pub fn eps_loop_count(&self) -> usize {
        self.deadlocks.iter().filter(|d| !d.is_empty()).count()
    }

    /// Successor states of `id` (proper moves, then the ε-loop), deduplicated.
    pub fn successors(&self, id: StateId) -> Vec<StateId> {
        let mut out: Vec<StateId> = self.moves(id).iter().map(|m| m.target).collect();
        if self.has_eps_loop(id) {
            out.push(id);
        }
        out.sort();
        out.dedup();
        out
    }

    /// `enabled(g)`: events labelling some transition out of `id`.
    pub fn enabled(&self, id: StateId) -> Result<BTreeSet<EventId>, SemanticsError> {
        if id.index() >= self.states.len() {
            return Err(SemanticsError::UnknownState);
        }
        let mut out: BTreeSet<EventId> = self.moves(id).iter().map(|m| m.event).collect();
        if self.has_eps_loop(id) {
            out.insert(EPSILON);
        }
        Ok(out)
    }

    /// `enabled(g, E_A)`: events of transitions whose choice tuple agrees
    /// with `partial` (one optional choice index per agent).
    pub fn enabled_by(
        &self,
        id: StateId,
        partial: &[Option<u32>],
    ) -> Result<BTreeSet<EventId>, SemanticsError> {
        if id.index() >= self.states.len() {
            return Err(SemanticsError::UnknownState);
        }
        let g = self.state(id);
        for (i, choice) in partial.iter().enumerate() {
            if let Some(c) = *choice {
                let agent = AgentId::from_index(i);
                if c as usize >= self.amas.agent(agent).choices(g.local(agent)).len() {
                    return Err(SemanticsError::ChoiceNotInRepertoire {
                        agent,
                        choice: c as usize,
                    });
                }
            }
        }
        let mut out: BTreeSet<EventId> = self
            .moves(id)
            .iter()
            .filter(|m| self.move_agrees(id, m.event, partial))
            .map(|m| m.event)
            .collect();
        if self.eps_agrees(id, partial) {
            out.insert(EPSILON);
        }
        Ok(out)
    }

    /// Whether a proper `event` at `id` fires under some tuple extending `partial`.
    pub(crate) fn move_agrees(&self, id: StateId, event: EventId, partial: &[Option<u32>]) -> bool {
        let g = &self.states[id.index()];
        self.agents_of(event).iter().all(|&j| match partial[j.index()] {
            Some(c) => self.amas.agent(j).choices(g.local(j))[c as usize].contains(event),
            None => true,
        })
    }

    /// Whether some ε-producing tuple at `id` extends `partial`.
    pub(crate) fn eps_agrees(&self, id: StateId, partial: &[Option<u32>]) -> bool {
        self.deadlocks(id).iter().any(|t| {
            t.0.iter()
                .zip(partial)
                .all(|(&c, p)| p.map_or(true, |p| p == c))
        })
    }

    /// The explicit transition relation at `id`, ordered by tuple then event
    /// then target.
    pub fn transitions(&self, id: StateId) -> Vec<Transition> {
        let g = self.state(id);
        let sizes: Vec<usize> = self
            .amas
            .agents
            .iter()
            .map(|a| a.choices(g.local(a.index)).len())
            .collect();
        let mut out = Vec::new();
        for tuple in TupleIter::new(sizes) {
            let full: Vec<Option<u32>> = tuple.0.iter().map(|&c| Some(c)).collect();
            for m in self.moves(id) {
                if self.move_agrees(id, m.event, &full) {
                    out.push(Transition {
                        source: id,
                        input: tuple.clone(),
                        event: m.event,
                        target: m.target,
                    });
                }
            }
            if self.deadlocks(id).contains(&tuple) {
                out.push(Transition {
                    source: id,
                    input: tuple.clone(),
                    event: EPSILON,
                    target: id,
                });
            }
        }
        out
    }

    pub fn transition_count(&self) -> usize {
        self.state_ids().map(|s| self.transitions(s).len()).sum()
    }
}
