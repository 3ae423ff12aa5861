use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::model::{Amas, EventId, StateId};
use crate::semantics::{ChoiceTuple, Explorer, GlobalState, Limits, Model, Move, SemanticsError};

use super::{static_invisible, ReductionContext};

/// How a state of the reduced model was expanded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AmpleDecision {
    /// Only the events of one agent's ample set were explored.
    Ample { events: BTreeSet<EventId> },
    /// Every enabled proper event was explored.
    Full { reason: FullReason },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FullReason {
    /// No agent offered an acceptable ample set.
    NoCandidate,
    /// The ample set would have closed a cycle on the DFS stack.
    Cycle,
}

impl AmpleDecision {
    pub fn is_full(&self) -> bool {
        matches!(self, AmpleDecision::Full { .. })
    }
}

/// A submodel produced by the reducer, with per-state decisions aligned to
/// the reduced model's state ids.
#[derive(Clone, Debug)]
pub struct ReducedModel {
    pub model: Model,
    pub decisions: Vec<AmpleDecision>,
}

/// Ample-set candidate at `g`: the events locally enabled for the first
/// agent outside the coalition whose such events are all private,
/// statically invisible and executable.
fn ample_candidate(
    explorer: &Explorer<'_>,
    ctx: &ReductionContext,
    g: &GlobalState,
    enabled: &BTreeSet<EventId>,
) -> Option<BTreeSet<EventId>> {
    let amas = explorer.amas();
    'agent: for j in amas.agent_ids() {
        if ctx.coalition.contains(&j) {
            continue;
        }
        let local: BTreeSet<EventId> = explorer.local_events(g, j).collect();
        if local.is_empty() {
            continue;
        }
        for &e in &local {
            let private = explorer.agents_of(e) == [j];
            if !private || !static_invisible(amas, ctx, e) || !enabled.contains(&e) {
                continue 'agent;
            }
        }
        if local.len() < enabled.len() {
            return Some(local);
        }
    }
    None
}

struct Frame {
    state: StateId,
    pending: Vec<StateId>,
}

struct Reducer<'a> {
    explorer: Explorer<'a>,
    ctx: &'a ReductionContext,
    limits: &'a Limits,
    states: Vec<GlobalState>,
    index: HashMap<GlobalState, StateId>,
    moves: Vec<Vec<Move>>,
    deadlocks: Vec<Vec<ChoiceTuple>>,
    decisions: Vec<Option<AmpleDecision>>,
    on_stack: Vec<bool>,
}

impl Reducer<'_> {
    fn intern(&mut self, g: GlobalState) -> Result<StateId, SemanticsError> {
        if let Some(&id) = self.index.get(&g) {
            return Ok(id);
        }
        if self.states.len() >= self.limits.max_states {
            return Err(SemanticsError::ModelTooLarge {
                limit: self.limits.max_states,
            });
        }
        let id = StateId::from_index(self.states.len());
        self.index.insert(g.clone(), id);
        self.states.push(g);
        self.moves.push(Vec::new());
        self.deadlocks.push(Vec::new());
        self.decisions.push(None);
        self.on_stack.push(false);
        Ok(id)
    }

    /// Chooses the explored events at `id`, records its moves and ε-loops,
    /// and returns a frame with the successors left to visit.
    fn expand(&mut self, id: StateId) -> Result<Frame, SemanticsError> {
        self.on_stack[id.index()] = true;
        let g = self.states[id.index()].clone();
        let all = self.explorer.enabled_moves(&g);
        let enabled: BTreeSet<EventId> = all.iter().map(|(e, _)| *e).collect();
        let events: Vec<EventId> = all.iter().map(|(e, _)| *e).collect();
        self.deadlocks[id.index()] = self.explorer.deadlock_tuples(&g, &events);

        let mut decision = AmpleDecision::Full {
            reason: FullReason::NoCandidate,
        };
        let mut chosen = all.clone();
        if let Some(ample) = ample_candidate(&self.explorer, self.ctx, &g, &enabled) {
            let subset: Vec<(EventId, GlobalState)> =
                all.iter().filter(|(e, _)| ample.contains(e)).cloned().collect();
            let closes_cycle = subset
                .iter()
                .any(|(_, t)| self.index.get(t).is_some_and(|&t| self.on_stack[t.index()]));
            if closes_cycle {
                decision = AmpleDecision::Full {
                    reason: FullReason::Cycle,
                };
            } else {
                decision = AmpleDecision::Ample { events: ample };
                chosen = subset;
            }
        }
        self.decisions[id.index()] = Some(decision);

        let mut pending = Vec::new();
        for (event, target) in chosen {
            let t = self.intern(target)?;
            self.moves[id.index()].push(Move { event, target: t });
            pending.push(t);
        }
        pending.reverse();
        Ok(Frame { state: id, pending })
    }
}

/// Depth-first reduction under the ample-set conditions. ε-loops of the full
/// model are kept wherever they occur.
pub fn reduce(amas: Arc<Amas>, ctx: &ReductionContext, limits: &Limits) -> Result<ReducedModel, SemanticsError> {
    let explorer = Explorer::new(&amas);
    let initial = explorer.initial();
    let mut r = Reducer {
        explorer,
        ctx,
        limits,
        states: Vec::new(),
        index: HashMap::new(),
        moves: Vec::new(),
        deadlocks: Vec::new(),
        decisions: Vec::new(),
        on_stack: Vec::new(),
    };
    let root = r.intern(initial)?;
    let mut stack = vec![r.expand(root)?];
    while let Some(frame) = stack.last_mut() {
        match frame.pending.pop() {
            Some(next) => {
                if r.decisions[next.index()].is_none() {
                    let f = r.expand(next)?;
                    stack.push(f);
                }
            }
            None => {
                r.on_stack[frame.state.index()] = false;
                stack.pop();
            }
        }
    }

    let Reducer {
        states,
        moves,
        deadlocks,
        decisions,
        ..
    } = r;
    let decisions = decisions.into_iter().map(|d| d.expect("every state expanded")).collect();
    Ok(ReducedModel {
        model: Model::from_parts(amas, states, root, moves, deadlocks),
        decisions,
    })
}
