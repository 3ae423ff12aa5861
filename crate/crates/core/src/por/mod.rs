//! Partial-order reduction for a fixed coalition and set of propositions,
//! plus the checks used to validate a reduced model against the full one.

mod reduce;
mod stutter;

pub use reduce::{reduce, AmpleDecision, FullReason, ReducedModel};
pub use stutter::{stutter_equiv_bounded, StutterVerdict, StutterWord};

use std::collections::{BTreeSet, HashMap, VecDeque};

use petgraph::algo::is_cyclic_directed;
use petgraph::graph::DiGraph;
use thiserror::Error;

use crate::dsl::Formula;
use crate::model::{AgentId, Amas, EventId, PropId, StateId};
use crate::semantics::{check_ir, Limits, Model, OutcomeMode, SemanticsError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PorError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("formula outside the reduction's scope: {0}")]
    OutOfScope(String),
}

/// The coalition `A` and propositions `PV` a reduction must preserve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionContext {
    pub coalition: BTreeSet<AgentId>,
    pub props: BTreeSet<PropId>,
}

impl ReductionContext {
    pub fn new(coalition: impl IntoIterator<Item = AgentId>, props: impl IntoIterator<Item = PropId>) -> Self {
        Self {
            coalition: coalition.into_iter().collect(),
            props: props.into_iter().collect(),
        }
    }

    /// Smallest context covering every coalition and atom of `formulas`.
    pub fn covering<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Self {
        let mut ctx = Self::new([], []);
        for f in formulas {
            ctx.coalition.extend(f.agents());
            ctx.props.extend(f.atoms());
        }
        ctx
    }
}

fn owned_by_coalition(amas: &Amas, ctx: &ReductionContext, event: EventId) -> bool {
    amas.agents
        .iter()
        .any(|a| a.events.contains(&event) && ctx.coalition.contains(&a.index))
}

/// Invisibility read off the agents' local transitions: no coalition member
/// owns the event and every owner's local transition on it keeps its
/// `PV`-labels. Implies [`invisible`] on any model of `amas`.
pub fn static_invisible(amas: &Amas, ctx: &ReductionContext, event: EventId) -> bool {
    if owned_by_coalition(amas, ctx, event) {
        return false;
    }
    amas.agents.iter().filter(|a| a.events.contains(&event)).all(|a| {
        a.transitions.iter().filter(|(_, e, _)| *e == event).all(|(from, _, to)| {
            let before = &a.valuation[from.index()];
            let after = &a.valuation[to.index()];
            ctx.props
                .iter()
                .all(|p| before.contains(p) == after.contains(p))
        })
    })
}

/// Exact invisibility on `model`: no coalition member owns the event and no
/// transition labelled with it changes the `PV`-labelling.
pub fn invisible(model: &Model, ctx: &ReductionContext, event: EventId) -> bool {
    if owned_by_coalition(model.amas(), ctx, event) {
        return false;
    }
    model.state_ids().all(|s| {
        model.moves(s).iter().filter(|m| m.event == event).all(|m| {
            let before = model.valuation(s);
            let after = model.valuation(m.target);
            ctx.props
                .iter()
                .all(|p| before.contains(p) == after.contains(p))
        })
    })
}

/// Events are independent when no agent owns both and at least one is invisible.
pub fn independent(model: &Model, ctx: &ReductionContext, a: EventId, b: EventId) -> bool {
    let disjoint = model.agents_of(a).iter().all(|j| !model.agents_of(b).contains(j));
    disjoint && (invisible(model, ctx, a) || invisible(model, ctx, b))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct C1Counterexample {
    /// Events from the checked state, none in the ample set; the last one
    /// depends on some ample event.
    pub path: Vec<EventId>,
}

/// Checks C1 for the ample set `ample` at `g`: along every path of `model`
/// from `g` that avoids `ample`, no event dependent on `ample` occurs.
pub fn validate_c1(
    model: &Model,
    ctx: &ReductionContext,
    g: StateId,
    ample: &BTreeSet<EventId>,
) -> Result<(), C1Counterexample> {
    let mut dependent_cache: HashMap<EventId, bool> = HashMap::new();
    let mut parent: HashMap<StateId, (StateId, EventId)> = HashMap::new();
    let mut seen = BTreeSet::from([g]);
    let mut queue = VecDeque::from([g]);
    let path_to = |parent: &HashMap<StateId, (StateId, EventId)>, mut s: StateId| {
        let mut path = Vec::new();
        while let Some(&(p, e)) = parent.get(&s) {
            path.push(e);
            s = p;
        }
        path.reverse();
        path
    };
    while let Some(s) = queue.pop_front() {
        for m in model.moves(s) {
            if ample.contains(&m.event) {
                continue;
            }
            let dependent = *dependent_cache
                .entry(m.event)
                .or_insert_with(|| ample.iter().any(|&a| !independent(model, ctx, a, m.event)));
            if dependent {
                let mut path = path_to(&parent, s);
                path.push(m.event);
                return Err(C1Counterexample { path });
            }
            if seen.insert(m.target) {
                parent.insert(m.target, (s, m.event));
                queue.push_back(m.target);
            }
        }
    }
    Ok(())
}

/// Checks that `reduced` is a submodel of `full`: same initial state, and its
/// states, moves and labels all occur in `full`, with identical ε-loops.
pub fn check_submodel(full: &Model, reduced: &Model) -> Result<(), String> {
    let map = |s: StateId| full.lookup(reduced.state(s));
    if map(reduced.initial()) != Some(full.initial()) {
        return Err("initial states differ".into());
    }
    for s in reduced.state_ids() {
        let f = map(s).ok_or_else(|| format!("state {:?} missing from the full model", reduced.state(s)))?;
        if reduced.valuation(s) != full.valuation(f) {
            return Err(format!("labels differ at {:?}", reduced.state(s)));
        }
        if reduced.deadlocks(s) != full.deadlocks(f) {
            return Err(format!("ε-loops differ at {:?}", reduced.state(s)));
        }
        for m in reduced.moves(s) {
            let t = map(m.target).ok_or("move target missing from the full model")?;
            if !full.moves(f).iter().any(|fm| fm.event == m.event && fm.target == t) {
                return Err(format!(
                    "move {} from {:?} missing from the full model",
                    full.amas().event_name(m.event),
                    reduced.state(s)
                ));
            }
        }
    }
    Ok(())
}

/// C2: every event of a proper ample set is invisible in `full`.
pub fn check_c2(full: &Model, reduced: &ReducedModel, ctx: &ReductionContext) -> Result<(), String> {
    let mut visible: HashMap<EventId, bool> = HashMap::new();
    for s in reduced.model.state_ids() {
        if let AmpleDecision::Ample { events } = &reduced.decisions[s.index()] {
            for &e in events {
                if !*visible.entry(e).or_insert_with(|| invisible(full, ctx, e)) {
                    return Err(format!(
                        "visible event {} in the ample set at {:?}",
                        full.amas().event_name(e),
                        reduced.model.state(s)
                    ));
                }
            }
        }
    }
    Ok(())
}

/// C3: every cycle of the reduced model passes through a fully expanded state.
pub fn check_c3(reduced: &ReducedModel) -> Result<(), String> {
    let m = &reduced.model;
    let mut graph: DiGraph<(), ()> = DiGraph::new();
    let nodes: Vec<_> = m.state_ids().map(|_| graph.add_node(())).collect();
    for s in m.state_ids() {
        if reduced.decisions[s.index()].is_full() {
            continue;
        }
        for mv in m.moves(s) {
            if !reduced.decisions[mv.target.index()].is_full() {
                graph.add_edge(nodes[s.index()], nodes[mv.target.index()], ());
            }
        }
    }
    if is_cyclic_directed(&graph) {
        Err("a cycle of the reduced model has no fully expanded state".into())
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disagreement {
    pub index: usize,
    pub formula: String,
    pub full: bool,
    pub reduced: bool,
}

/// Checks each formula under ir strategies on both models and returns the
/// formulas whose verdicts differ.
pub fn compare_verdicts(
    full: &Model,
    reduced: &Model,
    ctx: &ReductionContext,
    formulas: &[Formula],
    mode: OutcomeMode,
    limits: &Limits,
) -> Result<Vec<Disagreement>, PorError> {
    let amas = full.amas();
    let mut out = Vec::new();
    for (index, f) in formulas.iter().enumerate() {
        for m in f.modalities() {
            if !m.coalition.is_subset(&ctx.coalition) {
                return Err(PorError::OutOfScope(format!(
                    "coalition of {} is not contained in the reduction's coalition",
                    f.to_text(amas)
                )));
            }
        }
        if !f.atoms().is_subset(&ctx.props) {
            return Err(PorError::OutOfScope(format!(
                "atoms of {} are not among the reduction's propositions",
                f.to_text(amas)
            )));
        }
        let a = check_ir(full, f, mode, limits)?.holds;
        let b = check_ir(reduced, f, mode, limits)?.holds;
        if a != b {
            out.push(Disagreement {
                index,
                formula: f.to_text(amas),
                full: a,
                reduced: b,
            });
        }
    }
    Ok(out)
}
