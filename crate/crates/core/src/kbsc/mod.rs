//! Knowledge-based subset construction and the sound (incomplete) procedure
//! for perfect-recall strategies it enables.

mod expansion;
mod projection;
mod transducer;

pub use expansion::{expand, AgentExpansion};
pub use projection::{eps_closure, project, Projection};
pub use transducer::{extract_transducer, Transducer};

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::dsl::{Formula, Goal};
use crate::model::{validate, AgentId, AgentModule, Amas, Choice, LocalId, StateId};
use crate::semantics::{
    all_paths_satisfy, build_model, check_strategic, digest, ChoiceTuple, GlobalState, Limits, Model, OutcomeMode,
    SemanticsError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KbscError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("not supported: conjectured only (reactive semantics)")]
    ReactUnsupported,
    #[error("nested or multi-modality formula: the sound procedure takes a single strategic modality")]
    NotSingleModality,
    #[error("off-strategy observation: agent {} in memory {memory} observed local state {}", .agent.0 + 1, .observation.0)]
    OffStrategy {
        agent: AgentId,
        memory: usize,
        observation: LocalId,
    },
    #[error("ambiguous observation: agent {} in memory {memory} has two successors at local state {}", .agent.0 + 1, .observation.0)]
    AmbiguousObservation {
        agent: AgentId,
        memory: usize,
        observation: LocalId,
    },
    #[error("trace not executable at step {0}")]
    TraceNotExecutable(usize),
    #[error("knowledge-state name collision: {0}")]
    NameCollision(String),
    #[error("expanded AMAS is invalid: {0}")]
    InvalidExpansion(String),
}

/// The expanded AMAS together with the per-agent expansions it was
/// assembled from.
#[derive(Clone, Debug)]
pub struct ExpandedAmas {
    pub amas: Arc<Amas>,
    pub expansions: Vec<AgentExpansion>,
    /// Knowledge-state names per agent, aligned with `expansions[i].states`.
    pub names: Vec<Vec<String>>,
}

impl ExpandedAmas {
    /// `loc(g^K)`: the original global state underlying an expanded state.
    pub fn loc(&self, gk: &GlobalState) -> GlobalState {
        GlobalState(
            self.expansions
                .iter()
                .zip(&gk.0)
                .map(|(exp, k)| exp.locs[k.index()])
                .collect(),
        )
    }
}

fn knowledge_name(model: &Model, members: &[StateId]) -> String {
    let amas = model.amas();
    let mut rows: Vec<&GlobalState> = members.iter().map(|&s| model.state(s)).collect();
    rows.sort();
    let mut text = String::new();
    for g in rows {
        for (i, l) in g.0.iter().enumerate() {
            text.push_str(amas.agents[i].local_name(*l));
            text.push(',');
        }
        text.push(';');
    }
    format!("k_{}", &digest(&text)[..16])
}

/// Projects and expands every agent, and assembles the expansions into an
/// AMAS over the same events and propositions.
pub fn assemble_expanded(model: &Model) -> Result<ExpandedAmas, KbscError> {
    let amas = model.amas();
    let mut expansions = Vec::new();
    let mut names = Vec::new();
    let mut agents = Vec::new();
    let mut nondeterministic = false;
    for agent in amas.agent_ids() {
        let exp = expand(model, &project(model, agent));
        let original = amas.agent(agent);
        let local_names: Vec<String> = exp.states.iter().map(|k| knowledge_name(model, k)).collect();
        let distinct: BTreeSet<&String> = local_names.iter().collect();
        if distinct.len() != local_names.len() {
            return Err(KbscError::NameCollision(original.name.clone()));
        }
        let repertoire: Vec<Vec<Choice>> = exp.locs.iter().map(|&l| original.choices(l).to_vec()).collect();
        let valuation = exp.locs.iter().map(|&l| original.valuation[l.index()].clone()).collect();
        let transitions = exp
            .transitions
            .iter()
            .map(|&(a, e, b)| (LocalId::from_index(a), e, LocalId::from_index(b)))
            .collect();
        let module = AgentModule {
            name: original.name.clone(),
            index: agent,
            locals: local_names.clone(),
            initial: LocalId(0),
            events: original.events.clone(),
            repertoire,
            transitions,
            props: original.props.clone(),
            valuation,
        };
        nondeterministic |= !module.is_deterministic();
        agents.push(module);
        expansions.push(exp);
        names.push(local_names);
    }
    let expanded = Amas {
        agents,
        events: amas.events.clone(),
        props: amas.props.clone(),
        nondeterministic,
    };
    let problems = validate(&expanded);
    if let Some(first) = problems.first() {
        return Err(KbscError::InvalidExpansion(first.to_string()));
    }
    Ok(ExpandedAmas {
        amas: Arc::new(expanded),
        expansions,
        names,
    })
}

/// A failed expansion check, with the offending expanded state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub state: StateId,
    pub message: String,
}

/// Checks that for every reachable expanded state the members' knowledge
/// sets intersect exactly in `loc(g^K)`.
pub fn check_intersection(model: &Model, expanded: &ExpandedAmas, mk: &Model) -> Result<(), Counterexample> {
    for gk in mk.state_ids() {
        let state = mk.state(gk);
        let mut common: Option<BTreeSet<StateId>> = None;
        for (exp, k) in expanded.expansions.iter().zip(&state.0) {
            let set: BTreeSet<StateId> = exp.states[k.index()].iter().copied().collect();
            common = Some(match common {
                None => set,
                Some(c) => c.intersection(&set).copied().collect(),
            });
        }
        let common = common.unwrap_or_default();
        let expected = model.lookup(&expanded.loc(state));
        let ok = match expected {
            Some(g) => common.len() == 1 && common.contains(&g),
            None => false,
        };
        if !ok {
            return Err(Counterexample {
                state: gk,
                message: format!(
                    "intersection has {} members, loc is {}",
                    common.len(),
                    if expected.is_some() { "a model state" } else { "not a model state" }
                ),
            });
        }
    }
    Ok(())
}

/// Pairs `(g, g^K)` with `loc(g^K) = g`.
type SimPair = (StateId, StateId);

/// Matches every transition of `model` at `g` under `tuple` by a transition
/// of `mk` at `gk` with the same input and output; returns the successor
/// pairs, or `None` if some transition has no match.
fn step_pairs(
    model: &Model,
    expanded: &ExpandedAmas,
    mk: &Model,
    (g, gk): SimPair,
    tuple: &ChoiceTuple,
) -> Option<Vec<SimPair>> {
    let full: Vec<Option<u32>> = tuple.0.iter().map(|&c| Some(c)).collect();
    let mut out = Vec::new();
    for m in model.moves(g) {
        if !model.move_agrees(g, m.event, &full) {
            continue;
        }
        let mut matched = false;
        for mkm in mk.moves(gk) {
            if mkm.event == m.event
                && mk.move_agrees(gk, mkm.event, &full)
                && model.lookup(&expanded.loc(mk.state(mkm.target))) == Some(m.target)
            {
                matched = true;
                out.push((m.target, mkm.target));
            }
        }
        if !matched {
            return None;
        }
    }
    if model.deadlocks(g).contains(tuple) {
        if !mk.deadlocks(gk).contains(tuple) {
            return None;
        }
        out.push((g, gk));
    }
    Some(out)
}

fn tuple_valid(model: &Model, s: StateId, tuple: &ChoiceTuple) -> bool {
    let g = model.state(s);
    tuple.0.len() == g.0.len()
        && model
            .amas()
            .agents
            .iter()
            .all(|a| (tuple.choice(a.index)) < a.choices(g.local(a.index)).len())
}

/// Replays a choice-tuple trace of `model` on `mk`. Every branch the trace
/// drives `model` through must be matched step by step.
pub fn simulate_check(
    model: &Model,
    expanded: &ExpandedAmas,
    mk: &Model,
    trace: &[ChoiceTuple],
) -> Result<bool, KbscError> {
    let mut current: BTreeSet<SimPair> = BTreeSet::from([(model.initial(), mk.initial())]);
    for (step, tuple) in trace.iter().enumerate() {
        let mut next = BTreeSet::new();
        let mut executable = false;
        for &pair in &current {
            if !tuple_valid(model, pair.0, tuple) {
                continue;
            }
            executable = true;
            match step_pairs(model, expanded, mk, pair, tuple) {
                Some(succ) => next.extend(succ),
                None => return Ok(false),
            }
        }
        if !executable {
            return Err(KbscError::TraceNotExecutable(step));
        }
        current = next;
    }
    Ok(true)
}

/// Exhaustive form of [`simulate_check`] over all traces of length up to
/// `depth`, sharing work between traces that reach the same pair.
pub fn simulate_bounded(
    model: &Model,
    expanded: &ExpandedAmas,
    mk: &Model,
    depth: usize,
) -> Result<usize, Counterexample> {
    let root = (model.initial(), mk.initial());
    let mut best: HashMap<SimPair, usize> = HashMap::from([(root, 0)]);
    let mut queue = VecDeque::from([(root, 0usize)]);
    while let Some((pair, d)) = queue.pop_front() {
        if d >= depth {
            continue;
        }
        let g = model.state(pair.0);
        let sizes: Vec<usize> = model
            .amas()
            .agents
            .iter()
            .map(|a| a.choices(g.local(a.index)).len())
            .collect();
        for tuple in all_tuples(&sizes) {
            let Some(succ) = step_pairs(model, expanded, mk, pair, &tuple) else {
                return Err(Counterexample {
                    state: pair.1,
                    message: format!("no matching transition at depth {d} for input {:?}", tuple.0),
                });
            };
            for p in succ {
                if best.get(&p).map_or(true, |&seen| seen > d + 1) {
                    best.insert(p, d + 1);
                    queue.push_back((p, d + 1));
                }
            }
        }
    }
    Ok(best.len())
}

fn all_tuples(sizes: &[usize]) -> Vec<ChoiceTuple> {
    let mut out = vec![Vec::new()];
    for &s in sizes {
        out = out
            .into_iter()
            .flat_map(|t: Vec<u32>| {
                (0..s as u32).map(move |c| {
                    let mut t = t.clone();
                    t.push(c);
                    t
                })
            })
            .collect();
    }
    out.into_iter().map(ChoiceTuple).collect()
}

#[derive(Clone, Debug)]
pub enum SoundVerdict {
    /// The goal is enforceable by the returned finite-memory strategies.
    SatisfiedSound { transducers: Vec<Transducer> },
    /// The expanded game gives no memoryless witness; nothing follows.
    Unknown,
}

#[derive(Clone, Debug)]
pub struct SoundReport {
    pub verdict: SoundVerdict,
    pub expanded: ExpandedAmas,
    pub expanded_model: Model,
    pub strategies_checked: u128,
}

/// Checks a single strategic modality under perfect-recall strategies by
/// looking for a memoryless strategy in the expanded game.
#[allow(non_snake_case)]
pub fn check_iR_sound(
    model: &Model,
    formula: &Formula,
    mode: OutcomeMode,
    limits: &Limits,
) -> Result<SoundReport, KbscError> {
    if mode == OutcomeMode::React {
        return Err(KbscError::ReactUnsupported);
    }
    let Formula::Strategic(strategic) = formula else {
        return Err(KbscError::NotSingleModality);
    };
    for &a in &strategic.coalition {
        if a.index() >= model.amas().agents.len() {
            return Err(SemanticsError::UnknownAgent(a).into());
        }
    }
    let expanded = assemble_expanded(model)?;
    let mk = build_model(expanded.amas.clone(), limits)?;
    let result = check_strategic(&mk, strategic, OutcomeMode::Std, limits)?;
    let verdict = match result.witness {
        Some(witness) if result.holds => {
            let transducers = strategic
                .coalition
                .iter()
                .map(|&a| extract_transducer(&expanded.expansions[a.index()], witness.agent_choices(a).unwrap()))
                .collect::<Result<Vec<_>, _>>()?;
            SoundVerdict::SatisfiedSound { transducers }
        }
        _ => SoundVerdict::Unknown,
    };
    Ok(SoundReport {
        verdict,
        expanded,
        expanded_model: mk,
        strategies_checked: result.strategies_checked,
    })
}

/// Runs the transducers against `model` under standard outcomes and checks
/// that every infinite path of the product satisfies `goal`.
pub fn replay_transducers(model: &Model, transducers: &[Transducer], goal: &Goal) -> Result<bool, KbscError> {
    let n = model.amas().agents.len();
    type Node = (StateId, Vec<usize>);
    let root: Node = (model.initial(), transducers.iter().map(Transducer::initial).collect());
    let mut index: HashMap<Node, usize> = HashMap::from([(root.clone(), 0)]);
    let mut nodes = vec![root];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        let (s, memory) = nodes[u].clone();
        let mut partial = vec![None; n];
        for (z, &q) in transducers.iter().zip(&memory) {
            partial[z.agent.index()] = Some(z.output[q]);
        }
        let mut targets: Vec<StateId> = model
            .moves(s)
            .iter()
            .filter(|m| model.move_agrees(s, m.event, &partial))
            .map(|m| m.target)
            .collect();
        if model.eps_agrees(s, &partial) {
            targets.push(s);
        }
        for t in targets {
            let next_memory = transducers
                .iter()
                .zip(&memory)
                .map(|(z, &q)| z.step(q, model.state(t).local(z.agent)))
                .collect::<Result<Vec<_>, _>>()?;
            let node = (t, next_memory);
            let v = match index.get(&node) {
                Some(&v) => v,
                None => {
                    let v = nodes.len();
                    index.insert(node.clone(), v);
                    nodes.push(node);
                    succ.push(Vec::new());
                    queue.push_back(v);
                    v
                }
            };
            succ[u].push(v);
        }
        succ[u].sort_unstable();
        succ[u].dedup();
    }
    Ok(all_paths_satisfy(&succ, goal, |u| model.valuation(nodes[u].0)))
}
