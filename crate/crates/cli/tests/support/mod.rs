//! Deliberately naive reference implementations, written directly from the
//! definitions and sharing no code with the library's algorithms.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use amc_core::dsl::{Formula, Goal, PropFormula, Strategic};
use amc_core::kbsc::Transducer;
use amc_core::model::{AgentId, Amas, EventId, LocalId, PropId, EPSILON};
use amc_core::semantics::{Model, OutcomeMode};

pub type Global = Vec<LocalId>;

/// One explicit transition: choice tuple, event, target.
pub type Edge = (Vec<u32>, EventId, usize);

/// The global model, built by brute force over every full choice tuple.
pub struct NaiveModel {
    pub states: Vec<Global>,
    pub index: HashMap<Global, usize>,
    pub edges: Vec<Vec<Edge>>,
    pub labels: Vec<BTreeSet<PropId>>,
}

fn tuples(sizes: &[usize]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n as u32).map(move |c| {
                    let mut t = t.clone();
                    t.push(c);
                    t
                })
            })
            .collect();
    }
    out
}

/// Transitions out of `g` exactly as the definition reads: under a tuple, a
/// proper event fires iff every agent having it in its alphabet has a local
/// transition on it and chose it; a tuple firing nothing loops on ε.
pub fn naive_transitions(amas: &Amas, g: &Global) -> Vec<(Vec<u32>, EventId, Global)> {
    let sizes: Vec<usize> = amas
        .agents
        .iter()
        .map(|a| a.repertoire[g[a.index.0 as usize].0 as usize].len())
        .collect();
    let mut out = Vec::new();
    for tuple in tuples(&sizes) {
        let mut fired = false;
        for e in 1..amas.events.len() as u32 {
            let e = EventId(e);
            let owners: Vec<usize> = (0..amas.agents.len())
                .filter(|&i| amas.agents[i].events.contains(&e))
                .collect();
            if owners.is_empty() {
                continue;
            }
            let mut targets: Vec<Global> = vec![g.clone()];
            let mut ok = true;
            for &i in &owners {
                let agent = &amas.agents[i];
                let here = g[i];
                let chosen = &agent.repertoire[here.0 as usize][tuple[i] as usize];
                let local: Vec<LocalId> = agent
                    .transitions
                    .iter()
                    .filter(|(from, ev, _)| *from == here && *ev == e)
                    .map(|&(_, _, to)| to)
                    .collect();
                if !chosen.contains(e) || local.is_empty() {
                    ok = false;
                    break;
                }
                targets = targets
                    .into_iter()
                    .flat_map(|t| {
                        local.iter().map(move |&l| {
                            let mut t = t.clone();
                            t[i] = l;
                            t
                        })
                    })
                    .collect();
            }
            if ok {
                targets.sort();
                targets.dedup();
                for t in targets {
                    fired = true;
                    out.push((tuple.clone(), e, t));
                }
            }
        }
        if !fired {
            out.push((tuple, EPSILON, g.clone()));
        }
    }
    out
}

pub fn naive_label(amas: &Amas, g: &Global) -> BTreeSet<PropId> {
    let mut out = BTreeSet::new();
    for (i, agent) in amas.agents.iter().enumerate() {
        out.extend(agent.valuation[g[i].0 as usize].iter().copied());
    }
    out
}

impl NaiveModel {
    pub fn build(amas: &Amas) -> Self {
        let init: Global = amas.agents.iter().map(|a| a.initial).collect();
        let mut m = NaiveModel {
            states: vec![init.clone()],
            index: HashMap::from([(init, 0)]),
            edges: Vec::new(),
            labels: Vec::new(),
        };
        let mut i = 0;
        while i < m.states.len() {
            let g = m.states[i].clone();
            let mut out = Vec::new();
            for (tuple, e, t) in naive_transitions(amas, &g) {
                let next = m.states.len();
                let id = *m.index.entry(t.clone()).or_insert(next);
                if id == next {
                    m.states.push(t);
                }
                out.push((tuple, e, id));
            }
            m.labels.push(naive_label(amas, &g));
            m.edges.push(out);
            i += 1;
        }
        m
    }
}

/// Describes the first difference between a library model and the naive
/// construction of the same AMAS, or checks the structural laws on it.
pub fn well_formedness(model: &Model, naive: &NaiveModel) -> Result<(), String> {
    if model.state_count() != naive.states.len() {
        return Err(format!("{} states vs {} reachable", model.state_count(), naive.states.len()));
    }
    for s in model.state_ids() {
        let g = model.state(s).0.clone();
        let n = *naive.index.get(&g).ok_or_else(|| format!("unreachable state {g:?}"))?;
        if model.valuation(s) != &naive.labels[n] {
            return Err(format!("valuation at {g:?} is not the union of local labels"));
        }
        let ours: BTreeSet<(Vec<u32>, EventId, Global)> = model
            .transitions(s)
            .into_iter()
            .map(|t| (t.input.0, t.event, model.state(t.target).0.clone()))
            .collect();
        let theirs: BTreeSet<(Vec<u32>, EventId, Global)> = naive.edges[n]
            .iter()
            .map(|(c, e, t)| (c.clone(), *e, naive.states[*t].clone()))
            .collect();
        if ours != theirs {
            return Err(format!("transitions differ at {g:?}"));
        }
        let mut per_tuple: BTreeMap<&Vec<u32>, usize> = BTreeMap::new();
        for (c, e, t) in &theirs {
            *per_tuple.entry(c).or_default() += 1;
            if *e == EPSILON && *t != g {
                return Err(format!("ε-transition leaves {g:?}"));
            }
        }
        let expected: usize = model
            .amas()
            .agents
            .iter()
            .map(|a| a.repertoire[g[a.index.0 as usize].0 as usize].len())
            .product();
        if per_tuple.len() != expected {
            return Err(format!("seriality fails at {g:?}"));
        }
    }
    Ok(())
}

/// A memoryless strategy: choice per (agent, local).
pub type NaiveStrategy = BTreeMap<(usize, LocalId), u32>;

/// Every strategy of the coalition over local states occurring in `states`.
pub fn all_strategies(amas: &Amas, states: &[Global], coalition: &BTreeSet<AgentId>) -> Vec<NaiveStrategy> {
    let mut slots = BTreeSet::new();
    for g in states {
        for a in coalition {
            let i = a.0 as usize;
            slots.insert((i, g[i]));
        }
    }
    let slots: Vec<(usize, LocalId)> = slots.into_iter().collect();
    let sizes: Vec<usize> = slots
        .iter()
        .map(|&(i, l)| amas.agents[i].repertoire[l.0 as usize].len())
        .collect();
    tuples(&sizes)
        .into_iter()
        .map(|t| slots.iter().copied().zip(t).collect())
        .collect()
}

/// Explicit transitions from `edges` consistent with the strategy under
/// the given outcome mode.
pub fn consistent<'a>(
    edges: &'a [Edge],
    g: &Global,
    strategy: &NaiveStrategy,
    mode: OutcomeMode,
) -> Vec<&'a Edge> {
    let agrees = |tuple: &[u32]| {
        strategy
            .iter()
            .all(|(&(i, l), &c)| g[i] != l || tuple[i] == c)
    };
    let mut out: Vec<&Edge> = edges.iter().filter(|(t, _, _)| agrees(t)).collect();
    if mode == OutcomeMode::React && out.iter().any(|(_, e, _)| *e != EPSILON) {
        out.retain(|(_, e, _)| *e != EPSILON);
    }
    out
}

/// Outcome graph: successor lists over naive state indices reachable from
/// the initial state.
pub fn outcome(naive: &NaiveModel, strategy: &NaiveStrategy, mode: OutcomeMode) -> BTreeMap<usize, BTreeSet<usize>> {
    let mut succ = BTreeMap::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        if succ.contains_key(&u) {
            continue;
        }
        let next: BTreeSet<usize> = consistent(&naive.edges[u], &naive.states[u], strategy, mode)
            .into_iter()
            .map(|e| e.2)
            .collect();
        queue.extend(next.iter().copied());
        succ.insert(u, next);
    }
    succ
}

/// Whether some path from the root stays in `inside` forever.
fn has_lasso_within(succ: &BTreeMap<usize, BTreeSet<usize>>, root: usize, inside: &dyn Fn(usize) -> bool) -> bool {
    // Colour-based DFS restricted to `inside`: a back edge closes a lasso.
    if !inside(root) {
        return false;
    }
    let mut colour: HashMap<usize, u8> = HashMap::new();
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(root, succ[&root].iter().copied().collect())];
    colour.insert(root, 1);
    while let Some((u, pending)) = stack.last_mut() {
        match pending.pop() {
            Some(v) if inside(v) => match colour.get(&v) {
                Some(1) => return true,
                Some(_) => {}
                None => {
                    colour.insert(v, 1);
                    stack.push((v, succ[&v].iter().copied().collect()));
                }
            },
            Some(_) => {}
            None => {
                colour.insert(*u, 2);
                stack.pop();
            }
        }
    }
    false
}

/// Whether some path from the root reaches a `target` state through states
/// in `through` (the target itself need not be in `through`).
fn reaches(
    succ: &BTreeMap<usize, BTreeSet<usize>>,
    root: usize,
    through: &dyn Fn(usize) -> bool,
    target: &dyn Fn(usize) -> bool,
) -> bool {
    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        if target(u) {
            return true;
        }
        if !through(u) {
            continue;
        }
        for &v in &succ[&u] {
            if seen.insert(v) {
                queue.push_back(v);
            }
        }
    }
    false
}

/// Every infinite path of the outcome graph satisfies the goal. Each case
/// searches for a refuting path directly.
pub fn all_paths(succ: &BTreeMap<usize, BTreeSet<usize>>, labels: &[BTreeSet<PropId>], goal: &Goal) -> bool {
    let sat = |f: &PropFormula, u: usize| f.eval(&labels[u]);
    match goal {
        Goal::Eventually(p) => !has_lasso_within(succ, 0, &|u| !sat(p, u)),
        Goal::Always(p) => !reaches(succ, 0, &|_| true, &|u| !sat(p, u)),
        Goal::Until(p, q) => {
            let waiting = |u| sat(p, u) && !sat(q, u);
            let broken = |u| !sat(p, u) && !sat(q, u);
            !(reaches(succ, 0, &waiting, &broken) || has_lasso_within(succ, 0, &waiting))
        }
        // p R q fails iff some path satisfies !p U !q.
        Goal::Release(p, q) => !reaches(succ, 0, &|u| !sat(p, u), &|u| !sat(q, u)),
    }
}

pub fn naive_strategic(amas: &Amas, naive: &NaiveModel, m: &Strategic, mode: OutcomeMode) -> bool {
    all_strategies(amas, &naive.states, &m.coalition)
        .iter()
        .any(|s| all_paths(&outcome(naive, s, mode), &naive.labels, &m.goal))
}

/// ir verdict at the initial state by exhaustive strategy enumeration.
pub fn naive_check(amas: &Amas, naive: &NaiveModel, f: &Formula, mode: OutcomeMode) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(p) => naive.labels[0].contains(p),
        Formula::Not(a) => !naive_check(amas, naive, a, mode),
        Formula::And(a, b) => naive_check(amas, naive, a, mode) && naive_check(amas, naive, b, mode),
        Formula::Or(a, b) => naive_check(amas, naive, a, mode) || naive_check(amas, naive, b, mode),
        Formula::Strategic(m) => naive_strategic(amas, naive, m, mode),
    }
}

/// Replays finite-memory strategies on the naive model (standard outcome)
/// and checks the goal on every path of the product.
pub fn naive_replay(naive: &NaiveModel, transducers: &[Transducer], goal: &Goal) -> Result<bool, String> {
    type Node = (usize, Vec<usize>);
    let root: Node = (0, transducers.iter().map(|t| t.initial()).collect());
    let mut ids: HashMap<Node, usize> = HashMap::from([(root.clone(), 0)]);
    let mut nodes = vec![root];
    let mut succ: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let mut i = 0;
    while i < nodes.len() {
        let (u, memory) = nodes[i].clone();
        let g = &naive.states[u];
        let mut strategy = NaiveStrategy::new();
        for (t, &q) in transducers.iter().zip(&memory) {
            let a = t.agent.0 as usize;
            strategy.insert((a, g[a]), t.output[q]);
        }
        let mut next = BTreeSet::new();
        for (_, _, v) in consistent(&naive.edges[u], g, &strategy, OutcomeMode::Std) {
            let h = &naive.states[*v];
            let mem = transducers
                .iter()
                .zip(&memory)
                .map(|(t, &q)| t.step(q, h[t.agent.0 as usize]).map_err(|e| e.to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            let node = (*v, mem);
            let fresh = nodes.len();
            let id = *ids.entry(node.clone()).or_insert(fresh);
            if id == fresh {
                nodes.push(node);
            }
            next.insert(id);
        }
        succ.insert(i, next);
        i += 1;
    }
    let labels: Vec<BTreeSet<PropId>> = nodes.iter().map(|(u, _)| naive.labels[*u].clone()).collect();
    Ok(all_paths(&succ, &labels, goal))
}

/// Kept `(event, target)` pairs at state `s` of `model` under a strategy,
/// read off the explicit transition relation.
pub fn kept_pairs(model: &Model, s: amc_core::model::StateId, strategy: &NaiveStrategy, mode: OutcomeMode) -> BTreeSet<(EventId, Global)> {
    let g = model.state(s).0.clone();
    let edges: Vec<Edge> = model
        .transitions(s)
        .into_iter()
        .map(|t| (t.input.0, t.event, t.target.index()))
        .collect();
    consistent(&edges, &g, strategy, mode)
        .into_iter()
        .map(|(_, e, t)| (*e, model.state(amc_core::model::StateId::from_index(*t)).0.clone()))
        .collect()
}

/// Events labelling moves of `model` that change a `props` label or are
/// owned by a coalition member.
pub fn visible_events(model: &Model, coalition: &BTreeSet<AgentId>, props: &BTreeSet<PropId>) -> BTreeSet<EventId> {
    let amas = model.amas();
    let mut out = BTreeSet::new();
    for a in coalition {
        out.extend(amas.agents[a.0 as usize].events.iter().copied());
    }
    for s in model.state_ids() {
        for m in model.moves(s) {
            let before: BTreeSet<&PropId> = model.valuation(s).intersection(props).collect();
            let after: BTreeSet<&PropId> = model.valuation(m.target).intersection(props).collect();
            if before != after {
                out.insert(m.event);
            }
        }
    }
    out
}

/// Structural ample-set conditions on a reduced model against its full
/// model: reduced states whose proper events are a strict subset of the
/// full ones use only invisible events, and such states form no cycle.
pub fn ample_conditions(
    full: &Model,
    reduced: &Model,
    coalition: &BTreeSet<AgentId>,
    props: &BTreeSet<PropId>,
) -> Result<usize, String> {
    let visible = visible_events(full, coalition, props);
    let mut partial = BTreeSet::new();
    for s in reduced.state_ids() {
        let f = full.lookup(reduced.state(s)).ok_or("reduced state missing from full model")?;
        let mine: BTreeSet<EventId> = reduced.moves(s).iter().map(|m| m.event).collect();
        let all: BTreeSet<EventId> = full.moves(f).iter().map(|m| m.event).collect();
        if mine != all {
            if let Some(e) = mine.intersection(&visible).next() {
                return Err(format!("visible event {} in a proper ample set", full.amas().event_name(*e)));
            }
            partial.insert(s);
        }
    }
    // Cycle search among partially expanded states.
    let mut colour: HashMap<usize, u8> = HashMap::new();
    for &root in &partial {
        if colour.contains_key(&root.index()) {
            continue;
        }
        let mut stack = vec![(root, reduced.moves(root).iter().map(|m| m.target).collect::<Vec<_>>())];
        colour.insert(root.index(), 1);
        while let Some((u, pending)) = stack.last_mut() {
            match pending.pop() {
                Some(v) if partial.contains(&v) => match colour.get(&v.index()) {
                    Some(1) => return Err("cycle without a fully expanded state".into()),
                    Some(_) => {}
                    None => {
                        colour.insert(v.index(), 1);
                        stack.push((v, reduced.moves(v).iter().map(|m| m.target).collect()));
                    }
                },
                Some(_) => {}
                None => {
                    colour.insert(u.index(), 2);
                    stack.pop();
                }
            }
        }
    }
    Ok(partial.len())
}
