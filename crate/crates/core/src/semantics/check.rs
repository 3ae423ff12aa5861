use std::collections::BTreeSet;

use crate::dsl::{Formula, Goal, PropFormula, Strategic};
use crate::model::PropId;

use super::{outcome_subgraph, Limits, Model, OutcomeMode, SemanticsError, StrategyIr, StrategySpace};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModalityResult {
    pub holds: bool,
    /// First witnessing strategy in enumeration order.
    pub witness: Option<StrategyIr>,
    pub strategies_checked: u128,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IrVerdict {
    pub holds: bool,
    /// One entry per strategic modality, in left-to-right order.
    pub modalities: Vec<ModalityResult>,
}

/// Evaluates an sATL formula at the initial state under ir strategies.
pub fn check_ir(
    model: &Model,
    formula: &Formula,
    mode: OutcomeMode,
    limits: &Limits,
) -> Result<IrVerdict, SemanticsError> {
    let modalities = formula.modalities();
    // Reject oversized enumerations before doing any work.
    for m in &modalities {
        let space = StrategySpace::new(model, &m.coalition)?;
        check_count(&space, limits)?;
    }
    let results = modalities
        .into_iter()
        .map(|m| check_strategic(model, m, mode, limits))
        .collect::<Result<Vec<_>, _>>()?;
    let mut next = results.iter().map(|r| r.holds);
    let holds = eval(formula, model.valuation(model.initial()), &mut next);
    Ok(IrVerdict {
        holds,
        modalities: results,
    })
}

fn check_count(space: &StrategySpace, limits: &Limits) -> Result<(), SemanticsError> {
    match space.count() {
        Some(c) if c <= limits.max_strategies => Ok(()),
        count => Err(SemanticsError::EnumerationTooLarge {
            count: count.unwrap_or(u128::MAX),
            limit: limits.max_strategies,
        }),
    }
}

fn eval(f: &Formula, at: &BTreeSet<PropId>, modal: &mut impl Iterator<Item = bool>) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(p) => at.contains(p),
        Formula::Not(a) => !eval(a, at, modal),
        // Both sides are always evaluated so modality results stay aligned.
        Formula::And(a, b) => {
            let l = eval(a, at, modal);
            let r = eval(b, at, modal);
            l && r
        }
        Formula::Or(a, b) => {
            let l = eval(a, at, modal);
            let r = eval(b, at, modal);
            l || r
        }
        Formula::Strategic(_) => modal.next().expect("one result per modality"),
    }
}

/// `⟨⟨A⟩⟩γ` at the initial state: searches for a strategy all of whose
/// outcome paths satisfy the goal.
pub fn check_strategic(
    model: &Model,
    strategic: &Strategic,
    mode: OutcomeMode,
    limits: &Limits,
) -> Result<ModalityResult, SemanticsError> {
    let space = StrategySpace::new(model, &strategic.coalition)?;
    check_count(&space, limits)?;
    let mut checked = 0u128;
    let mut odometer = vec![0u32; space.digit_count()];
    loop {
        checked += 1;
        let strategy = space.strategy_at(&odometer);
        let graph = outcome_subgraph(model, &strategy, mode);
        if all_paths_satisfy(&graph.succ, &strategic.goal, |n| model.valuation(graph.nodes[n])) {
            return Ok(ModalityResult {
                holds: true,
                witness: Some(strategy),
                strategies_checked: checked,
            });
        }
        // Strategies that agree on every visited local state have the same
        // outcome, so only digits up to the last visited one need to move.
        let mut end = 0;
        for &s in &graph.nodes {
            let g = model.state(s);
            for &a in &strategic.coalition {
                if let Some(d) = space.digit_of(a, g.local(a)) {
                    end = end.max(d + 1);
                }
            }
        }
        if !space.advance(&mut odometer, end) {
            break;
        }
    }
    Ok(ModalityResult {
        holds: false,
        witness: None,
        strategies_checked: checked,
    })
}

/// Whether every infinite path from node 0 satisfies `goal`.
///
/// Nodes without an infinite continuation contribute no paths and are
/// ignored; on serial graphs this is a no-op.
pub fn all_paths_satisfy<'a>(
    succ: &[Vec<usize>],
    goal: &Goal,
    label: impl Fn(usize) -> &'a BTreeSet<PropId>,
) -> bool {
    let n = succ.len();
    if n == 0 {
        return true;
    }
    let live = live_nodes(succ);
    if !live[0] {
        return true;
    }
    let holds = |f: &PropFormula| -> Vec<bool> { (0..n).map(|i| f.eval(label(i))).collect() };
    match goal {
        Goal::Eventually(p) => all_until(succ, &live, &vec![true; n], &holds(p)),
        Goal::Until(p, q) => all_until(succ, &live, &holds(p), &holds(q)),
        Goal::Always(p) => all_release(succ, &live, &vec![false; n], &holds(p)),
        Goal::Release(p, q) => all_release(succ, &live, &holds(p), &holds(q)),
    }
}

/// Nodes from which some infinite path exists: the greatest set closed under
/// "has a successor in the set".
fn live_nodes(succ: &[Vec<usize>]) -> Vec<bool> {
    let n = succ.len();
    let mut pred = vec![Vec::new(); n];
    let mut out_deg = vec![0usize; n];
    for (u, vs) in succ.iter().enumerate() {
        out_deg[u] = vs.len();
        for &v in vs {
            pred[v].push(u);
        }
    }
    let mut live = vec![true; n];
    let mut stack: Vec<usize> = (0..n).filter(|&u| out_deg[u] == 0).collect();
    for &u in &stack {
        live[u] = false;
    }
    while let Some(v) = stack.pop() {
        for &u in &pred[v] {
            if live[u] {
                out_deg[u] -= 1;
                if out_deg[u] == 0 {
                    live[u] = false;
                    stack.push(u);
                }
            }
        }
    }
    live
}

/// `A[p U q]` at node 0: least fixpoint `q ∨ (p ∧ AX·)` over live nodes.
fn all_until(succ: &[Vec<usize>], live: &[bool], p: &[bool], q: &[bool]) -> bool {
    let n = succ.len();
    let mut pred = vec![Vec::new(); n];
    let mut pending = vec![0usize; n];
    for u in 0..n {
        if !live[u] {
            continue;
        }
        for &v in &succ[u] {
            if live[v] {
                pred[v].push(u);
                pending[u] += 1;
            }
        }
    }
    let mut good = vec![false; n];
    let mut stack = Vec::new();
    for u in 0..n {
        if live[u] && q[u] {
            good[u] = true;
            stack.push(u);
        }
    }
    while let Some(v) = stack.pop() {
        for &u in &pred[v] {
            if good[u] || !p[u] {
                continue;
            }
            pending[u] -= 1;
            if pending[u] == 0 {
                good[u] = true;
                stack.push(u);
            }
        }
    }
    good[0]
}

/// `A[p R q]` at node 0, as the complement of `E[¬p U ¬q]`.
fn all_release(succ: &[Vec<usize>], live: &[bool], p: &[bool], q: &[bool]) -> bool {
    let n = succ.len();
    let mut pred = vec![Vec::new(); n];
    for u in 0..n {
        if live[u] {
            for &v in &succ[u] {
                if live[v] {
                    pred[v].push(u);
                }
            }
        }
    }
    let mut bad = vec![false; n];
    let mut stack = Vec::new();
    for u in 0..n {
        if live[u] && !q[u] {
            bad[u] = true;
            stack.push(u);
        }
    }
    while let Some(v) = stack.pop() {
        for &u in &pred[v] {
            if !bad[u] && !p[u] {
                bad[u] = true;
                stack.push(u);
            }
        }
    }
    !bad[0]
}
