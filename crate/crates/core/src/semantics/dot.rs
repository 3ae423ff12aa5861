use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::model::{StateId, EPSILON};

use super::{Model, OutcomeGraph};

#[derive(Clone, Debug, Default)]
pub struct DotOptions {
    /// Graph name in the `digraph` header.
    pub name: Option<String>,
    /// States drawn with a double border (e.g. ample states of a reduction).
    pub highlight: BTreeSet<StateId>,
}

fn state_label(model: &Model, s: StateId) -> String {
    let amas = model.amas();
    let locals: Vec<&str> = model
        .state(s)
        .0
        .iter()
        .enumerate()
        .map(|(i, &l)| amas.agents[i].local_name(l))
        .collect();
    let props: Vec<&str> = model
        .valuation(s)
        .iter()
        .map(|&p| amas.prop_name(p))
        .collect();
    if props.is_empty() {
        format!("({})", locals.join(","))
    } else {
        format!("({})\\n{}", locals.join(","), props.join(","))
    }
}

fn choice_text(model: &Model, s: StateId, tuple: &[u32]) -> String {
    let amas = model.amas();
    let g = model.state(s);
    let parts: Vec<String> = tuple
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let agent = &amas.agents[i];
            let events: Vec<&str> = agent.choices(g.0[i])[c as usize]
                .events()
                .iter()
                .map(|&e| amas.event_name(e))
                .collect();
            format!("{{{}}}", events.join(","))
        })
        .collect();
    format!("({})", parts.join(","))
}

/// DOT rendering of the full transition relation, one edge per `in/out`
/// transition. Nodes are ordered by state index.
pub fn export_dot(model: &Model, options: &DotOptions) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", options.name.as_deref().unwrap_or("model"));
    for s in model.state_ids() {
        let mut attrs = format!("label=\"{}\"", state_label(model, s));
        if s == model.initial() {
            attrs.push_str(", style=bold");
        }
        if options.highlight.contains(&s) {
            attrs.push_str(", peripheries=2");
        }
        let _ = writeln!(out, "  s{} [{attrs}];", s.0);
    }
    for s in model.state_ids() {
        for t in model.transitions(s) {
            let event = if t.event == EPSILON {
                "ε".to_string()
            } else {
                model.amas().event_name(t.event).to_string()
            };
            let _ = writeln!(
                out,
                "  s{} -> s{} [label=\"{}/{}\"];",
                s.0,
                t.target.0,
                choice_text(model, s, &t.input.0),
                event
            );
        }
    }
    out.push_str("}\n");
    out
}

/// DOT rendering of an outcome subgraph (edges labelled by event only).
pub fn outcome_dot(model: &Model, graph: &OutcomeGraph) -> String {
    let mut out = String::from("digraph outcome {\n");
    for (n, &s) in graph.nodes.iter().enumerate() {
        let _ = writeln!(out, "  n{n} [label=\"{}\"];", state_label(model, s));
    }
    for &(from, event, to) in &graph.edges {
        let name = if event == EPSILON { "ε" } else { model.amas().event_name(event) };
        let _ = writeln!(out, "  n{from} -> n{to} [label=\"{name}\"];");
    }
    out.push_str("}\n");
    out
}
