//! Canonical line-oriented model files.
//!
//! ```text
//! amc-model 1
//! kind full|reduced
//! context <free text>          (optional)
//! amas <n>                     followed by n lines of DSL source
//! states <n>
//! state <id> <local>...        sorted by local-state tuple
//! initial <id>
//! move <src> <event> <dst>
//! eps <state> <c1,c2,...>
//! end
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::dsl::{parse_amas, render};
use crate::model::{LocalId, StateId};

use super::{ChoiceTuple, GlobalState, Model, Move, SemanticsError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Full,
    Reduced,
}

impl ModelKind {
    fn as_str(self) -> &'static str {
        match self {
            ModelKind::Full => "full",
            ModelKind::Reduced => "reduced",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModelFile {
    pub kind: ModelKind,
    pub context: Option<String>,
    pub model: Model,
}

/// Hex SHA-256 of a serialized model (or any text).
pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn serialize_model(model: &Model, kind: ModelKind, context: Option<&str>) -> String {
    let amas = model.amas();
    let mut order: Vec<StateId> = model.state_ids().collect();
    order.sort_by(|a, b| model.state(*a).cmp(model.state(*b)));
    let mut rank = vec![0usize; order.len()];
    for (r, s) in order.iter().enumerate() {
        rank[s.index()] = r;
    }

    let mut out = String::new();
    out.push_str("amc-model 1\n");
    let _ = writeln!(out, "kind {}", kind.as_str());
    if let Some(ctx) = context {
        let _ = writeln!(out, "context {}", ctx.replace('\n', " "));
    }
    let source = render(amas);
    let lines: Vec<&str> = source.lines().collect();
    let _ = writeln!(out, "amas {}", lines.len());
    for line in lines {
        out.push_str(line);
        out.push('\n');
    }
    let _ = writeln!(out, "states {}", order.len());
    for (r, &s) in order.iter().enumerate() {
        let _ = write!(out, "state {r}");
        for (i, &l) in model.state(s).0.iter().enumerate() {
            let _ = write!(out, " {}", amas.agents[i].local_name(l));
        }
        out.push('\n');
    }
    let _ = writeln!(out, "initial {}", rank[model.initial().index()]);
    for &s in &order {
        let mut moves: Vec<(&str, usize)> = model
            .moves(s)
            .iter()
            .map(|m| (amas.event_name(m.event), rank[m.target.index()]))
            .collect();
        moves.sort();
        for (event, target) in moves {
            let _ = writeln!(out, "move {} {event} {target}", rank[s.index()]);
        }
        for tuple in model.deadlocks(s) {
            let joined: Vec<String> = tuple.0.iter().map(u32::to_string).collect();
            let _ = writeln!(out, "eps {} {}", rank[s.index()], joined.join(","));
        }
    }
    out.push_str("end\n");
    out
}

pub fn parse_model_file(text: &str) -> Result<ModelFile, SemanticsError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| {
        lines.next().ok_or_else(|| SemanticsError::ModelFile {
            line: 0,
            message: format!("unexpected end of file, expected {what}"),
        })
    };
    let err = |line: usize, message: String| SemanticsError::ModelFile { line, message };

    let (n, header) = next("header")?;
    if header.trim() != "amc-model 1" {
        return Err(err(n, "missing 'amc-model 1' header".into()));
    }
    let (n, kind_line) = next("kind")?;
    let kind = match kind_line.strip_prefix("kind ") {
        Some("full") => ModelKind::Full,
        Some("reduced") => ModelKind::Reduced,
        _ => return Err(err(n, "expected 'kind full' or 'kind reduced'".into())),
    };
    let (mut n, mut line) = next("amas block")?;
    let mut context = None;
    if let Some(ctx) = line.strip_prefix("context ") {
        context = Some(ctx.to_string());
        (n, line) = next("amas block")?;
    }
    let count: usize = line
        .strip_prefix("amas ")
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| err(n, "expected 'amas <lines>'".into()))?;
    let mut source = String::new();
    for _ in 0..count {
        let (_, l) = next("amas source")?;
        source.push_str(l);
        source.push('\n');
    }
    let amas = parse_amas(&source).map_err(|e| err(n, format!("embedded AMAS: {}", e.message())))?;

    let (n, line) = next("states")?;
    let count: usize = line
        .strip_prefix("states ")
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| err(n, "expected 'states <count>'".into()))?;
    let mut states = Vec::with_capacity(count);
    for expected in 0..count {
        let (n, line) = next("state")?;
        let mut words = line.split_whitespace();
        if words.next() != Some("state") || words.next().and_then(|w| w.parse().ok()) != Some(expected) {
            return Err(err(n, format!("expected 'state {expected} ...'")));
        }
        let locals: Vec<&str> = words.collect();
        if locals.len() != amas.agents.len() {
            return Err(err(n, "wrong number of local states".into()));
        }
        let mut g = Vec::with_capacity(locals.len());
        for (agent, name) in amas.agents.iter().zip(locals) {
            let l: LocalId = agent
                .local_by_name(name)
                .ok_or_else(|| err(n, format!("unknown local state '{name}' of {}", agent.name)))?;
            g.push(l);
        }
        states.push(GlobalState(g));
    }
    let mut seen = HashMap::new();
    for (i, g) in states.iter().enumerate() {
        if seen.insert(g.clone(), i).is_some() {
            return Err(err(0, format!("duplicate state {i}")));
        }
    }
    let state_ref = |n: usize, word: Option<&str>| -> Result<StateId, SemanticsError> {
        word.and_then(|w| w.parse::<usize>().ok())
            .filter(|&i| i < count)
            .map(StateId::from_index)
            .ok_or_else(|| err(n, "bad state reference".into()))
    };

    let (n, line) = next("initial")?;
    let initial = state_ref(n, line.strip_prefix("initial "))?;

    let mut moves = vec![Vec::new(); count];
    let mut deadlocks = vec![Vec::new(); count];
    loop {
        let (n, line) = next("'end'")?;
        let mut words = line.split_whitespace();
        match words.next() {
            Some("end") => break,
            Some("move") => {
                let src = state_ref(n, words.next())?;
                let name = words.next().unwrap_or("");
                let event = amas
                    .events
                    .lookup(name)
                    .filter(|e| e.0 != 0)
                    .ok_or_else(|| err(n, format!("unknown event '{name}'")))?;
                let target = state_ref(n, words.next())?;
                moves[src.index()].push(Move { event, target });
            }
            Some("eps") => {
                let src = state_ref(n, words.next())?;
                let tuple: Option<Vec<u32>> = words
                    .next()
                    .unwrap_or("")
                    .split(',')
                    .map(|c| c.parse().ok())
                    .collect();
                let tuple = tuple.ok_or_else(|| err(n, "bad choice tuple".into()))?;
                if tuple.len() != amas.agents.len() {
                    return Err(err(n, "choice tuple has wrong arity".into()));
                }
                deadlocks[src.index()].push(ChoiceTuple(tuple));
            }
            _ => return Err(err(n, format!("unexpected line '{line}'"))),
        }
    }
    for d in &mut deadlocks {
        d.sort();
    }
    let model = Model::from_parts(Arc::new(amas), states, initial, moves, deadlocks);
    Ok(ModelFile {
        kind,
        context,
        model,
    })
}
