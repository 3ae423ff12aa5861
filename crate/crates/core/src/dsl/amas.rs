use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::lexer::{tokenize, Cursor, Pos, Tok};
use super::DslError;
use crate::model::{
    validate, AgentId, AgentModule, Amas, Choice, EventId, LocalId, EPSILON_NAME,
};

const KEYWORDS: &[&str] = &[
    "agent",
    "option",
    "init",
    "states",
    "events",
    "props",
    "transitions",
    "repertoire",
    "labels",
];

type Named = (String, Pos);

#[derive(Default)]
struct RawAgent {
    name: Named,
    states: Vec<Named>,
    init: Option<Named>,
    events: Vec<Named>,
    props: Vec<Named>,
    transitions: Vec<(Named, Named, Named)>,
    repertoire: Vec<(Named, Vec<Vec<Named>>)>,
    labels: Vec<(Named, Vec<Named>)>,
}

/// Parses and validates an AMAS source.
pub fn parse_amas(text: &str) -> Result<Amas, DslError> {
    let amas = parse_amas_unchecked(text)?;
    let diags = validate(&amas);
    if diags.is_empty() {
        Ok(amas)
    } else {
        Err(DslError::Invalid(diags))
    }
}

/// Parses and resolves names without running [`validate`].
pub fn parse_amas_unchecked(text: &str) -> Result<Amas, DslError> {
    let mut cur = Cursor::new(tokenize(text)?);
    let mut amas = Amas::default();
    cur.skip_newlines();
    while cur.peek() == &Tok::Ident("option".into()) {
        cur.next();
        let (opt, pos) = cur.ident()?;
        match opt.as_str() {
            "nondeterministic" => amas.nondeterministic = true,
            _ => return Err(DslError::syntax(pos, format!("unknown option '{opt}'"))),
        }
        cur.skip_newlines();
    }
    let mut raws = Vec::new();
    loop {
        cur.skip_newlines();
        match cur.peek() {
            Tok::Eof => break,
            Tok::Ident(k) if k == "agent" => raws.push(parse_agent(&mut cur)?),
            _ => return Err(cur.unexpected("'agent'")),
        }
    }
    for (pos, raw) in raws.into_iter().enumerate() {
        let agent = resolve(&mut amas, AgentId::from_index(pos), raw)?;
        amas.agents.push(agent);
    }
    Ok(amas)
}

fn is_keyword(tok: &Tok) -> bool {
    matches!(tok, Tok::Ident(s) if KEYWORDS.contains(&s.as_str()))
}

fn entry_ident(cur: &mut Cursor) -> Result<Named, DslError> {
    if is_keyword(cur.peek()) {
        return Err(cur.unexpected("a name (keywords are reserved)"));
    }
    cur.ident()
}

fn skip_separators(cur: &mut Cursor) {
    while matches!(cur.peek(), Tok::Newline | Tok::Semi | Tok::Comma) {
        cur.next();
    }
}

fn at_entry(cur: &Cursor) -> bool {
    matches!(cur.peek(), Tok::Ident(_)) && !is_keyword(cur.peek())
}

fn end_of_entry(cur: &mut Cursor) -> Result<(), DslError> {
    match cur.peek() {
        Tok::Newline | Tok::Semi => {
            cur.next();
            Ok(())
        }
        Tok::RBrace => Ok(()),
        _ => Err(cur.unexpected("end of line")),
    }
}

fn ident_list(cur: &mut Cursor) -> Result<Vec<Named>, DslError> {
    let mut out = Vec::new();
    loop {
        skip_separators(cur);
        if !at_entry(cur) {
            return Ok(out);
        }
        out.push(cur.ident()?);
    }
}

fn parse_agent(cur: &mut Cursor) -> Result<RawAgent, DslError> {
    cur.next();
    let mut raw = RawAgent {
        name: entry_ident(cur)?,
        ..RawAgent::default()
    };
    cur.skip_newlines();
    cur.expect(&Tok::LBrace)?;
    loop {
        cur.skip_newlines();
        if cur.eat(&Tok::RBrace) {
            return Ok(raw);
        }
        let (section, pos) = cur.ident()?;
        match section.as_str() {
            "init" => {
                if raw.init.is_some() {
                    return Err(DslError::syntax(pos, "duplicate init"));
                }
                raw.init = Some(entry_ident(cur)?);
                end_of_entry(cur)?;
            }
            "states" => raw.states.extend(ident_list(cur)?),
            "events" => raw.events.extend(ident_list(cur)?),
            "props" => raw.props.extend(ident_list(cur)?),
            "transitions" => loop {
                skip_separators(cur);
                if !at_entry(cur) {
                    break;
                }
                let from = cur.ident()?;
                cur.expect(&Tok::Dash)?;
                let event = cur.ident()?;
                cur.expect(&Tok::Arrow)?;
                let to = entry_ident(cur)?;
                raw.transitions.push((from, event, to));
                end_of_entry(cur)?;
            },
            "repertoire" => loop {
                skip_separators(cur);
                if !at_entry(cur) {
                    break;
                }
                let local = cur.ident()?;
                cur.expect(&Tok::Colon)?;
                cur.expect(&Tok::LBracket)?;
                let mut choices = Vec::new();
                while !cur.eat(&Tok::RBracket) {
                    if !choices.is_empty() {
                        cur.expect(&Tok::Comma)?;
                    }
                    cur.expect(&Tok::LBrace)?;
                    let mut events = Vec::new();
                    while !cur.eat(&Tok::RBrace) {
                        if !events.is_empty() {
                            cur.expect(&Tok::Comma)?;
                        }
                        events.push(entry_ident(cur)?);
                    }
                    choices.push(events);
                }
                raw.repertoire.push((local, choices));
                end_of_entry(cur)?;
            },
            "labels" => loop {
                skip_separators(cur);
                if !at_entry(cur) {
                    break;
                }
                let local = cur.ident()?;
                cur.expect(&Tok::Colon)?;
                let mut props = Vec::new();
                while at_entry(cur) {
                    props.push(cur.ident()?);
                    if !cur.eat(&Tok::Comma) {
                        break;
                    }
                }
                raw.labels.push((local, props));
                end_of_entry(cur)?;
            },
            _ => {
                return Err(DslError::syntax(
                    pos,
                    format!("unknown section '{section}'"),
                ))
            }
        }
    }
}

fn resolve(amas: &mut Amas, index: AgentId, raw: RawAgent) -> Result<AgentModule, DslError> {
    let (name, name_pos) = raw.name;
    let mut locals: Vec<String> = Vec::new();
    let mut local_ids = BTreeMap::new();
    for (state, pos) in &raw.states {
        if local_ids.insert(state.clone(), LocalId::from_index(locals.len())).is_some() {
            return Err(DslError::syntax(*pos, format!("duplicate local state '{state}'")));
        }
        locals.push(state.clone());
    }
    let local = |(n, pos): &Named| {
        local_ids
            .get(n)
            .copied()
            .ok_or_else(|| DslError::syntax(*pos, format!("undeclared local state '{n}'")))
    };
    let initial = match &raw.init {
        Some(init) => local(init)?,
        None => return Err(DslError::syntax(name_pos, format!("agent '{name}' has no init"))),
    };

    let mut events = BTreeSet::new();
    for (event, pos) in &raw.events {
        if event == EPSILON_NAME {
            return Err(DslError::syntax(*pos, "reserved event name 'epsilon'"));
        }
        events.insert(amas.events.intern(event));
    }
    let event = |(n, pos): &Named, amas: &Amas| -> Result<EventId, DslError> {
        amas.events
            .lookup(n)
            .filter(|e| events.contains(e))
            .ok_or_else(|| DslError::syntax(*pos, format!("undeclared event '{n}'")))
    };

    let mut transitions = BTreeSet::new();
    for (from, ev, to) in &raw.transitions {
        transitions.insert((local(from)?, event(ev, amas)?, local(to)?));
    }

    let mut repertoire: Vec<Option<Vec<Choice>>> = vec![None; locals.len()];
    for (l, choices) in &raw.repertoire {
        let id = local(l)?;
        let mut resolved = Vec::new();
        for choice in choices {
            let ids = choice
                .iter()
                .map(|e| event(e, amas))
                .collect::<Result<Vec<_>, _>>()?;
            resolved.push(Choice::new(ids));
        }
        if repertoire[id.index()].replace(resolved).is_some() {
            return Err(DslError::syntax(l.1, format!("duplicate repertoire for '{}'", l.0)));
        }
    }
    let repertoire = repertoire
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.ok_or_else(|| {
                DslError::syntax(
                    name_pos,
                    format!("repertoire undefined for local state '{}'", locals[i]),
                )
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut props = BTreeSet::new();
    for (p, _) in &raw.props {
        props.insert(amas.props.intern(p));
    }
    let mut valuation = vec![BTreeSet::new(); locals.len()];
    for (l, names) in &raw.labels {
        let id = local(l)?;
        for (p, _) in names {
            let prop = amas.props.intern(p);
            props.insert(prop);
            valuation[id.index()].insert(prop);
        }
    }

    Ok(AgentModule {
        name,
        index,
        locals,
        initial,
        events,
        repertoire,
        transitions,
        props,
        valuation,
    })
}

fn join<'a>(items: impl IntoIterator<Item = &'a str>, sep: &str) -> String {
    items.into_iter().collect::<Vec<_>>().join(sep)
}

/// Canonical source text; `parse_amas(&render(a))` reproduces `a`.
pub fn render(amas: &Amas) -> String {
    let mut out = String::new();
    if amas.nondeterministic {
        out.push_str("option nondeterministic\n\n");
    }
    for (i, agent) in amas.agents.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let ev = |e: &EventId| amas.events.name(*e);
        let _ = writeln!(out, "agent {} {{", agent.name);
        let _ = writeln!(out, "  states {}", join(agent.locals.iter().map(String::as_str), ", "));
        let _ = writeln!(out, "  init {}", agent.local_name(agent.initial));
        let _ = writeln!(out, "  events {}", join(agent.events.iter().map(ev), ", "));
        if !agent.props.is_empty() {
            let names = agent.props.iter().map(|p| amas.props.name(*p));
            let _ = writeln!(out, "  props {}", join(names, ", "));
        }
        if !agent.transitions.is_empty() {
            out.push_str("  transitions\n");
            for (from, e, to) in &agent.transitions {
                let _ = writeln!(
                    out,
                    "    {} -{}-> {}",
                    agent.local_name(*from),
                    amas.events.name(*e),
                    agent.local_name(*to)
                );
            }
        }
        out.push_str("  repertoire\n");
        for (l, choices) in agent.repertoire.iter().enumerate() {
            let rendered: Vec<String> = choices
                .iter()
                .map(|c| format!("{{{}}}", join(c.events().iter().map(ev), ", ")))
                .collect();
            let _ = writeln!(out, "    {}: [{}]", agent.locals[l], rendered.join(", "));
        }
        if agent.valuation.iter().any(|v| !v.is_empty()) {
            out.push_str("  labels\n");
            for (l, props) in agent.valuation.iter().enumerate() {
                if props.is_empty() {
                    continue;
                }
                let names = props.iter().map(|p| amas.props.name(*p));
                let _ = writeln!(out, "    {}: {}", agent.locals[l], join(names, ", "));
            }
        }
        out.push_str("}\n");
    }
    out
}
