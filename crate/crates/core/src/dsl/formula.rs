use std::collections::BTreeSet;

use super::lexer::{tokenize, Cursor, Tok};
use super::DslError;
use crate::model::{AgentId, Amas, PropId};

/// Propositional formula: the operand of a temporal goal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PropFormula {
    True,
    False,
    Atom(PropId),
    Not(Box<PropFormula>),
    And(Box<PropFormula>, Box<PropFormula>),
    Or(Box<PropFormula>, Box<PropFormula>),
}

impl PropFormula {
    pub fn eval(&self, props: &BTreeSet<PropId>) -> bool {
        match self {
            PropFormula::True => true,
            PropFormula::False => false,
            PropFormula::Atom(p) => props.contains(p),
            PropFormula::Not(f) => !f.eval(props),
            PropFormula::And(a, b) => a.eval(props) && b.eval(props),
            PropFormula::Or(a, b) => a.eval(props) || b.eval(props),
        }
    }

    pub fn atoms(&self, out: &mut BTreeSet<PropId>) {
        match self {
            PropFormula::True | PropFormula::False => {}
            PropFormula::Atom(p) => {
                out.insert(*p);
            }
            PropFormula::Not(f) => f.atoms(out),
            PropFormula::And(a, b) | PropFormula::Or(a, b) => {
                a.atoms(out);
                b.atoms(out);
            }
        }
    }

    pub fn negate(self) -> Self {
        PropFormula::Not(Box::new(self))
    }

    pub fn to_text(&self, amas: &Amas) -> String {
        match self {
            PropFormula::True => "true".into(),
            PropFormula::False => "false".into(),
            PropFormula::Atom(p) => amas.prop_name(*p).to_string(),
            PropFormula::Not(f) => format!("!{}", f.to_text(amas)),
            PropFormula::And(a, b) => format!("({} & {})", a.to_text(amas), b.to_text(amas)),
            PropFormula::Or(a, b) => format!("({} | {})", a.to_text(amas), b.to_text(amas)),
        }
    }
}

/// A single temporal operator over propositional operands.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Goal {
    Eventually(PropFormula),
    Always(PropFormula),
    Until(PropFormula, PropFormula),
    Release(PropFormula, PropFormula),
}

impl Goal {
    pub fn atoms(&self, out: &mut BTreeSet<PropId>) {
        match self {
            Goal::Eventually(p) | Goal::Always(p) => p.atoms(out),
            Goal::Until(a, b) | Goal::Release(a, b) => {
                a.atoms(out);
                b.atoms(out);
            }
        }
    }

    pub fn to_text(&self, amas: &Amas) -> String {
        match self {
            Goal::Eventually(p) => format!("F {}", p.to_text(amas)),
            Goal::Always(p) => format!("G {}", p.to_text(amas)),
            Goal::Until(a, b) => format!("{} U {}", a.to_text(amas), b.to_text(amas)),
            Goal::Release(a, b) => format!("{} R {}", a.to_text(amas), b.to_text(amas)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Strategic {
    pub coalition: BTreeSet<AgentId>,
    pub goal: Goal,
}

impl Strategic {
    pub fn to_text(&self, amas: &Amas) -> String {
        let names: Vec<&str> = self
            .coalition
            .iter()
            .map(|a| amas.agent(*a).name.as_str())
            .collect();
        format!("<<{}>> {}", names.join(","), self.goal.to_text(amas))
    }
}

/// A simple-ATL state formula: boolean structure over propositions and
/// strategic modalities, none nested.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(PropId),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Strategic(Strategic),
}

impl Formula {
    pub fn strategic(coalition: impl IntoIterator<Item = AgentId>, goal: Goal) -> Self {
        Formula::Strategic(Strategic {
            coalition: coalition.into_iter().collect(),
            goal,
        })
    }

    /// Strategic subformulas in left-to-right order.
    pub fn modalities(&self) -> Vec<&Strategic> {
        let mut out = Vec::new();
        self.collect_modalities(&mut out);
        out
    }

    fn collect_modalities<'a>(&'a self, out: &mut Vec<&'a Strategic>) {
        match self {
            Formula::Strategic(s) => out.push(s),
            Formula::Not(f) => f.collect_modalities(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_modalities(out);
                b.collect_modalities(out);
            }
            Formula::True | Formula::False | Formula::Atom(_) => {}
        }
    }

    pub fn atoms(&self) -> BTreeSet<PropId> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<PropId>) {
        match self {
            Formula::Atom(p) => {
                out.insert(*p);
            }
            Formula::Strategic(s) => s.goal.atoms(out),
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Formula::True | Formula::False => {}
        }
    }

    /// Union of all coalitions mentioned.
    pub fn agents(&self) -> BTreeSet<AgentId> {
        self.modalities()
            .into_iter()
            .flat_map(|s| s.coalition.iter().copied())
            .collect()
    }

    pub fn to_text(&self, amas: &Amas) -> String {
        match self {
            Formula::True => "true".into(),
            Formula::False => "false".into(),
            Formula::Atom(p) => amas.prop_name(*p).to_string(),
            Formula::Not(f) => format!("!{}", f.to_text(amas)),
            Formula::And(a, b) => format!("({} & {})", a.to_text(amas), b.to_text(amas)),
            Formula::Or(a, b) => format!("({} | {})", a.to_text(amas), b.to_text(amas)),
            Formula::Strategic(s) => format!("({})", s.to_text(amas)),
        }
    }
}

fn reserved(tok: &Tok) -> Option<&'static str> {
    match tok {
        Tok::Ident(s) => match s.as_str() {
            "F" => Some("F"),
            "G" => Some("G"),
            "X" => Some("X"),
            "U" => Some("U"),
            "R" => Some("R"),
            _ => None,
        },
        _ => None,
    }
}

struct Parser<'a> {
    cur: Cursor,
    amas: &'a Amas,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> DslError {
        DslError::syntax(self.cur.pos(), message)
    }

    fn formula(&mut self) -> Result<Formula, DslError> {
        let mut lhs = self.conjunction()?;
        while self.cur.eat(&Tok::Pipe) {
            let rhs = self.conjunction()?;
            lhs = Formula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, DslError> {
        let mut lhs = self.unary()?;
        while self.cur.eat(&Tok::Amp) {
            let rhs = self.unary()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, DslError> {
        match self.cur.peek().clone() {
            Tok::Bang => {
                self.cur.next();
                Ok(Formula::Not(Box::new(self.unary()?)))
            }
            Tok::LParen => {
                self.cur.next();
                let f = self.formula()?;
                self.cur.expect(&Tok::RParen)?;
                Ok(f)
            }
            Tok::LAngles => {
                self.cur.next();
                self.strategic().map(Formula::Strategic)
            }
            tok => match reserved(&tok) {
                Some("X") => Err(self.error("next operator not supported")),
                Some(op) => Err(self.error(format!(
                    "temporal operator {op} must follow a strategic modality"
                ))),
                _ => match self.atom()? {
                    PropFormula::True => Ok(Formula::True),
                    PropFormula::False => Ok(Formula::False),
                    PropFormula::Atom(p) => Ok(Formula::Atom(p)),
                    _ => unreachable!(),
                },
            },
        }
    }

    fn strategic(&mut self) -> Result<Strategic, DslError> {
        let mut coalition = BTreeSet::new();
        if !self.cur.eat(&Tok::RAngles) {
            loop {
                let (name, pos) = self.cur.ident()?;
                let agent = self
                    .amas
                    .agent_by_name(&name)
                    .ok_or_else(|| DslError::syntax(pos, format!("unknown agent '{name}'")))?;
                coalition.insert(agent);
                if self.cur.eat(&Tok::RAngles) {
                    break;
                }
                self.cur.expect(&Tok::Comma)?;
            }
        }
        if coalition.is_empty() {
            return Err(self.error("empty coalition"));
        }
        let goal = match reserved(self.cur.peek()) {
            Some("F") => {
                self.cur.next();
                Goal::Eventually(self.operand()?)
            }
            Some("G") => {
                self.cur.next();
                Goal::Always(self.operand()?)
            }
            Some("X") => return Err(self.error("next operator not supported")),
            Some(op) => return Err(self.error(format!("missing left operand of {op}"))),
            None => {
                let lhs = self.operand()?;
                match reserved(self.cur.peek()) {
                    Some("U") => {
                        self.cur.next();
                        Goal::Until(lhs, self.operand()?)
                    }
                    Some("R") => {
                        self.cur.next();
                        Goal::Release(lhs, self.operand()?)
                    }
                    _ => return Err(self.cur.unexpected("U or R")),
                }
            }
        };
        if matches!(reserved(self.cur.peek()), Some("U") | Some("R")) {
            return Err(self.error("only one temporal operator per strategic modality"));
        }
        Ok(Strategic { coalition, goal })
    }

    /// A unary propositional operand of a temporal operator.
    fn operand(&mut self) -> Result<PropFormula, DslError> {
        match self.cur.peek().clone() {
            Tok::Bang => {
                self.cur.next();
                Ok(self.operand()?.negate())
            }
            Tok::LParen => {
                self.cur.next();
                let f = self.prop_formula()?;
                self.cur.expect(&Tok::RParen)?;
                Ok(f)
            }
            Tok::LAngles => Err(self.error("nesting not supported")),
            tok => match reserved(&tok) {
                Some("X") => Err(self.error("next operator not supported")),
                Some(_) => Err(self.error("nested temporal operators not supported")),
                None => self.atom(),
            },
        }
    }

    fn prop_formula(&mut self) -> Result<PropFormula, DslError> {
        let mut lhs = self.prop_conjunction()?;
        while self.cur.eat(&Tok::Pipe) {
            let rhs = self.prop_conjunction()?;
            lhs = PropFormula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn prop_conjunction(&mut self) -> Result<PropFormula, DslError> {
        let mut lhs = self.operand()?;
        while self.cur.eat(&Tok::Amp) {
            let rhs = self.operand()?;
            lhs = PropFormula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<PropFormula, DslError> {
        let (name, pos) = self.cur.ident()?;
        match name.as_str() {
            "true" => Ok(PropFormula::True),
            "false" => Ok(PropFormula::False),
            _ => self
                .amas
                .props
                .lookup(&name)
                .map(PropFormula::Atom)
                .ok_or_else(|| DslError::syntax(pos, format!("unknown proposition '{name}'"))),
        }
    }
}

/// Parses a simple-ATL formula, resolving names against `amas`.
pub fn parse_formula(text: &str, amas: &Amas) -> Result<Formula, DslError> {
    let mut parser = Parser {
        cur: Cursor::new(tokenize(text)?).without_newlines(),
        amas,
    };
    let f = parser.formula()?;
    if parser.cur.peek() != &Tok::Eof {
        return Err(parser.cur.unexpected("end of formula"));
    }
    Ok(f)
}

/// Parses a `.spec` file: one formula per line, `#` starts a comment.
/// Returns `(line number, formula)` pairs.
pub fn parse_spec_file(text: &str, amas: &Amas) -> Result<Vec<(usize, Formula)>, DslError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let f = parse_formula(body, amas).map_err(|e| match e {
            DslError::Syntax { mut pos, message } => {
                pos.line = i + 1;
                DslError::Syntax { pos, message }
            }
            other => other,
        })?;
        out.push((i + 1, f));
    }
    Ok(out)
}
