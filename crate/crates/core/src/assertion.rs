//! Propositional assertions over state variables and their primed copies.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, ParseError, Result};
use crate::game::{State, VariableSet};
use crate::lexer::{Cursor, Tok};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Assertion {
    Const(bool),
    Var { name: String, primed: bool },
    Not(Box<Assertion>),
    And(Box<Assertion>, Box<Assertion>),
    Or(Box<Assertion>, Box<Assertion>),
    Implies(Box<Assertion>, Box<Assertion>),
    Iff(Box<Assertion>, Box<Assertion>),
}

impl Assertion {
    pub fn var(name: &str) -> Self {
        Assertion::Var {
            name: name.to_string(),
            primed: false,
        }
    }

    pub fn primed(name: &str) -> Self {
        Assertion::Var {
            name: name.to_string(),
            primed: true,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Assertion) -> Self {
        Assertion::Not(Box::new(a))
    }

    pub fn and(a: Assertion, b: Assertion) -> Self {
        Assertion::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Assertion, b: Assertion) -> Self {
        Assertion::Or(Box::new(a), Box::new(b))
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut cur = Cursor::new(text)?;
        let a = parse_iff(&mut cur)?;
        if *cur.peek() != Tok::Eof {
            return Err(cur.unexpected("end of assertion"));
        }
        Ok(a)
    }

    /// Visits every atom as `(name, primed)`.
    pub fn for_each_atom(&self, f: &mut impl FnMut(&str, bool)) {
        match self {
            Assertion::Const(_) => {}
            Assertion::Var { name, primed } => f(name, *primed),
            Assertion::Not(a) => a.for_each_atom(f),
            Assertion::And(a, b) | Assertion::Or(a, b) | Assertion::Implies(a, b) | Assertion::Iff(a, b) => {
                a.for_each_atom(f);
                b.for_each_atom(f);
            }
        }
    }

    pub fn has_primed(&self) -> bool {
        let mut any = false;
        self.for_each_atom(&mut |_, p| any |= p);
        any
    }

    /// Boolean evaluation on a state and an optional next state.
    pub fn eval(&self, vars: &VariableSet, s: State, next: Option<State>) -> Result<bool> {
        Ok(match self {
            Assertion::Const(b) => *b,
            Assertion::Var { name, primed } => {
                let idx = vars
                    .index_of(name)
                    .ok_or_else(|| Error::MalformedAssertion(format!("unknown identifier `{name}`")))?;
                if *primed {
                    let t = next.ok_or_else(|| Error::Arity(name.clone()))?;
                    t.bit(idx)
                } else {
                    s.bit(idx)
                }
            }
            Assertion::Not(a) => !a.eval(vars, s, next)?,
            Assertion::And(a, b) => a.eval(vars, s, next)? && b.eval(vars, s, next)?,
            Assertion::Or(a, b) => a.eval(vars, s, next)? || b.eval(vars, s, next)?,
            Assertion::Implies(a, b) => !a.eval(vars, s, next)? || b.eval(vars, s, next)?,
            Assertion::Iff(a, b) => a.eval(vars, s, next)? == b.eval(vars, s, next)?,
        })
    }

    /// Resolves identifiers against `vars`, rejecting atoms outside `scope`.
    pub fn bind(&self, vars: &VariableSet, scope: AtomScope) -> Result<BoundAssertion> {
        let mut err = None;
        self.for_each_atom(&mut |name, primed| {
            if err.is_some() {
                return;
            }
            match vars.index_of(name) {
                None => err = Some(Error::MalformedAssertion(format!("unknown identifier `{name}`"))),
                Some(i) if primed => match scope {
                    AtomScope::State => {
                        err = Some(Error::MalformedAssertion(format!(
                            "primed atom `{name}'` in a state assertion"
                        )))
                    }
                    AtomScope::InputTransition if !vars.is_input(i) => {
                        err = Some(Error::MalformedAssertion(format!(
                            "environment assertion references primed output `{name}'`"
                        )))
                    }
                    _ => {}
                },
                Some(_) => {}
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        Ok(BoundAssertion {
            root: lower(self, vars),
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Assertion::Iff(..) => 1,
            Assertion::Implies(..) => 2,
            Assertion::Or(..) => 3,
            Assertion::And(..) => 4,
            Assertion::Not(_) => 5,
            Assertion::Const(_) | Assertion::Var { .. } => 6,
        }
    }
}

/// Which atoms an assertion may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomScope {
    /// Only unprimed variables.
    State,
    /// Unprimed variables and primed inputs (the environment transition relation).
    InputTransition,
    /// Any variable, primed or not.
    Transition,
}

impl FromStr for Assertion {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        Assertion::parse(s)
    }
}

fn parse_iff(cur: &mut Cursor) -> Result<Assertion, ParseError> {
    let lhs = parse_implies(cur)?;
    if cur.eat(&Tok::DoubleArrow) {
        let rhs = parse_iff(cur)?;
        return Ok(Assertion::Iff(Box::new(lhs), Box::new(rhs)));
    }
    Ok(lhs)
}

fn parse_implies(cur: &mut Cursor) -> Result<Assertion, ParseError> {
    let lhs = parse_or(cur)?;
    if cur.eat(&Tok::Arrow) {
        let rhs = parse_implies(cur)?;
        return Ok(Assertion::Implies(Box::new(lhs), Box::new(rhs)));
    }
    Ok(lhs)
}

fn parse_or(cur: &mut Cursor) -> Result<Assertion, ParseError> {
    let mut lhs = parse_and(cur)?;
    while cur.eat(&Tok::Pipe) {
        let rhs = parse_and(cur)?;
        lhs = Assertion::Or(Box::new(lhs), Box::new(rhs));
    }
    Ok(lhs)
}

fn parse_and(cur: &mut Cursor) -> Result<Assertion, ParseError> {
    let mut lhs = parse_unary(cur)?;
    while cur.eat(&Tok::Amp) {
        let rhs = parse_unary(cur)?;
        lhs = Assertion::And(Box::new(lhs), Box::new(rhs));
    }
    Ok(lhs)
}

fn parse_unary(cur: &mut Cursor) -> Result<Assertion, ParseError> {
    match cur.peek().clone() {
        Tok::Bang => {
            cur.bump();
            Ok(Assertion::Not(Box::new(parse_unary(cur)?)))
        }
        Tok::LParen => {
            cur.bump();
            let inner = parse_iff(cur)?;
            cur.expect(&Tok::RParen)?;
            Ok(inner)
        }
        Tok::Ident(name) => {
            cur.bump();
            match name.as_str() {
                "true" => Ok(Assertion::Const(true)),
                "false" => Ok(Assertion::Const(false)),
                _ => {
                    let primed = cur.eat(&Tok::Prime);
                    Ok(Assertion::Var { name, primed })
                }
            }
        }
        _ => Err(cur.unexpected("an assertion")),
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, a: &Assertion, paren: bool| {
            if paren {
                write!(f, "({a})")
            } else {
                write!(f, "{a}")
            }
        };
        let p = self.precedence();
        match self {
            Assertion::Const(b) => write!(f, "{b}"),
            Assertion::Var { name, primed } => {
                write!(f, "{name}{}", if *primed { "'" } else { "" })
            }
            Assertion::Not(a) => {
                write!(f, "!")?;
                wrap(f, a, a.precedence() < p)
            }
            Assertion::And(a, b) | Assertion::Or(a, b) => {
                let op = if matches!(self, Assertion::And(..)) { "&" } else { "|" };
                wrap(f, a, a.precedence() < p)?;
                write!(f, " {op} ")?;
                wrap(f, b, b.precedence() <= p)
            }
            Assertion::Implies(a, b) | Assertion::Iff(a, b) => {
                let op = if matches!(self, Assertion::Implies(..)) {
                    "->"
                } else {
                    "<->"
                };
                wrap(f, a, a.precedence() <= p)?;
                write!(f, " {op} ")?;
                wrap(f, b, b.precedence() < p)
            }
        }
    }
}

/// An assertion with identifiers resolved to bit positions.
#[derive(Debug, Clone)]
pub struct BoundAssertion {
    root: Node,
}

#[derive(Debug, Clone)]
enum Node {
    Const(bool),
    Cur(u32),
    Next(u32),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
}

fn lower(a: &Assertion, vars: &VariableSet) -> Node {
    let bx = |x: &Assertion| Box::new(lower(x, vars));
    match a {
        Assertion::Const(b) => Node::Const(*b),
        Assertion::Var { name, primed } => {
            let i = vars.index_of(name).expect("checked by bind") as u32;
            if *primed {
                Node::Next(i)
            } else {
                Node::Cur(i)
            }
        }
        Assertion::Not(x) => Node::Not(bx(x)),
        Assertion::And(x, y) => Node::And(bx(x), bx(y)),
        Assertion::Or(x, y) => Node::Or(bx(x), bx(y)),
        Assertion::Implies(x, y) => Node::Or(Box::new(Node::Not(bx(x))), bx(y)),
        Assertion::Iff(x, y) => Node::Iff(bx(x), bx(y)),
    }
}

impl BoundAssertion {
    /// Evaluates on raw assignments; primed atoms read `next`.
    #[inline]
    pub fn holds(&self, cur: u32, next: u32) -> bool {
        eval_node(&self.root, cur, next)
    }
}

fn eval_node(n: &Node, cur: u32, next: u32) -> bool {
    match n {
        Node::Const(b) => *b,
        Node::Cur(i) => cur >> i & 1 == 1,
        Node::Next(i) => next >> i & 1 == 1,
        Node::Not(a) => !eval_node(a, cur, next),
        Node::And(a, b) => eval_node(a, cur, next) && eval_node(b, cur, next),
        Node::Or(a, b) => eval_node(a, cur, next) || eval_node(b, cur, next),
        Node::Iff(a, b) => eval_node(a, cur, next) == eval_node(b, cur, next),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1_vars() -> VariableSet {
        VariableSet::new(vec!["x".into(), "y".into()], &["x".to_string()]).unwrap()
    }

    fn st(vars: &VariableSet, text: &str) -> State {
        vars.state_from_literals(text).unwrap()
    }

    #[test]
    fn evaluates_primed_atom_against_next_state() {
        let v = g1_vars();
        let a = Assertion::parse("y'").unwrap();
        assert!(a.eval(&v, st(&v, "!x & !y"), Some(st(&v, "x & y"))).unwrap());
    }

    #[test]
    fn evaluates_state_assertion() {
        let v = g1_vars();
        let a = Assertion::parse("x & !y").unwrap();
        assert!(a.eval(&v, st(&v, "x & !y"), None).unwrap());
        assert!(Assertion::parse("true")
            .unwrap()
            .eval(&v, st(&v, "!x & y"), None)
            .unwrap());
    }

    #[test]
    fn unknown_identifier_and_arity_errors() {
        let v = g1_vars();
        let s = st(&v, "x & y");
        assert!(matches!(
            Assertion::parse("z").unwrap().eval(&v, s, None),
            Err(Error::MalformedAssertion(_))
        ));
        assert!(matches!(
            Assertion::parse("x'").unwrap().eval(&v, s, None),
            Err(Error::Arity(_))
        ));
    }

    #[test]
    fn precedence_and_associativity() {
        let a = Assertion::parse("a | b & !c -> d <-> e").unwrap();
        assert_eq!(a.to_string(), "a | b & !c -> d <-> e");
        match &a {
            Assertion::Iff(l, _) => assert!(matches!(**l, Assertion::Implies(..))),
            _ => panic!("iff should bind loosest"),
        }
        let r = Assertion::parse("a -> b -> c").unwrap();
        match r {
            Assertion::Implies(_, rhs) => assert!(matches!(*rhs, Assertion::Implies(..))),
            _ => panic!(),
        }
        assert_eq!(Assertion::parse("(a -> b) -> c").unwrap().to_string(), "(a -> b) -> c");
        assert_eq!(Assertion::parse("a & (b & c)").unwrap().to_string(), "a & (b & c)");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = Assertion::parse("x & ").unwrap_err();
        assert_eq!(e.pos, 4);
        let e = Assertion::parse("x # y").unwrap_err();
        assert_eq!(e.pos, 2);
        assert!(Assertion::parse("(x").is_err());
    }

    #[test]
    fn bind_checks_scopes() {
        let v = g1_vars();
        assert!(Assertion::parse("x'")
            .unwrap()
            .bind(&v, AtomScope::InputTransition)
            .is_ok());
        assert!(Assertion::parse("y'")
            .unwrap()
            .bind(&v, AtomScope::InputTransition)
            .is_err());
        assert!(Assertion::parse("y'").unwrap().bind(&v, AtomScope::State).is_err());
        let b = Assertion::parse("x <-> y'")
            .unwrap()
            .bind(&v, AtomScope::Transition)
            .unwrap();
        assert!(b.holds(0b01, 0b10));
        assert!(!b.holds(0b01, 0b00));
    }
}
