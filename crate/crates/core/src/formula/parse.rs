use crate::assertion::Assertion;
use crate::error::ParseError;
use crate::lexer::{Cursor, Tok};

use super::{FixKind, Formula};

pub(super) fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut cur = Cursor::new(text)?;
    let f = parse_or(&mut cur)?;
    if *cur.peek() != Tok::Eof {
        return Err(cur.unexpected("end of formula"));
    }
    Ok(f.rename_apart())
}

fn is_relvar(name: &str) -> bool {
    name.starts_with(|c: char| c.is_ascii_uppercase())
}

fn parse_or(cur: &mut Cursor) -> Result<Formula, ParseError> {
    let mut lhs = parse_and(cur)?;
    while cur.eat(&Tok::Pipe) {
        let rhs = parse_and(cur)?;
        lhs = Formula::or(lhs, rhs);
    }
    Ok(lhs)
}

fn parse_and(cur: &mut Cursor) -> Result<Formula, ParseError> {
    let mut lhs = parse_unary(cur)?;
    while cur.eat(&Tok::Amp) {
        let rhs = parse_unary(cur)?;
        lhs = Formula::and(lhs, rhs);
    }
    Ok(lhs)
}

fn parse_unary(cur: &mut Cursor) -> Result<Formula, ParseError> {
    match cur.peek().clone() {
        Tok::Bang => {
            cur.bump();
            // `!v` on a state variable is a literal, not a negation node.
            if let Tok::Ident(name) = cur.peek().clone() {
                if !is_relvar(&name) && !is_keyword(&name) && *cur.peek_at(1) != Tok::Prime {
                    cur.bump();
                    return Ok(Formula::NegAtom(name));
                }
            }
            Ok(Formula::negate(parse_unary(cur)?))
        }
        Tok::Diamond => {
            cur.bump();
            Ok(Formula::diamond(parse_unary(cur)?))
        }
        Tok::Square => {
            cur.bump();
            Ok(Formula::square(parse_unary(cur)?))
        }
        Tok::Ident(kw) if kw == "mu" || kw == "nu" => {
            cur.bump();
            let kind = if kw == "mu" { FixKind::Mu } else { FixKind::Nu };
            let pos = cur.pos();
            let x = match cur.bump() {
                Tok::Ident(x) if is_relvar(&x) => x,
                _ => {
                    return Err(ParseError::new(
                        pos,
                        "expected a relational variable (uppercase identifier) after fixpoint keyword",
                    ))
                }
            };
            cur.expect(&Tok::Dot)?;
            let body = parse_or(cur)?;
            Ok(Formula::Fix(kind, x, Box::new(body)))
        }
        _ => parse_primary(cur),
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "mu" | "nu" | "true" | "false")
}

fn parse_primary(cur: &mut Cursor) -> Result<Formula, ParseError> {
    let pos = cur.pos();
    match cur.bump() {
        Tok::LParen => {
            let inner = parse_or(cur)?;
            cur.expect(&Tok::RParen)?;
            Ok(inner)
        }
        Tok::Ident(name) => {
            if *cur.peek() == Tok::Prime {
                return Err(ParseError::new(cur.pos(), "primed atoms are not allowed in formulas"));
            }
            Ok(match name.as_str() {
                "true" => Formula::Prop(Assertion::Const(true)),
                "false" => Formula::Prop(Assertion::Const(false)),
                _ if is_relvar(&name) => Formula::Var(name),
                _ => Formula::Atom(name),
            })
        }
        Tok::Quoted(body) => {
            let a = Assertion::parse(&body)
                .map_err(|e| ParseError::new(pos + 2 + e.pos, format!("in @\"...\": {}", e.message)))?;
            if a.has_primed() {
                return Err(ParseError::new(pos, "@\"...\" atoms must be pure-state assertions"));
            }
            Ok(Formula::Prop(a))
        }
        other => Err(ParseError::new(
            pos,
            format!("expected a formula, found {}", other.describe()),
        )),
    }
}
