//! μ-calculus formulas over game structures.
//!
//! One tree serves both the classical (set-valued) and the energy
//! (credit-valued) interpretation; `<>`/`[]` become the energy modalities
//! when the tree is handed to the energy evaluator.

mod analysis;
mod builtin;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

use crate::assertion::Assertion;

pub use analysis::{FormulaMetrics, Fragment};
pub use builtin::{buchi, buchi_target, builtin, cobuchi, dual_buchi, parity, reachability, safety, state_param};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FixKind {
    Mu,
    Nu,
}

impl FixKind {
    pub fn dual(self) -> Self {
        match self {
            FixKind::Mu => FixKind::Nu,
            FixKind::Nu => FixKind::Mu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    /// A state variable `v`.
    Atom(String),
    /// A negated state variable `!v`.
    NegAtom(String),
    /// An arbitrary pure-state assertion (constants and `@"..."` escapes).
    Prop(Assertion),
    /// A relational variable.
    Var(String),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// System controllable predecessor.
    Diamond(Box<Formula>),
    /// Environment controllable predecessor.
    Square(Box<Formula>),
    Fix(FixKind, String, Box<Formula>),
    Not(Box<Formula>),
}

impl Formula {
    pub fn parse(text: &str) -> Result<Formula, crate::error::ParseError> {
        parse::parse_formula(text)
    }

    pub fn var(name: &str) -> Formula {
        Formula::Var(name.to_string())
    }

    pub fn atom(name: &str) -> Formula {
        Formula::Atom(name.to_string())
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn diamond(a: Formula) -> Formula {
        Formula::Diamond(Box::new(a))
    }

    pub fn square(a: Formula) -> Formula {
        Formula::Square(Box::new(a))
    }

    pub fn mu(x: &str, body: Formula) -> Formula {
        Formula::Fix(FixKind::Mu, x.to_string(), Box::new(body))
    }

    pub fn nu(x: &str, body: Formula) -> Formula {
        Formula::Fix(FixKind::Nu, x.to_string(), Box::new(body))
    }

    pub fn negate(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) | Formula::NegAtom(_) | Formula::Prop(_) | Formula::Var(_) => vec![],
            Formula::And(a, b) | Formula::Or(a, b) => vec![a, b],
            Formula::Diamond(a) | Formula::Square(a) | Formula::Not(a) | Formula::Fix(_, _, a) => {
                vec![a]
            }
        }
    }

    /// Relational variables occurring free.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        collect_free(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn occurs_free(&self, x: &str) -> bool {
        match self {
            Formula::Var(y) => x == y,
            Formula::Fix(_, y, body) => y != x && body.occurs_free(x),
            _ => self.children().iter().any(|c| c.occurs_free(x)),
        }
    }

    /// Renames bound variables so that each is bound exactly once and no
    /// bound name collides with a free one.
    pub fn rename_apart(&self) -> Formula {
        let mut used: BTreeSet<String> = self.free_vars();
        rename(self, &mut used, &mut Vec::new())
    }

    /// Replaces free occurrences of `x` by `with`.
    pub fn substitute(&self, x: &str, with: &Formula) -> Formula {
        match self {
            Formula::Var(y) if y == x => with.clone(),
            Formula::Fix(_, y, _) if y == x => self.clone(),
            _ => self.map_children(|c| c.substitute(x, with)),
        }
    }

    pub(crate) fn map_children(&self, mut f: impl FnMut(&Formula) -> Formula) -> Formula {
        match self {
            Formula::Atom(_) | Formula::NegAtom(_) | Formula::Prop(_) | Formula::Var(_) => self.clone(),
            Formula::And(a, b) => Formula::And(Box::new(f(a)), Box::new(f(b))),
            Formula::Or(a, b) => Formula::Or(Box::new(f(a)), Box::new(f(b))),
            Formula::Diamond(a) => Formula::Diamond(Box::new(f(a))),
            Formula::Square(a) => Formula::Square(Box::new(f(a))),
            Formula::Not(a) => Formula::Not(Box::new(f(a))),
            Formula::Fix(k, x, a) => Formula::Fix(*k, x.clone(), Box::new(f(a))),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Fix(..) => 0,
            Formula::Or(..) => 1,
            Formula::And(..) => 2,
            Formula::Diamond(_) | Formula::Square(_) | Formula::Not(_) | Formula::NegAtom(_) => 3,
            Formula::Atom(_) | Formula::Prop(_) | Formula::Var(_) => 4,
        }
    }
}

fn collect_free(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match f {
        Formula::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Formula::Fix(_, x, body) => {
            bound.push(x.clone());
            collect_free(body, bound, out);
            bound.pop();
        }
        _ => {
            for c in f.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

fn rename(f: &Formula, used: &mut BTreeSet<String>, scope: &mut Vec<(String, String)>) -> Formula {
    match f {
        Formula::Var(x) => {
            let mapped = scope.iter().rev().find(|(from, _)| from == x).map(|(_, to)| to.clone());
            Formula::Var(mapped.unwrap_or_else(|| x.clone()))
        }
        Formula::Fix(k, x, body) => {
            let fresh = if used.contains(x) {
                (1..)
                    .map(|i| format!("{x}_{i}"))
                    .find(|n| !used.contains(n))
                    .expect("unbounded supply")
            } else {
                x.clone()
            };
            used.insert(fresh.clone());
            scope.push((x.clone(), fresh.clone()));
            let b = rename(body, used, scope);
            scope.pop();
            Formula::Fix(*k, fresh, Box::new(b))
        }
        _ => f.map_children(|c| rename(c, used, scope)),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Operands that are binary or fixpoints are always parenthesized.
        let operand = |f: &mut fmt::Formatter<'_>, a: &Formula| {
            if a.precedence() < 3 {
                write!(f, "({a})")
            } else {
                write!(f, "{a}")
            }
        };
        match self {
            Formula::Atom(v) => write!(f, "{v}"),
            Formula::NegAtom(v) => write!(f, "!{v}"),
            Formula::Prop(Assertion::Const(b)) => write!(f, "{b}"),
            Formula::Prop(a) => write!(f, "@\"{a}\""),
            Formula::Var(x) => write!(f, "{x}"),
            Formula::And(a, b) => {
                operand(f, a)?;
                write!(f, " & ")?;
                operand(f, b)
            }
            Formula::Or(a, b) => {
                operand(f, a)?;
                write!(f, " | ")?;
                operand(f, b)
            }
            Formula::Diamond(a) => {
                write!(f, "<>")?;
                operand(f, a)
            }
            Formula::Square(a) => {
                write!(f, "[]")?;
                operand(f, a)
            }
            // `!v` would read back as a literal.
            Formula::Not(a) if matches!(**a, Formula::Atom(_)) => write!(f, "!({a})"),
            Formula::Not(a) => {
                write!(f, "!")?;
                operand(f, a)
            }
            Formula::Fix(k, x, body) => {
                let kw = match k {
                    FixKind::Mu => "mu",
                    FixKind::Nu => "nu",
                };
                write!(f, "{kw} {x} . ")?;
                if matches!(**body, Formula::And(..) | Formula::Or(..)) {
                    write!(f, "({body})")
                } else {
                    write!(f, "{body}")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renaming_apart_binds_each_name_once() {
        let f = Formula::parse("(mu X . <>X) & (mu X . X | x)").unwrap();
        let names: Vec<String> = binders(&f);
        assert_eq!(names, vec!["X".to_string(), "X_1".to_string()]);
        assert!(f.is_closed());
    }

    #[test]
    fn renaming_avoids_free_names() {
        let f = Formula::parse("X & (nu X . <>X)").unwrap();
        assert_eq!(f.free_vars().into_iter().collect::<Vec<_>>(), vec!["X".to_string()]);
        assert_eq!(binders(&f), vec!["X_1".to_string()]);
    }

    #[test]
    fn substitution_respects_binders() {
        let f = Formula::parse("X & (nu Y . <>Y)").unwrap();
        let g = f.substitute("X", &Formula::negate(Formula::var("X")));
        assert_eq!(g.to_string(), "!X & (nu Y . <>Y)");
    }

    fn binders(f: &Formula) -> Vec<String> {
        let mut out = Vec::new();
        fn go(f: &Formula, out: &mut Vec<String>) {
            if let Formula::Fix(_, x, _) = f {
                out.push(x.clone());
            }
            for c in f.children() {
                go(c, out);
            }
        }
        go(f, &mut out);
        out
    }
}
