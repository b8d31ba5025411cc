//! Static analyses: length, alternation depth, fragment, monotonicity and
//! negation normal form.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::assertion::Assertion;
use crate::error::{Error, Result};

use super::{FixKind, Formula};

/// Which modal operators a formula uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fragment {
    /// Only `<>`.
    Sys,
    /// Only `[]`.
    Env,
    /// No modal operator at all.
    Both,
    /// Both `<>` and `[]`.
    Mixed,
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Fragment::Sys => "sys",
            Fragment::Env => "env",
            Fragment::Both => "both",
            Fragment::Mixed => "mixed",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaMetrics {
    /// Node count of the syntax tree.
    pub length: usize,
    pub alternation_depth: usize,
    pub closed: bool,
    pub fragment: Fragment,
}

impl Formula {
    pub fn metrics(&self) -> FormulaMetrics {
        FormulaMetrics {
            length: self.length(),
            alternation_depth: self.alternation_depth(),
            closed: self.is_closed(),
            fragment: self.fragment(),
        }
    }

    pub fn length(&self) -> usize {
        1 + self.children().iter().map(|c| c.length()).sum::<usize>()
    }

    /// Alternation depth in the interdependent-nesting sense: a fixpoint only
    /// adds to the depth of an enclosing opposite fixpoint whose variable it
    /// mentions. Negations are pushed inward first so that polarity is explicit.
    pub fn alternation_depth(&self) -> usize {
        if self.contains_not() {
            alternation_depth(&self.push_negations())
        } else {
            alternation_depth(self)
        }
    }

    pub fn fragment(&self) -> Fragment {
        let (mut dia, mut sq) = (false, false);
        self.visit(&mut |f| match f {
            Formula::Diamond(_) => dia = true,
            Formula::Square(_) => sq = true,
            _ => {}
        });
        match (dia, sq) {
            (false, false) => Fragment::Both,
            (true, false) => Fragment::Sys,
            (false, true) => Fragment::Env,
            (true, true) => Fragment::Mixed,
        }
    }

    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn contains_not(&self) -> bool {
        let mut any = false;
        self.visit(&mut |f| any |= matches!(f, Formula::Not(_)));
        any
    }

    /// Every bound variable must occur free in its binder body only under an
    /// even number of negations.
    pub fn check_monotone(&self) -> Result<()> {
        let mut path = Vec::new();
        check(self, &mut path)
    }

    /// Negation normal form: negations pushed onto literals and free variables,
    /// dualizing `&`/`|`, `<>`/`[]` and `mu`/`nu` along the way.
    pub fn push_negations(&self) -> Formula {
        push(self, false, &mut BTreeSet::new())
    }

    /// Shorthand for the negation normal form of `!self`.
    pub fn dual(&self) -> Formula {
        push(self, true, &mut BTreeSet::new())
    }
}

fn alternation_depth(f: &Formula) -> usize {
    match f {
        Formula::Fix(kind, x, body) => {
            let mut d = alternation_depth(body).max(1);
            body.visit(&mut |g| {
                if let Formula::Fix(k2, _, _) = g {
                    if k2 != kind && g.occurs_free(x) {
                        d = d.max(alternation_depth(g) + 1);
                    }
                }
            });
            d
        }
        _ => f.children().iter().map(|c| alternation_depth(c)).max().unwrap_or(0),
    }
}

fn label(f: &Formula) -> String {
    match f {
        Formula::And(..) => "&".into(),
        Formula::Or(..) => "|".into(),
        Formula::Diamond(_) => "<>".into(),
        Formula::Square(_) => "[]".into(),
        Formula::Not(_) => "!".into(),
        Formula::Fix(FixKind::Mu, x, _) => format!("mu {x}"),
        Formula::Fix(FixKind::Nu, x, _) => format!("nu {x}"),
        other => other.to_string(),
    }
}

fn check(f: &Formula, path: &mut Vec<String>) -> Result<()> {
    path.push(label(f));
    if let Formula::Fix(_, x, body) = f {
        let mut inner = path.clone();
        occurrences_even(body, x, false, &mut inner)?;
    }
    for c in f.children() {
        check(c, path)?;
    }
    path.pop();
    Ok(())
}

fn occurrences_even(f: &Formula, x: &str, odd: bool, path: &mut Vec<String>) -> Result<()> {
    path.push(label(f));
    match f {
        Formula::Var(y) if y == x && odd => {
            return Err(Error::NotMonotone {
                var: x.to_string(),
                path: path.join(" > "),
            })
        }
        Formula::Fix(_, y, _) if y == x => {}
        Formula::Not(a) => occurrences_even(a, x, !odd, path)?,
        _ => {
            for c in f.children() {
                occurrences_even(c, x, odd, path)?;
            }
        }
    }
    path.pop();
    Ok(())
}

/// `negated`: whether an odd number of negations is pending.
/// `flipped`: bound variables currently standing for their own negation.
fn push(f: &Formula, negated: bool, flipped: &mut BTreeSet<String>) -> Formula {
    match f {
        Formula::Atom(v) if negated => Formula::NegAtom(v.clone()),
        Formula::NegAtom(v) if negated => Formula::Atom(v.clone()),
        Formula::Atom(_) | Formula::NegAtom(_) => f.clone(),
        Formula::Prop(a) if negated => Formula::Prop(match a {
            Assertion::Const(b) => Assertion::Const(!b),
            Assertion::Not(inner) => (**inner).clone(),
            _ => Assertion::not(a.clone()),
        }),
        Formula::Prop(_) => f.clone(),
        Formula::Var(x) => {
            if negated ^ flipped.contains(x) {
                Formula::negate(f.clone())
            } else {
                f.clone()
            }
        }
        Formula::Not(a) => push(a, !negated, flipped),
        Formula::And(a, b) => {
            let (l, r) = (push(a, negated, flipped), push(b, negated, flipped));
            if negated {
                Formula::or(l, r)
            } else {
                Formula::and(l, r)
            }
        }
        Formula::Or(a, b) => {
            let (l, r) = (push(a, negated, flipped), push(b, negated, flipped));
            if negated {
                Formula::and(l, r)
            } else {
                Formula::or(l, r)
            }
        }
        Formula::Diamond(a) => {
            let inner = push(a, negated, flipped);
            if negated {
                Formula::square(inner)
            } else {
                Formula::diamond(inner)
            }
        }
        Formula::Square(a) => {
            let inner = push(a, negated, flipped);
            if negated {
                Formula::diamond(inner)
            } else {
                Formula::square(inner)
            }
        }
        Formula::Fix(kind, x, body) => {
            // !(mu X . g(X)) == nu X . !g(!X)
            let was = flipped.contains(x);
            if negated {
                flipped.insert(x.clone());
            } else {
                flipped.remove(x);
            }
            let b = push(body, negated, flipped);
            if was {
                flipped.insert(x.clone());
            } else {
                flipped.remove(x);
            }
            let k = if negated { kind.dual() } else { *kind };
            Formula::Fix(k, x.clone(), Box::new(b))
        }
    }
}
