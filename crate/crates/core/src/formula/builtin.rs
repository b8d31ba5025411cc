//! Named formulas for the standard winning conditions.

use std::collections::BTreeMap;

use crate::assertion::Assertion;
use crate::error::{Error, Result};
use crate::game::{is_identifier, PriorityRule};

use super::{FixKind, Formula};

/// Parses a builtin parameter: a state variable, a negated state variable, or
/// any pure-state assertion.
pub fn state_param(text: &str) -> Result<Formula> {
    let t = text.trim();
    let bare = |s: &str| is_identifier(s) && !matches!(s, "true" | "false");
    if bare(t) {
        return Ok(Formula::Atom(t.to_string()));
    }
    if let Some(rest) = t.strip_prefix('!') {
        if bare(rest.trim()) {
            return Ok(Formula::NegAtom(rest.trim().to_string()));
        }
    }
    let a = Assertion::parse(t).map_err(|e| Error::BuiltinParam(format!("`{t}`: {e}")))?;
    if a.has_primed() {
        return Err(Error::BuiltinParam(format!(
            "`{t}` mentions primed variables; parameters must be state assertions"
        )));
    }
    Ok(Formula::Prop(a))
}

/// `nu X . <>X`
pub fn safety() -> Formula {
    Formula::nu("X", Formula::diamond(Formula::var("X")))
}

/// `mu X . (p | <>X)`
pub fn reachability(p: Formula) -> Formula {
    Formula::mu("X", Formula::or(p, Formula::diamond(Formula::var("X"))))
}

/// `nu Z . mu Y . ((J & <>Z) | <>Y)`: visit `J` infinitely often.
pub fn buchi(j: Formula) -> Formula {
    Formula::nu(
        "Z",
        Formula::mu(
            "Y",
            Formula::or(
                Formula::and(j, Formula::diamond(Formula::var("Z"))),
                Formula::diamond(Formula::var("Y")),
            ),
        ),
    )
}

/// `mu Z . nu Y . ((J & <>Y) | <>Z)`: eventually stay in `J` forever.
pub fn cobuchi(j: Formula) -> Formula {
    Formula::mu(
        "Z",
        Formula::nu(
            "Y",
            Formula::or(
                Formula::and(j, Formula::diamond(Formula::var("Y"))),
                Formula::diamond(Formula::var("Z")),
            ),
        ),
    )
}

/// The environment's side of Büchi: the negation normal form of `!buchi(J)`,
/// `mu Z . nu Y . ((!J | []Z) & []Y)`.
pub fn dual_buchi(j: Formula) -> Formula {
    buchi(j).dual()
}

/// Min-even parity over the given priority guards:
/// `s0 Z0 . s1 Z1 ... (P0 & <>Z0) | (P1 & <>Z1) | ...`, one binder per
/// distinct priority in increasing order, `nu` for even and `mu` for odd.
pub fn parity(rules: &[PriorityRule]) -> Result<Formula> {
    let mut by_prio: BTreeMap<u32, Vec<Assertion>> = BTreeMap::new();
    for r in rules {
        by_prio.entry(r.priority).or_default().push(r.guard.clone());
    }
    if by_prio.is_empty() {
        return Err(Error::NoPriorities);
    }
    let classes: Vec<(u32, Assertion)> = by_prio
        .into_iter()
        .map(|(p, gs)| (p, gs.into_iter().reduce(Assertion::or).expect("nonempty")))
        .collect();
    let name = |i: usize| format!("Z{i}");
    let mut body = classes
        .iter()
        .enumerate()
        .map(|(i, (_, g))| Formula::and(Formula::Prop(g.clone()), Formula::diamond(Formula::Var(name(i)))))
        .reduce(Formula::or)
        .expect("nonempty");
    for (i, (p, _)) in classes.iter().enumerate().rev() {
        let kind = if p % 2 == 0 { FixKind::Nu } else { FixKind::Mu };
        body = Formula::Fix(kind, name(i), Box::new(body));
    }
    Ok(body)
}

/// Builds a builtin by name. Parameters are `key=value` pairs; `reach` takes
/// `p`, the Büchi family takes `J`.
pub fn builtin(name: &str, params: &[(String, String)]) -> Result<Formula> {
    let param = |key: &str| -> Result<Formula> {
        let mut hits = params.iter().filter(|(k, _)| k == key);
        match (hits.next(), hits.next()) {
            (Some((_, v)), None) => state_param(v),
            (None, _) => Err(Error::BuiltinParam(format!("`{name}` requires parameter `{key}`"))),
            (Some(_), Some(_)) => Err(Error::BuiltinParam(format!("parameter `{key}` given twice"))),
        }
    };
    let allow = |keys: &[&str]| -> Result<()> {
        match params.iter().find(|(k, _)| !keys.contains(&k.as_str())) {
            Some((k, _)) => Err(Error::BuiltinParam(format!("`{name}` does not take parameter `{k}`"))),
            None => Ok(()),
        }
    };
    match name {
        "safety" => {
            allow(&[])?;
            Ok(safety())
        }
        "reach" | "reachability" => {
            allow(&["p"])?;
            Ok(reachability(param("p")?))
        }
        "buchi" => {
            allow(&["J"])?;
            Ok(buchi(param("J")?))
        }
        "cobuchi" | "co-buchi" => {
            allow(&["J"])?;
            Ok(cobuchi(param("J")?))
        }
        "dual-buchi" | "dual_buchi" => {
            allow(&["J"])?;
            Ok(dual_buchi(param("J")?))
        }
        _ => Err(Error::UnknownBuiltin(name.to_string())),
    }
}

/// Recognizes `nu Z . mu Y . ((J & <>Z) | <>Y)` up to variable names and
/// returns `J`.
pub fn buchi_target(f: &Formula) -> Option<&Formula> {
    let Formula::Fix(FixKind::Nu, z, inner) = f else {
        return None;
    };
    let Formula::Fix(FixKind::Mu, y, body) = &**inner else {
        return None;
    };
    let Formula::Or(l, r) = &**body else { return None };
    let Formula::And(j, dz) = &**l else { return None };
    let is_pre = |g: &Formula, x: &str| matches!(g, Formula::Diamond(v) if matches!(&**v, Formula::Var(n) if n == x));
    let modal_free = {
        let mut ok = true;
        j.visit(&mut |g| {
            ok &= !matches!(
                g,
                Formula::Var(_) | Formula::Diamond(_) | Formula::Square(_) | Formula::Fix(..)
            )
        });
        ok
    };
    (z != y && is_pre(dz, z) && is_pre(r, y) && modal_free).then_some(&**j)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv(k: &str, v: &str) -> (String, String) {
        (k.to_string(), v.to_string())
    }

    #[test]
    fn builtins_match_parsed_forms() {
        assert_eq!(builtin("safety", &[]).unwrap(), Formula::parse("nu X . <>X").unwrap());
        assert_eq!(
            builtin("reach", &[kv("p", "x")]).unwrap(),
            Formula::parse("mu X . (x | <>X)").unwrap()
        );
        assert_eq!(
            builtin("buchi", &[kv("J", "y")]).unwrap(),
            Formula::parse("nu Z . (mu Y . ((y & <>Z) | <>Y))").unwrap()
        );
        assert_eq!(
            builtin("cobuchi", &[kv("J", "!y")]).unwrap(),
            Formula::parse("mu Z . nu Y . ((!y & <>Y) | <>Z)").unwrap()
        );
        assert_eq!(
            builtin("dual-buchi", &[kv("J", "y")]).unwrap(),
            Formula::parse("mu Z . nu Y . ((!y | []Z) & []Y)").unwrap()
        );
    }

    #[test]
    fn builtins_are_closed_and_monotone() {
        for (n, ps) in [
            ("safety", vec![]),
            ("reach", vec![kv("p", "x & y")]),
            ("buchi", vec![kv("J", "y")]),
            ("cobuchi", vec![kv("J", "y")]),
            ("dual-buchi", vec![kv("J", "x | !y")]),
        ] {
            let f = builtin(n, &ps).unwrap();
            assert!(f.is_closed(), "{n}");
            assert!(f.check_monotone().is_ok(), "{n}");
        }
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(builtin("buchi", &[]), Err(Error::BuiltinParam(_))));
        assert!(matches!(
            builtin("buchi", &[kv("J", "y'")]),
            Err(Error::BuiltinParam(_))
        ));
        assert!(matches!(
            builtin("safety", &[kv("J", "y")]),
            Err(Error::BuiltinParam(_))
        ));
        assert!(matches!(builtin("rabin", &[]), Err(Error::UnknownBuiltin(_))));
        assert_eq!(
            state_param("x -> y").unwrap(),
            Formula::Prop(Assertion::parse("x -> y").unwrap())
        );
    }

    #[test]
    fn parity_nests_by_priority() {
        let rules = vec![
            PriorityRule {
                guard: Assertion::parse("!y").unwrap(),
                priority: 3,
            },
            PriorityRule {
                guard: Assertion::parse("y").unwrap(),
                priority: 0,
            },
        ];
        let f = parity(&rules).unwrap();
        assert_eq!(f.to_string(), "nu Z0 . mu Z1 . ((@\"y\" & <>Z0) | (@\"!y\" & <>Z1))");
        assert_eq!(f.alternation_depth(), 2);
    }

    #[test]
    fn buchi_shape_detection() {
        let j = Formula::atom("y");
        assert_eq!(buchi_target(&buchi(j.clone())), Some(&j));
        assert!(buchi_target(&Formula::parse("nu Q . mu R . ((y & x & <>Q) | <>R)").unwrap()).is_some());
        assert!(buchi_target(&cobuchi(j)).is_none());
        assert!(buchi_target(&safety()).is_none());
    }
}
