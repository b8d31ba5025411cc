//! JSON encoding of weighted game structures.
//!
//! ```json
//! {
//!   "vars": ["x", "y"],
//!   "inputs": ["x"],
//!   "rho_e": "true",
//!   "rho_s": "true",
//!   "weights": [{"guard": "y'", "weight": -1}, {"guard": "true", "weight": 1}],
//!   "priorities": [{"guard": "y", "priority": 0}, {"guard": "!y", "priority": 1}],
//!   "formula": "nu Z . (mu Y . ((y & <>Z) | <>Y))"
//! }
//! ```
//!
//! `priorities` and `formula` are optional.

use serde::{Deserialize, Serialize};

use crate::assertion::Assertion;
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::game::{PriorityRule, VariableSet, WeightRule, WeightedGameStructure};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub vars: Vec<String>,
    #[serde(default)]
    pub inputs: Vec<String>,
    pub rho_e: String,
    pub rho_s: String,
    pub weights: Vec<WeightEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priorities: Option<Vec<PriorityEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightEntry {
    pub guard: String,
    pub weight: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorityEntry {
    pub guard: String,
    pub priority: u32,
}

fn assertion(field: &str, text: &str) -> Result<Assertion> {
    Assertion::parse(text).map_err(|e| Error::GameFile(format!("{field}: {e}")))
}

pub fn priority_rules(entries: &[PriorityEntry]) -> Result<Vec<PriorityRule>> {
    entries
        .iter()
        .enumerate()
        .map(|(i, p)| {
            Ok(PriorityRule {
                guard: assertion(&format!("priorities[{i}].guard"), &p.guard)?,
                priority: p.priority,
            })
        })
        .collect()
}

impl GameFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::GameFile(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("game files serialize") + "\n"
    }

    /// Builds and validates the game, attaching priorities and formula when present.
    pub fn build(&self) -> Result<WeightedGameStructure> {
        let vars = VariableSet::new(self.vars.clone(), &self.inputs)?;
        let weights = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                Ok(WeightRule {
                    guard: assertion(&format!("weights[{i}].guard"), &w.guard)?,
                    weight: w.weight,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut game = WeightedGameStructure::new(
            vars,
            assertion("rho_e", &self.rho_e)?,
            assertion("rho_s", &self.rho_s)?,
            weights,
        )?;
        game.validate_weights()?;
        if let Some(p) = &self.priorities {
            game = game.with_priorities(priority_rules(p)?)?;
            game.priority_vector()?;
        }
        if let Some(f) = &self.formula {
            let f = Formula::parse(f).map_err(|e| Error::GameFile(format!("formula: {e}")))?;
            game = game.with_formula(f);
        }
        Ok(game)
    }

    pub fn from_game(game: &WeightedGameStructure) -> Self {
        GameFile {
            vars: game.vars().names().to_vec(),
            inputs: game.vars().inputs(),
            rho_e: game.rho_e().to_string(),
            rho_s: game.rho_s().to_string(),
            weights: game
                .weight_rules()
                .iter()
                .map(|r| WeightEntry {
                    guard: r.guard.to_string(),
                    weight: r.weight,
                })
                .collect(),
            priorities: game.priorities().map(|ps| {
                ps.iter()
                    .map(|p| PriorityEntry {
                        guard: p.guard.to_string(),
                        priority: p.priority,
                    })
                    .collect()
            }),
            formula: game.formula().map(|f| f.to_string()),
        }
    }
}

/// Loads a game from JSON text.
pub fn load_game(text: &str) -> Result<WeightedGameStructure> {
    GameFile::parse(text)?.build()
}

/// Serializes a game (with its priorities and formula, if any).
pub fn save_game(game: &WeightedGameStructure) -> String {
    GameFile::from_game(game).to_json()
}

/// Parses a standalone priority file: either a list of `{guard, priority}`
/// entries or an object with a `priorities` field holding one.
pub fn load_priorities(text: &str) -> Result<Vec<PriorityRule>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        List(Vec<PriorityEntry>),
        Wrapped { priorities: Vec<PriorityEntry> },
    }
    let entries = match serde_json::from_str::<Repr>(text).map_err(|e| Error::GameFile(e.to_string()))? {
        Repr::List(l) | Repr::Wrapped { priorities: l } => l,
    };
    priority_rules(&entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{g1, g1_buchi_priorities};

    #[test]
    fn round_trip_preserves_the_game() {
        for g in [g1(), g1_buchi_priorities()] {
            let text = save_game(&g);
            let back = load_game(&text).unwrap();
            assert_eq!(GameFile::from_game(&back), GameFile::from_game(&g));
            assert_eq!(save_game(&back), text);
        }
    }

    #[test]
    fn errors_are_reported() {
        assert!(matches!(load_game("{"), Err(Error::GameFile(_))));
        let bad_guard = r#"{"vars":["x"],"rho_e":"true","rho_s":"true","weights":[{"guard":"x &","weight":1}]}"#;
        assert!(matches!(load_game(bad_guard), Err(Error::GameFile(m)) if m.contains("weights[0]")));
        let uncovered = r#"{"vars":["x"],"rho_e":"true","rho_s":"true","weights":[{"guard":"x'","weight":1}]}"#;
        assert!(matches!(load_game(uncovered), Err(Error::IncompleteWeightCover { .. })));
        let overlap = r#"{"vars":["x"],"rho_e":"true","rho_s":"true","weights":[{"guard":"true","weight":1}],
            "priorities":[{"guard":"x","priority":0},{"guard":"true","priority":1}]}"#;
        assert!(matches!(load_game(overlap), Err(Error::PriorityPartition(_))));
    }

    #[test]
    fn priority_files() {
        let a = load_priorities(r#"[{"guard":"y","priority":0},{"guard":"!y","priority":1}]"#).unwrap();
        let b = load_priorities(r#"{"priorities":[{"guard":"y","priority":0},{"guard":"!y","priority":1}]}"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
    }
}
