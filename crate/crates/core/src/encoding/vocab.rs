use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::EncodingError;
use crate::cnf::{Literal, Var};
use crate::seed;

const FOODS: &str = include_str!("../../assets/vocab/foods.txt");
const NAMES: &str = include_str!("../../assets/vocab/names.txt");

/// Word lists the menu encoding draws item and person names from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    pub foods: Vec<String>,
    pub names: Vec<String>,
}

impl Vocabulary {
    pub fn builtin() -> Self {
        let words = |text: &str| -> Vec<String> {
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect()
        };
        Vocabulary {
            foods: words(FOODS),
            names: words(NAMES),
        }
    }

    /// Draws `num_vars` items and `num_clauses` names without replacement.
    /// The same seed always gives the same mapping.
    pub fn sample_mapping(
        &self,
        num_vars: usize,
        num_clauses: usize,
        seed: u64,
    ) -> Result<VocabMapping, EncodingError> {
        if num_vars > self.foods.len() {
            return Err(EncodingError::VocabularyExhausted {
                kind: "food items",
                needed: num_vars,
                available: self.foods.len(),
            });
        }
        if num_clauses > self.names.len() {
            return Err(EncodingError::VocabularyExhausted {
                kind: "person names",
                needed: num_clauses,
                available: self.names.len(),
            });
        }
        let mut rng = seed::rng(seed);
        let var_to_item = sample(&mut rng, self.foods.len(), num_vars)
            .into_iter()
            .map(|i| self.foods[i].clone())
            .collect();
        let clause_to_person = sample(&mut rng, self.names.len(), num_clauses)
            .into_iter()
            .map(|i| self.names[i].clone())
            .collect();
        Ok(VocabMapping {
            var_to_item,
            clause_to_person,
        })
    }
}

/// Item name per variable (index `v - 1`) and person name per clause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabMapping {
    pub var_to_item: Vec<String>,
    pub clause_to_person: Vec<String>,
}

impl VocabMapping {
    pub fn item(&self, var: Var) -> &str {
        &self.var_to_item[var as usize - 1]
    }

    /// Case-insensitive reverse lookup.
    pub fn var_of(&self, item: &str) -> Option<Var> {
        self.var_to_item
            .iter()
            .position(|i| i.eq_ignore_ascii_case(item))
            .map(|p| p as Var + 1)
    }

    pub fn num_vars(&self) -> u32 {
        self.var_to_item.len() as u32
    }

    pub fn literal_text(&self, lit: Literal) -> &str {
        self.item(lit.var())
    }
}
