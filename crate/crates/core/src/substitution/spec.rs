//! The substitution spec file: a strict, versioned JSON document.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::SubstitutionError;
use crate::algebra::IntPolynomial;

/// Optional numeric knobs carried by a spec file. Command-line flags take
/// precedence over these; built-in defaults fill the rest.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpecParams {
    pub radius: Option<f64>,
    pub delta: Option<f64>,
    pub m_max: Option<u32>,
    pub grid_depth: Option<u32>,
    pub tol: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    format: u32,
    letters: Vec<String>,
    rules: BTreeMap<String, String>,
    #[serde(default)]
    lengths: Option<BTreeMap<String, String>>,
    #[serde(default)]
    min_poly: Option<Vec<i64>>,
    #[serde(default)]
    params: Option<SpecParams>,
}

/// A validated substitution: letters are indexed in file order, rules are
/// stored as index words.
#[derive(Clone, Debug)]
pub struct SubstitutionSpec {
    letters: Vec<char>,
    rules: Vec<Vec<usize>>,
    lengths_override: Option<Vec<String>>,
    min_poly_override: Option<IntPolynomial>,
    params: SpecParams,
}

fn schema_err(location: &str, message: impl Into<String>) -> SubstitutionError {
    SubstitutionError::Schema {
        location: location.to_string(),
        message: message.into(),
    }
}

/// Parses and validates a spec document. The parser is strict: unknown
/// keys, unused letters and empty rules are all rejected.
pub fn parse_spec(text: &str) -> Result<SubstitutionSpec, SubstitutionError> {
    let raw: RawSpec = serde_json::from_str(text)
        .map_err(|e| schema_err(&format!("line {}, column {}", e.line(), e.column()), e.to_string()))?;

    if raw.format != 1 {
        return Err(schema_err("format", format!("unsupported format {}, expected 1", raw.format)));
    }
    if raw.letters.is_empty() {
        return Err(schema_err("letters", "at least one letter required"));
    }
    let mut letters = Vec::with_capacity(raw.letters.len());
    for l in &raw.letters {
        let mut chars = l.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => letters.push(c),
            _ => return Err(schema_err("letters", format!("letter {l:?} must be a single character"))),
        }
    }
    {
        let mut sorted = letters.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != letters.len() {
            return Err(schema_err("letters", "duplicate letters"));
        }
    }
    let index_of = |c: char| letters.iter().position(|&l| l == c);

    if raw.rules.len() != letters.len() {
        return Err(schema_err("rules", "rules must cover exactly the declared letters"));
    }
    let mut rules = vec![Vec::new(); letters.len()];
    for (k, word) in &raw.rules {
        let mut kc = k.chars();
        let key = match (kc.next(), kc.next()) {
            (Some(c), None) => c,
            _ => return Err(schema_err("rules", format!("rule key {k:?} must be a single letter"))),
        };
        let j = index_of(key).ok_or_else(|| schema_err("rules", format!("rule for undeclared letter {k:?}")))?;
        if word.is_empty() {
            return Err(schema_err("rules", format!("rule for '{key}' is empty")));
        }
        let mut w = Vec::with_capacity(word.len());
        for c in word.chars() {
            let i = index_of(c)
                .ok_or_else(|| schema_err("rules", format!("rule for '{key}' uses undeclared letter '{c}'")))?;
            w.push(i);
        }
        rules[j] = w;
    }
    for (i, &l) in letters.iter().enumerate() {
        if !rules.iter().any(|w| w.contains(&i)) {
            return Err(schema_err("rules", format!("letter '{l}' never occurs in any rule")));
        }
    }

    let lengths_override = match &raw.lengths {
        None => None,
        Some(map) => {
            if map.len() != letters.len() {
                return Err(schema_err("lengths", "length override must cover every letter"));
            }
            let mut v = vec![String::new(); letters.len()];
            for (k, expr) in map {
                let mut kc = k.chars();
                let key = match (kc.next(), kc.next()) {
                    (Some(c), None) => c,
                    _ => return Err(schema_err("lengths", format!("length key {k:?} must be a single letter"))),
                };
                let i = index_of(key)
                    .ok_or_else(|| schema_err("lengths", format!("length for undeclared letter {k:?}")))?;
                v[i] = expr.clone();
            }
            Some(v)
        }
    };

    let min_poly_override = match &raw.min_poly {
        None => None,
        Some(coeffs) => {
            let p = IntPolynomial::from_i64(coeffs);
            if p.degree().is_none() {
                return Err(schema_err("min_poly", "zero polynomial"));
            }
            Some(p)
        }
    };

    Ok(SubstitutionSpec {
        letters,
        rules,
        lengths_override,
        min_poly_override,
        params: raw.params.unwrap_or_default(),
    })
}

impl SubstitutionSpec {
    /// Number of letters.
    pub fn kappa(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }

    pub fn letter(&self, i: usize) -> char {
        self.letters[i]
    }

    /// Rule word for letter index `j`.
    pub fn rule(&self, j: usize) -> &[usize] {
        &self.rules[j]
    }

    pub fn rules(&self) -> &[Vec<usize>] {
        &self.rules
    }

    pub fn max_rule_len(&self) -> usize {
        self.rules.iter().map(|w| w.len()).max().unwrap_or(0)
    }

    pub fn lengths_override(&self) -> Option<&[String]> {
        self.lengths_override.as_deref()
    }

    pub fn min_poly_override(&self) -> Option<&IntPolynomial> {
        self.min_poly_override.as_ref()
    }

    pub fn params(&self) -> &SpecParams {
        &self.params
    }

    /// Index of the lexicographically largest letter (the normalization
    /// anchor for derived lengths).
    pub fn lex_last_letter(&self) -> usize {
        let mut idx = 0;
        for (i, &l) in self.letters.iter().enumerate() {
            if l > self.letters[idx] {
                idx = i;
            }
        }
        idx
    }

    /// Applies the rule map to an index word.
    pub fn apply_rule(&self, word: &[usize]) -> Vec<usize> {
        let mut out = Vec::new();
        for &c in word {
            out.extend_from_slice(&self.rules[c]);
        }
        out
    }

    /// Serializable echo of the parsed substitution.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        for (j, w) in self.rules.iter().enumerate() {
            let word: String = w.iter().map(|&i| self.letters[i]).collect();
            map.insert(self.letters[j].to_string(), word);
        }
        map
    }
}
