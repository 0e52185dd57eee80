use std::collections::{BTreeMap, BTreeSet, HashMap};

use causalprior::graph::VariableScheme;
use serde::Deserialize;

use crate::error::{LlmError, Result};

const DEFAULT_ALIASES: &str = include_str!("../data/aliases.json");

/// Uppercase ASCII alphanumerics only, so `Survival_Months`,
/// `survival months` and `SURVIVALMONTHS` compare equal.
pub fn normalize(text: &str) -> String {
    text.chars()
        .filter(char::is_ascii_alphanumeric)
        .map(|c| c.to_ascii_uppercase())
        .collect()
}

#[derive(Debug, Deserialize)]
struct AliasFile {
    #[serde(default)]
    display: BTreeMap<String, String>,
    #[serde(default)]
    aliases: BTreeMap<String, String>,
    #[serde(default)]
    groups: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    ignore: Vec<String>,
}

/// What a phrase in LLM text refers to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mention {
    Variable(usize),
    Group(Vec<usize>),
}

/// Display names for prompts and the phrase lookup used when parsing
/// replies, resolved against one scheme.
#[derive(Debug, Clone)]
pub struct AliasMap {
    display: Vec<String>,
    variables: HashMap<String, usize>,
    groups: HashMap<String, Vec<usize>>,
    ignore: BTreeSet<String>,
    longest_phrase: usize,
}

impl AliasMap {
    /// The bundled map for the NSCLC scheme.
    pub fn nsclc(scheme: &VariableScheme) -> Result<Self> {
        Self::from_json(DEFAULT_ALIASES, scheme)
    }

    pub fn from_json(text: &str, scheme: &VariableScheme) -> Result<Self> {
        let file: AliasFile = serde_json::from_str(text)?;
        let resolve = |name: &str| {
            scheme
                .index_of(name)
                .map_err(|_| LlmError::AliasMap(format!("`{name}` is not in the scheme")))
        };
        let mut display: Vec<String> = scheme.names().map(str::to_string).collect();
        for (name, shown) in &file.display {
            display[resolve(name)?] = shown.clone();
        }
        let mut variables = HashMap::new();
        for (i, name) in scheme.names().enumerate() {
            variables.insert(normalize(name), i);
        }
        for (i, shown) in display.iter().enumerate() {
            variables.entry(normalize(shown)).or_insert(i);
        }
        for (alias, name) in &file.aliases {
            variables.insert(normalize(alias), resolve(name)?);
        }
        let mut groups = HashMap::new();
        for (word, members) in &file.groups {
            let idx = members.iter().map(|m| resolve(m)).collect::<Result<Vec<_>>>()?;
            groups.insert(normalize(word), idx);
        }
        let phrases = file
            .aliases
            .keys()
            .chain(file.groups.keys())
            .chain(display.iter())
            .map(|p| p.split_whitespace().count())
            .max()
            .unwrap_or(1);
        Ok(AliasMap {
            display,
            variables,
            groups,
            ignore: file.ignore.iter().map(|s| normalize(s)).collect(),
            longest_phrase: phrases.max(1),
        })
    }

    pub fn display_name(&self, var: usize) -> &str {
        &self.display[var]
    }

    pub(crate) fn longest_phrase(&self) -> usize {
        self.longest_phrase
    }

    /// Looks up a phrase (one or more words). Variables win over groups.
    pub fn lookup(&self, phrase: &str) -> Option<Mention> {
        let key = normalize(phrase);
        if key.is_empty() {
            return None;
        }
        if let Some(&v) = self.variables.get(&key) {
            return Some(Mention::Variable(v));
        }
        self.groups.get(&key).map(|g| Mention::Group(g.clone()))
    }

    pub fn is_ignored(&self, word: &str) -> bool {
        self.ignore.contains(&normalize(word))
    }
}
