use std::collections::BTreeSet;
use std::sync::LazyLock;

use causalprior::graph::{find_cycle, VariableScheme};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::aliases::{AliasMap, Mention};
use crate::error::{LlmError, Result};

/// Edges read from a free-text reply, plus every sentence or clause that
/// could not be read.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedDraft {
    pub edges: BTreeSet<(usize, usize)>,
    /// Pairs named in a "do not cause" sentence; never present in `edges`.
    pub suppressed: BTreeSet<(usize, usize)>,
    pub unparsed: Vec<String>,
}

impl ParsedDraft {
    pub fn adjacency(&self, n: usize) -> Vec<Vec<u8>> {
        let mut a = vec![vec![0u8; n]; n];
        for &(u, v) in &self.edges {
            a[u][v] = 1;
        }
        a
    }
}

static SENTENCE_BREAK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[.:\n]+").unwrap());
static RELATIVE_CLAUSE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i),\s*which\b").unwrap());
static VERB: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)\b(?:(?P<neg>(?:do|does)\s+not\s+(?:directly\s+)?cause|(?:don't|doesn't)\s+cause)|can\s+(?:also\s+)?(?:directly\s+)?(?:affect|lead\s+to|indicate|cause|influence)|(?:affects|leads\s+to|indicates|causes|influences))\b|->|\x{2192}",
    )
    .unwrap()
});
static WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[A-Za-z0-9_]+(?:'[A-Za-z]+)?").unwrap());

fn is_all_caps(word: &str) -> bool {
    word.len() >= 2
        && word.chars().any(|c| c.is_ascii_alphabetic())
        && word.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

/// Variables named in `text`. Longest phrase wins; group words count only
/// when the fragment names no variable explicitly.
fn mentions(text: &str, aliases: &AliasMap) -> Result<Vec<usize>> {
    let words: Vec<&str> = WORD.find_iter(text).map(|m| m.as_str()).collect();
    let mut vars = Vec::new();
    let mut groups = Vec::new();
    let mut i = 0;
    'outer: while i < words.len() {
        for k in (1..=aliases.longest_phrase().min(words.len() - i)).rev() {
            let phrase = words[i..i + k].join(" ");
            if let Some(m) = aliases.lookup(&phrase) {
                match m {
                    Mention::Variable(v) => vars.push(v),
                    Mention::Group(g) => groups.extend(g),
                }
                i += k;
                continue 'outer;
            }
        }
        if is_all_caps(words[i]) && !aliases.is_ignored(words[i]) {
            return Err(LlmError::VariableAliasUnknown(words[i].to_string()));
        }
        i += 1;
    }
    let mut out = if vars.is_empty() { groups } else { vars };
    let mut seen = BTreeSet::new();
    out.retain(|v| seen.insert(*v));
    Ok(out)
}

/// Reads sentences of the forms "A can affect B and C", "A can lead to B,
/// C", "A can indicate B" and "A do not cause B", plus "A -> B" lines. Affirmative verbs add
/// `subject -> target` edges; negated ones suppress them after all
/// sentences are read. Relative clauses (", which ...") are not read and
/// show up in the report. The draft must be acyclic.
pub fn parse_adjacency_response(completion: &str, scheme: &VariableScheme, aliases: &AliasMap) -> Result<ParsedDraft> {
    let text = completion.replace("\\_", "_");
    let mut draft = ParsedDraft::default();
    for raw in SENTENCE_BREAK.split(&text) {
        let mut sentence = raw.trim();
        if sentence.is_empty() {
            continue;
        }
        if let Some(m) = RELATIVE_CLAUSE.find(sentence) {
            draft.unparsed.push(sentence[m.start()..].trim_start_matches(',').trim().to_string());
            sentence = sentence[..m.start()].trim();
        }
        let verbs: Vec<regex::Captures> = VERB.captures_iter(sentence).collect();
        if verbs.is_empty() {
            draft.unparsed.push(sentence.to_string());
            continue;
        }
        let first = verbs[0].get(0).unwrap();
        let subject = mentions(&sentence[..first.start()], aliases)?;
        if subject.is_empty() {
            draft.unparsed.push(sentence.to_string());
            continue;
        }
        for (k, caps) in verbs.iter().enumerate() {
            let verb = caps.get(0).unwrap();
            let end = verbs.get(k + 1).map_or(sentence.len(), |c| c.get(0).unwrap().start());
            let targets = mentions(&sentence[verb.end()..end], aliases)?;
            let negated = caps.name("neg").is_some();
            for &s in &subject {
                for &t in &targets {
                    if s == t {
                        continue;
                    }
                    if negated {
                        draft.suppressed.insert((s, t));
                    } else {
                        draft.edges.insert((s, t));
                    }
                }
            }
        }
    }
    for pair in &draft.suppressed {
        draft.edges.remove(pair);
    }
    if let Some(cycle) = find_cycle(&draft.adjacency(scheme.len()))? {
        return Err(LlmError::CyclicDraft {
            edges: cycle
                .into_iter()
                .map(|(u, v)| (scheme.name(u).to_string(), scheme.name(v).to_string()))
                .collect(),
        });
    }
    Ok(draft)
}
