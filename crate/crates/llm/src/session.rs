use std::collections::BTreeSet;
use std::sync::Arc;

use causalprior::graph::{Dag, VariableScheme};
use serde::{Deserialize, Serialize};

use crate::aliases::AliasMap;
use crate::backend::{Exchange, LlmBackend};
use crate::error::{LlmError, Result};
use crate::parse::parse_adjacency_response;
use crate::prompts::{pairwise_pairs, render_pairwise_prompt, render_single_prompt, PairwiseMode};
use crate::verdict::{parse_verdict, EdgeVerdict, Verdict};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDiff {
    pub added: Vec<(String, String)>,
    pub removed: Vec<(String, String)>,
}

impl EdgeDiff {
    pub fn between(before: &[(String, String)], after: &[(String, String)]) -> Self {
        let b: BTreeSet<&(String, String)> = before.iter().collect();
        let a: BTreeSet<&(String, String)> = after.iter().collect();
        EdgeDiff {
            added: a.difference(&b).map(|&e| e.clone()).collect(),
            removed: b.difference(&a).map(|&e| e.clone()).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty()
    }
}

/// One accepted graph version. Edges are stored by variable name in scheme
/// order of the parent, then the child.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Draft {
    pub version: String,
    pub edges: Vec<(String, String)>,
    /// Change against the previous draft; absent for the first one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diff: Option<EdgeDiff>,
}

impl Draft {
    pub fn to_dag(&self, scheme: Arc<VariableScheme>) -> Result<Dag> {
        let refs: Vec<(&str, &str)> = self.edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        Ok(Dag::from_named_edges(scheme, &refs)?)
    }
}

/// Everything sent and received, plus the accepted drafts. Both lists only
/// ever grow.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ElicitationTranscript {
    pub exchanges: Vec<Exchange>,
    pub drafts: Vec<Draft>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub verdicts: Vec<EdgeVerdict>,
}

impl ElicitationTranscript {
    pub fn latest(&self) -> Option<&Draft> {
        self.drafts.last()
    }

    fn push_draft(&mut self, edges: Vec<(String, String)>) {
        let diff = self.latest().map(|d| EdgeDiff::between(&d.edges, &edges));
        self.drafts.push(Draft {
            version: format!("V{}", self.drafts.len() + 1),
            edges,
            diff,
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    Pairwise(PairwiseMode),
    Single { constraints: Vec<String> },
}

fn named(scheme: &VariableScheme, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<(String, String)> {
    edges
        .into_iter()
        .map(|(u, v)| (scheme.name(u).to_string(), scheme.name(v).to_string()))
        .collect()
}

fn refine_prompt(correction: &str, current: &Draft) -> String {
    let mut prompt = format!("{}\n\nCurrent edges:\n", correction.trim());
    for (a, b) in &current.edges {
        prompt.push_str(&format!("{a} -> {b}\n"));
    }
    prompt
}

/// Sends the correction with the latest draft's edges and appends the reply,
/// read as a complete replacement graph, as the next version. On any error
/// the returned value is not produced and `session` is untouched.
pub fn refine(
    session: &ElicitationTranscript,
    correction: &str,
    backend: &mut dyn LlmBackend,
    scheme: &VariableScheme,
    aliases: &AliasMap,
    temperature: f64,
) -> Result<ElicitationTranscript> {
    let current = session.latest().ok_or(LlmError::NoDraft)?;
    let prompt = refine_prompt(correction, current);
    let completion = backend.send(&prompt, temperature)?;
    let parsed = parse_adjacency_response(&completion, scheme, aliases)?;
    for text in &parsed.unparsed {
        log::debug!("unparsed: {text}");
    }
    let mut next = session.clone();
    next.exchanges.push(Exchange::now(&prompt, &completion));
    next.push_draft(named(scheme, parsed.edges));
    Ok(next)
}

pub fn elicit_graph(
    strategy: &Strategy,
    scheme: Arc<VariableScheme>,
    backend: &mut dyn LlmBackend,
    aliases: &AliasMap,
    context: &str,
    temperature: f64,
) -> Result<(Dag, ElicitationTranscript)> {
    let mut transcript = ElicitationTranscript::default();
    let dag = match strategy {
        Strategy::Single { constraints } => {
            let prompt = render_single_prompt(&scheme, constraints);
            let completion = backend.send(&prompt, temperature)?;
            transcript.exchanges.push(Exchange::now(&prompt, &completion));
            let parsed = parse_adjacency_response(&completion, &scheme, aliases)?;
            for text in &parsed.unparsed {
                log::debug!("unparsed: {text}");
            }
            Dag::from_edges(scheme.clone(), parsed.edges.iter().copied())?
        }
        Strategy::Pairwise(mode) => {
            let mut dag = Dag::empty(scheme.clone());
            for (cause, effect) in pairwise_pairs(scheme.len(), *mode) {
                let prompt = render_pairwise_prompt(aliases, cause, effect, context);
                let completion = backend.send(&prompt, temperature)?;
                transcript.exchanges.push(Exchange::now(&prompt, &completion));
                let verdict = parse_verdict(&completion, cause, effect);
                if verdict.verdict == Verdict::Yes && !dag.has_edge(cause, effect) {
                    match dag.with_edge(cause, effect) {
                        Ok(next) => dag = next,
                        Err(_) => log::warn!(
                            "skipping {} -> {}: would create a cycle",
                            scheme.name(cause),
                            scheme.name(effect)
                        ),
                    }
                }
                transcript.verdicts.push(verdict);
            }
            dag
        }
    };
    transcript.push_draft(named(&scheme, dag.edges()));
    Ok((dag, transcript))
}
