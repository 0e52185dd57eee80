use causalprior::graph::VariableScheme;
use serde::{Deserialize, Serialize};

use crate::aliases::AliasMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairwiseMode {
    /// Each unordered pair once, in scheme order: `n(n-1)/2` prompts.
    Symmetric,
    /// Both directions of every pair: `n(n-1)` prompts.
    Ordered,
}

pub fn render_pairwise_prompt(aliases: &AliasMap, cause: usize, effect: usize, context: &str) -> String {
    format!(
        "Does {} effect {} in {context}",
        aliases.display_name(cause),
        aliases.display_name(effect)
    )
}

/// `(cause, effect)` pairs in the order they are asked.
pub fn pairwise_pairs(n: usize, mode: PairwiseMode) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
            if mode == PairwiseMode::Ordered {
                out.push((j, i));
            }
        }
    }
    out
}

pub const SINGLE_PROMPT_LEAD: &str = "Generate me a cause effect adjacency matrix for these nodes";

pub fn render_single_prompt(scheme: &VariableScheme, constraints: &[String]) -> String {
    let names: Vec<&str> = scheme.names().collect();
    let mut out = format!("{SINGLE_PROMPT_LEAD} {}", names.join(", "));
    for c in constraints.iter().map(|c| c.trim()).filter(|c| !c.is_empty()) {
        out.push(' ');
        out.push_str(c.trim_end_matches('.'));
    }
    out.push('.');
    out
}
