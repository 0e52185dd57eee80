use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Uncertain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeVerdict {
    pub cause: usize,
    pub effect: usize,
    pub verdict: Verdict,
    pub completion: String,
    /// The span of the completion that decided the verdict.
    pub evidence: Option<String>,
}

static LEADING_YES: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)^\s*yes\b[,.!]?").unwrap());

static NEGATIONS: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)\b(?:do(?:es)? not have a direct cause|do(?:es)? not directly (?:cause|affect|effect|influence)|no direct|do(?:es)? not (?:cause|affect|effect|influence)|doesn't (?:directly )?(?:cause|affect)|don't (?:directly )?(?:cause|affect)|has no (?:effect|impact)|have no (?:effect|impact))",
    )
    .unwrap()
});

static AFFIRMATIONS: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)\b(?:can have an? (?:\w+ )?impact on|can have a significant impact|varying impacts? on|can (?:directly )?(?:affect|influence|cause)|is associated with|plays a role in)",
    )
    .unwrap()
});

/// Rule cascade: leading "Yes", then explicit negations, then causal
/// affirmations, else uncertain. First match wins.
pub fn parse_verdict(completion: &str, cause: usize, effect: usize) -> EdgeVerdict {
    let (verdict, evidence) = if let Some(m) = LEADING_YES.find(completion) {
        (Verdict::Yes, Some(m.as_str().trim().to_string()))
    } else if let Some(m) = NEGATIONS.find(completion) {
        (Verdict::No, Some(m.as_str().to_string()))
    } else if let Some(m) = AFFIRMATIONS.find(completion) {
        (Verdict::Yes, Some(m.as_str().to_string()))
    } else {
        (Verdict::Uncertain, None)
    };
    EdgeVerdict {
        cause,
        effect,
        verdict,
        completion: completion.to_string(),
        evidence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cascade_order() {
        assert_eq!(parse_verdict("", 0, 1).verdict, Verdict::Uncertain);
        assert_eq!(parse_verdict("Yes, but it does not directly cause it", 0, 1).verdict, Verdict::Yes);
        assert_eq!(parse_verdict("It can affect X but does not cause Y", 0, 1).verdict, Verdict::No);
        assert_eq!(parse_verdict("yesterday it rained", 0, 1).verdict, Verdict::Uncertain);
        let v = parse_verdict("Smoking CAN AFFECT stage", 0, 1);
        assert_eq!(v.verdict, Verdict::Yes);
        assert_eq!(v.evidence.as_deref(), Some("CAN AFFECT"));
    }
}
