use thiserror::Error;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("backend error: {0}")]
    Backend(String),
    #[error("no recorded completion for prompt: {0}")]
    UnknownPrompt(String),
    #[error("draft is cyclic: {}", format_edges(.edges))]
    CyclicDraft { edges: Vec<(String, String)> },
    #[error("`{0}` is not a known variable or alias")]
    VariableAliasUnknown(String),
    #[error("session has no draft to refine")]
    NoDraft,
    #[error("invalid alias map: {0}")]
    AliasMap(String),
    #[error("malformed transcript line {line}: {message}")]
    Transcript { line: usize, message: String },
    #[error(transparent)]
    Core(#[from] causalprior::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_edges(edges: &[(String, String)]) -> String {
    edges.iter().map(|(a, b)| format!("{a} -> {b}")).collect::<Vec<_>>().join(", ")
}

pub type Result<T> = std::result::Result<T, LlmError>;
