//! Causal graph elicitation from a language model: pairwise edge questions,
//! whole-graph prompts, reply parsing and a refinement session whose every
//! exchange can be replayed from a transcript.

pub mod aliases;
pub mod backend;
pub mod error;
pub mod parse;
pub mod prompts;
pub mod session;
pub mod verdict;

pub use aliases::{normalize, AliasMap, Mention};
pub use backend::{read_jsonl, write_jsonl, Exchange, HttpBackend, HttpConfig, LlmBackend, ReplayBackend};
pub use error::{LlmError, Result};
pub use parse::{parse_adjacency_response, ParsedDraft};
pub use prompts::{pairwise_pairs, render_pairwise_prompt, render_single_prompt, PairwiseMode};
pub use session::{elicit_graph, refine, Draft, EdgeDiff, ElicitationTranscript, Strategy};
pub use verdict::{parse_verdict, EdgeVerdict, Verdict};
