use std::collections::BTreeSet;
use std::path::PathBuf;

use causalprior::nsclc::{nsclc_scheme, v1_edges, v5_edges};
use causalprior_llm::*;

const GENES: [&str; 9] = ["KRAS", "EGFR", "FGFR1", "ALK", "MET", "PIK3CA", "BRAF", "ROS1", "RET"];
const SYMPTOMS: [&str; 3] = ["SHORTNESSOFBREATH", "CHESTPAIN", "WEIGHTLOSS"];

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/fixtures").join(name)
}

fn exchanges(name: &str) -> Vec<Exchange> {
    read_jsonl(std::fs::File::open(fixture(name)).unwrap()).unwrap()
}

fn edge_set(edges: &[(String, String)]) -> BTreeSet<(String, String)> {
    edges.iter().cloned().collect()
}

fn pair(a: &str, b: &str) -> (String, String) {
    (a.to_string(), b.to_string())
}

#[test]
fn table2_verdicts() {
    let ex = exchanges("table2.jsonl");
    let got: Vec<Verdict> = ex.iter().map(|e| parse_verdict(&e.completion, 0, 1).verdict).collect();
    assert_eq!(got, [Verdict::No, Verdict::Yes, Verdict::No, Verdict::Yes, Verdict::Yes]);
    for e in &ex {
        let v = parse_verdict(&e.completion, 0, 1);
        assert!(e.completion.contains(v.evidence.as_deref().unwrap()));
    }
}

#[test]
fn table2_prompts_render_from_the_scheme() {
    let s = nsclc_scheme();
    let a = AliasMap::nsclc(&s).unwrap();
    let ix = |n: &str| s.index_of(n).unwrap();
    let ex = exchanges("table2.jsonl");
    let asked = [
        ("AGE", "GENDER"),
        ("AGE", "SURVIVALMONTHS"),
        ("AGE", "SHORTNESSOFBREATH"),
        ("KRAS", "SURVIVALMONTHS"),
        ("TREATMENTPLAN", "SURVIVALMONTHS"),
    ];
    for ((c, e), x) in asked.iter().zip(&ex) {
        assert_eq!(render_pairwise_prompt(&a, ix(c), ix(e), "NSCLC"), x.prompt);
    }
}

#[test]
fn table3_prompt_is_exact() {
    let s = nsclc_scheme();
    let prompt = render_single_prompt(&s, &["mutation doesn't cause symptoms".to_string()]);
    assert_eq!(prompt, exchanges("table3.jsonl")[0].prompt);
}

#[test]
fn table3_response_parses_to_first_draft() {
    let s = nsclc_scheme();
    let a = AliasMap::nsclc(&s).unwrap();
    let reply = &exchanges("table3.jsonl")[0].completion;
    let draft = parse_adjacency_response(reply, &s, &a).unwrap();
    let named: BTreeSet<(String, String)> = draft
        .edges
        .iter()
        .map(|&(u, v)| (s.name(u).to_string(), s.name(v).to_string()))
        .collect();
    assert_eq!(named, edge_set(&v1_edges()));
    for g in GENES {
        for t in ["TREATMENTPLAN", "SURVIVALMONTHS", "STAGEGROUP"] {
            assert!(named.contains(&pair(g, t)));
        }
        for sym in SYMPTOMS {
            assert!(!named.contains(&pair(g, sym)));
            assert!(draft.suppressed.contains(&(s.index_of(g).unwrap(), s.index_of(sym).unwrap())));
        }
    }
    // the relative clause is reported, not read
    assert!(draft.unparsed.iter().any(|u| u.starts_with("which in turn")));
}

#[test]
fn single_strategy_gives_first_draft() {
    let s = nsclc_scheme();
    let a = AliasMap::nsclc(&s).unwrap();
    let mut backend = ReplayBackend::new(&exchanges("table3.jsonl"));
    let strategy = Strategy::Single {
        constraints: vec!["mutation doesn't cause symptoms".into()],
    };
    let (dag, t) = elicit_graph(&strategy, s.clone(), &mut backend, &a, "NSCLC", 0.0).unwrap();
    assert_eq!(edge_set(&dag.named_edges()), edge_set(&v1_edges()));
    assert_eq!(t.drafts.len(), 1);
    assert_eq!(t.drafts[0].version, "V1");
    assert_eq!(t.exchanges.len(), 1);
}

#[test]
fn pairwise_strategy_follows_table2_verdicts() {
    let s = nsclc_scheme();
    let a = AliasMap::nsclc(&s).unwrap();
    let mut backend = ReplayBackend::new(&exchanges("table2.jsonl")).with_fallback("I am not sure.");
    let (dag, t) = elicit_graph(&Strategy::Pairwise(PairwiseMode::Ordered), s.clone(), &mut backend, &a, "NSCLC", 0.0)
        .unwrap();
    let edges = edge_set(&dag.named_edges());
    assert_eq!(
        edges,
        edge_set(&[
            pair("AGE", "SURVIVALMONTHS"),
            pair("TREATMENTPLAN", "SURVIVALMONTHS"),
            pair("KRAS", "SURVIVALMONTHS"),
        ])
    );
    assert_eq!(t.exchanges.len(), 306);
    assert_eq!(t.verdicts.len(), 306);
}

#[test]
fn pairwise_symmetric_prompt_count() {
    let s = nsclc_scheme();
    let a = AliasMap::nsclc(&s).unwrap();
    let mut backend = ReplayBackend::default().with_fallback("");
    let (dag, t) = elicit_graph(&Strategy::Pairwise(PairwiseMode::Symmetric), s, &mut backend, &a, "NSCLC", 0.0).unwrap();
    assert_eq!(t.exchanges.len(), 153);
    assert_eq!(dag.edge_count(), 0);
    assert!(t.verdicts.iter().all(|v| v.verdict == Verdict::Uncertain));
}

#[test]
fn unknown_prompt_without_fallback_fails() {
    let s = nsclc_scheme();
    let a = AliasMap::nsclc(&s).unwrap();
    let mut backend = ReplayBackend::new(&exchanges("table2.jsonl"));
    let err = elicit_graph(&Strategy::Pairwise(PairwiseMode::Symmetric), s, &mut backend, &a, "NSCLC", 0.0).unwrap_err();
    assert!(matches!(err, LlmError::UnknownPrompt(_)));
}

#[test]
fn pairwise_skips_cycle_closing_yes() {
    let s = nsclc_scheme();
    let a = AliasMap::nsclc(&s).unwrap();
    let mut backend = ReplayBackend::default().with_fallback("Yes, certainly.");
    let (dag, _) = elicit_graph(&Strategy::Pairwise(PairwiseMode::Ordered), s.clone(), &mut backend, &a, "NSCLC", 0.0).unwrap();
    // every forward pair is accepted first, every reverse one would close a cycle
    assert_eq!(dag.edge_count(), 153);
    assert!(dag.edges().iter().all(|&(u, v)| u < v));
}

fn first_session() -> ElicitationTranscript {
    let s = nsclc_scheme();
    let a = AliasMap::nsclc(&s).unwrap();
    let mut backend = ReplayBackend::new(&exchanges("table3.jsonl"));
    let strategy = Strategy::Single {
        constraints: vec!["mutation doesn't cause symptoms".into()],
    };
    elicit_graph(&strategy, s, &mut backend, &a, "NSCLC", 0.0).unwrap().1
}

const CORRECTIONS: [&str; 4] = [
    "how age is not cause smoking please relook into the adjacency matrix and generate a correct one",
    "the stage group and smoking should cause some mutation in nsclc",
    "please reinvestigate how mutation is effecting the treatment plan and survival months",
    "treatment plan should effect survival months",
];

fn replay_session() -> ElicitationTranscript {
    let s = nsclc_scheme();
    let a = AliasMap::nsclc(&s).unwrap();
    let mut backend = ReplayBackend::new(&exchanges("session.jsonl"));
    let mut session = first_session();
    for c in CORRECTIONS {
        session = refine(&session, c, &mut backend, &s, &a, 0.0).unwrap();
    }
    session
}

#[test]
fn refinement_reaches_final_draft() {
    let session = replay_session();
    let versions: Vec<&str> = session.drafts.iter().map(|d| d.version.as_str()).collect();
    assert_eq!(versions, ["V1", "V2", "V3", "V4", "V5"]);

    let v2 = session.drafts[1].diff.as_ref().unwrap();
    assert_eq!(v2.added, vec![pair("AGE", "SMOKING")]);
    assert!(v2.removed.is_empty());

    let v3 = session.drafts[2].diff.as_ref().unwrap();
    for g in GENES {
        assert!(v3.added.contains(&pair("SMOKING", g)));
        assert!(v3.added.contains(&pair("STAGEGROUP", g)));
        assert!(v3.removed.contains(&pair(g, "STAGEGROUP")));
    }

    assert!(session.drafts[3].diff.as_ref().unwrap().is_empty());

    let v5 = session.drafts[4].diff.as_ref().unwrap();
    assert_eq!(v5.added, vec![pair("TREATMENTPLAN", "SURVIVALMONTHS")]);
    assert_eq!(edge_set(&session.drafts[4].edges), edge_set(&v5_edges()));
    session.drafts[4].to_dag(nsclc_scheme()).unwrap();
}

#[test]
fn refinement_is_append_only() {
    let s = nsclc_scheme();
    let a = AliasMap::nsclc(&s).unwrap();
    let mut backend = ReplayBackend::new(&exchanges("session.jsonl"));
    let mut session = first_session();
    for c in CORRECTIONS {
        let before = session.clone();
        let next = refine(&session, c, &mut backend, &s, &a, 0.0).unwrap();
        assert_eq!(session, before);
        assert_eq!(next.drafts[..before.drafts.len()], before.drafts[..]);
        assert_eq!(next.exchanges[..before.exchanges.len()], before.exchanges[..]);
        assert_eq!(next.drafts.len(), before.drafts.len() + 1);
        session = next;
    }
}

#[test]
fn cyclic_reply_is_rejected() {
    let s = nsclc_scheme();
    let a = AliasMap::nsclc(&s).unwrap();
    let session = replay_session();
    let mut backend = ReplayBackend::new(&exchanges("cyclic.jsonl"));
    let err = refine(&session, "survival should affect age", &mut backend, &s, &a, 0.0).unwrap_err();
    match err {
        LlmError::CyclicDraft { edges } => assert!(edges.contains(&pair("SURVIVALMONTHS", "AGE"))),
        other => panic!("unexpected error {other}"),
    }
    assert_eq!(session.drafts.len(), 5);
}

#[test]
fn refine_needs_a_draft() {
    let s = nsclc_scheme();
    let a = AliasMap::nsclc(&s).unwrap();
    let mut backend = ReplayBackend::default();
    let err = refine(&ElicitationTranscript::default(), "x", &mut backend, &s, &a, 0.0).unwrap_err();
    assert!(matches!(err, LlmError::NoDraft));
}

#[test]
fn replay_is_deterministic() {
    let a = replay_session();
    let b = replay_session();
    assert_eq!(a.drafts, b.drafts);
    let prompts = |t: &ElicitationTranscript| t.exchanges.iter().map(|e| e.prompt.clone()).collect::<Vec<_>>();
    assert_eq!(prompts(&a), prompts(&b));
}

#[test]
fn transcript_round_trips() {
    let session = replay_session();
    let back = ElicitationTranscript::from_json(&session.to_json()).unwrap();
    assert_eq!(back, session);
    let mut buf = Vec::new();
    write_jsonl(&session.exchanges, &mut buf).unwrap();
    assert_eq!(read_jsonl(buf.as_slice()).unwrap(), session.exchanges);
}
