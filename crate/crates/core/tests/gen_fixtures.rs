//! One-shot regenerators for the committed fixtures under `tests/data/`.
//!
//! Every test here is `#[ignore]`d so normal runs never rewrite fixtures.
//! After changing a corpus builder or a recorded exchange, run
//! `cargo test -p molgate --test gen_fixtures -- --ignored` and commit the
//! rewritten files.

mod support;

use std::fs;

use molgate::evaluation::write_corpus;
use molgate::llm::TransportConfig;
use molgate::pipeline::{run_task_with, CandidateStatus, RunOptions};

use support::*;

#[test]
#[ignore = "rewrites tests/data/adversarial.tsv"]
fn regen_adversarial_corpus() {
    let entries = adversarial_entries();
    assert!(
        entries.len() >= 200,
        "corpus needs at least 200 strings, has {}",
        entries.len()
    );

    // Refuse to write a corpus the library itself disagrees with: every
    // label must match the verdict the validators actually return.
    let mismatches: Vec<String> = entries
        .iter()
        .filter_map(|(label, payload)| {
            classify_agrees(label, payload)
                .err()
                .map(|why| format!("  {label}\t{payload}: {why}"))
        })
        .collect();
    assert!(
        mismatches.is_empty(),
        "mislabeled entries:\n{}",
        mismatches.join("\n")
    );

    let mut out = String::new();
    for (label, payload) in &entries {
        out.push_str(label);
        out.push('\t');
        out.push_str(payload);
        out.push('\n');
    }
    fs::create_dir_all(data_dir()).unwrap();
    fs::write(data_dir().join("adversarial.tsv"), out).unwrap();
}

#[test]
#[ignore = "rewrites tests/data/corpus_table1.jsonl"]
fn regen_metrics_corpus() {
    let corpus = metrics_corpus();
    assert_eq!(corpus.len(), 1000);
    fs::create_dir_all(data_dir()).unwrap();
    write_corpus(data_dir().join("corpus_table1.jsonl"), &corpus).unwrap();
}

#[test]
#[ignore = "rewrites tests/data/cassettes/*.jsonl"]
fn regen_case_study_cassettes() {
    let dir = data_dir().join("cassettes");
    fs::create_dir_all(&dir).unwrap();

    for (name, task, reply) in [
        ("celecoxib", celecoxib_task(), celecoxib_reply()),
        ("jak2", jak2_task(), jak2_reply()),
    ] {
        let path = dir.join(format!("{name}.jsonl"));
        // Recording appends takes, so stale ones must go first.
        let _ = fs::remove_file(&path);
        let transport = TransportConfig::record("http://localhost:0/unused", &path);
        let result =
            run_task_with(&task, &transport, &RunOptions::default(), &CannedSender(reply))
                .unwrap();
        assert_eq!(
            result.status,
            CandidateStatus::Accepted,
            "{name} exchange must replay as accepted, got rejection {:?}",
            result.rejection_reason
        );
    }
}
