//! Shared builders for the integration suites: case-study fixtures, the
//! engineered metrics corpus, the labeled adversarial corpus, and a canned
//! provider for offline recording.
//!
//! Each test target compiles this module independently and uses a different
//! slice of it, so unused-item warnings are suppressed wholesale.
#![allow(dead_code)]

use std::path::PathBuf;
use std::time::Duration;

use molgate::evaluation::EvalRecord;
use molgate::llm::{HttpSender, SendError};
use molgate::pipeline::{DesignTask, ObjectiveKind};
use molgate::prompts::PromptVersion;

pub const CELECOXIB: &str = "CC1=CC=C(C=C1)C2=CC(=NN2C3=CC=C(C=C3)S(=O)(=O)N)CF";
pub const CELECOXIB_MODIFIED: &str =
    "CC1=CC=C(C=C1)C2=CC(=NN2C3=CC=C(C=C3)S(=O)(=O)NC(C)C)CF";
pub const CELECOXIB_REACTION: &str =
    "Treatment with isopropyl iodide under basic conditions (K2CO3 in DMF)";
pub const CELECOXIB_OBJECTIVE: &str =
    "Improve COX-2 selectivity while maintaining drug-like properties";

pub const JAK2_START: &str =
    "CC1=C(C=C(C=C1)NC(=O)C2=CC=C(C=C2)CN3CCN(CC3)C)NC4=NC=CC(=N4)C5=CN=CC=C5";
pub const JAK2_INTERMEDIATE: &str =
    "CC1=C(C=C(C=C1)NC(=O)C2=CC=C(C=C2)CN3CCN(CC3)C)NC4=NC=CC(=N4)C5=CN=C(C=C5)Br";
pub const JAK2_MODIFIED: &str =
    "CC1=C(C=C(C=C1)NC(=O)C2=CC=C(C=C2)CN3CCN(CC3)C)NC4=NC=CC(=N4)C5=CN=C(C=C5)O";
pub const JAK2_REACTION_1: &str = "Bromination at the 2-position of the pyridine ring (NBS, TFA)";
pub const JAK2_REACTION_2: &str = "Oxidation using mCPBA in DCM, followed by hydrolysis";
pub const JAK2_OBJECTIVE: &str =
    "Improve aqueous solubility while maintaining JAK2 kinase affinity";

pub fn celecoxib_task() -> DesignTask {
    DesignTask {
        start_smiles: CELECOXIB.to_string(),
        objective: CELECOXIB_OBJECTIVE.to_string(),
        objective_kind: ObjectiveKind::Selectivity,
        prompt_version: PromptVersion::V4,
    }
}

pub fn celecoxib_reply() -> String {
    format!("* {CELECOXIB}\n* {CELECOXIB_REACTION}\n* {CELECOXIB_MODIFIED}")
}

pub fn jak2_task() -> DesignTask {
    DesignTask {
        start_smiles: JAK2_START.to_string(),
        objective: JAK2_OBJECTIVE.to_string(),
        objective_kind: ObjectiveKind::Solubility,
        prompt_version: PromptVersion::V4,
    }
}

pub fn jak2_reply() -> String {
    format!(
        "* {JAK2_START}\n* {JAK2_REACTION_1}\n* {JAK2_INTERMEDIATE}\n* {JAK2_REACTION_2}\n* {JAK2_MODIFIED}"
    )
}

/// Provider double that always answers with the same completion text.
pub struct CannedSender(pub String);

impl HttpSender for CannedSender {
    fn send(
        &self,
        _endpoint: &str,
        _body: &str,
        _api_key: Option<&str>,
        _timeout: Duration,
    ) -> Result<String, SendError> {
        Ok(serde_json::json!({"choices": [{"message": {"content": self.0}}]}).to_string())
    }
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

/// The drug corpus bundled with the crate, SMILES column only.
pub fn drug_smiles() -> Vec<String> {
    include_str!("../../data/drugs.smi")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().next().unwrap().to_string())
        .collect()
}

pub fn bullet_record(id: &str, response: &str) -> EvalRecord {
    EvalRecord {
        id: id.to_string(),
        task: DesignTask {
            start_smiles: "CCO".to_string(),
            objective: "Improve potency against the primary target".to_string(),
            objective_kind: ObjectiveKind::TargetAffinity,
            prompt_version: PromptVersion::V4,
        },
        response_text: response.to_string(),
        labels: None,
    }
}

/// 1000 records engineered to score 90.7% adherent with 917 of 1000 SMILES
/// valid, so the combined rate lands at 83.17.
pub fn metrics_corpus() -> Vec<EvalRecord> {
    let mut corpus = Vec::with_capacity(1000);
    for i in 0..83 {
        corpus.push(bullet_record(
            &format!("bad-chem-{i}"),
            "* CCO\n* Substitution under forcing conditions\n* C(C)(C)(C)(C)C",
        ));
    }
    for i in 0..10 {
        corpus.push(bullet_record(
            &format!("good-pair-{i}"),
            "* CCO\n* Williamson etherification with iodoethane\n* CCOCC",
        ));
    }
    for i in 0..814 {
        corpus.push(bullet_record(&format!("single-{i}"), "* CCO"));
    }
    for i in 0..93 {
        corpus.push(bullet_record(
            &format!("prose-{i}"),
            "I would try adding a methyl group.",
        ));
    }
    corpus
}

/// Well-formed single-step records built over the drug corpus; every SMILES
/// is valid and every response adheres to the bullet protocol.
pub fn curated_valid_corpus() -> Vec<EvalRecord> {
    drug_smiles()
        .iter()
        .enumerate()
        .map(|(i, smiles)| {
            bullet_record(
                &format!("drug-{i}"),
                &format!(
                    "* {smiles}\n* Functional group interconversion under standard conditions\n* {smiles}"
                ),
            )
        })
        .collect()
}

/// Labeled adversarial strings. Labels name the expected verdict class:
/// `valid`, `unbalanced_parens`, `unbalanced_brackets`, `invalid_char`,
/// `unmatched_ring`, `valence`, `aromatic` (non-kekulizable or otherwise
/// aromatic-inconsistent), `short_reaction`, `valid_reaction`.
pub fn adversarial_entries() -> Vec<(&'static str, String)> {
    let mut entries: Vec<(&'static str, String)> = Vec::new();

    let valid_bases = [
        "C", "CC", "CCO", "CC(=O)O", "c1ccccc1", "Cc1ccccc1", "c1ccncc1", "CC(C)Cc1ccccc1",
        "C#N", "N#Cc1ccccc1", "OCC(O)CO", "CC(=O)Oc1ccccc1C(=O)O", "c1ccc2ccccc2c1",
        "CN1CCN(CC1)C", "O=S(=O)(N)c1ccccc1", "FC(F)(F)c1ccccc1", "ClCCl", "BrCCBr",
        "C1CCCCC1", "C1CCOC1", "CC(C)(C)O", "CCN(CC)CC", "[NH4+].[Cl-]", "C[N+](C)(C)C",
        "[13CH4]", "c1cc[nH]c1", "O=C1CCCCC1", "CC=CC", "C/C=C/C", "CCCCCCCCCC",
    ];
    for base in valid_bases {
        entries.push(("valid", base.to_string()));
    }
    for i in 1..16 {
        entries.push(("valid", format!("C{}O", "C".repeat(i))));
    }

    for base in ["CCO", "c1ccccc1", "CC(=O)O", "C1CCCCC1", "CCN"] {
        entries.push(("unbalanced_parens", format!("{base}(")));
        entries.push(("unbalanced_parens", format!("{base}((C)")));
        entries.push(("unbalanced_parens", format!(")C{base}")));
        entries.push(("unbalanced_parens", format!("C({base}")));
        entries.push(("unbalanced_parens", format!("{base})")));
        entries.push(("unbalanced_parens", format!("(({base}")));
    }

    for base in ["CCO", "c1ccccc1", "CCN", "CC(C)C", "CCCC"] {
        entries.push(("unbalanced_brackets", format!("{base}[")));
        entries.push(("unbalanced_brackets", format!("{base}[NH2")));
        entries.push(("unbalanced_brackets", format!("]{base}")));
        entries.push(("unbalanced_brackets", format!("C[{base}")));
        entries.push(("unbalanced_brackets", format!("[13C{base}")));
        entries.push(("unbalanced_brackets", format!("{base}]C")));
    }

    for c in ['?', '!', '~', '$', '^', '&', ';', '\'', '`', '{', '}', '<', '>', '|', ','] {
        entries.push(("invalid_char", format!("CC{c}O")));
        entries.push(("invalid_char", format!("{c}CC")));
    }

    for base in ["C", "CC", "CCC", "c1ccccc1C", "CC(C)"] {
        entries.push(("unmatched_ring", format!("{base}1")));
        entries.push(("unmatched_ring", format!("C1{base}")));
        entries.push(("unmatched_ring", format!("{base}2CC")));
        entries.push(("unmatched_ring", format!("C%11{base}")));
        entries.push(("unmatched_ring", format!("{base}1CC2C1")));
        entries.push(("unmatched_ring", format!("{base}9")));
    }

    let pentavalent = [
        "C(C)(C)(C)(C)C",
        "CC(C)(C)(C)C",
        "FC(F)(F)(F)F",
        "C(F)(F)(F)(F)F",
        "CCC(C)(C)(C)C",
        "N(C)(C)(C)C",
        "CN(C)(C)C",
        "O(C)(C)C",
        "CO(C)C",
        "OC(C)(C)(C)(C)O",
        "FF(F)F",
        "ClC(Cl)(Cl)(Cl)(Cl)Cl",
        "C=C(C)(C)C",
        "C#C(C)C",
        "CC(=O)(=O)(=O)C",
        "II(I)I",
        "BrBr(Br)Br",
        "N(=O)(=O)(=O)O",
        "CCCC(C)(C)(C)(C)C",
        "C(N)(N)(N)(N)N",
    ];
    for s in pentavalent {
        entries.push(("valence", s.to_string()));
    }

    let aromatic_faults = [
        "c1ccc1",
        "c1cccc1",
        "c1ccccccc1",
        "cc",
        "ccc",
        "c1ccccc1c",
        "Cc1ccccc1c",
        "c1ccc(cc1)c",
        "c1cc1",
        "c1cccccc1",
        "cC",
        "oc1ccccc1",
        "n1ccccc1c",
        "co",
        "cn",
    ];
    for s in aromatic_faults {
        entries.push(("aromatic", s.to_string()));
    }

    for s in ["mix", "stir", "heat", "add", "go", "ok", "a", "hi", "x", "rx", "TLC", "etc."] {
        entries.push(("short_reaction", s.to_string()));
    }
    for s in [
        "Oxidation with manganese dioxide in dichloromethane",
        "Reduction with sodium borohydride in methanol",
        "Fischer esterification with ethanol and sulfuric acid",
        "N-alkylation with methyl iodide and potassium carbonate",
        "Suzuki coupling with phenylboronic acid",
        "Catalytic hydrogenation over palladium on carbon",
        "Acid-catalyzed dehydration at reflux",
        "Nucleophilic aromatic substitution with sodium methoxide",
    ] {
        entries.push(("valid_reaction", s.to_string()));
    }

    entries
}

/// Checks that the library's verdict for `payload` matches its corpus `label`.
///
/// Returns a mismatch description instead of panicking so callers can report
/// every disagreement in one pass.
pub fn classify_agrees(label: &str, payload: &str) -> Result<(), String> {
    use molgate::pathway::{validate_pathway, PathwayStep, SynthesisPathway};
    use molgate::smiles::{validate_chemistry, validate_syntax};

    match label {
        "valid" => {
            let verdict = validate_chemistry(payload);
            if verdict.ok {
                Ok(())
            } else {
                Err(format!("expected valid, got {:?}", verdict.message))
            }
        }
        "unbalanced_parens" | "unbalanced_brackets" | "invalid_char" | "unmatched_ring" => {
            let expected = match label {
                "unbalanced_parens" => "Unbalanced parentheses",
                "unbalanced_brackets" => "Unbalanced brackets",
                "invalid_char" => "Invalid character detected",
                _ => "Unmatched ring closure",
            };
            match validate_syntax(payload).message {
                Some(m) if m == expected => Ok(()),
                other => Err(format!("expected {expected:?}, got {other:?}")),
            }
        }
        "valence" => {
            let syntax = validate_syntax(payload);
            if !syntax.ok {
                return Err(format!(
                    "valence probe must be syntactically clean, got {:?}",
                    syntax.message
                ));
            }
            match validate_chemistry(payload).message.as_deref() {
                Some("Chemical validation failed: valence exceeded") => Ok(()),
                other => Err(format!("expected valence failure, got {other:?}")),
            }
        }
        "aromatic" => {
            let syntax = validate_syntax(payload);
            if !syntax.ok {
                return Err(format!(
                    "aromaticity probe must be syntactically clean, got {:?}",
                    syntax.message
                ));
            }
            let accepted = [
                "Chemical validation failed: H\u{fc}ckel violation",
                "Chemical validation failed: aromatic atom not in ring",
                "Chemical validation failed: kekulization impossible",
            ];
            match validate_chemistry(payload).message.as_deref() {
                Some(m) if accepted.contains(&m) => Ok(()),
                other => Err(format!("expected aromaticity failure, got {other:?}")),
            }
        }
        "short_reaction" | "valid_reaction" => {
            let pathway = SynthesisPathway::new(vec![
                PathwayStep::molecule("CCO"),
                PathwayStep::reaction(payload),
                PathwayStep::molecule("CCO"),
            ]);
            let verdict = validate_pathway(&pathway);
            let flagged = verdict
                .messages
                .iter()
                .any(|m| m.contains("Insufficient reaction description"));
            match (label, flagged) {
                ("short_reaction", true) | ("valid_reaction", false) => Ok(()),
                ("short_reaction", false) => {
                    Err("reaction text was not flagged as too short".into())
                }
                _ => Err(format!(
                    "reaction text wrongly flagged: {:?}",
                    verdict.messages
                )),
            }
        }
        other => Err(format!("unknown corpus label {other:?}")),
    }
}
