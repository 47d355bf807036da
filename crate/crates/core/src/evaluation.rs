//! Reliability metrics over response corpora: format adherence, chemical
//! validity, synthesis validity, and their product; plus controlled fault
//! injection to measure what each validation layer actually catches.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pathway::{check_anchoring, validate_pathway};
use crate::pipeline::DesignTask;
use crate::prompts::{builtin_template, PromptVersion};
use crate::response::{
    check_format, parse_bullets, parse_response, strip_decoration, Protocol, RawResponse,
};
use crate::smiles::{validate_chemistry, validate_syntax};

/// One response to be scored, optionally with ground-truth labels from a
/// fault-injection pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    pub task: DesignTask,
    pub response_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Labels>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    pub format_ok: bool,
    pub chem_valid: bool,
    #[serde(default)]
    pub injected_fault: InjectedFault,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InjectedFault {
    #[default]
    None,
    Syntax,
    Chemistry,
    Format,
}

/// Which validation layers run when deciding whether to flag a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AblationConfig {
    Full,
    SyntaxOnly,
    ChemistryOnly,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: usize,
    pub format_adherence: f64,
    pub chemical_validity: f64,
    pub synthesis_validity: f64,
    pub combined_success: f64,
    pub detected_invalid: f64,
    pub false_positive: f64,
}

impl MetricsReport {
    /// Two-line aligned table: one header row, one value row.
    pub fn text_table(&self) -> String {
        format!(
            "{:>8} {:>9} {:>10} {:>11} {:>10} {:>10} {:>11}\n\
             {:>8} {:>9.2} {:>10.2} {:>11.2} {:>10.2} {:>10.2} {:>11.2}\n",
            "records",
            "format_%",
            "chemical_%",
            "synthesis_%",
            "combined_%",
            "detected_%",
            "false_pos_%",
            self.n,
            self.format_adherence,
            self.chemical_validity,
            self.synthesis_validity,
            self.combined_success,
            self.detected_invalid,
            self.false_positive,
        )
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("record {0} is missing labels")]
    MissingLabels(String),
    #[error("corpus io: {0}")]
    Io(String),
    #[error("corpus line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Rejection buckets for the failure taxonomy. The first failing layer
/// decides the bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FailureCategory {
    ConversationalNoise,
    SyntaxError,
    ValenceViolation,
    AromaticityFailure,
    PathwayShape,
    ShortReaction,
    NotAnchored,
}

fn record_protocol(record: &EvalRecord) -> Protocol {
    match record.task.prompt_version {
        PromptVersion::Custom => Protocol::Bullets,
        v => builtin_template(v).protocol.measurement_protocol(),
    }
}

/// SMILES items pulled out without enforcing the full protocol, so that the
/// syntax/chemistry layers can be measured even on responses the format
/// layer would reject.
fn smiles_candidates(text: &str, protocol: Protocol) -> Vec<String> {
    match protocol {
        Protocol::Bullets => {
            let parsed = parse_bullets(&RawResponse::from_text(text));
            parsed
                .items
                .iter()
                .step_by(2)
                .map(|item| strip_decoration(item).to_string())
                .collect()
        }
        Protocol::Json => {
            let Ok(value) = serde_json::from_str::<serde_json::Value>(text.trim()) else {
                return Vec::new();
            };
            let mut out = Vec::new();
            if let Some(s) = value.get("starting_material").and_then(|v| v.as_str()) {
                out.push(s.to_string());
            }
            if let Some(steps) = value.get("pathway").and_then(|v| v.as_array()) {
                for step in steps {
                    if let Some(s) = step.get("smiles").and_then(|v| v.as_str()) {
                        out.push(s.to_string());
                    }
                }
            }
            out
        }
    }
}

struct RecordStats {
    adherent: bool,
    parsed: bool,
    pathway_valid: bool,
    smiles_total: usize,
    smiles_valid: usize,
}

fn record_stats(record: &EvalRecord, protocol: Protocol) -> RecordStats {
    let raw = RawResponse::from_text(&record.response_text);
    let verdict = check_format(&raw, protocol);
    if !verdict.adherent {
        return RecordStats {
            adherent: false,
            parsed: false,
            pathway_valid: false,
            smiles_total: 0,
            smiles_valid: 0,
        };
    }
    match parse_response(&raw, protocol) {
        Ok(pathway) => {
            let total = pathway.molecules().count();
            let valid = pathway.molecules().filter(|s| validate_chemistry(s).ok).count();
            RecordStats {
                adherent: true,
                parsed: true,
                pathway_valid: validate_pathway(&pathway).valid,
                smiles_total: total,
                smiles_valid: valid,
            }
        }
        Err(_) => RecordStats {
            adherent: true,
            parsed: false,
            pathway_valid: false,
            smiles_total: 0,
            smiles_valid: 0,
        },
    }
}

fn percentage(numerator: usize, denominator: usize) -> f64 {
    if denominator == 0 {
        0.0
    } else {
        numerator as f64 / denominator as f64 * 100.0
    }
}

/// Score a corpus. Chemical validity is measured over every SMILES string
/// extracted from adherent responses, not per response — a three-molecule
/// pathway contributes three data points.
pub fn eval_corpus(corpus: &[EvalRecord], protocol: Protocol) -> Result<MetricsReport, EvalError> {
    if corpus.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let stats = crate::par::map_ordered(corpus, |r| record_stats(r, protocol));
    Ok(reduce_stats(&stats))
}

fn reduce_stats(stats: &[RecordStats]) -> MetricsReport {
    let n = stats.len();
    let adherent = stats.iter().filter(|s| s.adherent).count();
    let parsed = stats.iter().filter(|s| s.parsed).count();
    let pathway_valid = stats.iter().filter(|s| s.pathway_valid).count();
    let smiles_total: usize = stats.iter().map(|s| s.smiles_total).sum();
    let smiles_valid: usize = stats.iter().map(|s| s.smiles_valid).sum();

    let format_adherence = percentage(adherent, n);
    let chemical_validity = percentage(smiles_valid, smiles_total);
    MetricsReport {
        n,
        format_adherence,
        chemical_validity,
        synthesis_validity: percentage(pathway_valid, parsed),
        combined_success: format_adherence * chemical_validity / 100.0,
        detected_invalid: 0.0,
        false_positive: 0.0,
    }
}

const FAULT_ORDER: [InjectedFault; 3] =
    [InjectedFault::Syntax, InjectedFault::Chemistry, InjectedFault::Format];

/// Mutate the first SMILES item of a response in place; `None` when the
/// response has no recognizable SMILES slot to corrupt.
fn mutate_first_smiles(text: &str, suffix: &str, protocol: Protocol) -> Option<String> {
    match protocol {
        Protocol::Bullets => {
            let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
            for line in lines.iter_mut() {
                if line.trim().starts_with('*') {
                    *line = format!("{}{}", line.trim_end(), suffix);
                    return Some(lines.join("\n"));
                }
            }
            None
        }
        Protocol::Json => {
            let mut value: serde_json::Value = serde_json::from_str(text.trim()).ok()?;
            let start = value.get_mut("starting_material")?.as_str()?.to_string();
            *value.get_mut("starting_material")? =
                serde_json::Value::String(format!("{start}{suffix}"));
            Some(value.to_string())
        }
    }
}

fn strip_format_markers(text: &str, protocol: Protocol) -> Option<String> {
    match protocol {
        Protocol::Bullets => {
            if !text.lines().any(|l| l.trim().starts_with('*')) {
                return None;
            }
            let stripped: Vec<String> = text
                .lines()
                .map(|l| {
                    let t = l.trim();
                    if let Some(rest) = t.strip_prefix('*') {
                        rest.trim_start().to_string()
                    } else {
                        l.to_string()
                    }
                })
                .collect();
            Some(stripped.join("\n"))
        }
        Protocol::Json => {
            let t = text.trim_end();
            t.strip_suffix('}').map(str::to_string)
        }
    }
}

fn apply_fault(text: &str, fault: InjectedFault, protocol: Protocol) -> Option<String> {
    match fault {
        InjectedFault::None => Some(text.to_string()),
        // An extra "(" can never be balanced by what follows a valid item.
        InjectedFault::Syntax => mutate_first_smiles(text, "(", protocol),
        // Five extra fluorines push any supported atom past its largest
        // allowed valence while staying syntactically legal.
        InjectedFault::Chemistry => mutate_first_smiles(text, "(F)(F)(F)(F)(F)", protocol),
        InjectedFault::Format => strip_format_markers(text, protocol),
    }
}

/// Deterministically corrupt a corpus. Each record draws one coin per fault
/// kind in a fixed order (syntax, chemistry, format) and the first hit is
/// applied; labels record what the text actually looks like afterwards, so
/// a record with no mutable SMILES slot stays labeled `None`.
pub fn inject_failures(
    corpus: &[EvalRecord],
    rates: &BTreeMap<InjectedFault, f64>,
    seed: u64,
) -> Vec<EvalRecord> {
    for (kind, p) in rates {
        assert!(
            (0.0..=1.0).contains(p),
            "injection probability for {kind:?} out of range: {p}"
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(corpus.len());
    for record in corpus {
        let mut chosen = InjectedFault::None;
        for kind in FAULT_ORDER {
            let p = rates.get(&kind).copied().unwrap_or(0.0);
            // Every kind draws even after a hit, keeping the stream aligned
            // across rate maps with the same seed.
            let draw = rng.gen_range(0..1_000_000u32);
            if chosen == InjectedFault::None && (draw as f64) < p * 1_000_000.0 {
                chosen = kind;
            }
        }
        let protocol = record_protocol(record);
        let (text, applied) = match apply_fault(&record.response_text, chosen, protocol) {
            Some(t) => (t, chosen),
            None => (record.response_text.clone(), InjectedFault::None),
        };
        let raw = RawResponse::from_text(&text);
        let format_ok = check_format(&raw, protocol).adherent;
        let candidates = smiles_candidates(&text, protocol);
        let chem_valid = candidates.iter().all(|s| validate_chemistry(s).ok);
        let mut mutated = record.clone();
        mutated.response_text = text;
        mutated.labels = Some(Labels { format_ok, chem_valid, injected_fault: applied });
        out.push(mutated);
    }
    out
}

fn flags(record: &EvalRecord, config: AblationConfig) -> bool {
    let protocol = record_protocol(record);
    let candidates = smiles_candidates(&record.response_text, protocol);
    match config {
        AblationConfig::None => false,
        AblationConfig::SyntaxOnly => candidates.iter().any(|s| !validate_syntax(s).ok),
        AblationConfig::ChemistryOnly => candidates.iter().any(|s| !validate_chemistry(s).ok),
        AblationConfig::Full => {
            let raw = RawResponse::from_text(&record.response_text);
            if !check_format(&raw, protocol).adherent {
                return true;
            }
            if candidates.iter().any(|s| !validate_chemistry(s).ok) {
                return true;
            }
            match parse_response(&raw, protocol) {
                Ok(pathway) => !validate_pathway(&pathway).valid,
                Err(_) => true,
            }
        }
    }
}

/// Score detection behavior of one validator subset against injection
/// labels. The corpus-quality columns are computed as usual; the two
/// detection columns compare flags against ground truth.
pub fn ablation_validation(
    corpus: &[EvalRecord],
    config: AblationConfig,
) -> Result<MetricsReport, EvalError> {
    if corpus.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    for record in corpus {
        if record.labels.is_none() {
            return Err(EvalError::MissingLabels(record.id.clone()));
        }
    }
    let stats = crate::par::map_ordered(corpus, |r| record_stats(r, record_protocol(r)));
    let mut report = reduce_stats(&stats);

    let flagged = crate::par::map_ordered(corpus, |r| flags(r, config));
    let mut faulted = 0usize;
    let mut faulted_flagged = 0usize;
    let mut clean = 0usize;
    let mut clean_flagged = 0usize;
    for (record, flag) in corpus.iter().zip(&flagged) {
        let fault = record.labels.expect("checked above").injected_fault;
        if fault == InjectedFault::None {
            clean += 1;
            clean_flagged += usize::from(*flag);
        } else {
            faulted += 1;
            faulted_flagged += usize::from(*flag);
        }
    }
    report.detected_invalid = percentage(faulted_flagged, faulted);
    report.false_positive = percentage(clean_flagged, clean);
    Ok(report)
}

fn classify_record(record: &EvalRecord) -> Option<FailureCategory> {
    let protocol = record_protocol(record);
    let raw = RawResponse::from_text(&record.response_text);
    let candidates = smiles_candidates(&record.response_text, protocol);
    if candidates.is_empty() {
        return Some(FailureCategory::ConversationalNoise);
    }
    if candidates.iter().any(|s| !validate_syntax(s).ok) {
        return Some(FailureCategory::SyntaxError);
    }
    for s in &candidates {
        let verdict = validate_chemistry(s);
        if !verdict.ok {
            let message = verdict.message.unwrap_or_default();
            let aromatic = message.contains("Hückel")
                || message.contains("aromatic")
                || message.contains("kekulization");
            return Some(if aromatic {
                FailureCategory::AromaticityFailure
            } else {
                // Valence faults plus the long tail (unsupported elements).
                FailureCategory::ValenceViolation
            });
        }
    }
    match parse_response(&raw, protocol) {
        Err(_) => Some(FailureCategory::PathwayShape),
        Ok(pathway) => {
            let verdict = validate_pathway(&pathway);
            if !verdict.valid {
                let short =
                    verdict.messages.iter().any(|m| m.contains("Insufficient reaction"));
                return Some(if short {
                    FailureCategory::ShortReaction
                } else {
                    FailureCategory::PathwayShape
                });
            }
            let start = validate_chemistry(&record.task.start_smiles).molecule?;
            if !check_anchoring(&pathway, &start) {
                return Some(FailureCategory::NotAnchored);
            }
            None
        }
    }
}

/// Bucket every rejected record by the first validation layer that turns
/// it away. Fully valid records contribute nothing.
pub fn failure_taxonomy(corpus: &[EvalRecord]) -> BTreeMap<FailureCategory, usize> {
    let categories = crate::par::map_ordered(corpus, classify_record);
    let mut counts = BTreeMap::new();
    for category in categories.into_iter().flatten() {
        *counts.entry(category).or_insert(0) += 1;
    }
    counts
}

/// Read a corpus file: one JSON record per line, blank lines ignored.
pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<EvalRecord>, EvalError> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| EvalError::Io(format!("{}: {e}", path.as_ref().display())))?;
    let mut corpus = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| EvalError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .map_err(|e| EvalError::Parse { line: i + 1, reason: e.to_string() })?;
        corpus.push(record);
    }
    Ok(corpus)
}

pub fn write_corpus(path: impl AsRef<Path>, corpus: &[EvalRecord]) -> Result<(), EvalError> {
    let mut file = std::fs::File::create(path.as_ref())
        .map_err(|e| EvalError::Io(format!("{}: {e}", path.as_ref().display())))?;
    for record in corpus {
        let line = serde_json::to_string(record).map_err(|e| EvalError::Io(e.to_string()))?;
        writeln!(file, "{line}").map_err(|e| EvalError::Io(e.to_string()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::ObjectiveKind;

    fn record(id: &str, response: &str) -> EvalRecord {
        EvalRecord {
            id: id.to_string(),
            task: DesignTask {
                start_smiles: "CCO".to_string(),
                objective: "Raise the boiling point".to_string(),
                objective_kind: ObjectiveKind::Solubility,
                prompt_version: PromptVersion::V4,
            },
            response_text: response.to_string(),
            labels: None,
        }
    }

    const VALID_RESPONSE: &str =
        "* CCO\n* Oxidation with pyridinium chlorochromate\n* CC=O";

    #[test]
    fn all_valid_corpus_scores_perfect() {
        let corpus: Vec<_> = (0..10).map(|i| record(&format!("r{i}"), VALID_RESPONSE)).collect();
        let report = eval_corpus(&corpus, Protocol::Bullets).unwrap();
        assert_eq!(report.format_adherence, 100.0);
        assert_eq!(report.chemical_validity, 100.0);
        assert_eq!(report.synthesis_validity, 100.0);
        assert_eq!(report.combined_success, 100.0);
        assert_eq!(report.detected_invalid, 0.0);
        assert_eq!(report.false_positive, 0.0);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert_eq!(eval_corpus(&[], Protocol::Bullets).unwrap_err(), EvalError::EmptyCorpus);
    }

    /// 907/1000 adherent and 917/1000 valid SMILES must multiply out to a
    /// combined rate of 83.17.
    #[test]
    fn engineered_corpus_reproduces_the_product_arithmetic() {
        let mut corpus = Vec::new();
        // 83 adherent records whose second molecule breaks valence.
        for i in 0..83 {
            corpus.push(record(
                &format!("bad-chem-{i}"),
                "* CCO\n* Substitution under forcing conditions\n* C(C)(C)(C)(C)C",
            ));
        }
        // 10 adherent records with two valid molecules.
        for i in 0..10 {
            corpus.push(record(
                &format!("good-pair-{i}"),
                "* CCO\n* Williamson etherification with iodoethane\n* CCOCC",
            ));
        }
        // 814 adherent single-molecule records.
        for i in 0..814 {
            corpus.push(record(&format!("single-{i}"), "* CCO"));
        }
        // 93 non-adherent records.
        for i in 0..93 {
            corpus.push(record(&format!("prose-{i}"), "I would try adding a methyl group."));
        }
        assert_eq!(corpus.len(), 1000);

        let report = eval_corpus(&corpus, Protocol::Bullets).unwrap();
        assert!((report.format_adherence - 90.7).abs() < 1e-9);
        // SMILES pool: 83*2 + 10*2 + 814 = 1000, of which 83 are invalid.
        assert!((report.chemical_validity - 91.7).abs() < 1e-9);
        assert!((report.combined_success - 83.2).abs() < 0.1);
        assert!(
            (report.combined_success
                - report.format_adherence * report.chemical_validity / 100.0)
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn zero_rates_leave_the_corpus_unchanged() {
        let corpus: Vec<_> = (0..20).map(|i| record(&format!("r{i}"), VALID_RESPONSE)).collect();
        let injected = inject_failures(&corpus, &BTreeMap::new(), 7);
        for (before, after) in corpus.iter().zip(&injected) {
            assert_eq!(before.response_text, after.response_text);
            let labels = after.labels.unwrap();
            assert_eq!(labels.injected_fault, InjectedFault::None);
            assert!(labels.format_ok);
            assert!(labels.chem_valid);
        }
    }

    #[test]
    fn syntax_rate_one_breaks_every_record() {
        let corpus: Vec<_> = (0..20).map(|i| record(&format!("r{i}"), VALID_RESPONSE)).collect();
        let rates = BTreeMap::from([(InjectedFault::Syntax, 1.0)]);
        let injected = inject_failures(&corpus, &rates, 11);
        for record in &injected {
            assert_eq!(record.labels.unwrap().injected_fault, InjectedFault::Syntax);
            let candidates = smiles_candidates(&record.response_text, Protocol::Bullets);
            assert!(candidates.iter().any(|s| !validate_syntax(s).ok));
        }
    }

    #[test]
    fn chemistry_fault_keeps_syntax_legal() {
        let corpus: Vec<_> = (0..20).map(|i| record(&format!("r{i}"), VALID_RESPONSE)).collect();
        let rates = BTreeMap::from([(InjectedFault::Chemistry, 1.0)]);
        let injected = inject_failures(&corpus, &rates, 11);
        for record in &injected {
            let labels = record.labels.unwrap();
            assert_eq!(labels.injected_fault, InjectedFault::Chemistry);
            assert!(labels.format_ok, "chemistry faults must not disturb the format layer");
            assert!(!labels.chem_valid);
            let candidates = smiles_candidates(&record.response_text, Protocol::Bullets);
            assert!(candidates.iter().all(|s| validate_syntax(s).ok));
            assert!(candidates.iter().any(|s| !validate_chemistry(s).ok));
        }
    }

    #[test]
    fn format_fault_strips_the_structure() {
        let corpus: Vec<_> = (0..5).map(|i| record(&format!("r{i}"), VALID_RESPONSE)).collect();
        let rates = BTreeMap::from([(InjectedFault::Format, 1.0)]);
        let injected = inject_failures(&corpus, &rates, 3);
        for record in &injected {
            assert!(!record.labels.unwrap().format_ok);
            assert!(smiles_candidates(&record.response_text, Protocol::Bullets).is_empty());
        }
    }

    #[test]
    fn injection_is_reproducible_and_seed_sensitive() {
        let corpus: Vec<_> = (0..50).map(|i| record(&format!("r{i}"), VALID_RESPONSE)).collect();
        let rates = BTreeMap::from([
            (InjectedFault::Syntax, 0.3),
            (InjectedFault::Chemistry, 0.3),
            (InjectedFault::Format, 0.2),
        ]);
        let a = inject_failures(&corpus, &rates, 42);
        let b = inject_failures(&corpus, &rates, 42);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap(),
            "same seed must reproduce the corpus byte for byte"
        );
        let c = inject_failures(&corpus, &rates, 43);
        assert_ne!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
    }

    #[test]
    fn full_validation_catches_all_injected_faults_with_no_false_positives() {
        let corpus: Vec<_> =
            (0..200).map(|i| record(&format!("r{i}"), VALID_RESPONSE)).collect();
        let rates = BTreeMap::from([
            (InjectedFault::Syntax, 0.25),
            (InjectedFault::Chemistry, 0.25),
        ]);
        let injected = inject_failures(&corpus, &rates, 97);
        assert!(injected.iter().any(|r| r.labels.unwrap().injected_fault != InjectedFault::None));
        let report = ablation_validation(&injected, AblationConfig::Full).unwrap();
        assert_eq!(report.detected_invalid, 100.0);
        assert_eq!(report.false_positive, 0.0);
    }

    #[test]
    fn no_validation_detects_nothing() {
        let corpus: Vec<_> = (0..50).map(|i| record(&format!("r{i}"), VALID_RESPONSE)).collect();
        let rates = BTreeMap::from([(InjectedFault::Syntax, 0.5)]);
        let injected = inject_failures(&corpus, &rates, 5);
        let report = ablation_validation(&injected, AblationConfig::None).unwrap();
        assert_eq!(report.detected_invalid, 0.0);
        assert_eq!(report.false_positive, 0.0);
    }

    #[test]
    fn syntax_only_misses_chemistry_faults() {
        let corpus: Vec<_> = (0..50).map(|i| record(&format!("r{i}"), VALID_RESPONSE)).collect();
        let rates = BTreeMap::from([(InjectedFault::Chemistry, 1.0)]);
        let injected = inject_failures(&corpus, &rates, 5);
        let report = ablation_validation(&injected, AblationConfig::SyntaxOnly).unwrap();
        assert_eq!(report.detected_invalid, 0.0);
    }

    #[test]
    fn detection_is_monotone_in_the_validator_set() {
        let corpus: Vec<_> =
            (0..300).map(|i| record(&format!("r{i}"), VALID_RESPONSE)).collect();
        let rates = BTreeMap::from([
            (InjectedFault::Syntax, 0.2),
            (InjectedFault::Chemistry, 0.2),
            (InjectedFault::Format, 0.2),
        ]);
        for seed in [1, 2, 3, 4, 5] {
            let injected = inject_failures(&corpus, &rates, seed);
            let full = ablation_validation(&injected, AblationConfig::Full).unwrap();
            let syntax = ablation_validation(&injected, AblationConfig::SyntaxOnly).unwrap();
            let chem = ablation_validation(&injected, AblationConfig::ChemistryOnly).unwrap();
            assert!(full.detected_invalid >= syntax.detected_invalid);
            assert!(full.detected_invalid >= chem.detected_invalid);
        }
    }

    #[test]
    fn ablation_requires_labels() {
        let corpus = vec![record("unlabeled", VALID_RESPONSE)];
        assert_eq!(
            ablation_validation(&corpus, AblationConfig::Full).unwrap_err(),
            EvalError::MissingLabels("unlabeled".to_string())
        );
    }

    #[test]
    fn taxonomy_buckets_each_failure_mode() {
        let corpus = vec![
            record("ok", VALID_RESPONSE),
            record("prose", "Sure, here is a thought about your molecule."),
            record("syntax", "* C1CC(\n* Reasonable reaction text\n* CCO"),
            record("valence", "* C(C)(C)(C)(C)C\n* Reasonable reaction text\n* CCO"),
            record("aromatic", "* c1ccc1\n* Reasonable reaction text\n* CCO"),
            record("short", "* CCO\n* mix\n* CC=O"),
            record("shape", "* CCO\n* Reasonable reaction text"),
            record("anchor", "* CCC\n* Hydration under acidic conditions\n* CCO"),
        ];
        let taxonomy = failure_taxonomy(&corpus);
        assert_eq!(taxonomy.get(&FailureCategory::ConversationalNoise), Some(&1));
        assert_eq!(taxonomy.get(&FailureCategory::SyntaxError), Some(&1));
        assert_eq!(taxonomy.get(&FailureCategory::ValenceViolation), Some(&1));
        assert_eq!(taxonomy.get(&FailureCategory::AromaticityFailure), Some(&1));
        assert_eq!(taxonomy.get(&FailureCategory::ShortReaction), Some(&1));
        assert_eq!(taxonomy.get(&FailureCategory::PathwayShape), Some(&1));
        assert_eq!(taxonomy.get(&FailureCategory::NotAnchored), Some(&1));
        assert_eq!(taxonomy.values().sum::<usize>(), 7);
    }

    #[test]
    fn taxonomy_of_valid_corpus_is_empty() {
        let corpus: Vec<_> = (0..5).map(|i| record(&format!("r{i}"), VALID_RESPONSE)).collect();
        assert!(failure_taxonomy(&corpus).is_empty());
    }

    #[test]
    fn corpus_round_trips_through_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let mut corpus: Vec<_> =
            (0..10).map(|i| record(&format!("r{i}"), VALID_RESPONSE)).collect();
        corpus[3].labels = Some(Labels {
            format_ok: true,
            chem_valid: false,
            injected_fault: InjectedFault::Chemistry,
        });
        write_corpus(&path, &corpus).unwrap();
        let loaded = read_corpus(&path).unwrap();
        assert_eq!(corpus, loaded);
    }

    #[test]
    fn corpus_parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(&path, "{\"id\": \"x\"\nnot json\n").unwrap();
        match read_corpus(&path).unwrap_err() {
            EvalError::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn text_table_is_aligned_and_complete() {
        let report = MetricsReport {
            n: 1000,
            format_adherence: 90.7,
            chemical_validity: 91.7,
            synthesis_validity: 88.0,
            combined_success: 83.1719,
            detected_invalid: 0.0,
            false_positive: 0.0,
        };
        let table = report.text_table();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].contains("combined_%"));
        assert!(lines[1].contains("83.17"));
        assert_eq!(lines[0].len(), lines[1].len(), "columns must align");
    }

    #[test]
    fn combined_success_always_equals_the_product() {
        let corpora = [
            vec![record("a", VALID_RESPONSE), record("b", "plain prose")],
            vec![record("c", "* C(C)(C)(C)(C)C\n* Forcing conditions applied\n* CCO")],
            (0..30).map(|i| record(&format!("m{i}"), VALID_RESPONSE)).collect::<Vec<_>>(),
        ];
        for corpus in &corpora {
            let r = eval_corpus(corpus, Protocol::Bullets).unwrap();
            assert!(
                (r.combined_success - r.format_adherence * r.chemical_validity / 100.0).abs()
                    < 1e-12
            );
        }
    }
}
