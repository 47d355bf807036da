//! The closed design loop: gate the input, render the prompt, get a
//! completion, and push it through format, chemistry, and pathway checks
//! before any property math or external predictor runs.
//!
//! Every stage that rejects produces a `CandidateResult` with a terminal
//! status; transport problems are the only thing surfaced as `Err`, so a
//! batch run can keep rejection statistics clean of network noise.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{complete_with, ChatRequest, HttpSender, LlmError, ReqwestSender, TransportConfig};
use crate::pathway::{check_anchoring, validate_pathway, PathwayVerdict, SynthesisPathway};
use crate::prompts::{builtin_template, render_prompt, PromptTemplate, PromptVersion};
use crate::properties::{morgan_fingerprint, property_profile, tanimoto, PropertyProfile};
use crate::response::{check_format, parse_response, FormatVerdict, RawResponse};
use crate::smiles::{validate_chemistry, Molecule};

pub const DEFAULT_MODEL: &str = "design-model";
pub const DEFAULT_TEMPERATURE: f64 = 0.7;
pub const DEFAULT_MAX_TOKENS: u32 = 1024;
const FINGERPRINT_RADIUS: usize = 2;
const FINGERPRINT_BITS: usize = 2048;

/// What the task is trying to improve. The kind does not change the control
/// flow here; it labels results and picks the wording downstream consumers
/// (reports, objectives) use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveKind {
    TargetAffinity,
    Selectivity,
    Solubility,
    MetabolicStability,
    BbbPenetration,
    SyntheticAccessibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignTask {
    pub start_smiles: String,
    pub objective: String,
    pub objective_kind: ObjectiveKind,
    pub prompt_version: PromptVersion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CandidateStatus {
    Accepted,
    RejectedFormat,
    RejectedChemistry,
    RejectedPathway,
    RejectedInput,
}

/// One completed pass through the loop. Stages that never ran stay `None`:
/// a format rejection has no pathway, an input rejection has no response at
/// all (the `raw` field is an empty placeholder and no request was sent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub task: DesignTask,
    pub raw: RawResponse,
    pub format: FormatVerdict,
    pub pathway: Option<SynthesisPathway>,
    pub pathway_verdict: Option<PathwayVerdict>,
    pub anchored: Option<bool>,
    pub start_profile: Option<PropertyProfile>,
    pub final_profile: Option<PropertyProfile>,
    pub similarity: Option<f64>,
    pub external: BTreeMap<String, f64>,
    pub external_errors: BTreeMap<String, String>,
    pub status: CandidateStatus,
    pub rejection_reason: Option<String>,
}

/// Transport-level failure. Kept separate from rejection statuses so metric
/// denominators only ever count completions that actually arrived.
#[derive(Debug, Error)]
#[error("transport: {0}")]
pub struct TransportError(#[from] pub LlmError);

/// An external property predictor run as a subprocess: SMILES lines on
/// stdin, one JSON object per line on stdout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorSpec {
    pub name: String,
    pub command: String,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default = "default_predictor_timeout")]
    pub timeout: Duration,
}

fn default_predictor_timeout() -> Duration {
    Duration::from_secs(10)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PredictorError {
    #[error("predictor timed out after {0:.1}s")]
    PredictorTimeout(f64),
    #[error("predictor protocol error: {0}")]
    PredictorProtocolError(String),
}

/// Knobs that are fixed for a whole run rather than per task.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub predictors: Vec<PredictorSpec>,
    /// Required when a task uses `PromptVersion::Custom`.
    pub custom_template: Option<PromptTemplate>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            model: DEFAULT_MODEL.to_string(),
            temperature: DEFAULT_TEMPERATURE,
            max_tokens: DEFAULT_MAX_TOKENS,
            predictors: Vec::new(),
            custom_template: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    LowerIsBetter,
    HigherIsBetter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyDelta {
    pub name: String,
    pub start: f64,
    pub modified: f64,
    pub fold: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("fold change needs positive values, got start {start} and modified {modified}")]
pub struct NonPositiveValue {
    pub start: f64,
    pub modified: f64,
}

/// Fold improvement of a measured value. For lower-is-better quantities
/// (IC50, for instance) a drop from 250 to 15 is a 16.7x improvement; the
/// ratio is flipped for higher-is-better ones so `fold > 1` always means
/// the modification helped.
pub fn property_delta(
    name: &str,
    start: f64,
    modified: f64,
    direction: Direction,
) -> Result<PropertyDelta, NonPositiveValue> {
    if start <= 0.0 || modified <= 0.0 || !start.is_finite() || !modified.is_finite() {
        return Err(NonPositiveValue { start, modified });
    }
    let fold = match direction {
        Direction::LowerIsBetter => start / modified,
        Direction::HigherIsBetter => modified / start,
    };
    Ok(PropertyDelta { name: name.to_string(), start, modified, fold, direction })
}

/// Run one task end to end with the default HTTP transport stack.
pub fn run_task(
    task: &DesignTask,
    transport: &TransportConfig,
    options: &RunOptions,
) -> Result<CandidateResult, TransportError> {
    run_task_with(task, transport, options, &ReqwestSender)
}

/// Run a slice of tasks, preserving input order. Each task is independent,
/// so transport failures are reported per slot instead of aborting the run.
pub fn run_batch(
    tasks: &[DesignTask],
    transport: &TransportConfig,
    options: &RunOptions,
) -> Vec<Result<CandidateResult, TransportError>> {
    crate::par::map_ordered(tasks, |task| run_task(task, transport, options))
}

fn skeleton(task: &DesignTask) -> CandidateResult {
    CandidateResult {
        task: task.clone(),
        raw: RawResponse::default(),
        format: FormatVerdict { adherent: false, reason: None },
        pathway: None,
        pathway_verdict: None,
        anchored: None,
        start_profile: None,
        final_profile: None,
        similarity: None,
        external: BTreeMap::new(),
        external_errors: BTreeMap::new(),
        status: CandidateStatus::RejectedInput,
        rejection_reason: None,
    }
}

fn rejected_input(task: &DesignTask, reason: String) -> CandidateResult {
    CandidateResult { rejection_reason: Some(reason), ..skeleton(task) }
}

pub fn run_task_with(
    task: &DesignTask,
    transport: &TransportConfig,
    options: &RunOptions,
    sender: &dyn HttpSender,
) -> Result<CandidateResult, TransportError> {
    // Stage 1: input gate. Nothing below this point runs — and in
    // particular no request is sent — unless the starting molecule survives
    // chemical validation and property typing.
    let start_verdict = validate_chemistry(&task.start_smiles);
    let start_mol = match start_verdict.molecule {
        Some(m) => m,
        None => {
            let reason = start_verdict
                .message
                .unwrap_or_else(|| "starting molecule failed validation".to_string());
            return Ok(rejected_input(task, reason));
        }
    };
    let start_profile = match property_profile(&start_mol) {
        Ok(p) => p,
        Err(e) => return Ok(rejected_input(task, e.to_string())),
    };
    if task.objective.trim().is_empty() {
        return Ok(rejected_input(task, "objective is empty".to_string()));
    }

    // Stage 2: prompt rendering.
    let template = match task.prompt_version {
        PromptVersion::Custom => match &options.custom_template {
            Some(t) => t.clone(),
            None => {
                return Err(TransportError(LlmError::InvalidConfig(
                    "custom prompt version set but no custom template provided".to_string(),
                )))
            }
        },
        version => builtin_template(version),
    };
    let prompt = match render_prompt(&template, &task.start_smiles, &task.objective) {
        Ok(p) => p,
        Err(e) => return Ok(rejected_input(task, e.to_string())),
    };

    // Stage 3: completion.
    let request =
        ChatRequest::new(prompt, options.model.clone(), options.temperature, options.max_tokens);
    let request_id = request.request_id();
    let response = complete_with(&request, transport, sender).map_err(TransportError::from)?;
    let mut raw = RawResponse::from_text(&response.text);
    // Latency is deliberately left out of the metadata: replayed runs must
    // serialize byte-identically across machines.
    raw.transport_meta.insert("attempt".to_string(), response.attempt.to_string());
    raw.transport_meta.insert("request_id".to_string(), request_id);

    let mut result = CandidateResult {
        raw: raw.clone(),
        start_profile: Some(start_profile),
        ..skeleton(task)
    };

    // Stage 4: format adherence.
    let protocol = template.protocol.measurement_protocol();
    result.format = check_format(&raw, protocol);
    if !result.format.adherent {
        result.status = CandidateStatus::RejectedFormat;
        result.rejection_reason =
            Some(result.format.reason.clone().unwrap_or_else(|| "format violation".to_string()));
        return Ok(result);
    }
    let pathway = match parse_response(&raw, protocol) {
        Ok(p) => p,
        // check_format runs the same parser, so adherent responses parse.
        Err(failure) => {
            result.status = CandidateStatus::RejectedFormat;
            result.rejection_reason = Some(failure.to_string());
            return Ok(result);
        }
    };
    result.pathway = Some(pathway.clone());

    // Stage 5: pathway chemistry and anchoring.
    let verdict = validate_pathway(&pathway);
    result.pathway_verdict = Some(verdict.clone());
    if !verdict.valid {
        let chemistry = verdict.messages.iter().any(|m| m.contains("Invalid molecule"));
        result.status = if chemistry {
            CandidateStatus::RejectedChemistry
        } else {
            CandidateStatus::RejectedPathway
        };
        result.rejection_reason = Some(verdict.messages.join("; "));
        return Ok(result);
    }
    let anchored = check_anchoring(&pathway, &start_mol);
    result.anchored = Some(anchored);
    if !anchored {
        result.status = CandidateStatus::RejectedPathway;
        result.rejection_reason =
            Some("pathway does not start from the given molecule".to_string());
        return Ok(result);
    }

    // Stage 6: properties of the final product and similarity to the start.
    let final_smiles = pathway.product().expect("validated pathway ends on a molecule");
    let final_mol = validate_chemistry(final_smiles)
        .molecule
        .expect("pathway validation already accepted this molecule");
    match property_profile(&final_mol) {
        Ok(p) => result.final_profile = Some(p),
        Err(e) => {
            result.status = CandidateStatus::RejectedChemistry;
            result.rejection_reason = Some(e.to_string());
            return Ok(result);
        }
    }
    let fp_start = morgan_fingerprint(&start_mol, FINGERPRINT_RADIUS, FINGERPRINT_BITS);
    let fp_final = morgan_fingerprint(&final_mol, FINGERPRINT_RADIUS, FINGERPRINT_BITS);
    result.similarity =
        Some(tanimoto(&fp_start, &fp_final).expect("fingerprints share a width"));

    // Stage 7: external predictors. Failures are recorded, never fatal.
    let (values, errors) = run_external_predictors(final_smiles, &options.predictors);
    result.external = values;
    result.external_errors = errors;

    result.status = CandidateStatus::Accepted;
    Ok(result)
}

#[derive(Debug, Deserialize)]
struct PredictorLine {
    smiles: String,
    value: f64,
}

/// Feed one SMILES to each predictor and collect `{"smiles", "value"}`
/// replies. Each predictor is isolated: a hang, crash, or garbled reply
/// turns into an entry in the error map and the rest still run.
pub fn run_external_predictors(
    smiles: &str,
    predictors: &[PredictorSpec],
) -> (BTreeMap<String, f64>, BTreeMap<String, String>) {
    let mut values = BTreeMap::new();
    let mut errors = BTreeMap::new();
    for spec in predictors {
        match run_one_predictor(smiles, spec) {
            Ok(v) => {
                values.insert(spec.name.clone(), v);
            }
            Err(e) => {
                errors.insert(spec.name.clone(), e.to_string());
            }
        }
    }
    (values, errors)
}

fn run_one_predictor(smiles: &str, spec: &PredictorSpec) -> Result<f64, PredictorError> {
    let mut child = Command::new(&spec.command)
        .args(&spec.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| PredictorError::PredictorProtocolError(format!("spawn failed: {e}")))?;

    if let Some(mut stdin) = child.stdin.take() {
        // A dead child is reported at wait time, not as a write error.
        let _ = writeln!(stdin, "{smiles}");
    }

    let deadline = Instant::now() + spec.timeout;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) => {
                if Instant::now() >= deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(PredictorError::PredictorTimeout(spec.timeout.as_secs_f64()));
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(e) => {
                return Err(PredictorError::PredictorProtocolError(format!("wait failed: {e}")))
            }
        }
    };

    let mut output = String::new();
    if let Some(mut stdout) = child.stdout.take() {
        let _ = stdout.read_to_string(&mut output);
    }
    if !status.success() {
        return Err(PredictorError::PredictorProtocolError(format!(
            "exited with status {status}"
        )));
    }
    let line = output
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| PredictorError::PredictorProtocolError("empty output".to_string()))?;
    let parsed: PredictorLine = serde_json::from_str(line)
        .map_err(|e| PredictorError::PredictorProtocolError(format!("bad reply line: {e}")))?;
    if parsed.smiles != smiles {
        return Err(PredictorError::PredictorProtocolError(format!(
            "reply echoes '{}' instead of the query",
            parsed.smiles
        )));
    }
    if !parsed.value.is_finite() {
        return Err(PredictorError::PredictorProtocolError("non-finite value".to_string()));
    }
    Ok(parsed.value)
}

/// Convenience used by reports: similarity between two standalone molecules.
pub fn molecule_similarity(a: &Molecule, b: &Molecule) -> f64 {
    let fa = morgan_fingerprint(a, FINGERPRINT_RADIUS, FINGERPRINT_BITS);
    let fb = morgan_fingerprint(b, FINGERPRINT_RADIUS, FINGERPRINT_BITS);
    tanimoto(&fa, &fb).expect("fingerprints share a width")
}
