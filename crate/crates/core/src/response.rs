//! Response parsing: extracting structured pathways from raw model text.
//!
//! Two protocols are supported. The bullet protocol accepts `*`-marked
//! lines alternating SMILES and reaction descriptions; the JSON protocol
//! accepts one strict schema. Classification is purely syntactic — a
//! well-formed but chemically impossible SMILES is format-adherent and is
//! charged to chemical validity downstream, which is what keeps the two
//! failure rates independent.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pathway::{PathwayStep, SynthesisPathway};
use crate::smiles::{tokenize, validate_syntax};

/// Raw model output plus whatever transport metadata arrived with it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawResponse {
    pub text: String,
    #[serde(default)]
    pub transport_meta: BTreeMap<String, String>,
}

impl RawResponse {
    pub fn from_text(text: impl Into<String>) -> Self {
        RawResponse { text: text.into(), transport_meta: BTreeMap::new() }
    }
}

/// Bullet lines extracted from a response, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedItems {
    pub items: Vec<String>,
    /// True when further bullets existed after a blank-line gap; only the
    /// first maximal block is kept.
    pub trailing_ignored: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("item {position}: {reason}")]
pub struct FormatFailure {
    pub position: usize,
    pub reason: String,
}

impl FormatFailure {
    fn new(position: usize, reason: impl Into<String>) -> Self {
        FormatFailure { position, reason: reason.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Protocol {
    Bullets,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatVerdict {
    pub adherent: bool,
    pub reason: Option<String>,
}

/// Collect the first maximal block of `*` bullet lines. Non-bullet lines
/// are dropped; a blank line after the first bullet ends the block, and
/// any bullets beyond it are ignored and flagged.
pub fn parse_bullets(response: &RawResponse) -> ParsedItems {
    let mut items = Vec::new();
    let mut block_done = false;
    let mut trailing_ignored = false;
    for line in response.text.lines() {
        let line = line.trim();
        let is_bullet = line.starts_with('*');
        if block_done {
            if is_bullet {
                trailing_ignored = true;
                break;
            }
            continue;
        }
        if is_bullet {
            items.push(line[1..].trim().to_string());
        } else if line.is_empty() && !items.is_empty() {
            block_done = true;
        }
    }
    ParsedItems { items, trailing_ignored }
}

/// Strip decorative square brackets a template echo may have left around a
/// SMILES item. Real bracket atoms survive: stripping happens only when
/// the interior contains whitespace or when the wrapped form fails to
/// tokenize while the interior succeeds.
pub(crate) fn strip_decoration(item: &str) -> &str {
    if item.len() < 2 || !item.starts_with('[') || !item.ends_with(']') {
        return item;
    }
    let interior = &item[1..item.len() - 1];
    if interior.chars().any(char::is_whitespace) {
        return interior;
    }
    if tokenize(item).is_err() && tokenize(interior).is_ok() {
        return interior;
    }
    item
}

/// Turn bullet items into a pathway: even positions must be syntactically
/// valid SMILES, odd positions non-empty reaction text, and the sequence
/// must end on a molecule.
pub fn classify_items(parsed: &ParsedItems) -> Result<SynthesisPathway, FormatFailure> {
    let items = &parsed.items;
    if items.is_empty() {
        return Err(FormatFailure::new(0, "empty response"));
    }
    let mut steps = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        if i % 2 == 0 {
            let smiles = strip_decoration(item);
            let verdict = validate_syntax(smiles);
            if !verdict.ok {
                return Err(FormatFailure::new(
                    i,
                    format!(
                        "expected a SMILES string: {}",
                        verdict.message.unwrap_or("invalid syntax")
                    ),
                ));
            }
            steps.push(PathwayStep::molecule(smiles));
        } else {
            if item.is_empty() {
                return Err(FormatFailure::new(i, "empty reaction description"));
            }
            steps.push(PathwayStep::reaction(item.clone()));
        }
    }
    if items.len() % 2 == 0 {
        return Err(FormatFailure::new(
            items.len() - 1,
            "response ends on a reaction description",
        ));
    }
    Ok(SynthesisPathway::new(steps))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonPayload {
    starting_material: String,
    #[allow(dead_code)]
    objective_achieved: String,
    pathway: Vec<JsonStep>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonStep {
    step_type: String,
    details: Option<String>,
    smiles: Option<String>,
}

/// Parse the strict JSON protocol. The starting material becomes the first
/// molecule step, so a well-formed payload alternates from there.
pub fn parse_json_response(response: &RawResponse) -> Result<SynthesisPathway, FormatFailure> {
    let payload: JsonPayload = serde_json::from_str(response.text.trim())
        .map_err(|e| FormatFailure::new(0, format!("invalid JSON: {e}")))?;

    let mut steps = vec![PathwayStep::molecule(payload.starting_material)];
    for (i, step) in payload.pathway.iter().enumerate() {
        match step.step_type.as_str() {
            "reaction" => {
                if step.smiles.is_some() {
                    return Err(FormatFailure::new(i, "reaction step carries a smiles key"));
                }
                let Some(details) = &step.details else {
                    return Err(FormatFailure::new(i, "reaction step missing details"));
                };
                steps.push(PathwayStep::reaction(details.clone()));
            }
            "product" => {
                if step.details.is_some() {
                    return Err(FormatFailure::new(i, "product step carries a details key"));
                }
                let Some(smiles) = &step.smiles else {
                    return Err(FormatFailure::new(i, "product step missing smiles"));
                };
                steps.push(PathwayStep::molecule(smiles.clone()));
            }
            other => {
                return Err(FormatFailure::new(i, format!("unknown step_type \"{other}\"")));
            }
        }
    }

    for (i, step) in steps.iter().enumerate() {
        if step.is_molecule() != (i % 2 == 0) {
            return Err(FormatFailure::new(
                i.saturating_sub(1),
                "pathway does not alternate reaction and product steps",
            ));
        }
    }
    if steps.len() % 2 == 0 {
        return Err(FormatFailure::new(
            payload.pathway.len().saturating_sub(1),
            "pathway ends on a reaction step",
        ));
    }

    Ok(SynthesisPathway::new(steps))
}

/// Decide format adherence for a response under a protocol. Adherent
/// verdicts may still carry a note (e.g. ignored trailing bullets).
pub fn check_format(response: &RawResponse, protocol: Protocol) -> FormatVerdict {
    match protocol {
        Protocol::Bullets => {
            let parsed = parse_bullets(response);
            if parsed.items.is_empty() {
                let reason = if response.text.trim().is_empty() {
                    "empty response"
                } else {
                    "no bullets"
                };
                return FormatVerdict { adherent: false, reason: Some(reason.to_string()) };
            }
            match classify_items(&parsed) {
                Ok(_) => FormatVerdict {
                    adherent: true,
                    reason: parsed
                        .trailing_ignored
                        .then(|| "trailing bullets after a blank line were ignored".to_string()),
                },
                Err(e) => FormatVerdict { adherent: false, reason: Some(e.to_string()) },
            }
        }
        Protocol::Json => match parse_json_response(response) {
            Ok(_) => FormatVerdict { adherent: true, reason: None },
            Err(e) => FormatVerdict { adherent: false, reason: Some(e.to_string()) },
        },
    }
}

/// Parse a response end-to-end into a pathway under a protocol.
pub fn parse_response(
    response: &RawResponse,
    protocol: Protocol,
) -> Result<SynthesisPathway, FormatFailure> {
    match protocol {
        Protocol::Bullets => classify_items(&parse_bullets(response)),
        Protocol::Json => parse_json_response(response),
    }
}
