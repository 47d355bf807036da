//! Prompt templates and rendering.
//!
//! Five built-in templates trace the escalation from a bare instruction to
//! a guardrailed bullet protocol and a JSON contract. Placeholders are the
//! literal tokens `[SMILES]` and `[OBJECTIVE]`; rendering replaces the
//! first occurrence of each, so format sections that mention `[SMILES]`
//! as answer shape survive untouched.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::response::Protocol;
use crate::smiles::validate_chemistry;

pub const SMILES_PLACEHOLDER: &str = "[SMILES]";
pub const OBJECTIVE_PLACEHOLDER: &str = "[OBJECTIVE]";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PromptVersion {
    V1,
    V2,
    V3,
    V4,
    V5,
    Custom,
}

/// How a template asks for its answer, and therefore how the response is
/// judged. Freeform responses are still measured against the bullet
/// protocol — that is exactly why unstructured prompts score poorly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PromptProtocol {
    Freeform,
    Bullets,
    Json,
}

impl PromptProtocol {
    pub fn measurement_protocol(self) -> Protocol {
        match self {
            PromptProtocol::Freeform | PromptProtocol::Bullets => Protocol::Bullets,
            PromptProtocol::Json => Protocol::Json,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub version: PromptVersion,
    pub body: String,
    pub protocol: PromptProtocol,
}

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("template file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("template is missing the {0} placeholder")]
    MissingPlaceholder(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl PromptTemplate {
    /// Load a custom template. The placeholder contract is enforced at
    /// load so rendering can never silently drop an input.
    pub fn from_file(path: impl AsRef<Path>, protocol: PromptProtocol) -> Result<Self, TemplateError> {
        let path = path.as_ref();
        let body = std::fs::read_to_string(path).map_err(|source| TemplateError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_body(body, protocol)
    }

    pub fn from_body(body: impl Into<String>, protocol: PromptProtocol) -> Result<Self, TemplateError> {
        let body = body.into();
        for placeholder in [SMILES_PLACEHOLDER, OBJECTIVE_PLACEHOLDER] {
            if !body.contains(placeholder) {
                return Err(TemplateError::MissingPlaceholder(placeholder));
            }
        }
        Ok(PromptTemplate { version: PromptVersion::Custom, body, protocol })
    }
}

/// The five built-in templates, keyed by version.
pub fn builtin_templates() -> BTreeMap<PromptVersion, PromptTemplate> {
    let make = |version, text: &str, protocol| {
        (version, PromptTemplate { version, body: text.trim_end().to_string(), protocol })
    };
    BTreeMap::from([
        make(PromptVersion::V1, include_str!("../data/prompts/v1.txt"), PromptProtocol::Freeform),
        make(PromptVersion::V2, include_str!("../data/prompts/v2.txt"), PromptProtocol::Bullets),
        make(PromptVersion::V3, include_str!("../data/prompts/v3.txt"), PromptProtocol::Bullets),
        make(PromptVersion::V4, include_str!("../data/prompts/v4.txt"), PromptProtocol::Bullets),
        make(PromptVersion::V5, include_str!("../data/prompts/v5.txt"), PromptProtocol::Json),
    ])
}

pub fn builtin_template(version: PromptVersion) -> PromptTemplate {
    builtin_templates().remove(&version).expect("builtin version")
}

/// Substitute task inputs into a template. The starting molecule must
/// already be chemically valid — rejecting here keeps garbage from ever
/// reaching a model — and the objective must be non-empty.
pub fn render_prompt(
    template: &PromptTemplate,
    smiles: &str,
    objective: &str,
) -> Result<String, RenderError> {
    let verdict = validate_chemistry(smiles);
    if !verdict.ok {
        return Err(RenderError::InvalidInput(
            verdict.message.unwrap_or_else(|| "invalid starting molecule".to_string()),
        ));
    }
    if objective.trim().is_empty() {
        return Err(RenderError::InvalidInput("objective is empty".to_string()));
    }
    Ok(template
        .body
        .replacen(SMILES_PLACEHOLDER, smiles, 1)
        .replacen(OBJECTIVE_PLACEHOLDER, objective, 1))
}
