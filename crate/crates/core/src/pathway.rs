//! Synthesis-pathway validation: alternating molecule/reaction sequences
//! proposed by a language model, checked for chemical validity, reaction
//! description substance, and anchoring to the starting material.

use serde::{Deserialize, Serialize};

use crate::smiles::{canonical_smiles, validate_chemistry, Molecule};

/// One element of a synthesis pathway: either a molecule (SMILES) or a
/// free-text reaction description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathwayStep {
    Molecule { smiles: String },
    Reaction { description: String },
}

impl PathwayStep {
    pub fn molecule(smiles: impl Into<String>) -> Self {
        PathwayStep::Molecule { smiles: smiles.into() }
    }

    pub fn reaction(description: impl Into<String>) -> Self {
        PathwayStep::Reaction { description: description.into() }
    }

    pub fn is_molecule(&self) -> bool {
        matches!(self, PathwayStep::Molecule { .. })
    }
}

/// An ordered pathway. Well-formed pathways are non-empty, start and end
/// with a molecule, and strictly alternate; malformed shapes are still
/// representable so that validation can report them instead of panicking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisPathway {
    pub steps: Vec<PathwayStep>,
}

impl SynthesisPathway {
    pub fn new(steps: Vec<PathwayStep>) -> Self {
        SynthesisPathway { steps }
    }

    /// Molecules at even positions, in order.
    pub fn molecules(&self) -> impl Iterator<Item = &str> {
        self.steps.iter().filter_map(|s| match s {
            PathwayStep::Molecule { smiles } => Some(smiles.as_str()),
            PathwayStep::Reaction { .. } => None,
        })
    }

    /// The final molecule of the pathway, if the shape provides one.
    pub fn product(&self) -> Option<&str> {
        match self.steps.last() {
            Some(PathwayStep::Molecule { smiles }) => Some(smiles.as_str()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathwayVerdict {
    pub valid: bool,
    pub messages: Vec<String>,
}

const MIN_REACTION_DESCRIPTION: usize = 5;

/// Validate every step of a pathway, accumulating all failures. Step
/// numbering pairs each molecule with the reaction that produced it:
/// `k = floor(i / 2)` over item positions.
pub fn validate_pathway(pathway: &SynthesisPathway) -> PathwayVerdict {
    let mut messages = Vec::new();

    if pathway.steps.is_empty() {
        messages.push("Step 0: pathway shape violation".to_string());
        return PathwayVerdict { valid: false, messages };
    }

    for (i, step) in pathway.steps.iter().enumerate() {
        let k = i / 2;
        let expect_molecule = i % 2 == 0;
        if step.is_molecule() != expect_molecule {
            messages.push(format!("Step {k}: pathway shape violation"));
            continue;
        }
        match step {
            PathwayStep::Molecule { smiles } => {
                if !validate_chemistry(smiles).ok {
                    messages.push(format!("Step {k}: Invalid molecule - {smiles}"));
                }
            }
            PathwayStep::Reaction { description } => {
                if description.trim().len() < MIN_REACTION_DESCRIPTION {
                    messages.push(format!("Step {k}: Insufficient reaction description"));
                }
            }
        }
    }

    if pathway.steps.len() % 2 == 0 {
        // Even length means the sequence ends on a reaction.
        let k = (pathway.steps.len() - 1) / 2;
        messages.push(format!("Step {k}: pathway shape violation"));
    }

    PathwayVerdict { valid: messages.is_empty(), messages }
}

/// True iff the pathway's first molecule is the same structure as `start`,
/// compared canonically so the writing does not matter.
pub fn check_anchoring(pathway: &SynthesisPathway, start: &Molecule) -> bool {
    let Some(PathwayStep::Molecule { smiles }) = pathway.steps.first() else {
        return false;
    };
    let Some(first) = validate_chemistry(smiles).molecule else {
        return false;
    };
    canonical_smiles(&first) == canonical_smiles(start)
}
