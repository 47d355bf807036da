//! Closed-loop validation for LLM-proposed molecular designs.
//!
//! The library is organized around a gated pipeline: render a prompt for a
//! design task, obtain a model response over a deterministic transport,
//! parse the response into a synthesis pathway, and reject it at the first
//! layer that fails — syntax, chemistry, or pathway structure. Everything
//! downstream (property profiles, evaluation metrics, the GA baseline, HTML
//! reports) builds on the same SMILES core.

pub mod elements;
pub mod evaluation;
pub mod ga;
pub mod llm;
pub mod par;
pub mod pathway;
pub mod pipeline;
pub mod prompts;
pub mod properties;
pub mod report;
pub mod response;
pub mod smiles;
