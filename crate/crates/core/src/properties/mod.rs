//! Molecular descriptors: weight, hydrogen bonding counts, rule-of-five
//! screening, and the combined property profile used by the design pipeline.

pub mod crippen;
pub mod fingerprint;
pub mod sa;

pub use crippen::crippen_logp;
pub use fingerprint::{morgan_fingerprint, tanimoto, Fingerprint, FingerprintError};
pub use sa::sa_score;

use serde::{Deserialize, Serialize};

use crate::smiles::Molecule;

/// Descriptor computation failures.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PropertyError {
    /// The atom typer has no pattern for this atom in its current context.
    #[error("no logP contribution for atom {index} ({symbol})")]
    UnassignedAtomType { index: usize, symbol: String },
}

/// Everything the pipeline reports about a single structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyProfile {
    pub mw: f64,
    pub logp: f64,
    pub hbd: u32,
    pub hba: u32,
    pub heavy_atoms: u32,
    pub sa_score: f64,
    pub lipinski_violations: u32,
}

/// Sum of average atomic weights plus implicit and explicit hydrogens.
/// An isotope label substitutes the mass number for the average weight.
pub fn molecular_weight(m: &Molecule) -> f64 {
    let h_weight = crate::elements::atomic_weight(1).unwrap_or(1.008);
    let mut total = 0.0;
    for atom in &m.atoms {
        total += match atom.isotope {
            Some(mass) => mass as f64,
            None => crate::elements::atomic_weight(atom.element).unwrap_or(0.0),
        };
        total += m.total_h(atom.index) as f64 * h_weight;
    }
    total
}

/// Hydrogen bond donors and acceptors by the rule-of-five convention:
/// donors are hydrogens on nitrogen or oxygen, acceptors are the nitrogen
/// and oxygen atoms themselves.
pub fn hbd_hba(m: &Molecule) -> (u32, u32) {
    let mut donors = 0;
    let mut acceptors = 0;
    for atom in &m.atoms {
        if atom.element == 7 || atom.element == 8 {
            donors += m.total_h(atom.index) as u32;
            acceptors += 1;
        }
    }
    (donors, acceptors)
}

/// Number of rule-of-five thresholds exceeded.
pub fn lipinski_violations(mw: f64, logp: f64, hbd: u32, hba: u32) -> u32 {
    let mut violations = 0;
    if mw > 500.0 {
        violations += 1;
    }
    if logp > 5.0 {
        violations += 1;
    }
    if hbd > 5 {
        violations += 1;
    }
    if hba > 10 {
        violations += 1;
    }
    violations
}

/// Compute the full profile for one molecule.
pub fn property_profile(m: &Molecule) -> Result<PropertyProfile, PropertyError> {
    let mw = molecular_weight(m);
    let logp = crippen_logp(m)?;
    let (hbd, hba) = hbd_hba(m);
    let heavy_atoms = m.atoms.iter().filter(|a| a.element != 1).count() as u32;
    let sa = sa_score(m);
    Ok(PropertyProfile {
        mw,
        logp,
        hbd,
        hba,
        heavy_atoms,
        sa_score: sa,
        lipinski_violations: lipinski_violations(mw, logp, hbd, hba),
    })
}
