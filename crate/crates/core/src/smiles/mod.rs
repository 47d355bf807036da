//! SMILES parsing and two-layer validation.
//!
//! Layer 1 (`validate_syntax`) is a character-level check: alphabet,
//! balanced parentheses and brackets, matched ring-closure digits. Layer 2
//! (`validate_chemistry`) parses the string into a molecular graph and
//! sanitizes it: element support, aromaticity verification (kekulization +
//! Hückel), and valence limits. Aromaticity is verified as written, never
//! perceived on behalf of the input; perception exists separately
//! ([`Molecule::aromatized`]) as the normal form behind canonicalization and
//! descriptor calculations.

mod aromatize;
mod canon;
mod lex;
mod parse;
mod rings;
mod sanitize;
mod syntax;

pub use canon::{canonical_smiles, write_smiles_with_order};
pub use lex::{tokenize, LexError, SmilesToken, TokenKind};
pub use parse::{parse_to_mol, ParseFailure};
pub use sanitize::sanitize;
pub use syntax::validate_syntax;

use serde::Serialize;

/// Bond multiplicity as written in SMILES.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Integer bond order; `None` for aromatic bonds, which only get a
    /// definite order through kekulization.
    pub fn fixed_value(self) -> Option<u8> {
        match self {
            BondOrder::Single => Some(1),
            BondOrder::Double => Some(2),
            BondOrder::Triple => Some(3),
            BondOrder::Aromatic => None,
        }
    }
}

/// One atom of a molecular graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Atom {
    /// Atomic number; 0 stands for the `*` wildcard.
    pub element: u8,
    pub isotope: Option<u16>,
    pub charge: i8,
    /// Hydrogen count spelled inside a bracket atom. `None` for
    /// organic-subset atoms, whose hydrogens are implied by valence.
    pub explicit_h: Option<u8>,
    pub aromatic: bool,
    /// Position of this atom in [`Molecule::atoms`].
    pub index: usize,
}

/// An edge between two atoms, by atom index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
    /// True when the bond was written as a ring-closure digit pair.
    pub ring_closure: bool,
}

/// A molecular graph. `rings`, `implicit_h`, and the internal kekulé
/// assignment are empty until [`sanitize`] fills them.
#[derive(Debug, Clone, Serialize)]
pub struct Molecule {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
    /// Smallest set of smallest rings, each as an ordered atom cycle.
    pub rings: Vec<Vec<usize>>,
    /// Implicit hydrogen count per atom, parallel to `atoms`.
    pub implicit_h: Vec<u8>,
    /// Per-bond orders with aromatic bonds resolved to single/double by the
    /// kekulization found during sanitization. Parallel to `bonds`.
    #[serde(skip)]
    pub(crate) kekule: Vec<BondOrder>,
}

impl Molecule {
    /// Neighbor list: for each atom, `(neighbor index, bond index)` pairs.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.atoms.len()];
        for (bi, bond) in self.bonds.iter().enumerate() {
            adj[bond.a].push((bond.b, bi));
            adj[bond.b].push((bond.a, bi));
        }
        adj
    }

    /// Number of graph neighbors (explicit atoms only).
    pub fn degree(&self, atom: usize) -> usize {
        self.bonds
            .iter()
            .filter(|b| b.a == atom || b.b == atom)
            .count()
    }

    /// Total hydrogen count: implicit plus bracket-spelled.
    pub fn total_h(&self, atom: usize) -> u8 {
        let implicit = self.implicit_h.get(atom).copied().unwrap_or(0);
        implicit + self.atoms[atom].explicit_h.unwrap_or(0)
    }

    /// True if the atom is a member of any SSSR ring.
    pub fn in_ring(&self, atom: usize) -> bool {
        self.rings.iter().any(|r| r.contains(&atom))
    }

    /// Index of the bond joining `a` and `b`, if present.
    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.bonds
            .iter()
            .position(|bond| (bond.a == a && bond.b == b) || (bond.a == b && bond.b == a))
    }

    /// Normal form with kekulé-written aromatic rings recognized and marked
    /// aromatic. Canonicalization and descriptors work on this form so that
    /// equivalent writings of one graph agree. Requires a sanitized molecule.
    pub fn aromatized(&self) -> Molecule {
        aromatize::aromatized(self)
    }
}

/// Outcome of the character-level check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SyntaxVerdict {
    pub ok: bool,
    pub message: Option<&'static str>,
    /// Character position (0-based, in the whitespace-stripped string) of
    /// the offending character, when one can be singled out.
    pub position: Option<usize>,
}

impl SyntaxVerdict {
    pub(crate) fn pass() -> Self {
        SyntaxVerdict { ok: true, message: None, position: None }
    }

    pub(crate) fn fail(message: &'static str, position: Option<usize>) -> Self {
        SyntaxVerdict { ok: false, message: Some(message), position }
    }
}

/// Outcome of full chemical validation. `molecule` is the sanitized graph
/// when `ok`, with rings and hydrogen counts filled in.
#[derive(Debug, Clone, Serialize)]
pub struct ChemVerdict {
    pub ok: bool,
    pub message: Option<String>,
    pub molecule: Option<Molecule>,
}

/// Full validation: syntax, parse, sanitize. Total over arbitrary input —
/// any internal fault is converted into a failing verdict rather than a
/// panic.
pub fn validate_chemistry(s: &str) -> ChemVerdict {
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        match parse_to_mol(s) {
            Err(e) => ChemVerdict { ok: false, message: Some(e.to_string()), molecule: None },
            Ok(mol) => sanitize(mol),
        }
    }));
    outcome.unwrap_or_else(|cause| {
        let reason = if let Some(text) = cause.downcast_ref::<&str>() {
            (*text).to_string()
        } else if let Some(text) = cause.downcast_ref::<String>() {
            text.clone()
        } else {
            "internal fault".to_string()
        };
        ChemVerdict { ok: false, message: Some(format!("Unexpected error: {reason}")), molecule: None }
    })
}
