//! Aromatic perception: the normal form behind canonicalization and
//! descriptors.
//!
//! Sanitization verifies aromaticity as written; this pass re-derives it
//! from the kekulé structure so that every writing of one graph reaches the
//! same form. All bonds are first demoted to their kekulé orders, then each
//! SSSR ring whose atoms can all participate and whose π count satisfies
//! 4n+2 is marked aromatic. Rings spelled aromatic in the input re-qualify
//! here by construction; an aromatic bond outside any qualifying ring
//! (e.g. a biphenyl junction written lowercase) is demoted to its kekulé
//! order.

use super::sanitize::{pi_role, PiRole};
use super::{BondOrder, Molecule};

/// The molecule with kekulé bond orders made explicit and every aromatic
/// flag cleared: the spelling that never depends on aromatic perception.
/// Unsanitized molecules are returned unchanged.
pub(crate) fn kekulized(m: &Molecule) -> Molecule {
    let mut out = m.clone();
    if m.kekule.len() != m.bonds.len() {
        return out;
    }
    for (bi, bond) in out.bonds.iter_mut().enumerate() {
        bond.order = m.kekule[bi];
    }
    for atom in &mut out.atoms {
        atom.aromatic = false;
    }
    out
}

/// Return a copy of a sanitized molecule with aromaticity re-perceived
/// from the kekulé structure. Idempotent.
pub(crate) fn aromatized(m: &Molecule) -> Molecule {
    let mut out = kekulized(m);
    if m.kekule.len() != m.bonds.len() {
        // Not sanitized; nothing to normalize against.
        return out;
    }
    if m.rings.is_empty() {
        return out;
    }

    let in_any_ring: Vec<bool> = (0..m.atoms.len()).map(|i| m.in_ring(i)).collect();
    let contribution: Vec<Option<usize>> = (0..m.atoms.len())
        .map(|i| atom_contribution(m, i, &in_any_ring))
        .collect();

    for ring in &m.rings {
        let mut pi = 0usize;
        let mut eligible = true;
        for &a in ring {
            match contribution[a] {
                Some(e) => pi += e,
                None => {
                    eligible = false;
                    break;
                }
            }
        }
        if !eligible || pi < 2 || pi % 4 != 2 {
            continue;
        }
        for &a in ring {
            out.atoms[a].aromatic = true;
        }
        for i in 0..ring.len() {
            let a = ring[i];
            let b = ring[(i + 1) % ring.len()];
            let bi = m.bond_between(a, b).expect("ring bonds exist");
            out.bonds[bi].order = BondOrder::Aromatic;
        }
    }

    out
}

/// π electrons a ring atom contributes, judged from the kekulé bond
/// orders. `None` when the atom cannot take part in an aromatic ring.
fn atom_contribution(m: &Molecule, atom: usize, in_any_ring: &[bool]) -> Option<usize> {
    if !in_any_ring[atom] {
        return None;
    }
    let a = &m.atoms[atom];

    let mut ring_double = false;
    let mut exo_double = false;
    let mut multiple_bonds = 0usize;
    for (bi, bond) in m.bonds.iter().enumerate() {
        if bond.a != atom && bond.b != atom {
            continue;
        }
        let other = if bond.a == atom { bond.b } else { bond.a };
        match m.kekule[bi] {
            BondOrder::Double => {
                multiple_bonds += 1;
                if in_any_ring[other] {
                    ring_double = true;
                } else {
                    exo_double = true;
                }
            }
            BondOrder::Triple => return None,
            _ => {}
        }
    }
    if multiple_bonds > 1 {
        return None;
    }

    // The aromatic spelling keeps exocyclic doubles explicit but erases
    // ring doubles, so the written atom must classify the way its kekulé
    // structure demands: a ring double is only expressible if the reader
    // will hand one back during kekulization, and an atom without one must
    // not be told to find one. Anything else would canonicalize into a
    // string the validator rejects.
    let connections = m.degree(atom) + m.total_h(atom) as usize;
    let role = pi_role(a.element, a.charge, connections, exo_double).ok()?;
    match (ring_double, role) {
        (true, PiRole::NeedsDouble) => Some(1),
        (true, _) => None,
        (false, PiRole::NeedsDouble) => None,
        (false, role) => Some(role.electrons()),
    }
}
