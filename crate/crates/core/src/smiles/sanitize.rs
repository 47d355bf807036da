//! Chemical sanitization: element support, aromaticity verification
//! (kekulization + per-ring Hückel counting), valence limits, and implicit
//! hydrogen assignment.
//!
//! Aromaticity is verified exactly as written: lowercase atoms must sit in
//! rings whose aromatic subgraph admits a kekulé structure and whose π
//! counts satisfy 4n+2. Kekulé-written rings are not re-perceived here.

use super::rings::sssr;
use super::{BondOrder, ChemVerdict, Molecule};
use crate::elements;

/// Allowed total valences for an element/charge pair, smallest first.
/// Charge adjustments cover the common organic ions; unlisted combinations
/// fall back to the neutral table.
pub(crate) fn allowed_valences(element: u8, charge: i8) -> &'static [u8] {
    match (element, charge) {
        (1, _) => &[1],
        (5, _) => &[3],
        (6, c) if c < 0 => &[3],
        (6, _) => &[4],
        (7, c) if c > 0 => &[4],
        (7, c) if c < 0 => &[2],
        (7, _) => &[3],
        (8, c) if c > 0 => &[3],
        (8, c) if c < 0 => &[1],
        (8, _) => &[2],
        (9 | 17 | 35 | 53, _) => &[1],
        (15, _) => &[3, 5],
        (16, c) if c > 0 => &[3],
        (16, _) => &[2, 4, 6],
        _ => &[],
    }
}

/// How an aromatic atom participates in the π system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PiRole {
    /// Must take exactly one double bond in any kekulé structure; donates 1 π electron.
    NeedsDouble,
    /// Lone-pair donor; takes no double bond and donates 2 π electrons.
    Donor,
    /// Participates with an empty orbital or an exocyclic double bond; donates 0.
    None,
}

impl PiRole {
    pub(crate) fn electrons(self) -> usize {
        match self {
            PiRole::NeedsDouble => 1,
            PiRole::Donor => 2,
            PiRole::None => 0,
        }
    }
}

/// Classify an aromatic atom's π role from its element, charge, connection
/// count (graph degree + spelled hydrogens), and whether it already holds
/// an exocyclic double or triple bond.
pub(crate) fn pi_role(
    element: u8,
    charge: i8,
    connections: usize,
    has_fixed_multiple_bond: bool,
) -> Result<PiRole, ()> {
    match element {
        6 => {
            if charge < 0 {
                Ok(PiRole::Donor)
            } else if charge > 0 {
                Ok(PiRole::None)
            } else if has_fixed_multiple_bond {
                Ok(PiRole::None)
            } else {
                Ok(PiRole::NeedsDouble)
            }
        }
        7 | 15 => {
            if charge < 0 {
                Ok(PiRole::Donor)
            } else if charge > 0 {
                Ok(PiRole::NeedsDouble)
            } else if connections >= 3 {
                Ok(PiRole::Donor)
            } else {
                Ok(PiRole::NeedsDouble)
            }
        }
        8 | 16 => {
            if charge > 0 {
                Ok(PiRole::NeedsDouble)
            } else {
                Ok(PiRole::Donor)
            }
        }
        5 => {
            if charge < 0 {
                Ok(PiRole::Donor)
            } else {
                Ok(PiRole::None)
            }
        }
        _ => Err(()),
    }
}

fn reject(reason: &str) -> ChemVerdict {
    ChemVerdict {
        ok: false,
        message: Some(format!("Chemical validation failed: {reason}")),
        molecule: None,
    }
}

/// Sanitize a parsed molecule: verify element support, aromaticity as
/// written, and valences; fill rings, implicit hydrogens, and the kekulé
/// bond-order assignment.
pub fn sanitize(mut m: Molecule) -> ChemVerdict {
    for atom in &m.atoms {
        if atom.element == 0 || !elements::is_supported(atom.element) {
            return reject("unsupported element");
        }
        if atom.aromatic && !elements::may_be_aromatic(atom.element) {
            return reject("unsupported element");
        }
    }

    m.rings = sssr(&m);

    for atom in &m.atoms {
        if atom.aromatic && !m.in_ring(atom.index) {
            return reject("aromatic atom not in ring");
        }
    }
    for bond in &m.bonds {
        if bond.order == BondOrder::Aromatic
            && !(m.atoms[bond.a].aromatic && m.atoms[bond.b].aromatic)
        {
            return reject("kekulization impossible");
        }
    }

    let roles = match classify_aromatic_atoms(&m) {
        Ok(r) => r,
        Err(reason) => return reject(reason),
    };

    let matching = match kekulize(&m, &roles) {
        Some(matched) => matched,
        None => return reject("kekulization impossible"),
    };

    m.kekule = m
        .bonds
        .iter()
        .enumerate()
        .map(|(bi, b)| match b.order {
            BondOrder::Aromatic => {
                if matching[bi] {
                    BondOrder::Double
                } else {
                    BondOrder::Single
                }
            }
            other => other,
        })
        .collect();

    if !huckel_holds(&m, &roles) {
        return reject("Hückel violation");
    }

    if let Err(reason) = assign_hydrogens(&mut m) {
        return reject(reason);
    }

    ChemVerdict { ok: true, message: None, molecule: Some(m) }
}

/// π roles for aromatic atoms, `None` entries for aliphatic ones.
fn classify_aromatic_atoms(m: &Molecule) -> Result<Vec<Option<PiRole>>, &'static str> {
    let mut roles = vec![None; m.atoms.len()];
    for atom in &m.atoms {
        if !atom.aromatic {
            continue;
        }
        let connections = m.degree(atom.index) + atom.explicit_h.unwrap_or(0) as usize;
        let has_fixed_multiple = m.bonds.iter().any(|b| {
            (b.a == atom.index || b.b == atom.index)
                && matches!(b.order, BondOrder::Double | BondOrder::Triple)
        });
        let role = pi_role(atom.element, atom.charge, connections, has_fixed_multiple)
            .map_err(|_| "unsupported element")?;
        roles[atom.index] = Some(role);
    }
    Ok(roles)
}

/// Find a perfect matching over atoms that need a double bond, using only
/// aromatic bonds between two such atoms. Returns the per-bond "is double"
/// assignment, or `None` when no kekulé structure exists.
fn kekulize(m: &Molecule, roles: &[Option<PiRole>]) -> Option<Vec<bool>> {
    let needs: Vec<usize> = (0..m.atoms.len())
        .filter(|&i| roles[i] == Some(PiRole::NeedsDouble))
        .collect();
    let mut matching = vec![false; m.bonds.len()];
    if needs.is_empty() {
        return Some(matching);
    }

    let mut eligible: Vec<Vec<usize>> = vec![Vec::new(); m.atoms.len()];
    for (bi, b) in m.bonds.iter().enumerate() {
        if b.order == BondOrder::Aromatic
            && roles[b.a] == Some(PiRole::NeedsDouble)
            && roles[b.b] == Some(PiRole::NeedsDouble)
        {
            eligible[b.a].push(bi);
            eligible[b.b].push(bi);
        }
    }

    let mut matched_atom = vec![false; m.atoms.len()];
    let mut budget: u64 = 1_000_000;
    if backtrack(&needs, &eligible, m, &mut matched_atom, &mut matching, &mut budget) {
        Some(matching)
    } else {
        None
    }
}

fn backtrack(
    needs: &[usize],
    eligible: &[Vec<usize>],
    m: &Molecule,
    matched_atom: &mut [bool],
    matching: &mut [bool],
    budget: &mut u64,
) -> bool {
    if *budget == 0 {
        return false;
    }
    *budget -= 1;

    let next = match needs.iter().find(|&&a| !matched_atom[a]) {
        Some(&a) => a,
        None => return true,
    };
    for &bi in &eligible[next] {
        let other = if m.bonds[bi].a == next { m.bonds[bi].b } else { m.bonds[bi].a };
        if matched_atom[other] {
            continue;
        }
        matched_atom[next] = true;
        matched_atom[other] = true;
        matching[bi] = true;
        if backtrack(needs, eligible, m, matched_atom, matching, budget) {
            return true;
        }
        matched_atom[next] = false;
        matched_atom[other] = false;
        matching[bi] = false;
    }
    false
}

/// Per-ring Hückel check over SSSR rings whose every bond is aromatic.
fn huckel_holds(m: &Molecule, roles: &[Option<PiRole>]) -> bool {
    'rings: for ring in &m.rings {
        for i in 0..ring.len() {
            let a = ring[i];
            let b = ring[(i + 1) % ring.len()];
            let bi = m.bond_between(a, b).expect("ring bonds exist");
            if m.bonds[bi].order != BondOrder::Aromatic {
                continue 'rings;
            }
        }
        let pi: usize = ring
            .iter()
            .map(|&a| roles[a].map(PiRole::electrons).unwrap_or(0))
            .sum();
        if pi < 2 || pi % 4 != 2 {
            return false;
        }
    }
    true
}

/// Assign implicit hydrogens from the kekulé bond-order sums, checking
/// valence limits. Bracket-spelled hydrogen counts are authoritative.
fn assign_hydrogens(m: &mut Molecule) -> Result<(), &'static str> {
    let mut implicit = vec![0u8; m.atoms.len()];
    for atom in &m.atoms {
        let sum: u32 = m
            .bonds
            .iter()
            .enumerate()
            .filter(|(_, b)| b.a == atom.index || b.b == atom.index)
            .map(|(bi, _)| {
                m.kekule[bi]
                    .fixed_value()
                    .expect("kekulé orders are fixed") as u32
            })
            .sum();
        let allowed = allowed_valences(atom.element, atom.charge);
        if allowed.is_empty() {
            return Err("unsupported element");
        }
        match atom.explicit_h {
            Some(h) => {
                let total = sum + h as u32;
                let max = *allowed.last().expect("allowed set nonempty") as u32;
                if total > max {
                    return Err("valence exceeded");
                }
            }
            None => {
                let target = allowed.iter().find(|&&v| v as u32 >= sum);
                match target {
                    Some(&v) => implicit[atom.index] = (v as u32 - sum) as u8,
                    None => return Err("valence exceeded"),
                }
            }
        }
    }
    m.implicit_h = implicit;
    Ok(())
}
