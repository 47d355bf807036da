//! Atom-additive octanol/water partition coefficient.
//!
//! Every heavy atom and every hydrogen is assigned a type by a fixed
//! decision tree over its local environment (element, aromaticity, bond
//! orders, neighbor elements), and logP is the sum of the bundled per-type
//! contributions. Typing runs on the aromatized normal form so kekulé and
//! aromatic spellings score identically.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use super::PropertyError;
use crate::smiles::{BondOrder, Molecule};

fn contribution_table() -> &'static BTreeMap<&'static str, f64> {
    static TABLE: OnceLock<BTreeMap<&'static str, f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut map = BTreeMap::new();
        for line in include_str!("../../data/crippen.txt").lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let id = parts.next().expect("type id");
            let value: f64 = parts.next().expect("value").parse().expect("numeric value");
            map.insert(id, value);
        }
        map
    })
}

/// One neighbor of the atom being typed.
struct Neighbor {
    element: u8,
    aromatic: bool,
    order: BondOrder,
}

fn neighbors(m: &Molecule, adj: &[Vec<(usize, usize)>], atom: usize) -> Vec<Neighbor> {
    adj[atom]
        .iter()
        .map(|&(nbr, bi)| Neighbor {
            element: m.atoms[nbr].element,
            aromatic: m.atoms[nbr].aromatic,
            order: m.bonds[bi].order,
        })
        .collect()
}

fn is_halogen(element: u8) -> bool {
    matches!(element, 9 | 17 | 35 | 53)
}

fn carbon_type(m: &Molecule, atom: usize, nbrs: &[Neighbor]) -> &'static str {
    let h = m.total_h(atom);
    if m.atoms[atom].aromatic {
        // Exocyclic double bond off an aromatic ring atom.
        if let Some(n) = nbrs.iter().find(|n| n.order == BondOrder::Double) {
            return if matches!(n.element, 6 | 7 | 8) { "C25" } else { "CS" };
        }
        if h > 0 {
            return "C18";
        }
        let single = nbrs.iter().find(|n| n.order != BondOrder::Aromatic);
        return match single {
            None => "C19",
            Some(n) if n.aromatic => "C20",
            Some(n) => match n.element {
                9 => "C14",
                17 => "C15",
                35 => "C16",
                53 => "C17",
                6 => "C21",
                7 => "C22",
                8 => "C23",
                16 => "C24",
                _ => "C13",
            },
        };
    }
    if nbrs.iter().any(|n| n.order == BondOrder::Triple) {
        return "C7";
    }
    if nbrs.iter().any(|n| n.order == BondOrder::Double) {
        if nbrs.iter().any(|n| n.order == BondOrder::Double && n.element != 6) {
            return "C5";
        }
        return if nbrs.iter().any(|n| n.aromatic) { "C26" } else { "C6" };
    }
    // Saturated carbon: heteroatom attachment outranks benzylic position.
    let aliphatic_hetero = nbrs
        .iter()
        .any(|n| !n.aromatic && (matches!(n.element, 7 | 8 | 15 | 16) || is_halogen(n.element)));
    if aliphatic_hetero {
        return if h >= 2 { "C3" } else { "C4" };
    }
    if let Some(ar) = nbrs.iter().find(|n| n.aromatic) {
        return match h {
            3 => {
                if ar.element == 6 {
                    "C8"
                } else {
                    "C9"
                }
            }
            2 => "C10",
            1 => "C11",
            _ => "C12",
        };
    }
    if nbrs.iter().any(|n| n.element == 5 || n.element == 0) {
        return "C27";
    }
    if nbrs.iter().all(|n| n.element == 6 || n.element == 1) {
        return if h >= 2 { "C1" } else { "C2" };
    }
    "CS"
}

fn nitrogen_type(m: &Molecule, atom: usize, nbrs: &[Neighbor]) -> &'static str {
    let a = &m.atoms[atom];
    let h = m.total_h(atom);
    if a.aromatic {
        return match a.charge {
            c if c > 0 => "N12",
            0 => "N11",
            _ => "NS",
        };
    }
    if a.charge > 0 {
        if nbrs
            .iter()
            .any(|n| matches!(n.order, BondOrder::Double | BondOrder::Triple))
        {
            return "N14";
        }
        return if h >= 1 { "N10" } else { "N13" };
    }
    if a.charge < 0 {
        return "NS";
    }
    if nbrs.iter().any(|n| n.order == BondOrder::Triple) {
        return "N9";
    }
    if nbrs.iter().any(|n| n.order == BondOrder::Double) {
        return if h >= 1 { "N5" } else { "N6" };
    }
    let aryl = nbrs.iter().any(|n| n.aromatic);
    match h {
        hh if hh >= 2 => {
            if aryl {
                "N3"
            } else {
                "N1"
            }
        }
        1 => {
            if aryl {
                "N4"
            } else {
                "N2"
            }
        }
        _ => {
            if aryl {
                "N8"
            } else {
                "N7"
            }
        }
    }
}

/// True if the neighbor atom (by index) is a carboxylate-style carbon:
/// an aliphatic carbon carrying a double bond to some other oxygen.
fn carbon_bears_double_oxygen(m: &Molecule, adj: &[Vec<(usize, usize)>], carbon: usize) -> bool {
    adj[carbon].iter().any(|&(nbr, bi)| {
        m.atoms[nbr].element == 8 && m.bonds[bi].order == BondOrder::Double
    })
}

fn oxygen_type(m: &Molecule, adj: &[Vec<(usize, usize)>], atom: usize) -> &'static str {
    let a = &m.atoms[atom];
    let h = m.total_h(atom);
    if a.aromatic {
        return "O1";
    }
    if a.charge < 0 {
        if let Some(&(nbr, _)) = adj[atom].first() {
            let n = &m.atoms[nbr];
            if n.element == 6 && !n.aromatic && carbon_bears_double_oxygen(m, adj, nbr) {
                return "O12";
            }
            return match n.element {
                7 | 8 => "O5",
                16 => "O6",
                _ => "O7",
            };
        }
        return "O7";
    }
    if h >= 1 {
        return "O2";
    }
    let double = adj[atom]
        .iter()
        .find(|&&(_, bi)| m.bonds[bi].order == BondOrder::Double);
    if let Some(&(nbr, _)) = double {
        let n = &m.atoms[nbr];
        if n.aromatic {
            return "O8";
        }
        return match n.element {
            7 | 8 => "O5",
            16 => "O6",
            6 => {
                // Conjugated carbonyl (ester, amide, acid) vs plain ketone.
                let conjugated = adj[nbr].iter().any(|&(other, obi)| {
                    other != atom
                        && m.bonds[obi].order == BondOrder::Single
                        && matches!(m.atoms[other].element, 7 | 8 | 16)
                });
                if conjugated {
                    "O10"
                } else {
                    "O9"
                }
            }
            _ => "OS",
        };
    }
    if adj[atom].len() == 2 {
        let aryl = adj[atom].iter().any(|&(nbr, _)| m.atoms[nbr].aromatic);
        return if aryl { "O4" } else { "O3" };
    }
    "OS"
}

/// Type for the hydrogens sitting on `atom`.
fn hydrogen_type(m: &Molecule, adj: &[Vec<(usize, usize)>], atom: usize) -> &'static str {
    match m.atoms[atom].element {
        6 => "H1",
        7 => "H3",
        8 => {
            let acid = adj[atom].iter().any(|&(nbr, bi)| {
                m.bonds[bi].order == BondOrder::Single
                    && ((m.atoms[nbr].element == 6
                        && !m.atoms[nbr].aromatic
                        && adj[nbr].iter().any(|&(other, obi)| {
                            other != atom
                                && m.bonds[obi].order == BondOrder::Double
                                && matches!(m.atoms[other].element, 6 | 7 | 8 | 16)
                        }))
                        || matches!(m.atoms[nbr].element, 8 | 16))
            });
            if acid {
                "H4"
            } else {
                "H2"
            }
        }
        _ => "HS",
    }
}

fn atom_type(
    m: &Molecule,
    adj: &[Vec<(usize, usize)>],
    atom: usize,
) -> Result<&'static str, PropertyError> {
    let a = &m.atoms[atom];
    let nbrs = neighbors(m, adj, atom);
    let ty = match a.element {
        6 => carbon_type(m, atom, &nbrs),
        7 => nitrogen_type(m, atom, &nbrs),
        8 => oxygen_type(m, adj, atom),
        9 => {
            if a.charge < 0 {
                "Hal-"
            } else {
                "F"
            }
        }
        17 => {
            if a.charge < 0 {
                "Hal-"
            } else {
                "Cl"
            }
        }
        35 => {
            if a.charge < 0 {
                "Hal-"
            } else {
                "Br"
            }
        }
        53 => {
            if a.charge < 0 {
                "Hal-"
            } else {
                "I"
            }
        }
        15 => "P",
        16 => {
            if a.aromatic {
                "S3"
            } else if a.charge != 0 {
                "S2"
            } else {
                "S1"
            }
        }
        1 => hydrogen_type_for_explicit(m, adj, atom),
        _ => {
            let symbol = if a.element == 0 {
                "*".to_string()
            } else {
                crate::elements::symbol(a.element).to_string()
            };
            return Err(PropertyError::UnassignedAtomType { index: atom, symbol });
        }
    };
    Ok(ty)
}

/// An explicit `[H]` atom is typed by whatever it is bonded to.
fn hydrogen_type_for_explicit(
    m: &Molecule,
    adj: &[Vec<(usize, usize)>],
    atom: usize,
) -> &'static str {
    match adj[atom].first() {
        Some(&(nbr, _)) => hydrogen_type(m, adj, nbr),
        None => "HS",
    }
}

/// Estimated logP for a sanitized molecule.
pub fn crippen_logp(m: &Molecule) -> Result<f64, PropertyError> {
    let n = m.aromatized();
    let adj = n.adjacency();
    let table = contribution_table();
    let mut total = 0.0;
    for atom in &n.atoms {
        let ty = atom_type(&n, &adj, atom.index)?;
        total += table[ty];
        if atom.element != 1 {
            let h_ty = hydrogen_type(&n, &adj, atom.index);
            total += n.total_h(atom.index) as f64 * table[h_ty];
        }
    }
    Ok(total)
}
