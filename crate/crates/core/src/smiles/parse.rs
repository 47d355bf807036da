//! SMILES parser: token stream to molecular graph.

use super::lex::{parse_bracket_body, tokenize, TokenKind};
use super::syntax::{stripped, validate_syntax};
use super::{Atom, Bond, BondOrder, Molecule};
use crate::elements;
use std::collections::HashMap;

/// Parse error. The reason records the syntactic or structural defect.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("Cannot parse to molecule: {reason}")]
pub struct ParseFailure {
    pub reason: String,
}

fn fail(reason: impl Into<String>) -> ParseFailure {
    ParseFailure { reason: reason.into() }
}

/// Pending ring-closure: atom index, bond order written at the opening
/// digit (if any), and the opening position for diagnostics.
struct OpenRing {
    atom: usize,
    order: Option<BondOrder>,
}

/// Parse a SMILES string into a molecular graph. The result is
/// pre-sanitization: rings, implicit hydrogens, and kekulé orders are not
/// yet assigned.
pub fn parse_to_mol(s: &str) -> Result<Molecule, ParseFailure> {
    let syntax = validate_syntax(s);
    if !syntax.ok {
        return Err(fail(syntax.message.expect("failed verdict carries a message")));
    }
    let text = stripped(s);
    let tokens = tokenize(&text).map_err(|e| fail(e.to_string()))?;

    let mut atoms: Vec<Atom> = Vec::new();
    let mut bonds: Vec<Bond> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut pending: Option<BondOrder> = None;
    let mut after_dot = false;
    let mut stack: Vec<usize> = Vec::new();
    let mut open_rings: HashMap<u8, OpenRing> = HashMap::new();
    let mut pair_seen: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();

    let add_bond = |bonds: &mut Vec<Bond>,
                        pair_seen: &mut std::collections::HashSet<(usize, usize)>,
                        a: usize,
                        b: usize,
                        order: BondOrder,
                        ring_closure: bool|
     -> Result<(), ParseFailure> {
        if a == b {
            return Err(fail("ring closure to the same atom"));
        }
        let key = (a.min(b), a.max(b));
        if !pair_seen.insert(key) {
            return Err(fail("duplicate bond between atoms"));
        }
        bonds.push(Bond { a, b, order, ring_closure });
        Ok(())
    };

    for token in &tokens {
        match token.kind {
            TokenKind::OrganicAtom | TokenKind::BracketAtom => {
                let atom = build_atom(token.kind, &token.text, atoms.len())?;
                let index = atom.index;
                let aromatic = atom.aromatic;
                atoms.push(atom);
                if let Some(p) = prev {
                    let order = pending.take().unwrap_or({
                        if atoms[p].aromatic && aromatic {
                            BondOrder::Aromatic
                        } else {
                            BondOrder::Single
                        }
                    });
                    add_bond(&mut bonds, &mut pair_seen, p, index, order, false)?;
                }
                after_dot = false;
                prev = Some(index);
            }
            TokenKind::Bond => {
                if pending.is_some() {
                    return Err(fail("two bond symbols in a row"));
                }
                if prev.is_none() || after_dot {
                    return Err(fail("bond symbol with no preceding atom"));
                }
                pending = Some(match token.text.as_str() {
                    "-" => BondOrder::Single,
                    "=" => BondOrder::Double,
                    "#" => BondOrder::Triple,
                    ":" => BondOrder::Aromatic,
                    // Stereo bond markers parse as single bonds; stereo is ignored.
                    "/" | "\\" => BondOrder::Single,
                    other => return Err(fail(format!("unrecognized bond symbol '{other}'"))),
                });
            }
            TokenKind::RingClosure => {
                let current = match prev {
                    Some(p) => p,
                    None => return Err(fail("ring closure with no preceding atom")),
                };
                let label = parse_ring_label(&token.text);
                match open_rings.remove(&label) {
                    None => {
                        open_rings.insert(label, OpenRing { atom: current, order: pending.take() });
                    }
                    Some(open) => {
                        let here = pending.take();
                        let order = match (open.order, here) {
                            (None, None) => {
                                if atoms[open.atom].aromatic && atoms[current].aromatic {
                                    BondOrder::Aromatic
                                } else {
                                    BondOrder::Single
                                }
                            }
                            (Some(o), None) | (None, Some(o)) => o,
                            (Some(a), Some(b)) if a == b => a,
                            (Some(_), Some(_)) => {
                                return Err(fail("ring closure bond order conflict"));
                            }
                        };
                        add_bond(&mut bonds, &mut pair_seen, open.atom, current, order, true)?;
                    }
                }
            }
            TokenKind::BranchOpen => {
                if pending.is_some() {
                    return Err(fail("bond symbol before a branch opening"));
                }
                match prev {
                    Some(p) => stack.push(p),
                    None => return Err(fail("branch opened with no preceding atom")),
                }
            }
            TokenKind::BranchClose => {
                if pending.is_some() {
                    return Err(fail("bond symbol before a branch closing"));
                }
                match stack.pop() {
                    Some(p) => prev = Some(p),
                    None => return Err(fail("branch closed with no opening")),
                }
            }
            TokenKind::Dot => {
                if pending.is_some() {
                    return Err(fail("bond symbol before a dot"));
                }
                if !stack.is_empty() {
                    return Err(fail("dot inside a branch"));
                }
                if prev.is_none() {
                    return Err(fail("dot with no preceding atom"));
                }
                after_dot = true;
                prev = None;
            }
        }
    }

    if pending.is_some() {
        return Err(fail("dangling bond symbol at end of input"));
    }
    if after_dot {
        return Err(fail("dot at end of input"));
    }
    if atoms.is_empty() {
        return Err(fail("no atoms"));
    }

    let n = atoms.len();
    Ok(Molecule { atoms, bonds, rings: Vec::new(), implicit_h: vec![0; n], kekule: Vec::new() })
}

fn parse_ring_label(text: &str) -> u8 {
    if let Some(rest) = text.strip_prefix('%') {
        rest.parse().expect("lexer guarantees two digits")
    } else {
        text.parse().expect("lexer guarantees one digit")
    }
}

fn build_atom(kind: TokenKind, text: &str, index: usize) -> Result<Atom, ParseFailure> {
    match kind {
        TokenKind::OrganicAtom => {
            if text == "*" {
                return Ok(Atom {
                    element: 0,
                    isotope: None,
                    charge: 0,
                    explicit_h: None,
                    aromatic: false,
                    index,
                });
            }
            let aromatic = text.chars().next().expect("atom text nonempty").is_ascii_lowercase();
            let symbol = if aromatic {
                let mut s = text.to_string();
                s[..1].make_ascii_uppercase();
                s
            } else {
                text.to_string()
            };
            let element = elements::atomic_number(&symbol)
                .ok_or_else(|| fail(format!("unknown organic-subset symbol '{text}'")))?;
            Ok(Atom { element, isotope: None, charge: 0, explicit_h: None, aromatic, index })
        }
        TokenKind::BracketAtom => {
            let body = &text[1..text.len() - 1];
            let fields = parse_bracket_body(body, 0).map_err(|e| fail(e.to_string()))?;
            Ok(Atom {
                element: fields.element,
                isotope: fields.isotope,
                charge: fields.charge,
                explicit_h: Some(fields.explicit_h),
                aromatic: fields.aromatic,
                index,
            })
        }
        _ => unreachable!("build_atom called on a non-atom token"),
    }
}
