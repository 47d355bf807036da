//! SMILES tokenizer. Operates on the whitespace-stripped string; token
//! texts concatenate back to exactly that string.

use super::syntax::stripped;
use crate::elements;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    OrganicAtom,
    BracketAtom,
    Bond,
    RingClosure,
    BranchOpen,
    BranchClose,
    Dot,
}

/// One lexical unit. `position` is the 0-based character offset of the
/// token's first character in the whitespace-stripped input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmilesToken {
    pub kind: TokenKind,
    pub text: String,
    pub position: usize,
}

/// Lexical error, e.g. a malformed bracket-atom body.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{message} at position {position}")]
pub struct LexError {
    pub position: usize,
    pub message: String,
}

fn err(position: usize, message: impl Into<String>) -> LexError {
    LexError { position, message: message.into() }
}

/// Fields spelled inside a bracket atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BracketFields {
    pub isotope: Option<u16>,
    /// Atomic number; 0 for the `*` wildcard.
    pub element: u8,
    pub aromatic: bool,
    pub explicit_h: u8,
    pub charge: i8,
}

/// Parse the body of a bracket atom (text between `[` and `]`) following
/// the grammar: isotope? symbol chirality? hcount? charge? map?.
/// Chirality markers and atom maps are accepted and ignored.
pub(crate) fn parse_bracket_body(body: &str, base: usize) -> Result<BracketFields, LexError> {
    let bytes = body.as_bytes();
    let mut i = 0;

    let mut isotope: Option<u16> = None;
    let start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() && i - start < 3 {
        i += 1;
    }
    if i > start {
        isotope = Some(body[start..i].parse::<u16>().map_err(|_| err(base + start, "isotope out of range"))?);
    }

    if i >= bytes.len() {
        return Err(err(base + i, "missing element symbol in bracket atom"));
    }

    let (element, aromatic, used) = read_symbol(&body[i..], base + i)?;
    i += used;

    // Chirality: @ or @@, optionally followed by a class tag like TH1.
    if i < bytes.len() && bytes[i] == b'@' {
        i += 1;
        if i < bytes.len() && bytes[i] == b'@' {
            i += 1;
        } else if i + 1 < bytes.len() && bytes[i].is_ascii_uppercase() && bytes[i + 1].is_ascii_uppercase() {
            i += 2;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
        }
    }

    let mut explicit_h: u8 = 0;
    if i < bytes.len() && bytes[i] == b'H' {
        i += 1;
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        explicit_h = if i > start {
            body[start..i].parse::<u8>().map_err(|_| err(base + start, "hydrogen count out of range"))?
        } else {
            1
        };
    }

    let mut charge: i8 = 0;
    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
        let sign: i8 = if bytes[i] == b'+' { 1 } else { -1 };
        let symbol = bytes[i];
        i += 1;
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i > start {
            let magnitude: i8 =
                body[start..i].parse().map_err(|_| err(base + start, "charge out of range"))?;
            charge = sign * magnitude;
        } else {
            charge = sign;
            while i < bytes.len() && bytes[i] == symbol {
                charge += sign;
                i += 1;
            }
        }
    }

    if i < bytes.len() && bytes[i] == b':' {
        i += 1;
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i == start {
            return Err(err(base + i, "atom map expects digits"));
        }
    }

    if i != bytes.len() {
        return Err(err(base + i, format!("unexpected '{}' in bracket atom", body[i..].chars().next().unwrap())));
    }

    Ok(BracketFields { isotope, element, aromatic, explicit_h, charge })
}

/// Read an element symbol at the start of `rest`. Returns (atomic number,
/// aromatic flag, characters consumed). Atomic number 0 encodes `*`.
fn read_symbol(rest: &str, base: usize) -> Result<(u8, bool, usize), LexError> {
    let bytes = rest.as_bytes();
    if bytes.is_empty() {
        return Err(err(base, "missing element symbol"));
    }
    if bytes[0] == b'*' {
        return Ok((0, false, 1));
    }
    if bytes[0].is_ascii_uppercase() {
        if bytes.len() >= 2 && bytes[1].is_ascii_lowercase() {
            let two = &rest[..2];
            if let Some(num) = elements::atomic_number(two) {
                return Ok((num, false, 2));
            }
        }
        let one = &rest[..1];
        if let Some(num) = elements::atomic_number(one) {
            return Ok((num, false, 1));
        }
        return Err(err(base, format!("unknown element symbol '{one}'")));
    }
    if bytes[0].is_ascii_lowercase() {
        // Aromatic symbols: two-letter first (se, as), then single letters.
        if bytes.len() >= 2 {
            let two = &rest[..2];
            if matches!(two, "se" | "as") {
                let capitalized = format!("{}{}", two[..1].to_uppercase(), &two[1..]);
                let num = elements::atomic_number(&capitalized).expect("se/as are elements");
                return Ok((num, true, 2));
            }
        }
        let c = bytes[0] as char;
        if matches!(c, 'b' | 'c' | 'n' | 'o' | 'p' | 's') {
            let num = elements::atomic_number(&c.to_uppercase().to_string()).expect("organic aromatic");
            return Ok((num, true, 1));
        }
        return Err(err(base, format!("unknown aromatic symbol '{c}'")));
    }
    Err(err(base, format!("expected element symbol, found '{}'", rest.chars().next().unwrap())))
}

/// Split a syntactically valid SMILES string into tokens. Total over
/// arbitrary input: lexical problems come back as `LexError`.
pub fn tokenize(s: &str) -> Result<Vec<SmilesToken>, LexError> {
    let text = stripped(s);
    if !text.is_ascii() {
        let pos = text.chars().position(|c| !c.is_ascii()).unwrap_or(0);
        return Err(err(pos, "non-ASCII character"));
    }
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;

    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            '[' => {
                let close = text[i..]
                    .find(']')
                    .map(|off| i + off)
                    .ok_or_else(|| err(i, "unterminated bracket atom"))?;
                parse_bracket_body(&text[i + 1..close], i + 1)?;
                tokens.push(SmilesToken {
                    kind: TokenKind::BracketAtom,
                    text: text[i..=close].to_string(),
                    position: i,
                });
                i = close + 1;
            }
            '(' => {
                tokens.push(SmilesToken { kind: TokenKind::BranchOpen, text: "(".into(), position: i });
                i += 1;
            }
            ')' => {
                tokens.push(SmilesToken { kind: TokenKind::BranchClose, text: ")".into(), position: i });
                i += 1;
            }
            '.' => {
                tokens.push(SmilesToken { kind: TokenKind::Dot, text: ".".into(), position: i });
                i += 1;
            }
            '-' | '=' | '#' | ':' | '/' | '\\' => {
                tokens.push(SmilesToken { kind: TokenKind::Bond, text: c.to_string(), position: i });
                i += 1;
            }
            '%' => {
                if bytes.get(i + 1).is_some_and(u8::is_ascii_digit)
                    && bytes.get(i + 2).is_some_and(u8::is_ascii_digit)
                {
                    tokens.push(SmilesToken {
                        kind: TokenKind::RingClosure,
                        text: text[i..i + 3].to_string(),
                        position: i,
                    });
                    i += 3;
                } else {
                    return Err(err(i, "'%' expects two digits"));
                }
            }
            d if d.is_ascii_digit() => {
                tokens.push(SmilesToken { kind: TokenKind::RingClosure, text: d.to_string(), position: i });
                i += 1;
            }
            'C' if bytes.get(i + 1) == Some(&b'l') => {
                tokens.push(SmilesToken { kind: TokenKind::OrganicAtom, text: "Cl".into(), position: i });
                i += 2;
            }
            'B' if bytes.get(i + 1) == Some(&b'r') => {
                tokens.push(SmilesToken { kind: TokenKind::OrganicAtom, text: "Br".into(), position: i });
                i += 2;
            }
            'B' | 'C' | 'N' | 'O' | 'P' | 'S' | 'F' | 'I' | 'b' | 'c' | 'n' | 'o' | 'p' | 's' | '*' => {
                tokens.push(SmilesToken { kind: TokenKind::OrganicAtom, text: c.to_string(), position: i });
                i += 1;
            }
            other => {
                return Err(err(i, format!("'{other}' cannot start a token")));
            }
        }
    }

    Ok(tokens)
}

impl fmt::Display for SmilesToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(s: &str) -> Vec<TokenKind> {
        tokenize(s).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn tokens_concatenate_to_stripped_input() {
        for s in ["CC(=O)O", "c1ccccc1", "[13CH4]", "C%12CCCCCCCCCCC%12", "C/C=C\\C", "CCO.[NH4+]"] {
            let joined: String = tokenize(s).unwrap().iter().map(|t| t.text.clone()).collect();
            assert_eq!(joined, stripped(s), "{s}");
        }
    }

    #[test]
    fn positions_are_strictly_increasing() {
        let toks = tokenize("CC(=O)Oc1ccccc1").unwrap();
        for pair in toks.windows(2) {
            assert!(pair[0].position < pair[1].position);
        }
    }

    #[test]
    fn two_letter_organic_atoms_lex_as_one_token() {
        assert_eq!(kinds("ClBr"), vec![TokenKind::OrganicAtom, TokenKind::OrganicAtom]);
    }

    #[test]
    fn bracket_bodies_follow_the_grammar() {
        assert!(tokenize("[NH4+]").is_ok());
        assert!(tokenize("[C@@H](N)C").is_ok());
        assert!(tokenize("[13C]").is_ok());
        assert!(tokenize("[O-2]").is_ok());
        assert!(tokenize("[CH3:2]").is_ok());
        assert!(tokenize("[se]").is_ok());
        assert!(tokenize("[Zz]").is_err());
        assert!(tokenize("[CCO]").is_err(), "a bracket body is one atom, not a chain");
        assert!(tokenize("[]").is_err());
    }

    #[test]
    fn bracket_fields_parse_exactly() {
        let f = parse_bracket_body("13CH3+2", 0).unwrap();
        assert_eq!(f.isotope, Some(13));
        assert_eq!(f.element, 6);
        assert_eq!(f.explicit_h, 3);
        assert_eq!(f.charge, 2);
        let f = parse_bracket_body("O--", 0).unwrap();
        assert_eq!(f.charge, -2);
        let f = parse_bracket_body("nH", 0).unwrap();
        assert!(f.aromatic);
        assert_eq!(f.explicit_h, 1);
    }

    #[test]
    fn stray_symbols_are_lexical_errors() {
        assert!(tokenize("C@C").is_err());
        assert!(tokenize("C+").is_err());
        assert!(tokenize("%1C").is_err());
        assert!(tokenize("CA").is_err(), "bare 'A' is not an organic-subset atom");
    }
}
