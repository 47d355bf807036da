//! Character-level SMILES checking: alphabet membership, balanced
//! parentheses and brackets, matched ring-closure digits.

use super::SyntaxVerdict;

/// Non-alphanumeric characters admitted by the SMILES alphabet. Stereo
/// markers (`/`, `\`, `@`) are legal input and ignored downstream.
const PUNCTUATION: &str = "()[]=#-+%/\\@:.*";

fn in_alphabet(c: char) -> bool {
    c.is_ascii_alphanumeric() || PUNCTUATION.contains(c)
}

/// Strip all whitespace; positions reported by [`validate_syntax`] refer to
/// this form.
pub(crate) fn stripped(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Character-level validation. Messages come from a fixed set: "Invalid
/// character detected", "Unbalanced parentheses", "Unbalanced brackets",
/// "Unmatched ring closure".
pub fn validate_syntax(s: &str) -> SyntaxVerdict {
    let text = stripped(s);
    let chars: Vec<char> = text.chars().collect();

    for (i, c) in chars.iter().enumerate() {
        if !in_alphabet(*c) {
            return SyntaxVerdict::fail("Invalid character detected", Some(i));
        }
    }

    let mut paren_stack: Vec<usize> = Vec::new();
    for (i, c) in chars.iter().enumerate() {
        match c {
            '(' => paren_stack.push(i),
            ')' => {
                if paren_stack.pop().is_none() {
                    return SyntaxVerdict::fail("Unbalanced parentheses", Some(i));
                }
            }
            _ => {}
        }
    }
    if let Some(&open) = paren_stack.last() {
        return SyntaxVerdict::fail("Unbalanced parentheses", Some(open));
    }

    let mut bracket_open: Option<usize> = None;
    for (i, c) in chars.iter().enumerate() {
        match c {
            '[' => {
                if bracket_open.is_some() {
                    return SyntaxVerdict::fail("Unbalanced brackets", Some(i));
                }
                bracket_open = Some(i);
            }
            ']' => {
                if bracket_open.take().is_none() {
                    return SyntaxVerdict::fail("Unbalanced brackets", Some(i));
                }
            }
            _ => {}
        }
    }
    if let Some(open) = bracket_open {
        return SyntaxVerdict::fail("Unbalanced brackets", Some(open));
    }

    // Ring-closure digits toggle between opening and closing a label; a
    // label still open at the end of the string is unmatched. Digits inside
    // brackets (isotopes, H counts, charges, atom maps) are not closures.
    let mut open_at: [Option<usize>; 100] = [None; 100];
    let mut in_bracket = false;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '[' => in_bracket = true,
            ']' => in_bracket = false,
            '%' if !in_bracket => {
                // Two-digit label; a malformed "%" is left to the lexer.
                if chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())
                    && chars.get(i + 2).is_some_and(|c| c.is_ascii_digit())
                {
                    let label = (chars[i + 1] as usize - '0' as usize) * 10
                        + (chars[i + 2] as usize - '0' as usize);
                    toggle(&mut open_at, label, i);
                    i += 3;
                    continue;
                }
            }
            d if !in_bracket && d.is_ascii_digit() => {
                let label = d as usize - '0' as usize;
                toggle(&mut open_at, label, i);
            }
            _ => {}
        }
        i += 1;
    }
    if let Some(pos) = open_at.iter().flatten().min() {
        return SyntaxVerdict::fail("Unmatched ring closure", Some(*pos));
    }

    SyntaxVerdict::pass()
}

fn toggle(open_at: &mut [Option<usize>; 100], label: usize, pos: usize) {
    if open_at[label].is_some() {
        open_at[label] = None;
    } else {
        open_at[label] = Some(pos);
    }
}
