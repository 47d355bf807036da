//! Element symbols, atomic numbers, and average atomic weights.
//!
//! The full periodic symbol table is used by the SMILES parser (any real
//! element may appear in brackets); chemical sanitization and property
//! calculations only support the subset for which valence rules and weights
//! are defined.

use std::collections::HashMap;
use std::sync::OnceLock;

/// All recognized element symbols, indexed by atomic number - 1.
pub const SYMBOLS: [&str; 118] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
    "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
    "In", "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu",
    "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt",
    "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np",
    "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs",
    "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
];

/// Atomic number for a case-sensitive element symbol, if it names a real element.
pub fn atomic_number(symbol: &str) -> Option<u8> {
    static TABLE: OnceLock<HashMap<&'static str, u8>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        SYMBOLS
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, (i + 1) as u8))
            .collect()
    });
    table.get(symbol).copied()
}

/// Symbol for an atomic number. Panics on 0 or out-of-range numbers.
pub fn symbol(atomic_number: u8) -> &'static str {
    SYMBOLS[atomic_number as usize - 1]
}

/// Elements with defined valence rules; everything else fails sanitization.
pub const SUPPORTED: [u8; 11] = [1, 5, 6, 7, 8, 9, 15, 16, 17, 35, 53];

/// True if the element has valence rules and an atomic weight.
pub fn is_supported(atomic_number: u8) -> bool {
    SUPPORTED.contains(&atomic_number)
}

/// Elements that may carry the aromatic flag.
pub fn may_be_aromatic(atomic_number: u8) -> bool {
    matches!(atomic_number, 5 | 6 | 7 | 8 | 15 | 16)
}

fn weight_table() -> &'static HashMap<u8, f64> {
    static TABLE: OnceLock<HashMap<u8, f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut map = HashMap::new();
        for line in include_str!("../data/atomic_weights.txt").lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let sym = parts.next().expect("weight record has a symbol");
            let value: f64 = parts
                .next()
                .expect("weight record has a value")
                .parse()
                .expect("weight value parses");
            let num = atomic_number(sym).expect("weight symbol is a real element");
            map.insert(num, value);
        }
        map
    })
}

/// Average atomic weight in g/mol, for supported elements only.
pub fn atomic_weight(atomic_number: u8) -> Option<f64> {
    weight_table().get(&atomic_number).copied()
}
