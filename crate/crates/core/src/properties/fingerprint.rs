//! Circular substructure fingerprints and Tanimoto similarity.
//!
//! Each atom contributes one environment identifier per radius, built by
//! iteratively hashing its invariant together with the sorted invariants of
//! its neighbors. Identifiers are folded onto a fixed-width bit vector. The
//! hash is FNV-1a over little-endian words, so fingerprints are stable
//! across platforms and releases.

use serde::{Deserialize, Serialize};

use crate::smiles::{BondOrder, Molecule};

/// Folded binary fingerprint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    words: Vec<u64>,
    nbits: usize,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FingerprintError {
    #[error("fingerprint widths differ: {0} vs {1} bits")]
    DimensionMismatch(usize, usize),
}

impl Fingerprint {
    fn new(nbits: usize) -> Self {
        Fingerprint { words: vec![0; nbits.div_ceil(64)], nbits }
    }

    fn set(&mut self, bit: usize) {
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn nbits(&self) -> usize {
        self.nbits
    }

    /// Number of bits set.
    pub fn popcount(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }
}

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

fn fnv1a(words: &[u64]) -> u64 {
    let mut hash = FNV_OFFSET;
    for word in words {
        for byte in word.to_le_bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(FNV_PRIME);
        }
    }
    hash
}

fn bond_code(order: BondOrder) -> u64 {
    match order {
        BondOrder::Single => 1,
        BondOrder::Double => 2,
        BondOrder::Triple => 3,
        BondOrder::Aromatic => 4,
    }
}

/// All environment identifiers of the molecule at radii `0..=radius`, one
/// per atom per radius, with multiplicity. Works on the aromatized normal
/// form so equivalent spellings emit identical identifiers.
pub(crate) fn environment_ids(m: &Molecule, radius: usize) -> Vec<u64> {
    let n = m.aromatized();
    let adj = n.adjacency();
    let mut current: Vec<u64> = n
        .atoms
        .iter()
        .map(|a| {
            fnv1a(&[
                a.element as u64,
                n.degree(a.index) as u64,
                (a.charge as i64 + 128) as u64,
                n.total_h(a.index) as u64,
                n.in_ring(a.index) as u64,
                a.aromatic as u64,
            ])
        })
        .collect();
    let mut ids = current.clone();
    for _ in 0..radius {
        let mut next = Vec::with_capacity(current.len());
        for atom in 0..n.atoms.len() {
            let mut env: Vec<(u64, u64)> = adj[atom]
                .iter()
                .map(|&(nbr, bi)| (bond_code(n.bonds[bi].order), current[nbr]))
                .collect();
            env.sort_unstable();
            let mut words = vec![current[atom]];
            for (code, inv) in env {
                words.push(code);
                words.push(inv);
            }
            next.push(fnv1a(&words));
        }
        current = next;
        ids.extend_from_slice(&current);
    }
    ids
}

/// Circular fingerprint with the given radius folded to `nbits` bits.
pub fn morgan_fingerprint(m: &Molecule, radius: usize, nbits: usize) -> Fingerprint {
    let mut fp = Fingerprint::new(nbits.max(1));
    for id in environment_ids(m, radius) {
        fp.set((id % fp.nbits as u64) as usize);
    }
    fp
}

/// Tanimoto similarity between two equally sized fingerprints. Two empty
/// fingerprints count as identical.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, FingerprintError> {
    if a.nbits != b.nbits {
        return Err(FingerprintError::DimensionMismatch(a.nbits, b.nbits));
    }
    let mut intersection = 0u32;
    let mut union = 0u32;
    for (wa, wb) in a.words.iter().zip(&b.words) {
        intersection += (wa & wb).count_ones();
        union += (wa | wb).count_ones();
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(intersection as f64 / union as f64)
}
