//! Synthetic accessibility estimate from 1 (easy) to 10 (hard).
//!
//! The score combines a fragment-familiarity term — the mean log-frequency
//! of the molecule's circular environments against a bundled frequency
//! table — with additive complexity penalties for size, spiro and bridged
//! ring fusions, and macrocycles, plus a symmetry bonus for molecules built
//! from few distinct environments. The raw sum is affinely rescaled and
//! clamped to [1,10].
//!
//! The bundled table is counted over the small corpus in `data/drugs.smi`
//! by this crate's own fingerprinter, so absolute values are approximate;
//! range, monotonicity, and relative ordering are the reliable signals.

use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use super::fingerprint::environment_ids;
use crate::smiles::Molecule;

/// Radius of the environments counted in the frequency table.
const FRAGMENT_RADIUS: usize = 2;
/// Log-frequency assigned to environments absent from the table. Slightly
/// below the score of a count-1 entry, so novelty reads as rare, not alien.
const UNSEEN_LOG_FREQUENCY: f64 = -1.0;
/// Raw-score endpoints of the affine rescale, calibrated against the
/// bundled table so that corpus-like molecules land in the easy half.
const RAW_HARD: f64 = -3.0;
const RAW_EASY: f64 = 1.5;

fn fragment_table() -> &'static HashMap<u64, f64> {
    static TABLE: OnceLock<HashMap<u64, f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut counts: Vec<(u64, u64)> = Vec::new();
        for line in include_str!("../../data/sa_fragments.txt").lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let id: u64 = parts.next().expect("identifier").parse().expect("numeric id");
            let count: u64 = parts.next().expect("count").parse().expect("numeric count");
            counts.push((id, count));
        }
        let distinct = counts.len() as f64;
        let total: u64 = counts.iter().map(|&(_, c)| c).sum();
        let total = total.max(1) as f64;
        counts
            .into_iter()
            .map(|(id, c)| (id, (c as f64 * distinct / total).log10()))
            .collect()
    })
}

/// The bundled reference structures: `(smiles, name)` pairs.
pub fn bundled_drug_corpus() -> Vec<(&'static str, &'static str)> {
    include_str!("../../data/drugs.smi")
        .lines()
        .filter_map(|line| {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                return None;
            }
            let mut parts = line.split_whitespace();
            let smiles = parts.next()?;
            let name = parts.next().unwrap_or("");
            Some((smiles, name))
        })
        .collect()
}

/// Spiro and bridgehead atom counts plus macrocycle presence, from the
/// SSSR: a ring pair sharing exactly one atom marks it spiro; a pair
/// sharing three or more atoms marks the shared-path endpoints as
/// bridgeheads.
fn ring_features(m: &Molecule) -> (usize, usize, bool) {
    let rings: Vec<BTreeSet<usize>> = m.rings.iter().map(|r| r.iter().copied().collect()).collect();
    let mut spiro: BTreeSet<usize> = BTreeSet::new();
    let mut bridge: BTreeSet<usize> = BTreeSet::new();
    for i in 0..rings.len() {
        for j in i + 1..rings.len() {
            let shared: BTreeSet<usize> = rings[i].intersection(&rings[j]).copied().collect();
            match shared.len() {
                0 | 2 => {}
                1 => {
                    spiro.extend(shared.iter());
                }
                _ => {
                    for &at in &shared {
                        let outside = [i, j].iter().any(|&ri| {
                            let ring = &m.rings[ri];
                            ring_neighbors(ring, at)
                                .into_iter()
                                .any(|nb| !shared.contains(&nb))
                        });
                        if outside {
                            bridge.insert(at);
                        }
                    }
                }
            }
        }
    }
    let macrocycle = m.rings.iter().any(|r| r.len() > 8);
    (spiro.len(), bridge.len(), macrocycle)
}

/// Previous and next atoms around the ordered cycle, if the atom is on it.
fn ring_neighbors(ring: &[usize], atom: usize) -> Vec<usize> {
    match ring.iter().position(|&a| a == atom) {
        None => Vec::new(),
        Some(pos) => {
            let n = ring.len();
            vec![ring[(pos + n - 1) % n], ring[(pos + 1) % n]]
        }
    }
}

/// Synthetic accessibility score for a sanitized molecule.
pub fn sa_score(m: &Molecule) -> f64 {
    let table = fragment_table();
    let ids = environment_ids(m, FRAGMENT_RADIUS);
    let familiarity = if ids.is_empty() {
        UNSEEN_LOG_FREQUENCY
    } else {
        let sum: f64 = ids
            .iter()
            .map(|id| table.get(id).copied().unwrap_or(UNSEEN_LOG_FREQUENCY))
            .sum();
        sum / ids.len() as f64
    };

    let heavy = m.atoms.iter().filter(|a| a.element != 1).count().max(1) as f64;
    let (nspiro, nbridge, macrocycle) = ring_features(m);
    let size_penalty = heavy.powf(1.005) - heavy;
    let spiro_penalty = ((nspiro + 1) as f64).log10();
    let bridge_penalty = ((nbridge + 1) as f64).log10();
    let macro_penalty = if macrocycle { 2f64.log10() } else { 0.0 };
    let complexity = -(size_penalty + spiro_penalty + bridge_penalty + macro_penalty);

    let distinct = ids.iter().collect::<BTreeSet<_>>().len().max(1) as f64;
    let symmetry = if heavy > distinct { (heavy / distinct).ln() * 0.5 } else { 0.0 };

    let raw = familiarity + complexity + symmetry;
    let mut score = 11.0 - (raw - RAW_HARD + 1.0) / (RAW_EASY - RAW_HARD) * 9.0;
    if score > 8.0 {
        score = 8.0 + (score + 1.0 - 9.0).ln();
    }
    score.clamp(1.0, 10.0)
}
