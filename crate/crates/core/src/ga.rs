//! Genetic-algorithm baseline over SMILES strings: tournament selection,
//! balanced-cut crossover, per-position mutation, elitism, and Tanimoto
//! clustering for diversity. Every admitted individual is chemically valid
//! and stored canonically, and the whole run is reproducible from the seed.

use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::properties::{morgan_fingerprint, property_profile, tanimoto, PropertyProfile};
use crate::smiles::{
    canonical_smiles, tokenize, validate_chemistry, Molecule, SmilesToken, TokenKind,
};

const FINGERPRINT_BITS: usize = 2048;
const FINGERPRINT_RADIUS: usize = 2;
const OFFSPRING_RETRIES: usize = 10;
const SUBSTITUTION_SYMBOLS: [&str; 6] = ["C", "N", "O", "S", "F", "Cl"];
const AROMATIC_SUBSTITUTION_SYMBOLS: [&str; 4] = ["c", "n", "o", "s"];

fn default_population_size() -> usize {
    500
}
fn default_mutation_rate() -> f64 {
    0.02
}
fn default_crossover_rate() -> f64 {
    0.8
}
fn default_tournament_size() -> usize {
    3
}
fn default_generations() -> usize {
    50
}
fn default_elite_count() -> usize {
    10
}
fn default_diversity_threshold() -> f64 {
    0.9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    #[serde(default = "default_population_size")]
    pub population_size: usize,
    #[serde(default = "default_mutation_rate")]
    pub mutation_rate: f64,
    #[serde(default = "default_crossover_rate")]
    pub crossover_rate: f64,
    #[serde(default = "default_tournament_size")]
    pub tournament_size: usize,
    #[serde(default = "default_generations")]
    pub generations: usize,
    #[serde(default = "default_elite_count")]
    pub elite_count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_diversity_threshold")]
    pub diversity_threshold: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: default_population_size(),
            mutation_rate: default_mutation_rate(),
            crossover_rate: default_crossover_rate(),
            tournament_size: default_tournament_size(),
            generations: default_generations(),
            elite_count: default_elite_count(),
            seed: 0,
            diversity_threshold: default_diversity_threshold(),
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), GaError> {
        if self.population_size == 0 {
            return Err(GaError::InvalidConfig("population_size must be positive".into()));
        }
        if self.elite_count >= self.population_size {
            return Err(GaError::InvalidConfig(
                "elite_count must be smaller than population_size".into(),
            ));
        }
        if self.tournament_size == 0 {
            return Err(GaError::InvalidConfig("tournament_size must be positive".into()));
        }
        for (name, p) in
            [("mutation_rate", self.mutation_rate), ("crossover_rate", self.crossover_rate)]
        {
            if !(0.0..=1.0).contains(&p) {
                return Err(GaError::InvalidConfig(format!("{name} must lie in [0,1], got {p}")));
            }
        }
        if !(0.0..=1.0).contains(&self.diversity_threshold) {
            return Err(GaError::InvalidConfig("diversity_threshold must lie in [0,1]".into()));
        }
        Ok(())
    }
}

pub fn read_ga_config(path: impl AsRef<Path>) -> Result<GaConfig, GaError> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| GaError::Io(format!("{}: {e}", path.as_ref().display())))?;
    let config: GaConfig =
        serde_json::from_str(&text).map_err(|e| GaError::InvalidConfig(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub smiles: String,
    pub fitness: f64,
    pub profile: PropertyProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub diversity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaOutcome {
    pub population: Vec<Individual>,
    pub trace: Vec<TraceRow>,
}

impl GaOutcome {
    pub fn best(&self) -> &Individual {
        self.population.iter().max_by(|a, b| rank(a, b)).expect("population is never empty")
    }
}

/// Trace as CSV, one row per generation including the initial population as
/// generation zero.
pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("generation,best,mean,diversity\n");
    for row in trace {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6}\n",
            row.generation, row.best, row.mean, row.diversity
        ));
    }
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum GaError {
    #[error("no chemically valid seed molecule")]
    InfeasibleSeed,
    #[error("fitness function failed: {0}")]
    Fitness(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("config io: {0}")]
    Io(String),
}

/// Default objective: pull logP toward a target while keeping the molecule
/// easy to make. Weighted 0.7 property / 0.3 synthetic accessibility.
pub fn logp_target_fitness(
    target: f64,
) -> impl Fn(&Molecule, &PropertyProfile) -> Result<f64, String> + Sync + Send {
    move |molecule, profile| {
        let sa = crate::properties::sa_score(molecule);
        Ok(0.7 * (1.0 / (1.0 + (profile.logp - target).abs())) - 0.3 * (sa / 10.0))
    }
}

/// Total order on individuals: higher fitness wins, ties broken by the
/// canonical string so runs sort identically everywhere.
fn rank(a: &Individual, b: &Individual) -> std::cmp::Ordering {
    a.fitness
        .partial_cmp(&b.fitness)
        .expect("fitness values are checked finite")
        .then_with(|| b.smiles.cmp(&a.smiles))
}

fn coin(rng: &mut ChaCha8Rng, probability: f64) -> bool {
    (rng.gen_range(0..1_000_000u32) as f64) < probability * 1_000_000.0
}

// ---------------------------------------------------------------------------
// Mutation
// ---------------------------------------------------------------------------

/// A splice into the source string; `start..end` is replaced by `text`.
struct Edit {
    start: usize,
    end: usize,
    text: String,
}

fn is_atom(kind: TokenKind) -> bool {
    matches!(kind, TokenKind::OrganicAtom | TokenKind::BracketAtom)
}

fn substitution_edit(token: &SmilesToken, rng: &mut ChaCha8Rng) -> Option<Edit> {
    if token.kind != TokenKind::OrganicAtom {
        return None;
    }
    let pool: &[&str] = if token.text.chars().next().is_some_and(char::is_lowercase) {
        &AROMATIC_SUBSTITUTION_SYMBOLS
    } else {
        &SUBSTITUTION_SYMBOLS
    };
    let replacement = pool[rng.gen_range(0..pool.len())];
    if replacement == token.text {
        return None;
    }
    Some(Edit {
        start: token.position,
        end: token.position + token.text.len(),
        text: replacement.to_string(),
    })
}

/// Toggle the bond order immediately after this atom: an explicit `=` or
/// `#` is demoted, a plain atom-atom junction gets an `=`.
fn bond_toggle_edit(tokens: &[SmilesToken], index: usize) -> Option<Edit> {
    let next = tokens.get(index + 1)?;
    let here = &tokens[index];
    let adjacent = here.position + here.text.len() == next.position;
    if !adjacent {
        return None;
    }
    match next.kind {
        TokenKind::Bond if next.text == "=" => {
            Some(Edit { start: next.position, end: next.position + 1, text: String::new() })
        }
        TokenKind::Bond if next.text == "#" => {
            Some(Edit { start: next.position, end: next.position + 1, text: "=".to_string() })
        }
        kind if is_atom(kind) => {
            Some(Edit { start: next.position, end: next.position, text: "=".to_string() })
        }
        _ => None,
    }
}

fn append_terminal_edit(source_len: usize, rng: &mut ChaCha8Rng) -> Edit {
    let symbol = SUBSTITUTION_SYMBOLS[rng.gen_range(0..SUBSTITUTION_SYMBOLS.len())];
    Edit { start: source_len, end: source_len, text: symbol.to_string() }
}

/// Remove the final atom (and a bond character hanging onto it). Refuses
/// when the string does not end on an atom or only one atom remains.
fn delete_terminal_edit(tokens: &[SmilesToken]) -> Option<Edit> {
    let last = tokens.last()?;
    if !is_atom(last.kind) {
        return None;
    }
    if tokens.iter().filter(|t| is_atom(t.kind)).count() < 2 {
        return None;
    }
    let mut start = last.position;
    if tokens.len() >= 2 {
        let prev = &tokens[tokens.len() - 2];
        if prev.kind == TokenKind::Bond {
            start = prev.position;
        }
        if prev.kind == TokenKind::BranchOpen {
            // Deleting would leave an empty branch.
            return None;
        }
    }
    Some(Edit { start, end: last.position + last.text.len(), text: String::new() })
}

/// Open a new ring between this atom and one a few positions down the
/// string, by inserting a fresh ring-closure digit after both.
fn ring_insert_edits(
    tokens: &[SmilesToken],
    atom_token_index: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<Edit>> {
    let used: BTreeSet<&str> = tokens
        .iter()
        .filter(|t| t.kind == TokenKind::RingClosure)
        .map(|t| t.text.as_str())
        .collect();
    let label = ('1'..='9').map(|c| c.to_string()).find(|d| !used.contains(d.as_str()))?;

    let atoms: Vec<usize> = (0..tokens.len()).filter(|&i| is_atom(tokens[i].kind)).collect();
    let here = atoms.iter().position(|&i| i == atom_token_index)?;
    let span = 2 + rng.gen_range(0..3u32) as usize;
    let there = atoms.get(here + span)?;

    let after = |i: usize| tokens[i].position + tokens[i].text.len();
    Some(vec![
        Edit { start: after(atom_token_index), end: after(atom_token_index), text: label.clone() },
        Edit { start: after(*there), end: after(*there), text: label },
    ])
}

/// Delete one existing ring-closure pair (with any bond characters glued to
/// the digits).
fn ring_remove_edits(tokens: &[SmilesToken], rng: &mut ChaCha8Rng) -> Option<Vec<Edit>> {
    let closures: Vec<usize> =
        (0..tokens.len()).filter(|&i| tokens[i].kind == TokenKind::RingClosure).collect();
    if closures.is_empty() {
        return None;
    }
    // Pair occurrences by toggle order.
    let mut open: Vec<(String, usize)> = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for &i in &closures {
        let label = tokens[i].text.clone();
        if let Some(pos) = open.iter().position(|(l, _)| *l == label) {
            let (_, first) = open.remove(pos);
            pairs.push((first, i));
        } else {
            open.push((label, i));
        }
    }
    if pairs.is_empty() {
        return None;
    }
    let (a, b) = pairs[rng.gen_range(0..pairs.len())];
    let edit_for = |i: usize| {
        let mut start = tokens[i].position;
        if i > 0 && tokens[i - 1].kind == TokenKind::Bond {
            start = tokens[i - 1].position;
        }
        Edit { start, end: tokens[i].position + tokens[i].text.len(), text: String::new() }
    };
    Some(vec![edit_for(a), edit_for(b)])
}

fn apply_edits(source: &str, mut edits: Vec<Edit>) -> String {
    edits.sort_by(|a, b| b.start.cmp(&a.start).then(b.end.cmp(&a.end)));
    let mut out = source.to_string();
    let mut low = usize::MAX;
    for edit in edits {
        if edit.end > low {
            continue; // overlapping edit loses
        }
        out.replace_range(edit.start..edit.end, &edit.text);
        low = edit.start;
    }
    out
}

/// Walk the atoms of `s`; each flips a coin at `rate` and, when it fires,
/// applies one randomly chosen structural edit anchored there. The result
/// is returned unvalidated — callers discard what chemistry rejects.
pub fn mutate_smiles(s: &str, rate: f64, rng: &mut ChaCha8Rng) -> String {
    let Ok(tokens) = tokenize(s) else {
        return s.to_string();
    };
    let atom_indices: Vec<usize> = (0..tokens.len()).filter(|&i| is_atom(tokens[i].kind)).collect();
    let mut edits: Vec<Edit> = Vec::new();
    for &token_index in &atom_indices {
        if !coin(rng, rate) {
            continue;
        }
        match rng.gen_range(0..6u32) {
            0 => edits.extend(substitution_edit(&tokens[token_index], rng)),
            1 => edits.extend(bond_toggle_edit(&tokens, token_index)),
            2 => edits.push(append_terminal_edit(s.len(), rng)),
            3 => edits.extend(delete_terminal_edit(&tokens)),
            4 => edits.extend(ring_insert_edits(&tokens, token_index, rng).into_iter().flatten()),
            _ => edits.extend(ring_remove_edits(&tokens, rng).into_iter().flatten()),
        }
    }
    if edits.is_empty() {
        return s.to_string();
    }
    apply_edits(s, edits)
}

// ---------------------------------------------------------------------------
// Crossover
// ---------------------------------------------------------------------------

/// Interior positions where a string may be cut without breaking syntax:
/// outside branches and brackets, no ring label open, not splitting an atom
/// from its ring digit, and never adjacent to an explicit bond or dot.
pub fn balanced_cut_points(s: &str) -> Vec<usize> {
    let Ok(tokens) = tokenize(s) else {
        return Vec::new();
    };
    let mut cuts = Vec::new();
    let mut depth = 0i32;
    let mut open_rings: BTreeSet<&str> = BTreeSet::new();
    for (k, token) in tokens.iter().enumerate() {
        if k > 0 {
            let prev = &tokens[k - 1];
            let clean = depth == 0
                && open_rings.is_empty()
                && prev.kind != TokenKind::Bond
                && prev.kind != TokenKind::Dot
                && token.kind != TokenKind::Bond
                && token.kind != TokenKind::Dot
                && token.kind != TokenKind::RingClosure;
            if clean {
                cuts.push(token.position);
            }
        }
        match token.kind {
            TokenKind::BranchOpen => depth += 1,
            TokenKind::BranchClose => depth -= 1,
            TokenKind::RingClosure => {
                if !open_rings.remove(token.text.as_str()) {
                    open_rings.insert(token.text.as_str());
                }
            }
            _ => {}
        }
    }
    cuts
}

fn crossover_at(a: &str, b: &str, cut_a: usize, cut_b: usize) -> (String, String) {
    (format!("{}{}", &a[..cut_a], &b[cut_b..]), format!("{}{}", &b[..cut_b], &a[cut_a..]))
}

/// Exchange suffixes at randomly chosen balanced cuts. When either parent
/// has no usable interior cut the parents come back unchanged.
pub fn crossover_smiles(a: &str, b: &str, rng: &mut ChaCha8Rng) -> (String, String) {
    let cuts_a = balanced_cut_points(a);
    let cuts_b = balanced_cut_points(b);
    if cuts_a.is_empty() || cuts_b.is_empty() {
        return (a.to_string(), b.to_string());
    }
    let cut_a = cuts_a[rng.gen_range(0..cuts_a.len())];
    let cut_b = cuts_b[rng.gen_range(0..cuts_b.len())];
    crossover_at(a, b, cut_a, cut_b)
}

// ---------------------------------------------------------------------------
// The run loop
// ---------------------------------------------------------------------------

/// Canonical form plus profile for a candidate string, or `None` when
/// chemistry (or property typing) turns it away.
fn admit(smiles: &str) -> Option<(String, PropertyProfile)> {
    let molecule = validate_chemistry(smiles).molecule?;
    let profile = property_profile(&molecule).ok()?;
    Some((canonical_smiles(&molecule), profile))
}

fn evaluate<F>(candidates: &[(String, PropertyProfile)], fitness: &F) -> Result<Vec<Individual>, GaError>
where
    F: Fn(&Molecule, &PropertyProfile) -> Result<f64, String> + Sync + Send,
{
    let scored = crate::par::map_ordered(candidates, |(smiles, profile)| {
        let molecule = validate_chemistry(smiles)
            .molecule
            .expect("admitted canonical strings stay valid");
        fitness(&molecule, profile).and_then(|value| {
            if value.is_finite() {
                Ok(Individual { smiles: smiles.clone(), fitness: value, profile: profile.clone() })
            } else {
                Err(format!("non-finite fitness for {smiles}"))
            }
        })
    });
    scored.into_iter().collect::<Result<Vec<_>, _>>().map_err(GaError::Fitness)
}

fn tournament<'a>(
    population: &'a [Individual],
    size: usize,
    rng: &mut ChaCha8Rng,
) -> &'a Individual {
    let mut best = &population[rng.gen_range(0..population.len())];
    for _ in 1..size {
        let challenger = &population[rng.gen_range(0..population.len())];
        if rank(challenger, best) == std::cmp::Ordering::Greater {
            best = challenger;
        }
    }
    best
}

/// Greedy Tanimoto clustering in fitness order; the best member of each
/// cluster survives as its representative.
fn cluster_representatives(population: &[Individual], threshold: f64) -> Vec<Individual> {
    let mut sorted: Vec<&Individual> = population.iter().collect();
    sorted.sort_by(|a, b| rank(b, a));
    let mut representatives: Vec<Individual> = Vec::new();
    let mut rep_fps: Vec<crate::properties::Fingerprint> = Vec::new();
    for individual in sorted {
        let molecule = validate_chemistry(&individual.smiles)
            .molecule
            .expect("population members stay valid");
        let fp = morgan_fingerprint(&molecule, FINGERPRINT_RADIUS, FINGERPRINT_BITS);
        let merged = rep_fps
            .iter()
            .any(|r| tanimoto(r, &fp).expect("same width") > threshold);
        if !merged {
            representatives.push(individual.clone());
            rep_fps.push(fp);
        }
    }
    representatives
}

fn diversity_fraction(population: &[Individual]) -> f64 {
    let distinct: BTreeSet<&str> = population.iter().map(|i| i.smiles.as_str()).collect();
    distinct.len() as f64 / population.len() as f64
}

fn trace_row(generation: usize, population: &[Individual]) -> TraceRow {
    let best = population.iter().map(|i| i.fitness).fold(f64::NEG_INFINITY, f64::max);
    let mean = population.iter().map(|i| i.fitness).sum::<f64>() / population.len() as f64;
    TraceRow { generation, best, mean, diversity: diversity_fraction(population) }
}

/// Produce one batch of unvalidated offspring strings from two parents.
fn offspring(
    p1: &Individual,
    p2: &Individual,
    cfg: &GaConfig,
    rng: &mut ChaCha8Rng,
) -> (String, String) {
    let (x1, x2) = if coin(rng, cfg.crossover_rate) {
        crossover_smiles(&p1.smiles, &p2.smiles, rng)
    } else {
        (p1.smiles.clone(), p2.smiles.clone())
    };
    (mutate_smiles(&x1, cfg.mutation_rate, rng), mutate_smiles(&x2, cfg.mutation_rate, rng))
}

pub fn run_ga<F>(seed_pop: &[String], fitness: &F, cfg: &GaConfig) -> Result<GaOutcome, GaError>
where
    F: Fn(&Molecule, &PropertyProfile) -> Result<f64, String> + Sync + Send,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let admitted: Vec<(String, PropertyProfile)> =
        seed_pop.iter().filter_map(|s| admit(s)).collect();
    if admitted.is_empty() {
        return Err(GaError::InfeasibleSeed);
    }
    let filled: Vec<(String, PropertyProfile)> = (0..cfg.population_size)
        .map(|i| admitted[i % admitted.len()].clone())
        .collect();
    let mut population = evaluate(&filled, fitness)?;
    let mut trace = vec![trace_row(0, &population)];

    for generation in 1..=cfg.generations {
        population.sort_by(|a, b| rank(b, a));
        let elites: Vec<Individual> = population[..cfg.elite_count].to_vec();
        let target = cfg.population_size - cfg.elite_count;

        let mut pending: Vec<(String, PropertyProfile)> = Vec::with_capacity(target);
        while pending.len() < target {
            let p1 = tournament(&population, cfg.tournament_size, &mut rng).clone();
            let p2 = tournament(&population, cfg.tournament_size, &mut rng).clone();
            let mut produced = Vec::new();
            for _ in 0..OFFSPRING_RETRIES {
                let (y1, y2) = offspring(&p1, &p2, cfg, &mut rng);
                produced.extend(admit(&y1));
                produced.extend(admit(&y2));
                if !produced.is_empty() {
                    break;
                }
            }
            if produced.is_empty() {
                // Bounded retries exhausted: fall back to a parent copy.
                produced.push((p1.smiles.clone(), p1.profile.clone()));
            }
            for candidate in produced {
                if pending.len() < target {
                    pending.push(candidate);
                }
            }
        }
        let children = evaluate(&pending, fitness)?;

        let mut next: Vec<Individual> = elites;
        next.extend(children);
        debug_assert_eq!(next.len(), cfg.population_size);

        // Diversity maintenance: collapse near-duplicates, then refill with
        // fresh mutants of the representatives.
        let representatives = cluster_representatives(&next, cfg.diversity_threshold);
        if representatives.len() < cfg.population_size {
            let mut refill: Vec<(String, PropertyProfile)> = Vec::new();
            let needed = cfg.population_size - representatives.len();
            let mut source = 0usize;
            while refill.len() < needed {
                let rep = &representatives[source % representatives.len()];
                source += 1;
                let mut added = false;
                for _ in 0..OFFSPRING_RETRIES {
                    let candidate = mutate_smiles(&rep.smiles, cfg.mutation_rate.max(0.05), &mut rng);
                    if let Some(entry) = admit(&candidate) {
                        refill.push(entry);
                        added = true;
                        break;
                    }
                }
                if !added {
                    refill.push((rep.smiles.clone(), rep.profile.clone()));
                }
            }
            let refilled = evaluate(&refill, fitness)?;
            population = representatives;
            population.extend(refilled);
        } else {
            population = representatives;
        }
        assert_eq!(population.len(), cfg.population_size, "population size is restored every generation");

        let row = trace_row(generation, &population);
        debug_assert!(
            row.best >= trace.last().expect("trace is seeded").best,
            "elitism keeps the best fitness from regressing"
        );
        trace.push(row);
    }

    population.sort_by(|a, b| rank(b, a));
    Ok(GaOutcome { population, trace })
}
