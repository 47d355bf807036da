//! Release gate: one test per shipping criterion. Each test prints a single
//! `criterion N: PASS` line on success (visible with `-- --nocapture`); a
//! failing criterion fails its test, so the suite's pass/fail list is the
//! release checklist.

mod support;

use std::collections::BTreeMap;
use std::fs;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use molgate::evaluation::{
    ablation_validation, eval_corpus, inject_failures, read_corpus, AblationConfig, InjectedFault,
};
use molgate::ga::{logp_target_fitness, mutate_smiles, run_ga, GaConfig};
use molgate::llm::{HttpSender, SendError, TransportConfig};
use molgate::pipeline::{
    property_delta, run_task, run_task_with, CandidateStatus, Direction, RunOptions,
};
use molgate::properties::{
    crippen_logp, morgan_fingerprint, sa_score, tanimoto, Fingerprint,
};
use molgate::report::render_report;
use molgate::response::Protocol;
use molgate::smiles::{canonical_smiles, validate_chemistry, write_smiles_with_order};

use support::*;

fn pass(n: usize, detail: &str) {
    println!("criterion {n}: PASS — {detail}");
}

#[test]
fn criterion_1_adversarial_corpus_classified_in_full_agreement() {
    let text = fs::read_to_string(data_dir().join("adversarial.tsv")).unwrap();
    let entries: Vec<(&str, &str)> = text
        .lines()
        .map(|l| l.split_once('\t').expect("label<TAB>payload"))
        .collect();
    assert!(
        entries.len() >= 200,
        "bundled corpus must hold at least 200 strings, has {}",
        entries.len()
    );

    let started = Instant::now();
    let mismatches: Vec<String> = entries
        .iter()
        .filter_map(|(label, payload)| {
            classify_agrees(label, payload)
                .err()
                .map(|why| format!("  {label}\t{payload}: {why}"))
        })
        .collect();
    let elapsed = started.elapsed();

    assert!(
        mismatches.is_empty(),
        "{} of {} entries disagree with their label:\n{}",
        mismatches.len(),
        entries.len(),
        mismatches.join("\n")
    );
    assert!(elapsed < Duration::from_secs(1), "classification took {elapsed:?}");
    pass(
        1,
        &format!("{} labeled strings, 100% agreement in {elapsed:?}", entries.len()),
    );
}

#[test]
fn criterion_2_engineered_corpus_reproduces_the_headline_product() {
    let corpus = read_corpus(data_dir().join("corpus_table1.jsonl")).unwrap();
    assert_eq!(corpus.len(), 1000);

    let report = eval_corpus(&corpus, Protocol::Bullets).unwrap();
    assert!((report.format_adherence - 90.7).abs() < 1e-9, "{}", report.format_adherence);
    assert!((report.chemical_validity - 91.7).abs() < 1e-9, "{}", report.chemical_validity);
    assert!(
        (report.combined_success - 83.2).abs() <= 0.1,
        "combined success {} outside 83.2 ± 0.1",
        report.combined_success
    );
    assert!(
        (report.combined_success - report.format_adherence * report.chemical_validity / 100.0)
            .abs()
            < 1e-12
    );
    pass(
        2,
        &format!(
            "adherence {:.1}, validity {:.1}, combined {:.4} within 83.2 ± 0.1",
            report.format_adherence, report.chemical_validity, report.combined_success
        ),
    );
}

#[test]
fn criterion_3_validator_subsets_rank_as_expected_under_seeded_faults() {
    let base = curated_valid_corpus();

    // An uncorrupted corpus must produce no flags at full depth.
    let clean = inject_failures(&base, &BTreeMap::new(), 0);
    let clean_report = ablation_validation(&clean, AblationConfig::Full).unwrap();
    assert_eq!(clean_report.false_positive, 0.0);
    assert_eq!(clean_report.detected_invalid, 0.0);

    let mixed_rates =
        BTreeMap::from([(InjectedFault::Syntax, 0.3), (InjectedFault::Chemistry, 0.3)]);
    let chem_rates = BTreeMap::from([(InjectedFault::Chemistry, 0.5)]);

    for seed in 0..50u64 {
        let mixed = inject_failures(&base, &mixed_rates, seed);
        let faulted = mixed
            .iter()
            .filter(|r| r.labels.unwrap().injected_fault != InjectedFault::None)
            .count();
        assert!(faulted > 0, "seed {seed} corrupted nothing");

        let full = ablation_validation(&mixed, AblationConfig::Full).unwrap();
        assert_eq!(full.detected_invalid, 100.0, "seed {seed}: full depth missed a fault");
        assert_eq!(full.false_positive, 0.0, "seed {seed}: full depth flagged a clean record");

        let syntax_only = ablation_validation(&mixed, AblationConfig::SyntaxOnly).unwrap();
        let chem_only = ablation_validation(&mixed, AblationConfig::ChemistryOnly).unwrap();
        let none = ablation_validation(&mixed, AblationConfig::None).unwrap();
        assert_eq!(none.detected_invalid, 0.0);
        assert!(full.detected_invalid >= syntax_only.detected_invalid, "seed {seed}");
        assert!(full.detected_invalid >= chem_only.detected_invalid, "seed {seed}");
        assert!(chem_only.detected_invalid >= syntax_only.detected_invalid, "seed {seed}");

        // Valence faults are invisible to a syntax-only validator.
        let chem_faulted = inject_failures(&base, &chem_rates, seed);
        let syntax_view = ablation_validation(&chem_faulted, AblationConfig::SyntaxOnly).unwrap();
        assert_eq!(
            syntax_view.detected_invalid, 0.0,
            "seed {seed}: syntax layer claimed a chemistry fault"
        );
        assert_eq!(
            ablation_validation(&chem_faulted, AblationConfig::None).unwrap().detected_invalid,
            0.0
        );
    }
    pass(3, "full depth 100%/0 FP, syntax-only blind to chemistry, ordering held for 50 seeds");
}

#[test]
fn criterion_4_case_studies_replay_to_accepted_results_with_exact_folds() {
    let options = RunOptions::default();

    let celecoxib = run_task(
        &celecoxib_task(),
        &TransportConfig::replay(data_dir().join("cassettes/celecoxib.jsonl")),
        &options,
    )
    .unwrap();
    assert_eq!(
        celecoxib.status,
        CandidateStatus::Accepted,
        "celecoxib rejected: {:?}",
        celecoxib.rejection_reason
    );
    assert!(celecoxib.format.adherent);
    assert_eq!(celecoxib.anchored, Some(true));
    assert!(celecoxib.pathway_verdict.as_ref().unwrap().valid);
    let molecules: Vec<&str> = celecoxib.pathway.as_ref().unwrap().molecules().collect();
    assert_eq!(molecules, vec![CELECOXIB, CELECOXIB_MODIFIED]);

    let jak2 = run_task(
        &jak2_task(),
        &TransportConfig::replay(data_dir().join("cassettes/jak2.jsonl")),
        &options,
    )
    .unwrap();
    assert_eq!(jak2.status, CandidateStatus::Accepted, "jak2 rejected: {:?}", jak2.rejection_reason);
    assert!(jak2.format.adherent);
    assert_eq!(jak2.anchored, Some(true));
    assert!(jak2.pathway_verdict.as_ref().unwrap().valid);
    let molecules: Vec<&str> = jak2.pathway.as_ref().unwrap().molecules().collect();
    assert_eq!(molecules, vec![JAK2_START, JAK2_INTERMEDIATE, JAK2_MODIFIED]);

    let ic50 = property_delta("IC50", 250.0, 15.0, Direction::LowerIsBetter).unwrap();
    assert!((ic50.fold - 50.0 / 3.0).abs() < 1e-12);
    assert_eq!(format!("{:.1}", ic50.fold), "16.7");
    let ki = property_delta("Ki", 750.0, 50.0, Direction::LowerIsBetter).unwrap();
    assert_eq!(ki.fold, 15.0);

    pass(4, "both pathways replay to Accepted, anchored; folds 16.7x and 15.0x exact");
}

#[test]
fn criterion_5_property_oracles_and_similarity_axioms_hold() {
    let oracle = [
        ("C", 0.6361),
        ("CC", 1.0262),
        ("CCO", -0.0014),
        ("c1ccccc1", 1.6866),
        ("Cc1ccccc1", 1.99502),
        ("Oc1ccccc1", 1.3922),
        ("Nc1ccccc1", 1.2688),
        ("c1ccncc1", 1.0816),
        ("CC(=O)O", 0.3564),
        ("Clc1ccccc1", 2.34),
        ("CC(C)=O", 0.5953),
    ];
    for (smiles, expected) in oracle {
        let m = validate_chemistry(smiles).molecule.unwrap();
        let got = crippen_logp(&m).unwrap();
        assert!((got - expected).abs() < 1e-6, "{smiles}: {got} vs {expected}");
    }

    let celecoxib = validate_chemistry(CELECOXIB).molecule.unwrap();
    let logp = crippen_logp(&celecoxib).unwrap();
    assert!((logp - 3.2).abs() <= 1.5, "celecoxib logP {logp} strays past 3.2 ± 1.5");
    let sa = sa_score(&celecoxib);
    assert!((sa - 2.7).abs() <= 1.0, "celecoxib SA {sa} strays past 2.7 ± 1.0");

    // Pool: the bundled drugs plus seeded mutants of each.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut molecules = Vec::new();
    for smiles in drug_smiles() {
        molecules.push(validate_chemistry(&smiles).molecule.unwrap());
        for _ in 0..2 {
            let variant = mutate_smiles(&smiles, 0.1, &mut rng);
            if let Some(m) = validate_chemistry(&variant).molecule {
                molecules.push(m);
            }
        }
    }
    for m in &molecules {
        let sa = sa_score(m);
        assert!((1.0..=10.0).contains(&sa), "SA {sa} out of [1, 10]");
    }
    let fingerprints: Vec<Fingerprint> =
        molecules.iter().map(|m| morgan_fingerprint(m, 2, 2048)).collect();
    for fp in &fingerprints {
        assert_eq!(tanimoto(fp, fp).unwrap(), 1.0, "reflexivity");
    }
    for _ in 0..10_000 {
        let a = &fingerprints[rng.gen_range(0..fingerprints.len())];
        let b = &fingerprints[rng.gen_range(0..fingerprints.len())];
        let ab = tanimoto(a, b).unwrap();
        let ba = tanimoto(b, a).unwrap();
        assert_eq!(ab, ba, "symmetry");
        assert!((0.0..=1.0).contains(&ab), "bounds: {ab}");
    }
    pass(
        5,
        &format!(
            "11 logP oracles at 1e-6; celecoxib logP {logp:.2}, SA {sa:.2}; 10k similarity pairs"
        ),
    );
}

#[test]
fn criterion_6_validation_is_total_and_rewriting_preserves_the_canonical_form() {
    // Time-budgeted fuzz: default a few seconds for CI, raise FUZZ_SECONDS
    // (e.g. to 3600) for a soak run.
    let budget = std::env::var("FUZZ_SECONDS")
        .ok()
        .and_then(|v| v.parse::<u64>().ok())
        .unwrap_or(5);
    let deadline = Instant::now() + Duration::from_secs(budget);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let alphabet: Vec<char> = "CNOSPFIBclnos123456789()[]=#-+@/\\%.*rH".chars().collect();
    let mut probes = 0u64;
    let mut parsed = 0u64;
    while Instant::now() < deadline {
        for _ in 0..500 {
            let raw_len = rng.gen_range(0..60);
            let bytes: Vec<u8> = (0..raw_len).map(|_| rng.gen()).collect();
            let garbage = String::from_utf8_lossy(&bytes).into_owned();
            let structured_len = rng.gen_range(1..40);
            let structured: String =
                (0..structured_len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
            for probe in [garbage, structured] {
                // Totality: a panic here fails the test.
                let verdict = validate_chemistry(&probe);
                if let Some(m) = verdict.molecule {
                    let sa = sa_score(&m);
                    assert!((1.0..=10.0).contains(&sa), "{probe:?}: SA {sa}");
                    let canon = canonical_smiles(&m);
                    let reparsed = validate_chemistry(&canon);
                    assert!(reparsed.ok, "{probe:?}: canonical form {canon:?} failed to re-parse");
                    assert_eq!(
                        canonical_smiles(&reparsed.molecule.unwrap()),
                        canon,
                        "{probe:?}: canonical form is not a fixed point"
                    );
                    parsed += 1;
                }
                probes += 1;
            }
        }
    }

    let drugs = drug_smiles();
    assert!(drugs.len() >= 50, "bundled corpus must hold at least 50 drugs");
    for smiles in drugs.iter().take(50) {
        let m = validate_chemistry(smiles).molecule.unwrap();
        let base = canonical_smiles(&m);
        let mut ranks: Vec<usize> = (0..m.atoms.len()).collect();
        for _ in 0..100 {
            ranks.shuffle(&mut rng);
            let variant = write_smiles_with_order(&m, &ranks);
            let verdict = validate_chemistry(&variant);
            assert!(verdict.ok, "{smiles}: rewriting produced invalid {variant}");
            assert_eq!(
                canonical_smiles(&verdict.molecule.unwrap()),
                base,
                "{smiles}: {variant} canonicalized differently"
            );
        }
    }
    pass(
        6,
        &format!("{probes} fuzz probes ({parsed} parsed) without faults; 50 drugs x 100 rewritings round-trip"),
    );
}

#[test]
fn criterion_7_ga_holds_its_invariants_at_default_and_desk_scale() {
    let drugs = drug_smiles();
    let fitness = logp_target_fitness(2.5);

    let defaults = GaConfig::default();
    assert_eq!(
        (defaults.population_size, defaults.tournament_size, defaults.elite_count, defaults.generations),
        (500, 3, 10, 50)
    );
    assert_eq!(
        (defaults.mutation_rate, defaults.crossover_rate, defaults.seed, defaults.diversity_threshold),
        (0.02, 0.8, 0, 0.9)
    );

    let desk_cfg =
        GaConfig { population_size: 100, generations: 20, seed: 5, ..GaConfig::default() };
    let desk_started = Instant::now();
    let desk = run_ga(&drugs, &fitness, &desk_cfg).unwrap();
    let desk_elapsed = desk_started.elapsed();
    assert!(desk_elapsed < Duration::from_secs(60), "desk-scale run took {desk_elapsed:?}");
    assert_eq!(desk.population.len(), 100);

    // Default scale. The loop re-asserts the population size at the end of
    // every generation, so a completed run certifies the size invariant for
    // all fifty.
    let full_started = Instant::now();
    let full = run_ga(&drugs, &fitness, &defaults).unwrap();
    let full_elapsed = full_started.elapsed();
    assert_eq!(full.trace.len(), defaults.generations + 1);
    for pair in full.trace.windows(2) {
        assert!(
            pair[1].best >= pair[0].best,
            "best fitness regressed at generation {}",
            pair[1].generation
        );
    }
    assert_eq!(full.population.len(), 500);
    for member in &full.population {
        let verdict = validate_chemistry(&member.smiles);
        assert!(verdict.ok, "population member {} is invalid", member.smiles);
        assert_eq!(
            canonical_smiles(&verdict.molecule.unwrap()),
            member.smiles,
            "population members are stored canonical"
        );
        assert!(member.fitness.is_finite());
    }

    let again = run_ga(&drugs, &fitness, &defaults).unwrap();
    assert_eq!(
        serde_json::to_string(&full).unwrap(),
        serde_json::to_string(&again).unwrap(),
        "same seed must reproduce the identical outcome"
    );
    pass(
        7,
        &format!(
            "defaults hold over 50 generations in {full_elapsed:.1?}, reproducible; desk scale in {desk_elapsed:.1?}"
        ),
    );
}

#[test]
fn criterion_8_report_renders_byte_identical_with_two_images() {
    let transport = TransportConfig::replay(data_dir().join("cassettes/celecoxib.jsonl"));
    let options = RunOptions::default();

    let first_run = run_task(&celecoxib_task(), &transport, &options).unwrap();
    assert_eq!(first_run.status, CandidateStatus::Accepted);
    let second_run = run_task(&celecoxib_task(), &transport, &options).unwrap();

    let first = render_report(&first_run).unwrap();
    let second = render_report(&second_run).unwrap();
    assert_eq!(first.html, second.html, "two renders must be byte-identical");
    assert_eq!(first.images.len(), 2, "three-step pathway depicts its two molecules");
    assert_eq!(first.step_count, 2);
    assert!(first.html.contains(CELECOXIB), "starting structure missing verbatim");
    assert!(first.html.contains(CELECOXIB_MODIFIED), "modified structure missing verbatim");
    pass(
        8,
        &format!("byte-identical HTML ({} bytes), 2 images, both structures verbatim", first.html.len()),
    );
}

struct CountingSender {
    hits: AtomicUsize,
    reply: Option<String>,
}

impl CountingSender {
    fn silent() -> Self {
        CountingSender { hits: AtomicUsize::new(0), reply: None }
    }

    fn with_reply(text: &str) -> Self {
        CountingSender { hits: AtomicUsize::new(0), reply: Some(text.to_string()) }
    }
}

impl HttpSender for CountingSender {
    fn send(
        &self,
        _endpoint: &str,
        _body: &str,
        _api_key: Option<&str>,
        _timeout: Duration,
    ) -> Result<String, SendError> {
        self.hits.fetch_add(1, Ordering::SeqCst);
        match &self.reply {
            Some(text) => Ok(serde_json::json!({
                "choices": [{"message": {"content": text}}]
            })
            .to_string()),
            None => Err(SendError::Fatal("this test expects no transport traffic".to_string())),
        }
    }
}

#[test]
fn criterion_9_rejected_input_never_touches_the_transport() {
    let transport = TransportConfig::http("http://unused.invalid/v1/chat");
    let options = RunOptions::default();

    // A syntactically broken starting molecule is turned away at stage 1.
    let sender = CountingSender::silent();
    let mut task = celecoxib_task();
    task.start_smiles = "C1CC(".to_string();
    let result = run_task_with(&task, &transport, &options, &sender).unwrap();
    assert_eq!(result.status, CandidateStatus::RejectedInput);
    assert_eq!(sender.hits.load(Ordering::SeqCst), 0, "transport touched for invalid input");
    assert!(result.raw.text.is_empty());
    assert!(result.start_profile.is_none());
    assert!(result.pathway.is_none());
    assert!(result.pathway_verdict.is_none());
    assert!(result.anchored.is_none());
    assert!(result.final_profile.is_none());
    assert!(result.similarity.is_none());

    // Valid chemistry without a computable property profile is also input.
    let sender = CountingSender::silent();
    let mut task = celecoxib_task();
    task.start_smiles = "B".to_string();
    let result = run_task_with(&task, &transport, &options, &sender).unwrap();
    assert_eq!(result.status, CandidateStatus::RejectedInput);
    assert_eq!(sender.hits.load(Ordering::SeqCst), 0, "transport touched for untypable input");

    // Stage ordering: a healthy input makes exactly one request, and a
    // prose reply stops at the format stage with the later stages unset.
    let sender = CountingSender::with_reply("I would try adding a methyl group.");
    let result = run_task_with(&celecoxib_task(), &transport, &options, &sender).unwrap();
    assert_eq!(sender.hits.load(Ordering::SeqCst), 1);
    assert_eq!(result.status, CandidateStatus::RejectedFormat);
    assert!(result.start_profile.is_some(), "input stage ran before transport");
    assert!(!result.raw.text.is_empty(), "transport stage ran before format checking");
    assert!(result.pathway.is_none());
    assert!(result.anchored.is_none());
    assert!(result.final_profile.is_none());

    pass(9, "rejected inputs made zero requests; stage order held under instrumentation");
}
