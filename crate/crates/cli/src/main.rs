//! Command-line surface binding the library workflows into one binary.
//!
//! Exit codes form a small taxonomy so shell pipelines can tell an expected
//! negative result from a broken run: 0 = success, 1 = validation rejection,
//! 2 = usage error (including malformed input documents), 3 = transport or
//! IO fault. Stdout carries exactly one machine-readable document per
//! invocation; human-oriented detail goes to stderr.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use molgate::evaluation::{
    ablation_validation, eval_corpus, inject_failures, read_corpus, AblationConfig, EvalError,
    InjectedFault,
};
use molgate::ga::{logp_target_fitness, read_ga_config, run_ga, trace_csv, GaConfig, GaError};
use molgate::llm::TransportConfig;
use molgate::pathway::{validate_pathway, SynthesisPathway};
use molgate::pipeline::{
    run_task, CandidateResult, CandidateStatus, DesignTask, ObjectiveKind, RunOptions,
};
use molgate::prompts::{PromptProtocol, PromptTemplate, PromptVersion};
use molgate::properties::property_profile;
use molgate::report::render_report;
use molgate::smiles::{canonical_smiles, validate_chemistry, validate_syntax};

#[derive(Parser)]
#[command(
    name = "molgate",
    version,
    about = "Validate, score, and evolve machine-proposed molecular designs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check inputs at syntax, chemistry, or pathway depth.
    Validate(ValidateArgs),
    /// Parse SMILES into the molecular graph document.
    Parse(InputSource),
    /// Compute the property profile for molecules.
    Props(InputSource),
    /// Run one design task through the gated pipeline.
    Run(RunArgs),
    /// Score a response corpus; optionally inject faults and measure detection.
    Eval(EvalArgs),
    /// Evolve molecules with the genetic-algorithm baseline.
    Ga(GaArgs),
    /// Render an accepted candidate as a standalone HTML page.
    Report(ReportArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct InputSource {
    /// One inline input.
    #[arg(long)]
    smiles: Option<String>,
    /// File with one entry per line (SMILES with an optional tab-separated
    /// name; pathway level expects one JSON pathway per line).
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    input: InputSource,
    /// Depth of checking applied to every entry.
    #[arg(long, value_enum, default_value_t = Level::Syntax)]
    level: Level,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Level {
    Syntax,
    Chem,
    Pathway,
}

#[derive(Args)]
struct RunArgs {
    /// Starting molecule.
    #[arg(long)]
    smiles: String,
    /// Design objective, phrased for the model.
    #[arg(long)]
    objective: String,
    #[arg(long, value_enum, default_value_t = KindArg::TargetAffinity)]
    objective_kind: KindArg,
    #[arg(long, value_enum, default_value_t = VersionArg::V4)]
    prompt_version: VersionArg,
    /// Template file, required with --prompt-version custom.
    #[arg(long)]
    template: Option<PathBuf>,
    /// Answer protocol the custom template asks for.
    #[arg(long, value_enum, default_value_t = ProtocolArg::Bullets)]
    template_protocol: ProtocolArg,
    /// http | http:<url> | replay:<cassette> | record:<cassette>
    #[arg(long, default_value = "http")]
    transport: String,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    max_tokens: Option<u32>,
    /// Also write the result document here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write an HTML report here (accepted candidates only).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VersionArg {
    V1,
    V2,
    V3,
    V4,
    V5,
    Custom,
}

impl From<VersionArg> for PromptVersion {
    fn from(v: VersionArg) -> Self {
        match v {
            VersionArg::V1 => PromptVersion::V1,
            VersionArg::V2 => PromptVersion::V2,
            VersionArg::V3 => PromptVersion::V3,
            VersionArg::V4 => PromptVersion::V4,
            VersionArg::V5 => PromptVersion::V5,
            VersionArg::Custom => PromptVersion::Custom,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    TargetAffinity,
    Selectivity,
    Solubility,
    MetabolicStability,
    BbbPenetration,
    SyntheticAccessibility,
}

impl From<KindArg> for ObjectiveKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::TargetAffinity => ObjectiveKind::TargetAffinity,
            KindArg::Selectivity => ObjectiveKind::Selectivity,
            KindArg::Solubility => ObjectiveKind::Solubility,
            KindArg::MetabolicStability => ObjectiveKind::MetabolicStability,
            KindArg::BbbPenetration => ObjectiveKind::BbbPenetration,
            KindArg::SyntheticAccessibility => ObjectiveKind::SyntheticAccessibility,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Freeform,
    Bullets,
    Json,
}

impl From<ProtocolArg> for PromptProtocol {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::Freeform => PromptProtocol::Freeform,
            ProtocolArg::Bullets => PromptProtocol::Bullets,
            ProtocolArg::Json => PromptProtocol::Json,
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    /// Response corpus, one JSON record per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Fault-injection spec, e.g. "syntax=0.3,chemistry=0.2,format=0.1".
    #[arg(long)]
    inject: Option<String>,
    /// RNG seed for --inject.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Score detection against injection labels with this validator subset.
    #[arg(long, value_enum)]
    ablation: Option<AblationArg>,
    /// Response protocol used when scoring without --ablation.
    #[arg(long, value_enum, default_value_t = ProtocolArg::Bullets)]
    protocol: ProtocolArg,
    /// Also write the metrics document here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AblationArg {
    Full,
    Syntax,
    Chemistry,
    None,
}

impl From<AblationArg> for AblationConfig {
    fn from(a: AblationArg) -> Self {
        match a {
            AblationArg::Full => AblationConfig::Full,
            AblationArg::Syntax => AblationConfig::SyntaxOnly,
            AblationArg::Chemistry => AblationConfig::ChemistryOnly,
            AblationArg::None => AblationConfig::None,
        }
    }
}

#[derive(Args)]
struct GaArgs {
    /// Seed population, one SMILES per line.
    #[arg(long)]
    seeds: PathBuf,
    /// JSON config; absent fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// The built-in fitness pulls logP toward this value.
    #[arg(long, default_value_t = 2.5)]
    target_logp: f64,
    /// Write the per-generation trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Also write the outcome document here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Candidate result document produced by `run`.
    #[arg(long)]
    result: PathBuf,
    /// HTML output path; without it the page itself goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A command failure: message for stderr plus the exit code it maps to.
#[derive(Debug)]
struct Fail {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Fail {
    Fail { code, message: message.into() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate(args) => cmd_validate(&args),
        Command::Parse(input) => cmd_per_entry(&input, true, &parse_doc),
        Command::Props(input) => cmd_per_entry(&input, true, &props_doc),
        Command::Run(args) => cmd_run(&args),
        Command::Eval(args) => cmd_eval(&args),
        Command::Ga(args) => cmd_ga(&args),
        Command::Report(args) => cmd_report(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Print the single machine-readable document, mirroring it to `out`.
fn emit(doc: &Value, out: Option<&Path>) -> Result<(), Fail> {
    let text = serde_json::to_string_pretty(doc).map_err(|e| fail(3, e.to_string()))?;
    println!("{text}");
    if let Some(path) = out {
        fs::write(path, format!("{text}\n"))
            .map_err(|e| fail(3, format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

/// Entries from an input file: trimmed non-blank lines, with the optional
/// tab-separated name column dropped unless the line is a JSON document.
fn read_entries(path: &Path, split_tabs: bool) -> Result<Vec<String>, Fail> {
    let text =
        fs::read_to_string(path).map_err(|e| fail(3, format!("{}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|line| !line.is_empty())
        .map(|line| {
            if split_tabs {
                line.split('\t').next().unwrap_or("").to_string()
            } else {
                line.to_string()
            }
        })
        .collect())
}

/// Shared shape of validate/parse/props: one verdict document per entry,
/// file batches processed in parallel with ordered assembly, exit 0 iff
/// every entry passed.
fn cmd_per_entry(
    input: &InputSource,
    split_tabs: bool,
    per_entry: &(dyn Fn(&str) -> (bool, Value) + Sync),
) -> Result<u8, Fail> {
    let (all_ok, doc) = match (&input.smiles, &input.file) {
        (Some(s), None) => {
            let (ok, doc) = per_entry(s.trim());
            (ok, doc)
        }
        (None, Some(path)) => {
            let entries = read_entries(path, split_tabs)?;
            let results = molgate::par::map_ordered(&entries, |e| per_entry(e));
            let all_ok = results.iter().all(|(ok, _)| *ok);
            (all_ok, Value::Array(results.into_iter().map(|(_, d)| d).collect()))
        }
        _ => return Err(fail(2, "exactly one of --smiles or --file is required")),
    };
    emit(&doc, None)?;
    Ok(if all_ok { 0 } else { 1 })
}

fn cmd_validate(args: &ValidateArgs) -> Result<u8, Fail> {
    let level = args.level;
    cmd_per_entry(&args.input, level != Level::Pathway, &move |entry| {
        verdict_doc(entry, level)
    })
}

fn verdict_doc(entry: &str, level: Level) -> (bool, Value) {
    match level {
        Level::Syntax => {
            let v = validate_syntax(entry);
            let messages: Vec<String> = v.message.iter().map(|m| m.to_string()).collect();
            (
                v.ok,
                json!({
                    "input": entry,
                    "level": "syntax",
                    "valid": v.ok,
                    "messages": messages,
                    "position": v.position,
                }),
            )
        }
        Level::Chem => {
            let v = validate_chemistry(entry);
            let messages: Vec<String> = v.message.iter().cloned().collect();
            (
                v.ok,
                json!({"input": entry, "level": "chem", "valid": v.ok, "messages": messages}),
            )
        }
        Level::Pathway => match serde_json::from_str::<SynthesisPathway>(entry) {
            Err(e) => (
                false,
                json!({
                    "input": entry,
                    "level": "pathway",
                    "valid": false,
                    "messages": [format!("invalid pathway JSON: {e}")],
                }),
            ),
            Ok(pathway) => {
                let v = validate_pathway(&pathway);
                (
                    v.valid,
                    json!({
                        "input": entry,
                        "level": "pathway",
                        "valid": v.valid,
                        "messages": v.messages,
                    }),
                )
            }
        },
    }
}

fn parse_doc(s: &str) -> (bool, Value) {
    let v = validate_chemistry(s);
    match v.molecule {
        Some(m) => (
            true,
            json!({
                "input": s,
                "valid": true,
                "canonical": canonical_smiles(&m),
                "molecule": m,
            }),
        ),
        None => (false, json!({"input": s, "valid": false, "error": v.message})),
    }
}

fn props_doc(s: &str) -> (bool, Value) {
    let v = validate_chemistry(s);
    let Some(m) = v.molecule else {
        return (false, json!({"input": s, "valid": false, "error": v.message}));
    };
    match property_profile(&m) {
        Ok(p) => (true, json!({"input": s, "valid": true, "properties": p})),
        Err(e) => (false, json!({"input": s, "valid": false, "error": e.to_string()})),
    }
}

/// Transport flag grammar. Bare `http` (and `record:`) leave the endpoint
/// to the MOLGATE_LLM_ENDPOINT environment variable.
fn parse_transport(spec: &str) -> Result<TransportConfig, Fail> {
    if spec == "http" {
        let mut cfg = TransportConfig::http("");
        cfg.endpoint = None;
        return Ok(cfg);
    }
    if spec.starts_with("http://") || spec.starts_with("https://") {
        return Ok(TransportConfig::http(spec));
    }
    if let Some(rest) = spec.strip_prefix("http:") {
        if !rest.is_empty() {
            return Ok(TransportConfig::http(rest));
        }
    }
    if let Some(rest) = spec.strip_prefix("replay:") {
        if !rest.is_empty() {
            return Ok(TransportConfig::replay(rest));
        }
    }
    if let Some(rest) = spec.strip_prefix("record:") {
        if !rest.is_empty() {
            let mut cfg = TransportConfig::record("", rest);
            cfg.endpoint = None;
            return Ok(cfg);
        }
    }
    Err(fail(
        2,
        format!("bad --transport '{spec}': expected http, http:<url>, replay:<path>, or record:<path>"),
    ))
}

fn cmd_run(args: &RunArgs) -> Result<u8, Fail> {
    let transport = parse_transport(&args.transport)?;
    let mut options = RunOptions::default();
    if let Some(model) = &args.model {
        options.model = model.clone();
    }
    if let Some(t) = args.temperature {
        options.temperature = t;
    }
    if let Some(m) = args.max_tokens {
        options.max_tokens = m;
    }

    let version = PromptVersion::from(args.prompt_version);
    match (&args.template, version) {
        (Some(path), PromptVersion::Custom) => {
            let template = PromptTemplate::from_file(path, args.template_protocol.into())
                .map_err(|e| fail(3, e.to_string()))?;
            options.custom_template = Some(template);
        }
        (None, PromptVersion::Custom) => {
            return Err(fail(2, "--prompt-version custom requires --template"));
        }
        (Some(_), _) => {
            return Err(fail(2, "--template requires --prompt-version custom"));
        }
        (None, _) => {}
    }

    let task = DesignTask {
        start_smiles: args.smiles.clone(),
        objective: args.objective.clone(),
        objective_kind: args.objective_kind.into(),
        prompt_version: version,
    };
    let result = run_task(&task, &transport, &options).map_err(|e| fail(3, e.to_string()))?;

    let doc = serde_json::to_value(&result).map_err(|e| fail(3, e.to_string()))?;
    emit(&doc, args.out.as_deref())?;
    eprintln!("status: {:?}", result.status);
    if let Some(reason) = &result.rejection_reason {
        eprintln!("reason: {reason}");
    }

    if let Some(path) = &args.report {
        match render_report(&result) {
            Some(page) => fs::write(path, page.html)
                .map_err(|e| fail(3, format!("{}: {e}", path.display())))?,
            None => eprintln!("note: rejected candidates have nothing to render"),
        }
    }

    Ok(if result.status == CandidateStatus::Accepted { 0 } else { 1 })
}

fn eval_fail(e: EvalError) -> Fail {
    match e {
        EvalError::EmptyCorpus => fail(2, "corpus contains no records"),
        EvalError::Parse { line, reason } => fail(2, format!("corpus line {line}: {reason}")),
        EvalError::MissingLabels(id) => {
            fail(2, format!("record {id} lacks injection labels; run with --inject"))
        }
        EvalError::Io(reason) => fail(3, reason),
    }
}

/// Parse "kind=rate,kind=rate" injection specs.
fn parse_inject(spec: &str) -> Result<BTreeMap<InjectedFault, f64>, Fail> {
    let mut rates = BTreeMap::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let Some((kind, rate)) = part.split_once('=') else {
            return Err(fail(2, format!("bad injection term '{part}': expected kind=rate")));
        };
        let kind = match kind.trim() {
            "syntax" => InjectedFault::Syntax,
            "chemistry" => InjectedFault::Chemistry,
            "format" => InjectedFault::Format,
            other => return Err(fail(2, format!("unknown fault kind '{other}'"))),
        };
        let rate: f64 = rate
            .trim()
            .parse()
            .map_err(|_| fail(2, format!("bad rate in '{part}'")))?;
        if !(0.0..=1.0).contains(&rate) {
            return Err(fail(2, format!("rate must lie in [0,1], got {rate}")));
        }
        rates.insert(kind, rate);
    }
    if rates.is_empty() {
        return Err(fail(2, "empty injection spec"));
    }
    Ok(rates)
}

fn cmd_eval(args: &EvalArgs) -> Result<u8, Fail> {
    let corpus = read_corpus(&args.corpus).map_err(eval_fail)?;
    let corpus = match &args.inject {
        Some(spec) => inject_failures(&corpus, &parse_inject(spec)?, args.seed),
        None => corpus,
    };
    let report = match args.ablation {
        Some(a) => ablation_validation(&corpus, a.into()).map_err(eval_fail)?,
        None => {
            let protocol = PromptProtocol::from(args.protocol).measurement_protocol();
            eval_corpus(&corpus, protocol).map_err(eval_fail)?
        }
    };
    eprintln!("{}", report.text_table());
    let doc = serde_json::to_value(&report).map_err(|e| fail(3, e.to_string()))?;
    emit(&doc, args.out.as_deref())?;
    Ok(0)
}

fn ga_fail(e: GaError) -> Fail {
    match e {
        GaError::InfeasibleSeed | GaError::Fitness(_) => fail(1, e.to_string()),
        GaError::InvalidConfig(_) => fail(2, e.to_string()),
        GaError::Io(reason) => fail(3, reason),
    }
}

fn cmd_ga(args: &GaArgs) -> Result<u8, Fail> {
    let mut cfg = match &args.config {
        Some(path) => read_ga_config(path).map_err(ga_fail)?,
        None => GaConfig::default(),
    };
    if let Some(v) = args.population {
        cfg.population_size = v;
    }
    if let Some(v) = args.generations {
        cfg.generations = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    cfg.validate().map_err(ga_fail)?;

    let seeds = read_entries(&args.seeds, true)?;
    let fitness = logp_target_fitness(args.target_logp);
    let outcome = run_ga(&seeds, &fitness, &cfg).map_err(ga_fail)?;

    if let Some(path) = &args.trace {
        fs::write(path, trace_csv(&outcome.trace))
            .map_err(|e| fail(3, format!("{}: {e}", path.display())))?;
    }
    let best = outcome.best();
    eprintln!(
        "best fitness {:.6} after {} generations: {}",
        best.fitness, cfg.generations, best.smiles
    );
    let doc = serde_json::to_value(&outcome).map_err(|e| fail(3, e.to_string()))?;
    emit(&doc, args.out.as_deref())?;
    Ok(0)
}

fn cmd_report(args: &ReportArgs) -> Result<u8, Fail> {
    let text = fs::read_to_string(&args.result)
        .map_err(|e| fail(3, format!("{}: {e}", args.result.display())))?;
    let result: CandidateResult = serde_json::from_str(&text)
        .map_err(|e| fail(2, format!("{}: {e}", args.result.display())))?;
    let Some(page) = render_report(&result) else {
        return Err(fail(1, "result carries no renderable pathway"));
    };
    match &args.out {
        Some(path) => {
            fs::write(path, &page.html)
                .map_err(|e| fail(3, format!("{}: {e}", path.display())))?;
            emit(
                &json!({
                    "path": path,
                    "images": page.images.len(),
                    "step_count": page.step_count,
                }),
                None,
            )?;
        }
        None => println!("{}", page.html),
    }
    Ok(0)
}
