//! Subcommand definitions, flag parsing and command execution.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use san_core::eval::{
    link_eval_candidates, run_attribute_experiment, run_iterative_experiment,
    run_link_experiment, trial_seed, AttributeMethod, AttributeParams, GridSpec, IterativeParams,
    LinkParams, Metric, MetricsReport, ReportRow, ScorerTemplate,
};
use san_core::ingest::{run_ingest, EdgeSet, IngestOptions, Manifest, RawSnapshotEntry};
use san_core::labels::{LabelParams, NegativeMode, Scope, Task};
use san_core::scorers::{score_candidates, RwwrParams, ScorerSpec};
use san_core::supervised::{slp_pipeline, SaiFeatureParams, SaiParams, SlpParams, Variant};
use san_core::synth::{generate, GeneratorParams};
use san_core::{Error, Result, Snapshot};

use crate::config::ExperimentConfig;

/// Social-attribute network experiments: ingest or generate snapshot
/// triples, predict links, infer attributes, and run the iterative
/// infer-then-predict pipeline.
#[derive(Debug, Parser)]
#[command(name = "san", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Preprocess raw crawl files into canonical snapshot files.
    Ingest(IngestArgs),
    /// Generate a synthetic snapshot triple with planted structure.
    Generate(GenerateArgs),
    /// Link prediction: grid search on the validation transition, then
    /// test AUC with and without attributes.
    Predict(ExperimentFlags),
    /// Attribute inference with mutex post-processing (AUC, Pre@K).
    Infer(ExperimentFlags),
    /// Iterative pipeline: hide attributes, infer them back, then
    /// predict links without / with remaining / with inferred attributes.
    Iterate(ExperimentFlags),
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// JSON list of raw snapshot entries
    /// `{label, ordinal, edge_file, attribute_file}`; paths are relative
    /// to this file.
    #[arg(long)]
    raw: PathBuf,
    /// Mutually exclusive attribute pairs (TSV `a \t b`).
    #[arg(long)]
    mutex: Option<PathBuf>,
    /// Minimum distinct-user positive frequency for the vocabulary.
    #[arg(long = "min-freq", default_value_t = 3)]
    min_freq: usize,
    /// Minimum distinct positive attributes per core node.
    #[arg(long = "core-k", default_value_t = 4)]
    core_k: usize,
    /// Output directory for the canonical files.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Generator parameter file (JSON); defaults are desk-scale.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Override the homophily strength, in [0, 1].
    #[arg(long)]
    homophily: Option<f64>,
    /// Override the number of communities.
    #[arg(long)]
    communities: Option<usize>,
    /// Override the nodes per community.
    #[arg(long = "community-size")]
    community_size: Option<usize>,
    /// Override the planted growth links per snapshot transition.
    #[arg(long = "new-links")]
    new_links: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: u64,
    /// Output directory for the snapshot files.
    #[arg(long)]
    out: PathBuf,
}

/// Flags shared by the experiment commands. Every flag overrides the
/// corresponding field of `--config` when both are given.
#[derive(Debug, Args)]
struct ExperimentFlags {
    /// Load a complete run configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Snapshot manifest produced by `ingest` or `generate`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Training snapshot label.
    #[arg(long)]
    train: Option<String>,
    /// Hyperparameter-selection snapshot label.
    #[arg(long)]
    validate: Option<String>,
    /// Evaluation snapshot label.
    #[arg(long)]
    test: Option<String>,
    /// Prediction task: links | attributes.
    #[arg(long)]
    task: Option<String>,
    /// Candidate scope: hop2cat1 | anyhop | cat1 | cat1and2.
    #[arg(long)]
    scope: Option<String>,
    /// Negative sampling: exhaustive | capped:RATIO.
    #[arg(long)]
    negatives: Option<String>,
    /// Social edge set: observed | backfilled.
    #[arg(long)]
    edges: Option<String>,
    /// Scorer, repeatable: name[:param] with rank for the factorizations
    /// and the restart probability for the walk, e.g. cn, lra:100,
    /// rwwr:0.7.
    #[arg(long = "scorer")]
    scorers: Vec<String>,
    /// Full grid override: "ranks=100,1000;alphas=0.5,0.7;lambdas=0.01".
    #[arg(long)]
    grid: Option<String>,
    /// Restart-probability grid, comma-separated.
    #[arg(long)]
    alpha: Option<String>,
    /// Factorization-rank grid, comma-separated.
    #[arg(long)]
    ranks: Option<String>,
    /// Supervised feature set: slp1 | slp2 | slpsan3 | slpsan6.
    #[arg(long)]
    variant: Option<String>,
    /// Evaluation trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Fraction of users whose attributes are hidden per trial.
    #[arg(long = "sample-frac")]
    sample_frac: Option<f64>,
    /// Attributes inferred per hidden user.
    #[arg(long)]
    topk: Option<usize>,
    /// Pre@K cutoffs, comma-separated.
    #[arg(long)]
    ks: Option<String>,
    /// Also run the supervised attribute-inference method.
    #[arg(long)]
    sai: bool,
    /// Infer→augment rounds (more than one is experimental).
    #[arg(long)]
    iterations: Option<usize>,
    /// Master seed (mandatory unless --config provides one).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-candidate score CSVs for the chosen configurations.
    #[arg(long = "dump-scores")]
    dump_scores: bool,
}

/// Entry point after clap parsing; maps every failure to an exit code via
/// [`Error::kind`].
pub fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Ingest(args) => cmd_ingest(&args),
        Command::Generate(args) => cmd_generate(&args),
        Command::Predict(flags) => {
            let (config, dump) = resolve(&flags, CommandKind::Predict)?;
            cmd_predict(&config, dump)
        }
        Command::Infer(flags) => {
            let (config, _) = resolve(&flags, CommandKind::Infer)?;
            cmd_infer(&config)
        }
        Command::Iterate(flags) => {
            let (config, _) = resolve(&flags, CommandKind::Iterate)?;
            cmd_iterate(&config)
        }
    }
}

/// Honour `SAN_THREADS` before any parallel work starts.
fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var("SAN_THREADS") {
        let threads: usize = value.trim().parse().map_err(|_| {
            Error::parse(
                "SAN_THREADS",
                None,
                format!("not a thread count: {value:?}"),
            )
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::precondition(format!("thread pool: {e}")))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Flag parsing

fn parse_task(s: &str) -> Result<Task> {
    match s {
        "links" => Ok(Task::SocialLink),
        "attributes" => Ok(Task::AttributeLink),
        other => Err(Error::parse(
            "--task",
            None,
            format!("expected links or attributes, got {other:?}"),
        )),
    }
}

fn parse_negatives(s: &str) -> Result<NegativeMode> {
    if s == "exhaustive" {
        return Ok(NegativeMode::Exhaustive);
    }
    if let Some(ratio) = s.strip_prefix("capped:") {
        let ratio: f64 = ratio
            .parse()
            .map_err(|_| Error::parse("--negatives", None, format!("bad ratio {ratio:?}")))?;
        return Ok(NegativeMode::Capped { ratio });
    }
    Err(Error::parse(
        "--negatives",
        None,
        format!("expected exhaustive or capped:RATIO, got {s:?}"),
    ))
}

fn parse_edges(s: &str) -> Result<EdgeSet> {
    match s {
        "observed" => Ok(EdgeSet::Observed),
        "backfilled" => Ok(EdgeSet::Backfilled),
        other => Err(Error::parse(
            "--edges",
            None,
            format!("expected observed or backfilled, got {other:?}"),
        )),
    }
}

fn parse_list<T: FromStr>(flag: &str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|item| {
            item.trim()
                .parse::<T>()
                .map_err(|_| Error::parse(flag, None, format!("bad list item {item:?}")))
        })
        .collect()
}

/// `name[:param]` → a full scorer spec. The parameter is the rank for the
/// factorizations and the restart probability for the walk; the defaults
/// are rank 100 and α = 0.7.
fn parse_scorer(s: &str, seed: u64) -> Result<ScorerSpec> {
    let (name, param) = match s.split_once(':') {
        Some((name, param)) => (name, Some(param)),
        None => (s, None),
    };
    let rank = |param: Option<&str>| -> Result<usize> {
        match param {
            None => Ok(100),
            Some(p) => p
                .parse()
                .map_err(|_| Error::parse("--scorer", None, format!("bad rank {p:?} in {s:?}"))),
        }
    };
    let spec = match name {
        "random" => ScorerSpec::Random { seed },
        "cn" | "common_neighbors" => ScorerSpec::CommonNeighbors,
        "aa" | "adamic_adar" => ScorerSpec::AdamicAdar,
        "lra" | "low_rank" => ScorerSpec::LowRank {
            rank: rank(param)?,
            seed,
        },
        "cn_lra" | "cn_low_rank" => ScorerSpec::CnLowRank {
            rank: rank(param)?,
            seed,
        },
        "aa_lra" | "aa_low_rank" => ScorerSpec::AaLowRank {
            rank: rank(param)?,
            seed,
        },
        "rwwr" | "random_walk_restart" => {
            let alpha = match param {
                None => 0.7,
                Some(p) => p.parse().map_err(|_| {
                    Error::parse("--scorer", None, format!("bad alpha {p:?} in {s:?}"))
                })?,
            };
            ScorerSpec::RandomWalkRestart {
                params: RwwrParams {
                    alpha,
                    ..RwwrParams::default()
                },
            }
        }
        "baseline" | "attribute_frequency" => ScorerSpec::AttributeFrequency,
        other => {
            return Err(Error::parse(
                "--scorer",
                None,
                format!("unknown scorer {other:?}"),
            ))
        }
    };
    if let Some(p) = param {
        if matches!(
            spec,
            ScorerSpec::Random { .. }
                | ScorerSpec::CommonNeighbors
                | ScorerSpec::AdamicAdar
                | ScorerSpec::AttributeFrequency
        ) {
            return Err(Error::parse(
                "--scorer",
                None,
                format!("scorer {name:?} takes no parameter, got {p:?}"),
            ));
        }
    }
    Ok(spec)
}

/// `"ranks=100,1000;alphas=0.5;lambdas=0.01"` applied over `base`.
fn parse_grid(s: &str, base: &GridSpec) -> Result<GridSpec> {
    let mut grid = base.clone();
    for part in s.split(';').filter(|p| !p.trim().is_empty()) {
        let (key, values) = part.split_once('=').ok_or_else(|| {
            Error::parse("--grid", None, format!("expected key=values, got {part:?}"))
        })?;
        match key.trim() {
            "ranks" => grid.ranks = parse_list("--grid", values)?,
            "alphas" => grid.alphas = parse_list("--grid", values)?,
            "lambdas" => grid.lambdas = parse_list("--grid", values)?,
            other => {
                return Err(Error::parse(
                    "--grid",
                    None,
                    format!("unknown grid key {other:?}"),
                ))
            }
        }
    }
    Ok(grid)
}

/// The scorer family a spec belongs to; `predict` grid-searches families
/// and ignores inline hyperparameters.
fn template_of(spec: &ScorerSpec) -> ScorerTemplate {
    match spec {
        ScorerSpec::Random { .. } => ScorerTemplate::Random,
        ScorerSpec::CommonNeighbors => ScorerTemplate::CommonNeighbors,
        ScorerSpec::AdamicAdar => ScorerTemplate::AdamicAdar,
        ScorerSpec::LowRank { .. } => ScorerTemplate::LowRank,
        ScorerSpec::CnLowRank { .. } => ScorerTemplate::CnLowRank,
        ScorerSpec::AaLowRank { .. } => ScorerTemplate::AaLowRank,
        ScorerSpec::RandomWalkRestart { .. } => ScorerTemplate::RandomWalkRestart,
        ScorerSpec::AttributeFrequency => ScorerTemplate::AttributeFrequency,
    }
}

enum CommandKind {
    Predict,
    Infer,
    Iterate,
}

impl CommandKind {
    fn task(&self) -> Task {
        match self {
            CommandKind::Predict | CommandKind::Iterate => Task::SocialLink,
            CommandKind::Infer => Task::AttributeLink,
        }
    }

    fn default_scorers(&self, seed: u64) -> Vec<ScorerSpec> {
        let lra = |rank| ScorerSpec::LowRank { rank, seed };
        let cn_lra = |rank| ScorerSpec::CnLowRank { rank, seed };
        let aa_lra = |rank| ScorerSpec::AaLowRank { rank, seed };
        let rwwr = ScorerSpec::RandomWalkRestart {
            params: RwwrParams {
                alpha: 0.7,
                ..RwwrParams::default()
            },
        };
        match self {
            // The full link-prediction table.
            CommandKind::Predict => vec![
                ScorerSpec::Random { seed },
                ScorerSpec::CommonNeighbors,
                ScorerSpec::AdamicAdar,
                lra(100),
                cn_lra(100),
                aa_lra(100),
                rwwr,
            ],
            // The attribute-inference table: the frequency baseline, the
            // neighborhood scorers, both factorization ranks, and the
            // restarting walk at α = 0.7.
            CommandKind::Infer => vec![
                ScorerSpec::AttributeFrequency,
                ScorerSpec::CommonNeighbors,
                ScorerSpec::AdamicAdar,
                lra(100),
                lra(1000),
                cn_lra(100),
                cn_lra(1000),
                aa_lra(100),
                aa_lra(1000),
                rwwr,
            ],
            CommandKind::Iterate => {
                vec![ScorerSpec::CommonNeighbors, ScorerSpec::AdamicAdar]
            }
        }
    }
}

/// Merge `--config` (or built-in defaults) with explicit flags into a
/// validated configuration.
fn resolve(flags: &ExperimentFlags, kind: CommandKind) -> Result<(ExperimentConfig, bool)> {
    let mut config = match &flags.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let manifest = flags.manifest.clone().ok_or_else(|| {
                Error::precondition("--manifest is required (or load one via --config)")
            })?;
            let seed = flags.seed.ok_or_else(|| {
                Error::precondition("--seed is required (or load one via --config)")
            })?;
            ExperimentConfig {
                manifest,
                train: "t1".into(),
                validate: "t0".into(),
                test: "t2".into(),
                task: kind.task(),
                scope: Scope::Hop2Cat1,
                negatives: NegativeMode::Exhaustive,
                edges: EdgeSet::Observed,
                scorers: Vec::new(),
                grid: GridSpec::default(),
                variant: None,
                trials: 10,
                sample_fraction: 0.1,
                top_k: 4,
                precision_ks: vec![2, 3, 4],
                sai: false,
                iterations: 1,
                seed,
                out: PathBuf::from("san-out"),
            }
        }
    };

    if let Some(manifest) = &flags.manifest {
        config.manifest = manifest.clone();
    }
    if let Some(seed) = flags.seed {
        config.seed = seed;
    }
    if let Some(train) = &flags.train {
        config.train = train.clone();
    }
    if let Some(validate) = &flags.validate {
        config.validate = validate.clone();
    }
    if let Some(test) = &flags.test {
        config.test = test.clone();
    }
    if let Some(task) = &flags.task {
        config.task = parse_task(task)?;
    }
    if let Some(scope) = &flags.scope {
        config.scope = scope.parse()?;
    }
    if let Some(negatives) = &flags.negatives {
        config.negatives = parse_negatives(negatives)?;
    }
    if let Some(edges) = &flags.edges {
        config.edges = parse_edges(edges)?;
    }
    if let Some(grid) = &flags.grid {
        config.grid = parse_grid(grid, &config.grid)?;
    }
    if let Some(ranks) = &flags.ranks {
        config.grid.ranks = parse_list("--ranks", ranks)?;
    }
    if let Some(alpha) = &flags.alpha {
        config.grid.alphas = parse_list("--alpha", alpha)?;
    }
    if let Some(variant) = &flags.variant {
        config.variant = Some(variant.parse()?);
    }
    if let Some(trials) = flags.trials {
        config.trials = trials;
    }
    if let Some(fraction) = flags.sample_frac {
        config.sample_fraction = fraction;
    }
    if let Some(topk) = flags.topk {
        config.top_k = topk;
    }
    if let Some(ks) = &flags.ks {
        config.precision_ks = parse_list("--ks", ks)?;
    }
    if flags.sai {
        config.sai = true;
    }
    if let Some(iterations) = flags.iterations {
        config.iterations = iterations;
    }
    if let Some(out) = &flags.out {
        config.out = out.clone();
    }

    if !flags.scorers.is_empty() {
        config.scorers = flags
            .scorers
            .iter()
            .map(|s| parse_scorer(s, config.seed))
            .collect::<Result<_>>()?;
    } else if config.scorers.is_empty() {
        config.scorers = kind.default_scorers(config.seed);
    }

    let expected = kind.task();
    if config.task != expected {
        return Err(Error::precondition(format!(
            "this command runs the {} task but the configuration says {:?}",
            match expected {
                Task::SocialLink => "links",
                Task::AttributeLink => "attributes",
            },
            config.task
        )));
    }
    config.validate()?;
    Ok((config, flags.dump_scores))
}

// ---------------------------------------------------------------------------
// Output plumbing

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| Error::io(path, e))
}

/// Sanitized file-name stem for a scorer label.
fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

/// Write `config.json`, `report.json` and `table.csv` (plus any extra
/// files), embed the config in the report notes, and echo the table.
fn write_outputs(
    config: &ExperimentConfig,
    mut report: MetricsReport,
    extra: Vec<(String, String)>,
) -> Result<()> {
    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    report
        .notes
        .push(format!("config: {}", config.to_compact_json()));
    config.save(&config.out.join("config.json"))?;
    write_file(&config.out.join("report.json"), &report.to_json())?;
    let table = report.to_table_csv();
    write_file(&config.out.join("table.csv"), &table)?;
    for (name, content) in extra {
        write_file(&config.out.join(name), &content)?;
    }
    print!("{table}");
    println!("# report: {}", config.out.join("report.json").display());
    Ok(())
}

// ---------------------------------------------------------------------------
// Commands

fn cmd_ingest(args: &IngestArgs) -> Result<()> {
    let content = fs::read_to_string(&args.raw).map_err(|e| Error::io(&args.raw, e))?;
    let raw: Vec<RawSnapshotEntry> = serde_json::from_str(&content).map_err(|e| {
        Error::parse(args.raw.display().to_string(), Some(e.line()), e.to_string())
    })?;
    let base_dir = args.raw.parent().unwrap_or(Path::new("."));
    let options = IngestOptions {
        min_freq: args.min_freq,
        core_k: args.core_k,
    };
    let triple = run_ingest(&raw, base_dir, args.mutex.as_deref(), &options)?;
    let manifest = triple.write(&args.out)?;
    print!("{}", triple.stats_csv());
    println!("# manifest: {}", manifest.display());
    Ok(())
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let mut params = match &args.params {
        Some(path) => {
            let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&content).map_err(|e| {
                Error::parse(path.display().to_string(), Some(e.line()), e.to_string())
            })?
        }
        None => GeneratorParams::default(),
    };
    if let Some(h) = args.homophily {
        params.homophily = h;
    }
    if let Some(c) = args.communities {
        params.communities = c;
    }
    if let Some(s) = args.community_size {
        params.community_size = s;
    }
    if let Some(k) = args.new_links {
        params.new_links_per_step = k;
    }

    let triple = generate(&params, args.seed)?;
    let manifest = triple.write(&args.out)?;
    // Provenance: the exact inputs that reproduce these files.
    let provenance = serde_json::json!({ "seed": args.seed, "params": params });
    write_file(
        &args.out.join("generate.json"),
        &format!("{:#}\n", provenance),
    )?;
    print!("{}", triple.stats_csv());
    println!("# manifest: {}", manifest.display());
    Ok(())
}

fn load_snapshot(manifest: &Manifest, label: &str, edges: EdgeSet) -> Result<Snapshot> {
    manifest.load(label, edges)
}

fn cmd_predict(config: &ExperimentConfig, dump_scores: bool) -> Result<()> {
    let manifest = Manifest::read(&config.manifest)?;
    let validate = load_snapshot(&manifest, &config.validate, config.edges)?;
    let train = load_snapshot(&manifest, &config.train, config.edges)?;
    let test = load_snapshot(&manifest, &config.test, config.edges)?;

    if let Some(variant) = config.variant {
        return cmd_predict_supervised(config, variant, &validate, &train, &test);
    }

    let mut templates: Vec<ScorerTemplate> = Vec::new();
    for template in config.scorers.iter().map(template_of) {
        if !templates.contains(&template) {
            templates.push(template);
        }
    }
    let params = LinkParams {
        scope: config.scope,
        negatives: config.negatives,
        grid: config.grid.clone(),
        trials: config.trials,
        seed: config.seed,
    };
    let result = run_link_experiment(&validate, &train, &test, &templates, &params)?;

    let mut extra = Vec::new();
    if dump_scores {
        let candidates = link_eval_candidates(&train, &test, &params)?;
        let eval_social = train.network.project_social();
        for outcome in &result.outcomes {
            for (net, point, suffix) in [
                (&eval_social, &outcome.chosen_without, "without"),
                (&train.network, &outcome.chosen_with, "with"),
            ] {
                let spec = outcome
                    .template
                    .instantiate(point, trial_seed(config.seed, 0))?;
                let table = score_candidates(net, &candidates, &spec)?;
                extra.push((
                    format!("scores_{}_{suffix}.csv", file_stem(&outcome.template.to_string())),
                    table.to_csv(),
                ));
            }
        }
    }
    write_outputs(config, result.report, extra)
}

fn cmd_predict_supervised(
    config: &ExperimentConfig,
    variant: Variant,
    validate: &Snapshot,
    train: &Snapshot,
    test: &Snapshot,
) -> Result<()> {
    let labels = LabelParams {
        scope: config.scope,
        negatives: config.negatives,
        seed: config.seed,
    };
    let mut params = SlpParams::new(variant, labels, config.seed);
    params.lambda_grid = config.grid.lambdas.clone();
    if let Some(&rank) = config.grid.ranks.first() {
        params.features.lra_rank = rank;
        params.features.cn_lra_rank = rank;
        params.features.aa_lra_rank = rank;
    }
    let outcome = slp_pipeline((validate, train), (train, test), &params)?;
    let auc = outcome.auc()?;

    let report = MetricsReport {
        experiment: if train.ordinal < test.ordinal {
            "supervised_new_links".into()
        } else {
            "supervised_missing_links".into()
        },
        train: train.label.clone(),
        validate: validate.label.clone(),
        test: test.label.clone(),
        scope: config.scope.to_string(),
        trials: 1,
        seed: config.seed,
        notes: vec![
            format!("features: {}", outcome.model.feature_names.len()),
            format!("lambda: {}", outcome.model.lambda),
        ],
        rows: vec![ReportRow {
            scorer: outcome.table.scorer.clone(),
            cells: vec![("AUC".into(), Metric::from_trials(&[auc])?)],
        }],
    };
    let extra = vec![(
        format!("scores_{}.csv", file_stem(&outcome.table.scorer)),
        outcome.table.to_csv(),
    )];
    write_outputs(config, report, extra)
}

fn cmd_infer(config: &ExperimentConfig) -> Result<()> {
    let manifest = Manifest::read(&config.manifest)?;
    let train = load_snapshot(&manifest, &config.train, config.edges)?;

    let mut methods: Vec<AttributeMethod> = config
        .scorers
        .iter()
        .map(|spec| AttributeMethod::Unsupervised(*spec))
        .collect();
    if config.sai {
        methods.push(AttributeMethod::Supervised(SaiParams::new(
            SaiFeatureParams::default(),
            config.seed,
        )));
    }
    let params = AttributeParams {
        sample_fraction: config.sample_fraction,
        ks: config.precision_ks.clone(),
        trials: config.trials,
        seed: config.seed,
    };
    let result = run_attribute_experiment(&train, &methods, &params)?;
    write_outputs(config, result.report, Vec::new())
}

fn cmd_iterate(config: &ExperimentConfig) -> Result<()> {
    let manifest = Manifest::read(&config.manifest)?;
    let train = load_snapshot(&manifest, &config.train, config.edges)?;
    let test = load_snapshot(&manifest, &config.test, config.edges)?;

    if config.iterations > 1 {
        log::warn!(
            "running {} infer→augment rounds; inference errors may compound \
             beyond the first round",
            config.iterations
        );
    }
    let params = IterativeParams {
        scope: config.scope,
        negatives: config.negatives,
        sample_fraction: config.sample_fraction,
        top_k: config.top_k,
        iterations: config.iterations,
        trials: config.trials,
        seed: config.seed,
    };
    let result = run_iterative_experiment(&train, &test, &config.scorers, &params)?;
    write_outputs(config, result.report, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scorer_strings_parse_with_defaults_and_parameters() {
        assert_eq!(parse_scorer("cn", 1).unwrap(), ScorerSpec::CommonNeighbors);
        assert_eq!(
            parse_scorer("lra", 1).unwrap(),
            ScorerSpec::LowRank { rank: 100, seed: 1 }
        );
        assert_eq!(
            parse_scorer("aa_lra:250", 9).unwrap(),
            ScorerSpec::AaLowRank { rank: 250, seed: 9 }
        );
        match parse_scorer("rwwr", 0).unwrap() {
            ScorerSpec::RandomWalkRestart { params } => assert_eq!(params.alpha, 0.7),
            other => panic!("unexpected {other:?}"),
        }
        match parse_scorer("rwwr:0.3", 0).unwrap() {
            ScorerSpec::RandomWalkRestart { params } => assert_eq!(params.alpha, 0.3),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            parse_scorer("baseline", 0).unwrap(),
            ScorerSpec::AttributeFrequency
        );
        assert!(parse_scorer("cn:5", 0).is_err());
        assert!(parse_scorer("lra:abc", 0).is_err());
        assert!(parse_scorer("nope", 0).is_err());
    }

    #[test]
    fn grid_strings_override_selected_keys() {
        let base = GridSpec::default();
        let grid = parse_grid("ranks=4,8;alphas=0.5", &base).unwrap();
        assert_eq!(grid.ranks, vec![4, 8]);
        assert_eq!(grid.alphas, vec![0.5]);
        assert_eq!(grid.lambdas, base.lambdas);
        assert!(parse_grid("ranks=4;bogus=1", &base).is_err());
        assert!(parse_grid("ranks=four", &base).is_err());
    }

    #[test]
    fn negative_mode_strings_parse() {
        assert_eq!(
            parse_negatives("exhaustive").unwrap(),
            NegativeMode::Exhaustive
        );
        assert_eq!(
            parse_negatives("capped:5").unwrap(),
            NegativeMode::Capped { ratio: 5.0 }
        );
        assert!(parse_negatives("capped:x").is_err());
        assert!(parse_negatives("half").is_err());
    }

    #[test]
    fn families_deduplicate_for_grid_search() {
        let specs = [
            ScorerSpec::LowRank { rank: 100, seed: 0 },
            ScorerSpec::LowRank { rank: 1000, seed: 0 },
            ScorerSpec::CommonNeighbors,
        ];
        let mut templates: Vec<ScorerTemplate> = Vec::new();
        for template in specs.iter().map(template_of) {
            if !templates.contains(&template) {
                templates.push(template);
            }
        }
        assert_eq!(
            templates,
            vec![ScorerTemplate::LowRank, ScorerTemplate::CommonNeighbors]
        );
    }
}
