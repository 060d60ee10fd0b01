//! `genrules`: mine, generalize, query and report from the command line, or
//! serve the HTTP API.
//!
//! Exit status: 0 on success, 1 for bad input (usage, unreadable or invalid
//! files, invalid parameters), 2 for failures on our side (writing output,
//! binding a port).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use genrules::experiment::{reduction_report, run_benchmark, synth_taxonomies, synth_transactions, SynthParams};
use genrules::formats::{
    decode, export_borgelt_rules, parse_generalized, parse_ruleset_any, parse_taxonomies, parse_transactions,
    write_generalized, write_ruleset, write_taxonomies, write_transactions, Parsed,
};
use genrules::gart::{generalize_with_warnings, GartOptions};
use genrules::miner::mine;
use genrules::model::{MiningParams, Side};
use genrules::query::{export_view, run_query, RuleQuery};

#[derive(Parser)]
#[command(name = "genrules", version, about = "Association rules, generalized over taxonomies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine association rules from a baskets file.
    Mine(MineArgs),
    /// Generalize one side of a rule set over a taxonomy set.
    Generalize(GeneralizeArgs),
    /// Select rules from a generalized rule set.
    Query(QueryArgs),
    /// Reduction rates of every rule set × taxonomy set pair.
    Report(ReportArgs),
    /// Write a synthetic baskets file and a matching taxonomy set.
    Synth(SynthArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleFormat {
    Json,
    Borgelt,
}

#[derive(Args)]
struct MineArgs {
    /// Baskets, one per line, items separated by spaces or tabs.
    #[arg(long)]
    db: PathBuf,
    #[arg(long, default_value_t = MiningParams::default().min_support)]
    min_support: f64,
    #[arg(long, default_value_t = MiningParams::default().min_confidence)]
    min_confidence: f64,
    #[arg(long, default_value_t = MiningParams::default().max_items)]
    max_items: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: RuleFormat,
    /// Defaults to standard output.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GeneralizeArgs {
    /// Rule set, as a JSON document or a Borgelt listing.
    #[arg(long)]
    rules: PathBuf,
    #[arg(long)]
    taxonomies: PathBuf,
    /// Side to generalize: lhs or rhs.
    #[arg(long, default_value = "lhs", value_parser = parse_side)]
    side: Side,
    /// Baskets to compute contingency tables and measures from.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Parent steps allowed per item.
    #[arg(long)]
    max_level: Option<usize>,
    /// Keep an ascent only when it merges rules.
    #[arg(long)]
    merge_only: bool,
    /// Defaults to standard output.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QueryArgs {
    /// Generalized rule set document.
    #[arg(long)]
    result: PathBuf,
    /// Item on either side; a generalized item matches its descendants.
    #[arg(long)]
    item: Vec<String>,
    #[arg(long)]
    lhs_item: Vec<String>,
    #[arg(long)]
    rhs_item: Vec<String>,
    /// Match items literally.
    #[arg(long)]
    exact: bool,
    /// Measure to show, repeatable.
    #[arg(long)]
    measure: Vec<String>,
    /// Predicate such as `support>=0.5`, repeatable.
    #[arg(long = "where")]
    predicates: Vec<String>,
    /// `measure[:asc|:desc]`.
    #[arg(long)]
    sort: Option<String>,
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    offset: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    /// `LABEL=PATH` of a rule set, repeatable.
    #[arg(long = "rules", value_parser = parse_labelled)]
    rulesets: Vec<(String, PathBuf)>,
    /// `LABEL=PATH` of a taxonomy set, repeatable.
    #[arg(long = "taxonomies", value_parser = parse_labelled)]
    taxonomy_sets: Vec<(String, PathBuf)>,
    /// Run the bundled synthetic study, writing its files here.
    #[arg(long, conflicts_with_all = ["rulesets", "taxonomy_sets"])]
    benchmark: Option<PathBuf>,
    #[arg(long, default_value = "lhs", value_parser = parse_side)]
    side: Side,
    #[arg(long)]
    max_level: Option<usize>,
    #[arg(long)]
    merge_only: bool,
    /// Also write the report as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    transactions: usize,
    #[arg(long)]
    leaves: usize,
    #[arg(long)]
    depth: usize,
    #[arg(long)]
    branching: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Receives `transactions.txt` and `taxonomies.txt`.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "GENRULES_LISTEN", default_value = genrules_service::DEFAULT_LISTEN)]
    listen: std::net::SocketAddr,
    #[arg(long, env = "GENRULES_STORE", default_value = genrules_service::DEFAULT_STORE)]
    store: PathBuf,
}

fn parse_side(s: &str) -> Result<Side, String> {
    s.parse().map_err(|e: genrules::Error| e.to_string())
}

fn parse_labelled(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((label, path)) if !label.is_empty() && !path.is_empty() => Ok((label.to_string(), path.into())),
        _ => Err(format!("expected LABEL=PATH, got {s:?}")),
    }
}

enum Failure {
    /// Bad input; exit 1.
    Invalid(String),
    /// Our side; exit 2.
    Internal(String),
}

impl From<genrules::Error> for Failure {
    fn from(e: genrules::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    decode(&bytes)
        .map(str::to_string)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

/// Parses a file, prefixing errors with its path and echoing warnings.
fn load<T>(path: &Path, parse: impl FnOnce(&str) -> genrules::Result<Parsed<T>>) -> Result<T, Failure> {
    let parsed = parse(&read(path)?).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    for w in &parsed.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(parsed.value)
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Internal(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_mine(a: MineArgs) -> Outcome {
    let params = MiningParams::new(a.min_support, a.min_confidence, a.max_items)?;
    let db = load(&a.db, parse_transactions)?;
    let rules = mine(&db, &params)?;
    let text = match a.format {
        RuleFormat::Json => write_ruleset(&rules),
        RuleFormat::Borgelt => export_borgelt_rules(&rules)?,
    };
    emit(a.out.as_deref(), &text)?;
    eprintln!("{} transactions, {} rules", db.len(), rules.len());
    Ok(())
}

fn options(max_level: Option<usize>, merge_only: bool) -> Result<GartOptions, Failure> {
    let opts = GartOptions { max_level, merge_only };
    opts.validate()?;
    Ok(opts)
}

fn cmd_generalize(a: GeneralizeArgs) -> Outcome {
    let opts = options(a.max_level, a.merge_only)?;
    let rules = load(&a.rules, parse_ruleset_any)?;
    let taxes = load(&a.taxonomies, parse_taxonomies)?;
    let db = a.db.as_deref().map(|p| load(p, parse_transactions)).transpose()?;
    let (set, warnings) = generalize_with_warnings(&rules, &taxes, a.side, &opts, db.as_ref())?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    emit(a.out.as_deref(), &write_generalized(&set))?;
    let summary = format!("{} → {}, {:.2}%", rules.len(), set.len(), set.reduction_rate());
    // keep standard output clean when the document goes there
    if a.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn cmd_query(a: QueryArgs) -> Outcome {
    let set = parse_generalized(&read(&a.result)?).map_err(|e| Failure::Invalid(format!("{}: {e}", a.result.display())))?;
    let limit = a.limit.map(|n| n.to_string());
    let offset = a.offset.map(|n| n.to_string());
    let pairs = a
        .item
        .iter()
        .map(|v| ("item", v.as_str()))
        .chain(a.lhs_item.iter().map(|v| ("lhs_item", v.as_str())))
        .chain(a.rhs_item.iter().map(|v| ("rhs_item", v.as_str())))
        .chain(a.measure.iter().map(|v| ("measure", v.as_str())))
        .chain(a.predicates.iter().map(|v| ("where", v.as_str())))
        .chain(a.sort.as_deref().map(|v| ("sort", v)))
        .chain(limit.as_deref().map(|v| ("limit", v)))
        .chain(offset.as_deref().map(|v| ("offset", v)))
        .chain(a.exact.then_some(("exact", "true")));
    let q = RuleQuery::from_pairs(pairs)?;
    print!("{}", export_view(&run_query(&set, &q)?));
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Outcome {
    let opts = options(a.max_level, a.merge_only)?;
    let report = if let Some(dir) = &a.benchmark {
        run_benchmark(dir, a.side, &opts).map_err(|e| match e {
            genrules::Error::Document(m) => Failure::Internal(m),
            other => other.into(),
        })?
    } else {
        if a.rulesets.is_empty() || a.taxonomy_sets.is_empty() {
            return Err(Failure::Invalid(
                "give at least one --rules LABEL=PATH and one --taxonomies LABEL=PATH, or --benchmark DIR".into(),
            ));
        }
        let rulesets = a
            .rulesets
            .iter()
            .map(|(l, p)| Ok((l.clone(), load(p, parse_ruleset_any)?)))
            .collect::<Result<Vec<_>, Failure>>()?;
        let taxonomy_sets = a
            .taxonomy_sets
            .iter()
            .map(|(l, p)| Ok((l.clone(), load(p, parse_taxonomies)?)))
            .collect::<Result<Vec<_>, Failure>>()?;
        reduction_report(&rulesets, &taxonomy_sets, a.side, &opts)
    };
    print!("{}", report.to_table());
    if let Some(path) = &a.csv {
        fs::write(path, report.to_csv()).map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Outcome {
    let params = SynthParams {
        n_transactions: a.transactions,
        n_leaf_items: a.leaves,
        taxonomy_depth: a.depth,
        branching: a.branching,
        seed: a.seed,
    };
    let db = synth_transactions(&params)?;
    let taxes = synth_taxonomies(a.leaves, a.depth, a.branching)?;
    let write = |name: &str, text: &str| {
        let path = a.out_dir.join(name);
        fs::create_dir_all(&a.out_dir)
            .and_then(|_| fs::write(&path, text))
            .map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))
    };
    write("transactions.txt", &write_transactions(&db)?)?;
    write("taxonomies.txt", &write_taxonomies(&taxes))?;
    eprintln!("{} transactions over {} items, {} taxonomies", db.len(), db.universe().len(), taxes.len());
    Ok(())
}

fn cmd_serve(a: ServeArgs) -> Outcome {
    let config = genrules_service::ServiceConfig { listen: a.listen, store_root: a.store };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Internal(e.to_string()))?;
    runtime
        .block_on(genrules_service::serve(&config))
        .map_err(|e| Failure::Internal(format!("{}: {e}", config.listen)))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Mine(a) => cmd_mine(a),
        Command::Generalize(a) => cmd_generalize(a),
        Command::Query(a) => cmd_query(a),
        Command::Report(a) => cmd_report(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Serve(a) => cmd_serve(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
