//! Synthetic basket data and the rule-set × taxonomy-set reduction study.
//!
//! [`synth_taxonomies`] builds balanced trees over numbered leaf items;
//! [`synth_transactions`] draws baskets that mostly stay within sibling groups
//! of those trees, so mined rules share structure that generalization can
//! fold. [`BENCHMARK`] fixes the seeds and sizes of the bundled 3 × 3 study.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formats::{export_borgelt_rules, write_taxonomies, write_transactions};
use crate::gart::{generalize, reduction_rate, GartOptions};
use crate::miner::mine;
use crate::model::{Item, Itemset, MiningParams, RuleSet, Side, TransactionDatabase};
use crate::query::{export_view, run_query, RuleQuery};
use crate::taxonomy::{build_taxonomy, TaxonomyEdge, TaxonomySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SynthParams {
    pub n_transactions: usize,
    pub n_leaf_items: usize,
    pub taxonomy_depth: usize,
    pub branching: usize,
    pub seed: u64,
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_transactions", self.n_transactions),
            ("n_leaf_items", self.n_leaf_items),
            ("taxonomy_depth", self.taxonomy_depth),
            ("branching", self.branching),
        ] {
            if v == 0 {
                return Err(Error::InvalidParams(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}

pub fn leaf_name(i: usize) -> String {
    format!("item{i:03}")
}

fn node_name(level: usize, i: usize) -> String {
    format!("g{level}-{i:02}")
}

/// Balanced trees of the given depth over `item000..`: leaf `i` hangs below
/// `g1-(i / branching)`, which hangs below `g2-(i / branching²)`, and so on.
/// Each root gets its own taxonomy.
pub fn synth_taxonomies(n_leaf_items: usize, depth: usize, branching: usize) -> Result<TaxonomySet> {
    if n_leaf_items == 0 || depth == 0 || branching == 0 {
        return Err(Error::InvalidParams(
            "leaf count, depth and branching must be at least 1".into(),
        ));
    }
    // ancestor index of leaf i at `level` is i / branching^level
    let index_at = |i: usize, level: usize| i / branching.saturating_pow(level as u32);
    let mut per_root: Vec<Vec<TaxonomyEdge>> = vec![Vec::new(); index_at(n_leaf_items - 1, depth) + 1];
    for i in 0..n_leaf_items {
        let root = index_at(i, depth);
        per_root[root].push(TaxonomyEdge::new(
            Item::new(leaf_name(i))?,
            Item::new(node_name(1, index_at(i, 1)))?,
        ));
    }
    for level in 1..depth {
        let nodes = index_at(n_leaf_items - 1, level) + 1;
        for j in 0..nodes {
            let root = j / branching.saturating_pow((depth - level) as u32);
            per_root[root].push(TaxonomyEdge::new(
                Item::new(node_name(level, j))?,
                Item::new(node_name(level + 1, j / branching))?,
            ));
        }
    }
    let trees = per_root
        .into_iter()
        .enumerate()
        .map(|(r, edges)| build_taxonomy(edges, format!("tree-{r:02}")))
        .collect::<Result<Vec<_>>>()?;
    TaxonomySet::new(trees)
}

/// Baskets built around a sibling group (a run of `branching` consecutive
/// leaves) and its partner group, the next one along. Siblings are
/// interchangeable within a basket, so rules between the two groups differ
/// only by siblings and fold under their common parent. Popular groups are
/// favoured and an occasional unrelated item is added. Every leaf appears at
/// least once.
pub fn synth_transactions(params: &SynthParams) -> Result<TransactionDatabase> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let leaves: Vec<Item> = (0..params.n_leaf_items)
        .map(|i| Item::new(leaf_name(i)))
        .collect::<Result<_>>()?;
    let groups: Vec<&[Item]> = leaves.chunks(params.branching).collect();
    // group g anchors a basket with weight 1 / (g + 1)
    let weights: Vec<f64> = (0..groups.len()).map(|g| 1.0 / (g + 1) as f64).collect();
    let total: f64 = weights.iter().sum();
    let pick_group = |rng: &mut ChaCha8Rng| {
        let mut x = rng.gen_range(0.0..total);
        for (g, w) in weights.iter().enumerate() {
            if x < *w {
                return g;
            }
            x -= w;
        }
        groups.len() - 1
    };

    let mut baskets: Vec<Vec<Item>> = Vec::with_capacity(params.n_transactions);
    for _ in 0..params.n_transactions {
        let anchor = pick_group(&mut rng);
        let mut basket = Vec::new();
        for g in [anchor, (anchor + 1) % groups.len()] {
            let group = groups[g];
            let take = rng.gen_range(1..=group.len().min(2));
            basket.extend(group.choose_multiple(&mut rng, take).cloned());
        }
        if rng.gen_bool(0.25) {
            basket.push(leaves.choose(&mut rng).expect("at least one leaf").clone());
        }
        baskets.push(basket);
    }
    for (i, leaf) in leaves.iter().enumerate() {
        baskets[i % params.n_transactions].push(leaf.clone());
    }
    Ok(TransactionDatabase::new(baskets.into_iter().map(Itemset::from)))
}

/// Outcome of generalizing one rule set with one taxonomy set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionCell {
    pub ruleset: String,
    pub taxonomies: String,
    pub input_count: usize,
    pub output_count: usize,
    /// Percent, `(input - output) / input * 100`.
    pub reduction_rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReductionReport {
    pub cells: Vec<ReductionCell>,
    /// `(ruleset, taxonomies, message)` for cells that could not be computed.
    pub errors: Vec<(String, String, String)>,
}

impl ReductionReport {
    /// Fig.-5-style chart data.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ruleset,taxonomies,input_rules,output_rules,reduction_rate\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.2}",
                c.ruleset, c.taxonomies, c.input_count, c.output_count, c.reduction_rate
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let w1 = self.cells.iter().map(|c| c.ruleset.len()).max().unwrap_or(0).max(8);
        let w2 = self.cells.iter().map(|c| c.taxonomies.len()).max().unwrap_or(0).max(10);
        let mut out = format!("{:<w1$}  {:<w2$}  {:>8}  {:>8}  {:>9}\n", "rule set", "taxonomies", "input", "output", "reduction");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{:<w1$}  {:<w2$}  {:>8}  {:>8}  {:>8.2}%",
                c.ruleset, c.taxonomies, c.input_count, c.output_count, c.reduction_rate
            );
        }
        for (r, t, e) in &self.errors {
            let _ = writeln!(out, "{r:<w1$}  {t:<w2$}  error: {e}");
        }
        out
    }
}

/// Generalizes every rule set with every taxonomy set. Rows come out sorted
/// by labels whatever the input order.
pub fn reduction_report(
    rulesets: &[(String, RuleSet)],
    taxonomy_sets: &[(String, TaxonomySet)],
    side: Side,
    opts: &GartOptions,
) -> ReductionReport {
    let pairs: Vec<_> = rulesets
        .iter()
        .flat_map(|r| taxonomy_sets.iter().map(move |t| (r, t)))
        .collect();
    let outcomes: Vec<std::result::Result<ReductionCell, (String, String, String)>> = pairs
        .par_iter()
        .map(|((rl, rules), (tl, taxes))| {
            generalize(rules, taxes, side, opts, None)
                .map(|g| ReductionCell {
                    ruleset: rl.clone(),
                    taxonomies: tl.clone(),
                    input_count: rules.len(),
                    output_count: g.len(),
                    reduction_rate: reduction_rate(rules.len(), g.len()),
                })
                .map_err(|e| (rl.clone(), tl.clone(), e.to_string()))
        })
        .collect();
    let mut report = ReductionReport::default();
    for o in outcomes {
        match o {
            Ok(c) => report.cells.push(c),
            Err(e) => report.errors.push(e),
        }
    }
    report
        .cells
        .sort_by(|a, b| (&a.ruleset, &a.taxonomies).cmp(&(&b.ruleset, &b.taxonomies)));
    report.errors.sort();
    report
}

/// One synthetic rule set of the bundled study.
#[derive(Debug, Clone, Copy)]
pub struct BenchmarkRuleSet {
    pub label: &'static str,
    pub data: SynthParams,
    pub mining: MiningParams,
}

/// One synthetic taxonomy set of the bundled study.
#[derive(Debug, Clone, Copy)]
pub struct BenchmarkTaxonomies {
    pub label: &'static str,
    pub depth: usize,
    pub branching: usize,
}

pub struct Benchmark {
    pub rulesets: [BenchmarkRuleSet; 3],
    pub taxonomies: [BenchmarkTaxonomies; 3],
}

const MINING: MiningParams = MiningParams {
    min_support: 0.02,
    min_confidence: 0.3,
    max_items: 3,
};

/// The bundled 3 × 3 study: three seeded baskets files over the same 48
/// leaves, each mined with the same thresholds, crossed with three
/// taxonomy shapes over those leaves.
pub const BENCHMARK: Benchmark = Benchmark {
    rulesets: [
        BenchmarkRuleSet {
            label: "R1",
            data: SynthParams { n_transactions: 400, n_leaf_items: 48, taxonomy_depth: 2, branching: 4, seed: 11 },
            mining: MINING,
        },
        BenchmarkRuleSet {
            label: "R2",
            data: SynthParams { n_transactions: 600, n_leaf_items: 48, taxonomy_depth: 2, branching: 4, seed: 12 },
            mining: MINING,
        },
        BenchmarkRuleSet {
            label: "R3",
            data: SynthParams { n_transactions: 800, n_leaf_items: 48, taxonomy_depth: 2, branching: 3, seed: 13 },
            mining: MINING,
        },
    ],
    taxonomies: [
        BenchmarkTaxonomies { label: "T01", depth: 1, branching: 4 },
        BenchmarkTaxonomies { label: "T02", depth: 2, branching: 3 },
        BenchmarkTaxonomies { label: "T03", depth: 3, branching: 2 },
    ],
};

/// Runs the bundled study and writes every input and output under `dir`:
///
/// ```text
/// data/R*.txt              baskets
/// rules/R*.txt             mined rules, Borgelt listing, one rule per line
/// taxonomies/T*.txt        taxonomy sets
/// generalized/R*_T*.txt    generalized rules, one per line after a header
/// report.csv               the reduction table
/// ```
pub fn run_benchmark(dir: &Path, side: Side, opts: &GartOptions) -> Result<ReductionReport> {
    let io = |e: std::io::Error| Error::Document(format!("{}: {e}", dir.display()));
    for sub in ["data", "rules", "taxonomies", "generalized"] {
        fs::create_dir_all(dir.join(sub)).map_err(io)?;
    }

    let mut rulesets = Vec::new();
    for spec in &BENCHMARK.rulesets {
        let db = synth_transactions(&spec.data)?;
        let rules = mine(&db, &spec.mining)?;
        fs::write(dir.join(format!("data/{}.txt", spec.label)), write_transactions(&db)?).map_err(io)?;
        fs::write(dir.join(format!("rules/{}.txt", spec.label)), export_borgelt_rules(&rules)?).map_err(io)?;
        rulesets.push((spec.label.to_string(), rules));
    }
    let n_leaf = BENCHMARK.rulesets[0].data.n_leaf_items;
    let mut taxonomy_sets = Vec::new();
    for spec in &BENCHMARK.taxonomies {
        let taxes = synth_taxonomies(n_leaf, spec.depth, spec.branching)?;
        fs::write(dir.join(format!("taxonomies/{}.txt", spec.label)), write_taxonomies(&taxes)).map_err(io)?;
        taxonomy_sets.push((spec.label.to_string(), taxes));
    }

    for (rl, rules) in &rulesets {
        for (tl, taxes) in &taxonomy_sets {
            let out = generalize(rules, taxes, side, opts, None)?;
            let listing = export_view(&run_query(&out, &RuleQuery::new())?);
            fs::write(dir.join(format!("generalized/{rl}_{tl}.txt")), listing).map_err(io)?;
        }
    }

    let report = reduction_report(&rulesets, &taxonomy_sets, side, opts);
    fs::write(dir.join("report.csv"), report.to_csv()).map_err(io)?;
    Ok(report)
}
