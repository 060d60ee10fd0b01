//! One-sided rule generalization over taxonomies.
//!
//! Rules are grouped by the side that stays fixed. Within a group, every item
//! on the other side that has a parent is replaced by that parent, all at
//! once, and rules that become identical are merged with their sources
//! unioned. Passes repeat per taxonomy until nothing can move (or the level
//! budget is spent), trees being processed in list order. The result never
//! holds more rules than the input, and every input rule is the source of
//! exactly one output rule.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AssociationRule, Item, Itemset, MiningParams, RuleKey, RuleSet, Side, TransactionDatabase};
use crate::taxonomy::{leaf_descendants, Taxonomy, TaxonomySet};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GartOptions {
    /// Parent steps allowed per item; `None` climbs to the roots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_level: Option<usize>,
    /// Keep a pass only when it merged at least two rules.
    #[serde(default)]
    pub merge_only: bool,
}

impl GartOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_level == Some(0) {
            return Err(Error::InvalidParams("max_level must be at least 1".into()));
        }
        Ok(())
    }
}

/// Joint counts of a rule's two sides over a database.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContingencyTable {
    /// lhs and rhs
    pub n_lr: u64,
    /// lhs, not rhs
    pub n_lnr: u64,
    /// rhs, not lhs
    pub n_nlr: u64,
    /// neither
    pub n_nlnr: u64,
    pub n: u64,
}

impl ContingencyTable {
    pub fn new(n_lr: u64, n_lnr: u64, n_nlr: u64, n_nlnr: u64) -> Self {
        ContingencyTable {
            n_lr,
            n_lnr,
            n_nlr,
            n_nlnr,
            n: n_lr + n_lnr + n_nlr + n_nlnr,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.n_lr + self.n_lnr + self.n_nlr + self.n_nlnr == self.n
    }

    pub fn lhs_count(&self) -> u64 {
        self.n_lr + self.n_lnr
    }

    pub fn rhs_count(&self) -> u64 {
        self.n_lr + self.n_nlr
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralizedRule {
    pub lhs: Itemset,
    pub rhs: Itemset,
    /// The side that was generalized.
    pub side: Side,
    /// Input rules folded into this one, in canonical order.
    pub sources: Vec<AssociationRule>,
    /// Items on the generalized side that came from climbing a taxonomy.
    pub generalized_items: Itemset,
    pub table: Option<ContingencyTable>,
}

impl GeneralizedRule {
    /// An untouched input rule.
    pub fn pass_through(rule: &AssociationRule, side: Side) -> Self {
        GeneralizedRule {
            lhs: rule.lhs.clone(),
            rhs: rule.rhs.clone(),
            side,
            sources: vec![rule.clone()],
            generalized_items: Itemset::empty(),
            table: None,
        }
    }

    pub fn key(&self) -> RuleKey {
        RuleKey {
            lhs: self.lhs.clone(),
            rhs: self.rhs.clone(),
        }
    }

    pub fn is_generalized(&self) -> bool {
        !self.generalized_items.is_empty()
    }

    pub fn generalized_side(&self) -> &Itemset {
        match self.side {
            Side::Lhs => &self.lhs,
            Side::Rhs => &self.rhs,
        }
    }

    pub fn fixed_side(&self) -> &Itemset {
        match self.side {
            Side::Lhs => &self.rhs,
            Side::Rhs => &self.lhs,
        }
    }
}

impl fmt::Display for GeneralizedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => {}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedRuleSet {
    pub side: Side,
    pub options: GartOptions,
    /// Thresholds of the source rule set, when it carried them.
    pub mining_params: Option<MiningParams>,
    /// Size of the database the tables were computed on.
    pub n_transactions: Option<u64>,
    pub taxonomies: TaxonomySet,
    /// Output rules in canonical key order.
    pub rules: Vec<GeneralizedRule>,
}

impl GeneralizedRuleSet {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn source_count(&self) -> usize {
        self.rules.iter().map(|r| r.sources.len()).sum()
    }

    pub fn find(&self, key: &RuleKey) -> Option<&GeneralizedRule> {
        self.rules
            .binary_search_by(|r| (&r.lhs, &r.rhs).cmp(&(&key.lhs, &key.rhs)))
            .ok()
            .map(|i| &self.rules[i])
    }

    /// Lookup by [`RuleKey::digest`].
    pub fn find_digest(&self, digest: &str) -> Option<&GeneralizedRule> {
        self.rules.iter().find(|r| r.key().digest() == digest)
    }

    /// The input rules, recovered from the sources.
    pub fn source_rules(&self) -> RuleSet {
        let mut set = RuleSet::from_rules(self.rules.iter().flat_map(|r| r.sources.iter().cloned()));
        set.mining_params = self.mining_params;
        set
    }

    /// Input size minus output size over input size, in percent.
    pub fn reduction_rate(&self) -> f64 {
        reduction_rate(self.source_count(), self.len())
    }
}

pub fn reduction_rate(input: usize, output: usize) -> f64 {
    if input == 0 {
        0.0
    } else {
        (input - output) as f64 * 100.0 / input as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// An item could not climb because the fixed side holds one of its
    /// relatives in the same tree.
    SideCollision {
        rule: String,
        item: Item,
        fixed: Item,
    },
    /// No taxonomy node occurs on the generalized side of any rule.
    NothingToGeneralize,
    /// A database item is also an internal taxonomy node.
    InternalItemInDatabase(Item),
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::SideCollision { rule, item, fixed } => write!(
                f,
                "rule {rule}: {item:?} kept as is, it is related to fixed-side item {fixed:?}"
            ),
            Warning::NothingToGeneralize => {
                f.write_str("no taxonomy item occurs on the generalized side of any rule")
            }
            Warning::InternalItemInDatabase(item) => {
                write!(f, "database item {item:?} is an internal taxonomy node")
            }
        }
    }
}

pub fn partition_by_fixed_side(rules: &RuleSet, side: Side) -> BTreeMap<Itemset, Vec<AssociationRule>> {
    let mut groups: BTreeMap<Itemset, Vec<AssociationRule>> = BTreeMap::new();
    for rule in rules {
        groups
            .entry(rule.side(side.other()).clone())
            .or_default()
            .push(rule.clone());
    }
    groups
}

/// A rule in flight: generalized-side items with the steps each has climbed.
#[derive(Debug, Clone)]
struct Working {
    items: BTreeMap<Item, usize>,
    sources: BTreeSet<AssociationRule>,
}

impl Working {
    fn itemset(&self) -> Itemset {
        self.items.keys().cloned().collect()
    }
}

struct PassOutcome {
    rules: Vec<Working>,
    moved: bool,
}

/// Fixed-side items that forbid `item` from climbing to `parent`: the parent
/// (or something above it) is on the fixed side, or the fixed side holds an
/// ancestor of the item.
fn blocking_item<'a>(tax: &Taxonomy, item: &Item, parent: &Item, fixed: &'a Itemset) -> Option<&'a Item> {
    fixed.iter().find(|f| {
        *f == parent || tax.ancestors(f).any(|a| a == parent) || tax.ancestors(item).any(|a| a == *f)
    })
}

fn ascend_pass(
    rules: &[Working],
    tax: &Taxonomy,
    fixed: &Itemset,
    max_level: Option<usize>,
    collisions: &mut Vec<(Item, Item)>,
) -> PassOutcome {
    let mut moved = false;
    let mut merged: BTreeMap<Itemset, Working> = BTreeMap::new();
    for rule in rules {
        let mut items: BTreeMap<Item, usize> = BTreeMap::new();
        for (item, &level) in &rule.items {
            let step = tax
                .parent_of(item)
                .filter(|_| max_level.is_none_or(|m| level < m));
            let (next, next_level) = match step {
                Some(parent) => match blocking_item(tax, item, parent, fixed) {
                    Some(f) => {
                        collisions.push((item.clone(), f.clone()));
                        (item.clone(), level)
                    }
                    None => {
                        moved = true;
                        (parent.clone(), level + 1)
                    }
                },
                None => (item.clone(), level),
            };
            let slot = items.entry(next).or_insert(next_level);
            *slot = (*slot).max(next_level);
        }
        let w = Working {
            items,
            sources: rule.sources.clone(),
        };
        match merged.entry(w.itemset()) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(w);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let existing = e.get_mut();
                existing.sources.extend(w.sources);
                for (item, level) in w.items {
                    let slot = existing.items.entry(item).or_insert(level);
                    *slot = (*slot).max(level);
                }
            }
        }
    }
    PassOutcome {
        rules: merged.into_values().collect(),
        moved,
    }
}

fn to_working(rule: &GeneralizedRule) -> Working {
    Working {
        items: rule
            .generalized_side()
            .iter()
            .map(|i| (i.clone(), usize::from(rule.generalized_items.contains(i))))
            .collect(),
        sources: rule.sources.iter().cloned().collect(),
    }
}

fn from_working(w: Working, fixed: &Itemset, side: Side) -> GeneralizedRule {
    let generalized_items = w
        .items
        .iter()
        .filter(|(_, &l)| l > 0)
        .map(|(i, _)| i.clone())
        .collect();
    let moving = w.itemset();
    let (lhs, rhs) = match side {
        Side::Lhs => (moving, fixed.clone()),
        Side::Rhs => (fixed.clone(), moving),
    };
    GeneralizedRule {
        lhs,
        rhs,
        side,
        sources: w.sources.into_iter().collect(),
        generalized_items,
        table: None,
    }
}

/// One simultaneous parent step over a group sharing its fixed side, with
/// duplicates merged.
pub fn ascend_one_level(group: &[GeneralizedRule], tax: &Taxonomy, side: Side) -> Vec<GeneralizedRule> {
    let Some(first) = group.first() else {
        return Vec::new();
    };
    let fixed = first.fixed_side().clone();
    debug_assert!(group.iter().all(|r| r.fixed_side() == &fixed));
    let working: Vec<Working> = group.iter().map(to_working).collect();
    let outcome = ascend_pass(&working, tax, &fixed, None, &mut Vec::new());
    outcome
        .rules
        .into_iter()
        .map(|w| from_working(w, &fixed, side))
        .collect()
}

fn generalize_group(
    fixed: &Itemset,
    rules: &[AssociationRule],
    taxes: &TaxonomySet,
    side: Side,
    opts: &GartOptions,
) -> (Vec<GeneralizedRule>, Vec<(Item, Item)>) {
    let mut working: Vec<Working> = rules
        .iter()
        .map(|r| Working {
            items: r.side(side).iter().map(|i| (i.clone(), 0)).collect(),
            sources: std::iter::once(r.clone()).collect(),
        })
        .collect();
    let mut collisions = Vec::new();
    for tax in taxes.taxonomies() {
        loop {
            let outcome = ascend_pass(&working, tax, fixed, opts.max_level, &mut collisions);
            if !outcome.moved {
                break;
            }
            if opts.merge_only && outcome.rules.len() == working.len() {
                break;
            }
            working = outcome.rules;
        }
    }
    collisions.sort();
    collisions.dedup();
    let out = working
        .into_iter()
        .map(|w| from_working(w, fixed, side))
        .collect();
    (out, collisions)
}

/// [`generalize_with_warnings`] without the warnings.
pub fn generalize(
    rules: &RuleSet,
    taxes: &TaxonomySet,
    side: Side,
    opts: &GartOptions,
    db: Option<&TransactionDatabase>,
) -> Result<GeneralizedRuleSet> {
    generalize_with_warnings(rules, taxes, side, opts, db).map(|(set, _)| set)
}

/// Rules of one group plus the lifts blocked by collisions.
type GroupOutcome = (Vec<GeneralizedRule>, Vec<(Item, Item)>);

pub fn generalize_with_warnings(
    rules: &RuleSet,
    taxes: &TaxonomySet,
    side: Side,
    opts: &GartOptions,
    db: Option<&TransactionDatabase>,
) -> Result<(GeneralizedRuleSet, Vec<Warning>)> {
    opts.validate()?;
    if let Some(db) = db {
        if db.is_empty() {
            return Err(Error::EmptyDatabase);
        }
    }

    let groups: Vec<(Itemset, Vec<AssociationRule>)> =
        partition_by_fixed_side(rules, side).into_iter().collect();
    let results: Vec<GroupOutcome> = groups
        .par_iter()
        .map(|(fixed, group)| generalize_group(fixed, group, taxes, side, opts))
        .collect();

    let mut warnings = Vec::new();
    let mut out = Vec::with_capacity(rules.len());
    for ((fixed, _), (group_rules, collisions)) in groups.iter().zip(results) {
        for (item, fixed_item) in collisions {
            warnings.push(Warning::SideCollision {
                rule: format!("group with fixed side {{{fixed}}}"),
                item,
                fixed: fixed_item,
            });
        }
        out.extend(group_rules);
    }
    out.sort_by(|a, b| (&a.lhs, &a.rhs).cmp(&(&b.lhs, &b.rhs)));

    let touches_taxonomy = rules
        .iter()
        .any(|r| r.side(side).iter().any(|i| taxes.taxonomy_of(i).is_some()));
    if !rules.is_empty() && !touches_taxonomy {
        warnings.push(Warning::NothingToGeneralize);
    }

    let mut n_transactions = None;
    if let Some(db) = db {
        warnings.extend(
            taxes
                .internal_items_in(db)
                .into_iter()
                .map(Warning::InternalItemInDatabase),
        );
        let tables: Vec<ContingencyTable> = out
            .par_iter()
            .map(|r| contingency(db, r, taxes))
            .collect::<Result<_>>()?;
        for (rule, table) in out.iter_mut().zip(tables) {
            rule.table = Some(table);
        }
        n_transactions = Some(db.len() as u64);
    }

    Ok((
        GeneralizedRuleSet {
            side,
            options: *opts,
            mining_params: rules.mining_params,
            n_transactions,
            taxonomies: taxes.clone(),
            rules: out,
        },
        warnings,
    ))
}

/// For each item of a set, the names a transaction may carry to match it:
/// the item itself or anything below it.
struct SetMatcher<'a> {
    alternatives: Vec<HashSet<&'a str>>,
}

impl<'a> SetMatcher<'a> {
    fn new(set: &'a Itemset, below: &'a [BTreeSet<Item>]) -> Self {
        let alternatives = set
            .iter()
            .zip(below)
            .map(|(item, desc)| {
                std::iter::once(item.as_str())
                    .chain(desc.iter().map(Item::as_str))
                    .collect()
            })
            .collect();
        SetMatcher { alternatives }
    }

    fn matches(&self, transaction: &Itemset) -> bool {
        self.alternatives
            .iter()
            .all(|alt| transaction.iter().any(|i| alt.contains(i.as_str())))
    }
}

/// Contingency table of `lhs => rhs`, where a transaction matches an itemset
/// when, for every member, it holds the member itself or one of its
/// taxonomy descendants.
pub fn contingency_for(
    db: &TransactionDatabase,
    lhs: &Itemset,
    rhs: &Itemset,
    taxes: &TaxonomySet,
) -> Result<ContingencyTable> {
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let lhs_below: Vec<BTreeSet<Item>> = lhs.iter().map(|i| taxes.descendants(i)).collect();
    let rhs_below: Vec<BTreeSet<Item>> = rhs.iter().map(|i| taxes.descendants(i)).collect();
    let lhs_match = SetMatcher::new(lhs, &lhs_below);
    let rhs_match = SetMatcher::new(rhs, &rhs_below);
    let mut cells = [0u64; 4];
    for t in db.transactions() {
        let l = lhs_match.matches(&t.items);
        let r = rhs_match.matches(&t.items);
        cells[match (l, r) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        }] += 1;
    }
    Ok(ContingencyTable::new(cells[0], cells[1], cells[2], cells[3]))
}

pub fn contingency(db: &TransactionDatabase, rule: &GeneralizedRule, taxes: &TaxonomySet) -> Result<ContingencyTable> {
    contingency_for(db, &rule.lhs, &rule.rhs, taxes)
}

/// The rule with each generalized item replaced by each of its leaves.
pub fn expand(rule: &GeneralizedRule, taxes: &TaxonomySet) -> Vec<(Itemset, Itemset)> {
    let choices: Vec<Vec<Item>> = rule
        .generalized_side()
        .iter()
        .map(|item| {
            if rule.generalized_items.contains(item) {
                leaf_descendants(taxes, item).as_slice().to_vec()
            } else {
                vec![item.clone()]
            }
        })
        .collect();

    let mut combos: Vec<Vec<Item>> = vec![Vec::new()];
    for options in &choices {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut next = prefix.clone();
                    next.push(o.clone());
                    next
                })
            })
            .collect();
    }

    let fixed = rule.fixed_side();
    let expansions: BTreeSet<(Itemset, Itemset)> = combos
        .into_iter()
        .map(Itemset::from)
        .filter(|moving| moving.is_disjoint(fixed))
        .map(|moving| match rule.side {
            Side::Lhs => (moving, fixed.clone()),
            Side::Rhs => (fixed.clone(), moving),
        })
        .collect();
    expansions.into_iter().collect()
}
