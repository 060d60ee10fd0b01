//! Items, itemsets, transactions and association rules.
//!
//! Every value here is immutable once built. Itemsets keep their members in
//! lexicographic order so that equality, hashing and serialization never
//! depend on the order items were supplied in.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// An opaque, case-sensitive item label.
///
/// Labels may contain interior spaces (taxonomy nodes such as
/// `light clothes`), but never tabs, line breaks, other control characters,
/// or leading/trailing whitespace.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Item(String);

impl Item {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if Self::is_valid(&name) {
            Ok(Item(name))
        } else {
            Err(Error::InvalidItem(name))
        }
    }

    pub fn is_valid(name: &str) -> bool {
        !name.is_empty()
            && !name.chars().any(char::is_control)
            && !name.starts_with(char::is_whitespace)
            && !name.ends_with(char::is_whitespace)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Item {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Item::new(value)
    }
}

impl From<Item> for String {
    fn from(item: Item) -> String {
        item.0
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for Item {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// A duplicate-free set of items in canonical (lexicographic) order.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<Item>", into = "Vec<Item>")]
pub struct Itemset(Vec<Item>);

impl Itemset {
    pub fn empty() -> Self {
        Itemset(Vec::new())
    }

    pub fn parse<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        names
            .into_iter()
            .map(Item::new)
            .collect::<Result<Vec<_>>>()
            .map(Itemset::from)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Item> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Item] {
        &self.0
    }

    pub fn contains(&self, item: &Item) -> bool {
        self.0.binary_search(item).is_ok()
    }

    pub fn contains_str(&self, name: &str) -> bool {
        self.0.binary_search_by(|i| i.as_str().cmp(name)).is_ok()
    }

    pub fn is_subset(&self, other: &Itemset) -> bool {
        self.0.iter().all(|i| other.contains(i))
    }

    pub fn is_disjoint(&self, other: &Itemset) -> bool {
        self.0.iter().all(|i| !other.contains(i))
    }

    pub fn union(&self, other: &Itemset) -> Itemset {
        self.0.iter().chain(other.0.iter()).cloned().collect()
    }

    pub fn intersection(&self, other: &Itemset) -> Itemset {
        self.0.iter().filter(|i| other.contains(i)).cloned().collect()
    }

    pub fn difference(&self, other: &Itemset) -> Itemset {
        self.0.iter().filter(|i| !other.contains(i)).cloned().collect()
    }

    /// Items joined with ` & `, the way rules are rendered.
    pub fn join(&self, sep: &str) -> String {
        let names: Vec<&str> = self.0.iter().map(Item::as_str).collect();
        names.join(sep)
    }
}

impl From<Vec<Item>> for Itemset {
    fn from(mut items: Vec<Item>) -> Self {
        items.sort();
        items.dedup();
        Itemset(items)
    }
}

impl From<Itemset> for Vec<Item> {
    fn from(set: Itemset) -> Vec<Item> {
        set.0
    }
}

impl FromIterator<Item> for Itemset {
    fn from_iter<T: IntoIterator<Item = Item>>(iter: T) -> Self {
        Itemset::from(iter.into_iter().collect::<Vec<_>>())
    }
}

impl From<BTreeSet<Item>> for Itemset {
    fn from(set: BTreeSet<Item>) -> Self {
        Itemset(set.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Itemset {
    type Item = &'a Item;
    type IntoIter = std::slice::Iter<'a, Item>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for Itemset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.join(" & "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub id: usize,
    pub items: Itemset,
}

/// Ordered baskets plus the exact union of their items.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransactionDatabase {
    transactions: Vec<Transaction>,
    universe: Itemset,
}

impl TransactionDatabase {
    pub fn new(baskets: impl IntoIterator<Item = Itemset>) -> Self {
        let transactions: Vec<Transaction> = baskets
            .into_iter()
            .enumerate()
            .map(|(id, items)| Transaction { id, items })
            .collect();
        let universe = transactions
            .iter()
            .flat_map(|t| t.items.iter().cloned())
            .collect();
        TransactionDatabase {
            transactions,
            universe,
        }
    }

    pub fn from_strs(baskets: &[&[&str]]) -> Result<Self> {
        let sets = baskets
            .iter()
            .map(|b| Itemset::parse(b.iter().copied()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(sets))
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn universe(&self) -> &Itemset {
        &self.universe
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "lhs")]
    Lhs,
    #[serde(rename = "rhs")]
    Rhs,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Lhs => Side::Rhs,
            Side::Rhs => Side::Lhs,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Lhs => "lhs",
            Side::Rhs => "rhs",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lhs" | "left" | "antecedent" => Ok(Side::Lhs),
            "rhs" | "right" | "consequent" => Ok(Side::Rhs),
            _ => Err(Error::InvalidParams(format!(
                "side must be lhs or rhs, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Canonical identity of a rule: its two sides as sets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleKey {
    pub lhs: Itemset,
    pub rhs: Itemset,
}

impl RuleKey {
    /// A short URL-safe digest of the key.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for item in &self.lhs {
            hasher.update(item.as_str().as_bytes());
            hasher.update([0x1f]);
        }
        hasher.update([0x1e]);
        for item in &self.rhs {
            hasher.update(item.as_str().as_bytes());
            hasher.update([0x1f]);
        }
        hasher.finalize()[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

impl fmt::Display for RuleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => {}", self.lhs, self.rhs)
    }
}

pub fn canonicalize_rule(lhs: Itemset, rhs: Itemset) -> Result<RuleKey> {
    if lhs.is_empty() || rhs.is_empty() {
        return Err(Error::InvalidRule("both sides must be non-empty".into()));
    }
    if !lhs.is_disjoint(&rhs) {
        let shared = lhs.intersection(&rhs);
        return Err(Error::InvalidRule(format!(
            "antecedent and consequent share {{{shared}}}"
        )));
    }
    Ok(RuleKey { lhs, rhs })
}

/// `lhs => rhs` with the measures it was mined with, when known.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssociationRule {
    pub lhs: Itemset,
    pub rhs: Itemset,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

impl AssociationRule {
    pub fn new(
        lhs: Itemset,
        rhs: Itemset,
        support: Option<f64>,
        confidence: Option<f64>,
    ) -> Result<Self> {
        for (name, value) in [("support", support), ("confidence", confidence)] {
            if let Some(v) = value {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidRule(format!("{name} {v} is outside [0, 1]")));
                }
            }
        }
        let key = canonicalize_rule(lhs, rhs)?;
        // -0.0 becomes 0.0
        Ok(AssociationRule {
            lhs: key.lhs,
            rhs: key.rhs,
            support: support.map(|v| v + 0.0),
            confidence: confidence.map(|v| v + 0.0),
        })
    }

    /// Rule without measures, from item names. Handy in tests and examples.
    pub fn parse(lhs: &[&str], rhs: &[&str]) -> Result<Self> {
        Self::new(
            Itemset::parse(lhs.iter().copied())?,
            Itemset::parse(rhs.iter().copied())?,
            None,
            None,
        )
    }

    pub fn key(&self) -> RuleKey {
        RuleKey {
            lhs: self.lhs.clone(),
            rhs: self.rhs.clone(),
        }
    }

    pub fn side(&self, side: Side) -> &Itemset {
        rule_side(self, side)
    }
}

pub fn rule_side(rule: &AssociationRule, side: Side) -> &Itemset {
    match side {
        Side::Lhs => &rule.lhs,
        Side::Rhs => &rule.rhs,
    }
}

fn cmp_measure(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => x.total_cmp(&y),
    }
}

impl PartialEq for AssociationRule {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for AssociationRule {}

impl PartialOrd for AssociationRule {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AssociationRule {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lhs
            .cmp(&other.lhs)
            .then_with(|| self.rhs.cmp(&other.rhs))
            .then_with(|| cmp_measure(self.support, other.support))
            .then_with(|| cmp_measure(self.confidence, other.confidence))
    }
}

impl fmt::Display for AssociationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => {}", self.lhs, self.rhs)
    }
}

/// Apriori thresholds a rule set was mined with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiningParams {
    pub min_support: f64,
    pub min_confidence: f64,
    pub max_items: usize,
}

impl MiningParams {
    pub fn new(min_support: f64, min_confidence: f64, max_items: usize) -> Result<Self> {
        let params = MiningParams {
            min_support,
            min_confidence,
            max_items,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !unit(self.min_support) {
            return Err(Error::InvalidParams(format!(
                "min_support must lie in (0, 1], got {}",
                self.min_support
            )));
        }
        if !unit(self.min_confidence) {
            return Err(Error::InvalidParams(format!(
                "min_confidence must lie in (0, 1], got {}",
                self.min_confidence
            )));
        }
        if self.max_items < 2 {
            return Err(Error::InvalidParams(format!(
                "max_items must be at least 2, got {}",
                self.max_items
            )));
        }
        Ok(())
    }
}

impl Default for MiningParams {
    /// 0.5 support, 0.5 confidence, at most 5 items per rule.
    fn default() -> Self {
        MiningParams {
            min_support: 0.5,
            min_confidence: 0.5,
            max_items: 5,
        }
    }
}

/// Rules that are unique under canonical equality, kept in key order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuleSet {
    rules: Vec<AssociationRule>,
    pub mining_params: Option<MiningParams>,
}

impl RuleSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set, keeping the first rule seen for every key.
    pub fn from_rules(rules: impl IntoIterator<Item = AssociationRule>) -> Self {
        let mut set = RuleSet::new();
        for rule in rules {
            set.insert(rule);
        }
        set
    }

    pub fn with_params(mut self, params: MiningParams) -> Self {
        self.mining_params = Some(params);
        self
    }

    /// Returns false when a rule with the same key is already present.
    pub fn insert(&mut self, rule: AssociationRule) -> bool {
        let key = (&rule.lhs, &rule.rhs);
        match self
            .rules
            .binary_search_by(|r| (&r.lhs, &r.rhs).cmp(&key))
        {
            Ok(_) => false,
            Err(pos) => {
                self.rules.insert(pos, rule);
                true
            }
        }
    }

    pub fn get(&self, key: &RuleKey) -> Option<&AssociationRule> {
        self.rules
            .binary_search_by(|r| (&r.lhs, &r.rhs).cmp(&(&key.lhs, &key.rhs)))
            .ok()
            .map(|i| &self.rules[i])
    }

    pub fn rules(&self) -> &[AssociationRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, AssociationRule> {
        self.rules.iter()
    }
}

impl<'a> IntoIterator for &'a RuleSet {
    type Item = &'a AssociationRule;
    type IntoIter = std::slice::Iter<'a, AssociationRule>;

    fn into_iter(self) -> Self::IntoIter {
        self.rules.iter()
    }
}
