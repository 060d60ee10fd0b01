//! Level-wise Apriori mining and rule derivation.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{AssociationRule, Item, Itemset, MiningParams, RuleSet, TransactionDatabase};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequentItemset {
    pub items: Itemset,
    pub count: usize,
}

/// Smallest absolute count `c` with `c / n >= min_support`.
///
/// Starts from `ceil(min_support * n)` and corrects for the product rounding
/// up past an exact fraction (0.3 * 10 is 3.0000000000000004 in binary).
pub fn min_count(min_support: f64, n: usize) -> usize {
    let mut c = (min_support * n as f64).ceil() as usize;
    while c > 0 && (c - 1) as f64 / n as f64 >= min_support {
        c -= 1;
    }
    while (c as f64 / n as f64) < min_support {
        c += 1;
    }
    c.max(1)
}

fn is_subset(small: &[u32], big: &[u32]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

/// All itemsets of at most `max_items` items reaching `min_support`, with
/// exact counts, ordered by size and then lexicographically.
pub fn frequent_itemsets(
    db: &TransactionDatabase,
    min_support: f64,
    max_items: usize,
) -> Result<Vec<FrequentItemset>> {
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    if !(min_support > 0.0 && min_support <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "min_support must lie in (0, 1], got {min_support}"
        )));
    }
    if max_items == 0 {
        return Err(Error::InvalidParams("max_items must be at least 1".into()));
    }

    let universe: &[Item] = db.universe().as_slice();
    let index: HashMap<&Item, u32> = universe
        .iter()
        .enumerate()
        .map(|(i, item)| (item, i as u32))
        .collect();
    // Ids follow the universe order, so sorted id vectors are canonical.
    let baskets: Vec<Vec<u32>> = db
        .transactions()
        .iter()
        .map(|t| t.items.iter().map(|i| index[i]).collect())
        .collect();
    let threshold = min_count(min_support, db.len());

    let mut singles = vec![0usize; universe.len()];
    for basket in &baskets {
        for &id in basket {
            singles[id as usize] += 1;
        }
    }
    let mut level: Vec<(Vec<u32>, usize)> = singles
        .iter()
        .enumerate()
        .filter(|(_, &c)| c >= threshold)
        .map(|(id, &c)| (vec![id as u32], c))
        .collect();

    let mut found: Vec<(Vec<u32>, usize)> = Vec::new();
    while !level.is_empty() {
        found.extend(level.iter().cloned());
        if level[0].0.len() >= max_items {
            break;
        }
        let candidates = next_candidates(&level);
        level = candidates
            .into_par_iter()
            .map(|cand| {
                let count = baskets.iter().filter(|b| is_subset(&cand, b)).count();
                (cand, count)
            })
            .filter(|(_, c)| *c >= threshold)
            .collect();
    }

    Ok(found
        .into_iter()
        .map(|(ids, count)| FrequentItemset {
            items: ids.iter().map(|&i| universe[i as usize].clone()).collect(),
            count,
        })
        .collect())
}

/// Joins k-itemsets sharing a (k-1)-prefix and drops candidates with an
/// infrequent k-subset. `level` must be sorted.
fn next_candidates(level: &[(Vec<u32>, usize)]) -> Vec<Vec<u32>> {
    let frequent: HashSet<&[u32]> = level.iter().map(|(s, _)| s.as_slice()).collect();
    let k = level[0].0.len();
    let mut out = Vec::new();
    for (i, (a, _)) in level.iter().enumerate() {
        for (b, _) in &level[i + 1..] {
            if a[..k - 1] != b[..k - 1] {
                break;
            }
            let mut cand = a.clone();
            cand.push(b[k - 1]);
            let closed = (0..cand.len()).all(|skip| {
                let sub: Vec<u32> = cand
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != skip)
                    .map(|(_, &x)| x)
                    .collect();
                frequent.contains(sub.as_slice())
            });
            if closed {
                out.push(cand);
            }
        }
    }
    out
}

/// Splits every frequent itemset into `lhs => rhs` rules meeting
/// `min_confidence`.
pub fn derive_rules(freq: &[FrequentItemset], params: &MiningParams, n: usize) -> Result<RuleSet> {
    params.validate()?;
    let counts: HashMap<&Itemset, usize> = freq.iter().map(|f| (&f.items, f.count)).collect();
    let mut rules = Vec::new();
    for f in freq {
        let k = f.items.len();
        if k < 2 || k > params.max_items {
            continue;
        }
        let items = f.items.as_slice();
        for mask in 1..(1u64 << k) - 1 {
            let (lhs, rhs): (Vec<_>, Vec<_>) = items
                .iter()
                .enumerate()
                .partition(|(j, _)| mask & (1 << j) != 0);
            let lhs: Itemset = lhs.into_iter().map(|(_, i)| i.clone()).collect();
            let rhs: Itemset = rhs.into_iter().map(|(_, i)| i.clone()).collect();
            let lhs_count = *counts.get(&lhs).ok_or_else(|| Error::ClosureViolation {
                itemset: f.items.join(", "),
                missing: lhs.join(", "),
            })?;
            let confidence = f.count as f64 / lhs_count as f64;
            if confidence >= params.min_confidence {
                let support = f.count as f64 / n as f64;
                rules.push(AssociationRule::new(lhs, rhs, Some(support), Some(confidence))?);
            }
        }
    }
    Ok(RuleSet::from_rules(rules).with_params(*params))
}

pub fn mine(db: &TransactionDatabase, params: &MiningParams) -> Result<RuleSet> {
    params.validate()?;
    let freq = frequent_itemsets(db, params.min_support, params.max_items)?;
    derive_rules(&freq, params, db.len())
}
