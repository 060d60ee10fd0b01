//! Random inputs and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use genrules::gart::GartOptions;
use genrules::miner::mine;
use genrules::model::{AssociationRule, Item, Itemset, MiningParams, RuleSet, Side, TransactionDatabase};
use genrules::taxonomy::{build_taxonomy, Taxonomy, TaxonomyEdge, TaxonomySet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn item(name: &str) -> Item {
    Item::new(name).unwrap()
}

pub fn items(names: &[&str]) -> Itemset {
    Itemset::parse(names.iter().copied()).unwrap()
}

// ---- the clothing example ----

pub fn clothing_rules() -> RuleSet {
    RuleSet::from_rules([
        AssociationRule::parse(&["short", "slipper"], &["cap"]).unwrap(),
        AssociationRule::parse(&["sandal", "short"], &["cap"]).unwrap(),
        AssociationRule::parse(&["sandal", "t-shirt"], &["cap"]).unwrap(),
        AssociationRule::parse(&["slipper", "t-shirt"], &["cap"]).unwrap(),
    ])
}

pub fn tree(name: &str, edges: &[(&str, &str)]) -> Taxonomy {
    build_taxonomy(edges.iter().map(|(c, p)| TaxonomyEdge::parse(c, p).unwrap()), name).unwrap()
}

pub fn light_clothes() -> Taxonomy {
    tree("clothes", &[("t-shirt", "light clothes"), ("short", "light clothes")])
}

pub fn light_shoes() -> Taxonomy {
    tree("shoes", &[("slipper", "light shoes"), ("sandal", "light shoes")])
}

pub fn clothing_taxonomies() -> TaxonomySet {
    TaxonomySet::new(vec![light_clothes(), light_shoes()]).unwrap()
}

pub fn clothing_db() -> TransactionDatabase {
    TransactionDatabase::from_strs(&[
        &["t-shirt", "slipper", "cap"],
        &["short", "slipper", "cap"],
        &["sandal", "short", "cap"],
        &["sandal", "t-shirt", "cap"],
        &["slipper", "t-shirt", "cap"],
        &["cap", "jacket"],
        &["t-shirt", "sandal"],
    ])
    .unwrap()
}

// ---- random inputs ----

/// At most `max_tx` non-empty baskets over `universe`.
pub fn random_db(rng: &mut ChaCha8Rng, max_tx: usize, universe: &[Item]) -> TransactionDatabase {
    let n = rng.gen_range(1..=max_tx);
    let baskets = (0..n).map(|_| {
        let mut basket: Vec<Item> = universe.iter().filter(|_| rng.gen_bool(0.45)).cloned().collect();
        if basket.is_empty() {
            basket.push(universe.choose(rng).unwrap().clone());
        }
        Itemset::from(basket)
    });
    TransactionDatabase::new(baskets.collect::<Vec<_>>())
}

pub fn leaves(n: usize) -> Vec<Item> {
    (0..n).map(|i| item(&format!("i{i}"))).collect()
}

/// Up to three disjoint random trees over a random part of `leaves`. Inner
/// node names contain spaces on purpose.
pub fn random_forest(rng: &mut ChaCha8Rng, leaves: &[Item]) -> TaxonomySet {
    let mut pool = leaves.to_vec();
    pool.shuffle(rng);
    let n_tax = rng.gen_range(0..=3usize).min(pool.len());
    let mut trees = Vec::new();
    for t in 0..n_tax {
        let take = rng.gen_range(1..=pool.len().saturating_sub(n_tax - t - 1).max(1));
        let members: Vec<Item> = pool.drain(..take.min(pool.len())).collect();
        if members.is_empty() {
            break;
        }
        let inner: Vec<Item> = (0..rng.gen_range(1..=3)).map(|j| item(&format!("t{t} n{j}"))).collect();
        let mut edges = Vec::new();
        for j in 1..inner.len() {
            if rng.gen_bool(0.8) {
                let p = rng.gen_range(0..j);
                edges.push(TaxonomyEdge::new(inner[j].clone(), inner[p].clone()));
            }
        }
        for m in members {
            edges.push(TaxonomyEdge::new(m, inner.choose(rng).unwrap().clone()));
        }
        trees.push(build_taxonomy(edges, format!("tax {t}")).unwrap());
    }
    TaxonomySet::new(trees).unwrap()
}

pub struct FuzzCase {
    pub db: TransactionDatabase,
    pub rules: RuleSet,
    pub taxes: TaxonomySet,
    pub side: Side,
    pub opts: GartOptions,
}

/// Rules mined from a small random database, a random forest over some of
/// its items, a random side and random options.
pub fn fuzz_case(seed: u64) -> FuzzCase {
    let mut rng = rng(seed);
    let universe = leaves(rng.gen_range(2..=7));
    let db = random_db(&mut rng, 10, &universe);
    let params = MiningParams::new(rng.gen_range(0.1..0.5), rng.gen_range(0.05..0.7), rng.gen_range(2..=4)).unwrap();
    let rules = mine(&db, &params).unwrap();
    let taxes = random_forest(&mut rng, &universe);
    let side = if rng.gen_bool(0.5) { Side::Lhs } else { Side::Rhs };
    let opts = GartOptions {
        max_level: if rng.gen_bool(0.3) { Some(rng.gen_range(1..=3)) } else { None },
        merge_only: rng.gen_bool(0.3),
    };
    FuzzCase { db, rules, taxes, side, opts }
}

// ---- oracles ----

/// Does the basket contain `g` itself or something below it? Walks each
/// basket item's parent chain.
pub fn naive_contains(basket: &Itemset, g: &Item, taxes: &TaxonomySet) -> bool {
    basket.iter().any(|x| {
        let mut cur = Some(x);
        while let Some(c) = cur {
            if c == g {
                return true;
            }
            cur = taxes.parent_of(c);
        }
        false
    })
}

/// `(n_lr, n_lnr, n_nlr, n_nlnr)` by looking at every basket.
pub fn naive_table(db: &TransactionDatabase, lhs: &Itemset, rhs: &Itemset, taxes: &TaxonomySet) -> (u64, u64, u64, u64) {
    let mut cells = (0, 0, 0, 0);
    for t in db.transactions() {
        let l = lhs.iter().all(|g| naive_contains(&t.items, g, taxes));
        let r = rhs.iter().all(|g| naive_contains(&t.items, g, taxes));
        match (l, r) {
            (true, true) => cells.0 += 1,
            (true, false) => cells.1 += 1,
            (false, true) => cells.2 += 1,
            (false, false) => cells.3 += 1,
        }
    }
    cells
}

pub fn count(db: &TransactionDatabase, set: &Itemset) -> usize {
    db.transactions().iter().filter(|t| set.is_subset(&t.items)).count()
}

/// Every rule over every itemset of the universe, kept by the same
/// thresholds the miner applies.
pub fn enumerate_rules(db: &TransactionDatabase, params: &MiningParams) -> RuleSet {
    let universe: Vec<Item> = db.universe().iter().cloned().collect();
    let n = db.len();
    let mut out = Vec::new();
    for mask in 1u64..(1 << universe.len()) {
        let set: Itemset = universe.iter().enumerate().filter(|(j, _)| mask & (1 << j) != 0).map(|(_, i)| i.clone()).collect();
        if set.len() < 2 || set.len() > params.max_items {
            continue;
        }
        let c = count(db, &set);
        if (c as f64 / n as f64) < params.min_support {
            continue;
        }
        let members: Vec<&Item> = set.iter().collect();
        for sub in 1u64..(1 << members.len()) - 1 {
            let lhs: Itemset = members.iter().enumerate().filter(|(j, _)| sub & (1 << j) != 0).map(|(_, i)| (*i).clone()).collect();
            let rhs = set.difference(&lhs);
            let confidence = c as f64 / count(db, &lhs) as f64;
            if confidence >= params.min_confidence {
                out.push(AssociationRule::new(lhs, rhs, Some(c as f64 / n as f64), Some(confidence)).unwrap());
            }
        }
    }
    RuleSet::from_rules(out).with_params(*params)
}

pub fn source_keys(rules: &RuleSet) -> BTreeSet<String> {
    rules.iter().map(|r| r.key().to_string()).collect()
}
