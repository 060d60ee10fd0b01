//! Is-a forests over items.
//!
//! A [`Taxonomy`] is a forest: every node has at most one parent and parent
//! links never loop. Internal nodes are the generalized items; leaves are the
//! items expected in transactions. A [`TaxonomySet`] holds several trees whose
//! node sets are pairwise disjoint.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{Item, Itemset, TransactionDatabase};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaxonomyEdge {
    pub child: Item,
    pub parent: Item,
}

impl TaxonomyEdge {
    pub fn new(child: Item, parent: Item) -> Self {
        TaxonomyEdge { child, parent }
    }

    pub fn parse(child: &str, parent: &str) -> Result<Self> {
        Ok(TaxonomyEdge {
            child: Item::new(child)?,
            parent: Item::new(parent)?,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Taxonomy {
    name: String,
    parents: BTreeMap<Item, Item>,
    children: BTreeMap<Item, BTreeSet<Item>>,
    roots: BTreeSet<Item>,
}

impl Taxonomy {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn roots(&self) -> &BTreeSet<Item> {
        &self.roots
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    /// Edges in child order.
    pub fn edges(&self) -> impl Iterator<Item = TaxonomyEdge> + '_ {
        self.parents
            .iter()
            .map(|(c, p)| TaxonomyEdge::new(c.clone(), p.clone()))
    }

    pub fn nodes(&self) -> BTreeSet<&Item> {
        self.parents.keys().chain(self.parents.values()).collect()
    }

    pub fn contains(&self, item: &Item) -> bool {
        self.parents.contains_key(item) || self.children.contains_key(item)
    }

    pub fn parent_of(&self, item: &Item) -> Option<&Item> {
        self.parents.get(item)
    }

    pub fn children_of(&self, item: &Item) -> impl Iterator<Item = &Item> {
        self.children.get(item).into_iter().flatten()
    }

    pub fn is_internal(&self, item: &Item) -> bool {
        self.children.contains_key(item)
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = &Item> {
        self.children.keys()
    }

    /// Ancestors from the parent upwards, ending at a root.
    pub fn ancestors<'a>(&'a self, item: &'a Item) -> impl Iterator<Item = &'a Item> + 'a {
        std::iter::successors(self.parents.get(item), move |p| self.parents.get(*p))
    }

    pub fn depth(&self, item: &Item) -> usize {
        self.ancestors(item).count()
    }
}

pub fn build_taxonomy(
    edges: impl IntoIterator<Item = TaxonomyEdge>,
    name: impl Into<String>,
) -> Result<Taxonomy> {
    let mut parents: BTreeMap<Item, Item> = BTreeMap::new();
    for edge in edges {
        if edge.child == edge.parent {
            return Err(Error::Cycle {
                node: edge.child.to_string(),
            });
        }
        match parents.get(&edge.child) {
            Some(existing) if *existing == edge.parent => {}
            Some(existing) => {
                return Err(Error::DuplicateParent {
                    child: edge.child.to_string(),
                    first: existing.to_string(),
                    second: edge.parent.to_string(),
                })
            }
            None => {
                parents.insert(edge.child, edge.parent);
            }
        }
    }

    // Every walk from a node must reach a root within |edges| steps.
    let limit = parents.len();
    for start in parents.keys() {
        let mut current = start;
        let mut steps = 0;
        while let Some(p) = parents.get(current) {
            steps += 1;
            if steps > limit {
                return Err(Error::Cycle {
                    node: start.to_string(),
                });
            }
            current = p;
        }
    }

    let mut children: BTreeMap<Item, BTreeSet<Item>> = BTreeMap::new();
    for (c, p) in &parents {
        children.entry(p.clone()).or_default().insert(c.clone());
    }
    let roots = children
        .keys()
        .filter(|n| !parents.contains_key(*n))
        .cloned()
        .collect();

    Ok(Taxonomy {
        name: name.into(),
        parents,
        children,
        roots,
    })
}

/// Several disjoint taxonomies, in processing order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TaxonomySet {
    taxonomies: Vec<Taxonomy>,
    owner: BTreeMap<Item, usize>,
}

impl TaxonomySet {
    pub fn new(taxonomies: Vec<Taxonomy>) -> Result<Self> {
        let mut owner: BTreeMap<Item, usize> = BTreeMap::new();
        for (idx, tax) in taxonomies.iter().enumerate() {
            for node in tax.nodes() {
                if let Some(&prev) = owner.get(node) {
                    return Err(Error::OverlappingTaxonomies {
                        item: node.to_string(),
                        first: taxonomies[prev].name.clone(),
                        second: tax.name.clone(),
                    });
                }
                owner.insert(node.clone(), idx);
            }
        }
        Ok(TaxonomySet { taxonomies, owner })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn taxonomies(&self) -> &[Taxonomy] {
        &self.taxonomies
    }

    pub fn len(&self) -> usize {
        self.taxonomies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taxonomies.is_empty()
    }

    /// The tree an item belongs to, if any.
    pub fn taxonomy_of(&self, item: &Item) -> Option<&Taxonomy> {
        self.owner.get(item).map(|&i| &self.taxonomies[i])
    }

    pub fn parent_of(&self, item: &Item) -> Option<&Item> {
        self.taxonomy_of(item).and_then(|t| t.parent_of(item))
    }

    pub fn is_internal(&self, item: &Item) -> bool {
        self.taxonomy_of(item).is_some_and(|t| t.is_internal(item))
    }

    /// Same set with the trees in a different order.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        Self::new(order.iter().map(|&i| self.taxonomies[i].clone()).collect())
    }

    /// Database items that are also internal taxonomy nodes. Allowed, but
    /// usually a modelling mistake.
    pub fn internal_items_in(&self, db: &TransactionDatabase) -> Vec<Item> {
        db.universe()
            .iter()
            .filter(|i| self.is_internal(i))
            .cloned()
            .collect()
    }

    /// Every node strictly below `item`, internal or leaf.
    pub fn descendants(&self, item: &Item) -> BTreeSet<Item> {
        let mut out = BTreeSet::new();
        if let Some(tax) = self.taxonomy_of(item) {
            let mut stack: Vec<&Item> = tax.children_of(item).collect();
            while let Some(node) = stack.pop() {
                if out.insert(node.clone()) {
                    stack.extend(tax.children_of(node));
                }
            }
        }
        out
    }
}

pub fn parent_of<'a>(tax: &'a Taxonomy, item: &Item) -> Option<&'a Item> {
    tax.parent_of(item)
}

/// Leaves reachable downwards from `item`; `{item}` when it is not an
/// internal node of any tree.
pub fn leaf_descendants(taxes: &TaxonomySet, item: &Item) -> Itemset {
    let Some(tax) = taxes.taxonomy_of(item).filter(|t| t.is_internal(item)) else {
        return std::iter::once(item.clone()).collect();
    };
    let mut leaves = Vec::new();
    let mut stack = vec![item];
    while let Some(node) = stack.pop() {
        if tax.is_internal(node) {
            stack.extend(tax.children_of(node));
        } else {
            leaves.push(node.clone());
        }
    }
    Itemset::from(leaves)
}

/// True when `anc` is reached from `desc` by one or more parent steps.
pub fn is_ancestor(taxes: &TaxonomySet, anc: &Item, desc: &Item) -> bool {
    taxes
        .taxonomy_of(desc)
        .is_some_and(|t| t.ancestors(desc).any(|a| a == anc))
}
