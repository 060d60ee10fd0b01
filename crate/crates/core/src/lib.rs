//! Association rule mining, taxonomy-driven rule generalization and rule
//! set analysis.
//!
//! The usual pipeline is
//!
//! 1. read baskets ([`formats::parse_transactions`]) and mine rules
//!    ([`miner::mine`]), or import an existing rule listing
//!    ([`formats::import_borgelt_rules`]);
//! 2. read one or more is-a taxonomies ([`formats::parse_taxonomies`]);
//! 3. generalize one side of the rules ([`gart::generalize`]), which groups
//!    rules by their other side, climbs the taxonomies and merges rules that
//!    become identical. The output is never larger than the input and keeps
//!    every input rule as the source of exactly one output rule;
//! 4. query the result by items and measures, and drill into expansions,
//!    sources and threshold violations ([`query`]).
//!
//! ```
//! use genrules::prelude::*;
//!
//! let rules = RuleSet::from_rules([
//!     AssociationRule::parse(&["short", "slipper"], &["cap"]).unwrap(),
//!     AssociationRule::parse(&["sandal", "short"], &["cap"]).unwrap(),
//!     AssociationRule::parse(&["sandal", "t-shirt"], &["cap"]).unwrap(),
//!     AssociationRule::parse(&["slipper", "t-shirt"], &["cap"]).unwrap(),
//! ]);
//! let taxonomies = parse_taxonomies(
//!     "= clothes\nt-shirt\tlight clothes\nshort\tlight clothes\n\
//!      = shoes\nslipper\tlight shoes\nsandal\tlight shoes\n",
//! )
//! .unwrap()
//! .value;
//!
//! let out = generalize(&rules, &taxonomies, Side::Lhs, &GartOptions::default(), None).unwrap();
//! assert_eq!(out.rules.len(), 1);
//! assert_eq!(out.rules[0].to_string(), "light clothes & light shoes => cap");
//! assert_eq!(out.rules[0].sources.len(), 4);
//! ```

pub mod error;
pub mod experiment;
pub mod formats;
pub mod gart;
pub mod measures;
pub mod miner;
pub mod model;
pub mod query;
pub mod taxonomy;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::formats::{
        export_borgelt_rules, import_borgelt_rules, parse_generalized, parse_ruleset, parse_ruleset_any,
        parse_taxonomies, parse_transactions, write_generalized, write_ruleset, write_taxonomies,
        write_transactions, ArtifactKind,
    };
    pub use crate::gart::{
        contingency, expand, generalize, generalize_with_warnings, ContingencyTable, GartOptions,
        GeneralizedRule, GeneralizedRuleSet,
    };
    pub use crate::measures::{flag_thresholds, measures_from_table, Measure, MeasureVector, ThresholdFlags};
    pub use crate::miner::{derive_rules, frequent_itemsets, mine};
    pub use crate::model::{
        AssociationRule, Item, Itemset, MiningParams, RuleKey, RuleSet, Side, TransactionDatabase,
    };
    pub use crate::query::{render_rule, run_query, RuleQuery, RuleView};
    pub use crate::taxonomy::{build_taxonomy, leaf_descendants, Taxonomy, TaxonomyEdge, TaxonomySet};
}
