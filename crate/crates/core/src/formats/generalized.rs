use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gart::{ContingencyTable, GartOptions, GeneralizedRule, GeneralizedRuleSet};
use crate::measures::{measures_from_table, MeasureVector};
use crate::model::{canonicalize_rule, AssociationRule, Item, Itemset, MiningParams, Side};
use crate::taxonomy::{build_taxonomy, TaxonomyEdge, TaxonomySet};

use super::{json_error, ArtifactKind, DocumentHeader};

#[derive(Serialize, Deserialize)]
struct GeneralizedDocument {
    header: DocumentHeader,
    side: Side,
    options: GartOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mining_params: Option<MiningParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_transactions: Option<u64>,
    taxonomies: Vec<TaxonomyDocument>,
    rules: Vec<RuleDocument>,
}

#[derive(Serialize, Deserialize)]
struct TaxonomyDocument {
    name: String,
    /// `[child, parent]` pairs
    edges: Vec<(Item, Item)>,
}

#[derive(Serialize, Deserialize)]
struct RuleDocument {
    /// Derived from lhs and rhs; ignored on input.
    #[serde(default)]
    key: String,
    lhs: Itemset,
    rhs: Itemset,
    generalized_items: Itemset,
    sources: Vec<AssociationRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<ContingencyTable>,
    /// Derived from the table; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    measures: Option<MeasureVector>,
}

pub fn write_generalized(set: &GeneralizedRuleSet) -> String {
    let doc = GeneralizedDocument {
        header: DocumentHeader::new(ArtifactKind::GeneralizedRuleSet),
        side: set.side,
        options: set.options,
        mining_params: set.mining_params,
        n_transactions: set.n_transactions,
        taxonomies: set
            .taxonomies
            .taxonomies()
            .iter()
            .map(|t| TaxonomyDocument {
                name: t.name().to_string(),
                edges: t.edges().map(|e| (e.child, e.parent)).collect(),
            })
            .collect(),
        rules: set
            .rules
            .iter()
            .map(|r| RuleDocument {
                key: r.key().digest(),
                lhs: r.lhs.clone(),
                rhs: r.rhs.clone(),
                generalized_items: r.generalized_items.clone(),
                sources: r.sources.clone(),
                table: r.table,
                measures: r.table.as_ref().and_then(|t| measures_from_table(t).ok()),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("generalized rule sets always serialize");
    text.push('\n');
    text
}

fn invalid(message: String) -> Error {
    Error::Document(format!("invalid generalized rule set: {message}"))
}

pub fn parse_generalized(text: &str) -> Result<GeneralizedRuleSet> {
    let doc: GeneralizedDocument = serde_json::from_str(text).map_err(json_error)?;
    doc.header.check(ArtifactKind::GeneralizedRuleSet)?;
    doc.options.validate()?;
    if let Some(params) = &doc.mining_params {
        params.validate()?;
    }
    let trees = doc
        .taxonomies
        .into_iter()
        .map(|t| build_taxonomy(t.edges.into_iter().map(|(c, p)| TaxonomyEdge::new(c, p)), t.name))
        .collect::<Result<Vec<_>>>()?;
    let taxonomies = TaxonomySet::new(trees)?;

    let side = doc.side;
    let mut seen_sources = BTreeSet::new();
    let mut rules = Vec::with_capacity(doc.rules.len());
    for r in doc.rules {
        let key = canonicalize_rule(r.lhs, r.rhs)?;
        let shown = key.to_string();
        let rule = GeneralizedRule {
            lhs: key.lhs,
            rhs: key.rhs,
            side,
            sources: r.sources,
            generalized_items: r.generalized_items,
            table: r.table,
        };
        if rule.sources.is_empty() {
            return Err(invalid(format!("rule {shown} has no sources")));
        }
        if !rule.generalized_items.is_subset(rule.generalized_side()) {
            return Err(invalid(format!(
                "generalized items of {shown} are not on its {side} side"
            )));
        }
        let mut sources = Vec::with_capacity(rule.sources.len());
        for s in &rule.sources {
            let s = AssociationRule::new(s.lhs.clone(), s.rhs.clone(), s.support, s.confidence)?;
            if s.side(side.other()) != rule.fixed_side() {
                return Err(invalid(format!(
                    "source {s} does not share the fixed side of {shown}"
                )));
            }
            if !seen_sources.insert(s.key()) {
                return Err(invalid(format!("source {s} appears more than once")));
            }
            sources.push(s);
        }
        sources.sort();
        if let Some(t) = &rule.table {
            if !t.is_consistent() {
                return Err(invalid(format!("table cells of {shown} do not add up to n")));
            }
            if doc.n_transactions.is_some_and(|n| n != t.n) {
                return Err(invalid(format!("table of {shown} has a different n")));
            }
        }
        rules.push(GeneralizedRule { sources, ..rule });
    }
    rules.sort_by(|a, b| (&a.lhs, &a.rhs).cmp(&(&b.lhs, &b.rhs)));
    if let Some(w) = rules.windows(2).find(|w| w[0].key() == w[1].key()) {
        return Err(invalid(format!("rule {} appears more than once", w[0])));
    }

    Ok(GeneralizedRuleSet {
        side,
        options: doc.options,
        mining_params: doc.mining_params,
        n_transactions: doc.n_transactions,
        taxonomies,
        rules,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gart::fixtures::{clothing_db, clothing_rules, clothing_taxonomies};
    use crate::gart::generalize;

    #[test]
    fn clothing_document() {
        let db = clothing_db();
        let set = generalize(&clothing_rules(), &clothing_taxonomies(), Side::Lhs, &GartOptions::default(), Some(&db)).unwrap();
        let text = write_generalized(&set);
        let back = parse_generalized(&text).unwrap();
        assert_eq!(back, set);
        assert_eq!(back.rules.len(), 1);
        assert_eq!(back.rules[0].sources.len(), 4);
        assert_eq!(write_generalized(&back), text);
        assert!(text.contains("\"measures\""));
    }

    #[test]
    fn empty_document() {
        let set = generalize(&Default::default(), &TaxonomySet::empty(), Side::Rhs, &GartOptions::default(), None).unwrap();
        let text = write_generalized(&set);
        assert!(text.contains("\"rules\": []"));
        assert_eq!(parse_generalized(&text).unwrap(), set);
    }

    #[test]
    fn broken_documents_are_rejected() {
        let set = generalize(&clothing_rules(), &clothing_taxonomies(), Side::Lhs, &GartOptions::default(), None).unwrap();
        let text = write_generalized(&set);
        let no_sources = text.replace("\"sources\": [", "\"sources\": [], \"x\": [");
        assert!(parse_generalized(&no_sources).is_err());
        let wrong_kind = text.replace("generalized-ruleset", "ruleset");
        assert!(parse_generalized(&wrong_kind).is_err());
        assert!(matches!(parse_generalized("[]"), Err(Error::Parse { .. })));
    }
}
