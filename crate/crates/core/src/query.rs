//! Selecting generalized rules by items and measures, and the three
//! per-rule drill-downs: expanded rule ("E"), source rules ("S") and
//! threshold violations ("M").

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gart::{expand, GeneralizedRule, GeneralizedRuleSet};
use crate::measures::{flag_thresholds, measures_from_table, Measure, MeasureVector, ThresholdFlags};
use crate::model::{AssociationRule, Item, Itemset, MiningParams};
use crate::taxonomy::{is_ancestor, TaxonomySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Comparator {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Comparator::Lt => lhs < rhs,
            Comparator::Le => lhs <= rhs,
            Comparator::Gt => lhs > rhs,
            Comparator::Ge => lhs >= rhs,
            Comparator::Eq => lhs == rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurePredicate {
    pub measure: Measure,
    pub comparator: Comparator,
    pub value: f64,
}

impl MeasurePredicate {
    /// An absent measure never satisfies a predicate.
    pub fn holds(&self, v: &MeasureVector) -> bool {
        v.get(self.measure)
            .is_some_and(|x| self.comparator.holds(x, self.value))
    }
}

impl FromStr for MeasurePredicate {
    type Err = Error;

    /// `support>=0.5`, `lift > 1`, `confidence≤0.9`, ...
    fn from_str(s: &str) -> Result<Self> {
        const OPS: [(&str, Comparator); 7] = [
            ("<=", Comparator::Le),
            (">=", Comparator::Ge),
            ("≤", Comparator::Le),
            ("≥", Comparator::Ge),
            ("<", Comparator::Lt),
            (">", Comparator::Gt),
            ("=", Comparator::Eq),
        ];
        let (pos, sym, comparator) = OPS
            .iter()
            .filter_map(|(sym, c)| s.find(sym).map(|p| (p, *sym, *c)))
            .min_by_key(|(p, sym, _)| (*p, std::cmp::Reverse(sym.len())))
            .ok_or_else(|| Error::Query(format!("predicate {s:?} has no comparator")))?;
        let measure: Measure = s[..pos].trim().parse()?;
        let raw = s[pos + sym.len()..].trim();
        let value = raw
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Query(format!("predicate {s:?}: {raw:?} is not a number")))?;
        Ok(MeasurePredicate {
            measure,
            comparator,
            value,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SortOrder {
    Ascending,
    Descending,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RuleQuery {
    #[serde(default)]
    pub lhs_contains: Vec<Item>,
    #[serde(default)]
    pub rhs_contains: Vec<Item>,
    #[serde(default)]
    pub any_side_contains: Vec<Item>,
    /// Match items literally instead of through their generalizations.
    #[serde(default)]
    pub exact_items: bool,
    #[serde(default)]
    pub predicates: Vec<MeasurePredicate>,
    #[serde(default)]
    pub selected_measures: Vec<Measure>,
    #[serde(default)]
    pub sort_by: Option<(Measure, SortOrder)>,
    #[serde(default)]
    pub offset: Option<usize>,
    #[serde(default)]
    pub limit: Option<usize>,
}

impl RuleQuery {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn any_item(mut self, item: &str) -> Result<Self> {
        self.any_side_contains.push(Item::new(item)?);
        Ok(self)
    }

    pub fn lhs_item(mut self, item: &str) -> Result<Self> {
        self.lhs_contains.push(Item::new(item)?);
        Ok(self)
    }

    pub fn rhs_item(mut self, item: &str) -> Result<Self> {
        self.rhs_contains.push(Item::new(item)?);
        Ok(self)
    }

    pub fn filter(mut self, predicate: &str) -> Result<Self> {
        self.predicates.push(predicate.parse()?);
        Ok(self)
    }

    pub fn select(mut self, measures: &[Measure]) -> Self {
        self.selected_measures.extend_from_slice(measures);
        self
    }

    pub fn sorted(mut self, measure: Measure, order: SortOrder) -> Self {
        self.sort_by = Some((measure, order));
        self
    }

    pub fn page(mut self, offset: usize, limit: usize) -> Self {
        self.offset = Some(offset);
        self.limit = Some(limit);
        self
    }
}

impl FromStr for SortOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asc" | "ascending" => Ok(SortOrder::Ascending),
            "desc" | "descending" => Ok(SortOrder::Descending),
            _ => Err(Error::Query(format!("sort order {s:?} is neither asc nor desc"))),
        }
    }
}

/// `support`, `support:asc`, `lift:desc`. Descending unless stated.
pub fn parse_sort(s: &str) -> Result<(Measure, SortOrder)> {
    let (m, order) = s.split_once(':').unwrap_or((s, "desc"));
    Ok((m.trim().parse()?, order.trim().parse()?))
}

impl RuleQuery {
    /// Builds a query from `key=value` pairs such as a URL query string.
    /// `item`, `lhs_item`, `rhs_item`, `measure` and `where` may repeat;
    /// `sort`, `limit`, `offset` and `exact` may not.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<RuleQuery> {
        let mut q = RuleQuery::new();
        let mut seen = Vec::new();
        let number = |key: &str, v: &str| {
            v.parse::<usize>()
                .map_err(|_| Error::Query(format!("{key}={v:?} is not a non-negative integer")))
        };
        for (key, value) in pairs {
            if matches!(key, "sort" | "limit" | "offset" | "exact") {
                if seen.contains(&key) {
                    return Err(Error::Query(format!("{key} given twice")));
                }
                seen.push(key);
            }
            match key {
                "item" => q = q.any_item(value)?,
                "lhs_item" => q = q.lhs_item(value)?,
                "rhs_item" => q = q.rhs_item(value)?,
                "measure" => q.selected_measures.push(value.parse()?),
                "where" => q = q.filter(value)?,
                "sort" => q.sort_by = Some(parse_sort(value)?),
                "limit" => q.limit = Some(number(key, value)?),
                "offset" => q.offset = Some(number(key, value)?),
                "exact" => {
                    q.exact_items = match value {
                        "" | "true" | "1" => true,
                        "false" | "0" => false,
                        _ => return Err(Error::Query(format!("exact={value:?} is not a boolean"))),
                    }
                }
                _ => return Err(Error::Query(format!("unknown query parameter {key:?}"))),
            }
        }
        Ok(q)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Links {
    pub expanded: bool,
    pub sources: bool,
    pub measures_drilldown: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleView {
    /// [`crate::model::RuleKey::digest`] of the rule.
    pub key: String,
    pub rule: GeneralizedRule,
    pub selected: Vec<Measure>,
    /// Only the selected measures are present.
    pub measures: MeasureVector,
    pub flags: ThresholdFlags,
    pub links: Links,
}

/// All measures of a rule: from its table when there is one, else the mined
/// values of an untouched single-source rule, else nothing.
pub fn rule_measures(rule: &GeneralizedRule) -> MeasureVector {
    if let Some(table) = &rule.table {
        return measures_from_table(table).unwrap_or_default();
    }
    match rule.sources.as_slice() {
        [only] if !rule.is_generalized() => MeasureVector {
            support: only.support,
            confidence: only.confidence,
            ..Default::default()
        },
        _ => MeasureVector::default(),
    }
}

fn item_matches(item: &Item, side: &Itemset, rule: &GeneralizedRule, taxes: &TaxonomySet, exact: bool) -> bool {
    side.contains(item)
        || (!exact
            && rule
                .generalized_items
                .iter()
                .any(|g| side.contains(g) && is_ancestor(taxes, g, item)))
}

pub fn view_rule(rule: &GeneralizedRule, selected: &[Measure], params: Option<&MiningParams>) -> RuleView {
    let all = rule_measures(rule);
    let flags = params.map(|p| flag_thresholds(&all, p)).unwrap_or_default();
    let measures = all.restricted(selected);
    RuleView {
        key: rule.key().digest(),
        rule: rule.clone(),
        selected: selected.to_vec(),
        measures,
        flags,
        links: Links {
            expanded: rule.is_generalized(),
            sources: rule.is_generalized(),
            measures_drilldown: flags.any(),
        },
    }
}

pub fn run_query(set: &GeneralizedRuleSet, q: &RuleQuery) -> Result<Vec<RuleView>> {
    let taxes = &set.taxonomies;
    let exact = q.exact_items;
    let mut hits: Vec<(&GeneralizedRule, MeasureVector)> = set
        .rules
        .iter()
        .filter(|r| {
            q.lhs_contains.iter().all(|i| item_matches(i, &r.lhs, r, taxes, exact))
                && q.rhs_contains.iter().all(|i| item_matches(i, &r.rhs, r, taxes, exact))
                && q.any_side_contains.iter().all(|i| {
                    item_matches(i, &r.lhs, r, taxes, exact) || item_matches(i, &r.rhs, r, taxes, exact)
                })
        })
        .map(|r| (r, rule_measures(r)))
        .filter(|(_, m)| q.predicates.iter().all(|p| p.holds(m)))
        .collect();

    if let Some((measure, order)) = q.sort_by {
        // stable: ties keep canonical key order; absent values go last
        hits.sort_by(|(_, a), (_, b)| match (a.get(measure), b.get(measure)) {
            (Some(x), Some(y)) => match order {
                SortOrder::Ascending => x.total_cmp(&y),
                SortOrder::Descending => y.total_cmp(&x),
            },
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        });
    }

    let offset = q.offset.unwrap_or(0);
    let limit = q.limit.unwrap_or(usize::MAX);
    Ok(hits
        .into_iter()
        .skip(offset)
        .take(limit)
        .map(|(r, _)| view_rule(r, &q.selected_measures, set.mining_params.as_ref()))
        .collect())
}

pub fn drilldown_expanded(view: &RuleView, taxes: &TaxonomySet) -> Result<Vec<(Itemset, Itemset)>> {
    if !view.links.expanded {
        return Err(Error::NotAvailable(format!(
            "rule {} has no generalized items to expand",
            view.rule
        )));
    }
    Ok(expand(&view.rule, taxes))
}

pub fn drilldown_sources(view: &RuleView) -> Result<Vec<AssociationRule>> {
    if !view.links.sources {
        return Err(Error::NotAvailable(format!(
            "rule {} was not generalized",
            view.rule
        )));
    }
    Ok(view.rule.sources.clone())
}

/// What the "M" link shows: every measure and the thresholds it falls below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureDrilldown {
    pub measures: MeasureVector,
    pub flags: ThresholdFlags,
    pub mining_params: MiningParams,
}

pub fn drilldown_measures(view: &RuleView, params: Option<&MiningParams>) -> Result<MeasureDrilldown> {
    match params {
        Some(p) if view.links.measures_drilldown => Ok(MeasureDrilldown {
            measures: rule_measures(&view.rule),
            flags: view.flags,
            mining_params: *p,
        }),
        _ => Err(Error::NotAvailable(format!(
            "rule {} has no selected measure below the mining thresholds",
            view.rule
        ))),
    }
}

/// `(light clothes) & (light shoes) ⇒ cap`: generalized items in
/// parentheses.
pub fn render_rule(rule: &GeneralizedRule) -> String {
    let side = |set: &Itemset| {
        set.iter()
            .map(|i| {
                if rule.generalized_items.contains(i) {
                    format!("({i})")
                } else {
                    i.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(" & ")
    };
    format!("{} ⇒ {}", side(&rule.lhs), side(&rule.rhs))
}

/// Tab-separated listing: a header, then one rule per line followed by the
/// selected measures to four decimals (`-` when undefined). Columns follow
/// the first view's selection.
pub fn export_view(views: &[RuleView]) -> String {
    let columns: &[Measure] = views.first().map_or(&[], |v| &v.selected);
    let mut out = String::from("rule");
    for m in columns {
        let _ = write!(out, "\t{m}");
    }
    out.push('\n');
    for v in views {
        out.push_str(&render_rule(&v.rule));
        for &m in columns {
            match v.measures.get(m) {
                Some(x) => {
                    let _ = write!(out, "\t{x:.4}");
                }
                None => out.push_str("\t-"),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gart::fixtures::{clothing_db, clothing_rules, clothing_taxonomies};
    use crate::gart::{generalize, GartOptions};
    use crate::model::{RuleSet, Side};

    fn clothing_result() -> GeneralizedRuleSet {
        let mut rules = clothing_rules();
        // two plain rules that stay untouched
        rules.insert(AssociationRule::parse(&["jacket"], &["cap"]).unwrap());
        rules.insert(AssociationRule::parse(&["cap"], &["jacket"]).unwrap());
        let rules = RuleSet::from_rules(rules.iter().cloned()).with_params(MiningParams::default());
        generalize(&rules, &clothing_taxonomies(), Side::Lhs, &GartOptions::default(), Some(&clothing_db())).unwrap()
    }

    #[test]
    fn descendant_aware_item_match() {
        let set = clothing_result();
        let views = run_query(&set, &RuleQuery::new().any_item("short").unwrap()).unwrap();
        assert_eq!(views.len(), 1);
        assert_eq!(views[0].rule.to_string(), "light clothes & light shoes => cap");

        let exact = RuleQuery { exact_items: true, ..RuleQuery::new().any_item("short").unwrap() };
        assert!(run_query(&set, &exact).unwrap().is_empty());

        let views = run_query(&set, &RuleQuery::new().rhs_item("short").unwrap()).unwrap();
        assert!(views.is_empty());
    }

    #[test]
    fn empty_query_returns_everything_in_key_order() {
        let set = clothing_result();
        let views = run_query(&set, &RuleQuery::new()).unwrap();
        let shown: Vec<String> = views.iter().map(|v| v.rule.to_string()).collect();
        assert_eq!(shown, vec!["cap => jacket", "jacket => cap", "light clothes & light shoes => cap"]);
    }

    #[test]
    fn support_predicate() {
        let set = clothing_result();
        let q = RuleQuery::new().filter("support>=0.5").unwrap().select(&[Measure::Support]);
        let views = run_query(&set, &q).unwrap();
        // light clothes & light shoes => cap holds in 5 of 7 baskets; the
        // jacket rules in 1 of 7
        assert_eq!(views.len(), 1);
        assert_eq!(views[0].measures.support, Some(5.0 / 7.0));
        assert_eq!(views[0].measures.confidence, None);
    }

    #[test]
    fn links_and_drilldowns() {
        let set = clothing_result();
        let views = run_query(&set, &RuleQuery::new().select(&[Measure::Support, Measure::Confidence])).unwrap();
        let general = views.iter().find(|v| v.rule.is_generalized()).unwrap();
        assert!(general.links.expanded && general.links.sources);
        assert_eq!(drilldown_expanded(general, &set.taxonomies).unwrap().len(), 4);
        assert_eq!(drilldown_sources(general).unwrap().len(), 4);

        let plain = views.iter().find(|v| v.rule.to_string() == "jacket => cap").unwrap();
        assert!(!plain.links.expanded && !plain.links.sources);
        assert!(matches!(drilldown_expanded(plain, &set.taxonomies), Err(Error::NotAvailable(_))));
        assert!(matches!(drilldown_sources(plain), Err(Error::NotAvailable(_))));
        // support 1/7 is below 0.5
        assert!(plain.flags.below_min_support);
        assert!(plain.links.measures_drilldown);
        let m = drilldown_measures(plain, set.mining_params.as_ref()).unwrap();
        assert_eq!(m.measures.support, Some(1.0 / 7.0));
        assert!(m.measures.lift.is_some());

        // the M link does not depend on which columns are shown
        let bare = run_query(&set, &RuleQuery::new().select(&[Measure::Lift])).unwrap();
        let plain_bare = bare.iter().find(|v| v.key == plain.key).unwrap();
        assert!(plain_bare.links.measures_drilldown);
        assert_eq!(plain_bare.measures.support, None);
    }

    #[test]
    fn sorting_and_pages() {
        let set = clothing_result();
        let q = RuleQuery::new().sorted(Measure::Support, SortOrder::Descending);
        let all = run_query(&set, &q).unwrap();
        assert_eq!(all[0].rule.to_string(), "light clothes & light shoes => cap");
        let mut paged = Vec::new();
        for offset in 0..all.len() {
            paged.extend(run_query(&set, &q.clone().page(offset, 1)).unwrap());
        }
        assert_eq!(paged, all);
        assert!(run_query(&set, &q.clone().page(10, 5)).unwrap().is_empty());
    }

    #[test]
    fn query_from_pairs() {
        let q = RuleQuery::from_pairs([
            ("item", "t-shirt"),
            ("measure", "support"),
            ("measure", "lift"),
            ("where", "support>=0.5"),
            ("sort", "lift:asc"),
            ("limit", "3"),
        ])
        .unwrap();
        assert_eq!(q.any_side_contains.len(), 1);
        assert_eq!(q.selected_measures, [Measure::Support, Measure::Lift]);
        assert_eq!(q.sort_by, Some((Measure::Lift, SortOrder::Ascending)));
        assert_eq!(q.limit, Some(3));
        assert_eq!(parse_sort("support").unwrap(), (Measure::Support, SortOrder::Descending));
        assert!(matches!(RuleQuery::from_pairs([("measure", "Sup")]), Err(Error::Query(_))));
        assert!(RuleQuery::from_pairs([("colour", "red")]).is_err());
        assert!(RuleQuery::from_pairs([("limit", "1"), ("limit", "2")]).is_err());
        assert!(RuleQuery::from_pairs([("limit", "-1")]).is_err());
    }

    #[test]
    fn predicate_syntax() {
        let p: MeasurePredicate = "support>=0.5".parse().unwrap();
        assert_eq!(p, MeasurePredicate { measure: Measure::Support, comparator: Comparator::Ge, value: 0.5 });
        let p: MeasurePredicate = " lift < 2 ".parse().unwrap();
        assert_eq!(p.comparator, Comparator::Lt);
        let p: MeasurePredicate = "confidence≥0.25".parse().unwrap();
        assert_eq!(p.comparator, Comparator::Ge);
        let p: MeasurePredicate = "leverage=-0.1".parse().unwrap();
        assert_eq!(p.value, -0.1);
        let err = "sup>=0.5".parse::<MeasurePredicate>().unwrap_err();
        assert!(err.to_string().contains("valid measures are support"));
        assert!("support".parse::<MeasurePredicate>().is_err());
        assert!("support>=x".parse::<MeasurePredicate>().is_err());
    }

    #[test]
    fn export() {
        let set = clothing_result();
        let q = RuleQuery::new().any_item("t-shirt").unwrap().select(&[Measure::Support]);
        let text = export_view(&run_query(&set, &q).unwrap());
        assert_eq!(text, "rule\tsupport\n(light clothes) & (light shoes) ⇒ cap\t0.7143\n");
        assert_eq!(export_view(&[]), "rule\n");
    }
}
