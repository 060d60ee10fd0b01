//! Four "… ⇒ cap" rules folded into one, one taxonomy at a time.

use genrules::gart::ascend_one_level;
use genrules::prelude::*;

fn main() -> Result<()> {
    let rules = RuleSet::from_rules([
        AssociationRule::parse(&["short", "slipper"], &["cap"])?,
        AssociationRule::parse(&["sandal", "short"], &["cap"])?,
        AssociationRule::parse(&["sandal", "t-shirt"], &["cap"])?,
        AssociationRule::parse(&["slipper", "t-shirt"], &["cap"])?,
    ]);
    let taxonomies = parse_taxonomies(
        "= clothes\nt-shirt\tlight clothes\nshort\tlight clothes\n\
         = shoes\nslipper\tlight shoes\nsandal\tlight shoes\n",
    )?
    .value;
    let db = parse_transactions(
        "t-shirt slipper cap\nshort slipper cap\nsandal short cap\nsandal t-shirt cap\n\
         slipper t-shirt cap\ncap jacket\nt-shirt sandal\n",
    )?
    .value;

    // the same thing by hand: one ascent per taxonomy
    let mut group: Vec<GeneralizedRule> = rules.iter().map(|r| GeneralizedRule::pass_through(r, Side::Lhs)).collect();
    for tax in taxonomies.taxonomies() {
        group = ascend_one_level(&group, tax, Side::Lhs);
        println!("after {}:", tax.name());
        for r in &group {
            println!("  {r}  ({} sources)", r.sources.len());
        }
    }

    let out = generalize(&rules, &taxonomies, Side::Lhs, &GartOptions::default(), Some(&db))?;
    println!("\n{} → {} rules, {:.2}% fewer", rules.len(), out.len(), out.reduction_rate());
    for r in &out.rules {
        println!("{}  table {:?}", render_rule(r), r.table.expect("database given"));
        for (lhs, rhs) in expand(r, &taxonomies) {
            println!("  covers {lhs} => {rhs}");
        }
    }
    Ok(())
}
