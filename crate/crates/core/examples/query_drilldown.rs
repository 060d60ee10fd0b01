//! Selecting generalized rules and following their E, S and M links.

use genrules::prelude::*;
use genrules::query::{drilldown_expanded, drilldown_measures, drilldown_sources, export_view, RuleQuery, SortOrder};

fn main() -> Result<()> {
    let db = parse_transactions(
        "t-shirt slipper cap\nshort slipper cap\nsandal short cap\nsandal t-shirt cap\n\
         slipper t-shirt cap\ncap jacket\nt-shirt sandal\n",
    )?
    .value;
    let params = MiningParams::new(0.25, 0.6, 5)?;
    let rules = mine(&db, &params)?;
    let taxonomies = parse_taxonomies(
        "= clothes\nt-shirt\tlight clothes\nshort\tlight clothes\n\
         = shoes\nslipper\tlight shoes\nsandal\tlight shoes\n",
    )?
    .value;
    let out = generalize(&rules, &taxonomies, Side::Lhs, &GartOptions::default(), Some(&db))?;

    let q = RuleQuery::new()
        .rhs_item("cap")?
        .filter("support>=0.25")?
        .select(&[Measure::Support, Measure::Confidence, Measure::Lift])
        .sorted(Measure::Confidence, SortOrder::Descending);
    let views = run_query(&out, &q)?;
    print!("{}", export_view(&views));

    for v in &views {
        let links: String = [(v.links.expanded, 'E'), (v.links.sources, 'S'), (v.links.measures_drilldown, 'M')]
            .iter()
            .map(|&(on, c)| if on { c } else { '.' })
            .collect();
        println!("\n[{links}] {}", render_rule(&v.rule));
        if let Ok(pairs) = drilldown_expanded(v, &out.taxonomies) {
            for (lhs, rhs) in pairs {
                println!("  E  {lhs} => {rhs}");
            }
        }
        if let Ok(sources) = drilldown_sources(v) {
            for s in sources {
                println!("  S  {s}  (confidence {:.3})", s.confidence.unwrap_or(f64::NAN));
            }
        }
        if let Ok(m) = drilldown_measures(v, out.mining_params.as_ref()) {
            println!("  M  {:?} against {:?}", m.flags, m.mining_params);
        }
    }
    Ok(())
}
