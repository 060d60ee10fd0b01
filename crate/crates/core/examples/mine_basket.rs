//! Apriori over a baskets file, rules written as JSON and as a Borgelt
//! listing.
//!
//! `cargo run --example mine_basket -- [baskets.txt] [min_support] [min_confidence]`

use genrules::prelude::*;

const CLOTHING: &str = "t-shirt slipper cap\nshort slipper cap\nsandal short cap\nsandal t-shirt cap\n\
                        slipper t-shirt cap\ncap jacket\nt-shirt sandal\n";

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let text = match args.first() {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::Document(format!("{path}: {e}")))?,
        None => CLOTHING.to_string(),
    };
    let number = |i: usize, default: f64| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(default);
    let params = MiningParams::new(number(1, 0.25), number(2, 0.6), 5)?;

    let parsed = parse_transactions(&text)?;
    for w in &parsed.warnings {
        eprintln!("warning: {w}");
    }
    let db = parsed.value;
    for f in frequent_itemsets(&db, params.min_support, params.max_items)? {
        println!("{:>4}  {}", f.count, f.items);
    }
    let rules = mine(&db, &params)?;
    println!("\n{}", write_ruleset(&rules));
    print!("{}", export_borgelt_rules(&rules)?);
    Ok(())
}
