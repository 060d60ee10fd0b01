//! Reading rules produced by Borgelt's apriori program and generalizing
//! their right-hand side.

use genrules::prelude::*;

const LISTING: &str = "\
cap <- short slipper (28.5714, 100)
cap <- sandal t-shirt (14.2857, 50)
slipper <- cap short (14.2857, 50)
sandal <- cap short (14.2857, 50)
";

fn main() -> Result<()> {
    let parsed = import_borgelt_rules(LISTING)?;
    for w in &parsed.warnings {
        eprintln!("warning: {w}");
    }
    let rules = parsed.value;
    for r in &rules {
        println!("{r}  support {:?} confidence {:?}", r.support, r.confidence);
    }

    let shoes = parse_taxonomies("slipper\tlight shoes\nsandal\tlight shoes\n")?.value;
    let out = generalize(&rules, &shoes, Side::Rhs, &GartOptions::default(), None)?;
    println!();
    for r in &out.rules {
        println!("{}  from {} rule(s)", render_rule(r), r.sources.len());
    }

    // lines that are not rules are rejected with their position
    match import_borgelt_rules("cap <- short (28.5714, 100)\ncap short 28\n") {
        Err(e) => println!("\nrejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
