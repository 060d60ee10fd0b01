//! A small synthetic baskets file and its taxonomies, then the whole
//! pipeline on it.

use genrules::experiment::{synth_taxonomies, synth_transactions, SynthParams};
use genrules::prelude::*;

fn main() -> Result<()> {
    let params = SynthParams { n_transactions: 200, n_leaf_items: 16, taxonomy_depth: 2, branching: 4, seed: 7 };
    let db = synth_transactions(&params)?;
    let taxonomies = synth_taxonomies(params.n_leaf_items, params.taxonomy_depth, params.branching)?;
    print!("{}", write_taxonomies(&taxonomies));
    for t in db.transactions().iter().take(5) {
        println!("{}", t.items.join(" "));
    }

    let rules = mine(&db, &MiningParams::new(0.03, 0.3, 3)?)?;
    for side in [Side::Lhs, Side::Rhs] {
        let out = generalize(&rules, &taxonomies, side, &GartOptions::default(), None)?;
        println!("{}: {} → {} rules, {:.2}%", side.as_str(), rules.len(), out.len(), out.reduction_rate());
    }
    Ok(())
}
