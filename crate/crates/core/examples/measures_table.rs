//! Every measure from a few contingency tables, including the ones where
//! some measures are undefined.

use genrules::gart::ContingencyTable;
use genrules::measures::{measures_from_table, Measure};

fn main() -> genrules::Result<()> {
    let tables = [
        ("clothing, generalized", ContingencyTable::new(5, 1, 1, 0)),
        ("independent", ContingencyTable::new(2, 2, 2, 2)),
        ("always together", ContingencyTable::new(4, 0, 0, 4)),
        ("lhs never seen", ContingencyTable::new(0, 0, 3, 1)),
    ];
    print!("{:<24}", "");
    for m in Measure::ALL {
        print!("{:>12}", m.label());
    }
    println!();
    for (name, t) in tables {
        let v = measures_from_table(&t)?;
        print!("{name:<24}");
        for m in Measure::ALL {
            match v.get(m) {
                Some(x) => print!("{x:>12.4}"),
                None => print!("{:>12}", "-"),
            }
        }
        println!();
    }
    Ok(())
}
