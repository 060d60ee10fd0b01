//! Runs the bundled synthetic 3 × 3 reduction study and prints the table.
//!
//! `cargo run --example reduction_study -- [out-dir]`

use std::path::PathBuf;

use genrules::experiment::run_benchmark;
use genrules::gart::GartOptions;
use genrules::model::Side;

fn main() -> genrules::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("genrules-benchmark"));
    let report = run_benchmark(&dir, Side::Lhs, &GartOptions::default())?;
    print!("{}", report.to_table());
    println!("files written to {}", dir.display());
    Ok(())
}
