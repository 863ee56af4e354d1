// $ cargo run --example validation_tables
use tactile_placement::prelude::*;

fn main() -> Result<()> {
    let rows = [
        ("C1", 0.830, 0.831),
        ("C2", 0.813, 0.824),
        ("C3", 0.841, 0.860),
        ("C4", 0.817, 0.843),
        ("C5", 0.810, 0.812),
    ];
    let report = ValidationReport::from_pairs(rows)?;
    print!("{}", report.to_table());
    print!("{}", report.to_csv());
    Ok(())
}
