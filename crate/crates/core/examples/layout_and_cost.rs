// $ cargo run --example layout_and_cost
use tactile_placement::prelude::*;

fn main() -> Result<()> {
    let hand = SensorLayout::builtin_shadow21();
    for site in hand.sites() {
        println!(
            "{:>2} {:<16} {:<7} {}",
            site.id, site.name, site.finger, site.region
        );
    }

    // Knuckle sensors are cheap, fingertips and palm pads cost more.
    let sites = hand
        .sites()
        .iter()
        .map(|s| SensorSite {
            cost: match s.region {
                Region::Fingertip => 3.0,
                Region::Palm => 5.0,
                _ => 1.0,
            },
            ..s.clone()
        })
        .collect();
    let priced = SensorLayout::new("priced21", sites)?;

    let knuckles = SensorConfiguration::from_sites(
        21,
        priced
            .sites()
            .iter()
            .filter(|s| s.region != Region::Fingertip && s.region != Region::Palm)
            .map(|s| s.id),
    );
    println!(
        "knuckles only: {knuckles} costs {}",
        priced.total_cost(&knuckles)?
    );
    println!(
        "everything:    costs {}",
        priced.total_cost(&SensorConfiguration::ones(21))?
    );

    let path = std::env::temp_dir().join("priced21.json");
    priced.save(&path)?;
    assert_eq!(SensorLayout::load(&path)?, priced);
    println!("layout written to {}", path.display());
    Ok(())
}
