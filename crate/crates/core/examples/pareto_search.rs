// $ cargo run --release --example pareto_search
use tactile_placement::prelude::*;

fn main() -> Result<()> {
    let hand = SensorLayout::builtin_shadow21();
    let sites = hand
        .sites()
        .iter()
        .map(|s| SensorSite {
            cost: if s.region == Region::Palm {
                4.0
            } else {
                1.0 + (s.id % 3) as f64 * 0.5
            },
            ..s.clone()
        })
        .collect();
    let layout = SensorLayout::new("priced21", sites)?;

    let anchors = PredictorAnchors::new(0.28, 0.392)?;
    let mut weights: Vec<f64> = (0..21).map(|i| 0.09 - 0.004 * i as f64).collect();
    weights[11] = -0.03;
    let predictor = TunedPredictor::new(anchors, weights, "priced21");

    let best = exhaustive_search(&predictor, &layout, 10.0)?;
    println!(
        "budget 10: {} cost {} predicted {:.4}",
        best.config, best.cost, best.predicted
    );

    let uniform = layout.with_uniform_cost(1.0)?;
    let five = best_k_subset(&predictor, &uniform, 5)?;
    println!(
        "best 5 sites: {} predicted {:.4}",
        five.config, five.predicted
    );

    let frontier = pareto_frontier(&predictor, &layout)?;
    print!("{}", frontier.to_csv());
    Ok(())
}
