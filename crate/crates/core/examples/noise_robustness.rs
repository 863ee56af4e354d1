// $ cargo run --release --example noise_robustness
use tactile_placement::prelude::*;

fn main() -> Result<()> {
    let layout = SensorLayout::builtin_shadow21();
    let anchors = PredictorAnchors::new(0.28, 0.392)?;
    let predictor = TunedPredictor::new(anchors, vec![0.759 / 21.0; 21], "shadow21");

    let full = SensorConfiguration::ones(layout.len());
    let sweep = noise_sweep(&predictor, &full, &NoiseLevel::defaults(), 5000, 42)?;
    print!("{}", sweep.to_csv());

    // With few sites present, flips mostly switch sensors on, so the
    // expectation can rise.
    let sparse = best_k_subset(&predictor, &layout, 8)?.config;
    let level = NoiseLevel::new(0.1)?;
    println!(
        "8 sites: noiseless {:.4}, p=0.1 {:.4}",
        predictor.predict(&sparse)?,
        expected_under_flips(&predictor, &sparse, level)?
    );
    Ok(())
}
