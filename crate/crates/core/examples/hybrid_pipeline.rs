// $ cargo run --example hybrid_pipeline
//
// Generates ablation-style data from a known model, fits the tuned
// predictor and ranks the sites.
use tactile_placement::prelude::*;

fn main() -> Result<()> {
    let layout = SensorLayout::builtin_shadow21();
    let anchors = PredictorAnchors::new(0.28, 0.392)?;
    // Thumb knuckles and palm dominate; the middle fingertip hurts.
    let mut weights = vec![0.5 / 17.0; 21];
    weights[0] = 0.15;
    weights[1] = 0.2;
    weights[20] = 0.2;
    weights[11] = -0.05;
    let hidden = HiddenModel::linear(anchors, weights, 0.003);
    let data = generate_dataset(&hidden, &layout, 120, 4)?;
    let (train, validation) = data.split(0.25, 5)?;

    let fitted = fit_hybrid(&train, &validation, anchors, &PipelineOptions::default())?;
    println!(
        "validation MAE {:.5} -> {:.5} after {} accepted steps",
        fitted.initial_validation_error,
        fitted.tuned_validation_error,
        fitted.tuned.tuning_log.len()
    );
    for step in fitted.tuned.tuning_log.iter().take(5) {
        println!(
            "  pass {} site {:>2} delta {:+} -> {:.5}",
            step.pass, step.site_id, step.delta, step.val_after
        );
    }

    println!("top sites:");
    for r in rank_sites(&fitted.tuned, &layout)?.iter().take(5) {
        let truth = hidden.true_weights[r.site.id];
        println!(
            "  {:<16} T = {:.4} (hidden {:.4})",
            r.site.name, r.weight, truth
        );
    }

    let report = ValidationReport::evaluate(&fitted.tuned, &validation)?;
    println!(
        "mean relative error on validation: {:.2}%",
        report.mean_error_percent
    );
    Ok(())
}
