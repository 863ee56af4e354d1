// $ cargo run --release --example fnn_comparison
use tactile_placement::prelude::*;

fn mae(
    pred: impl Fn(&SensorConfiguration) -> f64,
    truth: &HiddenModel,
    configs: &[SensorConfiguration],
) -> f64 {
    configs
        .iter()
        .map(|c| (pred(c) - truth.mean_response(c).unwrap()).abs())
        .sum::<f64>()
        / configs.len() as f64
}

fn main() -> Result<()> {
    let layout = SensorLayout::builtin_shadow21();
    let anchors = PredictorAnchors::new(0.28, 0.392)?;
    let hidden = HiddenModel::random_positive(anchors, 21, 0.005, 11);
    // Few records: the network fits them closely but has little to
    // generalize from, while the hybrid model only has to place 21 weights.
    let data = generate_dataset(&hidden, &layout, 30, 12)?;
    let (fit_set, validation) = data.split(0.2, 13)?;
    let held_out = random_configurations(&layout, 500, 14);

    let hybrid = fit_hybrid(&fit_set, &validation, anchors, &PipelineOptions::default())?.tuned;

    let model = FnnModel::init(21, 15)?;
    let check = gradient_check(&model, &fit_set.records()[0])?;
    println!(
        "gradient check: max relative error {:.2e} over {} parameters",
        check.max_relative_error, check.checked
    );
    let report = train(
        &model,
        &fit_set,
        &TrainSettings {
            learning_rate: 0.01,
            epochs: 3000,
        },
    )?;
    println!("fnn training mse {:.6}", report.final_mse);

    println!(
        "held-out MAE, hybrid {:.5}",
        mae(|c| hybrid.predict(c).unwrap(), &hidden, &held_out)
    );
    println!(
        "held-out MAE, fnn    {:.5}",
        mae(|c| report.model.forward(c).unwrap(), &hidden, &held_out)
    );
    Ok(())
}
