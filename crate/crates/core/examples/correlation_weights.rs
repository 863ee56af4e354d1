// $ cargo run --example correlation_weights
use tactile_placement::prelude::*;

fn main() -> Result<()> {
    let layout = SensorLayout::builtin_shadow21();
    let anchors = PredictorAnchors::new(0.28, 0.392)?;

    // Thumb and palm matter, the middle fingertip hurts a little.
    let mut weights = vec![0.03; 21];
    weights[1] = 0.2;
    weights[0] = 0.12;
    weights[20] = 0.15;
    weights[11] = -0.05;
    let hidden = HiddenModel::linear(anchors, weights, 0.005);
    let data = generate_dataset(&hidden, &layout, 60, 7)?;

    let pcc = pearson_weights(&data)?;
    let ols = fit_ols(&data)?;
    println!("{:<16} {:>8} {:>9} {:>8}", "site", "true", "pearson", "ols");
    for (site, ((t, w), b)) in layout.sites().iter().zip(
        hidden
            .true_weights
            .iter()
            .zip(&pcc.weights)
            .zip(&ols.coefficients),
    ) {
        let w = w.map_or("undef".to_string(), |w| format!("{w:.3}"));
        println!("{:<16} {:>8.3} {:>9} {:>8.4}", site.name, t, w, b);
    }
    println!(
        "OLS intercept {:.4}, training rmse {:.5}",
        ols.intercept, ols.training_rmse
    );
    Ok(())
}
