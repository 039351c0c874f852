//! Fit a linear model with full coefficient inference, then let AIC stepwise
//! selection prune irrelevant predictors, printing the selection trace.
//!
//! Run with: cargo run --example stepwise_regression

use lexinoise::regression::{ols_fit, stepwise_select, DesignMatrix, StepDirection, StepMove};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn main() {
    // Synthetic data: the response depends on x1 and x4 only; x2, x3, x5 are
    // distractors.
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 150;
    let cols: Vec<Vec<f64>> = (0..5)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|i| 0.4 + 1.8 * cols[0][i] - 1.1 * cols[3][i] + rng.gen_range(-0.4..0.4))
        .collect();
    let names: Vec<String> = (1..=5).map(|i| format!("x{i}")).collect();
    let design = DesignMatrix::new(names, cols, y, "y").unwrap();

    let full = ols_fit(&design).unwrap();
    println!("full model: AIC {:.2}", full.aic);
    for c in &full.coefficients {
        println!(
            "  {:<12} {:>8.3} (SE {:.3}, t {:>6.2}, p {:.4})",
            c.name, c.estimate, c.std_error, c.t_value, c.p_value
        );
    }

    let (best, trace) = stepwise_select(&design, StepDirection::Both).unwrap();
    println!("\nstepwise trace:");
    for step in &trace {
        let chosen = match &step.chosen {
            StepMove::Drop(name) => format!("drop {name}"),
            StepMove::Add(name) => format!("add {name}"),
            StepMove::Stop => "stop".to_string(),
        };
        println!(
            "  {:?} (AIC {:.2}) -> {chosen}",
            step.current_predictors, step.current_aic
        );
    }
    println!(
        "\nselected {:?}, AIC {:.2} (down from {:.2})",
        best.predictor_names, best.aic, full.aic
    );
    for c in &best.coefficients {
        println!("  {:<12} {:>8.3} (p {:.4})", c.name, c.estimate, c.p_value);
    }
}
