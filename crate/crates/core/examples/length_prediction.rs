//! Predicting the response length at the prompt boundary, and why the
//! prediction sits below the mean length.

use lenvm::eval::{evaluate_boundary_predictions, ground_truth_horizon, jensen_gap};
use lenvm::world::exact_value;
use lenvm::{fixtures, DiscountSpec, Result};

pub fn run_example() -> Result<()> {
    let spec = DiscountSpec::new(0.5)?;
    println!("lengths {{1,3}}: L_GT={:.4}  gap={:.4}", ground_truth_horizon(&[1, 3], &spec)?, jensen_gap(&[1, 3], &spec)?);

    let world = fixtures::ten_state();
    let spec = DiscountSpec::new(0.95)?;
    let oracle = exact_value(&world, &spec)?;
    let prompts: Vec<String> = world.prompts().keys().cloned().collect();
    let (rows, mre) = evaluate_boundary_predictions(&oracle, &world, &prompts, &spec, 64, 0, 10_000)?;
    for r in rows {
        println!(
            "prompt {}: predicted {:.3}  L_GT {:.3}  mean length {:.3}",
            r.prompt_id, r.predicted, r.ground_truth, r.mean_length
        );
    }
    println!("MRE over prompts: {mre:.4}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
