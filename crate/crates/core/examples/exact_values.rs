//! Exact state values of a small generator, checked against Monte Carlo.

use lenvm::fixtures;
use lenvm::world::{build_dataset, exact_value};
use lenvm::{DiscountSpec, Result};

pub fn run_example() -> Result<()> {
    let world = fixtures::ten_state();
    let spec = DiscountSpec::new(0.95)?;
    let oracle = exact_value(&world, &spec)?;
    println!("max Bellman residual: {:e}", oracle.max_phi_residual(&world, &spec));

    let prompts: Vec<String> = world.prompts().keys().cloned().collect();
    let data = build_dataset(&world, &spec, &prompts, 5000, 1, 10_000)?;
    for p in &prompts {
        let s0 = world.start_state(p)?;
        let returns: Vec<f64> = data
            .pairs
            .iter()
            .filter(|(t, _)| &t.prompt_id == p)
            .map(|(_, g)| g.values()[0])
            .collect();
        let mc = returns.iter().sum::<f64>() / returns.len() as f64;
        println!(
            "prompt {p}: exact V={:.4}  monte carlo={:.4}  P(success)={:.3}",
            oracle.value[s0], mc, oracle.success_prob[s0]
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
