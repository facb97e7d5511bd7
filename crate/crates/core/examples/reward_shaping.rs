//! TD residuals and potential-based shaping from frozen value predictions.

use lenvm::analysis::{combined_advantage, length_token_stats, shaping_rewards, telescoping_check, ValuedTrace};
use lenvm::world::{exact_value, sample_rollouts};
use lenvm::{fixtures, DiscountSpec, Result};

pub fn run_example() -> Result<()> {
    let world = fixtures::ten_state();
    let spec = DiscountSpec::new(0.95)?;
    let oracle = exact_value(&world, &spec)?;
    let trajs = sample_rollouts(&world, &["a".to_string()], 200, 0, 10_000)?;
    let traces = trajs
        .iter()
        .map(|t| ValuedTrace::from_trajectory(&world, t, &oracle))
        .collect::<Result<Vec<_>>>()?;

    let stats = length_token_stats(&traces, &spec, 0.01)?;
    for (tok, (pos, neg)) in &stats.counts {
        println!("token {tok}: {pos} lengthening, {neg} shortening");
    }

    let first = &traces[0];
    println!("potentials {:?}", first.values);
    println!("shaping    {:?}", shaping_rewards(&first.values, &spec));
    let t = telescoping_check(&first.values, &spec);
    println!("telescoping lhs {:.6} rhs {:.6} residual {:e}", t.lhs, t.rhs, t.residual);
    println!("A_total = {}", combined_advantage(1.0, -0.5, 2.0));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
