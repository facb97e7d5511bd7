//! Discounted length returns: targets, inversion, and picking gamma from a
//! length percentile.

use lenvm::{DiscountSpec, Result};

pub fn run_example() -> Result<()> {
    let spec = DiscountSpec::new(0.5)?;
    let sched = spec.schedule_for_length(3)?;
    println!("gamma=0.5, L=3: {:?}", sched.values());
    println!("max Bellman residual: {:e}", sched.max_bellman_residual(&spec));
    println!("invert -0.96875 -> {} tokens", spec.invert_to_length(-0.96875)?);

    let spec = DiscountSpec::from_l99(1000)?;
    println!("l99=1000 -> gamma={:.6}", spec.gamma());
    for n in [1u64, 10, 100, 1000, 5000] {
        let g = spec.return_target(n);
        println!("  {n:>5} remaining -> G={g:.6} -> {:.3}", spec.invert_to_length(g)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
