//! Exponential tilting toward short continuations versus a hard token
//! budget, on a world with a short and a long route to the answer.

use lenvm::decode::{tilt_distribution, Candidate, CandidateSet, Truncation};
use lenvm::eval::{frontier_sweep, FrontierConfig};
use lenvm::world::exact_value;
use lenvm::{fixtures, DiscountSpec, Result};

pub fn run_example() -> Result<()> {
    let set = CandidateSet::new(vec![
        Candidate { token: 1, base_prob: 0.5, value: -0.2, successor: 0 },
        Candidate { token: 2, base_prob: 0.5, value: -0.8, successor: 0 },
    ])?;
    println!("p' at beta=-2: {:?}", tilt_distribution(&set, -2.0)?);

    let world = fixtures::two_path();
    let spec = DiscountSpec::new(0.95)?;
    let oracle = exact_value(&world, &spec)?;
    let cfg = FrontierConfig {
        betas: vec![0.0, -2.0, -8.0, -32.0],
        budgets: vec![6, 12, 24, 48],
        rollouts_per_prompt: 1000,
        seed: 0,
        max_len: 2000,
        truncation: Truncation::none(),
    };
    for p in frontier_sweep(&world, &oracle, &spec, &["q".to_string()], &cfg)? {
        let label = match p.budget {
            Some(b) => format!("budget {b}"),
            None => format!("beta {}", p.beta),
        };
        println!("{:>11} {:>10}: pass {:.3}  avg length {:.2}", p.method.as_str(), label, p.pass_rate, p.avg_truncated_length);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
