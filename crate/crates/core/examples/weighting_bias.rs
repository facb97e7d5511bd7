//! Token-averaged and trajectory-averaged losses have different minimisers
//! when completions from the same state differ in length.

use lenvm::analysis::weighting_bias_demo;
use lenvm::value::{train, Averaging, FeatureMap, TrainConfig, TrainingSet, ValueHead};
use lenvm::world::Dataset;
use lenvm::{fixtures, DiscountSpec, Result, Trajectory};

pub fn run_example() -> Result<()> {
    let spec = DiscountSpec::new(0.5)?;
    let (tok, traj) = weighting_bias_demo(&[(1, 0.5), (3, 0.5)], &spec)?;
    println!("closed form: token-avg {tok}  trajectory-avg {traj}");

    // One completion of each length from the start state.
    let world = fixtures::one_or_three();
    let short = Trajectory { prompt_id: "p".into(), seed: 0, tokens: vec![0], states: vec![0, 3], length: 1, truncated: false };
    let long = Trajectory { prompt_id: "p".into(), seed: 1, tokens: vec![1, 1, 0], states: vec![0, 1, 2, 3], length: 3, truncated: false };
    let data = Dataset::from_trajectories([short, long], &spec)?;
    let fm = FeatureMap::one_hot(world.num_states());
    let set = TrainingSet::from_dataset(&data, &fm);
    for averaging in [Averaging::TokenAvg, Averaging::TrajectoryAvg] {
        let cfg = TrainConfig { epochs: 3000, batch_size: 4, learning_rate: 1.0, averaging, validation_fraction: 0.0, ..Default::default() };
        let head = train(ValueHead::init(fm.dimension(), 8, 0), &set, &spec, &cfg)?.head;
        println!("{averaging:?}: V(s0) = {:.5}", head.predict(&fm.encode(0, 0))?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
