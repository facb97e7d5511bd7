//! Fit the bounded value head to Monte Carlo returns and compare it with the
//! exact values, then round-trip it through a checkpoint.

use lenvm::fixtures;
use lenvm::value::{read_checkpoint, train, write_checkpoint, Averaging, FeatureMap, TrainConfig, TrainingSet, ValueHead};
use lenvm::world::{build_dataset, exact_value};
use lenvm::{DiscountSpec, Result};

pub fn run_example() -> Result<()> {
    let world = fixtures::ten_state();
    let spec = DiscountSpec::new(0.95)?;
    let prompts: Vec<String> = world.prompts().keys().cloned().collect();
    let data = build_dataset(&world, &spec, &prompts, 256, 0, 10_000)?;

    let fm = FeatureMap::one_hot(world.num_states());
    let set = TrainingSet::from_dataset(&data, &fm);
    let cfg = TrainConfig {
        epochs: 30,
        averaging: Averaging::TokenAvg,
        ..Default::default()
    };
    let out = train(ValueHead::init(fm.dimension(), 32, 0), &set, &spec, &cfg)?;
    let last = out.history.last().expect("at least one epoch");
    println!("epoch {}: train {:.5}  valid {:.5}", last.epoch, last.train, last.valid);

    let oracle = exact_value(&world, &spec)?;
    for s in world.non_terminal_states() {
        let v = out.head.predict(&fm.encode(s, 0))?;
        println!("state {s}: head {v:.4}  exact {:.4}", oracle.value[s]);
    }

    let text = write_checkpoint(&out.head, &fm, &["example".into()]);
    let (back, _) = read_checkpoint(&text, "memory")?;
    assert_eq!(back, out.head);
    println!("checkpoint: {} bytes, bit-exact reload", text.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
