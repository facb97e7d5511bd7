//! Equal-To / At-Most / At-Least decoding on the ladder world with exact
//! state values, scored like a length-instruction benchmark.

use lenvm::decode::{run_controlled_decode, ControlRule, Truncation};
use lenvm::eval::{length_deviation, length_score, ConstraintKind};
use lenvm::world::{exact_value, sample_rollout};
use lenvm::{fixtures, DiscountSpec, Result};

pub fn run_example() -> Result<()> {
    let world = fixtures::ladder();
    let spec = DiscountSpec::from_l99(460)?;
    let oracle = exact_value(&world, &spec)?;
    let trunc = Truncation::length_control();

    for target in [8, 32, 128] {
        for (kind, rule) in [
            (ConstraintKind::EqualTo, ControlRule::EqualTo { target }),
            (ConstraintKind::AtMost, ControlRule::AtMost { target }),
            (ConstraintKind::AtLeast, ControlRule::AtLeast { target }),
        ] {
            let d = run_controlled_decode(&world, &oracle, rule, &spec, &trunc, "p", 0, 4000)?;
            let ld = length_deviation(d.trajectory.length, target)?;
            println!(
                "{:>9} {target:>4}: length {:>4}  LS {:>6.2}",
                kind.as_str(),
                d.trajectory.length,
                length_score(ld, kind)
            );
        }
        let base = sample_rollout(&world, "p", 0, 4000)?;
        let ld = length_deviation(base.length, target)?;
        println!("     base {target:>4}: length {:>4}  LS {:>6.2}", base.length, length_score(ld, ConstraintKind::EqualTo));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
