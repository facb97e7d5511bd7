//! How finely a sigmoid value head can resolve remaining length at
//! bfloat16, fp16 and fp32 precision.

use lenvm::analysis::{precision_curve, DEFAULT_K_VALUES};
use lenvm::{DiscountSpec, Result};

pub fn run_example() -> Result<()> {
    let spec = DiscountSpec::new(0.997)?;
    let horizons: Vec<f64> = (0..=15).map(|i| f64::from(1u32 << i)).collect();
    for curve in precision_curve(&spec, &DEFAULT_K_VALUES, &horizons)? {
        println!("k = {}", curve.k);
        for p in curve.points.iter().step_by(3) {
            println!("  l {:>7}  z {:>8.3}  f {:.3e}", p.l, p.z, p.f);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
