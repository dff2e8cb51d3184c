//! Intensities α^{-|v|}: large α slows the cascade down, small α makes it explode.
use dsy::sim::{explosion_probability, zeta_trials, CascadeModel};

fn main() -> dsy::Result<()> {
    let slow = CascadeModel::generation_scaled(2.0)?;
    let runs = zeta_trials(&slow, 20, 1_000_000, 50, 11, None)?;
    let above = runs.iter().filter(|z| z.zeta().is_some_and(|v| v > 5.0)).count();
    println!("alpha = 2:   ζ_20 > 5 in {above}/50 runs");

    let fast = CascadeModel::generation_scaled(0.3)?;
    let e = explosion_probability(&fast, 1.0, 20_000, 200, 12, None)?;
    println!(
        "alpha = 0.3: budget exceeded before t = 1 in {}/{} runs, 95% CI [{:.3}, {:.3}] ({})",
        e.exceeded, e.trials, e.proportion.lo, e.proportion.hi, e.caveat
    );
    Ok(())
}
