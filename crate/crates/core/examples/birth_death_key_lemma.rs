//! Birth-death intensities: the Monte Carlo product along one path against the
//! exact pair value 2ⁿ⟨1, T_aⁿ⁺¹1⟩_γ from matrix powers.
use dsy::criteria::{discretize_operator, key_lemma_estimate, pair_sequence};
use dsy::kernels::{BetaSpec, BirthDeathKernel};
use dsy::sim::InitialState;

fn main() -> dsy::Result<()> {
    let k = BirthDeathKernel::new(BetaSpec::Constant(1.0 / 3.0), 50)?;
    for a in [0.5, 1.0, 2.0] {
        let op = discretize_operator(&k, None, a)?;
        let pairs = pair_sequence(&op, 21)?;
        for n in [5u32, 10, 20] {
            let mc = key_lemma_estimate(&k, InitialState::Stationary, a, n, 10_000, 2.0, 21, None)?;
            let exact = (n as f64 * 2f64.ln() + pairs[n as usize].log_value).exp();
            println!(
                "a = {a}, n = {n:>2}: MC {:>12.5} ± {:<10.5} exact {:>12.5}",
                mc.value, mc.std_error, exact
            );
        }
    }
    Ok(())
}
