//! Mean-field cascade with λ ≡ 1: every criterion reduces to 1/(1+a) < 1/2.
use dsy::criteria::{discretize_operator, operator_criterion, pair_sequence, spectral_radius, Method};
use dsy::kernels::{Intensity, MeanFieldKernel, MeanFieldLaw};
use dsy::numerics::PowerIteration;

fn main() -> dsy::Result<()> {
    let k = MeanFieldKernel::new(MeanFieldLaw::PointMass(1.0), Intensity::Identity)?;
    let cfg = PowerIteration::default();
    for a in [0.5, 1.0, 1.5, 3.0] {
        let op = discretize_operator(&k, None, a)?;
        let root = pair_sequence(&op, 30)?.last().unwrap().nth_root;
        let rho = spectral_radius(&op, cfg)?;
        let verdict = operator_criterion(&k, None, a, Method::SpectralRadius, 0.5, cfg)?.verdict;
        println!("a = {a}: n-th root {root:.12}, radius {rho:.12}, 1/(1+a) = {:.12}, {}", 1.0 / (1.0 + a), verdict.as_str());
    }
    Ok(())
}
