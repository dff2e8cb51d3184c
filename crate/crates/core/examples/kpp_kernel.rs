//! The Fourier-space KPP kernel: h*h = (1+ξ²)h, reversibility, the a-free trace,
//! and sampling H(·|ξ) against its density.
use dsy::criteria::a_free_trace;
use dsy::kernels::{convolution_identity_error, detailed_balance_residual, KppKernel, MarkovKernel};
use dsy::numerics::Quadrature;
use dsy::rng::{Purpose, StreamKey};
use dsy::PathKey;

fn main() -> dsy::Result<()> {
    let k = KppKernel::new()?;
    let q = Quadrature::default();
    let xs: Vec<f64> = (0..=100).map(|i| -5.0 + 0.1 * i as f64).collect();
    println!("max relative error of h*h vs (1+ξ²)h: {:.2e}", convolution_identity_error(&xs, &q)?);
    println!("detailed balance residual: {:.2e}", detailed_balance_residual(&k, &xs)?);
    let t = a_free_trace(&k, &q)?;
    println!("∫ p⁽²⁾(ξ,ξ) dξ = {:.6} (finite: {})", t.value, t.is_finite());

    let mut rng = StreamKey::new(4, 0).stream(PathKey::ROOT, Purpose::State);
    let n = 100_000;
    let mean = (0..n).map(|_| k.sample(2.0, &mut rng)).sum::<f64>() / n as f64;
    // H(·|ξ) is symmetric about ξ/2
    println!("mean of H(·|2) from {n} draws: {mean:.4}");
    Ok(())
}
