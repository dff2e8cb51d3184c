use std::f64::consts::PI;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp1};

use crate::error::Result;
use crate::numerics::stats::InverseCdf;
use crate::numerics::{x_over_sinh, Quadrature};

use super::{Capabilities, Intensity, MarkovKernel, StateSpace};

/// Majorizing kernel `h(ξ) = 3ξ csch(πξ)` with `h(0) = 3/π`.
pub fn majorant(xi: f64) -> f64 {
    3.0 / PI * x_over_sinh(PI * xi)
}

/// `ln h(ξ)`, finite for all real `ξ`.
fn log_majorant(xi: f64) -> f64 {
    let a = xi.abs();
    if a < 1e-4 {
        return majorant(xi).ln();
    }
    (6.0 * a).ln() - PI * a - (-(-2.0 * PI * a).exp_m1()).ln()
}

/// `h(s) e^{π|s|}`, bounded by `6|s| + 3/π`.
fn tilted(s: f64) -> f64 {
    let a = s.abs();
    if a < 1e-4 {
        return majorant(s) * (PI * a).exp();
    }
    6.0 * a / -(-2.0 * PI * a).exp_m1()
}

/// Largest relative defect `|h*h(ξ) − (1+ξ²)h(ξ)| / ((1+ξ²)h(ξ))` over `points`,
/// with the convolution done by adaptive quadrature.
pub fn convolution_identity_error(points: &[f64], quad: &Quadrature) -> Result<f64> {
    let mut worst = 0.0f64;
    for &xi in points {
        let conv = quad.integrate_breaks(
            |eta| majorant(eta) * majorant(xi - eta),
            &[f64::NEG_INFINITY, xi.min(0.0), xi.max(0.0), f64::INFINITY],
        )?;
        let target = (1.0 + xi * xi) * majorant(xi);
        worst = worst.max((conv - target).abs() / target);
    }
    Ok(worst)
}

/// Normalizing constant of `(1+ξ²)h(ξ)²` over the real line.
const GAMMA_NORM: f64 = 5.0 * PI / 18.0;

/// Fourier-space KPP chain: `H(η|ξ) = h(η)h(ξ−η) / ((1+ξ²)h(ξ))`, `λ(ξ) = 1+ξ²`.
#[derive(Clone, Debug)]
pub struct KppKernel {
    space: StateSpace,
    invariant_table: InverseCdf,
}

impl KppKernel {
    pub fn new() -> Result<Self> {
        let invariant_table = InverseCdf::from_density(Self::gamma, -12.0, 12.0, 6000)?;
        Ok(KppKernel {
            space: StateSpace::Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY },
            invariant_table,
        })
    }

    pub fn transition_density(xi: f64, eta: f64) -> f64 {
        (log_majorant(eta) + log_majorant(xi - eta) - log_majorant(xi)).exp() / (1.0 + xi * xi)
    }

    pub fn gamma(xi: f64) -> f64 {
        let h = majorant(xi);
        GAMMA_NORM * (1.0 + xi * xi) * h * h
    }

    /// Envelope constant for the rejection sampler at parent state `xi`.
    fn envelope(xi: f64) -> f64 {
        let c0 = 3.0 / PI;
        let len = xi.abs();
        let inside = (3.0 * len + c0).powi(2);
        let outside = (6.0 * len + c0).max(12.0 / PI) * (12.0 / PI);
        inside.max(outside)
    }
}

impl MarkovKernel for KppKernel {
    fn name(&self) -> &str {
        "kpp"
    }

    fn state_space(&self) -> &StateSpace {
        &self.space
    }

    fn lambda(&self, x: f64) -> f64 {
        Intensity::OnePlusSquare.eval(x)
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities { density: true, invariant_density: true, invariant_sampler: true }
    }

    /// Rejection sampling. The proposal is flat on the segment between 0 and `ξ`
    /// (where `|η| + |ξ−η|` is constant) with `e^{−π·dist}` tails outside it.
    fn sample(&self, xi: f64, rng: &mut dyn RngCore) -> f64 {
        let (lo, hi) = if xi < 0.0 { (xi, 0.0) } else { (0.0, xi) };
        let len = hi - lo;
        let mass = len + 2.0 / PI;
        let bound = Self::envelope(xi);
        loop {
            let pick = rng.random::<f64>() * mass;
            let (eta, dist) = if pick < len {
                (lo + rng.random::<f64>() * len, 0.0)
            } else {
                let d: f64 = Exp1.sample(rng);
                let d = d / PI;
                if pick < len + 1.0 / PI {
                    (hi + d, d)
                } else {
                    (lo - d, d)
                }
            };
            let ratio = tilted(eta) * tilted(xi - eta) * (-PI * dist).exp();
            debug_assert!(ratio <= bound * (1.0 + 1e-12));
            if rng.random::<f64>() * bound <= ratio {
                return eta;
            }
        }
    }

    fn density(&self, x: f64, y: f64) -> Option<f64> {
        Some(Self::transition_density(x, y))
    }

    fn invariant_density(&self, x: f64) -> Option<f64> {
        Some(Self::gamma(x))
    }

    fn sample_invariant(&self, rng: &mut dyn RngCore) -> Option<f64> {
        Some(self.invariant_table.sample(rng))
    }

    fn breakpoints(&self, x: f64) -> Vec<f64> {
        vec![0.0, x]
    }
}
