use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::numerics::Quadrature;

use super::{Capabilities, Intensity, MarkovKernel, StateSpace};

/// Wave-number magnitude chain of the Navier-Stokes Bessel cascade.
///
/// `X' = U·x + T/2` with `U ~ Uniform(0,1)`, `T ~ Exp(1)`; `λ(x) = x²`;
/// invariant density `γ(x) = 4x e^{−2x}` on `(0, ∞)`.
#[derive(Clone, Debug)]
pub struct BesselKernel {
    space: StateSpace,
}

impl Default for BesselKernel {
    fn default() -> Self {
        BesselKernel {
            space: StateSpace::Interval { lo: 0.0, hi: f64::INFINITY },
        }
    }
}

impl BesselKernel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Transition density `p(x, y)`; `x` must be positive.
    pub fn transition_density(&self, x: f64, y: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("Bessel state must be positive, got {x}")));
        }
        if !(y > 0.0) {
            return Ok(0.0);
        }
        Ok(if x < y {
            if x < 300.0 {
                (2.0 * x).exp_m1() / x * (-2.0 * y).exp()
            } else {
                ((2.0 * (x - y)).exp() - (-2.0 * y).exp()) / x
            }
        } else {
            -(-2.0 * y).exp_m1() / x
        })
    }

    pub fn gamma(x: f64) -> f64 {
        if x > 0.0 {
            4.0 * x * (-2.0 * x).exp()
        } else {
            0.0
        }
    }

    /// The two pieces of `p⁽²⁾(x,x)`: integration over `(0, x)` and over `(x, ∞)`.
    pub fn two_step_split(&self, x: f64, quad: &Quadrature) -> Result<(f64, f64)> {
        let integrand = |z: f64| {
            if z <= 0.0 {
                return 0.0;
            }
            self.transition_density(x, z).unwrap() * self.transition_density(z, x).unwrap()
        };
        let below = quad.integrate(integrand, 0.0, x)?;
        let above = quad.integrate(integrand, x, f64::INFINITY)?;
        Ok((below, above))
    }
}

impl MarkovKernel for BesselKernel {
    fn name(&self) -> &str {
        "bessel"
    }

    fn state_space(&self) -> &StateSpace {
        &self.space
    }

    fn lambda(&self, x: f64) -> f64 {
        Intensity::Square.eval(x)
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities { density: true, invariant_density: true, invariant_sampler: true }
    }

    fn sample(&self, x: f64, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rng.random();
        let t: f64 = Exp1.sample(rng);
        u * x + 0.5 * t
    }

    /// Siblings share one uniform: the pair `(U, 1 − U)` lies on the diagonal of the unit square.
    fn sample_siblings(&self, x: f64, count: usize, rng: &mut dyn RngCore) -> Vec<f64> {
        if count != 2 {
            return (0..count).map(|_| self.sample(x, rng)).collect();
        }
        let u: f64 = rng.random();
        let t1: f64 = Exp1.sample(rng);
        let t2: f64 = Exp1.sample(rng);
        vec![u * x + 0.5 * t1, (1.0 - u) * x + 0.5 * t2]
    }

    fn density(&self, x: f64, y: f64) -> Option<f64> {
        Some(self.transition_density(x, y).unwrap_or(0.0))
    }

    fn invariant_density(&self, x: f64) -> Option<f64> {
        Some(Self::gamma(x))
    }

    fn sample_invariant(&self, rng: &mut dyn RngCore) -> Option<f64> {
        let a: f64 = Exp1.sample(rng);
        let b: f64 = Exp1.sample(rng);
        Some(0.5 * (a + b))
    }

    fn breakpoints(&self, x: f64) -> Vec<f64> {
        vec![x]
    }
}
