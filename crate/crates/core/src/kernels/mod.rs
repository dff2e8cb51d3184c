//! Intensity models: Markov kernels along tree paths, intensity functions,
//! invariant laws, and the damping weight `g_a`.

mod bessel;
mod birth_death;
mod kpp;
mod matrix;
mod mean_field;

use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Quadrature;

pub use bessel::BesselKernel;
pub use birth_death::{BetaSpec, BirthDeathKernel};
pub(crate) use birth_death::parse_real;
pub use kpp::{convolution_identity_error, majorant, KppKernel};
pub use matrix::MatrixKernel;
pub use mean_field::{MeanFieldKernel, MeanFieldLaw};

/// The damping factor `λ/(a+λ)`, the Laplace transform at `a` of an
/// exponential holding time with rate `λ`.
pub fn g(a: f64, lam: f64) -> f64 {
    debug_assert!(lam > 0.0 && a >= 0.0);
    lam / (a + lam)
}

/// State space together with its reference measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StateSpace {
    /// Finitely many atoms carrying counting measure.
    Discrete { atoms: Vec<f64> },
    /// Open interval (ends may be infinite) carrying Lebesgue measure.
    Interval { lo: f64, hi: f64 },
}

impl StateSpace {
    pub fn contains(&self, x: f64) -> bool {
        match self {
            StateSpace::Discrete { atoms } => atoms.contains(&x),
            StateSpace::Interval { lo, hi } => *lo < x && x < *hi,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, StateSpace::Discrete { .. })
    }
}

/// The intensity function `λ(x)`.
#[derive(Clone)]
pub enum Intensity {
    Identity,
    Square,
    OnePlusSquare,
    Constant(f64),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Intensity {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Intensity::Identity => x,
            Intensity::Square => x * x,
            Intensity::OnePlusSquare => 1.0 + x * x,
            Intensity::Constant(c) => *c,
            Intensity::Custom(f) => f(x),
        }
    }
}

impl fmt::Debug for Intensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Intensity::Identity => f.write_str("x"),
            Intensity::Square => f.write_str("x^2"),
            Intensity::OnePlusSquare => f.write_str("1+x^2"),
            Intensity::Constant(c) => write!(f, "{c}"),
            Intensity::Custom(_) => f.write_str("custom"),
        }
    }
}

/// What a kernel can provide beyond sampling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Capabilities {
    pub density: bool,
    pub invariant_density: bool,
    pub invariant_sampler: bool,
}

/// A time-homogeneous Markov kernel driving the intensities along tree paths.
///
/// Densities are taken with respect to the state space's reference measure.
/// Kernels are immutable once built and are shared across threads.
pub trait MarkovKernel: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn state_space(&self) -> &StateSpace;

    fn lambda(&self, x: f64) -> f64;

    fn capabilities(&self) -> Capabilities;

    /// Draws `y ~ p(x, ·)`.
    fn sample(&self, x: f64, rng: &mut dyn RngCore) -> f64;

    /// Joint draw of the states of `count` siblings with parent state `x`.
    /// Each marginal is `p(x, ·)`; the default draws them independently.
    fn sample_siblings(&self, x: f64, count: usize, rng: &mut dyn RngCore) -> Vec<f64> {
        (0..count).map(|_| self.sample(x, rng)).collect()
    }

    fn density(&self, _x: f64, _y: f64) -> Option<f64> {
        None
    }

    fn invariant_density(&self, _x: f64) -> Option<f64> {
        None
    }

    fn sample_invariant(&self, _rng: &mut dyn RngCore) -> Option<f64> {
        None
    }

    /// Points where `y ↦ p(x, y)` is not smooth, used to split quadratures.
    fn breakpoints(&self, _x: f64) -> Vec<f64> {
        Vec::new()
    }

    /// True when a discrete state space is a finite truncation of an infinite one,
    /// so sums over it need a tail test.
    fn is_truncation(&self) -> bool {
        false
    }

    /// Closed-form `p⁽²⁾(x, x)` when the kernel has one.
    fn two_step_closed_form(&self, _x: f64) -> Option<f64> {
        None
    }
}

pub type SharedKernel = Arc<dyn MarkovKernel>;

pub(crate) fn require_density(k: &dyn MarkovKernel) -> Result<()> {
    if k.capabilities().density {
        Ok(())
    } else {
        Err(Error::Capability(format!("kernel {} has no transition density", k.name())))
    }
}

pub(crate) fn require_invariant(k: &dyn MarkovKernel) -> Result<()> {
    if k.capabilities().invariant_density {
        Ok(())
    } else {
        Err(Error::Capability(format!("kernel {} has no invariant density", k.name())))
    }
}

/// `max |p(x,y)γ(x) − p(y,x)γ(y)| / (1 + |p(x,y)γ(x)|)` over pairs of grid states.
pub fn detailed_balance_residual(k: &dyn MarkovKernel, grid: &[f64]) -> Result<f64> {
    require_density(k)?;
    require_invariant(k)?;
    let gamma: Vec<f64> = grid.iter().map(|&x| k.invariant_density(x).unwrap()).collect();
    let mut worst = 0.0f64;
    for (i, &x) in grid.iter().enumerate() {
        for (j, &y) in grid.iter().enumerate().skip(i + 1) {
            let fwd = k.density(x, y).unwrap() * gamma[i];
            let bwd = k.density(y, x).unwrap() * gamma[j];
            worst = worst.max((fwd - bwd).abs() / (1.0 + fwd.abs()));
        }
    }
    Ok(worst)
}

/// The two-step return density `p⁽²⁾(x, x) = ∫ p(x,z) p(z,x) m(dz)`.
pub fn two_step_diagonal(k: &dyn MarkovKernel, x: f64, quad: &Quadrature) -> Result<f64> {
    require_density(k)?;
    if let Some(v) = k.two_step_closed_form(x) {
        return Ok(v);
    }
    match k.state_space() {
        StateSpace::Discrete { atoms } => Ok(atoms
            .iter()
            .map(|&z| k.density(x, z).unwrap() * k.density(z, x).unwrap())
            .sum()),
        StateSpace::Interval { lo, hi } => {
            let mut breaks = vec![*lo, *hi, x];
            breaks.extend(k.breakpoints(x).into_iter().filter(|b| lo < b && b < hi));
            let v = quad.integrate_breaks(
                |z| {
                    if z < *lo || z > *hi || z.is_infinite() {
                        0.0
                    } else {
                        k.density(x, z).unwrap() * k.density(z, x).unwrap()
                    }
                },
                &breaks,
            )?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Numerical(format!("two-step diagonal diverges at x = {x}")))
            }
        }
    }
}

/// Deterministic generation-dependent intensities `λ_v = α^{-|v|}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationScaledModel {
    pub alpha: f64,
}

impl GenerationScaledModel {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
        }
        Ok(GenerationScaledModel { alpha })
    }

    pub fn intensity(&self, depth: u32) -> f64 {
        self.alpha.powi(-(depth as i32))
    }

    /// Mean holding time `α^{|v|}` of a vertex at `depth`.
    pub fn scale(&self, depth: u32) -> f64 {
        self.alpha.powi(depth as i32)
    }
}
