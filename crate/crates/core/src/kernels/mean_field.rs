use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};

use super::{Capabilities, Intensity, MarkovKernel, StateSpace};

type SamplerFn = Arc<dyn Fn(&mut dyn RngCore) -> f64 + Send + Sync>;
type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Common law of the i.i.d. states in a mean-field cascade.
#[derive(Clone)]
pub enum MeanFieldLaw {
    PointMass(f64),
    Atoms { values: Vec<f64>, weights: Vec<f64> },
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
    /// A user law: sampler, optional density and its support.
    Custom { sampler: SamplerFn, density: Option<DensityFn>, space: StateSpace },
}

impl fmt::Debug for MeanFieldLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeanFieldLaw::PointMass(v) => write!(f, "PointMass({v})"),
            MeanFieldLaw::Atoms { values, weights } => {
                write!(f, "Atoms({values:?}, {weights:?})")
            }
            MeanFieldLaw::Exponential { rate } => write!(f, "Exponential({rate})"),
            MeanFieldLaw::Uniform { lo, hi } => write!(f, "Uniform({lo}, {hi})"),
            MeanFieldLaw::Custom { space, .. } => write!(f, "Custom({space:?})"),
        }
    }
}

/// `p(x, ·) = γ` for every `x`: states are i.i.d. with law `γ`.
#[derive(Clone, Debug)]
pub struct MeanFieldKernel {
    law: MeanFieldLaw,
    intensity: Intensity,
    space: StateSpace,
    atom_index: Option<WeightedIndex<f64>>,
    atom_weights: Vec<f64>,
}

impl MeanFieldKernel {
    pub fn new(law: MeanFieldLaw, intensity: Intensity) -> Result<Self> {
        let (space, atom_weights) = match &law {
            MeanFieldLaw::PointMass(v) => {
                check_finite(*v)?;
                (StateSpace::Discrete { atoms: vec![*v] }, vec![1.0])
            }
            MeanFieldLaw::Atoms { values, weights } => {
                if values.is_empty() || values.len() != weights.len() {
                    return Err(Error::Config("atoms need matching, non-empty values and weights".into()));
                }
                for &v in values {
                    check_finite(v)?;
                }
                if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
                    return Err(Error::Config("atom weights must be finite and non-negative".into()));
                }
                let total: f64 = weights.iter().sum();
                if !(total > 0.0) {
                    return Err(Error::Config("atom weights sum to zero".into()));
                }
                let mut sorted = values.clone();
                sorted.sort_by(f64::total_cmp);
                sorted.dedup();
                if sorted.len() != values.len() {
                    return Err(Error::Config("atom values must be distinct".into()));
                }
                (
                    StateSpace::Discrete { atoms: values.clone() },
                    weights.iter().map(|w| w / total).collect(),
                )
            }
            MeanFieldLaw::Exponential { rate } => {
                if !(*rate > 0.0) || !rate.is_finite() {
                    return Err(Error::Config(format!("exponential rate must be positive, got {rate}")));
                }
                (StateSpace::Interval { lo: 0.0, hi: f64::INFINITY }, Vec::new())
            }
            MeanFieldLaw::Uniform { lo, hi } => {
                if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::Config(format!("uniform law needs finite lo < hi, got [{lo}, {hi}]")));
                }
                (StateSpace::Interval { lo: *lo, hi: *hi }, Vec::new())
            }
            MeanFieldLaw::Custom { space, .. } => (space.clone(), Vec::new()),
        };
        let atom_index = if atom_weights.is_empty() {
            None
        } else {
            Some(WeightedIndex::new(&atom_weights).map_err(|e| Error::Config(e.to_string()))?)
        };
        Ok(MeanFieldKernel { law, intensity, space, atom_index, atom_weights })
    }

    pub fn law(&self) -> &MeanFieldLaw {
        &self.law
    }

    /// `γ` evaluated against the state space's reference measure.
    pub fn law_density(&self, y: f64) -> Option<f64> {
        match &self.law {
            MeanFieldLaw::PointMass(_) | MeanFieldLaw::Atoms { .. } => {
                let StateSpace::Discrete { atoms } = &self.space else { unreachable!() };
                Some(
                    atoms
                        .iter()
                        .position(|&a| a == y)
                        .map_or(0.0, |i| self.atom_weights[i]),
                )
            }
            MeanFieldLaw::Exponential { rate } => {
                Some(if y >= 0.0 { rate * (-rate * y).exp() } else { 0.0 })
            }
            MeanFieldLaw::Uniform { lo, hi } => {
                Some(if *lo <= y && y <= *hi { 1.0 / (hi - lo) } else { 0.0 })
            }
            MeanFieldLaw::Custom { density, .. } => density.as_ref().map(|d| d(y)),
        }
    }

    fn draw(&self, rng: &mut dyn RngCore) -> f64 {
        match &self.law {
            MeanFieldLaw::PointMass(v) => *v,
            MeanFieldLaw::Atoms { values, .. } => {
                values[self.atom_index.as_ref().unwrap().sample(rng)]
            }
            MeanFieldLaw::Exponential { rate } => {
                let e: f64 = Exp1.sample(rng);
                e / rate
            }
            MeanFieldLaw::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            MeanFieldLaw::Custom { sampler, .. } => sampler(rng),
        }
    }
}

fn check_finite(v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("state value {v} is not finite")))
    }
}

impl MarkovKernel for MeanFieldKernel {
    fn name(&self) -> &str {
        "mean-field"
    }

    fn state_space(&self) -> &StateSpace {
        &self.space
    }

    fn lambda(&self, x: f64) -> f64 {
        self.intensity.eval(x)
    }

    fn capabilities(&self) -> Capabilities {
        let density = self.law_density(self.space_probe()).is_some();
        Capabilities { density, invariant_density: density, invariant_sampler: true }
    }

    fn sample(&self, _x: f64, rng: &mut dyn RngCore) -> f64 {
        self.draw(rng)
    }

    fn density(&self, _x: f64, y: f64) -> Option<f64> {
        self.law_density(y)
    }

    fn invariant_density(&self, x: f64) -> Option<f64> {
        self.law_density(x)
    }

    fn sample_invariant(&self, rng: &mut dyn RngCore) -> Option<f64> {
        Some(self.draw(rng))
    }
}

impl MeanFieldKernel {
    fn space_probe(&self) -> f64 {
        match &self.space {
            StateSpace::Discrete { atoms } => atoms[0],
            StateSpace::Interval { lo, hi } => {
                if lo.is_finite() && hi.is_finite() {
                    0.5 * (lo + hi)
                } else if lo.is_finite() {
                    lo + 1.0
                } else if hi.is_finite() {
                    hi - 1.0
                } else {
                    0.0
                }
            }
        }
    }
}
