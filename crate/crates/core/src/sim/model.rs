use rand::RngCore;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::kernels::{GenerationScaledModel, SharedKernel};
use crate::rng::{Purpose, StreamKey};
use crate::tree::PathKey;

/// Where the root of a type-(M) cascade starts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialState {
    State(f64),
    /// Root state drawn from the kernel's invariant law.
    Stationary,
}

/// Source of the vertex intensities `λ_v`.
#[derive(Clone, Debug)]
pub enum IntensitySource {
    /// `λ_v = λ(X_v)` with `X` a Markov chain along every path.
    Markov { kernel: SharedKernel, initial: InitialState },
    /// `λ_v = α^{−|v|}`.
    GenerationScaled(GenerationScaledModel),
    /// `λ_v ≡ rate`; rate 1 is the classical Yule cascade.
    Constant(f64),
}

/// How the states of siblings are drawn from their common parent state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SiblingCoupling {
    /// Each child draws from `p(x, ·)` on its own stream.
    #[default]
    Independent,
    /// All children come from one joint draw of the kernel.
    Joint,
}

/// Offspring law of a Galton-Watson tree, `weights[k] = P(k children)`.
#[derive(Clone, Debug)]
pub struct GwConfig {
    weights: Vec<f64>,
    index: WeightedIndex<f64>,
}

impl GwConfig {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Config("offspring weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("offspring weights sum to {total}, not 1")));
        }
        let index = WeightedIndex::new(&weights).map_err(|e| Error::Config(e.to_string()))?;
        Ok(GwConfig { weights, index })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self) -> f64 {
        self.weights.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> u32 {
        self.index.sample(rng) as u32
    }
}

/// The underlying tree: full binary, or a Galton-Watson tree.
#[derive(Clone, Debug, Default)]
pub enum TreeShape {
    #[default]
    Binary,
    GaltonWatson(GwConfig),
}

/// A DSY cascade: holding time `T_v/λ_v` at every vertex, `T_v ~ Exp(1)`.
#[derive(Clone, Debug)]
pub struct CascadeModel {
    pub source: IntensitySource,
    /// Every intensity is multiplied by this constant.
    pub intensity_scale: f64,
    pub siblings: SiblingCoupling,
    pub tree: TreeShape,
}

impl CascadeModel {
    pub fn new(source: IntensitySource) -> Self {
        CascadeModel {
            source,
            intensity_scale: 1.0,
            siblings: SiblingCoupling::Independent,
            tree: TreeShape::Binary,
        }
    }

    pub fn yule() -> Self {
        Self::new(IntensitySource::Constant(1.0))
    }

    pub fn markov(kernel: SharedKernel, initial: InitialState) -> Self {
        Self::new(IntensitySource::Markov { kernel, initial })
    }

    pub fn generation_scaled(alpha: f64) -> Result<Self> {
        Ok(Self::new(IntensitySource::GenerationScaled(GenerationScaledModel::new(alpha)?)))
    }

    pub fn with_scale(mut self, c: f64) -> Self {
        self.intensity_scale = c;
        self
    }

    pub fn with_tree(mut self, tree: TreeShape) -> Self {
        self.tree = tree;
        self
    }

    pub fn with_siblings(mut self, siblings: SiblingCoupling) -> Self {
        self.siblings = siblings;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.intensity_scale > 0.0) || !self.intensity_scale.is_finite() {
            return Err(Error::Config(format!(
                "intensity scale must be positive, got {}",
                self.intensity_scale
            )));
        }
        match &self.source {
            IntensitySource::Constant(r) if !(*r > 0.0) || !r.is_finite() => {
                Err(Error::Config(format!("constant intensity must be positive, got {r}")))
            }
            IntensitySource::Markov { kernel, initial } => match initial {
                InitialState::State(x) if !kernel.state_space().contains(*x) => Err(Error::Config(
                    format!("initial state {x} is outside the state space of {}", kernel.name()),
                )),
                InitialState::State(x) if !(kernel.lambda(*x) > 0.0) => Err(Error::Config(format!(
                    "intensity at initial state {x} is not positive"
                ))),
                InitialState::Stationary if !kernel.capabilities().invariant_sampler => {
                    Err(Error::Capability(format!(
                        "kernel {} cannot sample its invariant law",
                        kernel.name()
                    )))
                }
                _ => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

/// One sampled vertex of a realization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VertexSample {
    pub key: PathKey,
    pub depth: u32,
    /// Chain state; NaN when the model has none.
    pub state: f64,
    /// Holding time `T_v / λ_v`.
    pub weight: f64,
}

/// Lazily sampled realization of one trial. Every draw is keyed by the vertex
/// address, so any exploration order yields the same tree.
#[derive(Clone, Debug)]
pub struct Realization<'a> {
    model: &'a CascadeModel,
    streams: StreamKey,
}

impl<'a> Realization<'a> {
    pub fn new(model: &'a CascadeModel, seed: u64, trial: u64) -> Self {
        Realization { model, streams: StreamKey::new(seed, trial) }
    }

    pub fn root(&self) -> VertexSample {
        let key = PathKey::ROOT;
        let state = match &self.model.source {
            IntensitySource::Markov { kernel, initial } => match initial {
                InitialState::State(x) => *x,
                InitialState::Stationary => kernel
                    .sample_invariant(&mut self.streams.stream(key, Purpose::State))
                    .expect("validated: kernel samples its invariant law"),
            },
            _ => f64::NAN,
        };
        self.vertex(key, 0, state)
    }

    /// Number of children of `v`.
    pub fn offspring(&self, v: &VertexSample) -> u32 {
        match &self.model.tree {
            TreeShape::Binary => 2,
            TreeShape::GaltonWatson(gw) => gw.sample(&mut self.streams.stream(v.key, Purpose::Offspring)),
        }
    }

    pub fn children(&self, v: &VertexSample) -> Vec<VertexSample> {
        let count = self.offspring(v);
        let depth = v.depth + 1;
        let keys: Vec<PathKey> = (1..=count).map(|k| v.key.child(k)).collect();
        match &self.model.source {
            IntensitySource::Markov { kernel, .. } => match self.model.siblings {
                SiblingCoupling::Independent => keys
                    .into_iter()
                    .map(|key| {
                        let x = kernel.sample(v.state, &mut self.streams.stream(key, Purpose::State));
                        self.vertex(key, depth, x)
                    })
                    .collect(),
                SiblingCoupling::Joint => {
                    let mut rng = self.streams.stream(v.key, Purpose::Siblings);
                    let xs = kernel.sample_siblings(v.state, count as usize, &mut rng);
                    keys.into_iter().zip(xs).map(|(key, x)| self.vertex(key, depth, x)).collect()
                }
            },
            _ => keys.into_iter().map(|key| self.vertex(key, depth, f64::NAN)).collect(),
        }
    }

    fn vertex(&self, key: PathKey, depth: u32, state: f64) -> VertexSample {
        let t: f64 = Exp1.sample(&mut self.streams.stream(key, Purpose::Holding));
        VertexSample { key, depth, state, weight: t / self.intensity(depth, state) }
    }

    fn intensity(&self, depth: u32, state: f64) -> f64 {
        let base = match &self.model.source {
            IntensitySource::Markov { kernel, .. } => kernel.lambda(state),
            IntensitySource::GenerationScaled(g) => g.intensity(depth),
            IntensitySource::Constant(r) => *r,
        };
        base * self.model.intensity_scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{BesselKernel, Intensity, MeanFieldKernel, MeanFieldLaw};
    use std::sync::Arc;

    #[test]
    fn gw_mean_and_validation() {
        let gw = GwConfig::new(vec![0.6, 0.4]).unwrap();
        assert!((gw.mean() - 0.4).abs() < 1e-15);
        assert!(GwConfig::new(vec![0.5, 0.4]).is_err());
        assert!(GwConfig::new(vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn realization_is_order_independent() {
        let m = CascadeModel::markov(Arc::new(BesselKernel::new()), InitialState::State(1.0));
        let r = Realization::new(&m, 3, 0);
        let root = r.root();
        let kids = r.children(&root);
        let again = Realization::new(&m, 3, 0).children(&root);
        assert_eq!(kids, again);
        // grandchildren of the second child before the first
        let g2 = r.children(&kids[1]);
        let g1 = r.children(&kids[0]);
        assert_eq!(g1, Realization::new(&m, 3, 0).children(&kids[0]));
        assert_ne!(g1[0].weight, g2[0].weight);
    }

    #[test]
    fn point_mass_mean_field_is_yule() {
        let k = MeanFieldKernel::new(MeanFieldLaw::PointMass(1.0), Intensity::Identity).unwrap();
        let m = CascadeModel::markov(Arc::new(k), InitialState::State(1.0));
        let y = CascadeModel::yule();
        let (a, b) = (Realization::new(&m, 9, 2), Realization::new(&y, 9, 2));
        let (ra, rb) = (a.root(), b.root());
        assert_eq!(ra.weight, rb.weight);
        let (ca, cb) = (a.children(&ra), b.children(&rb));
        for (x, y) in ca.iter().zip(&cb) {
            assert_eq!(x.weight, y.weight);
        }
    }

    #[test]
    fn joint_siblings_change_only_states() {
        let k: SharedKernel = Arc::new(BesselKernel::new());
        let ind = CascadeModel::markov(k.clone(), InitialState::State(2.0));
        let joint = ind.clone().with_siblings(SiblingCoupling::Joint);
        let (a, b) = (Realization::new(&ind, 1, 0), Realization::new(&joint, 1, 0));
        let (ca, cb) = (a.children(&a.root()), b.children(&b.root()));
        assert_ne!(ca[0].state, cb[0].state);
        // same T_v, different λ
        for (x, y) in ca.iter().zip(&cb) {
            let tx = x.weight * x.state * x.state;
            let ty = y.weight * y.state * y.state;
            assert!((tx - ty).abs() < 1e-12 * tx.max(1.0));
        }
    }

    #[test]
    fn invalid_models_rejected() {
        let k: SharedKernel = Arc::new(BesselKernel::new());
        assert!(CascadeModel::markov(k.clone(), InitialState::State(-1.0)).validate().is_err());
        assert!(CascadeModel::yule().with_scale(0.0).validate().is_err());
        assert!(CascadeModel::new(IntensitySource::Constant(-1.0)).validate().is_err());
        assert!(CascadeModel::generation_scaled(0.0).is_err());
    }
}
