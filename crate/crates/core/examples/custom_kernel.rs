//! Plugging in a user kernel: a reflected Gaussian walk on the half line with
//! λ(x) = 1 + x, simulated through the same cascade machinery.
use std::sync::Arc;

use dsy::kernels::{Capabilities, MarkovKernel, StateSpace};
use dsy::sim::{zeta_trials, CascadeModel, InitialState};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug)]
struct ReflectedWalk {
    space: StateSpace,
}

impl MarkovKernel for ReflectedWalk {
    fn name(&self) -> &str {
        "reflected-walk"
    }

    fn state_space(&self) -> &StateSpace {
        &self.space
    }

    fn lambda(&self, x: f64) -> f64 {
        1.0 + x
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities::default()
    }

    fn sample(&self, x: f64, rng: &mut dyn RngCore) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        (x + z).abs()
    }
}

fn main() -> dsy::Result<()> {
    let walk = ReflectedWalk { space: StateSpace::Interval { lo: 0.0, hi: f64::INFINITY } };
    let model = CascadeModel::markov(Arc::new(walk), InitialState::State(1.0));
    let runs = zeta_trials(&model, 30, 1_000_000, 20, 8, None)?;
    for (trial, z) in runs.iter().enumerate().take(5) {
        println!("trial {trial}: ζ_30 = {:?}, {} vertices expanded", z.zeta(), z.nodes_expanded);
    }
    Ok(())
}
