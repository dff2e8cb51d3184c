//! Pathwise simulation of DSY cascades: minimal path sums, frontiers and
//! Monte Carlo explosion evidence.

mod frontier;
mod model;
mod search;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub use frontier::{
    explosion_probability, simulate_frontier, ExplosionEstimate, FrontierResult, CENSORING_CAVEAT,
    DEFAULT_MAX_EVENTS,
};
pub use model::{
    CascadeModel, GwConfig, InitialState, IntensitySource, Realization, SiblingCoupling, TreeShape,
    VertexSample,
};
pub use search::{gw_zeta_to_depth, zeta_to_depth, ZetaEstimate};

/// Runs `f(trial)` for `trial in 0..trials`, results in trial order.
///
/// `threads = None` uses the global pool. Each trial owns its streams, so the
/// output does not depend on the thread count.
pub fn run_trials<T, F>(trials: u64, threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let work = || (0..trials).into_par_iter().map(&f).collect::<Result<Vec<T>>>();
    match threads {
        None => work(),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?
            .install(work),
    }
}

/// `ζ_0..ζ_n` for independent trials `0..trials`.
pub fn zeta_trials(
    model: &CascadeModel,
    n: u32,
    budget: u64,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<Vec<ZetaEstimate>> {
    model.validate()?;
    run_trials(trials, threads, |trial| zeta_to_depth(model, n, budget, seed, trial))
}

/// Frontiers at `t` for independent trials `0..trials`.
pub fn frontier_trials(
    model: &CascadeModel,
    t: f64,
    budget: u64,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<Vec<FrontierResult>> {
    model.validate()?;
    run_trials(trials, threads, |trial| simulate_frontier(model, t, budget, seed, trial, DEFAULT_MAX_EVENTS))
}
