use crate::error::{Error, Result};
use crate::kernels::{g, MarkovKernel};
use crate::numerics::log_sum_exp;
use crate::rng::{Purpose, StreamKey};
use crate::sim::{run_trials, InitialState};
use crate::tree::PathKey;

/// Monte Carlo estimate of `bⁿ E ∏_{j=0}^{n} g_a(X_j)` along one chain path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KeyLemmaEstimate {
    pub a: f64,
    pub n: u32,
    pub branching: f64,
    pub trials: u64,
    pub value: f64,
    pub std_error: f64,
    /// `ln value`, finite even when `value` underflows.
    pub log_value: f64,
}

/// Chain `X_0..X_n` along the path `1, 1, …, 1` of trial `trial`, using the same
/// keyed streams as the cascade simulator.
pub fn chain_path(
    kernel: &dyn MarkovKernel,
    initial: InitialState,
    n: u32,
    seed: u64,
    trial: u64,
) -> Vec<f64> {
    let streams = StreamKey::new(seed, trial);
    let mut key = PathKey::ROOT;
    let mut x = match initial {
        InitialState::State(x) => x,
        InitialState::Stationary => kernel
            .sample_invariant(&mut streams.stream(key, Purpose::State))
            .expect("checked: kernel samples its invariant law"),
    };
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(x);
    for _ in 0..n {
        key = key.child(1);
        x = kernel.sample(x, &mut streams.stream(key, Purpose::State));
        out.push(x);
    }
    out
}

#[allow(clippy::too_many_arguments)]
pub fn key_lemma_estimate(
    kernel: &dyn MarkovKernel,
    initial: InitialState,
    a: f64,
    n: u32,
    trials: u64,
    branching: f64,
    seed: u64,
    threads: Option<usize>,
) -> Result<KeyLemmaEstimate> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("a must be positive, got {a}")));
    }
    if !(branching >= 1.0) || !branching.is_finite() {
        return Err(Error::Config(format!("branching must be at least 1, got {branching}")));
    }
    if trials < 2 {
        return Err(Error::Config("key-lemma estimate needs at least 2 trials".into()));
    }
    match initial {
        InitialState::State(x) => {
            let possible = kernel.state_space().contains(x)
                && kernel.invariant_density(x).is_none_or(|d| d > 0.0 || !kernel.state_space().is_discrete());
            if !possible {
                return Err(Error::Config(format!(
                    "initial state {x} has zero probability under kernel {}",
                    kernel.name()
                )));
            }
        }
        InitialState::Stationary if !kernel.capabilities().invariant_sampler => {
            return Err(Error::Capability(format!("kernel {} cannot sample its invariant law", kernel.name())));
        }
        InitialState::Stationary => {}
    }
    let logs = run_trials(trials, threads, |trial| {
        let path = chain_path(kernel, initial, n, seed, trial);
        Ok(path.iter().map(|&x| g(a, kernel.lambda(x)).ln()).sum::<f64>())
    })?;
    let count = trials as f64;
    let log_mean = log_sum_exp(&logs) - count.ln();
    // spread of the products relative to the largest one
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rel: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let m = rel.iter().sum::<f64>() / count;
    let var = rel.iter().map(|r| (r - m).powi(2)).sum::<f64>() / (count - 1.0);
    let log_b = n as f64 * branching.ln();
    let log_value = log_b + log_mean;
    Ok(KeyLemmaEstimate {
        a,
        n,
        branching,
        trials,
        value: log_value.exp(),
        std_error: (log_b + top).exp() * (var / count).sqrt(),
        log_value,
    })
}
