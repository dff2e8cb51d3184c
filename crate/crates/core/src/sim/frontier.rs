use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::numerics::stats::{wilson_interval, Proportion};

use super::model::{CascadeModel, Realization, VertexSample};
use super::run_trials;
use super::search::QueueEntry;

/// Frontier `V(t)` of one realization.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontierResult {
    pub horizon: f64,
    /// `|V(t)|`; meaningful only when the budget was not exceeded.
    pub crossed_count: u64,
    /// Branching times before `t`, in increasing order, at most `max_events` of them.
    pub event_times: Vec<f64>,
    /// Number of branchings before `t` (or before censoring).
    pub events: u64,
    pub budget_exceeded: bool,
    pub budget: u64,
}

/// Events kept in `FrontierResult::event_times`.
pub const DEFAULT_MAX_EVENTS: usize = 10_000;

/// Event-driven simulation up to horizon `t`.
///
/// Live vertices sit in a queue keyed by death time. A vertex dying before `t`
/// branches; once the earliest death is at or after `t`, every live vertex crosses `t`.
/// `budget` caps the number of live vertices.
pub fn simulate_frontier(
    model: &CascadeModel,
    t: f64,
    budget: u64,
    seed: u64,
    trial: u64,
    max_events: usize,
) -> Result<FrontierResult> {
    model.validate()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Config(format!("horizon must be positive and finite, got {t}")));
    }
    let real = Realization::new(model, seed, trial);
    let mut live: Vec<VertexSample> = Vec::new();
    let mut free: Vec<u32> = Vec::new();
    let mut heap = BinaryHeap::new();
    let root = real.root();
    live.push(root);
    heap.push(QueueEntry { priority: root.weight, slot: 0 });
    let mut event_times = Vec::new();
    let mut events = 0u64;
    let mut budget_exceeded = false;
    let mut crossed_count = 0u64;
    while let Some(QueueEntry { priority: end, slot }) = heap.pop() {
        if end >= t {
            crossed_count = 1 + heap.len() as u64;
            break;
        }
        events += 1;
        if event_times.len() < max_events {
            event_times.push(end);
        }
        let v = live[slot as usize];
        free.push(slot);
        for c in real.children(&v) {
            let s = match free.pop() {
                Some(s) => {
                    live[s as usize] = c;
                    s
                }
                None => {
                    live.push(c);
                    live.len() as u32 - 1
                }
            };
            heap.push(QueueEntry { priority: end + c.weight, slot: s });
        }
        if heap.len() as u64 > budget {
            budget_exceeded = true;
            break;
        }
    }
    // an empty queue before t means the tree died out: V(t) is empty
    Ok(FrontierResult { horizon: t, crossed_count, event_times, events, budget_exceeded, budget })
}

/// Fraction of trials that exceed the node budget before `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplosionEstimate {
    pub horizon: f64,
    pub budget: u64,
    pub trials: u64,
    pub exceeded: u64,
    /// Estimate with 95% Wilson interval.
    pub proportion: Proportion,
    /// `|V(t)|` of every trial, in trial order; censored trials report 0.
    pub crossed_counts: Vec<u64>,
    pub budget_exceeded: Vec<bool>,
    pub caveat: &'static str,
}

pub const CENSORING_CAVEAT: &str = "budget-censored evidence";

/// Monte Carlo surrogate for `P(ζ ≤ t)`: a trial counts when its frontier outgrows `budget`.
pub fn explosion_probability(
    model: &CascadeModel,
    t: f64,
    budget: u64,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<ExplosionEstimate> {
    if trials < 1 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    model.validate()?;
    let runs = run_trials(trials, threads, |trial| simulate_frontier(model, t, budget, seed, trial, 0))?;
    let exceeded = runs.iter().filter(|r| r.budget_exceeded).count() as u64;
    Ok(ExplosionEstimate {
        horizon: t,
        budget,
        trials,
        exceeded,
        proportion: wilson_interval(exceeded, trials, 1.959_963_984_540_054),
        crossed_counts: runs
            .iter()
            .map(|r| if r.budget_exceeded { 0 } else { r.crossed_count })
            .collect(),
        budget_exceeded: runs.iter().map(|r| r.budget_exceeded).collect(),
        caveat: CENSORING_CAVEAT,
    })
}
