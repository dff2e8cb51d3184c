use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Capabilities, Intensity, MarkovKernel, StateSpace};

/// Birth probabilities `β_j` for `j ≥ 2`; `β_1 = 1` always.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BetaSpec {
    /// `β_j = c`.
    Constant(f64),
    /// `β_j = r^j`.
    Geometric(f64),
    /// `β_1, β_2, …` given explicitly (first entry must be 1).
    Explicit(Vec<f64>),
}

impl BetaSpec {
    /// `β_j`, or `None` past the end of an explicit list.
    pub fn beta(&self, j: usize) -> Option<f64> {
        assert!(j >= 1);
        if j == 1 {
            return Some(1.0);
        }
        match self {
            BetaSpec::Constant(c) => Some(*c),
            BetaSpec::Geometric(r) => Some(r.powi(j as i32)),
            BetaSpec::Explicit(list) => list.get(j - 1).copied(),
        }
    }

    /// Largest admissible truncation level, if bounded.
    pub fn len_limit(&self) -> Option<usize> {
        match self {
            BetaSpec::Explicit(list) => Some(list.len()),
            _ => None,
        }
    }
}

impl fmt::Display for BetaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaSpec::Constant(c) => write!(f, "constant:{c}"),
            BetaSpec::Geometric(r) => write!(f, "geometric:{r}"),
            BetaSpec::Explicit(list) => {
                let parts: Vec<String> = list.iter().map(f64::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

/// Parses `1/3`, `0.25` or `1e-2`.
pub(crate) fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Config(format!("not a number: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| bad())?;
            let d: f64 = d.trim().parse().map_err(|_| bad())?;
            Ok(n / d)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

impl FromStr for BetaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(v) = s.strip_prefix("constant:") {
            return Ok(BetaSpec::Constant(parse_real(v)?));
        }
        if let Some(v) = s.strip_prefix("geometric:") {
            return Ok(BetaSpec::Geometric(parse_real(v)?));
        }
        let list = s
            .split(',')
            .map(parse_real)
            .collect::<Result<Vec<_>>>()?;
        Ok(BetaSpec::Explicit(list))
    }
}

/// Birth-death chain on `{1, …, J}` with `λ(j) = j`, reflecting at both ends.
///
/// `p(j, j+1) = β_j`, `p(j, j−1) = 1 − β_j`, `p(1, 2) = 1`, `p(J, J−1) = 1`.
#[derive(Clone, Debug)]
pub struct BirthDeathKernel {
    spec: BetaSpec,
    j_max: usize,
    up: Vec<f64>,
    gamma: Vec<f64>,
    gamma_cdf: Vec<f64>,
    space: StateSpace,
}

impl BirthDeathKernel {
    pub fn new(spec: BetaSpec, j_max: usize) -> Result<Self> {
        if j_max < 2 {
            return Err(Error::Config(format!("truncation J must be at least 2, got {j_max}")));
        }
        if let Some(limit) = spec.len_limit() {
            if j_max > limit {
                return Err(Error::Config(format!(
                    "explicit beta list has {limit} entries, truncation J = {j_max}"
                )));
            }
        }
        if let BetaSpec::Explicit(list) = &spec {
            if list.first() != Some(&1.0) {
                return Err(Error::Config("beta_1 must equal 1".into()));
            }
        }
        let mut up = Vec::with_capacity(j_max);
        for j in 1..=j_max {
            let b = spec.beta(j).unwrap();
            if j >= 2 && !(b > 0.0 && b < 1.0) {
                return Err(Error::Config(format!("beta_{j} = {b} is outside (0, 1)")));
            }
            up.push(if j == j_max { 0.0 } else { b });
        }
        // detailed balance recursion γ_{j+1} = γ_j p(j,j+1) / p(j+1,j)
        let mut gamma = vec![1.0];
        for j in 1..j_max {
            let down_next = 1.0 - up[j];
            gamma.push(gamma[j - 1] * up[j - 1] / down_next);
        }
        let total: f64 = gamma.iter().sum();
        gamma.iter_mut().for_each(|g| *g /= total);
        let mut acc = 0.0;
        let gamma_cdf = gamma
            .iter()
            .map(|g| {
                acc += g;
                acc
            })
            .collect();
        let space = StateSpace::Discrete {
            atoms: (1..=j_max).map(|j| j as f64).collect(),
        };
        Ok(BirthDeathKernel { spec, j_max, up, gamma, gamma_cdf, space })
    }

    pub fn spec(&self) -> &BetaSpec {
        &self.spec
    }

    pub fn truncation(&self) -> usize {
        self.j_max
    }

    /// Truncated transition probability `p(j, k)`.
    pub fn transition(&self, j: usize, k: usize) -> f64 {
        if j < 1 || j > self.j_max || k < 1 || k > self.j_max {
            return 0.0;
        }
        let up = self.up[j - 1];
        if k == j + 1 {
            up
        } else if k + 1 == j {
            1.0 - up
        } else {
            0.0
        }
    }

    /// Invariant probabilities `γ_1 … γ_J` of the truncated chain.
    pub fn invariant(&self) -> &[f64] {
        &self.gamma
    }

    /// `p⁽²⁾_{jj} = (1−β_j)β_{j−1} + β_j(1−β_{j+1})` on the untruncated chain.
    /// `None` when an explicit list does not reach `j + 1`.
    pub fn untruncated_two_step(&self, j: usize) -> Option<f64> {
        let beta = |i: usize| if i == 0 { Some(0.0) } else { self.spec.beta(i) };
        Some((1.0 - beta(j)?) * beta(j - 1)? + beta(j)? * (1.0 - beta(j + 1)?))
    }

    fn index(&self, x: f64) -> Option<usize> {
        let j = x.round();
        (j == x && j >= 1.0 && j <= self.j_max as f64).then_some(j as usize)
    }
}

impl MarkovKernel for BirthDeathKernel {
    fn name(&self) -> &str {
        "birth-death"
    }

    fn state_space(&self) -> &StateSpace {
        &self.space
    }

    fn lambda(&self, x: f64) -> f64 {
        Intensity::Identity.eval(x)
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities { density: true, invariant_density: true, invariant_sampler: true }
    }

    fn sample(&self, x: f64, rng: &mut dyn RngCore) -> f64 {
        let j = self.index(x).expect("state outside the truncated chain");
        if rng.random::<f64>() < self.up[j - 1] {
            (j + 1) as f64
        } else {
            (j - 1) as f64
        }
    }

    fn density(&self, x: f64, y: f64) -> Option<f64> {
        match (self.index(x), self.index(y)) {
            (Some(j), Some(k)) => Some(self.transition(j, k)),
            _ => Some(0.0),
        }
    }

    fn invariant_density(&self, x: f64) -> Option<f64> {
        Some(self.index(x).map_or(0.0, |j| self.gamma[j - 1]))
    }

    fn sample_invariant(&self, rng: &mut dyn RngCore) -> Option<f64> {
        let u: f64 = rng.random();
        let k = self.gamma_cdf.partition_point(|&c| c < u).min(self.j_max - 1);
        Some((k + 1) as f64)
    }

    fn is_truncation(&self) -> bool {
        true
    }

    fn two_step_closed_form(&self, x: f64) -> Option<f64> {
        let j = self.index(x)?;
        let back = if j > 1 { self.transition(j, j - 1) * self.transition(j - 1, j) } else { 0.0 };
        let fwd = self.transition(j, j + 1) * self.transition(j + 1, j);
        Some(back + fwd)
    }
}
