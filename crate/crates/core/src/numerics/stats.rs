//! Small statistics helpers: running moments, Wilson intervals,
//! Kolmogorov-Smirnov distances and tabulated inverse-CDF sampling.

use rand::{Rng, RngCore};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::Quadrature;

/// Welford accumulator for mean and variance.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance (0 for fewer than two samples).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        (self.variance() / self.n as f64).sqrt()
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = RunningStats::default();
        iter.into_iter().for_each(|x| s.push(x));
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Wilson score interval for a binomial proportion at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> Proportion {
    assert!(trials > 0 && successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Proportion {
        successes,
        trials,
        estimate: p,
        lo: (centre - half).max(0.0),
        hi: (centre + half).min(1.0),
    }
}

/// One-sample KS statistic of `samples` against a continuous CDF. Sorts in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample KS statistic. Sorts both slices in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Inverse-CDF sampler for a density tabulated on a grid over `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct InverseCdf {
    nodes: Vec<f64>,
    cdf: Vec<f64>,
}

impl InverseCdf {
    /// Tabulates the normalized CDF of `density` on `n` equal cells.
    pub fn from_density<F: Fn(f64) -> f64>(density: F, lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo) || n < 2 {
            return Err(Error::Domain("inverse-CDF table needs hi > lo and n >= 2".into()));
        }
        let q = Quadrature::with_rel_tol(1e-10);
        let h = (hi - lo) / n as f64;
        let nodes: Vec<f64> = (0..=n).map(|i| lo + i as f64 * h).collect();
        let mut cdf = Vec::with_capacity(n + 1);
        cdf.push(0.0);
        for w in nodes.windows(2) {
            let piece = q.integrate(&density, w[0], w[1])?;
            cdf.push(cdf.last().unwrap() + piece);
        }
        let total = *cdf.last().unwrap();
        if !(total > 0.0) {
            return Err(Error::Numerical("density has no mass on the table range".into()));
        }
        cdf.iter_mut().for_each(|c| *c /= total);
        Ok(InverseCdf { nodes, cdf })
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let (x0, x1) = (self.nodes[k - 1], self.nodes[k]);
        if c1 > c0 {
            x0 + (x1 - x0) * (u - c0) / (c1 - c0)
        } else {
            x0
        }
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.quantile(rng.random::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wilson_zero_of_hundred() {
        let p = wilson_interval(0, 100, 1.96);
        assert_eq!(p.lo, 0.0);
        assert!((p.hi - 0.037).abs() < 5e-4, "{}", p.hi);
    }

    #[test]
    fn running_stats_match_two_pass() {
        let xs = [1.0, 4.0, 2.0, 8.0, 5.0];
        let s: RunningStats = xs.iter().copied().collect();
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((s.mean() - mean).abs() < 1e-15);
        assert!((s.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn ks_of_uniform_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut xs: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let d = ks_statistic(&mut xs, |x| x.clamp(0.0, 1.0));
        assert!(d < 1.95 / (20_000f64).sqrt(), "{d}");
        let mut ys: Vec<f64> = xs.iter().map(|x| x * 0.5).collect();
        assert!(ks_two_sample(&mut xs.clone(), &mut ys) > 0.4);
    }

    #[test]
    fn inverse_cdf_of_exponential() {
        let t = InverseCdf::from_density(|x: f64| (-x).exp(), 0.0, 40.0, 4000).unwrap();
        assert!((t.quantile(0.5) - 2f64.ln()).abs() < 1e-4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut xs: Vec<f64> = (0..20_000).map(|_| t.sample(&mut rng)).collect();
        let d = ks_statistic(&mut xs, |x| 1.0 - (-x).exp());
        assert!(d < 1.95 / (20_000f64).sqrt(), "{d}");
    }
}
