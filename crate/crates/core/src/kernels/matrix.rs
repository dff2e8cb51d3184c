use rand::{Rng, RngCore};

use crate::error::{Error, Result};

use super::{Capabilities, Intensity, MarkovKernel, StateSpace};

/// A finite Markov chain given by its transition matrix over labelled atoms.
#[derive(Clone, Debug)]
pub struct MatrixKernel {
    name: String,
    space: StateSpace,
    atoms: Vec<f64>,
    rows: Vec<Vec<f64>>,
    cumulative: Vec<Vec<f64>>,
    intensity: Intensity,
    gamma: Vec<f64>,
}

impl MatrixKernel {
    pub fn new(atoms: Vec<f64>, rows: Vec<Vec<f64>>, intensity: Intensity) -> Result<Self> {
        let n = atoms.len();
        if n == 0 || rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Config("transition matrix must be square and match the atoms".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
                return Err(Error::Config(format!("row {i} has a negative or non-finite entry")));
            }
            let s: f64 = r.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::Config(format!("row {i} sums to {s}, not 1")));
            }
        }
        let cumulative = rows
            .iter()
            .map(|r| {
                r.iter()
                    .scan(0.0, |acc, p| {
                        *acc += p;
                        Some(*acc)
                    })
                    .collect()
            })
            .collect();
        let gamma = stationary(&rows)?;
        Ok(MatrixKernel {
            name: "matrix".into(),
            space: StateSpace::Discrete { atoms: atoms.clone() },
            atoms,
            rows,
            cumulative,
            intensity,
            gamma,
        })
    }

    /// The deterministic cycle `0 → 1 → … → n−1 → 0`, which has no reversing measure for `n ≥ 3`.
    pub fn cycle(n: usize, intensity: Intensity) -> Result<Self> {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if j == (i + 1) % n { 1.0 } else { 0.0 }).collect())
            .collect();
        let mut k = Self::new((1..=n).map(|i| i as f64).collect(), rows, intensity)?;
        k.name = "cycle".into();
        Ok(k)
    }

    pub fn stationary(&self) -> &[f64] {
        &self.gamma
    }

    fn index(&self, x: f64) -> Option<usize> {
        self.atoms.iter().position(|&a| a == x)
    }
}

/// Stationary law via power iteration on the lazy chain `(I + P)/2`.
fn stationary(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = rows.len();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..1_000_000 {
        let mut next = vec![0.0; n];
        for (i, r) in rows.iter().enumerate() {
            next[i] += 0.5 * pi[i];
            for (j, p) in r.iter().enumerate() {
                next[j] += 0.5 * pi[i] * p;
            }
        }
        let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if diff < 1e-15 {
            return Ok(pi);
        }
    }
    Err(Error::Numerical("stationary law of the matrix chain did not converge".into()))
}

impl MarkovKernel for MatrixKernel {
    fn name(&self) -> &str {
        &self.name
    }

    fn state_space(&self) -> &StateSpace {
        &self.space
    }

    fn lambda(&self, x: f64) -> f64 {
        self.intensity.eval(x)
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities { density: true, invariant_density: true, invariant_sampler: true }
    }

    fn sample(&self, x: f64, rng: &mut dyn RngCore) -> f64 {
        let i = self.index(x).expect("state is not an atom of the chain");
        let u: f64 = rng.random();
        let c = &self.cumulative[i];
        let j = c.partition_point(|&v| v <= u).min(c.len() - 1);
        self.atoms[j]
    }

    fn density(&self, x: f64, y: f64) -> Option<f64> {
        Some(match (self.index(x), self.index(y)) {
            (Some(i), Some(j)) => self.rows[i][j],
            _ => 0.0,
        })
    }

    fn invariant_density(&self, x: f64) -> Option<f64> {
        Some(self.index(x).map_or(0.0, |i| self.gamma[i]))
    }

    fn sample_invariant(&self, rng: &mut dyn RngCore) -> Option<f64> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (a, g) in self.atoms.iter().zip(&self.gamma) {
            acc += g;
            if u < acc {
                return Some(*a);
            }
        }
        self.atoms.last().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::detailed_balance_residual;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cycle_is_not_reversible() {
        let k = MatrixKernel::cycle(3, Intensity::Identity).unwrap();
        for g in k.stationary() {
            assert!((g - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(detailed_balance_residual(&k, &[1.0, 2.0, 3.0]).unwrap() > 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(k.sample(3.0, &mut rng), 1.0);
    }

    #[test]
    fn two_state_chain() {
        let k = MatrixKernel::new(
            vec![1.0, 2.0],
            vec![vec![0.5, 0.5], vec![0.25, 0.75]],
            Intensity::Identity,
        )
        .unwrap();
        assert!((k.stationary()[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!(detailed_balance_residual(&k, &[1.0, 2.0]).unwrap() < 1e-12);
    }

    #[test]
    fn malformed_matrices_rejected() {
        assert!(MatrixKernel::new(vec![1.0], vec![vec![0.5]], Intensity::Identity).is_err());
        assert!(MatrixKernel::new(vec![1.0, 2.0], vec![vec![1.0, 0.0]], Intensity::Identity).is_err());
        assert!(
            MatrixKernel::new(vec![1.0, 2.0], vec![vec![1.5, -0.5], vec![0.0, 1.0]], Intensity::Identity)
                .is_err()
        );
    }
}
