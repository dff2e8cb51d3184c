//! Power iteration for dominant eigenvalues of symmetric positive semidefinite operators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerIteration {
    /// Relative tolerance on the dominant eigenvalue.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration { tol: 1e-8, max_iter: 50_000 }
    }
}

#[derive(Clone, Debug)]
pub struct Dominant {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
}

/// Width of the iterated block.
const BLOCK: usize = 4;

/// Dominant eigenvalue of a PSD operator given by its action `apply(x, out)`.
///
/// Block power (subspace) iteration with Rayleigh-Ritz on `BLOCK` vectors, so a
/// near-tie between the top eigenvalues does not stall convergence. The first
/// block vector is `start` (the constant vector if `None`). Converged when the
/// top Ritz value changes by at most `0.1·tol` relatively.
pub fn dominant_psd_eigenvalue<F>(
    n: usize,
    mut apply: F,
    start: Option<&[f64]>,
    cfg: PowerIteration,
) -> Result<Dominant>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if n == 0 {
        return Err(Error::Domain("empty operator".into()));
    }
    let k = BLOCK.min(n);
    let mut seed = 0x2545_f491_4f6c_dd1du64;
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(k);
    let first = match start {
        Some(s) => s.to_vec(),
        None => vec![1.0; n],
    };
    if dot(&first, &first).sqrt() == 0.0 || !first.iter().all(|x| x.is_finite()) {
        return Err(Error::Domain("start vector must be nonzero and finite".into()));
    }
    v.push(first);
    while v.len() < k {
        v.push(random_vector(n, &mut seed));
    }
    orthonormalize(&mut v, &mut seed);
    let mut w = vec![vec![0.0; n]; k];
    let mut last = f64::NAN;
    for it in 1..=cfg.max_iter {
        for (vi, wi) in v.iter().zip(w.iter_mut()) {
            apply(vi, wi);
        }
        let mut h = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..k {
                h[i][j] = 0.5 * (dot(&v[i], &w[j]) + dot(&v[j], &w[i]));
            }
        }
        let (vals, vecs) = jacobi_eigen(h);
        let top = vals[0];
        let converged = (top - last).abs() <= 0.1 * cfg.tol * top.abs() || top == 0.0;
        if converged {
            let mut ritz = vec![0.0; n];
            for (j, vj) in v.iter().enumerate() {
                for (r, x) in ritz.iter_mut().zip(vj) {
                    *r += vecs[j][0] * x;
                }
            }
            normalize(&mut ritz).ok();
            return Ok(Dominant { value: top.max(0.0), vector: ritz, iterations: it });
        }
        last = top;
        // rotate the images onto the Ritz basis, then re-orthonormalize
        let mut next = vec![vec![0.0; n]; k];
        for (i, ni) in next.iter_mut().enumerate() {
            for (j, wj) in w.iter().enumerate() {
                let c = vecs[j][i];
                for (a, b) in ni.iter_mut().zip(wj) {
                    *a += c * b;
                }
            }
        }
        v = next;
        orthonormalize(&mut v, &mut seed);
    }
    Err(Error::Numerical(format!(
        "power iteration did not converge in {} iterations (last estimate {last})",
        cfg.max_iter
    )))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) -> Result<f64> {
    let norm = dot(x, x).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::Numerical(format!("cannot normalize a vector of norm {norm}")));
    }
    x.iter_mut().for_each(|v| *v /= norm);
    Ok(norm)
}

fn random_vector(n: usize, seed: &mut u64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            *seed = crate::tree::splitmix64(*seed);
            (*seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

/// Modified Gram-Schmidt; vectors that collapse are replaced by fresh random ones.
fn orthonormalize(v: &mut [Vec<f64>], seed: &mut u64) {
    let n = v[0].len();
    for i in 0..v.len() {
        for attempt in 0..8 {
            let scale = dot(&v[i], &v[i]).sqrt();
            for j in 0..i {
                let (head, tail) = v.split_at_mut(i);
                let c = dot(&tail[0], &head[j]);
                for (a, b) in tail[0].iter_mut().zip(&head[j]) {
                    *a -= c * b;
                }
            }
            let norm = dot(&v[i], &v[i]).sqrt();
            if norm > 1e-10 * scale && norm > 0.0 && norm.is_finite() {
                v[i].iter_mut().for_each(|x| *x /= norm);
                break;
            }
            if attempt == 7 {
                v[i] = vec![0.0; n];
            } else {
                v[i] = random_vector(n, seed);
            }
        }
    }
}

/// Eigen-decomposition of a small symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues descending; eigenvector `i` is column `i` of the returned matrix.
pub(crate) fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut q = vec![vec![0.0; n]; n];
    for (i, row) in q.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for r in p + 1..n {
                if a[p][r] == 0.0 {
                    continue;
                }
                let theta = (a[r][r] - a[p][p]) / (2.0 * a[p][r]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (x, y) = (row[p], row[r]);
                    row[p] = c * x - s * y;
                    row[r] = s * x + c * y;
                }
                for j in 0..n {
                    let (x, y) = (a[p][j], a[r][j]);
                    a[p][j] = c * x - s * y;
                    a[r][j] = s * x + c * y;
                }
                for row in q.iter_mut() {
                    let (x, y) = (row[p], row[r]);
                    row[p] = c * x - s * y;
                    row[r] = s * x + c * y;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let vals = order.iter().map(|&i| a[i][i]).collect();
    let vecs = (0..n).map(|r| order.iter().map(|&i| q[r][i]).collect()).collect();
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matvec(m: &[Vec<f64>]) -> impl FnMut(&[f64], &mut [f64]) + '_ {
        move |x, out| {
            for (o, row) in out.iter_mut().zip(m) {
                *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
            }
        }
    }

    #[test]
    fn two_by_two() {
        // eigenvalues 3 and 1
        let m = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let d = dominant_psd_eigenvalue(2, matvec(&m), Some(&[1.0, 0.0]), PowerIteration::default()).unwrap();
        assert!((d.value - 3.0).abs() < 1e-8);
    }

    #[test]
    fn diagonal_with_slow_gap() {
        let m = vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.9, 0.0], vec![0.0, 0.0, 0.1]];
        let d = dominant_psd_eigenvalue(3, matvec(&m), None, PowerIteration::default()).unwrap();
        assert!((d.value - 1.0).abs() < 1e-7, "{}", d.value);
    }

    #[test]
    fn near_tie_converges() {
        // two blocks with top eigenvalues 0.5 and 0.5 − 1e-9
        let mut m = vec![vec![0.0; 6]; 6];
        for (i, d) in [0.5, 0.1, 0.05, 0.5 - 1e-9, 0.2, 0.01].iter().enumerate() {
            m[i][i] = *d;
        }
        let d = dominant_psd_eigenvalue(6, matvec(&m), None, PowerIteration::default()).unwrap();
        assert!((d.value - 0.5).abs() < 1e-9, "{}", d.value);
        assert!(d.iterations < 50);
    }

    #[test]
    fn jacobi_small() {
        let (vals, vecs) = jacobi_eigen(vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!((vals[0] - 3.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        assert!((vecs[0][0].abs() - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn non_convergence_reported() {
        let mut m = vec![vec![0.0; 6]; 6];
        for (i, d) in [1.0, 0.5, 0.5, 0.5, 0.999_999, 0.0].iter().enumerate() {
            m[i][i] = *d;
        }
        let cfg = PowerIteration { tol: 1e-15, max_iter: 5 };
        assert!(matches!(
            dominant_psd_eigenvalue(6, matvec(&m), Some(&[1.0, 1.0, 1.0, 1.0, 0.0, 0.0]), cfg),
            Err(Error::Numerical(_))
        ));
    }
}
