use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernels::{g, require_density, require_invariant, MarkovKernel, StateSpace};
use crate::numerics::{dominant_psd_eigenvalue, PowerIteration, Quadrature};

/// Uniform grid `lo:hi:N` with inclusive endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) || n < 2 {
            return Err(Error::Config(format!("grid needs finite lo < hi and N >= 2, got {lo}:{hi}:{n}")));
        }
        Ok(GridSpec { lo, hi, n })
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.n)
            .map(|i| if i + 1 == self.n { self.hi } else { self.lo + i as f64 * h })
            .collect()
    }

    /// Same endpoints, half the spacing.
    pub fn doubled(&self) -> GridSpec {
        GridSpec { n: 2 * self.n - 1, ..*self }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:{:?}:{}", self.lo, self.hi, self.n)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Config(format!("grid must be lo:hi:N, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        GridSpec::new(lo, hi, n)
    }
}

/// Required `γ`-mass of the truncated domain.
pub const MASS_CAPTURE: f64 = 1.0 - 1e-6;

/// Domain cut for default grids: `γ`-tail mass below this.
pub const TAIL_MASS: f64 = 1e-8;

/// Nodes used when a continuous kernel gets no explicit grid.
pub const DEFAULT_NODES: usize = 801;

/// Default grid for a continuous kernel: endpoints stepped outward by doubling
/// until the `γ`-mass beyond each is below `TAIL_MASS`.
pub fn default_grid(kernel: &dyn MarkovKernel) -> Result<GridSpec> {
    require_invariant(kernel)?;
    let StateSpace::Interval { lo, hi } = *kernel.state_space() else {
        return Err(Error::Config(format!("kernel {} is discrete and needs no grid", kernel.name())));
    };
    let gamma = |x: f64| kernel.invariant_density(x).unwrap();
    let q = Quadrature::with_rel_tol(1e-10);
    let mut right = if hi.is_finite() { hi } else { lo.max(0.0) + 1.0 };
    while !hi.is_finite() && q.integrate(gamma, right, f64::INFINITY)? > TAIL_MASS {
        right *= 2.0;
    }
    let mut left = if lo.is_finite() { lo } else { hi.min(0.0) - 1.0 };
    while !lo.is_finite() && q.integrate(gamma, f64::NEG_INFINITY, left)? > TAIL_MASS {
        left *= 2.0;
    }
    GridSpec::new(left, right, DEFAULT_NODES)
}

/// `T_a f(x) = g_a(x) ∫ f(y) p(x, dy)` on a finite set of states.
///
/// Entries are `g_i p(x_i, x_j) w_j`; `⟨f, h⟩_γ = Σ f_i h_i γ_i w_i`.
#[derive(Clone, Debug)]
pub struct DiscretizedOperator {
    pub kernel: String,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub gamma: Vec<f64>,
    pub g: Vec<f64>,
    pub a: f64,
    /// `None` for discrete kernels.
    pub grid: Option<GridSpec>,
    /// `γ`-mass of the (truncated) domain.
    pub mass_captured: f64,
    /// Row-major `p(x_i, x_j)`.
    p: Vec<f64>,
}

/// Assembles `T_a` on `grid` (ignored for discrete kernels, whose atoms are used).
pub fn discretize_operator(kernel: &dyn MarkovKernel, grid: Option<&GridSpec>, a: f64) -> Result<DiscretizedOperator> {
    require_density(kernel)?;
    require_invariant(kernel)?;
    check_a(a)?;
    let gamma_at = |x: f64| kernel.invariant_density(x).unwrap();
    let (nodes, weights, grid, mass) = match kernel.state_space() {
        StateSpace::Discrete { atoms } => {
            let nodes: Vec<f64> = atoms.iter().copied().filter(|&x| gamma_at(x) > 0.0).collect();
            let mass: f64 = nodes.iter().map(|&x| gamma_at(x)).sum();
            let w = vec![1.0; nodes.len()];
            (nodes, w, None, mass)
        }
        StateSpace::Interval { lo, hi } => {
            let spec = match grid {
                Some(s) => *s,
                None => default_grid(kernel)?,
            };
            let h = spec.step();
            let mut nodes = Vec::new();
            let mut weights = Vec::new();
            for (i, x) in spec.nodes().into_iter().enumerate() {
                let inside = (*lo < x || !lo.is_finite()) && (x < *hi || !hi.is_finite());
                if !inside || !(gamma_at(x) > 0.0) {
                    continue;
                }
                nodes.push(x);
                weights.push(if i == 0 || i + 1 == spec.n { 0.5 * h } else { h });
            }
            let from = spec.lo.max(*lo);
            let to = spec.hi.min(*hi);
            let mass = Quadrature::with_rel_tol(1e-10).integrate(gamma_at, from, to)?;
            if mass < MASS_CAPTURE {
                return Err(Error::Numerical(format!(
                    "grid {spec} captures only {mass} of the invariant mass; {}",
                    extension_hint(kernel, &spec)?
                )));
            }
            (nodes, weights, Some(spec), mass)
        }
    };
    if nodes.is_empty() {
        return Err(Error::Config("grid has no states with positive invariant density".into()));
    }
    let n = nodes.len();
    let mut p = Vec::with_capacity(n * n);
    for &x in &nodes {
        for &y in &nodes {
            p.push(kernel.density(x, y).unwrap());
        }
    }
    let gamma: Vec<f64> = nodes.iter().map(|&x| gamma_at(x)).collect();
    let g = nodes.iter().map(|&x| g(a, kernel.lambda(x))).collect();
    Ok(DiscretizedOperator {
        kernel: kernel.name().to_string(),
        nodes,
        weights,
        gamma,
        g,
        a,
        grid,
        mass_captured: mass,
        p,
    })
}

fn extension_hint(kernel: &dyn MarkovKernel, spec: &GridSpec) -> Result<String> {
    let needed = default_grid(kernel)?;
    Ok(format!(
        "extend the grid to at least [{}, {}]",
        needed.lo.min(spec.lo),
        needed.hi.max(spec.hi)
    ))
}

fn check_a(a: f64) -> Result<()> {
    if a >= 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("damping parameter must be finite and non-negative, got {a}")))
    }
}

impl DiscretizedOperator {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The same discretization at another damping parameter; the kernel is not re-evaluated.
    pub fn with_a(&self, a: f64, lambda: impl Fn(f64) -> f64) -> Result<Self> {
        check_a(a)?;
        let mut op = self.clone();
        op.a = a;
        op.g = self.nodes.iter().map(|&x| g(a, lambda(x))).collect();
        Ok(op)
    }

    pub fn density(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.len() + j]
    }

    /// Matrix entry `g_i p(x_i, x_j) w_j`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.g[i] * self.density(i, j) * self.weights[j]
    }

    /// `Σ_j p(x_i, x_j) w_j` for every row.
    pub fn row_sums(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.density(i, j) * self.weights[j]).sum())
            .collect()
    }

    /// `Σ_i γ_i w_i (1 − row_i)`: invariant mass lost by the truncation.
    pub fn row_deficit(&self) -> f64 {
        self.row_sums()
            .iter()
            .enumerate()
            .map(|(i, r)| self.gamma[i] * self.weights[i] * (1.0 - r))
            .sum()
    }

    /// `out = T_a v`.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        let n = self.len();
        let wv: Vec<f64> = v.iter().zip(&self.weights).map(|(a, b)| a * b).collect();
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.p[i * n..(i + 1) * n];
            *o = self.g[i] * row.iter().zip(&wv).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        (0..self.len()).map(|i| u[i] * v[i] * self.gamma[i] * self.weights[i]).sum()
    }

    fn sym_factors(&self) -> (Vec<f64>, Vec<f64>) {
        let left = (0..self.len())
            .map(|i| (self.g[i] * self.gamma[i] * self.weights[i]).sqrt())
            .collect();
        let right = (0..self.len())
            // separate roots: `w/γ` overflows once γ is subnormal
            .map(|j| (self.g[j] * self.weights[j]).sqrt() / self.gamma[j].sqrt())
            .collect();
        (left, right)
    }

    /// Entries of `S = D^{1/2} G^{1/2} P W G^{1/2} D^{−1/2}` with `D = diag(γ_i w_i)`.
    /// `S` is similar to `T_a` and symmetric exactly when the kernel is reversible.
    pub fn symmetrized(&self) -> Vec<f64> {
        let n = self.len();
        let (left, right) = self.sym_factors();
        let mut s = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                s.push(left[i] * self.density(i, j) * right[j]);
            }
        }
        s
    }
}

/// `max_{i,j} |S_ij − S_ji|` of the symmetrized matrix.
pub fn asymmetry(op: &DiscretizedOperator) -> f64 {
    let n = op.len();
    let s = op.symmetrized();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max((s[i * n + j] - s[j * n + i]).abs());
        }
    }
    worst
}

/// Spectral radius of `T_a` from the symmetric part of `S`, via `λ_max(S²)`.
///
/// Birth-death chains are bipartite, so `±ρ` are both eigenvalues; squaring
/// makes the iteration see a single dominant value.
pub fn spectral_radius(op: &DiscretizedOperator, cfg: PowerIteration) -> Result<f64> {
    let n = op.len();
    let s = op.symmetrized();
    let sym: Vec<f64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            0.5 * (s[i * n + j] + s[j * n + i])
        })
        .collect();
    let start: Vec<f64> = (0..n).map(|i| (op.gamma[i] * op.weights[i]).sqrt()).collect();
    let mut tmp = vec![0.0; n];
    let dom = dominant_psd_eigenvalue(
        n,
        |v, out| {
            matvec(&sym, n, v, &mut tmp);
            matvec(&sym, n, &tmp, out);
        },
        Some(&start),
        square_tol(cfg),
    )?;
    Ok(dom.value.max(0.0).sqrt())
}

/// `‖T_a‖` on `L²(γ)`: largest singular value of `A = D^{1/2} T_a D^{−1/2}`.
pub fn operator_norm(op: &DiscretizedOperator, cfg: PowerIteration) -> Result<f64> {
    operator_norm_from(op, None, cfg).map(|(v, _)| v)
}

/// `operator_norm` with a warm start; also returns the right singular vector.
pub fn operator_norm_from(
    op: &DiscretizedOperator,
    start: Option<&[f64]>,
    cfg: PowerIteration,
) -> Result<(f64, Vec<f64>)> {
    let n = op.len();
    let left: Vec<f64> = (0..n).map(|i| op.g[i] * (op.gamma[i] * op.weights[i]).sqrt()).collect();
    let right: Vec<f64> = (0..n).map(|j| op.weights[j].sqrt() / op.gamma[j].sqrt()).collect();
    let default_start: Vec<f64> = (0..n).map(|i| (op.gamma[i] * op.weights[i]).sqrt()).collect();
    let mut mid = vec![0.0; n];
    let dom = dominant_psd_eigenvalue(
        n,
        |v, out| {
            // mid = A v, out = Aᵀ mid
            for (i, m) in mid.iter_mut().enumerate() {
                let row = &op.p[i * n..(i + 1) * n];
                *m = left[i] * row.iter().zip(v).zip(&right).map(|((p, x), r)| p * r * x).sum::<f64>();
            }
            out.iter_mut().for_each(|o| *o = 0.0);
            for (i, m) in mid.iter().enumerate() {
                let c = left[i] * m;
                let row = &op.p[i * n..(i + 1) * n];
                for (o, p) in out.iter_mut().zip(row) {
                    *o += p * c;
                }
            }
            for (o, r) in out.iter_mut().zip(&right) {
                *o *= r;
            }
        },
        Some(start.unwrap_or(&default_start)),
        square_tol(cfg),
    )?;
    Ok((dom.value.max(0.0).sqrt(), dom.vector))
}

// Relative tolerance on λ² that yields `cfg.tol` on λ.
fn square_tol(cfg: PowerIteration) -> PowerIteration {
    PowerIteration { tol: 2.0 * cfg.tol, ..cfg }
}

fn matvec(m: &[f64], n: usize, v: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = m[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum();
    }
}

/// One row of the pair table: `⟨1, T_aⁿ 1⟩_γ` and its n-th root.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairTerm {
    pub n: u32,
    pub log_value: f64,
    pub value: f64,
    pub nth_root: f64,
}

/// `⟨1, T_aⁿ 1⟩_γ` for `n = 1..=n_max`, iterated with rescaling so nothing underflows.
pub fn pair_sequence(op: &DiscretizedOperator, n_max: u32) -> Result<Vec<PairTerm>> {
    if n_max < 1 {
        return Err(Error::Config("n_max must be at least 1".into()));
    }
    let n = op.len();
    let mut v = vec![1.0; n];
    let mut next = vec![0.0; n];
    let mut log_scale = 0.0;
    let ones = vec![1.0; n];
    let mut out = Vec::with_capacity(n_max as usize);
    for k in 1..=n_max {
        op.apply(&v, &mut next);
        std::mem::swap(&mut v, &mut next);
        let s = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let log_value = if s > 0.0 {
            v.iter_mut().for_each(|x| *x /= s);
            log_scale += s.ln();
            log_scale + op.inner(&ones, &v).ln()
        } else {
            f64::NEG_INFINITY
        };
        out.push(PairTerm {
            n: k,
            log_value,
            value: log_value.exp(),
            nth_root: (log_value / k as f64).exp(),
        });
        if s == 0.0 {
            for j in k + 1..=n_max {
                out.push(PairTerm { n: j, log_value, value: 0.0, nth_root: 0.0 });
            }
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{
        BesselKernel, BetaSpec, BirthDeathKernel, Intensity, KppKernel, MatrixKernel, MeanFieldKernel,
        MeanFieldLaw,
    };
    use proptest::prelude::*;

    fn point_mass() -> MeanFieldKernel {
        MeanFieldKernel::new(MeanFieldLaw::PointMass(1.0), Intensity::Identity).unwrap()
    }

    #[test]
    fn grid_round_trip() {
        let g: GridSpec = "-6:6:1201".parse().unwrap();
        assert_eq!(g.nodes().len(), 1201);
        assert_eq!(g.nodes()[600], 0.0);
        assert_eq!(g.to_string().parse::<GridSpec>().unwrap(), g);
        assert_eq!(g.doubled().n, 2401);
        assert!("1:0:5".parse::<GridSpec>().is_err());
        assert!("0:1".parse::<GridSpec>().is_err());
    }

    #[test]
    fn point_mass_closed_forms() {
        let k = point_mass();
        let cfg = PowerIteration::default();
        for a in [0.0, 0.5, 1.0, 3.0] {
            let op = discretize_operator(&k, None, a).unwrap();
            let want = 1.0 / (1.0 + a);
            assert!((spectral_radius(&op, cfg).unwrap() - want).abs() < 1e-12);
            assert!((operator_norm(&op, cfg).unwrap() - want).abs() < 1e-12);
            for t in pair_sequence(&op, 30).unwrap() {
                assert!((t.nth_root - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mean_field_continuous_is_rank_one() {
        let k = MeanFieldKernel::new(MeanFieldLaw::Exponential { rate: 1.0 }, Intensity::Identity).unwrap();
        let op = discretize_operator(&k, Some(&"0:30:61".parse().unwrap()), 1.0).unwrap();
        let n = op.len();
        // every 2×2 minor vanishes
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let m = op.entry(0, 0) * op.entry(i, j) - op.entry(i, 0) * op.entry(0, j);
                worst = worst.max(m.abs());
            }
        }
        assert!(worst < 1e-15, "{worst}");
    }

    #[test]
    fn a_zero_preserves_constants_on_discrete_kernels() {
        let k = BirthDeathKernel::new(BetaSpec::Constant(1.0 / 3.0), 50).unwrap();
        let op = discretize_operator(&k, None, 0.0).unwrap();
        for t in pair_sequence(&op, 40).unwrap() {
            assert!((t.value - 1.0).abs() < 1e-12);
        }
        let cfg = PowerIteration::default();
        assert!((spectral_radius(&op, cfg).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn birth_death_is_tridiagonal_and_symmetric() {
        let k = BirthDeathKernel::new(BetaSpec::Constant(1.0 / 3.0), 50).unwrap();
        let op = discretize_operator(&k, None, 2.0).unwrap();
        for i in 0..50usize {
            for j in 0..50 {
                if i.abs_diff(j) != 1 {
                    assert_eq!(op.entry(i, j), 0.0);
                }
            }
        }
        assert!(asymmetry(&op) < 1e-10);
    }

    #[test]
    fn subnormal_invariant_mass_stays_finite() {
        // γ_j ~ 2^{-j²/2}: the last kept state has subnormal mass
        let k = BirthDeathKernel::new(BetaSpec::Geometric(0.5), 50).unwrap();
        let op = discretize_operator(&k, None, 1.0).unwrap();
        assert!(op.gamma.iter().any(|&g| g < f64::MIN_POSITIVE));
        assert!(op.symmetrized().iter().all(|s| s.is_finite()));
        let cfg = PowerIteration::default();
        let rho = spectral_radius(&op, cfg).unwrap();
        let norm = operator_norm(&op, cfg).unwrap();
        assert!(rho.is_finite() && rho <= norm + 1e-10, "{rho} {norm}");
    }

    #[test]
    fn planted_cycle_is_asymmetric() {
        let k = MatrixKernel::cycle(3, Intensity::Identity).unwrap();
        let op = discretize_operator(&k, None, 1.0).unwrap();
        assert!(asymmetry(&op) > 0.1);
    }

    #[test]
    fn continuous_kernels_symmetrize() {
        let b = discretize_operator(&BesselKernel::new(), Some(&"0:16:201".parse().unwrap()), 1.0).unwrap();
        assert!(asymmetry(&b) < 1e-10, "{}", asymmetry(&b));
        let k = KppKernel::new().unwrap();
        let op = discretize_operator(&k, Some(&"-8:8:161".parse().unwrap()), 1.0).unwrap();
        assert!(asymmetry(&op) < 1e-10, "{}", asymmetry(&op));
    }

    #[test]
    fn bessel_row_sums() {
        let op = discretize_operator(&BesselKernel::new(), Some(&"0:20:2000".parse().unwrap()), 0.0).unwrap();
        let rows = op.row_sums();
        // rows away from the cut at 20 and from the singular corner at 0
        for (i, r) in rows.iter().enumerate() {
            let x = op.nodes[i];
            if (1.0..=10.0).contains(&x) {
                assert!((r - 1.0).abs() < 1e-6, "x = {x}: {r}");
            }
            assert!(*r <= 1.0 + 1e-6);
        }
        assert!(op.row_deficit().abs() < 1e-6, "{}", op.row_deficit());
    }

    #[test]
    fn insufficient_mass_is_numerical_failure() {
        let err = discretize_operator(&BesselKernel::new(), Some(&"0:3:101".parse().unwrap()), 1.0).unwrap_err();
        match err {
            Error::Numerical(msg) => assert!(msg.contains("extend the grid"), "{msg}"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn default_grids() {
        let b = default_grid(&BesselKernel::new()).unwrap();
        assert_eq!((b.lo, b.hi), (0.0, 16.0));
        let k = default_grid(&KppKernel::new().unwrap()).unwrap();
        assert!(k.lo < -3.0 && k.hi > 3.0);
    }

    #[test]
    fn spectral_radius_is_the_growth_rate() {
        let k = BirthDeathKernel::new(BetaSpec::Constant(1.0 / 3.0), 50).unwrap();
        let cfg = PowerIteration { tol: 1e-12, ..Default::default() };
        for a in [0.5, 2.0] {
            let op = discretize_operator(&k, None, a).unwrap();
            let rho = spectral_radius(&op, cfg).unwrap();
            let pairs = pair_sequence(&op, 20_000).unwrap();
            // n-th roots converge like ln⟨1,φ⟩²/n; the doubling difference removes that term
            let (n, n2) = (&pairs[9_999], &pairs[19_999]);
            let limit = ((n2.log_value - n.log_value) / 10_000.0).exp();
            assert!((rho - limit).abs() < 1e-4, "a = {a}: {rho} vs {limit}");
            assert!(n2.nth_root < rho && n2.nth_root > n.nth_root);
            assert!(rho <= operator_norm(&op, cfg).unwrap() + 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn norm_nonincreasing_in_a(a in 0.0f64..10.0, d in 0.01f64..10.0, beta in 0.05f64..0.95) {
            let k = BirthDeathKernel::new(BetaSpec::Constant(beta), 30).unwrap();
            let cfg = PowerIteration { tol: 1e-10, ..Default::default() };
            let lo = operator_norm(&discretize_operator(&k, None, a).unwrap(), cfg).unwrap();
            let hi = operator_norm(&discretize_operator(&k, None, a + d).unwrap(), cfg).unwrap();
            prop_assert!(hi <= lo * (1.0 + 1e-8));
            let op = discretize_operator(&k, None, a).unwrap();
            prop_assert!(spectral_radius(&op, cfg).unwrap() <= lo * (1.0 + 1e-8));
        }
    }
}
