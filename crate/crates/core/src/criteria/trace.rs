use crate::error::Result;
use crate::kernels::{g, require_density, two_step_diagonal, MarkovKernel, StateSpace};
use crate::numerics::Quadrature;

/// Ratio of successive tail increments at or above which a sum is declared divergent.
pub const DIVERGENCE_RATIO: f64 = 0.9;

/// Outcome of a tail-tested integral or sum.
#[derive(Clone, Debug, PartialEq)]
pub struct TailIntegral {
    /// Value including the geometric tail extrapolation; `+∞` when divergent.
    pub value: f64,
    /// Extrapolated tail added to the last partial value.
    pub tail: f64,
    /// Partial values at the successive cutoffs.
    pub partials: Vec<f64>,
    pub cutoffs: Vec<f64>,
    pub diverges: bool,
}

impl TailIntegral {
    pub fn is_finite(&self) -> bool {
        !self.diverges
    }
}

/// `∫ f dm` over the kernel's state space with a doubling-cutoff tail test.
///
/// Continuous spaces are integrated outward in pieces `[L, 2L]`; discrete
/// truncations are summed in dyadic blocks of atoms. Increments whose ratio
/// stays at or above `DIVERGENCE_RATIO` mean divergence; otherwise the tail is
/// extrapolated geometrically.
pub fn tail_integral<F>(kernel: &dyn MarkovKernel, f: F, quad: &Quadrature) -> Result<TailIntegral>
where
    F: Fn(f64) -> Result<f64>,
{
    match kernel.state_space() {
        StateSpace::Discrete { atoms } => {
            let terms: Vec<f64> = atoms.iter().map(|&x| f(x)).collect::<Result<_>>()?;
            if !kernel.is_truncation() || terms.len() < 8 {
                let v: f64 = terms.iter().sum();
                return Ok(TailIntegral {
                    value: v,
                    tail: 0.0,
                    partials: vec![v],
                    cutoffs: vec![atoms.len() as f64],
                    diverges: false,
                });
            }
            let n = terms.len();
            let cuts = [n / 8, n / 4, n / 2, n];
            let partials: Vec<f64> = cuts.iter().map(|&c| terms[..c].iter().sum()).collect();
            Ok(classify(partials, cuts.iter().map(|&c| atoms[c - 1]).collect(), 1e-12))
        }
        StateSpace::Interval { lo, hi } => {
            let (lo, hi) = (*lo, *hi);
            // only interior points; the boundary may be outside the support of λ
            let eval = |x: f64| if x > lo && x < hi { f(x) } else { Ok(0.0) };
            let piece = |a: f64, b: f64| -> Result<f64> {
                let err = std::cell::RefCell::new(None);
                let v = quad.integrate(
                    |x| match eval(x) {
                        Ok(v) => v,
                        Err(e) => {
                            err.borrow_mut().get_or_insert(e);
                            0.0
                        }
                    },
                    a,
                    b,
                );
                match err.into_inner() {
                    Some(e) => Err(e),
                    None => v,
                }
            };
            if lo.is_finite() && hi.is_finite() {
                let v = piece(lo, hi)?;
                return Ok(TailIntegral { value: v, tail: 0.0, partials: vec![v], cutoffs: vec![hi], diverges: false });
            }
            // core [c_lo, c_hi], then symmetric doubling outward on the infinite sides
            let mut reach = 4.0f64;
            let core_lo = if lo.is_finite() { lo } else { -reach };
            let core_hi = if hi.is_finite() { hi } else { lo.max(0.0) + reach };
            let mut total = piece(core_lo, core_hi)?;
            let mut partials = vec![total];
            let mut cutoffs = vec![reach];
            let (mut left, mut right) = (core_lo, core_hi);
            for _ in 0..48 {
                let mut inc = 0.0;
                if !hi.is_finite() {
                    let next = right + reach;
                    inc += piece(right, next)?;
                    right = next;
                }
                if !lo.is_finite() {
                    let next = left - reach;
                    inc += piece(next, left)?;
                    left = next;
                }
                reach *= 2.0;
                total += inc;
                partials.push(total);
                cutoffs.push(reach);
                let done = classify(partials.clone(), cutoffs.clone(), quad.rel_tol);
                // growth over the first few octaves may just be the bulk of the mass arriving
                let converged = (done.diverges && partials.len() >= 10)
                    || (!done.diverges
                        && partials.len() >= 4
                        && done.tail.abs() <= quad.rel_tol * done.value.abs().max(quad.abs_tol));
                if converged {
                    return Ok(done);
                }
            }
            Ok(classify(partials, cutoffs, quad.rel_tol))
        }
    }
}

fn classify(partials: Vec<f64>, cutoffs: Vec<f64>, rel_tol: f64) -> TailIntegral {
    let incs: Vec<f64> = partials.windows(2).map(|w| w[1] - w[0]).collect();
    let last = *partials.last().unwrap();
    let k = incs.len();
    let ratios: Vec<f64> = incs
        .windows(2)
        .map(|w| if w[0].abs() > 0.0 { w[1].abs() / w[0].abs() } else if w[1] == 0.0 { 0.0 } else { f64::INFINITY })
        .collect();
    let negligible = k > 0 && incs[k - 1].abs() <= rel_tol * last.abs();
    let diverges = !negligible && ratios.len() >= 2 && ratios[ratios.len() - 2..].iter().all(|&r| r >= DIVERGENCE_RATIO);
    if diverges {
        return TailIntegral { value: f64::INFINITY, tail: f64::INFINITY, partials, cutoffs, diverges };
    }
    let tail = match (incs.last(), ratios.last()) {
        (Some(&d), Some(&r)) if r < 1.0 => d * r / (1.0 - r),
        _ => 0.0,
    };
    TailIntegral { value: last + tail, tail, partials, cutoffs, diverges }
}

/// The trace condition `∫ g_a(x)² p⁽²⁾(x,x) m(dx)` and, for reference, the a-free `∫ p⁽²⁾(x,x) m(dx)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceResult {
    pub a: f64,
    pub trace: TailIntegral,
    /// `None` when the a-free integral diverges.
    pub a_free: Option<f64>,
}

pub fn trace_condition(kernel: &dyn MarkovKernel, a: f64, quad: &Quadrature) -> Result<TraceResult> {
    require_density(kernel)?;
    let trace = tail_integral(
        kernel,
        |x| {
            let ga = g(a, kernel.lambda(x));
            two_step_diagonal(kernel, x, quad).map(|p| ga * ga * p)
        },
        quad,
    )?;
    let a_free = a_free_trace(kernel, quad)?;
    Ok(TraceResult { a, trace, a_free: a_free.is_finite().then_some(a_free.value) })
}

/// `∫ p⁽²⁾(x,x) m(dx)` with the tail test.
pub fn a_free_trace(kernel: &dyn MarkovKernel, quad: &Quadrature) -> Result<TailIntegral> {
    require_density(kernel)?;
    tail_integral(kernel, |x| two_step_diagonal(kernel, x, quad), quad)
}

/// The two quantities of the `b`-test: `sup_x λ(x)^b p⁽²⁾(x,x)` and `∫ λ^{2−b}/(1+λ)² dm`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cor36 {
    pub b: f64,
    pub sup_term: f64,
    /// State where the sup was attained on the search grid.
    pub argsup: f64,
    pub integral_term: TailIntegral,
}

impl Cor36 {
    pub fn passes(&self) -> bool {
        self.sup_term.is_finite() && self.integral_term.is_finite()
    }
}

pub fn cor36_check(kernel: &dyn MarkovKernel, b: f64, quad: &Quadrature) -> Result<Cor36> {
    require_density(kernel)?;
    if !(0.0..=2.0).contains(&b) {
        return Err(crate::error::Error::Domain(format!("b must lie in [0, 2], got {b}")));
    }
    let term = |x: f64| -> Result<f64> { Ok(kernel.lambda(x).powf(b) * two_step_diagonal(kernel, x, quad)?) };
    let (sup_term, argsup) = match kernel.state_space() {
        StateSpace::Discrete { atoms } => {
            let vals: Vec<f64> = atoms.iter().map(|&x| term(x)).collect::<Result<_>>()?;
            let (i, m) = argmax(&vals);
            let n = vals.len();
            let grows = kernel.is_truncation() && n >= 8 && {
                let probe = [vals[n / 4 - 1], vals[n / 2 - 1], vals[n - 2]];
                tail_grows(&probe)
            };
            (if grows { f64::INFINITY } else { m }, atoms[i])
        }
        StateSpace::Interval { lo, hi } => {
            let pts = sup_grid(*lo, *hi);
            let vals: Vec<f64> = pts.iter().map(|&x| term(x)).collect::<Result<_>>()?;
            let (i, m) = argmax(&vals);
            let mut sup = m;
            // monotone-tail extrapolation on each infinite side, one point per octave
            if !hi.is_finite() {
                let tail: Vec<f64> = [2f64.powi(18), 2f64.powi(19), 2f64.powi(20)]
                    .iter()
                    .map(|&x| term(x))
                    .collect::<Result<_>>()?;
                sup = sup.max(tail_limit(&tail));
            }
            if !lo.is_finite() {
                let tail: Vec<f64> = [-(2f64.powi(18)), -(2f64.powi(19)), -(2f64.powi(20))]
                    .iter()
                    .map(|&x| term(x))
                    .collect::<Result<_>>()?;
                sup = sup.max(tail_limit(&tail));
            }
            (sup, pts[i])
        }
    };
    let integral_term = tail_integral(
        kernel,
        |x| {
            let l = kernel.lambda(x);
            Ok(l.powf(2.0 - b) / ((1.0 + l) * (1.0 + l)))
        },
        quad,
    )?;
    Ok(Cor36 { b, sup_term, argsup, integral_term })
}

fn argmax(v: &[f64]) -> (usize, f64) {
    v.iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, x)| if x > best.1 { (i, x) } else { best })
}

/// True when three probes keep increasing without slowing down.
fn tail_grows(p: &[f64; 3]) -> bool {
    let (d1, d2) = (p[1] - p[0], p[2] - p[1]);
    let noise = 1e-6 * p[2].abs();
    d1 > noise && d2 > noise && d2 >= DIVERGENCE_RATIO * d1
}

/// Limit of an increasing tail from three octave probes; `+∞` if it does not slow down.
fn tail_limit(p: &[f64]) -> f64 {
    let probe = [p[0], p[1], p[2]];
    if tail_grows(&probe) {
        return f64::INFINITY;
    }
    let (d1, d2) = (p[1] - p[0], p[2] - p[1]);
    let noise = 1e-6 * p[2].abs();
    if d2 > noise && d1 > noise {
        let r = d2 / d1;
        p[2] + d2 * r / (1.0 - r)
    } else {
        p[2]
    }
}

/// Search points for the sup: 16 per octave on unbounded sides, uniform on bounded ones.
fn sup_grid(lo: f64, hi: f64) -> Vec<f64> {
    let octaves = |sign: f64, base: f64| -> Vec<f64> {
        (-160..=320).map(|k| base + sign * 2f64.powf(k as f64 / 16.0)).collect()
    };
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (1..512).map(|i| lo + (hi - lo) * i as f64 / 512.0).collect(),
        (true, false) => octaves(1.0, lo),
        (false, true) => octaves(-1.0, hi),
        (false, false) => {
            let mut v = octaves(1.0, 0.0);
            v.extend(octaves(-1.0, 0.0));
            v.push(0.0);
            v
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::operator::{discretize_operator, operator_norm};
    use crate::kernels::{BesselKernel, BetaSpec, BirthDeathKernel, KppKernel};
    use crate::numerics::PowerIteration;

    #[test]
    fn birth_death_traces() {
        let q = Quadrature::default();
        let constant = BirthDeathKernel::new(BetaSpec::Constant(1.0 / 3.0), 50).unwrap();
        assert_eq!(trace_condition(&constant, 1.0, &q).unwrap().trace.value, f64::INFINITY);
        let geometric = BirthDeathKernel::new(BetaSpec::Geometric(0.5), 50).unwrap();
        let t = trace_condition(&geometric, 1.0, &q).unwrap();
        assert!(t.trace.value.is_finite());
        assert!(t.a_free.is_some());
    }

    #[test]
    fn bessel_trace_decreases_in_a() {
        let q = Quadrature::default();
        let k = BesselKernel::new();
        let vals: Vec<f64> = [1.0, 10.0, 100.0]
            .iter()
            .map(|&a| trace_condition(&k, a, &q).unwrap().trace.value)
            .collect();
        assert!(vals.iter().all(|v| v.is_finite()), "{vals:?}");
        assert!(vals[0] > vals[1] && vals[1] > vals[2], "{vals:?}");
        // Hilbert-Schmidt bound on the discretized norm
        let op = discretize_operator(&k, None, 10.0).unwrap();
        let norm = operator_norm(&op, PowerIteration::default()).unwrap();
        assert!(norm <= vals[1].sqrt() * (1.0 + 1e-3), "{norm} vs {}", vals[1].sqrt());
    }

    #[test]
    fn kpp_a_free_trace() {
        let k = KppKernel::new().unwrap();
        let t = a_free_trace(&k, &Quadrature::default()).unwrap();
        assert!((t.value - 1.43525).abs() < 1e-4, "{}", t.value);
        assert!(t.value < std::f64::consts::PI.powi(2));
    }

    #[test]
    fn b_sensitivity() {
        let q = Quadrature::default();
        let k = BesselKernel::new();
        let one = cor36_check(&k, 1.0, &q).unwrap();
        assert!(one.passes(), "{one:?}");
        assert!((one.sup_term - 1.05).abs() < 0.1, "{}", one.sup_term);
        let zero = cor36_check(&k, 0.0, &q).unwrap();
        assert!(zero.sup_term.is_finite());
        assert!(!zero.integral_term.is_finite());
        let geometric = BirthDeathKernel::new(BetaSpec::Geometric(0.5), 50).unwrap();
        assert!(cor36_check(&geometric, 2.0, &q).unwrap().passes());
        assert!(!cor36_check(&geometric, 0.0, &q).unwrap().passes());
        let constant = BirthDeathKernel::new(BetaSpec::Constant(1.0 / 3.0), 50).unwrap();
        assert_eq!(cor36_check(&constant, 1.0, &q).unwrap().sup_term, f64::INFINITY);
    }

    #[test]
    fn divergence_heuristic() {
        let grow = classify(vec![1.0, 2.0, 4.0, 8.0], vec![1.0, 2.0, 4.0, 8.0], 1e-8);
        assert!(grow.diverges);
        let shrink = classify(vec![1.0, 1.5, 1.75, 1.875], vec![1.0, 2.0, 4.0, 8.0], 1e-8);
        assert!(!shrink.diverges);
        assert!((shrink.value - 2.0).abs() < 1e-12);
    }
}
