//! Numerical non-explosion criteria: the key-lemma product estimator, the
//! damped operator `T_a` on a grid, its growth rate, spectral radius and
//! norm against `1/μ`, the trace condition, and the `b`-test.

mod key_lemma;
mod operator;
mod trace;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::kernels::MarkovKernel;
use crate::numerics::PowerIteration;
use crate::report::num;

pub use key_lemma::{chain_path, key_lemma_estimate, KeyLemmaEstimate};
pub use operator::{
    asymmetry, default_grid, discretize_operator, operator_norm, operator_norm_from, pair_sequence,
    spectral_radius, DiscretizedOperator, GridSpec, PairTerm, DEFAULT_NODES, MASS_CAPTURE, TAIL_MASS,
};
pub use trace::{a_free_trace, cor36_check, tail_integral, trace_condition, Cor36, TailIntegral, TraceResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Passes,
    Fails,
    Inconclusive,
}

impl Verdict {
    /// `passes` iff `value < threshold − margin`, `fails` iff `value > threshold + margin`.
    pub fn compare(value: f64, threshold: f64, margin: f64) -> Verdict {
        if value < threshold - margin {
            Verdict::Passes
        } else if value > threshold + margin {
            Verdict::Fails
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Passes => "passes",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    KeyLemmaMc,
    PairSequence,
    SpectralRadius,
    OperatorNorm,
    Trace,
    Cor36,
}

impl Method {
    pub fn parse(s: &str) -> Result<Method> {
        Ok(match s {
            "key_lemma_mc" | "key-lemma" => Method::KeyLemmaMc,
            "pair_sequence" | "pair-sequence" => Method::PairSequence,
            "spectral_radius" | "spectral-radius" => Method::SpectralRadius,
            "operator_norm" | "operator-norm" => Method::OperatorNorm,
            "trace" => Method::Trace,
            "cor36" => Method::Cor36,
            _ => return Err(Error::Config(format!("unknown criterion method {s:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionReport {
    pub method: Method,
    pub a: f64,
    pub value: f64,
    pub threshold: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub diagnostics: Value,
}

impl CriterionReport {
    pub fn new(method: Method, a: f64, value: f64, threshold: f64, margin: f64, diagnostics: Value) -> Self {
        CriterionReport {
            method,
            a,
            value,
            threshold,
            margin,
            verdict: Verdict::compare(value, threshold, margin),
            diagnostics,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "method": self.method,
            "a": num(self.a),
            "value": num(self.value),
            "threshold": num(self.threshold),
            "margin": num(self.margin),
            "verdict": self.verdict,
            "diagnostics": self.diagnostics,
        })
    }
}

/// Criterion threshold `1/μ` for mean offspring `μ` (2 on the binary tree).
pub fn threshold_for(mu: f64) -> Result<f64> {
    if mu >= 1.0 && mu.is_finite() {
        Ok(1.0 / mu)
    } else {
        Err(Error::Config(format!("mean offspring must be at least 1, got {mu}")))
    }
}

/// A value on the grid and on the doubled grid; `delta` is their distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPair {
    pub value: f64,
    pub doubled: f64,
    pub delta: f64,
}

/// Evaluates `f` on the operator and, for continuous kernels, on the doubled grid.
pub fn with_grid_check<F>(kernel: &dyn MarkovKernel, grid: Option<&GridSpec>, a: f64, f: F) -> Result<(DiscretizedOperator, GridPair)>
where
    F: Fn(&DiscretizedOperator) -> Result<f64>,
{
    let op = discretize_operator(kernel, grid, a)?;
    let value = f(&op)?;
    let doubled = match op.grid {
        Some(spec) => f(&discretize_operator(kernel, Some(&spec.doubled()), a)?)?,
        None => value,
    };
    Ok((op, GridPair { value, doubled, delta: (doubled - value).abs() }))
}

fn grid_json(op: &DiscretizedOperator) -> Value {
    json!({
        "grid": op.grid.map(|g| g.to_string()),
        "states": op.len(),
        "mass_captured": num(op.mass_captured),
    })
}

/// Spectral radius or operator norm of `T_a` against `threshold`.
pub fn operator_criterion(
    kernel: &dyn MarkovKernel,
    grid: Option<&GridSpec>,
    a: f64,
    method: Method,
    threshold: f64,
    cfg: PowerIteration,
) -> Result<CriterionReport> {
    let f = |op: &DiscretizedOperator| match method {
        Method::SpectralRadius => spectral_radius(op, cfg),
        Method::OperatorNorm => operator_norm(op, cfg),
        _ => Err(Error::Config(format!("{method:?} is not an operator criterion"))),
    };
    let (op, pair) = with_grid_check(kernel, grid, a, f)?;
    let margin = pair.delta.max(cfg.tol * pair.value);
    let asym = asymmetry(&op);
    let mut diag = grid_json(&op);
    diag["doubled_grid_value"] = num(pair.doubled);
    diag["doubled_grid_delta"] = num(pair.delta);
    diag["asymmetry"] = num(asym);
    diag["eigen_tolerance"] = num(cfg.tol);
    if asym > 1e-10 {
        diag["warning"] = json!("symmetrized operator is not symmetric: kernel is not reversible on this grid");
    }
    Ok(CriterionReport::new(method, a, pair.value, threshold, margin, diag))
}

/// Last n-th root of `⟨1, T_aⁿ 1⟩_γ` against `threshold`.
pub fn pair_criterion(
    kernel: &dyn MarkovKernel,
    grid: Option<&GridSpec>,
    a: f64,
    n_max: u32,
    threshold: f64,
) -> Result<(CriterionReport, Vec<PairTerm>)> {
    let op = discretize_operator(kernel, grid, a)?;
    let terms = pair_sequence(&op, n_max)?;
    let last = *terms.last().unwrap();
    let prev = if terms.len() >= 2 { terms[terms.len() - 2].nth_root } else { last.nth_root };
    let doubled = match op.grid {
        Some(spec) => {
            let op2 = discretize_operator(kernel, Some(&spec.doubled()), a)?;
            pair_sequence(&op2, n_max)?.last().unwrap().nth_root
        }
        None => last.nth_root,
    };
    let delta = (doubled - last.nth_root).abs();
    let drift = (last.nth_root - prev).abs();
    let margin = delta.max(drift).max(1e-12);
    let mut diag = grid_json(&op);
    diag["doubled_grid_value"] = num(doubled);
    diag["doubled_grid_delta"] = num(delta);
    diag["last_step_drift"] = num(drift);
    diag["n_max"] = json!(n_max);
    Ok((CriterionReport::new(Method::PairSequence, a, last.nth_root, threshold, margin, diag), terms))
}

/// `(E ∏ g_a)^{1/(n+1)}` from the key-lemma estimator against `1/b`.
#[allow(clippy::too_many_arguments)]
pub fn key_lemma_criterion(
    kernel: &dyn MarkovKernel,
    initial: crate::sim::InitialState,
    a: f64,
    n: u32,
    trials: u64,
    branching: f64,
    seed: u64,
    threads: Option<usize>,
) -> Result<(CriterionReport, KeyLemmaEstimate)> {
    let est = key_lemma_estimate(kernel, initial, a, n, trials, branching, seed, threads)?;
    let k = (n + 1) as f64;
    let log_mean = est.log_value - n as f64 * branching.ln();
    let root = (log_mean / k).exp();
    // delta method: d(m^{1/k}) = m^{1/k} dm / (k m)
    let rel_se = est.std_error / est.value;
    let margin = 3.0 * root * rel_se / k;
    let diag = json!({
        "estimate": num(est.value),
        "log_estimate": num(est.log_value),
        "std_error": num(est.std_error),
        "trials": trials,
        "n": n,
        "branching": num(branching),
    });
    let threshold = 1.0 / branching;
    Ok((CriterionReport::new(Method::KeyLemmaMc, a, root, threshold, margin, diag), est))
}

/// Hilbert-Schmidt bound `sqrt(∫ g_a² p⁽²⁾(x,x) dm) ≥ ‖T_a‖` against `threshold`.
pub fn trace_criterion(
    kernel: &dyn MarkovKernel,
    a: f64,
    threshold: f64,
    quad: &crate::numerics::Quadrature,
) -> Result<(CriterionReport, TraceResult)> {
    let t = trace_condition(kernel, a, quad)?;
    let value = t.trace.value.sqrt();
    let tail_err = if t.trace.tail.is_finite() { t.trace.tail.abs() } else { 0.0 };
    let margin = 0.5 * (tail_err + quad.rel_tol * t.trace.value.abs()) / value.max(f64::MIN_POSITIVE);
    let diag = json!({
        "trace": num(t.trace.value),
        "condition_holds": t.trace.is_finite(),
        "tail_extrapolation": num(t.trace.tail),
        "partials": crate::report::nums(&t.trace.partials),
        "cutoffs": crate::report::nums(&t.trace.cutoffs),
        "a_free_trace": t.a_free.map_or(json!("inf"), num),
    });
    Ok((CriterionReport::new(Method::Trace, a, value, threshold, margin, diag), t))
}

/// The `b`-test: both terms finite means the criterion holds for some `a`.
pub fn cor36_criterion(kernel: &dyn MarkovKernel, b: f64, quad: &crate::numerics::Quadrature) -> Result<(CriterionReport, Cor36)> {
    let c = cor36_check(kernel, b, quad)?;
    let diag = json!({
        "b": num(b),
        "sup_term": num(c.sup_term),
        "argsup": num(c.argsup),
        "integral_term": num(c.integral_term.value),
    });
    let mut r = CriterionReport::new(Method::Cor36, f64::NAN, c.sup_term, f64::INFINITY, 0.0, diag);
    r.verdict = if c.passes() { Verdict::Passes } else { Verdict::Fails };
    Ok((r, c))
}

/// Search range and tolerance for `find_min_a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ASearch {
    pub lo: f64,
    pub hi: f64,
    /// Stop when `hi/lo < 1 + rel_tol`.
    pub rel_tol: f64,
}

impl Default for ASearch {
    fn default() -> Self {
        ASearch { lo: 1e-3, hi: 1e6, rel_tol: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinA {
    pub a: f64,
    pub norm: f64,
    pub norm_doubled: f64,
    pub grid_delta: f64,
    pub margin: f64,
    pub grid: Option<GridSpec>,
}

/// Smallest `a` in range with `‖T_a‖ < threshold − margin`, by bisection in `log a`.
///
/// `‖T_a‖` is nonincreasing in `a`. The margin at the returned `a` includes the
/// doubled-grid delta; if that check fails the answer is moved up until it holds.
pub fn find_min_a(
    kernel: &dyn MarkovKernel,
    grid: Option<&GridSpec>,
    threshold: f64,
    range: ASearch,
    cfg: PowerIteration,
) -> Result<Option<MinA>> {
    if !(range.lo >= 0.0 && range.hi > range.lo && range.hi.is_finite()) {
        return Err(Error::Config(format!("a-range must satisfy 0 <= lo < hi, got [{}, {}]", range.lo, range.hi)));
    }
    let base = discretize_operator(kernel, grid, range.hi)?;
    let lambda = |x: f64| kernel.lambda(x);
    let mut warm: Option<Vec<f64>> = None;
    let mut norm_at = |a: f64| -> Result<f64> {
        let op = base.with_a(a, lambda)?;
        let (v, vec) = operator_norm_from(&op, warm.as_deref(), cfg)?;
        warm = Some(vec);
        Ok(v)
    };
    let passes = |v: f64| v < threshold - cfg.tol * v;
    let (mut lo, mut hi) = (range.lo, range.hi);
    let mut a = if passes(norm_at(lo)?) {
        lo
    } else if !passes(norm_at(hi)?) {
        return Ok(None);
    } else {
        if lo == 0.0 {
            lo = (hi * 1e-9).min(1e-6);
            if passes(norm_at(lo)?) {
                hi = lo;
            }
        }
        while hi / lo > 1.0 + range.rel_tol {
            let mid = (lo * hi).sqrt();
            if passes(norm_at(mid)?) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let doubled_base = base.grid.map(|s| discretize_operator(kernel, Some(&s.doubled()), range.hi)).transpose()?;
    for _ in 0..200 {
        let norm = norm_at(a)?;
        let norm_doubled = match &doubled_base {
            Some(d) => operator_norm(&d.with_a(a, lambda)?, cfg)?,
            None => norm,
        };
        let grid_delta = (norm_doubled - norm).abs();
        let margin = grid_delta.max(cfg.tol * norm);
        if norm < threshold - margin {
            return Ok(Some(MinA { a, norm, norm_doubled, grid_delta, margin, grid: base.grid }));
        }
        a = if a == 0.0 { range.lo.max(1e-3) } else { a * (1.0 + 16.0 * range.rel_tol) };
        if a > range.hi {
            break;
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{BesselKernel, Intensity, MeanFieldKernel, MeanFieldLaw};

    fn point_mass() -> MeanFieldKernel {
        MeanFieldKernel::new(MeanFieldLaw::PointMass(1.0), Intensity::Identity).unwrap()
    }

    #[test]
    fn verdict_rule() {
        assert_eq!(Verdict::compare(0.4, 0.5, 0.01), Verdict::Passes);
        assert_eq!(Verdict::compare(0.495, 0.5, 0.01), Verdict::Inconclusive);
        assert_eq!(Verdict::compare(0.6, 0.5, 0.01), Verdict::Fails);
    }

    #[test]
    fn mean_field_verdict_flips_at_one() {
        let k = point_mass();
        let cfg = PowerIteration::default();
        for (a, want) in [(0.5, Verdict::Fails), (1.0, Verdict::Inconclusive), (1.01, Verdict::Passes), (3.0, Verdict::Passes)] {
            let r = operator_criterion(&k, None, a, Method::SpectralRadius, 0.5, cfg).unwrap();
            assert_eq!(r.verdict, want, "a = {a}");
            let (p, _) = pair_criterion(&k, None, a, 20, 0.5).unwrap();
            assert_eq!(p.verdict, want, "a = {a}");
        }
    }

    #[test]
    fn mean_field_min_a_just_above_one() {
        let m = find_min_a(&point_mass(), None, 0.5, ASearch::default(), PowerIteration::default())
            .unwrap()
            .unwrap();
        assert!(m.a > 1.0 && m.a < 1.01, "{}", m.a);
        assert!(m.norm < 0.5);
    }

    #[test]
    fn loose_threshold_returns_zero() {
        let range = ASearch { lo: 0.0, ..Default::default() };
        let m = find_min_a(&point_mass(), None, 2.0, range, PowerIteration::default()).unwrap().unwrap();
        assert_eq!(m.a, 0.0);
    }

    #[test]
    fn unattainable_threshold_returns_none() {
        let range = ASearch { lo: 1e-3, hi: 1.0, rel_tol: 1e-3 };
        assert!(find_min_a(&point_mass(), None, 0.4, range, PowerIteration::default()).unwrap().is_none());
    }

    #[test]
    fn bessel_min_a_exists() {
        let grid: GridSpec = "0:16:201".parse().unwrap();
        let m = find_min_a(&BesselKernel::new(), Some(&grid), 0.5, ASearch::default(), PowerIteration::default())
            .unwrap()
            .expect("a exists for the Bessel kernel");
        assert!(m.norm < 0.5 - m.margin);
        assert!(m.grid_delta < 1e-2, "{}", m.grid_delta);
    }

    #[test]
    fn thresholds() {
        assert_eq!(threshold_for(2.0).unwrap(), 0.5);
        assert!(threshold_for(0.5).is_err());
    }
}
