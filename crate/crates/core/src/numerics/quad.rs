//! Adaptive Simpson quadrature with tail transforms, and grid convolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances for adaptive Simpson integration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum interval-halving depth below the initial panels.
    pub max_depth: u32,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            rel_tol: 1e-8,
            abs_tol: 1e-15,
            max_depth: 40,
        }
    }
}

impl Quadrature {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Quadrature {
            rel_tol,
            ..Quadrature::default()
        }
    }

    /// Integrates `f` over `[lo, hi]`; either end may be infinite.
    ///
    /// Infinite ends are mapped onto a unit interval with `y = lo + u/(1-u)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> Result<f64> {
        self.integrate_dyn(&f, lo, hi)
    }

    fn integrate_dyn(&self, f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::Domain("NaN integration limit".into()));
        }
        if lo == hi {
            return Ok(0.0);
        }
        if lo > hi {
            return self.integrate_dyn(f, hi, lo).map(|v| -v);
        }
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => self.finite(f, lo, hi),
            (true, false) => self.finite(
                &|u: f64| {
                    if u >= 1.0 {
                        return 0.0;
                    }
                    let s = 1.0 - u;
                    f(lo + u / s) / (s * s)
                },
                0.0,
                1.0,
            ),
            (false, true) => self.finite(
                &|u: f64| {
                    if u >= 1.0 {
                        return 0.0;
                    }
                    let s = 1.0 - u;
                    f(hi - u / s) / (s * s)
                },
                0.0,
                1.0,
            ),
            (false, false) => {
                Ok(self.integrate_dyn(f, f64::NEG_INFINITY, 0.0)?
                    + self.integrate_dyn(f, 0.0, f64::INFINITY)?)
            }
        }
    }

    /// Integrates piecewise between consecutive breakpoints (sorted, may be infinite).
    pub fn integrate_breaks<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64]) -> Result<f64> {
        let mut pts: Vec<f64> = breaks.to_vec();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts.windows(2)
            .map(|w| self.integrate_dyn(&f, w[0], w[1]))
            .sum()
    }

    fn finite(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
        const PANELS: usize = 8;
        let h = (b - a) / PANELS as f64;
        let mut panels = Vec::with_capacity(PANELS);
        let mut scale = 0.0;
        for i in 0..PANELS {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == PANELS { b } else { lo + h };
            let mid = 0.5 * (lo + hi);
            let (fa, fm, fb) = (eval(f, lo)?, eval(f, mid)?, eval(f, hi)?);
            let s = (hi - lo) * (fa + 4.0 * fm + fb) / 6.0;
            scale += s.abs();
            panels.push(Panel { a: lo, b: hi, fa, fm, fb, s });
        }
        let tol = (self.rel_tol * scale).max(self.abs_tol);
        let mut total = 0.0;
        for p in panels {
            let eps = tol * (p.b - p.a) / (b - a);
            total += self.adapt(f, p, eps, 0)?;
        }
        Ok(total)
    }

    fn adapt(&self, f: &dyn Fn(f64) -> f64, p: Panel, eps: f64, depth: u32) -> Result<f64> {
        let m = 0.5 * (p.a + p.b);
        let (l, r) = (0.5 * (p.a + m), 0.5 * (m + p.b));
        let (fl, fr) = (eval(f, l)?, eval(f, r)?);
        let sl = (m - p.a) * (p.fa + 4.0 * fl + p.fm) / 6.0;
        let sr = (p.b - m) * (p.fm + 4.0 * fr + p.fb) / 6.0;
        let two = sl + sr;
        let diff = two - p.s;
        let roundoff = 64.0 * f64::EPSILON * (sl.abs() + sr.abs());
        if diff.abs() <= 15.0 * eps || diff.abs() <= roundoff || l <= p.a || r >= p.b {
            return Ok(two + diff / 15.0);
        }
        if depth >= self.max_depth {
            return Err(Error::Numerical(format!(
                "adaptive Simpson exceeded depth {} on [{}, {}] (error estimate {:e})",
                self.max_depth, p.a, p.b, diff.abs() / 15.0
            )));
        }
        let left = Panel { a: p.a, b: m, fa: p.fa, fm: fl, fb: p.fm, s: sl };
        let right = Panel { a: m, b: p.b, fa: p.fm, fm: fr, fb: p.fb, s: sr };
        Ok(self.adapt(f, left, 0.5 * eps, depth + 1)? + self.adapt(f, right, 0.5 * eps, depth + 1)?)
    }
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    s: f64,
}

fn eval(f: &dyn Fn(f64) -> f64, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::Numerical(format!("integrand is {y} at x = {x}")))
    }
}

/// Adaptive Simpson integral of `f` over `[lo, hi]` at the given relative tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64> {
    Quadrature::with_rel_tol(rel_tol).integrate(f, lo, hi)
}

pub fn integrate_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], rel_tol: f64) -> Result<f64> {
    Quadrature::with_rel_tol(rel_tol).integrate_breaks(f, breaks)
}

/// Riemann-sum convolution of two functions sampled on the same uniform grid
/// `x_i = lo + i*h`. Entry `m` of the result approximates `(f*g)(2*lo + m*h)`.
pub fn convolve_uniform(f: &[f64], g: &[f64], h: f64) -> Vec<f64> {
    if f.is_empty() || g.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; f.len() + g.len() - 1];
    for (i, &fi) in f.iter().enumerate() {
        for (j, &gj) in g.iter().enumerate() {
            out[i + j] += fi * gj;
        }
    }
    out.iter_mut().for_each(|v| *v *= h);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn linear_on_unit_interval() {
        assert!((integrate(|x| x, 0.0, 1.0, 1e-10).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gamma_density_on_half_line() {
        let v = integrate(|x| 4.0 * x * (-2.0 * x).exp(), 0.0, f64::INFINITY, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn squared_csch_majorant_integrates_to_its_value_at_zero() {
        let h = |x: f64| 3.0 / PI * crate::numerics::x_over_sinh(PI * x);
        let v = Quadrature::default()
            .integrate(|x| h(x) * h(x), f64::NEG_INFINITY, f64::INFINITY)
            .unwrap();
        assert!((v - 3.0 / PI).abs() < 1e-8, "{v}");
    }

    #[test]
    fn reversed_and_negative_tails() {
        let v = integrate(|x| x.exp(), f64::NEG_INFINITY, 0.0, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        let w = integrate(|x| x, 1.0, 0.0, 1e-10).unwrap();
        assert!((w + 0.5).abs() < 1e-15);
    }

    #[test]
    fn kinked_integrand_with_breaks() {
        let v = integrate_breaks(|x: f64| (x - 0.3).abs(), &[0.0, 0.3, 1.0], 1e-12).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn depth_cap_reports_interval() {
        let q = Quadrature { rel_tol: 1e-14, abs_tol: 0.0, max_depth: 3 };
        let err = q.integrate(|x: f64| (1.0 / x.max(1e-300)).sin(), 1e-6, 1.0).unwrap_err();
        assert!(matches!(err, Error::Numerical(ref m) if m.contains("depth 3")), "{err}");
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        assert!(integrate(|x: f64| 1.0 / x, 0.0, 1.0, 1e-8).is_err());
    }

    #[test]
    fn convolution_of_gaussians() {
        let h = 0.01;
        let xs: Vec<f64> = (0..=1200).map(|i| -6.0 + i as f64 * h).collect();
        let phi: Vec<f64> = xs.iter().map(|x| (-x * x / 2.0).exp() / (2.0 * PI).sqrt()).collect();
        let c = convolve_uniform(&phi, &phi, h);
        // x = 2*lo + m*h = 0 at m = 1200
        let at0 = c[1200];
        assert!((at0 - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-9, "{at0}");
    }

    proptest! {
        #[test]
        fn exact_on_cubics(c in prop::array::uniform4(-5.0f64..5.0), a in -3.0f64..0.0, w in 0.1f64..4.0) {
            let b = a + w;
            let f = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
            let anti = |x: f64| c[0] * x + c[1] * x * x / 2.0 + c[2] * x.powi(3) / 3.0 + c[3] * x.powi(4) / 4.0;
            let v = integrate(f, a, b, 1e-12).unwrap();
            let exact = anti(b) - anti(a);
            prop_assert!((v - exact).abs() <= 1e-11 * (1.0 + exact.abs()));
        }
    }
}
