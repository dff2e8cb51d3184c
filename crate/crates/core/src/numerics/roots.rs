use serde::Serialize;

use crate::error::{Error, Result};

/// A bracketed root: `f` changes sign across `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Root {
    pub root: f64,
    pub lo: f64,
    pub hi: f64,
    pub iterations: u32,
}

/// Bisection to a bracket of width at most `tol`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Root> {
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(Root { root: lo, lo, hi: lo, iterations: 0 });
    }
    if fhi == 0.0 {
        return Ok(Root { root: hi, lo: hi, hi, iterations: 0 });
    }
    if !(flo * fhi < 0.0) {
        return Err(Error::Domain(format!(
            "no sign change on [{lo}, {hi}]: f = {flo}, {fhi}"
        )));
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        iterations += 1;
        if fm == 0.0 {
            return Ok(Root { root: mid, lo: mid, hi: mid, iterations });
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(Root { root: 0.5 * (lo + hi), lo, hi, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cramer_speed_root() {
        let f = |c: f64| c - 1.0 - c.ln() - 2f64.ln();
        let r = bisect(f, 0.05, 0.9, 1e-13).unwrap();
        assert!((r.root - 0.231_960_952_986_534).abs() < 1e-12, "{}", r.root);
        assert!(f(r.root).abs() < 1e-10);
        assert!(r.hi - r.lo <= 1e-13);
        assert!(f(r.lo) * f(r.hi) <= 0.0);
    }

    #[test]
    fn simple_roots() {
        assert!((bisect(|x| x - 1.0, 0.0, 2.0, 1e-12).unwrap().root - 1.0).abs() < 1e-12);
        let r = bisect(|a| 2.0 / (1.0 + a) - 1.0, 0.5, 3.0, 1e-12).unwrap();
        assert!((r.root - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_sign_change() {
        assert!(matches!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-6), Err(Error::Domain(_))));
    }
}
