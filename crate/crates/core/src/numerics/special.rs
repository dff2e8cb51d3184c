use crate::error::{Error, Result};

/// `x / sinh(x)`, continuous through 0 (value 1) and free of overflow for large `|x|`.
pub fn x_over_sinh(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1e-4 * std::f64::consts::PI {
        1.0 / (1.0 + ax * ax / 6.0)
    } else {
        2.0 * ax * (-ax).exp() / -(-2.0 * ax).exp_m1()
    }
}

/// Sum of logarithms of terms in `(0, 1]` (or any positive reals).
pub fn log_product_accumulate(terms: &[f64]) -> Result<f64> {
    let mut acc = LogProduct::default();
    for &t in terms {
        acc.push(t)?;
    }
    Ok(acc.log())
}

/// Running product kept in log space.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LogProduct {
    log: f64,
}

impl LogProduct {
    pub fn push(&mut self, term: f64) -> Result<()> {
        if !(term > 0.0) || !term.is_finite() {
            return Err(Error::Domain(format!("log-product term must be positive, got {term}")));
        }
        self.log += term.ln();
        Ok(())
    }

    pub fn log(&self) -> f64 {
        self.log
    }

    pub fn value(&self) -> f64 {
        self.log.exp()
    }
}

/// `ln Σ exp(l_i)`, `-inf` for an empty slice.
pub fn log_sum_exp(logs: &[f64]) -> f64 {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln()
}
