//! Shared numerical primitives.

pub mod linalg;
pub mod quad;
pub mod roots;
pub mod special;
pub mod stats;

pub use linalg::{dominant_psd_eigenvalue, PowerIteration};
pub use quad::{convolve_uniform, integrate, integrate_breaks, Quadrature};
pub use roots::{bisect, Root};
pub use special::{log_product_accumulate, log_sum_exp, x_over_sinh, LogProduct};
