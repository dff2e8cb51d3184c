//! Doubly stochastic Yule cascades: tree simulation, explosion-time estimation,
//! and non-explosion criteria for Markov-driven holding-time intensities.

// `!(x > 0.0)` rejects NaN along with the rest
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod kernels;
pub mod numerics;
pub mod rng;
pub mod tree;

pub use error::{Error, Result};
pub use tree::{PathKey, VertexId};
pub mod sim;
pub mod report;
pub mod criteria;
pub mod config;
pub mod cli;
