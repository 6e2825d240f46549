// NaN parameters must fail validation, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod levy_noise;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub mod measure_metrics;
pub mod linalg;
pub mod mean_field_engine;
pub mod picard_solver;
pub mod chaos_lab;
pub mod cli;
