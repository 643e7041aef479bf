//! Low-level numerical kernels shared by every mode sum.

pub mod regression;
pub mod sum;
pub mod trig;

pub use regression::{fit_line, LineFit};
pub use sum::{pairwise_sum, PairwiseSum};
pub use trig::{sincos_product, SinCos};
