//! Dense matrices, a seeded generator, and the element-wise kernels the
//! network leans on.

mod gemm;
#[cfg(target_arch = "x86_64")]
mod gemm_avx512;
mod matrix;
mod rng;
pub mod trig;

pub use matrix::{matmul, Matrix};
pub use rng::Rng;

pub(crate) use gemm::{gemm, gemm_bias, Layout};
