#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Ergodic averages, discrete maximal operators, oscillation seminorms,
//! spectral kernels and Calderón transference, computed exactly on finite
//! measure-preserving systems and on finitely supported signals over ℤ.
//!
//! Every quantity here is meant to be checked against a brute-force oracle,
//! so the code favours exact enumeration and fixed summation order over
//! asymptotic speed.

pub mod arith;
pub mod averaging;
pub mod dynsys;
pub mod error;
pub mod maximal;
pub mod oscillation;
pub mod report;
pub mod signal;
pub mod spectral;
pub mod tolerance;
pub mod transference;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use report::InequalityReport;
