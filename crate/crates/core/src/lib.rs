//! Quasiperiodic CMV matrices.
//!
//! Two-valued Verblunsky coefficients modulated by Sturmian words or
//! rotation codings, their Szegő and Gesztesy–Zinchenko transfer cocycles,
//! the Sturmian trace map, and finite-scale Gordon certificates that rule
//! out eigenvalues.

// `!(x < 1.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cmv;
pub mod contfrac;
pub mod error;
pub mod gordon;
pub mod mat2;
pub mod real;
pub mod tracemap;
pub mod transfer;
pub mod words;

pub use error::{Error, Result};
pub use mat2::{Mat2, ScaledMat2, C64};
