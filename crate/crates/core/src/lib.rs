//! Numerical model theory for CNC row contractions: characteristic
//! functions on the NC unit row-ball, their realizations, and a truncated
//! free Hardy space model.

pub mod char_function;
pub mod error;
pub mod fock_model;
pub mod kernels;
pub mod nc_space;
pub mod numerics;
pub mod poly;
pub mod random;
pub mod realization;
pub mod row_contraction;

pub use error::{Error, Result};
pub use numerics::{CMat, Tolerance, C64};
