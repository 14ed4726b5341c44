#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod contour;
pub mod discretization;
pub mod error;
pub mod mp;
pub mod potential;
pub mod reproduce;
pub mod rpm;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use mp::Mp;
pub use scalar::{FieldScalar, Real};

pub type Complex64 = num_complex::Complex<f64>;
pub type Params = potential::PotentialParams<f64>;
pub type Grid = discretization::GridSpec<f64>;
pub type Operator = discretization::TridiagonalOperator<f64>;
/// 256-bit (about 77 decimal digits) binary float used by the RPM presets.
pub type Hp = Mp<256>;
