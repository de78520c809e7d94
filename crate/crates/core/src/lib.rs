//! Numerical verification of first-eigenvalue lower bounds on submanifolds.

pub mod bounds;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod immersion;
pub mod linalg;
pub mod models;
pub mod scalar;
pub mod spectral;
pub mod submersion;

pub use error::{Error, Result};
pub use scalar::{Dual, FloatScalar, HyperDual, Real};

/// Double-precision instantiations of the scalar-generic types.
pub type Dual64 = Dual<f64>;
pub type HyperDual64 = HyperDual<f64>;
pub type TangentVector64 = geometry::TangentVector<f64>;
pub type SymmetricForm64 = geometry::SymmetricForm<f64>;
pub type Mat64 = linalg::Mat<f64>;
pub type EigenResult64 = spectral::EigenResult<f64>;

/// Single-precision instantiations, for the spectral solvers and smoke tests.
pub type Dual32 = Dual<f32>;
pub type HyperDual32 = HyperDual<f32>;
pub type Mat32 = linalg::Mat<f32>;
pub type EigenResult32 = spectral::EigenResult<f32>;
