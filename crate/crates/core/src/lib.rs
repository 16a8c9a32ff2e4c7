//! Motherbody measures for algebraic Cauchy transforms.

pub mod branch;
pub mod quaddiff;
pub mod eigen;
pub mod measure;
pub mod mother;
pub mod polyalg;
pub mod scalar;
pub mod verify;

pub use num_complex::Complex;
pub use scalar::{Real, Wide};

/// Double-precision complex number.
pub type C64 = num_complex::Complex<f64>;

pub type Poly = polyalg::UniPoly<f64>;
pub type ExactPoly = polyalg::UniPoly<num_rational::BigRational>;
pub type BiPoly64 = polyalg::BiPoly<f64>;
pub type ExactBiPoly = polyalg::BiPoly<num_rational::BigRational>;
