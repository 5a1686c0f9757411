//! Numerical laboratory for quasi-expansion of complex Hénon maps and
//! one-dimensional polynomials.

pub mod certify;
pub mod continuation;
pub mod error;
pub mod folding;
pub mod geometry;
pub mod green;
pub mod henon;
pub mod io;
pub mod manifold;
pub mod metrics;
pub mod oned;
pub mod poly;
pub mod saddles;
pub mod scalar;
pub mod series;

pub use error::{QxError, Result};
pub use scalar::{c64, Real, C64};

pub type Point = henon::ComplexPoint<f64>;
pub type Henon = henon::HenonMap<f64>;
pub type Henon32 = henon::HenonMap<f32>;
pub type Poly = poly::Polynomial<f64>;
pub type Green = green::GreenEstimate<f64>;
