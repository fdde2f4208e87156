//! Gaussian probability content of convex polyhedra by the holonomic
//! gradient method.
//!
//! The numeric kernels are generic over [`Scalar`] (`f64` and `f32`); the
//! aliases below fix the usual `f64` instantiation.

pub mod complex;
pub mod error;
pub mod geometry;
pub mod hgm;
pub mod index_set;
pub mod instances;
pub mod linalg;
pub mod lp;
pub mod ode;
pub mod oracle;
pub mod pfaffian;
pub mod scalar;

pub use error::{Error, Result};
pub use index_set::IndexSet;
pub use linalg::Matrix;
pub use scalar::Scalar;

pub type Polyhedron = geometry::HPolyhedron<f64>;
pub type Polyhedron32 = geometry::HPolyhedron<f32>;
