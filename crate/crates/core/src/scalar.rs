//! Scalar abstraction shared by every numeric kernel in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the geometry, Pfaffian and integration kernels run on.
///
/// The associated constants carry the decision thresholds, which have to scale
/// with the precision of the type: an `f32` simplex cannot certify slack at
/// `1e-9`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Feasibility tolerance of the simplex kernel.
    const LP_TOL: Self;
    /// Minimum slack accepted as a strict inequality (after `|x|_inf <= 1`).
    const STRICT_TOL: Self;
    /// Relative pivot threshold for numerical rank.
    const RANK_TOL: Self;
    /// Cholesky pivots at or below `CHOL_TOL * trace` are treated as singular.
    const CHOL_TOL: Self;
    /// Smallest relative tolerance the ODE controller will honour.
    const ODE_TOL_FLOOR: Self;

    /// Lossless-enough conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Scalar for f64 {
    const LP_TOL: f64 = 1e-9;
    const STRICT_TOL: f64 = 1e-7;
    const RANK_TOL: f64 = 1e-9;
    const CHOL_TOL: f64 = 1e-12;
    const ODE_TOL_FLOOR: f64 = 1e-13;
}

impl Scalar for f32 {
    const LP_TOL: f32 = 1e-5;
    const STRICT_TOL: f32 = 1e-4;
    const RANK_TOL: f32 = 1e-5;
    const CHOL_TOL: f32 = 1e-6;
    const ODE_TOL_FLOOR: f32 = 1e-6;
}
