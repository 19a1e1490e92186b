//! Numerical building blocks: special functions, root finding, quadrature,
//! ODE integration and interpolation.

pub mod bessel;
pub mod ode;
pub mod quad;
pub mod roots;
pub mod spline;

pub use bessel::{bessel_j, bessel_y, hankel1, Scaled};
pub use ode::{dormand_prince, OdeOptions};
pub use quad::integrate;
pub use roots::{brent, find_complex_root, NewtonOptions, RootReport};
pub use spline::CubicSpline;
