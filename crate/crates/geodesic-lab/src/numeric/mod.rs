//! Shared numerical kernels: adaptive Runge-Kutta integration, dense
//! output, small fixed-size linear algebra, scalar root finding, linear
//! least squares, and Sturm-sequence eigenvalue counting for discretized
//! Schrödinger operators.

pub mod fit;
pub mod linalg;
pub mod ode;
pub mod roots;
pub mod sturm;

pub use linalg::{Mat2, Vec2};
