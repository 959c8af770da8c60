//! Critical-point systems and numerical solvers for nearest-point problems
//! on real algebraic varieties.
//!
//! Given a variety `C` cut out by polynomial generators and a norm from the
//! supported family (Euclidean, rational-exponent `l_p`, or an implicit
//! algebraic branch), this crate builds the polynomial systems whose
//! solutions are the critical points of the distance objective, solves them
//! by total-degree homotopy continuation, estimates the distance degree by
//! generic fiber counts, isolates the component carrying the real critical
//! points via monodromy, and computes best approximations with uniqueness
//! diagnostics.

pub mod approx;
pub mod critsys;
pub mod degree;
pub mod norms;
pub mod poly;
pub mod solver;
pub mod variety;

pub use num_complex::Complex64;
