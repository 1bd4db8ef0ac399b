//! Numerical kernels: quadrature, root finding, minimization, summation.

pub mod minimize;
pub mod quad;
pub mod roots;
pub mod sum;
