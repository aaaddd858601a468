//! Numerical toolkit for quantum Gromov–Hausdorff distance at desk scale.
//!
//! Finite-dimensional order-unit spaces with Lip-norms, certified upper/lower
//! bounds on the quantum distance via bridges and diameters, classical GH
//! comparison, Fejér-kernel truncation, quantum-torus continuous fields, and
//! the pair-swap Dirac realization of metric Lipschitz seminorms.
//!
//! Everything in the polyhedral world (`convexsolve` .. `classical`, `dirac`)
//! is LP-exact up to the central tolerances; the torus modules (`fejer`,
//! `qtorus`) report window/sampling brackets with an honest bias direction
//! instead of point values.

pub mod bridges;
pub mod classical;
pub mod convexsolve;
pub mod dirac;
pub mod exec;
pub mod fejer;
pub mod lipnorm;
pub mod ouspace;
pub mod qtorus;
pub mod statemetric;
pub mod tol;

pub use tol::Tolerances;
