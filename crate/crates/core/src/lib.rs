//! Invariants of finite-dimensional metric Lie algebras, with optional
//! left-invariant complex structures.
//!
//! The crate computes Levi-Civita connections and curvature of left-invariant
//! metrics, decides flatness against the classical rotation-block normal form,
//! builds complex frames on the (1,0)-subspace of a complexified algebra,
//! evaluates Chern torsion two ways (closed formula and a connection solver),
//! and ships seeded generators plus a projected-gradient search for integrable
//! complex structures that are compatible with a given metric.
//!
//! All core computations run in one of two arithmetic modes: exact (arbitrary
//! precision rationals, extended by √2 where frame normalizations need it) or
//! binary64. Exact inputs stay exact through every rational operation; mixing
//! in a float promotes to float.

pub mod error;
pub mod scalar;
pub mod mat;
pub mod fmat;
pub mod subspace;
pub mod lie;
pub mod riemannian;
pub mod frames;
pub mod hermitian;
pub mod generators;
pub mod search;
pub mod io;
pub mod samples;

pub use error::{Error, Result};
pub use scalar::{ArithmeticPolicy, ComplexScalar, Scalar, ScalarMode};

/// Default absolute tolerance for float-mode zero tests.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
