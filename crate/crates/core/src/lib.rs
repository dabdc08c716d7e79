//! Structure-preserving model order reduction for linear Hamiltonian systems.
//!
//! The crate covers the whole offline/online pipeline:
//!
//! * [`symplectic`]: canonical Poisson operator, symplectic inverse, projection
//!   and the orthonormality / symplecticity measures of a reduced basis.
//! * [`spectral`]: truncated SVD, the SVD-like decomposition `B = S D Q`,
//!   (weighted) symplectic singular values and symplectic Gram-Schmidt.
//! * [`models`]: a parameterized spring-lattice cantilever in canonical
//!   Hamiltonian block form plus the experiment design.
//! * [`integrator`]: implicit midpoint for linear Hamiltonian systems and
//!   snapshot collection.
//! * [`basis`]: POD and PSD reduced-basis generators and their loss functionals.
//! * [`rom`]: reduced systems, reduced solves, error metrics and the
//!   generalization experiment.
//! * [`config`], [`io`], [`report`], [`cli`]: the experiment harness.

pub mod basis;
pub mod cli;
pub mod config;
pub mod error;
pub mod integrator;
pub mod io;
pub mod models;
pub mod report;
pub mod rom;
pub mod spectral;
pub mod symplectic;

pub use error::{Error, Result};

/// Dense column-major matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense column vector.
pub type Vector = nalgebra::DVector<f64>;
