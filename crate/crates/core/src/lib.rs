//! Fractional and tempered fractional Laplacians on bounded domains with
//! complement-valued (nonlocal) Dirichlet and Neumann data.
//!
//! The crate is organised bottom-up:
//!
//! * [`special`] – gamma, incomplete gamma, Gauss hypergeometric function,
//!   operator normalisation constants and Fourier symbols.
//! * [`quadrature`] – adaptive Gauss–Kronrod and Gauss–Legendre rules.
//! * [`operators`] – quadrature discretisation of the singular integral
//!   operators, split into interior couplings, analytic complement tails
//!   and an exterior-data source.
//! * [`solvers`] – steady and implicit-Euler transient solvers for the
//!   generalised Dirichlet and Neumann problems.
//! * [`stochastic`] – compound Poisson Lévy / tempered Lévy flights used as
//!   Monte Carlo oracles.
//! * [`spectral`] – FFT application of the exact symbols, Montroll–Weiss
//!   algebra and quadrature verification of the tempered symbol.

pub mod error;
pub mod exterior;
pub mod linalg;
pub mod operators;
pub mod quadrature;
pub mod solvers;
pub mod special;
pub mod spectral;
pub mod stochastic;

pub use error::{Error, Result};
