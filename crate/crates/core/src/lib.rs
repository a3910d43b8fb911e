//! Liquid-state NMR spectra of spin-1/2 (and higher-spin) networks from the
//! exact eigenproblem of the isotropic Hamiltonian, with a cluster
//! approximation for molecules too large to diagonalise whole.

// `!(x > 0)` deliberately rejects NaN; dense kernels index matrices by row and column.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod basis;
pub mod cluster;
pub mod engine;
pub mod equivalence;
pub mod error;
pub mod exact;
pub mod interp;
pub mod io;
pub mod num;
pub mod operator;
pub mod oracle;
pub mod spin;
pub mod study;

pub use error::{Error, Result};
pub use num::{EigenScalar, Real};
pub use spin::{Isotope, Nucleus, SpectrometerSettings, SpinSystem};

/// Double-precision aliases for the generic types.
pub type Spectrum = analysis::Spectrum<f64>;
pub type Stick = engine::Stick<f64>;
pub type StickSpectrum = engine::StickSpectrum<f64>;
pub type Hamiltonian = operator::Hamiltonian<f64>;
pub type LadderOperator = operator::LadderOperator<f64>;
pub type SparseOperator = operator::SparseOperator<f64>;
pub type SzBlockEigensystem = engine::SzBlockEigensystem<f64>;
