//! Eikonal cross sections for fast charged particles on stacks of parallel
//! atomic planes.
//!
//! Lengths are in units of the screening radius R and momenta in 1/R.
//! [`target`] describes the stack, [`chi`] the averaged phases, [`xsec`] the
//! spectra; [`mc`] and [`oracle`] provide independent checks.

pub mod app;
pub mod chi;
pub mod config;
pub mod error;
pub mod mc;
pub mod oracle;
pub mod output;
pub mod quadrature;
pub mod specfun;
pub mod target;
pub mod validate;
pub mod xsec;

pub use error::{Error, Result};
