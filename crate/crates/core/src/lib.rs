pub mod cli;
pub mod commutant;
pub mod dft;
pub mod error;
pub mod extremal;
pub mod interp;
pub mod lowdim;
pub mod qseries;
pub mod spectral;
pub mod theta;
pub mod tridiag;
pub mod verify;
pub mod zmod;

pub use error::{Error, Result};
