pub mod cli_io;
pub mod dirac_modes;
pub mod error;
pub mod model;
pub mod scalar_modes;
pub mod specfun;
pub mod wavefield;

mod roots;
