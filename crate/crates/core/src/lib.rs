pub mod dd;
pub mod error;
pub mod fit;
pub mod gamma;
pub mod harness;
pub mod lagrange;
pub mod specfun;
pub mod symbol;
