//! Library side of the `jcsc-sim` experiment runner. The binary in
//! `main.rs` is a thin argument-parsing shell over these modules, and the
//! integration tests drive them directly.

pub mod csv_io;
pub mod runner;
pub mod scenario;
pub mod summary;
