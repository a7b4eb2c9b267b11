//! Exact computation of nonabelian Čech cohomology, primary obstruction
//! complexes and integration problems for sheaves of AQ normal series over
//! finite covers, with Green's exterior-algebra series over finite rings.

pub mod error;
pub mod exec;
pub mod groups;
pub mod linalg;
pub mod sites;
pub mod abelian;
pub mod cech;
pub mod superalgebra;
pub mod aq;
pub mod instances;
pub mod integrate;
pub mod suites;

pub use error::{Error, Result};
pub use exec::Ctx;
