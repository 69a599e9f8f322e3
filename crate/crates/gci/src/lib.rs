//! Conditional independence structures over finite ground sets: gaussoid and
//! semigraphoid combinatorics, exact positive-definite matrix algebra and
//! adhesive extensions, polymatroids, an exact rational LP feasibility solver,
//! a CDCL SAT solver with projected model enumeration, property oracles,
//! selfadhesion testing and census pipelines.

pub mod bits;
pub mod cicore;
pub mod cli;
pub mod enumeration;
pub mod error;
pub mod exactlp;
pub mod gaussians;
pub mod oracles;
pub mod polymatroids;
pub mod satcore;
pub mod selfadhesion;

pub use error::GciError;
