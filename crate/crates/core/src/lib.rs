//! Halpern-type iterations driven by W-mappings on CAT(1) model spaces:
//! geometry of the unit sphere and of a segment, proximal operators,
//! mapping combinators, the iteration engine, and the experiment harness.

pub mod battery;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod geom;
pub mod mapping;
pub mod prox;
pub mod sampling;

pub use error::{Error, Result};
pub use geom::{ModelSpace, SpaceKind, SpacePoint};
