//! Numerical laboratory for Anosov endomorphisms of the torus `T^n`.
//!
//! Maps are an integer hyperbolic matrix `A` composed with small periodic
//! shears. The crate computes pre-history dependent unstable directions,
//! Lyapunov exponents, geometry of the lifted unstable foliation on `R^n`
//! and Birkhoff-average diagnostics.

pub mod cones;
pub mod directions;
pub mod ergodic;
pub mod error;
pub mod foliation;
pub mod linalg;
pub mod linear;
pub mod lyapunov;
pub mod par;
pub mod prehistory;
pub mod smooth;
pub mod stats;
pub mod torus;

pub use cones::{verify_cones, ConeConfig, HyperbolicityCertificate};
pub use directions::{census, CensusMode, Direction, DirectionCensus};
pub use error::{LabError, Result};
pub use linear::{analyze, LinearEndo};
pub use prehistory::Prehistory;
pub use smooth::{ShearMap, SmoothEndo};
pub use torus::{CoverPoint, LatticeVector, TorusPoint};
