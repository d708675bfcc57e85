//! Spectral-gap analysis of bounded-degree graph sequences.
//!
//! The crate covers graph primitives, Laplacian and Markov spectra, exact and
//! sweep Cheeger constants, expander decomposition with boundary rewiring,
//! triangle-weighted link criteria, and generators for the graph families
//! used to exercise them. Numeric routines are generic over [`Real`]; the
//! aliases below fix the scalar to `f64` (or `f32` where noted).

pub mod cheeger;
pub mod decompose;
pub mod eigen;
pub mod error;
pub mod generators;
pub mod graph;
pub mod io;
pub mod rewire;
pub mod scalar;
pub mod spectral;
pub mod zuk;

pub use error::{Error, Result};
pub use graph::{build_graph, BoxSpace, Graph, VertexSet};
pub use scalar::Real;

/// Exact Cheeger ratios `|∂S| / |S|`.
pub type Ratio = num_rational::Ratio<u64>;

pub type Operator = spectral::SymmetricOperator<f64>;
pub type OperatorF32 = spectral::SymmetricOperator<f32>;
pub type Spectrum = spectral::SpectrumReport<f64>;
pub type SpectrumF32 = spectral::SpectrumReport<f32>;
pub type CheegerReport = cheeger::CheegerReport<f64>;
pub type ZukCertificate = zuk::ZukCertificate<f64>;
pub use zuk::LinkGraph;
