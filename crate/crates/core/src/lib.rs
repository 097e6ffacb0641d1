//! Certified computations for proximal pairs of convex bodies in
//! finite-dimensional normed spaces: distances and diameters, proximal cores,
//! normal-structure estimates, and best proximity pairs of relatively
//! nonexpansive cyclic maps.

pub mod body;
pub mod conic;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod norm;
pub mod rng;
pub mod solver;
pub mod structure;

pub use body::{BodyPair, ConvexBody};
pub use error::{Error, Result};
pub use linalg::Vector;

pub use metrics::{PairMetrics, ProximalCore};
pub use norm::{Exponent, NormSpec, StrictConvexity};
pub use solver::{AffineMap, CertificateMode, CyclicMapSpec, ShrinkTrace};
pub use structure::{StructureEstimate, SubPair};

/// Default global tolerance for "distance equals d" tests.
pub const DEFAULT_TOL: f64 = 1e-7;
