//! Numerical differential geometry of closed hypersurfaces in warped product
//! manifolds `[0, r̄) ×_λ P^n`.
//!
//! The crate builds discrete hypersurfaces (rotationally symmetric profiles
//! in any dimension, radial graphs over a sphere fiber), computes their
//! extrinsic geometry, and verifies at desk scale the integral formulas,
//! curvature decompositions, inequalities, and umbilicity characterizations
//! that hold for such hypersurfaces. Every analytic statement is paired with
//! an independent numerical route: closed-form curvature against finite
//! differences of the metric, symmetric-function recurrences against subset
//! enumeration, analytic first variations against re-meshed difference
//! quotients.

pub mod ambient;
pub mod error;
pub mod surface;
pub mod symfunc;

pub use ambient::{
    AmbientKind, AmbientSpace, BoundaryMode, CatalogParams, ConditionCheck, ConditionReport,
    TangentDecomposition, WarpingProfile,
};
pub use error::{GeomError, Result};
pub use surface::{DiscreteHypersurface, ExtrinsicData, SurfaceSpec};
