//! Admissible adaptive refinement of analysis-suitable T-meshes.
//!
//! Meshes live on the index domain `[0,M]x[0,N]` and are refined by
//! level-dependent bisection. All geometry is exact ([`Dyadic`]).

pub mod bench;
pub mod dyadic;
pub mod error;
pub mod io;
pub mod mesh;
pub mod overlay;
pub mod refinement;
pub mod topology;

pub use dyadic::Dyadic;
pub use error::{MeshError, PartitionViolation, Result};
pub use mesh::{validate_partition, ElementId, Mesh, MeshParams, Rect};
