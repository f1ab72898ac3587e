use std::fmt;

use thiserror::Error;

use crate::mesh::ElementId;

/// First violated partition invariant found by [`crate::mesh::validate_partition`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionViolation {
    /// Element lies (partly) outside `[0,M]x[0,N]` or above the level limit.
    OutOfBounds(ElementId),
    /// An element and one of its proper ancestors are both present.
    Overlap {
        ancestor: ElementId,
        descendant: ElementId,
    },
    /// A region of the domain (given as a bisection-tree cell) is not covered.
    Uncovered(ElementId),
    /// The same element was listed twice.
    Duplicate(ElementId),
}

impl fmt::Display for PartitionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionViolation::OutOfBounds(k) => write!(f, "element {k} lies outside the domain"),
            PartitionViolation::Overlap {
                ancestor,
                descendant,
            } => write!(f, "element {ancestor} overlaps its descendant {descendant}"),
            PartitionViolation::Uncovered(k) => {
                write!(f, "area deficit: cell {k} is not covered by any element")
            }
            PartitionViolation::Duplicate(k) => write!(f, "element {k} listed more than once"),
        }
    }
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid parameters: {0}")]
    Parameter(String),
    #[error("element {0} is not in the mesh")]
    ElementNotFound(ElementId),
    #[error("bisecting {0} would exceed the maximum level {max}", max = crate::mesh::MAX_LEVEL)]
    LevelLimit(ElementId),
    #[error("partition violation: {0}")]
    Partition(PartitionViolation),
    #[error("meshes have different parameters")]
    ParameterMismatch,
    #[error("domain too small for a nonempty active region (need M >= {need_m}, N >= {need_n})")]
    DomainTooSmall { need_m: u64, need_n: u64 },
    #[error("coordinate {0} is outside the active region")]
    OutOfActiveRegion(crate::dyadic::Dyadic),
    #[error("malformed mesh document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported mesh format {0:?}")]
    UnsupportedFormat(String),
    #[error("not enough global indices around {node} to build the extension")]
    Extraction { node: String },
}

pub type Result<T, E = MeshError> = std::result::Result<T, E>;
