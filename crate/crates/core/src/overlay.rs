//! Overlay (coarsest common refinement) of two meshes.

use rustc_hash::FxHashSet;

use crate::error::{MeshError, Result};
use crate::mesh::{ElementId, Mesh};

/// Members of `set` that contain no other member, sorted.
pub fn minset<I>(set: I) -> Vec<ElementId>
where
    I: IntoIterator<Item = ElementId>,
{
    let members: FxHashSet<ElementId> = set.into_iter().collect();
    // a member is not minimal iff it is a strict ancestor of another member
    let mut dominated: FxHashSet<ElementId> = FxHashSet::default();
    for k in &members {
        for a in k.ancestors() {
            if !dominated.insert(a) {
                break;
            }
        }
    }
    let mut out: Vec<_> = members
        .into_iter()
        .filter(|k| !dominated.contains(k))
        .collect();
    out.sort_unstable();
    out
}

/// `minset(g1 ∪ g2)`.
pub fn overlay(g1: &Mesh, g2: &Mesh) -> Result<Mesh> {
    if g1.params() != g2.params() {
        return Err(MeshError::ParameterMismatch);
    }
    let elements = minset(g1.iter().chain(g2.iter()));
    Ok(Mesh::from_trusted(g1.params(), elements.into_iter().collect()))
}

/// `#(g1 ⊗ g2) + #g0 <= #g1 + #g2`.
pub fn check_overlay_bound(g1: &Mesh, g2: &Mesh) -> Result<bool> {
    let o = overlay(g1, g2)?;
    Ok(o.len() + g1.params().initial_count() <= g1.len() + g2.len())
}
