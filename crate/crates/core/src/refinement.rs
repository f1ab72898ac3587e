//! `(p,q)`-patches, the closure of a marked set, and admissible refinement.

use std::collections::VecDeque;

use rustc_hash::FxHashSet;

use crate::dyadic::Dyadic;
use crate::error::{MeshError, Result};
use crate::mesh::{dist, ElementId, Mesh, Rect};

/// Half-widths of the box around an element's midpoint that defines its patch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PatchRadius {
    pub dx: Dyadic,
    pub dy: Dyadic,
}

/// Patch radius for elements of level `k`.
///
/// Even `k`: `2^(-k/2) * (floor(p/2) + 1/2, ceil(q/2) + 1/2)`.
/// Odd `k`: `2^(-(k+1)/2) * (ceil(p/2) + 1/2, 2 floor(q/2) + 1)`.
pub fn patch_radius(p: u32, q: u32, k: u32) -> PatchRadius {
    let (p, q) = (p as i128, q as i128);
    if k.is_multiple_of(2) {
        let s = k / 2 + 1;
        PatchRadius {
            dx: Dyadic::new(2 * (p / 2) + 1, s),
            dy: Dyadic::new(2 * ((q + 1) / 2) + 1, s),
        }
    } else {
        let s = k.div_ceil(2);
        PatchRadius {
            dx: Dyadic::new(2 * ((p + 1) / 2) + 1, s + 1),
            dy: Dyadic::new(2 * (q / 2) + 1, s),
        }
    }
}

/// The closed box `{x : Dist(K, x) <= D(level(K))}`.
pub fn patch_region(p: u32, q: u32, k: ElementId) -> Rect {
    let r = patch_radius(p, q, k.level);
    let (cx, cy) = k.midpoint();
    Rect::around(cx, cy, r.dx, r.dy)
}

fn within_radius(k: ElementId, other: ElementId, r: &PatchRadius) -> bool {
    let (ax, ay) = dist(k, other);
    ax <= r.dx && ay <= r.dy
}

/// Visits every mesh element whose midpoint is within the patch radius of
/// `k`. `k` itself need not belong to the mesh.
pub fn for_each_in_patch(mesh: &Mesh, k: ElementId, mut visit: impl FnMut(ElementId)) {
    let r = patch_radius(mesh.p(), mesh.q(), k.level);
    let (cx, cy) = k.midpoint();
    let region = Rect::around(cx, cy, r.dx, r.dy);
    mesh.for_each_touching(&region, |other| {
        if within_radius(k, other, &r) {
            visit(other)
        }
    });
}

/// The `(p,q)`-patch of `k` in `mesh`, sorted.
pub fn patch(mesh: &Mesh, k: ElementId) -> Vec<ElementId> {
    let mut out = Vec::new();
    for_each_in_patch(mesh, k, |o| out.push(o));
    out.sort_unstable();
    out
}

/// Mesh elements overlapping the patch box of `k` with positive area.
///
/// Brute force over all elements; agrees with [`patch`] on admissible meshes.
pub fn patch_by_overlap(mesh: &Mesh, k: ElementId) -> Vec<ElementId> {
    let region = patch_region(mesh.p(), mesh.q(), k);
    let mut out: Vec<_> = mesh
        .iter()
        .filter(|other| other.rect().overlaps(&region))
        .collect();
    out.sort_unstable();
    out
}

fn check_marks(mesh: &Mesh, marks: &[ElementId]) -> Result<()> {
    match marks.iter().find(|k| !mesh.contains(k)) {
        Some(&k) => Err(MeshError::ElementNotFound(k)),
        None => Ok(()),
    }
}

/// The smallest superset of `marks` that contains, with every member `K`,
/// all strictly coarser elements of the patch of `K`.
///
/// Patches are evaluated on `mesh` itself. Returned sorted by `(level, i, j)`,
/// which is also a valid bisection order.
pub fn closure(mesh: &Mesh, marks: &[ElementId]) -> Result<Vec<ElementId>> {
    check_marks(mesh, marks)?;
    let mut closed: FxHashSet<ElementId> = FxHashSet::default();
    let mut queue = VecDeque::new();
    for &k in marks {
        if closed.insert(k) {
            queue.push_back(k);
        }
    }
    while let Some(k) = queue.pop_front() {
        for_each_in_patch(mesh, k, |other| {
            if other.level < k.level && closed.insert(other) {
                queue.push_back(other);
            }
        });
    }
    let mut out: Vec<_> = closed.into_iter().collect();
    out.sort_unstable();
    Ok(out)
}

/// Bisects the closure of `marks`.
pub fn refine(mesh: &Mesh, marks: &[ElementId]) -> Result<Mesh> {
    Ok(refine_traced(mesh, marks)?.0)
}

/// Like [`refine`], also returning the bisection order (ascending level,
/// ties broken by `(i, j)`).
pub fn refine_traced(mesh: &Mesh, marks: &[ElementId]) -> Result<(Mesh, Vec<ElementId>)> {
    let order = closure(mesh, marks)?;
    let refined = mesh.clone().into_bisected_set(order.iter().copied())?;
    Ok((refined, order))
}

/// Consuming variant of [`refine_traced`].
pub fn into_refined(mesh: Mesh, marks: &[ElementId]) -> Result<(Mesh, Vec<ElementId>)> {
    let order = closure(&mesh, marks)?;
    let refined = mesh.into_bisected_set(order.iter().copied())?;
    Ok((refined, order))
}

/// An element whose patch holds an element more than one level coarser.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelJump {
    pub element: ElementId,
    pub coarse: ElementId,
}

/// Checks that every patch element is at most one level coarser than the
/// element owning the patch.
pub fn check_quasi_uniformity(mesh: &Mesh) -> std::result::Result<(), LevelJump> {
    for k in mesh.sorted_elements() {
        let mut worst: Option<ElementId> = None;
        for_each_in_patch(mesh, k, |other| {
            if other.level + 1 < k.level && worst.is_none_or(|w| other < w) {
                worst = Some(other);
            }
        });
        if let Some(coarse) = worst {
            return Err(LevelJump { element: k, coarse });
        }
    }
    Ok(())
}

/// Outcome of replaying a mesh's bisections in ascending level order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Replay {
    /// Every bisection was admissible; the order is recorded.
    Admissible(Vec<ElementId>),
    /// `element` could not be bisected admissibly because its patch held
    /// the coarser `coarse`.
    Inadmissible { element: ElementId, coarse: ElementId },
}

/// Rebuilds `mesh` from the initial mesh by bisecting all proper ancestors
/// of its elements level by level, checking each bisection against the
/// patch condition at the time it is made.
pub fn replay_bisections(mesh: &Mesh) -> Replay {
    let mut ancestors: FxHashSet<ElementId> = FxHashSet::default();
    for k in mesh.iter() {
        for a in k.ancestors() {
            if !ancestors.insert(a) {
                break;
            }
        }
    }
    let mut order: Vec<_> = ancestors.into_iter().collect();
    order.sort_unstable();
    let mut current = Mesh::initial_from(mesh.params());
    for &k in &order {
        let mut coarse: Option<ElementId> = None;
        for_each_in_patch(&current, k, |other| {
            if other.level < k.level && coarse.is_none_or(|c| other < c) {
                coarse = Some(other);
            }
        });
        if let Some(coarse) = coarse {
            return Replay::Inadmissible { element: k, coarse };
        }
        current
            .bisect_in_place(k)
            .expect("ancestors are bisected in ascending level order");
    }
    debug_assert!(current == *mesh);
    Replay::Admissible(order)
}

/// Is `mesh` reachable from the initial mesh by admissible bisections?
pub fn check_admissible(mesh: &Mesh) -> bool {
    matches!(replay_bisections(mesh), Replay::Admissible(_))
}
