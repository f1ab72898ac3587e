//! Index-domain meshes built from level-dependent bisections.
//!
//! An element is addressed by its bisection-tree coordinates `(level, i, j)`.
//! Even levels are squares of side `2^-level/2`; odd levels are twice as tall
//! as wide. Bisection splits even levels in `x` and odd levels in `y`, so the
//! children of `(l, i, j)` are `(l+1, 2i, j), (l+1, 2i+1, j)` on even levels
//! and `(l+1, i, 2j), (l+1, i, 2j+1)` on odd levels.

use std::fmt;

use rustc_hash::FxHashSet;

use crate::dyadic::Dyadic;
use crate::error::{MeshError, PartitionViolation, Result};

/// Deepest level an element may reach.
pub const MAX_LEVEL: u32 = 120;

/// Largest supported `M` or `N`.
pub const MAX_DOMAIN: u64 = 1 << 20;

/// Number of `x` halvings below level 0.
#[inline]
pub fn width_exponent(level: u32) -> u32 {
    level.div_ceil(2)
}

/// Number of `y` halvings below level 0.
#[inline]
pub fn height_exponent(level: u32) -> u32 {
    level / 2
}

/// Width and height of every element of the given level.
pub fn element_size(level: u32) -> (Dyadic, Dyadic) {
    (
        Dyadic::pow2_neg(width_exponent(level)),
        Dyadic::pow2_neg(height_exponent(level)),
    )
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementId {
    pub level: u32,
    pub i: u64,
    pub j: u64,
}

impl ElementId {
    pub const fn new(level: u32, i: u64, j: u64) -> Self {
        ElementId { level, i, j }
    }

    pub fn rect(self) -> Rect {
        let wx = width_exponent(self.level);
        let hy = height_exponent(self.level);
        Rect {
            x0: Dyadic::new(self.i as i128, wx),
            x1: Dyadic::new(self.i as i128 + 1, wx),
            y0: Dyadic::new(self.j as i128, hy),
            y1: Dyadic::new(self.j as i128 + 1, hy),
        }
    }

    pub fn midpoint(self) -> (Dyadic, Dyadic) {
        (
            Dyadic::new(2 * self.i as i128 + 1, width_exponent(self.level) + 1),
            Dyadic::new(2 * self.j as i128 + 1, height_exponent(self.level) + 1),
        )
    }

    /// The two elements produced by bisecting `self`.
    ///
    /// Panics when the indices overflow; use [`ElementId::checked_children`]
    /// where that can happen.
    pub fn children(self) -> (ElementId, ElementId) {
        self.checked_children()
            .expect("child index overflow")
    }

    pub fn checked_children(self) -> Option<(ElementId, ElementId)> {
        let level = self.level + 1;
        if self.level.is_multiple_of(2) {
            let i = self.i.checked_mul(2)?;
            Some((
                ElementId::new(level, i, self.j),
                ElementId::new(level, i.checked_add(1)?, self.j),
            ))
        } else {
            let j = self.j.checked_mul(2)?;
            Some((
                ElementId::new(level, self.i, j),
                ElementId::new(level, self.i, j.checked_add(1)?),
            ))
        }
    }

    pub fn parent(self) -> Option<ElementId> {
        if self.level == 0 {
            return None;
        }
        let level = self.level - 1;
        Some(if level.is_multiple_of(2) {
            ElementId::new(level, self.i / 2, self.j)
        } else {
            ElementId::new(level, self.i, self.j / 2)
        })
    }

    /// The ancestor (or `self`) at `level <= self.level`.
    pub fn ancestor_at(self, level: u32) -> ElementId {
        debug_assert!(level <= self.level);
        let dx = width_exponent(self.level) - width_exponent(level);
        let dy = height_exponent(self.level) - height_exponent(level);
        ElementId::new(level, self.i >> dx, self.j >> dy)
    }

    /// `self ⊆ other`, by index arithmetic.
    pub fn is_within(self, other: ElementId) -> bool {
        self.level >= other.level && self.ancestor_at(other.level) == other
    }

    /// Strict ancestors, nearest first.
    pub fn ancestors(self) -> impl Iterator<Item = ElementId> {
        std::iter::successors(self.parent(), |k| k.parent())
    }

    /// Does the element lie in `[0,M]x[0,N]`?
    pub fn in_domain(self, m: u64, n: u64) -> bool {
        if self.level > MAX_LEVEL {
            return false;
        }
        let wx = width_exponent(self.level);
        let hy = height_exponent(self.level);
        (self.i >> wx) < m && (self.j >> hy) < n
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.level, self.i, self.j)
    }
}

impl fmt::Debug for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Closed axis-aligned rectangle `[x0,x1] x [y0,y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x0: Dyadic,
    pub x1: Dyadic,
    pub y0: Dyadic,
    pub y1: Dyadic,
}

impl Rect {
    pub fn width(&self) -> Dyadic {
        self.x1 - self.x0
    }

    pub fn height(&self) -> Dyadic {
        self.y1 - self.y0
    }

    /// Closed rectangles share at least one point.
    pub fn touches(&self, other: &Rect) -> bool {
        self.x0 <= other.x1 && other.x0 <= self.x1 && self.y0 <= other.y1 && other.y0 <= self.y1
    }

    /// The intersection has positive area.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1 && self.y0 < other.y1 && other.y0 < self.y1
    }

    pub fn contains_point(&self, x: Dyadic, y: Dyadic) -> bool {
        self.x0 <= x && x <= self.x1 && self.y0 <= y && y <= self.y1
    }

    /// The closed box of half-widths `(dx, dy)` around `(cx, cy)`.
    pub fn around(cx: Dyadic, cy: Dyadic, dx: Dyadic, dy: Dyadic) -> Rect {
        Rect {
            x0: cx - dx,
            x1: cx + dx,
            y0: cy - dy,
            y1: cy + dy,
        }
    }
}

/// Componentwise `|a - b|` of two points.
pub fn point_dist(a: (Dyadic, Dyadic), b: (Dyadic, Dyadic)) -> (Dyadic, Dyadic) {
    ((a.0 - b.0).abs(), (a.1 - b.1).abs())
}

/// Vector-valued distance between the midpoints of two elements.
pub fn dist(a: ElementId, b: ElementId) -> (Dyadic, Dyadic) {
    point_dist(a.midpoint(), b.midpoint())
}

/// Vector-valued distance between a point and the midpoint of an element.
pub fn dist_to_point(point: (Dyadic, Dyadic), b: ElementId) -> (Dyadic, Dyadic) {
    point_dist(point, b.midpoint())
}

/// Degrees and domain size shared by every mesh of one refinement family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MeshParams {
    pub p: u32,
    pub q: u32,
    pub m: u64,
    pub n: u64,
}

impl MeshParams {
    pub fn new(p: u32, q: u32, m: u64, n: u64) -> Result<Self> {
        if p < 2 || q < 2 {
            return Err(MeshError::Parameter(format!(
                "degrees must satisfy p, q >= 2 (got p={p}, q={q})"
            )));
        }
        if m == 0 || n == 0 {
            return Err(MeshError::Parameter(format!(
                "domain must satisfy M, N >= 1 (got M={m}, N={n})"
            )));
        }
        if m > MAX_DOMAIN || n > MAX_DOMAIN {
            return Err(MeshError::Parameter(format!(
                "domain larger than {MAX_DOMAIN} in one direction"
            )));
        }
        Ok(MeshParams { p, q, m, n })
    }

    pub fn initial_count(&self) -> usize {
        (self.m * self.n) as usize
    }

    fn roots(&self) -> impl Iterator<Item = ElementId> + '_ {
        (0..self.m).flat_map(move |i| (0..self.n).map(move |j| ElementId::new(0, i, j)))
    }
}

/// A partition of `[0,M]x[0,N]` into bisection-tree elements.
///
/// Meshes are values: operations return new meshes and never mutate the
/// receiver. The consuming `into_*` variants reuse the storage.
#[derive(Clone, Debug)]
pub struct Mesh {
    params: MeshParams,
    elements: FxHashSet<ElementId>,
}

impl PartialEq for Mesh {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && self.elements == other.elements
    }
}

impl Eq for Mesh {}

impl Mesh {
    /// The tensor-product mesh of `M x N` unit squares.
    pub fn initial(p: u32, q: u32, m: u64, n: u64) -> Result<Self> {
        Ok(Self::initial_from(MeshParams::new(p, q, m, n)?))
    }

    pub fn initial_from(params: MeshParams) -> Self {
        Mesh {
            params,
            elements: params.roots().collect(),
        }
    }

    /// The `k`-th uniform refinement: every element has level `k`.
    pub fn uniform(p: u32, q: u32, m: u64, n: u64, k: u32) -> Result<Self> {
        let params = MeshParams::new(p, q, m, n)?;
        if k > MAX_LEVEL {
            return Err(MeshError::Parameter(format!(
                "uniform level {k} exceeds the maximum level {MAX_LEVEL}"
            )));
        }
        let cols = m
            .checked_shl(width_exponent(k))
            .ok_or_else(|| MeshError::Parameter("uniform level too deep".into()))?;
        let rows = n
            .checked_shl(height_exponent(k))
            .ok_or_else(|| MeshError::Parameter("uniform level too deep".into()))?;
        let count = cols.checked_mul(rows).filter(|&c| c <= 1 << 28);
        if count.is_none() {
            return Err(MeshError::Parameter(format!(
                "uniform level {k} would create too many elements"
            )));
        }
        let elements = (0..cols)
            .flat_map(|i| (0..rows).map(move |j| ElementId::new(k, i, j)))
            .collect();
        Ok(Mesh { params, elements })
    }

    /// Builds a mesh from an explicit element list and validates it.
    pub fn from_elements<I>(params: MeshParams, elements: I) -> Result<Self>
    where
        I: IntoIterator<Item = ElementId>,
    {
        let mut set = FxHashSet::default();
        for k in elements {
            if !set.insert(k) {
                return Err(MeshError::Partition(PartitionViolation::Duplicate(k)));
            }
        }
        validate_elements(&params, &set).map_err(MeshError::Partition)?;
        Ok(Mesh {
            params,
            elements: set,
        })
    }

    pub fn params(&self) -> MeshParams {
        self.params
    }

    pub fn p(&self) -> u32 {
        self.params.p
    }

    pub fn q(&self) -> u32 {
        self.params.q
    }

    pub fn m(&self) -> u64 {
        self.params.m
    }

    pub fn n(&self) -> u64 {
        self.params.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, k: &ElementId) -> bool {
        self.elements.contains(k)
    }

    /// Elements in unspecified order.
    pub fn iter(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.elements.iter().copied()
    }

    /// Elements sorted lexicographically by `(level, i, j)`.
    pub fn sorted_elements(&self) -> Vec<ElementId> {
        let mut v: Vec<_> = self.elements.iter().copied().collect();
        v.sort_unstable();
        v
    }

    pub fn max_level(&self) -> u32 {
        self.elements.iter().map(|k| k.level).max().unwrap_or(0)
    }

    pub fn min_level(&self) -> u32 {
        self.elements.iter().map(|k| k.level).min().unwrap_or(0)
    }

    /// The unique element containing the domain corner `(0,0)`.
    pub fn lower_left_corner(&self) -> ElementId {
        let mut k = ElementId::new(0, 0, 0);
        while !self.contains(&k) {
            k = k.children().0;
        }
        k
    }

    /// The element whose closed rectangle contains `(x, y)`, preferring the
    /// lower-left one on shared boundaries. `None` outside the domain.
    pub fn locate(&self, x: Dyadic, y: Dyadic) -> Option<ElementId> {
        let (w, h) = (Dyadic::from_int(self.m() as i64), Dyadic::from_int(self.n() as i64));
        if x < Dyadic::ZERO || y < Dyadic::ZERO || x > w || y > h {
            return None;
        }
        let mut k = ElementId::new(0, floor_index(x, self.m()), floor_index(y, self.n()));
        while !self.contains(&k) {
            let (a, b) = k.checked_children()?;
            let ra = a.rect();
            k = if ra.contains_point(x, y) { a } else { b };
            if k.level > MAX_LEVEL {
                return None;
            }
        }
        Some(k)
    }

    /// Replaces `k` by its two children.
    pub fn bisect(&self, k: ElementId) -> Result<Mesh> {
        self.clone().into_bisected(k)
    }

    pub fn into_bisected(mut self, k: ElementId) -> Result<Mesh> {
        self.bisect_in_place(k)?;
        Ok(self)
    }

    /// Bisects every member of `set` once. The result does not depend on the
    /// order of `set`.
    pub fn bisect_set<I>(&self, set: I) -> Result<Mesh>
    where
        I: IntoIterator<Item = ElementId>,
    {
        self.clone().into_bisected_set(set)
    }

    pub fn into_bisected_set<I>(mut self, set: I) -> Result<Mesh>
    where
        I: IntoIterator<Item = ElementId>,
    {
        let set: FxHashSet<ElementId> = set.into_iter().collect();
        if let Some(&k) = set.iter().filter(|k| !self.contains(k)).min() {
            return Err(MeshError::ElementNotFound(k));
        }
        let mut order: Vec<_> = set.into_iter().collect();
        order.sort_unstable();
        for k in order {
            self.bisect_in_place(k)?;
        }
        Ok(self)
    }

    pub(crate) fn bisect_in_place(&mut self, k: ElementId) -> Result<()> {
        if !self.elements.contains(&k) {
            return Err(MeshError::ElementNotFound(k));
        }
        if k.level >= MAX_LEVEL {
            return Err(MeshError::LevelLimit(k));
        }
        let (a, b) = k.checked_children().ok_or(MeshError::LevelLimit(k))?;
        self.elements.remove(&k);
        self.elements.insert(a);
        self.elements.insert(b);
        Ok(())
    }

    /// Calls `visit` for every element whose closed rectangle meets the
    /// closed `region`, by descending the bisection tree from the level-0
    /// cells. Visiting order is unspecified.
    pub fn for_each_touching(&self, region: &Rect, mut visit: impl FnMut(ElementId)) {
        let Some((i0, i1)) = root_range(region.x0, region.x1, self.m()) else {
            return;
        };
        let Some((j0, j1)) = root_range(region.y0, region.y1, self.n()) else {
            return;
        };
        let mut stack = Vec::new();
        for i in i0..=i1 {
            for j in j0..=j1 {
                stack.push(ElementId::new(0, i, j));
            }
        }
        while let Some(k) = stack.pop() {
            if !k.rect().touches(region) {
                continue;
            }
            if self.elements.contains(&k) {
                visit(k);
            } else if k.level < MAX_LEVEL {
                if let Some((a, b)) = k.checked_children() {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
    }

    /// Elements whose closed rectangle meets `region`, sorted.
    pub fn touching(&self, region: &Rect) -> Vec<ElementId> {
        let mut out = Vec::new();
        self.for_each_touching(region, |k| out.push(k));
        out.sort_unstable();
        out
    }

    /// Builds a mesh without validation; callers guarantee the partition.
    pub(crate) fn from_trusted(params: MeshParams, elements: FxHashSet<ElementId>) -> Mesh {
        let mesh = Mesh { params, elements };
        debug_assert_eq!(validate_partition(&mesh), Ok(()));
        mesh
    }
}

/// `floor(x)` clamped to `[0, limit-1]`, for `x` inside `[0, limit]`.
fn floor_index(x: Dyadic, limit: u64) -> u64 {
    let f = dyadic_floor(x).max(0) as u64;
    f.min(limit - 1)
}

fn dyadic_floor(x: Dyadic) -> i128 {
    x.numerator() >> x.exponent()
}

fn dyadic_ceil(x: Dyadic) -> i128 {
    -((-x).numerator() >> x.exponent())
}

/// Unit cells `[c, c+1]` meeting the closed interval `[lo, hi]`, clipped to
/// `0..limit`.
fn root_range(lo: Dyadic, hi: Dyadic, limit: u64) -> Option<(u64, u64)> {
    let first = (dyadic_ceil(lo) - 1).max(0);
    let last = dyadic_floor(hi).min(limit as i128 - 1);
    (first <= last).then_some((first as u64, last as u64))
}

/// Checks the partition invariants: level and index bounds, no element
/// together with one of its ancestors, and complete coverage of the domain.
pub fn validate_partition(mesh: &Mesh) -> std::result::Result<(), PartitionViolation> {
    validate_elements(&mesh.params, &mesh.elements)
}

fn validate_elements(
    params: &MeshParams,
    elements: &FxHashSet<ElementId>,
) -> std::result::Result<(), PartitionViolation> {
    let mut sorted: Vec<_> = elements.iter().copied().collect();
    sorted.sort_unstable();
    for &k in &sorted {
        if !k.in_domain(params.m, params.n) {
            return Err(PartitionViolation::OutOfBounds(k));
        }
    }
    let mut interior = FxHashSet::default();
    for &k in &sorted {
        for a in k.ancestors() {
            if elements.contains(&a) {
                return Err(PartitionViolation::Overlap {
                    ancestor: a,
                    descendant: k,
                });
            }
            if !interior.insert(a) {
                break;
            }
        }
    }
    let covered = |k: &ElementId| elements.contains(k) || interior.contains(k);
    for r in params.roots() {
        if !covered(&r) {
            return Err(PartitionViolation::Uncovered(r));
        }
    }
    let mut inner: Vec<_> = interior.iter().copied().collect();
    inner.sort_unstable();
    for a in inner {
        let (c0, c1) = a.children();
        for c in [c0, c1] {
            if !covered(&c) {
                return Err(PartitionViolation::Uncovered(c));
            }
        }
    }
    Ok(())
}
