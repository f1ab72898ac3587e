//! Skeletons, T-junctions and their extensions, analysis-suitability, and
//! the refinement relation between meshes.

use std::collections::BTreeMap;
use std::fmt;

use rustc_hash::FxHashSet;

use crate::dyadic::Dyadic;
use crate::error::{MeshError, Result};
use crate::mesh::{ElementId, Mesh, Rect};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

impl Interval {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Self {
        debug_assert!(lo < hi);
        Interval { lo, hi }
    }

    pub fn contains(&self, t: Dyadic) -> bool {
        self.lo <= t && t <= self.hi
    }

    pub fn covers(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

/// Axis-aligned segment on the line `y = fixed` (horizontal) or `x = fixed`
/// (vertical), spanning `lo..hi` with per-endpoint openness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Segment {
    pub orientation: Orientation,
    pub fixed: Dyadic,
    pub lo: Dyadic,
    pub hi: Dyadic,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Segment {
    /// Rejects empty and single-point spans.
    pub fn new(
        orientation: Orientation,
        fixed: Dyadic,
        lo: Dyadic,
        hi: Dyadic,
        lo_closed: bool,
        hi_closed: bool,
    ) -> Option<Segment> {
        (lo < hi).then_some(Segment {
            orientation,
            fixed,
            lo,
            hi,
            lo_closed,
            hi_closed,
        })
    }

    pub fn closed(orientation: Orientation, fixed: Dyadic, lo: Dyadic, hi: Dyadic) -> Option<Segment> {
        Self::new(orientation, fixed, lo, hi, true, true)
    }

    /// Does the span contain `t`, honoring endpoint openness?
    pub fn spans(&self, t: Dyadic) -> bool {
        let above_lo = if self.lo_closed { self.lo <= t } else { self.lo < t };
        let below_hi = if self.hi_closed { t <= self.hi } else { t < self.hi };
        above_lo && below_hi
    }

    /// Point intersection of a horizontal and a vertical segment.
    pub fn crosses(&self, other: &Segment) -> bool {
        let (h, v) = match (self.orientation, other.orientation) {
            (Orientation::Horizontal, Orientation::Vertical) => (self, other),
            (Orientation::Vertical, Orientation::Horizontal) => (other, self),
            _ => return false,
        };
        h.spans(v.fixed) && v.spans(h.fixed)
    }

    /// Smallest closed segment containing both; they must share a line and
    /// abut or overlap.
    fn join(&self, other: &Segment) -> Segment {
        debug_assert_eq!(self.orientation, other.orientation);
        debug_assert_eq!(self.fixed, other.fixed);
        Segment {
            orientation: self.orientation,
            fixed: self.fixed,
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.lo, self.hi)
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { ']' };
        let close = if self.hi_closed { ']' } else { '[' };
        match self.orientation {
            Orientation::Horizontal => {
                write!(f, "{open}{}, {}{close} x {{{}}}", self.lo, self.hi, self.fixed)
            }
            Orientation::Vertical => {
                write!(f, "{{{}}} x {open}{}, {}{close}", self.fixed, self.lo, self.hi)
            }
        }
    }
}

/// Merged skeleton intervals per line. Horizontal lines are keyed by their
/// `y` coordinate and hold `x` intervals; vertical lines the other way round.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SkeletonLines {
    horizontal: BTreeMap<Dyadic, Vec<Interval>>,
    vertical: BTreeMap<Dyadic, Vec<Interval>>,
}

impl SkeletonLines {
    fn map(&self, o: Orientation) -> &BTreeMap<Dyadic, Vec<Interval>> {
        match o {
            Orientation::Horizontal => &self.horizontal,
            Orientation::Vertical => &self.vertical,
        }
    }

    fn map_mut(&mut self, o: Orientation) -> &mut BTreeMap<Dyadic, Vec<Interval>> {
        match o {
            Orientation::Horizontal => &mut self.horizontal,
            Orientation::Vertical => &mut self.vertical,
        }
    }

    /// Line coordinates with at least one interval.
    pub fn lines(&self, o: Orientation) -> impl Iterator<Item = (Dyadic, &[Interval])> {
        self.map(o).iter().map(|(k, v)| (*k, v.as_slice()))
    }

    pub fn intervals(&self, o: Orientation, line: Dyadic) -> &[Interval] {
        self.map(o).get(&line).map_or(&[], |v| v.as_slice())
    }

    /// All intervals as closed segments, sorted.
    pub fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::new();
        for o in [Orientation::Horizontal, Orientation::Vertical] {
            for (line, ivs) in self.lines(o) {
                out.extend(ivs.iter().map(|iv| Segment::closed(o, line, iv.lo, iv.hi).unwrap()));
            }
        }
        out
    }

    fn add_raw(&mut self, o: Orientation, line: Dyadic, iv: Interval) {
        self.map_mut(o).entry(line).or_default().push(iv);
    }

    fn normalize(&mut self) {
        for map in [&mut self.horizontal, &mut self.vertical] {
            for ivs in map.values_mut() {
                ivs.sort_unstable();
                let mut merged: Vec<Interval> = Vec::with_capacity(ivs.len());
                for iv in ivs.drain(..) {
                    match merged.last_mut() {
                        Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                        _ => merged.push(iv),
                    }
                }
                *ivs = merged;
            }
        }
    }

    /// The merged interval on `line` containing `t`, if any.
    fn find(&self, o: Orientation, line: Dyadic, t: Dyadic) -> Option<&Interval> {
        let ivs = self.intervals(o, line);
        let idx = ivs.partition_point(|iv| iv.hi < t);
        ivs.get(idx).filter(|iv| iv.lo <= t)
    }

    /// Is the point `t` of the given line on the skeleton?
    pub fn contains_point(&self, o: Orientation, line: Dyadic, t: Dyadic) -> bool {
        self.find(o, line, t).is_some()
    }

    /// Is the closed span `[lo, hi]` of the line covered?
    pub fn covers(&self, o: Orientation, line: Dyadic, lo: Dyadic, hi: Dyadic) -> bool {
        self.find(o, line, lo).is_some_and(|iv| hi <= iv.hi)
    }

    /// Does a positive-length piece of the line leave `t` forwards (increasing
    /// coordinate) or backwards?
    fn leaves(&self, o: Orientation, line: Dyadic, t: Dyadic, forward: bool) -> bool {
        // intervals are merged, so at most one contains t
        self.find(o, line, t)
            .is_some_and(|iv| if forward { t < iv.hi } else { iv.lo < t })
    }

    /// Edge directions present at `(x, y)`.
    pub fn incidence(&self, x: Dyadic, y: Dyadic) -> Incidence {
        Incidence {
            right: self.leaves(Orientation::Horizontal, y, x, true),
            left: self.leaves(Orientation::Horizontal, y, x, false),
            up: self.leaves(Orientation::Vertical, x, y, true),
            down: self.leaves(Orientation::Vertical, x, y, false),
        }
    }
}

/// Which of the four axis directions carry an edge out of a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Incidence {
    pub right: bool,
    pub left: bool,
    pub up: bool,
    pub down: bool,
}

impl Incidence {
    pub fn valence(&self) -> usize {
        [self.right, self.left, self.up, self.down]
            .iter()
            .filter(|b| **b)
            .count()
    }
}

/// Union of all element edges, merged into maximal intervals per line.
pub fn skeleton(mesh: &Mesh) -> SkeletonLines {
    let mut sk = SkeletonLines::default();
    for k in mesh.iter() {
        add_rect_edges(&mut sk, &k.rect());
    }
    sk.normalize();
    sk
}

fn add_rect_edges(sk: &mut SkeletonLines, r: &Rect) {
    let xs = Interval::new(r.x0, r.x1);
    let ys = Interval::new(r.y0, r.y1);
    sk.add_raw(Orientation::Horizontal, r.y0, xs);
    sk.add_raw(Orientation::Horizontal, r.y1, xs);
    sk.add_raw(Orientation::Vertical, r.x0, ys);
    sk.add_raw(Orientation::Vertical, r.x1, ys);
}

/// `[ceil(p/2), M - ceil(p/2)] x [ceil(q/2), N - ceil(q/2)]`.
pub fn active_region(mesh: &Mesh) -> Result<Rect> {
    let ip = mesh.p().div_ceil(2) as u64;
    let iq = mesh.q().div_ceil(2) as u64;
    if mesh.m() < 2 * ip || mesh.n() < 2 * iq {
        return Err(domain_too_small(mesh.p(), mesh.q()));
    }
    let int = |v: u64| Dyadic::from_int(v as i64);
    Ok(Rect {
        x0: int(ip),
        x1: int(mesh.m() - ip),
        y0: int(iq),
        y1: int(mesh.n() - iq),
    })
}

fn domain_too_small(p: u32, q: u32) -> MeshError {
    MeshError::DomainTooSmall {
        need_m: 2 * p.div_ceil(2) as u64,
        need_n: 2 * q.div_ceil(2) as u64,
    }
}

/// A mesh vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub x: Dyadic,
    pub y: Dyadic,
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// All element corners, sorted by `(x, y)`.
pub fn nodes(mesh: &Mesh) -> Vec<Node> {
    let mut set = FxHashSet::default();
    for k in mesh.iter() {
        let r = k.rect();
        for (x, y) in [(r.x0, r.y0), (r.x1, r.y0), (r.x0, r.y1), (r.x1, r.y1)] {
            set.insert(Node { x, y });
        }
    }
    let mut v: Vec<_> = set.into_iter().collect();
    v.sort_unstable();
    v
}

/// T-junction orientation, named by the direction without an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TKind {
    /// `⊣`
    MissingRight,
    /// `⊢`
    MissingLeft,
    /// `⊥`
    MissingBelow,
    /// `⊤`
    MissingAbove,
}

impl TKind {
    /// Horizontal T-junctions extend along `y = const`.
    pub fn orientation(self) -> Orientation {
        match self {
            TKind::MissingRight | TKind::MissingLeft => Orientation::Horizontal,
            TKind::MissingBelow | TKind::MissingAbove => Orientation::Vertical,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            TKind::MissingRight => '⊣',
            TKind::MissingLeft => '⊢',
            TKind::MissingBelow => '⊥',
            TKind::MissingAbove => '⊤',
        }
    }

    fn from_incidence(inc: &Incidence) -> Option<TKind> {
        if inc.valence() != 3 {
            return None;
        }
        Some(if !inc.right {
            TKind::MissingRight
        } else if !inc.left {
            TKind::MissingLeft
        } else if !inc.down {
            TKind::MissingBelow
        } else {
            TKind::MissingAbove
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TJunction {
    pub node: Node,
    pub kind: TKind,
}

impl fmt::Display for TJunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind.symbol(), self.node)
    }
}

/// Edge and face extension of one T-junction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Extension {
    pub junction: TJunction,
    /// Closed, runs along existing edges away from the missing direction.
    pub edge: Segment,
    /// Open at the junction, points into the missing direction.
    pub face: Segment,
}

impl Extension {
    /// The closed union `edge ∪ face`.
    pub fn union(&self) -> Segment {
        self.edge.join(&self.face)
    }
}

/// Which global index set to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexAxis {
    /// `x` positions where the vertical skeleton crosses the line `y = coord`.
    X,
    /// `y` positions where the horizontal skeleton crosses the line `x = coord`.
    Y,
}

/// Skeleton-derived topology of one mesh, computed once and queried many
/// times.
#[derive(Clone, Debug)]
pub struct Topology {
    p: u32,
    q: u32,
    /// `None` when the domain is too small for an active region.
    active: Option<Rect>,
    skeleton: SkeletonLines,
    nodes: Vec<Node>,
}

impl Topology {
    /// Without an active region there are no active nodes, hence no
    /// T-junctions.
    pub fn new(mesh: &Mesh) -> Self {
        Topology {
            p: mesh.p(),
            q: mesh.q(),
            active: active_region(mesh).ok(),
            skeleton: skeleton(mesh),
            nodes: nodes(mesh),
        }
    }

    pub fn skeleton(&self) -> &SkeletonLines {
        &self.skeleton
    }

    pub fn active_region(&self) -> Option<Rect> {
        self.active
    }

    /// Active nodes of valence three, sorted by position.
    pub fn t_junctions(&self) -> Vec<TJunction> {
        let Some(active) = self.active else {
            return Vec::new();
        };
        self.nodes
            .iter()
            .filter(|n| active.contains_point(n.x, n.y))
            .filter_map(|&node| {
                let inc = self.skeleton.incidence(node.x, node.y);
                TKind::from_incidence(&inc).map(|kind| TJunction { node, kind })
            })
            .collect()
    }

    /// Sorted crossing coordinates of the perpendicular skeleton with the line
    /// `y = coord` ([`IndexAxis::X`]) or `x = coord` ([`IndexAxis::Y`]).
    pub fn global_index_set(&self, axis: IndexAxis, coord: Dyadic) -> Result<Vec<Dyadic>> {
        let active = self.active.ok_or_else(|| domain_too_small(self.p, self.q))?;
        let (lo, hi, perpendicular) = match axis {
            IndexAxis::X => (active.y0, active.y1, Orientation::Vertical),
            IndexAxis::Y => (active.x0, active.x1, Orientation::Horizontal),
        };
        if coord < lo || coord > hi {
            return Err(MeshError::OutOfActiveRegion(coord));
        }
        let out: Vec<Dyadic> = self
            .skeleton
            .lines(perpendicular)
            .filter(|(line, _)| self.skeleton.contains_point(perpendicular, *line, coord))
            .map(|(line, _)| line)
            .collect();
        Ok(out)
    }

    /// Edge and face extension of `t`.
    pub fn extension(&self, t: TJunction) -> Result<Extension> {
        let (axis, along, fixed, degree) = match t.kind.orientation() {
            Orientation::Horizontal => (IndexAxis::X, t.node.x, t.node.y, self.p),
            Orientation::Vertical => (IndexAxis::Y, t.node.y, t.node.x, self.q),
        };
        let err = || MeshError::Extraction {
            node: t.to_string(),
        };
        let indices = self.global_index_set(axis, fixed)?;
        let pos = indices.binary_search(&along).map_err(|_| err())?;
        let face_steps = degree.div_ceil(2) as usize;
        let edge_steps = (degree / 2) as usize;
        let forward = matches!(t.kind, TKind::MissingRight | TKind::MissingAbove);
        let (before, after) = if forward {
            (edge_steps, face_steps)
        } else {
            (face_steps, edge_steps)
        };
        if pos < before || pos + after >= indices.len() {
            return Err(err());
        }
        let lo = indices[pos - before];
        let hi = indices[pos + after];
        let o = t.kind.orientation();
        let (edge, face) = if forward {
            (
                Segment::new(o, fixed, lo, along, true, true),
                Segment::new(o, fixed, along, hi, false, true),
            )
        } else {
            (
                Segment::new(o, fixed, along, hi, true, true),
                Segment::new(o, fixed, lo, along, true, false),
            )
        };
        Ok(Extension {
            junction: t,
            edge: edge.ok_or_else(err)?,
            face: face.ok_or_else(err)?,
        })
    }

    /// Extensions of all T-junctions, in T-junction order.
    pub fn extensions(&self) -> Result<Vec<Extension>> {
        self.t_junctions()
            .into_iter()
            .map(|t| self.extension(t))
            .collect()
    }
}

/// Active valence-three nodes of `mesh`.
pub fn t_junctions(mesh: &Mesh) -> Vec<TJunction> {
    Topology::new(mesh).t_junctions()
}

pub fn global_index_set(mesh: &Mesh, axis: IndexAxis, coord: Dyadic) -> Result<Vec<Dyadic>> {
    Topology::new(mesh).global_index_set(axis, coord)
}

pub fn extension(mesh: &Mesh, t: TJunction) -> Result<Extension> {
    Topology::new(mesh).extension(t)
}

/// Result of the analysis-suitability test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suitability {
    Suitable,
    /// A horizontal and a vertical extension intersect.
    Crossing {
        horizontal: TJunction,
        vertical: TJunction,
    },
}

impl Suitability {
    pub fn is_suitable(&self) -> bool {
        matches!(self, Suitability::Suitable)
    }
}

/// Do horizontal T-junction extensions stay clear of vertical ones?
pub fn is_analysis_suitable(mesh: &Mesh) -> Result<Suitability> {
    let exts = Topology::new(mesh).extensions()?;
    let (horizontal, vertical): (Vec<_>, Vec<_>) = exts
        .iter()
        .map(|e| (e.junction, e.union()))
        .partition(|(_, s)| s.orientation == Orientation::Horizontal);
    for (th, sh) in &horizontal {
        for (tv, sv) in &vertical {
            if sh.crosses(sv) {
                return Ok(Suitability::Crossing {
                    horizontal: *th,
                    vertical: *tv,
                });
            }
        }
    }
    Ok(Suitability::Suitable)
}

/// Skeleton united with every T-junction extension.
pub fn extended_skeleton(mesh: &Mesh) -> Result<SkeletonLines> {
    let topo = Topology::new(mesh);
    let exts = topo.extensions()?;
    let mut sk = topo.skeleton;
    for e in exts {
        let u = e.union();
        sk.add_raw(u.orientation, u.fixed, u.interval());
    }
    sk.normalize();
    Ok(sk)
}

/// Is every interval of `a` covered by `b` (per orientation and line)?
pub fn skeleton_covered_by(a: &SkeletonLines, b: &SkeletonLines) -> bool {
    [Orientation::Horizontal, Orientation::Vertical]
        .into_iter()
        .all(|o| {
            a.lines(o)
                .all(|(line, ivs)| ivs.iter().all(|iv| b.covers(o, line, iv.lo, iv.hi)))
        })
}

/// Closed pieces of `a` that `b` does not cover.
pub fn uncovered(a: &SkeletonLines, b: &SkeletonLines) -> Vec<Segment> {
    let mut out = Vec::new();
    for o in [Orientation::Horizontal, Orientation::Vertical] {
        for (line, ivs) in a.lines(o) {
            let cover = b.intervals(o, line);
            for iv in ivs {
                let mut cur = iv.lo;
                for c in cover.iter().skip_while(|c| c.hi <= iv.lo) {
                    if c.lo >= iv.hi {
                        break;
                    }
                    out.extend(Segment::closed(o, line, cur, c.lo));
                    cur = cur.max(c.hi);
                }
                out.extend(Segment::closed(o, line, cur, iv.hi));
            }
        }
    }
    out
}

/// Is every element of `fine` contained in an element of `coarse`?
pub fn is_refinement(coarse: &Mesh, fine: &Mesh) -> Result<bool> {
    if coarse.params() != fine.params() {
        return Err(MeshError::ParameterMismatch);
    }
    Ok(fine.iter().all(|k| has_container(coarse, k)))
}

fn has_container(mesh: &Mesh, k: ElementId) -> bool {
    mesh.contains(&k) || k.ancestors().any(|a| mesh.contains(&a))
}
