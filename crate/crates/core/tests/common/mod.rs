#![allow(dead_code)]

use astmesh::refinement::refine;
use astmesh::topology::{Orientation, Segment};
use astmesh::{ElementId, Mesh, MeshParams, Rect};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

/// A refinement chain `G_0, ..., G_J` with the single marks used.
pub struct Chain {
    pub meshes: Vec<Mesh>,
    pub marks: Vec<ElementId>,
}

impl Chain {
    pub fn last(&self) -> &Mesh {
        self.meshes.last().unwrap()
    }

    pub fn steps(&self) -> impl Iterator<Item = (&Mesh, ElementId, &Mesh)> {
        self.meshes
            .windows(2)
            .zip(&self.marks)
            .map(|(w, &k)| (&w[0], k, &w[1]))
    }
}

pub fn pick(mesh: &Mesh, rng: &mut SplitMix64) -> ElementId {
    let all = mesh.sorted_elements();
    all[rng.random_range(0..all.len())]
}

/// `steps` single-mark refinements from `start`.
pub fn extend(start: Mesh, steps: usize, rng: &mut SplitMix64) -> Chain {
    let mut meshes = vec![start];
    let mut marks = Vec::new();
    for _ in 0..steps {
        let g = meshes.last().unwrap();
        let k = pick(g, rng);
        let next = refine(g, &[k]).unwrap();
        marks.push(k);
        meshes.push(next);
    }
    Chain { meshes, marks }
}

pub fn chain(params: MeshParams, steps: usize, rng: &mut SplitMix64) -> Chain {
    extend(Mesh::initial_from(params), steps, rng)
}

/// Random `(p,q) in {2..5}^2`, `4 <= M,N <= 8`, `1..=30` steps.
pub fn random_chain(seed: u64) -> Chain {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let params = MeshParams::new(
        rng.random_range(2..=5),
        rng.random_range(2..=5),
        rng.random_range(4..=8),
        rng.random_range(4..=8),
    )
    .unwrap();
    let steps = rng.random_range(1..=30);
    chain(params, steps, &mut rng)
}

/// Does the segment share a positive-length piece with the closed region?
pub fn meets_region(s: &Segment, r: &Rect) -> bool {
    let (fixed_range, along) = match s.orientation {
        Orientation::Horizontal => ((r.y0, r.y1), (r.x0, r.x1)),
        Orientation::Vertical => ((r.x0, r.x1), (r.y0, r.y1)),
    };
    fixed_range.0 <= s.fixed && s.fixed <= fixed_range.1 && s.lo.max(along.0) < s.hi.min(along.1)
}
