//! Complexity constants, bound checks and the seeded refinement experiments.

use std::io;

use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::{MeshError, Result};
use crate::mesh::{dist, width_exponent, ElementId, Mesh, MeshParams};
use crate::refinement::{closure, into_refined};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// `(d_p, d_q)`, the distance constants of the generation lemma.
pub fn dp_dq(p: u32, q: u32) -> (f64, f64) {
    let dp = 0.5 + (1.0 + SQRT_2) * (p as f64 + SQRT_2);
    let dq = 1.0 / SQRT_2 + (2.0 + SQRT_2) * (q as f64 + SQRT_2);
    (dp, dq)
}

/// Upper bound on generated per marked elements over any refinement history.
pub fn complexity_constant(p: u32, q: u32) -> f64 {
    let (dp, dq) = dp_dq(p, q);
    (3.0 + SQRT_2) * (4.0 * dp + 1.0) * (4.0 * dq + SQRT_2)
}

/// Granularity of [`witness_bound`].
const WITNESS_QUANTUM_EXP: u32 = 30;

fn round_up(x: f64) -> Dyadic {
    let scale = (WITNESS_QUANTUM_EXP as f64).exp2();
    // one extra quantum absorbs floating error in `x` itself
    let n = (x * scale).ceil() as i128 + 1;
    Dyadic::new(n, WITNESS_QUANTUM_EXP)
}

/// Dyadic upper bound of `2^(-level/2) (d_p, d_q)`.
pub fn witness_bound(p: u32, q: u32, level: u32) -> (Dyadic, Dyadic) {
    let (dp, dq) = dp_dq(p, q);
    // 2^(-l/2) = 2^(-ceil(l/2)) * sqrt(2) for odd l
    let f = if level % 2 == 1 { SQRT_2 } else { 1.0 };
    let e = width_exponent(level);
    (round_up(dp * f).scale_pow2_neg(e), round_up(dq * f).scale_pow2_neg(e))
}

/// How each step chooses its marked elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Policy {
    /// One element per step, uniform over the current mesh sorted by
    /// `(level, i, j)`.
    RandomUniform { seed: u64 },
    /// The element containing the point `(0,0)`.
    LowerLeftCorner,
    /// Given mark sets, one per step.
    Explicit(Vec<Vec<ElementId>>),
}

/// One row of a run. Counts refer to the mesh after the step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepStats {
    /// 1-based.
    pub step: usize,
    pub level_max: u32,
    pub elements: usize,
    pub marked: usize,
    pub closure: usize,
    /// Net increase of the element count, equal to `closure`.
    pub generated: usize,
}

impl StepStats {
    pub fn ratio(&self) -> f64 {
        if self.marked == 0 {
            0.0
        } else {
            self.generated as f64 / self.marked as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunStats {
    pub params: MeshParams,
    pub steps: Vec<StepStats>,
    /// `#(G_J \ G_0)`, counted as a set difference.
    pub new_elements: usize,
}

impl RunStats {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn total_marked(&self) -> usize {
        self.steps.iter().map(|s| s.marked).sum()
    }

    pub fn total_generated(&self) -> usize {
        self.steps.iter().map(|s| s.generated).sum()
    }

    pub fn final_elements(&self) -> usize {
        self.steps
            .last()
            .map_or(self.params.initial_count(), |s| s.elements)
    }

    /// `#(G_J \ G_0) / sum of #M_j`.
    pub fn ratio(&self) -> f64 {
        self.new_elements as f64 / self.total_marked().max(1) as f64
    }

    /// `#G_J / J`.
    pub fn final_ratio(&self) -> f64 {
        self.final_elements() as f64 / self.len().max(1) as f64
    }

    /// Largest per-step `generated / marked`.
    pub fn max_step_ratio(&self) -> f64 {
        self.steps.iter().map(StepStats::ratio).fold(0.0, f64::max)
    }
}

/// A refinement step as seen by the observer of [`run_sequence_observed`].
pub struct StepView<'a> {
    pub before: &'a Mesh,
    pub marks: &'a [ElementId],
    pub after: &'a Mesh,
}

/// Current elements in `(level, i, j)` order, updated incrementally.
struct SortedElements(Vec<ElementId>);

impl SortedElements {
    fn new(mesh: &Mesh) -> Self {
        SortedElements(mesh.sorted_elements())
    }

    /// Replaces the sorted `bisected` by their children.
    fn update(&mut self, bisected: &[ElementId]) {
        let mut children: Vec<ElementId> = bisected
            .iter()
            .flat_map(|k| {
                let (a, b) = k.children();
                [a, b]
            })
            .collect();
        children.sort_unstable();
        let old = std::mem::take(&mut self.0);
        let mut out = Vec::with_capacity(old.len() + bisected.len());
        let mut gone = bisected.iter().peekable();
        let mut add = children.into_iter().peekable();
        for k in old {
            if gone.peek() == Some(&&k) {
                gone.next();
                continue;
            }
            while let Some(c) = add.next_if(|c| *c < k) {
                out.push(c);
            }
            out.push(k);
        }
        out.extend(add);
        self.0 = out;
    }
}

/// Runs `steps` refinements from the initial mesh and also returns the
/// final mesh.
pub fn run(params: MeshParams, policy: &Policy, steps: usize) -> Result<(Mesh, RunStats)> {
    run_inner(params, policy, steps, None)
}

pub fn run_sequence(p: u32, q: u32, m: u64, n: u64, policy: &Policy, steps: usize) -> Result<RunStats> {
    let params = MeshParams::new(p, q, m, n)?;
    Ok(run(params, policy, steps)?.1)
}

/// Like [`run`], calling `observe` after every step.
pub fn run_sequence_observed(
    params: MeshParams,
    policy: &Policy,
    steps: usize,
    mut observe: impl FnMut(StepView<'_>),
) -> Result<(Mesh, RunStats)> {
    run_inner(params, policy, steps, Some(&mut observe))
}

type Observer<'a> = &'a mut dyn FnMut(StepView<'_>);

fn run_inner(
    params: MeshParams,
    policy: &Policy,
    steps: usize,
    mut observe: Option<Observer<'_>>,
) -> Result<(Mesh, RunStats)> {
    if steps == 0 {
        return Err(MeshError::Parameter("steps must be at least 1".into()));
    }
    if let Policy::Explicit(sets) = policy {
        if sets.len() < steps {
            return Err(MeshError::Parameter(format!(
                "{steps} steps requested but only {} mark sets given",
                sets.len()
            )));
        }
    }
    let mut mesh = Mesh::initial_from(params);
    let mut rng = match policy {
        Policy::RandomUniform { seed } => Some(SplitMix64::seed_from_u64(*seed)),
        _ => None,
    };
    let mut sorted = rng.as_ref().map(|_| SortedElements::new(&mesh));
    let mut rows = Vec::with_capacity(steps);
    for step in 0..steps {
        let marks: Vec<ElementId> = match policy {
            Policy::RandomUniform { .. } => {
                let all = &sorted.as_ref().expect("sorted elements").0;
                let idx = rng.as_mut().expect("seeded rng").random_range(0..all.len());
                vec![all[idx]]
            }
            Policy::LowerLeftCorner => vec![mesh.lower_left_corner()],
            Policy::Explicit(sets) => sets[step].clone(),
        };
        let before = observe.as_ref().map(|_| mesh.clone());
        let size_before = mesh.len();
        let (next, order) = into_refined(mesh, &marks)?;
        mesh = next;
        if let Some(s) = sorted.as_mut() {
            s.update(&order);
        }
        if let (Some(f), Some(before)) = (observe.as_mut(), before.as_ref()) {
            f(StepView {
                before,
                marks: &marks,
                after: &mesh,
            });
        }
        rows.push(StepStats {
            step: step + 1,
            level_max: mesh.max_level(),
            elements: mesh.len(),
            marked: marks.len(),
            closure: order.len(),
            generated: mesh.len() - size_before,
        });
    }
    let stats = RunStats {
        params,
        steps: rows,
        new_elements: mesh.iter().filter(|k| k.level > 0).count(),
    };
    debug_assert!(check_complexity_bound(&stats, params.p, params.q));
    Ok((mesh, stats))
}

/// `#(G_J \ G_0) <= C_{p,q} * sum of #M_j`.
pub fn check_complexity_bound(stats: &RunStats, p: u32, q: u32) -> bool {
    stats.new_elements as f64 <= complexity_constant(p, q) * stats.total_marked() as f64
}

/// Every element of `after \ before` has a mark at most one level coarser
/// within distance `2^(-level/2) (d_p, d_q)`.
pub fn check_witness(before: &Mesh, marks: &[ElementId], after: &Mesh, p: u32, q: u32) -> bool {
    after.iter().filter(|k| !before.contains(k)).all(|k| {
        let (bx, by) = witness_bound(p, q, k.level);
        marks.iter().any(|&w| {
            let (dx, dy) = dist(k, w);
            k.level <= w.level + 1 && dx <= bx && dy <= by
        })
    })
}

/// The element of `mesh` with the largest single-mark closure, ties broken
/// by `(level, i, j)`.
pub fn largest_single_closure(mesh: &Mesh) -> Result<(ElementId, usize)> {
    let mut best: Option<(ElementId, usize)> = None;
    for k in mesh.sorted_elements() {
        let size = closure(mesh, &[k])?.len();
        if best.is_none_or(|(_, b)| size > b) {
            best = Some((k, size));
        }
    }
    best.ok_or_else(|| MeshError::Parameter("empty mesh".into()))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Per-run seeds derived from one base seed.
pub fn run_seeds(seed: u64, runs: usize) -> Vec<u64> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..runs).map(|_| rng.next_u64()).collect()
}

#[derive(Clone, Debug)]
pub struct RandomSummary {
    pub max_ratio: f64,
    pub median_ratio: f64,
    /// `(seed, stats)` per run, in run order.
    pub runs: Vec<(u64, RunStats)>,
}

/// Random single-mark sequences of length `steps`; ratios are `#G_J / J`.
pub fn experiment_random(
    params: MeshParams,
    steps: usize,
    runs: usize,
    seed: u64,
) -> Result<RandomSummary> {
    let results: Result<Vec<(u64, RunStats)>> = run_seeds(seed, runs)
        .into_par_iter()
        .map(|s| Ok((s, run(params, &Policy::RandomUniform { seed: s }, steps)?.1)))
        .collect();
    let runs = results?;
    let mut ratios: Vec<f64> = runs.iter().map(|(_, r)| r.final_ratio()).collect();
    let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let median_ratio = median(&mut ratios);
    Ok(RandomSummary {
        max_ratio,
        median_ratio,
        runs,
    })
}

#[derive(Clone, Debug)]
pub struct CornerSummary {
    /// Largest per-step `generated / marked`.
    pub max_ratio: f64,
    /// Step attaining it (first one on ties).
    pub argmax_step: usize,
    pub stats: RunStats,
}

/// `steps` lower-left-corner refinements.
pub fn experiment_corner(params: MeshParams, steps: usize) -> Result<CornerSummary> {
    let (_, stats) = run(params, &Policy::LowerLeftCorner, steps)?;
    let mut max_ratio = 0.0;
    let mut argmax_step = 1;
    for s in &stats.steps {
        if s.ratio() > max_ratio {
            max_ratio = s.ratio();
            argmax_step = s.step;
        }
    }
    Ok(CornerSummary {
        max_ratio,
        argmax_step,
        stats,
    })
}

pub const CSV_HEADER: &str = "run,step,level_max,elements,marked,generated,ratio";

#[derive(Serialize)]
struct CsvRow {
    run: usize,
    step: usize,
    level_max: u32,
    elements: usize,
    marked: usize,
    generated: usize,
    ratio: f64,
}

/// Writes CSV rows (with header) for the given runs, numbered from 0.
pub fn write_csv<'a, W: io::Write>(
    w: W,
    runs: impl IntoIterator<Item = &'a RunStats>,
) -> csv::Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(CSV_HEADER.split(','))?;
    for (run, stats) in runs.into_iter().enumerate() {
        for s in &stats.steps {
            wtr.serialize(CsvRow {
                run,
                step: s.step,
                level_max: s.level_max,
                elements: s.elements,
                marked: s.marked,
                generated: s.generated,
                ratio: s.ratio(),
            })?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn csv<'a>(runs: impl IntoIterator<Item = &'a RunStats>) -> String {
    let mut out = Vec::new();
    write_csv(&mut out, runs).expect("writing to memory");
    String::from_utf8(out).expect("CSV is ASCII")
}
