//! Finite-window Monte Carlo on a hyperlattice.
//!
//! A [`Window`] unrolls a block of lattice cells into a finite hypergraph.
//! Each trial draws an independent state per hyperedge (one uniform from a
//! ChaCha stream keyed by `(seed, trial)`), then clusters vertices with a
//! union-find.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypermap::{Cell, HyperView, PeriodicMap, Point};
use crate::ncpart::{enumerate_nc, NCPartition, ProbabilityVector};

/// Two-sided 95% normal quantile used for Wilson intervals.
pub const Z95: f64 = 1.959963984540054;

/// Smallest window side, in cells.
pub const MIN_WINDOW_CELLS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    /// Hyperedges leaving the window are dropped.
    Open,
    /// Cells wrap around; no hyperedge is lost.
    Torus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Horizontal,
    Vertical,
}

/// Axis-aligned plane rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0: x0.min(x1), y0: y0.min(y1), x1: x0.max(x1), y1: y0.max(y1) }
    }

    fn contains(&self, p: Point) -> bool {
        const EPS: f64 = 1e-9;
        p[0] >= self.x0 - EPS && p[0] <= self.x1 + EPS && p[1] >= self.y0 - EPS && p[1] <= self.y1 + EPS
    }
}

/// One hyperedge copy inside a window.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowEdge {
    /// Index into the quotient's hyperedge list.
    pub quotient: usize,
    pub orbit: usize,
    pub cell: Cell,
    /// Window vertex ids in label order.
    pub vertices: Vec<usize>,
    /// Unwrapped plane positions of the incidences.
    pub points: Vec<Point>,
}

/// A finite unrolled piece of a periodic hyperlattice.
#[derive(Clone, Debug)]
pub struct Window {
    view: HyperView,
    i_range: (i32, i32),
    j_range: (i32, i32),
    mode: BoundaryMode,
    positions: Vec<Point>,
    edges: Vec<WindowEdge>,
    /// Per arity: the states in canonical order.
    states: BTreeMap<usize, Vec<NCPartition>>,
    /// Per arity and state: label pairs to union.
    merges: BTreeMap<usize, Vec<Vec<(usize, usize)>>>,
}

fn lift(basis: &[Point; 2], p: Point, c: Cell) -> Point {
    [
        p[0] + c[0] as f64 * basis[0][0] + c[1] as f64 * basis[1][0],
        p[1] + c[0] as f64 * basis[0][1] + c[1] as f64 * basis[1][1],
    ]
}

impl Window {
    /// Cells `i0..i1` by `j0..j1` (half-open).
    pub fn new(lattice: &PeriodicMap, i_range: (i32, i32), j_range: (i32, i32), mode: BoundaryMode) -> Result<Self> {
        Window::from_view(lattice.hyper_view(), i_range, j_range, mode)
    }

    pub fn from_view(view: HyperView, i_range: (i32, i32), j_range: (i32, i32), mode: BoundaryMode) -> Result<Self> {
        let ni = (i_range.1 - i_range.0).max(0) as usize;
        let nj = (j_range.1 - j_range.0).max(0) as usize;
        if ni < MIN_WINDOW_CELLS || nj < MIN_WINDOW_CELLS {
            return Err(Error::invalid(format!(
                "window must be at least {MIN_WINDOW_CELLS}x{MIN_WINDOW_CELLS} cells, got {ni}x{nj}"
            )));
        }
        let nv = view.vertices.len();
        let index = |c: Cell| -> Option<usize> {
            let (mut i, mut j) = (c[0] - i_range.0, c[1] - j_range.0);
            match mode {
                BoundaryMode::Open => {
                    if i < 0 || j < 0 || i as usize >= ni || j as usize >= nj {
                        return None;
                    }
                }
                BoundaryMode::Torus => {
                    i = i.rem_euclid(ni as i32);
                    j = j.rem_euclid(nj as i32);
                }
            }
            Some((i as usize * nj + j as usize) * nv)
        };
        let mut positions = Vec::with_capacity(ni * nj * nv);
        for i in 0..ni as i32 {
            for j in 0..nj as i32 {
                for v in &view.vertices {
                    positions.push(lift(&view.basis, v.point, [i + i_range.0, j + j_range.0]));
                }
            }
        }
        let mut edges = Vec::new();
        let mut states = BTreeMap::new();
        for i in i_range.0..i_range.1 {
            for j in j_range.0..j_range.1 {
                'edge: for (q, e) in view.hyperedges.iter().enumerate() {
                    let mut vertices = Vec::with_capacity(e.incidences.len());
                    let mut points = Vec::with_capacity(e.incidences.len());
                    for inc in &e.incidences {
                        let c = [i + inc.offset[0], j + inc.offset[1]];
                        let Some(base) = index(c) else { continue 'edge };
                        vertices.push(base + inc.vertex);
                        points.push(lift(&view.basis, view.vertices[inc.vertex].point, c));
                    }
                    edges.push(WindowEdge { quotient: q, orbit: e.orbit, cell: [i, j], vertices, points });
                }
            }
        }
        for e in &view.hyperedges {
            let k = e.incidences.len();
            if let std::collections::btree_map::Entry::Vacant(slot) = states.entry(k) {
                slot.insert(enumerate_nc(k)?);
            }
        }
        let merges = states
            .iter()
            .map(|(&k, parts)| (k, parts.iter().map(NCPartition::merge_pairs).collect()))
            .collect();
        Ok(Window { view, i_range, j_range, mode, positions, edges, states, merges })
    }

    /// Smallest window covering `rect` plus `margin` cells on every side.
    pub fn around_rect(lattice: &PeriodicMap, rect: Rect, margin: i32, mode: BoundaryMode) -> Result<Self> {
        let view = lattice.hyper_view();
        let b = view.basis;
        let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
        let coords = |p: Point| {
            [
                (p[0] * b[1][1] - p[1] * b[1][0]) / det,
                (b[0][0] * p[1] - b[0][1] * p[0]) / det,
            ]
        };
        // vertex points may sit anywhere relative to their cell origin
        let spread = view
            .vertices
            .iter()
            .map(|v| {
                let c = coords(v.point);
                c[0].abs().max(c[1].abs()).ceil() as i32
            })
            .max()
            .unwrap_or(0);
        let corners = [[rect.x0, rect.y0], [rect.x1, rect.y0], [rect.x0, rect.y1], [rect.x1, rect.y1]];
        let cs: Vec<[f64; 2]> = corners.iter().map(|&p| coords(p)).collect();
        let lo = |k: usize| cs.iter().map(|c| c[k]).fold(f64::INFINITY, f64::min).floor() as i32 - margin - spread;
        let hi = |k: usize| cs.iter().map(|c| c[k]).fold(f64::NEG_INFINITY, f64::max).ceil() as i32 + margin + spread + 1;
        Window::from_view(view, (lo(0), hi(0)), (lo(1), hi(1)), mode)
    }

    pub fn view(&self) -> &HyperView {
        &self.view
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    pub fn cell_ranges(&self) -> ((i32, i32), (i32, i32)) {
        (self.i_range, self.j_range)
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn edges(&self) -> &[WindowEdge] {
        &self.edges
    }

    /// Window vertex of quotient vertex `v` in cell `c`, if present.
    pub fn vertex_at(&self, v: usize, c: Cell) -> Option<usize> {
        let (i, j) = (c[0] - self.i_range.0, c[1] - self.j_range.0);
        let nj = self.j_range.1 - self.j_range.0;
        let ni = self.i_range.1 - self.i_range.0;
        if i < 0 || j < 0 || i >= ni || j >= nj || v >= self.view.vertices.len() {
            return None;
        }
        Some((i as usize * nj as usize + j as usize) * self.view.vertices.len() + v)
    }

    /// Bounding box of all window vertices.
    pub fn bounds(&self) -> Rect {
        let mut r = Rect { x0: f64::INFINITY, y0: f64::INFINITY, x1: f64::NEG_INFINITY, y1: f64::NEG_INFINITY };
        for p in &self.positions {
            r.x0 = r.x0.min(p[0]);
            r.y0 = r.y0.min(p[1]);
            r.x1 = r.x1.max(p[0]);
            r.y1 = r.y1.max(p[1]);
        }
        r
    }

    /// Widths of the terminal bands: one cell in each plane direction.
    pub fn cell_extent(&self) -> [f64; 2] {
        let b = self.view.basis;
        [b[0][0].abs().max(b[1][0].abs()), b[0][1].abs().max(b[1][1].abs())]
    }

    /// States of arity `k` in canonical order; configurations store indices
    /// into this list.
    pub fn states(&self, k: usize) -> &[NCPartition] {
        self.states.get(&k).map(Vec::as_slice).unwrap_or(&[])
    }

    fn sampler(&self, vectors: &[ProbabilityVector]) -> Result<Sampler> {
        let mut orbits = Vec::new();
        for e in &self.view.hyperedges {
            let k = e.incidences.len();
            let v = vectors
                .get(e.orbit)
                .ok_or_else(|| Error::invalid(format!("no probability vector for orbit {}", e.orbit)))?;
            if v.k() != k {
                return Err(Error::invalid(format!("orbit {} has arity {k}, vector has k = {}", e.orbit, v.k())));
            }
            if orbits.len() <= e.orbit {
                orbits.resize(e.orbit + 1, None);
            }
            if orbits[e.orbit].is_none() {
                let parts = self.states(k);
                let mut acc = 0.0;
                let mut cdf = Vec::with_capacity(parts.len());
                let mut last_positive = 0;
                for (i, pi) in parts.iter().enumerate() {
                    let p = v.prob(pi);
                    acc += p;
                    cdf.push(acc);
                    if p > 0.0 {
                        last_positive = i;
                    }
                }
                orbits[e.orbit] = Some(OrbitSampler { cdf, last_positive });
            }
        }
        Ok(Sampler { orbits: orbits.into_iter().map(|o| o.unwrap_or_default()).collect() })
    }
}

#[derive(Clone, Debug, Default)]
struct OrbitSampler {
    cdf: Vec<f64>,
    last_positive: usize,
}

impl OrbitSampler {
    fn draw(&self, u: f64) -> usize {
        self.cdf.iter().position(|&c| u < c).unwrap_or(self.last_positive).min(self.last_positive)
    }
}

struct Sampler {
    orbits: Vec<OrbitSampler>,
}

/// Uniform in `[0, 1)` from the top 53 bits.
fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.random::<u64>() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The random stream of one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// The uniforms driving one trial, one per window hyperedge.
pub fn trial_uniforms(window: &Window, seed: u64, trial: u64) -> Vec<f64> {
    let mut rng = trial_rng(seed, trial);
    (0..window.edges.len()).map(|_| uniform(&mut rng)).collect()
}

/// Per-hyperedge states, as indices into [`Window::states`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    states: Vec<usize>,
}

impl Configuration {
    pub fn from_indices(window: &Window, states: Vec<usize>) -> Result<Self> {
        if states.len() != window.edges.len() {
            return Err(Error::invalid("one state per window hyperedge is required"));
        }
        for (e, &s) in window.edges.iter().zip(&states) {
            if s >= window.states(e.vertices.len()).len() {
                return Err(Error::invalid("state index out of range"));
            }
        }
        Ok(Configuration { states })
    }

    /// Every hyperedge in the same state family member: `pick(k)`.
    pub fn uniform_state(window: &Window, pick: impl Fn(usize) -> NCPartition) -> Self {
        let states = window
            .edges
            .iter()
            .map(|e| {
                let k = e.vertices.len();
                let target = pick(k);
                window.states(k).iter().position(|p| *p == target).expect("state of matching arity")
            })
            .collect();
        Configuration { states }
    }

    pub fn indices(&self) -> &[usize] {
        &self.states
    }

    pub fn state<'w>(&self, window: &'w Window, edge: usize) -> &'w NCPartition {
        &window.states(window.edges[edge].vertices.len())[self.states[edge]]
    }
}

/// Draws a configuration from given uniforms (inverse CDF in canonical
/// partition order).
pub fn sample_from_uniforms(window: &Window, vectors: &[ProbabilityVector], uniforms: &[f64]) -> Result<Configuration> {
    let sampler = window.sampler(vectors)?;
    Ok(draw(window, &sampler, uniforms))
}

fn draw(window: &Window, sampler: &Sampler, uniforms: &[f64]) -> Configuration {
    let states = window.edges.iter().zip(uniforms).map(|(e, &u)| sampler.orbits[e.orbit].draw(u)).collect();
    Configuration { states }
}

pub fn sample(window: &Window, vectors: &[ProbabilityVector], seed: u64, trial: u64) -> Result<Configuration> {
    sample_from_uniforms(window, vectors, &trial_uniforms(window, seed, trial))
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }

    pub fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }
}

fn merge_edges(window: &Window, config: &Configuration, uf: &mut UnionFind, keep: impl Fn(&WindowEdge) -> bool) {
    for (e, &s) in window.edges.iter().zip(&config.states) {
        if !keep(e) {
            continue;
        }
        for &(a, b) in &window.merges[&e.vertices.len()][s] {
            uf.union(e.vertices[a], e.vertices[b]);
        }
    }
}

/// Open-cluster labels: vertices share a label iff joined by an open path.
/// Labels are the smallest vertex id in each cluster.
pub fn clusters(window: &Window, config: &Configuration) -> Vec<usize> {
    let n = window.vertex_count();
    let mut uf = UnionFind::new(n);
    merge_edges(window, config, &mut uf, |_| true);
    let mut label = vec![usize::MAX; n];
    (0..n)
        .map(|v| {
            let r = uf.find(v);
            if label[r] == usize::MAX {
                label[r] = v;
            }
            label[r]
        })
        .collect()
}

fn check_rect(window: &Window, rect: Rect) -> Result<()> {
    let b = window.bounds();
    let [w, h] = window.cell_extent();
    let inner = Rect { x0: b.x0 + w, y0: b.y0 + h, x1: b.x1 - w, y1: b.y1 - h };
    let ok = rect.x0 >= inner.x0 - 1e-9 && rect.x1 <= inner.x1 + 1e-9 && rect.y0 >= inner.y0 - 1e-9 && rect.y1 <= inner.y1 + 1e-9;
    if !ok || rect.x1 - rect.x0 <= 2.0 * w || rect.y1 - rect.y0 <= 2.0 * h {
        return Err(Error::invalid(format!(
            "rectangle {rect:?} must lie inside the window bounds {b:?} with a one-cell margin and span more than two cells"
        )));
    }
    Ok(())
}

/// Terminal masks of a rectangle crossing: `(start, end)` vertex flags.
fn terminals(window: &Window, rect: Rect, dir: Direction) -> (Vec<bool>, Vec<bool>) {
    let [w, h] = window.cell_extent();
    let start = window
        .positions
        .iter()
        .map(|&p| {
            rect.contains(p)
                && match dir {
                    Direction::Horizontal => p[0] <= rect.x0 + w,
                    Direction::Vertical => p[1] <= rect.y0 + h,
                }
        })
        .collect();
    let end = window
        .positions
        .iter()
        .map(|&p| {
            rect.contains(p)
                && match dir {
                    Direction::Horizontal => p[0] >= rect.x1 - w,
                    Direction::Vertical => p[1] >= rect.y1 - h,
                }
        })
        .collect();
    (start, end)
}

struct CrossingPlan {
    inside: Vec<bool>,
    start: Vec<usize>,
    end: Vec<usize>,
}

fn crossing_plan(window: &Window, rect: Rect, dir: Direction) -> Result<CrossingPlan> {
    check_rect(window, rect)?;
    let inside = window.edges.iter().map(|e| e.points.iter().all(|&p| rect.contains(p))).collect();
    let (s, t) = terminals(window, rect, dir);
    let pick = |m: Vec<bool>| m.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
    Ok(CrossingPlan { inside, start: pick(s), end: pick(t) })
}

fn crosses(window: &Window, config: &Configuration, plan: &CrossingPlan) -> bool {
    let n = window.vertex_count();
    let mut uf = UnionFind::new(n + 2);
    for &v in &plan.start {
        uf.union(n, v);
    }
    for &v in &plan.end {
        uf.union(n + 1, v);
    }
    for ((e, &s), &inside) in window.edges.iter().zip(&config.states).zip(&plan.inside) {
        if inside {
            for &(a, b) in &window.merges[&e.vertices.len()][s] {
                uf.union(e.vertices[a], e.vertices[b]);
            }
        }
    }
    uf.find(n) == uf.find(n + 1)
}

/// Whether an open path inside `rect` joins the two terminal bands
/// (one cell wide) on opposite sides of `rect`.
pub fn crossing(window: &Window, config: &Configuration, rect: Rect, dir: Direction) -> Result<bool> {
    let plan = crossing_plan(window, rect, dir)?;
    Ok(crosses(window, config, &plan))
}

/// Wilson score interval half-width at 95%.
pub fn wilson_half_width(hits: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = Z95 * Z95;
    Z95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossingStats {
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    pub ci95: f64,
    pub seed: u64,
}

impl CrossingStats {
    pub fn from_counts(hits: u64, trials: u64, seed: u64) -> Self {
        CrossingStats {
            trials,
            hits,
            estimate: if trials == 0 { 0.0 } else { hits as f64 / trials as f64 },
            ci95: wilson_half_width(hits, trials),
            seed,
        }
    }
}

/// Crossing probability over independent trials. The result depends only
/// on the inputs, not on how trials are scheduled across threads.
pub fn estimate_crossing(
    window: &Window,
    vectors: &[ProbabilityVector],
    rect: Rect,
    dir: Direction,
    trials: u64,
    seed: u64,
) -> Result<CrossingStats> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let sampler = window.sampler(vectors)?;
    let plan = crossing_plan(window, rect, dir)?;
    let hits = (0..trials)
        .into_par_iter()
        .map(|t| {
            let config = draw(window, &sampler, &trial_uniforms(window, seed, t));
            u64::from(crosses(window, &config, &plan))
        })
        .sum();
    Ok(CrossingStats::from_counts(hits, trials, seed))
}

/// Window over the dual lattice matching a torus window cell for cell.
pub fn dual_window(window: &Window, dual: &PeriodicMap) -> Result<Window> {
    if window.mode != BoundaryMode::Torus {
        return Err(Error::UnsupportedMode("dual configurations need a torus window".into()));
    }
    let w = Window::new(dual, window.i_range, window.j_range, BoundaryMode::Torus)?;
    if w.edges.len() != window.edges.len() {
        return Err(Error::invalid("dual lattice does not match the window's lattice"));
    }
    Ok(w)
}

/// The dual configuration: every hyperedge takes the dual of its state.
/// `dual_window` must come from [`dual_window`] with the dual lattice.
pub fn dual_config(window: &Window, config: &Configuration, dual_window: &Window) -> Result<Configuration> {
    if window.mode != BoundaryMode::Torus {
        return Err(Error::UnsupportedMode("dual configurations need a torus window".into()));
    }
    if dual_window.edges.len() != window.edges.len() {
        return Err(Error::invalid("windows do not correspond"));
    }
    let states = window
        .edges
        .iter()
        .zip(&config.states)
        .map(|(e, &s)| {
            let k = e.vertices.len();
            let d = window.states(k)[s].dual();
            dual_window.states(k).iter().position(|p| *p == d).expect("dual has the same arity")
        })
        .collect();
    Ok(Configuration { states })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailRow {
    /// Radius in cells.
    pub r: f64,
    pub count: u64,
    pub fraction: f64,
    pub ci95: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurveyResult {
    pub trials: u64,
    pub seed: u64,
    /// Cluster size of the reference vertex to number of trials.
    pub size_histogram: BTreeMap<usize, u64>,
    pub tail: Vec<TailRow>,
}

/// Cluster statistics of a reference vertex (quotient vertex 0 in the
/// window's central cell). The radius of a cluster is the largest plane
/// distance from the reference vertex, in units of the first basis vector.
pub fn cluster_survey(
    window: &Window,
    vectors: &[ProbabilityVector],
    radii: &[f64],
    trials: u64,
    seed: u64,
) -> Result<SurveyResult> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let sampler = window.sampler(vectors)?;
    let centre = [
        window.i_range.0 + (window.i_range.1 - window.i_range.0) / 2,
        window.j_range.0 + (window.j_range.1 - window.j_range.0) / 2,
    ];
    let reference = window.vertex_at(0, centre).expect("centre cell lies in the window");
    let unit = window.view.basis[0][0].hypot(window.view.basis[0][1]);
    let origin = window.positions[reference];
    let b = window.view.basis;
    let (ni, nj) = ((window.i_range.1 - window.i_range.0) as f64, (window.j_range.1 - window.j_range.0) as f64);
    let period = [[b[0][0] * ni, b[0][1] * ni], [b[1][0] * nj, b[1][1] * nj]];
    let distance = |p: Point| -> f64 {
        let d = [p[0] - origin[0], p[1] - origin[1]];
        match window.mode {
            BoundaryMode::Open => d[0].hypot(d[1]),
            BoundaryMode::Torus => {
                let mut best = f64::INFINITY;
                for a in -1..=1 {
                    for c in -1..=1 {
                        let x = d[0] + a as f64 * period[0][0] + c as f64 * period[1][0];
                        let y = d[1] + a as f64 * period[0][1] + c as f64 * period[1][1];
                        best = best.min(x.hypot(y));
                    }
                }
                best
            }
        }
    };
    if window.mode == BoundaryMode::Open {
        let max_r = radii.iter().copied().fold(0.0, f64::max) * unit;
        let bounds = window.bounds();
        let room = (origin[0] - bounds.x0).min(bounds.x1 - origin[0]).min(origin[1] - bounds.y0).min(bounds.y1 - origin[1]);
        if room < max_r {
            return Err(Error::invalid(format!(
                "window leaves only {:.2} cells around the reference vertex, less than the largest radius",
                room / unit
            )));
        }
    }
    let per_trial: Vec<(usize, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let config = draw(window, &sampler, &trial_uniforms(window, seed, t));
            let mut uf = UnionFind::new(window.vertex_count());
            merge_edges(window, &config, &mut uf, |_| true);
            let root = uf.find(reference);
            let mut size = 0;
            let mut radius: f64 = 0.0;
            for v in 0..window.vertex_count() {
                if uf.find(v) == root {
                    size += 1;
                    radius = radius.max(distance(window.positions[v]));
                }
            }
            (size, radius / unit)
        })
        .collect();
    let mut size_histogram = BTreeMap::new();
    for &(s, _) in &per_trial {
        *size_histogram.entry(s).or_insert(0) += 1;
    }
    let tail = radii
        .iter()
        .map(|&r| {
            let count = per_trial.iter().filter(|&&(_, rad)| rad >= r - 1e-9).count() as u64;
            TailRow { r, count, fraction: count as f64 / trials as f64, ci95: wilson_half_width(count, trials) }
        })
        .collect();
    Ok(SurveyResult { trials, seed, size_histogram, tail })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub size: usize,
    pub param: f64,
    pub stats: CrossingStats,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanTable {
    pub seed: u64,
    pub rows: Vec<ScanRow>,
    /// Per size, the parameter where the monotone fit crosses 1/2.
    pub crossing_points: Vec<(usize, Option<f64>)>,
}

/// Pool-adjacent-violators fit of a non-decreasing sequence.
pub fn isotonic(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, f64, usize)> = Vec::new();
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let (v2, w2, n2) = blocks[blocks.len() - 1];
            let (v1, w1, n1) = blocks[blocks.len() - 2];
            if v1 <= v2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            blocks.push(((v1 * w1 + v2 * w2) / (w1 + w2), w1 + w2, n1 + n2));
        }
    }
    blocks.into_iter().flat_map(|(v, _, n)| std::iter::repeat_n(v, n)).collect()
}

/// Linear interpolation of where a non-decreasing fit reaches 1/2.
pub fn crossing_point(params: &[f64], estimates: &[f64]) -> Option<f64> {
    let fit = isotonic(estimates, &vec![1.0; estimates.len()]);
    for i in 0..fit.len().saturating_sub(1) {
        let (a, b) = (fit[i], fit[i + 1]);
        if a <= 0.5 && b >= 0.5 && b > a {
            return Some(params[i] + (0.5 - a) / (b - a) * (params[i + 1] - params[i]));
        }
    }
    None
}

/// Square (times `aspect` in height) of side `size` cells, anchored at the
/// origin.
pub fn scan_rect(lattice: &PeriodicMap, size: usize, aspect: f64) -> Rect {
    let b = lattice.basis();
    let unit = b[0][0].hypot(b[0][1]);
    Rect::new(0.0, 0.0, size as f64 * unit, aspect * size as f64 * unit)
}

/// Crossing probability over a grid of parameters for several sizes. All
/// parameters at one size share the seed, so neighbouring estimates use
/// common random numbers.
#[allow(clippy::too_many_arguments)]
pub fn threshold_scan(
    lattice: &PeriodicMap,
    sizes: &[usize],
    family: &dyn Fn(f64) -> Result<Vec<ProbabilityVector>>,
    aspect: f64,
    grid: &[f64],
    dir: Direction,
    trials: u64,
    seed: u64,
) -> Result<ScanTable> {
    let mut rows = Vec::new();
    let mut crossing_points = Vec::new();
    let vectors: Vec<Vec<ProbabilityVector>> = grid.iter().map(|&p| family(p)).collect::<Result<_>>()?;
    for &size in sizes {
        let rect = scan_rect(lattice, size, aspect);
        let window = Window::around_rect(lattice, rect, 2, BoundaryMode::Open)?;
        let mut estimates = Vec::new();
        for (&param, v) in grid.iter().zip(&vectors) {
            let stats = estimate_crossing(&window, v, rect, dir, trials, seed)?;
            estimates.push(stats.estimate);
            rows.push(ScanRow { size, param, stats });
        }
        crossing_points.push((size, crossing_point(grid, &estimates)));
    }
    Ok(ScanTable { seed, rows, crossing_points })
}

impl ScanTable {
    /// CSV with a `#` header recording the seed; crossing points follow as
    /// `#` comment lines.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# seed={}\nL,param,trials,hits,estimate,ci95\n", self.seed);
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6},{:.6}",
                r.size, r.param, r.stats.trials, r.stats.hits, r.stats.estimate, r.stats.ci95
            );
        }
        for (size, point) in &self.crossing_points {
            match point {
                Some(p) => {
                    let _ = writeln!(out, "# crossing L={size} param={p:.6}");
                }
                None => {
                    let _ = writeln!(out, "# crossing L={size} param=none");
                }
            }
        }
        out
    }
}

impl SurveyResult {
    pub fn to_csv(&self) -> String {
        let mut out = format!("# seed={}\nr,count,fraction\n", self.seed);
        for row in &self.tail {
            let _ = writeln!(out, "{},{},{:.6}", row.r, row.count, row.fraction);
        }
        out
    }
}

/// Builds a rayon pool with `threads` workers (0 means rayon's default).
pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start thread pool: {e}")))
}
