//! Periodic plane hyperlattices as properly 3-coloured cubic maps on the torus.
//!
//! A hyperlattice is given as a hypergraph: vertices with plane coordinates in
//! a fundamental domain, and hyperedges as cyclic lists of incidences
//! `(vertex, cell offset)`. Each incidence contributes two map vertices (its
//! "next" and "prev" corners) and each map vertex carries three darts, one per
//! incident map edge:
//!
//! * black-grey: between the two corners of one incidence,
//! * grey-white: along a polygon side, between consecutive incidences,
//! * black-white: between neighbouring incidences in the angular order at a
//!   vertex.
//!
//! Black faces are hypergraph vertices, grey faces hyperedges and white faces
//! the faces of the hypergraph (vertices of the dual). Taking the dual only
//! swaps black and white.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ncpart::{enumerate_nc, NCPartition, ProbabilityVector};
use crate::szgen::{Generator, GeneratorMode};

pub type Cell = [i32; 2];
pub type Point = [f64; 2];

const ANGLE_TOL: f64 = 1e-9;
const GEOM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaceColor {
    Black,
    White,
    Grey,
}

impl FaceColor {
    fn swapped(self) -> Self {
        match self {
            FaceColor::Black => FaceColor::White,
            FaceColor::White => FaceColor::Black,
            FaceColor::Grey => FaceColor::Grey,
        }
    }
}

/// Vertex or hyperedge reference in lattice files: either a number or a name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeKey {
    Num(i64),
    Name(String),
}

impl fmt::Display for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKey::Num(n) => write!(f, "{n}"),
            NodeKey::Name(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexSpec {
    pub id: NodeKey,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncidenceSpec {
    pub v: NodeKey,
    #[serde(default)]
    pub dx: i32,
    #[serde(default)]
    pub dy: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperedgeSpec {
    #[serde(default)]
    pub orbit: usize,
    pub incidences: Vec<IncidenceSpec>,
}

/// The lattice file format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub basis: [Point; 2],
    pub vertices: Vec<VertexSpec>,
    pub hyperedges: Vec<HyperedgeSpec>,
}

impl LatticeSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<PeriodicMap> {
        build_from_hypergraph(self)
    }
}

/// A face of the map: a φ-orbit of darts.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub color: FaceColor,
    /// Darts in traversal order, starting at the anchor dart.
    pub darts: Vec<usize>,
    /// Representative point, in the frame of the anchor dart's cell.
    pub point: Point,
}

/// Labelling of a grey face: `anchor` is a dart of the face whose edge borders
/// the label-0 black face; labels increase along the face traversal when
/// `forward`, against it otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GreyLabel {
    pub face: usize,
    pub anchor: usize,
    pub forward: bool,
    pub orbit: usize,
}

/// A properly 3-coloured cubic map on the torus `R^2 / L`.
///
/// `shift[d]` is the cell of `alpha[d]`'s map vertex minus the cell of `d`'s.
/// Faces are orbits of `phi = sigma ∘ alpha`; every dart belongs to the face
/// on its right.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicMap {
    basis: [Point; 2],
    alpha: Vec<usize>,
    sigma: Vec<usize>,
    shift: Vec<Cell>,
    faces: Vec<Face>,
    face_of: Vec<usize>,
    /// Cell of each dart's map vertex relative to its face's anchor dart.
    dart_cell: Vec<Cell>,
    grey: Vec<GreyLabel>,
}

fn add(a: Cell, b: Cell) -> Cell {
    [a[0] + b[0], a[1] + b[1]]
}

fn sub(a: Cell, b: Cell) -> Cell {
    [a[0] - b[0], a[1] - b[1]]
}

fn lift(basis: &[Point; 2], p: Point, c: Cell) -> Point {
    [
        p[0] + c[0] as f64 * basis[0][0] + c[1] as f64 * basis[1][0],
        p[1] + c[0] as f64 * basis[0][1] + c[1] as f64 * basis[1][1],
    ]
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn minus(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl PeriodicMap {
    /// Assembles a map from its permutations, checking the structural
    /// invariants and tracing faces.
    fn assemble(
        basis: [Point; 2],
        alpha: Vec<usize>,
        sigma: Vec<usize>,
        shift: Vec<Cell>,
        right_color: &[FaceColor],
    ) -> Result<(Self, Vec<usize>)> {
        let n = alpha.len();
        if n == 0 || !n.is_multiple_of(6) {
            return Err(Error::invalid("dart count must be a positive multiple of 6"));
        }
        for d in 0..n {
            if alpha[d] == d || alpha[alpha[d]] != d {
                return Err(Error::invalid(format!("edge involution broken at dart {d}")));
            }
            if add(shift[d], shift[alpha[d]]) != [0, 0] {
                return Err(Error::invalid(format!("edge offsets not antisymmetric at dart {d}")));
            }
            if sigma[d] == d || sigma[sigma[sigma[d]]] != d {
                return Err(Error::invalid(format!("map vertex at dart {d} is not cubic")));
            }
        }
        // faces
        let mut face_of = vec![usize::MAX; n];
        let mut dart_cell = vec![[0, 0]; n];
        let mut faces = Vec::new();
        for start in 0..n {
            if face_of[start] != usize::MAX {
                continue;
            }
            let id = faces.len();
            let color = right_color[start];
            let mut darts = Vec::new();
            let mut cell = [0, 0];
            let mut d = start;
            loop {
                if right_color[d] != color {
                    return Err(Error::invalid("face boundary carries two colours"));
                }
                face_of[d] = id;
                dart_cell[d] = cell;
                darts.push(d);
                cell = add(cell, shift[d]);
                d = sigma[alpha[d]];
                if d == start {
                    break;
                }
            }
            if cell != [0, 0] {
                return Err(Error::invalid(format!(
                    "unbounded face: boundary offsets sum to {cell:?}, not zero"
                )));
            }
            faces.push(Face { color, darts, point: [0.0, 0.0] });
        }
        // proper colouring around every map vertex
        for d in 0..n {
            let cs = [
                faces[face_of[d]].color,
                faces[face_of[sigma[d]]].color,
                faces[face_of[sigma[sigma[d]]]].color,
            ];
            if cs[0] == cs[1] || cs[1] == cs[2] || cs[0] == cs[2] {
                return Err(Error::invalid("faces around a map vertex are not properly coloured"));
            }
        }
        let map = PeriodicMap {
            basis,
            alpha,
            sigma,
            shift,
            faces,
            face_of,
            dart_cell,
            grey: Vec::new(),
        };
        let v = n / 3;
        let e = n / 2;
        let f = map.faces.len();
        if v as i64 - e as i64 + f as i64 != 0 {
            return Err(Error::embedding(format!(
                "Euler characteristic V - E + F = {v} - {e} + {f} is not 0; the drawing is not a torus map"
            )));
        }
        map.check_connected()?;
        let order: Vec<usize> = (0..map.faces.len()).collect();
        Ok((map, order))
    }

    /// Connected quotient, and a lift that is connected (the cycle offsets
    /// generate all of Z^2).
    fn check_connected(&self) -> Result<()> {
        let n = self.alpha.len();
        let mut pot: Vec<Option<Cell>> = vec![None; n];
        pot[0] = Some([0, 0]);
        let mut queue = VecDeque::from([0usize]);
        let mut cycles: Vec<Cell> = Vec::new();
        while let Some(d) = queue.pop_front() {
            let here = pot[d].expect("queued darts have potentials");
            let step = [(self.sigma[d], here), (self.alpha[d], add(here, self.shift[d]))];
            for (next, cell) in step {
                match pot[next] {
                    None => {
                        pot[next] = Some(cell);
                        queue.push_back(next);
                    }
                    Some(existing) if existing != cell => cycles.push(sub(cell, existing)),
                    Some(_) => {}
                }
            }
        }
        if pot.iter().any(Option::is_none) {
            return Err(Error::invalid("quotient map is disconnected"));
        }
        let mut index = 0i64;
        for (i, a) in cycles.iter().enumerate() {
            for b in &cycles[i + 1..] {
                let det = a[0] as i64 * b[1] as i64 - a[1] as i64 * b[0] as i64;
                index = gcd(index, det);
            }
        }
        if index != 1 {
            return Err(Error::invalid(format!(
                "lifted map is not connected over the lattice (cycle offsets generate a subgroup of index {})",
                if index == 0 { "infinity".to_string() } else { index.to_string() }
            )));
        }
        Ok(())
    }

    pub fn basis(&self) -> [Point; 2] {
        self.basis
    }

    pub fn dart_count(&self) -> usize {
        self.alpha.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.alpha.len() / 3
    }

    pub fn edge_count(&self) -> usize {
        self.alpha.len() / 2
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn alpha(&self, d: usize) -> usize {
        self.alpha[d]
    }

    pub fn sigma(&self, d: usize) -> usize {
        self.sigma[d]
    }

    pub fn phi(&self, d: usize) -> usize {
        self.sigma[self.alpha[d]]
    }

    pub fn shift(&self, d: usize) -> Cell {
        self.shift[d]
    }

    pub fn face_of(&self, d: usize) -> usize {
        self.face_of[d]
    }

    pub fn grey_labels(&self) -> &[GreyLabel] {
        &self.grey
    }

    pub fn count(&self, color: FaceColor) -> usize {
        self.faces.iter().filter(|f| f.color == color).count()
    }

    /// Face sizes (number of map edges on the boundary) of one colour, sorted.
    pub fn degrees(&self, color: FaceColor) -> Vec<usize> {
        let mut d: Vec<usize> = self
            .faces
            .iter()
            .filter(|f| f.color == color)
            .map(|f| f.darts.len())
            .collect();
        d.sort_unstable();
        d
    }

    /// Checks cubicity, proper colouring, grey faces alternating black and
    /// white neighbours, and the torus Euler relation.
    pub fn validate(&self) -> Result<()> {
        let colors: Vec<FaceColor> = (0..self.alpha.len()).map(|d| self.faces[self.face_of[d]].color).collect();
        Self::assemble(self.basis, self.alpha.clone(), self.sigma.clone(), self.shift.clone(), &colors)?;
        for label in &self.grey {
            let face = &self.faces[label.face];
            for (i, &d) in face.darts.iter().enumerate() {
                let across = self.faces[self.face_of[self.alpha[d]]].color;
                let next = self.faces[self.face_of[self.alpha[face.darts[(i + 1) % face.darts.len()]]]].color;
                if across == FaceColor::Grey || across == next {
                    return Err(Error::invalid("grey face does not alternate black and white neighbours"));
                }
            }
        }
        Ok(())
    }

    /// Exchange black and white. Darts and permutations are kept; each grey
    /// label anchor moves one edge on, so dual label `j` is the face between
    /// labels `j` and `j + 1`. Dualising twice rotates labels by one, matching
    /// `NCPartition::dual` applied twice.
    pub fn compute_dual(&self) -> PeriodicMap {
        let mut dual = self.clone();
        for f in &mut dual.faces {
            f.color = f.color.swapped();
        }
        for label in &mut dual.grey {
            label.anchor = self.label_walk(label)[1];
        }
        dual
    }

    /// Darts of a grey face in label order, starting at its anchor.
    fn label_walk(&self, label: &GreyLabel) -> Vec<usize> {
        let darts = &self.faces[label.face].darts;
        let start = darts.iter().position(|&d| d == label.anchor).expect("anchor lies on its face");
        let len = darts.len();
        (0..len)
            .map(|i| {
                if label.forward {
                    darts[(start + i) % len]
                } else {
                    darts[(start + len - i) % len]
                }
            })
            .collect()
    }

    /// For a grey face: the darts whose edges border black faces, in label
    /// order (entry `j` is label `j`). The anchor edge starts the count; if it
    /// borders a white face, labelling starts at the next edge.
    fn labelled_darts(&self, label: &GreyLabel, color: FaceColor) -> Vec<usize> {
        let walk = self.label_walk(label);
        let borders = |d: usize| self.faces[self.face_of[self.alpha[d]]].color;
        let first_black = walk
            .iter()
            .position(|&d| borders(d) == FaceColor::Black)
            .expect("grey faces touch black faces");
        let rotated: Vec<usize> = walk[first_black..].iter().chain(&walk[..first_black]).copied().collect();
        rotated.into_iter().filter(|&d| borders(d) == color).collect()
    }

    /// Cell of the anchor of the face across `d`'s edge, in the frame of
    /// `d`'s own face.
    fn across_offset(&self, d: usize) -> Cell {
        let a = self.alpha[d];
        sub(add(self.dart_cell[d], self.shift[d]), self.dart_cell[a])
    }

    /// The hypergraph whose vertices are the black faces and whose
    /// hyperedges are the grey faces.
    pub fn hyper_view(&self) -> HyperView {
        let mut vertex_index = vec![usize::MAX; self.faces.len()];
        let mut vertices = Vec::new();
        for (i, f) in self.faces.iter().enumerate() {
            if f.color == FaceColor::Black {
                vertex_index[i] = vertices.len();
                vertices.push(ViewVertex { face: i, point: f.point });
            }
        }
        let hyperedges = self
            .grey
            .iter()
            .map(|label| {
                let incidences = self
                    .labelled_darts(label, FaceColor::Black)
                    .into_iter()
                    .map(|d| Incidence {
                        vertex: vertex_index[self.face_of[self.alpha[d]]],
                        offset: self.across_offset(d),
                    })
                    .collect();
                ViewEdge { face: label.face, orbit: label.orbit, incidences }
            })
            .collect();
        HyperView { basis: self.basis, vertices, hyperedges }
    }
}

/// A hypergraph vertex in a [`HyperView`].
#[derive(Clone, Debug, PartialEq)]
pub struct ViewVertex {
    pub face: usize,
    pub point: Point,
}

/// A vertex of a hyperedge, as an offset from the hyperedge's own cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Incidence {
    pub vertex: usize,
    pub offset: Cell,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ViewEdge {
    pub face: usize,
    pub orbit: usize,
    pub incidences: Vec<Incidence>,
}

/// Quotient hypergraph of a map: black faces as vertices, grey faces as
/// hyperedges with incidences in label order.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperView {
    pub basis: [Point; 2],
    pub vertices: Vec<ViewVertex>,
    pub hyperedges: Vec<ViewEdge>,
}

impl HyperView {
    /// Number of distinct orbit slots used.
    pub fn orbit_count(&self) -> usize {
        self.hyperedges.iter().map(|e| e.orbit + 1).max().unwrap_or(0)
    }

    pub fn position(&self, vertex: usize, cell: Cell) -> Point {
        lift(&self.basis, self.vertices[vertex].point, cell)
    }
}

struct Polygon {
    vertices: Vec<usize>,
    offsets: Vec<Cell>,
    points: Vec<Point>,
    ccw: bool,
}

fn angle(v: Point) -> f64 {
    let a = v[1].atan2(v[0]);
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

/// Segments `p0-p1` and `q0-q1` overlap in more than shared endpoints.
fn segments_conflict(p0: Point, p1: Point, q0: Point, q1: Point) -> bool {
    let same = |a: Point, b: Point| (a[0] - b[0]).abs() < GEOM_TOL && (a[1] - b[1]).abs() < GEOM_TOL;
    if (same(p0, q0) && same(p1, q1)) || (same(p0, q1) && same(p1, q0)) {
        return false; // parallel copies of one side, as in multi-bonds
    }
    let r = minus(p1, p0);
    let s = minus(q1, q0);
    let denom = cross(r, s);
    let qp = minus(q0, p0);
    let scale = (r[0].abs() + r[1].abs()) * (s[0].abs() + s[1].abs());
    if denom.abs() <= GEOM_TOL * scale.max(1.0) {
        // parallel: conflict only if collinear with overlapping interiors
        if cross(qp, r).abs() > GEOM_TOL * (r[0].abs() + r[1].abs()).max(1.0) {
            return false;
        }
        let rr = r[0] * r[0] + r[1] * r[1];
        let t0 = (qp[0] * r[0] + qp[1] * r[1]) / rr;
        let t1 = t0 + (s[0] * r[0] + s[1] * r[1]) / rr;
        let (lo, hi) = if t0 < t1 { (t0, t1) } else { (t1, t0) };
        return hi.min(1.0) - lo.max(0.0) > GEOM_TOL;
    }
    let t = cross(qp, s) / denom;
    let u = cross(qp, r) / denom;
    let inside = |x: f64| x > GEOM_TOL && x < 1.0 - GEOM_TOL;
    let on = |x: f64| x > -GEOM_TOL && x < 1.0 + GEOM_TOL;
    (inside(t) && on(u)) || (inside(u) && on(t))
}

fn strictly_inside(poly: &[Point], q: Point) -> bool {
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let ab = minus(b, a);
        let aq = minus(q, a);
        if cross(ab, aq).abs() < GEOM_TOL * (ab[0].abs() + ab[1].abs()).max(1.0) {
            let t = (aq[0] * ab[0] + aq[1] * ab[1]) / (ab[0] * ab[0] + ab[1] * ab[1]);
            if (-GEOM_TOL..=1.0 + GEOM_TOL).contains(&t) {
                return false; // on the boundary
            }
        }
    }
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a[1] > q[1]) != (b[1] > q[1]) {
            let x = a[0] + (q[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if q[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Builds the 3-coloured cubic map of a hyperlattice given as a hypergraph.
///
/// The rotation at each vertex comes from the angular order of the incident
/// polygon corners (ties broken by incidence order). Polygons must be
/// non-crossing with disjoint interiors.
pub fn build_from_hypergraph(spec: &LatticeSpec) -> Result<PeriodicMap> {
    let basis = spec.basis;
    let det = cross(basis[0], basis[1]);
    if !(det.abs() > 1e-12) {
        return Err(Error::invalid("basis vectors are linearly dependent"));
    }
    if spec.vertices.is_empty() || spec.hyperedges.is_empty() {
        return Err(Error::invalid("lattice needs at least one vertex and one hyperedge"));
    }
    let mut ids = HashMap::new();
    for (i, v) in spec.vertices.iter().enumerate() {
        if !(v.x.is_finite() && v.y.is_finite()) {
            return Err(Error::invalid(format!("vertex {} has non-finite coordinates", v.id)));
        }
        if ids.insert(v.id.clone(), i).is_some() {
            return Err(Error::invalid(format!("duplicate vertex id {}", v.id)));
        }
    }
    let pos: Vec<Point> = spec.vertices.iter().map(|v| [v.x, v.y]).collect();

    let mut polys = Vec::with_capacity(spec.hyperedges.len());
    for (h, e) in spec.hyperedges.iter().enumerate() {
        if e.incidences.len() < 2 {
            return Err(Error::invalid(format!("hyperedge {h} needs at least 2 incidences")));
        }
        let mut vertices = Vec::new();
        let mut offsets = Vec::new();
        for inc in &e.incidences {
            let v = *ids
                .get(&inc.v)
                .ok_or_else(|| Error::invalid(format!("hyperedge {h} references unknown vertex {}", inc.v)))?;
            vertices.push(v);
            offsets.push([inc.dx, inc.dy]);
        }
        let points: Vec<Point> = vertices.iter().zip(&offsets).map(|(&v, &o)| lift(&basis, pos[v], o)).collect();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let d = minus(points[i], points[j]);
                if d[0].abs() < GEOM_TOL && d[1].abs() < GEOM_TOL {
                    return Err(Error::embedding(format!(
                        "hyperedge {h} meets the same lifted vertex twice"
                    )));
                }
            }
        }
        let area: f64 = (0..points.len())
            .map(|i| cross(points[i], points[(i + 1) % points.len()]))
            .sum::<f64>()
            / 2.0;
        if points.len() >= 3 && area.abs() < GEOM_TOL {
            return Err(Error::embedding(format!("hyperedge {h} is a degenerate polygon")));
        }
        polys.push(Polygon { vertices, offsets, points, ccw: area >= 0.0 });
    }

    check_geometry(&basis, &pos, &polys)?;

    // Incidence numbering: global index g for (hyperedge, position).
    let mut first = Vec::with_capacity(polys.len());
    let mut total = 0;
    for p in &polys {
        first.push(total);
        total += p.vertices.len();
    }
    let step = |p: &Polygon, j: usize, forward: bool| -> usize {
        let d = p.vertices.len();
        if forward == p.ccw {
            (j + 1) % d
        } else {
            (j + d - 1) % d
        }
    };

    // Wedges: (vertex, start angle, width, incidence).
    let mut at_vertex: Vec<Vec<(f64, f64, usize)>> = vec![Vec::new(); pos.len()];
    for (h, p) in polys.iter().enumerate() {
        for j in 0..p.vertices.len() {
            let nj = step(p, j, true);
            let pj = step(p, j, false);
            let to_next = minus(p.points[nj], p.points[j]);
            let to_prev = minus(p.points[pj], p.points[j]);
            let start = angle(to_next);
            let mut width = (angle(to_prev) - start).rem_euclid(TAU);
            if width > TAU - ANGLE_TOL {
                width = 0.0;
            }
            at_vertex[p.vertices[j]].push((start, width, first[h] + j));
        }
    }
    let mut rot_next = vec![usize::MAX; total];
    for (v, wedges) in at_vertex.iter_mut().enumerate() {
        if wedges.is_empty() {
            return Err(Error::invalid(format!("vertex {} has no hyperedge", spec.vertices[v].id)));
        }
        wedges.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .expect("finite angles")
                .then(a.1.partial_cmp(&b.1).expect("finite widths"))
                .then(a.2.cmp(&b.2))
        });
        let m = wedges.len();
        for i in 0..m {
            let (start, width, g) = wedges[i];
            let (next_start, _, ng) = wedges[(i + 1) % m];
            let gap = if m == 1 {
                TAU - width
            } else {
                let raw = (next_start - start).rem_euclid(TAU);
                let raw = if raw < ANGLE_TOL && i + 1 == m { TAU } else { raw };
                raw - width
            };
            if gap < -ANGLE_TOL {
                return Err(Error::embedding(format!(
                    "hyperedges overlap at vertex {}",
                    spec.vertices[v].id
                )));
            }
            rot_next[g] = ng;
        }
    }

    // Darts: (g, side, kind) with side 0 = next corner, 1 = prev corner and
    // kind 0 = black-grey, 1 = grey-white, 2 = black-white.
    let dart = |g: usize, side: usize, kind: usize| (g * 2 + side) * 3 + kind;
    let n = total * 6;
    let mut alpha = vec![usize::MAX; n];
    let mut sigma = vec![usize::MAX; n];
    let mut shift = vec![[0, 0]; n];
    let mut right = vec![FaceColor::Grey; n];
    let mut owner = vec![(0usize, 0usize); total];
    for (h, p) in polys.iter().enumerate() {
        for j in 0..p.vertices.len() {
            owner[first[h] + j] = (h, j);
        }
    }
    let link = |alpha: &mut Vec<usize>, shift: &mut Vec<Cell>, a: usize, b: usize, s: Cell| {
        alpha[a] = b;
        alpha[b] = a;
        shift[a] = s;
        shift[b] = [-s[0], -s[1]];
    };
    for (h, p) in polys.iter().enumerate() {
        for j in 0..p.vertices.len() {
            let g = first[h] + j;
            let nj = step(p, j, true);
            let gn = first[h] + nj;
            link(&mut alpha, &mut shift, dart(g, 0, 0), dart(g, 1, 0), [0, 0]);
            link(&mut alpha, &mut shift, dart(g, 0, 1), dart(gn, 1, 1), sub(p.offsets[nj], p.offsets[j]));
            // both corners sit at the same lifted vertex
            link(&mut alpha, &mut shift, dart(g, 1, 2), dart(rot_next[g], 0, 2), [0, 0]);
            // next corner: grey-white -> black-grey -> black-white (ccw)
            sigma[dart(g, 0, 1)] = dart(g, 0, 0);
            sigma[dart(g, 0, 0)] = dart(g, 0, 2);
            sigma[dart(g, 0, 2)] = dart(g, 0, 1);
            // prev corner: grey-white -> black-white -> black-grey (ccw)
            sigma[dart(g, 1, 1)] = dart(g, 1, 2);
            sigma[dart(g, 1, 2)] = dart(g, 1, 0);
            sigma[dart(g, 1, 0)] = dart(g, 1, 1);
            right[dart(g, 0, 0)] = FaceColor::Grey;
            right[dart(g, 0, 2)] = FaceColor::Black;
            right[dart(g, 0, 1)] = FaceColor::White;
            right[dart(g, 1, 2)] = FaceColor::White;
            right[dart(g, 1, 0)] = FaceColor::Black;
            right[dart(g, 1, 1)] = FaceColor::Grey;
        }
    }
    let (mut map, _) = PeriodicMap::assemble(basis, alpha, sigma, shift, &right)?;

    // Face points: black faces sit at their vertex; others at the centroid of
    // the black faces around them.
    let corner_vertex = |d: usize| polys[owner[d / 6].0].vertices[owner[d / 6].1];
    for f in map.faces.iter_mut() {
        if f.color == FaceColor::Black {
            f.point = pos[corner_vertex(f.darts[0])];
        }
    }
    let black_points: Vec<Point> = map.faces.iter().map(|f| f.point).collect();
    set_centroids(&mut map, &black_points, corner_vertex, &pos);

    map.grey = polys
        .iter()
        .enumerate()
        .map(|(h, p)| {
            let anchor = dart(first[h], 0, 0);
            GreyLabel {
                face: map.face_of[anchor],
                anchor,
                // grey faces are traversed clockwise
                forward: !p.ccw,
                orbit: spec.hyperedges[h].orbit,
            }
        })
        .collect();
    let _ = black_points;
    Ok(map)
}

/// Sets white and grey face points to the centroid of the surrounding
/// hypergraph vertices, lifted into each face's frame.
fn set_centroids(map: &mut PeriodicMap, _black: &[Point], corner_vertex: impl Fn(usize) -> usize, pos: &[Point]) {
    let basis = map.basis;
    for fi in 0..map.faces.len() {
        if map.faces[fi].color == FaceColor::Black {
            continue;
        }
        let mut seen = Vec::new();
        let mut acc = [0.0, 0.0];
        for &d in &map.faces[fi].darts {
            let corner = d / 3;
            if seen.contains(&corner) {
                continue;
            }
            seen.push(corner);
            let p = lift(&basis, pos[corner_vertex(d)], map.dart_cell[d]);
            acc[0] += p[0];
            acc[1] += p[1];
        }
        let m = seen.len() as f64;
        map.faces[fi].point = [acc[0] / m, acc[1] / m];
    }
}

fn check_geometry(basis: &[Point; 2], pos: &[Point], polys: &[Polygon]) -> Result<()> {
    // neighbourhood radius in cells: enough to reach every polygon that can
    // touch one anchored at the origin
    let reach = polys
        .iter()
        .flat_map(|p| p.offsets.iter())
        .map(|o| o[0].abs().max(o[1].abs()))
        .max()
        .unwrap_or(0)
        + 2;
    let extent_cells = {
        // vertex coordinates may sit outside the fundamental domain
        let inv_det = 1.0 / cross(basis[0], basis[1]);
        pos.iter()
            .map(|p| {
                let a = cross(*p, basis[1]) * inv_det;
                let b = cross(basis[0], *p) * inv_det;
                a.abs().max(b.abs()).ceil() as i32
            })
            .max()
            .unwrap_or(0)
    };
    let radius = 2 * reach + 2 * extent_cells;
    for (h, p) in polys.iter().enumerate() {
        let d = p.points.len();
        for (f, q) in polys.iter().enumerate() {
            for cx in -radius..=radius {
                for cy in -radius..=radius {
                    let c = [cx, cy];
                    if f == h && c == [0, 0] {
                        // own sides: only non-adjacent pairs can conflict
                        if d >= 4 {
                            for i in 0..d {
                                for j in i + 2..d {
                                    if i == 0 && j == d - 1 {
                                        continue;
                                    }
                                    if segments_conflict(p.points[i], p.points[(i + 1) % d], p.points[j], p.points[(j + 1) % d]) {
                                        return Err(Error::embedding(format!("hyperedge {h} is self-crossing")));
                                    }
                                }
                            }
                        }
                        continue;
                    }
                    let shifted: Vec<Point> = q.points.iter().map(|&pt| lift(basis, pt, c)).collect();
                    let e = shifted.len();
                    for i in 0..d {
                        for j in 0..e {
                            if segments_conflict(p.points[i], p.points[(i + 1) % d], shifted[j], shifted[(j + 1) % e]) {
                                return Err(Error::embedding(format!(
                                    "hyperedges {h} and {f} (shifted by {c:?}) cross"
                                )));
                            }
                        }
                    }
                    if d >= 3 {
                        for &pt in &shifted {
                            if strictly_inside(&p.points, pt) {
                                return Err(Error::embedding(format!(
                                    "a vertex of hyperedge {f} lies inside hyperedge {h}"
                                )));
                            }
                        }
                    }
                }
            }
        }
        if d >= 3 {
            for (v, &vp) in pos.iter().enumerate() {
                for cx in -radius..=radius {
                    for cy in -radius..=radius {
                        let pt = lift(basis, vp, [cx, cy]);
                        if strictly_inside(&p.points, pt) {
                            return Err(Error::embedding(format!("vertex {v} lies inside hyperedge {h}")));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// How face colours correspond under an isomorphism.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColorPolicy {
    Identity,
    SwapBlackWhite,
}

/// A lattice-compatible map isomorphism: dart bijection commuting with the
/// edge involution and (up to orientation) the vertex rotation, with linear
/// part `linear` acting on lattice coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isomorphism {
    pub linear: [[i32; 2]; 2],
    pub darts: Vec<usize>,
    /// Cell translation of each dart's map vertex.
    pub translation: Vec<Cell>,
    pub policy: ColorPolicy,
    pub orientation_preserving: bool,
}

impl Isomorphism {
    pub fn is_minus_identity(&self) -> bool {
        self.linear == [[-1, 0], [0, -1]]
    }
}

fn apply(t: &[[i32; 2]; 2], c: Cell) -> Cell {
    [t[0][0] * c[0] + t[0][1] * c[1], t[1][0] * c[0] + t[1][1] * c[1]]
}

/// Unimodular integer matrices with entries in `[-2, 2]` and the given
/// determinant.
pub fn lattice_automorphisms(det: i32) -> Vec<[[i32; 2]; 2]> {
    let mut out = Vec::new();
    for a in -2..=2 {
        for b in -2..=2 {
            for c in -2..=2 {
                for d in -2..=2 {
                    if a * d - b * c == det {
                        out.push([[a, b], [c, d]]);
                    }
                }
            }
        }
    }
    out
}

/// Dart bijection determined by `f(root) = image`, or `None` if propagation
/// is inconsistent.
fn propagate(a: &PeriodicMap, b: &PeriodicMap, image: usize, preserving: bool) -> Option<Vec<usize>> {
    let n = a.dart_count();
    let mut f = vec![usize::MAX; n];
    let mut used = vec![false; n];
    f[0] = image;
    used[image] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(d) = queue.pop_front() {
        let fd = f[d];
        let rot = if preserving { b.sigma[fd] } else { b.sigma[b.sigma[fd]] };
        for (next, target) in [(a.alpha[d], b.alpha[fd]), (a.sigma[d], rot)] {
            if f[next] == usize::MAX {
                if used[target] {
                    return None;
                }
                f[next] = target;
                used[target] = true;
                queue.push_back(next);
            } else if f[next] != target {
                return None;
            }
        }
    }
    Some(f)
}

fn translations(a: &PeriodicMap, b: &PeriodicMap, f: &[usize], t: &[[i32; 2]; 2]) -> Option<Vec<Cell>> {
    let n = a.dart_count();
    let mut tr: Vec<Option<Cell>> = vec![None; n];
    tr[0] = Some([0, 0]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(d) = queue.pop_front() {
        let here = tr[d].expect("queued");
        let across = sub(add(here, b.shift[f[d]]), apply(t, a.shift[d]));
        for (next, cell) in [(a.sigma[d], here), (a.alpha[d], across)] {
            match tr[next] {
                None => {
                    tr[next] = Some(cell);
                    queue.push_back(next);
                }
                Some(c) if c != cell => return None,
                Some(_) => {}
            }
        }
    }
    Some(tr.into_iter().map(|c| c.expect("connected")).collect())
}

/// All isomorphisms `a -> b` under the colour policy, optionally restricted
/// to one linear part. Grey faces always map to grey faces.
pub fn find_isomorphisms(
    a: &PeriodicMap,
    b: &PeriodicMap,
    policy: ColorPolicy,
    linear: Option<[[i32; 2]; 2]>,
) -> Vec<Isomorphism> {
    let mut out = Vec::new();
    if a.dart_count() != b.dart_count() || a.faces.len() != b.faces.len() {
        return out;
    }
    let want = |c: FaceColor| match policy {
        ColorPolicy::Identity => c,
        ColorPolicy::SwapBlackWhite => c.swapped(),
    };
    for preserving in [true, false] {
        let det = if preserving { 1 } else { -1 };
        let candidates: Vec<[[i32; 2]; 2]> = match linear {
            Some(t) if t[0][0] * t[1][1] - t[0][1] * t[1][0] == det => vec![t],
            Some(_) => continue,
            None => lattice_automorphisms(det),
        };
        for image in 0..b.dart_count() {
            let Some(f) = propagate(a, b, image, preserving) else { continue };
            let colours_ok = (0..a.dart_count()).all(|d| {
                let img_face = if preserving { b.face_of[f[d]] } else { b.face_of[b.alpha[f[d]]] };
                b.faces[img_face].color == want(a.faces[a.face_of[d]].color)
            });
            if !colours_ok {
                continue;
            }
            for t in &candidates {
                if let Some(translation) = translations(a, b, &f, t) {
                    out.push(Isomorphism {
                        linear: *t,
                        darts: f.clone(),
                        translation,
                        policy,
                        orientation_preserving: preserving,
                    });
                }
            }
        }
    }
    out
}

/// Edge identifier shared by both darts of an edge.
fn edge_id(m: &PeriodicMap, d: usize) -> usize {
    d.min(m.alpha[d])
}

/// Searches for a colour-swapping automorphism under which the model equals
/// its dual: each hyperedge state `π` has the same probability as the dual
/// state it is carried to. `vectors[i]` is the vector of orbit slot `i`.
pub fn find_self_duality(m: &PeriodicMap, vectors: &[ProbabilityVector]) -> Result<Option<Isomorphism>> {
    for label in &m.grey {
        let k = m.faces[label.face].darts.len() / 2;
        let v = vectors
            .get(label.orbit)
            .ok_or_else(|| Error::invalid(format!("no probability vector for orbit {}", label.orbit)))?;
        if v.k() != k {
            return Err(Error::invalid(format!(
                "orbit {} has arity {k} but its vector has k = {}",
                label.orbit,
                v.k()
            )));
        }
    }
    let duals: Vec<ProbabilityVector> = vectors.iter().map(ProbabilityVector::dual_vector).collect();
    let mut parts_by_k: BTreeMap<usize, Vec<NCPartition>> = BTreeMap::new();
    for label in &m.grey {
        let k = m.faces[label.face].darts.len() / 2;
        if let std::collections::btree_map::Entry::Vacant(slot) = parts_by_k.entry(k) {
            slot.insert(enumerate_nc(k)?);
        }
    }
    // per grey face: edge ids of its black labels, and edge id -> white label
    let black_edges: Vec<Vec<usize>> = m
        .grey
        .iter()
        .map(|l| m.labelled_darts(l, FaceColor::Black).into_iter().map(|d| edge_id(m, d)).collect())
        .collect();
    let white_label: Vec<HashMap<usize, usize>> = m
        .grey
        .iter()
        .map(|l| {
            m.labelled_darts(l, FaceColor::White)
                .into_iter()
                .enumerate()
                .map(|(c, d)| (edge_id(m, d), c))
                .collect()
        })
        .collect();
    let grey_index: HashMap<usize, usize> = m.grey.iter().enumerate().map(|(i, l)| (l.face, i)).collect();

    for iso in find_isomorphisms(m, m, ColorPolicy::SwapBlackWhite, None) {
        let f = &iso.darts;
        let matches = m.grey.iter().enumerate().all(|(gi, label)| {
            let anchor_img = f[label.anchor];
            let target_face = if m.faces[m.face_of[anchor_img]].color == FaceColor::Grey {
                m.face_of[anchor_img]
            } else {
                m.face_of[m.alpha[anchor_img]]
            };
            let hi = grey_index[&target_face];
            let tau: Option<Vec<usize>> = black_edges[gi]
                .iter()
                .map(|&e| white_label[hi].get(&edge_id(m, f[e])).copied())
                .collect();
            let Some(tau) = tau else { return false };
            let source = &vectors[label.orbit];
            let target = &duals[m.grey[hi].orbit];
            let k = tau.len();
            parts_by_k[&k].iter().all(|pi| {
                let mut labels = vec![0; k];
                for (j, &c) in tau.iter().enumerate() {
                    labels[c] = pi.labels()[j];
                }
                let image = NCPartition::from_labels(&labels).expect("dihedral relabelling keeps non-crossing");
                (source.prob(pi) - target.prob(&image)).abs() <= 1e-12
            })
        });
        if matches {
            return Ok(Some(iso));
        }
    }
    Ok(None)
}

/// Replaces every hyperedge of a 3-uniform lattice by a copy of a planar
/// bond generator, giving a 2-uniform lattice whose bond `b` of the
/// generator lands in orbit slot `b`.
///
/// Internal generator vertices are placed by a barycentric (Tutte) embedding
/// with the terminals pinned to the triangle corners.
pub fn substitute_generator(base: &PeriodicMap, generator: &Generator) -> Result<PeriodicMap> {
    if generator.mode() != GeneratorMode::Bond {
        return Err(Error::UnsupportedMode("only bond generators can be substituted into a lattice".into()));
    }
    if generator.terminals().len() != 3 {
        return Err(Error::invalid("substitution needs a generator with 3 terminals"));
    }
    let view = base.hyper_view();
    if view.hyperedges.iter().any(|e| e.incidences.len() != 3) {
        return Err(Error::invalid("substitution needs a 3-uniform base lattice"));
    }
    let bary = generator.barycentric_layout()?;
    let terminal_slot: HashMap<usize, usize> =
        generator.terminals().iter().enumerate().map(|(i, &t)| (t, i)).collect();

    let mut vertices: Vec<VertexSpec> = view
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| VertexSpec { id: NodeKey::Num(i as i64), x: v.point[0], y: v.point[1] })
        .collect();
    let mut hyperedges = Vec::new();
    let nbase = vertices.len() as i64;
    let internal: Vec<usize> = (0..generator.vertex_count()).filter(|v| !terminal_slot.contains_key(v)).collect();
    for (h, e) in view.hyperedges.iter().enumerate() {
        let corners: Vec<Point> = e.incidences.iter().map(|inc| view.position(inc.vertex, inc.offset)).collect();
        let mut new_id = HashMap::new();
        for &x in &internal {
            let w = bary[x];
            let id = nbase + (h * internal.len() + new_id.len()) as i64;
            let x_pos = [
                w[0] * corners[0][0] + w[1] * corners[1][0] + w[2] * corners[2][0],
                w[0] * corners[0][1] + w[1] * corners[1][1] + w[2] * corners[2][1],
            ];
            new_id.insert(x, id);
            vertices.push(VertexSpec { id: NodeKey::Num(id), x: x_pos[0], y: x_pos[1] });
        }
        let incidence = |x: usize| -> IncidenceSpec {
            match terminal_slot.get(&x) {
                Some(&t) => {
                    let inc = e.incidences[t];
                    IncidenceSpec { v: NodeKey::Num(inc.vertex as i64), dx: inc.offset[0], dy: inc.offset[1] }
                }
                None => IncidenceSpec { v: NodeKey::Num(new_id[&x]), dx: 0, dy: 0 },
            }
        };
        for (b, &(u, w)) in generator.bonds().iter().enumerate() {
            hyperedges.push(HyperedgeSpec { orbit: b, incidences: vec![incidence(u), incidence(w)] });
        }
    }
    LatticeSpec { basis: view.basis, vertices, hyperedges }.build()
}

/// The named built-in lattices: `tri`, `tri-dual`, `tri-bond`, `hex-bond`.
pub fn builtin(name: &str) -> Result<PeriodicMap> {
    builtin_spec(name)?.build()
}

pub const BUILTIN_NAMES: [&str; 4] = ["tri", "tri-dual", "tri-bond", "hex-bond"];

/// Lattice file contents of a built-in lattice.
pub fn builtin_spec(name: &str) -> Result<LatticeSpec> {
    let h = 3f64.sqrt() / 2.0;
    let basis = [[1.0, 0.0], [0.5, h]];
    let inc = |dx: i32, dy: i32| IncidenceSpec { v: NodeKey::Num(0), dx, dy };
    match name {
        "tri" => Ok(LatticeSpec {
            basis,
            vertices: vec![VertexSpec { id: NodeKey::Num(0), x: 0.0, y: 0.0 }],
            hyperedges: vec![HyperedgeSpec { orbit: 0, incidences: vec![inc(0, 0), inc(1, 0), inc(0, 1)] }],
        }),
        // vertices at down-triangle centres; labels follow the edges AB, BC, CA
        "tri-dual" => Ok(LatticeSpec {
            basis,
            vertices: vec![VertexSpec { id: NodeKey::Num(0), x: 1.0, y: h / 1.5 }],
            hyperedges: vec![HyperedgeSpec { orbit: 0, incidences: vec![inc(0, -1), inc(0, 0), inc(-1, 0)] }],
        }),
        "tri-bond" | "hex-bond" => {
            let base = builtin("tri")?;
            let generator = if name == "tri-bond" { Generator::triangle() } else { Generator::star() };
            let map = substitute_generator(&base, &generator)?;
            Ok(map_to_spec(&map))
        }
        other => Err(Error::invalid(format!(
            "unknown lattice '{other}' (expected one of {})",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}

/// Lattice file description of a map's hypergraph view.
pub fn map_to_spec(map: &PeriodicMap) -> LatticeSpec {
    let view = map.hyper_view();
    LatticeSpec {
        basis: view.basis,
        vertices: view
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| VertexSpec { id: NodeKey::Num(i as i64), x: v.point[0], y: v.point[1] })
            .collect(),
        hyperedges: view
            .hyperedges
            .iter()
            .map(|e| HyperedgeSpec {
                orbit: e.orbit,
                incidences: e
                    .incidences
                    .iter()
                    .map(|inc| IncidenceSpec { v: NodeKey::Num(inc.vertex as i64), dx: inc.offset[0], dy: inc.offset[1] })
                    .collect(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_with(hyperedges: Vec<Vec<(i64, i32, i32)>>, vertices: Vec<(i64, f64, f64)>) -> LatticeSpec {
        let h = 3f64.sqrt() / 2.0;
        LatticeSpec {
            basis: [[1.0, 0.0], [0.5, h]],
            vertices: vertices.into_iter().map(|(id, x, y)| VertexSpec { id: NodeKey::Num(id), x, y }).collect(),
            hyperedges: hyperedges
                .into_iter()
                .map(|incs| HyperedgeSpec {
                    orbit: 0,
                    incidences: incs.into_iter().map(|(v, dx, dy)| IncidenceSpec { v: NodeKey::Num(v), dx, dy }).collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn triangular_counts() {
        let m = builtin("tri").unwrap();
        assert_eq!(m.count(FaceColor::Black), 1);
        assert_eq!(m.count(FaceColor::White), 1);
        assert_eq!(m.count(FaceColor::Grey), 1);
        assert_eq!(m.degrees(FaceColor::Grey), vec![6]);
        assert_eq!(m.vertex_count() as i64 - m.edge_count() as i64 + m.faces().len() as i64, 0);
        m.validate().unwrap();
        let view = m.hyper_view();
        assert_eq!(view.vertices.len(), 1);
        assert_eq!(view.hyperedges.len(), 1);
        let offs: Vec<Cell> = view.hyperedges[0].incidences.iter().map(|i| i.offset).collect();
        assert_eq!(offs, vec![[0, 0], [1, 0], [0, 1]]);
    }

    #[test]
    fn clockwise_labelling_is_kept() {
        let spec = spec_with(vec![vec![(0, 0, 0), (0, 0, 1), (0, 1, 0)]], vec![(0, 0.0, 0.0)]);
        let view = spec.build().unwrap().hyper_view();
        let offs: Vec<Cell> = view.hyperedges[0].incidences.iter().map(|i| i.offset).collect();
        assert_eq!(offs, vec![[0, 0], [0, 1], [1, 0]]);
    }

    #[test]
    fn dual_swaps_colours() {
        let m = builtin("tri").unwrap();
        let d = m.compute_dual();
        let dd = d.compute_dual();
        assert_eq!(dd.faces(), m.faces());
        let rotated: Vec<Incidence> = {
            let mut incs = m.hyper_view().hyperedges[0].incidences.clone();
            incs.rotate_left(1);
            incs
        };
        let dd_incs = dd.hyper_view().hyperedges[0].incidences.clone();
        let base = dd_incs[0].offset;
        let relative: Vec<Cell> = dd_incs.iter().map(|i| sub(i.offset, base)).collect();
        let expect: Vec<Cell> = rotated.iter().map(|i| sub(i.offset, rotated[0].offset)).collect();
        assert_eq!(relative, expect);
        assert_eq!(d.dart_count(), m.dart_count());
        assert_eq!(d.degrees(FaceColor::Grey), m.degrees(FaceColor::Grey));
        assert_eq!(d.count(FaceColor::Black), m.count(FaceColor::White));
        d.validate().unwrap();
        let dv = d.hyper_view();
        assert_eq!(dv.hyperedges[0].incidences.len(), 3);
    }

    #[test]
    fn loop_hyperedge_is_valid() {
        // bonds joining a vertex to its own translates: the square lattice
        let spec = LatticeSpec {
            basis: [[1.0, 0.0], [0.0, 1.0]],
            vertices: vec![VertexSpec { id: NodeKey::Num(0), x: 0.0, y: 0.0 }],
            hyperedges: vec![
                HyperedgeSpec { orbit: 0, incidences: vec![IncidenceSpec { v: NodeKey::Num(0), dx: 0, dy: 0 }, IncidenceSpec { v: NodeKey::Num(0), dx: 1, dy: 0 }] },
                HyperedgeSpec { orbit: 1, incidences: vec![IncidenceSpec { v: NodeKey::Num(0), dx: 0, dy: 0 }, IncidenceSpec { v: NodeKey::Num(0), dx: 0, dy: 1 }] },
            ],
        };
        let m = spec.build().unwrap();
        assert_eq!(m.count(FaceColor::White), 1);
        assert_eq!(m.degrees(FaceColor::White), vec![8]);
        m.validate().unwrap();
    }

    #[test]
    fn overlapping_triangles_rejected() {
        let spec = spec_with(
            vec![vec![(0, 0, 0), (0, 1, 0), (0, 0, 1)], vec![(0, 0, 0), (0, 1, 0), (0, 0, 1)]],
            vec![(0, 0.0, 0.0)],
        );
        assert!(matches!(spec.build(), Err(Error::Embedding(_))));
        // a triangle with a vertex inside it
        let spec = spec_with(
            vec![vec![(0, 0, 0), (0, 1, 0), (0, 0, 1)], vec![(1, 0, 0), (0, 0, 0)]],
            vec![(0, 0.0, 0.0), (1, 0.5, 0.3)],
        );
        assert!(matches!(spec.build(), Err(Error::Embedding(_))));
        // crossing bonds
        let spec = LatticeSpec {
            basis: [[1.0, 0.0], [0.0, 1.0]],
            vertices: vec![VertexSpec { id: NodeKey::Num(0), x: 0.0, y: 0.0 }],
            hyperedges: vec![
                HyperedgeSpec { orbit: 0, incidences: vec![IncidenceSpec { v: NodeKey::Num(0), dx: 0, dy: 0 }, IncidenceSpec { v: NodeKey::Num(0), dx: 1, dy: 1 }] },
                HyperedgeSpec { orbit: 0, incidences: vec![IncidenceSpec { v: NodeKey::Num(0), dx: 1, dy: 0 }, IncidenceSpec { v: NodeKey::Num(0), dx: 0, dy: 1 }] },
            ],
        };
        assert!(matches!(spec.build(), Err(Error::Embedding(_))));
    }

    #[test]
    fn unbounded_or_disconnected_rejected() {
        // horizontal bonds only: faces are infinite strips
        let spec = LatticeSpec {
            basis: [[1.0, 0.0], [0.0, 1.0]],
            vertices: vec![VertexSpec { id: NodeKey::Num(0), x: 0.0, y: 0.0 }],
            hyperedges: vec![HyperedgeSpec {
                orbit: 0,
                incidences: vec![IncidenceSpec { v: NodeKey::Num(0), dx: 0, dy: 0 }, IncidenceSpec { v: NodeKey::Num(0), dx: 1, dy: 0 }],
            }],
        };
        assert!(matches!(spec.build(), Err(Error::InvalidInput(_))));
        // a second vertex not touched by any hyperedge
        let mut spec = builtin_spec("tri").unwrap();
        spec.vertices.push(VertexSpec { id: NodeKey::Num(1), x: 0.5, y: 0.1 });
        assert!(spec.build().is_err());
        // bonds (0,0)-(2,0) and (0,0)-(0,1): the lift splits into two copies
        let spec = LatticeSpec {
            basis: [[1.0, 0.0], [0.0, 1.0]],
            vertices: vec![VertexSpec { id: NodeKey::Num(0), x: 0.0, y: 0.0 }],
            hyperedges: vec![
                HyperedgeSpec { orbit: 0, incidences: vec![IncidenceSpec { v: NodeKey::Num(0), dx: 0, dy: 0 }, IncidenceSpec { v: NodeKey::Num(0), dx: 2, dy: 0 }] },
                HyperedgeSpec { orbit: 0, incidences: vec![IncidenceSpec { v: NodeKey::Num(0), dx: 0, dy: 0 }, IncidenceSpec { v: NodeKey::Num(0), dx: 0, dy: 1 }] },
            ],
        };
        assert!(spec.build().is_err());
    }

    #[test]
    fn unknown_builtin() {
        assert!(matches!(builtin("kagome"), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn triangular_dual_rotation() {
        let m = builtin("tri").unwrap();
        let isos = find_isomorphisms(&m.compute_dual(), &m, ColorPolicy::Identity, Some([[-1, 0], [0, -1]]));
        assert!(!isos.is_empty());
        let star = builtin("tri-dual").unwrap();
        assert!(!find_isomorphisms(&star, &m.compute_dual(), ColorPolicy::Identity, None).is_empty());
    }

    #[test]
    fn self_duality_of_competition_model() {
        let m = builtin("tri").unwrap();
        let half = ProbabilityVector::competition(0.5).unwrap();
        assert!(find_self_duality(&m, &[half]).unwrap().is_some());
        for p in [0.4, 0.6] {
            let v = ProbabilityVector::competition(p).unwrap();
            assert!(find_self_duality(&m, &[v]).unwrap().is_none(), "p = {p}");
        }
        let uniform = ProbabilityVector::uniform(3).unwrap();
        assert!(find_self_duality(&m, &[uniform]).unwrap().is_some());
        assert!(find_self_duality(&m, &[]).is_err());
    }

    #[test]
    fn substituted_lattices() {
        let tri_bond = builtin("tri-bond").unwrap();
        let v = tri_bond.hyper_view();
        assert_eq!(v.vertices.len(), 1);
        assert_eq!(v.hyperedges.len(), 3);
        assert!(v.hyperedges.iter().all(|e| e.incidences.len() == 2));
        assert_eq!(tri_bond.count(FaceColor::White), 2);

        let hex = builtin("hex-bond").unwrap();
        let v = hex.hyper_view();
        assert_eq!(v.vertices.len(), 2);
        assert_eq!(v.hyperedges.len(), 3);
        assert_eq!(hex.count(FaceColor::White), 1);
        assert_eq!(hex.degrees(FaceColor::White), vec![12]);
    }
}
