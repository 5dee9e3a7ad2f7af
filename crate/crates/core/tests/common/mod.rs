//! Shared oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use hyperperc::hypermap::builtin;
use hyperperc::percsim::{BoundaryMode, Configuration, Direction, Rect, Window};

pub fn tri_window(n: i32) -> Window {
    Window::new(&builtin("tri").unwrap(), (0, n), (0, n), BoundaryMode::Open).unwrap()
}

/// A rectangle strictly inside the window's one-cell margin.
pub fn inner_rect(w: &Window) -> Rect {
    let b = w.bounds();
    let [cx, cy] = w.cell_extent();
    Rect::new(b.x0 + cx + 0.01, b.y0 + cy + 0.01, b.x1 - cx - 0.01, b.y1 - cy - 0.01)
}

/// Breadth-first search over the hypergraph restricted to `allowed` edges.
pub fn bfs_components(w: &Window, config: &Configuration, allowed: &dyn Fn(usize) -> bool) -> Vec<usize> {
    let n = w.vertex_count();
    let mut adj = vec![Vec::new(); n];
    for (i, e) in w.edges().iter().enumerate() {
        if !allowed(i) {
            continue;
        }
        let pi = config.state(w, i);
        for a in 0..e.vertices.len() {
            for b in 0..e.vertices.len() {
                if a != b && pi.same_block(a, b) {
                    adj[e.vertices[a]].push(e.vertices[b]);
                }
            }
        }
    }
    let mut label = vec![usize::MAX; n];
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &x in &adj[v] {
                if label[x] == usize::MAX {
                    label[x] = s;
                    queue.push_back(x);
                }
            }
        }
    }
    label
}

pub fn inside(r: &Rect, p: [f64; 2]) -> bool {
    p[0] >= r.x0 - 1e-9 && p[0] <= r.x1 + 1e-9 && p[1] >= r.y0 - 1e-9 && p[1] <= r.y1 + 1e-9
}

pub fn oracle_crossing(w: &Window, config: &Configuration, r: Rect, dir: Direction) -> bool {
    let labels = bfs_components(w, config, &|i| w.edges()[i].points.iter().all(|&p| inside(&r, p)));
    let [cx, cy] = w.cell_extent();
    let pos = w.positions();
    let band = |v: usize, far: bool| {
        let p = pos[v];
        inside(&r, p)
            && match (dir, far) {
                (Direction::Horizontal, false) => p[0] <= r.x0 + cx,
                (Direction::Horizontal, true) => p[0] >= r.x1 - cx,
                (Direction::Vertical, false) => p[1] <= r.y0 + cy,
                (Direction::Vertical, true) => p[1] >= r.y1 - cy,
            }
    };
    let starts: BTreeSet<usize> = (0..pos.len()).filter(|&v| band(v, false)).map(|v| labels[v]).collect();
    (0..pos.len()).any(|v| band(v, true) && starts.contains(&labels[v]))
}

