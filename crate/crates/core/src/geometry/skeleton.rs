//! Topology-preserving thinning and conversion of the thinned pixels into
//! a graph with polyline edges.

use super::raster::{Bitmap, N8};
use super::{Cell, CellSet, Frame};
use crate::dynamics::ComplexPoint;
use crate::error::{Error, Result};
use crate::planar::polyline_length;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkeletonEdge {
    pub a: usize,
    pub b: usize,
    /// Geometry from vertex `a` to vertex `b`.
    pub polyline: Vec<ComplexPoint>,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkeletonGraph {
    pub vertices: Vec<ComplexPoint>,
    pub edges: Vec<SkeletonEdge>,
    pub degrees: Vec<usize>,
    /// The thinned pixels the graph was traced from.
    #[serde(skip)]
    pub pixels: CellSet,
}

impl SkeletonGraph {
    pub fn component_count(&self) -> usize {
        let mut uf: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(uf: &mut [usize], i: usize) -> usize {
            if uf[i] != i {
                let r = find(uf, uf[i]);
                uf[i] = r;
            }
            uf[i]
        }
        for e in &self.edges {
            let (x, y) = (find(&mut uf, e.a), find(&mut uf, e.b));
            uf[x] = y;
        }
        (0..self.vertices.len()).filter(|&i| find(&mut uf, i) == i).count()
    }

    /// `E - V + components`.
    pub fn cycle_rank(&self) -> i64 {
        self.edges.len() as i64 - self.vertices.len() as i64 + self.component_count() as i64
    }

    pub fn branch_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.degrees[v] >= 3).collect()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.degrees[v] == 1).collect()
    }

    /// Edge geometries leaving `v`, oriented away from it. A self-loop
    /// appears twice, once per direction.
    pub fn incident_paths(&self, v: usize) -> Vec<(usize, Vec<ComplexPoint>)> {
        let mut out = Vec::new();
        for (k, e) in self.edges.iter().enumerate() {
            if e.a == v {
                out.push((k, e.polyline.clone()));
            }
            if e.b == v {
                let mut p = e.polyline.clone();
                p.reverse();
                out.push((k, p));
            }
        }
        out
    }

    pub fn other_end(&self, edge: usize, v: usize) -> usize {
        let e = &self.edges[edge];
        if e.a == v {
            e.b
        } else {
            e.a
        }
    }
}

/// Yokoi connectivity number for 8-connectivity; a set pixel is simple
/// (removable without changing topology) exactly when it equals 1.
fn yokoi8(bm: &Bitmap, x: i32, y: i32) -> i32 {
    let nb: [i32; 8] = std::array::from_fn(|k| 1 - bm.get(x + N8[k].0, y + N8[k].1) as i32);
    let mut n = 0;
    for k in [0usize, 2, 4, 6] {
        n += nb[k] - nb[k] * nb[(k + 1) % 8] * nb[(k + 2) % 8];
    }
    n
}

/// Sequential directional thinning: removes simple, non-end border pixels
/// until none remain. Topology (components and holes) is preserved.
pub fn thin(bm: &mut Bitmap) {
    const DIRS: [(i32, i32); 4] = [(0, 1), (0, -1), (1, 0), (-1, 0)];
    loop {
        let mut changed = false;
        for (dx, dy) in DIRS {
            let mut candidates = Vec::new();
            for j in 0..bm.height as i32 {
                for i in 0..bm.width as i32 {
                    let (x, y) = (bm.min_x + i, bm.min_y + j);
                    if bm.get(x, y) && !bm.get(x + dx, y + dy) {
                        candidates.push((x, y));
                    }
                }
            }
            for (x, y) in candidates {
                if bm.get(x, y) && !bm.get(x + dx, y + dy) && bm.neighbour_count(x, y) >= 2 && yokoi8(bm, x, y) == 1 {
                    bm.set(x, y, false);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

struct RawEdge {
    a: usize,
    b: usize,
    polyline: Vec<ComplexPoint>,
}

/// Thins `cells`, traces the pixel graph and prunes spurs shorter than
/// `prune_len`. Disconnected inputs give a disconnected graph.
pub fn skeletonize_cells(frame: Frame, cells: &CellSet, prune_len: f64) -> Result<SkeletonGraph> {
    if cells.is_empty() {
        return Err(Error::Empty("cannot skeletonize an empty cell set".into()));
    }
    let mut bm = Bitmap::from_cells(cells, 1);
    thin(&mut bm);
    let pixels = bm.cells();
    if pixels.is_empty() {
        return Err(Error::Empty("skeleton is empty".into()));
    }
    let (vertices, edges) = trace(frame, &bm, &pixels);
    let mut g = Graph { vertices, edges: edges.into_iter().map(Some).collect() };
    g.prune(prune_len);
    let mut out = g.compact();
    out.pixels = pixels;
    Ok(out)
}

fn trace(frame: Frame, bm: &Bitmap, pixels: &CellSet) -> (Vec<ComplexPoint>, Vec<RawEdge>) {
    let degree = |c: Cell| bm.neighbour_count(c.x, c.y);
    let neighbours = |c: Cell| -> Vec<Cell> {
        N8.iter()
            .map(|(dx, dy)| Cell::new(c.x + dx, c.y + dy))
            .filter(|n| bm.get(n.x, n.y))
            .collect()
    };

    // Node pixels: degree != 2. Adjacent junction pixels merge into one vertex.
    let mut node_of: BTreeMap<Cell, usize> = BTreeMap::new();
    let mut vertex_pixel: Vec<Cell> = Vec::new();
    for &p in pixels {
        if degree(p) == 2 || node_of.contains_key(&p) {
            continue;
        }
        let id = vertex_pixel.len();
        let mut cluster = vec![p];
        node_of.insert(p, id);
        if degree(p) >= 3 {
            let mut k = 0;
            while k < cluster.len() {
                for n in neighbours(cluster[k]) {
                    if degree(n) >= 3 && !node_of.contains_key(&n) {
                        node_of.insert(n, id);
                        cluster.push(n);
                    }
                }
                k += 1;
            }
        }
        let centroid = cluster.iter().map(|&c| frame.center(c)).sum::<ComplexPoint>() / cluster.len() as f64;
        let rep = *cluster
            .iter()
            .min_by(|a, b| {
                (frame.center(**a) - centroid)
                    .norm()
                    .partial_cmp(&(frame.center(**b) - centroid).norm())
                    .unwrap()
                    .then(a.cmp(b))
            })
            .unwrap();
        vertex_pixel.push(rep);
    }
    let mut vertices: Vec<ComplexPoint> = vertex_pixel.iter().map(|&c| frame.center(c)).collect();

    let mut edges = Vec::new();
    let mut used_steps: HashSet<(Cell, Cell)> = HashSet::new();
    let mut visited_chain: BTreeSet<Cell> = BTreeSet::new();

    for (&q, &a) in &node_of {
        for p in neighbours(q) {
            if node_of.get(&p) == Some(&a) || used_steps.contains(&(q, p)) {
                continue;
            }
            used_steps.insert((q, p));
            if let Some(&b) = node_of.get(&p) {
                used_steps.insert((p, q));
                edges.push(RawEdge { a, b, polyline: vec![vertices[a], vertices[b]] });
                continue;
            }
            let mut path = vec![vertices[a]];
            let (mut prev, mut cur) = (q, p);
            let b = loop {
                visited_chain.insert(cur);
                path.push(frame.center(cur));
                let next = neighbours(cur).into_iter().find(|&n| n != prev && !(node_of.get(&n) == Some(&a) && prev == q && n != q && false));
                let Some(next) = next else {
                    break None;
                };
                if let Some(&b) = node_of.get(&next) {
                    used_steps.insert((next, cur));
                    break Some(b);
                }
                if visited_chain.contains(&next) {
                    break None;
                }
                prev = cur;
                cur = next;
            };
            if let Some(b) = b {
                let last = *path.last().unwrap();
                if last != vertices[b] {
                    path.push(vertices[b]);
                }
                edges.push(RawEdge { a, b, polyline: path });
            }
        }
    }

    // Remaining chain pixels form node-free cycles.
    for &p in pixels {
        if node_of.contains_key(&p) || visited_chain.contains(&p) {
            continue;
        }
        let id = vertices.len();
        vertices.push(frame.center(p));
        visited_chain.insert(p);
        let mut path = vec![frame.center(p)];
        let (mut prev, mut cur) = (p, neighbours(p)[0]);
        while cur != p && visited_chain.insert(cur) {
            path.push(frame.center(cur));
            let Some(next) = neighbours(cur).into_iter().find(|&n| n != prev) else {
                break;
            };
            prev = cur;
            cur = next;
        }
        path.push(frame.center(p));
        edges.push(RawEdge { a: id, b: id, polyline: path });
    }
    (vertices, edges)
}

struct Graph {
    vertices: Vec<ComplexPoint>,
    edges: Vec<Option<RawEdge>>,
}

impl Graph {
    fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertices.len()];
        for e in self.edges.iter().flatten() {
            d[e.a] += 1;
            d[e.b] += 1;
        }
        d
    }

    fn prune(&mut self, prune_len: f64) {
        loop {
            let mut changed = false;
            let mut deg = self.degrees();
            let mut order: Vec<(f64, usize)> = self
                .edges
                .iter()
                .enumerate()
                .filter_map(|(k, e)| e.as_ref().map(|e| (polyline_length(&e.polyline), k)))
                .filter(|(len, _)| *len < prune_len)
                .collect();
            order.sort_by(|x, y| x.partial_cmp(y).unwrap());
            for (_, k) in order {
                let e = self.edges[k].as_ref().unwrap();
                if e.a == e.b {
                    continue;
                }
                let (leaf, hub) = if deg[e.a] == 1 {
                    (e.a, e.b)
                } else if deg[e.b] == 1 {
                    (e.b, e.a)
                } else {
                    continue;
                };
                if deg[hub] >= 3 {
                    deg[hub] -= 1;
                    deg[leaf] -= 1;
                    self.edges[k] = None;
                    changed = true;
                }
            }
            changed |= self.merge_degree_two();
            if !changed {
                break;
            }
        }
    }

    fn merge_degree_two(&mut self) -> bool {
        let mut changed = false;
        loop {
            let deg = self.degrees();
            let Some(v) = (0..self.vertices.len()).find(|&v| {
                deg[v] == 2 && !self.edges.iter().flatten().any(|e| e.a == v && e.b == v)
            }) else {
                break;
            };
            let ks: Vec<usize> = self
                .edges
                .iter()
                .enumerate()
                .filter(|(_, e)| e.as_ref().map_or(false, |e| e.a == v || e.b == v))
                .map(|(k, _)| k)
                .collect();
            let e1 = self.edges[ks[0]].take().unwrap();
            let e2 = self.edges[ks[1]].take().unwrap();
            // orient e1 to end at v and e2 to start at v
            let (a, mut p1) = if e1.b == v { (e1.a, e1.polyline) } else { (e1.b, rev(e1.polyline)) };
            let (b, p2) = if e2.a == v { (e2.b, e2.polyline) } else { (e2.a, rev(e2.polyline)) };
            p1.extend(p2.into_iter().skip(1));
            self.edges[ks[0]] = Some(RawEdge { a, b, polyline: p1 });
            changed = true;
        }
        changed
    }

    fn compact(self) -> SkeletonGraph {
        let deg = self.degrees();
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        let mut degrees = Vec::new();
        for (v, &d) in deg.iter().enumerate() {
            if d > 0 {
                remap[v] = vertices.len();
                vertices.push(self.vertices[v]);
                degrees.push(d);
            }
        }
        let edges = self
            .edges
            .into_iter()
            .flatten()
            .map(|e| {
                let length = polyline_length(&e.polyline);
                SkeletonEdge { a: remap[e.a], b: remap[e.b], polyline: e.polyline, length }
            })
            .collect::<Vec<_>>();
        if vertices.is_empty() {
            // A lone pixel: a single vertex without edges.
            return SkeletonGraph { vertices: self.vertices.into_iter().take(1).collect(), edges, degrees: vec![0], pixels: CellSet::new() };
        }
        SkeletonGraph { vertices, edges, degrees, pixels: CellSet::new() }
    }
}

fn rev(mut v: Vec<ComplexPoint>) -> Vec<ComplexPoint> {
    v.reverse();
    v
}

#[cfg(test)]
mod tests {
    use super::super::raster::euler_characteristic;
    use super::super::rasterize;
    use super::*;
    use num_complex::Complex64;

    fn unit_frame(w: f64) -> Frame {
        Frame { origin: Complex64::new(0.0, 0.0), cell_width: w }
    }

    fn plus(arm: i32, thick: i32) -> CellSet {
        let mut s = CellSet::new();
        for t in -arm..=arm {
            for k in 0..thick {
                s.insert(Cell::new(t, k));
                s.insert(Cell::new(k, t));
            }
        }
        s
    }

    #[test]
    fn plus_sign_has_one_degree_four_vertex() {
        let g = skeletonize_cells(unit_frame(1.0), &plus(10, 1), 4.0).unwrap();
        assert_eq!(g.branch_vertices().len(), 1);
        let v = g.branch_vertices()[0];
        assert_eq!(g.degrees[v], 4);
        assert_eq!(g.edges.len(), 4);
        assert_eq!(g.cycle_rank(), 0);
    }

    #[test]
    fn thick_plus_sign_still_has_a_branch() {
        let g = skeletonize_cells(unit_frame(1.0), &plus(16, 3), 4.0).unwrap();
        let deg_sum: usize = g.branch_vertices().iter().map(|&v| g.degrees[v]).sum();
        assert!(deg_sum >= 4);
        assert_eq!(g.leaves().len(), 4);
    }

    #[test]
    fn annulus_is_a_single_cycle() {
        let w = 1.0 / 64.0;
        let cells = rasterize(unit_frame(w), 80, |z| (z.norm() - 1.0).abs() < 1.5 * w);
        let g = skeletonize_cells(unit_frame(w), &cells, 4.0 * w).unwrap();
        assert!(g.branch_vertices().is_empty());
        assert_eq!(g.cycle_rank(), 1);
        assert_eq!(g.edges.len(), 1);
        let holes = 1 - euler_characteristic(&cells);
        assert_eq!(g.cycle_rank(), holes);
    }

    #[test]
    fn thinning_preserves_euler_characteristic() {
        let w = 1.0 / 32.0;
        // two disjoint rings and a blob
        let cells = rasterize(unit_frame(w), 80, |z| {
            let a = ((z - Complex64::new(-1.0, 0.0)).norm() - 0.5).abs() < 2.0 * w;
            let b = ((z - Complex64::new(1.0, 0.0)).norm() - 0.5).abs() < 2.0 * w;
            let c = (z - Complex64::new(0.0, 1.5)).norm() < 0.3;
            a || b || c
        });
        let mut bm = Bitmap::from_cells(&cells, 1);
        thin(&mut bm);
        assert_eq!(euler_characteristic(&bm.cells()), euler_characteristic(&cells));
        let g = skeletonize_cells(unit_frame(w), &cells, 4.0 * w).unwrap();
        assert_eq!(g.cycle_rank(), 2);
        assert_eq!(g.component_count(), 3);
    }

    #[test]
    fn empty_input_errors() {
        assert!(skeletonize_cells(unit_frame(1.0), &CellSet::new(), 1.0).is_err());
    }

    #[test]
    fn edges_lie_on_the_input() {
        let cells = plus(12, 3);
        let f = unit_frame(1.0);
        let g = skeletonize_cells(f, &cells, 4.0).unwrap();
        for e in &g.edges {
            for p in &e.polyline {
                assert!(cells.contains(&f.cell_at(*p)));
            }
        }
    }
}
