//! Circle / arc / contains-Y classification of pixel continua.

use super::raster::components;
use super::{CellSet, GridContinuum, SkeletonGraph};
use crate::dynamics::ComplexPoint;
use crate::lifting::YTree;
use crate::planar::truncate_polyline;
use serde::{Deserialize, Serialize};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TopologyKind {
    Circle,
    Arc,
    ContainsY,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Ytree(YTree),
    Cycle(Vec<ComplexPoint>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyClass {
    pub kind: TopologyKind,
    pub witness: Option<Witness>,
    pub branch_vertices: usize,
    pub leaves: usize,
    pub cycle_rank: i64,
}

pub fn classify(s: &GridContinuum, prune_len: f64) -> TopologyClass {
    let Ok(g) = s.skeletonize(prune_len) else {
        return TopologyClass { kind: TopologyKind::Other, witness: None, branch_vertices: 0, leaves: 0, cycle_rank: 0 };
    };
    let mut out = TopologyClass {
        kind: TopologyKind::Other,
        witness: None,
        branch_vertices: g.branch_vertices().len(),
        leaves: g.leaves().len(),
        cycle_rank: g.cycle_rank(),
    };
    if out.branch_vertices > 0 {
        if let Some(y) = ytree_from_graph(&g, s.cell_width()) {
            out.kind = TopologyKind::ContainsY;
            out.witness = Some(Witness::Ytree(y));
        }
    } else if g.component_count() == 1 && g.edges.len() == 1 && g.edges[0].a == g.edges[0].b {
        out.kind = TopologyKind::Circle;
        out.witness = Some(Witness::Cycle(g.edges[0].polyline.clone()));
    } else if g.component_count() == 1 && out.cycle_rank == 0 && out.leaves == 2 {
        out.kind = TopologyKind::Arc;
    }
    out
}

pub fn extract_ytree(s: &GridContinuum, prune_len: f64) -> Option<YTree> {
    let g = s.skeletonize(prune_len).ok()?;
    ytree_from_graph(&g, s.cell_width())
}

/// Legs available at `v`: each incident edge oriented away from `v` (loops
/// in both directions), with the usable length. Loops and edges ending at
/// another junction are capped short of their far end.
fn candidate_legs(g: &SkeletonGraph, v: usize) -> Vec<(f64, Vec<ComplexPoint>)> {
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for (k, path) in g.incident_paths(v) {
        let e = &g.edges[k];
        let far = g.other_end(k, v);
        if seen.contains(&k) && far != v {
            continue;
        }
        seen.push(k);
        let cap = if far == v {
            0.45 * e.length
        } else if g.degrees[far] == 1 {
            e.length
        } else {
            0.9 * e.length
        };
        out.push((cap, path));
    }
    out.sort_by(|a, b| b.0.total_cmp(&a.0));
    out
}

/// The Y at a branch vertex with the three longest legs, trimmed to a common
/// length. Branch vertices are tried from the one with the longest short leg.
pub(crate) fn ytree_from_graph(g: &SkeletonGraph, tol_geom: f64) -> Option<YTree> {
    let mut options: Vec<(f64, usize)> = g
        .branch_vertices()
        .into_iter()
        .filter_map(|v| {
            let legs = candidate_legs(g, v);
            (legs.len() >= 3).then(|| (legs[2].0, v))
        })
        .collect();
    options.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for (len, v) in options {
        let legs = candidate_legs(g, v);
        let trimmed: Vec<Vec<ComplexPoint>> = legs[..3].iter().map(|(_, p)| truncate_polyline(p, len)).collect();
        if let Ok(y) = YTree::new(g.vertices[v], trimmed, tol_geom) {
            return Some(y);
        }
    }
    None
}

/// Components of `s` left after deleting the cells within `radius` of `x`.
pub fn cut_point_components(s: &GridContinuum, x: ComplexPoint, radius: f64) -> usize {
    let rest: CellSet = s.cells().iter().copied().filter(|&c| (s.center(c) - x).norm() > radius).collect();
    components(&rest).len()
}

#[cfg(test)]
mod tests {
    use super::super::{rasterize, Frame};
    use super::*;
    use num_complex::Complex64;

    fn cont(w: f64, n: i32, inside: impl Fn(ComplexPoint) -> bool) -> GridContinuum {
        let f = Frame { origin: Complex64::new(0.0, 0.0), cell_width: w };
        GridContinuum::new(f.origin, w, rasterize(f, n, inside)).unwrap()
    }

    #[test]
    fn basic_shapes() {
        let w = 1.0 / 64.0;
        let annulus = cont(w, 80, |z| (z.norm() - 1.0).abs() < 1.5 * w);
        let t = annulus.classify(annulus.default_prune_len());
        assert_eq!(t.kind, TopologyKind::Circle);
        assert!(matches!(t.witness, Some(Witness::Cycle(_))));
        assert!(annulus.extract_ytree(4.0 * w).is_none());

        let seg = cont(w, 80, |z| z.re.abs() < 1.0 && z.im.abs() < 1.5 * w);
        assert_eq!(seg.classify(4.0 * w).kind, TopologyKind::Arc);

        let plus = cont(w, 80, |z| (z.re.abs() < 1.0 && z.im.abs() < w) || (z.im.abs() < 1.0 && z.re.abs() < w));
        let t = plus.classify(4.0 * w);
        assert_eq!(t.kind, TopologyKind::ContainsY);
        let Some(Witness::Ytree(y)) = t.witness else { panic!() };
        assert!(y.center().norm() < 3.0 * w);
        for leg in y.legs() {
            assert!(leg.length() > 0.9);
        }
        assert!(cut_point_components(&plus, y.center(), 2.0 * w) >= 3);
    }

    #[test]
    fn shapes_with_cycles_contain_y() {
        let w = 1.0 / 64.0;
        let theta = cont(w, 80, |z| (z.norm() - 1.0).abs() < 1.5 * w || (z.im.abs() < 1.5 * w && z.re.abs() < 1.0));
        let t = theta.classify(4.0 * w);
        // two branch points joined by three arcs
        assert_eq!(t.cycle_rank, 2);
        assert_eq!(t.kind, TopologyKind::ContainsY);
        let figure_eight = cont(w, 100, |z| {
            ((z - Complex64::new(-0.5, 0.0)).norm() - 0.5).abs() < 1.5 * w
                || ((z - Complex64::new(0.5, 0.0)).norm() - 0.5).abs() < 1.5 * w
        });
        let t = figure_eight.classify(4.0 * w);
        assert_eq!(t.cycle_rank, 2);
        assert_eq!(t.kind, TopologyKind::ContainsY);
    }
}
