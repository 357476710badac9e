//! Cover hierarchies `U_n` on a discretized continuum and empirical checks
//! of the topological and metric cxc axioms.
//!
//! The map acts on cells through a snapped grid map: a cell goes to the
//! cell of the continuum nearest to the image of its center. Level `n+1` is
//! the set of 8-connected components of the grid preimages of level-`n`
//! elements.

mod metric;
mod visual;

pub use metric::{
    qs_modulus_estimate, CircleArcLength, Euclidean, Metric, MonotoneEnvelope, QsEstimate, Scaled, Snowflake,
};
pub use visual::{check_distortion, visual_metric_estimate, DistortionStats, VisualMetricEstimate};

use crate::dynamics::{ComplexPoint, PolynomialMap};
use crate::error::{Error, Result};
use crate::geometry::raster::{components, dilate_within, N8};
use crate::geometry::{cells_diameter, Cell, CellSet, Frame, GridContinuum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BinaryHeap, HashMap, VecDeque};

/// Images landing farther than `FAULT_CELLS·(1 + |f'|)` cell widths from the
/// continuum mean the grid does not resolve the dynamics.
const FAULT_CELLS: f64 = 3.0;

/// The snapped action of a polynomial on the cells of a continuum.
#[derive(Clone, Debug)]
pub struct GridMap {
    image: HashMap<Cell, Cell>,
    preimage: HashMap<Cell, Vec<Cell>>,
}

impl GridMap {
    pub fn new(map: &PolynomialMap, s: &GridContinuum) -> Result<Self> {
        let w = s.cell_width();
        let pairs: Vec<(Cell, Cell)> = s
            .cells()
            .par_iter()
            .map(|&c| {
                let (fz, dfz) = map.eval_with_derivative(s.center(c));
                let t = s.nearest_cell(fz);
                let miss = s.frame().distance_to_cell(fz, t);
                if miss > FAULT_CELLS * (1.0 + dfz.norm()) * w {
                    return Err(Error::Cover(format!(
                        "resolution fault: image of cell ({}, {}) lands {:.2} cells from the continuum",
                        c.x,
                        c.y,
                        miss / w
                    )));
                }
                Ok((c, t))
            })
            .collect::<Result<_>>()?;
        let mut preimage: HashMap<Cell, Vec<Cell>> = HashMap::new();
        for &(c, t) in &pairs {
            preimage.entry(t).or_default().push(c);
        }
        Ok(Self { image: pairs.into_iter().collect(), preimage })
    }

    pub fn image(&self, c: Cell) -> Option<Cell> {
        self.image.get(&c).copied()
    }

    pub fn preimage_of(&self, cells: &CellSet) -> CellSet {
        cells.iter().filter_map(|t| self.preimage.get(t)).flatten().copied().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverElement {
    pub level: usize,
    pub id: usize,
    #[serde(skip)]
    pub cells: CellSet,
    /// Index into the previous level; `None` at level 0.
    pub image_id: Option<usize>,
    /// Degree of `f` from this element onto its image element.
    pub mapping_degree: usize,
    /// Degree of `f^level` onto the level-0 ancestor.
    pub chain_degree: usize,
}

#[derive(Clone, Debug)]
pub struct CoverHierarchy {
    pub levels: Vec<Vec<CoverElement>>,
    pub map: PolynomialMap,
    pub continuum: GridContinuum,
    pub grid: GridMap,
    /// Grid preimage components with no preimage of their target point,
    /// per level. They come from snapping and are dropped.
    pub dropped_fragments: Vec<usize>,
    /// Set when a truncating build stopped early: the fault that prevented
    /// the next level.
    pub truncated_by: Option<String>,
}

impl CoverHierarchy {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn element(&self, level: usize, id: usize) -> &CoverElement {
        &self.levels[level][id]
    }

    /// The element `k` levels up the image chain of `e`.
    pub fn ancestor<'a>(&'a self, e: &'a CoverElement, k: usize) -> &'a CoverElement {
        let mut cur = e;
        for _ in 0..k {
            cur = &self.levels[cur.level - 1][cur.image_id.expect("level > 0 has an image")];
        }
        cur
    }

    /// Cells of the continuum in no element of `level`.
    pub fn uncovered(&self, level: usize) -> usize {
        let mut covered = CellSet::new();
        for e in &self.levels[level] {
            covered.extend(e.cells.iter().copied());
        }
        self.continuum.cells().iter().filter(|c| !covered.contains(c)).count()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let frame = self.continuum.frame();
        let levels: Vec<Vec<serde_json::Value>> = self
            .levels
            .iter()
            .map(|lv| {
                lv.iter()
                    .map(|e| {
                        let (lo, hi) = bbox(frame, &e.cells);
                        serde_json::json!({
                            "level": e.level,
                            "id": e.id,
                            "image_id": e.image_id,
                            "degree": e.mapping_degree,
                            "chain_degree": e.chain_degree,
                            "bbox": [[lo.re, lo.im], [hi.re, hi.im]],
                            "cells": e.cells.len(),
                        })
                    })
                    .collect()
            })
            .collect();
        serde_json::json!({
            "map": self.map.to_spec(),
            "depth": self.depth(),
            "dropped_fragments": self.dropped_fragments,
            "truncated_by": self.truncated_by,
            "levels": levels,
        })
    }
}

fn bbox(frame: Frame, cells: &CellSet) -> (ComplexPoint, ComplexPoint) {
    let (mut x0, mut y0, mut x1, mut y1) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
    for c in cells {
        x0 = x0.min(c.x);
        y0 = y0.min(c.y);
        x1 = x1.max(c.x);
        y1 = y1.max(c.y);
    }
    let w = frame.cell_width;
    let lo = frame.origin + ComplexPoint::new(x0 as f64 * w, y0 as f64 * w);
    let hi = frame.origin + ComplexPoint::new((x1 + 1) as f64 * w, (y1 + 1) as f64 * w);
    (lo, hi)
}

/// Components of `s` inside four half-planes through the center of its
/// bounding box (right, upper, left, lower), each pushed past the center by
/// a tenth of the half-extent so that neighbours overlap. Components equal
/// to all of `s`, and small slivers already covered by the others (where the
/// set barely crosses a boundary line), are dropped.
pub fn default_base_cover(s: &GridContinuum) -> Vec<CellSet> {
    let (x0, y0, x1, y1) = s.bounds();
    let f = s.frame();
    let c = (f.center(Cell::new(x0, y0)) + f.center(Cell::new(x1, y1))) / 2.0;
    let h = 0.5 * ((x1 - x0) as f64).max((y1 - y0) as f64) * f.cell_width;
    let delta = 0.1 * h;
    let dirs = [ComplexPoint::new(1.0, 0.0), ComplexPoint::new(0.0, 1.0), ComplexPoint::new(-1.0, 0.0), ComplexPoint::new(0.0, -1.0)];
    let mut candidates: Vec<CellSet> = Vec::new();
    for n in dirs {
        let band: CellSet = s
            .cells()
            .iter()
            .copied()
            .filter(|&cell| {
                let v = f.center(cell) - c;
                v.re * n.re + v.im * n.im > -delta
            })
            .collect();
        candidates.extend(components(&band));
    }
    prune_base(s, candidates)
}

/// Components of `s` inside a `k × k` grid of squares tiling its bounding
/// square, each square grown by a tenth of its side so that neighbours
/// overlap. Finer tilings keep critical values apart, which is what bounds
/// the chain degree for maps with preperiodic critical points.
pub fn tiled_base_cover(s: &GridContinuum, k: usize) -> Result<Vec<CellSet>> {
    if k == 0 {
        return Err(Error::InvalidArgument("tiling needs k >= 1".into()));
    }
    let (x0, y0, x1, y1) = s.bounds();
    let f = s.frame();
    let side = ((x1 - x0).max(y1 - y0) + 1) as f64 * f.cell_width / k as f64;
    let lo = f.center(Cell::new(x0, y0)) - ComplexPoint::new(0.5, 0.5) * f.cell_width;
    let grow = 0.1 * side;
    let mut candidates = Vec::new();
    for i in 0..k {
        for j in 0..k {
            let a = lo + ComplexPoint::new(i as f64 * side - grow, j as f64 * side - grow);
            let b = a + ComplexPoint::new(side + 2.0 * grow, side + 2.0 * grow);
            let tile: CellSet = s
                .cells()
                .iter()
                .copied()
                .filter(|&c| {
                    let z = f.center(c);
                    z.re > a.re && z.re < b.re && z.im > a.im && z.im < b.im
                })
                .collect();
            candidates.extend(components(&tile));
        }
    }
    Ok(prune_base(s, candidates))
}

/// Drops empty components, components equal to all of `s`, repeats, and
/// slivers the remaining elements already cover (smallest first).
fn prune_base(s: &GridContinuum, candidates: Vec<CellSet>) -> Vec<CellSet> {
    let mut out: Vec<CellSet> = Vec::new();
    for c in candidates {
        if !c.is_empty() && c.len() < s.len() && !out.contains(&c) {
            out.push(c);
        }
    }
    let sliver = s.len() / SLIVER_FRACTION;
    let mut order: Vec<usize> = (0..out.len()).filter(|&k| out[k].len() < sliver).collect();
    order.sort_by_key(|&k| out[k].len());
    let mut keep = vec![true; out.len()];
    for k in order {
        keep[k] = false;
        let covered = out[k].iter().all(|c| out.iter().enumerate().any(|(j, o)| keep[j] && o.contains(c)));
        keep[k] = !covered;
    }
    out.into_iter().zip(keep).filter_map(|(c, k)| k.then_some(c)).collect()
}

/// Base components below `1/SLIVER_FRACTION` of the set may be pruned.
const SLIVER_FRACTION: usize = 10;

/// Cell of `u` deepest inside it: largest 8-step distance from the cells of
/// `u` bordering the rest of `s`.
pub fn deep_cell(s: &GridContinuum, u: &CellSet) -> Cell {
    let mut dist: HashMap<Cell, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for &c in u {
        let border = N8.iter().any(|(dx, dy)| {
            let n = Cell::new(c.x + dx, c.y + dy);
            s.contains(n) && !u.contains(&n)
        });
        if border {
            dist.insert(c, 0);
            queue.push_back(c);
        }
    }
    if queue.is_empty() {
        // No border: fall back to the cell nearest the centroid.
        let pts: Vec<ComplexPoint> = u.iter().map(|&c| s.center(c)).collect();
        let g = pts.iter().sum::<ComplexPoint>() / pts.len() as f64;
        return *u.iter().min_by(|a, b| (s.center(**a) - g).norm().total_cmp(&(s.center(**b) - g).norm())).unwrap();
    }
    while let Some(c) = queue.pop_front() {
        let d = dist[&c];
        for (dx, dy) in N8 {
            let n = Cell::new(c.x + dx, c.y + dy);
            if u.contains(&n) && !dist.contains_key(&n) {
                dist.insert(n, d + 1);
                queue.push_back(n);
            }
        }
    }
    *u.iter().max_by(|a, b| dist[a].cmp(&dist[b]).then(b.cmp(a))).unwrap()
}

/// Preimages farther than this many cells from every grid preimage
/// component are a resolution fault. Near critical points the square-root
/// branch magnifies the sub-cell offset of the target point, so a few cells
/// of slack are normal.
const ASSIGN_CELLS: f64 = 16.0;

/// Index of the component owning the cell nearest `p`: the 5×5 block
/// around `cell_at(p)` first, then every component cell.
fn owning_component(frame: Frame, owner: &HashMap<Cell, usize>, p: ComplexPoint) -> Option<usize> {
    let c0 = frame.cell_at(p);
    let nearest = |cells: &mut dyn Iterator<Item = (Cell, usize)>| {
        cells.fold(None, |best: Option<(f64, Cell, usize)>, (c, k)| {
            let d = frame.distance_to_cell(p, c);
            if best.map_or(true, |(bd, bc, _)| d < bd || (d == bd && c < bc)) {
                Some((d, c, k))
            } else {
                best
            }
        })
    };
    let mut block = (-2..=2)
        .flat_map(|dx| (-2..=2).map(move |dy| Cell::new(c0.x + dx, c0.y + dy)))
        .filter_map(|c| owner.get(&c).map(|&k| (c, k)));
    if let Some(b) = nearest(&mut block) {
        return Some(b.2);
    }
    let mut all = owner.iter().map(|(&c, &k)| (c, k));
    nearest(&mut all).filter(|b| b.0 <= ASSIGN_CELLS * frame.cell_width).map(|b| b.2)
}

/// Grid preimage components of `u` dilated by one cell, with their mapping
/// degrees: the preimages (with multiplicity) of a deep point of `u` lying
/// in each.
fn lift_element(
    map: &PolynomialMap,
    s: &GridContinuum,
    grid: &GridMap,
    u: &CellSet,
) -> Result<Vec<(CellSet, usize)>> {
    let comps = components(&grid.preimage_of(&dilate_within(u, s.cells())));
    let mut owner = HashMap::new();
    for (k, comp) in comps.iter().enumerate() {
        for &c in comp {
            owner.insert(c, k);
        }
    }
    let y = s.center(deep_cell(s, u));
    let mut degrees = vec![0usize; comps.len()];
    for p in map.preimages(y)? {
        let k = owning_component(s.frame(), &owner, p.point).ok_or_else(|| {
            Error::Cover(format!("resolution fault: preimage {} of {} is in no grid preimage component", p.point, y))
        })?;
        degrees[k] += p.multiplicity;
    }
    Ok(comps.into_iter().zip(degrees).collect())
}

/// Builds `U_0, …, U_depth`. A level the grid cannot resolve is an error.
pub fn build_hierarchy(map: &PolynomialMap, s: &GridContinuum, u0: Vec<CellSet>, depth: usize) -> Result<CoverHierarchy> {
    build(map, s, u0, depth, true)
}

/// Like [`build_hierarchy`] but stops at the deepest level the grid
/// resolves, recording the fault in `truncated_by`. Base-cover errors are
/// still errors.
pub fn build_hierarchy_truncating(
    map: &PolynomialMap,
    s: &GridContinuum,
    u0: Vec<CellSet>,
    depth: usize,
) -> Result<CoverHierarchy> {
    build(map, s, u0, depth, false)
}

fn build(map: &PolynomialMap, s: &GridContinuum, u0: Vec<CellSet>, depth: usize, strict: bool) -> Result<CoverHierarchy> {
    if u0.is_empty() {
        return Err(Error::InvalidArgument("empty base cover".into()));
    }
    let mut covered = CellSet::new();
    for (k, u) in u0.iter().enumerate() {
        if u.is_empty() || components(u).len() != 1 {
            return Err(Error::InvalidArgument(format!("base element {k} is not connected")));
        }
        if let Some(c) = u.iter().find(|c| !s.contains(**c)) {
            return Err(Error::InvalidArgument(format!("base element {k} has cell ({}, {}) outside the continuum", c.x, c.y)));
        }
        covered.extend(u.iter().copied());
    }
    if covered.len() != s.len() {
        return Err(Error::InvalidArgument(format!("base cover misses {} cells", s.len() - covered.len())));
    }
    let grid = GridMap::new(map, s)?;
    let mut levels = vec![u0
        .into_iter()
        .enumerate()
        .map(|(id, cells)| CoverElement { level: 0, id, cells, image_id: None, mapping_degree: 1, chain_degree: 1 })
        .collect::<Vec<_>>()];
    let mut dropped_fragments = vec![0];
    let mut truncated_by = None;
    for n in 1..=depth {
        let prev = &levels[n - 1];
        let lifted = match prev.par_iter().map(|u| lift_element(map, s, &grid, &u.cells)).collect::<Result<Vec<_>>>() {
            Ok(l) => l,
            Err(e @ Error::Cover(_)) if !strict => {
                truncated_by = Some(format!("level {n}: {e}"));
                break;
            }
            Err(e) => return Err(e),
        };
        let mut next = Vec::new();
        let mut dropped = 0;
        for (u, comps) in prev.iter().zip(lifted) {
            for (cells, degree) in comps {
                if degree == 0 {
                    dropped += 1;
                    continue;
                }
                next.push(CoverElement {
                    level: n,
                    id: next.len(),
                    cells,
                    image_id: Some(u.id),
                    mapping_degree: degree,
                    chain_degree: degree * u.chain_degree,
                });
            }
        }
        levels.push(next);
        dropped_fragments.push(dropped);
    }
    Ok(CoverHierarchy { levels, map: map.clone(), continuum: s.clone(), grid, dropped_fragments, truncated_by })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiameterKind {
    Euclidean,
    /// Length of the longest shortest path inside the element, through
    /// 8-adjacent cell centers.
    Intrinsic,
}

/// Geodesic diameter of an 8-connected cell set by a double Dijkstra sweep;
/// exact on trees and arcs, a lower bound in general.
pub fn intrinsic_diameter(frame: Frame, cells: &CellSet) -> f64 {
    let Some(&start) = cells.iter().next() else { return 0.0 };
    let (far, _) = farthest(frame, cells, start);
    farthest(frame, cells, far).1
}

fn farthest(frame: Frame, cells: &CellSet, src: Cell) -> (Cell, f64) {
    #[derive(PartialEq)]
    struct Item(f64, Cell);
    impl Eq for Item {}
    impl PartialOrd for Item {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Item {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
        }
    }
    let w = frame.cell_width;
    let mut dist: HashMap<Cell, f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(src, 0.0);
    heap.push(Item(0.0, src));
    while let Some(Item(d, c)) = heap.pop() {
        if d > dist[&c] {
            continue;
        }
        for (dx, dy) in N8 {
            let n = Cell::new(c.x + dx, c.y + dy);
            if !cells.contains(&n) {
                continue;
            }
            let nd = d + if dx != 0 && dy != 0 { std::f64::consts::SQRT_2 * w } else { w };
            if dist.get(&n).map_or(true, |&old| nd < old) {
                dist.insert(n, nd);
                heap.push(Item(nd, n));
            }
        }
    }
    dist.into_iter().fold((src, 0.0), |acc, (c, d)| if d > acc.1 || (d == acc.1 && c < acc.0) { (c, d) } else { acc })
}

pub fn element_diameter(frame: Frame, cells: &CellSet, kind: DiameterKind) -> f64 {
    match kind {
        DiameterKind::Euclidean => cells_diameter(frame, cells),
        DiameterKind::Intrinsic => intrinsic_diameter(frame, cells),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub diameter: DiameterKind,
    pub mesh: Vec<f64>,
    /// `mesh[n+1] / mesh[n]`.
    pub ratios: Vec<f64>,
    pub verdict: String,
}

/// Largest element diameter per level. PASS when the last three meshes
/// decrease and the last is below half the first.
pub fn check_expansion(h: &CoverHierarchy, kind: DiameterKind) -> ExpansionReport {
    let frame = h.continuum.frame();
    let mesh: Vec<f64> = h
        .levels
        .iter()
        .map(|lv| lv.par_iter().map(|e| element_diameter(frame, &e.cells, kind)).reduce(|| 0.0, f64::max))
        .collect();
    let ratios: Vec<f64> = mesh.windows(2).map(|p| p[1] / p[0]).collect();
    let verdict = if h.depth() < 2 {
        "insufficient depth"
    } else {
        let tail = &mesh[mesh.len() - 3..];
        if tail[0] > tail[1] && tail[1] > tail[2] && tail[2] < 0.5 * mesh[0] {
            "PASS"
        } else {
            "FAIL"
        }
    };
    ExpansionReport { diameter: kind, mesh, ratios, verdict: verdict.into() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    /// Largest chain degree `deg(f^n: Ũ → U_0)` per level.
    pub max_chain_degree: Vec<usize>,
    pub max_degree: usize,
    pub verdict: String,
}

/// PASS when the maximal chain degree is the same over the deepest three
/// levels.
pub fn check_degree(h: &CoverHierarchy) -> DegreeReport {
    let max_chain_degree: Vec<usize> =
        h.levels.iter().map(|lv| lv.iter().map(|e| e.chain_degree).max().unwrap_or(0)).collect();
    let max_degree = max_chain_degree.iter().copied().max().unwrap_or(0);
    let verdict = if h.depth() < 2 {
        "insufficient depth"
    } else {
        let t = &max_chain_degree[max_chain_degree.len() - 3..];
        if t[0] == t[1] && t[1] == t[2] {
            "PASS"
        } else {
            "FAIL"
        }
    };
    DegreeReport { max_chain_degree, max_degree, verdict: verdict.into() }
}

/// Grid forward image: cells hit by the center and four inner points of
/// each cell, dilated by one cell within `s`.
pub fn forward_image(map: &PolynomialMap, s: &GridContinuum, cells: &CellSet) -> CellSet {
    let q = 0.25 * s.cell_width();
    let offsets = [(0.0, 0.0), (q, q), (-q, q), (-q, -q), (q, -q)];
    let hit: CellSet = cells
        .par_iter()
        .flat_map_iter(|&c| {
            let z = s.center(c);
            offsets.iter().map(move |&(dx, dy)| map.eval(z + ComplexPoint::new(dx, dy)))
        })
        .map(|p| s.nearest_cell(p))
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    dilate_within(&hit, s.cells())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrreducibilityReport {
    /// Smallest `n` with `f^n(w) = s` on the grid, if reached.
    pub n: Option<usize>,
    /// Covered fraction of `s` after each step, starting with `w`.
    pub coverage: Vec<f64>,
}

pub fn check_irreducibility(map: &PolynomialMap, s: &GridContinuum, w: &CellSet, max_n: usize) -> Result<IrreducibilityReport> {
    if w.is_empty() {
        return Err(Error::InvalidArgument("empty open set".into()));
    }
    let mut cur: CellSet = w.iter().copied().filter(|c| s.contains(*c)).collect();
    if cur.is_empty() {
        return Err(Error::InvalidArgument("open set misses the continuum".into()));
    }
    let total = s.len() as f64;
    let mut coverage = vec![cur.len() as f64 / total];
    for n in 0..=max_n {
        if cur.len() == s.len() {
            return Ok(IrreducibilityReport { n: Some(n), coverage });
        }
        if n == max_n {
            break;
        }
        cur = forward_image(map, s, &cur);
        coverage.push(cur.len() as f64 / total);
    }
    Ok(IrreducibilityReport { n: None, coverage })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomothetyReport {
    /// Infimum of `d(x,y) / d(f x, f y)` over sampled pairs.
    pub kappa: f64,
    pub epsilon: f64,
    /// Pairs with `d(x,y) < e^{-ε}·d(f x, f y)` beyond rounding.
    pub violations: usize,
    pub pairs: usize,
}

/// Samples `samples` random pairs of cell centers plus as many close pairs
/// (within ten cells). `epsilon` defaults to `ln deg f`.
pub fn homothety_check<M: Metric>(
    map: &PolynomialMap,
    s: &GridContinuum,
    metric: &M,
    samples: usize,
    epsilon: Option<f64>,
    seed: u64,
) -> Result<HomothetyReport> {
    let epsilon = epsilon.unwrap_or((map.degree() as f64).ln());
    homothety_check_with(|z| map.eval(z), s, metric, samples, epsilon, seed)
}

/// `homothety_check` for an arbitrary point map `f`.
pub fn homothety_check_with<M: Metric>(
    f: impl Fn(ComplexPoint) -> ComplexPoint,
    s: &GridContinuum,
    metric: &M,
    samples: usize,
    epsilon: f64,
    seed: u64,
) -> Result<HomothetyReport> {
    let pts: Vec<ComplexPoint> = s.cells().iter().map(|&c| s.center(c)).collect();
    if pts.len() < 2 {
        return Err(Error::Insufficient("need at least two cells".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let near = 10.0 * s.cell_width();
    let mut pairs = Vec::with_capacity(2 * samples);
    for _ in 0..samples {
        let a = pts[rng.gen_range(0..pts.len())];
        let b = pts[rng.gen_range(0..pts.len())];
        pairs.push((a, b));
        let c = a + ComplexPoint::new(rng.gen_range(-near..near), rng.gen_range(-near..near));
        pairs.push((a, s.center(s.nearest_cell(c))));
    }
    let bound = (-epsilon).exp();
    let mut kappa = f64::INFINITY;
    let mut violations = 0;
    let mut used = 0;
    for (x, y) in pairs {
        let d = metric.distance(x, y);
        let df = metric.distance(f(x), f(y));
        if !(d > 0.0 && df > 0.0) {
            continue;
        }
        used += 1;
        kappa = kappa.min(d / df);
        if d < bound * df * (1.0 - 1e-9) {
            violations += 1;
        }
    }
    if used == 0 {
        return Err(Error::Insufficient("no pair with positive distances".into()));
    }
    Ok(HomothetyReport { kappa, epsilon, violations, pairs: used })
}
