//! Metric and topological analysis of pixel continua.
//!
//! A [`GridContinuum`] is a finite 8-connected set of square cells of a
//! lattice. Cell `(x, y)` is the closed square with lower-left corner
//! `origin + cell_width·(x + i·y)`.

mod format;
pub mod raster;
mod skeleton;
mod topology;

pub use format::{read_continuum, write_continuum, write_png, write_png_with_overlay};
pub use skeleton::{skeletonize_cells, thin, SkeletonEdge, SkeletonGraph};
pub use topology::{classify, cut_point_components, extract_ytree, TopologyClass, TopologyKind, Witness};

use crate::dynamics::ComplexPoint;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }
}

pub type CellSet = BTreeSet<Cell>;

/// Placement of the cell lattice in the plane.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub origin: ComplexPoint,
    pub cell_width: f64,
}

impl Frame {
    #[inline]
    pub fn center(&self, c: Cell) -> ComplexPoint {
        self.origin + Complex64::new((c.x as f64 + 0.5) * self.cell_width, (c.y as f64 + 0.5) * self.cell_width)
    }

    /// The cell whose closed square contains `z` (lower-left convention on
    /// shared edges).
    #[inline]
    pub fn cell_at(&self, z: ComplexPoint) -> Cell {
        let d = (z - self.origin) / self.cell_width;
        Cell::new(d.re.floor() as i32, d.im.floor() as i32)
    }

    /// Distance from `z` to the closed square of `c`.
    pub fn distance_to_cell(&self, z: ComplexPoint, c: Cell) -> f64 {
        let ctr = self.center(c);
        let h = self.cell_width / 2.0;
        let dx = ((z.re - ctr.re).abs() - h).max(0.0);
        let dy = ((z.im - ctr.im).abs() - h).max(0.0);
        dx.hypot(dy)
    }

    /// Largest distance from `z` to a point of the square of `c`.
    pub fn farthest_in_cell(&self, z: ComplexPoint, c: Cell) -> f64 {
        let ctr = self.center(c);
        let h = self.cell_width / 2.0;
        ((z.re - ctr.re).abs() + h).hypot((z.im - ctr.im).abs() + h)
    }

    pub fn centers(&self, cells: &CellSet) -> Vec<ComplexPoint> {
        cells.iter().map(|&c| self.center(c)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridContinuum {
    frame: Frame,
    cells: CellSet,
}

impl GridContinuum {
    /// Validates the invariants: positive cell width, at least two cells,
    /// 8-connected.
    pub fn new(origin: ComplexPoint, cell_width: f64, cells: CellSet) -> Result<Self> {
        if !(cell_width.is_finite() && cell_width > 0.0) {
            return Err(Error::InvalidContinuum(format!("cell width {cell_width} must be positive")));
        }
        if !(origin.re.is_finite() && origin.im.is_finite()) {
            return Err(Error::InvalidContinuum("non-finite origin".into()));
        }
        if cells.len() < 2 {
            return Err(Error::InvalidContinuum(format!("need at least 2 cells, got {}", cells.len())));
        }
        let n = raster::components(&cells).len();
        if n != 1 {
            return Err(Error::InvalidContinuum(format!("not 8-connected ({n} components)")));
        }
        Ok(Self { frame: Frame { origin, cell_width }, cells })
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn origin(&self) -> ComplexPoint {
        self.frame.origin
    }

    pub fn cell_width(&self) -> f64 {
        self.frame.cell_width
    }

    pub fn cells(&self) -> &CellSet {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn center(&self, c: Cell) -> ComplexPoint {
        self.frame.center(c)
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.cells.contains(&c)
    }

    /// `(min_x, min_y, max_x, max_y)` of the cell indices.
    pub fn bounds(&self) -> (i32, i32, i32, i32) {
        let mut b = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
        for c in &self.cells {
            b = (b.0.min(c.x), b.1.min(c.y), b.2.max(c.x), b.3.max(c.y));
        }
        b
    }

    /// Cell of the continuum whose center is nearest to `z`.
    pub fn nearest_cell(&self, z: ComplexPoint) -> Cell {
        let start = self.frame.cell_at(z);
        if self.cells.contains(&start) {
            return start;
        }
        const MAX_RING: i32 = 48;
        let mut best: Option<(f64, Cell)> = None;
        let mut found_ring = None;
        for r in 1..=MAX_RING {
            for c in ring(start, r) {
                if self.cells.contains(&c) {
                    let d = (self.frame.center(c) - z).norm();
                    if best.map_or(true, |(bd, bc)| d < bd || (d == bd && c < bc)) {
                        best = Some((d, c));
                    }
                }
            }
            if best.is_some() && found_ring.is_none() {
                found_ring = Some(r);
            }
            if let Some(fr) = found_ring {
                // A cell at Chebyshev ring r is at Euclidean distance >= (r-1)·w.
                if (r - 1) as f64 > (fr as f64 + 1.0) * std::f64::consts::SQRT_2 {
                    break;
                }
            }
        }
        if let Some((_, c)) = best {
            return c;
        }
        *self
            .cells
            .iter()
            .min_by(|a, b| {
                let da = (self.frame.center(**a) - z).norm();
                let db = (self.frame.center(**b) - z).norm();
                da.partial_cmp(&db).unwrap().then(a.cmp(b))
            })
            .expect("continuum is nonempty")
    }

    /// Distance from `z` to the square of the cell nearest to it.
    pub fn distance_to(&self, z: ComplexPoint) -> f64 {
        self.frame.distance_to_cell(z, self.nearest_cell(z))
    }

    /// Maximum distance between cell centers.
    pub fn diameter(&self) -> f64 {
        cells_diameter(self.frame, &self.cells)
    }

    /// Cells whose centers lie within distance `r` of `x`.
    pub fn ball(&self, x: ComplexPoint, r: f64) -> Result<CellSet> {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!("ball radius {r} must be positive")));
        }
        let out: CellSet = self
            .cells
            .iter()
            .copied()
            .filter(|&c| (self.frame.center(c) - x).norm() <= r)
            .collect();
        if out.is_empty() {
            Err(Error::Empty(format!("ball B({x}, {r}) misses the continuum")))
        } else {
            Ok(out)
        }
    }

    /// `sup |x - a|` over the region divided by `sup { r : B(a, r) ⊂ region }`,
    /// both taken in the continuum with cells treated as closed squares.
    pub fn roundness(&self, region: &CellSet, a: ComplexPoint) -> Result<f64> {
        let w = self.frame.cell_width;
        if !region.contains(&self.frame.cell_at(a)) {
            return Err(Error::InvalidArgument("roundness base point is not inside the region".into()));
        }
        let outer = region
            .iter()
            .map(|&c| self.frame.farthest_in_cell(a, c))
            .fold(0.0, f64::max);
        let inner = self
            .cells
            .iter()
            .filter(|c| !region.contains(c))
            .map(|&c| self.frame.distance_to_cell(a, c))
            .fold(f64::INFINITY, f64::min)
            .min(outer);
        if inner < w {
            return Err(Error::ResolutionLimited(format!(
                "inradius {inner:.3e} below cell width {w:.3e}"
            )));
        }
        Ok(outer / inner)
    }

    pub fn skeletonize(&self, prune_len: f64) -> Result<SkeletonGraph> {
        skeletonize_cells(self.frame, &self.cells, prune_len)
    }

    pub fn classify(&self, prune_len: f64) -> TopologyClass {
        classify(self, prune_len)
    }

    pub fn extract_ytree(&self, prune_len: f64) -> Option<crate::lifting::YTree> {
        extract_ytree(self, prune_len)
    }

    /// Default spur length for skeleton pruning: four cell widths.
    pub fn default_prune_len(&self) -> f64 {
        4.0 * self.frame.cell_width
    }
}

/// Diameter of a set of cells measured between centers.
pub fn cells_diameter(frame: Frame, cells: &CellSet) -> f64 {
    crate::planar::diameter(&frame.centers(cells))
}

fn ring(c: Cell, r: i32) -> impl Iterator<Item = Cell> {
    let top = (-r..=r).map(move |dx| Cell::new(c.x + dx, c.y + r));
    let bottom = (-r..=r).map(move |dx| Cell::new(c.x + dx, c.y - r));
    let left = (-r + 1..r).map(move |dy| Cell::new(c.x - r, c.y + dy));
    let right = (-r + 1..r).map(move |dy| Cell::new(c.x + r, c.y + dy));
    top.chain(bottom).chain(left).chain(right)
}

/// A rasterized test shape: cells whose centers satisfy `inside`, on the
/// lattice of the given frame over index range `[-n, n)²`.
pub fn rasterize(frame: Frame, n: i32, inside: impl Fn(ComplexPoint) -> bool) -> CellSet {
    let mut out = CellSet::new();
    for y in -n..n {
        for x in -n..n {
            let c = Cell::new(x, y);
            if inside(frame.center(c)) {
                out.insert(c);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexPoint {
        Complex64::new(re, im)
    }

    fn frame(w: f64) -> Frame {
        Frame { origin: c(0.0, 0.0), cell_width: w }
    }

    fn continuum(w: f64, n: i32, inside: impl Fn(ComplexPoint) -> bool) -> GridContinuum {
        let f = frame(w);
        GridContinuum::new(f.origin, w, rasterize(f, n, inside)).unwrap()
    }

    #[test]
    fn invariants_are_enforced() {
        let f = frame(1.0);
        let one: CellSet = [Cell::new(0, 0)].into_iter().collect();
        assert!(GridContinuum::new(f.origin, 1.0, one).is_err());
        let split: CellSet = [Cell::new(0, 0), Cell::new(5, 0)].into_iter().collect();
        assert!(GridContinuum::new(f.origin, 1.0, split).is_err());
        let pair: CellSet = [Cell::new(0, 0), Cell::new(1, 1)].into_iter().collect();
        assert!(GridContinuum::new(f.origin, 0.0, pair.clone()).is_err());
        assert!(GridContinuum::new(f.origin, 1.0, pair).is_ok());
    }

    #[test]
    fn diameter_examples() {
        let w = 1.0 / 256.0;
        let annulus = continuum(w, 300, |z| (z.norm() - 1.0).abs() < w);
        assert!((annulus.diameter() - 2.0).abs() <= 2.0 * w);
        let segment = continuum(w, 300, |z| z.re.abs() <= 1.0 && z.im.abs() < w);
        assert!((segment.diameter() - 2.0).abs() <= 2.0 * w);

        let axis: CellSet = [Cell::new(0, 0), Cell::new(1, 0)].into_iter().collect();
        let s = GridContinuum::new(c(0.0, 0.0), 0.5, axis).unwrap();
        assert_eq!(s.diameter(), 0.5);
        let diag: CellSet = [Cell::new(0, 0), Cell::new(1, 1)].into_iter().collect();
        let s = GridContinuum::new(c(0.0, 0.0), 0.5, diag).unwrap();
        assert!((s.diameter() - 0.5 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ball_examples() {
        let w = 1.0 / 64.0;
        let annulus = continuum(w, 80, |z| (z.norm() - 1.0).abs() < w);
        let x = annulus.center(*annulus.cells().iter().next().unwrap());
        assert!(!annulus.ball(x, 3.0 * w).unwrap().is_empty());
        assert_eq!(annulus.ball(x, 10.0).unwrap().len(), annulus.len());
        assert!(matches!(annulus.ball(c(0.0, 0.0), 0.5), Err(Error::Empty(_))));
        assert!(annulus.ball(x, 0.0).is_err());
    }

    #[test]
    fn roundness_examples() {
        let w = 1.0 / 128.0;
        let square = continuum(w, 300, |z| z.re.abs() < 2.0 && z.im.abs() < 2.0);
        let f = square.frame();
        let disk: CellSet = square.cells().iter().copied().filter(|&q| f.center(q).norm() < 1.0).collect();
        let r = square.roundness(&disk, c(0.0, 0.0)).unwrap();
        assert!((r - 1.0).abs() < 4.0 * w, "{r}");
        let r = square.roundness(&disk, c(0.5, 0.0)).unwrap();
        assert!((r - 3.0).abs() < 12.0 * w, "{r}");

        // 2x1 rectangle about its center: circumradius sqrt(1 + 1/4), inradius 1/2.
        let rect: CellSet = square
            .cells()
            .iter()
            .copied()
            .filter(|&q| f.center(q).re.abs() < 1.0 && f.center(q).im.abs() < 0.5)
            .collect();
        let r = square.roundness(&rect, c(0.0, 0.0)).unwrap();
        let oracle = (1.0f64 + 0.25).sqrt() / 0.5;
        assert!((r - oracle).abs() < 12.0 * w, "{r} vs {oracle}");
        assert!((oracle - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn roundness_is_resolution_limited_on_thin_regions() {
        let w = 0.1;
        let square = continuum(w, 20, |z| z.re.abs() < 1.0 && z.im.abs() < 1.0);
        let f = square.frame();
        let slab: CellSet = square.cells().iter().copied().filter(|&q| f.center(q).im.abs() < w).collect();
        assert!(matches!(square.roundness(&slab, c(0.05, 0.05)), Err(Error::ResolutionLimited(_))));
    }

    #[test]
    fn nearest_cell_prefers_closest_center() {
        let w = 0.1;
        let s = continuum(w, 20, |z| (z.norm() - 1.0).abs() < w);
        let q = s.nearest_cell(c(0.0, 0.0));
        let d = (s.center(q) - c(0.0, 0.0)).norm();
        let brute = s.cells().iter().map(|&k| s.center(k).norm()).fold(f64::INFINITY, f64::min);
        assert!((d - brute).abs() < 1e-12);
    }
}
