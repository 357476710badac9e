//! Box-counting dimension on the cell lattice.

use crate::error::{Error, Result};
use crate::geometry::GridContinuum;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Boxes finer than this many cells see the thickness of the discretized
/// band rather than the set.
pub const MIN_BOX_CELLS: i32 = 4;
const MIN_SCALES: usize = 5;
/// Default count window. Coarser scales see the overall shape of the set,
/// finer ones its discretized thickness.
pub const DEFAULT_MIN_BOXES: usize = 16;
pub const DEFAULT_MAX_BOXES: usize = 1024;

pub const BOX_DIM_CAVEAT: &str =
    "box-counting dimension of a finite discretization; it bounds Hausdorff dimension from above and is only a proxy for it";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxScale {
    pub box_cells: i32,
    pub box_size: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDimension {
    pub estimate: f64,
    pub r_squared: f64,
    /// Fit residuals in `log N`, one per used scale.
    pub residuals: Vec<f64>,
    pub scales: Vec<BoxScale>,
    pub caveat: String,
}

/// Boxes are aligned with the lower-left corner of the bounding box, so the
/// count reaches 1 once a box covers it.
fn count_boxes(s: &GridContinuum, k: i32) -> usize {
    let (x0, y0, _, _) = s.bounds();
    let boxes: HashSet<(i32, i32)> = s.cells().iter().map(|c| ((c.x - x0).div_euclid(k), (c.y - y0).div_euclid(k))).collect();
    boxes.len()
}

/// Least-squares slope of `log N(ε)` against `log(1/ε)` over dyadic box
/// sizes of at least `MIN_BOX_CELLS` cells whose counts lie in
/// `[min_boxes, max_boxes]`.
pub fn box_counting_dim(s: &GridContinuum, min_boxes: usize, max_boxes: usize) -> Result<BoxDimension> {
    let mut scales = Vec::new();
    let mut k = MIN_BOX_CELLS;
    loop {
        let count = count_boxes(s, k);
        if count < min_boxes.max(1) || count == 1 {
            break;
        }
        if count <= max_boxes {
            scales.push(BoxScale { box_cells: k, box_size: k as f64 * s.cell_width(), count });
        }
        k *= 2;
    }
    if scales.len() < MIN_SCALES {
        return Err(Error::Insufficient(format!(
            "{} usable dyadic scales between {min_boxes} and {max_boxes} boxes, need {MIN_SCALES}",
            scales.len()
        )));
    }
    let xs: Vec<f64> = scales.iter().map(|b| -b.box_size.ln()).collect();
    let ys: Vec<f64> = scales.iter().map(|b| (b.count as f64).ln()).collect();
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys);
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - (slope * x + intercept)).collect();
    Ok(BoxDimension { estimate: slope, r_squared, residuals, scales, caveat: BOX_DIM_CAVEAT.into() })
}

/// `(slope, intercept, r²)` of the least-squares line.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, Frame};
    use num_complex::Complex64;

    fn cont(w: f64, n: i32, inside: impl Fn(Complex64) -> bool) -> GridContinuum {
        let f = Frame { origin: Complex64::new(0.0, 0.0), cell_width: w };
        GridContinuum::new(f.origin, w, rasterize(f, n, inside)).unwrap()
    }

    #[test]
    fn segment_and_square() {
        let w = 1.0 / 1024.0;
        let seg = cont(w, 1100, |z| z.re.abs() <= 1.0 && z.im.abs() < w);
        let d = box_counting_dim(&seg, 4, usize::MAX).unwrap();
        assert!((d.estimate - 1.0).abs() < 0.03, "{d:?}");
        let sq = cont(w, 600, |z| z.re.abs() < 0.5 && z.im.abs() < 0.5);
        let d = box_counting_dim(&sq, 4, usize::MAX).unwrap();
        assert!((d.estimate - 2.0).abs() < 0.03, "{d:?}");
        assert!(d.r_squared > 0.99);
    }

    #[test]
    fn too_few_scales() {
        let w = 1.0 / 32.0;
        let seg = cont(w, 40, |z| z.re.abs() <= 1.0 && z.im.abs() < w);
        assert!(matches!(box_counting_dim(&seg, 4, usize::MAX), Err(Error::Insufficient(_))));
    }

    #[test]
    fn fit_is_exact_on_lines() {
        let (m, b, r2) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert_eq!((m, b, r2), (2.0, 1.0, 1.0));
    }
}
