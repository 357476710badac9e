//! Escape-time discretization of Julia sets.
//!
//! Boundary cells are the non-escaping cells with an escaping neighbour,
//! plus escaping cells whose distance estimate `|z| ln|z| / |dz|` is below
//! `de_factor` cell widths. The second rule is what catches Julia sets with
//! empty interior (dendrites, intervals), where almost every sample point
//! escapes.

use super::{ComplexPoint, PolynomialMap};
use crate::error::{Error, Result};
use crate::geometry::raster::{components, N8};
use crate::geometry::{Cell, CellSet, GridContinuum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const DE_BAILOUT: f64 = 1e8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JuliaOptions {
    /// Cells along each side of the square window.
    pub resolution: usize,
    pub max_iter: usize,
    pub de_factor: f64,
    /// Side of the coarse grid used to locate the window.
    pub coarse_resolution: usize,
}

impl JuliaOptions {
    pub fn new(resolution: usize, max_iter: usize) -> Self {
        Self { resolution, max_iter, de_factor: 1.0, coarse_resolution: 128 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JuliaSet {
    pub continuum: GridContinuum,
    /// 8-connected components of the raw boundary band; the largest is kept.
    pub component_count: usize,
    pub window_center: ComplexPoint,
    pub window_half_width: f64,
}

pub fn julia_set(map: &PolynomialMap, resolution: usize, max_iter: usize) -> Result<JuliaSet> {
    julia_set_with(map, &JuliaOptions::new(resolution, max_iter))
}

struct Sample {
    escaped: bool,
    de: f64,
}

fn sample(map: &PolynomialMap, c: ComplexPoint, radius: f64, max_iter: usize) -> Sample {
    let mut z = c;
    let mut dz = Complex64::new(1.0, 0.0);
    let mut escaped = false;
    for k in 0..max_iter {
        let (fz, dfz) = map.eval_with_derivative(z);
        dz *= dfz;
        z = fz;
        if z.norm() > radius {
            escaped = true;
            break;
        }
        // Strong contraction of a neighbourhood: the point is in an
        // attracting basin, stop early.
        if k >= 20 && dz.norm() < 1e-20 {
            break;
        }
    }
    if !escaped {
        return Sample { escaped: false, de: 0.0 };
    }
    // A few more steps make the estimate asymptotically sharp.
    for _ in 0..64 {
        let m = z.norm();
        if m > DE_BAILOUT || !m.is_finite() {
            break;
        }
        let (fz, dfz) = map.eval_with_derivative(z);
        dz *= dfz;
        z = fz;
    }
    let m = z.norm();
    let de = if m.is_finite() && dz.norm().is_finite() && dz.norm() > 0.0 {
        m * m.ln() / dz.norm()
    } else {
        0.0
    };
    Sample { escaped: true, de }
}

/// Band cells on an `n × n` grid whose cell `(i, j)` has lower-left corner
/// `origin + w·(i + ij)`.
fn band(map: &PolynomialMap, origin: ComplexPoint, w: f64, n: usize, max_iter: usize, de_factor: f64) -> CellSet {
    let radius = map.escape_radius();
    let rows: Vec<Vec<Sample>> = (0..n)
        .into_par_iter()
        .map(|j| {
            (0..n)
                .map(|i| {
                    let c = origin + Complex64::new((i as f64 + 0.5) * w, (j as f64 + 0.5) * w);
                    sample(map, c, radius, max_iter)
                })
                .collect()
        })
        .collect();
    let escaped = |i: i64, j: i64| {
        if i < 0 || j < 0 || i >= n as i64 || j >= n as i64 {
            true
        } else {
            rows[j as usize][i as usize].escaped
        }
    };
    let mut out = CellSet::new();
    for j in 0..n {
        for i in 0..n {
            let s = &rows[j][i];
            let keep = if s.escaped {
                s.de < de_factor * w
            } else {
                N8.iter().any(|(dx, dy)| escaped(i as i64 + *dx as i64, j as i64 + *dy as i64))
            };
            if keep {
                out.insert(Cell::new(i as i32, j as i32));
            }
        }
    }
    out
}

pub fn julia_set_with(map: &PolynomialMap, opts: &JuliaOptions) -> Result<JuliaSet> {
    if opts.resolution < 64 {
        return Err(Error::InvalidArgument(format!("resolution {} is below 64", opts.resolution)));
    }
    if opts.max_iter == 0 || !(opts.de_factor > 0.0) {
        return Err(Error::InvalidArgument("max_iter and de_factor must be positive".into()));
    }

    // Locate the set on a coarse grid over the escape disk.
    let r = map.escape_radius();
    let nc = opts.coarse_resolution.max(16);
    let wc = 2.0 * r / nc as f64;
    let coarse = band(map, Complex64::new(-r, -r), wc, nc, opts.max_iter, 2.0);
    if coarse.is_empty() {
        return Err(Error::Empty("no Julia-set cells found on the coarse grid".into()));
    }
    let (mut x0, mut y0, mut x1, mut y1) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
    for c in &coarse {
        x0 = x0.min(c.x);
        y0 = y0.min(c.y);
        x1 = x1.max(c.x);
        y1 = y1.max(c.y);
    }
    let lo = Complex64::new(-r + x0 as f64 * wc, -r + y0 as f64 * wc);
    let hi = Complex64::new(-r + (x1 + 1) as f64 * wc, -r + (y1 + 1) as f64 * wc);
    let window_center = (lo + hi) / 2.0;
    let window_half_width = 0.5 * (hi - lo).re.max((hi - lo).im) + wc;

    let n = opts.resolution;
    let w = 2.0 * window_half_width / n as f64;
    let origin = window_center - Complex64::new(window_half_width, window_half_width);
    let cells = band(map, origin, w, n, opts.max_iter, opts.de_factor);
    let comps = components(&cells);
    let component_count = comps.len();
    if component_count > 1 {
        log::warn!(
            "Julia band of {} has {component_count} components; keeping the largest (resolution may be insufficient)",
            map.to_spec()
        );
    }
    let largest = comps.into_iter().next().ok_or_else(|| Error::Empty("empty Julia band".into()))?;
    let continuum = GridContinuum::new(origin, w, largest)?;
    Ok(JuliaSet { continuum, component_count, window_center, window_half_width })
}
