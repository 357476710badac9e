//! Antennas: Y-trees whose tips stay far from the other legs relative to the
//! size of the region holding them.

mod boxdim;

pub use boxdim::{
    box_counting_dim, linear_fit, BoxDimension, BoxScale, BOX_DIM_CAVEAT, DEFAULT_MAX_BOXES, DEFAULT_MIN_BOXES, MIN_BOX_CELLS,
};

use crate::dynamics::ComplexPoint;
use crate::error::{Error, Result};
use crate::geometry::{cells_diameter, skeletonize_cells, Cell, CellSet, Frame, GridContinuum, SkeletonGraph};
use crate::lifting::YTree;
use crate::planar::{point_polyline_distance, point_segment_distance, truncate_polyline};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Balls with fewer cells than this cannot host a meaningful Y.
pub const MIN_BALL_CELLS: usize = 8;
const TRIM_FRACTIONS: [f64; 4] = [1.0, 0.75, 0.5, 0.3];

/// `min_i dist(tip_i, leg_j ∪ leg_k) / region_diameter`.
pub fn antenna_constant(y: &YTree, region_diameter: f64) -> f64 {
    let legs = y.legs();
    let tips = y.tips();
    let mut best = f64::INFINITY;
    for i in 0..3 {
        let d = (0..3)
            .filter(|&j| j != i)
            .map(|j| point_polyline_distance(tips[i], legs[j].vertices()))
            .fold(f64::INFINITY, f64::min);
        best = best.min(d);
    }
    best / region_diameter
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntennaCertificate {
    pub ball_center: ComplexPoint,
    pub ball_radius: f64,
    pub ytree: YTree,
    pub c_achieved: f64,
    pub region_diameter: f64,
}

impl AntennaCertificate {
    /// Re-checks the certificate against the continuum: tree invariants, the
    /// tree inside `ball ∩ s`, and `c` recomputed by brute force.
    pub fn revalidate(&self, s: &GridContinuum) -> Result<()> {
        let tol = s.cell_width();
        self.ytree.validate(tol.min(1e-6))?;
        let ball = s.ball(self.ball_center, self.ball_radius)?;
        let frame = s.frame();
        for p in self.ytree.points() {
            if !point_in_cells(frame, &ball, p) {
                return Err(Error::InvalidArgument(format!("tree point {p} leaves the ball")));
            }
        }
        let diam = cells_diameter(frame, &ball);
        if (diam - self.region_diameter).abs() > 1e-12 * diam {
            return Err(Error::InvalidArgument("region diameter does not match the ball".into()));
        }
        let c = brute_force_constant(&self.ytree, diam);
        if (c - self.c_achieved).abs() > 1e-12 || !(c > 0.0) {
            return Err(Error::InvalidArgument(format!("recomputed c = {c} differs from {}", self.c_achieved)));
        }
        Ok(())
    }
}

/// Independent evaluation of the antenna constant: every tip against every
/// segment of the other legs.
fn brute_force_constant(y: &YTree, diam: f64) -> f64 {
    let mut best = f64::INFINITY;
    for (i, tip) in y.tips().iter().enumerate() {
        for (j, leg) in y.legs().iter().enumerate() {
            if i == j {
                continue;
            }
            for seg in leg.vertices().windows(2) {
                best = best.min(point_segment_distance(*tip, seg[0], seg[1]));
            }
        }
    }
    best / diam
}

/// Whether `p` lies in the closed square of some cell of `cells`.
pub fn point_in_cells(frame: Frame, cells: &CellSet, p: ComplexPoint) -> bool {
    let c = frame.cell_at(p);
    (-1..=1).any(|dx| {
        (-1..=1).any(|dy| {
            let q = Cell::new(c.x + dx, c.y + dy);
            cells.contains(&q) && frame.distance_to_cell(p, q) <= 1e-12 * frame.cell_width
        })
    })
}

/// Legs from `v`: each incident edge, extended through junctions by always
/// continuing along the edge whose far end is farthest from `v`.
fn greedy_legs(g: &SkeletonGraph, v: usize) -> Vec<Vec<ComplexPoint>> {
    let o = g.vertices[v];
    let mut out = Vec::new();
    for (k0, first) in g.incident_paths(v) {
        let mut used = vec![k0];
        let mut visited = vec![v];
        let mut path = first;
        let mut u = g.other_end(k0, v);
        if u == v {
            truncate_loop(&mut path);
            out.push(path);
            continue;
        }
        visited.push(u);
        loop {
            let next = g
                .incident_paths(u)
                .into_iter()
                .filter(|(k, _)| !used.contains(k))
                .filter(|(k, _)| !visited.contains(&g.other_end(*k, u)))
                .max_by(|a, b| {
                    let fa = (g.vertices[g.other_end(a.0, u)] - o).norm();
                    let fb = (g.vertices[g.other_end(b.0, u)] - o).norm();
                    fa.total_cmp(&fb)
                });
            let Some((k, p)) = next else { break };
            used.push(k);
            path.extend(p.into_iter().skip(1));
            u = g.other_end(k, u);
            visited.push(u);
        }
        out.push(path);
    }
    out
}

fn truncate_loop(path: &mut Vec<ComplexPoint>) {
    let len = crate::planar::polyline_length(path);
    *path = truncate_polyline(path, 0.45 * len);
}

/// Best antenna among skeleton branch vertices of `ball`, or `None` when
/// none reaches `c_min`. Balls under `MIN_BALL_CELLS` cells are
/// `ResolutionLimited`.
pub fn find_antenna(s: &GridContinuum, ball: &CellSet, c_min: f64) -> Result<Option<AntennaCertificate>> {
    find_antenna_in(s, ball, c_min, None)
}

fn find_antenna_in(
    s: &GridContinuum,
    ball: &CellSet,
    c_min: f64,
    ball_geom: Option<(ComplexPoint, f64)>,
) -> Result<Option<AntennaCertificate>> {
    if ball.is_empty() {
        return Err(Error::Empty("empty ball".into()));
    }
    if ball.len() < MIN_BALL_CELLS {
        return Err(Error::ResolutionLimited(format!("ball has {} cells, need {MIN_BALL_CELLS}", ball.len())));
    }
    let frame = s.frame();
    let diam = cells_diameter(frame, ball);
    let (ball_center, ball_radius) = ball_geom.unwrap_or_else(|| enclosing_ball(frame, ball));
    let g = match skeletonize_cells(frame, ball, s.default_prune_len()) {
        Ok(g) => g,
        Err(Error::Empty(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let mut candidates: Vec<(f64, ComplexPoint, Vec<Vec<ComplexPoint>>)> = Vec::new();
    for v in g.branch_vertices() {
        let legs = greedy_legs(&g, v);
        let o = g.vertices[v];
        for a in 0..legs.len() {
            for b in (a + 1)..legs.len() {
                for c in (b + 1)..legs.len() {
                    let trio = [&legs[a], &legs[b], &legs[c]];
                    let shortest = trio.iter().map(|l| crate::planar::polyline_length(l)).fold(f64::INFINITY, f64::min);
                    for f in TRIM_FRACTIONS {
                        let trimmed: Vec<Vec<ComplexPoint>> = if f == 1.0 {
                            trio.iter().map(|l| l.to_vec()).collect()
                        } else {
                            trio.iter().map(|l| truncate_polyline(l, f * shortest)).collect()
                        };
                        if trimmed.iter().any(|l| l.len() < 2) {
                            continue;
                        }
                        let c_val = quick_constant(&trimmed, diam);
                        if c_val > 0.0 {
                            candidates.push((c_val, o, trimmed));
                        }
                    }
                }
            }
        }
    }
    candidates.sort_by(|x, y| y.0.total_cmp(&x.0));
    for (c_val, o, legs) in candidates {
        if c_val < c_min {
            break;
        }
        if let Ok(y) = YTree::new(o, legs, 1e-9) {
            let cert = AntennaCertificate { ball_center, ball_radius, ytree: y, c_achieved: c_val, region_diameter: diam };
            return Ok(Some(cert));
        }
    }
    Ok(None)
}

fn quick_constant(legs: &[Vec<ComplexPoint>], diam: f64) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..3 {
        let tip = *legs[i].last().unwrap();
        for (j, leg) in legs.iter().enumerate() {
            if i != j {
                best = best.min(point_polyline_distance(tip, leg));
            }
        }
    }
    best / diam
}

/// A ball around the cell centers: midpoint of the bounding box, radius to
/// the farthest center.
fn enclosing_ball(frame: Frame, cells: &CellSet) -> (ComplexPoint, f64) {
    let pts = frame.centers(cells);
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in &pts {
        lo = ComplexPoint::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = ComplexPoint::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    let c = (lo + hi) / 2.0;
    let r = pts.iter().map(|p| (p - c).norm()).fold(0.0, f64::max);
    (c, r.max(frame.cell_width))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BallStatus {
    Found,
    NotFound,
    ResolutionLimited,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallRecord {
    pub scale_index: usize,
    pub radius: f64,
    pub center: ComplexPoint,
    pub cells: usize,
    pub status: BallStatus,
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<AntennaCertificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntennaScanReport {
    pub scales: Vec<f64>,
    pub centers: Vec<ComplexPoint>,
    pub c_min: f64,
    /// Smallest achieved `c` at each scale, over balls where one was found.
    pub per_scale_worst: Vec<Option<f64>>,
    pub global_inf_c: Option<f64>,
    /// Balls where no antenna reaching `c_min` was found.
    pub failures: Vec<BallRecord>,
    pub resolution_limited: Vec<BallRecord>,
    pub records: Vec<BallRecord>,
    pub antenna_like: bool,
    pub verdict: String,
}

/// `n` radii geometrically spaced over `[lo, hi]`.
pub fn geometric_scales(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    (0..n).map(|k| lo * ratio.powi(k as i32)).collect()
}

/// Seeded farthest-point sampling of `n` cell centers.
pub fn blue_noise_centers(s: &GridContinuum, n: usize, seed: u64) -> Vec<ComplexPoint> {
    let pts: Vec<ComplexPoint> = s.cells().iter().map(|&c| s.center(c)).collect();
    let n = n.min(pts.len());
    if n == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.gen_range(0..pts.len());
    let mut chosen = vec![pts[first]];
    let mut dist: Vec<f64> = pts.iter().map(|p| (p - pts[first]).norm()).collect();
    while chosen.len() < n {
        let (k, _) = dist.iter().enumerate().fold((0, -1.0), |acc, (k, &d)| if d > acc.1 { (k, d) } else { acc });
        chosen.push(pts[k]);
        for (d, p) in dist.iter_mut().zip(&pts) {
            *d = d.min((p - pts[k]).norm());
        }
    }
    chosen
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub n_scales: usize,
    pub n_centers: usize,
    pub c_min: f64,
    /// Smallest radius in cell widths, at least 8. Below about 32 cells the
    /// side branches of a dendrite near its endpoints are thinner than the
    /// skeleton pruning length and the search misses them.
    pub min_radius_cells: f64,
    pub seed: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { n_scales: 4, n_centers: 16, c_min: 0.01, min_radius_cells: 32.0, seed: 0 }
    }
}

pub fn antenna_scan(s: &GridContinuum, n_scales: usize, n_centers: usize, c_min: f64) -> Result<AntennaScanReport> {
    antenna_scan_with(s, &ScanOptions { n_scales, n_centers, c_min, ..ScanOptions::default() })
}

/// Runs `find_antenna` on `n_centers` blue-noise centers at each of
/// `n_scales` radii spaced geometrically up to half the diameter..
pub fn antenna_scan_with(s: &GridContinuum, opts: &ScanOptions) -> Result<AntennaScanReport> {
    if opts.n_scales < 2 {
        return Err(Error::InvalidArgument("antenna scan needs at least 2 scales".into()));
    }
    let lo = opts.min_radius_cells.max(8.0) * s.cell_width();
    let hi = s.diameter() / 2.0;
    if hi <= lo {
        return Err(Error::ResolutionLimited(format!("half-diameter {hi:.3e} below the smallest radius {lo:.3e}")));
    }
    let scales = geometric_scales(lo, hi, opts.n_scales);
    let centers = blue_noise_centers(s, opts.n_centers, opts.seed);
    let jobs: Vec<(usize, f64, ComplexPoint)> = scales
        .iter()
        .enumerate()
        .flat_map(|(k, &r)| centers.iter().map(move |&c| (k, r, c)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(k, r, x)| -> Result<BallRecord> {
            let ball = s.ball(x, r)?;
            let cells = ball.len();
            let rec = |status, certificate: Option<AntennaCertificate>| BallRecord {
                scale_index: k,
                radius: r,
                center: x,
                cells,
                status,
                c: certificate.as_ref().map(|c| c.c_achieved),
                certificate,
            };
            Ok(match find_antenna_in(s, &ball, opts.c_min, Some((x, r))) {
                Ok(Some(cert)) => rec(BallStatus::Found, Some(cert)),
                Ok(None) => rec(BallStatus::NotFound, None),
                Err(Error::ResolutionLimited(_)) => rec(BallStatus::ResolutionLimited, None),
                Err(e) => return Err(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let per_scale_worst: Vec<Option<f64>> = (0..scales.len())
        .map(|k| {
            records
                .iter()
                .filter(|r| r.scale_index == k)
                .filter_map(|r| r.c)
                .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.min(c))))
        })
        .collect();
    let global_inf_c = per_scale_worst.iter().flatten().cloned().fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.min(c))));
    let failures: Vec<BallRecord> = records.iter().filter(|r| r.status == BallStatus::NotFound).cloned().map(strip).collect();
    let resolution_limited: Vec<BallRecord> =
        records.iter().filter(|r| r.status == BallStatus::ResolutionLimited).cloned().map(strip).collect();
    let found = records.iter().filter(|r| r.status == BallStatus::Found).count();
    let antenna_like = failures.is_empty() && resolution_limited.is_empty() && global_inf_c.map_or(false, |c| c > 0.0);
    let verdict = if found == 0 {
        "not antenna-like at any tested scale".to_string()
    } else if antenna_like {
        format!("antenna-like at all tested scales, inf c = {:.4}", global_inf_c.unwrap())
    } else {
        format!("antennas found in {found} of {} balls; not found does not mean absent at finer resolution", records.len())
    };
    Ok(AntennaScanReport {
        scales,
        centers,
        c_min: opts.c_min,
        per_scale_worst,
        global_inf_c,
        failures,
        resolution_limited,
        records,
        antenna_like,
        verdict,
    })
}

fn strip(mut r: BallRecord) -> BallRecord {
    r.certificate = None;
    r
}

impl AntennaScanReport {
    /// `scale,radius,center_re,center_im,cells,c,status` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scale,radius,center_re,center_im,cells,c,status\n");
        for r in &self.records {
            let status = match r.status {
                BallStatus::Found => "found",
                BallStatus::NotFound => "not-found",
                BallStatus::ResolutionLimited => "resolution-limited",
            };
            let c = r.c.map(|c| format!("{c:?}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{:?},{:?},{:?},{},{},{}\n",
                r.scale_index, r.radius, r.center.re, r.center.im, r.cells, c, status
            ));
        }
        out
    }

    /// Leg polylines of every certificate, for raster overlays.
    pub fn overlay_polylines(&self) -> Vec<Vec<ComplexPoint>> {
        self.records
            .iter()
            .filter_map(|r| r.certificate.as_ref())
            .flat_map(|c| c.ytree.legs().iter().map(|l| l.vertices().to_vec()))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AzzamBound {
    pub c: f64,
    pub bound_form: String,
    pub numeric_bound: Option<f64>,
    /// `c` so small that the bound says little beyond `hdim > 1`.
    pub degenerate: bool,
}

/// Threshold on `c²` below which the bound is flagged degenerate.
const DEGENERATE_C2: f64 = 1e-6;

/// `hdim > 1 + b·c²`, numeric only when `b` is supplied.
pub fn azzam_bound(c: f64, b: Option<f64>) -> Result<AzzamBound> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidArgument(format!("antenna constant {c} outside (0, 1)")));
    }
    if let Some(b) = b {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidArgument(format!("constant b = {b} must be positive")));
        }
    }
    let c2 = c * c;
    Ok(AzzamBound {
        c,
        bound_form: format!("hdim > 1 + b·{c2}"),
        numeric_bound: b.map(|b| 1.0 + b * c2),
        degenerate: c2 < DEGENERATE_C2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rasterize;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> ComplexPoint {
        Complex64::new(re, im)
    }

    fn ytree(dirs: &[f64]) -> YTree {
        let o = c(0.0, 0.0);
        let legs = dirs.iter().map(|&t| vec![o, Complex64::from_polar(1.0, t)]).collect();
        YTree::new(o, legs, 1e-9).unwrap()
    }

    fn cont(w: f64, n: i32, inside: impl Fn(ComplexPoint) -> bool) -> GridContinuum {
        let f = Frame { origin: c(0.0, 0.0), cell_width: w };
        GridContinuum::new(f.origin, w, rasterize(f, n, inside)).unwrap()
    }

    #[test]
    fn constants_of_model_trees() {
        let y = ytree(&[0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0]);
        assert!((antenna_constant(&y, 3f64.sqrt()) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let t = ytree(&[0.0, PI / 2.0, PI]);
        assert!((antenna_constant(&t, 2.0) - 0.5).abs() < 1e-15);
        assert!((brute_force_constant(&t, 2.0) - 0.5).abs() < 1e-15);
        assert!(antenna_constant(&t, 3.0) < antenna_constant(&t, 2.0));
    }

    #[test]
    fn plus_sign_certificate() {
        let w = 1.0 / 32.0;
        let plus = cont(w, 40, |z| (z.re.abs() < 1.0 && z.im.abs() < w) || (z.im.abs() < 1.0 && z.re.abs() < w));
        let cert = find_antenna(&plus, plus.cells(), 0.2).unwrap().unwrap();
        assert!(cert.c_achieved >= 0.2);
        // Oracle: three full arms of lengths ~1 at right angles, tip-to-leg
        // distance ~1 over a diameter of ~2.
        assert!((cert.c_achieved - 0.5).abs() < 0.05, "{}", cert.c_achieved);
        cert.revalidate(&plus).unwrap();
        assert!(find_antenna(&plus, plus.cells(), 0.9).unwrap().is_none());
    }

    #[test]
    fn annulus_has_no_antenna() {
        let w = 1.0 / 32.0;
        let ring = cont(w, 40, |z| (z.norm() - 1.0).abs() < 1.5 * w);
        assert!(find_antenna(&ring, ring.cells(), 0.0).unwrap().is_none());
        let report = antenna_scan(&ring, 3, 5, 0.01).unwrap();
        assert!(report.failures.len() + report.resolution_limited.len() == 15);
        assert_eq!(report.verdict, "not antenna-like at any tested scale");
        assert!(report.global_inf_c.is_none());
    }

    #[test]
    fn small_ball_is_resolution_limited() {
        let w = 1.0 / 32.0;
        let ring = cont(w, 40, |z| (z.norm() - 1.0).abs() < 1.5 * w);
        let x = ring.center(*ring.cells().iter().next().unwrap());
        let ball = ring.ball(x, 1.1 * w).unwrap();
        assert!(matches!(find_antenna(&ring, &ball, 0.0), Err(Error::ResolutionLimited(_))));
    }

    #[test]
    fn azzam() {
        let a = azzam_bound(0.5, None).unwrap();
        assert_eq!(a.bound_form, "hdim > 1 + b·0.25");
        assert_eq!(a.numeric_bound, None);
        assert!((azzam_bound(0.5, Some(0.1)).unwrap().numeric_bound.unwrap() - 1.025).abs() < 1e-15);
        assert!(azzam_bound(1e-4, None).unwrap().degenerate);
        assert!(azzam_bound(0.0, None).is_err());
        assert!(azzam_bound(1.0, None).is_err());
    }

    #[test]
    fn scales_and_centers() {
        let s = geometric_scales(1.0, 8.0, 4);
        assert!((s[1] - 2.0).abs() < 1e-12 && (s[3] - 8.0).abs() < 1e-12);
        let w = 1.0 / 32.0;
        let ring = cont(w, 40, |z| (z.norm() - 1.0).abs() < 1.5 * w);
        let a = blue_noise_centers(&ring, 4, 3);
        assert_eq!(a, blue_noise_centers(&ring, 4, 3));
        // farthest-point sampling spreads the first two to opposite sides
        assert!((a[0] - a[1]).norm() > 1.9);
    }
}
