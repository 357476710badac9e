//! Lifting polylines and Y-trees through a polynomial by inverse-branch
//! continuation.

use crate::dynamics::{ComplexPoint, PolynomialMap, RootFinder};
use crate::error::{Error, Result};
use crate::planar::{point_segment_distance, segments_intersect};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_TOL_GEOM: f64 = 1e-6;

/// Accept a continuation step once nearest/second-nearest preimage distance
/// falls below this ratio.
const BRANCH_RATIO: f64 = 1.0 / 3.0;
const MAX_REFINE: u32 = 40;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polyline {
    vertices: Vec<ComplexPoint>,
}

impl Polyline {
    /// Checks that consecutive vertices are distinct and non-adjacent
    /// segments do not meet.
    pub fn new(vertices: Vec<ComplexPoint>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidYTree("polyline needs at least two vertices".into()));
        }
        if vertices.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidYTree("non-finite polyline vertex".into()));
        }
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidYTree("repeated consecutive vertex".into()));
        }
        let n = vertices.len() - 1;
        for i in 0..n {
            for j in (i + 2)..n {
                if segments_intersect(vertices[i], vertices[i + 1], vertices[j], vertices[j + 1]) {
                    return Err(Error::InvalidYTree(format!("polyline self-intersects at segments {i} and {j}")));
                }
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[ComplexPoint] {
        &self.vertices
    }

    pub fn start(&self) -> ComplexPoint {
        self.vertices[0]
    }

    pub fn end(&self) -> ComplexPoint {
        *self.vertices.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn length(&self) -> f64 {
        crate::planar::polyline_length(&self.vertices)
    }

    pub fn into_vertices(self) -> Vec<ComplexPoint> {
        self.vertices
    }
}

#[derive(Deserialize)]
struct RawYTree {
    center: ComplexPoint,
    legs: Vec<Vec<ComplexPoint>>,
}

/// Three polyline legs issuing from a common center and meeting only there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawYTree")]
pub struct YTree {
    center: ComplexPoint,
    legs: Vec<Polyline>,
}

impl TryFrom<RawYTree> for YTree {
    type Error = Error;

    fn try_from(raw: RawYTree) -> Result<Self> {
        YTree::new(raw.center, raw.legs, DEFAULT_TOL_GEOM)
    }
}

impl YTree {
    /// Builds and validates a tree. Each leg must start at `center`; tips
    /// must be at least `tol_geom` apart.
    pub fn new(center: ComplexPoint, legs: Vec<Vec<ComplexPoint>>, tol_geom: f64) -> Result<Self> {
        if legs.len() != 3 {
            return Err(Error::InvalidYTree(format!("expected 3 legs, got {}", legs.len())));
        }
        let legs = legs.into_iter().map(Polyline::new).collect::<Result<Vec<_>>>()?;
        let y = Self { center, legs };
        y.validate(tol_geom)?;
        Ok(y)
    }

    pub fn validate(&self, tol_geom: f64) -> Result<()> {
        for (k, leg) in self.legs.iter().enumerate() {
            if (leg.start() - self.center).norm() > 0.0 {
                return Err(Error::InvalidYTree(format!("leg {k} does not start at the center")));
            }
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                let (a, b) = (self.legs[i].vertices(), self.legs[j].vertices());
                if (a[a.len() - 1] - b[b.len() - 1]).norm() < tol_geom {
                    return Err(Error::InvalidYTree(format!("tips {i} and {j} closer than {tol_geom:e}")));
                }
                if legs_meet_away_from_center(a, b) {
                    return Err(Error::InvalidYTree(format!("legs {i} and {j} meet away from the center")));
                }
            }
        }
        Ok(())
    }

    pub fn center(&self) -> ComplexPoint {
        self.center
    }

    pub fn legs(&self) -> &[Polyline] {
        &self.legs
    }

    pub fn tips(&self) -> [ComplexPoint; 3] {
        [self.legs[0].end(), self.legs[1].end(), self.legs[2].end()]
    }

    pub fn points(&self) -> impl Iterator<Item = ComplexPoint> + '_ {
        self.legs.iter().flat_map(|l| l.vertices().iter().copied())
    }

    /// Image under `z ↦ a·z + b`, unvalidated (similarities preserve the
    /// invariants).
    pub fn map_affine(&self, a: ComplexPoint, b: ComplexPoint) -> Self {
        let legs = self
            .legs
            .iter()
            .map(|l| Polyline { vertices: l.vertices.iter().map(|z| a * z + b).collect() })
            .collect();
        Self { center: a * self.center + b, legs }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("YTree serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }
}

fn legs_meet_away_from_center(a: &[ComplexPoint], b: &[ComplexPoint]) -> bool {
    for i in 0..a.len() - 1 {
        for j in 0..b.len() - 1 {
            if i == 0 && j == 0 {
                // Both start at the center; they overlap only if one far end
                // lies on the other segment.
                if point_segment_distance(a[1], b[0], b[1]) == 0.0 || point_segment_distance(b[1], a[0], a[1]) == 0.0 {
                    return true;
                }
                continue;
            }
            if segments_intersect(a[i], a[i + 1], b[j], b[j + 1]) {
                return true;
            }
        }
    }
    false
}

/// Lifts `gamma` through `map` starting at `x0`: the result has one vertex
/// per input vertex and `|f(lift_i) - gamma_i| < tol`.
pub fn lift_path(map: &PolynomialMap, gamma: &Polyline, x0: ComplexPoint, tol: f64) -> Result<Polyline> {
    lift_vertices(map, gamma.vertices(), x0, tol).and_then(Polyline::new)
}

fn lift_vertices(map: &PolynomialMap, gamma: &[ComplexPoint], x0: ComplexPoint, tol: f64) -> Result<Vec<ComplexPoint>> {
    let start_err = (map.eval(x0) - gamma[0]).norm();
    if !(start_err < tol) {
        return Err(Error::LiftStart(format!("|f(x0) - gamma(0)| = {start_err:.3e} exceeds {tol:e}")));
    }
    let finder = RootFinder::default();
    let mut out = Vec::with_capacity(gamma.len());
    out.push(x0);
    let mut cur = x0;
    for (seg, w) in gamma.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let mut t = 0.0;
        let mut h = 1.0f64;
        let mut depth = 0u32;
        while t < 1.0 {
            let s = (t + h).min(1.0);
            let target = a + (b - a) * s;
            let roots = finder.raw_roots(map, target)?;
            let mut d: Vec<(f64, ComplexPoint)> = roots.iter().map(|&r| ((r - cur).norm(), r)).collect();
            d.sort_by(|x, y| x.0.total_cmp(&y.0));
            let ok = d.len() < 2 || d[0].0 < BRANCH_RATIO * d[1].0;
            if ok {
                cur = d[0].1;
                t = s;
                h = (2.0 * h).min(1.0);
                depth = depth.saturating_sub(1);
            } else {
                h /= 2.0;
                depth += 1;
                if depth > MAX_REFINE {
                    return Err(Error::AmbiguousBranch { segment: seg, parameter: s });
                }
            }
        }
        if (map.eval(cur) - b).norm() >= tol {
            return Err(Error::RootsNotConverged { max_residual: (map.eval(cur) - b).norm(), residuals: vec![] });
        }
        out.push(cur);
    }
    Ok(out)
}

/// Lifts every leg from `x0`; fails with `LegCollision` when the lifted
/// legs stop forming a Y at tolerance `tol_geom`.
pub fn lift_ytree(map: &PolynomialMap, y: &YTree, x0: ComplexPoint, tol: f64) -> Result<YTree> {
    lift_ytree_geom(map, y, x0, tol, DEFAULT_TOL_GEOM)
}

pub fn lift_ytree_geom(map: &PolynomialMap, y: &YTree, x0: ComplexPoint, tol: f64, tol_geom: f64) -> Result<YTree> {
    let mut legs = Vec::with_capacity(3);
    for leg in y.legs() {
        legs.push(lift_vertices(map, leg.vertices(), x0, tol)?);
    }
    YTree::new(x0, legs, tol_geom).map_err(|e| Error::LegCollision(e.to_string()))
}

/// All lifts of `y` under `f^n` (at most `budget`), found level by level
/// over center preimages in order of argument.
pub fn iterate_lifts(map: &PolynomialMap, y: &YTree, n: usize, budget: usize) -> Result<Vec<YTree>> {
    let mut level = vec![y.clone()];
    for _ in 0..n {
        let jobs: Vec<(usize, ComplexPoint)> = level
            .iter()
            .enumerate()
            .map(|(k, t)| -> Result<Vec<(usize, ComplexPoint)>> {
                let pre = map.preimages(t.center())?;
                if let Some(p) = pre.iter().find(|p| p.multiplicity > 1) {
                    return Err(Error::LiftStart(format!(
                        "tree center is a critical value (preimage {} of multiplicity {})",
                        p.point, p.multiplicity
                    )));
                }
                Ok(pre.into_iter().map(|p| (k, p.point)).collect())
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .take(budget)
            .collect();
        level = jobs
            .par_iter()
            .map(|&(k, x0)| lift_ytree(map, &level[k], x0, DEFAULT_TOL))
            .collect::<Result<Vec<_>>>()?;
    }
    Ok(level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> ComplexPoint {
        Complex64::new(re, im)
    }

    fn z2() -> PolynomialMap {
        PolynomialMap::monomial(2).unwrap()
    }

    fn star(center: ComplexPoint, r: f64, rot: f64, n: usize) -> YTree {
        let legs = (0..3)
            .map(|k| {
                let dir = Complex64::from_polar(1.0, rot + 2.0 * PI * k as f64 / 3.0);
                (0..=n).map(|j| center + dir * (r * j as f64 / n as f64)).collect()
            })
            .collect();
        YTree::new(center, legs, DEFAULT_TOL_GEOM).unwrap()
    }

    #[test]
    fn semicircle_lifts_to_quarter_circle() {
        let n = 64;
        let gamma = Polyline::new((0..=n).map(|k| Complex64::from_polar(1.0, PI * k as f64 / n as f64)).collect()).unwrap();
        let lift = lift_path(&z2(), &gamma, c(1.0, 0.0), 1e-8).unwrap();
        for (k, v) in lift.vertices().iter().enumerate() {
            let exact = Complex64::from_polar(1.0, PI * k as f64 / (2 * n) as f64);
            assert!((v - exact).norm() < 1e-8);
        }
        assert!((lift.end() - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn segment_lifts_to_negative_branch() {
        let gamma = Polyline::new((0..=30).map(|k| c(1.0 + 0.1 * k as f64, 0.0)).collect()).unwrap();
        let lift = lift_path(&z2(), &gamma, c(-1.0, 0.0), 1e-8).unwrap();
        for (g, v) in gamma.vertices().iter().zip(lift.vertices()) {
            assert!((v + g.sqrt()).norm() < 1e-10);
        }
    }

    #[test]
    fn lift_start_is_checked() {
        let gamma = Polyline::new(vec![c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        assert!(matches!(lift_path(&z2(), &gamma, c(0.5, 0.0), 1e-8), Err(Error::LiftStart(_))));
    }

    #[test]
    fn path_through_branch_value_is_ambiguous() {
        let gamma = Polyline::new(vec![c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        match lift_path(&z2(), &gamma, c(1.0, 0.0), 1e-8) {
            Err(Error::AmbiguousBranch { segment, parameter }) => {
                assert_eq!(segment, 0);
                assert!((parameter - 0.5).abs() < 1e-6);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ytree_lifts_by_negative_square_root() {
        let y = star(c(1.0, 0.0), 0.3, 0.2, 10);
        let lift = lift_ytree(&z2(), &y, c(-1.0, 0.0), 1e-8).unwrap();
        for (leg, base) in lift.legs().iter().zip(y.legs()) {
            for (v, g) in leg.vertices().iter().zip(base.vertices()) {
                assert!((v + g.sqrt()).norm() < 1e-10);
            }
        }
        let other = lift_ytree(&z2(), &y, c(1.0, 0.0), 1e-8).unwrap();
        let sep = lift
            .points()
            .flat_map(|p| other.points().map(move |q| (p - q).norm()))
            .fold(f64::INFINITY, f64::min);
        assert!(sep > 0.5);
    }

    #[test]
    fn iterate_lifts_counts() {
        let y = star(c(0.6, 0.5), 0.15, 0.1, 8);
        assert_eq!(iterate_lifts(&z2(), &y, 0, 100).unwrap(), vec![y.clone()]);
        let lifts = iterate_lifts(&z2(), &y, 3, 1000).unwrap();
        assert_eq!(lifts.len(), 8);
        let f3 = |z: ComplexPoint| z2().iterate(z, 3).unwrap();
        for t in &lifts {
            for (leg, base) in t.legs().iter().zip(y.legs()) {
                for (v, g) in leg.vertices().iter().zip(base.vertices()) {
                    assert!((f3(*v) - g).norm() < 1e-8);
                }
            }
        }
        assert_eq!(iterate_lifts(&z2(), &y, 3, 5).unwrap().len(), 5);
    }

    #[test]
    fn leg_through_critical_value_fails() {
        // leg from 0.5 through 0 toward -0.5
        let legs = vec![
            vec![c(0.5, 0.0), c(-0.5, 0.0)],
            vec![c(0.5, 0.0), c(0.5, 0.5)],
            vec![c(0.5, 0.0), c(0.5, -0.5)],
        ];
        let y = YTree::new(c(0.5, 0.0), legs, 1e-6).unwrap();
        let x0 = c(0.5f64.sqrt(), 0.0);
        assert!(matches!(lift_ytree(&z2(), &y, x0, 1e-8), Err(Error::AmbiguousBranch { .. })));
    }

    #[test]
    fn ytree_invariants() {
        let o = c(0.0, 0.0);
        let crossing = vec![
            vec![o, c(1.0, 0.0)],
            vec![o, c(0.0, 1.0), c(1.0, -1.0)],
            vec![o, c(-1.0, 0.0)],
        ];
        assert!(YTree::new(o, crossing, 1e-6).is_err());
        let overlapping = vec![vec![o, c(1.0, 0.0)], vec![o, c(2.0, 0.0)], vec![o, c(-1.0, 0.0)]];
        assert!(YTree::new(o, overlapping, 1e-6).is_err());
        assert!(YTree::new(o, vec![vec![o, c(1.0, 0.0)]], 1e-6).is_err());
    }

    #[test]
    fn json_round_trip() {
        let y = star(c(0.1, -0.2), 1.0, 0.0, 3);
        let s = y.to_json();
        assert!(s.starts_with("{\"center\":[0.1,-0.2],\"legs\":[[[0.1,-0.2],"));
        assert_eq!(YTree::from_json(&s).unwrap(), y);
        assert!(YTree::from_json("{\"center\":[0,0],\"legs\":[]}").is_err());
    }
}
