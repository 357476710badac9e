//! Single-common-element visual metric estimate and distortion statistics.
//!
//! `m(x, y)` is the deepest level holding an element that contains both
//! points, and the distance is `e^{-ε m}`. Pairs sharing no element get
//! `m = -1`. True visual metrics take infima over chains of elements; this
//! estimate does not.

use super::metric::{Metric, MonotoneEnvelope};
use super::{deep_cell, CoverElement, CoverHierarchy};
use crate::dynamics::ComplexPoint;
use crate::error::{Error, Result};
use crate::geometry::{Cell, CellSet, GridContinuum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

/// Triples used for the quasi-metric constant are drawn from this many
/// samples.
const TRIPLE_SAMPLES: usize = 64;

#[derive(Clone, Debug, Serialize)]
pub struct VisualMetricEstimate {
    pub epsilon: f64,
    pub depth: usize,
    pub samples: Vec<ComplexPoint>,
    /// `m(x_i, x_j)` over the samples.
    pub levels: Vec<Vec<i64>>,
    /// Smallest `C` with `B(x, e^{-ε|W|}/C) ⊂ W ⊂ B(x, C e^{-ε|W|})` for
    /// every element, `x` its deepest cell, balls tested on the samples.
    pub c: f64,
    /// Largest `r₁` with some `W ∈ U_n` containing `B(x, r₁ e^{-ε n})` for
    /// every sample `x` and `1 <= n <= depth`.
    pub r1: f64,
    /// Smallest `K` with `d(x,z) <= K (d(x,y) + d(y,z))` over sample triples.
    pub quasi_metric_k: f64,
    #[serde(skip)]
    membership: Vec<HashMap<Cell, Vec<usize>>>,
    #[serde(skip)]
    continuum: GridContinuum,
}

fn index(levels: &[Vec<CoverElement>]) -> Vec<HashMap<Cell, Vec<usize>>> {
    levels
        .iter()
        .map(|lv| {
            let mut m: HashMap<Cell, Vec<usize>> = HashMap::new();
            for e in lv {
                for &c in &e.cells {
                    m.entry(c).or_default().push(e.id);
                }
            }
            m
        })
        .collect()
}

impl VisualMetricEstimate {
    /// Deepest common level of two cells, `-1` when none.
    pub fn common_level(&self, a: Cell, b: Cell) -> i64 {
        for n in (0..self.membership.len()).rev() {
            let (Some(ea), Some(eb)) = (self.membership[n].get(&a), self.membership[n].get(&b)) else { continue };
            if ea.iter().any(|e| eb.contains(e)) {
                return n as i64;
            }
        }
        -1
    }

    pub fn cell_distance(&self, a: Cell, b: Cell) -> f64 {
        (-self.epsilon * self.common_level(a, b) as f64).exp()
    }

    fn in_element(&self, c: Cell, level: usize, id: usize) -> bool {
        self.membership[level].get(&c).map_or(false, |v| v.contains(&id))
    }
}

impl Metric for VisualMetricEstimate {
    /// Points are snapped to the nearest cell of the continuum.
    fn distance(&self, x: ComplexPoint, y: ComplexPoint) -> f64 {
        let (a, b) = (self.continuum.nearest_cell(x), self.continuum.nearest_cell(y));
        self.cell_distance(a, b)
    }
}

/// Estimates the visual metric on `n_samples` seeded cells.
pub fn visual_metric_estimate(h: &CoverHierarchy, epsilon: f64, n_samples: usize, seed: u64) -> Result<VisualMetricEstimate> {
    if h.depth() < 4 {
        return Err(Error::Insufficient(format!("visual metric needs depth >= 4, got {}", h.depth())));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} must be positive")));
    }
    let s = &h.continuum;
    let mut cells: Vec<Cell> = s.cells().iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cells.shuffle(&mut rng);
    cells.truncate(n_samples.max(2));
    cells.sort();
    let membership = index(&h.levels);
    if let Some(c) = cells.iter().find(|c| !membership[0].contains_key(c)) {
        return Err(Error::Cover(format!("cell ({}, {}) is in no level-0 element: U_0 is not a cover", c.x, c.y)));
    }
    let mut vm = VisualMetricEstimate {
        epsilon,
        depth: h.depth(),
        samples: cells.iter().map(|&c| s.center(c)).collect(),
        levels: Vec::new(),
        c: 1.0,
        r1: f64::INFINITY,
        quasi_metric_k: 0.0,
        membership,
        continuum: s.clone(),
    };
    vm.levels = cells.par_iter().map(|&a| cells.iter().map(|&b| vm.common_level(a, b)).collect()).collect();

    // Nearly balls I.
    let c = h
        .levels
        .iter()
        .flatten()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|e| {
            let x = deep_cell(s, &e.cells);
            let deepest_outside = cells
                .iter()
                .filter(|&&y| !e.cells.contains(&y))
                .map(|&y| vm.common_level(x, y))
                .max()
                .unwrap_or(i64::MIN);
            let inner_gap = (deepest_outside - e.level as i64).max(0) as f64;
            let outer_gap = cells
                .iter()
                .filter(|y| e.cells.contains(y))
                .map(|&y| e.level as i64 - vm.common_level(x, y))
                .max()
                .unwrap_or(0)
                .max(0) as f64;
            (epsilon * inner_gap.max(outer_gap)).exp()
        })
        .reduce(|| 1.0, f64::max);

    // Nearly balls II.
    let r1 = (1..=h.depth())
        .flat_map(|n| cells.iter().map(move |&x| (n, x)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(n, x)| {
            let ids = vm.membership[n].get(&x).cloned().unwrap_or_default();
            let best = ids
                .iter()
                .map(|&id| {
                    let m_out = cells
                        .iter()
                        .filter(|&&y| !vm.in_element(y, n, id))
                        .map(|&y| vm.common_level(x, y))
                        .max();
                    m_out.map_or(f64::INFINITY, |m| (-epsilon * m as f64).exp())
                })
                .fold(0.0, f64::max);
            best * (epsilon * n as f64).exp()
        })
        .reduce(|| f64::INFINITY, f64::min);

    let t = TRIPLE_SAMPLES.min(cells.len());
    let d = |i: usize, j: usize| if i == j { 0.0 } else { (-epsilon * vm.levels[i][j] as f64).exp() };
    let mut k = 0.0f64;
    for i in 0..t {
        for j in 0..t {
            for l in 0..t {
                if i != l && j != i && j != l {
                    k = k.max(d(i, l) / (d(i, j) + d(j, l)));
                }
            }
        }
    }
    vm.c = c;
    vm.r1 = r1;
    vm.quasi_metric_k = k;
    Ok(vm)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistortionStats {
    /// `(round(U, y), round(Ũ, ỹ))` with `f^k(Ũ) = U`, `f^k(ỹ) = y`.
    pub roundness_pairs: Vec<(f64, f64)>,
    /// `(diam U'/diam U, diam Ũ'/diam Ũ)` for nested pairs and their lifts.
    pub diameter_pairs: Vec<(f64, f64)>,
    /// Backward and forward roundness envelopes `ρ₋`, `ρ₊`.
    pub rho_minus: MonotoneEnvelope,
    pub rho_plus: MonotoneEnvelope,
    /// Backward and forward relative-diameter envelopes `δ₋`, `δ₊`.
    pub delta_minus: MonotoneEnvelope,
    pub delta_plus: MonotoneEnvelope,
    /// Envelope maxima without and with the deepest level, in the order
    /// `ρ₋, ρ₊, δ₋, δ₊`.
    pub maxima_shallow: [f64; 4],
    pub maxima_full: [f64; 4],
    pub verdict: String,
}

/// Adding the deepest level may raise an envelope maximum by this factor
/// before the envelopes count as not stabilized.
const STABILITY_FACTOR: f64 = 1.25;

fn roundness<M: Metric>(s: &GridContinuum, metric: &M, a: ComplexPoint, region: &CellSet) -> f64 {
    let mut outer = 0.0f64;
    let mut inner = f64::INFINITY;
    for &c in s.cells() {
        let d = metric.distance(a, s.center(c));
        if region.contains(&c) {
            outer = outer.max(d);
        } else {
            inner = inner.min(d);
        }
    }
    outer / inner.min(outer.max(f64::MIN_POSITIVE))
}

fn diameter<M: Metric>(s: &GridContinuum, metric: &M, region: &CellSet) -> f64 {
    // Every cell for small regions, an even subsample of 96 otherwise.
    let step = (region.len() / 96).max(1);
    let pts: Vec<ComplexPoint> = region.iter().step_by(step).map(|&c| s.center(c)).collect();
    let mut d = 0.0f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            d = d.max(metric.distance(pts[i], pts[j]));
        }
    }
    d
}

fn maxima(e: [&MonotoneEnvelope; 4]) -> [f64; 4] {
    e.map(|e| e.knots.last().map_or(0.0, |k| k.1))
}

/// Samples up to `max_tuples` `(Ũ, U)` pairs and nested pairs, measuring
/// roundness and relative diameters with `metric`.
pub fn check_distortion<M: Metric>(h: &CoverHierarchy, metric: &M, max_tuples: usize, seed: u64) -> Result<DistortionStats> {
    if h.depth() < 2 {
        return Err(Error::Insufficient("insufficient nesting: hierarchy has fewer than 3 levels".into()));
    }
    let s = &h.continuum;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Roundness: (Ũ, U = f^k Ũ) for k >= 1.
    let mut chains: Vec<(&CoverElement, usize)> = h
        .levels
        .iter()
        .skip(1)
        .flatten()
        .flat_map(|e| (1..=e.level).map(move |k| (e, k)))
        .collect();
    chains.shuffle(&mut rng);
    chains.truncate(max_tuples);
    let rounds: Vec<Option<(usize, (f64, f64))>> = chains
        .par_iter()
        .map(|&(e, k)| {
            let u = h.ancestor(e, k);
            let yt = s.center(deep_cell(s, &e.cells));
            let y = s.center(s.nearest_cell(h.map.iterate(yt, k).ok()?));
            if !u.cells.contains(&s.frame().cell_at(y)) {
                return None;
            }
            Some((e.level, (roundness(s, metric, y, &u.cells), roundness(s, metric, yt, &e.cells))))
        })
        .collect();

    // Nested pairs: Ũ' ⊂ Ũ one level apart whose k-th images are nested.
    let membership = index(&h.levels);
    let mut nested: Vec<(&CoverElement, &CoverElement, usize)> = Vec::new();
    for lv in h.levels.iter().skip(2) {
        for inner in lv {
            let probe = *inner.cells.iter().next().unwrap();
            for &oid in membership[inner.level - 1].get(&probe).into_iter().flatten() {
                let outer = &h.levels[inner.level - 1][oid];
                if !inner.cells.is_subset(&outer.cells) {
                    continue;
                }
                for k in 1..outer.level {
                    let (iu, ou) = (h.ancestor(inner, k), h.ancestor(outer, k));
                    if iu.cells.is_subset(&ou.cells) {
                        nested.push((inner, outer, k));
                    }
                }
            }
        }
    }
    if nested.is_empty() {
        return Err(Error::Insufficient("insufficient nesting: no nested element pairs".into()));
    }
    nested.shuffle(&mut rng);
    nested.truncate(max_tuples);
    let diams: Vec<(usize, (f64, f64))> = nested
        .par_iter()
        .map(|&(inner, outer, k)| {
            let (iu, ou) = (h.ancestor(inner, k), h.ancestor(outer, k));
            let lower = diameter(s, metric, &iu.cells) / diameter(s, metric, &ou.cells);
            let upper = diameter(s, metric, &inner.cells) / diameter(s, metric, &outer.cells);
            (inner.level, (lower, upper))
        })
        .collect();

    let roundness_pairs: Vec<(f64, f64)> = rounds.iter().flatten().map(|r| r.1).collect();
    let diameter_pairs: Vec<(f64, f64)> = diams.iter().map(|r| r.1).collect();
    let fit = |pts: &[(f64, f64)], swap: bool| {
        let v: Vec<(f64, f64)> = pts.iter().map(|&(a, b)| if swap { (b, a) } else { (a, b) }).collect();
        MonotoneEnvelope::fit(&v)
    };
    let shallow_r: Vec<(f64, f64)> = rounds.iter().flatten().filter(|r| r.0 < h.depth()).map(|r| r.1).collect();
    let shallow_d: Vec<(f64, f64)> = diams.iter().filter(|r| r.0 < h.depth()).map(|r| r.1).collect();
    let rho_minus = fit(&roundness_pairs, false);
    let rho_plus = fit(&roundness_pairs, true);
    let delta_minus = fit(&diameter_pairs, false);
    let delta_plus = fit(&diameter_pairs, true);
    let maxima_full = maxima([&rho_minus, &rho_plus, &delta_minus, &delta_plus]);
    let maxima_shallow = maxima([
        &fit(&shallow_r, false),
        &fit(&shallow_r, true),
        &fit(&shallow_d, false),
        &fit(&shallow_d, true),
    ]);
    let stable = maxima_full
        .iter()
        .zip(&maxima_shallow)
        .all(|(f, s)| f.is_finite() && *s > 0.0 && *f <= STABILITY_FACTOR * s);
    Ok(DistortionStats {
        roundness_pairs,
        diameter_pairs,
        rho_minus,
        rho_plus,
        delta_minus,
        delta_plus,
        maxima_shallow,
        maxima_full,
        verdict: if stable { "PASS" } else { "FAIL" }.into(),
    })
}

impl DistortionStats {
    /// `series,x,y` rows: the two scatters, then the four envelopes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("series,x,y\n");
        let mut push = |name: &str, pts: &[(f64, f64)]| {
            for (x, y) in pts {
                out.push_str(&format!("{name},{x:?},{y:?}\n"));
            }
        };
        push("roundness", &self.roundness_pairs);
        push("diameter", &self.diameter_pairs);
        push("rho_minus", &self.rho_minus.knots);
        push("rho_plus", &self.rho_plus.knots);
        push("delta_minus", &self.delta_minus.knots);
        push("delta_plus", &self.delta_plus.knots);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;
    use crate::dynamics::{julia_set, PolynomialMap};
    use std::sync::OnceLock;

    fn hierarchy() -> &'static CoverHierarchy {
        static H: OnceLock<CoverHierarchy> = OnceLock::new();
        H.get_or_init(|| {
            let f = PolynomialMap::monomial(2).unwrap();
            let s = julia_set(&f, 256, 200).unwrap().continuum;
            let u0 = default_base_cover(&s);
            build_hierarchy(&f, &s, u0, 4).unwrap()
        })
    }

    #[test]
    fn common_levels() {
        let h = hierarchy();
        let vm = visual_metric_estimate(h, 2f64.ln(), 64, 0).unwrap();
        let n = vm.samples.len();
        for i in 0..n {
            assert_eq!(vm.levels[i][i], 4);
            for j in 0..n {
                assert_eq!(vm.levels[i][j], vm.levels[j][i]);
            }
        }
        // A level-3 element with a sample pair in it but no shared level-4
        // element gives distance e^{-3ε}.
        let cells: Vec<Cell> = h.continuum.cells().iter().copied().collect();
        let e3 = &h.levels[3][0];
        let pair = e3
            .cells
            .iter()
            .flat_map(|&a| e3.cells.iter().map(move |&b| (a, b)))
            .find(|&(a, b)| vm.common_level(a, b) == 3)
            .unwrap();
        assert!((vm.cell_distance(pair.0, pair.1) - (-3.0 * 2f64.ln()).exp()).abs() < 1e-15);
        assert!(cells.len() > 100);
        assert!(vm.c >= 1.0 && vm.c <= 4.0, "C = {}", vm.c);
        assert!(vm.quasi_metric_k.is_finite());
    }

    #[test]
    fn shallow_hierarchy_is_rejected() {
        let h = hierarchy();
        let mut short = h.clone();
        short.levels.truncate(2);
        assert!(visual_metric_estimate(&short, 1.0, 16, 0).is_err());
        assert!(matches!(check_distortion(&short, &Euclidean, 10, 0), Err(Error::Insufficient(_))));
    }

    #[test]
    fn arc_roundness_is_preserved() {
        let h = hierarchy();
        let d = check_distortion(h, &CircleArcLength::default(), 40, 3).unwrap();
        assert!(!d.roundness_pairs.is_empty() && !d.diameter_pairs.is_empty());
        for &(a, b) in &d.roundness_pairs {
            assert!(a > 0.8 && a < 1.5 && b > 0.8 && b < 1.5, "{a} {b}");
        }
        for &(a, b) in &d.diameter_pairs {
            assert!(b / a > 0.5 && b / a < 2.0, "{a} {b}");
        }
        assert!(d.rho_minus.is_monotone());
        for &(x, y) in &d.roundness_pairs {
            assert!(y <= d.rho_minus.eval(x).unwrap());
        }
    }
}
