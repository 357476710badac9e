//! Chebyshev and negated Chebyshev interval dynamics on `[-1, 1]`.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Above this degree evaluation switches to `cos(d·acos x)`; monomial
/// coefficients of `T_d` grow like `2^d`.
pub const COEFFICIENT_DEGREE_CAP: u32 = 16;
const LEVEL_TOL: f64 = 1e-9;
const IMAGE_TOL: f64 = 1e-12;

/// Ascending monomial coefficients of `T_d` from `T_{k+1} = 2x·T_k - T_{k-1}`.
pub fn chebyshev_coefficients(d: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if d == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for _ in 1..d {
        let mut next = vec![0.0; cur.len() + 1];
        for (k, c) in cur.iter().enumerate() {
            next[k + 1] += 2.0 * c;
        }
        for (k, c) in prev.iter().enumerate() {
            next[k] -= c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// `T_d(x)` by the three-term recurrence, or the trigonometric form for
/// large `d`.
pub fn chebyshev_eval(d: u32, x: f64) -> f64 {
    if d > COEFFICIENT_DEGREE_CAP {
        return (d as f64 * x.clamp(-1.0, 1.0).acos()).cos();
    }
    match d {
        0 => 1.0,
        _ => {
            let (mut a, mut b) = (1.0, x);
            for _ in 1..d {
                let c = 2.0 * x * b - a;
                a = b;
                b = c;
            }
            b
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMapKind {
    /// `sign · T_d`.
    Chebyshev { d: u32, sign: i8 },
    General,
}

/// A real polynomial self-map of `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalMap {
    pub kind: IntervalMapKind,
    /// Ascending monomial coefficients.
    pub coefficients: Vec<f64>,
    /// Critical points in `(-1, 1)`, increasing.
    pub turning_points: Vec<f64>,
}

pub fn chebyshev(d: u32) -> Result<IntervalMap> {
    signed_chebyshev(d, 1)
}

/// `T'_d = -T_d`.
pub fn negated_chebyshev(d: u32) -> Result<IntervalMap> {
    signed_chebyshev(d, -1)
}

fn signed_chebyshev(d: u32, sign: i8) -> Result<IntervalMap> {
    if d == 0 {
        return Err(Error::InvalidArgument("Chebyshev degree must be at least 1".into()));
    }
    let coefficients = chebyshev_coefficients(d as usize).into_iter().map(|c| c * sign as f64).collect();
    // T_d' vanishes at cos(kπ/d) = sin((d - 2k)π / 2d), 0 < k < d; the sine
    // form is exactly antisymmetric and exactly zero in the middle.
    let mut turning_points: Vec<f64> =
        (1..d).map(|k| ((d as f64 - 2.0 * k as f64) * PI / (2.0 * d as f64)).sin()).collect();
    turning_points.reverse();
    Ok(IntervalMap { kind: IntervalMapKind::Chebyshev { d, sign }, coefficients, turning_points })
}

impl IntervalMap {
    /// A general polynomial map; checks that `[-1, 1]` maps into itself.
    pub fn from_coefficients(mut coefficients: Vec<f64>) -> Result<Self> {
        while coefficients.len() > 1 && *coefficients.last().unwrap() == 0.0 {
            coefficients.pop();
        }
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite and nonempty".into()));
        }
        let deriv = poly_derivative(&coefficients);
        let turning_points = real_roots_in(&deriv, -1.0, 1.0);
        let m = IntervalMap { kind: IntervalMapKind::General, coefficients, turning_points };
        let mut xs = vec![-1.0, 1.0];
        xs.extend(&m.turning_points);
        if xs.iter().any(|&x| m.eval(x).abs() > 1.0 + IMAGE_TOL) {
            return Err(Error::InvalidArgument("map does not send [-1, 1] into itself".into()));
        }
        Ok(m)
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            IntervalMapKind::Chebyshev { d, sign } => sign as f64 * chebyshev_eval(d, x),
            IntervalMapKind::General => horner(&self.coefficients, x),
        }
    }

    /// `f^(k)(x) / k!`.
    pub fn taylor(&self, x: f64, k: usize) -> f64 {
        let mut c = self.coefficients.clone();
        for _ in 0..k {
            c = poly_derivative(&c);
        }
        horner(&c, x) / (1..=k).map(|j| j as f64).product::<f64>()
    }

    /// `1 +` the order of vanishing of `f'` at `x`, derivatives compared
    /// against `LEVEL_TOL` relative to the coefficient scale.
    pub fn local_degree(&self, x: f64) -> usize {
        let scale = self.coefficients.iter().map(|c| c.abs()).fold(1.0, f64::max);
        let mut k = 1;
        while k < self.degree() && self.taylor(x, k).abs() < LEVEL_TOL * scale {
            k += 1;
        }
        k
    }

    /// Laps as `[a, b]` pairs split at the turning points.
    pub fn laps(&self) -> Vec<(f64, f64)> {
        let mut pts = vec![-1.0];
        pts.extend(&self.turning_points);
        pts.push(1.0);
        pts.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Solutions of `f(x) = v` in `[-1, 1]`, increasing.
    pub fn level_set(&self, v: f64) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        let push = |x: f64, out: &mut Vec<f64>| {
            if !out.iter().any(|y| (y - x).abs() < 1e-9) {
                out.push(x);
            }
        };
        for (a, b) in self.laps() {
            let (fa, fb) = (self.eval(a) - v, self.eval(b) - v);
            if fa.abs() < LEVEL_TOL {
                push(a, &mut out);
            }
            if fb.abs() < LEVEL_TOL {
                push(b, &mut out);
            }
            if fa.abs() >= LEVEL_TOL && fb.abs() >= LEVEL_TOL && fa.signum() != fb.signum() {
                push(bisect(|x| self.eval(x) - v, a, b), &mut out);
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    c.iter().enumerate().skip(1).map(|(k, a)| k as f64 * a).collect()
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Sign-changing real roots of a polynomial on `(lo, hi)`, bracketed on a
/// Chebyshev node grid and refined by bisection. Roots of even order are
/// not turning points and are skipped.
fn real_roots_in(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let n = 64 * c.len().max(2);
    let grid: Vec<f64> = (0..=n)
        .map(|k| {
            let t = (PI * k as f64 / n as f64).cos();
            lo + (hi - lo) * (1.0 - t) / 2.0
        })
        .collect();
    let f = |x: f64| horner(c, x);
    let mut out: Vec<f64> = Vec::new();
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 && a > lo && a < hi {
            out.push(a);
        } else if fa * fb < 0.0 {
            out.push(bisect(f, a, b));
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    out
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndpointPattern {
    /// `f(±1) = ±1`; odd `T_d`: `-1 < y_1 < x_1 < ... < y_n < x_n < 1`.
    FixesEndpoints,
    /// `f(±1) = ∓1`; odd `T'_d`, with the two level sets exchanged.
    SwapsEndpoints,
    /// `f(±1) = 1`; even `T_d`: `-1 < x_1 < y_1 < ... < y_{n-1} < x_n < 1`.
    FoldsToPlusOne,
    /// `f(±1) = -1`; even `T'_d`, the negation conjugate of the previous.
    FoldsToMinusOne,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub x: f64,
    /// The value `f(x) ∈ {-1, 1}`.
    pub label: i8,
    pub local_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointStructure {
    pub points: Vec<LabeledPoint>,
    pub pattern: EndpointPattern,
    /// `n` in the interleaving pattern names.
    pub n: usize,
    pub degree_sum_minus: usize,
    pub degree_sum_plus: usize,
}

impl EndpointStructure {
    pub fn preimages_of(&self, v: i8) -> Vec<f64> {
        self.points.iter().filter(|p| p.label == v).map(|p| p.x).collect()
    }
}

/// Sorted solutions of `f = ±1` with local degrees, checked against the
/// interleaving expected for the parity case.
pub fn endpoint_preimage_structure(map: &IntervalMap) -> Result<EndpointStructure> {
    let mut points: Vec<LabeledPoint> = Vec::new();
    for v in [-1i8, 1] {
        for x in map.level_set(v as f64) {
            points.push(LabeledPoint { x, label: v, local_degree: map.local_degree(x) });
        }
    }
    points.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mismatch = |msg: String| Err(Error::PatternMismatch(msg));
    let d = map.degree();
    if points.len() != d + 1 {
        return mismatch(format!("expected {} level points, found {}", d + 1, points.len()));
    }
    if points[0].x != -1.0 || points[d].x != 1.0 {
        return mismatch("endpoints are not in the level sets".into());
    }
    for (k, p) in points.iter().enumerate() {
        let expected = if k == 0 || k == d { 1 } else { 2 };
        if p.local_degree != expected {
            return mismatch(format!("point {} has local degree {}, expected {expected}", p.x, p.local_degree));
        }
    }
    if points.windows(2).any(|w| w[0].label == w[1].label) {
        return mismatch("level-set labels do not alternate".into());
    }
    let pattern = match (points[0].label, points[d].label) {
        (-1, 1) => EndpointPattern::FixesEndpoints,
        (1, -1) => EndpointPattern::SwapsEndpoints,
        (1, 1) => EndpointPattern::FoldsToPlusOne,
        _ => EndpointPattern::FoldsToMinusOne,
    };
    let sum = |v: i8| points.iter().filter(|p| p.label == v).map(|p| p.local_degree).sum::<usize>();
    let (degree_sum_minus, degree_sum_plus) = (sum(-1), sum(1));
    if degree_sum_minus != d || degree_sum_plus != d {
        return mismatch(format!("degree sums {degree_sum_minus}, {degree_sum_plus} differ from {d}"));
    }
    if let IntervalMapKind::Chebyshev { d, sign } = map.kind {
        let expected = match (d % 2 == 1, sign > 0) {
            (true, true) => EndpointPattern::FixesEndpoints,
            (true, false) => EndpointPattern::SwapsEndpoints,
            (false, true) => EndpointPattern::FoldsToPlusOne,
            (false, false) => EndpointPattern::FoldsToMinusOne,
        };
        if pattern != expected {
            return mismatch(format!("found {pattern:?}, the parity case requires {expected:?}"));
        }
    }
    Ok(EndpointStructure { points, pattern, n: d / 2, degree_sum_minus, degree_sum_plus })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncidenceMatrix {
    pub entries: Vec<Vec<u8>>,
    pub partition: Vec<f64>,
}

impl IncidenceMatrix {
    pub fn new(entries: Vec<Vec<u8>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("incidence matrix must be square and nonempty".into()));
        }
        Ok(Self { entries, partition: Vec::new() })
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    /// Strong connectivity of the transition graph.
    pub fn is_irreducible(&self) -> bool {
        let n = self.size();
        let reach = |transpose: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    let e = if transpose { self.entries[j][i] } else { self.entries[i][j] };
                    if e != 0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.iter().all(|s| *s)
        };
        reach(false) && reach(true)
    }
}

/// Markov partition by the solutions of `f = ±1`.
pub fn markov_incidence(map: &IntervalMap) -> Result<IncidenceMatrix> {
    let s = endpoint_preimage_structure(map)?;
    markov_incidence_with(map, &s.points.iter().map(|p| p.x).collect::<Vec<_>>())
}

/// Incidence matrix of an explicit increasing partition of `[-1, 1]`.
pub fn markov_incidence_with(map: &IntervalMap, partition: &[f64]) -> Result<IncidenceMatrix> {
    if partition.len() < 2 || partition.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("partition must be strictly increasing".into()));
    }
    let snap = |y: f64| partition.iter().position(|&p| (p - y).abs() < LEVEL_TOL);
    let n = partition.len() - 1;
    let mut entries = vec![vec![0u8; n]; n];
    for i in 0..n {
        let (a, b) = (partition[i], partition[i + 1]);
        let mut vals = vec![map.eval(a), map.eval(b)];
        vals.extend(map.turning_points.iter().filter(|&&t| t > a && t < b).map(|&t| map.eval(t)));
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (Some(l), Some(h)) = (snap(lo), snap(hi)) else {
            return Err(Error::NotMarkov(format!("image [{lo}, {hi}] of interval {i} has an endpoint off the partition")));
        };
        for e in entries[i].iter_mut().take(h).skip(l) {
            *e = 1;
        }
    }
    Ok(IncidenceMatrix { entries, partition: partition.to_vec() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthNumber {
    pub value: f64,
    /// `s > 1`.
    pub expanding: bool,
    pub irreducible: bool,
    pub iterations: usize,
}

pub const GROWTH_TOL: f64 = 1e-10;
pub const GROWTH_MAX_ITER: usize = 100_000;

/// Perron root by power iteration on `A + I`, stopped when the
/// Collatz–Wielandt bracket is narrower than `GROWTH_TOL` relative.
pub fn growth_number(m: &IncidenceMatrix) -> Result<GrowthNumber> {
    let n = m.size();
    let b: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| m.entries[i][j] as f64 + if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut x = vec![1.0 / n as f64; n];
    for it in 1..=GROWTH_MAX_ITER {
        let y: Vec<f64> = b.iter().map(|row| row.iter().zip(&x).map(|(a, v)| a * v).sum()).collect();
        let ratios: Vec<f64> = y.iter().zip(&x).filter(|(_, &v)| v > 1e-300).map(|(u, v)| u / v).collect();
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let norm: f64 = y.iter().sum();
        x = y.iter().map(|v| v / norm).collect();
        let est = 0.5 * (lo + hi) - 1.0;
        if hi - lo <= GROWTH_TOL * est.max(1.0) {
            return Ok(GrowthNumber {
                value: est,
                expanding: est > 1.0 + GROWTH_TOL,
                irreducible: m.is_irreducible(),
                iterations: it,
            });
        }
    }
    Err(Error::NotConverged(GROWTH_MAX_ITER))
}

/// Max `|h(g(y)) - T_d(h(y))|` over `samples` uniform `y ∈ [0, 1]`, where
/// `g` is the slope-`d` fold map and `h(y) = cos(πy)`.
pub fn pl_model_check(d: u32, samples: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidArgument("PL model needs d >= 2".into()));
    }
    let samples = samples.max(2);
    let mut err: f64 = 0.0;
    for k in 0..samples {
        let y = k as f64 / (samples - 1) as f64;
        let lhs = (PI * fold_map(d, y)).cos();
        let rhs = chebyshev_eval(d, (PI * y).cos());
        err = err.max((lhs - rhs).abs());
    }
    Ok(err)
}

/// The piecewise-linear map of `[0, 1]` with slopes `±d`, `g(0) = 0`.
pub fn fold_map(d: u32, y: f64) -> f64 {
    let u = d as f64 * y;
    let k = u.floor();
    let frac = u - k;
    if (k as i64) % 2 == 0 {
        frac
    } else {
        1.0 - frac
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionCheck {
    pub d: u32,
    /// max `|cos(dθ) - T_d(cos θ)|`.
    pub horizontal_error: f64,
    /// Which model the sine coordinate is conjugated to:
    /// `T_d` for `d ≡ 1 (mod 4)`, `T'_d` for `d ≡ 3 (mod 4)`.
    pub vertical_model: String,
    /// max `|sin(dθ) - model(sin θ)|`.
    pub vertical_error: f64,
    /// Error of the reflection identity `e^{id(π-θ)} = e^{i(π-dθ)}`.
    pub reflection_error: f64,
    pub max_error: f64,
}

/// Projections of `z ↦ z^d` on the unit circle onto the two axes, at
/// `samples` seeded random angles.
pub fn circle_projection_check(d: u32, samples: usize, seed: u64) -> Result<ProjectionCheck> {
    if d % 2 == 0 {
        return Err(Error::InvalidArgument(format!("circle projection check needs odd d, got {d}")));
    }
    let sign = if (d / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut h, mut v, mut r) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let t: f64 = rng.gen_range(0.0..2.0 * PI);
        let df = d as f64;
        h = h.max(((df * t).cos() - chebyshev_eval(d, t.cos())).abs());
        v = v.max(((df * t).sin() - sign * chebyshev_eval(d, t.sin())).abs());
        let lhs = num_complex::Complex64::from_polar(1.0, df * (PI - t));
        let rhs = num_complex::Complex64::from_polar(1.0, PI - df * t);
        r = r.max((lhs - rhs).norm());
    }
    Ok(ProjectionCheck {
        d,
        horizontal_error: h,
        vertical_model: if sign > 0.0 { "chebyshev".into() } else { "negated-chebyshev".into() },
        vertical_error: v,
        reflection_error: r,
        max_error: h.max(v).max(r),
    })
}

/// Maximal monotone pieces of `f^n` on `[-1, 1]`, counted from direction
/// changes on a uniform grid fine enough to resolve `d^n` laps.
pub fn lap_count(map: &IntervalMap, n: u32) -> usize {
    let d = map.degree().max(1);
    let grid = 64 * d.pow(n) + 1;
    let iterate = |mut x: f64| {
        for _ in 0..n {
            x = map.eval(x);
        }
        x
    };
    let mut laps = 1;
    let mut dir = 0i8;
    let mut prev = iterate(-1.0);
    for k in 1..grid {
        let x = -1.0 + 2.0 * k as f64 / (grid - 1) as f64;
        let y = iterate(x);
        let s = if y > prev { 1 } else if y < prev { -1 } else { 0 };
        if s != 0 {
            if dir != 0 && s != dir {
                laps += 1;
            }
            dir = s;
        }
        prev = y;
    }
    laps
}

/// max `|T'_d(-x) + T_d(x)|`: for even `d` negation conjugates `T_d` to
/// `T'_d`.
pub fn negation_conjugacy_error(d: u32, samples: usize) -> f64 {
    (0..samples)
        .map(|k| -1.0 + 2.0 * k as f64 / (samples.max(2) - 1) as f64)
        .map(|x| (-chebyshev_eval(d, -x) + chebyshev_eval(d, x)).abs())
        .fold(0.0, f64::max)
}

/// max `|T_d(T_e(x)) - T_{de}(x)|` over a uniform grid.
pub fn semigroup_error(d: u32, e: u32, samples: usize) -> f64 {
    (0..samples)
        .map(|k| -1.0 + 2.0 * k as f64 / (samples.max(2) - 1) as f64)
        .map(|x| (chebyshev_eval(d, chebyshev_eval(e, x)) - chebyshev_eval(d * e, x)).abs())
        .fold(0.0, f64::max)
}

/// One row of the per-degree suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevReport {
    pub d: u32,
    pub pattern: EndpointPattern,
    pub negated_pattern: EndpointPattern,
    pub matrix: Vec<Vec<u8>>,
    pub growth_number: f64,
    pub expanding: bool,
    pub pl_model_max_error: Option<f64>,
    pub projection: Option<ProjectionCheck>,
}

pub fn chebyshev_report(d: u32, samples: usize, seed: u64) -> Result<ChebyshevReport> {
    let t = chebyshev(d)?;
    let s = endpoint_preimage_structure(&t)?;
    let neg = endpoint_preimage_structure(&negated_chebyshev(d)?)?;
    let m = markov_incidence(&t)?;
    let g = growth_number(&m)?;
    Ok(ChebyshevReport {
        d,
        pattern: s.pattern,
        negated_pattern: neg.pattern,
        matrix: m.entries,
        growth_number: g.value,
        expanding: g.expanding,
        pl_model_max_error: if d >= 2 { Some(pl_model_check(d, samples)?) } else { None },
        projection: if d % 2 == 1 { Some(circle_projection_check(d, samples, seed)?) } else { None },
    })
}
