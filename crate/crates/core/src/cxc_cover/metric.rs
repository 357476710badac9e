//! Metrics on the plane, monotone envelopes and quasi-symmetry moduli.

use crate::dynamics::ComplexPoint;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub trait Metric: Sync {
    fn distance(&self, x: ComplexPoint, y: ComplexPoint) -> f64;
}

#[derive(Copy, Clone, Debug, Default)]
pub struct Euclidean;

impl Metric for Euclidean {
    fn distance(&self, x: ComplexPoint, y: ComplexPoint) -> f64 {
        (x - y).norm()
    }
}

/// Arc length on the unit circle, measured through the argument about
/// `center`. Radial offsets are ignored.
#[derive(Copy, Clone, Debug)]
pub struct CircleArcLength {
    pub center: ComplexPoint,
}

impl Default for CircleArcLength {
    fn default() -> Self {
        Self { center: ComplexPoint::new(0.0, 0.0) }
    }
}

impl Metric for CircleArcLength {
    fn distance(&self, x: ComplexPoint, y: ComplexPoint) -> f64 {
        let t = ((x - self.center).arg() - (y - self.center).arg()).abs();
        t.min(2.0 * PI - t)
    }
}

#[derive(Copy, Clone, Debug)]
pub struct Scaled<M> {
    pub inner: M,
    pub factor: f64,
}

impl<M: Metric> Metric for Scaled<M> {
    fn distance(&self, x: ComplexPoint, y: ComplexPoint) -> f64 {
        self.factor * self.inner.distance(x, y)
    }
}

/// `d^alpha` for `0 < alpha <= 1`.
#[derive(Copy, Clone, Debug)]
pub struct Snowflake<M> {
    pub inner: M,
    pub alpha: f64,
}

impl<M: Metric> Metric for Snowflake<M> {
    fn distance(&self, x: ComplexPoint, y: ComplexPoint) -> f64 {
        self.inner.distance(x, y).powf(self.alpha)
    }
}

impl<M: Metric + ?Sized> Metric for &M {
    fn distance(&self, x: ComplexPoint, y: ComplexPoint) -> f64 {
        (**self).distance(x, y)
    }
}

/// Smallest nondecreasing step function lying weakly above a scatter:
/// the running maximum of `y` in order of increasing `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneEnvelope {
    /// Breakpoints `(x, value)` with strictly increasing `x` and
    /// nondecreasing value.
    pub knots: Vec<(f64, f64)>,
}

impl MonotoneEnvelope {
    pub fn fit(points: &[(f64, f64)]) -> Self {
        let mut pts: Vec<(f64, f64)> = points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut knots: Vec<(f64, f64)> = Vec::new();
        let mut run = f64::NEG_INFINITY;
        for (x, y) in pts {
            run = run.max(y);
            match knots.last_mut() {
                Some(last) if last.0 == x => last.1 = run,
                _ => knots.push((x, run)),
            }
        }
        Self { knots }
    }

    /// Envelope value at `t`: the largest observation with `x <= t`, or the
    /// first knot's value to the left of the data.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let first = self.knots.first()?;
        if t < first.0 {
            return Some(first.1);
        }
        let k = self.knots.partition_point(|&(x, _)| x <= t);
        Some(self.knots[k - 1].1)
    }

    pub fn is_monotone(&self) -> bool {
        self.knots.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1)
    }

    /// Largest value on `x <= t`.
    pub fn sup_up_to(&self, t: f64) -> Option<f64> {
        self.eval(t)
    }

    /// Least-squares exponent `p` of `value ≈ a·x^p` over knots with
    /// positive coordinates.
    pub fn power_law_exponent(&self) -> Option<f64> {
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            self.knots.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).unzip();
        if xs.len() < 2 {
            return None;
        }
        Some(crate::antenna::linear_fit(&xs, &ys).0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QsEstimate {
    /// `(d_A(x,y)/d_A(x,z), d_B(x,y)/d_B(x,z))` per usable triple.
    pub scatter: Vec<(f64, f64)>,
    pub envelope: MonotoneEnvelope,
    /// Triples with a vanishing denominator in either metric.
    pub skipped: usize,
    /// Envelope at ratio 1 from all triples and from the first half.
    pub eta_at_one: Option<f64>,
    pub eta_at_one_half_sample: Option<f64>,
    pub verdict: String,
}

/// Envelopes growing by more than this factor between half and full
/// samples are not called bounded.
const QS_STABILITY_FACTOR: f64 = 2.0;

/// Empirical distortion function of the identity from `(X, d_A)` to `(X, d_B)`
/// over triples `(x, y, z)`.
pub fn qs_modulus_estimate<A: Metric, B: Metric>(
    a: &A,
    b: &B,
    triples: &[(ComplexPoint, ComplexPoint, ComplexPoint)],
) -> QsEstimate {
    let mut scatter = Vec::with_capacity(triples.len());
    let mut skipped = 0;
    let mut half_len = 0;
    for (k, &(x, y, z)) in triples.iter().enumerate() {
        let (da, db) = (a.distance(x, z), b.distance(x, z));
        if k == triples.len() / 2 {
            half_len = scatter.len();
        }
        if !(da > 0.0 && db > 0.0) {
            skipped += 1;
            continue;
        }
        scatter.push((a.distance(x, y) / da, b.distance(x, y) / db));
    }
    if triples.len() < 2 {
        half_len = scatter.len();
    }
    let envelope = MonotoneEnvelope::fit(&scatter);
    let half = MonotoneEnvelope::fit(&scatter[..half_len]);
    let eta_at_one = envelope.eval(1.0);
    let eta_at_one_half_sample = half.eval(1.0);
    let verdict = match (eta_at_one, eta_at_one_half_sample) {
        (Some(full), Some(h)) if full.is_finite() && full <= QS_STABILITY_FACTOR * h.max(f64::MIN_POSITIVE) => "qs-consistent",
        (Some(_), Some(_)) => "envelope still growing",
        _ => "insufficient triples",
    }
    .to_string();
    QsEstimate { scatter, envelope, skipped, eta_at_one, eta_at_one_half_sample, verdict }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn arc_length_wraps() {
        let m = CircleArcLength::default();
        let a = Complex64::from_polar(1.0, 3.0);
        let b = Complex64::from_polar(2.0, -3.0);
        assert!((m.distance(a, b) - (2.0 * PI - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn envelope_is_running_max() {
        let e = MonotoneEnvelope::fit(&[(2.0, 1.0), (1.0, 3.0), (3.0, 2.0), (4.0, 5.0), (4.0, 4.0)]);
        assert_eq!(e.knots, vec![(1.0, 3.0), (2.0, 3.0), (3.0, 3.0), (4.0, 5.0)]);
        assert!(e.is_monotone());
        assert_eq!(e.eval(0.5), Some(3.0));
        assert_eq!(e.eval(3.9), Some(3.0));
        assert_eq!(e.eval(10.0), Some(5.0));
        assert_eq!(MonotoneEnvelope::fit(&[]).eval(1.0), None);
    }

    #[test]
    fn zero_denominators_are_skipped() {
        let p = Complex64::new(0.0, 0.0);
        let q = Complex64::new(1.0, 0.0);
        let est = qs_modulus_estimate(&Euclidean, &Euclidean, &[(p, q, p), (p, q, q)]);
        assert_eq!(est.skipped, 1);
        assert_eq!(est.scatter, vec![(1.0, 1.0)]);
    }
}
