//! Polynomial dynamical systems on the plane.
//!
//! A [`PolynomialMap`] is stored by its complex coefficients in ascending
//! degree. Everything here is a pure function of the map and its inputs;
//! the only randomness (root-finder restarts) comes from a fixed seed.

mod julia;
mod orbits;
mod parse;
mod roots;

pub use julia::{julia_set, julia_set_with, JuliaOptions, JuliaSet};
pub use orbits::{
    classify_critical_orbits, CriticalOrbit, CriticalOrbitReport, CycleInfo, OrbitClass,
};
pub use roots::{cluster_roots, RootFinder};

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A point of the plane. Components are finite inside the library; escape
/// to infinity is reported through [`Error::Escaped`] instead.
pub type ComplexPoint = Complex64;

/// Default tolerance for root residuals and derivative vanishing.
pub const TOL_ROOT: f64 = 1e-10;

/// Roots closer than this are merged into one root with multiplicity.
pub const CLUSTER_TOL: f64 = 1e-6;

/// A root of `f(z) - w` together with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preimage {
    pub point: ComplexPoint,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialMap {
    coefficients: Vec<ComplexPoint>,
}

impl PolynomialMap {
    /// Builds a map from ascending coefficients. Trailing zero coefficients
    /// are rejected rather than trimmed so that the stated degree is the
    /// actual degree.
    pub fn new(coefficients: Vec<ComplexPoint>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidPolynomial("non-finite coefficient".into()));
        }
        if coefficients.len() < 3 {
            return Err(Error::InvalidPolynomial(format!(
                "degree must be at least 2, got {}",
                coefficients.len().saturating_sub(1)
            )));
        }
        if coefficients.last().map_or(true, |c| c.norm() == 0.0) {
            return Err(Error::InvalidPolynomial("leading coefficient is zero".into()));
        }
        Ok(Self { coefficients })
    }

    pub fn from_real(coefficients: &[f64]) -> Result<Self> {
        Self::new(coefficients.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `z^d`.
    pub fn monomial(d: usize) -> Result<Self> {
        let mut c = vec![Complex64::new(0.0, 0.0); d + 1];
        c[d] = Complex64::new(1.0, 0.0);
        Self::new(c)
    }

    /// `z^2 + c`.
    pub fn quadratic(c: ComplexPoint) -> Self {
        Self {
            coefficients: vec![c, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        }
    }

    /// The degree-`d` Chebyshev polynomial viewed as a map of the plane.
    pub fn chebyshev(d: usize) -> Result<Self> {
        Self::from_real(&crate::chebyshev::chebyshev_coefficients(d))
    }

    pub fn coefficients(&self) -> &[ComplexPoint] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn leading(&self) -> ComplexPoint {
        self.coefficients[self.degree()]
    }

    /// Horner evaluation without escape checking.
    #[inline]
    pub fn eval(&self, z: ComplexPoint) -> ComplexPoint {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coefficients.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// `(f(z), f'(z))` in one Horner pass.
    #[inline]
    pub fn eval_with_derivative(&self, z: ComplexPoint) -> (ComplexPoint, ComplexPoint) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in self.coefficients.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `f(z)`, or [`Error::Escaped`] when the result overflows.
    pub fn evaluate(&self, z: ComplexPoint) -> Result<ComplexPoint> {
        let w = self.eval(z);
        if w.re.is_finite() && w.im.is_finite() {
            Ok(w)
        } else {
            Err(Error::Escaped)
        }
    }

    /// `f^n(z)` with escape detection.
    pub fn iterate(&self, z: ComplexPoint, n: usize) -> Result<ComplexPoint> {
        let mut w = z;
        for _ in 0..n {
            w = self.evaluate(w)?;
        }
        Ok(w)
    }

    /// `f^{(k)}(z) / k!`, the k-th Taylor coefficient at `z`.
    pub fn taylor_coefficient(&self, z: ComplexPoint, k: usize) -> ComplexPoint {
        let d = self.degree();
        if k > d {
            return Complex64::new(0.0, 0.0);
        }
        // sum_j a_j * binom(j, k) * z^(j-k), evaluated by Horner in j.
        let mut acc = Complex64::new(0.0, 0.0);
        for j in (k..=d).rev() {
            acc = acc * z + self.coefficients[j] * binomial(j, k);
        }
        acc
    }

    pub fn derivative_coefficients(&self) -> Vec<ComplexPoint> {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c * j as f64)
            .collect()
    }

    fn coefficient_scale(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm()).fold(1.0, f64::max)
    }

    /// Local degree: one plus the vanishing order of `f'` at `z`.
    pub fn local_degree(&self, z: ComplexPoint) -> usize {
        self.local_degree_tol(z, TOL_ROOT)
    }

    pub fn local_degree_tol(&self, z: ComplexPoint, tol: f64) -> usize {
        let scale = tol * self.coefficient_scale() * (1.0 + z.norm()).powi(self.degree() as i32);
        let mut deg = 1;
        for k in 1..self.degree() {
            if self.taylor_coefficient(z, k).norm() <= scale {
                deg += 1;
            } else {
                break;
            }
        }
        deg
    }

    /// Escape radius used by the escape-time discretization.
    pub fn escape_radius(&self) -> f64 {
        let m = self.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
        f64::max(2.0, 2.0 * m)
    }

    /// Roots of `f(z) - w`, merged into clusters, ordered by argument.
    pub fn preimages(&self, w: ComplexPoint) -> Result<Vec<Preimage>> {
        RootFinder::default().preimages(self, w)
    }

    /// Critical points (roots of `f'`) with their multiplicity as roots of `f'`.
    pub fn critical_points(&self) -> Result<Vec<Preimage>> {
        let dc = self.derivative_coefficients();
        if dc.len() == 2 {
            return Ok(vec![Preimage { point: -dc[0] / dc[1], multiplicity: 1 }]);
        }
        let deriv = PolynomialMap::new(dc)?;
        deriv.preimages(Complex64::new(0.0, 0.0))
    }

    pub fn critical_values(&self) -> Result<Vec<ComplexPoint>> {
        Ok(self.critical_points()?.iter().map(|p| self.eval(p.point)).collect())
    }

    /// The conjugate `A∘f∘A⁻¹` for the affine map `A(z) = a·z + b`.
    pub fn conjugate_affine(&self, a: ComplexPoint, b: ComplexPoint) -> Result<Self> {
        if a.norm() == 0.0 {
            return Err(Error::InvalidArgument("affine scale must be nonzero".into()));
        }
        // u = (z - b)/a as a linear polynomial in z.
        let inv_a = a.inv();
        let u = [-b * inv_a, inv_a];
        let mut acc: Vec<ComplexPoint> = vec![Complex64::new(0.0, 0.0)];
        for c in self.coefficients.iter().rev() {
            acc = poly_mul(&acc, &u);
            acc[0] += c;
        }
        let mut out: Vec<ComplexPoint> = acc.into_iter().map(|c| c * a).collect();
        out[0] += b;
        out.truncate(self.degree() + 1);
        Self::new(out)
    }

    /// Parses `"poly: c0, c1, ..., cd"` with complex literals such as
    /// `1`, `-0.5i`, `2+3i`, `i`.
    pub fn parse(spec: &str) -> Result<Self> {
        parse::parse_map_spec(spec)
    }

    /// Inverse of [`PolynomialMap::parse`]; round-trips exactly.
    pub fn to_spec(&self) -> String {
        let parts: Vec<String> = self.coefficients.iter().map(|c| parse::format_complex(*c)).collect();
        format!("poly: {}", parts.join(", "))
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r.round()
}

fn poly_mul(a: &[ComplexPoint], b: &[ComplexPoint]) -> Vec<ComplexPoint> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
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

    #[test]
    fn evaluate_examples() {
        let f = PolynomialMap::quadratic(c(0.0, 1.0));
        assert_eq!(f.evaluate(c(0.0, 0.0)).unwrap(), c(0.0, 1.0));
        let sq = PolynomialMap::monomial(2).unwrap();
        assert_eq!(sq.evaluate(c(1.0, 1.0)).unwrap(), c(0.0, 2.0));
        let t3 = PolynomialMap::chebyshev(3).unwrap();
        assert!((t3.evaluate(c(0.5, 0.0)).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn overflow_is_an_escape_not_a_crash() {
        let sq = PolynomialMap::monomial(2).unwrap();
        assert_eq!(sq.evaluate(c(1e200, 0.0)), Err(Error::Escaped));
        assert_eq!(sq.iterate(c(3.0, 0.0), 20), Err(Error::Escaped));
    }

    #[test]
    fn rejects_degenerate_maps() {
        assert!(PolynomialMap::from_real(&[1.0, 2.0]).is_err());
        assert!(PolynomialMap::from_real(&[1.0, 2.0, 0.0]).is_err());
        assert!(PolynomialMap::new(vec![c(f64::NAN, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn local_degree_examples() {
        assert_eq!(PolynomialMap::monomial(2).unwrap().local_degree(c(0.0, 0.0)), 2);
        assert_eq!(PolynomialMap::quadratic(c(0.0, 1.0)).local_degree(c(0.3, 0.0)), 1);
        assert_eq!(PolynomialMap::monomial(3).unwrap().local_degree(c(0.0, 0.0)), 3);
        // z^4 - z^2: f' = 4z^3 - 2z has a simple root at 0.
        let f = PolynomialMap::from_real(&[0.0, 0.0, -1.0, 0.0, 1.0]).unwrap();
        assert_eq!(f.local_degree(c(0.0, 0.0)), 2);
    }

    #[test]
    fn preimage_examples() {
        let f = PolynomialMap::quadratic(c(0.0, 1.0));
        let p = f.preimages(c(0.0, 1.0)).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].multiplicity, 2);
        assert!(p[0].point.norm() < 1e-7);

        // 4x^3 - 3x - 1 = (x - 1)(2x + 1)^2
        let t3 = PolynomialMap::chebyshev(3).unwrap();
        let p = t3.preimages(c(1.0, 0.0)).unwrap();
        assert_eq!(p.len(), 2);
        let one = p.iter().find(|q| (q.point - c(1.0, 0.0)).norm() < 1e-9).unwrap();
        let half = p.iter().find(|q| (q.point - c(-0.5, 0.0)).norm() < 1e-7).unwrap();
        assert_eq!(one.multiplicity, 1);
        assert_eq!(half.multiplicity, 2);

        let sq = PolynomialMap::monomial(2).unwrap();
        let mut p = sq.preimages(c(4.0, 0.0)).unwrap();
        p.sort_by(|a, b| a.point.re.partial_cmp(&b.point.re).unwrap());
        assert!((p[0].point - c(-2.0, 0.0)).norm() < 1e-12);
        assert!((p[1].point - c(2.0, 0.0)).norm() < 1e-12);
        assert!(p.iter().all(|q| q.multiplicity == 1));
    }

    #[test]
    fn preimages_of_triple_root() {
        let f = PolynomialMap::monomial(3).unwrap();
        let p = f.preimages(c(0.0, 0.0)).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].multiplicity, 3);
    }

    #[test]
    fn critical_points_of_cubic() {
        let t3 = PolynomialMap::chebyshev(3).unwrap();
        let mut cp = t3.critical_points().unwrap();
        cp.sort_by(|a, b| a.point.re.partial_cmp(&b.point.re).unwrap());
        assert!((cp[0].point - c(-0.5, 0.0)).norm() < 1e-12);
        assert!((cp[1].point - c(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn affine_conjugate_matches_composition() {
        let f = PolynomialMap::quadratic(c(0.0, 1.0));
        let a = c(1.5, -0.5);
        let b = c(0.25, 0.75);
        let g = f.conjugate_affine(a, b).unwrap();
        for z in [c(0.1, 0.2), c(-1.0, 0.5), c(2.0, -1.0)] {
            let expect = a * f.eval((z - b) / a) + b;
            assert!((g.eval(z) - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn taylor_coefficients_match_derivatives() {
        let f = PolynomialMap::from_real(&[1.0, -2.0, 0.5, 3.0]).unwrap();
        let z = c(0.3, -0.7);
        let (_, d1) = f.eval_with_derivative(z);
        assert!((f.taylor_coefficient(z, 1) - d1).norm() < 1e-12);
        // third Taylor coefficient of a cubic is its leading coefficient
        assert!((f.taylor_coefficient(z, 3) - c(3.0, 0.0)).norm() < 1e-12);
    }
}
