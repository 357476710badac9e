//! Simultaneous (Weierstrass / Durand–Kerner) root iteration.

use super::{ComplexPoint, PolynomialMap, Preimage, CLUSTER_TOL, TOL_ROOT};
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct RootFinder {
    pub tol: f64,
    pub cluster_tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for RootFinder {
    fn default() -> Self {
        Self {
            tol: TOL_ROOT,
            cluster_tol: CLUSTER_TOL,
            max_iter: 600,
            restarts: 6,
            seed: 0x5eed,
        }
    }
}

impl RootFinder {
    /// All `deg(f)` roots of `f(z) - w`, unclustered.
    pub fn raw_roots(&self, map: &PolynomialMap, w: ComplexPoint) -> Result<Vec<ComplexPoint>> {
        let mut coeffs = map.coefficients().to_vec();
        coeffs[0] -= w;
        let lead = coeffs[coeffs.len() - 1];
        let monic: Vec<ComplexPoint> = coeffs.iter().map(|c| c / lead).collect();
        let n = monic.len() - 1;

        let radius = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut last_residuals = Vec::new();

        for attempt in 0..=self.restarts {
            let mut z: Vec<ComplexPoint> = (0..n)
                .map(|k| {
                    let base = Complex64::new(0.4, 0.9).powu(k as u32) * (radius * 0.5);
                    if attempt == 0 {
                        base
                    } else {
                        base + Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)) * radius
                    }
                })
                .collect();

            for _ in 0..self.max_iter {
                let mut max_step: f64 = 0.0;
                for i in 0..n {
                    let zi = z[i];
                    let mut denom = Complex64::new(1.0, 0.0);
                    for (j, zj) in z.iter().enumerate() {
                        if j != i {
                            denom *= zi - zj;
                        }
                    }
                    if denom.norm() == 0.0 {
                        denom = Complex64::new(1e-300, 0.0);
                    }
                    let step = horner(&monic, zi) / denom;
                    if step.re.is_finite() && step.im.is_finite() {
                        z[i] = zi - step;
                        max_step = max_step.max(step.norm() / (1.0 + zi.norm()));
                    }
                }
                if max_step < 1e-15 {
                    break;
                }
            }
            for zi in z.iter_mut() {
                *zi = newton_polish(&monic, *zi);
            }
            last_residuals = z.iter().map(|&r| residual(map, r, w)).collect();
            let ok = z
                .iter()
                .zip(&last_residuals)
                .all(|(r, res)| r.re.is_finite() && r.im.is_finite() && *res < self.tol * eval_scale(map, *r));
            if ok {
                return Ok(z);
            }
        }
        let max_residual = last_residuals.iter().cloned().fold(0.0, f64::max);
        Err(Error::RootsNotConverged { max_residual, residuals: last_residuals })
    }

    /// Clustered roots of `f(z) - w` with multiplicities summing to `deg(f)`.
    pub fn preimages(&self, map: &PolynomialMap, w: ComplexPoint) -> Result<Vec<Preimage>> {
        let roots = self.raw_roots(map, w)?;
        Ok(cluster_roots(&roots, self.cluster_tol))
    }
}

/// Single-linkage clustering; each cluster becomes one root at its mean,
/// with the cluster size as multiplicity. Output is ordered by argument,
/// then modulus.
pub fn cluster_roots(roots: &[ComplexPoint], tol: f64) -> Vec<Preimage> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        let mut k = i;
        while label[k] != r {
            let next = label[k];
            label[k] = r;
            k = next;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = 1.0f64.max(roots[i].norm());
            if (roots[i] - roots[j]).norm() < tol * scale {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<ComplexPoint>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut label, i);
        match groups.iter_mut().find(|(k, _)| *k == r) {
            Some((_, v)) => v.push(roots[i]),
            None => groups.push((r, vec![roots[i]])),
        }
    }
    let mut out: Vec<Preimage> = groups
        .into_iter()
        .map(|(_, v)| {
            let m = v.len();
            let sum: ComplexPoint = v.iter().sum();
            Preimage { point: sum / m as f64, multiplicity: m }
        })
        .collect();
    out.sort_by(|a, b| {
        a.point
            .arg()
            .partial_cmp(&b.point.arg())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.point.norm().partial_cmp(&b.point.norm()).unwrap_or(std::cmp::Ordering::Equal))
    });
    out
}

#[inline]
fn horner(c: &[ComplexPoint], z: ComplexPoint) -> ComplexPoint {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in c.iter().rev() {
        acc = acc * z + a;
    }
    acc
}

fn newton_polish(c: &[ComplexPoint], mut z: ComplexPoint) -> ComplexPoint {
    for _ in 0..3 {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for a in c.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        if dp.norm() < 1e-8 * (1.0 + p.norm()) {
            break;
        }
        let step = p / dp;
        if !(step.re.is_finite() && step.im.is_finite()) || step.norm() > 1e-3 * (1.0 + z.norm()) {
            break;
        }
        z -= step;
    }
    z
}

fn residual(map: &PolynomialMap, r: ComplexPoint, w: ComplexPoint) -> f64 {
    (map.eval(r) - w).norm()
}

/// The magnitude scale of `sum |a_j| |z|^j`, the natural unit for residuals.
fn eval_scale(map: &PolynomialMap, z: ComplexPoint) -> f64 {
    let r = z.norm();
    let mut acc = 0.0;
    for c in map.coefficients().iter().rev() {
        acc = acc * r + c.norm();
    }
    acc.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clustering_merges_close_roots() {
        let roots = [
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0 + 1e-9, 0.0),
            Complex64::new(-1.0, 0.0),
        ];
        let c = cluster_roots(&roots, 1e-6);
        assert_eq!(c.len(), 2);
        assert_eq!(c.iter().map(|p| p.multiplicity).sum::<usize>(), 3);
    }

    #[test]
    fn output_ordered_by_argument() {
        let f = PolynomialMap::monomial(3).unwrap();
        let p = f.preimages(Complex64::new(1.0, 0.0)).unwrap();
        let args: Vec<f64> = p.iter().map(|q| q.point.arg()).collect();
        assert!(args.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn roots_are_reproducible() {
        let f = PolynomialMap::quadratic(Complex64::new(-0.12, 0.74));
        let w = Complex64::new(0.3, -0.2);
        let a = RootFinder::default().raw_roots(&f, w).unwrap();
        let b = RootFinder::default().raw_roots(&f, w).unwrap();
        assert_eq!(a, b);
    }
}
