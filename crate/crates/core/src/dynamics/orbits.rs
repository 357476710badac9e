//! Critical-orbit screening for semi-hyperbolicity.
//!
//! The screen is heuristic: a `recurrent-suspect` orbit is one that comes
//! back within `RECURRENCE_RADIUS` of its critical point after
//! `RECURRENCE_MIN_STEPS` steps, and parabolic cycles are detected through
//! their multipliers.

use super::{ComplexPoint, PolynomialMap};
use crate::error::Result;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const RECURRENCE_RADIUS: f64 = 1e-3;
pub const RECURRENCE_MIN_STEPS: usize = 10;
const MAX_PERIOD: usize = 64;
const ORBIT_SAMPLE_LEN: usize = 32;
const PARABOLIC_TOL: f64 = 1e-4;
const MAX_ROOT_OF_UNITY: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitClass {
    Periodic,
    Preperiodic,
    AttractedToAttractingCycle,
    Escaping,
    RecurrentSuspect,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleInfo {
    pub preperiod: usize,
    pub period: usize,
    pub points: Vec<ComplexPoint>,
    pub multiplier: ComplexPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalOrbit {
    pub critical_point: ComplexPoint,
    pub local_degree: usize,
    pub orbit_sample: Vec<ComplexPoint>,
    pub classification: OrbitClass,
    /// The cycle the orbit lands on exactly (periodic / preperiodic /
    /// attracted cases).
    pub cycle: Option<CycleInfo>,
    /// Multiplier of a cycle refined from the orbit tail, when the tail is
    /// close to periodic but never matched exactly.
    pub limit_multiplier: Option<ComplexPoint>,
    pub parabolic_suspect: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalOrbitReport {
    pub map: String,
    pub max_iter: usize,
    pub tol_orbit: f64,
    pub orbits: Vec<CriticalOrbit>,
    pub sampled_multipliers: Vec<ComplexPoint>,
    pub semi_hyperbolic_candidate: bool,
}

pub fn classify_critical_orbits(
    map: &PolynomialMap,
    max_iter: usize,
    tol_orbit: f64,
) -> Result<CriticalOrbitReport> {
    let radius = map.escape_radius();
    let mut orbits = Vec::new();
    for cp in map.critical_points()? {
        orbits.push(classify_one(map, cp.point, cp.multiplicity + 1, max_iter, tol_orbit, radius));
    }
    let mut sampled_multipliers: Vec<ComplexPoint> = Vec::new();
    for o in &orbits {
        if let Some(c) = &o.cycle {
            sampled_multipliers.push(c.multiplier);
        }
        if let Some(m) = o.limit_multiplier {
            sampled_multipliers.push(m);
        }
    }
    let semi_hyperbolic_candidate = orbits.iter().all(|o| {
        !o.parabolic_suspect
            && !matches!(o.classification, OrbitClass::RecurrentSuspect | OrbitClass::Undetermined)
    });
    Ok(CriticalOrbitReport {
        map: map.to_spec(),
        max_iter,
        tol_orbit,
        orbits,
        sampled_multipliers,
        semi_hyperbolic_candidate,
    })
}

fn classify_one(
    map: &PolynomialMap,
    c: ComplexPoint,
    local_degree: usize,
    max_iter: usize,
    tol: f64,
    radius: f64,
) -> CriticalOrbit {
    let mut orbit = vec![c];
    let mut z = c;
    let mut class = None;
    let mut cycle = None;

    for k in 1..=max_iter {
        z = map.eval(z);
        if !(z.re.is_finite() && z.im.is_finite()) || z.norm() > radius {
            class = Some(OrbitClass::Escaping);
            break;
        }
        orbit.push(z);
        if (z - c).norm() < tol {
            class = Some(OrbitClass::Periodic);
            cycle = Some(make_cycle(map, &orbit[..k], 0));
            break;
        }
        let lo = k.saturating_sub(MAX_PERIOD);
        if let Some(i) = (lo..k).find(|&i| (orbit[i] - z).norm() < tol) {
            let info = make_cycle(map, &orbit[i..k], i);
            class = Some(if info.multiplier.norm() < 1.0 - 1e-6 {
                OrbitClass::AttractedToAttractingCycle
            } else {
                OrbitClass::Preperiodic
            });
            cycle = Some(info);
            break;
        }
    }

    let class = class.unwrap_or_else(|| {
        let recurrent = orbit
            .iter()
            .skip(RECURRENCE_MIN_STEPS + 1)
            .any(|w| (w - c).norm() < RECURRENCE_RADIUS);
        if recurrent {
            OrbitClass::RecurrentSuspect
        } else {
            OrbitClass::Undetermined
        }
    });

    let limit_multiplier = if matches!(class, OrbitClass::Undetermined | OrbitClass::RecurrentSuspect) {
        refine_tail_cycle(map, &orbit).map(|(_, m)| m)
    } else {
        None
    };
    let parabolic_suspect = cycle
        .as_ref()
        .map(|c| c.multiplier)
        .into_iter()
        .chain(limit_multiplier)
        .any(is_root_of_unity);

    CriticalOrbit {
        critical_point: c,
        local_degree,
        orbit_sample: orbit.iter().take(ORBIT_SAMPLE_LEN).cloned().collect(),
        classification: class,
        cycle,
        limit_multiplier,
        parabolic_suspect,
    }
}

fn make_cycle(map: &PolynomialMap, points: &[ComplexPoint], preperiod: usize) -> CycleInfo {
    let multiplier = points
        .iter()
        .fold(Complex64::new(1.0, 0.0), |acc, &z| acc * map.eval_with_derivative(z).1);
    CycleInfo { preperiod, period: points.len(), points: points.to_vec(), multiplier }
}

fn is_root_of_unity(m: ComplexPoint) -> bool {
    (1..=MAX_ROOT_OF_UNITY).any(|q| (m.powu(q) - 1.0).norm() < PARABOLIC_TOL)
}

/// Newton refinement of a cycle of the smallest period `p` for which the
/// orbit tail is nearly `p`-periodic. Returns the cycle point and multiplier.
fn refine_tail_cycle(map: &PolynomialMap, orbit: &[ComplexPoint]) -> Option<(ComplexPoint, ComplexPoint)> {
    let n = orbit.len();
    let last = *orbit.last()?;
    let p = (1..=MAX_PERIOD.min(n - 1)).find(|&p| (orbit[n - 1 - p] - last).norm() < 1e-2)?;
    let mut z = last;
    for _ in 0..200 {
        let (mut w, mut dw) = (z, Complex64::new(1.0, 0.0));
        for _ in 0..p {
            let (fw, dfw) = map.eval_with_derivative(w);
            dw *= dfw;
            w = fw;
        }
        let g = w - z;
        let dg = dw - 1.0;
        if dg.norm() < 1e-300 {
            break;
        }
        let step = g / dg;
        z -= step;
        if step.norm() < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    let mut w = z;
    let mut mult = Complex64::new(1.0, 0.0);
    for _ in 0..p {
        let (fw, dfw) = map.eval_with_derivative(w);
        mult *= dfw;
        w = fw;
    }
    if (w - z).norm() > 1e-6 {
        return None;
    }
    Some((z, mult))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexPoint {
        Complex64::new(re, im)
    }

    #[test]
    fn z2_plus_i_is_preperiodic_onto_two_cycle() {
        // Exact integer arithmetic: 0 -> i -> i-1 -> -i -> i-1.
        let f = PolynomialMap::quadratic(c(0.0, 1.0));
        let mut z = c(0.0, 0.0);
        let expect = [c(0.0, 1.0), c(-1.0, 1.0), c(0.0, -1.0), c(-1.0, 1.0)];
        for e in expect {
            z = z * z + c(0.0, 1.0);
            assert_eq!(z, e);
        }
        let report = classify_critical_orbits(&f, 200, 1e-9).unwrap();
        assert_eq!(report.orbits.len(), 1);
        let o = &report.orbits[0];
        assert_eq!(o.classification, OrbitClass::Preperiodic);
        let cyc = o.cycle.as_ref().unwrap();
        assert_eq!(cyc.period, 2);
        assert_eq!(cyc.preperiod, 2);
        assert_eq!(o.orbit_sample[..4], [c(0.0, 0.0), c(0.0, 1.0), c(-1.0, 1.0), c(0.0, -1.0)]);
        assert!(report.semi_hyperbolic_candidate);
    }

    #[test]
    fn z2_critical_point_is_fixed() {
        let f = PolynomialMap::monomial(2).unwrap();
        let report = classify_critical_orbits(&f, 50, 1e-9).unwrap();
        assert_eq!(report.orbits[0].classification, OrbitClass::Periodic);
        assert_eq!(report.orbits[0].cycle.as_ref().unwrap().period, 1);
    }

    #[test]
    fn quarter_is_parabolic_suspect() {
        // z^2 + 1/4 = z has the double root 1/2, f'(1/2) = 1.
        let f = PolynomialMap::quadratic(c(0.25, 0.0));
        let report = classify_critical_orbits(&f, 400, 1e-9).unwrap();
        let o = &report.orbits[0];
        assert!(o.parabolic_suspect);
        assert_eq!(o.classification, OrbitClass::Undetermined);
        let m = o.limit_multiplier.unwrap();
        assert!((m - 1.0).norm() < 1e-4);
        assert!(!report.semi_hyperbolic_candidate);
    }

    #[test]
    fn escaping_and_attracted() {
        let f = PolynomialMap::quadratic(c(1.0, 0.0));
        let r = classify_critical_orbits(&f, 100, 1e-9).unwrap();
        assert_eq!(r.orbits[0].classification, OrbitClass::Escaping);

        let g = PolynomialMap::quadratic(c(0.2, 0.0));
        let r = classify_critical_orbits(&g, 2000, 1e-9).unwrap();
        assert_eq!(r.orbits[0].classification, OrbitClass::AttractedToAttractingCycle);
    }

    #[test]
    fn basilica_is_periodic_two() {
        let f = PolynomialMap::quadratic(c(-1.0, 0.0));
        let r = classify_critical_orbits(&f, 100, 1e-9).unwrap();
        assert_eq!(r.orbits[0].classification, OrbitClass::Periodic);
        assert_eq!(r.orbits[0].cycle.as_ref().unwrap().period, 2);
    }

    #[test]
    fn report_serializes_with_kebab_labels() {
        let f = PolynomialMap::quadratic(c(0.0, 1.0));
        let r = classify_critical_orbits(&f, 50, 1e-9).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"preperiodic\""));
    }
}
