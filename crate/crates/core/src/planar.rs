//! Small planar-geometry kernels shared by the lifting, geometry and
//! antenna modules.

use crate::dynamics::ComplexPoint;

/// Euclidean distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: ComplexPoint, a: ComplexPoint, b: ComplexPoint) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Distance from `p` to a polyline given by its vertices.
pub fn point_polyline_distance(p: ComplexPoint, vertices: &[ComplexPoint]) -> f64 {
    match vertices.len() {
        0 => f64::INFINITY,
        1 => (p - vertices[0]).norm(),
        _ => vertices
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

fn cross(a: ComplexPoint, b: ComplexPoint) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Whether the closed segments `[a, b]` and `[c, d]` intersect.
pub fn segments_intersect(a: ComplexPoint, b: ComplexPoint, c: ComplexPoint, d: ComplexPoint) -> bool {
    let d1 = cross(d - c, a - c);
    let d2 = cross(d - c, b - c);
    let d3 = cross(b - a, c - a);
    let d4 = cross(b - a, d - a);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |p: ComplexPoint, q: ComplexPoint, r: ComplexPoint, o: f64| {
        o == 0.0 && r.re >= p.re.min(q.re) && r.re <= p.re.max(q.re) && r.im >= p.im.min(q.im) && r.im <= p.im.max(q.im)
    };
    on(c, d, a, d1) || on(c, d, b, d2) || on(a, b, c, d3) || on(a, b, d, d4)
}

/// Distance between two closed segments.
pub fn segment_segment_distance(a: ComplexPoint, b: ComplexPoint, c: ComplexPoint, d: ComplexPoint) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

pub fn polyline_length(vertices: &[ComplexPoint]) -> f64 {
    vertices.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// The initial piece of a polyline of arc length `len` (the whole polyline
/// when it is shorter).
pub fn truncate_polyline(vertices: &[ComplexPoint], len: f64) -> Vec<ComplexPoint> {
    let mut out = Vec::with_capacity(vertices.len());
    let Some(&first) = vertices.first() else {
        return out;
    };
    out.push(first);
    let mut acc = 0.0;
    for w in vertices.windows(2) {
        let seg = (w[1] - w[0]).norm();
        if acc + seg >= len {
            let t = if seg > 0.0 { (len - acc) / seg } else { 0.0 };
            let p = w[0] + (w[1] - w[0]) * t;
            if (p - *out.last().unwrap()).norm() > 0.0 {
                out.push(p);
            }
            return out;
        }
        acc += seg;
        out.push(w[1]);
    }
    out
}

/// Convex hull by the monotone-chain algorithm, counter-clockwise, without
/// collinear points.
pub fn convex_hull(points: &[ComplexPoint]) -> Vec<ComplexPoint> {
    let mut pts: Vec<ComplexPoint> = points.to_vec();
    pts.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<ComplexPoint> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 1] - lower[lower.len() - 2], p - lower[lower.len() - 2]) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<ComplexPoint> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 1] - upper[upper.len() - 2], p - upper[upper.len() - 2]) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Maximum pairwise distance, computed over the convex hull.
pub fn diameter(points: &[ComplexPoint]) -> f64 {
    let hull = convex_hull(points);
    let mut best: f64 = 0.0;
    for i in 0..hull.len() {
        for j in (i + 1)..hull.len() {
            best = best.max((hull[i] - hull[j]).norm());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> ComplexPoint {
        Complex64::new(re, im)
    }

    #[test]
    fn segment_distance_cases() {
        assert_eq!(point_segment_distance(c(0.0, 1.0), c(-1.0, 0.0), c(1.0, 0.0)), 1.0);
        assert_eq!(point_segment_distance(c(3.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)), 2.0);
        assert!(segments_intersect(c(0.0, -1.0), c(0.0, 1.0), c(-1.0, 0.0), c(1.0, 0.0)));
        assert!(!segments_intersect(c(0.0, 0.5), c(0.0, 1.0), c(-1.0, 0.0), c(1.0, 0.0)));
        assert!(segments_intersect(c(0.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(1.0, 0.0)));
    }

    #[test]
    fn truncation_keeps_prefix_length() {
        let p = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0)];
        let t = truncate_polyline(&p, 1.5);
        assert!((polyline_length(&t) - 1.5).abs() < 1e-15);
        assert_eq!(t.last().copied().unwrap(), c(1.0, 0.5));
    }

    proptest! {
        #[test]
        fn hull_diameter_matches_brute_force(pts in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..40)) {
            let pts: Vec<ComplexPoint> = pts.iter().map(|&(x, y)| c(x, y)).collect();
            let mut brute: f64 = 0.0;
            for a in &pts { for b in &pts { brute = brute.max((a - b).norm()); } }
            prop_assert!((diameter(&pts) - brute).abs() < 1e-12);
        }
    }
}
