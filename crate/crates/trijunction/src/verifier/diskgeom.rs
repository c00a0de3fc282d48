//! Exact areas of disk/polygon intersections, used for the source-disk
//! partition bookkeeping. Each directed polygon edge contributes the signed
//! area of the circle-clipped triangle (center, a, b); summed over a simple
//! CCW polygon this is exactly |polygon intersect disk|.

use crate::geometry::Point;

/// Circumcircle of three points. None when collinear.
pub fn circumcircle(a: Point, b: Point, c: Point) -> Option<(Point, f64)> {
    let d = 2.0 * ((b - a).cross(c - a));
    if d.abs() < 1e-300 {
        return None;
    }
    let a2 = a.dot(a);
    let b2 = b.dot(b);
    let c2 = c.dot(c);
    let ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    let uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    let center = Point::new(ux, uy);
    Some((center, center.dist(a)))
}

/// Area of `polygon intersect disk(center, r)`. The polygon must be simple;
/// positive orientation gives positive area (a CW polygon returns the
/// negated value, so callers normalize orientation first).
pub fn disk_polygon_area(center: Point, r: f64, polygon: &[Point]) -> f64 {
    let n = polygon.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = polygon[i] - center;
        let b = polygon[(i + 1) % n] - center;
        acc += edge_contribution(a, b, r);
    }
    acc
}

/// Signed area of triangle (0, a, b) intersected with the disk |x| <= r.
fn edge_contribution(a: Point, b: Point, r: f64) -> f64 {
    // split [a, b] at its circle crossings; inside parts contribute straight
    // triangle area, outside parts contribute circular sectors
    let d = b - a;
    let qa = d.dot(d);
    if qa < 1e-300 {
        return 0.0;
    }
    let qb = 2.0 * a.dot(d);
    let qc = a.dot(a) - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    let mut cuts = vec![0.0];
    if disc > 0.0 {
        let sq = disc.sqrt();
        for t in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
            if t > 0.0 && t < 1.0 {
                cuts.push(t);
            }
        }
    }
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);

    let mut acc = 0.0;
    for w in cuts.windows(2) {
        let p = a + d * w[0];
        let q = a + d * w[1];
        let mid = a + d * (0.5 * (w[0] + w[1]));
        if mid.norm() <= r {
            acc += 0.5 * p.cross(q);
        } else {
            let theta = p.cross(q).atan2(p.dot(q));
            acc += 0.5 * r * r * theta;
        }
    }
    acc
}

/// Signed polygon area (shoelace); positive when CCW.
pub fn polygon_area(polygon: &[Point]) -> f64 {
    let n = polygon.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += polygon[i].cross(polygon[(i + 1) % n]);
    }
    0.5 * acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circumcircle_of_symmetric_endpoints() {
        let r = 1.0;
        let pts = [
            Point::new(0.0, r),
            Point::new(-r * 3f64.sqrt() / 2.0, -r / 2.0),
            Point::new(r * 3f64.sqrt() / 2.0, -r / 2.0),
        ];
        let (c, rad) = circumcircle(pts[0], pts[1], pts[2]).unwrap();
        assert!(c.norm() < 1e-12);
        assert!((rad - 1.0).abs() < 1e-12);
    }

    #[test]
    fn square_containing_disk() {
        let sq = [
            Point::new(-2.0, -2.0),
            Point::new(2.0, -2.0),
            Point::new(2.0, 2.0),
            Point::new(-2.0, 2.0),
        ];
        let a = disk_polygon_area(Point::new(0.1, -0.2), 1.0, &sq);
        assert!((a - PI).abs() < 1e-12);
    }

    #[test]
    fn half_plane_cuts_disk_in_half() {
        let half = [
            Point::new(-5.0, 0.0),
            Point::new(5.0, 0.0),
            Point::new(5.0, 5.0),
            Point::new(-5.0, 5.0),
        ];
        let a = disk_polygon_area(Point::new(0.0, 0.0), 1.0, &half);
        assert!((a - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn polygon_inside_disk_is_polygon_area() {
        let tri = [Point::new(0.0, 0.0), Point::new(0.3, 0.0), Point::new(0.1, 0.2)];
        let a = disk_polygon_area(Point::new(0.0, 0.0), 2.0, &tri);
        assert!((a - polygon_area(&tri)).abs() < 1e-14);
    }

    #[test]
    fn concentric_radii_are_additive_on_covering_polygon() {
        let sq = [
            Point::new(-40.0, -40.0),
            Point::new(40.0, -40.0),
            Point::new(40.0, 40.0),
            Point::new(-40.0, 40.0),
        ];
        let c = Point::new(0.3, 0.1);
        let a1 = disk_polygon_area(c, 1.0, &sq);
        let a2 = disk_polygon_area(c, 2.0, &sq);
        assert!((a2 - a1 - 3.0 * PI).abs() < 1e-11);
    }

    #[test]
    fn offset_chord_region() {
        // region {y >= d} in a unit disk: circular segment of height 1-d
        let d = 0.3;
        let poly = [
            Point::new(-5.0, d),
            Point::new(5.0, d),
            Point::new(5.0, 5.0),
            Point::new(-5.0, 5.0),
        ];
        let a = disk_polygon_area(Point::new(0.0, 0.0), 1.0, &poly);
        let expect = (1.0f64).powi(2) * ((d).acos()) - d * (1.0 - d * d).sqrt();
        assert!((a - expect).abs() < 1e-12);
    }
}
