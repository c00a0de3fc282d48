use crate::geometry::{Point, TargetTriangle};

/// Fermat-Torricelli point of the triangle when all angles are below 2*pi/3,
/// by the isogonic construction: erect an equilateral triangle outward on each
/// of two sides and intersect the lines joining each apex to the opposite
/// vertex. Returns None when some angle is >= 2*pi/3 (the minimizer is then
/// the wide vertex itself).
pub fn fermat_point(triangle: &TargetTriangle) -> Option<Point> {
    let two_thirds_pi = 2.0 * std::f64::consts::FRAC_PI_3;
    if (0..3).any(|i| triangle.angle(i) >= two_thirds_pi - 1e-12) {
        return None;
    }
    let [a, b, c] = triangle.vertices();
    let apex_ab = outward_equilateral_apex(a, b, c);
    let apex_bc = outward_equilateral_apex(b, c, a);
    line_intersection(c, apex_ab, a, apex_bc)
}

/// Apex of the equilateral triangle built on segment (p, q), on the opposite
/// side from `far`.
fn outward_equilateral_apex(p: Point, q: Point, far: Point) -> Point {
    let rot = |v: Point, sign: f64| {
        // rotation by +-60 degrees
        let (c, s) = (0.5, sign * 3f64.sqrt() / 2.0);
        Point::new(c * v.x - s * v.y, s * v.x + c * v.y)
    };
    let v = q - p;
    let cand1 = p + rot(v, 1.0);
    let cand2 = p + rot(v, -1.0);
    let side = |x: Point| (q - p).cross(x - p);
    if side(cand1) * side(far) < 0.0 {
        cand1
    } else {
        cand2
    }
}

fn line_intersection(a1: Point, a2: Point, b1: Point, b2: Point) -> Option<Point> {
    let d1 = a2 - a1;
    let d2 = b2 - b1;
    let den = d1.cross(d2);
    if den.abs() < 1e-300 {
        return None;
    }
    let t = (b1 - a1).cross(d2) / den;
    Some(a1 + d1 * t)
}

/// Weiszfeld iteration for the geometric median of the three vertices; kept
/// as an independent cross-check of the isogonic construction.
pub fn weiszfeld(triangle: &TargetTriangle, iterations: usize) -> Point {
    let vs = triangle.vertices();
    let mut p = triangle.barycenter();
    for _ in 0..iterations {
        let mut num = Point::new(0.0, 0.0);
        let mut den = 0.0;
        for &v in &vs {
            let d = p.dist(v).max(1e-300);
            num = num + v * (1.0 / d);
            den += 1.0 / d;
        }
        let next = num * (1.0 / den);
        if next.dist(p) < 1e-15 * triangle.diameter() {
            return next;
        }
        p = next;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilateral_fermat_is_barycenter() {
        let t = TargetTriangle::new([
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 3f64.sqrt() / 2.0),
        ])
        .unwrap();
        let p = fermat_point(&t).unwrap();
        assert!(p.dist(t.barycenter()) < 1e-12);
    }

    #[test]
    fn fermat_matches_weiszfeld_and_sees_sides_at_120_degrees() {
        // 80-80-20 isoceles triangle
        let apex_angle = 20f64.to_radians();
        let half = (apex_angle / 2.0).tan();
        let t = TargetTriangle::new([
            Point::new(-half, 0.0),
            Point::new(half, 0.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        let p = fermat_point(&t).unwrap();
        let w = weiszfeld(&t, 500);
        assert!(p.dist(w) < 1e-9, "isogonic {p:?} vs weiszfeld {w:?}");
        for i in 0..3 {
            let u = (t.vertex(i) - p).normalized();
            let v = (t.vertex((i + 1) % 3) - p).normalized();
            let ang = u.dot(v).clamp(-1.0, 1.0).acos();
            assert!((ang - 2.0 * std::f64::consts::FRAC_PI_3).abs() < 1e-6);
        }
    }

    #[test]
    fn wide_angle_returns_none() {
        let t = TargetTriangle::new([
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 0.1),
        ])
        .unwrap();
        assert!(fermat_point(&t).is_none());
    }
}
