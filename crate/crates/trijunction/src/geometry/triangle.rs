use super::point::Point;
use super::GeometryError;

/// The three sides of the target triangle, in the cyclic order used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    S12,
    S23,
    S31,
}

pub const SIDES: [Side; 3] = [Side::S12, Side::S23, Side::S31];

impl Side {
    /// Index of the first vertex of the side (0-based).
    pub fn i(self) -> usize {
        match self {
            Side::S12 => 0,
            Side::S23 => 1,
            Side::S31 => 2,
        }
    }

    /// Index of the second vertex of the side.
    pub fn j(self) -> usize {
        match self {
            Side::S12 => 1,
            Side::S23 => 2,
            Side::S31 => 0,
        }
    }

    /// Index of the vertex opposite to the side.
    pub fn opposite(self) -> usize {
        match self {
            Side::S12 => 2,
            Side::S23 => 0,
            Side::S31 => 1,
        }
    }

    /// The two sides incident to vertex `i`: (side where i is first, side where i is second).
    /// Branch i covers abscissae [0, w] on the first and [w, l] on the second.
    pub fn incident(i: usize) -> (Side, Side) {
        match i {
            0 => (Side::S12, Side::S31),
            1 => (Side::S23, Side::S12),
            2 => (Side::S31, Side::S23),
            _ => panic!("vertex index out of range"),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Side::S12 => "12",
            Side::S23 => "23",
            Side::S31 => "31",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::S12 => 0,
            Side::S23 => 1,
            Side::S31 => 2,
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Orthonormal frame of a triangle side: unit tangent from vertex i to vertex j
/// and inward unit normal, with tangent x normal = +1.
#[derive(Debug, Clone, Copy)]
pub struct SideFrame {
    pub origin: Point,
    pub tangent: Point,
    pub normal: Point,
    pub length: f64,
}

impl SideFrame {
    /// Coordinates (abscissa along tangent, height along inward normal) of `q`.
    pub fn coords(&self, q: Point) -> (f64, f64) {
        let d = q - self.origin;
        (d.dot(self.tangent), d.dot(self.normal))
    }

    /// Inverse of `coords`.
    pub fn point_at(&self, s: f64, h: f64) -> Point {
        self.origin + self.tangent * s + self.normal * h
    }
}

/// The target triangle: vertices, per-side frames, side lengths, interior angles.
#[derive(Debug, Clone)]
pub struct TargetTriangle {
    vertices: [Point; 3],
    frames: [SideFrame; 3],
    angles: [f64; 3],
    diameter: f64,
}

impl TargetTriangle {
    /// Builds a triangle from counterclockwise vertices.
    ///
    /// Counterclockwise order is required so that every inward normal is the
    /// +90-degree rotation of the side tangent (tangent x normal = +1).
    pub fn new(vertices: [Point; 3]) -> Result<Self, GeometryError> {
        let [a1, a2, a3] = vertices;
        let doubled_area = (a2 - a1).cross(a3 - a1);
        let scale = (a2 - a1)
            .norm()
            .max((a3 - a2).norm())
            .max((a1 - a3).norm());
        if !doubled_area.is_finite() || doubled_area.abs() <= 1e-12 * scale * scale {
            return Err(GeometryError::DegenerateTriangle);
        }
        if doubled_area < 0.0 {
            return Err(GeometryError::NotCounterclockwise);
        }
        let mk_frame = |from: Point, to: Point| {
            let length = from.dist(to);
            let tangent = (to - from) * (1.0 / length);
            SideFrame {
                origin: from,
                tangent,
                normal: tangent.rot90(),
                length,
            }
        };
        let frames = [
            mk_frame(a1, a2),
            mk_frame(a2, a3),
            mk_frame(a3, a1),
        ];
        let angle_at = |v: Point, p: Point, q: Point| {
            let u = (p - v).normalized();
            let w = (q - v).normalized();
            u.dot(w).clamp(-1.0, 1.0).acos()
        };
        let angles = [
            angle_at(a1, a2, a3),
            angle_at(a2, a3, a1),
            angle_at(a3, a1, a2),
        ];
        let diameter = frames[0].length.max(frames[1].length).max(frames[2].length);
        Ok(TargetTriangle {
            vertices,
            frames,
            angles,
            diameter,
        })
    }

    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i]
    }

    pub fn vertices(&self) -> [Point; 3] {
        self.vertices
    }

    pub fn side_frame(&self, side: Side) -> &SideFrame {
        &self.frames[side.index()]
    }

    pub fn side_length(&self, side: Side) -> f64 {
        self.frames[side.index()].length
    }

    /// Interior angle at vertex i, in radians.
    pub fn angle(&self, i: usize) -> f64 {
        self.angles[i]
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn barycenter(&self) -> Point {
        let [a, b, c] = self.vertices;
        (a + b + c) * (1.0 / 3.0)
    }

    pub fn area(&self) -> f64 {
        let [a, b, c] = self.vertices;
        0.5 * (b - a).cross(c - a)
    }

    /// Whether some interior angle exceeds pi/2 (up to rounding slack).
    pub fn is_obtuse(&self) -> bool {
        self.angles.iter().any(|&a| a > std::f64::consts::FRAC_PI_2 + 1e-12)
    }

    /// Index of the widest angle.
    pub fn widest_vertex(&self) -> usize {
        (0..3)
            .max_by(|&a, &b| self.angles[a].total_cmp(&self.angles[b]))
            .unwrap()
    }

    /// Orthogonal projection of `point` onto the line of `side`, as
    /// (abscissa from vertex i, height along the inward normal).
    pub fn project_to_side(&self, point: Point, side: Side) -> (f64, f64) {
        self.side_frame(side).coords(point)
    }

    /// Signed point-in-triangle test: all three inward-normal heights >= -tol.
    pub fn contains(&self, q: Point, tol: f64) -> bool {
        SIDES
            .iter()
            .all(|&s| self.project_to_side(q, s).1 >= -tol)
    }

    /// Whether `p` projects onto the closed segment of every side (within tol).
    /// For acute triangles this holds for every p in T; for obtuse triangles it
    /// is the T_int restriction on the target triple point.
    pub fn projections_admissible(&self, p: Point, tol: f64) -> bool {
        SIDES.iter().all(|&side| {
            let (s, _) = self.project_to_side(p, side);
            s >= -tol && s <= self.side_length(side) + tol
        })
    }

    /// Barycentric combination of the vertices.
    pub fn barycentric_point(&self, l1: f64, l2: f64, l3: f64) -> Point {
        let [a, b, c] = self.vertices;
        a * l1 + b * l2 + c * l3
    }

    /// Uniform bound on the length of one connection pair, from the triangle
    /// geometry alone: c = sum_i D_i * (1 + 2*ct_i) with D_i the farthest-vertex
    /// distance and ct_i the worst-case slope of the tangent cone at vertex i.
    pub fn length_bound(&self) -> f64 {
        (0..3).map(|i| self.branch_length_bound_uniform(i)).sum()
    }

    /// Uniform length bound for branch i over all admissible triple points.
    pub fn branch_length_bound_uniform(&self, i: usize) -> f64 {
        let (sa, sb) = Side::incident(i);
        let d = self.side_length(sa).max(self.side_length(sb));
        let a = self.angles[i];
        let half_pi = std::f64::consts::FRAC_PI_2;
        let ct = if a <= half_pi {
            (half_pi - 0.5 * a).tan()
        } else {
            (std::f64::consts::PI - a).tan().abs()
        };
        d * (1.0 + 2.0 * ct)
    }

    /// Sharp per-branch length bound at a given triple point:
    /// |alpha_i - p| * (1 + 2*min(|c-|, |c+|)) where c-, c+ are the slopes of the
    /// two inward side normals in the frame aligned with the chord alpha_i -> p.
    pub fn branch_length_bound_at(&self, i: usize, p: Point) -> f64 {
        let v = self.vertex(i);
        let len = v.dist(p);
        if len == 0.0 {
            return 0.0;
        }
        let u = (p - v) * (1.0 / len);
        let w = u.rot90();
        let (sa, sb) = Side::incident(i);
        let slope = |n: Point| {
            let den = n.dot(u);
            if den.abs() < 1e-300 {
                f64::INFINITY
            } else {
                (n.dot(w) / den).abs()
            }
        };
        let ca = slope(self.side_frame(sa).normal);
        let cb = slope(self.side_frame(sb).normal);
        len * (1.0 + 2.0 * ca.min(cb))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn equilateral() -> TargetTriangle {
        TargetTriangle::new([
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 3f64.sqrt() / 2.0),
        ])
        .unwrap()
    }

    #[test]
    fn frames_are_orthonormal_inward() {
        let t = equilateral();
        for &side in &SIDES {
            let f = t.side_frame(side);
            assert!((f.tangent.norm() - 1.0).abs() < 1e-15);
            assert!((f.normal.norm() - 1.0).abs() < 1e-15);
            assert!(f.tangent.dot(f.normal).abs() < 1e-15);
            assert!((f.tangent.cross(f.normal) - 1.0).abs() < 1e-15);
            // inward: the opposite vertex has positive height
            let (_, h) = t.project_to_side(t.vertex(side.opposite()), side);
            assert!(h > 0.0);
        }
    }

    #[test]
    fn project_barycenter_equilateral() {
        let t = equilateral();
        let (s, h) = t.project_to_side(t.barycenter(), Side::S12);
        assert!((s - 0.5).abs() < 1e-15);
        assert!((h - 3f64.sqrt() / 6.0).abs() < 1e-15);
    }

    #[test]
    fn project_endpoints() {
        let t = equilateral();
        let (s, h) = t.project_to_side(t.vertex(0), Side::S12);
        assert_eq!((s, h), (0.0, 0.0));
        let (s, h) = t.project_to_side(t.vertex(2), Side::S12);
        assert!((s - 0.5).abs() < 1e-15);
        assert!((h - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn cw_vertices_rejected() {
        let err = TargetTriangle::new([
            Point::new(0.0, 0.0),
            Point::new(0.5, 3f64.sqrt() / 2.0),
            Point::new(1.0, 0.0),
        ])
        .unwrap_err();
        assert!(matches!(err, GeometryError::NotCounterclockwise));
    }

    #[test]
    fn degenerate_rejected() {
        let err = TargetTriangle::new([
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
        ])
        .unwrap_err();
        assert!(matches!(err, GeometryError::DegenerateTriangle));
    }

    #[test]
    fn side_lengths_match_vertex_distances() {
        let t = TargetTriangle::new([
            Point::new(0.1, -0.2),
            Point::new(2.3, 0.4),
            Point::new(0.7, 1.9),
        ])
        .unwrap();
        for &side in &SIDES {
            let expect = t.vertex(side.i()).dist(t.vertex(side.j()));
            assert!((t.side_length(side) - expect).abs() < 1e-15);
        }
        let sum: f64 = (0..3).map(|i| t.angle(i)).sum();
        assert!((sum - std::f64::consts::PI).abs() < 1e-12);
    }
}
