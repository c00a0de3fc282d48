use super::point::Point;
use super::side_function::SideFunction;
use super::triangle::{Side, TargetTriangle, SIDES};
use super::GeometryError;

/// Tolerance factor for graphicality checks, relative to the triangle diameter.
pub const GRAPHICALITY_TOL: f64 = 1e-9;

/// Jump-curve lengths and disk radius on the source side.
#[derive(Debug, Clone, Copy)]
pub struct SourceJunction {
    lengths: [f64; 3],
    disk_radius: f64,
}

impl SourceJunction {
    /// `lengths` are (r_12, r_23, r_31).
    pub fn new(lengths: [f64; 3], disk_radius: f64) -> Result<Self, GeometryError> {
        if lengths.iter().any(|&r| !(r > 0.0)) || !(disk_radius > 0.0) {
            return Err(GeometryError::BadSource("lengths and disk radius must be positive"));
        }
        if lengths.iter().any(|&r| r > 2.0 * disk_radius + 1e-12) {
            return Err(GeometryError::BadSource("a jump length exceeds the disk diameter"));
        }
        Ok(SourceJunction { lengths, disk_radius })
    }

    pub fn length(&self, side: Side) -> f64 {
        self.lengths[side.index()]
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }

    pub fn disk_radius(&self) -> f64 {
        self.disk_radius
    }

    /// |D| = pi * radius^2.
    pub fn disk_area(&self) -> f64 {
        std::f64::consts::PI * self.disk_radius * self.disk_radius
    }
}

/// A graph-type connection: target triple point plus three branch polylines
/// from the vertices to it. Knot lists exclude the endpoints alpha_i and p.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub triple_point: Point,
    pub interior_knots: [Vec<Point>; 3],
}

impl Connection {
    pub fn straight(p: Point) -> Self {
        Connection { triple_point: p, interior_knots: [Vec::new(), Vec::new(), Vec::new()] }
    }

    pub fn with_knots(p: Point, knots: [Vec<Point>; 3]) -> Self {
        Connection { triple_point: p, interior_knots: knots }
    }

    /// Full knot list of branch i: alpha_i, interior knots, p.
    pub fn branch(&self, triangle: &TargetTriangle, i: usize) -> Vec<Point> {
        let mut pts = Vec::with_capacity(self.interior_knots[i].len() + 2);
        pts.push(triangle.vertex(i));
        pts.extend_from_slice(&self.interior_knots[i]);
        pts.push(self.triple_point);
        pts
    }

    /// Sum of the three branch polyline lengths.
    pub fn length(&self, triangle: &TargetTriangle) -> f64 {
        (0..3).map(|i| polyline_length(&self.branch(triangle, i))).sum()
    }

    pub fn branch_length(&self, triangle: &TargetTriangle, i: usize) -> f64 {
        polyline_length(&self.branch(triangle, i))
    }

    /// The abscissa of the triple-point projection onto `side`, w_ij.
    pub fn apex_abscissa(&self, triangle: &TargetTriangle, side: Side) -> f64 {
        triangle.project_to_side(self.triple_point, side).0
    }
}

fn polyline_length(pts: &[Point]) -> f64 {
    pts.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Per-side validation outcome.
#[derive(Debug, Clone)]
pub struct SideCheck {
    pub side: Side,
    /// Concatenated graph single-valued over the side (strictly increasing abscissae).
    pub single_valued: bool,
    /// Both branches respect the per-piece slope bounds over this side.
    pub slopes_ok: bool,
}

/// Result of validate_connection; carries failures instead of erroring.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub sides: [SideCheck; 3],
    pub knots_inside_triangle: bool,
    pub triple_point_admissible: bool,
    pub triple_point_is_vertex: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.knots_inside_triangle
            && self.triple_point_admissible
            && !self.triple_point_is_vertex
            && self.sides.iter().all(|c| c.single_valued && c.slopes_ok)
    }

    pub fn violated_sides(&self) -> Vec<Side> {
        self.sides
            .iter()
            .filter(|c| !(c.single_valued && c.slopes_ok))
            .map(|c| c.side)
            .collect()
    }

    pub fn summary(&self) -> String {
        if self.is_valid() {
            return "valid".to_string();
        }
        let mut parts = Vec::new();
        if self.triple_point_is_vertex {
            parts.push("triple point coincides with a vertex".to_string());
        }
        if !self.triple_point_admissible {
            parts.push("triple point projects outside a closed side (T_int violated)".to_string());
        }
        if !self.knots_inside_triangle {
            parts.push("a branch knot lies outside the triangle".to_string());
        }
        for c in &self.sides {
            if !c.single_valued {
                parts.push(format!("graph over side {} is multi-valued", c.side));
            } else if !c.slopes_ok {
                parts.push(format!("slope bound violated over side {}", c.side));
            }
        }
        parts.join("; ")
    }
}

/// Checks Definition-of-connection graphicality: per side, the concatenation
/// Gamma_i u Gamma_j projects to strictly increasing abscissae, and each branch
/// respects the slope bound induced by its *other* incident side. For obtuse
/// triangles the triple point must project onto all three closed sides.
pub fn validate_connection(conn: &Connection, triangle: &TargetTriangle) -> ValidationReport {
    let diam = triangle.diameter();
    let tol = GRAPHICALITY_TOL * diam;
    let p = conn.triple_point;

    let triple_point_is_vertex = (0..3).any(|i| triangle.vertex(i).dist(p) <= 1e-12 * diam.max(1.0));
    let triple_point_admissible = triangle.contains(p, tol) && triangle.projections_admissible(p, tol);
    let knots_inside_triangle = (0..3).all(|i| {
        conn.interior_knots[i].iter().all(|&q| triangle.contains(q, tol))
    });

    let sides = SIDES.map(|side| {
        let i = side.i();
        let j = side.j();
        let frame = triangle.side_frame(side);

        // branch i traversed alpha_i -> p must increase the abscissa;
        // branch j traversed alpha_j -> p must decrease it (it covers [w, l]
        // from the right end). Equivalently the concatenated knot abscissae
        // are strictly increasing.
        let bi = conn.branch(triangle, i);
        let bj = conn.branch(triangle, j);
        let mut abscissae: Vec<f64> = bi.iter().map(|&q| frame.coords(q).0).collect();
        let mut right: Vec<f64> = bj.iter().map(|&q| frame.coords(q).0).collect();
        right.reverse();
        abscissae.extend_from_slice(&right[1..]);
        let single_valued = abscissae.windows(2).all(|w| w[1] - w[0] > -tol)
            && abscissae.windows(2).filter(|w| w[1] - w[0] <= tol).count() == 0;

        let slopes_ok = branch_slopes_ok(conn, triangle, i, tol)
            && branch_slopes_ok(conn, triangle, j, tol);
        SideCheck { side, single_valued, slopes_ok }
    });

    ValidationReport {
        sides,
        knots_inside_triangle,
        triple_point_admissible,
        triple_point_is_vertex,
    }
}

/// Branch i is a graph over both incident sides iff every linear piece,
/// traversed from alpha_i toward p, strictly advances along side (i,j) and
/// strictly recedes along side (k,i). In side-(i,j) frame coordinates the
/// second condition is the slope bound phi' >= beta/alpha of the inward
/// normal n_ki = (alpha, beta).
fn branch_slopes_ok(conn: &Connection, triangle: &TargetTriangle, i: usize, tol: f64) -> bool {
    let (fwd, bwd) = Side::incident(i);
    let t_fwd = triangle.side_frame(fwd).tangent;
    let t_bwd = triangle.side_frame(bwd).tangent;
    let pts = conn.branch(triangle, i);
    pts.windows(2).all(|w| {
        let v = w[1] - w[0];
        let n = v.norm();
        if n <= 1e-15 * triangle.diameter() {
            return true; // degenerate piece carries no graph mass
        }
        v.dot(t_fwd) > -tol * n && v.dot(t_bwd) < tol * n
    })
}

/// The inward normal of the *other* incident side of vertex i, expressed in
/// the frame of side `side` as (alpha, beta); the graphicality slope bound for
/// branch i over `side` is phi' >= beta/alpha.
pub fn slope_bound(triangle: &TargetTriangle, side: Side) -> f64 {
    let i = side.i();
    let (_, other) = Side::incident(i);
    let n = triangle.side_frame(other).normal;
    let f = triangle.side_frame(side);
    n.dot(f.normal) / n.dot(f.tangent)
}

/// Builds phi_ij from the concatenation Gamma_i u Gamma_j projected onto the
/// side frame. Fails with NotAGraph if the projected abscissae are not
/// strictly increasing beyond tolerance.
pub fn build_side_function(
    conn: &Connection,
    triangle: &TargetTriangle,
    side: Side,
) -> Result<SideFunction, GeometryError> {
    let frame = triangle.side_frame(side);
    let diam = triangle.diameter();
    let tol = GRAPHICALITY_TOL * diam;
    let i = side.i();
    let j = side.j();

    let bi = conn.branch(triangle, i);
    let bj = conn.branch(triangle, j);
    let mut pts: Vec<(f64, f64)> = bi.iter().map(|&q| frame.coords(q)).collect();
    let mut right: Vec<(f64, f64)> = bj.iter().map(|&q| frame.coords(q)).collect();
    right.reverse();
    pts.extend_from_slice(&right[1..]);

    let mut knots = Vec::with_capacity(pts.len());
    let mut values = Vec::with_capacity(pts.len());
    for &(s, h) in &pts {
        if let Some(&last) = knots.last() {
            if s - last <= tol {
                let last_v: f64 = *values.last().unwrap();
                if s - last > -tol && (h - last_v).abs() <= tol {
                    continue; // duplicate knot
                }
                return Err(GeometryError::NotAGraph { side });
            }
        }
        knots.push(s);
        values.push(h.max(0.0));
    }
    // clamp the endpoints to the exact side ends
    let n = knots.len();
    knots[0] = 0.0;
    knots[n - 1] = frame.length;
    values[0] = 0.0;
    values[n - 1] = 0.0;
    let apex = frame.coords(conn.triple_point).0;
    SideFunction::new(side, knots, values, apex)
}

/// Builds all three side functions, labelling the offending side on failure.
pub fn side_functions(
    conn: &Connection,
    triangle: &TargetTriangle,
) -> Result<[SideFunction; 3], GeometryError> {
    Ok([
        build_side_function(conn, triangle, Side::S12)?,
        build_side_function(conn, triangle, Side::S23)?,
        build_side_function(conn, triangle, Side::S31)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equilateral() -> TargetTriangle {
        TargetTriangle::new([
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 3f64.sqrt() / 2.0),
        ])
        .unwrap()
    }

    #[test]
    fn steiner_tent_on_equilateral() {
        let t = equilateral();
        let conn = Connection::straight(t.barycenter());
        let phi = build_side_function(&conn, &t, Side::S12).unwrap();
        assert_eq!(phi.knot_count(), 3);
        assert!((phi.apex - 0.5).abs() < 1e-12);
        assert!((phi.apex_value() - 3f64.sqrt() / 6.0).abs() < 1e-12);
        // slopes +-sqrt(3)/3
        let s = (phi.values()[1] - phi.values()[0]) / (phi.knots()[1] - phi.knots()[0]);
        assert!((s - 3f64.sqrt() / 3.0).abs() < 1e-12);
        assert!(validate_connection(&conn, &t).is_valid());
    }

    #[test]
    fn degenerate_apex_on_side_gives_zero_tent() {
        let t = equilateral();
        let conn = Connection::straight(Point::new(0.5, 0.0));
        let phi = build_side_function(&conn, &t, Side::S12).unwrap();
        assert!(phi.values().iter().all(|&v| v.abs() < 1e-12));
        assert!(validate_connection(&conn, &t).is_valid());
    }

    #[test]
    fn three_knot_branch_projects_consistently() {
        let t = equilateral();
        let p = t.barycenter();
        let mid = (t.vertex(0) + p) * 0.5 + Point::new(0.02, 0.0);
        let conn = Connection::with_knots(p, [vec![mid], vec![], vec![]]);
        let phi = build_side_function(&conn, &t, Side::S12).unwrap();
        assert_eq!(phi.knot_count(), 4);
        // oracle: project each knot independently
        let frame = t.side_frame(Side::S12);
        let (s_mid, h_mid) = frame.coords(mid);
        assert!((phi.eval(s_mid) - h_mid).abs() < 1e-12);
    }

    #[test]
    fn vertex_triple_point_rejected() {
        let t = equilateral();
        let conn = Connection::straight(t.vertex(0));
        let report = validate_connection(&conn, &t);
        assert!(report.triple_point_is_vertex);
        assert!(!report.is_valid());
    }

    #[test]
    fn double_valued_branch_reported() {
        let t = equilateral();
        let p = t.barycenter();
        // a middle knot swung past the triple point's side-31 projection,
        // making the graph over side 31 double back
        let frame31 = t.side_frame(Side::S31);
        let (s_p, _) = frame31.coords(p);
        let bad = frame31.point_at(s_p - 0.2, 0.05);
        let conn = Connection::with_knots(p, [vec![bad], vec![], vec![]]);
        let report = validate_connection(&conn, &t);
        assert!(!report.is_valid());
        assert!(report.violated_sides().contains(&Side::S31));
        assert!(build_side_function(&conn, &t, Side::S31).is_err());
    }

    #[test]
    fn connection_length_steiner() {
        let t = equilateral();
        let conn = Connection::straight(t.barycenter());
        assert!((conn.length(&t) - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn connection_length_apex_on_side() {
        let t = equilateral();
        let p = Point::new(0.5, 0.0);
        let conn = Connection::straight(p);
        let expect = 0.5 + 0.5 + t.vertex(2).dist(p);
        assert!((conn.length(&t) - expect).abs() < 1e-12);
    }

    #[test]
    fn slope_bound_equilateral() {
        let t = equilateral();
        // over side 12 the bound for branch 1 comes from n_31 = (sqrt3/2, -1/2)
        let b = slope_bound(&t, Side::S12);
        assert!((b - (-1.0 / 3f64.sqrt())).abs() < 1e-12);
    }
}
