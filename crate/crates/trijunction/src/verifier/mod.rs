//! Desk-scale reproduction of the approximating-sequence area computation for
//! a straight-segment jump: the source disk is partitioned into three bulk
//! regions, three strips straddling the jump segments, and an inner triangle
//! around the junction; the strip contributions are evaluated through the
//! exact stretched-coordinates integrand and the total is checked to approach
//! |D| + G as the strip width goes to zero.

mod diskgeom;

pub use diskgeom::{circumcircle, disk_polygon_area, polygon_area};

use crate::functional::{EvalError, GEvaluation};
use crate::geometry::{Point, Side, SourceJunction, SIDES};
use crate::plateau::SurfaceField;

#[derive(Debug, Clone)]
pub enum VerifierError {
    BadAngles(String),
    /// Some wedge opening is >= pi; the quadrilateral construction is not built.
    Case2NotSupported { wedge_angle: f64 },
    EpsilonTooLarge(String),
    /// The jump endpoints do not lie on a circle of the configured radius.
    InconsistentDisk { expected: f64, actual: f64 },
    GridMismatch { side: Side },
    Eval(String),
}

impl std::fmt::Display for VerifierError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VerifierError::BadAngles(msg) => write!(f, "bad jump angles: {msg}"),
            VerifierError::Case2NotSupported { wedge_angle } => write!(
                f,
                "wedge angle {:.3} rad is >= pi; only the all-angles-below-pi case is supported",
                wedge_angle
            ),
            VerifierError::EpsilonTooLarge(msg) => write!(f, "epsilon too large: {msg}"),
            VerifierError::InconsistentDisk { expected, actual } => write!(
                f,
                "jump endpoints lie on a circle of radius {actual:.12}, configured disk radius is {expected:.12}"
            ),
            VerifierError::GridMismatch { side } => {
                write!(f, "surface field does not match rectangle of side {side}")
            }
            VerifierError::Eval(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for VerifierError {}

impl From<EvalError> for VerifierError {
    fn from(e: EvalError) -> Self {
        VerifierError::Eval(e.to_string())
    }
}

/// One jump-straddling strip in its own frame: `e_y` along the jump segment,
/// `e_x` perpendicular, oriented so the region of vertex i is on the low-x side.
#[derive(Debug, Clone, Copy)]
pub struct StripGeometry {
    pub side: Side,
    pub e_x: Point,
    pub e_y: Point,
    pub x_lo: f64,
    pub x_hi: f64,
    /// eps_ij, the strip width |zeta_i - zeta_j|.
    pub width: f64,
    pub jump_length: f64,
    /// Height excess of the circular cap over the jump length.
    pub c_eps: f64,
    /// Stretch factor r / (r + c_eps - delta).
    pub kappa: f64,
    /// Euclidean area of the strip.
    pub area: f64,
    circle_center_frame: (f64, f64),
}

impl StripGeometry {
    /// Top of the disk above frame abscissa x.
    fn y_max(&self, x: f64, radius: f64) -> f64 {
        let (cx, cy) = self.circle_center_frame;
        let d = radius * radius - (x - cx) * (x - cx);
        cy + d.max(0.0).sqrt()
    }
}

/// The full partition at one strip half-width: bulk regions, strips, and the
/// inner triangle tile the disk exactly.
#[derive(Debug, Clone)]
pub struct EpsilonGeometry {
    pub epsilon: f64,
    pub delta: f64,
    /// Unit directions of the jump segments 12, 23, 31.
    pub directions: [Point; 3],
    pub disk_center: Point,
    pub disk_radius: f64,
    /// Vertices of the inner triangle; vertex i lies in the wedge of region i.
    pub inner_vertices: [Point; 3],
    pub inner_triangle_area: f64,
    pub strips: [StripGeometry; 3],
    pub region_areas: [f64; 3],
    /// | sum of all tile areas - pi r^2 |, should be at rounding level.
    pub partition_defect: f64,
}

impl EpsilonGeometry {
    pub fn strip(&self, side: Side) -> &StripGeometry {
        &self.strips[side.index()]
    }

    pub fn disk_area(&self) -> f64 {
        std::f64::consts::PI * self.disk_radius * self.disk_radius
    }

    /// Smallest interior angle of the inner triangle.
    pub fn inner_min_angle(&self) -> f64 {
        let [a, b, c] = self.inner_vertices;
        let ang = |v: Point, p: Point, q: Point| {
            let u = (p - v).normalized();
            let w = (q - v).normalized();
            u.dot(w).clamp(-1.0, 1.0).acos()
        };
        ang(a, b, c).min(ang(b, c, a)).min(ang(c, a, b))
    }

    /// Bulk-region areas recomputed against a concentric clip circle of radius
    /// `clip_radius >= disk_radius`; enlarging the clip only grows the bulk
    /// regions (strips and inner triangle are unchanged), which is the
    /// region-additivity property of the bookkeeping.
    pub fn region_areas_with_clip_radius(&self, clip_radius: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            let poly = self.region_polygon(i, clip_radius);
            out[i] = disk_polygon_area(self.disk_center, clip_radius, &poly);
        }
        out
    }

    fn region_polygon(&self, i: usize, radius: f64) -> Vec<Point> {
        let (fwd, bwd) = Side::incident(i);
        let u_end = self.directions[fwd.index()];
        let u_start = self.directions[bwd.index()];
        let zeta = self.inner_vertices[i];
        let m = 4.0 * (radius + self.disk_center.norm() + zeta.norm());
        let a0 = u_start.angle();
        let mut a1 = u_end.angle();
        while a1 <= a0 {
            a1 += 2.0 * std::f64::consts::PI;
        }
        let opening = a1 - a0;
        let steps = (opening / 0.7).ceil().max(1.0) as usize;
        let mut poly = vec![zeta];
        for k in 0..=steps {
            let a = a0 + opening * k as f64 / steps as f64;
            poly.push(zeta + Point::new(a.cos(), a.sin()) * m);
        }
        poly
    }
}

/// Builds the partition geometry. `wedge_angles` are the openings of the
/// three regions (E1 between segments 31 and 12, E2 between 12 and 23, E3
/// between 23 and 31), in radians, summing to 2*pi; segment 12 points along
/// the positive y axis. The strip half-width delta equals epsilon.
pub fn build_geometry(
    source: &SourceJunction,
    wedge_angles: [f64; 3],
    epsilon: f64,
) -> Result<EpsilonGeometry, VerifierError> {
    use std::f64::consts::PI;
    for &a in &wedge_angles {
        if !(a > 0.0) || !a.is_finite() {
            return Err(VerifierError::BadAngles(format!("wedge angle {a} must be positive")));
        }
        if a >= PI {
            return Err(VerifierError::Case2NotSupported { wedge_angle: a });
        }
    }
    let sum: f64 = wedge_angles.iter().sum();
    if (sum - 2.0 * PI).abs() > 1e-9 {
        return Err(VerifierError::BadAngles(format!(
            "wedge angles sum to {sum:.12}, expected 2*pi"
        )));
    }
    if !(epsilon > 0.0) {
        return Err(VerifierError::BadAngles("epsilon must be positive".to_string()));
    }
    let delta = epsilon;

    let th12 = PI / 2.0;
    let th23 = th12 + wedge_angles[1];
    let th31 = th23 + wedge_angles[2];
    let directions = [
        Point::new(th12.cos(), th12.sin()),
        Point::new(th23.cos(), th23.sin()),
        Point::new(th31.cos(), th31.sin()),
    ];

    let endpoints = [
        directions[0] * source.length(Side::S12),
        directions[1] * source.length(Side::S23),
        directions[2] * source.length(Side::S31),
    ];
    let (disk_center, actual_radius) = circumcircle(endpoints[0], endpoints[1], endpoints[2])
        .ok_or_else(|| VerifierError::BadAngles("jump endpoints are collinear".to_string()))?;
    let expected = source.disk_radius();
    if (actual_radius - expected).abs() > 1e-9 * expected {
        return Err(VerifierError::InconsistentDisk { expected, actual: actual_radius });
    }
    let radius = actual_radius;
    if disk_center.norm() >= radius {
        return Err(VerifierError::BadAngles(
            "the triple junction is not inside the disk".to_string(),
        ));
    }

    if delta >= 0.5 * source.lengths().iter().cloned().fold(f64::INFINITY, f64::min) {
        return Err(VerifierError::EpsilonTooLarge(format!(
            "delta {delta} reaches half the shortest jump"
        )));
    }

    // inner triangle: vertex i is the intersection of the two lines
    // perpendicular to the segments incident to region i, at distance delta
    let mut inner = [Point::new(0.0, 0.0); 3];
    for i in 0..3 {
        let (fwd, bwd) = Side::incident(i);
        let ua = directions[fwd.index()];
        let ub = directions[bwd.index()];
        let det = ua.x * ub.y - ua.y * ub.x;
        if det.abs() < 1e-14 {
            return Err(VerifierError::BadAngles("adjacent segments are parallel".to_string()));
        }
        inner[i] = Point::new(delta * (ub.y - ua.y) / det, delta * (ua.x - ub.x) / det);
    }
    for z in inner {
        if z.dist(disk_center) >= radius {
            return Err(VerifierError::EpsilonTooLarge(
                "inner triangle reaches the disk boundary".to_string(),
            ));
        }
    }
    let mut tri = inner.to_vec();
    if polygon_area(&tri) < 0.0 {
        tri.reverse();
    }
    let inner_triangle_area = polygon_area(&tri);

    // strips
    let mut strips = Vec::with_capacity(3);
    for &side in &SIDES {
        let i = side.i();
        let j = side.j();
        let u = directions[side.index()];
        let mut e_x = u.rot90();
        let mut x_i = inner[i].dot(e_x);
        let mut x_j = inner[j].dot(e_x);
        if x_i > x_j {
            e_x = -e_x;
            x_i = -x_i;
            x_j = -x_j;
        }
        if !(x_i < 0.0 && x_j > 0.0) {
            return Err(VerifierError::EpsilonTooLarge(format!(
                "strip {side} does not straddle its segment"
            )));
        }
        let r_ij = source.length(side);
        let cx = disk_center.dot(e_x);
        let cy = disk_center.dot(u);
        let y_max = |x: f64| {
            let d: f64 = radius * radius - (x - cx) * (x - cx);
            cy + d.max(0.0).sqrt()
        };
        if y_max(x_i).min(y_max(x_j)) <= delta {
            return Err(VerifierError::EpsilonTooLarge(format!(
                "strip {side} has no height at its edge"
            )));
        }
        let x_star = cx.clamp(x_i, x_j);
        let max_y = y_max(x_i).max(y_max(x_j)).max(y_max(x_star));
        let c_eps = (max_y - r_ij).max(0.0);
        let kappa = r_ij / (r_ij + c_eps - delta);

        // exact Euclidean strip area: the capped rectangle clipped by the disk
        let y_far = max_y + radius;
        let corners = [
            e_x * x_i + u * delta,
            e_x * x_j + u * delta,
            e_x * x_j + u * y_far,
            e_x * x_i + u * y_far,
        ];
        let mut poly = corners.to_vec();
        if polygon_area(&poly) < 0.0 {
            poly.reverse();
        }
        let area = disk_polygon_area(disk_center, radius, &poly);

        strips.push(StripGeometry {
            side,
            e_x,
            e_y: u,
            x_lo: x_i,
            x_hi: x_j,
            width: x_j - x_i,
            jump_length: r_ij,
            c_eps,
            kappa,
            area,
            circle_center_frame: (cx, cy),
        });
    }
    let strips: [StripGeometry; 3] = strips.try_into().unwrap();

    let geometry_wip = EpsilonGeometry {
        epsilon,
        delta,
        directions,
        disk_center,
        disk_radius: radius,
        inner_vertices: inner,
        inner_triangle_area,
        strips,
        region_areas: [0.0; 3],
        partition_defect: f64::NAN,
    };
    let region_areas = geometry_wip.region_areas_with_clip_radius(radius);
    let mut geometry = geometry_wip;
    geometry.region_areas = region_areas;
    let total: f64 = region_areas.iter().sum::<f64>()
        + geometry.strips.iter().map(|s| s.area).sum::<f64>()
        + geometry.inner_triangle_area;
    geometry.partition_defect = (total - geometry.disk_area()).abs();
    Ok(geometry)
}

/// Graph area of the stretched map over one strip, evaluated by the exact
/// transformed integrand on the solver grid:
/// (1/kappa) * integral over R \ P_eps of
/// sqrt(1 + p^2 + q^2 kappa^2 (1 + w^2) + w^2), w = strip width / rectangle width,
/// where P_eps is the part of the rectangle mapped beyond the circular cap.
pub fn strip_area(
    geom: &EpsilonGeometry,
    side: Side,
    field: &SurfaceField,
) -> Result<f64, VerifierError> {
    let strip = geom.strip(side);
    if (field.height - strip.jump_length).abs() > 1e-12 * strip.jump_length.max(1.0) {
        return Err(VerifierError::GridMismatch { side });
    }
    let ell = field.width;
    let aspect_sq = (strip.width / ell) * (strip.width / ell);
    let radius = geom.disk_radius;
    let x_of_s = move |s: f64| strip.x_lo + (strip.width / ell) * s;
    let kappa = strip.kappa;
    let delta = geom.delta;
    let strip_copy = *strip;
    let cap = move |s: f64| kappa * (strip_copy.y_max(x_of_s(s), radius) - delta);
    Ok(strip_area_transformed(field, kappa, aspect_sq, cap))
}

/// The raw transformed quadrature: with kappa = 1, aspect 0, and a cap above
/// the rectangle this is exactly the discrete area of the field.
pub fn strip_area_transformed(
    field: &SurfaceField,
    kappa: f64,
    aspect_sq: f64,
    t_cap: impl Fn(f64) -> f64,
) -> f64 {
    let l = field.lattice();
    let (h_s, h_t) = (l.h_s, l.h_t);
    let kk = kappa * kappa * (1.0 + aspect_sq);
    let (nodes, weights) = crate::geometry::gauss_nodes_16();
    let mut acc = 0.0;
    for b in 0..l.n_t {
        let t_lo = b as f64 * h_t;
        let t_hi = t_lo + h_t;
        for a in 0..l.n_s {
            let (p, q) = field.cell_gradient(a, b);
            let integrand = (1.0 + p * p + q * q * kk + aspect_sq).sqrt();
            let s_lo = a as f64 * h_s;
            let s_hi = s_lo + h_s;
            // the cap is concave in s, so the column minimum is at an endpoint
            let cap_lo = t_cap(s_lo).min(t_cap(s_hi));
            let covered = if cap_lo >= t_hi {
                h_s * h_t
            } else {
                // partial column: Gauss quadrature of the covered height
                let mid = 0.5 * (s_lo + s_hi);
                let half = 0.5 * h_s;
                let mut col = 0.0;
                for k in 0..nodes.len() {
                    for sgn in [-1.0, 1.0] {
                        let s = mid + sgn * half * nodes[k];
                        let h = (t_cap(s) - t_lo).clamp(0.0, h_t);
                        col += half * weights[k] * h;
                    }
                }
                col
            };
            acc += integrand * covered;
        }
    }
    acc / kappa
}

/// Total area of the approximating map at this epsilon (bulk regions flat,
/// strips through the transformed integrand, inner triangle floored by its
/// Euclidean area) plus the Lipschitz-foliation bound on the inner-triangle
/// excess.
pub fn total_area(
    geom: &EpsilonGeometry,
    eval: &GEvaluation,
    fields: &[SurfaceField; 3],
) -> Result<(f64, f64), VerifierError> {
    let mut value: f64 = geom.region_areas.iter().sum::<f64>() + geom.inner_triangle_area;
    for &side in &SIDES {
        value += strip_area(geom, side, &fields[side.index()])?;
    }
    let sin_min = geom.inner_min_angle().sin().max(1e-9);
    let mut lambda: f64 = 0.0;
    for &side in &SIDES {
        let phi = eval.side_function(side);
        let lip = phi.lipschitz_constant();
        let stretch = (1.0 + lip * lip).sqrt() * phi.domain_length() / geom.strip(side).width;
        lambda = lambda.max(stretch / sin_min);
    }
    let bound = geom.inner_triangle_area * ((1.0 + lambda * lambda).sqrt() - 1.0);
    Ok((value, bound))
}

#[derive(Debug, Clone, Copy)]
pub struct LadderPoint {
    pub epsilon: f64,
    pub value: f64,
    pub error: f64,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceLadder {
    pub points: Vec<LadderPoint>,
    /// Least-squares slope of ln(error) against ln(epsilon).
    pub slope: f64,
    /// Error/epsilon ratio fitted over the last three points.
    pub fitted_c: f64,
    /// |D| + G, the limit the totals must approach.
    pub target: f64,
}

/// Runs build_geometry + total_area over a ladder of epsilons against one
/// evaluated connection.
pub fn convergence_ladder(
    eval: &GEvaluation,
    fields: &[SurfaceField; 3],
    source: &SourceJunction,
    wedge_angles: [f64; 3],
    epsilons: &[f64],
) -> Result<ConvergenceLadder, VerifierError> {
    if epsilons.is_empty() {
        return Err(VerifierError::BadAngles("need at least one epsilon".to_string()));
    }
    let target = source.disk_area() + eval.g_total;
    let mut points = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let geom = build_geometry(source, wedge_angles, eps)?;
        let (value, bound) = total_area(&geom, eval, fields)?;
        points.push(LadderPoint { epsilon: eps, value, error: (value - target).abs(), bound });
    }
    let slope = loglog_slope(&points);
    let tail = &points[points.len().saturating_sub(3)..];
    let num: f64 = tail.iter().map(|p| p.error * p.epsilon).sum();
    let den: f64 = tail.iter().map(|p| p.epsilon * p.epsilon).sum();
    Ok(ConvergenceLadder { points, slope, fitted_c: num / den, target })
}

fn loglog_slope(points: &[LadderPoint]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return f64::NAN;
    }
    let xs: Vec<f64> = points.iter().map(|p| p.epsilon.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.error.max(1e-300).ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..points.len() {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn symmetric_source() -> SourceJunction {
        SourceJunction::new([1.0, 1.0, 1.0], 1.0).unwrap()
    }

    fn symmetric_angles() -> [f64; 3] {
        [2.0 * PI / 3.0; 3]
    }

    #[test]
    fn symmetric_geometry_is_equilateral_and_partitions() {
        let g = build_geometry(&symmetric_source(), symmetric_angles(), 0.05).unwrap();
        assert!(g.disk_center.norm() < 1e-12);
        let sides: Vec<f64> = (0..3)
            .map(|i| g.inner_vertices[i].dist(g.inner_vertices[(i + 1) % 3]))
            .collect();
        assert!((sides[0] - sides[1]).abs() < 1e-12 && (sides[1] - sides[2]).abs() < 1e-12);
        assert!(g.partition_defect < 1e-12, "partition defect {}", g.partition_defect);
        // |T^eps| = O(eps^2): quadruple when eps doubles
        let g2 = build_geometry(&symmetric_source(), symmetric_angles(), 0.025).unwrap();
        let ratio = g.inner_triangle_area / g2.inner_triangle_area;
        assert!((ratio - 4.0).abs() < 1e-9, "triangle area ratio {ratio}");
    }

    #[test]
    fn asymmetric_angles_partition_and_strip_disjointness() {
        let angles = [100f64.to_radians(), 120f64.to_radians(), 140f64.to_radians()];
        // endpoints at unit distance lie on a circle through all three; compute
        // its radius first, then build the source consistently
        let lengths = [1.0, 1.0, 1.0];
        let th12: f64 = PI / 2.0;
        let th23 = th12 + angles[1];
        let th31 = th23 + angles[2];
        let pts = [
            Point::new(th12.cos(), th12.sin()) * lengths[0],
            Point::new(th23.cos(), th23.sin()) * lengths[1],
            Point::new(th31.cos(), th31.sin()) * lengths[2],
        ];
        let (_, r) = circumcircle(pts[0], pts[1], pts[2]).unwrap();
        let source = SourceJunction::new(lengths, r).unwrap();
        let g = build_geometry(&source, angles, 0.04).unwrap();
        assert!(g.partition_defect < 1e-11, "partition defect {}", g.partition_defect);

        // Monte-Carlo disjointness of the strips
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut hits = 0usize;
        for _ in 0..1_000_000 {
            let p = Point::new(
                g.disk_center.x + (2.0 * next() - 1.0) * g.disk_radius,
                g.disk_center.y + (2.0 * next() - 1.0) * g.disk_radius,
            );
            if p.dist(g.disk_center) >= g.disk_radius {
                continue;
            }
            let mut inside = 0;
            for s in &g.strips {
                let x = p.dot(s.e_x);
                let y = p.dot(s.e_y);
                if x > s.x_lo && x < s.x_hi && y >= g.delta {
                    inside += 1;
                }
            }
            assert!(inside <= 1, "strips overlap at ({}, {})", p.x, p.y);
            hits += inside;
        }
        assert!(hits > 0);
    }

    #[test]
    fn wide_wedge_rejected() {
        let angles = [190f64.to_radians(), 90f64.to_radians(), 80f64.to_radians()];
        let err = build_geometry(&symmetric_source(), angles, 0.05).unwrap_err();
        assert!(matches!(err, VerifierError::Case2NotSupported { .. }));
    }

    #[test]
    fn inconsistent_disk_rejected() {
        let source = SourceJunction::new([1.0, 1.0, 1.0], 1.5).unwrap();
        let err = build_geometry(&source, symmetric_angles(), 0.05).unwrap_err();
        assert!(matches!(err, VerifierError::InconsistentDisk { .. }));
    }

    #[test]
    fn epsilon_too_large_rejected() {
        let err = build_geometry(&symmetric_source(), symmetric_angles(), 0.6).unwrap_err();
        assert!(matches!(err, VerifierError::EpsilonTooLarge(_)));
    }

    #[test]
    fn region_additivity_under_concentric_clip() {
        let g = build_geometry(&symmetric_source(), symmetric_angles(), 0.05).unwrap();
        let bigger = g.region_areas_with_clip_radius(2.0);
        let grown: f64 = bigger.iter().sum::<f64>() - g.region_areas.iter().sum::<f64>();
        // the annulus between radii 1 and 2 minus the strip slabs' share of it;
        // for the symmetric case each slab meets the annulus in two pieces of
        // equal area, computable from the chord geometry; instead of closed
        // forms, check monotonicity and that the clip at the true radius is a
        // fixed point
        let same = g.region_areas_with_clip_radius(g.disk_radius);
        for i in 0..3 {
            assert!((same[i] - g.region_areas[i]).abs() < 1e-12);
            assert!(bigger[i] > g.region_areas[i]);
        }
        assert!(grown > 0.0 && grown < 3.0 * PI);
    }
}
