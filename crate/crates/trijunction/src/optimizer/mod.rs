//! Minimization of G over Lipschitz graph-type connections: a coarse
//! barycentric sweep of the triple point with straight branches, followed by
//! multistart Nelder-Mead refinement over the triple point and transverse
//! branch-knot offsets, every candidate projected back into the admissible set.

mod fermat;
mod nelder_mead;

pub use fermat::{fermat_point, weiszfeld};
pub use nelder_mead::NelderMead;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::functional::{EvalError, GCache, GConfig, GEvaluation};
use crate::geometry::{
    validate_connection, Connection, Point, SourceJunction, TargetTriangle, SIDES,
};

/// Search strategy knobs. `knots_per_branch = 0` means straight branches.
#[derive(Debug, Clone, Copy)]
pub struct OptimizationSpec {
    pub knots_per_branch: usize,
    /// Barycentric lattice resolution of the coarse sweep.
    pub coarse_resolution: usize,
    /// Number of local refinement starts.
    pub multistarts: usize,
    /// Nelder-Mead value tolerance.
    pub local_tol: f64,
    pub local_max_iterations: usize,
    pub seed: u64,
    pub eval: GConfig,
}

impl Default for OptimizationSpec {
    fn default() -> Self {
        OptimizationSpec {
            knots_per_branch: 0,
            coarse_resolution: 21,
            multistarts: 3,
            local_tol: 1e-9,
            local_max_iterations: 160,
            seed: 42,
            eval: GConfig { n_s: 64, n_t: 64, ..Default::default() },
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TraceEntry {
    pub index: usize,
    pub triple_point: Point,
    pub g: f64,
    pub best_g: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub best_connection: Connection,
    pub best_eval: GEvaluation,
    pub trace: Vec<TraceEntry>,
    pub candidates_evaluated: usize,
    pub candidates_skipped: usize,
    pub cache_hits: usize,
    pub termination: String,
}

#[derive(Debug, Clone)]
pub enum OptimizeError {
    AllCandidatesFailed { last: String },
    BadSpec(&'static str),
}

impl std::fmt::Display for OptimizeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OptimizeError::AllCandidatesFailed { last } => {
                write!(f, "every candidate evaluation failed; last error: {last}")
            }
            OptimizeError::BadSpec(msg) => write!(f, "invalid optimization spec: {msg}"),
        }
    }
}

impl std::error::Error for OptimizeError {}

/// Interior margin (relative to the diameter) for the triple-point lattice.
const P_MARGIN: f64 = 1e-6;

/// Initial connection: the Fermat-Torricelli point with straight branches,
/// or a slightly inset surrogate of the wide vertex when some angle reaches
/// 2*pi/3, clamped into the admissible region either way.
pub fn steiner_initial(triangle: &TargetTriangle) -> Connection {
    let raw = match fermat_point(triangle) {
        Some(p) => p,
        None => {
            let wide = triangle.widest_vertex();
            let v = triangle.vertex(wide);
            v + (triangle.barycenter() - v) * 1e-3
        }
    };
    Connection::straight(clamp_to_admissible(raw, triangle))
}

/// Closest point of the admissible triple-point region: the triangle shrunk by
/// the interior margin, intersected with the projection-admissibility
/// halfplanes at each vertex (the T_int constraint when angles are obtuse).
pub fn clamp_to_admissible(p: Point, triangle: &TargetTriangle) -> Point {
    let margin = P_MARGIN * triangle.diameter();
    let mut poly: Vec<Point> = triangle.vertices().to_vec();
    for &side in &SIDES {
        let f = triangle.side_frame(side);
        poly = clip_polygon(&poly, f.normal, f.origin.dot(f.normal) + margin);
    }
    for i in 0..3 {
        let (fwd, bwd) = crate::geometry::Side::incident(i);
        let v = triangle.vertex(i);
        let t_fwd = triangle.side_frame(fwd).tangent;
        // projections onto side (i,j) must have abscissa >= margin (strictly
        // interior, so no branch degenerates to a vertical part):
        poly = clip_polygon(&poly, t_fwd, v.dot(t_fwd) + margin);
        // and onto side (k,i) abscissa <= l - margin:
        let t_bwd = -triangle.side_frame(bwd).tangent;
        poly = clip_polygon(&poly, t_bwd, v.dot(t_bwd) + margin);
    }
    if poly.is_empty() {
        return triangle.barycenter();
    }
    project_to_polygon(p, &poly)
}

fn clip_polygon(poly: &[Point], normal: Point, offset: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let da = a.dot(normal) - offset;
        let db = b.dot(normal) - offset;
        if da >= 0.0 {
            out.push(a);
        }
        if (da > 0.0 && db < 0.0) || (da < 0.0 && db > 0.0) {
            let t = da / (da - db);
            out.push(a + (b - a) * t);
        }
    }
    out
}

fn project_to_polygon(p: Point, poly: &[Point]) -> Point {
    let n = poly.len();
    let inside = (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        (b - a).cross(p - a) >= 0.0
    });
    if inside {
        return p;
    }
    let mut best = poly[0];
    let mut best_d = f64::INFINITY;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let ab = b - a;
        let t = ((p - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
        let q = a + ab * t;
        let d = p.dist(q);
        if d < best_d {
            best_d = d;
            best = q;
        }
    }
    best
}

/// Projects raw parameters into the feasible set: the triple point is clamped
/// into the admissible region, then the branch offsets are shrunk toward the
/// straight chord until the connection validates (the straight connection is
/// always feasible for an admissible triple point).
pub fn project_candidate(
    triangle: &TargetTriangle,
    p_raw: Point,
    offsets: &[f64],
    k: usize,
) -> Connection {
    let p = clamp_to_admissible(p_raw, triangle);
    if k == 0 {
        return Connection::straight(p);
    }
    let build = |scale: f64| {
        let mut knots: [Vec<Point>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for i in 0..3 {
            let v = triangle.vertex(i);
            let chord = p - v;
            let normal = chord.rot90().normalized();
            for m in 1..=k {
                let frac = m as f64 / (k + 1) as f64;
                let o = offsets[i * k + (m - 1)] * scale;
                knots[i].push(v + chord * frac + normal * o);
            }
        }
        Connection::with_knots(p, knots)
    };
    let mut scale = 1.0;
    for _ in 0..60 {
        let conn = build(scale);
        if validate_connection(&conn, triangle).is_valid() {
            return conn;
        }
        scale *= 0.5;
    }
    Connection::straight(p)
}

/// Exhaustive straight-branch sweep of the admissible barycentric lattice.
/// Deterministic; infeasible or failing lattice points are skipped.
pub fn brute_force_p_grid(
    resolution: usize,
    source: &SourceJunction,
    triangle: &TargetTriangle,
    eval_config: &GConfig,
) -> Result<(Point, f64), OptimizeError> {
    if resolution < 5 {
        return Err(OptimizeError::BadSpec("grid resolution must be at least 5"));
    }
    let cache = GCache::new();
    let mut best: Option<(f64, f64, Point)> = None;
    let mut last_err = String::new();
    for i in 1..resolution {
        for j in 1..(resolution - i) {
            let k = resolution - i - j;
            let p = triangle.barycentric_point(
                i as f64 / resolution as f64,
                j as f64 / resolution as f64,
                k as f64 / resolution as f64,
            );
            if clamp_to_admissible(p, triangle).dist(p) > 1e-12 * triangle.diameter() {
                continue; // outside the admissible region
            }
            let conn = Connection::straight(p);
            if !validate_connection(&conn, triangle).is_valid() {
                continue;
            }
            match cache.evaluate(&conn, source, triangle, eval_config) {
                Ok(eval) => {
                    let cand = (eval.g_total, conn.length(triangle), p);
                    if best.as_ref().map_or(true, |b| better(&cand, b)) {
                        best = Some(cand);
                    }
                }
                Err(e) => last_err = e.to_string(),
            }
        }
    }
    match best {
        Some((g, _, p)) => Ok((p, g)),
        None => Err(OptimizeError::AllCandidatesFailed { last: last_err }),
    }
}

/// Total tie-break order: smaller G (beyond 1e-9), then shorter connection,
/// then lexicographically smaller triple point.
fn better(a: &(f64, f64, Point), b: &(f64, f64, Point)) -> bool {
    if a.0 < b.0 - 1e-9 {
        return true;
    }
    if b.0 < a.0 - 1e-9 {
        return false;
    }
    if (a.1 - b.1).abs() > 1e-12 {
        return a.1 < b.1;
    }
    (a.2.x, a.2.y) < (b.2.x, b.2.y)
}

/// Runs the full search. The Steiner initial connection is always in the
/// candidate set, so the result can never be worse than it.
pub fn minimize(
    spec: &OptimizationSpec,
    source: &SourceJunction,
    triangle: &TargetTriangle,
) -> Result<OptimizationResult, OptimizeError> {
    if spec.coarse_resolution < 5 {
        return Err(OptimizeError::BadSpec("coarse resolution must be at least 5"));
    }
    if spec.multistarts == 0 {
        return Err(OptimizeError::BadSpec("need at least one start"));
    }
    let k = spec.knots_per_branch;
    let cache = GCache::new();
    let mut trace: Vec<TraceEntry> = Vec::new();
    let mut skipped = 0usize;
    let mut last_err = String::new();
    let mut best: Option<(f64, f64, Point, Connection, GEvaluation)> = None;

    let consider = |conn: Connection,
                        best: &mut Option<(f64, f64, Point, Connection, GEvaluation)>,
                        trace: &mut Vec<TraceEntry>,
                        skipped: &mut usize,
                        last_err: &mut String|
     -> f64 {
        if !validate_connection(&conn, triangle).is_valid() {
            *skipped += 1;
            return f64::INFINITY;
        }
        match cache.evaluate(&conn, source, triangle, &spec.eval) {
            Ok(eval) => {
                let g = eval.g_total;
                let cand = (g, conn.length(triangle), conn.triple_point);
                let improved = best
                    .as_ref()
                    .map_or(true, |b| better(&cand, &(b.0, b.1, b.2)));
                if improved {
                    *best = Some((cand.0, cand.1, cand.2, conn, eval));
                }
                let best_g = best.as_ref().map(|b| b.0).unwrap();
                trace.push(TraceEntry {
                    index: trace.len(),
                    triple_point: cand.2,
                    g,
                    best_g,
                });
                g
            }
            Err(e) => {
                *skipped += 1;
                *last_err = e.to_string();
                f64::INFINITY
            }
        }
    };

    // (a) Steiner initial point
    let steiner = steiner_initial(triangle);
    consider(steiner.clone(), &mut best, &mut trace, &mut skipped, &mut last_err);

    // (b) coarse sweep over the admissible lattice, straight branches
    let res = spec.coarse_resolution;
    let mut coarse: Vec<(f64, Point)> = Vec::new();
    for i in 1..res {
        for j in 1..(res - i) {
            let kk = res - i - j;
            let p = triangle.barycentric_point(
                i as f64 / res as f64,
                j as f64 / res as f64,
                kk as f64 / res as f64,
            );
            if clamp_to_admissible(p, triangle).dist(p) > 1e-12 * triangle.diameter() {
                continue;
            }
            let g = consider(
                Connection::straight(p),
                &mut best,
                &mut trace,
                &mut skipped,
                &mut last_err,
            );
            if g.is_finite() {
                coarse.push((g, p));
            }
        }
    }

    // (c) local refinement of the triple point (straight branches) from the
    // best coarse points plus jittered copies
    coarse.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let diam = triangle.diameter();
    let mut starts: Vec<Point> = Vec::new();
    starts.push(steiner.triple_point);
    for (_, p) in coarse.iter().take(spec.multistarts) {
        starts.push(*p);
    }
    for s in starts.clone() {
        if starts.len() >= spec.multistarts + 1 {
            break;
        }
        let jitter = Point::new(
            (rng.gen::<f64>() - 0.5) * 0.1 * diam,
            (rng.gen::<f64>() - 0.5) * 0.1 * diam,
        );
        starts.push(s + jitter);
    }

    let nm = NelderMead {
        max_iterations: spec.local_max_iterations,
        f_tol: spec.local_tol,
        x_tol: 1e-10 * diam,
    };
    let coarse_step = diam / res as f64;
    for &start in &starts {
        nm.minimize(&[start.x, start.y], &[coarse_step, coarse_step], |x| {
            let conn = project_candidate(triangle, Point::new(x[0], x[1]), &[], 0);
            consider(conn, &mut best, &mut trace, &mut skipped, &mut last_err)
        });
    }

    // (d) joint refinement over the triple point and branch offsets
    if k > 0 {
        let p0 = best.as_ref().map(|b| b.2).unwrap_or(steiner.triple_point);
        let dim = 2 + 3 * k;
        let mut starts: Vec<Vec<f64>> = vec![{
            let mut x = vec![0.0; dim];
            x[0] = p0.x;
            x[1] = p0.y;
            x
        }];
        for _ in 1..spec.multistarts {
            let mut x = vec![0.0; dim];
            x[0] = p0.x + (rng.gen::<f64>() - 0.5) * 0.05 * diam;
            x[1] = p0.y + (rng.gen::<f64>() - 0.5) * 0.05 * diam;
            for o in x.iter_mut().skip(2) {
                *o = (rng.gen::<f64>() - 0.5) * 0.05 * diam;
            }
            starts.push(x);
        }
        let mut scale = vec![coarse_step; dim];
        for s in scale.iter_mut().skip(2) {
            *s = 0.05 * diam;
        }
        for start in &starts {
            nm.minimize(start, &scale, |x| {
                let p = Point::new(x[0], x[1]);
                let conn = project_candidate(triangle, p, &x[2..], k);
                consider(conn, &mut best, &mut trace, &mut skipped, &mut last_err)
            });
        }
    }

    match best {
        Some((_, _, _, conn, eval)) => Ok(OptimizationResult {
            best_connection: conn,
            best_eval: eval,
            candidates_evaluated: trace.len(),
            candidates_skipped: skipped,
            cache_hits: cache.hits(),
            trace,
            termination: "completed".to_string(),
        }),
        None => Err(OptimizeError::AllCandidatesFailed { last: last_err }),
    }
}

/// Convenience: evaluate one explicit connection with the spec's solver.
pub fn evaluate_connection(
    spec: &OptimizationSpec,
    conn: &Connection,
    source: &SourceJunction,
    triangle: &TargetTriangle,
) -> Result<GEvaluation, EvalError> {
    crate::functional::evaluate_validated(conn, source, triangle, &spec.eval)
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
    fn steiner_initial_equilateral_is_barycenter() {
        let t = equilateral();
        let conn = steiner_initial(&t);
        assert!(conn.triple_point.dist(t.barycenter()) < 1e-9);
        assert!(conn.interior_knots.iter().all(Vec::is_empty));
    }

    #[test]
    fn steiner_initial_wide_angle_is_admissible() {
        let t = TargetTriangle::new([
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.45, 0.08),
        ])
        .unwrap();
        let conn = steiner_initial(&t);
        assert!(t.projections_admissible(conn.triple_point, 1e-12));
        assert!(validate_connection(&conn, &t).is_valid());
    }

    #[test]
    fn steiner_initial_right_isoceles_in_tint() {
        let t = TargetTriangle::new([
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        let conn = steiner_initial(&t);
        assert!(t.projections_admissible(conn.triple_point, 1e-12));
    }

    #[test]
    fn clamp_respects_tint_for_obtuse() {
        let t = TargetTriangle::new([
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.45, 0.08),
        ])
        .unwrap();
        // a point near a sharp vertex projects outside some closed side
        let q = Point::new(0.02, 0.002);
        let clamped = clamp_to_admissible(q, &t);
        assert!(t.projections_admissible(clamped, 1e-9));
        assert!(t.contains(clamped, 1e-12));
    }

    #[test]
    fn project_candidate_shrinks_to_feasible() {
        let t = equilateral();
        let p = t.barycenter();
        // absurd offsets that destroy graphicality get shrunk back
        let offs = vec![0.9, -0.9, 0.9];
        let conn = project_candidate(&t, p, &offs, 1);
        assert!(validate_connection(&conn, &t).is_valid());
    }
}
