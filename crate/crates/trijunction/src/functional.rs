//! The coupled functional: three Dirichlet-Neumann solves on the rectangles
//! R_ij = [0, l_ij] x [0, r_ij], with boundary data read off the connection,
//! summed into G = A_12 + A_23 + A_31.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Mutex;

use crate::geometry::{
    side_functions, validate_connection, Connection, GeometryError, Side, SideFunction,
    SourceJunction, TargetTriangle, SIDES,
};
use crate::plateau::{
    solve_nested, solve_with_init, PlateauProblem, SolveError, SolverConfig, SurfaceField,
};

/// Grid plus Newton parameters for one full G evaluation.
#[derive(Debug, Clone, Copy)]
pub struct GConfig {
    /// Cells along s and t on every rectangle.
    pub n_s: usize,
    pub n_t: usize,
    pub solver: SolverConfig,
    /// Use the coarse-to-fine warm start inside each solve.
    pub nested: bool,
}

impl Default for GConfig {
    fn default() -> Self {
        GConfig { n_s: 128, n_t: 128, solver: SolverConfig::default(), nested: true }
    }
}

#[derive(Debug, Clone)]
pub enum EvalError {
    Geometry(GeometryError),
    Solver { side: Side, error: SolveError },
}

impl std::fmt::Display for EvalError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EvalError::Geometry(e) => write!(f, "{e}"),
            EvalError::Solver { side, error } => write!(f, "side {side}: {error}"),
        }
    }
}

impl std::error::Error for EvalError {}

impl From<GeometryError> for EvalError {
    fn from(e: GeometryError) -> Self {
        EvalError::Geometry(e)
    }
}

/// One evaluation of G: per-side areas and residuals, the total, and the
/// evaluated connection with its side functions.
#[derive(Debug, Clone)]
pub struct GEvaluation {
    pub areas: [f64; 3],
    pub g_total: f64,
    pub residuals: [f64; 3],
    pub grid: (usize, usize),
    pub rectangle_heights: [f64; 3],
    pub connection: Connection,
    pub side_functions: [SideFunction; 3],
}

impl GEvaluation {
    pub fn area(&self, side: Side) -> f64 {
        self.areas[side.index()]
    }

    pub fn side_function(&self, side: Side) -> &SideFunction {
        &self.side_functions[side.index()]
    }
}

/// Evaluates G(conn). The connection must pass validation; each side is
/// solved on R_ij with the connection's phi_ij as Dirichlet data.
pub fn evaluate(
    conn: &Connection,
    source: &SourceJunction,
    triangle: &TargetTriangle,
    config: &GConfig,
) -> Result<GEvaluation, EvalError> {
    evaluate_with_fields(conn, source, triangle, config).map(|(e, _)| e)
}

/// Same as `evaluate` but also returns the three solved fields.
pub fn evaluate_with_fields(
    conn: &Connection,
    source: &SourceJunction,
    triangle: &TargetTriangle,
    config: &GConfig,
) -> Result<(GEvaluation, [SurfaceField; 3]), EvalError> {
    let phis = side_functions(conn, triangle)?;
    let mut areas = [0.0; 3];
    let mut residuals = [0.0; 3];
    let mut heights = [0.0; 3];
    let mut fields = Vec::with_capacity(3);
    for &side in &SIDES {
        let phi = phis[side.index()].clone();
        let r = source.length(side);
        heights[side.index()] = r;
        let problem = PlateauProblem::new(phi, r, config.n_s, config.n_t)
            .map_err(|error| EvalError::Solver { side, error })?;
        let field = if config.nested {
            solve_nested(&problem, &config.solver)
        } else {
            solve_with_init(&problem, &config.solver, None)
        }
        .map_err(|error| EvalError::Solver { side, error })?;
        areas[side.index()] = field.area();
        residuals[side.index()] = field.residual;
        fields.push(field);
    }
    let g_total = areas[0] + areas[1] + areas[2];
    let eval = GEvaluation {
        areas,
        g_total,
        residuals,
        grid: (config.n_s, config.n_t),
        rectangle_heights: heights,
        connection: conn.clone(),
        side_functions: phis,
    };
    let fields: [SurfaceField; 3] = fields.try_into().unwrap();
    Ok((eval, fields))
}

/// Validates, then evaluates; invalid connections are reported as geometry
/// errors carrying the first violated side.
pub fn evaluate_validated(
    conn: &Connection,
    source: &SourceJunction,
    triangle: &TargetTriangle,
    config: &GConfig,
) -> Result<GEvaluation, EvalError> {
    let report = validate_connection(conn, triangle);
    if !report.is_valid() {
        let side = report.violated_sides().first().copied().unwrap_or(Side::S12);
        return Err(EvalError::Geometry(GeometryError::NotAGraph { side }));
    }
    evaluate(conn, source, triangle, config)
}

/// Theorem upper bound |D| + G.
pub fn upper_bound(eval: &GEvaluation, source: &SourceJunction) -> f64 {
    source.disk_area() + eval.g_total
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMismatch;

impl std::fmt::Display for GridMismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "evaluations are on different grids or rectangles")
    }
}

impl std::error::Error for GridMismatch {}

/// Continuity estimate data: per side, lhs = |2A^a - 2A^b| and rhs = the L1
/// distance of the boundary data over the doubled rectangle (bottom and top
/// edges both carry |phi^a - phi^b|; the vertical sides are zero). Returns the
/// worst side's pair, i.e. the side maximizing lhs - rhs.
pub fn continuity_gap(a: &GEvaluation, b: &GEvaluation) -> Result<(f64, f64), GridMismatch> {
    if a.grid != b.grid || a.rectangle_heights != b.rectangle_heights {
        return Err(GridMismatch);
    }
    let mut worst = (0.0, 0.0);
    let mut worst_gap = f64::NEG_INFINITY;
    for &side in &SIDES {
        let i = side.index();
        let lhs = (2.0 * a.areas[i] - 2.0 * b.areas[i]).abs();
        let rhs = 2.0 * a.side_functions[i].l1_distance(&b.side_functions[i]);
        if lhs - rhs > worst_gap {
            worst_gap = lhs - rhs;
            worst = (lhs, rhs);
        }
    }
    Ok(worst)
}

/// Memoizes evaluations on the exact bit patterns of the connection knots,
/// grid, and solver parameters, so repeated candidates are never re-solved.
pub struct GCache {
    map: Mutex<HashMap<u64, GEvaluation>>,
    hits: Mutex<usize>,
}

impl GCache {
    pub fn new() -> Self {
        GCache { map: Mutex::new(HashMap::new()), hits: Mutex::new(0) }
    }

    pub fn hits(&self) -> usize {
        *self.hits.lock().unwrap()
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn evaluate(
        &self,
        conn: &Connection,
        source: &SourceJunction,
        triangle: &TargetTriangle,
        config: &GConfig,
    ) -> Result<GEvaluation, EvalError> {
        let key = cache_key(conn, source, triangle, config);
        if let Some(hit) = self.map.lock().unwrap().get(&key) {
            *self.hits.lock().unwrap() += 1;
            return Ok(hit.clone());
        }
        let eval = evaluate(conn, source, triangle, config)?;
        self.map.lock().unwrap().insert(key, eval.clone());
        Ok(eval)
    }
}

impl Default for GCache {
    fn default() -> Self {
        Self::new()
    }
}

fn cache_key(
    conn: &Connection,
    source: &SourceJunction,
    triangle: &TargetTriangle,
    config: &GConfig,
) -> u64 {
    fn put(h: &mut std::collections::hash_map::DefaultHasher, x: f64) {
        x.to_bits().hash(h);
    }
    let mut h = std::collections::hash_map::DefaultHasher::new();
    put(&mut h, conn.triple_point.x);
    put(&mut h, conn.triple_point.y);
    for knots in &conn.interior_knots {
        knots.len().hash(&mut h);
        for k in knots {
            put(&mut h, k.x);
            put(&mut h, k.y);
        }
    }
    for i in 0..3 {
        let v = triangle.vertex(i);
        put(&mut h, v.x);
        put(&mut h, v.y);
    }
    for r in source.lengths() {
        put(&mut h, r);
    }
    put(&mut h, source.disk_radius());
    config.n_s.hash(&mut h);
    config.n_t.hash(&mut h);
    config.nested.hash(&mut h);
    put(&mut h, config.solver.newton_tol);
    config.solver.max_iterations.hash(&mut h);
    config.solver.continuation_steps.hash(&mut h);
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn equilateral() -> TargetTriangle {
        TargetTriangle::new([
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 3f64.sqrt() / 2.0),
        ])
        .unwrap()
    }

    fn quick_config() -> GConfig {
        GConfig { n_s: 32, n_t: 32, ..Default::default() }
    }

    #[test]
    fn symmetric_steiner_areas_equal() {
        let t = equilateral();
        let source = SourceJunction::new([1.0, 1.0, 1.0], 1.0).unwrap();
        let conn = Connection::straight(t.barycenter());
        let eval = evaluate(&conn, &source, &t, &quick_config()).unwrap();
        assert!((eval.areas[0] - eval.areas[1]).abs() <= 1e-9);
        assert!((eval.areas[1] - eval.areas[2]).abs() <= 1e-9);
        assert_eq!(eval.g_total, eval.areas[0] + eval.areas[1] + eval.areas[2]);
        // sandwich
        let cylinder = eval.side_functions[0].graph_length();
        assert!(eval.areas[0] > 1.0 && eval.areas[0] < cylinder);
    }

    #[test]
    fn apex_on_side_makes_that_side_flat() {
        let t = equilateral();
        let source = SourceJunction::new([1.0, 1.0, 1.0], 1.0).unwrap();
        let conn = Connection::straight(Point::new(0.5, 0.0));
        let eval = evaluate(&conn, &source, &t, &quick_config()).unwrap();
        assert!((eval.areas[0] - 1.0).abs() < 1e-12, "flat side area {}", eval.areas[0]);
    }

    #[test]
    fn upper_bound_adds_disk_area() {
        let t = equilateral();
        let source = SourceJunction::new([1.0, 1.0, 1.0], 1.0).unwrap();
        let conn = Connection::straight(t.barycenter());
        let eval = evaluate(&conn, &source, &t, &quick_config()).unwrap();
        let ub = upper_bound(&eval, &source);
        assert!((ub - (std::f64::consts::PI + eval.g_total)).abs() < 1e-15);
        let big = SourceJunction::new([1.0, 1.0, 1.0], 2.0).unwrap();
        assert!((upper_bound(&eval, &big) - (4.0 * std::f64::consts::PI + eval.g_total)).abs() < 1e-12);
    }

    #[test]
    fn continuity_gap_identical_is_zero_and_local() {
        let t = equilateral();
        let source = SourceJunction::new([1.0, 1.0, 1.0], 1.0).unwrap();
        let conn = Connection::straight(t.barycenter());
        let cfg = quick_config();
        let e1 = evaluate(&conn, &source, &t, &cfg).unwrap();
        let e2 = evaluate(&conn, &source, &t, &cfg).unwrap();
        assert_eq!(continuity_gap(&e1, &e2).unwrap(), (0.0, 0.0));

        // perturbing only branch 3 leaves side 12 untouched
        let p = t.barycenter();
        let mid = (t.vertex(2) + p) * 0.5 + Point::new(0.0, 0.02);
        let conn3 = Connection::with_knots(p, [vec![], vec![], vec![mid]]);
        let e3 = evaluate(&conn3, &source, &t, &cfg).unwrap();
        let lhs12 = (2.0 * e1.areas[0] - 2.0 * e3.areas[0]).abs();
        let rhs12 = 2.0 * e1.side_functions[0].l1_distance(&e3.side_functions[0]);
        assert_eq!((lhs12, rhs12), (0.0, 0.0));
    }

    #[test]
    fn cache_avoids_resolves() {
        let t = equilateral();
        let source = SourceJunction::new([1.0, 1.0, 1.0], 1.0).unwrap();
        let conn = Connection::straight(t.barycenter());
        let cache = GCache::new();
        let cfg = quick_config();
        let a = cache.evaluate(&conn, &source, &t, &cfg).unwrap();
        let b = cache.evaluate(&conn, &source, &t, &cfg).unwrap();
        assert_eq!(cache.hits(), 1);
        assert_eq!(a.g_total.to_bits(), b.g_total.to_bits());
    }

    #[test]
    fn invalid_connection_is_labeled() {
        let t = equilateral();
        let source = SourceJunction::new([1.0, 1.0, 1.0], 1.0).unwrap();
        let conn = Connection::straight(t.vertex(0));
        let err = evaluate_validated(&conn, &source, &t, &quick_config()).unwrap_err();
        assert!(matches!(err, EvalError::Geometry(_)));
    }
}
