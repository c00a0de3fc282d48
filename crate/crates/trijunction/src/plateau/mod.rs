//! Nonparametric minimal-surface solver on a rectangle: Dirichlet data on
//! three sides, a free (natural/Neumann) top side, solved as the exact
//! minimization of the convex discrete area functional by damped Newton with
//! optional boundary-data continuation.

mod energy;
mod linsolve;

pub use energy::{discrete_area, Lattice};

use crate::geometry::SideFunction;
use energy::{assemble_hessian, energy_gradient, FreeMap, StencilMatrix};
use linsolve::{pcg, PcgWorkspace};

#[derive(Debug, Clone)]
pub enum SolveError {
    NonConvergence { residual: f64, iterations: usize },
    InvalidData(&'static str),
    GridTooCoarse { n_s: usize, n_t: usize },
}

impl std::fmt::Display for SolveError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveError::NonConvergence { residual, iterations } => write!(
                f,
                "Newton stalled at residual {residual:.3e} after {iterations} iterations; refine the grid or smooth the data"
            ),
            SolveError::InvalidData(msg) => write!(f, "invalid problem data: {msg}"),
            SolveError::GridTooCoarse { n_s, n_t } => {
                write!(f, "grid {n_s}x{n_t} cells is below the 8x8 minimum")
            }
        }
    }
}

impl std::error::Error for SolveError {}

/// Newton/continuation parameters.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Sup-norm target for the discrete Euler-Lagrange residual
    /// (energy gradient divided by the cell area).
    pub newton_tol: f64,
    pub max_iterations: usize,
    /// Backtracking factor of the damping schedule.
    pub backtrack: f64,
    /// Smallest admissible step before declaring non-convergence.
    pub min_step: f64,
    /// Number of boundary-data homotopy steps (1 = direct solve).
    pub continuation_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            newton_tol: 1e-10,
            max_iterations: 60,
            backtrack: 0.5,
            min_step: 1e-14,
            continuation_steps: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.newton_tol > 0.0) {
            return Err(SolveError::InvalidData("newton_tol must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(SolveError::InvalidData("max_iterations must be at least 1"));
        }
        if self.continuation_steps == 0 {
            return Err(SolveError::InvalidData("continuation_steps must be at least 1"));
        }
        Ok(())
    }
}

/// One Dirichlet-Neumann problem: R = [0, l] x [0, r], data phi on the bottom
/// (extended constantly in t on the two vertical sides, hence zero there),
/// free top side.
#[derive(Debug, Clone)]
pub struct PlateauProblem {
    pub width: f64,
    pub height: f64,
    /// Cell counts; node counts are n_s+1, n_t+1.
    pub n_s: usize,
    pub n_t: usize,
    pub dirichlet: SideFunction,
}

impl PlateauProblem {
    pub fn new(
        dirichlet: SideFunction,
        height: f64,
        n_s: usize,
        n_t: usize,
    ) -> Result<Self, SolveError> {
        let width = dirichlet.domain_length();
        if !(width > 0.0) || !(height > 0.0) {
            return Err(SolveError::InvalidData("rectangle sides must be positive"));
        }
        if n_s < 8 || n_t < 8 {
            return Err(SolveError::GridTooCoarse { n_s, n_t });
        }
        let scale = dirichlet.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if dirichlet.eval(0.0).abs() > 1e-12 * scale || dirichlet.eval(width).abs() > 1e-12 * scale {
            return Err(SolveError::InvalidData("boundary data must vanish at the rectangle corners"));
        }
        Ok(PlateauProblem { width, height, n_s, n_t, dirichlet })
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::new(self.width, self.height, self.n_s, self.n_t)
    }

    /// Same problem on a dyadically refined grid.
    pub fn refined(&self, factor: usize) -> PlateauProblem {
        PlateauProblem {
            width: self.width,
            height: self.height,
            n_s: self.n_s * factor,
            n_t: self.n_t * factor,
            dirichlet: self.dirichlet.clone(),
        }
    }

    fn boundary_samples(&self) -> Vec<f64> {
        let l = self.lattice();
        (0..=self.n_s)
            .map(|a| self.dirichlet.eval(a as f64 * l.h_s))
            .collect()
    }
}

/// The solved surface: nodal values, residual achieved, and discrete area.
#[derive(Debug, Clone)]
pub struct SurfaceField {
    pub n_s: usize,
    pub n_t: usize,
    pub width: f64,
    pub height: f64,
    pub values: Vec<f64>,
    pub residual: f64,
    pub newton_iterations: usize,
    area: f64,
}

impl SurfaceField {
    pub fn lattice(&self) -> Lattice {
        Lattice::new(self.width, self.height, self.n_s, self.n_t)
    }

    #[inline]
    pub fn value(&self, a: usize, b: usize) -> f64 {
        self.values[b * (self.n_s + 1) + a]
    }

    /// Discrete area, cached from the solve.
    pub fn area(&self) -> f64 {
        self.area
    }

    /// Cell-averaged gradient (p, q) of cell (a, b); used by the verifier's
    /// transformed-strip quadrature.
    pub fn cell_gradient(&self, a: usize, b: usize) -> (f64, f64) {
        let l = self.lattice();
        let f00 = self.value(a, b);
        let f10 = self.value(a + 1, b);
        let f01 = self.value(a, b + 1);
        let f11 = self.value(a + 1, b + 1);
        (
            (f10 - f00 + f11 - f01) / (2.0 * l.h_s),
            (f01 - f00 + f11 - f10) / (2.0 * l.h_t),
        )
    }
}

/// Discrete area of an arbitrary field (same quadrature as the solver energy).
pub fn area(field: &SurfaceField) -> f64 {
    discrete_area(&field.lattice(), &field.values)
}

/// Solves the Dirichlet-Neumann problem on R. The free top side carries the
/// natural condition of the energy, which is the mirror symmetry of the
/// doubled-rectangle formulation (see `solve_doubled` and the equivalence test).
pub fn solve(problem: &PlateauProblem, config: &SolverConfig) -> Result<SurfaceField, SolveError> {
    solve_with_init(problem, config, None)
}

/// Same as `solve`, but warm-started from `init` nodal values when given.
pub fn solve_with_init(
    problem: &PlateauProblem,
    config: &SolverConfig,
    init: Option<&[f64]>,
) -> Result<SurfaceField, SolveError> {
    config.validate()?;
    let l = problem.lattice();
    let phi = problem.boundary_samples();
    let map = FreeMap::new(&l, |a, b| a > 0 && a < l.n_s && b > 0);

    let mut values = match init {
        Some(v) if v.len() == l.node_count() => v.to_vec(),
        _ => {
            // t-constant extension of the boundary data
            let mut v = vec![0.0; l.node_count()];
            for b in 0..=l.n_t {
                for a in 0..=l.n_s {
                    v[l.idx(a, b)] = phi[a];
                }
            }
            v
        }
    };

    let steps = config.continuation_steps;
    let mut total_iters = 0;
    let mut residual = f64::INFINITY;
    for step in 1..=steps {
        let theta = step as f64 / steps as f64;
        set_dirichlet(&l, &mut values, &phi, theta, false);
        let (res, iters) = newton(&l, &map, &mut values, config)?;
        residual = res;
        total_iters += iters;
    }
    let area = discrete_area(&l, &values);
    Ok(SurfaceField {
        n_s: l.n_s,
        n_t: l.n_t,
        width: problem.width,
        height: problem.height,
        values,
        residual,
        newton_iterations: total_iters,
        area,
    })
}

/// Coarse-to-fine solve: the problem is first solved on dyadically coarsened
/// grids and each solution prolonged as the warm start of the next level.
/// Identical result contract to `solve`, typically several times faster on
/// fine grids.
pub fn solve_nested(
    problem: &PlateauProblem,
    config: &SolverConfig,
) -> Result<SurfaceField, SolveError> {
    let mut factors = Vec::new();
    let mut f = 1usize;
    while problem.n_s % (2 * f) == 0
        && problem.n_t % (2 * f) == 0
        && problem.n_s / (2 * f) >= 16
        && problem.n_t / (2 * f) >= 16
    {
        f *= 2;
    }
    while f >= 1 {
        factors.push(f);
        f /= 2;
    }
    let mut prev: Option<SurfaceField> = None;
    let mut result = None;
    for &factor in &factors {
        let p = PlateauProblem {
            width: problem.width,
            height: problem.height,
            n_s: problem.n_s / factor,
            n_t: problem.n_t / factor,
            dirichlet: problem.dirichlet.clone(),
        };
        let init = prev.as_ref().map(prolong);
        let field = solve_with_init(&p, config, init.as_deref())?;
        prev = Some(field.clone());
        result = Some(field);
    }
    Ok(result.unwrap())
}

/// Solves the pure Dirichlet problem on the doubled rectangle
/// R_hat = [0, l] x [0, 2r] with the data mirrored onto the top edge.
/// Restricting the symmetric minimizer to R reproduces `solve`.
pub fn solve_doubled(
    problem: &PlateauProblem,
    config: &SolverConfig,
) -> Result<SurfaceField, SolveError> {
    config.validate()?;
    let l = Lattice::new(problem.width, 2.0 * problem.height, problem.n_s, 2 * problem.n_t);
    let phi = problem.boundary_samples();
    let map = FreeMap::new(&l, |a, b| a > 0 && a < l.n_s && b > 0 && b < l.n_t);

    let mut values = vec![0.0; l.node_count()];
    for b in 0..=l.n_t {
        for a in 0..=l.n_s {
            values[l.idx(a, b)] = phi[a];
        }
    }
    let steps = config.continuation_steps;
    let mut total_iters = 0;
    let mut residual = f64::INFINITY;
    for step in 1..=steps {
        let theta = step as f64 / steps as f64;
        set_dirichlet(&l, &mut values, &phi, theta, true);
        let (res, iters) = newton(&l, &map, &mut values, config)?;
        residual = res;
        total_iters += iters;
    }
    let area = discrete_area(&l, &values);
    Ok(SurfaceField {
        n_s: l.n_s,
        n_t: l.n_t,
        width: problem.width,
        height: 2.0 * problem.height,
        values,
        residual,
        newton_iterations: total_iters,
        area,
    })
}

/// Restriction of a doubled-rectangle field to the lower half.
pub fn restrict_doubled(field: &SurfaceField) -> SurfaceField {
    let n_t = field.n_t / 2;
    let mut values = Vec::with_capacity((field.n_s + 1) * (n_t + 1));
    for b in 0..=n_t {
        for a in 0..=field.n_s {
            values.push(field.value(a, b));
        }
    }
    let mut out = SurfaceField {
        n_s: field.n_s,
        n_t,
        width: field.width,
        height: field.height / 2.0,
        values,
        residual: field.residual,
        newton_iterations: field.newton_iterations,
        area: 0.0,
    };
    out.area = discrete_area(&out.lattice(), &out.values);
    out
}

fn set_dirichlet(l: &Lattice, values: &mut [f64], phi: &[f64], theta: f64, mirrored_top: bool) {
    for a in 0..=l.n_s {
        values[l.idx(a, 0)] = theta * phi[a];
        if mirrored_top {
            values[l.idx(a, l.n_t)] = theta * phi[a];
        }
    }
    for b in 0..=l.n_t {
        values[l.idx(0, b)] = theta * phi[0];
        values[l.idx(l.n_s, b)] = theta * phi[l.n_s];
    }
}

/// Damped Newton on the free nodes. Returns (EL residual sup-norm, iterations).
fn newton(
    l: &Lattice,
    map: &FreeMap,
    values: &mut [f64],
    config: &SolverConfig,
) -> Result<(f64, usize), SolveError> {
    let nf = map.free_count();
    let cell = l.cell_area();
    let mut grad = vec![0.0; l.node_count()];
    let mut rhs = vec![0.0; nf];
    let mut dir = vec![0.0; nf];
    let mut h = StencilMatrix::new();
    let mut ws = PcgWorkspace::new();
    let max_pcg = 6 * (l.n_s + l.n_t) + 200;

    let mut res0 = f64::NAN;
    let mut best_res = f64::INFINITY;
    let mut stagnant = 0usize;
    for it in 0..config.max_iterations {
        energy_gradient(l, values, &mut grad);
        let res = map
            .node_of_free
            .iter()
            .map(|&n| grad[n].abs())
            .fold(0.0f64, f64::max)
            / cell;
        if it == 0 {
            res0 = res.max(f64::MIN_POSITIVE);
        }
        if res <= config.newton_tol {
            return Ok((res, it));
        }
        // rounding floor of the residual: once the Newton systems are solved
        // tightly and the residual stops moving, no further progress is possible
        if res <= 1e-6 * res0 && res >= 0.99 * best_res {
            stagnant += 1;
            if stagnant >= 3 {
                return Err(SolveError::NonConvergence { residual: res, iterations: it });
            }
        } else {
            stagnant = 0;
        }
        best_res = best_res.min(res);

        assemble_hessian(l, values, map, &mut h);
        for (fi, &n) in map.node_of_free.iter().enumerate() {
            rhs[fi] = -grad[n];
        }
        dir.fill(0.0);
        // loose solves while far from the target, tight only when the next
        // step has to land below tol
        let eta_quad = 0.1 * (res / res0).powf(1.5);
        let eta_need = 0.03 * config.newton_tol / res;
        let eta = eta_quad.max(eta_need).clamp(1e-13, 1e-4);
        let (pcg_res, pcg_iters) = pcg(&h, &rhs, &mut dir, eta, max_pcg, &mut ws);
        if std::env::var_os("TRIJUNCTION_DEBUG_NEWTON").is_some() {
            eprintln!("newton it={it} res={res:.3e} eta={eta:.1e} pcg=({pcg_res:.2e},{pcg_iters})");
        }

        // Armijo backtracking on the energy. Once the predicted decrease
        // -0.5*g.d falls below the rounding noise of the energy sum, the line
        // search cannot certify descent any more; the full Newton step is
        // taken unconditionally there (pure quadratic-convergence regime).
        let e0 = discrete_area(l, values);
        let slope: f64 = map
            .node_of_free
            .iter()
            .enumerate()
            .map(|(fi, &n)| grad[n] * dir[fi])
            .sum();
        if -0.5 * slope <= 1e-13 * (e0.abs() + 1.0) {
            for (fi, &n) in map.node_of_free.iter().enumerate() {
                values[n] += dir[fi];
            }
            continue;
        }
        let mut step = 1.0;
        loop {
            for (fi, &n) in map.node_of_free.iter().enumerate() {
                values[n] += step * dir[fi];
            }
            let e1 = discrete_area(l, values);
            if e1 <= e0 + 1e-4 * step * slope {
                break;
            }
            for (fi, &n) in map.node_of_free.iter().enumerate() {
                values[n] -= step * dir[fi];
            }
            step *= config.backtrack;
            if step < config.min_step {
                return Err(SolveError::NonConvergence { residual: res, iterations: it });
            }
        }
    }
    energy_gradient(l, values, &mut grad);
    let res = map
        .node_of_free
        .iter()
        .map(|&n| grad[n].abs())
        .fold(0.0f64, f64::max)
        / cell;
    if res <= config.newton_tol {
        Ok((res, config.max_iterations))
    } else {
        Err(SolveError::NonConvergence { residual: res, iterations: config.max_iterations })
    }
}

/// Grid-refinement study: solves on dyadically refined grids, reports the
/// Richardson-extrapolated area and the empirical convergence order.
/// `levels >= 3`; the base grid is the problem's own.
pub fn refine_and_extrapolate(
    problem: &PlateauProblem,
    config: &SolverConfig,
    levels: usize,
) -> Result<RefinementStudy, SolveError> {
    if levels < 3 {
        return Err(SolveError::InvalidData("need at least 3 refinement levels"));
    }
    let mut areas = Vec::with_capacity(levels);
    let mut grids = Vec::with_capacity(levels);
    let mut prev: Option<SurfaceField> = None;
    for lv in 0..levels {
        let p = problem.refined(1 << lv);
        let init = prev.as_ref().map(|f| prolong(f));
        let field = solve_with_init(&p, config, init.as_deref())?;
        areas.push(field.area());
        grids.push((p.n_s, p.n_t));
        prev = Some(field);
    }
    let n = areas.len();
    let d1 = areas[n - 2] - areas[n - 3];
    let d2 = areas[n - 1] - areas[n - 2];
    let scale = areas[n - 1].abs().max(1.0);
    let (order, extrapolated) = if d1.abs() < 1e-14 * scale && d2.abs() < 1e-14 * scale {
        (f64::INFINITY, areas[n - 1])
    } else if d2.abs() < 1e-14 * scale || d1 * d2 <= 0.0 {
        (f64::NAN, areas[n - 1])
    } else {
        let p = (d1 / d2).abs().log2();
        let extr = areas[n - 1] + d2 / ((d1 / d2).abs() - 1.0);
        (p, extr)
    };
    Ok(RefinementStudy { areas, grids, convergence_order: order, area_estimate: extrapolated })
}

#[derive(Debug, Clone)]
pub struct RefinementStudy {
    pub areas: Vec<f64>,
    pub grids: Vec<(usize, usize)>,
    pub convergence_order: f64,
    pub area_estimate: f64,
}

/// Bilinear prolongation of a field onto the doubled grid, boundary included,
/// used only as a warm start.
fn prolong(f: &SurfaceField) -> Vec<f64> {
    let (ns, nt) = (f.n_s, f.n_t);
    let (ns2, nt2) = (2 * ns, 2 * nt);
    let mut out = vec![0.0; (ns2 + 1) * (nt2 + 1)];
    let idx = |a: usize, b: usize| b * (ns2 + 1) + a;
    for b in 0..=nt2 {
        for a in 0..=ns2 {
            let (ac, bf) = (a / 2, b / 2);
            let (ar, br) = (a % 2, b % 2);
            let v = match (ar, br) {
                (0, 0) => f.value(ac, bf),
                (1, 0) => 0.5 * (f.value(ac, bf) + f.value(ac + 1, bf)),
                (0, 1) => 0.5 * (f.value(ac, bf) + f.value(ac, bf + 1)),
                _ => 0.25
                    * (f.value(ac, bf)
                        + f.value(ac + 1, bf)
                        + f.value(ac, bf + 1)
                        + f.value(ac + 1, bf + 1)),
            };
            out[idx(a, b)] = v;
        }
    }
    out
}

/// Boundary extremes of the Dirichlet data; the solution must stay inside
/// (maximum principle).
pub fn data_range(problem: &PlateauProblem) -> (f64, f64) {
    let phi = problem.boundary_samples();
    let lo = phi.iter().fold(f64::INFINITY, |m, &v| m.min(v)).min(0.0);
    let hi = phi.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)).max(0.0);
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Side, SideFunction};

    pub fn tent(ell: f64, w: f64, h: f64) -> SideFunction {
        SideFunction::new(Side::S12, vec![0.0, w, ell], vec![0.0, h, 0.0], w).unwrap()
    }

    #[test]
    fn flat_data_solves_instantly_and_exactly() {
        let zero = SideFunction::new(Side::S12, vec![0.0, 1.0], vec![0.0, 0.0], 0.5).unwrap();
        let p = PlateauProblem::new(zero, 1.0, 16, 16).unwrap();
        let f = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(f.newton_iterations, 0);
        assert!(f.values.iter().all(|&v| v == 0.0));
        assert_eq!(f.area(), 1.0);
    }

    #[test]
    fn tent_solution_between_bounds() {
        let p = PlateauProblem::new(tent(1.0, 0.5, 0.5), 1.0, 32, 32).unwrap();
        let f = solve(&p, &SolverConfig::default()).unwrap();
        let a = f.area();
        let cylinder = 1.0 * p.dirichlet.graph_length();
        assert!(a > 1.0 && a < cylinder, "area {a} outside (1, {cylinder})");
        // maximum principle
        let (lo, hi) = data_range(&p);
        assert!(f.values.iter().all(|&v| v >= lo - 1e-9 && v <= hi + 1e-9));
        assert!(f.residual <= 1e-10);
    }

    #[test]
    fn neumann_matches_doubled_restriction() {
        let p = PlateauProblem::new(tent(1.0, 0.4, 0.45), 0.8, 24, 24).unwrap();
        let cfg = SolverConfig { newton_tol: 1e-13, ..Default::default() };
        let half = solve(&p, &cfg).unwrap();
        let full = solve_doubled(&p, &cfg).unwrap();
        let restricted = restrict_doubled(&full);
        let max_diff = half
            .values
            .iter()
            .zip(&restricted.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max_diff <= 1e-10, "node-wise difference {max_diff}");
        // doubled area is exactly twice the half area up to quadrature rounding
        assert!((full.area() - 2.0 * half.area()).abs() < 1e-9);
    }

    #[test]
    fn refine_extrapolate_flat_is_exact() {
        let zero = SideFunction::new(Side::S12, vec![0.0, 1.0], vec![0.0, 0.0], 0.5).unwrap();
        let p = PlateauProblem::new(zero, 1.0, 8, 8).unwrap();
        let study = refine_and_extrapolate(&p, &SolverConfig::default(), 3).unwrap();
        assert!(study.convergence_order.is_infinite());
        assert_eq!(study.area_estimate, 1.0);
    }

    #[test]
    fn too_coarse_grid_rejected() {
        let t = tent(1.0, 0.5, 0.5);
        assert!(matches!(
            PlateauProblem::new(t, 1.0, 4, 16),
            Err(SolveError::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn continuation_reaches_same_solution() {
        let p = PlateauProblem::new(tent(1.0, 0.3, 0.6), 1.0, 16, 16).unwrap();
        let direct = solve(&p, &SolverConfig { newton_tol: 1e-12, ..Default::default() }).unwrap();
        let cont = solve(
            &p,
            &SolverConfig { newton_tol: 1e-12, continuation_steps: 4, ..Default::default() },
        )
        .unwrap();
        let max_diff = direct
            .values
            .iter()
            .zip(&cont.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max_diff < 1e-9);
    }
}
