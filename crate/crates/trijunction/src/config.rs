//! Run configuration: one TOML file per run describing the target triangle,
//! the source junction, solver and search parameters, and command inputs.
//! All randomness is seeded from the file; the only environment override is
//! the output directory (TRIJUNCTION_OUT_DIR).

use serde::Deserialize;

use crate::functional::GConfig;
use crate::geometry::{Connection, Point, SourceJunction, TargetTriangle};
use crate::optimizer::OptimizationSpec;
use crate::plateau::SolverConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    triangle: RawTriangle,
    source: RawSource,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    connection: Option<RawConnection>,
    #[serde(default)]
    optimize: RawOptimize,
    #[serde(default)]
    verify: RawVerify,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTriangle {
    /// Counterclockwise vertices alpha_1, alpha_2, alpha_3.
    vertices: [[f64; 2]; 3],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    /// Jump lengths r_12, r_23, r_31.
    lengths: [f64; 3],
    disk_radius: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSolver {
    /// Node counts per rectangle axis (cells + 1).
    grid_nodes: [usize; 2],
    newton_tol: f64,
    max_iterations: usize,
    continuation_steps: usize,
    nested: bool,
    /// Optional smoothing radius applied to the boundary data (0 = off).
    mollify_sigma: f64,
}

impl Default for RawSolver {
    fn default() -> Self {
        RawSolver {
            grid_nodes: [129, 129],
            newton_tol: 1e-10,
            max_iterations: 60,
            continuation_steps: 1,
            nested: true,
            mollify_sigma: 0.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConnection {
    triple_point: [f64; 2],
    #[serde(default)]
    branch_knots: Option<[Vec<[f64; 2]>; 3]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawOptimize {
    knots_per_branch: usize,
    coarse_resolution: usize,
    multistarts: usize,
    local_tol: f64,
    local_max_iterations: usize,
    seed: u64,
    /// Search-time grid; the final report re-evaluates on the solver grid.
    grid_nodes: [usize; 2],
}

impl Default for RawOptimize {
    fn default() -> Self {
        let d = OptimizationSpec::default();
        RawOptimize {
            knots_per_branch: d.knots_per_branch,
            coarse_resolution: d.coarse_resolution,
            multistarts: d.multistarts,
            local_tol: d.local_tol,
            local_max_iterations: d.local_max_iterations,
            seed: d.seed,
            grid_nodes: [d.eval.n_s + 1, d.eval.n_t + 1],
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawVerify {
    /// Wedge openings of the three regions, degrees, summing to 360.
    jump_angles_deg: [f64; 3],
    epsilons: Vec<f64>,
    min_slope: f64,
}

impl Default for RawVerify {
    fn default() -> Self {
        RawVerify {
            jump_angles_deg: [120.0, 120.0, 120.0],
            epsilons: vec![0.1, 0.05, 0.025, 0.0125],
            min_slope: 0.9,
        }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawOutput {
    dir: Option<String>,
}

/// Parsed and validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub triangle: TargetTriangle,
    pub source: SourceJunction,
    pub eval: GConfig,
    pub mollify_sigma: f64,
    pub connection: Option<Connection>,
    pub optimize: OptimizationSpec,
    pub verify: VerifySettings,
    pub output_dir: std::path::PathBuf,
}

#[derive(Debug, Clone)]
pub struct VerifySettings {
    pub wedge_angles: [f64; 3],
    pub epsilons: Vec<f64>,
    pub min_slope: f64,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<RunConfig, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(ConfigError(format!(
                "schema_version {} not supported (expected {SCHEMA_VERSION})",
                raw.schema_version
            )));
        }
        let vertices = raw.triangle.vertices.map(|v| Point::new(v[0], v[1]));
        let triangle =
            TargetTriangle::new(vertices).map_err(|e| ConfigError(format!("triangle: {e}")))?;
        let source = SourceJunction::new(raw.source.lengths, raw.source.disk_radius)
            .map_err(|e| ConfigError(format!("source: {e}")))?;

        let grid = parse_grid(raw.solver.grid_nodes)?;
        let solver = SolverConfig {
            newton_tol: raw.solver.newton_tol,
            max_iterations: raw.solver.max_iterations,
            continuation_steps: raw.solver.continuation_steps,
            ..Default::default()
        };
        solver.validate().map_err(|e| ConfigError(format!("solver: {e}")))?;
        let eval = GConfig { n_s: grid.0, n_t: grid.1, solver, nested: raw.solver.nested };
        if raw.solver.mollify_sigma < 0.0 {
            return Err(ConfigError("solver.mollify_sigma must be nonnegative".to_string()));
        }

        let connection = match raw.connection {
            None => None,
            Some(c) => {
                let p = Point::new(c.triple_point[0], c.triple_point[1]);
                let knots = match c.branch_knots {
                    None => [Vec::new(), Vec::new(), Vec::new()],
                    Some(ks) => ks.map(|k| k.iter().map(|q| Point::new(q[0], q[1])).collect()),
                };
                Some(Connection::with_knots(p, knots))
            }
        };

        let search_grid = parse_grid(raw.optimize.grid_nodes)?;
        let optimize = OptimizationSpec {
            knots_per_branch: raw.optimize.knots_per_branch,
            coarse_resolution: raw.optimize.coarse_resolution,
            multistarts: raw.optimize.multistarts,
            local_tol: raw.optimize.local_tol,
            local_max_iterations: raw.optimize.local_max_iterations,
            seed: raw.optimize.seed,
            eval: GConfig { n_s: search_grid.0, n_t: search_grid.1, solver, nested: raw.solver.nested },
        };

        for &e in &raw.verify.epsilons {
            if !(e > 0.0) {
                return Err(ConfigError("verify.epsilons must be positive".to_string()));
            }
        }
        let verify = VerifySettings {
            wedge_angles: raw.verify.jump_angles_deg.map(f64::to_radians),
            epsilons: raw.verify.epsilons,
            min_slope: raw.verify.min_slope,
        };

        let output_dir = std::env::var_os("TRIJUNCTION_OUT_DIR")
            .map(std::path::PathBuf::from)
            .or_else(|| raw.output.dir.as_ref().map(std::path::PathBuf::from))
            .unwrap_or_else(|| std::path::PathBuf::from("out"));

        Ok(RunConfig {
            triangle,
            source,
            eval,
            mollify_sigma: raw.solver.mollify_sigma,
            connection,
            optimize,
            verify,
            output_dir,
        })
    }

    pub fn from_path(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }
}

fn parse_grid(nodes: [usize; 2]) -> Result<(usize, usize), ConfigError> {
    if nodes[0] < 9 || nodes[1] < 9 {
        return Err(ConfigError(format!(
            "grid_nodes {:?} below the 9x9 minimum (8x8 cells)",
            nodes
        )));
    }
    Ok((nodes[0] - 1, nodes[1] - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const SYMMETRIC: &str = r#"
schema_version = 1

[triangle]
vertices = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.8660254037844386]]

[source]
lengths = [1.0, 1.0, 1.0]
disk_radius = 1.0

[connection]
triple_point = [0.5, 0.28867513459481287]
"#;

    #[test]
    fn parses_symmetric_config() {
        let cfg = RunConfig::from_toml_str(SYMMETRIC).unwrap();
        assert_eq!(cfg.eval.n_s, 128);
        assert!(cfg.connection.is_some());
        assert_eq!(cfg.verify.epsilons.len(), 4);
    }

    #[test]
    fn missing_disk_radius_is_located() {
        let bad = SYMMETRIC.replace("disk_radius = 1.0", "");
        let err = RunConfig::from_toml_str(&bad).unwrap_err();
        assert!(err.0.contains("disk_radius"), "{}", err.0);
    }

    #[test]
    fn unknown_field_is_located() {
        let bad = SYMMETRIC.replace("lengths", "radii");
        let err = RunConfig::from_toml_str(&bad).unwrap_err();
        assert!(err.0.contains("radii") || err.0.contains("unknown"), "{}", err.0);
    }

    #[test]
    fn wrong_schema_version_rejected() {
        let bad = SYMMETRIC.replace("schema_version = 1", "schema_version = 99");
        assert!(RunConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn cw_triangle_rejected_with_context() {
        let bad = SYMMETRIC.replace(
            "[[0.0, 0.0], [1.0, 0.0], [0.5, 0.8660254037844386]]",
            "[[0.0, 0.0], [0.5, 0.8660254037844386], [1.0, 0.0]]",
        );
        let err = RunConfig::from_toml_str(&bad).unwrap_err();
        assert!(err.0.contains("triangle"), "{}", err.0);
    }
}
