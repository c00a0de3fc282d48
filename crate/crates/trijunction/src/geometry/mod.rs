//! Target-triangle geometry: triangles with per-side frames, graph-type
//! connections through a triple point, and the side functions phi_ij whose
//! graphs are the pairwise branch unions.

mod connection;
mod point;
mod side_function;
mod triangle;

pub use connection::{
    build_side_function, side_functions, slope_bound, validate_connection, Connection,
    SideCheck, SourceJunction, ValidationReport, GRAPHICALITY_TOL,
};
pub use point::Point;
pub use side_function::{piecewise_linear_approximate, SideFunction};
pub use triangle::{Side, SideFrame, TargetTriangle, SIDES};

/// Positive half of the symmetric 32-point Gauss-Legendre rule on [-1, 1].
pub(crate) fn gauss_nodes_16() -> (&'static [f64; 16], &'static [f64; 16]) {
    side_function::gauss_legendre_32()
}

/// Errors from geometry construction and graph extraction.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    DegenerateTriangle,
    NotCounterclockwise,
    BadSource(&'static str),
    BadSideFunction(&'static str),
    /// The concatenated branches are not single-valued over the side.
    NotAGraph { side: Side },
    KnotBudgetTooSmall { budget: usize },
}

impl std::fmt::Display for GeometryError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GeometryError::DegenerateTriangle => write!(f, "triangle is degenerate"),
            GeometryError::NotCounterclockwise => {
                write!(f, "triangle vertices must be in counterclockwise order")
            }
            GeometryError::BadSource(msg) => write!(f, "invalid source junction: {msg}"),
            GeometryError::BadSideFunction(msg) => write!(f, "invalid side function: {msg}"),
            GeometryError::NotAGraph { side } => {
                write!(f, "branch union is not a graph over side {side}")
            }
            GeometryError::KnotBudgetTooSmall { budget } => {
                write!(f, "knot budget {budget} too small, need at least 2")
            }
        }
    }
}

impl std::error::Error for GeometryError {}
