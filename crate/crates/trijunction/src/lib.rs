//! Three entangled nonparametric minimal surfaces over the sides of a target
//! triangle, coupled through a triple point: boundary-data geometry, a
//! rectangle Plateau solver, the coupled functional and its minimization over
//! graph-type connections, and an approximating-sequence area verifier.

pub mod geometry;
pub mod functional;
pub mod optimizer;
pub mod plateau;
pub mod verifier;
