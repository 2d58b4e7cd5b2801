//! Exact Lie-bracket algebra for polynomial vector fields.

pub mod field;
pub mod hierarchy;
pub mod poly;

pub use field::{ad, degree_n, lie_bracket, lorenz_drift, lorenz_drift_symbolic, lorenz_noise, PolyVectorField};
pub use hierarchy::{build_hierarchy, spanning_test, BracketHierarchy, SpanResult};
pub use poly::{Poly, Var};
