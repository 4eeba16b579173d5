#![allow(clippy::needless_range_loop)]

pub mod conservation;
pub mod context;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod linalg;
pub mod noether;
pub mod rational;
pub mod solver;

pub use context::{Context, ParamValue};
pub use error::{Error, Result};
pub use expr::{Expr, Func, Node};
pub use geometry::{HomotheticKind, HomotheticResult, Metric, SpatialVectorField};
pub use noether::{ApproximateGenerator, DeterminingSystem, GeneratorOrder, PerturbedLagrangian, VerificationReport};
pub use solver::{AnsatzSpec, SolutionBasis};
