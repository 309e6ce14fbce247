//! Numerical laboratory for the parabolic complex Monge-Ampère flow
//!
//! ```text
//!   ∂φ/∂t = log det(g + ∂∂̄φ)/det(g) + F(φ, z)
//! ```
//!
//! on the flat torus Cⁿ/(Z+iZ)ⁿ (n = 1 or 2) with the Euclidean Kähler
//! background. The crate provides
//!
//! - periodic grids and spectral complex calculus ([`geometry`], [`field`],
//!   [`spectral`], [`rough`]),
//! - pointwise Kähler-metric algebra for g_φ = g + ∂∂̄φ and the analytic
//!   nonlinearity family F(s,z) = a·s + b·sin(s) + h(z) ([`kahler`],
//!   [`nonlinearity`]),
//! - Newton solvers for the elliptic Monge-Ampère equation ([`elliptic`]),
//! - explicit time integration of the flow with positivity safeguarding
//!   ([`flow`]),
//! - computable versions of the maximum-principle estimate quantities and a
//!   numerical parabolic-defect checker ([`monitors`]),
//! - and batch experiments with serialization and verdicts ([`harness`]).
//!
//! All operations are pure functions of their inputs; grid-wide reductions
//! use a fixed serial order so results are bit-reproducible regardless of
//! how many threads drive the experiment layer.

pub mod elliptic;
pub mod error;
pub mod field;
pub mod flow;
pub mod geometry;
pub mod harness;
pub mod kahler;
pub mod monitors;
pub mod nonlinearity;
pub mod rough;
pub mod spectral;
pub(crate) mod util;

pub use error::{FieldError, FlowError, MetricError, SolveError};
pub use field::{ComplexTensorField, HermitianField, IndexKind, ScalarField};
pub use geometry::TorusGeometry;
pub use kahler::MetricField;
pub use nonlinearity::{Nonlinearity, TrigKind, TrigPoly, TrigTerm};
