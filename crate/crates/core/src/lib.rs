//! Cohomogeneity-one Einstein ODE systems on complex projective spaces.
//!
//! The library encodes the five models of such actions (labelled A-E), builds
//! their Einstein equations for diagonal invariant metrics, solves the singular
//! initial value problems at the singular orbits as exact formal power series,
//! and continues those series numerically into the interior of the orbit
//! interval (shooting, parameter scans, two-sided matching).
//!
//! Layering, bottom up:
//!
//! * [`algebra`] — arbitrary-precision rationals, dense vectors/matrices,
//!   exact determinants and affine solving with kernel bases.
//! * [`series`] — truncated univariate power series with rational coefficients.
//! * [`expr`] — rational-function expression trees over `(t, x_i, y_i)` and
//!   named parameters, with point/series/dual-number evaluation and a
//!   plain-text infix grammar.
//! * [`models`] — the static registry of the five models: dimensions, triple
//!   brackets, Killing constants, boundary data and per-endpoint singular IVPs.
//! * [`einstein`] — the second-order Einstein systems in the metric functions,
//!   assembled both generically and from the per-model data files.
//! * [`formal`] — the power-series recursion at a singular orbit: first-order
//!   conditions, the linear operators `L_m`, kernel families, determinant
//!   formulas, symmetry and compatibility checks.
//! * [`shooting`] — floating-point integration, boundary defects, invariant
//!   monitors, parameter scans and two-sided matching for model A.
//! * [`verify`] — the runnable identity/reproduction suites used by the CLI
//!   and by the acceptance tests.

pub mod algebra;
pub mod einstein;
pub mod expr;
pub mod formal;
pub mod models;
pub mod sampling;
pub mod series;
pub mod shooting;
pub mod verify;

pub use algebra::{QMatrix, QVector, Rational};
pub use expr::{Expr, ParamEnv};

pub use models::{ModelId, ModelSpec};
pub use series::RationalSeries;
