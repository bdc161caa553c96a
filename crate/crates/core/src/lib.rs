//! Explicit solutions of one-dimensional stationary first-order mean-field
//! games with local coupling.

pub mod algebra;
pub mod antimonotone;
pub mod coupling;
pub mod dispatch;
pub mod elliptic;
pub mod error;
pub mod linalg;
pub mod monotone;
pub mod potential;
pub mod quad;
pub mod regimes;
pub mod solution;
pub mod viscosity;

pub use algebra::{Branch, RootSpec};
pub use antimonotone::{AntiJ0Variant, SwitchPath};
pub use coupling::{Coupling, CouplingSpec, Monotonicity};
pub use dispatch::{solve_current, solve_rotation, Variant};
pub use elliptic::{EllipticInit, EllipticSolution};
pub use error::{MfgError, Result};
pub use monotone::MonotoneVariant;
pub use potential::{MaxInfo, PeriodicPotential, PotentialSpec};
pub use regimes::{CurveRow, CurveTable, RegimeBoundaries};
pub use solution::{DensityLaw, GridFunction, Jump, Piece, Regime, SolutionTriple, VelocityLaw};
pub use viscosity::{Certificate, PiecewiseCandidate};
