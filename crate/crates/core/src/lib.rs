//! Rotationally symmetric laboratory for singular Riemannian metrics.
//!
//! Metrics on `R^n` (or annuli) of the form `A(r) dr^2 + B(r) g_{S^{n-1}}`
//! are sampled on radial grids. The crate computes their curvature, builds
//! explicit singular examples, mollifies them near a singular set, runs the
//! Ricci-DeTurck h-flow and measures ADM mass and Yamabe-type functionals.

pub mod constructions;
pub mod curvature;
pub mod error;
pub mod fit;
pub mod frame;
pub mod grid;
pub mod hflow;
pub mod measure;
pub mod mass;
pub mod metric;
pub mod mollify;
pub mod oracle;
pub mod stencil;
pub mod verify;
pub mod yamabe;

pub use error::{Error, Result};
pub use grid::{RadialGrid, RadialProfile, Region, SingularSet, SpacingMode};
pub use metric::{ConformalMetric, MetricJet, SymTensor2Radial, ToWarped, WarpedMetric};
