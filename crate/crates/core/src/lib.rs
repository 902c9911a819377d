//! Numerical approximation of planar Skorokhod embedding domains.
//!
//! Given a centered law `mu` with bounded (or truncated) support, the crate
//! builds a sequence of discrete approximations `mu_n`, turns their step
//! quantile functions into the boundary of the simply connected domain whose
//! Brownian exit position has real part distributed as `mu_n`, and checks the
//! result by simulating planar Brownian motion.
//!
//! Pipeline:
//!
//! 1. [`distributions`]: c.d.f., quantile, centering, truncation.
//! 2. [`discretize`]: the grid measures `mu_n`, their step quantiles, L¹ rates.
//! 3. [`hilbert`]: closed-form conjugate functions of step quantiles.
//! 4. [`gross_map`]: power-series coefficients and compact-convergence bounds.
//! 5. [`boundary`]: boundary polylines, affine rescaling, CSV/SVG export.
//! 6. [`verify_mc`]: Brownian exit simulation and Kolmogorov-Smirnov checks.
//!
//! [`pipeline`] glues these together behind the `mudk` command line tool.

// negated comparisons below deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod discretize;
pub mod distributions;
pub mod error;
pub mod gross_map;
pub mod hilbert;
pub mod pipeline;
pub mod quad;
pub mod verify_mc;

pub use boundary::{BoundaryPoint, BoundaryPolyline};
pub use discretize::{Scheme, StepQuantile};
pub use distributions::{Atom, Distribution, Family};
pub use error::{Error, Result};
pub use gross_map::FourierCoefficients;
pub use verify_mc::ExitSampleSet;
