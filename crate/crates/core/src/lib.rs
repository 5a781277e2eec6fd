//! Numerical core of the Morawetz laboratory: Riemannian metric fields and
//! their assumption checks, geodesic tracing, a damped nonlinear Schrödinger
//! solver on radial and warped grids, multiplier functionals and decay fits.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod assumptions;
pub mod damping;
pub mod decay;
pub mod error;
pub mod functionals;
pub mod geodesics;
pub mod grid;
pub mod linalg;
pub mod metric;
pub mod multiplier;
pub mod solver;
pub mod util;

pub use error::{Error, Result};
pub use metric::{Metric, MetricField, MetricTag, RadialMetricParams, SampledMetric, WarpedProfile};
