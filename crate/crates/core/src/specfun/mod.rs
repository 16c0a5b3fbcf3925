//! Special functions and quadrature kernels: complete elliptic integrals,
//! the real dilogarithm, the genus-one theta series and adaptive
//! complex-path quadrature.

mod dilog;
mod elliptic;
mod quad;
mod theta;

pub use dilog::dilog;
pub use elliptic::{complete_elliptic, complete_elliptic_series, elliptic_e, elliptic_k};
pub(crate) use elliptic::series_coefficients;
pub use quad::{quad_path, quad_path_vec, quad_real, EndpointSingularity, Path, QuadratureSpec};
pub use theta::{theta_sum, theta_truncated};
