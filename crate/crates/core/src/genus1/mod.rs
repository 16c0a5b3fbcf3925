//! Genus-one asymptotics: the self-similar endpoint `α(μ)`, the periods and
//! modulation constants of the elliptic surface, the Whitham speed, and the
//! theta-function wave form.

mod constants;
mod endpoint;
mod surface;
mod wave;

pub use constants::{modulation_constants, modulation_constants_with, ModulationParams};
pub use endpoint::{
    a_of_m, alpha_from_m, char_speed, endpoint_residuals, m_param, mu_of_alpha, solve_endpoint, solve_endpoint_with,
    EndpointState,
};
pub use surface::{abel_map, big_r, period_integrals, s_fun, PeriodData};
pub use wave::{psi_asy_g1, psi_from_fast_phase};
