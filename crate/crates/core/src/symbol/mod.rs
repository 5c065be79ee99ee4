//! Generalized-difference stencils and their symbols.

mod build;
mod eval;
mod stencil;

pub use build::{
    build_stencil, build_stencil_1d_closed, default_target_order, max_target_order, radial_targets,
    RADIUS_CAP_1D, RADIUS_CAP_3D,
};
pub use eval::{flatness_directions, flatness_order, psi_hat_eval, symbol_eval, DirectionalOrder, FlatnessReport};
pub use stencil::{canonical, multi_indices, orbit_monomial_sum, orbit_points, representatives, Orbit, Stencil};
