//! Numerical kernels for fully nonlinear adiabatic three-wave mixing.
//!
//! * [`elliptic`]: Jacobi functions for any real parameter and the `J`
//!   coupling functions.
//! * [`coupled_wave`]: the normalized envelope equations, Manley–Rowe
//!   constants and trajectory integration.
//! * [`linear_twolevel`]: undepleted-pump two-level models (Hermitian
//!   SFG/DFG, non-Hermitian OPA) with Bloch and pseudo-Bloch maps.
//! * [`adiabatic`]: elliptic parameterization, reduced `(u, β)` dynamics,
//!   stationary branches and adiabaticity diagnostics.
//! * [`bloch_geometry`]: the generalized Bloch surface.

pub mod adiabatic;
pub mod bloch_geometry;
pub mod coupled_wave;
pub mod elliptic;
pub mod error;
pub mod integrate;
pub mod linear_twolevel;
pub mod profile;
pub mod roots;

mod sign;

pub use error::{Error, Result};
pub use sign::Sign;

/// Formats a number with 17 significant digits, the shortest width that
/// round-trips every `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}
