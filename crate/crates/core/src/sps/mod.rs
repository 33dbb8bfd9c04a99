//! Single-phase-shifter designs under the unit-modulus constraint.

mod manifold;
mod mo_altmin;
mod omp;
mod partial;
mod pe;

pub use manifold::{analog_objective, euclidean_gradient, retract, riemannian_gradient, ManifoldState};
pub use mo_altmin::{mo_altmin, mo_altmin_from, mo_altmin_raw, AltMinOptions};
pub use omp::{omp_hybrid, omp_raw, OmpCodebook};
pub use partial::{sps_partial_altmin, sps_partial_raw};
pub use pe::{pe_relaxation, pe_relaxation_raw};

use nalgebra::DMatrix;

use crate::linalg::CMat;

/// Entrywise phases; zero entries map to phase 0.
pub fn phases_of(m: &CMat) -> DMatrix<f64> {
    m.map(|z| if z.norm() == 0.0 { 0.0 } else { z.arg() })
}
