//! Geometry of the product of complex circles `{X : |X(i,j)| = 1}`.

use crate::linalg::{frob_sq, CMat, C64};

/// Iterate of the analog conjugate-gradient solver.
#[derive(Debug, Clone)]
pub struct ManifoldState {
    pub point: CMat,
    pub direction: CMat,
    pub gradient: CMat,
}

/// `‖F_opt − X·B‖_F²`.
pub fn analog_objective(f_opt: &CMat, x: &CMat, digital: &CMat) -> f64 {
    frob_sq(&(f_opt - x * digital))
}

/// Gradient of the analog objective with respect to the real inner product
/// `Re tr(A^H B)`: `−2 (F_opt − X·B)·B^H`.
pub fn euclidean_gradient(f_opt: &CMat, x: &CMat, digital: &CMat) -> CMat {
    (f_opt - x * digital) * digital.adjoint() * C64::new(-2.0, 0.0)
}

/// Project onto the tangent space at `point`: `g − Re(g ∘ conj(x)) ∘ x`.
pub fn riemannian_gradient(point: &CMat, euclidean: &CMat) -> CMat {
    euclidean.zip_map(point, |g, x| g - x * (g * x.conj()).re)
}

/// Entrywise retraction `x ← x / |x|`.
pub fn retract(x: &CMat) -> CMat {
    x.map(|z| {
        let n = z.norm();
        if n > 0.0 { z / n } else { C64::new(1.0, 0.0) }
    })
}
