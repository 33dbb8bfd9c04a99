use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::model::DPS_TOL;

/// Split `a` (with `|a| <= 2`) into phases `(φ, θ)` with `e^{jφ} + e^{jθ} = a`:
/// `φ = ∠a + arccos(|a|/2)`, `θ = ∠a − arccos(|a|/2)`, and `∠0 = 0`.
///
/// Amplitudes up to `2 + 1e-12` are clamped to 2.
pub fn phase_split(a: C64) -> Result<(f64, f64)> {
    let r = a.norm();
    if !(r <= 2.0 + DPS_TOL) {
        return Err(Error::PhaseSplitDomain(r));
    }
    let angle = if r == 0.0 { 0.0 } else { a.arg() };
    let half = (r.min(2.0) / 2.0).acos();
    Ok((angle + half, angle - half))
}
