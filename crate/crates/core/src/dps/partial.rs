use nalgebra::RowDVector;

use super::mapping::MappingSets;
use crate::error::{Error, Result};
use crate::linalg::{max_abs, thin_svd, CMat, CVec, C64};
use crate::model::{AnalogNetwork, BeamformerPair, Connectivity, Design};

/// Best rank-one fit `rows ≈ a·x` with `‖x‖ = 1`.
#[derive(Debug, Clone)]
pub struct RankOneFit {
    /// `λ_1(Σ y_i y_i^H)`, the energy captured by the fit.
    pub energy: f64,
    pub coeffs: CVec,
    pub direction: RowDVector<C64>,
}

/// Rank-one fit of a stack of target rows. `direction` is the transposed
/// principal eigenvector of `Σ_i y_i y_i^H` and `coeffs[i] = x^H y_i`.
pub fn group_fit(rows: &CMat) -> Result<RankOneFit> {
    let m = rows.ncols();
    if rows.nrows() == 0 {
        return Ok(RankOneFit { energy: 0.0, coeffs: CVec::zeros(0), direction: RowDVector::zeros(m) });
    }
    let svd = thin_svd(rows)?;
    let s = svd.singular_values[0];
    if s == 0.0 {
        let mut direction = RowDVector::zeros(m);
        direction[0] = C64::new(1.0, 0.0);
        return Ok(RankOneFit { energy: 0.0, coeffs: CVec::zeros(rows.nrows()), direction });
    }
    Ok(RankOneFit {
        energy: s * s,
        coeffs: svd.u.column(0) * C64::new(s, 0.0),
        direction: svd.v_h.row(0).into_owned(),
    })
}

pub(crate) fn gather_rows(f_opt: &CMat, set: &[usize]) -> CMat {
    CMat::from_fn(set.len(), f_opt.ncols(), |r, c| f_opt[(set[r], c)])
}

/// Partially-connected DPS design for an arbitrary antenna-to-chain mapping.
///
/// Each RF chain `j` solves `min Σ_{i∈D_j} ‖y_i − a_i x_j‖²` in closed form
/// (principal eigenvector). Coefficients are rescaled per chain so the
/// largest has modulus 2. Returned without power normalization.
pub fn dps_partial_solve(f_opt: &CMat, mapping: &MappingSets) -> Result<Design> {
    let n_t = f_opt.nrows();
    mapping.validate(n_t)?;
    let n_rf = mapping.sets().len();
    let mut entries = CMat::zeros(n_t, n_rf);
    let mut digital = CMat::zeros(n_rf, f_opt.ncols());
    for (j, set) in mapping.sets().iter().enumerate() {
        if set.is_empty() {
            return Err(Error::EmptyGroup(j));
        }
        let fit = group_fit(&gather_rows(f_opt, set))?;
        let peak = max_abs(&CMat::from_column_slice(set.len(), 1, fit.coeffs.as_slice()));
        let scale = if peak > 0.0 { 2.0 / peak } else { 1.0 };
        for (r, &i) in set.iter().enumerate() {
            entries[(i, j)] = fit.coeffs[r] * scale;
        }
        digital.set_row(j, &fit.direction.unscale(scale));
    }
    let analog = AnalogNetwork::dps(&entries, Connectivity::from_sets(n_t, mapping.sets()))?;
    Ok(Design::one_shot(BeamformerPair::new(analog, digital)?))
}
