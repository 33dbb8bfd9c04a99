use crate::error::Result;
use crate::linalg::{max_abs, thin_svd, CMat, C64};
use crate::model::{AnalogNetwork, BeamformerPair, Connectivity, Design};

/// The `n_rf` principal components of `f_opt`: left singular vectors
/// `U_1` (`N_t × n_rf`) and `S_1·V_1^H` (`n_rf × M`). Missing components
/// beyond `min(N_t, M)` are zero.
pub fn principal_factors(f_opt: &CMat, n_rf: usize) -> Result<(CMat, CMat)> {
    let (n_t, m) = f_opt.shape();
    let svd = thin_svd(f_opt)?;
    let k = n_rf.min(svd.singular_values.len());
    let mut u1 = CMat::zeros(n_t, n_rf);
    let mut sv = CMat::zeros(n_rf, m);
    for j in 0..k {
        u1.set_column(j, &svd.u.column(j));
        let s = svd.singular_values[j];
        sv.set_row(j, &(svd.v_h.row(j) * C64::new(s, 0.0)));
    }
    Ok((u1, sv))
}

/// Fully-connected DPS design by truncated SVD.
///
/// `F_RF·F_BB = U_1·S_1·V_1^H`, so the residual is the tail singular-value
/// energy. Each column of `U_1` is rescaled so its largest entry has modulus 2
/// and the inverse scale moves into the corresponding row of `F_BB`. The pair
/// is returned without power normalization.
pub fn dps_full_solve(f_opt: &CMat, n_rf: usize) -> Result<Design> {
    let (mut u1, mut sv) = principal_factors(f_opt, n_rf)?;
    for j in 0..n_rf {
        let peak = max_abs(&u1.column(j));
        if peak > 0.0 {
            let s = 2.0 / peak;
            u1.column_mut(j).scale_mut(s);
            sv.row_mut(j).unscale_mut(s);
        }
    }
    let analog = AnalogNetwork::dps(&u1, Connectivity::fully(f_opt.nrows(), n_rf))?;
    Ok(Design::one_shot(BeamformerPair::new(analog, sv)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frob, frob_sq, singular_values};
    use crate::metrics::approximation_residual;
    use crate::random::complex_gaussian_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rank_sufficient_target_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n_s in [1, 2, 4] {
            let f = complex_gaussian_matrix(&mut rng, 16, n_s);
            let d = dps_full_solve(&f, n_s).unwrap();
            d.pair.analog.check().unwrap();
            assert!(approximation_residual(&f, &d.pair).unwrap() <= 1e-9 * frob(&f));
        }
    }

    #[test]
    fn more_chains_than_rank_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = complex_gaussian_matrix(&mut rng, 8, 2) * complex_gaussian_matrix(&mut rng, 2, 6);
        let d = dps_full_solve(&f, 5).unwrap();
        assert!(approximation_residual(&f, &d.pair).unwrap() <= 1e-9 * frob(&f));
        // More chains than min(N_t, M) pads with dead columns.
        let wide = complex_gaussian_matrix(&mut rng, 8, 3);
        let d = dps_full_solve(&wide, 5).unwrap();
        assert!(approximation_residual(&wide, &d.pair).unwrap() <= 1e-9 * frob(&wide));
    }

    #[test]
    fn residual_is_tail_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = complex_gaussian_matrix(&mut rng, 16, 24);
        let d = dps_full_solve(&f, 4).unwrap();
        let tail: f64 = singular_values(&f).unwrap()[4..].iter().map(|s| s * s).sum();
        let r2 = frob_sq(&(&f - d.pair.product()));
        assert!((r2 - tail).abs() <= 1e-8 * tail);
        assert!(d.pair.analog.matrix().iter().all(|z| z.norm() <= 2.0 + 1e-12));
    }
}
