use super::phases_of;
use crate::error::Result;
use crate::linalg::{lstsq, thin_svd, CMat};
use crate::metrics::normalize_design;
use crate::model::{AnalogNetwork, BeamformerPair, Connectivity, Design};

/// Phase extraction from the DPS solution, power-normalized.
pub fn pe_relaxation(f_opt: &CMat, n_rf: usize) -> Result<Design> {
    normalize_design(pe_relaxation_raw(f_opt, n_rf)?)
}

/// `F_RF = exp(j∠U_1)` from the `n_rf` dominant left singular vectors, then a
/// least-squares `F_BB`. When `n_rf` exceeds the target's column count the
/// missing left vectors come from a zero-padded SVD.
pub fn pe_relaxation_raw(f_opt: &CMat, n_rf: usize) -> Result<Design> {
    let n_t = f_opt.nrows();
    let u = if n_rf <= f_opt.ncols().min(n_t) {
        thin_svd(f_opt)?.u
    } else {
        let mut padded = CMat::zeros(n_t, n_t.max(f_opt.ncols()));
        padded.columns_mut(0, f_opt.ncols()).copy_from(f_opt);
        thin_svd(&padded)?.u
    };
    let k = n_rf.min(u.ncols());
    let mut u1 = CMat::zeros(n_t, n_rf);
    u1.columns_mut(0, k).copy_from(&u.columns(0, k));
    let analog = AnalogNetwork::sps(phases_of(&u1), Connectivity::fully(n_t, n_rf))?;
    let digital = lstsq(analog.matrix(), f_opt)?;
    Ok(Design::one_shot(BeamformerPair::new(analog, digital)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cis, frob, frob_sq, pinv, C64};
    use crate::metrics::{approximation_residual, power_normalize};
    use crate::random::{complex_gaussian_matrix, uniform_phases};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_modulus_singular_vectors_are_lossless() {
        // U_1 = DFT columns / sqrt(N_t), already of constant modulus.
        let n_t = 8;
        let u = CMat::from_fn(n_t, 2, |i, j| {
            cis(std::f64::consts::TAU * (i * (j + 1)) as f64 / n_t as f64) / (n_t as f64).sqrt()
        });
        let v_h = CMat::from_row_slice(2, 3, &[
            C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.0),
            C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0),
        ]);
        let s = CMat::from_diagonal(&crate::linalg::CVec::from_vec(vec![C64::new(2.0, 0.0), C64::new(1.0, 0.0)]));
        let f = &u * s * v_h;
        let f = f.unscale(frob(&f) / 3f64.sqrt());
        let d = pe_relaxation(&f, 2).unwrap();
        d.pair.analog.check().unwrap();
        assert!(approximation_residual(&f, &d.pair).unwrap() < 1e-12);
    }

    #[test]
    fn digital_matches_independent_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = complex_gaussian_matrix(&mut rng, 16, 3) * complex_gaussian_matrix(&mut rng, 3, 6);
        let d = pe_relaxation(&f, 3).unwrap();
        let x = d.pair.analog.matrix().clone();
        let raw = x.clone() * pinv(&x).unwrap() * &f;
        let want = frob(&(&f - raw.scale(6f64.sqrt() / frob(&raw))));
        let got = approximation_residual(&f, &d.pair).unwrap();
        assert!((got - want).abs() < 1e-9 * want.max(1.0));
        assert!((frob_sq(&d.pair.product()) - 6.0).abs() < 1e-10);
    }

    #[test]
    fn extra_chains_use_padded_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = complex_gaussian_matrix(&mut rng, 8, 2);
        let d = pe_relaxation_raw(&f, 4).unwrap();
        d.pair.analog.check().unwrap();
        assert_eq!(d.pair.digital.shape(), (4, 2));
        let normalized = power_normalize(&d.pair).unwrap();
        assert!((frob_sq(&normalized.product()) - 2.0).abs() < 1e-10);
        let _ = uniform_phases(&mut rng, 1, 1);
    }
}
