use nalgebra::DMatrix;

use super::mo_altmin::AltMinOptions;
use crate::dps::group_fit;
use crate::error::Result;
use crate::linalg::{cis, frob_sq, CMat, C64};
use crate::metrics::normalize_design;
use crate::model::{contiguous_partition, AnalogNetwork, BeamformerPair, Connectivity, Design};

/// Partially-connected SPS AltMin, power-normalized.
pub fn sps_partial_altmin(f_opt: &CMat, n_rf: usize, opts: &AltMinOptions) -> Result<Design> {
    normalize_design(sps_partial_raw(f_opt, n_rf, opts)?)
}

/// Partially-connected SPS AltMin without normalization.
///
/// Antennas split into `n_rf` contiguous groups (sizes differing by at most
/// one). The analog update sets each phase to `∠(F_opt(i,:)·F_BB(j,:)^H)`;
/// the digital update is the closed-form least squares
/// `F_BB(j,:) = Σ_{i∈G_j} conj(F_RF(i,j))·F_opt(i,:) / |G_j|`. Phases start
/// from each group's rank-one fit.
pub fn sps_partial_raw(f_opt: &CMat, n_rf: usize, opts: &AltMinOptions) -> Result<Design> {
    opts.validate()?;
    let n_t = f_opt.nrows();
    let mask = Connectivity::partial(n_t, n_rf)?;
    let groups = contiguous_partition(n_t, n_rf);
    let mut owner = vec![0; n_t];
    for (j, g) in groups.iter().enumerate() {
        for i in g.clone() {
            owner[i] = j;
        }
    }

    let mut phases = vec![0.0; n_t];
    for g in &groups {
        let rows = f_opt.rows(g.start, g.len()).into_owned();
        let fit = group_fit(&rows)?;
        for (r, i) in g.clone().enumerate() {
            let a = fit.coeffs[r];
            phases[i] = if a.norm() > 0.0 { a.arg() } else { 0.0 };
        }
    }

    let digital_step = |phases: &[f64]| {
        let mut bb = CMat::zeros(n_rf, f_opt.ncols());
        for (j, g) in groups.iter().enumerate() {
            let mut acc = nalgebra::RowDVector::<C64>::zeros(f_opt.ncols());
            for i in g.clone() {
                acc += f_opt.row(i) * cis(-phases[i]);
            }
            bb.set_row(j, &acc.unscale(g.len() as f64));
        }
        bb
    };
    let objective = |phases: &[f64], bb: &CMat| -> f64 {
        (0..n_t).map(|i| (f_opt.row(i) - bb.row(owner[i]) * cis(phases[i])).norm_squared()).sum()
    };

    let floor = 1e-28 * frob_sq(f_opt);
    let mut digital = digital_step(&phases);
    let mut prev = objective(&phases, &digital);
    let mut trace = vec![prev];
    let mut iterations = 0;
    while iterations < opts.max_outer && prev > floor {
        iterations += 1;
        for i in 0..n_t {
            let corr = (f_opt.row(i) * digital.row(owner[i]).adjoint())[(0, 0)];
            // A zero correlation leaves every phase optimal; keep the old one.
            if corr.norm() > 0.0 {
                phases[i] = corr.arg();
            }
        }
        trace.push(objective(&phases, &digital));
        digital = digital_step(&phases);
        let obj = objective(&phases, &digital);
        trace.push(obj);
        let decrease = (prev - obj) / prev;
        prev = obj;
        if decrease < opts.tolerance {
            break;
        }
    }

    let phase_matrix = DMatrix::from_fn(n_t, n_rf, |i, j| if owner[i] == j { phases[i] } else { 0.0 });
    let analog = AnalogNetwork::sps(phase_matrix, mask)?;
    Ok(Design { pair: BeamformerPair::new(analog, digital)?, trace, iterations, flags: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frob;
    use crate::metrics::approximation_residual;
    use crate::random::complex_gaussian_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn consistent_groups_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let bb = complex_gaussian_matrix(&mut rng, 2, 4);
        let f = CMat::from_fn(8, 4, |i, c| cis(0.7 * i as f64) * bb[(i / 4, c)]);
        let f = f.unscale(frob(&f) / 2.0);
        let d = sps_partial_altmin(&f, 2, &AltMinOptions::default()).unwrap();
        d.pair.analog.check().unwrap();
        assert!(approximation_residual(&f, &d.pair).unwrap() < 1e-9);
    }

    #[test]
    fn trace_is_monotone_with_uneven_groups() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let f = complex_gaussian_matrix(&mut rng, 11, 5);
            let d = sps_partial_raw(&f, 3, &AltMinOptions::default()).unwrap();
            assert!(d.trace.windows(2).all(|w| w[1] <= w[0] + 1e-10));
            let final_obj = frob_sq(&(&f - d.pair.product()));
            assert!((final_obj - d.trace.last().unwrap()).abs() < 1e-9 * final_obj);
        }
    }

    #[test]
    fn zero_rows_keep_their_phase() {
        let mut f = CMat::zeros(4, 2);
        f[(0, 0)] = C64::new(1.0, 0.0);
        let d = sps_partial_raw(&f, 2, &AltMinOptions::default()).unwrap();
        d.pair.analog.check().unwrap();
    }
}
