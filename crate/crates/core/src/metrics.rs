//! Power normalization, approximation residual, and spectral efficiency.

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{frob, log2_det_hpd, CMat, C64};
use crate::model::{BeamformerPair, Design};

/// Diagonal loading applied when the interference-plus-noise matrix is singular.
pub const RIDGE: f64 = 1e-12;

/// Scale the digital matrix so that `‖F_RF·F_BB‖_F² = columns(F_BB)`, i.e. the
/// total power budget `K·N_s·F` of the stacked precoder.
pub fn power_normalize(pair: &BeamformerPair) -> Result<BeamformerPair> {
    let target = pair.digital.ncols() as f64;
    let norm = frob(&pair.product());
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::ZeroProduct);
    }
    let scale = target.sqrt() / norm;
    Ok(BeamformerPair { analog: pair.analog.clone(), digital: pair.digital.scale(scale) })
}

pub(crate) fn normalize_design(mut design: Design) -> Result<Design> {
    design.pair = power_normalize(&design.pair)?;
    Ok(design)
}

/// `‖F_opt − F_RF·F_BB‖_F`.
pub fn approximation_residual(f_opt: &CMat, pair: &BeamformerPair) -> Result<f64> {
    let prod = pair.product();
    if prod.shape() != f_opt.shape() {
        return Err(Error::DimensionMismatch(format!(
            "target is {:?} but the hybrid product is {:?}",
            f_opt.shape(),
            prod.shape()
        )));
    }
    Ok(frob(&(f_opt - prod)))
}

/// Achievable rate summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEfficiency {
    /// Mean over users and subcarriers, bits/s/Hz.
    pub mean: f64,
    /// Number of `(user, subcarrier)` evaluations that needed diagonal loading.
    pub ridged: usize,
}

/// Spectral efficiency of a precoder/combiner set.
///
/// `precoder` is `N_t × (K·N_s·F)`, user-major then subcarrier. `combiners[k]`
/// is `N_r × (N_s·F)` for user `k`. Gaussian signaling with equal power per
/// stream and unit noise variance; inter-user interference is treated as
/// colored noise through each combiner.
pub fn spectral_efficiency(
    channels: &ChannelSet,
    precoder: &CMat,
    combiners: &[CMat],
    streams: usize,
    snr_db: f64,
) -> Result<SpectralEfficiency> {
    let k_users = channels.users();
    let f_count = channels.subcarriers();
    let (n_r, n_t) = (channels.n_r(), channels.n_t());
    if precoder.nrows() != n_t || precoder.ncols() != k_users * streams * f_count {
        return Err(Error::DimensionMismatch(format!(
            "precoder {:?} vs N_t={n_t}, K·N_s·F={}",
            precoder.shape(),
            k_users * streams * f_count
        )));
    }
    if combiners.len() != k_users {
        return Err(Error::DimensionMismatch(format!("{} combiners for {k_users} users", combiners.len())));
    }
    for w in combiners {
        if w.nrows() != n_r || w.ncols() % f_count != 0 || w.ncols() == 0 {
            return Err(Error::DimensionMismatch(format!("combiner {:?} vs N_r={n_r}, F={f_count}", w.shape())));
        }
    }

    let rho = 10f64.powf(snr_db / 10.0);
    let gain = rho / (k_users * streams) as f64;
    let mut total = 0.0;
    let mut ridged = 0;
    for k in 0..k_users {
        let w_width = combiners[k].ncols() / f_count;
        for f in 0..f_count {
            let w = combiners[k].columns(f * w_width, w_width);
            let wh_h = w.adjoint() * channels.get(k, f);
            let mut noise = w.adjoint() * w;
            let mut signal = CMat::zeros(w_width, w_width);
            for j in 0..k_users {
                let fj = precoder.columns((j * f_count + f) * streams, streams);
                let eff = &wh_h * fj;
                let cov = (&eff * eff.adjoint()).scale(gain);
                if j == k {
                    signal += cov;
                } else {
                    noise += cov;
                }
            }
            let (rate, used_ridge) = log_det_ratio(&(&noise + &signal), &noise);
            ridged += usize::from(used_ridge);
            total += rate.max(0.0);
        }
    }
    Ok(SpectralEfficiency { mean: total / (k_users * f_count) as f64, ridged })
}

/// `log2 det(num) − log2 det(den)`, loading both diagonals when `den` is singular.
fn log_det_ratio(num: &CMat, den: &CMat) -> (f64, bool) {
    if let (Some(a), Some(b)) = (log2_det_hpd(num), log2_det_hpd(den)) {
        if a.is_finite() && b.is_finite() {
            return (a - b, false);
        }
    }
    let n = den.nrows();
    let mut eps = RIDGE;
    loop {
        let load = CMat::identity(n, n) * C64::new(eps, 0.0);
        if let (Some(a), Some(b)) = (log2_det_hpd(&(num + &load)), log2_det_hpd(&(den + &load))) {
            return (a - b, true);
        }
        eps *= 10.0;
    }
}

/// Spectral efficiency of hybrid transmit and per-user receive pairs.
pub fn spectral_efficiency_hybrid(
    channels: &ChannelSet,
    tx: &BeamformerPair,
    rx: &[BeamformerPair],
    streams: usize,
    snr_db: f64,
) -> Result<SpectralEfficiency> {
    let combiners: Vec<CMat> = rx.iter().map(BeamformerPair::product).collect();
    spectral_efficiency(channels, &tx.product(), &combiners, streams, snr_db)
}
