//! Unconstrained (fully digital) precoders and combiners.

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{null_space, thin_svd, CMat, C64};

/// Regularization of the fallback interference projection.
const FALLBACK_LOADING: f64 = 1.0;

/// Fully digital precoder `F_opt`, `N_t × (K·N_s·F)`, user-major then subcarrier.
///
/// Single-user: the `N_s` dominant right singular vectors per subcarrier.
/// Multiuser: block diagonalization, projecting each user onto the null
/// space of the other users' channels before the SVD, with a regularized
/// projection when that null space has fewer than `N_s` dimensions. Every
/// column has unit norm, so `‖F_opt‖_F² = K·N_s·F`.
pub fn fully_digital_beamformer(channels: &ChannelSet, streams: usize) -> Result<CMat> {
    let k_users = channels.users();
    let f_count = channels.subcarriers();
    let n_t = channels.n_t();
    if streams == 0 {
        return Err(Error::InvalidConfig("need at least one stream".into()));
    }
    let mut out = CMat::zeros(n_t, k_users * streams * f_count);
    for k in 0..k_users {
        for f in 0..f_count {
            let h = channels.get(k, f);
            let block = if k_users == 1 {
                dominant_right(h, streams, k, f)?
            } else {
                let others = stack_others(channels, k, f);
                let basis = null_space(&others)?;
                if basis.ncols() >= streams {
                    let v = dominant_right(&(h * &basis), streams, k, f)?;
                    &basis * v
                } else {
                    regularized_block(h, &others, streams, k, f)?
                }
            };
            out.columns_mut((k * f_count + f) * streams, streams).copy_from(&block);
        }
    }
    Ok(out)
}

fn stack_others(channels: &ChannelSet, k: usize, f: usize) -> CMat {
    let n_r = channels.n_r();
    let others: Vec<usize> = (0..channels.users()).filter(|&j| j != k).collect();
    let mut m = CMat::zeros(others.len() * n_r, channels.n_t());
    for (row, &j) in others.iter().enumerate() {
        m.rows_mut(row * n_r, n_r).copy_from(channels.get(j, f));
    }
    m
}

fn dominant_right(h: &CMat, streams: usize, k: usize, f: usize) -> Result<CMat> {
    let svd = thin_svd(h)?;
    check_rank(&svd.singular_values, streams, k, f)?;
    Ok(svd.v_h.rows(0, streams).adjoint())
}

fn check_rank(sv: &[f64], streams: usize, k: usize, f: usize) -> Result<()> {
    let smax = sv.first().copied().unwrap_or(0.0);
    let usable = sv.iter().filter(|&&s| s > smax * 1e-10 && s > 0.0).count();
    if usable < streams {
        return Err(Error::RankDeficient(format!(
            "user {k}, subcarrier {f}: {streams} streams requested but usable rank is {usable}"
        )));
    }
    Ok(())
}

fn regularized_block(h: &CMat, others: &CMat, streams: usize, k: usize, f: usize) -> Result<CMat> {
    let n_t = h.ncols();
    let rows = others.nrows();
    let gram = others * others.adjoint() + CMat::identity(rows, rows) * C64::new(FALLBACK_LOADING, 0.0);
    let inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular regularized Gram matrix".into()))?;
    let proj = CMat::identity(n_t, n_t) - others.adjoint() * inv * others;
    let v = dominant_right(&(h * &proj), streams, k, f)?;
    let q = (&proj * v).qr().q();
    Ok(q.columns(0, streams).into_owned())
}

/// Per-user fully digital combiners, `N_r × (N_s·F)` each: the dominant left
/// singular vectors of the effective channel `H_{k,f}·F_opt[k,f]`.
pub fn fully_digital_combiners(channels: &ChannelSet, f_opt: &CMat, streams: usize) -> Result<Vec<CMat>> {
    let f_count = channels.subcarriers();
    (0..channels.users())
        .map(|k| {
            let mut w = CMat::zeros(channels.n_r(), streams * f_count);
            for f in 0..f_count {
                let fk = f_opt.columns((k * f_count + f) * streams, streams);
                let eff = channels.get(k, f) * fk;
                let svd = thin_svd(&eff)?;
                check_rank(&svd.singular_values, streams, k, f)?;
                w.columns_mut(f * streams, streams).copy_from(&svd.u.columns(0, streams));
            }
            Ok(w)
        })
        .collect()
}
