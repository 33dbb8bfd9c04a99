//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix, DVector, Dim, Matrix, RawStorage, SymmetricEigen, SVD};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Relative threshold below which singular values are treated as zero.
pub const RANK_EPS: f64 = 1e-12;

#[inline]
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

pub fn frob_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn frob(m: &CMat) -> f64 {
    frob_sq(m).sqrt()
}

/// Real part of the Frobenius inner product `tr(a^H b)`.
pub fn re_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Thin SVD with singular values in descending order.
pub struct ThinSvd {
    pub u: CMat,
    pub singular_values: Vec<f64>,
    pub v_h: CMat,
}

pub fn thin_svd(m: &CMat) -> Result<ThinSvd> {
    let svd = SVD::try_new(m.clone(), true, true, f64::EPSILON * 5.0, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let SVD { u, v_t, singular_values } = svd;
    let (u, v_t) = (u.expect("u requested"), v_t.expect("v requested"));
    let mut order: Vec<usize> = (0..singular_values.len()).collect();
    order.sort_by(|&a, &b| singular_values[b].total_cmp(&singular_values[a]).then(a.cmp(&b)));
    Ok(ThinSvd {
        u: CMat::from_columns(&order.iter().map(|&i| u.column(i)).collect::<Vec<_>>()),
        singular_values: order.iter().map(|&i| singular_values[i]).collect(),
        v_h: CMat::from_rows(&order.iter().map(|&i| v_t.row(i)).collect::<Vec<_>>()),
    })
}

pub fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON * 5.0, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Moore-Penrose pseudoinverse with a relative singular-value cutoff.
pub fn pinv(m: &CMat) -> Result<CMat> {
    if m.is_empty() {
        return Ok(CMat::zeros(m.ncols(), m.nrows()));
    }
    let svd = thin_svd(m)?;
    let smax = svd.singular_values.first().copied().unwrap_or(0.0);
    let cutoff = smax * RANK_EPS * (m.nrows().max(m.ncols()) as f64);
    let k = svd.singular_values.len();
    let mut out = CMat::zeros(m.ncols(), m.nrows());
    for i in 0..k {
        let s = svd.singular_values[i];
        if s <= cutoff || s == 0.0 {
            continue;
        }
        let v = svd.v_h.row(i).adjoint();
        let u_h = svd.u.column(i).adjoint();
        out += (v * u_h).unscale(s);
    }
    Ok(out)
}

/// Least-squares solution `pinv(a) * b`.
pub fn lstsq(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "least squares with {} and {} rows",
            a.nrows(),
            b.nrows()
        )));
    }
    Ok(pinv(a)? * b)
}

/// Largest eigenpair of a Hermitian matrix. Ties resolve to the lowest index.
pub fn principal_eigh(h: &CMat) -> (f64, CVec) {
    let n = h.nrows();
    if n == 1 {
        return (h[(0, 0)].re, CVec::from_element(1, C64::new(1.0, 0.0)));
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut best = 0;
    for i in 1..n {
        if eig.eigenvalues[i] > eig.eigenvalues[best] {
            best = i;
        }
    }
    (eig.eigenvalues[best], eig.eigenvectors.column(best).into_owned())
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn lambda_max(h: &CMat) -> f64 {
    principal_eigh(h).0
}

/// `log2 det(a)` for a Hermitian positive-definite matrix. Returns `None`
/// when the Cholesky factorization fails.
pub fn log2_det_hpd(a: &CMat) -> Option<f64> {
    let sym = (a + a.adjoint()).scale(0.5);
    let chol = sym.cholesky()?;
    let l = chol.l_dirty();
    Some((0..a.nrows()).map(|i| 2.0 * l[(i, i)].re.log2()).sum())
}

/// Orthonormal basis of the null space of `m` (columns), using the right
/// singular vectors whose singular values fall below the rank cutoff.
pub fn null_space(m: &CMat) -> Result<CMat> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return Ok(CMat::identity(n, n));
    }
    // Pad to a square-or-tall matrix so the SVD returns a full right basis.
    let padded = if m.nrows() < n {
        let mut p = CMat::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = thin_svd(&padded)?;
    let smax = svd.singular_values.first().copied().unwrap_or(0.0);
    let cutoff = smax * 1e-10;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let cols: Vec<CVec> = (rank..n).map(|i| svd.v_h.row(i).adjoint()).collect();
    if cols.is_empty() {
        return Ok(CMat::zeros(n, 0));
    }
    Ok(CMat::from_columns(&cols))
}

pub fn max_abs<R: Dim, C: Dim, S: RawStorage<C64, R, C>>(m: &Matrix<C64, R, C, S>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
