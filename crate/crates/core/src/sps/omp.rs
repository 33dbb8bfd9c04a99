use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::{frob, lstsq, CMat, CVec};
use crate::metrics::normalize_design;
use crate::model::{AnalogNetwork, BeamformerPair, Connectivity, Design};

use super::phases_of;

/// Candidate analog beams for OMP: unit-norm columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OmpCodebook {
    candidates: CMat,
}

impl OmpCodebook {
    pub fn new(candidates: CMat) -> Result<Self> {
        if candidates.ncols() == 0 {
            return Err(Error::InvalidConfig("empty OMP codebook".into()));
        }
        for (l, c) in candidates.column_iter().enumerate() {
            if (c.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidConfig(format!("codebook column {l} is not unit norm")));
            }
        }
        Ok(Self { candidates })
    }

    pub fn from_responses(responses: &[CVec]) -> Result<Self> {
        if responses.is_empty() {
            return Err(Error::InvalidConfig("empty OMP codebook".into()));
        }
        Self::new(CMat::from_columns(responses))
    }

    /// Append an `oversample·N`-point DFT grid of steering vectors.
    pub fn with_dft_grid(self, oversample: usize) -> Result<Self> {
        let n = self.candidates.nrows();
        let points = oversample.max(1) * n;
        let grid = CMat::from_fn(n, points, |i, p| {
            crate::linalg::cis(std::f64::consts::TAU * (i * p) as f64 / points as f64) / (n as f64).sqrt()
        });
        let mut all = CMat::zeros(n, self.len() + points);
        all.columns_mut(0, self.len()).copy_from(&self.candidates);
        all.columns_mut(self.len(), points).copy_from(&grid);
        Self::new(all)
    }

    /// The codebook seen by a subset of antenna rows, columns renormalized.
    pub fn restrict(&self, rows: std::ops::Range<usize>) -> Result<Self> {
        let mut sub = self.candidates.rows(rows.start, rows.len()).into_owned();
        for mut c in sub.column_iter_mut() {
            let n = c.norm();
            if n > 0.0 {
                c.unscale_mut(n);
            }
        }
        Self::new(sub)
    }

    pub fn len(&self) -> usize {
        self.candidates.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.ncols() == 0
    }

    pub fn candidates(&self) -> &CMat {
        &self.candidates
    }
}

/// OMP hybrid precoder, power-normalized.
pub fn omp_hybrid(f_opt: &CMat, codebook: &OmpCodebook, n_rf: usize) -> Result<Design> {
    normalize_design(omp_raw(f_opt, codebook, n_rf)?)
}

/// OMP without the final power normalization.
///
/// Each round picks the candidate with the largest correlation energy
/// against the residual, refits `F_BB` by least squares, and renormalizes the
/// residual. The chosen atoms are then projected entrywise onto the unit
/// circle and `F_BB` refit once more.
pub fn omp_raw(f_opt: &CMat, codebook: &OmpCodebook, n_rf: usize) -> Result<Design> {
    let n_t = f_opt.nrows();
    let atoms = codebook.candidates();
    if atoms.nrows() != n_t {
        return Err(Error::DimensionMismatch(format!(
            "codebook has {} rows, target has {n_t}",
            atoms.nrows()
        )));
    }
    if codebook.len() < n_rf {
        return Err(Error::InvalidConfig(format!(
            "codebook with {} candidates cannot fill {n_rf} RF chains",
            codebook.len()
        )));
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(n_rf);
    let mut residual = f_opt.clone();
    for _ in 0..n_rf {
        let corr = atoms.adjoint() * &residual;
        let mut best = 0;
        let mut best_energy = f64::NEG_INFINITY;
        for (l, row) in corr.row_iter().enumerate() {
            let e = row.norm_squared();
            if e > best_energy {
                best = l;
                best_energy = e;
            }
        }
        chosen.push(best);
        let f_rf = CMat::from_columns(&chosen.iter().map(|&l| atoms.column(l)).collect::<Vec<_>>());
        let f_bb = lstsq(&f_rf, f_opt)?;
        residual = f_opt - &f_rf * f_bb;
        let n = frob(&residual);
        if n > 0.0 {
            residual.unscale_mut(n);
        }
    }
    let mut flags = Vec::new();
    let distinct: BTreeSet<usize> = chosen.iter().copied().collect();
    if distinct.len() < chosen.len() {
        flags.push(format!("repeated codebook atoms selected: {chosen:?}"));
    }
    let selected = CMat::from_columns(&chosen.iter().map(|&l| atoms.column(l)).collect::<Vec<_>>());
    let analog = AnalogNetwork::sps(phases_of(&selected), Connectivity::fully(n_t, n_rf))?;
    let digital = lstsq(analog.matrix(), f_opt)?;
    Ok(Design { pair: BeamformerPair::new(analog, digital)?, trace: Vec::new(), iterations: n_rf, flags })
}
