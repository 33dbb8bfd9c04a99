//! Group-connected mapping: `η` independent fully-connected blocks.

use nalgebra::DMatrix;

use crate::dps::dps_full_solve;
use crate::error::{Error, Result};
use crate::fps::{fps_altmin, fps_altmin_raw, FpsProblem};
use crate::linalg::CMat;
use crate::metrics::normalize_design;
use crate::model::{
    contiguous_partition, AnalogNetwork, AnalogPayload, BeamformerPair, Connectivity, Design, PhaseBank,
    SwitchMatrix,
};
use crate::sps::{mo_altmin, mo_altmin_raw, omp_hybrid, omp_raw, pe_relaxation, pe_relaxation_raw, AltMinOptions, OmpCodebook};

/// Fully-connected algorithm run inside each block.
#[derive(Debug, Clone)]
pub enum InnerSolver {
    /// The codebook spans all `N_t` antennas; each block uses its rows.
    Omp(OmpCodebook),
    MoAltMin(AltMinOptions),
    PeRelaxation,
    DpsFull,
    Fps { bank: PhaseBank, opts: AltMinOptions },
}

impl InnerSolver {
    fn solve(&self, f_opt: &CMat, n_rf: usize) -> Result<Design> {
        match self {
            Self::Omp(cb) => omp_hybrid(f_opt, cb, n_rf),
            Self::MoAltMin(o) => mo_altmin(f_opt, n_rf, o),
            Self::PeRelaxation => pe_relaxation(f_opt, n_rf),
            Self::DpsFull => dps_full_solve(f_opt, n_rf),
            Self::Fps { bank, opts } => fps_altmin(&FpsProblem::fully(f_opt.clone(), bank.clone(), n_rf)?, opts),
        }
    }

    fn solve_block(&self, f_opt: &CMat, rows: std::ops::Range<usize>, n_rf: usize) -> Result<Design> {
        let sub = f_opt.rows(rows.start, rows.len()).into_owned();
        match self {
            Self::Omp(cb) => omp_raw(&sub, &cb.restrict(rows)?, n_rf),
            Self::MoAltMin(o) => mo_altmin_raw(&sub, n_rf, o),
            Self::PeRelaxation => pe_relaxation_raw(&sub, n_rf),
            Self::DpsFull => dps_full_solve(&sub, n_rf),
            Self::Fps { bank, opts } => fps_altmin_raw(&FpsProblem::fully(sub, bank.clone(), n_rf)?, opts),
        }
    }
}

/// Solve each of the `η` contiguous antenna/RF-chain blocks independently,
/// then assemble a block-diagonal analog matrix and a stacked digital matrix
/// normalized once for the whole array. `η = 1` is the inner solver itself.
pub fn group_connected_solve(f_opt: &CMat, n_rf: usize, eta: usize, inner: &InnerSolver) -> Result<Design> {
    let n_t = f_opt.nrows();
    let mask = Connectivity::groups(n_t, n_rf, eta)?;
    if eta == 1 {
        return inner.solve(f_opt, n_rf);
    }
    let row_blocks = contiguous_partition(n_t, eta);
    let chain_blocks = contiguous_partition(n_rf, eta);
    let designs = row_blocks
        .iter()
        .zip(&chain_blocks)
        .map(|(r, c)| inner.solve_block(f_opt, r.clone(), c.len()))
        .collect::<Result<Vec<_>>>()?;

    let mut digital = CMat::zeros(n_rf, f_opt.ncols());
    let mut flags = Vec::new();
    let mut trace = Vec::new();
    let mut iterations = 0;
    for (b, (d, c)) in designs.iter().zip(&chain_blocks).enumerate() {
        digital.rows_mut(c.start, c.len()).copy_from(&d.pair.digital);
        flags.extend(d.flags.iter().map(|f| format!("block {b}: {f}")));
        iterations = iterations.max(d.iterations);
        if let Some(&last) = d.trace.last() {
            trace.push(last);
        }
    }
    // Blocks are independent, so only the summed final objective is meaningful.
    let trace = if trace.len() == designs.len() { vec![trace.iter().sum()] } else { Vec::new() };
    let analog = assemble(&designs, &row_blocks, &chain_blocks, n_t, n_rf, mask)?;
    normalize_design(Design { pair: BeamformerPair::new(analog, digital)?, trace, iterations, flags })
}

fn assemble(
    designs: &[Design],
    rows: &[std::ops::Range<usize>],
    chains: &[std::ops::Range<usize>],
    n_t: usize,
    n_rf: usize,
    mask: Connectivity,
) -> Result<AnalogNetwork> {
    let place = |get: &dyn Fn(&AnalogPayload) -> Option<DMatrix<f64>>| -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(n_t, n_rf);
        for ((d, r), c) in designs.iter().zip(rows).zip(chains) {
            let block = get(d.pair.analog.payload())
                .ok_or_else(|| Error::Numerical("blocks returned mixed implementations".into()))?;
            out.view_mut((r.start, c.start), (r.len(), c.len())).copy_from(&block);
        }
        Ok(out)
    };
    match designs[0].pair.analog.payload() {
        AnalogPayload::Sps { .. } => {
            let phases = place(&|p| match p {
                AnalogPayload::Sps { phases } => Some(phases.clone()),
                _ => None,
            })?;
            AnalogNetwork::sps(phases, mask)
        }
        AnalogPayload::Dps { .. } => {
            let mut entries = CMat::zeros(n_t, n_rf);
            for ((d, r), c) in designs.iter().zip(rows).zip(chains) {
                entries.view_mut((r.start, c.start), (r.len(), c.len())).copy_from(d.pair.analog.matrix());
            }
            AnalogNetwork::dps(&entries, mask)
        }
        AnalogPayload::Fps { bank, .. } => {
            let n_c = bank.len();
            let mut switches = SwitchMatrix::zeros(n_t, n_c * n_rf);
            for ((d, r), c) in designs.iter().zip(rows).zip(chains) {
                let AnalogPayload::Fps { switches: s, .. } = d.pair.analog.payload() else {
                    return Err(Error::Numerical("blocks returned mixed implementations".into()));
                };
                switches.bits.view_mut((r.start, c.start * n_c), (r.len(), c.len() * n_c)).copy_from(&s.bits);
            }
            AnalogNetwork::fps(switches, bank.clone(), mask)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frob;
    use crate::metrics::approximation_residual;
    use crate::random::complex_gaussian_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn target(seed: u64, n_t: usize, cols: usize) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = complex_gaussian_matrix(&mut rng, n_t, cols);
        f.scale((cols as f64).sqrt() / frob(&f))
    }

    fn solvers() -> Vec<InnerSolver> {
        vec![
            InnerSolver::MoAltMin(AltMinOptions { seed: 9, ..Default::default() }),
            InnerSolver::PeRelaxation,
            InnerSolver::DpsFull,
            InnerSolver::Fps { bank: PhaseBank::uniform(4).unwrap(), opts: AltMinOptions::default() },
        ]
    }

    #[test]
    fn eta_one_is_the_inner_solver() {
        let f = target(1, 8, 3);
        for s in solvers() {
            let whole = s.solve(&f, 4).unwrap();
            let grouped = group_connected_solve(&f, 4, 1, &s).unwrap();
            assert_eq!(whole.pair, grouped.pair);
        }
    }

    #[test]
    fn blocks_respect_the_group_mask() {
        let f = target(2, 8, 3);
        let mask = Connectivity::groups(8, 4, 2).unwrap();
        for s in solvers() {
            let d = group_connected_solve(&f, 4, 2, &s).unwrap();
            d.pair.analog.check().unwrap();
            assert_eq!(d.pair.analog.mask(), &mask);
            assert!((frob(&d.pair.product()) - 3f64.sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn eta_equal_to_chains_gives_partial_mask() {
        let f = target(3, 8, 2);
        let d = group_connected_solve(&f, 4, 4, &InnerSolver::PeRelaxation).unwrap();
        assert_eq!(d.pair.analog.mask(), &Connectivity::partial(8, 4).unwrap());
    }

    #[test]
    fn dps_grouping_never_beats_the_whole_array() {
        for seed in 0..20 {
            let f = target(seed, 8, 4);
            let whole = group_connected_solve(&f, 4, 1, &InnerSolver::DpsFull).unwrap();
            let half = group_connected_solve(&f, 4, 2, &InnerSolver::DpsFull).unwrap();
            let a = approximation_residual(&f, &crate::metrics::power_normalize(&whole.pair).unwrap()).unwrap();
            let b = approximation_residual(&f, &half.pair).unwrap();
            assert!(b >= a - 1e-10, "seed {seed}: {b} < {a}");
        }
    }

    #[test]
    fn omp_blocks_use_their_codebook_rows() {
        let f = target(4, 8, 2);
        let cb = OmpCodebook::with_dft_grid(
            OmpCodebook::new(CMat::from_element(8, 1, crate::linalg::C64::new(8f64.sqrt().recip(), 0.0))).unwrap(),
            2,
        )
        .unwrap();
        let d = group_connected_solve(&f, 4, 2, &InnerSolver::Omp(cb)).unwrap();
        d.pair.analog.check().unwrap();
    }

    #[test]
    fn mismatched_groups_are_rejected() {
        let f = target(5, 8, 2);
        assert!(group_connected_solve(&f, 4, 3, &InnerSolver::DpsFull).is_err());
    }
}
