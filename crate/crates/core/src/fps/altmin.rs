use std::collections::BTreeMap;


use super::rows::{exhaustive_row, greedy_row, relaxed_start, RowProblem, EXHAUSTIVE_MAX_WIDTH};
use crate::channel::ChannelSet;
use crate::digital::{fully_digital_beamformer, fully_digital_combiners};
use crate::dps::principal_factors;
use crate::error::{Error, Result};
use crate::linalg::{frob_sq, lstsq, max_abs, CMat};
use crate::metrics::{normalize_design, spectral_efficiency_hybrid};
use crate::model::{
    AnalogNetwork, BeamformerPair, Connectivity, Design, HybridConfig, Implementation, Mapping, PhaseBank,
    SwitchMatrix,
};
use crate::sps::AltMinOptions;

/// One FPS design instance.
#[derive(Debug, Clone)]
pub struct FpsProblem {
    pub target: CMat,
    pub bank: PhaseBank,
    pub n_rf: usize,
    pub mask: Connectivity,
}

impl FpsProblem {
    pub fn new(target: CMat, bank: PhaseBank, mask: Connectivity) -> Result<Self> {
        if mask.n_t() != target.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "mask covers {} antennas, target has {}",
                mask.n_t(),
                target.nrows()
            )));
        }
        let n_rf = mask.n_rf();
        if n_rf == 0 || bank.is_empty() {
            return Err(Error::InvalidConfig("FPS needs N_c·N_RF >= 1".into()));
        }
        Ok(Self { target, bank, n_rf, mask })
    }

    pub fn fully(target: CMat, bank: PhaseBank, n_rf: usize) -> Result<Self> {
        let n_t = target.nrows();
        Self::new(target, bank, Connectivity::fully(n_t, n_rf))
    }
}

/// Uniform fixed phases `θ_i = 2π(i−1)/n_c`.
pub fn fps_bank_default(n_c: usize) -> Result<PhaseBank> {
    PhaseBank::uniform(n_c)
}

/// FPS AltMin, power-normalized.
pub fn fps_altmin(problem: &FpsProblem, opts: &AltMinOptions) -> Result<Design> {
    normalize_design(fps_altmin_raw(problem, opts)?)
}

/// Rows sharing the same set of reachable RF chains share their atom Gram matrix.
struct RowClass {
    chains: Vec<usize>,
    rows: Vec<usize>,
}

fn row_classes(mask: &Connectivity) -> Vec<RowClass> {
    let mut by_chains: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for i in 0..mask.n_t() {
        by_chains.entry(mask.chains_of(i)).or_default().push(i);
    }
    by_chains.into_iter().map(|(chains, rows)| RowClass { chains, rows }).collect()
}

/// Atom rows `c_n · F_BB(j,:)` for each reachable chain `j` and phase `n`.
fn atoms_for(chains: &[usize], bank_vec: &crate::linalg::CVec, digital: &CMat) -> CMat {
    let n_c = bank_vec.len();
    CMat::from_fn(chains.len() * n_c, digital.ncols(), |a, m| bank_vec[a % n_c] * digital[(chains[a / n_c], m)])
}

/// AltMin over `(S, F_BB)` without normalization.
///
/// The switch step updates each antenna row independently in ascending
/// order: exact enumeration when the row has at most
/// [`EXHAUSTIVE_MAX_WIDTH`] free bits, otherwise best-improvement bit flips
/// started from the rounded real relaxation and from the current row. A row
/// only changes when its objective strictly drops. The digital step is least
/// squares. The first switch step uses the principal components of the
/// target as the digital matrix.
pub fn fps_altmin_raw(problem: &FpsProblem, opts: &AltMinOptions) -> Result<Design> {
    opts.validate()?;
    let f_opt = &problem.target;
    let n_t = f_opt.nrows();
    let n_c = problem.bank.len();
    let n_rf = problem.n_rf;
    let bank_vec = problem.bank.vector();
    let c_mat = problem.bank.block_matrix(n_rf);
    let classes = row_classes(&problem.mask);

    let (u1, mut digital) = principal_factors(f_opt, n_rf)?;
    for j in 0..n_rf {
        let peak = max_abs(&u1.column(j));
        if peak > 0.0 {
            digital.row_mut(j).scale_mut(peak);
        }
    }

    let mut switches = SwitchMatrix::zeros(n_t, n_c * n_rf);
    let objective = |s: &SwitchMatrix, bb: &CMat| frob_sq(&(f_opt - s.to_complex() * &c_mat * bb));
    let floor = 1e-28 * frob_sq(f_opt);
    let mut trace = vec![objective(&switches, &digital)];
    let mut prev = trace[0];
    let mut iterations = 0;
    let mut flags = Vec::new();
    while iterations < opts.max_outer && prev > floor {
        iterations += 1;
        switch_step(f_opt, &classes, &bank_vec, &digital, &mut switches);
        if switches.active() == 0 {
            reseed(f_opt, &classes, &bank_vec, &digital, &mut switches);
            flags.push(format!("all switches open at iteration {iterations}; rows re-seeded"));
        }
        trace.push(objective(&switches, &digital));
        digital = lstsq(&(switches.to_complex() * &c_mat), f_opt)?;
        let obj = objective(&switches, &digital);
        trace.push(obj);
        let decrease = (prev - obj) / prev;
        prev = obj;
        if decrease < opts.tolerance {
            break;
        }
    }

    let analog = AnalogNetwork::fps(switches, problem.bank.clone(), problem.mask.clone())?;
    Ok(Design { pair: BeamformerPair::new(analog, digital)?, trace, iterations, flags })
}

fn switch_step(
    f_opt: &CMat,
    classes: &[RowClass],
    bank_vec: &crate::linalg::CVec,
    digital: &CMat,
    switches: &mut SwitchMatrix,
) {
    let n_c = bank_vec.len();
    for class in classes {
        let atoms = atoms_for(&class.chains, bank_vec, digital);
        let gram = RowProblem::gram_of(&atoms);
        let width = atoms.nrows();
        for &i in &class.rows {
            let p = RowProblem::new(&atoms, &gram, &f_opt.row(i).into_owned());
            let current: Vec<u8> = (0..width)
                .map(|a| switches.bits[(i, class.chains[a / n_c] * n_c + a % n_c)])
                .collect();
            let current_obj = p.objective(&current);
            let (bits, obj) = if width <= EXHAUSTIVE_MAX_WIDTH {
                exhaustive_row(&p)
            } else {
                greedy_row(&p, &[relaxed_start(&p), current.clone()])
            };
            if obj < current_obj {
                for (a, &b) in bits.iter().enumerate() {
                    switches.bits[(i, class.chains[a / n_c] * n_c + a % n_c)] = b;
                }
            }
        }
    }
}

/// Close the single most useful switch on every row.
fn reseed(
    f_opt: &CMat,
    classes: &[RowClass],
    bank_vec: &crate::linalg::CVec,
    digital: &CMat,
    switches: &mut SwitchMatrix,
) {
    let n_c = bank_vec.len();
    for class in classes {
        let atoms = atoms_for(&class.chains, bank_vec, digital);
        let gram = RowProblem::gram_of(&atoms);
        for &i in &class.rows {
            let p = RowProblem::new(&atoms, &gram, &f_opt.row(i).into_owned());
            let best = (0..atoms.nrows())
                .min_by(|&a, &b| {
                    let da = gram[(a, a)] - 2.0 * p.lin[a];
                    let db = gram[(b, b)] - 2.0 * p.lin[b];
                    da.total_cmp(&db).then(a.cmp(&b))
                })
                .unwrap_or(0);
            switches.bits[(i, class.chains[best / n_c] * n_c + best % n_c)] = 1;
        }
    }
}

fn side_mask(mapping: Mapping, n: usize, n_rf: usize) -> Result<Connectivity> {
    match mapping {
        Mapping::Fully => Ok(Connectivity::fully(n, n_rf)),
        Mapping::Partially => Connectivity::partial(n, n_rf),
        Mapping::Group(eta) => Connectivity::groups(n, n_rf, eta),
    }
}

/// Spectral efficiency of FPS transmit and receive designs for each bank
/// size in `n_c_list` (ascending), on one channel realization.
pub fn fps_saturation_sweep(
    channels: &ChannelSet,
    config: &HybridConfig,
    n_c_list: &[usize],
    snr_db: f64,
    opts: &AltMinOptions,
) -> Result<Vec<(usize, f64)>> {
    if n_c_list.is_empty() || n_c_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("bank sizes must be a nonempty ascending list".into()));
    }
    let f_opt = fully_digital_beamformer(channels, config.streams)?;
    let w_opt = fully_digital_combiners(channels, &f_opt, config.streams)?;
    n_c_list
        .iter()
        .map(|&n_c| {
            let cfg = HybridConfig { implementation: Implementation::Fps { n_c }, ..config.clone() };
            cfg.validate()?;
            let bank = fps_bank_default(n_c)?;
            let tx_mask = side_mask(cfg.mapping, cfg.n_t, cfg.n_rf_t)?;
            let tx = fps_altmin(&FpsProblem::new(f_opt.clone(), bank.clone(), tx_mask)?, opts)?;
            let rx: Vec<BeamformerPair> = w_opt
                .iter()
                .map(|w| {
                    let mask = side_mask(cfg.mapping, cfg.n_r, cfg.n_rf_r)?;
                    Ok(fps_altmin(&FpsProblem::new(w.clone(), bank.clone(), mask)?, opts)?.pair)
                })
                .collect::<Result<_>>()?;
            let se = spectral_efficiency_hybrid(channels, &tx.pair, &rx, cfg.streams, snr_db)?;
            Ok((n_c, se.mean))
        })
        .collect()
}
