//! Monte-Carlo execution of an experiment specification.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use super::results::{aggregate, ExperimentResult, Outcome, ResultRow, TrialLabel};
use super::spec::{AlgorithmId, AlgorithmSpec, ExperimentSpec, SweepPoint};
use crate::channel::{generate_channels, ChannelParams, ChannelSet};
use crate::digital::{fully_digital_beamformer, fully_digital_combiners};
use crate::dps::{dps_partial_solve, dynamic_mapping_greedy, dynamic_mapping_kmeans, MappingSets};
use crate::error::{Error, Result};
use crate::fps::fps_bank_default;
use crate::group::{group_connected_solve, InnerSolver};
use crate::linalg::{CMat, CVec};
use crate::metrics::{approximation_residual, power_normalize, spectral_efficiency, spectral_efficiency_hybrid};
use crate::model::{digital_bill, hardware_bill, BeamformerPair, Design, HardwareBill, Implementation, Mapping};
use crate::random::{derive_seed, label_stream};
use crate::sps::{sps_partial_altmin, AltMinOptions, OmpCodebook};

/// Evaluate the base configuration; any sweep section is ignored.
pub fn run(spec: &ExperimentSpec, threads: usize) -> Result<ExperimentResult> {
    execute(spec, false, threads)
}

/// Evaluate every point of the sweep section, pairing channels across points.
pub fn sweep(spec: &ExperimentSpec, threads: usize) -> Result<ExperimentResult> {
    if spec.sweep.is_none() {
        return Err(Error::InvalidConfig("spec has no sweep section".into()));
    }
    execute(spec, true, threads)
}

/// Position of a trial row in the aggregation: algorithm, sweep point, SNR.
type Key = (usize, usize, usize);

fn execute(spec: &ExperimentSpec, with_sweep: bool, threads: usize) -> Result<ExperimentResult> {
    spec.validate()?;
    let points = spec.points(with_sweep)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let per_trial: Vec<Vec<(Key, ResultRow)>> =
        pool.install(|| (0..spec.trials).into_par_iter().map(|t| run_trial(spec, &points, t)).collect());

    let mut groups: BTreeMap<Key, Vec<&ResultRow>> = BTreeMap::new();
    for (key, row) in per_trial.iter().flatten() {
        groups.entry(*key).or_default().push(row);
    }
    let aggregates: Vec<ResultRow> = groups.values().flat_map(|g| aggregate(g)).collect();
    let mut rows: Vec<ResultRow> = per_trial.into_iter().flatten().map(|(_, r)| r).collect();
    rows.extend(aggregates);
    Ok(ExperimentResult { rows })
}

struct Trial {
    channels: ChannelSet,
    f_opt: CMat,
    w_opt: Vec<CMat>,
}

fn prepare(spec: &ExperimentSpec, trial_seed: u64) -> Result<Trial> {
    let params = ChannelParams { seed: trial_seed, ..spec.channel.clone() };
    let channels = generate_channels(&params, &spec.tx_array, &spec.rx_array, spec.system.users)?;
    let f_opt = fully_digital_beamformer(&channels, spec.system.streams)?;
    let w_opt = fully_digital_combiners(&channels, &f_opt, spec.system.streams)?;
    Ok(Trial { channels, f_opt, w_opt })
}

fn run_trial(spec: &ExperimentSpec, points: &[SweepPoint], trial: usize) -> Vec<(Key, ResultRow)> {
    let trial_seed = derive_seed(spec.seed, trial as u64);
    let prepared = prepare(spec, trial_seed);
    let mut rows = Vec::new();
    for (a, alg) in spec.algorithms.iter().enumerate() {
        let alg_seed = derive_seed(trial_seed, label_stream(alg.id.name()));
        for (p, point) in points.iter().enumerate() {
            let (structure, bill) = describe(alg.id, point);
            let evaluated = prepared.as_ref().map_err(Clone::clone).and_then(|t| {
                evaluate(alg, point, t, alg_seed, spec.system.streams, spec.output.timing)
            });
            for (s, &snr_db) in point.snr_db.iter().enumerate() {
                let outcome = match &evaluated {
                    Ok(ev) => match (ev.se)(snr_db) {
                        Ok(se) => Outcome::Ok { se, residual: ev.residual, iters: ev.iters as f64, ms: ev.ms },
                        Err(e) => Outcome::Failed(e.tag().into()),
                    },
                    Err(e) => Outcome::Failed(e.tag().into()),
                };
                let row = ResultRow {
                    algorithm: alg.id.name().into(),
                    structure: structure.clone(),
                    sweep: point.value,
                    snr_db,
                    trial: TrialLabel::Index(trial),
                    outcome,
                    phase_shifters: bill.phase_shifters,
                    switches: bill.switches,
                };
                rows.push(((a, p, s), row));
            }
        }
    }
    rows
}

fn describe(id: AlgorithmId, point: &SweepPoint) -> (String, HardwareBill) {
    match id.structure(point.structure.eta, point.structure.n_c) {
        None => ("digital".into(), digital_bill(&point.system.config(Implementation::Sps, Mapping::Fully))),
        Some((implementation, mapping)) => {
            let cfg = point.system.config(implementation, mapping);
            (format!("{implementation}-{mapping}"), hardware_bill(&cfg))
        }
    }
}

struct Evaluation<'a> {
    se: Box<dyn Fn(f64) -> Result<f64> + 'a>,
    residual: f64,
    iters: usize,
    ms: f64,
}

fn evaluate<'a>(
    alg: &AlgorithmSpec,
    point: &SweepPoint,
    trial: &'a Trial,
    seed: u64,
    streams: usize,
    timing: bool,
) -> Result<Evaluation<'a>> {
    if alg.id == AlgorithmId::FullyDigital {
        return Ok(Evaluation {
            se: Box::new(move |snr| Ok(spectral_efficiency(&trial.channels, &trial.f_opt, &trial.w_opt, streams, snr)?.mean)),
            residual: 0.0,
            iters: 0,
            ms: 0.0,
        });
    }
    let start = Instant::now();
    let sys = &point.system;
    let tx_design = design(alg, &trial.f_opt, sys.n_rf_t, point, &trial.channels.tx_responses(), seed)?;
    let tx = power_normalize(&tx_design.pair)?;
    let rx: Vec<BeamformerPair> = trial
        .w_opt
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let responses = trial.channels.rx_responses(k);
            Ok(design(alg, w, sys.n_rf_r, point, &responses, derive_seed(seed, k as u64 + 1))?.pair)
        })
        .collect::<Result<_>>()?;
    let ms = if timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
    let residual = approximation_residual(&trial.f_opt, &tx)?;
    Ok(Evaluation {
        se: Box::new(move |snr| Ok(spectral_efficiency_hybrid(&trial.channels, &tx, &rx, streams, snr)?.mean)),
        residual,
        iters: tx_design.iterations,
        ms,
    })
}

/// Design one side (transmit precoder or one user's combiner) with `alg`.
fn design(
    alg: &AlgorithmSpec,
    target: &CMat,
    n_rf: usize,
    point: &SweepPoint,
    responses: &[CVec],
    seed: u64,
) -> Result<Design> {
    let opts = AltMinOptions { seed, ..alg.altmin };
    let eta = point.structure.eta;
    let grouped = |inner: InnerSolver| group_connected_solve(target, n_rf, eta, &inner);
    match alg.id {
        AlgorithmId::FullyDigital => unreachable!("handled by the caller"),
        AlgorithmId::Omp => {
            let mut book = OmpCodebook::from_responses(responses)?;
            if alg.oversample > 0 {
                book = book.with_dft_grid(alg.oversample)?;
            }
            grouped(InnerSolver::Omp(book))
        }
        AlgorithmId::MoAltMin => grouped(InnerSolver::MoAltMin(opts)),
        AlgorithmId::PeRelaxation => grouped(InnerSolver::PeRelaxation),
        AlgorithmId::DpsFull => grouped(InnerSolver::DpsFull),
        AlgorithmId::Fps => grouped(InnerSolver::Fps { bank: fps_bank_default(point.structure.n_c)?, opts }),
        AlgorithmId::SpsPartial => sps_partial_altmin(target, n_rf, &opts),
        AlgorithmId::DpsPartialFixed => dps_partial_solve(target, &MappingSets::fixed(target.nrows(), n_rf)?),
        AlgorithmId::DpsPartialGreedy => dps_partial_solve(target, &dynamic_mapping_greedy(target, n_rf)?),
        AlgorithmId::DpsPartialKmeans => {
            let outcome = dynamic_mapping_kmeans(target, n_rf, &alg.kmeans)?;
            let mut d = dps_partial_solve(target, &outcome.mapping)?;
            d.iterations = outcome.sweeps;
            Ok(d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = "
        system.n_t = 8
        system.n_r = 4
        system.streams = 1
        system.n_rf_t = 2
        system.n_rf_r = 2
        experiment.algorithms = fully-digital, dps-full, mo-altmin, fps, dps-partial-kmeans
        experiment.snr_db = -5, 5
        experiment.trials = 3
        experiment.seed = 11
        output.timing = false
        algo.mo-altmin.max_outer = 10
    ";

    #[test]
    fn fully_digital_passthrough() {
        let spec = ExperimentSpec::parse(&SPEC.replace("experiment.trials = 3", "experiment.trials = 1")).unwrap();
        let res = run(&spec, 1).unwrap();
        let t = prepare(&spec, derive_seed(11, 0)).unwrap();
        let direct = spectral_efficiency(&t.channels, &t.f_opt, &t.w_opt, 1, 5.0).unwrap().mean;
        let row = res.rows.iter().find(|r| r.algorithm == "fully-digital" && r.snr_db == 5.0).unwrap();
        assert_eq!(row.se(), Some(direct));
    }

    #[test]
    fn row_layout_and_aggregates() {
        let spec = ExperimentSpec::parse(SPEC).unwrap();
        let res = run(&spec, 2).unwrap();
        // 3 trials × 5 algorithms × 2 SNRs, then mean and stderr per group.
        assert_eq!(res.rows.len(), 30 + 20);
        assert!(res.rows[..30].windows(2).all(|w| w[0].trial <= w[1].trial));
        assert!(res.rows.iter().all(|r| r.se().is_some_and(|s| s >= 0.0)));
        assert_eq!(res.rows[0].structure, "digital");
        let fps = res.rows.iter().find(|r| r.algorithm == "fps").unwrap();
        assert_eq!(fps.structure, "FPS10-fully");
        assert_eq!((fps.phase_shifters, fps.switches), (10, 160));
    }

    #[test]
    fn identical_across_thread_counts() {
        let spec = ExperimentSpec::parse(SPEC).unwrap();
        assert_eq!(run(&spec, 1).unwrap().to_csv(), run(&spec, 4).unwrap().to_csv());
    }

    #[test]
    fn sweep_requires_a_sweep_section() {
        let spec = ExperimentSpec::parse(SPEC).unwrap();
        assert_eq!(sweep(&spec, 1).unwrap_err().tag(), "invalid-config");
    }

    #[test]
    fn sweep_shares_channels_across_points() {
        let text = format!("{SPEC}\nsweep.variable = eta\nsweep.values = 1, 2");
        let spec = ExperimentSpec::parse(&text.replace(", dps-partial-kmeans", "")).unwrap();
        let res = sweep(&spec, 2).unwrap();
        let digital: Vec<_> = res
            .rows
            .iter()
            .filter(|r| r.algorithm == "fully-digital" && r.trial == TrialLabel::Index(0) && r.snr_db == 5.0)
            .collect();
        assert_eq!(digital.len(), 2);
        assert_eq!(digital[0].se(), digital[1].se());
        assert!(res.rows.iter().any(|r| r.structure == "DPS-group2"));
    }

    #[test]
    fn failures_become_tagged_rows() {
        let mut spec = ExperimentSpec::parse(SPEC).unwrap();
        spec.channel.n_rays = 0;
        let points = spec.points(false).unwrap();
        let rows = run_trial(&spec, &points, 0);
        assert_eq!(rows.len(), 10);
        assert!(rows.iter().all(|(_, r)| r.outcome == Outcome::Failed("invalid-config".into())));
        let [mean, _] = aggregate(&[&rows[0].1]);
        assert_eq!(mean.outcome, Outcome::Failed("no-successful-trials".into()));
    }
}
