use hybeam::dps::{dynamic_mapping_greedy, MappingSets};
use hybeam::fps::fps_altmin_raw;
use hybeam::linalg::frob;
use hybeam::random::{complex_gaussian_matrix, uniform_phases};
use hybeam::sps::{mo_altmin_raw, omp_raw, pe_relaxation_raw};
use hybeam::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn masks(n_t: usize, n_rf: usize) -> Vec<Connectivity> {
    let mut out = vec![Connectivity::fully(n_t, n_rf), Connectivity::partial(n_t, n_rf).unwrap()];
    out.extend((2..=n_rf).filter_map(|eta| Connectivity::groups(n_t, n_rf, eta).ok()));
    out
}

fn off_mask_zero(net: &AnalogNetwork) -> bool {
    let m = net.matrix();
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| net.mask().allows(i, j) || m[(i, j)] == C64::new(0.0, 0.0)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn constructors_zero_everything_off_mask(seed in any::<u64>(), n_rf in 1usize..5, per in 1usize..4, n_c in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_t = n_rf * per * 2;
        for mask in masks(n_t, n_rf) {
            let sps = AnalogNetwork::sps(uniform_phases(&mut rng, n_t, n_rf), mask.clone()).unwrap();
            let entries = complex_gaussian_matrix(&mut rng, n_t, n_rf).map(|z| z / (1.0 + z.norm()));
            let dps = AnalogNetwork::dps(&entries, mask.clone()).unwrap();
            let mut switches = SwitchMatrix::zeros(n_t, n_c * n_rf);
            switches.bits.iter_mut().for_each(|b| *b = rng.random_range(0..2));
            let fps = AnalogNetwork::fps(switches, PhaseBank::uniform(n_c).unwrap(), mask.clone()).unwrap();
            for net in [&sps, &dps, &fps] {
                prop_assert!(off_mask_zero(net));
                prop_assert!(net.check().is_ok());
            }
        }
    }

    #[test]
    fn scaling_the_target_scales_residuals_and_keeps_the_analog_structure(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = complex_gaussian_matrix(&mut rng, 12, 3);
        let c = 4.0;
        let g = f.scale(c);
        let book = OmpCodebook::new(uniform_phases(&mut rng, 12, 16).map(|p| C64::from_polar(1.0 / 12f64.sqrt(), p))).unwrap();
        let opts = AltMinOptions { seed, max_outer: 30, ..Default::default() };
        let bank = PhaseBank::uniform(3).unwrap();
        type Solver<'a> = Box<dyn Fn(&CMat) -> Design + 'a>;
        let solvers: Vec<(&str, Solver)> = vec![
            ("omp", Box::new(|t| omp_raw(t, &book, 3).unwrap())),
            ("mo-altmin", Box::new(|t| mo_altmin_raw(t, 3, &opts).unwrap())),
            ("pe", Box::new(|t| pe_relaxation_raw(t, 3).unwrap())),
            ("dps-full", Box::new(|t| dps_full_solve(t, 3).unwrap())),
            ("dps-greedy", Box::new(|t| dps_partial_solve(t, &dynamic_mapping_greedy(t, 3).unwrap()).unwrap())),
            ("fps", Box::new(|t| fps_altmin_raw(&FpsProblem::fully(t.clone(), bank.clone(), 3).unwrap(), &opts).unwrap())),
        ];
        for (name, solve) in &solvers {
            let (a, b) = (solve(&f), solve(&g));
            prop_assert_eq!(a.pair.analog.payload(), b.pair.analog.payload(), "{}", name);
            let (ra, rb) = (approximation_residual(&f, &a.pair).unwrap(), approximation_residual(&g, &b.pair).unwrap());
            prop_assert!((rb - c * ra).abs() <= 1e-9 * (1.0 + rb), "{}: {} vs {}", name, rb, c * ra);
        }
    }

    #[test]
    fn dps_residual_nests_fully_group_partial(seed in any::<u64>(), cols in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n_t, n_rf) = (16, 4);
        let f = complex_gaussian_matrix(&mut rng, n_t, cols);
        let f = f.scale((cols as f64).sqrt() / frob(&f));
        let res = |d: Design| approximation_residual(&f, &power_normalize(&d.pair).unwrap()).unwrap();
        let fully = res(group_connected_solve(&f, n_rf, 1, &InnerSolver::DpsFull).unwrap());
        let group = res(group_connected_solve(&f, n_rf, 2, &InnerSolver::DpsFull).unwrap());
        let partial = res(dps_partial_solve(&f, &MappingSets::fixed(n_t, n_rf).unwrap()).unwrap());
        prop_assert!(fully <= group + 1e-10, "{} > {}", fully, group);
        prop_assert!(group <= partial + 1e-10, "{} > {}", group, partial);
    }

    #[test]
    fn se_is_unitary_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = ChannelParams { seed, ..Default::default() };
        let ch = generate_channels(&params, &ArrayGeometry::linear(8), &ArrayGeometry::linear(4), 1).unwrap();
        let f = fully_digital_beamformer(&ch, 2).unwrap();
        let w = fully_digital_combiners(&ch, &f, 2).unwrap();
        let q = complex_gaussian_matrix(&mut rng, 2, 2).qr().q();
        let u = complex_gaussian_matrix(&mut rng, 2, 2).qr().q();
        let base = spectral_efficiency(&ch, &f, &w, 2, 5.0).unwrap().mean;
        let rotated = spectral_efficiency(&ch, &(&f * q), &[&w[0] * u], 2, 5.0).unwrap().mean;
        prop_assert!((base - rotated).abs() <= 1e-9);
    }
}
