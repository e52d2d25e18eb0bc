use eulerlab::fft::Spectrum;
use eulerlab::inflation::{
    bump_centers, bump_radius, initial_vorticity, omega0, perturbation_beta, quadruple, rho, rho_hat, run_deformation,
    scale_amplitude, stretching_scan, velocity_smallness, InflationParams, Perturbation, PerturbationScanParams,
    SolverSettings,
};
use eulerlab::quad::GaussLegendre;
use eulerlab::Grid2D;
use proptest::prelude::*;

#[test]
fn bump_supports_are_disjoint_across_all_scales() {
    let n_scales = 12;
    let discs: Vec<([f64; 2], f64)> =
        (0..=n_scales).flat_map(|k| bump_centers(k).map(|c| (c, bump_radius(k)))).collect();
    for (a, &(ca, ra)) in discs.iter().enumerate() {
        for &(cb, rb) in &discs[a + 1..] {
            let d = (ca[0] - cb[0]).hypot(ca[1] - cb[1]);
            assert!(d > ra + rb, "{ca:?} r {ra} meets {cb:?} r {rb}");
        }
    }
}

#[test]
fn quadruple_has_zero_mean() {
    // The integrand vanishes outside [-1.25, 1.25]^2; panels of width 1/8 put every support
    // boundary on a panel edge.
    let gl = GaussLegendre::new(16);
    let integral = gl.integrate_composite(-1.25, 1.25, 20, |x1| gl.integrate_composite(-1.25, 1.25, 20, |x2| quadruple([x1, x2])));
    assert!(integral.abs() < 1e-12, "{integral}");
}

#[test]
fn sup_norm_is_the_largest_scale_amplitude() {
    let params = InflationParams { n_scales: 4, r: 2.5, q: 1.5, ..InflationParams::default() };
    let grid = Grid2D::new(2.0, 2048).unwrap();
    let w = initial_vorticity(&params, &grid).unwrap();
    let bound = params.prefactor() * (0..=params.n_scales).map(|k| scale_amplitude(&params, k)).fold(0.0, f64::max);
    let sup = w.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(sup <= bound * (1.0 + 1e-15), "{sup} > {bound}");
    // Every bump centre is a node, so the bound is attained.
    assert!(sup >= bound * (1.0 - 1e-15));
}

#[test]
fn rho_at_origin_is_the_integral_of_its_transform() {
    assert!((rho([0.0, 0.0]) - 2.0).abs() < 1e-8);
    // ρ̂ is supported in the unit discs about (±2, 0).
    let gl = GaussLegendre::new(16);
    let integral = gl.integrate_composite(-3.0, 3.0, 48, |a| gl.integrate_composite(-1.0, 1.0, 16, |b| rho_hat([a, b])));
    assert!((integral - 2.0).abs() < 1e-8, "{integral}");
}

#[test]
fn perturbation_transform_matches_fft_for_random_targets() {
    // The χ tails of the four bumps need a box well beyond x*; L = 4 keeps the periodic
    // images below the tolerance.
    let grid = Grid2D::new(4.0, 1024).unwrap();
    let n = grid.n();
    for x_star in [[0.3, 0.7], [0.55, 0.2], [0.81, 0.64]] {
        let beta = Perturbation::for_index(4, 2.05, x_star).unwrap();
        let spectrum = Spectrum::of(&perturbation_beta(&beta, &grid).unwrap()).continuous();
        let (mut num, mut den) = (0.0, 0.0);
        for mi in 0..n {
            for mj in 0..n {
                let exact = beta.hat(grid.frequency_point(mi, mj));
                num += (spectrum[mj * n + mi] - exact).norm_sqr();
                den += exact.norm_sqr();
            }
        }
        let err = (num / den).sqrt();
        assert!(err < 1e-6, "x* {x_star:?}: {err}");
    }
}

#[test]
fn doubling_m_quarters_the_vorticity_exactly() {
    let a = InflationParams { m: 10.0, n_scales: 6, ..InflationParams::default() };
    let b = InflationParams { m: 20.0, ..a };
    for k in 0..=6 {
        let c = bump_centers(k)[0];
        let x = [c[0] + 0.3 * bump_radius(k), c[1] - 0.2 * bump_radius(k)];
        let (wa, wb) = (omega0(&a, x), omega0(&b, x));
        assert!(wa != 0.0);
        assert!((wa / wb - 4.0).abs() < 1e-14, "scale {k}: {}", wa / wb);
    }
}

#[test]
fn evolved_particles_stay_mirror_symmetric() {
    let params = InflationParams { n_scales: 3, ..InflationParams::default() };
    let settings = SolverSettings { steps: 20, sample_every: 5, ..SolverSettings::default() };
    let run = run_deformation(&params, &settings).unwrap();
    let state = run.checkpoints.last().unwrap();
    let seeds = &state.disc.seeds;
    let mut matched = 0;
    for (a, sa) in seeds.iter().enumerate() {
        if !(sa[0] > 0.0 && sa[1] > 0.0) {
            continue;
        }
        for (b, sb) in seeds.iter().enumerate() {
            for (e1, e2) in [(-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
                if sb[0] == e1 * sa[0] && sb[1] == e2 * sa[1] {
                    let (pa, pb) = (state.positions[a], state.positions[b]);
                    assert!((pb[0] - e1 * pa[0]).abs() < 1e-12 && (pb[1] - e2 * pa[1]).abs() < 1e-12);
                    matched += 1;
                }
            }
        }
    }
    assert!(matched > 0);
    assert_eq!(run.samples[0].entry_max, 1.0);
}

#[test]
fn velocity_of_the_perturbation_shrinks_at_the_predicted_rate() {
    let s = PerturbationScanParams { grid_n: 512, ..PerturbationScanParams::default() };
    let v = velocity_smallness(&[2, 4, 8, 16], &s).unwrap();
    assert!((v.exponent - v.predicted_exponent).abs() < 0.2, "{} vs {}", v.exponent, v.predicted_exponent);
}

#[test]
fn cross_stretching_term_decays_with_the_perturbation_index() {
    let params = InflationParams { n_scales: 4, ..InflationParams::default() };
    let settings = SolverSettings { steps: 20, sample_every: 5, lattice_nodes: 65, ..SolverSettings::default() };
    let scan = stretching_scan(&params, &settings, &[4, 6, 8, 12, 16]).unwrap();
    assert!(scan.across_exponent <= -0.7, "{}", scan.across_exponent);
}

#[test]
fn params_round_trip_through_json() {
    let p = InflationParams { m: 12.5, n_scales: 7, r: 2.3, q: 1.7, n: 5, horizon: Some(1e-3) };
    let back: InflationParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(p, back);
    assert!(serde_json::from_str::<InflationParams>(r#"{"bogus": 1}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn initial_vorticity_is_odd_in_each_coordinate(x in prop::array::uniform2(-1.3f64..1.3)) {
        let p = InflationParams { n_scales: 10, r: 2.5, q: 1.5, ..InflationParams::default() };
        let w = omega0(&p, x);
        prop_assert_eq!(omega0(&p, [-x[0], x[1]]), -w);
        prop_assert_eq!(omega0(&p, [x[0], -x[1]]), -w);
    }

    #[test]
    fn perturbation_is_even_in_x1_and_odd_in_x2(
        x in prop::array::uniform2(-1.0f64..1.0),
        x_star in prop::array::uniform2(0.1f64..0.9),
    ) {
        let beta = Perturbation::for_index(3, 2.05, x_star).unwrap();
        let v = beta.value(x);
        let tol = 1e-13 * beta.amplitude();
        prop_assert!((beta.value([-x[0], x[1]]) - v).abs() <= tol);
        prop_assert!((beta.value([x[0], -x[1]]) + v).abs() <= tol);
    }
}
