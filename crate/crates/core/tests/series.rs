use elastring::classical::{
    compatibility_flags, compatibility_sweep, evaluate_series_solution, fourier_coefficients,
    h_consistency_residual, solve_fd_coupled_with, FdOptions, Segment, SeriesExpansion, TraceSampling,
};
use elastring::config::RunConfig;
use elastring::field::evaluate_solution;
use elastring::model::{CableConfig, InitialData, Profile, SamplingGrid};

fn preset(name: &str) -> (CableConfig, InitialData) {
    let rc = RunConfig::preset(name).unwrap();
    let init = rc.initial_data().unwrap();
    (rc.cable, init)
}

#[test]
fn series_driven_by_fd_trace_tracks_fd() {
    let (cfg, init) = preset("paper-2-4-sigma1");
    let grid = SamplingGrid::new(1001, 101, 2.0).unwrap();
    let opts = FdOptions { trace: TraceSampling::EveryStep, ..FdOptions::default() };
    let (field, trace) = solve_fd_coupled_with(&cfg, &init, &grid, &opts).unwrap();
    let exp = SeriesExpansion::new(&cfg, &init, &trace.u_at_support[0], trace.dt(), 128).unwrap();
    let (mut diff, mut scale) = (0.0_f64, 0.0_f64);
    for x in [3.5, 10.5, 24.5, 38.5, 52.5, 66.5] {
        for t in [0.4, 1.0, 1.6, 2.0] {
            let (u_fd, _) = evaluate_solution(&field, x, t).unwrap();
            diff = diff.max((evaluate_series_solution(&exp, x, t).unwrap() - u_fd).abs());
            scale = scale.max(u_fd.abs());
        }
    }
    assert!(diff / scale <= 0.05, "relative gap {}", diff / scale);
}

#[test]
fn support_condition_residual_is_small_away_from_start() {
    let (cfg, init) = preset("paper-2-4-sigma1");
    let grid = SamplingGrid::new(2001, 51, 1.0).unwrap();
    let opts = FdOptions { trace: TraceSampling::EveryStep, ..FdOptions::default() };
    let (_, trace) = solve_fd_coupled_with(&cfg, &init, &grid, &opts).unwrap();
    let exp = SeriesExpansion::new(&cfg, &init, &trace.u_at_support[0], trace.dt(), 256).unwrap();
    let at_start = h_consistency_residual(&exp, 0.0).unwrap().abs();
    let later = h_consistency_residual(&exp, 0.5).unwrap().abs();
    // At t = 0 the data violate the support condition by σ·φ(l) = 0.1.
    assert!((at_start - 0.1).abs() < 0.01, "{at_start}");
    assert!(later < 0.02, "{later}");
}

#[test]
fn compatible_data_satisfy_the_initial_relation() {
    let (cfg, _) = preset("paper-2-4-sigma1");
    // φ(l) = 0 with a continuous slope: the relation holds with h(0) = 0 and
    // the truncated slope series converge towards it.
    let phi = Profile::custom(|x| 0.1 * (x - 17.5) / 70.0 * (2.0 * std::f64::consts::PI * x / 70.0).sin());
    let init = InitialData::new(phi, Profile::Zero);
    let sweep = compatibility_sweep(&cfg, &init, 0.0, &[32, 64, 128, 256]).unwrap();
    let r: Vec<f64> = sweep.residual.iter().map(|r| r.abs()).collect();
    assert!(r.windows(2).all(|w| w[1] < w[0]), "{r:?}");
    assert!(r[3] < 1e-4, "{r:?}");
}

#[test]
fn flags_follow_the_data() {
    let (cfg, init) = preset("paper-2-4-sigma1");
    let flags = compatibility_flags(&cfg, &init, 0.035).unwrap();
    assert!(flags.left_phi_ends && flags.right_phi_ends && flags.left_psi_ends);
    assert!(!flags.left_phi_curvature_ends && !flags.all_satisfied);
    let quiet = InitialData::new(Profile::sine_mode(4, 0.1, 70.0), Profile::Zero);
    assert!(compatibility_flags(&cfg, &quiet, 0.035).unwrap().all_satisfied);
}

#[test]
fn right_segment_fundamental_is_a_single_coefficient() {
    let (cfg, _) = preset("paper-2-4-sigma1");
    let (l, d) = (17.5, 52.5);
    let phi = Profile::custom(move |x| if x <= l { 0.0 } else { (std::f64::consts::PI * (x - l) / d).sin() });
    let init = InitialData::new(phi, Profile::Zero);
    let (a, b) = fourier_coefficients(&cfg, &init, 0.0, 0.0, Segment::Right, 16).unwrap();
    assert!((a[0] - 1.0).abs() <= 1e-10, "A_1 = {}", a[0]);
    assert!(a[1..].iter().all(|v| v.abs() <= 1e-10), "{a:?}");
    assert!(b.iter().all(|&v| v == 0.0));
}

#[test]
fn series_matches_fd_on_probe_grid_at_reference_resolution() {
    let (cfg, init) = preset("paper-2-4-sigma1");
    let grid = SamplingGrid::new(2001, 501, 10.0).unwrap();
    let opts = FdOptions { trace: TraceSampling::EveryStep, ..FdOptions::default() };
    let (field, trace) = solve_fd_coupled_with(&cfg, &init, &grid, &opts).unwrap();
    let exp = SeriesExpansion::new(&cfg, &init, &trace.u_at_support[0], trace.dt(), 256).unwrap();
    let (mut diff, mut scale) = (0.0_f64, 0.0_f64);
    for i in 0..10 {
        let x = 3.5 + 7.0 * i as f64;
        for j in 1..=10 {
            let t = j as f64;
            let (u_fd, _) = evaluate_solution(&field, x, t).unwrap();
            diff = diff.max((evaluate_series_solution(&exp, x, t).unwrap() - u_fd).abs());
            scale = scale.max(u_fd.abs());
        }
    }
    assert!(diff / scale <= 0.02, "relative gap {}", diff / scale);
}

#[test]
fn support_residual_shrinks_with_finer_fd_trace() {
    let (cfg, init) = preset("paper-2-4-sigma1");
    let worst = |nx: usize| {
        let grid = SamplingGrid::new(nx, 51, 5.0).unwrap();
        let opts = FdOptions { trace: TraceSampling::EveryStep, ..FdOptions::default() };
        let (_, trace) = solve_fd_coupled_with(&cfg, &init, &grid, &opts).unwrap();
        let exp = SeriesExpansion::new(&cfg, &init, &trace.u_at_support[0], trace.dt(), 256).unwrap();
        [1.0, 2.5, 4.0].iter().map(|&t| h_consistency_residual(&exp, t).unwrap().abs()).fold(0.0, f64::max)
    };
    let (coarse, fine) = (worst(501), worst(2001));
    assert!(fine < coarse, "{coarse} -> {fine}");
}
