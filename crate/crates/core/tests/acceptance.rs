//! Acceptance criteria, one PASS/FAIL line each. Tolerances are fixed here.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use elastring::classical::{
    evaluate_series_solution, solve_fd_coupled_with, FdOptions, InterfaceTrace, SeriesExpansion,
    TraceSampling,
};
use elastring::config::RunConfig;
use elastring::diagnostics::{
    collocation_loss, energy, stability_bound_check, CollocationCounts, LossWeights, ModalCandidate,
    ModeCandidate,
};
use elastring::field::{evaluate_solution, WaveField};
use elastring::galerkin::{modal_frequencies, propagate_exact, ModalSystem};
use elastring::model::{
    validate_initial_data, CableConfig, DiracConvention, InitialData, Profile, SamplingGrid,
};
use elastring::tension::{
    characteristic_frequencies, invert_tension, FrequencySpectrum, InversionOptions, KnownCable,
};
use elastring::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const A: f64 = 67.344;
const L: f64 = 70.0;
const SUPPORT: f64 = 17.5;

struct Outcome {
    measured: String,
    threshold: String,
    pass: bool,
}

fn preset(name: &str) -> (CableConfig, InitialData, SamplingGrid) {
    let rc = RunConfig::preset(name).expect("bundled preset parses");
    let init = rc.initial_data().expect("bundled data resolves");
    (rc.cable, init, rc.grid)
}

fn grid(nx: usize) -> SamplingGrid {
    SamplingGrid::new(nx, 501, 10.0).unwrap()
}

fn fd(cfg: &CableConfig, init: &InitialData, nx: usize, trace: TraceSampling) -> Result<(WaveField, InterfaceTrace)> {
    solve_fd_coupled_with(cfg, init, &grid(nx), &FdOptions { trace, ..FdOptions::default() })
}

fn rel_max_diff(a: &WaveField, b: &WaveField) -> Result<f64> {
    Ok(a.difference(b)?.max_abs() / b.max_abs())
}

fn c1() -> Result<Outcome> {
    let (cfg, init, _) = preset("paper-2-4-sigma0");
    let sys = ModalSystem::new(&cfg, 512, &init)?;
    let f = modal_frequencies(&sys, 10)?;
    let worst = f
        .frequencies_hz()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let want = (i + 1) as f64 * A / (2.0 * L);
            (v - want).abs() / want
        })
        .fold(0.0, f64::max);
    // f1 = 0.481028... Hz: truncation to six decimals.
    let f1_ok = (f.frequencies_hz()[0] * 1e6).floor() == 481_028.0;
    Ok(Outcome {
        measured: format!("max rel err {worst:.3e}, f1 = {:.7} Hz", f.frequencies_hz()[0]),
        threshold: "1e-10 relative, f1 = 0.481028".into(),
        pass: worst <= 1e-10 && f1_ok,
    })
}

fn c2() -> Result<Outcome> {
    let (cfg, init, g) = preset("paper-2-4-sigma1");
    let sys = ModalSystem::new(&cfg, 512, &init)?;
    let galerkin = energy(&propagate_exact(&sys, &g, &[])?, &cfg).drift;
    let coarse = energy(&fd(&cfg, &init, 1001, TraceSampling::OutputTimes)?.0, &cfg).drift;
    let fine = energy(&fd(&cfg, &init, 2001, TraceSampling::OutputTimes)?.0, &cfg).drift;
    let ratio = coarse / fine;
    Ok(Outcome {
        measured: format!(
            "Galerkin drift {galerkin:.3e}; FD drift {fine:.3e} at nx=2001, halving ratio {ratio:.2}"
        ),
        threshold: "Galerkin <= 1e-8; FD <= 1e-3 with ratio in [3, 5]".into(),
        pass: galerkin <= 1e-8 && fine <= 1e-3 && (3.0..=5.0).contains(&ratio),
    })
}

fn c3() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for name in ["paper-2-4-sigma1", "paper-2-4-sigma0005"] {
        let (cfg, init, _) = preset(name);
        let roots = characteristic_frequencies(&cfg, 8)?;
        let sys = ModalSystem::new(&cfg, 512, &init)?;
        let modal = modal_frequencies(&sys, 8)?;
        for (r, g) in roots.frequencies_hz().iter().zip(modal.frequencies_hz()) {
            worst = worst.max((r - g).abs() / r);
        }
    }
    Ok(Outcome {
        measured: format!("max rel diff {worst:.3e}"),
        threshold: "1e-3 relative, lowest 8 modes, m = 512".into(),
        pass: worst <= 1e-3,
    })
}

fn c4() -> Result<Outcome> {
    let (cfg, init, _) = preset("paper-2-4-sigma1");
    let g = grid(2001);
    let sys = ModalSystem::new(&cfg, 1024, &init)?;
    let galerkin = propagate_exact(&sys, &g, &[])?;
    let (field, _) = fd(&cfg, &init, 2001, TraceSampling::OutputTimes)?;
    let field_err = rel_max_diff(&field, &galerkin)?;

    let (_, trace) = fd(&cfg, &init, 2001, TraceSampling::EveryStep)?;
    let exp = SeriesExpansion::new(&cfg, &init, &trace.u_at_support[0], trace.dt(), 256)?;
    let (mut diff, mut scale) = (0.0_f64, 0.0_f64);
    for i in 0..10 {
        let x = 3.5 + 7.0 * i as f64;
        for j in 1..=10 {
            let t = j as f64;
            let (u_fd, _) = evaluate_solution(&field, x, t)?;
            diff = diff.max((evaluate_series_solution(&exp, x, t)? - u_fd).abs());
            scale = scale.max(u_fd.abs());
        }
    }
    let series_err = diff / scale;
    Ok(Outcome {
        measured: format!("FD vs Galerkin {field_err:.3e}; series vs FD {series_err:.3e}"),
        threshold: "FD vs Galerkin <= 2e-2; series vs FD <= 5e-2".into(),
        pass: field_err <= 0.02 && series_err <= 0.05,
    })
}

fn c5() -> Result<Outcome> {
    let (cfg, init, _) = preset("paper-2-4-sigma1");
    let coarse = fd(&cfg, &init, 2001, TraceSampling::OutputTimes)?.1.max_jump_residual(0, 1e-9);
    let fine = fd(&cfg, &init, 4001, TraceSampling::OutputTimes)?.1.max_jump_residual(0, 1e-9);
    let factor = fine / coarse;
    Ok(Outcome {
        measured: format!("residual {coarse:.3e} -> {fine:.3e}, factor {factor:.3}"),
        threshold: "factor 0.5 +/- 25% ([0.375, 0.625])".into(),
        pass: (0.375..=0.625).contains(&factor),
    })
}

fn c6() -> Result<Outcome> {
    let (cfg, base, _) = preset("paper-2-4-sigma1");
    let g = SamplingGrid::new(281, 201, 10.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut violations = 0;
    let mut min_slack = f64::INFINITY;
    for _ in 0..20 {
        let mut draw = |scale: f64| -> Vec<(u32, f64)> {
            (0..3).map(|_| (rng.gen_range(1..=12u32), rng.gen_range(-scale..scale))).collect()
        };
        let (dphi, dpsi) = (draw(0.02), draw(0.5));
        let combo = |terms: Vec<(u32, f64)>| {
            Profile::custom(move |x| {
                terms.iter().map(|&(k, c)| c * (k as f64 * PI * x / L).sin()).sum::<f64>()
            })
        };
        let phi0 = base.phi.clone();
        let dphi_p = combo(dphi);
        let perturbed = InitialData::new(
            Profile::custom(move |x| phi0.value(x) + dphi_p.value(x)),
            combo(dpsi),
        );
        let f1 = propagate_exact(&ModalSystem::new(&cfg, 128, &base)?, &g, &[])?;
        let f2 = propagate_exact(&ModalSystem::new(&cfg, 128, &perturbed)?, &g, &[])?;
        let rep = stability_bound_check(&f1, &f2, &cfg)?;
        if !rep.holds {
            violations += 1;
        }
        min_slack = min_slack.min(rep.min_slack);
    }
    Ok(Outcome {
        measured: format!("{violations} violations in 20 pairs, min slack {min_slack:.3e}"),
        threshold: "0 violations, tol 1e-6".into(),
        pass: violations == 0,
    })
}

fn c7() -> Result<Outcome> {
    let (cfg, init, _) = preset("paper-2-4-sigma1");
    let flagged = validate_initial_data(&cfg, &init).piecewise_smooth_only;
    let max_jump = |tr: &InterfaceTrace| tr.slope_jump[0].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let kinked = max_jump(&fd(&cfg, &init, 2001, TraceSampling::OutputTimes)?.1);
    let (free, init0, _) = preset("paper-2-4-sigma0");
    let baseline = max_jump(&fd(&free, &init0, 2001, TraceSampling::OutputTimes)?.1);
    let ratio = kinked / baseline;
    Ok(Outcome {
        measured: format!("flagged {flagged}; max |jump| {kinked:.3e} vs baseline {baseline:.3e} (x{ratio:.1})"),
        threshold: "flagged and ratio > 10".into(),
        pass: flagged && ratio > 10.0,
    })
}

fn c8() -> Result<Outcome> {
    let beta_scale = A * A / L;
    let betas = [0.0, 0.1, 1.0, 10.0, 100.0, 1e3].map(|s| s * beta_scale);
    let spectrum = |beta: f64, m: usize| -> Result<Vec<f64>> {
        let cfg = CableConfig::new(L, A * A, 1.0, &[(SUPPORT, beta)], DiracConvention::DiracConsistent)?;
        Ok(ModalSystem::new(&cfg, m, &InitialData::zero())?.eigenvalues().iter().copied().collect())
    };
    let lams = betas.iter().map(|&b| spectrum(b, 128)).collect::<Result<Vec<_>>>()?;
    let slack = 1e-9 * lams[0][127];
    let mut order_ok = true;
    for w in lams.windows(2) {
        order_ok &= w[0].iter().zip(&w[1]).all(|(p, q)| *q >= *p - slack);
    }
    for lam in &lams[1..] {
        order_ok &= (0..127).all(|k| lams[0][k] <= lam[k] + slack && lam[k] <= lams[0][k + 1] + slack);
    }

    let stiff = 1e6 * beta_scale;
    let hz = |lam: f64| lam.sqrt() / (2.0 * PI);
    let fundamentals = |m: usize| -> Result<(f64, f64)> {
        let f: Vec<f64> = spectrum(stiff, m)?.into_iter().map(hz).collect();
        let near = |target: f64| f.iter().copied().min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs())).unwrap();
        Ok((near(A / (2.0 * (L - SUPPORT))), near(A / (2.0 * SUPPORT))))
    };
    let (right_256, left_256) = fundamentals(256)?;
    let (right_512, left_512) = fundamentals(512)?;
    let want = (A / (2.0 * (L - SUPPORT)), A / (2.0 * SUPPORT));
    let plain = ((right_512 - want.0) / want.0).abs().max(((left_512 - want.1) / want.1).abs());
    let extrapolated = (2.0 * right_512 - right_256, 2.0 * left_512 - left_256);
    let richardson = ((extrapolated.0 - want.0) / want.0).abs().max(((extrapolated.1 - want.1) / want.1).abs());
    Ok(Outcome {
        measured: format!(
            "ordering {order_ok}; fundamentals {right_512:.7}/{left_512:.7} Hz, rel err {plain:.2e} (Richardson {richardson:.2e})"
        ),
        threshold: "monotone and interlaced; rel err <= 2e-3, Richardson <= 1e-4".into(),
        pass: order_ok && plain <= 2e-3 && richardson <= 1e-4,
    })
}

fn c9() -> Result<Outcome> {
    let (free, init0, _) = preset("paper-2-4-sigma0");
    let mode = ModeCandidate { mode: 2, cos_amplitude: 0.1, sin_amplitude: 0.0, length: L, wave_speed: A };
    let counts = CollocationCounts::for_config(&free);
    let exact = collocation_loss(&mode, &free, &init0, 10.0, LossWeights::default(), &counts)?.total;

    let (cfg, init, _) = preset("paper-2-4-sigma1");
    let counts = CollocationCounts::for_config(&cfg);
    let totals = [64, 128, 256]
        .iter()
        .map(|&m| {
            let sys = ModalSystem::new(&cfg, m, &init)?;
            let sol = sys.solution();
            Ok(collocation_loss(&ModalCandidate::new(&sol), &cfg, &init, 10.0, LossWeights::default(), &counts)?.total)
        })
        .collect::<Result<Vec<f64>>>()?;
    let monotone = totals.windows(2).all(|w| w[1] <= w[0]);
    Ok(Outcome {
        measured: format!("exact mode {exact:.3e}; Galerkin totals m=64/128/256: {totals:?}"),
        threshold: "exact <= 1e-12; totals nonincreasing in m".into(),
        pass: exact <= 1e-12 && monotone,
    })
}

fn c10() -> Result<Outcome> {
    let t_true = A * A;
    let modes: Vec<usize> = (1..=5).collect();
    let mut worst: f64 = 0.0;
    for supports in [vec![(SUPPORT, t_true)], vec![]] {
        let cfg = CableConfig::new(L, t_true, 1.0, &supports, DiracConvention::DiracConsistent)?;
        let known = KnownCable::from_config(&cfg);
        let measured = FrequencySpectrum::measured(known.frequencies(t_true, &modes, 128)?)?;
        let opts = InversionOptions::taut_string(&measured, &modes, &known);
        let est = invert_tension(&measured, &known, &modes, &opts)?;
        worst = worst.max((est.tension_hat - t_true).abs() / t_true);
    }
    Ok(Outcome {
        measured: format!("max rel err {worst:.3e} (T_true = {t_true:.6})"),
        threshold: "1e-3 relative, with and without a support".into(),
        pass: worst <= 1e-3,
    })
}

type Criterion = (&'static str, &'static str, f64, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("C1", "unsupported-string frequencies", 1.0, c1),
        ("C2", "energy conservation", 30.0, c2),
        ("C3", "root vs Galerkin frequencies", 10.0, c3),
        ("C4", "cross-method field agreement", 60.0, c4),
        ("C5", "jump-condition convergence", 60.0, c5),
        ("C6", "stability bound suite", 60.0, c6),
        ("C7", "kink from incompatible data", 30.0, c7),
        ("C8", "stiffness monotonicity and interlacing", 10.0, c8),
        ("C9", "collocation loss sanity", 10.0, c9),
        ("C10", "tension inversion round trip", 10.0, c10),
    ];
    let mut failures = 0;
    for (id, title, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match outcome {
            Ok(o) => (
                o.pass && secs < budget,
                format!("measured: {} | threshold: {} | runtime {secs:.2}s (limit {budget}s)", o.measured, o.threshold),
            ),
            Err(e) => (false, format!("error: {e} | runtime {secs:.2}s")),
        };
        println!("[{}] {id} {title}: {detail}", if pass { "PASS" } else { "FAIL" });
        failures += usize::from(!pass);
    }
    println!("acceptance: {} passed, {failures} failed", 10 - failures);
    if failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
