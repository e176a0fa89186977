use elastring::galerkin::project_initial_data;
use elastring::io::to_json_string;
use elastring::model::{
    validate_initial_data, CableConfig, DiracConvention, InitialData, Profile, SupportSpec,
};
use proptest::prelude::*;

fn support_list() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.05f64..0.95, 0.0f64..1e5), 0..4).prop_map(|mut v| {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-3);
        v
    })
}

proptest! {
    #[test]
    fn beta_equals_a2_sigma(
        length in 1.0f64..500.0,
        tension in 1.0f64..1e6,
        density in 0.01f64..100.0,
        frac in support_list(),
    ) {
        let supports: Vec<(f64, f64)> = frac.iter().map(|&(f, k)| (f * length, k)).collect();
        let cfg = CableConfig::new(length, tension, density, &supports, DiracConvention::default()).unwrap();
        let a2 = cfg.wave_speed_sq();
        for s in cfg.supports() {
            let want = a2 * s.sigma();
            prop_assert!((s.beta() - want).abs() <= 1e-12 * want.abs().max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn supports_round_trip_through_json(
        tension in 1.0f64..1e6,
        frac in support_list(),
    ) {
        let supports: Vec<(f64, f64)> = frac.iter().map(|&(f, k)| (f * 70.0, k)).collect();
        let cfg = CableConfig::new(70.0, tension, 1.3, &supports, DiracConvention::PaperFactorL).unwrap();
        let back: CableConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        prop_assert_eq!(&back, &cfg);
        let sci: CableConfig = serde_json::from_str(&to_json_string(&cfg).unwrap()).unwrap();
        prop_assert_eq!(&sci, &cfg);
        let list: Vec<SupportSpec> = cfg.supports().to_vec();
        let text = serde_json::to_string(&list).unwrap();
        prop_assert_eq!(text.contains("position_xk"), !list.is_empty());
    }

    #[test]
    fn validation_is_pure(amp in -1.0f64..1.0, mode in 1u32..8) {
        let cfg = CableConfig::new(70.0, 4535.0, 1.0, &[(17.5, 4535.0)], DiracConvention::default()).unwrap();
        let init = InitialData::new(Profile::sine_mode(mode, amp, 70.0), Profile::Zero);
        prop_assert_eq!(validate_initial_data(&cfg, &init), validate_initial_data(&cfg, &init));
    }
}

#[test]
fn basis_projection_is_exact_for_basis_modes() {
    // Parseval: projecting 0.3·w_3 returns 0.3 in slot 3 and nothing else.
    let init = InitialData::new(Profile::basis_mode(3, 0.3, 70.0), Profile::basis_mode(1, -2.0, 70.0));
    let (xi, eta) = project_initial_data(&init, 16, 70.0);
    for j in 0..16 {
        let want_xi = if j == 2 { 0.3 } else { 0.0 };
        let want_eta = if j == 0 { -2.0 } else { 0.0 };
        assert!((xi[j] - want_xi).abs() < 1e-12, "xi[{j}] = {}", xi[j]);
        assert!((eta[j] - want_eta).abs() < 1e-12, "eta[{j}] = {}", eta[j]);
    }
}

#[test]
fn incompatible_support_value_is_flagged() {
    let cfg = CableConfig::new(70.0, 4535.0, 1.0, &[(17.5, 4535.0)], DiracConvention::default()).unwrap();
    let preset = InitialData::new(Profile::sine_mode(2, 0.1, 70.0), Profile::Zero);
    let rep = validate_initial_data(&cfg, &preset);
    assert!(rep.piecewise_smooth_only && rep.endpoints_compatible);
    assert!((rep.supports[0].phi_value - 0.1).abs() < 1e-15);
    let quiet = InitialData::new(Profile::sine_mode(4, 0.1, 70.0), Profile::Zero);
    assert!(!validate_initial_data(&cfg, &quiet).piecewise_smooth_only);
}
