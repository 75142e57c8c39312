mod common;

use proptest::prelude::*;
use unraveling_lab::catalog::{build_instrument, closed_form, Coupling, FamilyParams, Quantity, ThermalParams, X00Coupling};
use unraveling_lab::entropy::{entropy_production, pressure_spectral};
use unraveling_lab::instrument::{check_assumptions, Instrument};

fn coupling() -> impl Strategy<Value = Coupling> {
    (0.3..2.5f64, 0.3..2.5f64, 0.1..2.0f64, -1.0..1.0f64, 0.2..3.0f64)
        .prop_map(|(epsilon, omega, lambda, mu, t)| Coupling { epsilon, omega, lambda, mu, t })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn xxz_two_time_is_normalized_and_symmetric(k in coupling(), beta in -2.0..2.0f64, a in -2.0..3.0f64) {
        let params = FamilyParams::XxzTwoTime(ThermalParams { coupling: k, beta });
        let inst = build_instrument(&params).unwrap().instrument;
        prop_assert!((common::total_mass(inst.linear_rep(), 6) - 1.0).abs() < 1e-10);
        let e = |x: f64| pressure_spectral(&inst, x).unwrap();
        prop_assert!((e(a) - e(1.0 - a)).abs() < 1e-9);
        prop_assert!(e(0.5) <= 1e-12);
    }

    #[test]
    fn x00_ep_matches_closed_form(k in coupling(), beta in -2.0..2.0f64) {
        let k = Coupling { mu: 0.0, ..k };
        let params = FamilyParams::X00TwoTime(ThermalParams { coupling: X00Coupling::Dynamics(k), beta });
        let inst = build_instrument(&params).unwrap().instrument;
        let closed = closed_form(&params, Quantity::Ep).unwrap();
        prop_assert!((entropy_production(&inst).unwrap() - closed).abs() < 1e-10);
        prop_assert!(closed >= -1e-15);
    }
}

#[test]
fn every_family_satisfies_the_standing_assumptions() {
    for params in common::every_family() {
        let fam = build_instrument(&params).unwrap();
        let report = check_assumptions(&fam.instrument, 4).unwrap();
        assert!(report.a, "{}: {report:?}", params.name());
        assert!(report.b, "{}: {report:?}", params.name());
    }
}

#[test]
fn instrument_documents_round_trip() {
    for params in common::every_family() {
        let inst = build_instrument(&params).unwrap().instrument;
        let rebuilt = Instrument::from_json(&inst.to_json()).unwrap();
        for (w, lp) in inst.linear_rep().enumerate(4, 1 << 20).unwrap() {
            assert!((rebuilt.linear_rep().log_prob(&w).unwrap() - lp).abs() < 1e-12, "{}", params.name());
        }
    }
}

#[test]
fn x00_inverse_map_recovers_s_plus_and_s_minus() {
    let params = common::parse(r#"{"family":"x00_two_time","params":{"epsilon":1.0,"s_plus":0.4,"s_minus":0.2,"beta":0.7}}"#);
    let FamilyParams::X00TwoTime(p) = &params else { unreachable!() };
    let (sp, sm) = p.coupling.resolve().unwrap().x00_s_pm();
    assert!((sp - 0.4).abs() < 1e-12 && (sm - 0.2).abs() < 1e-12);
}
