mod common;

use proptest::prelude::*;
use unraveling_lab::pmp::{convert, MeasureSpec, SpecKind};

fn max_log_diff(a: &MeasureSpec, b: &MeasureSpec, t: usize) -> f64 {
    let (ra, rb) = (a.linear_rep().unwrap(), b.linear_rep().unwrap());
    common::all_words(a.alphabet().len(), t)
        .iter()
        .map(|w| {
            let (x, y) = (ra.log_prob(w).unwrap(), rb.log_prob(w).unwrap());
            if x == y { 0.0 } else { (x - y).abs() }
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pmp_survives_hm_and_fm(seed in any::<u64>(), d in 1usize..4, k in 2usize..4) {
        let spec = MeasureSpec::Pmp(common::random_pmp(&mut common::rng(seed), d, k));
        let hm = convert(&spec, SpecKind::Hm).unwrap();
        let fm = convert(&hm, SpecKind::Fm).unwrap();
        let back = convert(&fm, SpecKind::Pmp).unwrap();
        prop_assert!(max_log_diff(&spec, &back, 6) <= 1e-12);
    }

    #[test]
    fn hm_survives_pmp(seed in any::<u64>(), l in 1usize..4, k in 2usize..4) {
        let spec = MeasureSpec::Hm(common::random_hm(&mut common::rng(seed), l, k));
        let back = convert(&convert(&spec, SpecKind::Pmp).unwrap(), SpecKind::Hm).unwrap();
        prop_assert!(max_log_diff(&spec, &back, 6) <= 1e-12);
    }
}

#[test]
fn documents_round_trip_through_json() {
    for spec in common::random_specs(3) {
        let rebuilt = MeasureSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(rebuilt.kind(), spec.kind());
        assert!(max_log_diff(&spec, &rebuilt, 5) <= 1e-12);
    }
}

#[test]
fn word_masses_sum_to_one() {
    for spec in common::random_specs(4) {
        let rep = spec.linear_rep().unwrap();
        assert!((common::total_mass(&rep, 8) - 1.0).abs() < 1e-12);
    }
}
