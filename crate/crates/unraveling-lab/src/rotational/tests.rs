use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::instrument::check_assumptions;

fn golden_delta() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn log_p(inst: &Instrument, w: &[usize]) -> f64 {
    inst.linear_rep().log_prob(w).unwrap()
}

fn random_word(rng: &mut ChaCha8Rng, len: usize) -> Vec<usize> {
    (0..len).map(|_| rng.random_range(0..4)).collect()
}

#[test]
fn instrument_satisfies_assumptions() {
    let inst = rotational_instrument(golden_delta()).unwrap();
    let report = check_assumptions(&inst, 6).unwrap();
    assert!(report.a);
    assert!(report.b);
}

#[test]
fn rational_and_out_of_range_angles_are_rejected() {
    assert!(matches!(rotational_instrument(0.25), Err(RotationalError::Rational(_, 1, 4))));
    assert!(matches!(rotational_instrument(2.5), Err(RotationalError::Range(_))));
}

#[test]
fn three_decouples_words() {
    let inst = rotational_instrument(golden_delta()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let (a, b) = (rng.random_range(0..5), rng.random_range(0..5));
        let (w, v) = (random_word(&mut rng, a), random_word(&mut rng, b));
        let lw = log_p(&inst, &w);
        let lv = log_p(&inst, &v);
        let joined: Vec<usize> = w.iter().chain([&3]).chain(&v).copied().collect();
        let lj = log_p(&inst, &joined);
        if lw.is_finite() && lv.is_finite() {
            assert!((lj - (lw + lv - 3f64.ln())).abs() < 1e-10);
            let two: Vec<usize> = w.iter().chain([&2]).chain(&v).copied().collect();
            assert!(log_p(&inst, &two) >= lw + lv - 6f64.ln() - 1e-10);
        } else {
            assert_eq!(lj, f64::NEG_INFINITY);
        }
    }
}

#[test]
fn zero_padding_scales_by_powers_of_three() {
    let inst = rotational_instrument(0.3 + 0.01 * std::f64::consts::SQRT_2).unwrap();
    let w = [1, 0, 2, 3, 1, 0, 0, 1];
    let base = log_p(&inst, &w);
    for (t, s) in [(1, 0), (0, 2), (3, 1)] {
        let padded: Vec<usize> = std::iter::repeat_n(0, t).chain(w).chain(std::iter::repeat_n(0, s)).collect();
        assert!((log_p(&inst, &padded) - (base - (t + s) as f64 * 3f64.ln())).abs() < 1e-10);
    }
}

#[test]
fn one_splits_words() {
    let inst = rotational_instrument(golden_delta()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let (w, v) = (random_word(&mut rng, 3), random_word(&mut rng, 3));
        let w1: Vec<usize> = w.iter().chain([&1]).copied().collect();
        let one_v: Vec<usize> = [1].iter().chain(&v).copied().collect();
        let joined: Vec<usize> = w.iter().chain([&1]).chain(&v).copied().collect();
        let (a, b, j) = (log_p(&inst, &w1), log_p(&inst, &one_v), log_p(&inst, &joined));
        if a.is_finite() && b.is_finite() {
            assert!((j - (24f64.ln() + a + b)).abs() < 1e-10);
        }
    }
}

#[test]
fn gap_words_match_closed_form() {
    let delta = golden_delta();
    let inst = rotational_instrument(delta).unwrap();
    for t in 1..=14 {
        let w: Vec<usize> = std::iter::once(1).chain(std::iter::repeat_n(0, t)).chain(std::iter::once(1)).collect();
        let closed = word_prob_closed(delta, &w).unwrap();
        let expected = -288f64.ln() - t as f64 * 3f64.ln() + (t as f64 * std::f64::consts::PI * delta).sin().powi(2).ln();
        assert!((closed - expected).abs() < 1e-9, "T={t}");
        assert!((log_p(&inst, &w) - closed).abs() < 1e-9, "T={t}");
    }
    let one = word_prob_closed(delta, &[1, 0, 1]).unwrap();
    assert!((one - ((std::f64::consts::PI * delta).sin().powi(2) / 864.0).ln()).abs() < 1e-12);
    assert!(word_prob_closed(delta, &[1, 1]).is_err());
}

#[test]
fn reversed_gap_words_match_closed_form() {
    let inst = rotational_instrument(golden_delta()).unwrap();
    let hat = inst.or_instrument().unwrap();
    for t in 1..=12 {
        let w: Vec<usize> = std::iter::once(1).chain(std::iter::repeat_n(0, t)).chain(std::iter::once(1)).collect();
        assert!((log_p(&hat, &w) - log_prob_gap_reversed(t as f64)).abs() < 1e-10, "T={t}");
        assert!(log_prob_gap_reversed(t as f64) <= -(2.0f64).ln() - (t + 2) as f64 * 3f64.ln() + 1e-12);
    }
    assert!((log_prob_gap_reversed(1.0) + 1728f64.ln()).abs() < 1e-12);
}

#[test]
fn support_excludes_double_ones() {
    let inst = rotational_instrument(golden_delta()).unwrap();
    assert_eq!(log_p(&inst, &[1, 1]), f64::NEG_INFINITY);
    for t in 1..=6 {
        let support: usize = inst.linear_rep().enumerate(t, 1 << 14).unwrap().len();
        let no_eleven = (0..4usize.pow(t as u32))
            .filter(|&i| {
                let w: Vec<usize> = (0..t).map(|k| (i / 4usize.pow(k as u32)) % 4).collect();
                !w.windows(2).any(|p| p == [1, 1])
            })
            .count();
        assert_eq!(support, no_eleven, "T={t}");
    }
}

#[test]
fn lower_bound_with_gap_product() {
    let delta = golden_delta();
    let inst = rotational_instrument(delta).unwrap();
    let mut worst: f64 = 0.0;
    for (w, lp) in inst.linear_rep().enumerate(7, 1 << 16).unwrap() {
        let gaps = gap_profile(&w);
        let product: f64 = gaps.gaps.iter().map(|&n| (n as f64 * std::f64::consts::PI * delta).sin().powi(2).ln()).sum();
        worst = worst.max((product - lp) / w.len() as f64);
    }
    assert!(worst.is_finite() && worst < 6.0, "fitted C = {worst}");
}

#[test]
fn gap_profiles() {
    assert_eq!(gap_profile_str("1031001000103210100010").unwrap().gaps, vec![2, 3, 1, 3]);
    assert_eq!(gap_profile_str("0000").unwrap().r(), 0);
    assert_eq!(gap_profile_str("101").unwrap().gaps, vec![1]);
    assert_eq!(gap_profile_str("10101").unwrap().gaps, vec![1, 1]);
    assert!(gap_profile_str("10x").is_err());
}

#[test]
fn distance_bounds_for_sine() {
    let delta = golden_delta();
    let angle = RotationAngle::Float(delta);
    for t in 1u32..200 {
        let b = angle.log_ell(&BigUint::from(t), DEFAULT_PRECISION_BITS).unwrap();
        let ell = b.hi.exp();
        let s = (t as f64 * std::f64::consts::PI * delta).sin().abs();
        assert!(b.lo.exp() <= s + 1e-12 && s <= std::f64::consts::PI * ell + 1e-12);
    }
}

#[test]
fn square_growth_pressure_diverges_outside_unit_interval() {
    let c = construct_delta(Growth::Square, (0.3, 0.4), ConstructionOptions::default()).unwrap();
    for alpha in [2.0, -1.0] {
        let probe = divergence_probe(&c, alpha, DEFAULT_PRECISION_BITS).unwrap();
        assert_eq!(probe.verdict, DivergenceVerdict::Diverges, "{probe:?}");
    }
    assert!(divergence_probe(&c, 0.5, DEFAULT_PRECISION_BITS).is_err());
}

#[test]
fn constructed_angle_agrees_with_exhaustive_scan() {
    let c = construct_delta(Growth::Square, (0.3, 0.4), ConstructionOptions::default()).unwrap();
    let (min, _) = scan_lower_bound(&c.angle(), Growth::Square, 20_000, DEFAULT_PRECISION_BITS).unwrap();
    assert!(min >= c.certificate.log_lower_constant - 1e-9);
}

#[test]
fn u_increments_match_enumeration() {
    let inst = rotational_instrument(golden_delta()).unwrap();
    let hat = inst.or_instrument().unwrap();
    let u = |t: usize| -> f64 {
        hat.linear_rep()
            .enumerate(t, 1 << 16)
            .unwrap()
            .iter()
            .map(|(w, lp)| gap_profile(w).gaps.iter().map(|&n| (n * n) as f64).sum::<f64>() * lp.exp())
            .sum()
    };
    let report = u_increment_report(Growth::Square, 7);
    for &(t, inc, bound) in &report.rows {
        if t >= 4 {
            assert!((u(t) - u(t - 1) - inc).abs() < 1e-12, "T={t}");
        }
        assert!(inc <= bound);
    }
    let long = u_increment_report(Growth::Square, 60);
    assert!((long.rows.last().unwrap().2 - 1.0 / 6.0).abs() < 1e-12);
}

#[test]
fn exp_square_derivative_witness_increases() {
    let c = construct_delta(Growth::ExpSquare, (0.3, 0.4), ConstructionOptions::default()).unwrap();
    assert!(c.certificate.truncated);
    let w = derivative_witness(&c, DEFAULT_PRECISION_BITS).unwrap();
    assert!(w.formula_run >= 3, "{w:?}");
    let last = w.rows.last().unwrap();
    assert_eq!(last.index, c.seed_depth);
    assert!(last.log_witness > 50.0 && last.log_witness <= last.log_formula + 2f64.ln(), "{last:?}");
    assert!(u_increment_report(Growth::ExpSquare, 40).rows.last().unwrap().2 > 1e100);
}
