use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::entropy::enumerate_pair;
use crate::numerics::{one_sided_second_derivative, Side};

fn grid() -> Vec<KeepSwitch> {
    [(0.6, 0.3), (0.9, 0.2), (0.25, 0.7), (0.5, 0.45), (0.05, 0.95)]
        .iter()
        .map(|&(a, b)| KeepSwitch::new(a, b).unwrap())
        .collect()
}

fn random_lambda(rng: &mut ChaCha8Rng) -> [f64; 3] {
    [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)]
}

#[test]
fn rejects_degenerate_parameters() {
    assert!(KeepSwitch::new(1.0, 0.3).is_err());
    assert!(KeepSwitch::new(0.4, 0.0).is_err());
}

#[test]
fn q_matches_matrix_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for ks in grid() {
        assert!(ks.q_lambda([0.0; 3]).abs() < 1e-14);
        for _ in 0..20 {
            let l = random_lambda(&mut rng);
            assert!((ks.q_lambda(l) - ks.q_lambda_matrix(l)).abs() < 1e-12);
        }
    }
}

#[test]
fn gradient_and_hessian_match_finite_differences() {
    let h = 1e-4;
    for ks in grid() {
        let g = ks.q_gradient();
        let hess = ks.q_hessian();
        for i in 0..3 {
            let mut p = [0.0; 3];
            let mut m = [0.0; 3];
            p[i] = h;
            m[i] = -h;
            let fd = (ks.q_lambda(p) - ks.q_lambda(m)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7);
            for j in 0..3 {
                let mut pts = [[0.0; 3]; 4];
                for (k, (si, sj)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].into_iter().enumerate() {
                    pts[k][i] += si * h;
                    pts[k][j] += sj * h;
                }
                let fd2 = (ks.q_lambda(pts[0]) - ks.q_lambda(pts[1]) - ks.q_lambda(pts[2]) + ks.q_lambda(pts[3]))
                    / (4.0 * h * h);
                assert!((fd2 - hess[(i, j)]).abs() < 1e-5, "{i}{j}: {fd2} vs {}", hess[(i, j)]);
            }
        }
        assert_eq!(g[2], 0.0);
    }
}

#[test]
fn q_is_convex_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ks = KeepSwitch::new(0.6, 0.3).unwrap();
    let h = 1e-3;
    for _ in 0..10 {
        let l = random_lambda(&mut rng);
        let mut hess = Matrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let shift = |si: f64, sj: f64| {
                    let mut x = l;
                    x[i] += si * h;
                    x[j] += sj * h;
                    ks.q_lambda(x)
                };
                hess[(i, j)] = (shift(1.0, 1.0) - shift(1.0, -1.0) - shift(-1.0, 1.0) + shift(-1.0, -1.0)) / (4.0 * h * h);
            }
        }
        let ev = hess.symmetric_eigen().eigenvalues;
        assert!(ev.min() > -1e-6, "{ev}");
    }
}

#[test]
fn pressure_is_symmetric_and_vanishes_at_ends() {
    for ks in grid() {
        assert!(ks.pressure(0.0).abs() < 1e-14);
        assert!(ks.pressure(1.0).abs() < 1e-14);
        for k in -8..=18 {
            let a = k as f64 * 0.125;
            assert!((ks.pressure(a) - ks.pressure(1.0 - a)).abs() < 1e-12);
        }
    }
}

#[test]
fn ep_is_minus_slope_of_pressure() {
    let h = 1e-6;
    for ks in grid() {
        // The kink of e″ at 0 biases the central difference by h·jump/4.
        let slope = (ks.pressure(h) - ks.pressure(-h)) / (2.0 * h) - h * ks.second_derivative_jump() / 4.0;
        assert!((ks.ep() + slope).abs() < 1e-9, "{} vs {}", ks.ep(), -slope);
        assert!(ks.ep() > 0.0);
    }
    assert!(KeepSwitch::new(0.5, 0.5).unwrap().ep().abs() < 1e-15);
}

#[test]
fn second_derivative_jump_matches_finite_differences() {
    for ks in grid() {
        let e = |x: f64| ks.pressure(x);
        let h = 2e-4;
        let (left, right) = ks.pressure_second_derivatives(0.0);
        assert!((one_sided_second_derivative(&e, 0.0, h, Side::Left) - left).abs() < 1e-6);
        assert!((one_sided_second_derivative(&e, 0.0, h, Side::Right) - right).abs() < 1e-6);
        assert!((right - left - ks.second_derivative_jump()).abs() < 1e-12);
        let (l1, r1) = ks.pressure_second_derivatives(1.0);
        assert!((one_sided_second_derivative(&e, 1.0, h, Side::Left) - l1).abs() < 1e-6);
        assert!((one_sided_second_derivative(&e, 1.0, h, Side::Right) - r1).abs() < 1e-6);
        let (q1, q2) = ks.q();
        let (r_1, r_2) = ks.r();
        let expected = 4.0 * r_1 * r_2 * ks.gamma().powi(2) / ((q1 + q2) * (r_1 + r_2));
        assert!((ks.var_z2() - expected).abs() < 1e-15);
    }
}

#[test]
fn finite_pressure_increments_approach_the_limit_from_above() {
    let ks = KeepSwitch::new(0.6, 0.3).unwrap();
    let p = ks.pmp();
    let q = p.or_pmp().unwrap();
    let e = |t: usize| enumerate_pair(p.linear_rep(), q.linear_rep(), t, 1 << 20, false).unwrap().pressure(0.5);
    // Increments over two steps decrease towards e(½) but carry a correction of order T^{-1/2}.
    let incs: Vec<f64> = [8, 10, 12, 14].windows(2).map(|w| (e(w[1]) - e(w[0])) / 2.0).collect();
    assert!(incs.windows(2).all(|w| w[1] < w[0]), "{incs:?}");
    assert!(incs.iter().all(|&x| x > ks.pressure(0.5)));
}

fn image(path: &[usize]) -> Vec<usize> {
    path.windows(2).map(|w| if w[0] == w[1] { KEEP } else { SWITCH }).collect()
}

#[test]
fn sigma_three_ways() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for ks in grid() {
        let p = ks.pmp();
        let q = p.or_pmp().unwrap();
        let mut worst_asym: f64 = 0.0;
        for t in [1usize, 2, 5, 17, 40, 200] {
            for _ in 0..10 {
                let path: Vec<usize> = (0..=t).map(|_| rng.random_range(0..2)).collect();
                let s = TrajectoryStats::from_path(&path);
                let w = image(&path);
                let direct = p.linear_rep().log_prob(&w).unwrap() - q.linear_rep().log_prob(&w).unwrap();
                let counted = ks.sigma_from_stats(&s);
                let cosh = ks.sigma_cosh_form(&s);
                assert!((direct - counted).abs() < 1e-9 * (1.0 + direct.abs()), "{direct} vs {counted}");
                assert!((direct - cosh).abs() < 1e-9 * (1.0 + direct.abs()), "{direct} vs {cosh}");
                worst_asym = worst_asym.max((direct - ks.sigma_asymptotic(&s)).abs());
            }
        }
        let bound = 2.0 * std::f64::consts::LN_2 + (ks.r().0 / ks.r().1).ln().abs() + (ks.stationary()[0] / ks.stationary()[1]).ln().abs();
        assert!(worst_asym <= bound + 1e-9, "{worst_asym} > {bound}");
    }
}

#[test]
fn trajectory_stats_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ks = KeepSwitch::new(0.7, 0.2).unwrap();
    for t in [1, 10, 101] {
        let s = sample_trajectory(&ks, t, &mut rng);
        let n = s.counts();
        assert_eq!(n.iter().flatten().sum::<u64>(), t as u64);
        assert!((n[0][1] as i64 - n[1][0] as i64).abs() <= 1);
    }
}

#[test]
fn exchange_symmetry_preserves_word_probabilities() {
    let a = KeepSwitch::new(0.8, 0.35).unwrap().pmp();
    let b = KeepSwitch::new(0.35, 0.8).unwrap().pmp();
    for w in a.linear_rep().enumerate(8, 1 << 12).unwrap() {
        assert!((w.1 - b.linear_rep().log_prob(&w.0).unwrap()).abs() < 1e-12);
    }
    let (x, y) = (KeepSwitch::new(0.8, 0.35).unwrap(), KeepSwitch::new(0.35, 0.8).unwrap());
    assert!((x.ep() - y.ep()).abs() < 1e-15);
    assert!((x.pressure(0.3) - y.pressure(0.3)).abs() < 1e-15);
}

#[test]
fn fm_representation_reproduces_measure() {
    let ks = KeepSwitch::new(0.65, 0.15).unwrap();
    let fm = ks.fm_spec().linear_rep().unwrap();
    let pmp = ks.pmp();
    for (w, lp) in pmp.linear_rep().enumerate(7, 1 << 10).unwrap() {
        assert!((fm.log_prob(&w).unwrap() - lp).abs() < 1e-12);
    }
}

#[test]
fn block_entropies_are_sandwiched_by_the_hidden_chain() {
    // S(ℙ_T) = S(ξ₁ … ξ_{T+1}) − S(ξ₁ | ω) and the hidden path entropy is S(𝐩) + T·h.
    let ks = KeepSwitch::new(0.7, 0.4).unwrap();
    let st = ks.stationary();
    let s_p: f64 = st.iter().map(|&x| -x * x.ln()).sum();
    let h = ks.entropy_rate();
    for t in [4, 8, 12] {
        let block: f64 = ks.pmp().linear_rep().enumerate(t, 1 << 16).unwrap().iter().map(|(_, lp)| -lp.exp() * lp).sum();
        let upper = s_p + t as f64 * h;
        assert!(block <= upper + 1e-12 && block >= upper - 2f64.ln() - 1e-12, "T={t}: {block} vs {upper}");
    }
}

#[test]
fn limit_cdf_is_a_distribution() {
    let ks = KeepSwitch::new(0.6, 0.3).unwrap();
    let (v1, v2) = (ks.var_z1(), ks.var_z2());
    assert!(limit_cdf(v1, v2, -8.0) < 1e-8);
    assert!(limit_cdf(v1, v2, 8.0) > 1.0 - 1e-8);
    // Mean from the CDF: E X = ∫₀^∞ (1 − F) − ∫_{−∞}^0 F.
    let mean = crate::numerics::integrate(|x| 1.0 - limit_cdf(v1, v2, x), 0.0, 8.0, 16, 16)
        - crate::numerics::integrate(|x| limit_cdf(v1, v2, x), -8.0, 0.0, 16, 16);
    assert!((mean - ks.limit_mean()).abs() < 1e-7, "{mean} vs {}", ks.limit_mean());
    assert!((limit_cdf(1.0, 0.0, 0.0) - 0.5).abs() < 1e-15);
}

#[test]
fn sampler_is_reproducible_and_centred() {
    let ks = KeepSwitch::new(0.6, 0.3).unwrap();
    let a = ks_clt_sampler(&ks, 400, 2000, 7).unwrap();
    let b = ks_clt_sampler(&ks, 400, 2000, 7).unwrap();
    assert_eq!(a.standardized, b.standardized);
    // The standardized mean is −√(2 Var Z₂/π) up to O(T^{-1/2}).
    let bias = 1.0 / (400f64).sqrt();
    assert!((a.mean() - ks.limit_mean()).abs() < 4.0 * a.standard_error() + bias, "{} vs {}", a.mean(), ks.limit_mean());
    assert!(ks_clt_sampler(&ks, 0, 10, 1).is_err());
}

#[test]
fn critical_value_at_one_percent() {
    assert!((ks_critical_value(1, 0.01) - 1.627_624).abs() < 1e-6);
}
