//! Monte Carlo sampling of `σ_T` through the hidden two-state chain.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::erf::erfc;

use super::{KeepSwitch, KeepSwitchError};
use crate::numerics::{integrate, pairwise_sum};

/// Transition counts of a hidden path `ξ ∈ {+,−}^{T+1}` (index 0 is `+`), split by the
/// parity of the position `t ∈ [1, T]` of the transition `(ξ_t, ξ_{t+1})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrajectoryStats {
    pub t: usize,
    pub first: usize,
    /// `by_parity[0]` counts odd `t`, `by_parity[1]` even `t`.
    pub by_parity: [[[u64; 2]; 2]; 2],
}

impl TrajectoryStats {
    pub fn from_path(path: &[usize]) -> Self {
        let mut s = TrajectoryStats { t: path.len().saturating_sub(1), first: path[0], ..Default::default() };
        for (i, w) in path.windows(2).enumerate() {
            // i = t − 1, so odd t has even i.
            s.by_parity[i % 2][w[0]][w[1]] += 1;
        }
        s
    }

    /// `n_ab`.
    pub fn counts(&self) -> [[u64; 2]; 2] {
        let mut n = [[0; 2]; 2];
        for (a, row) in n.iter_mut().enumerate() {
            for (b, x) in row.iter_mut().enumerate() {
                *x = self.by_parity[0][a][b] + self.by_parity[1][a][b];
            }
        }
        n
    }

    /// `Δ_ab = n^e_ab − n^o_ab`.
    pub fn parity_delta(&self, a: usize, b: usize) -> i64 {
        self.by_parity[1][a][b] as i64 - self.by_parity[0][a][b] as i64
    }

    /// `U_T = n₊₊ + n₋₋ − n₊₋ − n₋₊`.
    pub fn u(&self) -> i64 {
        let n = self.counts();
        (n[0][0] + n[1][1]) as i64 - (n[0][1] + n[1][0]) as i64
    }

    /// `V_T = n₊₊ − n₋₋`.
    pub fn v(&self) -> i64 {
        let n = self.counts();
        n[0][0] as i64 - n[1][1] as i64
    }

    /// `W_T = Δ₊₋ − Δ₋₊`.
    pub fn w(&self) -> i64 {
        self.parity_delta(0, 1) - self.parity_delta(1, 0)
    }

    /// Counts of `ψ(ξ)`, the path with every odd position flipped, whose image is the
    /// θ-relabelled word: `n_cd(ψξ) = n^o_{c̄d} + n^e_{cd̄}`.
    pub fn flipped_counts(&self) -> [[u64; 2]; 2] {
        let mut n = [[0; 2]; 2];
        for (c, row) in n.iter_mut().enumerate() {
            for (d, x) in row.iter_mut().enumerate() {
                *x = self.by_parity[0][c ^ 1][d] + self.by_parity[1][c][d ^ 1];
            }
        }
        n
    }
}

fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

impl KeepSwitch {
    /// `σ_T = log ℙ(F(ξ)) − log ℙ(F(ψ(ξ)))` evaluated from the counts.
    pub fn sigma_from_stats(&self, s: &TrajectoryStats) -> f64 {
        self.log_prob_counts(s.first, &s.counts()) - self.log_prob_counts(s.first ^ 1, &s.flipped_counts())
    }

    /// The hyperbolic-cosine form
    /// `σ̂_T = ηU_T + log cosh(γV_T + δ(ξ)) − log cosh(γW_T + δ(ψ(ξ)))`.
    pub fn sigma_cosh_form(&self, s: &TrajectoryStats) -> f64 {
        let (r1, r2) = self.r();
        let (q1, q2) = self.q();
        let gamma = 0.5 * (q1 / q2).ln();
        let st = self.stationary();
        let delta = |first: usize, n: &[[u64; 2]; 2]| {
            0.5 * ((n[0][1] as f64 - n[1][0] as f64) * (r1 / r2).ln() + (st[first] / st[first ^ 1]).ln())
        };
        let d_xi = delta(s.first, &s.counts());
        let d_psi = delta(s.first ^ 1, &s.flipped_counts());
        self.eta() * s.u() as f64 + log_cosh(gamma * s.v() as f64 + d_xi) - log_cosh(gamma * s.w() as f64 + d_psi)
    }

    /// Leading behaviour `ηU_T + γ(|V_T| − |W_T|)`.
    pub fn sigma_asymptotic(&self, s: &TrajectoryStats) -> f64 {
        self.eta() * s.u() as f64 + self.gamma() * (s.v().abs() - s.w().abs()) as f64
    }
}

/// Samples `ξ₁ ~ 𝐩` and `T` steps of the chain `P = [[q₁, r₁], [r₂, q₂]]`.
pub fn sample_trajectory<R: RngCore>(ks: &KeepSwitch, t: usize, rng: &mut R) -> TrajectoryStats {
    let (q1, q2) = ks.q();
    let scale = u32::MAX as f64 + 1.0;
    let stay = [(q1 * scale) as u64, (q2 * scale) as u64];
    let mut state = if rng.random::<f64>() < ks.stationary()[0] { 0 } else { 1 };
    let mut s = TrajectoryStats { t, first: state, ..Default::default() };
    for i in 0..t {
        let next = if (rng.next_u32() as u64) < stay[state] { state } else { state ^ 1 };
        s.by_parity[i % 2][state][next] += 1;
        state = next;
    }
    s
}

/// A Monte Carlo sample of `(σ_T − T·ep)/√T`.
#[derive(Debug, Clone)]
pub struct CltSample {
    pub t: usize,
    pub seed: u64,
    pub standardized: Vec<f64>,
    /// Sample mean of `σ_T/T` and its standard error.
    pub sigma_rate: (f64, f64),
    /// Sample means of `U_T/T`, `V_T/T`, `W_T/T`.
    pub mean_uvw: [f64; 3],
}

impl CltSample {
    pub fn mean(&self) -> f64 {
        pairwise_sum(&self.standardized) / self.standardized.len() as f64
    }

    pub fn standard_error(&self) -> f64 {
        let n = self.standardized.len() as f64;
        let m = self.mean();
        let dev: Vec<f64> = self.standardized.iter().map(|x| (x - m).powi(2)).collect();
        (pairwise_sum(&dev) / (n - 1.0) / n).sqrt()
    }
}

/// Runs `n` independent trajectories of length `t`. Trajectory `i` draws from
/// ChaCha8 stream `i` of `seed`, so the sample does not depend on scheduling.
pub fn ks_clt_sampler(ks: &KeepSwitch, t: usize, n: usize, seed: u64) -> Result<CltSample, KeepSwitchError> {
    if t == 0 || n < 2 {
        return Err(KeepSwitchError::Sampler(format!("need T ≥ 1 and N ≥ 2 (got T = {t}, N = {n})")));
    }
    let ep = ks.ep();
    let results: Vec<(f64, [i64; 3])> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let s = sample_trajectory(ks, t, &mut rng);
            (ks.sigma_from_stats(&s), [s.u(), s.v(), s.w()])
        })
        .collect();
    let tf = t as f64;
    let rates: Vec<f64> = results.iter().map(|(s, _)| s / tf).collect();
    let nf = n as f64;
    let mean_rate = pairwise_sum(&rates) / nf;
    let var_rate = pairwise_sum(&rates.iter().map(|x| (x - mean_rate).powi(2)).collect::<Vec<_>>()) / (nf - 1.0);
    let mean_of = |k: usize| pairwise_sum(&results.iter().map(|(_, x)| x[k] as f64 / tf).collect::<Vec<_>>()) / nf;
    Ok(CltSample {
        t,
        seed,
        standardized: results.iter().map(|(s, _)| (s - tf * ep) / tf.sqrt()).collect(),
        sigma_rate: (mean_rate, (var_rate / nf).sqrt()),
        mean_uvw: [mean_of(0), mean_of(1), mean_of(2)],
    })
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// CDF of `Z₁ − |Z₂|` for independent centred normals with the given variances:
/// `F(x) = ∫₀^∞ 2φ(u) Φ((x + σ₂u)/σ₁) du`.
pub fn limit_cdf(var_z1: f64, var_z2: f64, x: f64) -> f64 {
    let (s1, s2) = (var_z1.sqrt(), var_z2.sqrt());
    if s2 == 0.0 {
        return normal_cdf(x / s1);
    }
    if s1 == 0.0 {
        return if x >= 0.0 { 1.0 } else { 2.0 * normal_cdf(x / s2) };
    }
    let phi = |u: f64| (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
    integrate(|u| 2.0 * phi(u) * normal_cdf((x + s2 * u) / s1), 0.0, 10.0, 40, 20)
}

/// `sup_x |F_n(x) − F(x)|` of a sample against a continuous CDF.
pub fn kolmogorov_distance<F: Fn(f64) -> f64 + Sync>(sample: &[f64], cdf: F) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .reduce(|| 0.0, f64::max)
}

/// Asymptotic Kolmogorov–Smirnov critical value `√(−½ log(level/2)/n)`.
pub fn ks_critical_value(n: usize, level: f64) -> f64 {
    (-0.5 * (level / 2.0).ln() / n as f64).sqrt()
}
