//! Currents, equilibrium covariances and Onsager matrices for the Keep–Switch
//! family parametrized by a force `ε`: `q_i = ½ − ε_i`, `r_i = ½ + ε_i`.

use std::ops::{Add, Div, Mul, Sub};

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{KeepSwitch, KeepSwitchError, KEEP, SWITCH};
use crate::numerics::{gauss_legendre, pairwise_sum};

/// Finite-difference step for derivatives in `ε`.
pub const FD_STEP: f64 = 1e-4;
/// Largest horizon accepted for exact enumeration.
pub const MAX_ENUMERATION_T: usize = 20;
const LAMBDA_NODES: usize = 16;

/// A value together with its gradient with respect to `(ε₁, ε₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dual2 {
    v: f64,
    d: [f64; 2],
}

impl Dual2 {
    fn constant(v: f64) -> Self {
        Self { v, d: [0.0; 2] }
    }

    fn variable(v: f64, i: usize) -> Self {
        let mut d = [0.0; 2];
        d[i] = 1.0;
        Self { v, d }
    }

    fn ln(self) -> Self {
        Self { v: self.v.ln(), d: self.d.map(|x| x / self.v) }
    }
}

impl Add for Dual2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { v: self.v + o.v, d: [self.d[0] + o.d[0], self.d[1] + o.d[1]] }
    }
}

impl Sub for Dual2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { v: self.v - o.v, d: [self.d[0] - o.d[0], self.d[1] - o.d[1]] }
    }
}

impl Mul for Dual2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            d: [self.d[0] * o.v + self.v * o.d[0], self.d[1] * o.v + self.v * o.d[1]],
        }
    }
}

impl Div for Dual2 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.v;
        Self {
            v: self.v * inv,
            d: [(self.d[0] - self.v * inv * o.d[0]) * inv, (self.d[1] - self.v * inv * o.d[1]) * inv],
        }
    }
}

/// `log ℙ^{(ε)}([ω])` with its `ε`-gradient.
fn log_prob_dual(eps: [f64; 2], word: &[usize]) -> Dual2 {
    let half = Dual2::constant(0.5);
    let e1 = Dual2::variable(eps[0], 0);
    let e2 = Dual2::variable(eps[1], 1);
    let (q1, q2, r1, r2) = (half - e1, half - e2, half + e1, half + e2);
    let total = r1 + r2;
    let mut row = [r2 / total, r1 / total];
    for &a in word {
        row = match a {
            KEEP => [row[0] * q1, row[1] * q2],
            _ => [row[1] * r2, row[0] * r1],
        };
    }
    (row[0] + row[1]).ln()
}

fn reversed(word: &[usize]) -> Vec<usize> {
    word.iter().rev().map(|&a| if a == KEEP { SWITCH } else { KEEP }).collect()
}

/// `σ_T^{(ε)}(ω)` with its `ε`-gradient.
fn sigma_dual(eps: [f64; 2], word: &[usize]) -> Dual2 {
    log_prob_dual(eps, word) - log_prob_dual(eps, &reversed(word))
}

/// `σ_T^{(ε)}(ω) = log ℙ^{(ε)}(ω) − log ℙ^{(ε)}(Θ_T ω)`.
pub fn sigma_eps(eps: [f64; 2], word: &[usize]) -> f64 {
    sigma_dual(eps, word).v
}

/// The current `J_T^{(ε)}(ω) = ∫₀¹ (∇_ε σ_T)^{(λε)}(ω) dλ`.
pub fn current(eps: [f64; 2], word: &[usize]) -> Vector2<f64> {
    let (nodes, weights) = gauss_legendre(LAMBDA_NODES);
    nodes.iter().zip(&weights).fold(Vector2::zeros(), |acc, (&x, &w)| {
        let lambda = 0.5 * (x + 1.0);
        let g = sigma_dual([lambda * eps[0], lambda * eps[1]], word).d;
        acc + Vector2::new(g[0], g[1]) * (0.5 * w)
    })
}

fn word_of(index: usize, t: usize) -> Vec<usize> {
    (0..t).map(|k| (index >> (t - 1 - k)) & 1).collect()
}

fn check_eps(eps: [f64; 2]) -> Result<(), KeepSwitchError> {
    if eps.iter().all(|e| e.abs() < 0.5) {
        Ok(())
    } else {
        Err(KeepSwitchError::Range(0.5 - eps[0], 0.5 - eps[1]))
    }
}

fn check_horizon(t: usize) -> Result<(), KeepSwitchError> {
    if (1..=MAX_ENUMERATION_T).contains(&t) {
        Ok(())
    } else {
        Err(KeepSwitchError::Sampler(format!("exact enumeration needs 1 ≤ T ≤ {MAX_ENUMERATION_T} (got {t})")))
    }
}

/// `J̄_T^{(ε)} = (1/T) E^{(ε)}(J_T^{(ε)})` by exact enumeration of `Ω_T`.
pub fn mean_current(eps: [f64; 2], t: usize) -> Result<Vector2<f64>, KeepSwitchError> {
    check_eps(eps)?;
    check_horizon(t)?;
    let terms: Vec<[f64; 2]> = (0..1usize << t)
        .into_par_iter()
        .map(|i| {
            let w = word_of(i, t);
            let p = log_prob_dual(eps, &w).v.exp();
            let j = current(eps, &w);
            [p * j[0], p * j[1]]
        })
        .collect();
    let sum = |k: usize| pairwise_sum(&terms.iter().map(|x| x[k]).collect::<Vec<_>>());
    Ok(Vector2::new(sum(0), sum(1)) / t as f64)
}

/// `D_T = E^{(0)}(J_T J_Tᵀ)/T` by enumeration with the equilibrium currents.
pub fn equilibrium_covariance(t: usize) -> Result<Matrix2<f64>, KeepSwitchError> {
    check_horizon(t)?;
    let terms: Vec<[f64; 4]> = (0..1usize << t)
        .into_par_iter()
        .map(|i| {
            let w = word_of(i, t);
            let p = log_prob_dual([0.0; 2], &w).v.exp();
            let j = current([0.0; 2], &w);
            [p * j[0] * j[0], p * j[0] * j[1], p * j[1] * j[0], p * j[1] * j[1]]
        })
        .collect();
    let sum = |k: usize| pairwise_sum(&terms.iter().map(|x| x[k]).collect::<Vec<_>>());
    Ok(Matrix2::new(sum(0), sum(1), sum(2), sum(3)) / t as f64)
}

/// `D_T` from the law of `N_T ~ Bin(T, ½)` and `J_T = 2(2N_T − T)(1, 1)`.
pub fn binomial_covariance(t: usize) -> Matrix2<f64> {
    let tf = t as f64;
    let mut log_choose = 0.0_f64;
    let mut second = 0.0;
    for n in 0..=t {
        if n > 0 {
            log_choose += ((t - n + 1) as f64).ln() - (n as f64).ln();
        }
        let j = 2.0 * (2.0 * n as f64 - tf);
        second += (log_choose - tf * std::f64::consts::LN_2).exp() * j * j;
    }
    Matrix2::from_element(second / tf)
}

/// Onsager matrix `L_T = D_ε J̄_T|_{ε=0}` by central differences.
pub fn onsager_finite(t: usize) -> Result<Matrix2<f64>, KeepSwitchError> {
    let mut l = Matrix2::zeros();
    for j in 0..2 {
        let mut plus = [0.0; 2];
        let mut minus = [0.0; 2];
        plus[j] = FD_STEP;
        minus[j] = -FD_STEP;
        let col = (mean_current(plus, t)? - mean_current(minus, t)?) / (2.0 * FD_STEP);
        l.set_column(j, &col);
    }
    Ok(l)
}

/// `ep^{(ε)}` from the closed form.
pub fn ep_eps(eps: [f64; 2]) -> Result<f64, KeepSwitchError> {
    Ok(KeepSwitch::new(0.5 - eps[0], 0.5 - eps[1])?.ep())
}

/// `L_∞ = ½ Hess ep^{(ε)}|_{ε=0}`, since `ε·J̄^{(ε)} = ep^{(ε)}` and `J̄^{(Sε)} = SJ̄^{(ε)}`.
pub fn onsager_infinite(h: f64) -> Result<Matrix2<f64>, KeepSwitchError> {
    let ep = |a: f64, b: f64| ep_eps([a, b]);
    let mut hess = Matrix2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let mut s = [[0.0; 2]; 4];
            for (k, (si, sj)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].into_iter().enumerate() {
                s[k][i] += si * h;
                s[k][j] += sj * h;
            }
            let v = ep(s[0][0], s[0][1])? - ep(s[1][0], s[1][1])? - ep(s[2][0], s[2][1])? + ep(s[3][0], s[3][1])?;
            hess[(i, j)] = v / (4.0 * h * h);
        }
    }
    Ok(hess * 0.5)
}

/// Equilibrium one-step currents `j(a)`; `J_T^{(0)} = Σ_t j(ω_t)`.
pub fn equilibrium_step_currents() -> [Vector2<f64>; 2] {
    [current([0.0; 2], &[KEEP]), current([0.0; 2], &[SWITCH])]
}

/// `D_∞`: the covariance of the additive equilibrium current under the fair coin.
pub fn equilibrium_covariance_infinite() -> Matrix2<f64> {
    let [jk, js] = equilibrium_step_currents();
    let mean = (jk + js) * 0.5;
    (jk * jk.transpose() + js * js.transpose()) * 0.5 - mean * mean.transpose()
}

/// Monte Carlo covariance of `J_T/√T` at equilibrium.
pub fn sampled_equilibrium_covariance(t: usize, n: usize, seed: u64) -> Result<Matrix2<f64>, KeepSwitchError> {
    if t == 0 || n < 2 {
        return Err(KeepSwitchError::Sampler(format!("need T ≥ 1 and N ≥ 2 (got T = {t}, N = {n})")));
    }
    let [jk, js] = equilibrium_step_currents();
    let samples: Vec<Vector2<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let switches = (0..t).filter(|_| rng.random::<bool>()).count();
            (js * switches as f64 + jk * (t - switches) as f64) / (t as f64).sqrt()
        })
        .collect();
    let nf = n as f64;
    let mean_of = |k: usize| pairwise_sum(&samples.iter().map(|s| s[k]).collect::<Vec<_>>()) / nf;
    let m = Vector2::new(mean_of(0), mean_of(1));
    let entry = |a: usize, b: usize| {
        pairwise_sum(&samples.iter().map(|s| (s[a] - m[a]) * (s[b] - m[b])).collect::<Vec<_>>()) / (nf - 1.0)
    };
    Ok(Matrix2::new(entry(0, 0), entry(0, 1), entry(1, 0), entry(1, 1)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdrHorizon {
    pub t: usize,
    pub d_t: Matrix2<f64>,
    pub l_t: Matrix2<f64>,
    /// `J̄_T^{(ε)}` at the requested force.
    pub mean_current: Vector2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdrReport {
    pub eps: [f64; 2],
    pub horizons: Vec<FdrHorizon>,
    pub d_inf: Matrix2<f64>,
    pub d_inf_sampled: Option<Matrix2<f64>>,
    pub l_inf: Matrix2<f64>,
    /// `ep^{(ε)}` from the closed form.
    pub ep: f64,
}

/// Computes the fluctuation–dissipation quantities. `sample = Some((T, N, seed))`
/// adds a Monte Carlo estimate of `D_∞`.
pub fn fdr_compute(eps: [f64; 2], t_list: &[usize], sample: Option<(usize, usize, u64)>) -> Result<FdrReport, KeepSwitchError> {
    check_eps(eps)?;
    let horizons = t_list
        .iter()
        .map(|&t| {
            Ok(FdrHorizon { t, d_t: equilibrium_covariance(t)?, l_t: onsager_finite(t)?, mean_current: mean_current(eps, t)? })
        })
        .collect::<Result<Vec<_>, KeepSwitchError>>()?;
    let d_inf_sampled = sample.map(|(t, n, seed)| sampled_equilibrium_covariance(t, n, seed)).transpose()?;
    Ok(FdrReport {
        eps,
        horizons,
        d_inf: equilibrium_covariance_infinite(),
        d_inf_sampled,
        l_inf: onsager_infinite(1e-3)?,
        ep: ep_eps(eps)?,
    })
}
