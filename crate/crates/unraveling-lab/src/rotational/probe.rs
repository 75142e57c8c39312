//! Evidence for the singular behaviour of the pressure along the convergents of an angle.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::angle::{LogInterval, RotationAngle};
use super::construct::{ConstructedAngle, Growth};
use super::RotationalError;

/// Witness values must exceed this many nats per step, increasing over at least [`MIN_RUN`] convergents.
pub const DIVERGENCE_THRESHOLD: f64 = 50.0;
pub const MIN_RUN: usize = 3;

fn mu_plus() -> f64 {
    1.0 + std::f64::consts::FRAC_1_SQRT_2
}

/// Decay rate `c = log 6 − log(1 + 1/√2)` of `ℙ̂([1 0^T 1])`.
pub fn reversed_decay_rate() -> f64 {
    6f64.ln() - mu_plus().ln()
}

/// `log ℙ̂([1 0^T 1]) = log ℙ([1 2^T 1]) = log[(μ₊^T − μ₋^T)/(288√2·6^T)]`, `μ± = 1 ± 1/√2`.
pub fn log_prob_gap_reversed(t: f64) -> f64 {
    let ratio = (1.0 - std::f64::consts::FRAC_1_SQRT_2) / mu_plus();
    -(288.0 * std::f64::consts::SQRT_2).ln() - t * reversed_decay_rate() + (-ratio.powf(t)).ln_1p()
}

/// Bounds on `log ℙ([1 0^T 1]) = −log 288 − T log 3 + 2 log sin(πℓ(TΔ))`.
pub fn log_prob_gap(angle: &RotationAngle, t: &BigUint, precision_bits: u32) -> Result<LogInterval, RotationalError> {
    let ell = angle.log_ell(t, precision_bits)?;
    let tf = t.to_f64().unwrap_or(f64::INFINITY);
    let base = -288f64.ln() - tf * 3f64.ln();
    let ln_pi = std::f64::consts::PI.ln();
    // log sin(πx) for x = e^{l} ∈ ]0, ½], increasing in l.
    let log_sin = |l: f64, upper: bool| {
        if l > -18.0 {
            (std::f64::consts::PI * l.exp()).sin().ln()
        } else {
            let x = std::f64::consts::PI * l.exp();
            ln_pi + l + if upper { 0.0 } else { (-x * x / 6.0).ln_1p() }
        }
    };
    Ok(LogInterval { lo: base + 2.0 * log_sin(ell.lo, false), hi: base + 2.0 * log_sin(ell.hi, true) })
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessRow {
    pub index: usize,
    pub t: f64,
    pub log_p: LogInterval,
    pub log_p_hat: f64,
    /// Lower bound on `e_{T+2}(α)/(T+2)` from the single word `[1 0^T 1]` (α > 1) or `[1 2^T 1]` (α < 0).
    pub witness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceVerdict {
    Diverges,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceProbe {
    pub alpha: f64,
    pub rows: Vec<WitnessRow>,
    /// Number of trailing rows along which the witness strictly increases.
    pub increasing_run: usize,
    pub verdict: DivergenceVerdict,
}

fn convergent_times(c: &ConstructedAngle) -> Vec<(usize, BigUint)> {
    let cf = &c.expansion.cf;
    (1..=cf.depth()).map(|i| (i, cf.convergent(i).1.clone())).collect()
}

/// Single-word lower bounds for `e(α)`, `α ∉ [0, 1]`, along `T = q_i`.
pub fn divergence_probe(c: &ConstructedAngle, alpha: f64, precision_bits: u32) -> Result<DivergenceProbe, RotationalError> {
    if (0.0..=1.0).contains(&alpha) {
        return Err(RotationalError::Horizon(format!("α = {alpha} lies in [0, 1], where e is finite")));
    }
    let angle = c.angle();
    let mut rows = Vec::new();
    for (index, t) in convergent_times(c) {
        let log_p = log_prob_gap(&angle, &t, precision_bits)?;
        let tf = t.to_f64().unwrap_or(f64::INFINITY);
        let log_p_hat = log_prob_gap_reversed(tf);
        // For α < 0 the word [1 2^T 1] plays the role of [1 0^T 1] with ℙ and ℙ̂ exchanged.
        let beta = if alpha > 1.0 { alpha } else { 1.0 - alpha };
        let witness = ((1.0 - beta) * log_p.hi + beta * log_p_hat) / (tf + 2.0);
        rows.push(WitnessRow { index, t: tf, log_p, log_p_hat, witness });
    }
    let increasing_run = increasing_suffix(rows.iter().map(|r| r.witness));
    let last = rows.last().map_or(f64::NEG_INFINITY, |r| r.witness);
    let verdict = if increasing_run >= MIN_RUN && last > DIVERGENCE_THRESHOLD {
        DivergenceVerdict::Diverges
    } else {
        DivergenceVerdict::Inconclusive
    };
    Ok(DivergenceProbe { alpha, rows, increasing_run, verdict })
}

fn increasing_suffix(values: impl Iterator<Item = f64>) -> usize {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return 0;
    }
    let mut run = 1;
    for k in (1..v.len()).rev() {
        if v[k] > v[k - 1] {
            run += 1;
        } else {
            break;
        }
    }
    run
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivativeRow {
    pub index: usize,
    pub t: f64,
    /// `log[ℙ̂([1 0^T 1])·(−log ℙ([1 0^T 1]))/(T+2)]`, a lower bound.
    pub log_witness: f64,
    /// `−cT + log Γ(T) − log T` with `c` the decay rate of `ℙ̂([1 0^T 1])`.
    pub log_formula: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivativeWitness {
    pub rows: Vec<DerivativeRow>,
    /// Trailing rows along which `e^{−cT}Γ(T)/T` strictly increases.
    pub formula_run: usize,
    /// Trailing rows along which the word-level lower bound strictly increases.
    pub witness_run: usize,
}

/// The sequence bounding `(∂⁻e)(1)` from below along the convergents with a stored denominator.
pub fn derivative_witness(c: &ConstructedAngle, precision_bits: u32) -> Result<DerivativeWitness, RotationalError> {
    let angle = c.angle();
    let rate = reversed_decay_rate();
    let mut rows = Vec::new();
    for (index, t) in convergent_times(c) {
        let log_p = log_prob_gap(&angle, &t, precision_bits)?;
        let tf = t.to_f64().unwrap_or(f64::INFINITY);
        let log_witness = log_prob_gap_reversed(tf) + (-log_p.hi).ln() - (tf + 2.0).ln();
        let log_formula = -rate * tf + c.growth.log_gamma(tf) - tf.ln();
        rows.push(DerivativeRow { index, t: tf, log_witness, log_formula });
    }
    let formula_run = increasing_suffix(rows.iter().map(|r| r.log_formula));
    let witness_run = increasing_suffix(rows.iter().map(|r| r.log_witness));
    Ok(DerivativeWitness { rows, formula_run, witness_run })
}

#[derive(Debug, Clone, Serialize)]
pub struct UIncrementReport {
    pub growth: Growth,
    /// `(T, Σ_{n ≤ T−2} Γ(n) ℙ̂([1 0^n 1]), Σ_{n ≤ T−2} Γ(n) 3^{−n−2})`.
    pub rows: Vec<(usize, f64, f64)>,
    /// `Σ_{n ≥ 1} Γ(n) 3^{−n−2}` when finite.
    pub bound_limit: Option<f64>,
}

/// Increments `u_T − u_{T−1}` and their geometric majorant.
pub fn u_increment_report(growth: Growth, t_max: usize) -> UIncrementReport {
    let mut inc = 0.0;
    let mut bound = 0.0;
    let mut rows = Vec::new();
    for t in 3..=t_max {
        let n = (t - 2) as f64;
        let g = growth.gamma(n);
        inc += g * log_prob_gap_reversed(n).exp();
        bound += g * 3f64.powf(-n - 2.0);
        rows.push((t, inc, bound));
    }
    let bound_limit = match growth {
        Growth::Square => Some(1.0 / 6.0),
        Growth::ExpSquare => None,
    };
    UIncrementReport { growth, rows, bound_limit }
}
