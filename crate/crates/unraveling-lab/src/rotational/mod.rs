//! The rotational instrument on `ℂ²` with outcomes `{0, 1, 2, 3}`, closed forms
//! for the gap words `1 0^T 1`, and the continued-fraction machinery used to
//! build angles with singular pressure.

mod angle;
mod cf;
mod construct;
mod probe;

use thiserror::Error;

use crate::instrument::{Alphabet, CPMap, DensityMatrix, Instrument, InstrumentError};
use crate::numerics::{CMatrix, C64};

pub use angle::{AngleExpansion, LogInterval, RotationAngle, DEFAULT_PRECISION_BITS};
pub use cf::{cf_expand, cf_expand_interval, f64_to_rational, ln_big, CfSummary, ContinuedFraction};
pub use construct::{
    construct_delta, scan_lower_bound, Certificate, ConstructedAngle, ConstructionOptions, ConvergentBound, Growth,
    DEFAULT_BIT_BUDGET,
};
pub use probe::{
    derivative_witness, divergence_probe, log_prob_gap, log_prob_gap_reversed, u_increment_report, DerivativeRow, DerivativeWitness,
    DivergenceProbe, DivergenceVerdict, UIncrementReport, WitnessRow,
};

#[derive(Debug, Error)]
pub enum RotationalError {
    #[error("Δ = {0} is outside [0, 2[")]
    Range(f64),
    #[error("Δ = {0} is within 1e-12 of the rational {1}/{2}; the support of the unraveling collapses")]
    Rational(f64, i64, i64),
    #[error("continued fraction needs {requested} quotients but only {available} are determined")]
    PrecisionExhausted { available: usize, requested: usize },
    #[error("partial quotients must be positive")]
    ZeroQuotient,
    #[error("horizon exhausted: {0}")]
    Horizon(String),
    #[error("invalid interval ]{0}, {1}[")]
    Interval(f64, f64),
    #[error("seed: {0}")]
    Seed(String),
    #[error("unknown growth function {0:?}; expected T2 or EXP_T2")]
    Growth(String),
    #[error("word {0:?} is not of the form 1 0^T 1")]
    WordShape(String),
    #[error(transparent)]
    Instrument(#[from] InstrumentError),
}

pub const SYMBOLS: [&str; 4] = ["0", "1", "2", "3"];

/// `θ = (0 2)`, fixing 1 and 3.
pub const THETA: [usize; 4] = [2, 1, 0, 3];

/// Largest denominator searched when flagging rational angles.
const RATIONAL_SEARCH: i64 = 10_000;

fn real(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_slice(rows, cols, &data.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
}

/// `R_x = [[cos πx, −sin πx], [sin πx, cos πx]]`.
pub fn rotation(x: f64) -> CMatrix {
    let (s, c) = (std::f64::consts::PI * x).sin_cos();
    real(2, 2, &[c, -s, s, c])
}

fn unit(i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// Smallest `(p, q)` with `|qΔ − p| ≤ 1e-12 q`, if any with `q ≤ 10⁴`.
pub fn rational_witness(delta: f64) -> Option<(i64, i64)> {
    (1..=RATIONAL_SEARCH).find_map(|q| {
        let x = q as f64 * delta;
        let p = x.round();
        ((x - p).abs() <= 1e-12 * q as f64).then_some((p as i64, q))
    })
}

/// Heisenberg maps `Φ₀ = ⅓R_Δ·R_{−Δ}`, `Φ₁ = (1/12)V·V*`, `Φ₂ = ⅙tr(·)𝟙 − Φ₁`,
/// `Φ₃ = ⅙tr(·)𝟙` with `V = |e₂⟩⟨e₁|`, as Kraus families.
pub fn rotational_maps(delta: f64) -> Result<Vec<CPMap>, RotationalError> {
    let sixth = (1.0 / 6.0f64).sqrt();
    let twelfth = (1.0 / 12.0f64).sqrt();
    let scale = |m: CMatrix, c: f64| m * C64::new(c, 0.0);
    let phi0 = CPMap::new(2, vec![scale(rotation(-delta), (1.0 / 3.0f64).sqrt())])?;
    let phi1 = CPMap::new(2, vec![scale(unit(0, 1), twelfth)])?;
    let phi2 = CPMap::new(
        2,
        vec![scale(unit(0, 0), sixth), scale(unit(0, 1), twelfth), scale(unit(1, 0), sixth), scale(unit(1, 1), sixth)],
    )?;
    let phi3 = CPMap::new(2, (0..4).map(|k| scale(unit(k / 2, k % 2), sixth)).collect())?;
    Ok(vec![phi0, phi1, phi2, phi3])
}

/// The rotational instrument with `ρ = ½𝟙` and `θ = (0 2)`.
pub fn rotational_instrument(delta: f64) -> Result<Instrument, RotationalError> {
    if !(0.0..2.0).contains(&delta) {
        return Err(RotationalError::Range(delta));
    }
    if let Some((p, q)) = rational_witness(delta) {
        return Err(RotationalError::Rational(delta, p, q));
    }
    let alphabet = Alphabet::new(SYMBOLS)?;
    Ok(Instrument::new(alphabet, rotational_maps(delta)?, DensityMatrix::maximally_mixed(2), THETA.to_vec(), None)?)
}

/// Gap lengths of `ω`: every `1 0^n 1` with `n ≥ 1`, left to right.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct GapProfile {
    pub len: usize,
    pub gaps: Vec<usize>,
}

impl GapProfile {
    pub fn r(&self) -> usize {
        self.gaps.len()
    }
}

pub fn gap_profile(word: &[usize]) -> GapProfile {
    let mut gaps = Vec::new();
    for (i, _) in word.iter().enumerate().filter(|(_, &a)| a == 1) {
        let zeros = word[i + 1..].iter().take_while(|&&a| a == 0).count();
        if zeros > 0 && word.get(i + 1 + zeros) == Some(&1) {
            gaps.push(zeros);
        }
    }
    GapProfile { len: word.len(), gaps }
}

/// [`gap_profile`] of a word written with the digits `0`–`3`.
pub fn gap_profile_str(word: &str) -> Result<GapProfile, RotationalError> {
    let symbols: Option<Vec<usize>> = word.chars().map(|c| c.to_digit(4).map(|d| d as usize)).collect();
    symbols.map(|s| gap_profile(&s)).ok_or_else(|| RotationalError::WordShape(word.to_string()))
}

/// Length `T` of a word `1 0^T 1`.
pub fn gap_word_length(word: &[usize]) -> Option<usize> {
    let t = word.len().checked_sub(2)?;
    (t >= 1 && word[0] == 1 && word[t + 1] == 1 && word[1..=t].iter().all(|&a| a == 0)).then_some(t)
}

/// `log ℙ([1 0^T 1]) = −log 288 − T log 3 + log sin²(TπΔ)` for a float angle.
pub fn word_prob_closed(delta: f64, word: &[usize]) -> Result<f64, RotationalError> {
    let t = gap_word_length(word).ok_or_else(|| RotationalError::WordShape(format!("{word:?}")))?;
    let b = log_prob_gap(&RotationAngle::Float(delta), &num_bigint::BigUint::from(t), DEFAULT_PRECISION_BITS)?;
    Ok(0.5 * (b.lo + b.hi))
}

#[cfg(test)]
mod tests;
