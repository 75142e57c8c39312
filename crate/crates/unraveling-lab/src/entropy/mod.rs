//! Entropy production, entropic pressure, rate functions, error exponents,
//! weak-Gibbs diagnostics and entropy rates for a pair `(ℙ, ℙ̂)`.

mod curve;
mod gibbs;
mod rate;

use nalgebra::DMatrix;
use thiserror::Error;

pub use curve::{
    chernoff, fmt17, hoeffding, rate_function, rate_function_from, ErrorExponents, PressureCurve, RateFunction,
};
pub use gibbs::{weak_gibbs_diagnostic, WeakGibbsDiagnostic, WitnessPolicy};
pub use rate::{block_entropy, entropy_rate, entropy_rate_between, EntropyRate};

use crate::instrument::{for_each_pair, Instrument, InstrumentError, LinearRep, RepError};
use crate::numerics::{complexify, pairwise_sum, spectral_radius, CMatrix, CVector, LogSumExp, NumericsError, C64};
use crate::pmp::{PMPSpec, PmpError};

/// Finite-`T` pressure per step above which, if still increasing, the
/// pressure is reported as `+∞`.
pub const INFINITE_PRESSURE_CEILING: f64 = 50.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Instrument(#[from] InstrumentError),
    #[error(transparent)]
    Pmp(#[from] PmpError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("word is outside the support of ℙ")]
    NotInSupport,
    #[error("word {0:?} is charged by ℙ but not by ℙ̂: the support assumption fails")]
    SupportViolation(Vec<usize>),
    #[error("entropy labels ΔS are required")]
    MissingLabels,
    #[error("invalid grid: {0}")]
    Grid(String),
}

impl EntropyError {
    pub fn budget_exhausted(&self) -> bool {
        match self {
            EntropyError::Rep(e) => e.budget_exhausted(),
            EntropyError::Instrument(e) => e.budget_exhausted(),
            EntropyError::Pmp(e) => e.budget_exhausted(),
            _ => false,
        }
    }
}

/// `σ_T(ω) = log ℙ_T(ω) − log ℙ̂_T(ω)` for `ω ∈ supp ℙ_T`.
pub fn sigma_t(p: &LinearRep, q: &LinearRep, w: &[usize]) -> Result<f64, EntropyError> {
    let lp = p.log_prob(w)?;
    if lp == f64::NEG_INFINITY {
        return Err(EntropyError::NotInSupport);
    }
    let lq = q.log_prob(w)?;
    if lq == f64::NEG_INFINITY {
        return Err(EntropyError::SupportViolation(w.to_vec()));
    }
    Ok(lp - lq)
}

/// Log-probabilities of every word of `supp ℙ_T` under both measures.
#[derive(Debug, Clone)]
pub struct PairEnumeration {
    pub t: usize,
    pub log_p: Vec<f64>,
    pub log_q: Vec<f64>,
    pub words: Option<Vec<Vec<usize>>>,
}

/// Exhaustive, support-pruned enumeration of `supp ℙ_T` in lexicographic order.
pub fn enumerate_pair(p: &LinearRep, q: &LinearRep, t: usize, budget: u64, keep_words: bool) -> Result<PairEnumeration, EntropyError> {
    let mut log_p = Vec::new();
    let mut log_q = Vec::new();
    let mut words = keep_words.then(Vec::new);
    for_each_pair(p, q, t, budget, |w, lp, lq| {
        log_p.push(lp);
        log_q.push(lq);
        if let Some(ws) = words.as_mut() {
            ws.push(w.to_vec());
        }
    })?;
    Ok(PairEnumeration { t, log_p, log_q, words })
}

impl PairEnumeration {
    /// `e_T(α) = log Σ_{supp ℙ_T} ℙ_T^{1−α} ℙ̂_T^{α}`.
    pub fn pressure(&self, alpha: f64) -> f64 {
        let mut acc = LogSumExp::new();
        for (&lp, &lq) in self.log_p.iter().zip(&self.log_q) {
            if lq == f64::NEG_INFINITY {
                if alpha < 0.0 {
                    return f64::INFINITY;
                }
                if alpha == 0.0 {
                    acc.push(lp);
                }
                continue;
            }
            acc.push((1.0 - alpha) * lp + alpha * lq);
        }
        acc.value()
    }

    /// `E_ℙ(σ_T)`, the relative entropy of `ℙ_T` with respect to `ℙ̂_T`.
    pub fn mean_sigma(&self) -> f64 {
        let terms: Vec<f64> = self
            .log_p
            .iter()
            .zip(&self.log_q)
            .map(|(&lp, &lq)| if lq == f64::NEG_INFINITY { f64::INFINITY } else { lp.exp() * (lp - lq) })
            .collect();
        pairwise_sum(&terms)
    }

    /// `Σ_{Ω_T} |ℙ_T − ℙ̂_T|`, using `ℙ̂_T(Ω_T \ supp ℙ_T) = 1 − ℙ̂_T(supp ℙ_T)`.
    pub fn total_variation_sum(&self) -> f64 {
        let diffs: Vec<f64> = self.log_p.iter().zip(&self.log_q).map(|(&a, &b)| (a.exp() - b.exp()).abs()).collect();
        let q_mass: Vec<f64> = self.log_q.iter().map(|x| x.exp()).collect();
        pairwise_sum(&diffs) + (1.0 - pairwise_sum(&q_mass)).max(0.0)
    }

    /// `(1/T) log[¼(2 − Σ|ℙ_T − ℙ̂_T|)]`, the finite-`T` Chernoff exponent.
    pub fn chernoff_finite(&self) -> f64 {
        (0.25 * (2.0 - self.total_variation_sum())).ln() / self.t as f64
    }
}

/// `e_T(α)` by exhaustive enumeration.
pub fn finite_pressure(p: &LinearRep, q: &LinearRep, alpha: f64, t: usize, budget: u64) -> Result<f64, EntropyError> {
    let mut acc = LogSumExp::new();
    let mut infinite = false;
    for_each_pair(p, q, t, budget, |_, lp, lq| {
        if lq == f64::NEG_INFINITY {
            infinite |= alpha < 0.0;
            if alpha == 0.0 {
                acc.push(lp);
            }
        } else {
            acc.push((1.0 - alpha) * lp + alpha * lq);
        }
    })?;
    Ok(if infinite { f64::INFINITY } else { acc.value() })
}

/// Numerical verdict on a sequence of `e_T(α)/T` values along increasing `T`:
/// `+∞` once the last value exceeds the ceiling while the sequence is still increasing.
pub fn pressure_verdict(per_step: &[f64], ceiling: f64) -> Option<f64> {
    let n = per_step.len();
    if n >= 2 && per_step[n - 1] > ceiling && per_step[n - 1] > per_step[n - 2] {
        Some(f64::INFINITY)
    } else {
        per_step.last().copied()
    }
}

/// `log r(M)` for a matrix preserving a cone containing `start`.
pub fn log_spectral_radius(m: &DMatrix<f64>, start: Option<&nalgebra::DVector<f64>>) -> Result<f64, EntropyError> {
    let cm = complexify(m);
    let s = start.map(|v| CVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0))));
    Ok(spectral_radius(&cm, s.as_ref())?.radius.ln())
}

/// `e(α) = log r(Φ(α))` for an instrument with ΔS labels.
pub fn pressure_spectral(inst: &Instrument, alpha: f64) -> Result<f64, EntropyError> {
    let m = inst.deformed_matrix(alpha).map_err(|e| match e {
        InstrumentError::MissingLabels => EntropyError::MissingLabels,
        other => other.into(),
    })?;
    let d = inst.dim();
    let id = crate::instrument::hermitian_coords(&CMatrix::identity(d, d));
    log_spectral_radius(&m, Some(&id))
}

/// `e(α) = log r(M(α))`, `M(α) = Σ_a e^{-αΔS(a)} M_a`.
pub fn pressure_spectral_pmp(spec: &PMPSpec, alpha: f64) -> Result<f64, EntropyError> {
    if spec.delta_s().is_none() {
        return Err(EntropyError::MissingLabels);
    }
    let m = spec.deformed_matrix(alpha)?;
    log_spectral_radius(&m.transpose(), Some(&nalgebra::DVector::from_element(spec.dim(), 1.0)))
}

/// Mean entropy production of a labelled instrument: `Σ_a ΔS(a) tr(ρ Φ_a[1])`.
pub fn entropy_production(inst: &Instrument) -> Result<f64, EntropyError> {
    let ds = inst.delta_s().ok_or(EntropyError::MissingLabels)?;
    let probs = inst.one_step_probs();
    Ok(pairwise_sum(&ds.iter().zip(&probs).map(|(s, p)| s * p).collect::<Vec<_>>()))
}

/// `Σ_a ΔS(a) 𝐩 M_a 𝟏`.
pub fn entropy_production_pmp(spec: &PMPSpec) -> Result<f64, EntropyError> {
    let ds = spec.delta_s().ok_or(EntropyError::MissingLabels)?;
    let probs = spec.one_step_probs();
    Ok(pairwise_sum(&ds.iter().zip(&probs).map(|(s, p)| s * p).collect::<Vec<_>>()))
}

/// `ep = −e′(0)` by a central difference of step `h` on a pressure function.
pub fn ep_from_pressure<F: Fn(f64) -> f64>(e: F, h: f64) -> f64 {
    -(e(h) - e(-h)) / (2.0 * h)
}

/// `ep` as the intercept of a least-squares fit of `(1/T) E(σ_T)` against `1/T`.
pub fn ep_from_enumeration(p: &LinearRep, q: &LinearRep, ts: &[usize], budget: u64) -> Result<f64, EntropyError> {
    if ts.len() < 2 {
        return Err(EntropyError::Grid("need at least two horizons".into()));
    }
    let pts = ts
        .iter()
        .map(|&t| Ok((1.0 / t as f64, enumerate_pair(p, q, t, budget, false)?.mean_sigma() / t as f64)))
        .collect::<Result<Vec<_>, EntropyError>>()?;
    Ok(linear_fit(&pts).0)
}

/// Least-squares line `y = a + b x`; returns `(a, b)`.
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

/// Relative entropy `S(A|B) = tr A (log A − log B)` of positive definite matrices.
pub fn relative_entropy(a: &CMatrix, b: &CMatrix) -> Result<f64, EntropyError> {
    let log = |m: &CMatrix| -> Result<CMatrix, EntropyError> {
        let e = m.clone().symmetric_eigen();
        if e.eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(NumericsError::InvalidProbVector { reason: "matrix is not positive definite".into() }.into());
        }
        let d = nalgebra::DVector::from_iterator(e.eigenvalues.len(), e.eigenvalues.iter().map(|l| C64::new(l.ln(), 0.0)));
        Ok(&e.eigenvectors * CMatrix::from_diagonal(&d) * e.eigenvectors.adjoint())
    };
    Ok((a * (log(a)? - log(b)?)).trace().re)
}

/// Fit of `T·(e_T/T − e) ≈ C` over several horizons.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceFit {
    pub ts: Vec<usize>,
    /// `T·(e_T/T − e)` for each horizon.
    pub scaled_errors: Vec<f64>,
    pub c: f64,
    /// `max_T |T·(e_T/T − e) − C| / |C|`.
    pub relative_residual: f64,
}

pub fn fit_inverse_t(ts: &[usize], finite: &[f64], limit: f64) -> ConvergenceFit {
    let scaled: Vec<f64> = ts.iter().zip(finite).map(|(&t, &e)| e - t as f64 * limit).collect();
    let c = scaled.iter().sum::<f64>() / scaled.len() as f64;
    let dev = scaled.iter().map(|x| (x - c).abs()).fold(0.0, f64::max);
    let relative_residual = if c.abs() > 0.0 { dev / c.abs() } else if dev == 0.0 { 0.0 } else { f64::INFINITY };
    ConvergenceFit { ts: ts.to_vec(), scaled_errors: scaled, c, relative_residual }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instrument::Alphabet;
    use nalgebra::DMatrix;

    fn ks(q1: f64, q2: f64) -> PMPSpec {
        let mk = DMatrix::from_row_slice(2, 2, &[q1, 0.0, 0.0, q2]);
        let ms = DMatrix::from_row_slice(2, 2, &[0.0, 1.0 - q1, 1.0 - q2, 0.0]);
        PMPSpec::from_matrices(Alphabet::new(["K", "S"]).unwrap(), vec![mk, ms])
            .unwrap()
            .with_theta(vec![1, 0])
            .unwrap()
    }

    #[test]
    fn identical_measures_have_no_entropy_production() {
        let s = ks(0.6, 0.3);
        let r = s.linear_rep();
        let en = enumerate_pair(r, r, 8, 1_000_000, false).unwrap();
        assert!(en.mean_sigma().abs() < 1e-15);
        assert!(en.pressure(0.0).abs() < 1e-14);
        assert!(en.pressure(0.7).abs() < 1e-14);
        assert_eq!(sigma_t(r, r, &[0, 1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn pressure_vanishes_at_zero_and_one() {
        let s = ks(0.6, 0.3);
        let hat = s.or_pmp().unwrap();
        let en = enumerate_pair(s.linear_rep(), hat.linear_rep(), 10, 1_000_000, false).unwrap();
        assert!(en.pressure(0.0).abs() < 1e-13);
        assert!(en.pressure(1.0).abs() < 1e-13);
        assert!(en.mean_sigma() > 0.0);
        let direct = finite_pressure(s.linear_rep(), hat.linear_rep(), 0.5, 10, 1_000_000).unwrap();
        assert!((direct - en.pressure(0.5)).abs() < 1e-13);
    }

    #[test]
    fn support_violation_is_reported() {
        let m0 = DMatrix::from_row_slice(1, 1, &[1.0]);
        let m1 = DMatrix::from_row_slice(1, 1, &[0.0]);
        let p = PMPSpec::from_matrices(Alphabet::numbered(2), vec![m0.clone(), m1.clone()]).unwrap();
        let q = PMPSpec::from_matrices(Alphabet::numbered(2), vec![m0 * 0.5, DMatrix::from_element(1, 1, 0.5)]).unwrap();
        assert!(sigma_t(q.linear_rep(), p.linear_rep(), &[1]).is_err());
        assert_eq!(finite_pressure(q.linear_rep(), p.linear_rep(), -1.0, 3, 100).unwrap(), f64::INFINITY);
    }

    #[test]
    fn relative_entropy_of_commuting_states() {
        let a = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(0.25, 0.0), C64::new(0.75, 0.0)]));
        let b = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        let expect = 0.25 * (0.5f64).ln() + 0.75 * (1.5f64).ln();
        assert!((relative_entropy(&a, &b).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn verdict_requires_growth_past_ceiling() {
        assert_eq!(pressure_verdict(&[10.0, 60.0], 50.0), Some(f64::INFINITY));
        assert_eq!(pressure_verdict(&[70.0, 60.0], 50.0), Some(60.0));
    }
}
