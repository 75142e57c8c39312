//! Positive matrix-product measures and their hidden-Markov / function-Markov representations.

mod convert;
mod json;

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub use convert::{convert, FMSpec, HMSpec, MeasureSpec, SpecKind};
pub use json::SpecDoc;

use crate::instrument::{Alphabet, CPMap, DensityMatrix, Instrument, InstrumentError, LinearRep, RepError, Word};
use crate::numerics::{stationary_vector, CMatrix, NumericsError, ProbVector, C64};

/// Tolerance for stochasticity and stationarity of supplied data.
pub const SPEC_TOL: f64 = 1e-12;
/// Tolerance when comparing a supplied stationary vector with a recomputed one.
pub const STATIONARY_MATCH_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PmpError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Instrument(#[from] InstrumentError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("negative or non-finite matrix entry")]
    Negative,
    #[error("Σ_a M_a is not right-stochastic (row defect {0:e})")]
    NotStochastic(f64),
    #[error("vector is not stationary (residual {0:e})")]
    NotStationary(f64),
    #[error("stationary vector has a zero entry; a faithful state is required")]
    ZeroEntry,
    #[error("map f is not onto the alphabet")]
    NotOnto,
    #[error("θ is not an involution of the alphabet")]
    BadInvolution,
    #[error("invalid document: {0}")]
    Document(String),
}

impl PmpError {
    pub fn budget_exhausted(&self) -> bool {
        match self {
            PmpError::Rep(e) => e.budget_exhausted(),
            PmpError::Instrument(e) => e.budget_exhausted(),
            _ => false,
        }
    }
}

/// Positive matrix-product measure `ℙ(ω) = 𝐩 M_{ω_1} ⋯ M_{ω_T} 𝟏`.
#[derive(Debug, Clone)]
pub struct PMPSpec {
    alphabet: Alphabet,
    matrices: Vec<DMatrix<f64>>,
    p: ProbVector,
    theta: Vec<usize>,
    delta_s: Option<Vec<f64>>,
    rep: OnceLock<LinearRep>,
}

fn check_nonnegative(ms: &[DMatrix<f64>]) -> Result<(), PmpError> {
    if ms.iter().flat_map(|m| m.iter()).any(|&x| !x.is_finite() || x < 0.0) {
        Err(PmpError::Negative)
    } else {
        Ok(())
    }
}

/// Largest deviation of the row sums of `m` from one.
pub(crate) fn row_defect(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max)
}

/// `max |x·m − x|`.
pub(crate) fn stationarity_residual(x: &[f64], m: &DMatrix<f64>) -> f64 {
    let v = DVector::from_column_slice(x);
    (m.tr_mul(&v) - v).amax()
}

impl PMPSpec {
    /// Validates nonnegativity, stochasticity of `Σ M_a` and stationarity of `p`.
    pub fn new(alphabet: Alphabet, matrices: Vec<DMatrix<f64>>, p: ProbVector) -> Result<Self, PmpError> {
        let d = p.len();
        if matrices.len() != alphabet.len() || matrices.iter().any(|m| m.shape() != (d, d)) {
            return Err(PmpError::Shape(format!("expected {} matrices of size {d}x{d}", alphabet.len())));
        }
        check_nonnegative(&matrices)?;
        let total = matrices.iter().fold(DMatrix::zeros(d, d), |acc, m| acc + m);
        let defect = row_defect(&total);
        if defect > SPEC_TOL * d as f64 {
            return Err(PmpError::NotStochastic(defect));
        }
        let residual = stationarity_residual(p.as_slice(), &total);
        if residual > SPEC_TOL * d as f64 {
            return Err(PmpError::NotStationary(residual));
        }
        let theta = (0..alphabet.len()).collect();
        Ok(Self { alphabet, matrices, p, theta, delta_s: None, rep: OnceLock::new() })
    }

    /// Uses the unique stationary vector of `Σ_a M_a`.
    pub fn from_matrices(alphabet: Alphabet, matrices: Vec<DMatrix<f64>>) -> Result<Self, PmpError> {
        check_nonnegative(&matrices)?;
        let d = matrices.first().map(|m| m.nrows()).unwrap_or(0);
        let total = matrices.iter().fold(DMatrix::zeros(d, d), |acc, m| acc + m);
        let p = stationary_vector(&total)?;
        Self::new(alphabet, matrices, p)
    }

    pub fn with_theta(mut self, theta: Vec<usize>) -> Result<Self, PmpError> {
        let k = self.alphabet.len();
        if theta.len() != k || theta.iter().any(|&t| t >= k) || (0..k).any(|a| theta[theta[a]] != a) {
            return Err(PmpError::BadInvolution);
        }
        self.theta = theta;
        Ok(self)
    }

    pub fn with_delta_s(mut self, delta_s: Vec<f64>) -> Result<Self, PmpError> {
        if delta_s.len() != self.alphabet.len() {
            return Err(PmpError::Shape("one ΔS label per symbol".into()));
        }
        self.delta_s = Some(delta_s);
        Ok(self)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub fn matrix(&self, a: usize) -> &DMatrix<f64> {
        &self.matrices[a]
    }

    pub fn p(&self) -> &ProbVector {
        &self.p
    }

    pub fn theta(&self) -> &[usize] {
        &self.theta
    }

    pub fn delta_s(&self) -> Option<&[f64]> {
        self.delta_s.as_deref()
    }

    pub fn total(&self) -> DMatrix<f64> {
        let d = self.dim();
        self.matrices.iter().fold(DMatrix::zeros(d, d), |acc, m| acc + m)
    }

    /// Column-vector form: state `𝐩ᵀ`, symbol `a` acts by `M_aᵀ`, readout `𝟏`.
    pub fn linear_rep(&self) -> &LinearRep {
        self.rep.get_or_init(|| {
            let d = self.dim();
            LinearRep::new(
                DVector::from_column_slice(self.p.as_slice()),
                self.matrices.iter().map(|m| m.transpose()).collect(),
                DVector::from_element(d, 1.0),
            )
            .expect("shapes validated at construction")
        })
    }

    /// `log 𝐩 M_{ω_1}⋯M_{ω_T} 𝟏`.
    pub fn pmp_prob(&self, w: &Word) -> Result<f64, PmpError> {
        Ok(self.linear_rep().log_prob(w.as_slice())?)
    }

    pub fn log_prob_str(&self, text: &str) -> Result<f64, PmpError> {
        let w = self.alphabet.parse_word(text)?;
        self.pmp_prob(&w)
    }

    /// Outcome reversal `M̂_a = D^{-1} M_{θ(a)}ᵀ D`, `D = diag(𝐩)`, with `𝐩̂ = 𝐩`.
    pub fn or_pmp(&self) -> Result<PMPSpec, PmpError> {
        let p = self.p.as_slice();
        if p.iter().any(|&x| x <= 0.0) {
            return Err(PmpError::ZeroEntry);
        }
        let d = self.dim();
        let mats = (0..self.alphabet.len())
            .map(|a| {
                let m = &self.matrices[self.theta[a]];
                DMatrix::from_fn(d, d, |i, j| m[(j, i)] * p[j] / p[i])
            })
            .collect();
        let mut out = PMPSpec::new(self.alphabet.clone(), mats, self.p.clone())?.with_theta(self.theta.clone())?;
        out.delta_s = self.delta_s.clone();
        Ok(out)
    }

    /// The diagonal-preserving instrument `Φ_a[X] = Σ m_ij(a) ⟨v_j|X v_j⟩ |v_i⟩⟨v_i|`
    /// with `ρ = diag(𝐩)`, whose unraveling is this measure.
    ///
    /// In the Heisenberg convention `X ↦ Σ V* X V` its Kraus operators are
    /// `√m_ij(a) |v_j⟩⟨v_i|`.
    pub fn canonical_instrument(&self) -> Result<Instrument, PmpError> {
        if self.p.as_slice().iter().any(|&x| x <= 0.0) {
            return Err(PmpError::ZeroEntry);
        }
        let d = self.dim();
        let maps = self
            .matrices
            .iter()
            .map(|m| {
                let kraus = (0..d)
                    .flat_map(|i| (0..d).map(move |j| (i, j)))
                    .filter(|&(i, j)| m[(i, j)] > 0.0)
                    .map(|(i, j)| {
                        let mut k = CMatrix::zeros(d, d);
                        k[(j, i)] = C64::new(m[(i, j)].sqrt(), 0.0);
                        k
                    })
                    .collect();
                CPMap::new(d, kraus)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let rho = DensityMatrix::diagonal(self.p.as_slice())?;
        Ok(Instrument::new(self.alphabet.clone(), maps, rho, self.theta.clone(), self.delta_s.clone())?)
    }

    /// Lower-decoupling constant `C = min m_ij(a) / (p_j Σ_k m_ik(a))` when
    /// every `M_a` is entrywise positive; `None` otherwise.
    ///
    /// It certifies `ℙ_{T+S}(ωυ) ≥ C ℙ_T(ω) ℙ_S(υ)`.
    pub fn gibbs_constant(&self) -> Option<f64> {
        let p = self.p.as_slice();
        if self.matrices.iter().any(|m| m.iter().any(|&x| x <= 0.0)) {
            return None;
        }
        let d = self.dim();
        let c = self
            .matrices
            .iter()
            .flat_map(|m| {
                (0..d).flat_map(move |i| {
                    let row: f64 = m.row(i).sum();
                    (0..d).map(move |j| m[(i, j)] / (p[j] * row))
                })
            })
            .fold(f64::INFINITY, f64::min);
        Some(c)
    }

    /// `M(α) = Σ_a e^{-αΔS(a)} M_a`.
    pub fn deformed_matrix(&self, alpha: f64) -> Result<DMatrix<f64>, PmpError> {
        let ds = self.delta_s.as_ref().ok_or(PmpError::Instrument(InstrumentError::MissingLabels))?;
        let d = self.dim();
        Ok(self
            .matrices
            .iter()
            .zip(ds)
            .fold(DMatrix::zeros(d, d), |acc, (m, &s)| acc + m * (-alpha * s).exp()))
    }

    /// Single-step marginal `ℙ([a]) = 𝐩 M_a 𝟏`.
    pub fn one_step_probs(&self) -> Vec<f64> {
        let p = DVector::from_column_slice(self.p.as_slice());
        self.matrices.iter().map(|m| (m.tr_mul(&p)).sum()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn keep_switch(q1: f64, q2: f64) -> PMPSpec {
        let (r1, r2) = (1.0 - q1, 1.0 - q2);
        let mk = DMatrix::from_row_slice(2, 2, &[q1, 0.0, 0.0, q2]);
        let ms = DMatrix::from_row_slice(2, 2, &[0.0, r1, r2, 0.0]);
        PMPSpec::from_matrices(Alphabet::new(["K", "S"]).unwrap(), vec![mk, ms])
            .unwrap()
            .with_theta(vec![1, 0])
            .unwrap()
    }

    #[test]
    fn keep_switch_stationary_vector() {
        let ks = keep_switch(0.6, 0.3);
        assert!((ks.p()[0] - 0.7 / 1.1).abs() < 1e-14);
        assert!((ks.p()[1] - 0.4 / 1.1).abs() < 1e-14);
        // ℙ([K]) = p M_K 1 by hand.
        let pk: f64 = 0.7 / 1.1 * 0.6 + 0.4 / 1.1 * 0.3;
        assert!((ks.log_prob_str("K").unwrap() - pk.ln()).abs() < 1e-14);
    }

    #[test]
    fn markov_pair_probability() {
        let p = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.4, 0.6]);
        let mats = (0..2)
            .map(|a| DMatrix::from_fn(2, 2, |x, y| if y == a { p[(x, y)] } else { 0.0 }))
            .collect();
        let spec = PMPSpec::from_matrices(Alphabet::numbered(2), mats).unwrap();
        // Stationary (0.8, 0.2); ℙ([01]) = p_0 p_01.
        assert!((spec.log_prob_str("01").unwrap() - (0.8f64 * 0.1).ln()).abs() < 1e-14);
    }

    #[test]
    fn gibbs_constant_requires_positive_entries() {
        assert!(keep_switch(0.6, 0.3).gibbs_constant().is_none());
        let m0 = DMatrix::from_row_slice(2, 2, &[0.2, 0.3, 0.1, 0.4]);
        let m1 = DMatrix::from_row_slice(2, 2, &[0.4, 0.1, 0.3, 0.2]);
        let spec = PMPSpec::from_matrices(Alphabet::numbered(2), vec![m0, m1]).unwrap();
        assert!(spec.gibbs_constant().unwrap() > 0.0);
    }

    #[test]
    fn rejects_non_stochastic_sum() {
        let m = DMatrix::from_row_slice(1, 1, &[0.5]);
        let r = PMPSpec::new(Alphabet::numbered(1), vec![m], ProbVector::new(vec![1.0]).unwrap());
        assert!(matches!(r, Err(PmpError::NotStochastic(_))));
    }

    #[test]
    fn canonical_instrument_reproduces_small_words() {
        let ks = keep_switch(0.6, 0.3);
        let inst = ks.canonical_instrument().unwrap();
        for w in ["K", "S", "KS", "SSK", "KKSK"] {
            let a = ks.log_prob_str(w).unwrap();
            let b = inst.log_prob_str(w).unwrap();
            assert!((a - b).abs() < 1e-13, "{w}");
        }
    }
}
