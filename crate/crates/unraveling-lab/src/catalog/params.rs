use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::spin::Coupling;
use super::{x00_params_for_s, CatalogError};
use crate::instrument::Alphabet;
use crate::numerics::{CMatrix, C64};

/// Family tag plus its parameter record, as in `{"family": "...", "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum FamilyParams {
    Bernoulli(BernoulliParams),
    Markov(MarkovParams),
    VonNeumann(VonNeumannParams),
    KeepSwitch(KeepSwitchParams),
    XxzOneTime(OneTimeParams<Coupling>),
    XxzTwoTime(ThermalParams<Coupling>),
    XxzRandomThermal(RandomThermalParams<Coupling>),
    XxzMultiThermal(MultiThermalParams),
    X00OneTime(OneTimeParams<X00Coupling>),
    X00TwoTime(ThermalParams<X00Coupling>),
    X00RandomThermal(RandomThermalParams<X00Coupling>),
    Rotational(RotationalParams),
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BernoulliParams {
    /// Mass function, one entry per symbol.
    pub q: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbols: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<usize>>,
    /// Hilbert-space dimension; the Kraus operators are `√Q(a)·1`.
    #[serde(default = "one")]
    pub dim: usize,
}

impl BernoulliParams {
    pub fn alphabet(&self) -> Result<Alphabet, CatalogError> {
        symbols_or_numbered(self.symbols.as_ref(), self.q.len())
    }
}

fn symbols_or_numbered(symbols: Option<&Vec<String>>, n: usize) -> Result<Alphabet, CatalogError> {
    match symbols {
        Some(s) if s.len() != n => Err(CatalogError::Invalid(format!("{} symbols for {n} outcomes", s.len()))),
        Some(s) => Ok(Alphabet::new(s.iter().cloned())?),
        None => Ok(Alphabet::numbered(n)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovParams {
    /// Row-stochastic transition matrix; the emitted symbol is the current state.
    #[serde(rename = "P")]
    pub p_matrix: Vec<Vec<f64>>,
    /// Stationary vector; computed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbols: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<usize>>,
}

impl MarkovParams {
    pub fn matrix(&self) -> Result<DMatrix<f64>, CatalogError> {
        square(&self.p_matrix)
    }

    pub fn alphabet(&self) -> Result<Alphabet, CatalogError> {
        symbols_or_numbered(self.symbols.as_ref(), self.p_matrix.len())
    }
}

fn square(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, CatalogError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CatalogError::Invalid("matrix must be square and nonempty".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VonNeumannParams {
    /// Unitary as rows of `[re, im]` pairs.
    #[serde(rename = "U")]
    pub u: Vec<Vec<[f64; 2]>>,
}

impl VonNeumannParams {
    pub fn unitary(&self) -> Result<CMatrix, CatalogError> {
        let n = self.u.len();
        if n == 0 || self.u.iter().any(|r| r.len() != n) {
            return Err(CatalogError::Invalid("U must be square and nonempty".into()));
        }
        let u = CMatrix::from_fn(n, n, |i, j| C64::new(self.u[i][j][0], self.u[i][j][1]));
        let defect = crate::numerics::max_abs(&(u.adjoint() * &u - CMatrix::identity(n, n)));
        if defect > 1e-10 {
            return Err(CatalogError::Invalid(format!("U is not unitary (defect {defect:e})")));
        }
        Ok(u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeepSwitchParams {
    pub q1: f64,
    pub q2: f64,
}

/// X00 couplings, given either explicitly or through the transition
/// probabilities `(s₊, s₋)` at probe frequency `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum X00Coupling {
    Transition { epsilon: f64, s_plus: f64, s_minus: f64 },
    Dynamics(Coupling),
}

impl X00Coupling {
    pub fn resolve(&self) -> Result<Coupling, CatalogError> {
        match *self {
            X00Coupling::Dynamics(k) => Ok(k),
            X00Coupling::Transition { epsilon, s_plus, s_minus } => x00_params_for_s(s_plus, s_minus, epsilon),
        }
    }
}

impl From<Coupling> for X00Coupling {
    fn from(k: Coupling) -> Self {
        X00Coupling::Dynamics(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneTimeParams<K> {
    #[serde(flatten)]
    pub coupling: K,
    /// Probe state `diag(½−η, ½+η)`.
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalParams<K> {
    #[serde(flatten)]
    pub coupling: K,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomThermalParams<K> {
    #[serde(flatten)]
    pub coupling: K,
    pub betas: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiThermalParams {
    #[serde(flatten)]
    pub coupling: Coupling,
    pub betas: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationalParams {
    pub delta: f64,
}

fn require(ok: bool, msg: impl Into<String>) -> Result<(), CatalogError> {
    if ok {
        Ok(())
    } else {
        Err(CatalogError::Invalid(msg.into()))
    }
}

fn check_coupling(k: &Coupling) -> Result<(), CatalogError> {
    require(k.epsilon > 0.0 && k.omega > 0.0 && k.lambda > 0.0 && k.t > 0.0, "ε, ω, λ, t must be positive")?;
    require(k.mu.is_finite(), "μ must be finite")
}

fn check_x00(k: &X00Coupling) -> Result<Coupling, CatalogError> {
    let c = k.resolve()?;
    check_coupling(&c)?;
    require(c.mu == 0.0, "the X00 interaction has no σ_zσ_z term; μ must be 0")?;
    Ok(c)
}

fn check_weights(betas: &[f64], weights: &[f64]) -> Result<(), CatalogError> {
    require(!betas.is_empty() && betas.len() == weights.len(), "one weight per inverse temperature")?;
    require(betas.iter().all(|b| b.is_finite()), "β_k must be finite")?;
    require(weights.iter().all(|&w| w > 0.0), "weights must be positive")?;
    require((weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12, "weights must sum to 1")
}

impl FamilyParams {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyParams::Bernoulli(_) => "bernoulli",
            FamilyParams::Markov(_) => "markov",
            FamilyParams::VonNeumann(_) => "von_neumann",
            FamilyParams::KeepSwitch(_) => "keep_switch",
            FamilyParams::XxzOneTime(_) => "xxz_one_time",
            FamilyParams::XxzTwoTime(_) => "xxz_two_time",
            FamilyParams::XxzRandomThermal(_) => "xxz_random_thermal",
            FamilyParams::XxzMultiThermal(_) => "xxz_multi_thermal",
            FamilyParams::X00OneTime(_) => "x00_one_time",
            FamilyParams::X00TwoTime(_) => "x00_two_time",
            FamilyParams::X00RandomThermal(_) => "x00_random_thermal",
            FamilyParams::Rotational(_) => "rotational",
        }
    }

    /// Checks the per-family parameter ranges.
    pub fn validate(&self) -> Result<(), CatalogError> {
        match self {
            FamilyParams::Bernoulli(p) => {
                require(p.dim >= 1, "dimension must be positive")?;
                require(!p.q.is_empty() && p.q.iter().all(|&q| q >= 0.0), "Q must be nonnegative")?;
                require((p.q.iter().sum::<f64>() - 1.0).abs() <= 1e-12, "Q must sum to 1")
            }
            FamilyParams::Markov(p) => {
                let m = p.matrix()?;
                require(m.iter().all(|&x| x >= 0.0), "P must be nonnegative")?;
                require(m.row_iter().all(|r| (r.sum() - 1.0).abs() <= 1e-12), "P must be row-stochastic")
            }
            FamilyParams::VonNeumann(p) => p.unitary().map(|_| ()),
            FamilyParams::KeepSwitch(p) => {
                require(p.q1 > 0.0 && p.q1 < 1.0 && p.q2 > 0.0 && p.q2 < 1.0, "q₁, q₂ must lie in ]0,1[")
            }
            FamilyParams::XxzOneTime(p) => {
                check_coupling(&p.coupling)?;
                require(p.eta > -0.5 && p.eta < 0.5, "η must lie in ]−½,½[")
            }
            FamilyParams::XxzTwoTime(p) => {
                check_coupling(&p.coupling)?;
                require(p.beta.is_finite(), "β must be finite")
            }
            FamilyParams::XxzRandomThermal(p) => {
                check_coupling(&p.coupling)?;
                check_weights(&p.betas, &p.weights)
            }
            FamilyParams::XxzMultiThermal(p) => {
                check_coupling(&p.coupling)?;
                require(p.betas.iter().all(|b| b.is_finite()), "β must be finite")
            }
            FamilyParams::X00OneTime(p) => {
                check_x00(&p.coupling)?;
                require((-0.5..=0.5).contains(&p.eta), "η must lie in [−½,½]")
            }
            FamilyParams::X00TwoTime(p) => {
                check_x00(&p.coupling)?;
                require(p.beta.is_finite(), "β must be finite")
            }
            FamilyParams::X00RandomThermal(p) => {
                check_x00(&p.coupling)?;
                check_weights(&p.betas, &p.weights)
            }
            FamilyParams::Rotational(p) => require((0.0..2.0).contains(&p.delta), "Δ must lie in [0,2["),
        }
    }
}
