//! Dense linear algebra and convex-analysis primitives.

mod diff;
mod expm;
mod legendre;
mod logsum;
mod quadrature;
mod spectral;
mod stationary;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub use diff::{one_sided_second_derivative, second_difference, Side};
pub use expm::{expm, matrix_exponential};
pub use legendre::{legendre_transform, golden_section_min, LegendreValue};
pub use logsum::{log_sum_exp, pairwise_sum, LogSumExp};
pub use quadrature::{gauss_legendre, integrate};
pub use spectral::{dense_eigenvalues, power_iteration, spectral_radius, Spectral};
pub use stationary::{closed_classes, stationary_vector};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Entrywise tolerance used when deciding whether a probability vector sums to one.
pub const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("power iteration did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },
    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not right-stochastic: {reason}")]
    NotStochastic { reason: String },
    #[error("stochastic matrix has {classes} closed classes; the stationary vector is not unique")]
    Reducible { classes: usize },
    #[error("non-finite entry encountered")]
    NonFinite,
    #[error("invalid probability vector: {reason}")]
    InvalidProbVector { reason: String },
}

/// A probability vector: nonnegative entries summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(entries: Vec<f64>) -> Result<Self, NumericsError> {
        if entries.is_empty() {
            return Err(NumericsError::InvalidProbVector { reason: "empty".into() });
        }
        if entries.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(NumericsError::InvalidProbVector {
                reason: "entries must be finite and nonnegative".into(),
            });
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(NumericsError::InvalidProbVector {
                reason: format!("entries sum to {sum}"),
            });
        }
        Ok(Self(entries))
    }

    /// Rescales nonnegative weights to unit sum.
    pub fn normalized(weights: Vec<f64>) -> Result<Self, NumericsError> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(NumericsError::InvalidProbVector {
                reason: "weights must have a positive finite sum".into(),
            });
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Promotes a real matrix to a complex one.
pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Deviation from Hermiticity, `max |M - M*|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Square root and inverse square root of a positive definite Hermitian matrix.
pub fn hermitian_sqrt_pair(m: &CMatrix) -> Option<(CMatrix, CMatrix)> {
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return None;
    }
    let v = &eig.eigenvectors;
    let sqrt = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|l| C64::new(l.sqrt(), 0.0)));
    let isqrt = sqrt.map(|x| C64::new(1.0, 0.0) / x);
    let s = v * CMatrix::from_diagonal(&sqrt) * v.adjoint();
    let si = v * CMatrix::from_diagonal(&isqrt) * v.adjoint();
    Some((s, si))
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}
