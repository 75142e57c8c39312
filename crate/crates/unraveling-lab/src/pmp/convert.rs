use nalgebra::DMatrix;

use super::{row_defect, stationarity_residual, PMPSpec, PmpError, SPEC_TOL, STATIONARY_MATCH_TOL};
use crate::instrument::{Alphabet, LinearRep};
use crate::numerics::{stationary_vector, NumericsError, ProbVector};

/// Hidden Markov measure: hidden chain `(Q, q)` on `ℒ`, emissions `R` (`ℒ × 𝒜`, rows sum to 1).
#[derive(Debug, Clone)]
pub struct HMSpec {
    pub alphabet: Alphabet,
    pub q_matrix: DMatrix<f64>,
    pub q: ProbVector,
    pub emission: DMatrix<f64>,
}

/// Function Markov measure: Markov chain `(P, 𝐩)` on `ℒ` observed through an onto map `f: ℒ → 𝒜`.
#[derive(Debug, Clone)]
pub struct FMSpec {
    pub alphabet: Alphabet,
    pub p_matrix: DMatrix<f64>,
    pub p: ProbVector,
    pub f: Vec<usize>,
}

/// Any of the three equivalent descriptions.
#[derive(Debug, Clone)]
pub enum MeasureSpec {
    Pmp(PMPSpec),
    Hm(HMSpec),
    Fm(FMSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecKind {
    Pmp,
    Hm,
    Fm,
}

impl std::str::FromStr for SpecKind {
    type Err = PmpError;
    fn from_str(s: &str) -> Result<Self, PmpError> {
        match s.to_ascii_lowercase().as_str() {
            "pmp" => Ok(Self::Pmp),
            "hm" => Ok(Self::Hm),
            "fm" => Ok(Self::Fm),
            other => Err(PmpError::Document(format!("unknown spec kind {other:?}"))),
        }
    }
}

/// Checks that `x` is stationary for `m` and, when `m` has a unique
/// stationary vector, that it agrees with a fresh computation.
fn check_stationary(x: &ProbVector, m: &DMatrix<f64>) -> Result<(), PmpError> {
    let n = x.len();
    let residual = stationarity_residual(x.as_slice(), m);
    if residual > SPEC_TOL * n as f64 {
        return Err(PmpError::NotStationary(residual));
    }
    match stationary_vector(m) {
        Ok(fresh) => {
            let diff = fresh
                .as_slice()
                .iter()
                .zip(x.as_slice())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if diff > STATIONARY_MATCH_TOL {
                return Err(PmpError::NotStationary(diff));
            }
            Ok(())
        }
        Err(NumericsError::Reducible { .. }) => Ok(()),
        Err(e) => Err(e.into()),
    }
}

fn check_stochastic(m: &DMatrix<f64>) -> Result<(), PmpError> {
    if m.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(PmpError::Negative);
    }
    let defect = row_defect(m);
    if defect > SPEC_TOL * m.ncols() as f64 {
        return Err(PmpError::NotStochastic(defect));
    }
    Ok(())
}

impl HMSpec {
    pub fn new(alphabet: Alphabet, q_matrix: DMatrix<f64>, q: ProbVector, emission: DMatrix<f64>) -> Result<Self, PmpError> {
        let l = q.len();
        if q_matrix.shape() != (l, l) || emission.shape() != (l, alphabet.len()) {
            return Err(PmpError::Shape("Q must be L×L and R must be L×|A|".into()));
        }
        check_stochastic(&q_matrix)?;
        check_stochastic(&emission)?;
        check_stationary(&q, &q_matrix)?;
        Ok(Self { alphabet, q_matrix, q, emission })
    }

    pub fn hidden_len(&self) -> usize {
        self.q.len()
    }

    /// `M_a = [Q_{ll'} R_{l'a}]`, `𝐩 = q`.
    pub fn to_pmp(&self) -> Result<PMPSpec, PmpError> {
        let l = self.hidden_len();
        let mats = (0..self.alphabet.len())
            .map(|a| DMatrix::from_fn(l, l, |i, j| self.q_matrix[(i, j)] * self.emission[(j, a)]))
            .collect();
        PMPSpec::new(self.alphabet.clone(), mats, self.q.clone())
    }

    /// Hidden chain on `ℒ × 𝒜` with `P((l,a),(l',a')) = Q_{ll'} R_{l'a'}`,
    /// `𝐩(l,a) = q_l R_{la}` and `f(l,a) = a`.
    pub fn to_fm(&self) -> Result<FMSpec, PmpError> {
        let (l, k) = (self.hidden_len(), self.alphabet.len());
        let n = l * k;
        let p_matrix = DMatrix::from_fn(n, n, |x, y| self.q_matrix[(x / k, y / k)] * self.emission[(y / k, y % k)]);
        let p = ProbVector::normalized((0..n).map(|x| self.q[x / k] * self.emission[(x / k, x % k)]).collect())?;
        FMSpec::new(self.alphabet.clone(), p_matrix, p, (0..n).map(|x| x % k).collect())
    }

    pub fn linear_rep(&self) -> Result<LinearRep, PmpError> {
        Ok(self.to_pmp()?.linear_rep().clone())
    }
}

impl FMSpec {
    pub fn new(alphabet: Alphabet, p_matrix: DMatrix<f64>, p: ProbVector, f: Vec<usize>) -> Result<Self, PmpError> {
        let l = p.len();
        if p_matrix.shape() != (l, l) || f.len() != l {
            return Err(PmpError::Shape("P must be L×L and f must have L entries".into()));
        }
        if f.iter().any(|&a| a >= alphabet.len()) || (0..alphabet.len()).any(|a| !f.contains(&a)) {
            return Err(PmpError::NotOnto);
        }
        check_stochastic(&p_matrix)?;
        check_stationary(&p, &p_matrix)?;
        Ok(Self { alphabet, p_matrix, p, f })
    }

    /// Emissions `R_{la} = δ_{f(l),a}`.
    pub fn to_hm(&self) -> Result<HMSpec, PmpError> {
        let r = DMatrix::from_fn(self.p.len(), self.alphabet.len(), |l, a| if self.f[l] == a { 1.0 } else { 0.0 });
        HMSpec::new(self.alphabet.clone(), self.p_matrix.clone(), self.p.clone(), r)
    }

    pub fn linear_rep(&self) -> Result<LinearRep, PmpError> {
        self.to_hm()?.linear_rep()
    }
}

impl PMPSpec {
    /// Hidden states `(i, a) ∈ ⟦1,d⟧ × 𝒜` with `Q((i,a),(j,b)) = m_ij(b)`,
    /// emissions `R((j,b),c) = δ_bc` and `q(j,b) = (𝐩 M_b)_j`.
    pub fn to_hm(&self) -> Result<HMSpec, PmpError> {
        let (d, k) = (self.dim(), self.alphabet().len());
        let n = d * k;
        let q_matrix = DMatrix::from_fn(n, n, |x, y| self.matrix(y % k)[(x / k, y / k)]);
        let emission = DMatrix::from_fn(n, k, |x, c| if x % k == c { 1.0 } else { 0.0 });
        let p = self.p().as_slice();
        let q = (0..n)
            .map(|y| {
                let (j, b) = (y / k, y % k);
                (0..d).map(|i| p[i] * self.matrix(b)[(i, j)]).sum::<f64>()
            })
            .collect();
        HMSpec::new(self.alphabet().clone(), q_matrix, ProbVector::normalized(q)?, emission)
    }
}

impl MeasureSpec {
    pub fn kind(&self) -> SpecKind {
        match self {
            Self::Pmp(_) => SpecKind::Pmp,
            Self::Hm(_) => SpecKind::Hm,
            Self::Fm(_) => SpecKind::Fm,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        match self {
            Self::Pmp(s) => s.alphabet(),
            Self::Hm(s) => &s.alphabet,
            Self::Fm(s) => &s.alphabet,
        }
    }

    pub fn linear_rep(&self) -> Result<LinearRep, PmpError> {
        match self {
            Self::Pmp(s) => Ok(s.linear_rep().clone()),
            Self::Hm(s) => s.linear_rep(),
            Self::Fm(s) => s.linear_rep(),
        }
    }

    pub fn to_pmp(&self) -> Result<PMPSpec, PmpError> {
        match self {
            Self::Pmp(s) => Ok(s.clone()),
            Self::Hm(s) => s.to_pmp(),
            Self::Fm(s) => s.to_hm()?.to_pmp(),
        }
    }
}

/// Converts between the three descriptions, preserving all finite-dimensional distributions.
pub fn convert(src: &MeasureSpec, target: SpecKind) -> Result<MeasureSpec, PmpError> {
    Ok(match (src, target) {
        (s, t) if s.kind() == t => s.clone(),
        (MeasureSpec::Fm(s), SpecKind::Hm) => MeasureSpec::Hm(s.to_hm()?),
        (MeasureSpec::Fm(s), SpecKind::Pmp) => MeasureSpec::Pmp(s.to_hm()?.to_pmp()?),
        (MeasureSpec::Hm(s), SpecKind::Fm) => MeasureSpec::Fm(s.to_fm()?),
        (MeasureSpec::Hm(s), SpecKind::Pmp) => MeasureSpec::Pmp(s.to_pmp()?),
        (MeasureSpec::Pmp(s), SpecKind::Hm) => MeasureSpec::Hm(s.to_hm()?),
        (MeasureSpec::Pmp(s), SpecKind::Fm) => MeasureSpec::Fm(s.to_hm()?.to_fm()?),
        _ => unreachable!("identical kinds handled above"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_state_hm_is_bernoulli() {
        let hm = HMSpec::new(
            Alphabet::new(["a", "b"]).unwrap(),
            DMatrix::from_element(1, 1, 1.0),
            ProbVector::new(vec![1.0]).unwrap(),
            DMatrix::from_row_slice(1, 2, &[0.3, 0.7]),
        )
        .unwrap();
        let pmp = hm.to_pmp().unwrap();
        let lp = pmp.log_prob_str("aab").unwrap();
        assert!((lp - (0.3f64 * 0.3 * 0.7).ln()).abs() < 1e-14);
    }

    #[test]
    fn non_onto_map_is_rejected() {
        let r = FMSpec::new(
            Alphabet::new(["a", "b"]).unwrap(),
            DMatrix::from_element(1, 1, 1.0),
            ProbVector::new(vec![1.0]).unwrap(),
            vec![0],
        );
        assert!(matches!(r, Err(PmpError::NotOnto)));
    }

    #[test]
    fn wrong_stationary_vector_is_rejected() {
        let r = HMSpec::new(
            Alphabet::new(["a"]).unwrap(),
            DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.1, 0.9]),
            ProbVector::new(vec![0.5, 0.5]).unwrap(),
            DMatrix::from_element(2, 1, 1.0),
        );
        assert!(matches!(r, Err(PmpError::NotStationary(_))));
    }
}
