//! Quantum instruments, their unravelings, outcome reversal and the standing-assumption checks.

mod assumptions;
mod cpmap;
mod json;
mod linear;

use std::collections::HashMap;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use thiserror::Error;

pub use assumptions::{check_assumptions, is_irreducible, AssumptionReport};
pub use cpmap::{hermitian_basis, hermitian_coords, CPMap};
pub use json::{ComplexMatrixDoc, InstrumentDoc};
pub use linear::{
    for_each_pair, support_mismatches, LinearRep, RepError, RepState, DEFAULT_BUDGET, MAX_REP_DIM,
    PATTERN_THRESHOLD,
};

use crate::numerics::{
    hermitian_eigenvalues, hermitian_sqrt_pair, hermiticity_defect, max_abs, CMatrix, NumericsError, C64,
};

/// Tolerance on `Σ_a Φ_a[1] = 1` and `Φ*[ρ] = ρ`, per unit of dimension.
pub const STRUCTURE_TOL: f64 = 1e-12;

/// Eigenvalues of `ρ` at or below this are treated as zero.
pub const RHO_RANK_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstrumentError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("alphabet error: {0}")]
    Alphabet(String),
    #[error("instrument is not unital: |Σ Φ_a[1] − 1| = {defect:e}")]
    NotUnital { defect: f64 },
    #[error("state is not invariant: |Φ*[ρ] − ρ| = {defect:e}")]
    NotInvariant { defect: f64 },
    #[error("not a density matrix: {0}")]
    NotDensity(String),
    #[error("state is singular (smallest eigenvalue {0:e})")]
    SingularState(f64),
    #[error("θ is not an involution of the alphabet")]
    BadInvolution,
    #[error("invariant state is not unique ({0} independent fixed points)")]
    NonUniqueState(usize),
    #[error("entropy labels ΔS are required")]
    MissingLabels,
    #[error("invalid instrument document: {0}")]
    Document(String),
}

impl InstrumentError {
    /// Whether the error stems from an exhausted enumeration budget.
    pub fn budget_exhausted(&self) -> bool {
        matches!(self, InstrumentError::Rep(e) if e.budget_exhausted())
    }
}

/// Ordered finite set of outcome symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>, I: IntoIterator<Item = S>>(symbols: I) -> Result<Self, InstrumentError> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(InstrumentError::Alphabet("empty alphabet".into()));
        }
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() || s.chars().any(|c| c.is_whitespace() || c == ',') {
                return Err(InstrumentError::Alphabet(format!("invalid symbol {s:?}")));
            }
            if symbols[..i].contains(s) {
                return Err(InstrumentError::Alphabet(format!("duplicate symbol {s:?}")));
            }
        }
        Ok(Self { symbols })
    }

    /// Symbols `"0"`, `"1"`, … `"n-1"`.
    pub fn numbered(n: usize) -> Self {
        Self { symbols: (0..n).map(|i| i.to_string()).collect() }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.symbols[i]
    }

    pub fn index_of(&self, s: &str) -> Result<usize, InstrumentError> {
        self.symbols
            .iter()
            .position(|x| x == s)
            .ok_or_else(|| InstrumentError::UnknownSymbol(s.to_string()))
    }

    /// Parses a word. Separators (whitespace or commas) split symbols
    /// explicitly; otherwise the text is tokenised by longest match.
    pub fn parse_word(&self, text: &str) -> Result<Word, InstrumentError> {
        let text = text.trim();
        if text.contains(|c: char| c.is_whitespace() || c == ',') {
            let symbols = text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| self.index_of(s))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(Word(symbols));
        }
        let mut rest = text;
        let mut out = Vec::new();
        while !rest.is_empty() {
            let (idx, len) = self
                .symbols
                .iter()
                .enumerate()
                .filter(|(_, s)| rest.starts_with(s.as_str()))
                .map(|(i, s)| (i, s.len()))
                .max_by_key(|&(_, l)| l)
                .ok_or_else(|| InstrumentError::UnknownSymbol(rest.chars().next().unwrap_or(' ').to_string()))?;
            out.push(idx);
            rest = &rest[len..];
        }
        Ok(Word(out))
    }

    pub fn format_word(&self, w: &[usize]) -> String {
        let sep = if self.symbols.iter().all(|s| s.chars().count() == 1) { "" } else { " " };
        w.iter().map(|&i| self.symbols[i].as_str()).collect::<Vec<_>>().join(sep)
    }

    /// The word `θ(ω_T) … θ(ω_1)`.
    pub fn reverse_word(theta: &[usize], w: &[usize]) -> Vec<usize> {
        w.iter().rev().map(|&a| theta[a]).collect()
    }
}

/// A finite sequence of symbol indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// A positive semidefinite matrix of unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self, InstrumentError> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(InstrumentError::NotDensity("not a nonempty square matrix".into()));
        }
        let d = m.nrows() as f64;
        let defect = hermiticity_defect(&m);
        if defect > STRUCTURE_TOL * d {
            return Err(InstrumentError::NotDensity(format!("Hermiticity defect {defect:e}")));
        }
        let tr = m.trace().re;
        if (tr - 1.0).abs() > STRUCTURE_TOL * d {
            return Err(InstrumentError::NotDensity(format!("trace {tr}")));
        }
        let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let min = hermitian_eigenvalues(&m)[0];
        if min < -STRUCTURE_TOL * d {
            return Err(InstrumentError::NotDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self(m))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(CMatrix::identity(d, d) / C64::new(d as f64, 0.0))
    }

    pub fn diagonal(p: &[f64]) -> Result<Self, InstrumentError> {
        let v = nalgebra::DVector::from_iterator(p.len(), p.iter().map(|&x| C64::new(x, 0.0)));
        Self::new(CMatrix::from_diagonal(&v))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// Eigenvalues in ascending order.
    pub fn spectrum(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.0)
    }
}

/// Fixed point of the dual of a unital map.
#[derive(Debug, Clone)]
pub struct InvariantState {
    pub rho: DensityMatrix,
    /// Dimension of the fixed-point space of `Φ*`; 1 means the state is unique.
    pub fixed_space_dim: usize,
}

impl InvariantState {
    pub fn is_unique(&self) -> bool {
        self.fixed_space_dim == 1
    }
}

const FIXED_POINT_TOL: f64 = 1e-10;

/// Solves `Φ*[ρ] = ρ`.
///
/// When the fixed-point space has dimension above one, the returned state
/// is the Cesàro limit `lim (1/N) Σ Φ*ⁿ[1/d]`, computed as the spectral
/// projection of `1/d` onto the eigenvalue 1.
pub fn invariant_state(phi: &CPMap) -> Result<InvariantState, InstrumentError> {
    let d = phi.dim();
    let unit_defect = max_abs(&(phi.heisenberg(&CMatrix::identity(d, d)) - CMatrix::identity(d, d)));
    if unit_defect > STRUCTURE_TOL * d as f64 * 10.0 {
        return Err(InstrumentError::NotUnital { defect: unit_defect });
    }
    let a = phi.real_dual_matrix();
    let n = d * d;
    let shifted = &a - DMatrix::identity(n, n);
    let right = null_space(&shifted);
    let left = null_space(&shifted.transpose());
    if right.ncols() == 0 || right.ncols() != left.ncols() {
        return Err(NumericsError::NotConverged { iterations: 0 }.into());
    }
    let x0 = hermitian_coords(&DensityMatrix::maximally_mixed(d).0);
    let gram = left.transpose() * &right;
    let coeffs = gram
        .lu()
        .solve(&(left.transpose() * x0))
        .ok_or(NumericsError::NotConverged { iterations: 0 })?;
    let x = &right * coeffs;
    let m = hermitian_basis(d)
        .iter()
        .zip(x.iter())
        .fold(CMatrix::zeros(d, d), |acc, (e, &w)| acc + e * C64::new(w, 0.0));
    let tr = m.trace().re;
    let rho = DensityMatrix::new(m / C64::new(tr, 0.0))?;
    Ok(InvariantState { rho, fixed_space_dim: right.ncols() })
}

fn null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let scale = svd.singular_values.max().max(1.0);
    let cols: Vec<_> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= FIXED_POINT_TOL * scale)
        .map(|(i, _)| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// A quantum instrument with an invariant state and an alphabet involution.
#[derive(Debug, Clone)]
pub struct Instrument {
    alphabet: Alphabet,
    maps: Vec<CPMap>,
    rho: DensityMatrix,
    theta: Vec<usize>,
    delta_s: Option<Vec<f64>>,
    restricted_from: Option<usize>,
    rep: OnceLock<LinearRep>,
}

impl Instrument {
    /// Validates unitality, invariance of `ρ` and the involution.
    ///
    /// A singular invariant `ρ` is handled by compressing every Kraus
    /// operator to `Ran ρ`; [`Instrument::restricted_from`] then reports the
    /// original dimension.
    pub fn new(
        alphabet: Alphabet,
        maps: Vec<CPMap>,
        rho: DensityMatrix,
        theta: Vec<usize>,
        delta_s: Option<Vec<f64>>,
    ) -> Result<Self, InstrumentError> {
        let k = alphabet.len();
        if maps.len() != k {
            return Err(InstrumentError::Shape(format!("{} maps for {k} symbols", maps.len())));
        }
        let d = rho.dim();
        if maps.iter().any(|m| m.dim() != d) {
            return Err(InstrumentError::Shape("map dimension differs from state dimension".into()));
        }
        if theta.len() != k || theta.iter().any(|&t| t >= k) || (0..k).any(|a| theta[theta[a]] != a) {
            return Err(InstrumentError::BadInvolution);
        }
        if let Some(ds) = &delta_s {
            if ds.len() != k || ds.iter().any(|x| !x.is_finite()) {
                return Err(InstrumentError::Shape("ΔS labels must be finite, one per symbol".into()));
            }
        }
        let total = CPMap::sum(d, &maps);
        let id = CMatrix::identity(d, d);
        let tol = STRUCTURE_TOL * d as f64;
        let unit_defect = max_abs(&(total.heisenberg(&id) - &id));
        if unit_defect > tol {
            return Err(InstrumentError::NotUnital { defect: unit_defect });
        }
        let inv_defect = max_abs(&(total.schrodinger(rho.matrix()) - rho.matrix()));
        if inv_defect > tol {
            return Err(InstrumentError::NotInvariant { defect: inv_defect });
        }
        let spectrum = rho.spectrum();
        if spectrum[0] > RHO_RANK_TOL {
            return Ok(Self { alphabet, maps, rho, theta, delta_s, restricted_from: None, rep: OnceLock::new() });
        }
        let eig = rho.matrix().clone().symmetric_eigen();
        let cols: Vec<_> = (0..d)
            .filter(|&i| eig.eigenvalues[i] > RHO_RANK_TOL)
            .map(|i| eig.eigenvectors.column(i).into_owned())
            .collect();
        let b = CMatrix::from_columns(&cols);
        let bd = b.adjoint();
        let maps = maps.iter().map(|m| m.conjugated(&bd, &b)).collect();
        let rho = DensityMatrix::new(&bd * rho.matrix() * &b)?;
        let mut inst = Self::new(alphabet, maps, rho, theta, delta_s)?;
        inst.restricted_from = Some(d);
        Ok(inst)
    }

    /// Builds the instrument with `ρ` obtained from [`invariant_state`];
    /// fails if the invariant state is not unique.
    pub fn with_invariant_state(
        alphabet: Alphabet,
        maps: Vec<CPMap>,
        theta: Vec<usize>,
        delta_s: Option<Vec<f64>>,
    ) -> Result<Self, InstrumentError> {
        let d = maps.first().map(CPMap::dim).ok_or_else(|| InstrumentError::Alphabet("empty".into()))?;
        let st = invariant_state(&CPMap::sum(d, &maps))?;
        if !st.is_unique() {
            return Err(InstrumentError::NonUniqueState(st.fixed_space_dim));
        }
        Self::new(alphabet, maps, st.rho, theta, delta_s)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn maps(&self) -> &[CPMap] {
        &self.maps
    }

    pub fn map(&self, a: usize) -> &CPMap {
        &self.maps[a]
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn theta(&self) -> &[usize] {
        &self.theta
    }

    pub fn delta_s(&self) -> Option<&[f64]> {
        self.delta_s.as_deref()
    }

    /// Original dimension when `ρ` was singular and the instrument was compressed to `Ran ρ`.
    pub fn restricted_from(&self) -> Option<usize> {
        self.restricted_from
    }

    pub fn total_map(&self) -> CPMap {
        CPMap::sum(self.dim(), &self.maps)
    }

    /// Real representation used for all word probabilities: the state is
    /// `ρ` in Hermitian coordinates, symbol `a` acts by `Φ*_a`, and the
    /// readout is the trace.
    pub fn linear_rep(&self) -> &LinearRep {
        self.rep.get_or_init(|| {
            let d = self.dim();
            let init = hermitian_coords(self.rho.matrix());
            let mats = self.maps.iter().map(CPMap::real_dual_matrix).collect();
            let readout = nalgebra::DVector::from_iterator(d * d, (0..d * d).map(|i| if i < d { 1.0 } else { 0.0 }));
            LinearRep::new(init, mats, readout).expect("dimension checked at construction")
        })
    }

    /// `log tr(ρ Φ_{w_1}∘…∘Φ_{w_T}[1])`.
    pub fn unraveling_prob(&self, w: &Word) -> Result<f64, InstrumentError> {
        Ok(self.linear_rep().log_prob(w.as_slice())?)
    }

    pub fn log_prob_str(&self, text: &str) -> Result<f64, InstrumentError> {
        self.unraveling_prob(&self.alphabet.parse_word(text)?)
    }

    /// Outcome-reversed instrument `Φ̂_a[X] = ρ^{-½} Φ*_{θ(a)}[ρ^{½} X ρ^{½}] ρ^{-½}` with the same `ρ`.
    ///
    /// Its Kraus operators are `ρ^{½} V* ρ^{-½}` for the Kraus operators `V` of `Φ_{θ(a)}`.
    pub fn or_instrument(&self) -> Result<Instrument, InstrumentError> {
        let (s, si) = hermitian_sqrt_pair(self.rho.matrix())
            .ok_or_else(|| InstrumentError::SingularState(self.rho.spectrum()[0]))?;
        let d = self.dim();
        let maps = (0..self.alphabet.len())
            .map(|a| {
                let src = &self.maps[self.theta[a]];
                CPMap::new(d, src.kraus().iter().map(|v| &s * v.adjoint() * &si).collect())
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(self.alphabet.clone(), maps, self.rho.clone(), self.theta.clone(), self.delta_s.clone())
    }

    /// `Φ(α) = Σ_a e^{-αΔS(a)} Φ_a` in the real Hermitian basis.
    pub fn deformed_matrix(&self, alpha: f64) -> Result<DMatrix<f64>, InstrumentError> {
        let ds = self.delta_s.as_ref().ok_or(InstrumentError::MissingLabels)?;
        let w: Vec<f64> = ds.iter().map(|&s| (-alpha * s).exp()).collect();
        Ok(self.linear_rep().weighted_sum(&w))
    }

    /// Single-step outcome probabilities `tr(ρ Φ_a[1])`.
    pub fn one_step_probs(&self) -> Vec<f64> {
        let d = self.dim();
        let id = CMatrix::identity(d, d);
        self.maps
            .iter()
            .map(|m| (self.rho.matrix() * m.heisenberg(&id)).trace().re)
            .collect()
    }

    /// `(r₊, r₋)`: largest and smallest eigenvalue of `ρ`.
    pub fn rho_extremes(&self) -> (f64, f64) {
        let s = self.rho.spectrum();
        (s[s.len() - 1], s[0])
    }

    pub fn symbol_map(&self) -> HashMap<String, usize> {
        self.alphabet.symbols().iter().cloned().enumerate().map(|(i, s)| (s, i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bernoulli_d2(q: f64) -> Instrument {
        let k0 = CMatrix::identity(2, 2) * c(q.sqrt());
        let k1 = CMatrix::identity(2, 2) * c((1.0 - q).sqrt());
        Instrument::new(
            Alphabet::new(["K", "S"]).unwrap(),
            vec![CPMap::new(2, vec![k0]).unwrap(), CPMap::new(2, vec![k1]).unwrap()],
            DensityMatrix::maximally_mixed(2),
            vec![0, 1],
            None,
        )
        .unwrap()
    }

    #[test]
    fn empty_word_has_probability_one() {
        assert_eq!(bernoulli_d2(0.3).unraveling_prob(&Word::default()).unwrap(), 0.0);
    }

    #[test]
    fn fair_coin_words() {
        let inst = bernoulli_d2(0.5);
        let lp = inst.log_prob_str("KSSKS").unwrap();
        assert!((lp + 5.0 * 2f64.ln()).abs() < 1e-14);
        assert!(matches!(inst.log_prob_str("KX"), Err(InstrumentError::UnknownSymbol(_))));
    }

    #[test]
    fn identity_map_has_non_unique_state() {
        let id = CPMap::new(2, vec![CMatrix::identity(2, 2)]).unwrap();
        let st = invariant_state(&id).unwrap();
        assert!(!st.is_unique());
        assert!(max_abs(&(st.rho.matrix() - DensityMatrix::maximally_mixed(2).matrix())) < 1e-12);
    }

    #[test]
    fn non_unital_family_is_rejected() {
        let k = CMatrix::identity(2, 2) * c(0.5);
        let r = Instrument::new(
            Alphabet::new(["a"]).unwrap(),
            vec![CPMap::new(2, vec![k]).unwrap()],
            DensityMatrix::maximally_mixed(2),
            vec![0],
            None,
        );
        assert!(matches!(r, Err(InstrumentError::NotUnital { .. })));
    }

    #[test]
    fn singular_invariant_state_is_compressed() {
        // Amplitude damping to |0⟩ split into two outcomes; ρ = |0⟩⟨0| is invariant.
        let k0 = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        let k1 = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        let rho = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let inst = Instrument::new(
            Alphabet::new(["0", "1"]).unwrap(),
            vec![CPMap::new(2, vec![k0]).unwrap(), CPMap::new(2, vec![k1]).unwrap()],
            rho,
            vec![0, 1],
            None,
        )
        .unwrap();
        assert_eq!(inst.restricted_from(), Some(2));
        assert_eq!(inst.dim(), 1);
        assert_eq!(inst.log_prob_str("0000").unwrap(), 0.0);
        assert_eq!(inst.log_prob_str("01").unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn parse_multi_character_symbols() {
        let a = Alphabet::new(["++", "+-", "-+", "--"]).unwrap();
        assert_eq!(a.parse_word("++-+--").unwrap().0, vec![0, 2, 3]);
        assert_eq!(a.parse_word("++ -+, --").unwrap().0, vec![0, 2, 3]);
        assert_eq!(a.format_word(&[0, 2]), "++ -+");
        assert!(Alphabet::new(["a", "a"]).is_err());
    }
}
