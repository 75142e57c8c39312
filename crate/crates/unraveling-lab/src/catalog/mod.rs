//! Constructors for every instrument family, each paired with its closed-form oracle.

mod closed;
mod params;
pub mod spin;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::instrument::{invariant_state, Alphabet, CPMap, DensityMatrix, Instrument, InstrumentError};
use crate::numerics::{CMatrix, NumericsError, C64};
use crate::pmp::{PmpError, PMPSpec};

pub use closed::{closed_form, pressure_discriminant, Quantity};
pub use params::{
    BernoulliParams, FamilyParams, KeepSwitchParams, MarkovParams, MultiThermalParams, OneTimeParams,
    RandomThermalParams, RotationalParams, ThermalParams, VonNeumannParams, X00Coupling,
};
pub use spin::Coupling;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error(transparent)]
    Instrument(#[from] InstrumentError),
    #[error(transparent)]
    Pmp(#[from] PmpError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("{quantity} has no closed form for the {family} family")]
    Undefined { quantity: String, family: String },
    #[error("no parameters reproduce s₊ = {s_plus}, s₋ = {s_minus}")]
    NoSolution { s_plus: f64, s_minus: f64 },
}

/// Boundary cases in which the unraveling collapses to a simpler measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    /// Every state is invariant; the instrument carries the Cesàro state of `1/d`.
    AnyStateInvariant,
    /// The unraveling is a mixture of Dirac measures on constant sequences.
    DiracMixture,
    /// The unraveling is a convex combination of Bernoulli measures.
    BernoulliMixture,
    /// The unraveling is a Markov measure.
    Markov,
}

/// A constructed family member.
#[derive(Debug, Clone)]
pub struct Family {
    pub instrument: Instrument,
    pub pmp: Option<PMPSpec>,
    pub degenerate: Option<Degeneracy>,
}

/// Values within this distance of a boundary are treated as lying on it.
const BOUNDARY_TOL: f64 = 1e-14;

fn near(x: f64, y: f64) -> bool {
    (x - y).abs() <= BOUNDARY_TOL
}

/// Entries of `Φ_a[|v_j⟩⟨v_j|]` off the diagonal below this count as zero.
const DIAGONAL_TOL: f64 = 1e-12;

/// The PMP `m_ij(a) = ⟨v_i|Φ_a[|v_j⟩⟨v_j|] v_i⟩`, `𝐩 = diag ρ`, when every
/// `Φ_a` maps diagonal matrices to diagonal matrices.
pub fn diagonal_pmp(inst: &Instrument) -> Option<PMPSpec> {
    let d = inst.dim();
    let mut mats = Vec::with_capacity(inst.alphabet().len());
    for map in inst.maps() {
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            let mut e = CMatrix::zeros(d, d);
            e[(j, j)] = C64::new(1.0, 0.0);
            let img = map.heisenberg(&e);
            for i in 0..d {
                for k in 0..d {
                    if i != k && img[(i, k)].norm() > DIAGONAL_TOL {
                        return None;
                    }
                }
                m[(i, j)] = img[(i, i)].re.max(0.0);
            }
        }
        mats.push(m);
    }
    let rho = inst.rho().matrix();
    let p: Vec<f64> = (0..d).map(|i| rho[(i, i)].re.max(0.0)).collect();
    let p = crate::numerics::ProbVector::normalized(p).ok()?;
    let spec = PMPSpec::new(inst.alphabet().clone(), mats, p).ok()?.with_theta(inst.theta().to_vec()).ok()?;
    match inst.delta_s() {
        Some(ds) => spec.with_delta_s(ds.to_vec()).ok(),
        None => Some(spec),
    }
}

/// Builds the instrument with the supplied state, or with its invariant state.
/// A non-unique invariant state is replaced by the Cesàro state and flagged.
fn assemble(
    alphabet: Alphabet,
    maps: Vec<CPMap>,
    theta: Vec<usize>,
    delta_s: Option<Vec<f64>>,
    rho: Option<DensityMatrix>,
    flag: Option<Degeneracy>,
) -> Result<Family, CatalogError> {
    let d = maps[0].dim();
    let (rho, flag) = match rho {
        Some(r) => (r, flag),
        None => {
            let st = invariant_state(&CPMap::sum(d, &maps))?;
            let flag = if st.is_unique() { flag } else { flag.or(Some(Degeneracy::AnyStateInvariant)) };
            (st.rho, flag)
        }
    };
    let instrument = Instrument::new(alphabet, maps, rho, theta, delta_s)?;
    let pmp = diagonal_pmp(&instrument);
    Ok(Family { instrument, pmp, degenerate: flag })
}

fn identity_theta(k: usize) -> Vec<usize> {
    (0..k).collect()
}

fn bernoulli(p: &BernoulliParams) -> Result<Family, CatalogError> {
    let alphabet = p.alphabet()?;
    let d = p.dim;
    let maps = p
        .q
        .iter()
        .map(|&q| CPMap::new(d, vec![CMatrix::identity(d, d) * C64::new(q.sqrt(), 0.0)]))
        .collect::<Result<Vec<_>, _>>()?;
    let theta = p.theta.clone().unwrap_or_else(|| identity_theta(alphabet.len()));
    let fam = assemble(alphabet, maps, theta, None, Some(DensityMatrix::maximally_mixed(d)), None)?;
    Ok(fam)
}

/// PMP whose symbol is the current Markov state: `m_xy(a) = p_xy δ_xa`.
pub fn markov_pmp(alphabet: Alphabet, p_matrix: &DMatrix<f64>, p: Option<&[f64]>) -> Result<PMPSpec, CatalogError> {
    let d = p_matrix.nrows();
    let mats = (0..d)
        .map(|a| DMatrix::from_fn(d, d, |x, y| if x == a { p_matrix[(x, y)] } else { 0.0 }))
        .collect();
    Ok(match p {
        Some(v) => PMPSpec::new(alphabet, mats, crate::numerics::ProbVector::new(v.to_vec())?)?,
        None => PMPSpec::from_matrices(alphabet, mats)?,
    })
}

fn markov(p: &MarkovParams) -> Result<Family, CatalogError> {
    let pm = p.matrix()?;
    let mut spec = markov_pmp(p.alphabet()?, &pm, p.p.as_deref())?;
    if let Some(theta) = &p.theta {
        spec = spec.with_theta(theta.clone())?;
    }
    let instrument = spec.canonical_instrument()?;
    Ok(Family { instrument, pmp: Some(spec), degenerate: None })
}

/// Rank-one von Neumann instrument `Φ_a[X] = U* P_a X P_a U` with `ρ = 1/d`.
/// Its unraveling is the Markov chain `p_xy = |U_yx|²`.
fn von_neumann(p: &VonNeumannParams) -> Result<Family, CatalogError> {
    let u = p.unitary()?;
    let d = u.nrows();
    let maps = (0..d)
        .map(|a| {
            let mut v = CMatrix::zeros(d, d);
            v.set_row(a, &u.row(a));
            CPMap::new(d, vec![v])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let alphabet = Alphabet::numbered(d);
    let instrument =
        Instrument::new(alphabet.clone(), maps, DensityMatrix::maximally_mixed(d), identity_theta(d), None)?;
    let pm = DMatrix::from_fn(d, d, |x, y| u[(y, x)].norm_sqr());
    let spec = markov_pmp(alphabet, &pm, Some(&vec![1.0 / d as f64; d]))?;
    Ok(Family { instrument, pmp: Some(spec), degenerate: None })
}

fn keep_switch(p: &KeepSwitchParams) -> Result<Family, CatalogError> {
    let ks = crate::keepswitch::KeepSwitch::new(p.q1, p.q2).map_err(|e| CatalogError::Invalid(e.to_string()))?;
    let spec = ks.pmp();
    let instrument = spec.canonical_instrument()?;
    Ok(Family { instrument, pmp: Some(spec), degenerate: None })
}

fn one_time(u: &CMatrix, eta: f64, rho: Option<DensityMatrix>, flag: Option<Degeneracy>) -> Result<Family, CatalogError> {
    let pi = [0.5 - eta, 0.5 + eta];
    let maps = spin::one_time_maps(u, 2, &pi)?;
    let alphabet = Alphabet::new(spin::SPIN_LABELS)?;
    assemble(alphabet, maps, identity_theta(2), None, rho, flag)
}

fn two_time(u: &CMatrix, pi: &[f64], rho: Option<DensityMatrix>, flag: Option<Degeneracy>) -> Result<Family, CatalogError> {
    let (maps, ds, theta) = spin::two_time_maps(u, 2, pi)?;
    let labels: Vec<&str> = if pi.len() == 2 { spin::SPIN_LABELS.to_vec() } else { spin::PAIR_LABELS.to_vec() };
    assemble(spin::pair_alphabet(&labels), maps, theta, Some(ds), rho, flag)
}

/// Random thermal probes: `Φ_{k,l,l'} = w_k Φ^{(k)}_{l,l'}`, symbols `"{k}{l}{l'}"` with `k` counted from 1.
fn random_thermal(u: &CMatrix, eps: f64, betas: &[f64], weights: &[f64], flag: Option<Degeneracy>) -> Result<Family, CatalogError> {
    let mut maps = Vec::new();
    let mut ds = Vec::new();
    let mut syms = Vec::new();
    let mut theta = Vec::new();
    for (k, (&b, &w)) in betas.iter().zip(weights).enumerate() {
        let pi = spin::thermal_probe(b, eps);
        let (m, s, th) = spin::two_time_maps(u, 2, &pi)?;
        let base = maps.len();
        maps.extend(m.iter().map(|x| x.scaled(w)));
        ds.extend(s);
        theta.extend(th.iter().map(|&j| base + j));
        for l in spin::SPIN_LABELS {
            for lp in spin::SPIN_LABELS {
                syms.push(format!("{}{l}{lp}", k + 1));
            }
        }
    }
    assemble(Alphabet::new(syms)?, maps, theta, Some(ds), None, flag)
}

/// Builds the family member described by `params`.
pub fn build_instrument(params: &FamilyParams) -> Result<Family, CatalogError> {
    params.validate()?;
    match params {
        FamilyParams::Bernoulli(p) => bernoulli(p),
        FamilyParams::Markov(p) => markov(p),
        FamilyParams::VonNeumann(p) => von_neumann(p),
        FamilyParams::KeepSwitch(p) => keep_switch(p),
        FamilyParams::XxzOneTime(p) => {
            let u = spin::xxz_propagator(&p.coupling);
            one_time(&u, p.eta, Some(DensityMatrix::diagonal(&[0.5 - p.eta, 0.5 + p.eta])?), None)
        }
        FamilyParams::XxzTwoTime(p) => {
            let k = &p.coupling;
            let pi = spin::thermal_probe(p.beta, k.epsilon);
            let s = k.xxz_s();
            let flag = if near(s, 1.0) { Some(Degeneracy::Markov) } else { None };
            two_time(&spin::xxz_propagator(k), &pi, Some(DensityMatrix::diagonal(&pi)?), flag)
        }
        FamilyParams::XxzRandomThermal(p) => {
            let k = &p.coupling;
            let s = k.xxz_s();
            let flag = if near(s, 1.0) { Some(Degeneracy::Markov) } else { None };
            random_thermal(&spin::xxz_propagator(k), k.epsilon, &p.betas, &p.weights, flag)
        }
        FamilyParams::XxzMultiThermal(p) => {
            let k = &p.coupling;
            let pi = spin::thermal_pair(p.betas, k.epsilon);
            let resonant = near(k.epsilon, k.omega) && k.mu == 0.0;
            let s = k.multi_s();
            let flag = if resonant && (near(s, 0.0) || near(s, 1.0)) { Some(Degeneracy::BernoulliMixture) } else { None };
            let (maps, ds, theta) = spin::two_time_maps(&spin::multi_propagator(k), 2, &pi)?;
            let alphabet = spin::pair_alphabet(&spin::PAIR_LABELS);
            let rho = if flag.is_some() { Some(DensityMatrix::maximally_mixed(2)) } else { None };
            assemble(alphabet, maps, theta, Some(ds), rho, flag)
        }
        FamilyParams::X00OneTime(p) => {
            let k = p.coupling.resolve()?;
            let (sp, sm) = k.x00_s_pm();
            let flag = if near(sp, 0.0) && near(sm, 0.0) {
                Some(Degeneracy::AnyStateInvariant)
            } else if near(sp, 0.0) && near(sm, 1.0) {
                Some(Degeneracy::DiracMixture)
            } else {
                None
            };
            let rho = match flag {
                Some(Degeneracy::AnyStateInvariant) => Some(DensityMatrix::maximally_mixed(2)),
                _ => {
                    let pp = 0.5 + p.eta * (sp - sm) / (sp + sm);
                    Some(DensityMatrix::diagonal(&[pp, 1.0 - pp])?)
                }
            };
            one_time(&spin::x00_propagator(&k), p.eta, rho, flag)
        }
        FamilyParams::X00TwoTime(p) => {
            let k = p.coupling.resolve()?;
            let (sp, sm) = k.x00_s_pm();
            let flag = (near(sp, 0.0) && near(sm, 0.0)).then_some(Degeneracy::AnyStateInvariant);
            let rho = flag.map(|_| DensityMatrix::maximally_mixed(2));
            two_time(&spin::x00_propagator(&k), &spin::thermal_probe(p.beta, k.epsilon), rho, flag)
        }
        FamilyParams::X00RandomThermal(p) => {
            let k = p.coupling.resolve()?;
            let (sp, sm) = k.x00_s_pm();
            let flag = (near(sp, 0.0) && near(sm, 0.0)).then_some(Degeneracy::AnyStateInvariant);
            random_thermal(&spin::x00_propagator(&k), k.epsilon, &p.betas, &p.weights, flag)
        }
        FamilyParams::Rotational(p) => {
            let instrument = crate::rotational::rotational_instrument(p.delta)
                .map_err(|e| CatalogError::Invalid(e.to_string()))?;
            Ok(Family { instrument, pmp: None, degenerate: None })
        }
    }
}

/// X00 couplings with prescribed `(s₊, s₋)` at probe frequency `ε`.
///
/// Sets `ω = ε`, so that `R₋ = λ` and `s₋ = sin²(λt/2)`. Writing `φ = λt/2`
/// and `k = R₊/λ = √(1 + 4ε²/λ²)`, the remaining condition reads
/// `s₊ = sin²(φk)/k²`, solved by a scan over `k ∈ ]1, s₊^{-1/2}]` followed by
/// bisection on each branch `φ ∈ {nπ ± asin √s₋}`.
pub fn x00_params_for_s(s_plus: f64, s_minus: f64, epsilon: f64) -> Result<Coupling, CatalogError> {
    let fail = CatalogError::NoSolution { s_plus, s_minus };
    if !(0.0..1.0).contains(&s_plus) || !(0.0..=1.0).contains(&s_minus) || !(epsilon > 0.0) {
        return Err(fail);
    }
    let a = s_minus.sqrt().asin();
    let pi = std::f64::consts::PI;
    let mut branches: Vec<f64> = (0..64)
        .flat_map(|n| [n as f64 * pi + a, (n + 1) as f64 * pi - a])
        .filter(|&phi| phi > 1e-12)
        .collect();
    branches.sort_by(f64::total_cmp);
    branches.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    let coupling = |phi: f64, k: f64| {
        let lambda = 2.0 * epsilon / (k * k - 1.0).sqrt();
        Coupling { epsilon, omega: epsilon, lambda, mu: 0.0, t: 2.0 * phi / lambda }
    };
    for &phi in &branches {
        if s_plus == 0.0 {
            // sin(φk) = 0 with k > 1.
            let m = (phi / pi).floor() + 1.0;
            return Ok(coupling(phi, m * pi / phi));
        }
        let f = |k: f64| (phi * k).sin().powi(2) - s_plus * k * k;
        let k_max = 1.0 / s_plus.sqrt();
        const STEPS: usize = 20_000;
        let grid = |i: usize| 1.0 + (k_max - 1.0) * i as f64 / STEPS as f64;
        let mut prev = (grid(1), f(grid(1)));
        for i in 2..=STEPS {
            let cur = (grid(i), f(grid(i)));
            if prev.1 == 0.0 || prev.1.signum() != cur.1.signum() {
                let (mut lo, mut hi) = (prev.0, cur.0);
                let flo = f(lo);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if (f(mid) > 0.0) == (flo > 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Ok(coupling(phi, 0.5 * (lo + hi)));
            }
            prev = cur;
        }
    }
    Err(fail)
}
