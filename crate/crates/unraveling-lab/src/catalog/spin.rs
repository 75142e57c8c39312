//! Spin-½ Hamiltonians, closed-form propagators and two-time / one-time instruments built from them.

use serde::{Deserialize, Serialize};

use crate::instrument::{Alphabet, CPMap, InstrumentError};
use crate::numerics::{kron, CMatrix, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn expi(x: f64) -> C64 {
    C64::from_polar(1.0, x)
}

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

fn id2() -> CMatrix {
    CMatrix::identity(2, 2)
}

fn proj_up() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
}

fn proj_down() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
}

/// Raising operator `σ₊ = |↑⟩⟨↓|`.
fn sigma_plus() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
}

fn sigma_minus() -> CMatrix {
    sigma_plus().transpose()
}

fn scale(m: &CMatrix, z: C64) -> CMatrix {
    m * z
}

/// System–probe coupling constants. The system frequency is `ω`, the probe
/// frequency `ε`; `μ` is the Ising (`σ_z σ_z`) coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub epsilon: f64,
    pub omega: f64,
    pub lambda: f64,
    #[serde(default)]
    pub mu: f64,
    pub t: f64,
}

impl Coupling {
    /// `δ = √(((ε−ω)/2)² + λ²)`.
    pub fn delta(&self) -> f64 {
        (((self.epsilon - self.omega) / 2.0).powi(2) + self.lambda * self.lambda).sqrt()
    }

    /// XXZ transition probability `s = (λ sin(δt)/δ)²`.
    pub fn xxz_s(&self) -> f64 {
        let d = self.delta();
        (self.lambda * (d * self.t).sin() / d).powi(2)
    }

    /// X00 transition probabilities `s_± = (λ sin((t/2)R_±)/R_±)²`, `R_± = √(λ² + (ω±ε)²)`.
    pub fn x00_s_pm(&self) -> (f64, f64) {
        let s = |g: f64| {
            let r = (self.lambda * self.lambda + g * g).sqrt();
            (self.lambda * (self.t * r / 2.0).sin() / r).powi(2)
        };
        (s(self.omega + self.epsilon), s(self.omega - self.epsilon))
    }

    /// Multi-probe transition amplitude parameter `sin²(λt/√2)` (used at `ε = ω`, `μ = 0`).
    pub fn multi_s(&self) -> f64 {
        (self.lambda * self.t / std::f64::consts::SQRT_2).sin().powi(2)
    }
}

/// `H = ω/2 σ_z⊗1 + ε/2 1⊗σ_z + λ/2 (σ_xσ_x + σ_yσ_y) + μ/2 σ_zσ_z` on system ⊗ probe.
pub fn xxz_hamiltonian(k: &Coupling) -> CMatrix {
    let (sx, sy, sz) = (sigma_x(), sigma_y(), sigma_z());
    kron(&sz, &id2()) * c(k.omega / 2.0, 0.0)
        + kron(&id2(), &sz) * c(k.epsilon / 2.0, 0.0)
        + (kron(&sx, &sx) + kron(&sy, &sy)) * c(k.lambda / 2.0, 0.0)
        + kron(&sz, &sz) * c(k.mu / 2.0, 0.0)
}

/// `H = ω/2 σ_z⊗1 + ε/2 1⊗σ_z + λ/2 σ_xσ_x`.
pub fn x00_hamiltonian(k: &Coupling) -> CMatrix {
    let (sx, sz) = (sigma_x(), sigma_z());
    kron(&sz, &id2()) * c(k.omega / 2.0, 0.0)
        + kron(&id2(), &sz) * c(k.epsilon / 2.0, 0.0)
        + kron(&sx, &sx) * c(k.lambda / 2.0, 0.0)
}

/// System coupled to two identical probes with XXZ interactions, on system ⊗ probe₁ ⊗ probe₂.
pub fn multi_hamiltonian(k: &Coupling) -> CMatrix {
    let (sx, sy, sz, i) = (sigma_x(), sigma_y(), sigma_z(), id2());
    let k3 = |a: &CMatrix, b: &CMatrix, cc: &CMatrix| kron(&kron(a, b), cc);
    k3(&sz, &i, &i) * c(k.omega / 2.0, 0.0)
        + (k3(&i, &sz, &i) + k3(&i, &i, &sz)) * c(k.epsilon / 2.0, 0.0)
        + (k3(&sx, &sx, &i) + k3(&sx, &i, &sx) + k3(&sy, &sy, &i) + k3(&sy, &i, &sy)) * c(k.lambda / 2.0, 0.0)
        + (k3(&sz, &sz, &i) + k3(&sz, &i, &sz)) * c(k.mu / 2.0, 0.0)
}

/// Assembles `U` on system ⊗ probe from probe blocks `blocks[l'][l] = (1⊗⟨l'|) U (1⊗|l⟩)`.
fn assemble(blocks: &[Vec<CMatrix>], ds: usize) -> CMatrix {
    let dp = blocks.len();
    CMatrix::from_fn(ds * dp, ds * dp, |r, col| blocks[r % dp][col % dp][(r / dp, col / dp)])
}

/// Probe block `U_{l'l} = (1⊗⟨l'|) U (1⊗|l⟩)` of a propagator on system ⊗ probe.
pub fn probe_block(u: &CMatrix, ds: usize, dp: usize, l_out: usize, l_in: usize) -> CMatrix {
    CMatrix::from_fn(ds, ds, |i, j| u[(i * dp + l_out, j * dp + l_in)])
}

/// Closed-form XXZ propagator `e^{-itH}`.
pub fn xxz_propagator(k: &Coupling) -> CMatrix {
    let Coupling { epsilon: eps, omega: om, lambda: lam, mu, t } = *k;
    let nu_p = (eps - om) + 2.0 * mu;
    let nu_m = (eps - om) - 2.0 * mu;
    let d = k.delta();
    let (cd, sd) = ((t * d).cos(), (t * d).sin() / d);
    let h = (eps - om) / 2.0;
    let vpp = scale(&proj_up(), expi(-t * (om + nu_p) / 2.0)) + scale(&proj_down(), expi(t * om / 2.0) * c(cd, -h * sd));
    let vmm = scale(&proj_down(), expi(t * (om + nu_m) / 2.0)) + scale(&proj_up(), expi(-t * om / 2.0) * c(cd, h * sd));
    let vmp = scale(&sigma_plus(), expi(-t * om / 2.0) * lam * sd);
    let vpm = scale(&sigma_minus(), expi(t * om / 2.0) * lam * sd);
    let ph = expi(t * mu / 2.0);
    let mi = c(0.0, -1.0);
    let blocks = vec![
        vec![scale(&vpp, ph * expi(-t * om / 2.0)), scale(&vpm, ph * mi * expi(-t * om / 2.0))],
        vec![scale(&vmp, ph * mi * expi(t * om / 2.0)), scale(&vmm, ph * expi(t * om / 2.0))],
    ];
    assemble(&blocks, 2)
}

/// Closed-form X00 propagator `e^{-itH}`.
pub fn x00_propagator(k: &Coupling) -> CMatrix {
    let Coupling { epsilon: eps, omega: om, lambda: lam, t, .. } = *k;
    let diag_block = |sgn: f64| -> (CMatrix, CMatrix) {
        let g = [om + sgn * eps, -om + sgn * eps];
        let mut v = CMatrix::zeros(2, 2);
        let mut off = CMatrix::zeros(2, 2);
        for (i, &gi) in g.iter().enumerate() {
            let w = (lam * lam + gi * gi).sqrt();
            let (cs, sn) = ((w * t / 2.0).cos(), (w * t / 2.0).sin());
            v[(i, i)] = c(cs, -gi / w * sn);
            off[(i, i)] = c(0.0, -lam / w * sn);
        }
        (v, off * sigma_x())
    };
    let (vpp, vpm) = diag_block(1.0);
    let (vmm, vmp) = diag_block(-1.0);
    assemble(&[vec![vpp, vpm], vec![vmp, vmm]], 2)
}

/// `e^{-itH}` for a two-level Hermitian block `[[e1, g], [g, e2]]` with real coupling `g`.
fn two_level(e1: f64, e2: f64, g: f64, t: f64) -> [[C64; 2]; 2] {
    let mean = (e1 + e2) / 2.0;
    let half = (e1 - e2) / 2.0;
    let w = (half * half + g * g).sqrt();
    let (cs, sinc) = if w > 0.0 { ((w * t).cos(), (w * t).sin() / w) } else { (1.0, t) };
    let ph = expi(-t * mean);
    [
        [ph * c(cs, -half * sinc), ph * c(0.0, -g * sinc)],
        [ph * c(0.0, -g * sinc), ph * c(cs, half * sinc)],
    ]
}

/// Closed-form propagator of [`multi_hamiltonian`], assembled sector by sector
/// in the total magnetisation. Basis index `4s + 2a₁ + a₂` with `0 = ↑/+`, `1 = ↓/−`.
///
/// The sectors are:
/// * `|↑++⟩` and `|↓−−⟩`, one-dimensional;
/// * `{|↓++⟩, |↑,T₀⟩}` and `{|↑−−⟩, |↓,T₀⟩}` coupled with strength `√2 λ`,
///   where `T₀ = (|+−⟩ + |−+⟩)/√2`;
/// * the singlets `|↑,S⟩`, `|↓,S⟩`, `S = (|+−⟩ − |−+⟩)/√2`, which only acquire a phase.
pub fn multi_propagator(k: &Coupling) -> CMatrix {
    let Coupling { epsilon: eps, omega: om, lambda: lam, mu, t } = *k;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let basis = |s: usize, a1: usize, a2: usize| 4 * s + 2 * a1 + a2;
    let mut u = CMatrix::zeros(8, 8);
    // One-dimensional sectors.
    u[(basis(0, 0, 0), basis(0, 0, 0))] = expi(-t * (om / 2.0 + eps + mu));
    u[(basis(1, 1, 1), basis(1, 1, 1))] = expi(-t * (-om / 2.0 - eps + mu));
    // Vectors of the two-dimensional sectors and singlets, as (index, amplitude) lists.
    type Vec8 = Vec<(usize, f64)>;
    let t0 = |s: usize| -> Vec8 { vec![(basis(s, 0, 1), r), (basis(s, 1, 0), r)] };
    let singlet = |s: usize| -> Vec8 { vec![(basis(s, 0, 1), r), (basis(s, 1, 0), -r)] };
    let mut add_outer = |coef: C64, out: &Vec8, inp: &Vec8| {
        for &(i, a) in out {
            for &(j, b) in inp {
                u[(i, j)] += coef * a * b;
            }
        }
    };
    let sectors = [
        (vec![(basis(1, 0, 0), 1.0)], t0(0), -om / 2.0 + eps - mu, om / 2.0),
        (vec![(basis(0, 1, 1), 1.0)], t0(1), om / 2.0 - eps - mu, -om / 2.0),
    ];
    for (a, b, ea, eb) in sectors.iter() {
        let p = two_level(*ea, *eb, std::f64::consts::SQRT_2 * lam, t);
        add_outer(p[0][0], a, a);
        add_outer(p[0][1], a, b);
        add_outer(p[1][0], b, a);
        add_outer(p[1][1], b, b);
    }
    add_outer(expi(-t * om / 2.0), &singlet(0), &singlet(0));
    add_outer(expi(t * om / 2.0), &singlet(1), &singlet(1));
    u
}

/// Thermal probe populations `(π₊, π₋)` for a probe `ε/2 σ_z` at inverse temperature `β`.
pub fn thermal_probe(beta: f64, epsilon: f64) -> [f64; 2] {
    let x = beta * epsilon / 2.0;
    let z = 2.0 * x.cosh();
    [(-x).exp() / z, x.exp() / z]
}

/// Two-probe thermal populations indexed by `2a₁ + a₂`.
pub fn thermal_pair(betas: [f64; 2], epsilon: f64) -> [f64; 4] {
    let p1 = thermal_probe(betas[0], epsilon);
    let p2 = thermal_probe(betas[1], epsilon);
    [p1[0] * p2[0], p1[0] * p2[1], p1[1] * p2[0], p1[1] * p2[1]]
}

/// Outcome maps of the two-time protocol: `Φ_{(l,l')}` has Kraus `√π_l U_{l'l}`.
/// Symbols are ordered `(l, l')` lexicographically; returns `(maps, ΔS, θ)`.
pub fn two_time_maps(u: &CMatrix, ds: usize, pi: &[f64]) -> Result<(Vec<CPMap>, Vec<f64>, Vec<usize>), InstrumentError> {
    let dp = pi.len();
    let mut maps = Vec::with_capacity(dp * dp);
    let mut ds_labels = Vec::with_capacity(dp * dp);
    for l in 0..dp {
        for lp in 0..dp {
            let block = probe_block(u, ds, dp, lp, l) * c(pi[l].sqrt(), 0.0);
            maps.push(CPMap::new(ds, vec![block])?);
            ds_labels.push(pi[l].ln() - pi[lp].ln());
        }
    }
    let theta = (0..dp * dp).map(|x| (x % dp) * dp + x / dp).collect();
    Ok((maps, ds_labels, theta))
}

/// Outcome maps of the one-time protocol: `Φ_l` has Kraus `{√π_m U_{lm}}_m`.
pub fn one_time_maps(u: &CMatrix, ds: usize, pi: &[f64]) -> Result<Vec<CPMap>, InstrumentError> {
    let dp = pi.len();
    (0..dp)
        .map(|l| CPMap::new(ds, (0..dp).map(|m| probe_block(u, ds, dp, l, m) * c(pi[m].sqrt(), 0.0)).collect()))
        .collect()
}

/// Alphabet of ordered pairs of probe labels, e.g. `"+-"`.
pub fn pair_alphabet(labels: &[&str]) -> Alphabet {
    let syms: Vec<String> = labels.iter().flat_map(|a| labels.iter().map(move |b| format!("{a}{b}"))).collect();
    Alphabet::new(syms).expect("distinct nonempty labels")
}

pub const SPIN_LABELS: [&str; 2] = ["+", "-"];
pub const PAIR_LABELS: [&str; 4] = ["++", "+-", "-+", "--"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{matrix_exponential, max_abs};

    fn sample() -> Coupling {
        Coupling { epsilon: 0.9, omega: 1.4, lambda: 0.7, mu: 0.35, t: 1.9 }
    }

    #[test]
    fn xxz_closed_form_matches_expm() {
        let k = sample();
        let diff = max_abs(&(xxz_propagator(&k) - matrix_exponential(&xxz_hamiltonian(&k), k.t).unwrap()));
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn x00_closed_form_matches_expm() {
        let k = sample();
        let diff = max_abs(&(x00_propagator(&k) - matrix_exponential(&x00_hamiltonian(&k), k.t).unwrap()));
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn multi_closed_form_matches_expm() {
        let k = sample();
        let diff = max_abs(&(multi_propagator(&k) - matrix_exponential(&multi_hamiltonian(&k), k.t).unwrap()));
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn xxz_flip_probability_is_s() {
        let k = sample();
        let u = xxz_propagator(&k);
        // |↓+⟩ → |↑−⟩ amplitude squared.
        let amp = u[(1, 2)].norm_sqr();
        assert!((amp - k.xxz_s()).abs() < 1e-13);
    }

    #[test]
    fn thermal_probe_is_normalised() {
        let p = thermal_probe(0.8, 1.3);
        assert!((p[0] + p[1] - 1.0).abs() < 1e-15);
        assert!(p[0] < p[1]);
        assert!(((p[0] / p[1]).ln() + 0.8 * 1.3).abs() < 1e-14);
    }
}
