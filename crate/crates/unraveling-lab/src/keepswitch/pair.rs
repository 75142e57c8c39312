//! Relative entropy production between two Keep–Switch measures `ℙ` and `ℙ̂`,
//! with `σ_T = log ℙ(ω) − log ℙ̂(ω)`.

use serde::Serialize;

use super::{KeepSwitch, KeepSwitchError};
use crate::pmp::PMPSpec;

/// Law of the limit of `(σ_T − T·ep)/√T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum CltCase {
    /// `ℙ = ℙ̂`, so `σ_T` is bounded.
    Degenerate,
    Gaussian { var: f64 },
    /// `Z₁ − |Z₂|` with independent centred normals.
    Folded { var_z1: f64, var_z2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairKeepSwitch {
    p: KeepSwitch,
    hat: KeepSwitch,
}

/// Parameters `γ, χ, η` below this magnitude count as vanishing when classifying the CLT.
const ZERO_TOL: f64 = 1e-12;

fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

impl PairKeepSwitch {
    pub fn new(q1: f64, q2: f64, qh1: f64, qh2: f64) -> Result<Self, KeepSwitchError> {
        Ok(Self { p: KeepSwitch::new(q1, q2)?, hat: KeepSwitch::new(qh1, qh2)? })
    }

    pub fn measures(&self) -> (KeepSwitch, KeepSwitch) {
        (self.p, self.hat)
    }

    pub fn pmps(&self) -> (PMPSpec, PMPSpec) {
        (self.p.pmp(), self.hat.pmp())
    }

    /// `γ = ½ log(q₁/q₂)`, signed.
    pub fn gamma(&self) -> f64 {
        let (q1, q2) = self.p.q();
        0.5 * (q1 / q2).ln()
    }

    /// `χ = ½(|log(q₁/q₂)| − |log(q̂₁/q̂₂)|)`.
    pub fn chi(&self) -> f64 {
        let (q1, q2) = self.p.q();
        let (h1, h2) = self.hat.q();
        0.5 * ((q1 / q2).ln().abs() - (h1 / h2).ln().abs())
    }

    pub fn eta(&self) -> f64 {
        let (q1, q2) = self.p.q();
        let (r1, r2) = self.p.r();
        let (h1, h2) = self.hat.q();
        let (s1, s2) = self.hat.r();
        0.5 * (q1 * q2 * s1 * s2 / (r1 * r2 * h1 * h2)).ln()
    }

    pub fn delta(&self) -> f64 {
        let (r1, r2) = self.p.r();
        let (s1, s2) = self.hat.r();
        0.5 * (r1 * r2 / (s1 * s2)).ln()
    }

    /// `ρ = ½ log(q₁q₂/(r₁r₂))`.
    pub fn rho(&self) -> f64 {
        let (q1, q2) = self.p.q();
        let (r1, r2) = self.p.r();
        0.5 * (q1 * q2 / (r1 * r2)).ln()
    }

    /// `Q(λ) = log κ₊([[e^{λ₁+λ₂}q₁, r₁], [r₂, e^{λ₁−λ₂}q₂]])` in closed form.
    pub fn q_lambda(&self, l: [f64; 2]) -> f64 {
        let (q1, q2) = self.p.q();
        let x = l[1] + self.gamma();
        0.5 * (q1 * q2).ln()
            + l[0]
            + (x.cosh() + (x.sinh().powi(2) + (-2.0 * (l[0] + self.rho())).exp()).sqrt()).ln()
    }

    /// The same quantity from the eigenvalues of the 2×2 matrix.
    pub fn q_lambda_matrix(&self, l: [f64; 2]) -> f64 {
        let (q1, q2) = self.p.q();
        let (r1, r2) = self.p.r();
        let a = (l[0] + l[1]).exp() * q1;
        let d = (l[0] - l[1]).exp() * q2;
        let tr = a + d;
        let disc = (a - d).powi(2) + 4.0 * r1 * r2;
        ((tr + disc.sqrt()) / 2.0).ln()
    }

    /// Argument of `Q` realising the pressure at `α`.
    fn pressure_point(&self, alpha: f64) -> [f64; 2] {
        let g = self.gamma();
        [-self.eta() * alpha, -sign(g) * g.abs().min(alpha * self.chi())]
    }

    /// `e(α) = −δα + Q(−ηα, −sign(γ)(|γ| ∧ αχ))`.
    pub fn pressure(&self, alpha: f64) -> f64 {
        -self.delta() * alpha + self.q_lambda(self.pressure_point(alpha))
    }

    pub fn ep(&self) -> f64 {
        let (r1, r2) = self.p.r();
        let s = r1 + r2;
        self.delta() + (r1 - 2.0 * r1 * r2 + r2) / s * self.eta() + (r1 - r2).abs() / s * self.chi()
    }

    /// Point `|γ|/χ` where `e` fails to be twice differentiable, if `χ ≠ 0`.
    pub fn kink(&self) -> Option<f64> {
        let chi = self.chi();
        (chi != 0.0).then(|| self.gamma().abs() / chi)
    }

    /// `e″(α*⁺) − e″(α*⁻) = −χ|χ| e^{ρ − η|γ|/χ}` at the kink `α*`.
    pub fn second_derivative_jump(&self) -> Option<f64> {
        let chi = self.chi();
        self.kink().map(|a| -chi * chi.abs() * (self.rho() - self.eta() * a).exp())
    }

    /// Hessian of `Q` at the origin.
    pub fn q_hessian(&self) -> [[f64; 2]; 2] {
        let (q1, q2) = self.p.q();
        let (r1, r2) = self.p.r();
        let pre = 4.0 * r1 * r2 / (r1 + r2).powi(3);
        [[pre * (q1 * r2 * r2 + q2 * r1 * r1), pre * (r2 - r1)], [pre * (r2 - r1), pre * (q1 + q2)]]
    }

    pub fn clt_case(&self) -> CltCase {
        let zero = |x: f64| x.abs() < ZERO_TOL;
        let (g, chi, eta) = (self.gamma(), self.chi(), self.eta());
        if zero(eta) && zero(chi) {
            return CltCase::Degenerate;
        }
        let (q1, q2) = self.p.q();
        let (r1, r2) = self.p.r();
        if zero(chi) || !zero(g) {
            let var = 4.0 * r1 * r2 / (r1 + r2).powi(3)
                * ((q1 * r2 * r2 + q2 * r1 * r1) * eta * eta + 2.0 * (r2 - r1).abs() * eta * chi + (q1 + q2) * chi * chi);
            CltCase::Gaussian { var }
        } else {
            CltCase::Folded { var_z1: q1 * r1 * eta * eta, var_z2: q1 / r1 * chi * chi }
        }
    }
}
