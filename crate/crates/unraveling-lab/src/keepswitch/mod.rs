//! Keep–Switch instruments: the cumulant function `Q(λ)`, exact pressure,
//! entropy production, the `Z₁ − |Z₂|` central limit theorem and the
//! fluctuation–dissipation computation.

mod clt;
mod fdr;
mod pair;

use nalgebra::{DMatrix, Matrix2, Matrix3, Vector3};
use thiserror::Error;

use crate::instrument::Alphabet;
use crate::numerics::ProbVector;
use crate::pmp::{FMSpec, PMPSpec, PmpError};

pub use clt::{
    ks_clt_sampler, ks_critical_value, kolmogorov_distance, limit_cdf, sample_trajectory, CltSample, TrajectoryStats,
};
pub use fdr::{
    binomial_covariance, current, ep_eps, equilibrium_covariance, equilibrium_covariance_infinite, equilibrium_step_currents,
    fdr_compute, mean_current, onsager_finite, onsager_infinite, sampled_equilibrium_covariance, sigma_eps, FdrHorizon,
    FdrReport,
};
pub use pair::{CltCase, PairKeepSwitch};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KeepSwitchError {
    #[error("q₁ and q₂ must lie in ]0,1[ (got {0}, {1})")]
    Range(f64, f64),
    #[error("invalid sampler configuration: {0}")]
    Sampler(String),
    #[error(transparent)]
    Pmp(#[from] PmpError),
}

pub const KEEP: usize = 0;
pub const SWITCH: usize = 1;

/// Keep–Switch parameters `(q₁, q₂)`, with `r_i = 1 − q_i`.
///
/// `M_K = diag(q₁, q₂)`, `M_S = [[0, r₁], [r₂, 0]]`, `𝐩 = (r₂, r₁)/(r₁ + r₂)`, `θ(K) = S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeepSwitch {
    q1: f64,
    q2: f64,
}

impl KeepSwitch {
    pub fn new(q1: f64, q2: f64) -> Result<Self, KeepSwitchError> {
        let ok = |q: f64| q > 0.0 && q < 1.0;
        if ok(q1) && ok(q2) {
            Ok(Self { q1, q2 })
        } else {
            Err(KeepSwitchError::Range(q1, q2))
        }
    }

    pub fn q(&self) -> (f64, f64) {
        (self.q1, self.q2)
    }

    pub fn r(&self) -> (f64, f64) {
        (1.0 - self.q1, 1.0 - self.q2)
    }

    /// Exchanging `q₁` and `q₂` leaves the measure unchanged; the analytic
    /// formulas below are stated for `q₁ ≥ q₂`.
    fn ordered(&self) -> (f64, f64, f64, f64) {
        let (a, b) = if self.q1 >= self.q2 { (self.q1, self.q2) } else { (self.q2, self.q1) };
        (a, b, 1.0 - a, 1.0 - b)
    }

    /// `γ = ½ log(q₁/q₂) ≥ 0` for the ordered parameters.
    pub fn gamma(&self) -> f64 {
        let (q1, q2, _, _) = self.ordered();
        0.5 * (q1 / q2).ln()
    }

    /// `η = ½ log(q₁q₂ / (r₁r₂))`.
    pub fn eta(&self) -> f64 {
        let (q1, q2, r1, r2) = self.ordered();
        0.5 * (q1 * q2 / (r1 * r2)).ln()
    }

    /// Stationary vector `𝐩 = (r₂, r₁)/(r₁ + r₂)`.
    pub fn stationary(&self) -> [f64; 2] {
        let (r1, r2) = self.r();
        [r2 / (r1 + r2), r1 / (r1 + r2)]
    }

    pub fn matrices(&self) -> [DMatrix<f64>; 2] {
        let (r1, r2) = self.r();
        [
            DMatrix::from_row_slice(2, 2, &[self.q1, 0.0, 0.0, self.q2]),
            DMatrix::from_row_slice(2, 2, &[0.0, r1, r2, 0.0]),
        ]
    }

    pub fn alphabet() -> Alphabet {
        Alphabet::new(["K", "S"]).expect("two distinct symbols")
    }

    pub fn pmp(&self) -> PMPSpec {
        let [mk, ms] = self.matrices();
        PMPSpec::new(Self::alphabet(), vec![mk, ms], ProbVector::new(self.stationary().to_vec()).expect("stationary"))
            .and_then(|s| s.with_theta(vec![SWITCH, KEEP]))
            .expect("Keep–Switch matrices are a valid PMP")
    }

    /// Function-Markov representation on hidden pairs `(ξ_t, ξ_{t+1})`: the
    /// pair chain of `P = [[q₁, r₁], [r₂, q₂]]` with `f(a, b) = K` iff `a = b`.
    pub fn fm_spec(&self) -> FMSpec {
        let (r1, r2) = self.r();
        let p = [[self.q1, r1], [r2, self.q2]];
        let st = self.stationary();
        let pair_p = DMatrix::from_fn(4, 4, |i, j| {
            let b = i % 2;
            let (b2, c) = (j / 2, j % 2);
            if b == b2 {
                p[b][c]
            } else {
                0.0
            }
        });
        let init = ProbVector::new((0..4).map(|i| st[i / 2] * p[i / 2][i % 2]).collect()).expect("stationary pair law");
        let f = (0..4).map(|i| if i / 2 == i % 2 { KEEP } else { SWITCH }).collect();
        FMSpec::new(Self::alphabet(), pair_p, init, f).expect("valid pair chain")
    }

    /// `(2λ₁ + η)` and the prefactor `(q₁q₂r₁r₂)^{1/4}` shared by `A_±`.
    fn a_pm(&self, l: [f64; 3]) -> (f64, f64) {
        let (q1, q2, r1, r2) = self.ordered();
        let c = (q1 * q2 * r1 * r2).powf(0.25);
        let x = 2.0 * l[0] + self.eta();
        let common = x.exp() * (l[1] + self.gamma()).sinh().powi(2) + (-x).exp() * l[2].sinh().powi(2);
        (c * ((-x).exp() + common).sqrt(), c * (x.exp() + common).sqrt())
    }

    /// `Q(λ) = lim (1/T) log E exp(λ·X_T) = log(A₋(λ) + A₊(λ))`.
    pub fn q_lambda(&self, l: [f64; 3]) -> f64 {
        let (am, ap) = self.a_pm(l);
        (am + ap).ln()
    }

    /// `½ log κ₊(P_o(λ) P_e(λ))` from the explicit 2×2 product.
    pub fn q_lambda_matrix(&self, l: [f64; 3]) -> f64 {
        let (q1, q2, r1, r2) = self.ordered();
        let e = f64::exp;
        let po = Matrix2::new(e(l[0] + l[1]) * q1, e(-l[0] - l[2]) * r1, e(-l[0] + l[2]) * r2, e(l[0] - l[1]) * q2);
        let pe = Matrix2::new(e(l[0] + l[1]) * q1, e(-l[0] + l[2]) * r1, e(-l[0] - l[2]) * r2, e(l[0] - l[1]) * q2);
        let m = po * pe;
        let tr = m.trace();
        let det = m.determinant();
        0.5 * ((tr + (tr * tr - 4.0 * det).max(0.0).sqrt()) / 2.0).ln()
    }

    /// `∇Q(0) = (r₁ − 4r₁r₂ + r₂, r₂ − r₁, 0)/(r₁ + r₂)`.
    pub fn q_gradient(&self) -> Vector3<f64> {
        let (_, _, r1, r2) = self.ordered();
        Vector3::new(r1 - 4.0 * r1 * r2 + r2, r2 - r1, 0.0) / (r1 + r2)
    }

    /// Hessian of `Q` at the origin.
    pub fn q_hessian(&self) -> Matrix3<f64> {
        let (q1, q2, r1, r2) = self.ordered();
        let s = r1 + r2;
        let pre = 4.0 * r1 * r2 / s.powi(3);
        Matrix3::new(
            4.0 * (q1 * r2 * r2 + q2 * r1 * r1),
            2.0 * (q1 - q2),
            0.0,
            2.0 * (q1 - q2),
            q1 + q2,
            0.0,
            0.0,
            0.0,
            s * s / (q1 + q2),
        ) * pre
    }

    /// Argument of `Q` realising the pressure: `(−ηα, −γ(α∧1), γ(α∨0))`.
    fn pressure_point(&self, alpha: f64) -> [f64; 3] {
        let g = self.gamma();
        [-self.eta() * alpha, -g * alpha.min(1.0), g * alpha.max(0.0)]
    }

    /// Exact entropic pressure `e(α) = Q(−ηα, −γ(α∧1), γ(α∨0))`.
    pub fn pressure(&self, alpha: f64) -> f64 {
        self.q_lambda(self.pressure_point(alpha))
    }

    /// One-sided second derivatives `(e″(α⁻), e″(α⁺))` at `α ∈ {0, 1}` from the Hessian of `Q` at the origin.
    pub fn pressure_second_derivatives(&self, alpha: f64) -> (f64, f64) {
        let (g, h) = (self.gamma(), self.eta());
        let hess = self.q_hessian();
        let quad = |v: Vector3<f64>| v.dot(&(hess * v));
        let below = quad(Vector3::new(-h, -g, 0.0));
        let above = quad(Vector3::new(-h, -g, g));
        if alpha == 0.0 {
            (below, above)
        } else {
            // e(α) = e(1 − α)
            (above, below)
        }
    }

    /// `ep = ((r₂ − r₁)γ + (r₁ − 4r₁r₂ + r₂)η)/(r₁ + r₂)`.
    pub fn ep(&self) -> f64 {
        let (_, _, r1, r2) = self.ordered();
        ((r2 - r1) * self.gamma() + (r1 - 4.0 * r1 * r2 + r2) * self.eta()) / (r1 + r2)
    }

    pub fn var_z1(&self) -> f64 {
        let (q1, q2, r1, r2) = self.ordered();
        let (g, h) = (self.gamma(), self.eta());
        4.0 * r1 * r2 / (r1 + r2).powi(3)
            * ((q1 + q2) * g * g + 4.0 * (q1 - q2) * g * h + 4.0 * (q1 * r2 * r2 + q2 * r1 * r1) * h * h)
    }

    pub fn var_z2(&self) -> f64 {
        let (q1, q2, r1, r2) = self.ordered();
        4.0 * r1 * r2 * self.gamma().powi(2) / ((q1 + q2) * (r1 + r2))
    }

    /// Jump `e″(0⁺) − e″(0⁻)` of the second derivative of the pressure.
    pub fn second_derivative_jump(&self) -> f64 {
        self.var_z2()
    }

    /// Mean of the limit law, `E(Z₁ − |Z₂|) = −√(2 Var Z₂/π)`.
    pub fn limit_mean(&self) -> f64 {
        -(2.0 * self.var_z2() / std::f64::consts::PI).sqrt()
    }

    /// Variance of `Z₁ − |Z₂|`.
    pub fn limit_variance(&self) -> f64 {
        self.var_z1() + self.var_z2() * (1.0 - 2.0 / std::f64::consts::PI)
    }

    /// Specific entropy `(r₁S₂ + r₂S₁)/(r₁ + r₂)`, `S_i = −q_i log q_i − r_i log r_i`.
    pub fn entropy_rate(&self) -> f64 {
        let (r1, r2) = self.r();
        let s = |q: f64| -q * q.ln() - (1.0 - q) * (1.0 - q).ln();
        (r1 * s(self.q2) + r2 * s(self.q1)) / (r1 + r2)
    }

    /// `log ℙ(F(ξ))` from the transition counts of a hidden path:
    /// `ℙ(F(ξ)) = 𝐩_{ξ₁} Π p_ab^{n_ab} + 𝐩_{ξ̄₁} Π p_{āb̄}^{n_ab}`.
    pub(crate) fn log_prob_counts(&self, first: usize, n: &[[u64; 2]; 2]) -> f64 {
        let (r1, r2) = self.r();
        let lp = [[self.q1.ln(), r1.ln()], [r2.ln(), self.q2.ln()]];
        let st = self.stationary();
        let path = |flip: usize| {
            let mut acc = st[first ^ flip].ln();
            for a in 0..2 {
                for b in 0..2 {
                    acc += n[a][b] as f64 * lp[a ^ flip][b ^ flip];
                }
            }
            acc
        };
        let (x, y) = (path(0), path(1));
        let m = x.max(y);
        m + ((x - m).exp() + (y - m).exp()).ln()
    }
}

#[cfg(test)]
mod tests;
