//! Angles with prescribed Diophantine behaviour: `0 < liminf ℓ(qΔ) e^{Γ(q)} < ∞`.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::angle::{AngleExpansion, LogInterval, RotationAngle};
use super::cf::{cf_expand, ln_big, CfSummary};
use super::RotationalError;

/// Default cap on the bit length of an explicitly stored partial quotient.
pub const DEFAULT_BIT_BUDGET: u64 = 1_000_000;

/// Relative accuracy assumed for `Γ(q)` once it no longer fits exactly in a double.
const GAMMA_REL_ERR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub enum Growth {
    /// `Γ(T) = T²`.
    #[serde(rename = "T2")]
    Square,
    /// `Γ(T) = e^{T²}`.
    #[serde(rename = "EXP_T2")]
    ExpSquare,
}

impl Growth {
    /// `Γ(T)` for a real argument; `+∞` when it overflows.
    pub fn gamma(self, t: f64) -> f64 {
        match self {
            Growth::Square => t * t,
            Growth::ExpSquare => (t * t).exp(),
        }
    }

    /// `log Γ(T)`, finite for every double `T`.
    pub fn log_gamma(self, t: f64) -> f64 {
        match self {
            Growth::Square => 2.0 * t.ln(),
            Growth::ExpSquare => t * t,
        }
    }

    /// `sup_q q e^{−Γ(q)}` over the positive integers.
    pub fn sup_q_psi(self) -> f64 {
        (1..64).map(|q| q as f64 * (-self.gamma(q as f64)).exp()).fold(0.0, f64::max)
    }

    pub fn label(self) -> &'static str {
        match self {
            Growth::Square => "T2",
            Growth::ExpSquare => "EXP_T2",
        }
    }
}

impl std::str::FromStr for Growth {
    type Err = RotationalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "T2" | "t2" | "square" => Ok(Growth::Square),
            "EXP_T2" | "exp_t2" | "exp-square" => Ok(Growth::ExpSquare),
            other => Err(RotationalError::Growth(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstructionOptions {
    /// Real number whose expansion supplies the frozen prefix.
    pub seed: Option<f64>,
    pub bit_budget: u64,
    pub max_steps: usize,
}

impl Default for ConstructionOptions {
    fn default() -> Self {
        Self { seed: None, bit_budget: DEFAULT_BIT_BUDGET, max_steps: 8 }
    }
}

/// Bounds attached to the convergent `p_i/q_i`.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergentBound {
    pub index: usize,
    pub log_q: LogInterval,
    pub gamma: f64,
    /// `log ℓ(q_iΔ)` from `1/(2q_{i+1}) ≤ |q_iΔ − p_i| ≤ 1/q_{i+1}`.
    pub log_ell: LogInterval,
    /// `log(ℓ(q_iΔ) e^{Γ(q_i)})`.
    pub log_scaled: LogInterval,
    pub constructed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub convergents: Vec<ConvergentBound>,
    /// `log c` with `ℓ(qΔ) ≥ c e^{−Γ(q)}` for every `1 ≤ q < q_{h+1}`, `h` the last index with a known successor size.
    pub log_lower_constant: f64,
    /// `log q_{h+1}` lower bound: the certificate covers every `q` below `e^{this}`.
    pub log_q_horizon: f64,
    /// `log(1/C)` from the construction, `C = 2(1 + 2 sup q e^{−Γ(q)})`.
    pub log_construction_constant: f64,
    /// The construction stopped because the next quotient is beyond every budget.
    pub truncated: bool,
}

#[derive(Debug, Clone)]
pub struct ConstructedAngle {
    pub growth: Growth,
    pub interval: (f64, f64),
    pub seed: f64,
    /// Index `N` of the last frozen convergent.
    pub seed_depth: usize,
    pub expansion: AngleExpansion,
    pub certificate: Certificate,
}

impl ConstructedAngle {
    pub fn angle(&self) -> RotationAngle {
        RotationAngle::Expansion(self.expansion.clone())
    }

    /// Whether `Δ` lies strictly inside the interval, from the two frozen convergents that sandwich it.
    pub fn in_interval(&self) -> bool {
        let (lo, hi) = self.interval;
        let n = self.seed_depth;
        [n - 1, n].iter().all(|&i| {
            let v = self.expansion.cf.convergent_f64(i);
            lo < v && v < hi
        })
    }

    pub fn summary(&self) -> CfSummary {
        CfSummary::from(&self.expansion.cf)
    }
}

/// `⌈2^{x}⌉` up to a relative over-estimate of order `|x|·2^{−50}`; never below `2^x`.
fn big_pow2_ceil(x: f64) -> BigUint {
    let margin = 1.0 + (x.abs() + 64.0) * (-48f64).exp2();
    if x < 60.0 {
        return BigUint::from((x.exp2() * margin).ceil().max(1.0) as u64);
    }
    let k = x.floor() - 52.0;
    let m = ((x - k).exp2() * margin).ceil() as u64;
    BigUint::from(m) << (k as u64)
}

/// Builds `Δ ∈ ]lo, hi[` by freezing the expansion of a seed until two
/// consecutive convergents lie in the interval, then appending
/// `a_{i+1} = min{n : n q_i e^{−Γ(q_i)} ≥ 1}`.
pub fn construct_delta(growth: Growth, interval: (f64, f64), opts: ConstructionOptions) -> Result<ConstructedAngle, RotationalError> {
    let (lo, hi) = interval;
    if !(0.0 <= lo && lo < hi && hi <= 2.0) {
        return Err(RotationalError::Interval(lo, hi));
    }
    let seed = opts.seed.unwrap_or(lo + (hi - lo) * (5f64.sqrt() - 1.0) / 2.0);
    if !(lo < seed && seed < hi) {
        return Err(RotationalError::Interval(lo, hi));
    }
    let mut prefix = None;
    for depth in (8..=40).rev() {
        if let Ok(cf) = cf_expand(seed, depth) {
            prefix = Some(cf);
            break;
        }
    }
    let prefix = prefix.ok_or_else(|| RotationalError::Seed("seed expansion is too short".into()))?;
    let inside = |i: usize| {
        let v = prefix.convergent_f64(i);
        lo < v && v < hi
    };
    let n = (1..=prefix.depth())
        .find(|&i| inside(i - 1) && inside(i))
        .ok_or_else(|| RotationalError::Seed(format!("no two consecutive convergents of {seed} in ]{lo}, {hi}[")))?;
    let mut cf = prefix.truncated(n);
    let mut next_log_q = None;
    let mut symbolic_offset = None;
    let mut truncated = false;
    for _ in 0..opts.max_steps {
        let i = cf.depth();
        let q = cf.convergent(i).1.clone();
        let qf = q.to_f64().unwrap_or(f64::INFINITY);
        let gamma = growth.gamma(qf);
        if !gamma.is_finite() {
            truncated = true;
            break;
        }
        let ln_q = ln_big(&q);
        let log2_a = (gamma - ln_q) / std::f64::consts::LN_2;
        let exact_gamma = qf < 2f64.powi(26) && (growth == Growth::Square || qf * qf < 30.0);
        if log2_a <= opts.bit_budget as f64 && exact_gamma {
            cf.push(big_pow2_ceil(log2_a))?;
            continue;
        }
        // The rule gives q_{i+1} = a q_i + q_{i−1} with e^{Γ} ≤ a q_i ≤ e^{Γ} + q_i, so
        // log q_{i+1} − Γ(q_i) ∈ [0, log(1 + 2q_i e^{−Γ})]. The stored interval also
        // carries the rounding of Γ to a double.
        let offset = (2.0 * (ln_q - gamma).exp()).ln_1p();
        let g_lo = gamma * (1.0 - GAMMA_REL_ERR);
        let g_hi = gamma * (1.0 + GAMMA_REL_ERR);
        next_log_q = Some(LogInterval { lo: g_lo, hi: g_hi + offset });
        symbolic_offset = Some(offset);
        truncated = true;
        break;
    }
    let expansion = AngleExpansion { cf, next_log_q };
    let certificate = certify(growth, n, &expansion, symbolic_offset, truncated);
    Ok(ConstructedAngle { growth, interval, seed, seed_depth: n, expansion, certificate })
}

/// `symbolic_offset` bounds `log q_{n+1} − Γ(q_n)` from above when `q_{n+1}` is known only through the rule.
fn certify(growth: Growth, seed_depth: usize, e: &AngleExpansion, symbolic_offset: Option<f64>, truncated: bool) -> Certificate {
    let depth = e.cf.depth();
    let last = if e.next_log_q.is_some() { depth } else { depth - 1 };
    let mut convergents = Vec::new();
    let mut log_c = f64::INFINITY;
    for i in 0..=last {
        let log_q = e.log_denominator(i).expect("known convergent");
        let next = e.log_denominator(i + 1).expect("known successor");
        let gamma = growth.gamma(e.cf.convergent(i).1.to_f64().unwrap_or(f64::INFINITY));
        let log_ell = LogInterval { lo: -std::f64::consts::LN_2 - next.hi, hi: -next.lo };
        let log_scaled = match symbolic_offset {
            Some(offset) if i == depth => LogInterval { lo: -std::f64::consts::LN_2 - offset, hi: 0.0 },
            _ => log_ell.shift(gamma),
        };
        // Block q ∈ [q_i, q_{i+1} − 1]: ℓ(qΔ) ≥ 1/(2q_{i+1}) and Γ(q) ≥ Γ(q_i).
        log_c = log_c.min(log_scaled.lo);
        convergents.push(ConvergentBound {
            index: i,
            log_q,
            gamma,
            log_ell,
            log_scaled,
            constructed: i >= seed_depth,
        });
    }
    let log_q_horizon = e.log_denominator(last + 1).map_or(f64::NAN, |b| b.lo);
    Certificate {
        convergents,
        log_lower_constant: log_c,
        log_q_horizon,
        log_construction_constant: -(2.0 * (1.0 + 2.0 * growth.sup_q_psi())).ln(),
        truncated,
    }
}

/// Exhaustive check of `log ℓ(qΔ) + Γ(q) ≥ log c` for `1 ≤ q ≤ q_max`; returns the
/// smallest certified value of `log ℓ(qΔ) + Γ(q)` and the `q` attaining it.
pub fn scan_lower_bound(angle: &RotationAngle, growth: Growth, q_max: u64, precision_bits: u32) -> Result<(f64, u64), RotationalError> {
    let mut best = (f64::INFINITY, 0);
    for q in 1..=q_max {
        let b = angle.log_ell(&BigUint::from(q), precision_bits)?;
        let v = b.lo + growth.gamma(q as f64);
        if v < best.0 {
            best = (v, q);
        }
    }
    Ok(best)
}
