//! Rotation angles and certified evaluation of `ℓ(TΔ) = min_p |TΔ − p|`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::cf::{distance_to_integer, ln_big, ContinuedFraction};
use super::RotationalError;

/// Default working precision; `ℓ` values are certified to relative error `2^{−bits/2}`.
pub const DEFAULT_PRECISION_BITS: u32 = 64;

/// Closed interval of natural logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogInterval {
    pub lo: f64,
    pub hi: f64,
}

impl LogInterval {
    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn shift(&self, c: f64) -> Self {
        Self { lo: self.lo + c, hi: self.hi + c }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// An angle given by an exact continued-fraction prefix `[a₀; a₁, …, a_n]`,
/// optionally with bounds on `log q_{n+1}` when the next quotient is known
/// only through its size.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleExpansion {
    pub cf: ContinuedFraction,
    pub next_log_q: Option<LogInterval>,
}

impl AngleExpansion {
    /// Bounds on `log q_{i}` for every index where they are known.
    pub fn log_denominator(&self, i: usize) -> Option<LogInterval> {
        let n = self.cf.depth();
        if i <= n {
            Some(LogInterval::point(ln_big(self.cf.convergent(i).1)))
        } else if i == n + 1 {
            self.next_log_q
        } else {
            None
        }
    }

    /// A lower bound on `log q_{n+1}`: the stored bound, else `q_n + q_{n−1}`.
    fn next_log_q_lower(&self) -> f64 {
        let n = self.cf.depth();
        match self.next_log_q {
            Some(b) => b.lo,
            None => {
                let prev = if n == 0 { BigUint::zero() } else { self.cf.convergent(n - 1).1.clone() };
                ln_big(&(self.cf.convergent(n).1 + prev))
            }
        }
    }

    pub fn value_f64(&self) -> f64 {
        self.cf.convergent_f64(self.cf.depth())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RotationAngle {
    /// A double, declared irrational.
    Float(f64),
    Expansion(AngleExpansion),
}

impl RotationAngle {
    pub fn value_f64(&self) -> f64 {
        match self {
            RotationAngle::Float(x) => *x,
            RotationAngle::Expansion(e) => e.value_f64(),
        }
    }

    /// Certified bounds on `log ℓ(TΔ)`.
    pub fn log_ell(&self, t: &BigUint, precision_bits: u32) -> Result<LogInterval, RotationalError> {
        let rel = (-(precision_bits as f64) / 2.0).exp2();
        match self {
            RotationAngle::Float(delta) => {
                let tf = t.to_f64().filter(|x| *x < 2f64.powi(53)).ok_or(RotationalError::PrecisionExhausted {
                    available: 53,
                    requested: t.bits() as usize,
                })?;
                let x = tf * delta;
                let ell = (x - x.round()).abs();
                let err = x.abs() * f64::EPSILON;
                if ell == 0.0 || err > ell * rel {
                    return Err(RotationalError::Horizon(format!("ℓ({t}Δ) is below double precision")));
                }
                Ok(LogInterval { lo: (ell - err).ln(), hi: (ell + err).ln() })
            }
            RotationAngle::Expansion(e) => expansion_log_ell(e, t, rel),
        }
    }
}

fn expansion_log_ell(e: &AngleExpansion, t: &BigUint, rel: f64) -> Result<LogInterval, RotationalError> {
    let n = e.cf.depth();
    let (p, q) = e.cf.convergent(n);
    let ln_q = ln_big(q);
    let ln_t = if t.is_zero() { return Err(RotationalError::Horizon("T must be positive".into())) } else { ln_big(t) };
    let d = distance_to_integer(&(BigInt::from(t.clone()) * p), q);
    if d.is_zero() {
        // T = kq_n, so ℓ(TΔ) = k|q_nΔ − p_n| with |q_nΔ − p_n| ∈ [1/(2q_{n+1}), 1/q_{n+1}].
        let next = e.next_log_q.ok_or_else(|| {
            RotationalError::Horizon(format!("ℓ({t}Δ) needs the size of convergent {}", n + 1))
        })?;
        let k = t.div_floor(q);
        let ln_k = ln_big(&k);
        if ln_k - next.lo > -std::f64::consts::LN_2 {
            return Err(RotationalError::Horizon(format!("{t} is too large for the known convergents")));
        }
        return Ok(LogInterval { lo: ln_k - std::f64::consts::LN_2 - next.hi, hi: ln_k - next.lo });
    }
    // |TΔ − Tp_n/q_n| ≤ T/(q_n q_{n+1}).
    let center = ln_big(&d) - ln_q;
    let ln_err = ln_t - ln_q - e.next_log_q_lower();
    let delta = (ln_err - center).exp();
    if delta > rel {
        return Err(RotationalError::Horizon(format!("ℓ({t}Δ) not certified to the requested precision")));
    }
    Ok(LogInterval { lo: center + (-delta).ln_1p(), hi: center + delta.ln_1p() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotational::cf_expand;

    #[test]
    fn expansion_matches_float_for_moderate_t() {
        let x = 2f64.sqrt() - 1.0;
        let angle = RotationAngle::Expansion(AngleExpansion { cf: cf_expand(x, 18).unwrap(), next_log_q: None });
        for t in [1u32, 2, 5, 12, 29, 70, 1000] {
            let b = angle.log_ell(&BigUint::from(t), 64).unwrap();
            let y = t as f64 * x;
            let ell = (y - y.round()).abs().ln();
            assert!(b.contains(ell) || (b.lo - ell).abs() < 1e-9, "T={t}: {b:?} vs {ell}");
            assert!(b.width() < 1e-8);
        }
    }

    #[test]
    fn multiples_of_last_denominator_use_next_size() {
        let cf = ContinuedFraction::from_quotients(BigInt::zero(), [2u32, 1, 3].map(BigUint::from)).unwrap();
        let q = cf.convergent(3).1.clone();
        let angle = RotationAngle::Expansion(AngleExpansion { cf, next_log_q: Some(LogInterval { lo: 100.0, hi: 100.5 }) });
        let b = angle.log_ell(&q, 64).unwrap();
        assert!((b.hi + 100.0).abs() < 1e-12);
        assert!((b.lo + 100.5 + std::f64::consts::LN_2).abs() < 1e-12);
        assert!(RotationAngle::Float(0.3).log_ell(&BigUint::from(10u8), 64).is_err());
    }
}
