use crate::instrument::LinearRep;
use crate::numerics::pairwise_sum;

use super::EntropyError;

/// Shannon entropy `S(ℙ_T)` of the length-`T` marginal, in nats.
pub fn block_entropy(p: &LinearRep, t: usize, budget: u64) -> Result<f64, EntropyError> {
    let mut terms = Vec::new();
    p.for_each_word(t, budget, |_, lp| {
        if lp.is_finite() {
            terms.push(-lp.exp() * lp);
        }
    })?;
    Ok(pairwise_sum(&terms))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyRate {
    /// `S(ℙ_T)/T` at the larger horizon.
    pub plug_in: f64,
    /// Richardson value `(S(ℙ_{T₂}) − S(ℙ_{T₁}))/(T₂ − T₁)`, removing the `1/T` term.
    pub extrapolated: f64,
}

/// Plug-in entropy rate with Richardson extrapolation between two horizons.
pub fn entropy_rate_between(p: &LinearRep, t1: usize, t2: usize, budget: u64) -> Result<EntropyRate, EntropyError> {
    if t2 <= t1 {
        return Err(EntropyError::Grid("horizons must satisfy t1 < t2".into()));
    }
    let h1 = block_entropy(p, t1, budget)?;
    let h2 = block_entropy(p, t2, budget)?;
    Ok(EntropyRate { plug_in: h2 / t2 as f64, extrapolated: (h2 - h1) / (t2 - t1) as f64 })
}

/// Entropy rate from horizons `T − 1` and `T`.
pub fn entropy_rate(p: &LinearRep, t: usize, budget: u64) -> Result<EntropyRate, EntropyError> {
    entropy_rate_between(p, t.saturating_sub(1).max(1), t.max(2), budget)
}
