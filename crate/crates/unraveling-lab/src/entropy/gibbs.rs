use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EntropyError;
use crate::instrument::LinearRep;

/// How the supremum over words is taken when exhaustive search is too large.
#[derive(Debug, Clone, Default)]
pub struct WitnessPolicy {
    /// Explicit candidate words of length `T`.
    pub witnesses: Vec<Vec<usize>>,
    /// Number of additional words drawn from `ℙ_T`.
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakGibbsDiagnostic {
    /// `(1/T) sup_S sup_ω |log ℙ_T(ω) − log ℙ_S(ω_{1..S}) − log ℙ_{T−S}(ω_{S+1..T})|`.
    pub value: f64,
    pub word: Vec<usize>,
    pub split: usize,
    /// Whether every supported word of length `T` was examined.
    pub exhaustive: bool,
}

/// Decoupling diagnostic at horizon `t`.
///
/// A value bounded away from zero as `t` grows refutes the weak Gibbs
/// property; values tending to zero are consistent with it. The search is
/// exhaustive when `|𝒜|^t` fits in the budget, otherwise it runs over the
/// witnesses and samples of `policy`.
pub fn weak_gibbs_diagnostic(p: &LinearRep, t: usize, budget: u64, policy: &WitnessPolicy) -> Result<WeakGibbsDiagnostic, EntropyError> {
    let k = p.alphabet_len();
    let mut best = WeakGibbsDiagnostic { value: 0.0, word: Vec::new(), split: 0, exhaustive: false };
    if t < 2 {
        best.exhaustive = true;
        return Ok(best);
    }
    let total = (k as f64).powi(t as i32);
    if total * 2.0 <= budget as f64 {
        // table[L][code] = log ℙ_L(word with base-k code), for every L ≤ t.
        let mut table: Vec<Vec<f64>> = (0..=t).map(|l| vec![f64::NEG_INFINITY; k.pow(l as u32)]).collect();
        table[0][0] = 0.0;
        for l in 1..=t {
            let row = &mut table[l];
            p.for_each_word(l, budget, |w, lp| row[code(w, k)] = lp)?;
        }
        let mut word = vec![0usize; t];
        for c in 0..k.pow(t as u32) {
            let lp = table[t][c];
            if lp == f64::NEG_INFINITY {
                continue;
            }
            decode(c, k, &mut word);
            for s in 1..t {
                let head = table[s][code(&word[..s], k)];
                let tail = table[t - s][code(&word[s..], k)];
                let v = (lp - head - tail).abs() / t as f64;
                if v > best.value {
                    best = WeakGibbsDiagnostic { value: v, word: word.clone(), split: s, exhaustive: true };
                }
            }
        }
        best.exhaustive = true;
        return Ok(best);
    }
    let mut candidates: Vec<Vec<usize>> = policy.witnesses.iter().filter(|w| w.len() == t).cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    for _ in 0..policy.samples {
        candidates.push(sample_word(p, t, &mut rng));
    }
    for w in candidates {
        let lp = p.log_prob(&w)?;
        if lp == f64::NEG_INFINITY {
            continue;
        }
        for s in 1..t {
            let v = (lp - p.log_prob(&w[..s])? - p.log_prob(&w[s..])?).abs() / t as f64;
            if v > best.value {
                best = WeakGibbsDiagnostic { value: v, word: w.clone(), split: s, exhaustive: false };
            }
        }
    }
    Ok(best)
}

fn code(w: &[usize], k: usize) -> usize {
    w.iter().fold(0, |c, &a| c * k + a)
}

fn decode(mut c: usize, k: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = c % k;
        c /= k;
    }
}

/// Draws a word from `ℙ_t` symbol by symbol using conditional probabilities.
pub(crate) fn sample_word<R: Rng>(p: &LinearRep, t: usize, rng: &mut R) -> Vec<usize> {
    let mut state = p.start();
    let mut word = Vec::with_capacity(t);
    let k = p.alphabet_len();
    for _ in 0..t {
        let base = p.log_value(&state);
        let nexts: Vec<_> = (0..k).map(|a| p.step(&state, a)).collect();
        let weights: Vec<f64> = nexts.iter().map(|s| (p.log_value(s) - base).exp()).collect();
        let total: f64 = weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = k - 1;
        for (a, &w) in weights.iter().enumerate() {
            if u < w {
                pick = a;
                break;
            }
            u -= w;
        }
        word.push(pick);
        state = nexts.into_iter().nth(pick).expect("index within alphabet");
    }
    word
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn product_measure_decouples_exactly() {
        let m = |x: f64| DMatrix::from_element(1, 1, x);
        let rep = LinearRep::new(DVector::from_element(1, 1.0), vec![m(0.2), m(0.5), m(0.3)], DVector::from_element(1, 1.0)).unwrap();
        let d = weak_gibbs_diagnostic(&rep, 6, 1_000_000, &WitnessPolicy::default()).unwrap();
        assert!(d.exhaustive);
        assert!(d.value <= 1e-12);
    }

    #[test]
    fn sampled_words_are_supported() {
        let m0 = DMatrix::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 0.0]);
        let m1 = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.5, 0.0]);
        let rep = LinearRep::new(DVector::from_vec(vec![2.0 / 3.0, 1.0 / 3.0]), vec![m0, m1], DVector::from_element(2, 1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let w = sample_word(&rep, 12, &mut rng);
            assert!(rep.in_support(&w).unwrap());
        }
    }
}
