//! Real linear representations `P(w) = r · M_{w_T} ⋯ M_{w_1} x₀` and support-pruned enumeration.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::numerics::pairwise_sum;

/// Largest state dimension representable by the bitmask support engine.
pub const MAX_REP_DIM: usize = 64;

/// Relative threshold below which a matrix entry counts as a structural zero.
pub const PATTERN_THRESHOLD: f64 = 1e-13;

/// Default node budget for exhaustive enumeration.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RepError {
    #[error("symbol index {index} outside an alphabet of size {size}")]
    UnknownSymbol { index: usize, size: usize },
    #[error("representation dimension {0} exceeds the supported maximum of 64")]
    TooLarge(usize),
    #[error("inconsistent representation shapes: {0}")]
    Shape(String),
    #[error("enumeration budget of {budget} nodes exhausted")]
    BudgetExceeded { budget: u64 },
    #[error("the two measures have different alphabets ({0} vs {1} symbols)")]
    AlphabetMismatch(usize, usize),
}

impl RepError {
    pub fn budget_exhausted(&self) -> bool {
        matches!(self, RepError::BudgetExceeded { .. })
    }
}

fn mask_of(v: &DVector<f64>, scale: f64) -> u64 {
    v.iter()
        .enumerate()
        .filter(|(_, x)| x.abs() > PATTERN_THRESHOLD * scale)
        .fold(0u64, |m, (i, _)| m | (1 << i))
}

/// Word measure given by an initial vector, one matrix per symbol (acting on
/// column vectors, first symbol applied first) and a readout covector.
///
/// Each matrix carries a boolean zero pattern; a word lies in the support iff
/// the pattern product is nonzero. Entries are classified once, relative to
/// the largest entry of the whole family.
#[derive(Debug, Clone)]
pub struct LinearRep {
    init: DVector<f64>,
    mats: Vec<DMatrix<f64>>,
    readout: DVector<f64>,
    init_mask: u64,
    /// `col_masks[a][m]`: rows `k` with `M_a[k, m] ≠ 0`.
    col_masks: Vec<Vec<u64>>,
    readout_mask: u64,
}

/// Carried state of a running product: direction, log scale and support pattern.
#[derive(Debug, Clone)]
pub struct RepState {
    v: DVector<f64>,
    log_scale: f64,
    mask: u64,
}

impl LinearRep {
    pub fn new(init: DVector<f64>, mats: Vec<DMatrix<f64>>, readout: DVector<f64>) -> Result<Self, RepError> {
        let n = init.len();
        if n > MAX_REP_DIM {
            return Err(RepError::TooLarge(n));
        }
        if readout.len() != n || mats.iter().any(|m| m.shape() != (n, n)) {
            return Err(RepError::Shape(format!("state dimension {n}")));
        }
        let scale = mats.iter().map(|m| m.amax()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let col_masks = mats
            .iter()
            .map(|m| (0..n).map(|c| mask_of(&m.column(c).into_owned(), scale)).collect())
            .collect();
        let init_mask = mask_of(&init, init.amax());
        let readout_mask = mask_of(&readout, readout.amax());
        Ok(Self { init, mats, readout, init_mask, col_masks, readout_mask })
    }

    pub fn dim(&self) -> usize {
        self.init.len()
    }

    pub fn alphabet_len(&self) -> usize {
        self.mats.len()
    }

    pub fn init(&self) -> &DVector<f64> {
        &self.init
    }

    pub fn readout(&self) -> &DVector<f64> {
        &self.readout
    }

    pub fn matrix(&self, a: usize) -> &DMatrix<f64> {
        &self.mats[a]
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.mats
    }

    /// `Σ_a weights[a] · M_a`.
    pub fn weighted_sum(&self, weights: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        self.mats
            .iter()
            .zip(weights)
            .fold(DMatrix::zeros(n, n), |acc, (m, &w)| acc + m * w)
    }

    pub fn start(&self) -> RepState {
        let m = self.init.amax();
        let (v, log_scale) = if m > 0.0 { (&self.init / m, m.ln()) } else { (self.init.clone(), f64::NEG_INFINITY) };
        RepState { v, log_scale, mask: self.init_mask }
    }

    fn check(&self, a: usize) -> Result<(), RepError> {
        if a >= self.mats.len() {
            Err(RepError::UnknownSymbol { index: a, size: self.mats.len() })
        } else {
            Ok(())
        }
    }

    fn propagate_mask(&self, a: usize, mask: u64) -> u64 {
        let cols = &self.col_masks[a];
        let mut out = 0;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            out |= cols[i];
            m &= m - 1;
        }
        out
    }

    /// Advances `from` by symbol `a` into `into`, reusing its storage.
    pub fn step_into(&self, from: &RepState, a: usize, into: &mut RepState) {
        into.mask = self.propagate_mask(a, from.mask);
        into.v.gemv(1.0, &self.mats[a], &from.v, 0.0);
        let m = into.v.amax();
        if m > 0.0 && into.mask != 0 {
            into.v /= m;
            into.log_scale = from.log_scale + m.ln();
        } else {
            into.v.fill(0.0);
            into.log_scale = f64::NEG_INFINITY;
            into.mask = 0;
        }
    }

    pub fn step(&self, from: &RepState, a: usize) -> RepState {
        let mut out = from.clone();
        self.step_into(from, a, &mut out);
        out
    }

    /// Whether the pattern product of the state reaches the readout.
    pub fn supported(&self, s: &RepState) -> bool {
        s.mask & self.readout_mask != 0
    }

    /// Log-probability of the word that produced `s`.
    pub fn log_value(&self, s: &RepState) -> f64 {
        if !self.supported(s) {
            return f64::NEG_INFINITY;
        }
        let x = self.readout.dot(&s.v);
        if x > 0.0 {
            x.ln() + s.log_scale
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn state_after(&self, word: &[usize]) -> Result<RepState, RepError> {
        let mut s = self.start();
        let mut tmp = s.clone();
        for &a in word {
            self.check(a)?;
            self.step_into(&s, a, &mut tmp);
            std::mem::swap(&mut s, &mut tmp);
        }
        Ok(s)
    }

    /// Natural log of the probability of `word`; `-∞` exactly off the support.
    pub fn log_prob(&self, word: &[usize]) -> Result<f64, RepError> {
        Ok(self.log_value(&self.state_after(word)?))
    }

    /// Symbolic support membership.
    pub fn in_support(&self, word: &[usize]) -> Result<bool, RepError> {
        let mut mask = self.init_mask;
        for &a in word {
            self.check(a)?;
            mask = self.propagate_mask(a, mask);
        }
        Ok(mask & self.readout_mask != 0)
    }

    /// Calls `f(word, log P(word))` for every supported word of length `t`,
    /// in lexicographic order of symbol indices.
    pub fn for_each_word<F: FnMut(&[usize], f64)>(&self, t: usize, budget: u64, mut f: F) -> Result<u64, RepError> {
        let mut stack: Vec<RepState> = vec![self.start(); t + 1];
        let mut word = vec![0usize; t];
        let mut nodes = 0u64;
        self.dfs(&mut stack, &mut word, 0, &mut nodes, budget, &mut f)?;
        Ok(nodes)
    }

    fn dfs<F: FnMut(&[usize], f64)>(
        &self,
        stack: &mut [RepState],
        word: &mut [usize],
        depth: usize,
        nodes: &mut u64,
        budget: u64,
        f: &mut F,
    ) -> Result<(), RepError> {
        if depth == word.len() {
            f(word, self.log_value(&stack[depth]));
            return Ok(());
        }
        for a in 0..self.alphabet_len() {
            *nodes += 1;
            if *nodes > budget {
                return Err(RepError::BudgetExceeded { budget });
            }
            let (lo, hi) = stack.split_at_mut(depth + 1);
            self.step_into(&lo[depth], a, &mut hi[0]);
            if !self.supported(&hi[0]) {
                continue;
            }
            word[depth] = a;
            self.dfs(stack, word, depth + 1, nodes, budget, f)?;
        }
        Ok(())
    }

    /// All supported words of length `t` with their log-probabilities.
    pub fn enumerate(&self, t: usize, budget: u64) -> Result<Vec<(Vec<usize>, f64)>, RepError> {
        let mut out = Vec::new();
        self.for_each_word(t, budget, |w, lp| out.push((w.to_vec(), lp)))?;
        Ok(out)
    }

    /// Total mass of `Ω_t`, evaluating every word individually as the
    /// contraction of a prefix state with a suffix covector.
    ///
    /// Only `|A|^{⌈t/2⌉} + |A|^{⌊t/2⌋}` products are formed, so this reaches
    /// lengths where plain depth-first enumeration would exceed any budget.
    /// Returns the total and the smallest per-word value seen.
    pub fn split_total_mass(&self, t: usize) -> (f64, f64) {
        let n = self.dim();
        let k = self.alphabet_len();
        let head = t.div_ceil(2);
        let tail = t - head;
        let mut prefixes = vec![self.init.clone()];
        for _ in 0..head {
            prefixes = prefixes.iter().flat_map(|v| self.mats.iter().map(move |m| m * v)).collect();
        }
        let mut suffixes = vec![self.readout.clone()];
        for _ in 0..tail {
            suffixes = (0..k)
                .flat_map(|a| suffixes.iter().map(move |c| self.mats[a].tr_mul(c)))
                .collect();
        }
        let flat: Vec<f64> = suffixes.iter().flat_map(|c| c.iter().copied()).collect();
        let mut min_value = f64::INFINITY;
        let mut row = vec![0.0; suffixes.len()];
        let per_prefix: Vec<f64> = prefixes
            .iter()
            .map(|v| {
                let v = v.as_slice();
                for (slot, c) in row.iter_mut().zip(flat.chunks_exact(n)) {
                    *slot = c.iter().zip(v).map(|(x, y)| x * y).sum();
                }
                min_value = row.iter().copied().fold(min_value, f64::min);
                pairwise_sum(&row)
            })
            .collect();
        (pairwise_sum(&per_prefix), min_value)
    }
}

/// Calls `f(word, log P(word), log Q(word))` for every word of length `t` in
/// the support of `p`; `log Q` is `-∞` where `Q` vanishes.
pub fn for_each_pair<F: FnMut(&[usize], f64, f64)>(
    p: &LinearRep,
    q: &LinearRep,
    t: usize,
    budget: u64,
    mut f: F,
) -> Result<u64, RepError> {
    if p.alphabet_len() != q.alphabet_len() {
        return Err(RepError::AlphabetMismatch(p.alphabet_len(), q.alphabet_len()));
    }
    struct Ctx<'a, F> {
        p: &'a LinearRep,
        q: &'a LinearRep,
        ps: Vec<RepState>,
        qs: Vec<RepState>,
        word: Vec<usize>,
        nodes: u64,
        budget: u64,
        f: F,
    }
    fn go<F: FnMut(&[usize], f64, f64)>(c: &mut Ctx<'_, F>, depth: usize) -> Result<(), RepError> {
        if depth == c.word.len() {
            let lp = c.p.log_value(&c.ps[depth]);
            let lq = c.q.log_value(&c.qs[depth]);
            (c.f)(&c.word, lp, lq);
            return Ok(());
        }
        for a in 0..c.p.alphabet_len() {
            c.nodes += 1;
            if c.nodes > c.budget {
                return Err(RepError::BudgetExceeded { budget: c.budget });
            }
            let (lo, hi) = c.ps.split_at_mut(depth + 1);
            c.p.step_into(&lo[depth], a, &mut hi[0]);
            if !c.p.supported(&hi[0]) {
                continue;
            }
            let (lo, hi) = c.qs.split_at_mut(depth + 1);
            c.q.step_into(&lo[depth], a, &mut hi[0]);
            c.word[depth] = a;
            go(c, depth + 1)?;
        }
        Ok(())
    }
    let mut ctx = Ctx {
        p,
        q,
        ps: vec![p.start(); t + 1],
        qs: vec![q.start(); t + 1],
        word: vec![0; t],
        nodes: 0,
        budget,
        f: &mut f,
    };
    go(&mut ctx, 0)?;
    Ok(ctx.nodes)
}

/// Words in `Ω_t` whose support membership differs between `p` and `q`.
pub fn support_mismatches(p: &LinearRep, q: &LinearRep, t: usize, budget: u64) -> Result<Vec<Vec<usize>>, RepError> {
    let mut out = Vec::new();
    for_each_pair(p, q, t, budget, |w, _, lq| {
        if lq == f64::NEG_INFINITY {
            out.push(w.to_vec());
        }
    })?;
    for_each_pair(q, p, t, budget, |w, _, lp| {
        if lp == f64::NEG_INFINITY {
            out.push(w.to_vec());
        }
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin() -> LinearRep {
        let half = DMatrix::from_element(1, 1, 0.5);
        LinearRep::new(DVector::from_element(1, 1.0), vec![half.clone(), half], DVector::from_element(1, 1.0)).unwrap()
    }

    fn golden_shift() -> LinearRep {
        // Markov chain forbidding "11": M_a[y, x] = p(x → y) restricted to y = a.
        let m0 = DMatrix::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 0.0]);
        let m1 = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.5, 0.0]);
        LinearRep::new(DVector::from_vec(vec![2.0 / 3.0, 1.0 / 3.0]), vec![m0, m1], DVector::from_element(2, 1.0)).unwrap()
    }

    #[test]
    fn coin_words_have_equal_mass() {
        let r = coin();
        assert!((r.log_prob(&[0, 1, 1]).unwrap() + 3.0 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(r.log_prob(&[]).unwrap(), 0.0);
        assert!(r.log_prob(&[2]).is_err());
    }

    #[test]
    fn forbidden_words_are_exact_zeros() {
        let r = golden_shift();
        assert_eq!(r.log_prob(&[0, 1, 1, 0]).unwrap(), f64::NEG_INFINITY);
        assert!(!r.in_support(&[1, 1]).unwrap());
        let words = r.enumerate(6, DEFAULT_BUDGET).unwrap();
        // Fibonacci count of binary words of length 6 without "11".
        assert_eq!(words.len(), 21);
        let total: f64 = words.iter().map(|(_, lp)| lp.exp()).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn split_mass_matches_enumeration() {
        let r = golden_shift();
        for t in 1..=7 {
            let (total, min) = r.split_total_mass(t);
            assert!((total - 1.0).abs() < 1e-14, "t={t}");
            assert!(min >= 0.0);
        }
    }

    #[test]
    fn budget_is_enforced() {
        assert_eq!(coin().for_each_word(10, 100, |_, _| {}), Err(RepError::BudgetExceeded { budget: 100 }));
    }

    #[test]
    fn long_words_do_not_underflow() {
        let lp = coin().log_prob(&vec![1; 5000]).unwrap();
        assert!((lp + 5000.0 * 2f64.ln()).abs() < 1e-9);
    }
}
