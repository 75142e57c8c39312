use rayon::prelude::*;

use super::{enumerate_pair, EntropyError};
use crate::instrument::LinearRep;
use crate::numerics::{golden_section_min, legendre_transform};

/// Sampled entropic pressure with one-sided difference quotients.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureCurve {
    pub alphas: Vec<f64>,
    pub values: Vec<f64>,
    pub d_left: Vec<f64>,
    pub d_right: Vec<f64>,
}

impl PressureCurve {
    pub fn new(alphas: Vec<f64>, values: Vec<f64>) -> Result<Self, EntropyError> {
        if alphas.len() != values.len() || alphas.is_empty() {
            return Err(EntropyError::Grid("alphas and values must be nonempty and of equal length".into()));
        }
        if alphas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(EntropyError::Grid("alphas must be strictly increasing".into()));
        }
        let n = alphas.len();
        let slope = |i: usize, j: usize| (values[j] - values[i]) / (alphas[j] - alphas[i]);
        let d_left = (0..n).map(|i| if i == 0 { f64::NAN } else { slope(i - 1, i) }).collect();
        let d_right = (0..n).map(|i| if i + 1 == n { f64::NAN } else { slope(i, i + 1) }).collect();
        Ok(Self { alphas, values, d_left, d_right })
    }

    /// Evaluates `e` on the grid, fanning points out over the thread pool.
    pub fn from_fn<F: Fn(f64) -> f64 + Sync>(alphas: Vec<f64>, e: F) -> Result<Self, EntropyError> {
        let values = alphas.par_iter().map(|&a| e(a)).collect();
        Self::new(alphas, values)
    }

    /// Discrete convexity: every second difference quotient is at least `-tol`.
    pub fn is_convex(&self, tol: f64) -> bool {
        self.d_left
            .iter()
            .zip(&self.d_right)
            .filter(|(l, r)| l.is_finite() && r.is_finite())
            .all(|(l, r)| r - l >= -tol)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,value,d_left,d_right\n");
        for i in 0..self.alphas.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt17(self.alphas[i]),
                fmt17(self.values[i]),
                fmt17(self.d_left[i]),
                fmt17(self.d_right[i])
            ));
        }
        out
    }
}

/// Seventeen significant digits; `inf`, `-inf` and `nan` spelled out.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Rate function `I(s) = sup_α (αs − e(−α))` on an `s`-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFunction {
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    /// The supremum sat on the edge of the `α` range: the value is a lower bound.
    pub boundary: Vec<bool>,
    /// Set when the pressure was only finite on a bounded interval, so the
    /// large-deviation statement is local.
    pub local: bool,
}

impl RateFunction {
    /// `I(−s) − I(s) − s` wherever both `s` and `−s` are on the grid and
    /// neither value was cut off by the `α` range.
    pub fn gallavotti_cohen_residuals(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for (i, &s) in self.s.iter().enumerate() {
            if let Some(j) = self.s.iter().position(|&x| (x + s).abs() < 1e-12) {
                if !self.boundary[i] && !self.boundary[j] && self.values[i].is_finite() && self.values[j].is_finite() {
                    out.push((s, self.values[j] - self.values[i] - s));
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,value,boundary\n");
        for i in 0..self.s.len() {
            out.push_str(&format!("{},{},{}\n", fmt17(self.s[i]), fmt17(self.values[i]), self.boundary[i]));
        }
        out
    }
}

/// Discrete conjugate of a sampled curve; exact for its piecewise-linear interpolant.
pub fn rate_function(curve: &PressureCurve, s_grid: &[f64]) -> RateFunction {
    let finite: Vec<usize> = (0..curve.alphas.len()).filter(|&i| curve.values[i].is_finite()).collect();
    let local = finite.len() < curve.alphas.len();
    let (mut values, mut boundary) = (Vec::new(), Vec::new());
    for &s in s_grid {
        let (best, arg) = finite
            .iter()
            .map(|&i| (-curve.alphas[i] * s - curve.values[i], i))
            .fold((f64::NEG_INFINITY, 0), |acc, x| if x.0 > acc.0 { x } else { acc });
        values.push(best);
        boundary.push(Some(&arg) == finite.first() || Some(&arg) == finite.last());
    }
    RateFunction { s: s_grid.to_vec(), values, boundary, local }
}

/// Continuous conjugate of a pressure function finite on `[lo, hi]`.
pub fn rate_function_from<F: Fn(f64) -> f64 + Sync>(e: F, s_grid: &[f64], lo: f64, hi: f64) -> RateFunction {
    let res: Vec<_> = s_grid.par_iter().map(|&s| legendre_transform(&e, s, lo, hi)).collect();
    RateFunction {
        s: s_grid.to_vec(),
        values: res.iter().map(|r| r.value).collect(),
        boundary: res.iter().map(|r| r.at_boundary).collect(),
        local: false,
    }
}

/// `min_{α∈[0,1]} e(α)` and its location.
pub fn chernoff<F: Fn(f64) -> f64>(e: F) -> (f64, f64) {
    let (a, v) = golden_section_min(e, 0.0, 1.0, 1e-10);
    (v, a)
}

/// `h(s) = inf_{α∈]0,1]} ((1−α)s + e(α))/α`.
///
/// The objective is scanned on a grid and refined by golden section around
/// the best grid point.
pub fn hoeffding<F: Fn(f64) -> f64>(e: F, s: f64) -> f64 {
    let g = |a: f64| ((1.0 - a) * s + e(a)) / a;
    let n = 200;
    let (best_i, _) = (1..=n)
        .map(|i| (i, g(i as f64 / n as f64)))
        .fold((n, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let lo = ((best_i as f64 - 1.0) / n as f64).max(1e-9);
    let hi = ((best_i as f64 + 1.0) / n as f64).min(1.0);
    golden_section_min(g, lo, hi, 1e-12).1
}

/// Hypothesis-testing exponents of the ordered pair `(ℙ, ℙ̂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorExponents {
    /// `−ep`.
    pub stein: f64,
    pub chernoff: f64,
    pub chernoff_alpha: f64,
    pub hoeffding: Vec<(f64, f64)>,
    /// `(T, (1/T) log[¼(2 − Σ|ℙ_T − ℙ̂_T|)])` from enumeration.
    pub chernoff_finite: Vec<(usize, f64)>,
}

impl ErrorExponents {
    pub fn compute<F: Fn(f64) -> f64>(
        e: F,
        ep: f64,
        s_grid: &[f64],
        enumeration: Option<(&LinearRep, &LinearRep, &[usize], u64)>,
    ) -> Result<Self, EntropyError> {
        let (ch, alpha) = chernoff(&e);
        let hoeff = s_grid.iter().map(|&s| (s, hoeffding(&e, s))).collect();
        let chernoff_finite = match enumeration {
            None => Vec::new(),
            Some((p, q, ts, budget)) => ts
                .iter()
                .map(|&t| Ok((t, enumerate_pair(p, q, t, budget, false)?.chernoff_finite())))
                .collect::<Result<_, EntropyError>>()?,
        };
        Ok(Self { stein: -ep, chernoff: ch, chernoff_alpha: alpha, hoeffding: hoeff, chernoff_finite })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_pressure_gives_trivial_exponents() {
        let ex = ErrorExponents::compute(|_| 0.0, 0.0, &[0.0, 0.5], None).unwrap();
        assert_eq!(ex.stein, 0.0);
        assert!(ex.chernoff.abs() < 1e-15);
        assert!(ex.hoeffding.iter().all(|&(s, h)| s > 0.0 || h.abs() < 1e-9));
    }

    #[test]
    fn symmetric_pressure_has_chernoff_at_half() {
        let e = |a: f64| 0.3 * a * (a - 1.0);
        let (v, a) = chernoff(e);
        assert!((a - 0.5).abs() < 1e-6);
        assert!((v + 0.075).abs() < 1e-12);
    }

    #[test]
    fn gaussian_rate_has_gc_symmetry() {
        // e(α) = c α(α − 1) is symmetric under α ↦ 1 − α.
        let c = 0.4;
        let e = |a: f64| c * a * (a - 1.0);
        let s: Vec<f64> = (-8..=8).map(|i| i as f64 * 0.1).collect();
        let rf = rate_function_from(e, &s, -30.0, 30.0);
        let res = rf.gallavotti_cohen_residuals();
        assert_eq!(res.len(), s.len());
        assert!(res.iter().all(|(_, r)| r.abs() < 1e-8));
        let curve = PressureCurve::from_fn((-20..=30).map(|i| i as f64 * 0.1).collect(), e).unwrap();
        assert!(curve.is_convex(1e-12));
        let discrete = rate_function(&curve, &[c]);
        assert!(discrete.values[0] >= -1e-12);
    }

    #[test]
    fn affine_pressure_is_flagged_at_the_boundary() {
        let rf = rate_function_from(|a| 0.2 * a, &[-0.2, 0.5], -5.0, 5.0);
        assert!(rf.values[0].abs() < 1e-9);
        assert!(rf.boundary[1]);
    }
}
