//! Continued fractions with exact big-integer convergents.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{Float, One, ToPrimitive, Zero};
use serde::Serialize;

use super::RotationalError;

/// `[a₀; a₁, …, a_n]` together with the convergents `p_i/q_i`, `0 ≤ i ≤ n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuedFraction {
    a0: BigInt,
    quotients: Vec<BigUint>,
    p: Vec<BigInt>,
    q: Vec<BigUint>,
}

impl ContinuedFraction {
    pub fn new(a0: BigInt) -> Self {
        Self { p: vec![a0.clone()], q: vec![BigUint::one()], a0, quotients: Vec::new() }
    }

    pub fn from_quotients(a0: BigInt, quotients: impl IntoIterator<Item = BigUint>) -> Result<Self, RotationalError> {
        let mut cf = Self::new(a0);
        for a in quotients {
            cf.push(a)?;
        }
        Ok(cf)
    }

    /// Appends `a_{n+1}` via `[[p, p'], [q, q']] ← [[p, p'], [q, q']]·[[a, 1], [1, 0]]`.
    pub fn push(&mut self, a: BigUint) -> Result<(), RotationalError> {
        if a.is_zero() {
            return Err(RotationalError::ZeroQuotient);
        }
        let n = self.quotients.len();
        let (p_prev, q_prev) = if n == 0 { (BigInt::one(), BigUint::zero()) } else { (self.p[n - 1].clone(), self.q[n - 1].clone()) };
        let p_new = BigInt::from(a.clone()) * &self.p[n] + p_prev;
        let q_new = &a * &self.q[n] + q_prev;
        self.p.push(p_new);
        self.q.push(q_new);
        self.quotients.push(a);
        Ok(())
    }

    pub fn a0(&self) -> &BigInt {
        &self.a0
    }

    /// Partial quotients `a₁, …, a_n`.
    pub fn quotients(&self) -> &[BigUint] {
        &self.quotients
    }

    /// Index `n` of the last convergent.
    pub fn depth(&self) -> usize {
        self.quotients.len()
    }

    pub fn convergent(&self, i: usize) -> (&BigInt, &BigUint) {
        (&self.p[i], &self.q[i])
    }

    pub fn denominators(&self) -> &[BigUint] {
        &self.q
    }

    pub fn convergent_f64(&self, i: usize) -> f64 {
        ratio_f64(&self.p[i], &self.q[i])
    }

    pub fn truncated(&self, n: usize) -> Self {
        Self {
            a0: self.a0.clone(),
            quotients: self.quotients[..n].to_vec(),
            p: self.p[..=n].to_vec(),
            q: self.q[..=n].to_vec(),
        }
    }

    /// Checks `p_i q_{i−1} − p_{i−1} q_i = (−1)^{i−1}`, `gcd(p_i, q_i) = 1` and `q_{i+1} > q_i` for `i ≥ 1`.
    pub fn recurrence_holds(&self) -> bool {
        let mut ok = true;
        for i in 1..=self.depth() {
            let det = &self.p[i] * BigInt::from(self.q[i - 1].clone()) - &self.p[i - 1] * BigInt::from(self.q[i].clone());
            let expected = if i % 2 == 1 { BigInt::one() } else { -BigInt::one() };
            ok &= det == expected;
            ok &= self.p[i].magnitude().gcd(&self.q[i]).is_one();
            if i >= 2 {
                ok &= self.q[i] > self.q[i - 1];
            }
        }
        ok
    }
}

/// `x/y` for big integers, accurate to a few ulps whatever their size.
pub fn ratio_f64(x: &BigInt, y: &BigUint) -> f64 {
    let sign = if x.sign() == Sign::Minus { -1.0 } else { 1.0 };
    let (lx, ly) = (ln_big(x.magnitude()), ln_big(y));
    sign * (lx - ly).exp()
}

/// Natural logarithm of a positive big integer.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map_or(f64::INFINITY, f64::ln);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Exact rational value of a finite float.
pub fn f64_to_rational(x: f64) -> (BigInt, BigUint) {
    let (mantissa, exponent, sign) = Float::integer_decode(x);
    let m = BigInt::from(mantissa) * BigInt::from(sign);
    if exponent >= 0 {
        (m << exponent as usize, BigUint::one())
    } else {
        (m, BigUint::one() << (-exponent) as usize)
    }
}

fn floor_div(n: &BigInt, d: &BigUint) -> BigInt {
    n.div_floor(&BigInt::from(d.clone()))
}

/// Common continued-fraction prefix of every real in `[lo, hi]`, given as exact rationals.
pub fn cf_expand_interval(lo: (BigInt, BigUint), hi: (BigInt, BigUint), n: usize) -> Result<ContinuedFraction, RotationalError> {
    let (mut ln, mut ld) = lo;
    let (mut hn, mut hd) = hi;
    let a0 = floor_div(&ln, &ld);
    if a0 != floor_div(&hn, &hd) {
        return Err(RotationalError::PrecisionExhausted { available: 0, requested: n });
    }
    let mut cf = ContinuedFraction::new(a0.clone());
    let mut a = a0;
    while cf.depth() < n {
        // ζ ← 1/(ζ − a): the fractional parts become the new denominators.
        let lr = &ln - &a * BigInt::from(ld.clone());
        let hr = &hn - &a * BigInt::from(hd.clone());
        if lr.is_zero() || hr.is_zero() {
            break;
        }
        (ln, ld) = (BigInt::from(ld), lr.magnitude().clone());
        (hn, hd) = (BigInt::from(hd), hr.magnitude().clone());
        let (al, ah) = (floor_div(&ln, &ld), floor_div(&hn, &hd));
        if al != ah {
            break;
        }
        a = al;
        cf.push(a.magnitude().clone())?;
    }
    if cf.depth() < n {
        return Err(RotationalError::PrecisionExhausted { available: cf.depth(), requested: n });
    }
    Ok(cf)
}

/// The first `n` partial quotients of a real known to within half an ulp of `x`.
pub fn cf_expand(x: f64, n: usize) -> Result<ContinuedFraction, RotationalError> {
    if !x.is_finite() {
        return Err(RotationalError::Range(x));
    }
    let (lo, hi) = (scaled_endpoint(x, -1), scaled_endpoint(x, 1));
    cf_expand_interval(lo, hi, n)
}

/// `x ± ulp(x)/2` as an exact rational.
fn scaled_endpoint(x: f64, dir: i32) -> (BigInt, BigUint) {
    let (mantissa, exponent, sign) = Float::integer_decode(x);
    // x = sign·mantissa·2^exponent and one ulp is 2^exponent.
    let m = BigInt::from(mantissa) * BigInt::from(sign) * 2 + BigInt::from(dir);
    let e = exponent - 1;
    if e >= 0 {
        (m << e as usize, BigUint::one())
    } else {
        (m, BigUint::one() << (-e) as usize)
    }
}

/// Serializable summary of a continued fraction.
#[derive(Debug, Clone, Serialize)]
pub struct CfSummary {
    pub a0: String,
    pub quotients: Vec<String>,
    pub convergents: Vec<(String, String)>,
}

impl From<&ContinuedFraction> for CfSummary {
    fn from(cf: &ContinuedFraction) -> Self {
        Self {
            a0: cf.a0.to_string(),
            quotients: cf.quotients.iter().map(ToString::to_string).collect(),
            convergents: cf.p.iter().zip(&cf.q).map(|(p, q)| (p.to_string(), q.to_string())).collect(),
        }
    }
}

/// Distance from `numerator/denominator` to the nearest integer, times `denominator`.
pub fn distance_to_integer(numerator: &BigInt, denominator: &BigUint) -> BigUint {
    let d = BigInt::from(denominator.clone());
    let r = numerator.mod_floor(&d);
    let other = &d - &r;
    if r <= other { r.magnitude().clone() } else { other.magnitude().clone() }
}
