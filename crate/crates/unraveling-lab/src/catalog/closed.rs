//! Closed-form entropy production, entropic pressure and invariant-state formulas.

use nalgebra::DMatrix;

use super::params::FamilyParams;
use super::spin::thermal_probe;
use super::CatalogError;
use crate::numerics::{complexify, spectral_radius};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantity {
    Ep,
    Pressure(f64),
    CltVariance,
    /// First diagonal entry of the invariant state.
    InvariantP,
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Quantity::Ep => write!(f, "ep"),
            Quantity::Pressure(a) => write!(f, "pressure({a})"),
            Quantity::CltVariance => write!(f, "clt_variance"),
            Quantity::InvariantP => write!(f, "invariant_p"),
        }
    }
}

fn undefined(params: &FamilyParams, q: Quantity) -> CatalogError {
    CatalogError::Undefined { quantity: q.to_string(), family: params.name().into() }
}

/// `Σ_k,l w_k w_l f(β_k, β_l)`.
fn double_sum(betas: &[f64], weights: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for (&bk, &wk) in betas.iter().zip(weights) {
        for (&bl, &wl) in betas.iter().zip(weights) {
            acc += wk * wl * f(bk, bl);
        }
    }
    acc
}

/// `sinh(αx) sinh((1−α)x)`.
fn kernel(alpha: f64, x: f64) -> f64 {
    (alpha * x).sinh() * ((1.0 - alpha) * x).sinh()
}

/// `x sinh x / (cosh x + cosh y)`.
fn ep_kernel(x: f64, y: f64) -> f64 {
    x * x.sinh() / (x.cosh() + y.cosh())
}

/// Quantity `D(α)` under the square root in the two-time pressure formulas,
/// `e(α) = c log(1 + s(√(1 − D(α)) − 1))`. It satisfies `D(α) < 1` on ℝ.
pub fn pressure_discriminant(params: &FamilyParams, alpha: f64) -> Result<f64, CatalogError> {
    Ok(two_time_form(params).ok_or_else(|| undefined(params, Quantity::Pressure(alpha)))?.discriminant(alpha))
}

/// Closed-form data of the two-time families: `e(α) = mult · log(1 + amp(√(1 − D(α)) − 1))`.
struct TwoTimeForm {
    mult: f64,
    amp: f64,
    discriminant: Box<dyn Fn(f64) -> f64>,
    ep: f64,
    invariant_p: Option<f64>,
}

impl TwoTimeForm {
    fn discriminant(&self, alpha: f64) -> f64 {
        (self.discriminant)(alpha)
    }

    fn pressure(&self, alpha: f64) -> f64 {
        self.mult * (self.amp * ((1.0 - self.discriminant(alpha)).sqrt() - 1.0)).ln_1p()
    }
}

fn x00_eta(betas: &[f64], weights: &[f64], eps: f64) -> f64 {
    0.5 * betas.iter().zip(weights).map(|(b, w)| w * (b * eps / 2.0).tanh()).sum::<f64>()
}

fn x00_p(sp: f64, sm: f64, eta: f64) -> Option<f64> {
    (sp + sm > 0.0).then(|| 0.5 + eta * (sp - sm) / (sp + sm))
}

fn xxz_random_form(s: f64, eps: f64, betas: Vec<f64>, weights: Vec<f64>) -> TwoTimeForm {
    let ep = s * double_sum(&betas, &weights, |bk, bl| ep_kernel((bk - bl) * eps / 2.0, (bk + bl) * eps / 2.0));
    let discriminant = Box::new(move |alpha: f64| {
        2.0 * double_sum(&betas, &weights, |bk, bl| {
            kernel(alpha, (bk - bl) * eps / 2.0) / ((bk * eps / 2.0).cosh() * (bl * eps / 2.0).cosh())
        })
    });
    TwoTimeForm { mult: 1.0, amp: s / 2.0, discriminant, ep, invariant_p: None }
}

fn x00_random_form(sp: f64, sm: f64, eps: f64, betas: Vec<f64>, weights: Vec<f64>) -> TwoTimeForm {
    let sum = sp + sm;
    let (same, cross) = if sum > 0.0 { ((sp * sp + sm * sm) / sum, 2.0 * sp * sm / sum) } else { (0.0, 0.0) };
    let ep = double_sum(&betas, &weights, |bk, bl| {
        let (xm, xp) = ((bk - bl) * eps / 2.0, (bk + bl) * eps / 2.0);
        same * ep_kernel(xm, xp) + cross * ep_kernel(xp, xm)
    });
    let invariant_p = x00_p(sp, sm, x00_eta(&betas, &weights, eps));
    let discriminant = Box::new(move |alpha: f64| {
        if sum == 0.0 {
            return 0.0;
        }
        2.0 * double_sum(&betas, &weights, |bk, bl| {
            let c = (bk * eps / 2.0).cosh() * (bl * eps / 2.0).cosh();
            (same * kernel(alpha, (bk - bl) * eps / 2.0) + cross * kernel(alpha, (bk + bl) * eps / 2.0)) / (sum * c)
        })
    });
    TwoTimeForm { mult: 1.0, amp: sum / 2.0, discriminant, ep, invariant_p }
}

fn x00_thermal_form(sp: f64, sm: f64, beta: f64, eps: f64) -> TwoTimeForm {
    let sum = sp + sm;
    let ratio = if sum > 0.0 { sp * sm / sum } else { 0.0 };
    let be = beta * eps;
    let ep = 2.0 * ratio * be * (be / 2.0).tanh();
    let invariant_p = x00_p(sp, sm, 0.5 * (be / 2.0).tanh());
    let discriminant = Box::new(move |alpha: f64| {
        if sum == 0.0 {
            return 0.0;
        }
        4.0 * sp * sm / (sum * sum) * kernel(alpha, be) / (be / 2.0).cosh().powi(2)
    });
    TwoTimeForm { mult: 1.0, amp: sum / 2.0, discriminant, ep, invariant_p }
}

fn two_time_form(params: &FamilyParams) -> Option<TwoTimeForm> {
    match params {
        FamilyParams::XxzTwoTime(p) => {
            let k = &p.coupling;
            let mut form = xxz_random_form(k.xxz_s(), k.epsilon, vec![p.beta], vec![1.0]);
            form.invariant_p = Some(thermal_probe(p.beta, k.epsilon)[0]);
            Some(form)
        }
        FamilyParams::XxzRandomThermal(p) => {
            let k = &p.coupling;
            Some(xxz_random_form(k.xxz_s(), k.epsilon, p.betas.clone(), p.weights.clone()))
        }
        FamilyParams::XxzMultiThermal(p) => {
            let k = &p.coupling;
            if k.epsilon != k.omega || k.mu != 0.0 {
                return None;
            }
            let s = k.multi_s();
            let eps = k.epsilon;
            let [b1, b2] = p.betas;
            let x = (b1 - b2) * eps / 2.0;
            let ep = 2.0 * s * ep_kernel(x, (b1 + b2) * eps / 2.0);
            let c = (b1 * eps / 2.0).cosh() * (b2 * eps / 2.0).cosh();
            let discriminant = Box::new(move |alpha: f64| kernel(alpha, x) / c);
            Some(TwoTimeForm { mult: 2.0, amp: s, discriminant, ep, invariant_p: None })
        }
        FamilyParams::X00TwoTime(p) => {
            let k = p.coupling.resolve().ok()?;
            let (sp, sm) = k.x00_s_pm();
            Some(x00_thermal_form(sp, sm, p.beta, k.epsilon))
        }
        FamilyParams::X00RandomThermal(p) => {
            let k = p.coupling.resolve().ok()?;
            let (sp, sm) = k.x00_s_pm();
            Some(x00_random_form(sp, sm, k.epsilon, p.betas.clone(), p.weights.clone()))
        }
        _ => None,
    }
}

/// Reversed transition matrix `p̂_xy = p_θy p_{θy,θx} / p_θx` of the Markov measure
/// `ℙ̂(ω) = ℙ(θω_T … θω_1)`.
fn reversed_markov(pm: &DMatrix<f64>, p: &[f64], theta: &[usize]) -> DMatrix<f64> {
    let d = pm.nrows();
    DMatrix::from_fn(d, d, |x, y| p[theta[y]] * pm[(theta[y], theta[x])] / p[theta[x]])
}

fn markov_pressure(pm: &DMatrix<f64>, hat: &DMatrix<f64>, alpha: f64) -> Result<f64, CatalogError> {
    let d = pm.nrows();
    let m = DMatrix::from_fn(d, d, |x, y| {
        let (a, b) = (pm[(x, y)], hat[(x, y)]);
        if a > 0.0 && b > 0.0 {
            a.powf(1.0 - alpha) * b.powf(alpha)
        } else {
            0.0
        }
    });
    let start = crate::CVector::from_element(d, crate::C64::new(1.0, 0.0));
    Ok(spectral_radius(&complexify(&m.transpose()), Some(&start))?.radius.ln())
}

fn markov_ep(pm: &DMatrix<f64>, hat: &DMatrix<f64>, p: &[f64]) -> f64 {
    let d = pm.nrows();
    let mut acc = 0.0;
    for x in 0..d {
        for y in 0..d {
            let a = pm[(x, y)];
            if a > 0.0 {
                acc += p[x] * a * (a / hat[(x, y)]).ln();
            }
        }
    }
    acc
}

fn markov_form(params: &FamilyParams, q: Quantity, pm: DMatrix<f64>, p: Vec<f64>, theta: Vec<usize>) -> Result<f64, CatalogError> {
    if p.iter().any(|&x| x <= 0.0) {
        return Err(CatalogError::Invalid("the stationary vector must be positive".into()));
    }
    let hat = reversed_markov(&pm, &p, &theta);
    match q {
        Quantity::Ep => Ok(markov_ep(&pm, &hat, &p)),
        Quantity::Pressure(a) => markov_pressure(&pm, &hat, a),
        _ => Err(undefined(params, q)),
    }
}

/// Evaluates the closed-form expression of `q` for the family described by `params`.
pub fn closed_form(params: &FamilyParams, q: Quantity) -> Result<f64, CatalogError> {
    params.validate()?;
    match params {
        FamilyParams::Bernoulli(b) => {
            let theta: Vec<usize> = b.theta.clone().unwrap_or_else(|| (0..b.q.len()).collect());
            let pairs = || b.q.iter().enumerate().filter(|(_, &x)| x > 0.0).map(|(a, &x)| (x, b.q[theta[a]]));
            match q {
                Quantity::Ep => Ok(pairs().map(|(x, y)| x * (x / y).ln()).sum()),
                Quantity::Pressure(alpha) => {
                    Ok(pairs().filter(|(_, y)| *y > 0.0).map(|(x, y)| x.powf(1.0 - alpha) * y.powf(alpha)).sum::<f64>().ln())
                }
                _ => Err(undefined(params, q)),
            }
        }
        FamilyParams::Markov(m) => {
            let pm = m.matrix()?;
            let p = match &m.p {
                Some(p) => p.clone(),
                None => crate::numerics::stationary_vector(&pm)?.into_vec(),
            };
            let theta = m.theta.clone().unwrap_or_else(|| (0..pm.nrows()).collect());
            markov_form(params, q, pm, p, theta)
        }
        FamilyParams::VonNeumann(v) => {
            let u = v.unitary()?;
            let d = u.nrows();
            let pm = DMatrix::from_fn(d, d, |x, y| u[(y, x)].norm_sqr());
            markov_form(params, q, pm, vec![1.0 / d as f64; d], (0..d).collect())
        }
        FamilyParams::KeepSwitch(p) => {
            let ks = crate::keepswitch::KeepSwitch::new(p.q1, p.q2).map_err(|e| CatalogError::Invalid(e.to_string()))?;
            Ok(match q {
                Quantity::Ep => ks.ep(),
                Quantity::Pressure(a) => ks.pressure(a),
                Quantity::CltVariance => ks.limit_variance(),
                Quantity::InvariantP => ks.stationary()[0],
            })
        }
        FamilyParams::XxzOneTime(p) => match q {
            Quantity::Ep | Quantity::Pressure(_) => Ok(0.0),
            Quantity::InvariantP => Ok(0.5 - p.eta),
            Quantity::CltVariance => Err(undefined(params, q)),
        },
        FamilyParams::X00OneTime(p) => {
            let k = p.coupling.resolve()?;
            let (sp, sm) = k.x00_s_pm();
            match q {
                Quantity::Ep | Quantity::Pressure(_) => Ok(0.0),
                Quantity::InvariantP => x00_p(sp, sm, p.eta).ok_or_else(|| undefined(params, q)),
                Quantity::CltVariance => Err(undefined(params, q)),
            }
        }
        FamilyParams::Rotational(_) => Err(undefined(params, q)),
        _ => {
            let form = two_time_form(params).ok_or_else(|| undefined(params, q))?;
            match q {
                Quantity::Ep => Ok(form.ep),
                Quantity::Pressure(a) => Ok(form.pressure(a)),
                Quantity::InvariantP => form.invariant_p.ok_or_else(|| undefined(params, q)),
                Quantity::CltVariance => Err(undefined(params, q)),
            }
        }
    }
}
