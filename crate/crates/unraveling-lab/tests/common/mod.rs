#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unraveling_lab::catalog::{
    Coupling, FamilyParams, MultiThermalParams, RandomThermalParams, ThermalParams, X00Coupling,
};
use unraveling_lab::instrument::{Alphabet, LinearRep};
use unraveling_lab::numerics::stationary_vector;
use unraveling_lab::pmp::{FMSpec, HMSpec, MeasureSpec, PMPSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

pub fn coupling(rng: &mut ChaCha8Rng, with_mu: bool) -> Coupling {
    Coupling {
        epsilon: uniform(rng, 0.5, 2.0),
        omega: uniform(rng, 0.5, 2.0),
        lambda: uniform(rng, 0.2, 1.5),
        mu: if with_mu { uniform(rng, -1.0, 1.0) } else { 0.0 },
        t: uniform(rng, 0.5, 3.0),
    }
}

/// Weights summing to one up to rounding.
pub fn weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| uniform(rng, 0.1, 1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
    w[k - 1] = 1.0 - w[..k - 1].iter().sum::<f64>();
    w
}

fn betas(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    (0..k).map(|_| uniform(rng, -1.5, 1.5)).collect()
}

/// One random member of each two-time family: XXZ thermal, XXZ random thermal
/// with three temperatures, resonant XXZ multi-thermal with `μ = 0`, X00
/// thermal and X00 random thermal with three temperatures.
pub fn two_time_draw(rng: &mut ChaCha8Rng) -> Vec<FamilyParams> {
    let xxz = coupling(rng, true);
    let xxz_rt = coupling(rng, true);
    let mut multi = coupling(rng, false);
    multi.omega = multi.epsilon;
    let x00 = coupling(rng, false);
    let x00_rt = coupling(rng, false);
    vec![
        FamilyParams::XxzTwoTime(ThermalParams { coupling: xxz, beta: uniform(rng, -1.5, 1.5) }),
        FamilyParams::XxzRandomThermal(RandomThermalParams { coupling: xxz_rt, betas: betas(rng, 3), weights: weights(rng, 3) }),
        FamilyParams::XxzMultiThermal(MultiThermalParams { coupling: multi, betas: [uniform(rng, 0.1, 2.0), uniform(rng, 0.1, 2.0)] }),
        FamilyParams::X00TwoTime(ThermalParams { coupling: X00Coupling::Dynamics(x00), beta: uniform(rng, -1.5, 1.5) }),
        FamilyParams::X00RandomThermal(RandomThermalParams {
            coupling: X00Coupling::Dynamics(x00_rt),
            betas: betas(rng, 3),
            weights: weights(rng, 3),
        }),
    ]
}

pub fn parse(json: &str) -> FamilyParams {
    serde_json::from_str(json).expect("family parameters")
}

/// A representative member of every family.
pub fn every_family() -> Vec<FamilyParams> {
    [
        r#"{"family":"bernoulli","params":{"q":[0.2,0.3,0.5],"theta":[1,0,2]}}"#,
        r#"{"family":"bernoulli","params":{"q":[0.45,0.55],"dim":3}}"#,
        r#"{"family":"markov","params":{"P":[[0.1,0.6,0.3],[0.4,0.2,0.4],[0.5,0.25,0.25]],"theta":[0,2,1]}}"#,
        r#"{"family":"von_neumann","params":{"U":[[[0.6,0.0],[0.0,0.8]],[[0.0,0.8],[0.6,0.0]]]}}"#,
        r#"{"family":"keep_switch","params":{"q1":0.6,"q2":0.3}}"#,
        r#"{"family":"xxz_one_time","params":{"epsilon":0.9,"omega":1.4,"lambda":0.7,"mu":0.35,"t":1.9,"eta":0.2}}"#,
        r#"{"family":"xxz_two_time","params":{"epsilon":0.9,"omega":1.4,"lambda":0.7,"mu":0.35,"t":1.9,"beta":0.8}}"#,
        r#"{"family":"xxz_random_thermal","params":{"epsilon":1.1,"omega":0.7,"lambda":0.5,"t":2.3,"betas":[0.3,1.7,-0.4],"weights":[0.4,0.35,0.25]}}"#,
        r#"{"family":"xxz_multi_thermal","params":{"epsilon":1.2,"omega":1.2,"lambda":0.6,"t":1.1,"betas":[0.4,1.5]}}"#,
        r#"{"family":"x00_one_time","params":{"epsilon":0.8,"omega":1.3,"lambda":0.9,"t":1.7,"eta":-0.15}}"#,
        r#"{"family":"x00_two_time","params":{"epsilon":1.0,"s_plus":0.4,"s_minus":0.2,"beta":0.7}}"#,
        r#"{"family":"x00_random_thermal","params":{"epsilon":0.8,"omega":1.3,"lambda":0.9,"t":1.7,"betas":[0.2,0.9,2.0],"weights":[0.2,0.5,0.3]}}"#,
        r#"{"family":"rotational","params":{"delta":0.3183098861837907}}"#,
    ]
    .into_iter()
    .map(parse)
    .collect()
}

/// `Σ_{Ω_T} ℙ_T` summed word by word.
pub fn total_mass(rep: &LinearRep, t: usize) -> f64 {
    rep.split_total_mass(t).0
}

fn stochastic(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut m = DMatrix::from_fn(rows, cols, |_, _| uniform(rng, 0.05, 1.0));
    for mut r in m.row_iter_mut() {
        let s = r.sum();
        r /= s;
    }
    m
}

pub fn alphabet(k: usize) -> Alphabet {
    Alphabet::new((0..k).map(|i| char::from(b'a' + i as u8).to_string())).unwrap()
}

/// A PMP with entrywise positive matrices on `d` hidden states and `k` symbols.
pub fn random_pmp(rng: &mut ChaCha8Rng, d: usize, k: usize) -> PMPSpec {
    let raw: Vec<DMatrix<f64>> = (0..k).map(|_| DMatrix::from_fn(d, d, |_, _| uniform(rng, 0.05, 1.0))).collect();
    let total = raw.iter().fold(DMatrix::zeros(d, d), |acc, m| acc + m);
    let mats = raw
        .iter()
        .map(|m| DMatrix::from_fn(d, d, |i, j| m[(i, j)] / total.row(i).sum()))
        .collect();
    PMPSpec::from_matrices(alphabet(k), mats).unwrap()
}

pub fn random_hm(rng: &mut ChaCha8Rng, l: usize, k: usize) -> HMSpec {
    let q = stochastic(rng, l, l);
    let p = stationary_vector(&q).unwrap();
    HMSpec::new(alphabet(k), q, p, stochastic(rng, l, k)).unwrap()
}

pub fn random_fm(rng: &mut ChaCha8Rng, n: usize, k: usize) -> FMSpec {
    let p_matrix = stochastic(rng, n, n);
    let p = stationary_vector(&p_matrix).unwrap();
    let f = (0..n).map(|x| x % k).collect();
    FMSpec::new(alphabet(k), p_matrix, p, f).unwrap()
}

/// Ten specifications cycling through the three kinds and a few sizes.
pub fn random_specs(seed: u64) -> Vec<MeasureSpec> {
    let mut r = rng(seed);
    (0..10)
        .map(|i| {
            let (d, k) = (2 + i % 3, 2 + i % 2);
            match i % 3 {
                0 => MeasureSpec::Pmp(random_pmp(&mut r, d, k)),
                1 => MeasureSpec::Hm(random_hm(&mut r, d, k)),
                _ => MeasureSpec::Fm(random_fm(&mut r, d.max(k), k)),
            }
        })
        .collect()
}

/// All words of length `t` over `k` symbols in lexicographic order.
pub fn all_words(k: usize, t: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..t {
        out = out.into_iter().flat_map(|w| (0..k).map(move |a| [w.clone(), vec![a]].concat())).collect();
    }
    out
}
