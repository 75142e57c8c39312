use rayon::prelude::*;
use serde_json::{json, Value};
use unraveling_lab::catalog::{FamilyParams, Quantity};
use unraveling_lab::entropy::{
    entropy_production, entropy_production_pmp, enumerate_pair, ep_from_enumeration, ep_from_pressure, pressure_verdict,
    rate_function_from, weak_gibbs_diagnostic, ErrorExponents, PairEnumeration, WitnessPolicy,
};
use unraveling_lab::keepswitch::{fdr_compute, kolmogorov_distance, ks_clt_sampler, ks_critical_value, limit_cdf};
use unraveling_lab::pmp::{convert, SpecDoc, SpecKind};
use unraveling_lab::rotational::{
    construct_delta, derivative_witness, divergence_probe, scan_lower_bound, u_increment_report, ConstructedAngle,
    ConstructionOptions, DivergenceVerdict, Growth, RotationAngle,
};

use crate::config::{Grid, Task, TaskParams};
use crate::error::{compute, invalid, CliError};
use crate::output::{number, to_value, Cell, Report, Table};
use crate::source::Source;

/// Settings shared by every task.
#[derive(Debug, Clone, Copy)]
pub struct Context {
    pub budget: u64,
    pub seed: u64,
    pub precision_bits: u32,
}

/// Default per-step ceiling for the `+∞` verdict on `e_T(α)/T`.
const DEFAULT_CEILING: f64 = 50.0;

/// Step of the central difference for `−e′(0)`.
const SLOPE_STEP: f64 = 1e-5;

pub fn run_task(task: Task, params: &TaskParams, source: Option<&Source>, ctx: Context) -> Result<Report, CliError> {
    let need = || source.ok_or_else(|| CliError::schema(format!("task {} needs a family, instrument or measure", task.name())));
    match task {
        Task::Info => info(need()?),
        Task::Enumerate => enumerate(need()?, params, ctx),
        Task::Pressure => pressure(need()?, params, ctx),
        Task::Rate => rate(need()?, params),
        Task::Ep => ep(need()?, params, ctx),
        Task::Exponents => exponents(need()?, params, ctx),
        Task::Clt => clt(need()?, params, ctx),
        Task::GibbsDiag => gibbs(need()?, params, ctx),
        Task::Fdr => fdr(params, ctx),
        Task::Convert => convert_task(need()?, params, ctx),
        Task::Rotational => rotational(source, params, ctx),
    }
}

fn grid_or(g: &Option<Grid>, default: Grid) -> Vec<f64> {
    g.as_ref().unwrap_or(&default).points()
}

fn abs_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs()
    }
}

fn info(src: &Source) -> Result<Report, CliError> {
    let (theta, probs): (Vec<usize>, Vec<f64>) = match (&src.instrument, &src.pmp) {
        (Some(i), _) => (i.theta().to_vec(), i.one_step_probs()),
        (None, Some(p)) => (p.theta().to_vec(), p.one_step_probs()),
        (None, None) => unreachable!("sources carry an instrument or a PMP"),
    };
    let labels = src.instrument.as_ref().and_then(|i| i.delta_s()).or_else(|| src.pmp.as_ref().and_then(|p| p.delta_s()));
    let ab = src.alphabet();
    let mut t = Table::new(["symbol", "theta", "delta_s", "one_step_prob"]);
    for a in 0..ab.len() {
        let ds = labels.map_or(f64::NAN, |l| l[a]);
        t.push(vec![ab.symbol(a).into(), ab.symbol(theta[a]).into(), ds.into(), probs[a].into()]);
    }
    let mut r = Report::new(t);
    r.note("source", src.label.as_str());
    if let Some(i) = &src.instrument {
        r.note("dim", i.dim());
        if let Some(d) = i.restricted_from() {
            r.note("restricted_from_dim", d);
        }
    }
    if let Some(p) = &src.pmp {
        r.note("pmp_dim", p.dim());
        r.note("gibbs_constant", p.gibbs_constant().map_or(Value::Null, number));
    }
    r.note("degenerate", src.degenerate.map_or(Value::Null, |d| to_value(&d)));
    r.note("labelled", src.has_labels());
    if let Some(ep) = src.closed(Quantity::Ep) {
        r.note_num("ep_closed_form", ep);
    }
    Ok(r)
}

fn enumerate(src: &Source, params: &TaskParams, ctx: Context) -> Result<Report, CliError> {
    let t = params.t.unwrap_or(4);
    let en = enumerate_pair(src.forward(), src.reversed()?, t, ctx.budget, true).map_err(compute)?;
    let words = en.words.as_ref().expect("words were requested");
    let ab = src.alphabet();
    let mut table = Table::new(["word", "log_p", "log_p_hat", "sigma"]);
    for ((w, &lp), &lq) in words.iter().zip(&en.log_p).zip(&en.log_q) {
        table.push(vec![ab.format_word(w).into(), lp.into(), lq.into(), (lp - lq).into()]);
    }
    let mass: f64 = en.log_p.iter().map(|x| x.exp()).sum();
    let mut r = Report::new(table);
    r.note("t", t).note("supported_words", words.len()).note_num("total_mass", mass).note_num("mean_sigma", en.mean_sigma());
    Ok(r)
}

/// `e_T(α) − e_{T−1}(α)`, or `+∞` once `e_T(α)/T` is increasing past the ceiling.
fn increment(prev: &PairEnumeration, last: &PairEnumeration, alpha: f64, ceiling: f64) -> f64 {
    let (a, b) = (prev.pressure(alpha), last.pressure(alpha));
    match pressure_verdict(&[a / prev.t as f64, b / last.t as f64], ceiling) {
        Some(v) if v == f64::INFINITY => f64::INFINITY,
        _ => b - a,
    }
}

fn pressure(src: &Source, params: &TaskParams, ctx: Context) -> Result<Report, CliError> {
    let alphas = grid_or(&params.alphas, Grid::Range { lo: -1.0, hi: 2.0, n: 13 });
    let mut r = Report::new(Table::new(["alpha", "e_numeric", "e_closed_form", "abs_diff"]));
    let numeric: Vec<f64> = if src.has_labels() {
        r.note("method", "spectral");
        alphas
            .par_iter()
            .map(|&a| src.spectral_pressure(a).expect("labelled source").map_err(compute))
            .collect::<Result<_, _>>()?
    } else {
        let t = params.t.unwrap_or(10).max(2);
        let ceiling = params.ceiling.unwrap_or(DEFAULT_CEILING);
        let q = src.reversed()?;
        let prev = enumerate_pair(src.forward(), q, t - 1, ctx.budget, false).map_err(compute)?;
        let last = enumerate_pair(src.forward(), q, t, ctx.budget, false).map_err(compute)?;
        r.note("method", "enumeration_increment").note("t", t).note_num("ceiling", ceiling);
        alphas.iter().map(|&a| increment(&prev, &last, a, ceiling)).collect()
    };
    let mut max_diff = f64::NAN;
    for (&a, &e) in alphas.iter().zip(&numeric) {
        let c = src.closed(Quantity::Pressure(a)).unwrap_or(f64::NAN);
        let d = abs_diff(e, c);
        if !d.is_nan() {
            max_diff = if max_diff.is_nan() { d } else { max_diff.max(d) };
        }
        r.table.push(vec![a.into(), e.into(), c.into(), d.into()]);
    }
    r.note_num("max_abs_diff", max_diff);
    Ok(r)
}

/// A pressure function for Legendre transforms: spectral when labelled, else the closed form.
fn pressure_fn(src: &Source) -> Result<(&'static str, Box<dyn Fn(f64) -> f64 + Sync + '_>), CliError> {
    if src.has_labels() {
        return Ok(("spectral", Box::new(move |a| src.spectral_pressure(a).and_then(Result::ok).unwrap_or(f64::NAN))));
    }
    if src.closed(Quantity::Pressure(0.5)).is_some() {
        return Ok(("closed_form", Box::new(move |a| src.closed(Quantity::Pressure(a)).unwrap_or(f64::NAN))));
    }
    Err(CliError::Compute("no pressure function: the source has neither ΔS labels nor a closed form".into()))
}

fn rate(src: &Source, params: &TaskParams) -> Result<Report, CliError> {
    let s_grid = grid_or(&params.s_grid, Grid::Range { lo: -1.0, hi: 1.0, n: 21 });
    let [lo, hi] = params.alpha_range.unwrap_or([-3.0, 4.0]);
    let (method, e) = pressure_fn(src)?;
    let rf = rate_function_from(&*e, &s_grid, lo, hi);
    let gc = rf.gallavotti_cohen_residuals();
    let mut t = Table::new(["s", "rate", "boundary", "gc_residual"]);
    for i in 0..rf.s.len() {
        let res = gc.iter().find(|(s, _)| *s == rf.s[i]).map_or(f64::NAN, |x| x.1);
        t.push(vec![rf.s[i].into(), rf.values[i].into(), rf.boundary[i].into(), res.into()]);
    }
    let max_gc = gc.iter().map(|x| x.1.abs()).fold(f64::NAN, f64::max);
    let mut r = Report::new(t);
    r.note("method", method).note("alpha_range", json!([lo, hi])).note_num("max_abs_gc_residual", max_gc);
    Ok(r)
}

fn labelled_ep(src: &Source) -> Option<Result<f64, CliError>> {
    match (&src.instrument, &src.pmp) {
        (Some(i), _) if i.delta_s().is_some() => Some(entropy_production(i).map_err(compute)),
        (_, Some(p)) if p.delta_s().is_some() => Some(entropy_production_pmp(p).map_err(compute)),
        _ => None,
    }
}

fn ep(src: &Source, params: &TaskParams, ctx: Context) -> Result<Report, CliError> {
    let closed = src.closed(Quantity::Ep).unwrap_or(f64::NAN);
    let mut rows: Vec<(&str, f64)> = Vec::new();
    if let Some(v) = labelled_ep(src) {
        rows.push(("labels", v?));
    }
    if let Ok((_, e)) = pressure_fn(src) {
        rows.push(("pressure_slope", ep_from_pressure(&*e, SLOPE_STEP)));
    }
    let ts = params.ts.clone().unwrap_or_else(|| vec![6, 8, 10]);
    rows.push(("enumeration_fit", ep_from_enumeration(src.forward(), src.reversed()?, &ts, ctx.budget).map_err(compute)?));
    let mut t = Table::new(["method", "ep", "ep_closed_form", "abs_diff"]);
    for (m, v) in rows {
        t.push(vec![m.into(), v.into(), closed.into(), abs_diff(v, closed).into()]);
    }
    let mut r = Report::new(t);
    r.note("enumeration_ts", to_value(&ts)).note_num("slope_step", SLOPE_STEP);
    Ok(r)
}

fn exponents(src: &Source, params: &TaskParams, ctx: Context) -> Result<Report, CliError> {
    let (method, e) = pressure_fn(src)?;
    let ep = match labelled_ep(src) {
        Some(v) => v?,
        None => src.closed(Quantity::Ep).unwrap_or_else(|| ep_from_pressure(&*e, SLOPE_STEP)),
    };
    let s_grid = grid_or(&params.s_grid, Grid::Range { lo: 0.0, hi: 0.5, n: 11 });
    if s_grid[0] < 0.0 {
        return Err(CliError::schema("Hoeffding exponents are defined for s ≥ 0"));
    }
    let ts = params.ts.clone().unwrap_or_else(|| vec![4, 6, 8]);
    let ex = ErrorExponents::compute(&*e, ep, &s_grid, Some((src.forward(), src.reversed()?, &ts, ctx.budget)))
        .map_err(compute)?;
    let mut t = Table::new(["quantity", "argument", "value"]);
    t.push(vec!["stein".into(), f64::NAN.into(), ex.stein.into()]);
    t.push(vec!["chernoff".into(), ex.chernoff_alpha.into(), ex.chernoff.into()]);
    for &(s, h) in &ex.hoeffding {
        t.push(vec!["hoeffding".into(), s.into(), h.into()]);
    }
    for &(n, c) in &ex.chernoff_finite {
        t.push(vec!["chernoff_finite".into(), (n as f64).into(), c.into()]);
    }
    let mut r = Report::new(t);
    r.note("method", method);
    Ok(r)
}

fn clt(src: &Source, params: &TaskParams, ctx: Context) -> Result<Report, CliError> {
    let ks = src.keep_switch()?;
    let t = params.t.unwrap_or(1_000);
    let n = params.n.unwrap_or(10_000);
    let level = params.level.unwrap_or(0.01);
    let sample = ks_clt_sampler(&ks, t, n, ctx.seed).map_err(compute)?;
    let (v1, v2) = (ks.var_z1(), ks.var_z2());
    let cdf = |x: f64| limit_cdf(v1, v2, x);
    let distance = kolmogorov_distance(&sample.standardized, cdf);
    let critical = ks_critical_value(n, level);
    let mut sorted = sample.standardized.clone();
    sorted.sort_by(f64::total_cmp);
    let mut table = Table::new(["x", "empirical_cdf", "limit_cdf"]);
    for x in grid_or(&params.cdf_grid, Grid::Range { lo: -4.0, hi: 4.0, n: 33 }) {
        let emp = sorted.partition_point(|&s| s <= x) as f64 / n as f64;
        table.push(vec![x.into(), emp.into(), cdf(x).into()]);
    }
    let (mean, se, limit_mean) = (sample.mean(), sample.standard_error(), ks.limit_mean());
    let mut r = Report::new(table);
    r.note("t", t)
        .note("n", n)
        .note_num("level", level)
        .note_num("ep", ks.ep())
        .note_num("var_z1", v1)
        .note_num("var_z2", v2)
        .note_num("ks_distance", distance)
        .note_num("ks_critical_value", critical)
        .note("ks_within_critical", distance < critical)
        .note_num("mean", mean)
        .note_num("standard_error", se)
        .note_num("limit_mean", limit_mean)
        .note_num("mean_deviation_in_se", (mean - limit_mean).abs() / se)
        .note_num("sigma_rate_mean", sample.sigma_rate.0)
        .note_num("sigma_rate_se", sample.sigma_rate.1);
    Ok(r)
}

fn gibbs(src: &Source, params: &TaskParams, ctx: Context) -> Result<Report, CliError> {
    let ts = params.ts.clone().unwrap_or_else(|| vec![params.t.unwrap_or(10)]);
    let ab = src.alphabet();
    let witnesses = params
        .witnesses
        .iter()
        .flatten()
        .map(|w| ab.parse_word(w).map(|w| w.0).map_err(invalid))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(["t", "value", "split", "word", "exhaustive"]);
    for &t in &ts {
        let policy = WitnessPolicy {
            witnesses: witnesses.iter().filter(|w| w.len() == t).cloned().collect(),
            samples: params.samples.unwrap_or(0),
            seed: ctx.seed,
        };
        let d = weak_gibbs_diagnostic(src.forward(), t, ctx.budget, &policy).map_err(compute)?;
        table.push(vec![t.into(), d.value.into(), d.split.into(), ab.format_word(&d.word).into(), d.exhaustive.into()]);
    }
    let mut r = Report::new(table);
    if let Some(p) = &src.pmp {
        r.note("gibbs_constant", p.gibbs_constant().map_or(Value::Null, number));
    }
    Ok(r)
}

fn fdr(params: &TaskParams, ctx: Context) -> Result<Report, CliError> {
    let eps = params.eps.unwrap_or([0.0, 0.0]);
    let ts = params.ts.clone().unwrap_or_else(|| vec![4, 8, 12]);
    let sample = params.n.map(|n| (params.t.unwrap_or(1_000), n, ctx.seed));
    let rep = fdr_compute(eps, &ts, sample).map_err(compute)?;
    let mut table = Table::new([
        "horizon", "d11", "d12", "d21", "d22", "l11", "l12", "l21", "l22", "max_abs_l_minus_half_d", "j1", "j2",
    ]);
    let mut push = |h: String, d: &[f64; 4], l: &[f64; 4], j: [f64; 2]| {
        let gap = (0..4).map(|k| (l[k] - 0.5 * d[k]).abs()).fold(0.0, f64::max);
        let mut row: Vec<Cell> = vec![h.into()];
        row.extend(d.iter().chain(l.iter()).map(|&x| Cell::from(x)));
        row.extend([Cell::from(gap), j[0].into(), j[1].into()]);
        table.push(row);
    };
    for h in &rep.horizons {
        push(h.t.to_string(), &flat(&h.d_t), &flat(&h.l_t), [h.mean_current[0], h.mean_current[1]]);
    }
    push("inf".into(), &flat(&rep.d_inf), &flat(&rep.l_inf), [f64::NAN; 2]);
    if let Some(ds) = &rep.d_inf_sampled {
        push("inf_sampled".into(), &flat(ds), &[f64::NAN; 4], [f64::NAN; 2]);
    }
    let mut r = Report::new(table);
    r.note("eps", json!(eps)).note_num("ep", rep.ep);
    if let Some((t, n, _)) = sample {
        r.note("sample_t", t).note("sample_n", n);
    }
    Ok(r)
}

/// Row-major entries of a 2×2 matrix.
fn flat<M: std::ops::Index<(usize, usize), Output = f64>>(m: &M) -> [f64; 4] {
    [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
}

fn convert_task(src: &Source, params: &TaskParams, ctx: Context) -> Result<Report, CliError> {
    let spec = src.measure.as_ref().ok_or_else(|| CliError::schema("convert needs a measure or a family with a PMP"))?;
    let to = params.to.as_deref().ok_or_else(|| CliError::schema("convert needs a target kind (--to pmp|hm|fm)"))?;
    let target: SpecKind = to.parse().map_err(invalid)?;
    let converted = convert(spec, target).map_err(compute)?;
    let back = convert(&converted, spec.kind()).map_err(compute)?;
    let (conv_rep, back_rep) = (converted.linear_rep().map_err(compute)?, back.linear_rep().map_err(compute)?);
    let t = params.t.unwrap_or(8);
    let words = src.forward().enumerate(t, ctx.budget).map_err(compute)?;
    let ab = src.alphabet();
    let mut table = Table::new(["word", "log_p_source", "log_p_converted", "log_p_roundtrip", "abs_diff"]);
    let mut max_diff: f64 = 0.0;
    for (w, lp) in &words {
        let lc = conv_rep.log_prob(w).map_err(compute)?;
        let lb = back_rep.log_prob(w).map_err(compute)?;
        let d = abs_diff(lp.to_owned(), lc).max(abs_diff(*lp, lb));
        max_diff = max_diff.max(d);
        table.push(vec![ab.format_word(w).into(), (*lp).into(), lc.into(), lb.into(), d.into()]);
    }
    let converted_mass: f64 = conv_rep.enumerate(t, ctx.budget).map_err(compute)?.iter().map(|(_, l)| l.exp()).sum();
    let mut r = Report::new(table);
    r.note("from", format!("{:?}", spec.kind()).to_lowercase())
        .note("to", to.to_lowercase())
        .note("t", t)
        .note_num("max_abs_diff", max_diff)
        .note_num("converted_total_mass", converted_mass)
        .note("spec", to_value(&SpecDoc::from_spec(&converted)));
    Ok(r)
}

fn growth(params: &TaskParams, default: Growth) -> Result<Growth, CliError> {
    params.growth.as_deref().map_or(Ok(default), |g| g.parse().map_err(|e: unraveling_lab::rotational::RotationalError| CliError::schema(e.to_string())))
}

fn construct(params: &TaskParams, default: Growth) -> Result<ConstructedAngle, CliError> {
    let [lo, hi] = params.interval.unwrap_or([0.3, 0.4]);
    let mut opts = ConstructionOptions { seed: params.cf_seed, ..ConstructionOptions::default() };
    if let Some(m) = params.max_steps {
        opts.max_steps = m;
    }
    construct_delta(growth(params, default)?, (lo, hi), opts).map_err(compute)
}

fn rotational(src: Option<&Source>, params: &TaskParams, ctx: Context) -> Result<Report, CliError> {
    let action = params.action.as_deref().unwrap_or("construct-delta");
    let bits = ctx.precision_bits;
    match action {
        "construct-delta" => {
            let c = construct(params, Growth::Square)?;
            let mut t = Table::new([
                "index", "log_q_lo", "log_q_hi", "gamma", "log_ell_lo", "log_ell_hi", "log_scaled_lo", "log_scaled_hi", "constructed",
            ]);
            for b in &c.certificate.convergents {
                t.push(vec![
                    b.index.into(),
                    b.log_q.lo.into(),
                    b.log_q.hi.into(),
                    b.gamma.into(),
                    b.log_ell.lo.into(),
                    b.log_ell.hi.into(),
                    b.log_scaled.lo.into(),
                    b.log_scaled.hi.into(),
                    b.constructed.into(),
                ]);
            }
            let cert = &c.certificate;
            let mut r = Report::new(t);
            r.note("growth", c.growth.label())
                .note("interval", json!([c.interval.0, c.interval.1]))
                .note_num("cf_seed", c.seed)
                .note("seed_depth", c.seed_depth)
                .note_num("delta", c.expansion.value_f64())
                .note("in_interval", c.in_interval())
                .note("continued_fraction", to_value(&c.summary()))
                .note(
                    "certificate",
                    json!({
                        "log_lower_constant": number(cert.log_lower_constant),
                        "log_q_horizon": number(cert.log_q_horizon),
                        "log_construction_constant": number(cert.log_construction_constant),
                        "truncated": cert.truncated,
                    }),
                );
            Ok(r)
        }
        "probe" => {
            let c = construct(params, Growth::Square)?;
            let alphas = grid_or(&params.alphas, Grid::List(vec![-1.0, 2.0]));
            let mut t = Table::new(["alpha", "index", "t", "log_p_lo", "log_p_hi", "log_p_hat", "witness", "e_verdict"]);
            let mut verdicts = Vec::new();
            for a in alphas {
                let p = divergence_probe(&c, a, bits).map_err(|e| CliError::schema(e.to_string()))?;
                let verdict = match p.verdict {
                    DivergenceVerdict::Diverges => "inf",
                    DivergenceVerdict::Inconclusive => "inconclusive",
                };
                for w in &p.rows {
                    t.push(vec![a.into(), w.index.into(), w.t.into(), w.log_p.lo.into(), w.log_p.hi.into(), w.log_p_hat.into(), w.witness.into(), verdict.into()]);
                }
                verdicts.push(json!({"alpha": a, "increasing_run": p.increasing_run, "e": verdict}));
            }
            let mut r = Report::new(t);
            r.note("delta", number(c.expansion.value_f64())).note("precision_bits", bits).note("verdicts", Value::Array(verdicts));
            Ok(r)
        }
        "derivative" => {
            let c = construct(params, Growth::ExpSquare)?;
            let w = derivative_witness(&c, bits).map_err(compute)?;
            let mut t = Table::new(["index", "t", "log_witness", "log_formula"]);
            for row in &w.rows {
                t.push(vec![row.index.into(), row.t.into(), row.log_witness.into(), row.log_formula.into()]);
            }
            let mut r = Report::new(t);
            r.note("growth", c.growth.label())
                .note("seed_depth", c.seed_depth)
                .note("formula_run", w.formula_run)
                .note("witness_run", w.witness_run)
                .note("precision_bits", bits);
            Ok(r)
        }
        "u-increments" => {
            let g = growth(params, Growth::Square)?;
            let rep = u_increment_report(g, params.t_max.unwrap_or(60));
            let mut t = Table::new(["t", "increment", "bound"]);
            for &(n, inc, b) in &rep.rows {
                t.push(vec![n.into(), inc.into(), b.into()]);
            }
            let mut r = Report::new(t);
            r.note("growth", g.label()).note("bound_limit", number(rep.bound_limit.unwrap_or(f64::INFINITY)));
            Ok(r)
        }
        "scan" => {
            let g = growth(params, Growth::Square)?;
            let (angle, origin) = match src.and_then(|s| s.family.as_ref()) {
                Some(FamilyParams::Rotational(p)) => (RotationAngle::Float(p.delta), "family"),
                _ => (construct(params, g)?.angle(), "constructed"),
            };
            let q_max = params.q_max.unwrap_or(10_000);
            let (v, q) = scan_lower_bound(&angle, g, q_max, bits).map_err(compute)?;
            let mut t = Table::new(["q_max", "min_log_scaled", "argmin_q"]);
            t.push(vec![(q_max as f64).into(), v.into(), (q as f64).into()]);
            let mut r = Report::new(t);
            r.note("growth", g.label()).note("angle", origin).note_num("delta", angle.value_f64()).note("precision_bits", bits);
            Ok(r)
        }
        other => Err(CliError::schema(format!(
            "unknown rotational action {other:?}; expected construct-delta, probe, derivative, u-increments or scan"
        ))),
    }
}
