use log::{info, warn};
use unraveling_lab::catalog::{build_instrument, closed_form, Degeneracy, FamilyParams, Quantity};
use unraveling_lab::entropy::{pressure_spectral, pressure_spectral_pmp, EntropyError};
use unraveling_lab::instrument::{check_assumptions, support_mismatches, Alphabet, Instrument, LinearRep};
use unraveling_lab::pmp::{MeasureSpec, PMPSpec};

use crate::config::ExperimentConfig;
use crate::error::{compute, invalid, CliError};

/// The measure a task runs against, with whatever structure its description carries.
#[derive(Debug, Clone)]
pub struct Source {
    pub label: String,
    pub family: Option<FamilyParams>,
    pub instrument: Option<Instrument>,
    pub pmp: Option<PMPSpec>,
    pub measure: Option<MeasureSpec>,
    pub degenerate: Option<Degeneracy>,
    forward: LinearRep,
    reversed: Option<LinearRep>,
    reversal_error: Option<String>,
}

impl Source {
    /// `Ok(None)` when the configuration names no measure.
    pub fn load(cfg: &ExperimentConfig) -> Result<Option<Self>, CliError> {
        if let Some(params) = &cfg.family {
            let fam = build_instrument(params).map_err(invalid)?;
            return Self::from_instrument(params.name().to_string(), fam.instrument, fam.pmp, Some(params.clone()), fam.degenerate)
                .map(Some);
        }
        if let Some(doc) = &cfg.instrument {
            let inst = doc.build().map_err(invalid)?;
            return Self::from_instrument("instrument".into(), inst, None, None, None).map(Some);
        }
        if let Some(doc) = &cfg.measure {
            let spec = doc.build().map_err(invalid)?;
            return Self::from_measure(spec).map(Some);
        }
        Ok(None)
    }

    fn from_instrument(
        label: String,
        instrument: Instrument,
        pmp: Option<PMPSpec>,
        family: Option<FamilyParams>,
        degenerate: Option<Degeneracy>,
    ) -> Result<Self, CliError> {
        let forward = instrument.linear_rep().clone();
        let (reversed, reversal_error) = match instrument.or_instrument() {
            Ok(r) => (Some(r.linear_rep().clone()), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let measure = pmp.clone().map(MeasureSpec::Pmp);
        Ok(Self { label, family, instrument: Some(instrument), pmp, measure, degenerate, forward, reversed, reversal_error })
    }

    fn from_measure(spec: MeasureSpec) -> Result<Self, CliError> {
        let forward = spec.linear_rep().map_err(invalid)?;
        let pmp = spec.to_pmp().map_err(invalid)?;
        let (reversed, reversal_error) = match pmp.or_pmp() {
            Ok(r) => (Some(r.linear_rep().clone()), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let label = format!("measure:{:?}", spec.kind()).to_lowercase();
        Ok(Self {
            label,
            family: None,
            instrument: None,
            pmp: Some(pmp),
            measure: Some(spec),
            degenerate: None,
            forward,
            reversed,
            reversal_error,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        match (&self.instrument, &self.measure) {
            (Some(i), _) => i.alphabet(),
            (None, Some(m)) => m.alphabet(),
            (None, None) => unreachable!("a source always carries an instrument or a measure"),
        }
    }

    pub fn forward(&self) -> &LinearRep {
        &self.forward
    }

    /// Representation of the outcome-reversed measure `ℙ̂`.
    pub fn reversed(&self) -> Result<&LinearRep, CliError> {
        self.reversed.as_ref().ok_or_else(|| {
            CliError::Compute(format!(
                "the reversed measure is unavailable: {}",
                self.reversal_error.as_deref().unwrap_or("unknown reason")
            ))
        })
    }

    pub fn has_labels(&self) -> bool {
        self.instrument.as_ref().is_some_and(|i| i.delta_s().is_some())
            || self.pmp.as_ref().is_some_and(|p| p.delta_s().is_some())
    }

    /// `log r` of the deformed transfer operator, when ΔS labels are known.
    pub fn spectral_pressure(&self, alpha: f64) -> Option<Result<f64, EntropyError>> {
        match (&self.instrument, &self.pmp) {
            (Some(i), _) if i.delta_s().is_some() => Some(pressure_spectral(i, alpha)),
            (_, Some(p)) if p.delta_s().is_some() => Some(pressure_spectral_pmp(p, alpha)),
            _ => None,
        }
    }

    /// The closed form of a named family, if one is known.
    pub fn closed(&self, q: Quantity) -> Option<f64> {
        self.family.as_ref().and_then(|f| closed_form(f, q).ok())
    }

    pub fn keep_switch(&self) -> Result<unraveling_lab::keepswitch::KeepSwitch, CliError> {
        match &self.family {
            Some(FamilyParams::KeepSwitch(p)) => unraveling_lab::keepswitch::KeepSwitch::new(p.q1, p.q2).map_err(invalid),
            _ => Err(CliError::schema("this task needs a keep_switch family source")),
        }
    }

    /// Logs the standing-assumption checks at horizon `t`.
    pub fn log_assumptions(&self, t: usize, budget: u64) -> Result<(), CliError> {
        info!("source: {} over alphabet {:?}", self.label, self.alphabet().symbols());
        if let Some(d) = self.degenerate {
            info!("degenerate member: {d:?}");
        }
        match &self.instrument {
            Some(inst) => match check_assumptions(inst, t) {
                Ok(r) => {
                    info!(
                        "assumption (a): {} (unitality defect {:e}, invariance defect {:e}, min eig ρ {:e})",
                        r.a, r.unitality_defect, r.invariance_defect, r.rho_min_eigenvalue
                    );
                    match &r.b_counterexample {
                        Some(w) => warn!("assumption (b) fails at T ≤ {}: word {}", r.t_max, self.alphabet().format_word(w)),
                        None => info!("assumption (b): supports agree for T ≤ {}", r.t_max),
                    }
                    info!("assumption (c), sufficient irreducibility test: {}", r.c_sufficient);
                }
                Err(e) if e.budget_exhausted() => warn!("assumption checks skipped: {e}"),
                Err(e) => return Err(compute(e)),
            },
            None => {
                let q = self.reversed()?;
                match support_mismatches(&self.forward, q, t, budget) {
                    Ok(m) if m.is_empty() => info!("assumption (b): supports agree for T ≤ {t}"),
                    Ok(m) => warn!("assumption (b) fails at T ≤ {t}: word {}", self.alphabet().format_word(&m[0])),
                    Err(e) if e.budget_exhausted() => warn!("support check skipped: {e}"),
                    Err(e) => return Err(compute(e)),
                }
            }
        }
        Ok(())
    }
}
