use super::{linear::support_mismatches, CPMap, Instrument, InstrumentError, STRUCTURE_TOL};
use crate::numerics::{max_abs, CMatrix, C64};

const SPAN_TOL: f64 = 1e-9;

/// Irreducibility of a CP map: no nontrivial projection `P` with `Φ[P] ≤ λP`.
///
/// Equivalently the Kraus operators have no common nontrivial invariant
/// subspace, which by Burnside's theorem holds exactly when the unital
/// algebra they generate is all of `M_d`. The algebra is spanned by a
/// breadth-first closure under left multiplication, with Gram–Schmidt
/// deciding linear independence.
pub fn is_irreducible(phi: &CPMap) -> bool {
    let d = phi.dim();
    let target = d * d;
    let gens: Vec<CMatrix> = phi
        .kraus()
        .iter()
        .filter_map(|k| {
            let n = k.norm();
            (n > 0.0).then(|| k / C64::new(n, 0.0))
        })
        .collect();
    let mut basis: Vec<CMatrix> = vec![CMatrix::identity(d, d) / C64::new((d as f64).sqrt(), 0.0)];
    let mut frontier = 0;
    while frontier < basis.len() && basis.len() < target {
        let b = basis[frontier].clone();
        frontier += 1;
        for g in &gens {
            let mut c = g * &b;
            let n0 = c.norm();
            if n0 == 0.0 {
                continue;
            }
            for _ in 0..2 {
                for e in &basis {
                    let overlap = e.dotc(&c);
                    c -= e * overlap;
                }
            }
            let n = c.norm();
            if n > SPAN_TOL * n0 {
                basis.push(c / C64::new(n, 0.0));
                if basis.len() == target {
                    break;
                }
            }
        }
    }
    basis.len() == target
}

/// Outcome of the standing-assumption checks.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    /// `ρ` invariant, faithful, and the family unital.
    pub a: bool,
    pub unitality_defect: f64,
    pub invariance_defect: f64,
    pub rho_min_eigenvalue: f64,
    /// Supports of `ℙ_T` and `ℙ̂_T` agree for every `T ≤ t_max`.
    pub b: bool,
    pub t_max: usize,
    /// First word (as symbol indices) on which the supports differ.
    pub b_counterexample: Option<Vec<usize>>,
    /// Irreducibility of `Ψ = Σ_a Φ_a ⊗ Φ̂_a`. A sufficient condition only:
    /// `false` does not refute the decoupling assumption.
    pub c_sufficient: bool,
}

/// Runs the three checks for an instrument and its outcome reversal.
pub fn check_assumptions(inst: &Instrument, t_max: usize) -> Result<AssumptionReport, InstrumentError> {
    let d = inst.dim();
    let id = CMatrix::identity(d, d);
    let total = inst.total_map();
    let unitality_defect = max_abs(&(total.heisenberg(&id) - &id));
    let invariance_defect = max_abs(&(total.schrodinger(inst.rho().matrix()) - inst.rho().matrix()));
    let rho_min_eigenvalue = inst.rho().spectrum()[0];
    let tol = STRUCTURE_TOL * d as f64;
    let a = unitality_defect <= tol && invariance_defect <= tol && rho_min_eigenvalue > 0.0;

    let hat = inst.or_instrument()?;
    let mut b_counterexample = None;
    for t in 1..=t_max {
        let bad = support_mismatches(inst.linear_rep(), hat.linear_rep(), t, super::DEFAULT_BUDGET)?;
        if let Some(w) = bad.into_iter().next() {
            b_counterexample = Some(w);
            break;
        }
    }
    let psi_kraus: Vec<CMatrix> = inst
        .maps()
        .iter()
        .zip(hat.maps())
        .flat_map(|(m, h)| m.tensor(h).kraus().to_vec())
        .collect();
    let psi = CPMap::new(d * d, psi_kraus)?;
    Ok(AssumptionReport {
        a,
        unitality_defect,
        invariance_defect,
        rho_min_eigenvalue,
        b: b_counterexample.is_none(),
        t_max,
        b_counterexample,
        c_sufficient: is_irreducible(&psi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn scalar_kraus_is_reducible_in_dimension_two() {
        let phi = CPMap::new(2, vec![CMatrix::identity(2, 2)]).unwrap();
        assert!(!is_irreducible(&phi));
        let one = CPMap::new(1, vec![CMatrix::identity(1, 1)]).unwrap();
        assert!(is_irreducible(&one));
    }

    #[test]
    fn block_permutation_unitary_is_reducible() {
        // Permutes e0 ↔ e1 and fixes e2: span{e0, e1} is invariant.
        let mut u = CMatrix::zeros(3, 3);
        u[(0, 1)] = c(1.0);
        u[(1, 0)] = c(1.0);
        u[(2, 2)] = c(1.0);
        let phi = CPMap::new(3, vec![u.clone()]).unwrap();
        assert!(!is_irreducible(&phi));
        // The superoperator has eigenvalue 1 with multiplicity > 1, confirming reducibility.
        let ev = crate::numerics::dense_eigenvalues(phi.superoperator()).unwrap();
        assert!(ev.iter().filter(|z| (*z - c(1.0)).norm() < 1e-10).count() > 1);
    }

    #[test]
    fn matrix_units_generate_everything() {
        let mut e01 = CMatrix::zeros(2, 2);
        e01[(0, 1)] = c(1.0);
        let phi = CPMap::new(2, vec![e01.clone(), e01.transpose()]).unwrap();
        assert!(is_irreducible(&phi));
        let only_upper = CPMap::new(2, vec![e01]).unwrap();
        assert!(!is_irreducible(&only_upper));
    }
}
