use nalgebra::{DMatrix, DVector};

use super::{NumericsError, ProbVector, PROB_SUM_TOL};

const STOCHASTIC_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-12;

fn check_stochastic(p: &DMatrix<f64>) -> Result<(), NumericsError> {
    let (r, c) = p.shape();
    if r != c {
        return Err(NumericsError::NotSquare { rows: r, cols: c });
    }
    if p.iter().any(|x| !x.is_finite()) {
        return Err(NumericsError::NonFinite);
    }
    if let Some(x) = p.iter().find(|&&x| x < -STOCHASTIC_TOL) {
        return Err(NumericsError::NotStochastic { reason: format!("negative entry {x}") });
    }
    for (i, row) in p.row_iter().enumerate() {
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > STOCHASTIC_TOL.max(PROB_SUM_TOL) * (c as f64) {
            return Err(NumericsError::NotStochastic { reason: format!("row {i} sums to {s}") });
        }
    }
    Ok(())
}

/// Closed communicating classes of a right-stochastic matrix, each sorted.
pub fn closed_classes(p: &DMatrix<f64>) -> Result<Vec<Vec<usize>>, NumericsError> {
    check_stochastic(p)?;
    let n = p.nrows();
    // reach[i][j]: j reachable from i in zero or more steps
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        let mut stack = vec![i];
        row[i] = true;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if p[(u, v)] > 0.0 && !row[v] {
                    row[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    let mut seen = vec![false; n];
    let mut classes = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let class: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
        class.iter().for_each(|&j| seen[j] = true);
        let closed = (0..n).all(|j| !reach[i][j] || class.contains(&j));
        if closed {
            classes.push(class);
        }
    }
    Ok(classes)
}

/// Unique stationary row vector `π P = π` of a right-stochastic matrix.
///
/// Uniqueness is equivalent to there being exactly one closed class; any
/// other count is reported as [`NumericsError::Reducible`].
pub fn stationary_vector(p: &DMatrix<f64>) -> Result<ProbVector, NumericsError> {
    let classes = closed_classes(p)?;
    if classes.len() != 1 {
        return Err(NumericsError::Reducible { classes: classes.len() });
    }
    let n = p.nrows();
    // Replace one balance equation of (P^T - I) π = 0 by normalisation.
    let mut a = p.transpose() - DMatrix::identity(n, n);
    let mut b = DVector::zeros(n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    b[n - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or(NumericsError::Reducible { classes: classes.len() })?;
    let pi: Vec<f64> = pi.iter().map(|&x| if x < 0.0 && x > -RESIDUAL_TOL { 0.0 } else { x }).collect();
    let row = DVector::from_vec(pi.clone());
    let residual = (p.transpose() * &row - &row).amax();
    if residual > RESIDUAL_TOL * (n as f64).max(1.0) {
        return Err(NumericsError::NotConverged { iterations: 0 });
    }
    ProbVector::normalized(pi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_chain() {
        let p = DMatrix::from_row_slice(2, 2, &[0.4, 0.6, 0.3, 0.7]);
        let pi = stationary_vector(&p).unwrap();
        assert!((pi[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((pi[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn transient_state_gets_zero_mass() {
        let p = DMatrix::from_row_slice(3, 3, &[0.5, 0.5, 0.0, 0.0, 0.2, 0.8, 0.0, 0.9, 0.1]);
        assert_eq!(closed_classes(&p).unwrap(), vec![vec![1, 2]]);
        let pi = stationary_vector(&p).unwrap();
        assert_eq!(pi[0], 0.0);
    }

    #[test]
    fn two_closed_classes_are_rejected() {
        let p = DMatrix::<f64>::identity(2, 2);
        assert_eq!(stationary_vector(&p), Err(NumericsError::Reducible { classes: 2 }));
    }

    #[test]
    fn non_stochastic_is_rejected() {
        let p = DMatrix::from_row_slice(2, 2, &[0.5, 0.6, 0.3, 0.7]);
        assert!(matches!(stationary_vector(&p), Err(NumericsError::NotStochastic { .. })));
    }
}
