use super::{hermiticity_defect, CMatrix, NumericsError, C64};

const HERMITIAN_TOL: f64 = 1e-12;

/// Matrix exponential by scaling and squaring with a degree-18 Taylor core.
pub fn expm(a: &CMatrix) -> Result<CMatrix, NumericsError> {
    let (r, c) = a.shape();
    if r != c {
        return Err(NumericsError::NotSquare { rows: r, cols: c });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(NumericsError::NonFinite);
    }
    let norm: f64 = (0..r)
        .map(|i| a.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a / C64::new(2f64.powi(squarings), 0.0);
    let mut term = CMatrix::identity(r, r);
    let mut sum = term.clone();
    for k in 1..=18 {
        term = &term * &scaled / C64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    Ok(sum)
}

/// Unitary propagator `exp(-i t H)` for a Hermitian `H`.
pub fn matrix_exponential(h: &CMatrix, t: f64) -> Result<CMatrix, NumericsError> {
    let defect = hermiticity_defect(h);
    if defect > HERMITIAN_TOL * (1.0 + super::max_abs(h)) {
        return Err(NumericsError::NotHermitian { deviation: defect });
    }
    expm(&(h * C64::new(0.0, -t)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_generator() {
        let h = CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let t = 2.3_f64;
        let u = matrix_exponential(&h, t).unwrap();
        assert!((u[(0, 0)] - C64::new(t.cos(), 0.0)).norm() < 1e-14);
        assert!((u[(0, 1)] - C64::new(0.0, -t.sin())).norm() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(matches!(matrix_exponential(&h, 1.0), Err(NumericsError::NotHermitian { .. })));
    }

    #[test]
    fn large_norm_stays_unitary() {
        let h = CMatrix::from_fn(4, 4, |i, j| C64::new((i + j) as f64, if i == j { 0.0 } else { (i as f64) - (j as f64) }));
        let u = matrix_exponential(&h, 40.0).unwrap();
        let defect = &u * u.adjoint() - CMatrix::identity(4, 4);
        assert!(super::super::max_abs(&defect) < 1e-11);
    }
}
