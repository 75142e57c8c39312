use super::{CMatrix, CVector, NumericsError, C64};

/// Dominant eigen-data of a square matrix.
#[derive(Debug, Clone)]
pub struct Spectral {
    pub radius: f64,
    /// Right eigenvector for the dominant eigenvalue, unit 1-norm.
    pub right: CVector,
    /// Left eigenvector (`left^T M = λ left^T`), unit 1-norm.
    pub left: CVector,
}

const POWER_TOL: f64 = 1e-15;
const POWER_MAX_ITER: usize = 20_000;
const DENSE_CHECK_MAX_DIM: usize = 64;

fn norm1(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

/// Rotates `v` so that its largest-modulus entry is real and positive, and scales to unit 1-norm.
fn canonical_phase(mut v: CVector) -> CVector {
    let (idx, _) = v
        .iter()
        .enumerate()
        .fold((0, 0.0), |(bi, bn), (i, z)| if z.norm() > bn { (i, z.norm()) } else { (bi, bn) });
    let z = v[idx];
    if z.norm() > 0.0 {
        let phase = z.conj() / z.norm();
        v *= phase;
    }
    let n = norm1(&v);
    if n > 0.0 {
        v /= C64::new(n, 0.0);
    }
    v
}

fn check_square(m: &CMatrix) -> Result<usize, NumericsError> {
    let (r, c) = m.shape();
    if r != c {
        return Err(NumericsError::NotSquare { rows: r, cols: c });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(NumericsError::NonFinite);
    }
    Ok(r)
}

/// Power iteration for matrices with a Perron–Frobenius structure.
///
/// Converges when the iterates, normalised in 1-norm, stop moving. A
/// peripheral spectrum (periodicity, degenerate moduli) makes the iterates
/// oscillate and is reported as [`NumericsError::NotConverged`].
pub fn power_iteration(m: &CMatrix, start: Option<&CVector>) -> Result<(f64, CVector), NumericsError> {
    let n = check_square(m)?;
    let mut v = match start {
        Some(s) => {
            if s.len() != n {
                return Err(NumericsError::DimensionMismatch { expected: n, found: s.len() });
            }
            s.clone()
        }
        None => CVector::from_element(n, C64::new(1.0, 0.0)),
    };
    let n0 = norm1(&v);
    if n0 == 0.0 {
        return Ok((0.0, v));
    }
    v /= C64::new(n0, 0.0);
    let mut radius;
    for _ in 0..POWER_MAX_ITER {
        let w = m * &v;
        let nw = norm1(&w);
        if nw == 0.0 {
            return Ok((0.0, v));
        }
        let w = w / C64::new(nw, 0.0);
        let diff = norm1(&(&w - &v));
        radius = nw;
        v = w;
        if diff < POWER_TOL * (n as f64) {
            return Ok((radius, canonical_phase(v)));
        }
    }
    Err(NumericsError::NotConverged { iterations: POWER_MAX_ITER })
}

/// All eigenvalues from a complex Schur decomposition.
pub fn dense_eigenvalues(m: &CMatrix) -> Result<Vec<C64>, NumericsError> {
    check_square(m)?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    m.clone()
        .schur()
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .ok_or(NumericsError::NotConverged { iterations: 0 })
}

/// Null vector of `a` from its smallest singular value.
fn null_vector(a: &CMatrix) -> CVector {
    let n = a.ncols();
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &s)| if s < bv { (i, s) } else { (bi, bv) });
    CVector::from_iterator(n, vt.row(idx).iter().map(|z| z.conj()))
}

fn dense_spectral(m: &CMatrix) -> Result<Spectral, NumericsError> {
    let eig = dense_eigenvalues(m)?;
    let lambda = eig
        .iter()
        .copied()
        .fold(C64::new(0.0, 0.0), |best, z| if z.norm() > best.norm() { z } else { best });
    let n = m.nrows();
    let shifted = m - CMatrix::identity(n, n) * lambda;
    let right = canonical_phase(null_vector(&shifted));
    let left = canonical_phase(null_vector(&shifted.transpose()));
    Ok(Spectral { radius: lambda.norm(), right, left })
}

/// Spectral radius with dominant right and left eigenvectors.
///
/// Power iteration from `cone_start` (or the all-ones vector) is tried first;
/// a dense Schur eigensolve is used when it does not converge, and also to
/// confirm the radius when the Perron vector is not strictly dominant.
pub fn spectral_radius(m: &CMatrix, cone_start: Option<&CVector>) -> Result<Spectral, NumericsError> {
    let n = check_square(m)?;
    if n == 0 {
        return Err(NumericsError::DimensionMismatch { expected: 1, found: 0 });
    }
    let mt = m.transpose();
    match (power_iteration(m, cone_start), power_iteration(&mt, None)) {
        (Ok((r, right)), Ok((rl, left))) if r > 0.0 && ((r - rl).abs() <= 1e-12 * r) => {
            if n > DENSE_CHECK_MAX_DIM {
                return Ok(Spectral { radius: r, right, left });
            }
            let check = dense_eigenvalues(m)?;
            let rmax = check.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if (rmax - r).abs() <= 1e-10 * rmax.max(1e-300) {
                Ok(Spectral { radius: r, right, left })
            } else {
                dense_spectral(m)
            }
        }
        _ => dense_spectral(m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn re(m: DMatrix<f64>) -> CMatrix {
        m.map(|x| C64::new(x, 0.0))
    }

    #[test]
    fn identity_has_radius_one() {
        let s = spectral_radius(&CMatrix::identity(2, 2), None).unwrap();
        assert!((s.radius - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stochastic_right_vector_is_flat() {
        let m = re(DMatrix::from_row_slice(3, 3, &[0.2, 0.5, 0.3, 0.1, 0.1, 0.8, 0.6, 0.3, 0.1]));
        let s = spectral_radius(&m, None).unwrap();
        assert!((s.radius - 1.0).abs() < 1e-12);
        for z in s.right.iter() {
            assert!((z.re - 1.0 / 3.0).abs() < 1e-12 && z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_matrix_falls_back_to_dense() {
        let m = re(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let s = spectral_radius(&m, None).unwrap();
        assert!((s.radius - 1.0).abs() < 1e-12);
        let p = re(DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.5, 0.0]));
        assert!(power_iteration(&p, Some(&CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]))).is_err());
        assert!((spectral_radius(&p, None).unwrap().radius - 1.0).abs() < 1e-12);
    }

    #[test]
    fn agrees_with_dense_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=16 {
            let m = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let s = spectral_radius(&m, None).unwrap();
            let dense = dense_eigenvalues(&m).unwrap().iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!((s.radius - dense).abs() < 1e-10 * dense.max(1.0), "n={n}");
            let resid = &m * &s.right - &s.right * dense_eigenvalues(&m)
                .unwrap()
                .into_iter()
                .fold(C64::new(0.0, 0.0), |b, z| if z.norm() > b.norm() { z } else { b });
            assert!(resid.iter().map(|z| z.norm()).sum::<f64>() < 1e-8, "n={n}");
        }
    }
}
