use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use super::InstrumentError;
use crate::numerics::{kron, CMatrix, C64};

/// Completely positive map in Kraus form, `X ↦ Σ V* X V` (Heisenberg picture).
#[derive(Debug, Clone)]
pub struct CPMap {
    dim: usize,
    kraus: Vec<CMatrix>,
    superop: OnceLock<CMatrix>,
}

impl CPMap {
    pub fn new(dim: usize, kraus: Vec<CMatrix>) -> Result<Self, InstrumentError> {
        if dim == 0 {
            return Err(InstrumentError::Shape("dimension must be positive".into()));
        }
        if let Some(k) = kraus.iter().find(|k| k.shape() != (dim, dim)) {
            return Err(InstrumentError::Shape(format!("Kraus operator of shape {:?} in dimension {dim}", k.shape())));
        }
        if kraus.iter().flat_map(|k| k.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(InstrumentError::Shape("non-finite Kraus entry".into()));
        }
        Ok(Self { dim, kraus, superop: OnceLock::new() })
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, kraus: Vec::new(), superop: OnceLock::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn is_zero(&self) -> bool {
        self.kraus.iter().all(|k| k.iter().all(|z| z.norm() == 0.0))
    }

    /// `Φ[X] = Σ V* X V`.
    pub fn heisenberg(&self, x: &CMatrix) -> CMatrix {
        self.kraus
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, v| acc + v.adjoint() * x * v)
    }

    /// Dual action `Φ*[σ] = Σ V σ V*`.
    pub fn schrodinger(&self, sigma: &CMatrix) -> CMatrix {
        self.kraus
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, v| acc + v * sigma * v.adjoint())
    }

    /// Matrix of the Heisenberg action on column-stacked `vec(X)`: `Σ Vᵀ ⊗ V*`.
    pub fn superoperator(&self) -> &CMatrix {
        self.superop.get_or_init(|| {
            let d2 = self.dim * self.dim;
            self.kraus
                .iter()
                .fold(CMatrix::zeros(d2, d2), |acc, v| acc + kron(&v.transpose(), &v.adjoint()))
        })
    }

    /// The map `c·Φ`, realised by scaling every Kraus operator by `√c`.
    pub fn scaled(&self, c: f64) -> Self {
        let s = C64::new(c.sqrt(), 0.0);
        Self { dim: self.dim, kraus: self.kraus.iter().map(|k| k * s).collect(), superop: OnceLock::new() }
    }

    /// `Σ_i Φ_i`, by concatenating Kraus lists.
    pub fn sum<'a, I: IntoIterator<Item = &'a CPMap>>(dim: usize, maps: I) -> Self {
        let kraus = maps.into_iter().flat_map(|m| m.kraus.iter().cloned()).collect();
        Self { dim, kraus, superop: OnceLock::new() }
    }

    /// `Φ ⊗ Ψ` on the tensor product space.
    pub fn tensor(&self, other: &CPMap) -> Self {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| kron(a, b)))
            .collect();
        Self { dim: self.dim * other.dim, kraus, superop: OnceLock::new() }
    }

    /// Conjugates by a fixed invertible pair: Kraus `V ↦ L V R`.
    pub fn conjugated(&self, left: &CMatrix, right: &CMatrix) -> Self {
        let dim = left.nrows();
        Self { dim, kraus: self.kraus.iter().map(|v| left * v * right).collect(), superop: OnceLock::new() }
    }

    /// Matrix of `Φ*` in the real Hermitian basis of [`hermitian_coords`].
    pub fn real_dual_matrix(&self) -> DMatrix<f64> {
        let d = self.dim;
        let n = d * d;
        let mut out = DMatrix::zeros(n, n);
        for (m, e) in hermitian_basis(d).iter().enumerate() {
            out.set_column(m, &hermitian_coords(&self.schrodinger(e)));
        }
        out
    }
}

/// Orthonormal basis of the real space of `d×d` Hermitian matrices:
/// the diagonal units, then `(E_ij + E_ji)/√2` and `i(E_ij − E_ji)/√2` for `i < j`.
pub fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out: Vec<CMatrix> = (0..d)
        .map(|i| {
            let mut e = CMatrix::zeros(d, d);
            e[(i, i)] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    for i in 0..d {
        for j in i + 1..d {
            let mut s = CMatrix::zeros(d, d);
            s[(i, j)] = C64::new(r, 0.0);
            s[(j, i)] = C64::new(r, 0.0);
            let mut a = CMatrix::zeros(d, d);
            a[(i, j)] = C64::new(0.0, r);
            a[(j, i)] = C64::new(0.0, -r);
            out.push(s);
            out.push(a);
        }
    }
    out
}

/// Coordinates of a Hermitian matrix in [`hermitian_basis`].
pub fn hermitian_coords(x: &CMatrix) -> DVector<f64> {
    let d = x.nrows();
    let s = std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    out.extend((0..d).map(|i| x[(i, i)].re));
    for i in 0..d {
        for j in i + 1..d {
            out.push(s * x[(i, j)].re);
            out.push(s * x[(i, j)].im);
        }
    }
    DVector::from_vec(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::max_abs;

    fn sample_map() -> CPMap {
        let v1 = CMatrix::from_row_slice(2, 2, &[C64::new(0.3, 0.1), C64::new(0.0, 0.5), C64::new(-0.2, 0.0), C64::new(0.4, -0.3)]);
        let v2 = CMatrix::from_row_slice(2, 2, &[C64::new(0.1, 0.0), C64::new(0.7, 0.2), C64::new(0.0, 0.0), C64::new(-0.5, 0.1)]);
        CPMap::new(2, vec![v1, v2]).unwrap()
    }

    #[test]
    fn superoperator_acts_like_kraus_form_on_matrix_units() {
        let phi = sample_map();
        let s = phi.superoperator();
        for i in 0..2 {
            for j in 0..2 {
                let mut e = CMatrix::zeros(2, 2);
                e[(i, j)] = C64::new(1.0, 0.0);
                let direct = phi.heisenberg(&e);
                let col = s.column(i + 2 * j);
                let via = CMatrix::from_column_slice(2, 2, col.as_slice());
                assert!(max_abs(&(direct - via)) < 1e-12);
            }
        }
    }

    #[test]
    fn hermitian_coords_round_trip() {
        let x = CMatrix::from_row_slice(2, 2, &[C64::new(0.3, 0.0), C64::new(0.1, -0.4), C64::new(0.1, 0.4), C64::new(-1.0, 0.0)]);
        let c = hermitian_coords(&x);
        let back = hermitian_basis(2)
            .iter()
            .zip(c.iter())
            .fold(CMatrix::zeros(2, 2), |acc, (e, &w)| acc + e * C64::new(w, 0.0));
        assert!(max_abs(&(back - x)) < 1e-15);
    }

    #[test]
    fn real_dual_matrix_preserves_trace_pairing() {
        let phi = sample_map();
        let sigma = CMatrix::from_row_slice(2, 2, &[C64::new(0.6, 0.0), C64::new(0.1, 0.2), C64::new(0.1, -0.2), C64::new(0.4, 0.0)]);
        let out = &phi.real_dual_matrix() * hermitian_coords(&sigma);
        assert!((hermitian_coords(&phi.schrodinger(&sigma)) - out).amax() < 1e-15);
    }
}
