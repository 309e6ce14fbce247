//! Field storage: real scalar grid functions and complex tensor-valued grid
//! functions.
//!
//! Fields are immutable values after construction (the few in-place helpers
//! take `&mut self` and are used inside tight integrator loops). Periodicity
//! is structural: there are no ghost cells, every transform and stencil
//! wraps.

use num_complex::Complex64;

use crate::error::FieldError;
use crate::geometry::TorusGeometry;
use crate::util::kahan_sum;

/// Real-valued periodic grid function (potentials, densities, monitors).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    geom: TorusGeometry,
    values: Vec<f64>,
}

impl ScalarField {
    /// Builds a field from raw values, rejecting length mismatches and
    /// non-finite entries (the diagnostic names the first offending index).
    pub fn new(geom: TorusGeometry, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != geom.points() {
            return Err(FieldError::LengthMismatch {
                got: values.len(),
                want: geom.points(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(FieldError::NonFinite {
                index,
                multi: geom.decompose(index)[..geom.axes()].to_vec(),
                value,
            });
        }
        Ok(Self { geom, values })
    }

    /// Internal constructor for values produced by trusted numerics.
    pub(crate) fn from_vec_unchecked(geom: TorusGeometry, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), geom.points());
        Self { geom, values }
    }

    pub fn zeros(geom: TorusGeometry) -> Self {
        Self::from_vec_unchecked(geom, vec![0.0; geom.points()])
    }

    pub fn constant(geom: TorusGeometry, v: f64) -> Self {
        Self::from_vec_unchecked(geom, vec![v; geom.points()])
    }

    /// Samples a function of the real coordinates (x₁, y₁, …, x_n, y_n).
    pub fn from_fn(geom: TorusGeometry, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..geom.points())
            .map(|p| f(&geom.coords(p)[..geom.axes()]))
            .collect();
        Self::from_vec_unchecked(geom, values)
    }

    pub fn geom(&self) -> TorusGeometry {
        self.geom
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid mean, equal to the integral over the unit-volume torus.
    /// Compensated serial summation: deterministic and accurate.
    pub fn mean(&self) -> f64 {
        kahan_sum(self.values.iter().copied()) / self.len() as f64
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Pointwise map; the result is validated.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self, FieldError> {
        Self::new(self.geom, self.values.iter().map(|&v| f(v)).collect())
    }

    pub(crate) fn map_unchecked(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_vec_unchecked(self.geom, self.values.iter().map(|&v| f(v)).collect())
    }

    fn check_geom(&self, other: &Self) {
        assert_eq!(
            self.geom, other.geom,
            "fields live on different grids; this is a programming error"
        );
    }

    /// self + a·x, as a new field.
    pub fn add_scaled(&self, a: f64, x: &Self) -> Self {
        self.check_geom(x);
        let values = self
            .values
            .iter()
            .zip(&x.values)
            .map(|(s, t)| s + a * t)
            .collect();
        Self::from_vec_unchecked(self.geom, values)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(-1.0, other)
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map_unchecked(|v| a * v)
    }

    pub fn shifted(&self, c: f64) -> Self {
        self.map_unchecked(|v| v + c)
    }

    /// In-place self += a·x (integrator hot path).
    pub fn axpy(&mut self, a: f64, x: &Self) {
        self.check_geom(x);
        for (s, t) in self.values.iter_mut().zip(&x.values) {
            *s += a * t;
        }
    }

    pub fn sup_abs_diff(&self, other: &Self) -> f64 {
        self.check_geom(other);
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Index variance of a tensor slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    /// Holomorphic index (∂/∂z_j).
    Holo,
    /// Antiholomorphic index (∂/∂z̄_j).
    AntiHolo,
}

/// Complex tensor-valued grid function. Rank 0 is a plain complex grid
/// function; each index ranges over the n complex coordinates. Components
/// are stored contiguously, component-major, addressed row-major in the
/// index list.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTensorField {
    geom: TorusGeometry,
    kinds: Vec<IndexKind>,
    data: Vec<Complex64>,
}

impl ComplexTensorField {
    pub(crate) fn from_parts(
        geom: TorusGeometry,
        kinds: Vec<IndexKind>,
        data: Vec<Complex64>,
    ) -> Self {
        debug_assert_eq!(data.len(), geom.n().pow(kinds.len() as u32) * geom.points());
        Self { geom, kinds, data }
    }

    pub fn zeros(geom: TorusGeometry, kinds: Vec<IndexKind>) -> Self {
        let len = geom.n().pow(kinds.len() as u32) * geom.points();
        Self::from_parts(geom, kinds, vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn geom(&self) -> TorusGeometry {
        self.geom
    }

    pub fn rank(&self) -> usize {
        self.kinds.len()
    }

    pub fn kinds(&self) -> &[IndexKind] {
        &self.kinds
    }

    pub fn components(&self) -> usize {
        self.geom.n().pow(self.rank() as u32)
    }

    fn component_offset(&self, comp: &[usize]) -> usize {
        assert_eq!(comp.len(), self.rank(), "component index rank mismatch");
        let n = self.geom.n();
        let mut flat = 0usize;
        for &c in comp {
            debug_assert!(c < n);
            flat = flat * n + c;
        }
        flat * self.geom.points()
    }

    /// Grid values of one component.
    pub fn component(&self, comp: &[usize]) -> &[Complex64] {
        let off = self.component_offset(comp);
        &self.data[off..off + self.geom.points()]
    }

    pub(crate) fn component_mut(&mut self, comp: &[usize]) -> &mut [Complex64] {
        let off = self.component_offset(comp);
        let pts = self.geom.points();
        &mut self.data[off..off + pts]
    }

    /// Rank-0 accessor.
    pub fn scalar_values(&self) -> &[Complex64] {
        assert_eq!(self.rank(), 0, "scalar_values needs a rank-0 tensor");
        &self.data
    }

    pub fn sup_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    /// Max over grid and components of |self − other|.
    pub fn sup_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.geom, other.geom);
        assert_eq!(self.kinds, other.kinds);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Grid mean of each component (used by the spectral mean-preservation
    /// tests).
    pub fn component_mean(&self, comp: &[usize]) -> Complex64 {
        let vals = self.component(comp);
        let re = kahan_sum(vals.iter().map(|c| c.re)) / vals.len() as f64;
        let im = kahan_sum(vals.iter().map(|c| c.im)) / vals.len() as f64;
        Complex64::new(re, im)
    }
}

/// Hermitian (1,1)-tensor field: entry (i, j) holds T_{i j̄} and
/// T_{i j̄} = conj(T_{j ī}) pointwise.
///
/// Construction verifies the symmetry to 1e−12 (relative to the field's
/// scale) and then stores the exactly symmetrized values.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianField {
    tensor: ComplexTensorField,
}

impl HermitianField {
    pub const SYMMETRY_TOL: f64 = 1e-12;

    pub fn new(tensor: ComplexTensorField) -> Result<Self, FieldError> {
        if tensor.rank() != 2 {
            return Err(FieldError::RankMismatch {
                expected: 2,
                got: tensor.rank(),
            });
        }
        let n = tensor.geom.n();
        let pts = tensor.geom.points();
        let scale = tensor.sup_abs().max(1.0);
        let tol = Self::SYMMETRY_TOL * scale;
        let mut tensor = tensor;
        for i in 0..n {
            for j in i..n {
                if i == j {
                    let comp = tensor.component_mut(&[i, i]);
                    for (p, v) in comp.iter_mut().enumerate() {
                        if v.im.abs() > tol {
                            return Err(FieldError::NotHermitian {
                                index: p,
                                asymmetry: v.im.abs(),
                                tol,
                            });
                        }
                        *v = Complex64::new(v.re, 0.0);
                    }
                } else {
                    let upper: Vec<Complex64> = tensor.component(&[i, j]).to_vec();
                    let lower: Vec<Complex64> = tensor.component(&[j, i]).to_vec();
                    let mut sym_upper = Vec::with_capacity(pts);
                    for p in 0..pts {
                        let a = upper[p];
                        let b = lower[p].conj();
                        let asym = (a - b).norm();
                        if asym > tol {
                            return Err(FieldError::NotHermitian {
                                index: p,
                                asymmetry: asym,
                                tol,
                            });
                        }
                        sym_upper.push(0.5 * (a + b));
                    }
                    tensor
                        .component_mut(&[i, j])
                        .copy_from_slice(&sym_upper);
                    let conj: Vec<Complex64> = sym_upper.iter().map(|c| c.conj()).collect();
                    tensor.component_mut(&[j, i]).copy_from_slice(&conj);
                }
            }
        }
        Ok(Self { tensor })
    }

    /// Identity matrix at every grid point.
    pub fn identity(geom: TorusGeometry) -> Self {
        let mut t = ComplexTensorField::zeros(geom, vec![IndexKind::Holo, IndexKind::AntiHolo]);
        for i in 0..geom.n() {
            for v in t.component_mut(&[i, i]) {
                *v = Complex64::new(1.0, 0.0);
            }
        }
        Self { tensor: t }
    }

    pub fn geom(&self) -> TorusGeometry {
        self.tensor.geom
    }

    pub fn tensor(&self) -> &ComplexTensorField {
        &self.tensor
    }

    pub fn entry(&self, i: usize, j: usize) -> &[Complex64] {
        self.tensor.component(&[i, j])
    }

    pub(crate) fn entry_mut(&mut self, i: usize, j: usize) -> &mut [Complex64] {
        self.tensor.component_mut(&[i, j])
    }

    /// Matrix at grid point `p` as a dense [row][col] array (n ≤ 2).
    pub fn matrix_at(&self, p: usize) -> [[Complex64; 2]; 2] {
        let n = self.geom().n();
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..n {
            for j in 0..n {
                m[i][j] = self.tensor.component(&[i, j])[p];
            }
        }
        m
    }

    pub fn sup_abs(&self) -> f64 {
        self.tensor.sup_abs()
    }

    pub fn sup_abs_diff(&self, other: &Self) -> f64 {
        self.tensor.sup_abs_diff(&other.tensor)
    }

    /// self + a·other, entrywise.
    pub fn add_scaled(&self, a: f64, other: &Self) -> Self {
        assert_eq!(self.geom(), other.geom());
        let mut t = self.tensor.clone();
        for (x, y) in t.data.iter_mut().zip(&other.tensor.data) {
            *x += a * y;
        }
        Self { tensor: t }
    }

    /// a·self, entrywise.
    pub fn scaled(&self, a: f64) -> Self {
        let mut t = self.tensor.clone();
        for x in t.data.iter_mut() {
            *x *= a;
        }
        Self { tensor: t }
    }

    /// Real trace field Σ_i T_{i ī}.
    pub fn trace(&self) -> ScalarField {
        let geom = self.geom();
        let mut tr = vec![0.0; geom.points()];
        for i in 0..geom.n() {
            for (t, v) in tr.iter_mut().zip(self.entry(i, i)) {
                *t += v.re;
            }
        }
        ScalarField::from_vec_unchecked(geom, tr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom() -> TorusGeometry {
        TorusGeometry::new(1, 8).unwrap()
    }

    #[test]
    fn scalar_field_rejects_nonfinite_with_index() {
        let g = geom();
        let mut vals = vec![0.0; g.points()];
        vals[13] = f64::NAN;
        match ScalarField::new(g, vals) {
            Err(FieldError::NonFinite { index, multi, .. }) => {
                assert_eq!(index, 13);
                assert_eq!(multi, vec![1, 5]);
            }
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn scalar_field_rejects_wrong_length() {
        let g = geom();
        assert!(matches!(
            ScalarField::new(g, vec![0.0; 3]),
            Err(FieldError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn mean_of_constant() {
        let f = ScalarField::constant(geom(), 2.5);
        assert_eq!(f.mean(), 2.5);
        assert_eq!(f.sup_abs(), 2.5);
    }

    #[test]
    fn hermitian_verification_and_symmetrization() {
        let g = TorusGeometry::new(2, 4).unwrap();
        let mut t = ComplexTensorField::zeros(g, vec![IndexKind::Holo, IndexKind::AntiHolo]);
        for v in t.component_mut(&[0, 1]) {
            *v = Complex64::new(0.25, 0.5);
        }
        for v in t.component_mut(&[1, 0]) {
            *v = Complex64::new(0.25, -0.5);
        }
        let h = HermitianField::new(t.clone()).unwrap();
        assert_eq!(h.entry(0, 1)[0], Complex64::new(0.25, 0.5));

        // Break the symmetry beyond tolerance.
        for v in t.component_mut(&[1, 0]) {
            *v = Complex64::new(0.25, -0.5 + 1e-6);
        }
        assert!(matches!(
            HermitianField::new(t),
            Err(FieldError::NotHermitian { .. })
        ));
    }

    #[test]
    fn hermitian_rejects_imaginary_diagonal() {
        let g = geom();
        let mut t = ComplexTensorField::zeros(g, vec![IndexKind::Holo, IndexKind::AntiHolo]);
        t.component_mut(&[0, 0])[3] = Complex64::new(1.0, 1e-3);
        assert!(matches!(
            HermitianField::new(t),
            Err(FieldError::NotHermitian { index: 3, .. })
        ));
    }

    #[test]
    fn trace_of_identity_is_n() {
        let g = TorusGeometry::new(2, 4).unwrap();
        let id = HermitianField::identity(g);
        let tr = id.trace();
        assert!(tr.values().iter().all(|&v| (v - 2.0).abs() < 1e-15));
    }
}
