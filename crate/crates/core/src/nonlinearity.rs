//! The analytic nonlinearity family F(s, z) = a·s + b·sin(s) + h(z), with h
//! a real trigonometric polynomial on the torus.
//!
//! Every derivative the flow and the monitors need — F′ = a + b·cos(s),
//! F″ = −b·sin(s), ∇_z F = ∇h, F_{i j̄} = h_{i j̄}, and F′_i ≡ 0 (F′ does not
//! depend on z in this family) — is evaluated in closed form, never
//! numerically differentiated. The grid envelopes F̄(s) = a·s + b·sin(s) +
//! max h and F̲(s) (with min h) feed the C⁰ comparison ODEs, and
//! κ = sup|F′| over an interval has a closed form as well.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::FieldError;
use crate::field::{ComplexTensorField, HermitianField, IndexKind, ScalarField};
use crate::geometry::TorusGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigKind {
    Cos,
    Sin,
}

/// One term c·cos(2π m·u) or c·sin(2π m·u); `wave` lists the integer
/// frequencies along the real axes (x₁, y₁, …, x_n, y_n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub coeff: f64,
    pub wave: Vec<i32>,
    pub kind: TrigKind,
}

impl TrigTerm {
    fn phase(&self, coords: &[f64]) -> f64 {
        let dot: f64 = self
            .wave
            .iter()
            .zip(coords)
            .map(|(&m, &u)| m as f64 * u)
            .sum();
        2.0 * PI * dot
    }

    fn value(&self, coords: &[f64]) -> f64 {
        let th = self.phase(coords);
        match self.kind {
            TrigKind::Cos => self.coeff * th.cos(),
            TrigKind::Sin => self.coeff * th.sin(),
        }
    }

    /// w_j = π(m_{x_j} − i·m_{y_j}); the ∂_{z_j} factor of this term's
    /// complex exponentials.
    fn w(&self, j: usize) -> Complex64 {
        let mx = self.wave[2 * j] as f64;
        let my = self.wave[2 * j + 1] as f64;
        Complex64::new(PI * mx, -PI * my)
    }

    /// ∂_{z_j} of the term at `coords`.
    fn dz(&self, j: usize, coords: &[f64]) -> Complex64 {
        let th = self.phase(coords);
        match self.kind {
            TrigKind::Cos => -self.w(j) * (self.coeff * th.sin()),
            TrigKind::Sin => self.w(j) * (self.coeff * th.cos()),
        }
    }

    /// ∂_{z_i}∂_{z̄_j} of the term: −w_i·conj(w_j)·(term value).
    fn dz_dzbar(&self, i: usize, j: usize, coords: &[f64]) -> Complex64 {
        -self.w(i) * self.w(j).conj() * self.value(coords)
    }
}

/// Real trigonometric polynomial Σ terms.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrigPoly {
    pub terms: Vec<TrigTerm>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64, geom_axes: usize) -> Self {
        Self {
            terms: vec![TrigTerm {
                coeff: c,
                wave: vec![0; geom_axes],
                kind: TrigKind::Cos,
            }],
        }
    }

    /// Checks wave-vector arity and that every mode is below Nyquist for the
    /// grid, so closed-form and spectral evaluation agree exactly.
    pub fn validate(&self, geom: TorusGeometry) -> Result<(), FieldError> {
        let nyquist = (geom.grid() / 2) as i32;
        for t in &self.terms {
            if t.wave.len() != geom.axes() {
                return Err(FieldError::BadWaveVector {
                    got: t.wave.len(),
                    want: geom.axes(),
                });
            }
            if let Some(&m) = t.wave.iter().find(|m| m.abs() >= nyquist) {
                return Err(FieldError::ModeAboveNyquist { mode: m, nyquist });
            }
        }
        Ok(())
    }

    pub fn eval_at(&self, coords: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.value(coords)).sum()
    }

    pub fn eval_grid(&self, geom: TorusGeometry) -> ScalarField {
        // Term-by-term summation is exact but O(terms·points); for the large
        // random polynomials the equivalent band-limited synthesis through
        // the FFT is used (identical up to roundoff).
        if self.terms.len() < 64 {
            return ScalarField::from_fn(geom, |c| self.eval_at(c));
        }
        let mut spec = vec![Complex64::new(0.0, 0.0); geom.points()];
        for t in &self.terms {
            let k: Vec<i64> = t.wave.iter().map(|&m| m as i64).collect();
            let neg: Vec<i64> = k.iter().map(|&m| -m).collect();
            let half = match t.kind {
                TrigKind::Cos => Complex64::new(0.5 * t.coeff, 0.0),
                TrigKind::Sin => Complex64::new(0.0, -0.5 * t.coeff),
            };
            spec[crate::spectral::mode_bin(geom, &k)] += half;
            spec[crate::spectral::mode_bin(geom, &neg)] += half.conj();
        }
        ScalarField::from_vec_unchecked(geom, crate::spectral::synthesize_real(geom, spec))
    }

    /// Entrywise scaling of the coefficients.
    pub fn scaled(&self, a: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| TrigTerm {
                    coeff: a * t.coeff,
                    wave: t.wave.clone(),
                    kind: t.kind,
                })
                .collect(),
        }
    }

    /// Concatenation (sum) of two polynomials.
    pub fn plus(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { terms }
    }

    pub fn grad_z(&self, geom: TorusGeometry) -> ComplexTensorField {
        let mut out = ComplexTensorField::zeros(geom, vec![IndexKind::Holo]);
        for j in 0..geom.n() {
            let comp = out.component_mut(&[j]);
            for (p, v) in comp.iter_mut().enumerate() {
                let coords = geom.coords(p);
                *v = self
                    .terms
                    .iter()
                    .map(|t| t.dz(j, &coords[..geom.axes()]))
                    .sum();
            }
        }
        out
    }

    pub fn hess_z(&self, geom: TorusGeometry) -> HermitianField {
        let mut out = ComplexTensorField::zeros(geom, vec![IndexKind::Holo, IndexKind::AntiHolo]);
        for i in 0..geom.n() {
            for j in 0..geom.n() {
                let comp = out.component_mut(&[i, j]);
                for (p, v) in comp.iter_mut().enumerate() {
                    let coords = geom.coords(p);
                    *v = self
                        .terms
                        .iter()
                        .map(|t| t.dz_dzbar(i, j, &coords[..geom.axes()]))
                        .sum();
                }
            }
        }
        HermitianField::new(out).expect("closed-form trig Hessian is Hermitian")
    }

    /// Δ_g h = Σ_i h_{i ī} in closed form: each term picks up −π²|m|².
    pub fn laplacian_flat(&self, geom: TorusGeometry) -> ScalarField {
        ScalarField::from_fn(geom, |c| {
            self.terms
                .iter()
                .map(|t| {
                    let m2: f64 = t.wave.iter().map(|&m| (m as f64).powi(2)).sum();
                    -PI * PI * m2 * t.value(c)
                })
                .sum()
        })
    }

    pub fn extremes(&self, geom: TorusGeometry) -> (f64, f64) {
        if self.terms.is_empty() {
            return (0.0, 0.0);
        }
        let g = self.eval_grid(geom);
        (g.min_value(), g.max_value())
    }
}

/// F(s, z) = a·s + b·sin(s) + h(z).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nonlinearity {
    #[serde(rename = "a")]
    pub linear: f64,
    #[serde(rename = "b", default)]
    pub sine: f64,
    #[serde(rename = "h", default)]
    pub potential: TrigPoly,
}

impl Nonlinearity {
    pub fn new(linear: f64, sine: f64, potential: TrigPoly) -> Self {
        Self {
            linear,
            sine,
            potential,
        }
    }

    /// F(s, z) = a·s + b·sin(s), the z-independent part.
    pub fn base_at(&self, s: f64) -> f64 {
        self.linear * s + self.sine * s.sin()
    }

    /// F′(s) = a + b·cos(s).
    pub fn prime_at(&self, s: f64) -> f64 {
        self.linear + self.sine * s.cos()
    }

    /// F″(s) = −b·sin(s).
    pub fn double_prime_at(&self, s: f64) -> f64 {
        -self.sine * s.sin()
    }

    pub fn h_grid(&self, geom: TorusGeometry) -> ScalarField {
        self.potential.eval_grid(geom)
    }

    /// F(s(p), z_p) over the grid.
    pub fn value_field(&self, s: &ScalarField) -> ScalarField {
        let h = self.h_grid(s.geom());
        self.value_field_with_h(s, &h)
    }

    /// Same with a precomputed h grid (integrator hot path).
    pub fn value_field_with_h(&self, s: &ScalarField, h: &ScalarField) -> ScalarField {
        let vals = s
            .values()
            .iter()
            .zip(h.values())
            .map(|(&sv, &hv)| self.base_at(sv) + hv)
            .collect();
        ScalarField::from_vec_unchecked(s.geom(), vals)
    }

    pub fn prime_field(&self, s: &ScalarField) -> ScalarField {
        s.map_unchecked(|v| self.prime_at(v))
    }

    pub fn double_prime_field(&self, s: &ScalarField) -> ScalarField {
        s.map_unchecked(|v| self.double_prime_at(v))
    }

    /// ∇_z F = ∇h (rank-1 holomorphic).
    pub fn grad_z(&self, geom: TorusGeometry) -> ComplexTensorField {
        self.potential.grad_z(geom)
    }

    /// F_{i j̄} = h_{i j̄}.
    pub fn hess_z(&self, geom: TorusGeometry) -> HermitianField {
        self.potential.hess_z(geom)
    }

    /// ∇_z F′ ≡ 0 in this family (F′ is z-independent). The zero tensor is
    /// still produced so downstream contractions exercise the full formulas.
    pub fn prime_grad_z(&self, geom: TorusGeometry) -> ComplexTensorField {
        ComplexTensorField::zeros(geom, vec![IndexKind::Holo])
    }

    /// (min h, max h) over the grid.
    pub fn h_extremes(&self, geom: TorusGeometry) -> (f64, f64) {
        self.potential.extremes(geom)
    }

    /// F̄(s) = a·s + b·sin(s) + max_grid h.
    pub fn upper_envelope(&self, s: f64, h_max: f64) -> f64 {
        self.base_at(s) + h_max
    }

    /// F̲(s) = a·s + b·sin(s) + min_grid h.
    pub fn lower_envelope(&self, s: f64, h_min: f64) -> f64 {
        self.base_at(s) + h_min
    }

    /// κ = sup of |F′| over [lo, hi] (endpoints and interior cosine extrema).
    pub fn sup_abs_prime(&self, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let mut m = self
            .prime_at(lo)
            .abs()
            .max(self.prime_at(hi).abs());
        let k0 = (lo / PI).ceil();
        let k1 = (hi / PI).floor();
        if k1 - k0 > 64.0 {
            // Interval spans many periods; the extrema are attained.
            return (self.linear.abs() + self.sine.abs()).max(m);
        }
        let mut k = k0;
        while k <= k1 {
            let c = if (k as i64) % 2 == 0 { 1.0 } else { -1.0 };
            m = m.max((self.linear + self.sine * c).abs());
            k += 1.0;
        }
        m
    }

    pub fn validate(&self, geom: TorusGeometry) -> Result<(), FieldError> {
        self.potential.validate(geom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn g1() -> TorusGeometry {
        TorusGeometry::new(1, 32).unwrap()
    }

    fn cos_h(coeff: f64) -> TrigPoly {
        TrigPoly {
            terms: vec![TrigTerm {
                coeff,
                wave: vec![1, 0],
                kind: TrigKind::Cos,
            }],
        }
    }

    #[test]
    fn linear_family_values() {
        // a=1, b=0, h=0, s ≡ 0.3 → F ≡ 0.3, F′ ≡ 1, F″ ≡ 0.
        let f = Nonlinearity::new(1.0, 0.0, TrigPoly::zero());
        let s = ScalarField::constant(g1(), 0.3);
        assert!(f.value_field(&s).sup_abs_diff(&s) < 1e-15);
        assert_eq!(f.prime_field(&s).values()[0], 1.0);
        assert_eq!(f.double_prime_field(&s).values()[0], 0.0);
    }

    #[test]
    fn sine_family_at_zero() {
        // a=0, b=1, h=0, s ≡ 0 → F ≡ 0, F′ ≡ 1, F″ ≡ 0.
        let f = Nonlinearity::new(0.0, 1.0, TrigPoly::zero());
        let s = ScalarField::zeros(g1());
        assert_eq!(f.value_field(&s).sup_abs(), 0.0);
        assert_eq!(f.prime_field(&s).values()[0], 1.0);
        assert_eq!(f.double_prime_field(&s).values()[0], 0.0);
    }

    #[test]
    fn hess_z_analytic_values() {
        // h = 0.01·cos(2πx): h_zz̄(0) = −0.01π² = −0.098696.
        let f = Nonlinearity::new(1.0, 0.0, cos_h(0.01));
        let hz = f.hess_z(g1());
        assert_abs_diff_eq!(hz.entry(0, 0)[0].re, -0.098696, epsilon = 1e-6);
        // Same with coefficient 0.1: −0.1π² = −0.986960.
        let f = Nonlinearity::new(1.0, 0.0, cos_h(0.1));
        let hz = f.hess_z(g1());
        assert_abs_diff_eq!(hz.entry(0, 0)[0].re, -0.986960, epsilon = 1e-6);
    }

    #[test]
    fn closed_form_matches_spectral_route() {
        // Dual route: closed-form grad/hess of h against spectral derivatives
        // of the gridded h.
        let geom = TorusGeometry::new(2, 8).unwrap();
        let h = TrigPoly {
            terms: vec![
                TrigTerm {
                    coeff: 0.4,
                    wave: vec![1, 0, 0, 0],
                    kind: TrigKind::Cos,
                },
                TrigTerm {
                    coeff: -0.2,
                    wave: vec![0, 2, 1, 0],
                    kind: TrigKind::Sin,
                },
                TrigTerm {
                    coeff: 0.1,
                    wave: vec![0, 0, 0, 3],
                    kind: TrigKind::Cos,
                },
            ],
        };
        h.validate(geom).unwrap();
        let grid = h.eval_grid(geom);
        let spectral_grad = crate::spectral::gradient(&grid);
        let exact_grad = h.grad_z(geom);
        assert!(spectral_grad.sup_abs_diff(&exact_grad) < 1e-12);
        let spectral_hess = crate::spectral::hessian(&grid);
        let exact_hess = h.hess_z(geom);
        assert!(spectral_hess.sup_abs_diff(&exact_hess) < 1e-11);
        let lap = h.laplacian_flat(geom);
        assert!(lap.sup_abs_diff(&crate::spectral::laplacian_flat(&grid)) < 1e-11);
    }

    #[test]
    fn envelopes_use_grid_extremes() {
        let f = Nonlinearity::new(1.0, 0.5, cos_h(0.5));
        let (hmin, hmax) = f.h_extremes(g1());
        assert_abs_diff_eq!(hmax, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(hmin, -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(
            f.upper_envelope(0.2, hmax),
            0.2 + 0.5 * (0.2f64).sin() + 0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn kappa_closed_form() {
        let f = Nonlinearity::new(1.0, 0.0, TrigPoly::zero());
        assert_eq!(f.sup_abs_prime(-3.0, 5.0), 1.0);
        let f = Nonlinearity::new(0.0, 1.0, TrigPoly::zero());
        assert_eq!(f.sup_abs_prime(-1.0, 1.0), 1.0); // cos(0) = 1 inside
        let f = Nonlinearity::new(1.0, -2.0, TrigPoly::zero());
        // [0, 4] contains π where F′ = 1 − 2·(−1) = 3.
        assert_abs_diff_eq!(f.sup_abs_prime(0.0, 4.0), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn prime_grad_is_zero_tensor() {
        let f = Nonlinearity::new(1.0, 2.0, cos_h(0.3));
        assert_eq!(f.prime_grad_z(g1()).sup_abs(), 0.0);
    }

    #[test]
    fn fft_synthesis_matches_term_summation() {
        // Above the term threshold, eval_grid routes through the FFT; both
        // routes agree to roundoff.
        let geom = TorusGeometry::new(1, 32).unwrap();
        let poly = crate::rough::random_rough_trig_poly(geom, 3, 0.5).unwrap();
        assert!(poly.terms.len() >= 64);
        let fast = poly.eval_grid(geom);
        let slow = ScalarField::from_fn(geom, |c| poly.eval_at(c));
        assert!(fast.sup_abs_diff(&slow) < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_waves() {
        let geom = g1();
        let bad_arity = TrigPoly {
            terms: vec![TrigTerm {
                coeff: 1.0,
                wave: vec![1],
                kind: TrigKind::Cos,
            }],
        };
        assert!(bad_arity.validate(geom).is_err());
        let bad_mode = TrigPoly {
            terms: vec![TrigTerm {
                coeff: 1.0,
                wave: vec![16, 0],
                kind: TrigKind::Cos,
            }],
        };
        assert!(bad_mode.validate(geom).is_err());
    }
}
