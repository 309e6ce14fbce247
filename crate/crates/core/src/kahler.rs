//! Pointwise Kähler-metric algebra for g_φ = g + ∂∂̄φ on the flat torus.
//!
//! The background g is the identity, so (g_φ)_{i j̄} = δ_{ij} + φ_{i j̄} and
//! the Monge-Ampère density (ω + √−1∂∂̄φ)ⁿ/ωⁿ is just det(g_φ). With n ≤ 2
//! the determinant, inverse, and eigenvalues have closed 2×2 forms.
//!
//! Index bookkeeping: a Hermitian field stores G[i][j] = g_{i j̄}; the
//! inverse metric with raised indices is g^{i j̄} = conj(G⁻¹)[i][j], which
//! gives Δ_φ f = g^{i j̄} f_{i j̄} = tr(G⁻¹·F) for the Hessian matrix F of f,
//! and |T|²_{g_φ} = tr((G⁻¹T)²) for Hermitian T.

use num_complex::Complex64;

use crate::error::MetricError;
use crate::field::{HermitianField, ScalarField};
use crate::geometry::TorusGeometry;
use crate::nonlinearity::Nonlinearity;
use crate::spectral;

/// Default positivity floor for metric construction; far below any physical
/// eigenvalue in the experiments, so it only triggers on genuine cone exit.
pub const DEFAULT_PD_FLOOR: f64 = 1e-8;

/// Positive-definite Hermitian metric field g_φ with cached determinant and
/// smallest eigenvalue.
#[derive(Debug, Clone)]
pub struct MetricField {
    h: HermitianField,
    det: ScalarField,
    min_eig: f64,
    min_eig_index: usize,
}

/// g_φ = δ + Hess φ with the default positivity floor.
pub fn metric_from_potential(phi: &ScalarField) -> Result<MetricField, MetricError> {
    metric_from_potential_with_floor(phi, DEFAULT_PD_FLOOR)
}

pub fn metric_from_potential_with_floor(
    phi: &ScalarField,
    floor: f64,
) -> Result<MetricField, MetricError> {
    let geom = phi.geom();
    let mut h = spectral::hessian(phi);
    for i in 0..geom.n() {
        for v in h.entry_mut(i, i) {
            *v += 1.0;
        }
    }
    MetricField::from_hermitian_with_floor(h, floor)
}

fn det_and_min_eig(h: &HermitianField) -> (Vec<f64>, f64, usize) {
    let geom = h.geom();
    let pts = geom.points();
    let mut det = vec![0.0; pts];
    let mut min_eig = f64::INFINITY;
    let mut min_eig_index = 0usize;
    match geom.n() {
        1 => {
            let d = h.entry(0, 0);
            for p in 0..pts {
                let v = d[p].re;
                det[p] = v;
                if v < min_eig {
                    min_eig = v;
                    min_eig_index = p;
                }
            }
        }
        _ => {
            let a = h.entry(0, 0);
            let b = h.entry(0, 1);
            let c = h.entry(1, 1);
            for p in 0..pts {
                let (aa, cc) = (a[p].re, c[p].re);
                let bsq = b[p].norm_sqr();
                det[p] = aa * cc - bsq;
                let disc = ((aa - cc).powi(2) + 4.0 * bsq).sqrt();
                let lam = 0.5 * (aa + cc - disc);
                if lam < min_eig {
                    min_eig = lam;
                    min_eig_index = p;
                }
            }
        }
    }
    (det, min_eig, min_eig_index)
}

/// Smallest eigenvalue of δ + Hess φ over the grid, with no positivity
/// demanded (scaling searches, safeguard probes).
pub fn min_metric_eigenvalue(phi: &ScalarField) -> f64 {
    let geom = phi.geom();
    let mut h = spectral::hessian(phi);
    for i in 0..geom.n() {
        for v in h.entry_mut(i, i) {
            *v += 1.0;
        }
    }
    det_and_min_eig(&h).1
}

/// Rescales φ by bisection until the metric's smallest eigenvalue is at
/// least `target` (and within bisection resolution of it, unless φ already
/// satisfies the bound). Returns (scale, scale·φ).
pub fn scale_to_cone(phi: &ScalarField, target: f64) -> (f64, ScalarField) {
    assert!(
        target > 0.0 && target < 1.0,
        "cone target must lie in (0, 1), got {target}"
    );
    if min_metric_eigenvalue(phi) >= target {
        return (1.0, phi.clone());
    }
    let mut lo = 0.0f64; // min eig 1 at scale 0
    let mut hi = 1.0f64;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if min_metric_eigenvalue(&phi.scaled(mid)) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, phi.scaled(lo))
}

impl MetricField {
    /// Wraps an explicitly-given Hermitian field (tests, monitors).
    pub fn from_hermitian_with_floor(
        h: HermitianField,
        floor: f64,
    ) -> Result<Self, MetricError> {
        let geom = h.geom();
        let (det, min_eig, min_eig_index) = det_and_min_eig(&h);
        if !(min_eig > floor) {
            return Err(MetricError::NotPositive {
                index: min_eig_index,
                multi: geom.decompose(min_eig_index)[..geom.axes()].to_vec(),
                value: min_eig,
                floor,
            });
        }
        Ok(Self {
            h,
            det: ScalarField::from_vec_unchecked(geom, det),
            min_eig,
            min_eig_index,
        })
    }

    pub fn geom(&self) -> TorusGeometry {
        self.h.geom()
    }

    pub fn hermitian(&self) -> &HermitianField {
        &self.h
    }

    /// det(g_φ)/det(g) = det(g_φ); strictly positive.
    pub fn det_ratio(&self) -> &ScalarField {
        &self.det
    }

    /// Exact smallest eigenvalue over all grid points.
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eig
    }

    pub fn min_eigenvalue_location(&self) -> usize {
        self.min_eig_index
    }

    /// (tr_g g_φ, tr_{g_φ} g): trace of the matrix and trace of its inverse.
    pub fn traces(&self) -> (ScalarField, ScalarField) {
        let geom = self.geom();
        let tr = self.h.trace();
        let pts = geom.points();
        let mut tr_inv = vec![0.0; pts];
        match geom.n() {
            1 => {
                for (t, d) in tr_inv.iter_mut().zip(self.det.values()) {
                    *t = 1.0 / d;
                }
            }
            _ => {
                for p in 0..pts {
                    tr_inv[p] = tr.values()[p] / self.det.values()[p];
                }
            }
        }
        (tr, ScalarField::from_vec_unchecked(geom, tr_inv))
    }

    /// sup over the grid of tr_{g_φ} g (the explicit-CFL stiffness bound),
    /// computed without building the trace fields.
    pub fn sup_trace_inverse(&self) -> f64 {
        match self.geom().n() {
            1 => 1.0 / self.min_eig,
            _ => {
                let tr = self.h.entry(0, 0);
                let tr2 = self.h.entry(1, 1);
                let det = self.det.values();
                let mut sup = 0.0f64;
                for p in 0..det.len() {
                    sup = sup.max((tr[p].re + tr2[p].re) / det[p]);
                }
                sup
            }
        }
    }

    /// Inverse matrix G⁻¹ at grid point `p` (dense [row][col], n ≤ 2).
    pub fn inverse_matrix_at(&self, p: usize) -> [[Complex64; 2]; 2] {
        let zero = Complex64::new(0.0, 0.0);
        let mut inv = [[zero; 2]; 2];
        match self.geom().n() {
            1 => {
                inv[0][0] = Complex64::new(1.0 / self.det.values()[p], 0.0);
            }
            _ => {
                let m = self.h.matrix_at(p);
                let d = self.det.values()[p];
                inv[0][0] = m[1][1] / d;
                inv[1][1] = m[0][0] / d;
                inv[0][1] = -m[0][1] / d;
                inv[1][0] = -m[1][0] / d;
            }
        }
        inv
    }

    /// Lower-triangular Cholesky factor L of G⁻¹ (so G⁻¹ = L·L^†); used to
    /// evaluate metric norms as manifest sums of squares.
    pub fn inverse_cholesky_at(&self, p: usize) -> [[Complex64; 2]; 2] {
        let zero = Complex64::new(0.0, 0.0);
        let mut l = [[zero; 2]; 2];
        let inv = self.inverse_matrix_at(p);
        match self.geom().n() {
            1 => {
                l[0][0] = Complex64::new(inv[0][0].re.sqrt(), 0.0);
            }
            _ => {
                let l00 = inv[0][0].re.sqrt();
                l[0][0] = Complex64::new(l00, 0.0);
                l[1][0] = inv[1][0] / l00;
                l[1][1] = Complex64::new((inv[1][1].re - l[1][0].norm_sqr()).sqrt(), 0.0);
            }
        }
        l
    }

    /// Δ_φ f = g_φ^{i j̄} f_{i j̄} = tr(G⁻¹ · Hess f) pointwise.
    pub fn laplacian_wrt(&self, f: &ScalarField) -> ScalarField {
        let geom = self.geom();
        assert_eq!(geom, f.geom(), "laplacian_wrt: geometry mismatch");
        let hess = spectral::hessian(f);
        let pts = geom.points();
        let mut out = vec![0.0; pts];
        match geom.n() {
            1 => {
                let f00 = hess.entry(0, 0);
                for p in 0..pts {
                    out[p] = f00[p].re / self.det.values()[p];
                }
            }
            _ => {
                for p in 0..pts {
                    let inv = self.inverse_matrix_at(p);
                    let fm = hess.matrix_at(p);
                    let mut s = Complex64::new(0.0, 0.0);
                    for i in 0..2 {
                        for j in 0..2 {
                            s += inv[i][j] * fm[j][i];
                        }
                    }
                    out[p] = s.re;
                }
            }
        }
        ScalarField::from_vec_unchecked(geom, out)
    }

    /// Ric(g_φ)_{i j̄} = −∂_i∂_{j̄} log det(g_φ) and its pointwise norm
    /// |Ric|_{g_φ} = sqrt(tr((G⁻¹·Ric)²)) ≥ 0.
    pub fn ricci(&self) -> (HermitianField, ScalarField) {
        let log_det = self.det.map_unchecked(f64::ln);
        let ric = spectral::hessian(&log_det).scaled(-1.0);
        let norm = self.hermitian_norm(&ric);
        (ric, norm)
    }

    /// |T|_{g_φ} pointwise for a Hermitian (1,1) field T, as a manifest sum
    /// of squares via the Cholesky factor of G⁻¹.
    pub fn hermitian_norm(&self, t: &HermitianField) -> ScalarField {
        let geom = self.geom();
        assert_eq!(geom, t.geom());
        let n = geom.n();
        let pts = geom.points();
        let mut out = vec![0.0; pts];
        for p in 0..pts {
            let l = self.inverse_cholesky_at(p);
            let tm = t.matrix_at(p);
            // T̃[a][b] = Σ_{ij} conj(L[i][a])·L[j][b]·T[i][j]; |T|² = Σ|T̃|².
            let mut sum = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i in 0..n {
                        for j in 0..n {
                            acc += l[i][a].conj() * l[j][b] * tm[i][j];
                        }
                    }
                    sum += acc.norm_sqr();
                }
            }
            out[p] = sum.sqrt();
        }
        ScalarField::from_vec_unchecked(geom, out)
    }
}

/// Δ_g F(φ, z) assembled from the chain-rule expansion
/// Δ_g h + 2Re(g^{i j̄} F′_i φ_{j̄}) + F′·Δ_g φ + F″·|∇φ|²_g
/// (background g is the identity; F′_i ≡ 0 in the supported family but the
/// term is contracted anyway).
pub fn laplacian_of_composition(phi: &ScalarField, f: &Nonlinearity) -> ScalarField {
    let geom = phi.geom();
    let term_h = f.potential.laplacian_flat(geom);
    let grad_phi = spectral::gradient(phi);
    let prime_grad = f.prime_grad_z(geom);
    let mut cross = vec![0.0; geom.points()];
    for i in 0..geom.n() {
        let pg = prime_grad.component(&[i]);
        let gp = grad_phi.component(&[i]);
        for (c, (a, b)) in cross.iter_mut().zip(pg.iter().zip(gp)) {
            *c += 2.0 * (a * b.conj()).re;
        }
    }
    let term_cross = ScalarField::from_vec_unchecked(geom, cross);
    let lap_phi = spectral::laplacian_flat(phi);
    let prime = f.prime_field(phi);
    let dprime = f.double_prime_field(phi);
    let beta = spectral::grad_norm_sq(phi);
    let vals = (0..geom.points())
        .map(|p| {
            term_h.values()[p]
                + term_cross.values()[p]
                + prime.values()[p] * lap_phi.values()[p]
                + dprime.values()[p] * beta.values()[p]
        })
        .collect();
    ScalarField::from_vec_unchecked(geom, vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ComplexTensorField, IndexKind};
    use crate::nonlinearity::{TrigKind, TrigPoly, TrigTerm};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn g1(n: usize) -> TorusGeometry {
        TorusGeometry::new(1, n).unwrap()
    }

    fn cos_phi(geom: TorusGeometry, amp: f64) -> ScalarField {
        ScalarField::from_fn(geom, |c| amp * (2.0 * PI * c[0]).cos())
    }

    fn separable_phi(geom: TorusGeometry, amp: f64) -> ScalarField {
        ScalarField::from_fn(geom, |c| {
            amp * (2.0 * PI * c[0]).cos() + amp * (2.0 * PI * c[2]).cos()
        })
    }

    #[test]
    fn zero_potential_gives_identity_metric() {
        let m = metric_from_potential(&ScalarField::zeros(g1(16))).unwrap();
        assert_eq!(m.min_eigenvalue(), 1.0);
        assert!(m.det_ratio().sup_abs_diff(&ScalarField::constant(g1(16), 1.0)) < 1e-14);
    }

    #[test]
    fn metric_analytic_value_and_rejection() {
        // φ = 0.05·cos(2πx): g_φ(0) = 1 − 0.05π² = 0.506520.
        let m = metric_from_potential(&cos_phi(g1(64), 0.05)).unwrap();
        assert_abs_diff_eq!(m.det_ratio().values()[0], 1.0 - 0.05 * PI * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(m.det_ratio().values()[0], 0.506520, epsilon = 1e-6);
        assert_abs_diff_eq!(m.min_eigenvalue(), 0.506520, epsilon = 1e-6);
        assert_eq!(m.min_eigenvalue_location(), 0);

        // φ = 0.2·cos(2πx): 1 − 0.2π² < 0 → rejected with location and value.
        match metric_from_potential(&cos_phi(g1(64), 0.2)) {
            Err(MetricError::NotPositive { value, index, .. }) => {
                assert!(value < 0.0);
                assert_eq!(index, 0);
            }
            other => panic!("expected NotPositive, got {other:?}"),
        }
    }

    #[test]
    fn det_log_matches_oracle() {
        let m = metric_from_potential(&cos_phi(g1(64), 0.05)).unwrap();
        let log_det = m.det_ratio().map_unchecked(f64::ln);
        assert_abs_diff_eq!(log_det.values()[0], -0.680191, epsilon = 1e-6);
    }

    #[test]
    fn separable_det_and_traces() {
        let geom = TorusGeometry::new(2, 16).unwrap();
        let m = metric_from_potential(&separable_phi(geom, 0.05)).unwrap();
        // At the origin: det = 0.506520² = 0.256563; traces (1.013040, 3.948514).
        assert_abs_diff_eq!(m.det_ratio().values()[0], 0.256563, epsilon = 1e-6);
        let (tr, tr_inv) = m.traces();
        assert_abs_diff_eq!(tr.values()[0], 1.013040, epsilon = 1e-6);
        assert_abs_diff_eq!(tr_inv.values()[0], 3.948514, epsilon = 1e-6);
        // Identity metric → (n, n).
        let id = metric_from_potential(&ScalarField::zeros(geom)).unwrap();
        let (t0, t1) = id.traces();
        assert_abs_diff_eq!(t0.values()[7], 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(t1.values()[7], 2.0, epsilon = 1e-13);
    }

    #[test]
    fn constant_matrix_min_eigenvalue() {
        // [[1.25, 0.25], [0.25, 1.25]] → eigenvalues {1.0, 1.5}.
        let geom = TorusGeometry::new(2, 4).unwrap();
        let mut t = ComplexTensorField::zeros(geom, vec![IndexKind::Holo, IndexKind::AntiHolo]);
        for (i, j, v) in [
            (0, 0, 1.25),
            (1, 1, 1.25),
            (0, 1, 0.25),
            (1, 0, 0.25),
        ] {
            for x in t.component_mut(&[i, j]) {
                *x = Complex64::new(v, 0.0);
            }
        }
        let h = HermitianField::new(t).unwrap();
        let m = MetricField::from_hermitian_with_floor(h, DEFAULT_PD_FLOOR).unwrap();
        assert_abs_diff_eq!(m.min_eigenvalue(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn inverse_is_pointwise_inverse() {
        let geom = TorusGeometry::new(2, 8).unwrap();
        let rough = crate::rough::random_rough_field(geom, 4, 0.7, 1.0).unwrap();
        let (_, phi) = scale_to_cone(&rough, 0.3);
        let m = metric_from_potential(&phi).unwrap();
        for p in [0usize, 17, 1000] {
            let g = m.hermitian().matrix_at(p);
            let inv = m.inverse_matrix_at(p);
            // g·inv = I to 1e−12; det = product of eigenvalues to 1e−10.
            for i in 0..2 {
                for j in 0..2 {
                    let mut s = Complex64::new(0.0, 0.0);
                    for k in 0..2 {
                        s += g[i][k] * inv[k][j];
                    }
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((s - want).norm() < 1e-12);
                }
            }
            let (aa, cc) = (g[0][0].re, g[1][1].re);
            let disc = ((aa - cc).powi(2) + 4.0 * g[0][1].norm_sqr()).sqrt();
            let (lmin, lmax) = (0.5 * (aa + cc - disc), 0.5 * (aa + cc + disc));
            assert!((m.det_ratio().values()[p] - lmin * lmax).abs() < 1e-10);
        }
    }

    #[test]
    fn laplacian_wrt_examples() {
        let geom = g1(64);
        // Identity metric: Δ_g cos(2πx) at 0 = −π² = −9.869604.
        let id = metric_from_potential(&ScalarField::zeros(geom)).unwrap();
        let f = cos_phi(geom, 1.0);
        assert_abs_diff_eq!(id.laplacian_wrt(&f).values()[0], -9.869604, epsilon = 1e-6);
        // Constant f → 0.
        assert!(id
            .laplacian_wrt(&ScalarField::constant(geom, 4.2))
            .sup_abs()
            < 1e-12);
        // Metric from 0.05cos: Δ_φ cos(2πx) at 0 = −π²/0.506520 = −19.485145.
        let m = metric_from_potential(&cos_phi(geom, 0.05)).unwrap();
        let got = m.laplacian_wrt(&f).values()[0];
        assert_abs_diff_eq!(got, -PI * PI / (1.0 - 0.05 * PI * PI), epsilon = 1e-9);
        assert_abs_diff_eq!(got, -19.485145, epsilon = 1e-4);
    }

    #[test]
    fn ricci_flat_and_analytic() {
        let geom = g1(64);
        let flat = metric_from_potential(&ScalarField::zeros(geom)).unwrap();
        let (ric0, norm0) = flat.ricci();
        assert!(ric0.sup_abs() < 1e-12);
        assert!(norm0.sup_abs() < 1e-12);

        // φ = 0.05cos(2πx): Ric_zz̄(0) = −π²k/(1−k), k = 0.05π².
        let m = metric_from_potential(&cos_phi(geom, 0.05)).unwrap();
        let (ric, norm) = m.ricci();
        let k = 0.05 * PI * PI;
        assert_abs_diff_eq!(ric.entry(0, 0)[0].re, -PI * PI * k / (1.0 - k), epsilon = 1e-7);
        assert_abs_diff_eq!(ric.entry(0, 0)[0].re, -9.615564, epsilon = 1e-4);
        assert_abs_diff_eq!(norm.values()[0], PI * PI * k / (1.0 - k).powi(2), epsilon = 1e-6);
        assert_abs_diff_eq!(norm.values()[0], 18.983564, epsilon = 1e-4);

        // Adding a constant to φ leaves Ric unchanged (exactly in exact
        // arithmetic; two chained spectral-derivative layers amplify FFT
        // roundoff by ~(πN)⁴, so the f64 floor at N=64 sits near 3e−8,
        // i.e. ~3e−9 relative to |Ric| here).
        let m2 = metric_from_potential(&cos_phi(geom, 0.05).shifted(1.7)).unwrap();
        let (ric2, _) = m2.ricci();
        assert!(ric.sup_abs_diff(&ric2) < 1e-7);
    }

    #[test]
    fn mass_conservation_for_positive_metrics() {
        // Grid mean of det_ratio equals 1 for every potential with positive
        // metric (discrete form of ∫(ω+√−1∂∂̄φ)ⁿ = ∫ωⁿ).
        for (n, grid, seed) in [(1usize, 64usize, 9u64), (2, 8, 5)] {
            let geom = TorusGeometry::new(n, grid).unwrap();
            let rough = crate::rough::random_rough_field(geom, seed, 0.6, 1.0).unwrap();
            let (_, phi) = scale_to_cone(&rough, 0.3);
            let m = metric_from_potential(&phi).unwrap();
            assert!(
                (m.det_ratio().mean() - 1.0).abs() < 1e-10,
                "mass drift {:.3e}",
                m.det_ratio().mean() - 1.0
            );
        }
    }

    #[test]
    fn am_gm_pointwise() {
        let geom = TorusGeometry::new(2, 8).unwrap();
        let rough = crate::rough::random_rough_field(geom, 21, 0.5, 1.0).unwrap();
        let (_, phi) = scale_to_cone(&rough, 0.25);
        let m = metric_from_potential(&phi).unwrap();
        let (tr, _) = m.traces();
        let n = geom.n() as f64;
        for (t, d) in tr.values().iter().zip(m.det_ratio().values()) {
            assert!(*t >= n * d.powf(1.0 / n) - 1e-12);
        }
    }

    #[test]
    fn det_time_derivative_is_weighted_laplacian() {
        // d/dt log det(g_{φ+tψ}) = Δ_{φ+tψ} ψ, checked by central differences.
        let geom = g1(32);
        let phi = cos_phi(geom, 0.04);
        let psi = ScalarField::from_fn(geom, |c| {
            0.03 * (2.0 * PI * 2.0 * c[0]).sin() + 0.02 * (2.0 * PI * c[1]).cos()
        });
        let log_det_at = |t: f64| {
            let m = metric_from_potential(&phi.add_scaled(t, &psi)).unwrap();
            m.det_ratio().map_unchecked(f64::ln)
        };
        let exact = metric_from_potential(&phi).unwrap().laplacian_wrt(&psi);
        let mut errs = Vec::new();
        for eps in [1e-3, 5e-4] {
            let diff = log_det_at(eps)
                .sub(&log_det_at(-eps))
                .scaled(1.0 / (2.0 * eps));
            errs.push(diff.sup_abs_diff(&exact));
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(
            (1.8..=2.2).contains(&order),
            "central-difference order {order}, errors {errs:?}"
        );
    }

    #[test]
    fn composition_laplacian_matches_spectral_route() {
        let geom = g1(32);
        let phi = cos_phi(geom, 0.04);
        let f = Nonlinearity::new(0.7, 0.3, TrigPoly {
            terms: vec![TrigTerm {
                coeff: 0.2,
                wave: vec![0, 2],
                kind: TrigKind::Sin,
            }],
        });
        let expansion = laplacian_of_composition(&phi, &f);
        let direct = spectral::laplacian_flat(&f.value_field(&phi));
        assert!(
            expansion.sup_abs_diff(&direct) < 1e-8,
            "expansion mismatch {:.3e}",
            expansion.sup_abs_diff(&direct)
        );
    }
}
