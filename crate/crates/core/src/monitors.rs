//! Computable versions of the maximum-principle estimate quantities, plus a
//! numerical parabolic-defect evaluator.
//!
//! Monitored quantities (all on the flat torus, where the background
//! curvature terms vanish identically):
//!
//! - C⁰ envelopes M_t, m_t from the comparison ODEs dM/dt = F̄(M),
//!   dm/dt = F̲(m), and the derivative envelope sup|φ̇(t)| ≤ sup|φ̇(0)|e^{κt};
//! - K = t·log|∇φ|²_ω − γ(φ) with γ(s) = A·s − s²/A (gradient estimate);
//! - H = e^{−α/t}·log tr_g(g_φ) − A·φ (Laplacian estimate);
//! - S = |φ_{i j̄ k}|²_{g_φ}, the third-order quantity, with the composite
//!   G = S/C₁(t) + tr_g(g_φ)/C₂(t) + |∇φ|²/C₃(t);
//! - T_{i j̄} = −(F″φ_iφ_{j̄} + F′φ_{i j̄} + F_{i j̄} + sym(F′_i φ_{j̄})), the
//!   deviation of the flow from Kähler-Ricci flow, with the identity
//!   −T = ∂_t g_φ + Ric(g_φ);
//! - |Ric(g_φ)|_{g_φ} profiles.
//!
//! The parabolic defect (∂_t − Δ_φ)Q is formed from a central time
//! difference over neighboring snapshots plus the metric Laplacian, so every
//! differential inequality of the estimates can be tested on an actual
//! trajectory. All monitors are pure functions of (state, parameters).

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::MonitorError;
use crate::field::{ComplexTensorField, HermitianField, ScalarField};
use crate::flow::{envelopes_at_times, FlowState, Trajectory};
use crate::nonlinearity::Nonlinearity;
use crate::spectral;

/// Points with |∇φ|² at or below this are excluded from K (log β undefined).
pub const BETA_FLOOR: f64 = 1e-30;

/// A named time series aligned with trajectory snapshots. `None` marks an
/// undefined value (e.g. K on a gradient-free state), never an invented one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonitorSeries {
    pub name: String,
    pub times: Vec<f64>,
    pub values: Vec<Option<f64>>,
    pub params: BTreeMap<String, f64>,
}

impl MonitorSeries {
    fn new(name: &str, times: Vec<f64>, values: Vec<Option<f64>>) -> Self {
        Self {
            name: name.to_string(),
            times,
            values,
            params: BTreeMap::new(),
        }
    }

    fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn finite_max(&self) -> Option<f64> {
        self.values
            .iter()
            .flatten()
            .copied()
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |x| x.max(v))))
    }
}

/// Pointwise monitor with an exclusion set; excluded points hold NaN and the
/// sup is taken over included points only.
#[derive(Debug, Clone)]
pub struct PointwiseMonitor {
    pub values: Vec<f64>,
    pub sup: Option<f64>,
}

/// Recomputes the C⁰ comparison envelopes at the snapshot times and reports
/// the largest violation of m_t ≤ φ ≤ M_t (0 when the bound holds).
pub struct C0Envelopes {
    pub upper: MonitorSeries,
    pub lower: MonitorSeries,
    pub violation: f64,
}

pub fn c0_envelopes(traj: &Trajectory, f: &Nonlinearity) -> C0Envelopes {
    let times = traj.snapshot_times();
    let phi0 = &traj.snapshots[0].phi;
    let (upper, lower) = envelopes_at_times(
        f,
        phi0.geom(),
        traj.config.log_c,
        phi0.max_value(),
        phi0.min_value(),
        &times,
    );
    let mut violation = 0.0f64;
    for (i, snap) in traj.snapshots.iter().enumerate() {
        violation = violation.max(snap.phi.max_value() - upper[i]);
        violation = violation.max(lower[i] - snap.phi.min_value());
    }
    C0Envelopes {
        upper: MonitorSeries::new("c0_upper_envelope", times.clone(), wrap(upper)),
        lower: MonitorSeries::new("c0_lower_envelope", times, wrap(lower)),
        violation: violation.max(0.0),
    }
}

fn wrap(v: Vec<f64>) -> Vec<Option<f64>> {
    v.into_iter().map(Some).collect()
}

/// sup|φ̇(t)| against the bound sup|φ̇(0)|·e^{κt}, κ = sup|F′| over the C⁰
/// envelope range of the run.
pub struct PhidotEnvelope {
    pub measured: MonitorSeries,
    pub bound: MonitorSeries,
    pub kappa: f64,
    /// True iff sup|φ̇(t)| ≤ sup|φ̇(0)|·e^{κt}·(1 + 1e−3) at every snapshot.
    pub verdict: bool,
}

/// κ from the same envelope range the C⁰ monitor certifies (single source of
/// truth for the Cauchy-bound verification as well).
pub fn envelope_kappa(traj: &Trajectory, f: &Nonlinearity) -> f64 {
    let env = c0_envelopes(traj, f);
    let hi = env.upper.finite_max().unwrap_or(0.0);
    let lo = env
        .lower
        .values
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    f.sup_abs_prime(lo, hi)
}

pub fn phidot_envelope(traj: &Trajectory, f: &Nonlinearity) -> PhidotEnvelope {
    let kappa = envelope_kappa(traj, f);
    let times = traj.snapshot_times();
    let initial = traj.snapshots[0].phidot.sup_abs();
    let mut measured = Vec::new();
    let mut bound = Vec::new();
    let mut verdict = true;
    for snap in &traj.snapshots {
        let m = snap.phidot.sup_abs();
        let b = initial * (kappa * snap.t).exp();
        verdict &= m <= b * (1.0 + 1e-3);
        measured.push(Some(m));
        bound.push(Some(b));
    }
    PhidotEnvelope {
        measured: MonitorSeries::new("sup_abs_phidot", times.clone(), measured)
            .with_param("kappa", kappa),
        bound: MonitorSeries::new("phidot_envelope_bound", times, bound)
            .with_param("kappa", kappa),
        kappa,
        verdict,
    }
}

/// Błocki quantity K = t·log β − (Aφ − φ²/A) on {β > BETA_FLOOR}.
pub fn blocki_k(state: &FlowState, a: f64) -> Result<PointwiseMonitor, MonitorError> {
    assert!(a > 0.0, "Błocki A must be positive");
    if !(state.t > 0.0) {
        return Err(MonitorError::NonPositiveTime(state.t));
    }
    let beta = spectral::grad_norm_sq(&state.phi);
    let mut values = vec![f64::NAN; beta.len()];
    let mut sup: Option<f64> = None;
    for (p, (&b, &phi)) in beta.values().iter().zip(state.phi.values()).enumerate() {
        if b > BETA_FLOOR {
            let gamma = a * phi - phi * phi / a;
            let k = state.t * b.ln() - gamma;
            values[p] = k;
            sup = Some(sup.map_or(k, |s| s.max(k)));
        }
    }
    Ok(PointwiseMonitor { values, sup })
}

/// C_grad = max over t > 0 snapshots of t·log(sup β(t)): the smallest C with
/// |∇φ(t)|² ≤ e^{C/t} on this trajectory. `None` is the −∞ marker (β ≡ 0).
pub fn gradient_shape_constant(traj: &Trajectory) -> Option<f64> {
    let mut best: Option<f64> = None;
    for snap in &traj.snapshots {
        if snap.t <= 0.0 {
            continue;
        }
        let beta_sup = spectral::grad_norm_sq(&snap.phi).max_value();
        if beta_sup > BETA_FLOOR {
            let c = snap.t * beta_sup.ln();
            best = Some(best.map_or(c, |b| b.max(c)));
        }
    }
    best
}

/// Aubin–Yau quantity H = e^{−α/t}·log tr_g(g_φ) − A·φ, plus whether the
/// premise e^{−α/t}·β_sup ≤ 1 holds on this state.
pub struct AubinYau {
    pub monitor: PointwiseMonitor,
    pub premise_holds: bool,
}

pub fn aubin_yau_h(state: &FlowState, alpha: f64, a: f64) -> Result<AubinYau, MonitorError> {
    assert!(alpha > 0.0, "Aubin–Yau α must be positive");
    if !(state.t > 0.0) {
        return Err(MonitorError::NonPositiveTime(state.t));
    }
    let damp = (-alpha / state.t).exp();
    let (tr, _) = state.metric.traces();
    let beta_sup = spectral::grad_norm_sq(&state.phi).max_value();
    let premise_holds = damp * beta_sup <= 1.0;
    let mut values = Vec::with_capacity(tr.len());
    let mut sup = f64::NEG_INFINITY;
    for (&t, &phi) in tr.values().iter().zip(state.phi.values()) {
        let h = damp * t.ln() - a * phi;
        values.push(h);
        sup = sup.max(h);
    }
    Ok(AubinYau {
        monitor: PointwiseMonitor {
            values,
            sup: Some(sup),
        },
        premise_holds,
    })
}

/// S = g_φ^{i p̄} g_φ^{q j̄} g_φ^{k r̄} φ_{i j̄ k} φ_{p̄ q r̄} ≥ 0, evaluated
/// as a manifest sum of squares through the Cholesky factor of the inverse
/// metric. For n = 1 this is |φ_{z z̄ z}|²/(1 + φ_{z z̄})³.
pub fn third_order_s(state: &FlowState) -> (ScalarField, f64) {
    let geom = state.phi.geom();
    let n = geom.n();
    let third = spectral::third_mixed(&state.phi);
    let pts = geom.points();
    let mut out = vec![0.0; pts];
    let mut comps: Vec<&[Complex64]> = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                comps.push(third.component(&[i, j, k]));
            }
        }
    }
    let at = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    for p in 0..pts {
        let l = state.metric.inverse_cholesky_at(p);
        let mut sum = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                acc += l[i][a].conj()
                                    * l[j][b]
                                    * l[k][c].conj()
                                    * comps[at(i, j, k)][p];
                            }
                        }
                    }
                    sum += acc.norm_sqr();
                }
            }
        }
        out[p] = sum;
    }
    let field = ScalarField::from_vec_unchecked(geom, out);
    let sup = field.max_value();
    (field, sup)
}

/// Hermitian symmetrization u_i·conj(v_j) + v_i·conj(u_j) of two rank-1
/// holomorphic fields (the reading of the 2Re(F′_i φ_{j̄}) term).
pub fn hermitian_sym_outer(u: &ComplexTensorField, v: &ComplexTensorField) -> HermitianField {
    assert_eq!(u.rank(), 1);
    assert_eq!(v.rank(), 1);
    let geom = u.geom();
    assert_eq!(geom, v.geom());
    let n = geom.n();
    let mut t = ComplexTensorField::zeros(
        geom,
        vec![
            crate::field::IndexKind::Holo,
            crate::field::IndexKind::AntiHolo,
        ],
    );
    for i in 0..n {
        for j in 0..n {
            let ui = u.component(&[i]).to_vec();
            let vj = v.component(&[j]).to_vec();
            let vi = v.component(&[i]).to_vec();
            let uj = u.component(&[j]).to_vec();
            let comp = t.component_mut(&[i, j]);
            for p in 0..comp.len() {
                comp[p] = ui[p] * vj[p].conj() + vi[p] * uj[p].conj();
            }
        }
    }
    HermitianField::new(t).expect("symmetrized outer product is Hermitian")
}

/// T_{i j̄} from the flow's deviation formula. On the flat torus Ric(g) = 0,
/// so −T = F″φ_iφ_{j̄} + F′φ_{i j̄} + F_{i j̄} + sym(F′_i φ_{j̄}).
pub fn stress_tensor_t(state: &FlowState, f: &Nonlinearity) -> HermitianField {
    let geom = state.phi.geom();
    let n = geom.n();
    let grad = spectral::gradient(&state.phi);
    let hess = spectral::hessian(&state.phi);
    let h_hess = f.hess_z(geom);
    let fp = f.prime_field(&state.phi);
    let fpp = f.double_prime_field(&state.phi);
    let sym = hermitian_sym_outer(&f.prime_grad_z(geom), &grad);

    let mut t = ComplexTensorField::zeros(
        geom,
        vec![
            crate::field::IndexKind::Holo,
            crate::field::IndexKind::AntiHolo,
        ],
    );
    for i in 0..n {
        for j in 0..n {
            let gi = grad.component(&[i]).to_vec();
            let gj = grad.component(&[j]).to_vec();
            let hij = hess.entry(i, j);
            let hz = h_hess.entry(i, j);
            let sm = sym.entry(i, j);
            let comp = t.component_mut(&[i, j]);
            for p in 0..comp.len() {
                let minus_t = fpp.values()[p] * gi[p] * gj[p].conj()
                    + fp.values()[p] * hij[p]
                    + hz[p]
                    + sm[p];
                comp[p] = -minus_t;
            }
        }
    }
    HermitianField::new(t).expect("stress tensor is Hermitian")
}

/// Quantities the parabolic-defect evaluator can differentiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectQuantity {
    PhiDot,
    GradNormSq,
    ThirdOrderS,
    LogTraceG,
}

fn quantity_field(state: &FlowState, q: DefectQuantity) -> ScalarField {
    match q {
        DefectQuantity::PhiDot => state.phidot.clone(),
        DefectQuantity::GradNormSq => spectral::grad_norm_sq(&state.phi),
        DefectQuantity::ThirdOrderS => third_order_s(state).0,
        DefectQuantity::LogTraceG => state.metric.traces().0.map_unchecked(f64::ln),
    }
}

fn neighbors(traj: &Trajectory, index: usize) -> Result<(f64, &FlowState, &FlowState), MonitorError> {
    if index == 0 || index + 1 >= traj.snapshots.len() {
        return Err(MonitorError::BoundarySnapshot { index });
    }
    let prev = &traj.snapshots[index - 1];
    let next = &traj.snapshots[index + 1];
    let mid = &traj.snapshots[index];
    let left = mid.t - prev.t;
    let right = next.t - mid.t;
    if (left - right).abs() > 1e-9 * left.max(right) {
        return Err(MonitorError::UnevenSpacing { index, left, right });
    }
    Ok((0.5 * (left + right), prev, next))
}

/// (∂_t − Δ_φ)Q at an interior snapshot: central time difference over the
/// neighbor snapshots plus the evolving-metric Laplacian of Q.
pub fn parabolic_defect(
    traj: &Trajectory,
    q: DefectQuantity,
    index: usize,
) -> Result<ScalarField, MonitorError> {
    let (dt, prev, next) = neighbors(traj, index)?;
    let mid = &traj.snapshots[index];
    let q_prev = quantity_field(prev, q);
    let q_next = quantity_field(next, q);
    let q_mid = quantity_field(mid, q);
    let dq_dt = q_next.sub(&q_prev).scaled(0.5 / dt);
    let lap = mid.metric.laplacian_wrt(&q_mid);
    Ok(dq_dt.sub(&lap))
}

/// The claimed right-hand side of the φ̇ evolution: F′(φ)·φ̇.
pub fn phidot_defect_rhs(state: &FlowState, f: &Nonlinearity) -> ScalarField {
    let fp = f.prime_field(&state.phi);
    let vals = fp
        .values()
        .iter()
        .zip(state.phidot.values())
        .map(|(a, b)| a * b)
        .collect();
    ScalarField::from_vec_unchecked(state.phi.geom(), vals)
}

/// The exact right-hand side of the |∇φ|² evolution on the flat torus:
/// 2Re⟨∇φ, F′∇φ + ∇F⟩_g − tr(H·G⁻¹·H) − Σ_p ⟨M_p, G⁻¹ M_p⟩, where H is the
/// complex Hessian and M the pure holomorphic one (the two negative-definite
/// dissipation terms of the estimate).
pub fn grad_defect_rhs(state: &FlowState, f: &Nonlinearity) -> ScalarField {
    let geom = state.phi.geom();
    let n = geom.n();
    let pts = geom.points();
    let grad = spectral::gradient(&state.phi);
    let hess = spectral::hessian(&state.phi);
    let holo = spectral::holo_hessian(&state.phi);
    let beta = spectral::grad_norm_sq(&state.phi);
    let fp = f.prime_field(&state.phi);
    let h_grad = f.grad_z(geom);

    let mut out = vec![0.0; pts];
    for p in 0..pts {
        // 2Re Σ_p (F′ φ_p + h_p)·conj(φ_p)
        let mut transport = 0.0;
        for i in 0..n {
            let gp = grad.component(&[i])[p];
            let hp = h_grad.component(&[i])[p];
            transport += 2.0 * ((fp.values()[p] * gp + hp) * gp.conj()).re;
        }
        debug_assert!({
            let _ = beta.values()[p];
            true
        });
        let inv = state.metric.inverse_matrix_at(p);
        // tr(H·G⁻¹·H)
        let mut diss_mixed = 0.0;
        for r in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let hri = hess.entry(r, i)[p];
                    let hjr = hess.entry(j, r)[p];
                    diss_mixed += (hri * inv[i][j] * hjr).re;
                }
            }
        }
        // Σ_p m_p^† G⁻¹ m_p with m_p[i] = φ_{p i}
        let mut diss_holo = 0.0;
        for r in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mi = holo.component(&[r, i])[p];
                    let mj = holo.component(&[r, j])[p];
                    diss_holo += (mj.conj() * inv[j][i] * mi).re;
                }
            }
        }
        out[p] = transport - diss_mixed - diss_holo;
    }
    ScalarField::from_vec_unchecked(geom, out)
}

/// Composite G = sup over the grid of S/C₁(t) + tr_g(g_φ)/C₂(t) + β/C₃(t)
/// with parametric profiles C_i(t) = a_i·e^{b_i/t}.
pub fn composite_g(state: &FlowState, profiles: [(f64, f64); 3]) -> Result<f64, MonitorError> {
    for (a, b) in profiles {
        assert!(a > 0.0, "profile amplitudes must be positive");
        if b != 0.0 && !(state.t > 0.0) {
            return Err(MonitorError::NonPositiveTime(state.t));
        }
    }
    let c = |i: usize| {
        let (a, b) = profiles[i];
        if b == 0.0 {
            a
        } else {
            a * (b / state.t).exp()
        }
    };
    let (c1, c2, c3) = (c(0), c(1), c(2));
    let (s_field, _) = third_order_s(state);
    let (tr, _) = state.metric.traces();
    let beta = spectral::grad_norm_sq(&state.phi);
    let mut sup = f64::NEG_INFINITY;
    for p in 0..s_field.len() {
        let g = s_field.values()[p] / c1 + tr.values()[p] / c2 + beta.values()[p] / c3;
        sup = sup.max(g);
    }
    Ok(sup)
}

/// sup_grid |Ric(g_φ)|_{g_φ} at each snapshot.
pub fn ricci_norm_series(traj: &Trajectory) -> MonitorSeries {
    let times = traj.snapshot_times();
    let values = traj
        .snapshots
        .iter()
        .map(|s| Some(s.metric.ricci().1.max_value()))
        .collect();
    MonitorSeries::new("sup_ricci_norm", times, values)
}

/// Residual of the identity −T = ∂_t g_φ + Ric(g_φ) at an interior snapshot,
/// with ∂_t g_φ from a central difference of the neighbor metrics.
pub fn t_tensor_identity_residual(
    traj: &Trajectory,
    index: usize,
    f: &Nonlinearity,
) -> Result<f64, MonitorError> {
    let (dt, prev, next) = neighbors(traj, index)?;
    let mid = &traj.snapshots[index];
    let dg_dt = next
        .metric
        .hermitian()
        .add_scaled(-1.0, prev.metric.hermitian())
        .scaled(0.5 / dt);
    let (ric, _) = mid.metric.ricci();
    let t = stress_tensor_t(mid, f);
    // −T − (∂_t g + Ric) should vanish.
    let residual = t.scaled(-1.0).add_scaled(-1.0, &dg_dt).add_scaled(-1.0, &ric);
    Ok(residual.sup_abs())
}

/// |(φ(t+dt) − φ(t−dt))/(2dt) − φ̇(t)| at an interior snapshot (the
/// time-symmetry check of the recorded derivative).
pub fn time_symmetry_residual(traj: &Trajectory, index: usize) -> Result<f64, MonitorError> {
    let (dt, prev, next) = neighbors(traj, index)?;
    let mid = &traj.snapshots[index];
    let diff = next.phi.sub(&prev.phi).scaled(0.5 / dt);
    Ok(diff.sup_abs_diff(&mid.phidot))
}

/// Convenience bundle of the snapshot-aligned scalar monitor series.
pub fn standard_series(traj: &Trajectory, blocki_a: f64, aubin_a: f64) -> Vec<MonitorSeries> {
    let times = traj.snapshot_times();
    let mut sup_beta = Vec::new();
    let mut sup_s = Vec::new();
    let mut sup_tr = Vec::new();
    let mut min_eig = Vec::new();
    let mut det_drift = Vec::new();
    let mut k_sup = Vec::new();
    let mut h_sup = Vec::new();
    // α so that e^{−α/t}β_sup ≤ 1 over the trajectory, i.e. α ≥ C_grad.
    let alpha = gradient_shape_constant(traj).unwrap_or(0.0).max(1e-6);
    for snap in &traj.snapshots {
        sup_beta.push(Some(spectral::grad_norm_sq(&snap.phi).max_value()));
        sup_s.push(Some(third_order_s(snap).1));
        sup_tr.push(Some(snap.metric.traces().0.max_value()));
        min_eig.push(Some(snap.metric.min_eigenvalue()));
        det_drift.push(Some((snap.metric.det_ratio().mean() - 1.0).abs()));
        if snap.t > 0.0 {
            k_sup.push(blocki_k(snap, blocki_a).expect("t > 0").sup);
            h_sup.push(aubin_yau_h(snap, alpha, aubin_a).expect("t > 0").monitor.sup);
        } else {
            k_sup.push(None);
            h_sup.push(None);
        }
    }
    vec![
        MonitorSeries::new("sup_beta", times.clone(), sup_beta),
        MonitorSeries::new("sup_s", times.clone(), sup_s),
        MonitorSeries::new("sup_trace", times.clone(), sup_tr),
        MonitorSeries::new("min_eigenvalue", times.clone(), min_eig),
        MonitorSeries::new("mean_det_drift", times.clone(), det_drift),
        MonitorSeries::new("blocki_k_sup", times.clone(), k_sup).with_param("A", blocki_a),
        MonitorSeries::new("aubin_yau_h_sup", times, h_sup)
            .with_param("A", aubin_a)
            .with_param("alpha", alpha),
        ricci_norm_series(traj),
    ]
}
