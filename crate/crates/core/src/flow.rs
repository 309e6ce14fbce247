//! Time integration of the parabolic Monge-Ampère flow
//! ∂φ/∂t = log det(g_φ) + F(φ, z) − log c.
//!
//! Stepping is explicit midpoint (RK2) with an adaptive parabolic step
//! dt = safety · h² / sup(tr_{g_φ} g), the sharp explicit-CFL bound for the
//! linearization Δ_φ. Cone exit is treated as a step-size problem first: a
//! step whose metric dips below the positivity floor is rejected and retried
//! with dt/2, up to 20 halvings, and only then reported as a breakdown.
//! Steps land exactly on the configured snapshot times.

use crate::error::FlowError;
use crate::field::ScalarField;
use crate::geometry::TorusGeometry;
use crate::kahler::{metric_from_potential_with_floor, MetricField, DEFAULT_PD_FLOOR};
use crate::nonlinearity::Nonlinearity;

/// Maximum dt halvings before a step is declared a positivity breakdown.
pub const MAX_STEP_HALVINGS: u32 = 20;

/// Fixed substep of the envelope ODE integrator (binary so accumulated times
/// stay exact).
const ENVELOPE_DT: f64 = 1.0 / 1024.0;

#[derive(Debug, Clone)]
pub struct FlowConfig {
    /// Horizon T.
    pub t_final: f64,
    /// Upper bound on the step size (the CFL bound may be smaller).
    pub dt_init: f64,
    /// CFL fraction in (0, 1).
    pub safety: f64,
    /// Constant subtracted from the RHS (log c_k for the shifted flow).
    pub log_c: f64,
    /// Times at which full states are retained; 0 and T are always included.
    pub snapshot_times: Vec<f64>,
    pub positivity_floor: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            t_final: 1.0,
            dt_init: 1e-3,
            safety: 0.25,
            log_c: 0.0,
            snapshot_times: Vec::new(),
            positivity_floor: DEFAULT_PD_FLOOR,
        }
    }
}

impl FlowConfig {
    /// Validates and returns the sorted snapshot schedule including 0 and T.
    fn schedule(&self) -> Result<Vec<f64>, FlowError> {
        if !(self.t_final > 0.0) {
            return Err(FlowError::BadConfig(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if !(self.safety > 0.0 && self.safety < 1.0) {
            return Err(FlowError::BadConfig(format!(
                "safety must lie in (0, 1), got {}",
                self.safety
            )));
        }
        if !(self.dt_init > 0.0) {
            return Err(FlowError::BadConfig(format!(
                "dt_init must be positive, got {}",
                self.dt_init
            )));
        }
        let mut times = vec![0.0, self.t_final];
        for &t in &self.snapshot_times {
            if !(0.0..=self.t_final).contains(&t) {
                return Err(FlowError::BadConfig(format!(
                    "snapshot time {t} outside [0, {}]",
                    self.t_final
                )));
            }
            times.push(t);
        }
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        Ok(times)
    }
}

/// One instant of the flow, with the metric and the RHS cached.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub phi: ScalarField,
    pub metric: MetricField,
    /// RHS of the flow evaluated at (t, φ).
    pub phidot: ScalarField,
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub sup_abs_phi: f64,
    pub inf_phi: f64,
    pub sup_phi: f64,
    pub sup_abs_phidot: f64,
    pub min_eigenvalue: f64,
    /// |grid mean of det_ratio − 1|.
    pub mean_det_drift: f64,
    pub halvings: u32,
}

/// Flow output: snapshots at the configured times plus per-step records.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<FlowState>,
    pub series: Vec<StepRecord>,
    pub config: FlowConfig,
    pub steps: u64,
    pub rhs_evals: u64,
}

impl Trajectory {
    pub fn snapshot_times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn final_state(&self) -> &FlowState {
        self.snapshots.last().expect("trajectory has a final snapshot")
    }

    /// Snapshot at exactly time `t`, if retained.
    pub fn snapshot_at(&self, t: f64) -> Option<&FlowState> {
        self.snapshots.iter().find(|s| s.t == t)
    }
}

/// Precomputed per-run quantities.
struct FlowEngine<'a> {
    f: &'a Nonlinearity,
    h_grid: ScalarField,
    log_c: f64,
    floor: f64,
}

impl<'a> FlowEngine<'a> {
    fn new(f: &'a Nonlinearity, geom: TorusGeometry, log_c: f64, floor: f64) -> Self {
        Self {
            f,
            h_grid: f.h_grid(geom),
            log_c,
            floor,
        }
    }

    fn rhs_with_metric(&self, phi: &ScalarField, metric: &MetricField) -> ScalarField {
        let mut out = metric.det_ratio().map_unchecked(f64::ln);
        for (o, (p, h)) in out
            .values_mut()
            .iter_mut()
            .zip(phi.values().iter().zip(self.h_grid.values()))
        {
            *o += self.f.base_at(*p) + h - self.log_c;
        }
        out
    }

    fn make_state(&self, t: f64, phi: ScalarField) -> Result<FlowState, crate::error::MetricError> {
        let metric = metric_from_potential_with_floor(&phi, self.floor)?;
        let phidot = self.rhs_with_metric(&phi, &metric);
        Ok(FlowState {
            t,
            phi,
            metric,
            phidot,
        })
    }

    /// One midpoint step of size `dt`, already halved as needed by the
    /// caller. Ok(state) or the offending min eigenvalue.
    fn try_step(&self, state: &FlowState, dt: f64) -> Result<FlowState, f64> {
        let phi_mid = state.phi.add_scaled(0.5 * dt, &state.phidot);
        let metric_mid = match metric_from_potential_with_floor(&phi_mid, self.floor) {
            Ok(m) => m,
            Err(crate::error::MetricError::NotPositive { value, .. }) => return Err(value),
            Err(_) => unreachable!("hessian of a finite field is finite"),
        };
        let k2 = self.rhs_with_metric(&phi_mid, &metric_mid);
        let phi_new = state.phi.add_scaled(dt, &k2);
        match self.make_state(state.t + dt, phi_new) {
            Ok(s) => Ok(s),
            Err(crate::error::MetricError::NotPositive { value, .. }) => Err(value),
            Err(_) => unreachable!("hessian of a finite field is finite"),
        }
    }

    /// Step with rejection: halve dt until the metric stays positive.
    /// Returns (new state, dt used, halvings).
    fn step(&self, state: &FlowState, dt: f64) -> Result<(FlowState, f64, u32), FlowError> {
        let mut dt_try = dt;
        let mut halvings = 0u32;
        loop {
            match self.try_step(state, dt_try) {
                Ok(s) => return Ok((s, dt_try, halvings)),
                Err(min_eig) => {
                    halvings += 1;
                    if halvings > MAX_STEP_HALVINGS {
                        return Err(FlowError::PositivityBreakdown {
                            t: state.t,
                            min_eig,
                            halvings,
                            state: Box::new(state.clone()),
                            partial: None,
                        });
                    }
                    dt_try *= 0.5;
                }
            }
        }
    }
}

/// RHS of the flow: log det_ratio + F(φ, z) − log c. Cone exit is an
/// explicit failure naming the offending eigenvalue.
pub fn rhs(phi: &ScalarField, f: &Nonlinearity, log_c: f64) -> Result<ScalarField, FlowError> {
    f.validate(phi.geom())?;
    let engine = FlowEngine::new(f, phi.geom(), log_c, DEFAULT_PD_FLOOR);
    let metric = metric_from_potential_with_floor(phi, DEFAULT_PD_FLOOR)?;
    Ok(engine.rhs_with_metric(phi, &metric))
}

/// Builds a cached flow state at time `t`.
pub fn make_state(
    t: f64,
    phi: ScalarField,
    f: &Nonlinearity,
    log_c: f64,
) -> Result<FlowState, FlowError> {
    f.validate(phi.geom())?;
    let engine = FlowEngine::new(f, phi.geom(), log_c, DEFAULT_PD_FLOOR);
    engine.make_state(t, phi).map_err(Into::into)
}

/// One explicit midpoint step with positivity safeguarding. Returns the new
/// state, the dt actually used, and how many times it was halved.
pub fn step(
    state: &FlowState,
    dt: f64,
    f: &Nonlinearity,
    log_c: f64,
) -> Result<(FlowState, f64, u32), FlowError> {
    assert!(dt > 0.0, "step size must be positive");
    f.validate(state.phi.geom())?;
    let engine = FlowEngine::new(f, state.phi.geom(), log_c, DEFAULT_PD_FLOOR);
    engine.step(state, dt)
}

/// Integrates the flow to `config.t_final`, recording per-step diagnostics
/// and retaining snapshots at the configured times (hit exactly).
pub fn run(
    phi0: &ScalarField,
    f: &Nonlinearity,
    config: &FlowConfig,
) -> Result<Trajectory, FlowError> {
    let geom = phi0.geom();
    f.validate(geom)?;
    let schedule = config.schedule()?;
    let engine = FlowEngine::new(f, geom, config.log_c, config.positivity_floor);
    let h_sq = geom.spacing() * geom.spacing();

    let mut state = engine.make_state(0.0, phi0.clone())?;
    let mut snapshots = vec![state.clone()];
    let mut series = Vec::new();
    let mut steps = 0u64;
    let mut next_snap = 1usize; // schedule[0] == 0.0 recorded above

    while next_snap < schedule.len() {
        let target = schedule[next_snap];
        // Adaptive parabolic step, capped by dt_init and the snapshot time.
        let sup_tr_inv = state.metric.sup_trace_inverse();
        let mut dt = (config.safety * h_sq / sup_tr_inv).min(config.dt_init);
        let remaining = target - state.t;
        let landing = dt >= remaining * (1.0 - 1e-12);
        if landing {
            dt = remaining;
        }

        let (mut new_state, dt_used, halvings) = match engine.step(&state, dt) {
            Ok(r) => r,
            Err(FlowError::PositivityBreakdown {
                t,
                min_eig,
                halvings,
                state,
                ..
            }) => {
                return Err(FlowError::PositivityBreakdown {
                    t,
                    min_eig,
                    halvings,
                    state,
                    partial: Some(Box::new(Trajectory {
                        snapshots,
                        series,
                        config: config.clone(),
                        steps,
                        rhs_evals: 2 * steps + 1,
                    })),
                })
            }
            Err(e) => return Err(e),
        };
        if landing && halvings == 0 {
            new_state.t = target; // exact landing, no accumulated roundoff
        }
        steps += 1;
        series.push(StepRecord {
            t: new_state.t,
            dt: dt_used,
            sup_abs_phi: new_state.phi.sup_abs(),
            inf_phi: new_state.phi.min_value(),
            sup_phi: new_state.phi.max_value(),
            sup_abs_phidot: new_state.phidot.sup_abs(),
            min_eigenvalue: new_state.metric.min_eigenvalue(),
            mean_det_drift: (new_state.metric.det_ratio().mean() - 1.0).abs(),
            halvings,
        });
        if new_state.t == target {
            snapshots.push(new_state.clone());
            next_snap += 1;
        }
        state = new_state;
    }

    Ok(Trajectory {
        snapshots,
        series,
        config: config.clone(),
        steps,
        rhs_evals: 2 * steps + 1,
    })
}

/// ODE comparison envelopes and the horizon they certify.
#[derive(Debug, Clone)]
pub struct HorizonEstimate {
    /// Largest time ≤ t_cap with M_t ≤ M₀ + window and m_t ≥ m₀ − window.
    pub t: f64,
    pub times: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

/// Integrates dM/dt = F̄(M) − log c from sup φ₀ and dm/dt = F̲(m) − log c
/// from inf φ₀ with RK4 and reports the largest time at which both stay
/// within `window` of their starting values.
pub fn estimate_horizon(
    phi0: &ScalarField,
    f: &Nonlinearity,
    log_c: f64,
    window: f64,
    t_cap: f64,
) -> HorizonEstimate {
    assert!(window > 0.0, "window must be positive");
    assert!(t_cap > 0.0, "t_cap must be positive");
    let (h_min, h_max) = f.h_extremes(phi0.geom());
    let upper_rhs = |s: f64| f.upper_envelope(s, h_max) - log_c;
    let lower_rhs = |s: f64| f.lower_envelope(s, h_min) - log_c;

    let m_hi0 = phi0.max_value();
    let m_lo0 = phi0.min_value();
    let mut t = 0.0;
    let mut hi = m_hi0;
    let mut lo = m_lo0;
    let mut times = vec![0.0];
    let mut upper = vec![hi];
    let mut lower = vec![lo];
    let mut horizon = 0.0;

    while t < t_cap {
        let dt = ENVELOPE_DT.min(t_cap - t);
        hi = rk4_step(hi, dt, &upper_rhs);
        lo = rk4_step(lo, dt, &lower_rhs);
        t += dt;
        times.push(t);
        upper.push(hi);
        lower.push(lo);
        if hi <= m_hi0 + window && lo >= m_lo0 - window {
            horizon = t;
        } else {
            break;
        }
    }

    HorizonEstimate {
        t: horizon,
        times,
        upper,
        lower,
    }
}

/// Envelope values at prescribed times (snapshot alignment for monitors).
pub fn envelopes_at_times(
    f: &Nonlinearity,
    geom: TorusGeometry,
    log_c: f64,
    sup_phi0: f64,
    inf_phi0: f64,
    times: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let (h_min, h_max) = f.h_extremes(geom);
    let upper_rhs = |s: f64| f.upper_envelope(s, h_max) - log_c;
    let lower_rhs = |s: f64| f.lower_envelope(s, h_min) - log_c;
    let mut hi = sup_phi0;
    let mut lo = inf_phi0;
    let mut t_prev = 0.0;
    let mut upper = Vec::with_capacity(times.len());
    let mut lower = Vec::with_capacity(times.len());
    for &t in times {
        assert!(t >= t_prev, "times must be nondecreasing from 0");
        if t > t_prev {
            let span = t - t_prev;
            let nsub = (span / ENVELOPE_DT).ceil().max(1.0) as usize;
            let dt = span / nsub as f64;
            for _ in 0..nsub {
                hi = rk4_step(hi, dt, &upper_rhs);
                lo = rk4_step(lo, dt, &lower_rhs);
            }
            t_prev = t;
        }
        upper.push(hi);
        lower.push(lo);
    }
    (upper, lower)
}

fn rk4_step(y: f64, dt: f64, rhs: &impl Fn(f64) -> f64) -> f64 {
    let k1 = rhs(y);
    let k2 = rhs(y + 0.5 * dt * k1);
    let k3 = rhs(y + 0.5 * dt * k2);
    let k4 = rhs(y + dt * k3);
    y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}
