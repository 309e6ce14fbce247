//! Solvers for the elliptic complex Monge-Ampère equation.
//!
//! Two problems are covered: the fixed-right-hand-side Yau problem
//! det(g_ψ) = c·f with the compatibility constant c = 1/∫f, solved in the
//! mean-zero gauge, and the self-consistent problem
//! log det(g_φ) + F(φ, z) = 0 where the density depends on the unknown.
//!
//! Both use damped Newton iteration on the log-form residual. Each Newton
//! step solves the linearized equation (Δ_ψ v = −r, respectively
//! Δ_φ v + F′·v = −r) with BiCGStab preconditioned by the inverse
//! constant-coefficient Laplacian; backtracking halves the step until the
//! metric stays positive definite.

use crate::error::SolveError;
use crate::field::ScalarField;
use crate::kahler::{metric_from_potential_with_floor, MetricField, DEFAULT_PD_FLOOR};
use crate::nonlinearity::Nonlinearity;
use crate::spectral::inverse_flat_laplacian_shifted;
use crate::util::kahan_dot;

#[derive(Debug, Clone)]
pub struct EllipticOptions {
    /// Convergence threshold on the sup-norm of the log-form residual.
    pub tol: f64,
    pub max_iters: usize,
    pub max_backtracks: usize,
    pub pd_floor: f64,
    pub linear_rel_tol: f64,
    pub linear_max_iters: usize,
}

impl Default for EllipticOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 50,
            max_backtracks: 30,
            pd_floor: DEFAULT_PD_FLOOR,
            linear_rel_tol: 1e-12,
            linear_max_iters: 400,
        }
    }
}

/// Outcome of an elliptic solve. `converged` implies
/// `residual_sup ≤ tol` and the solution's metric is positive definite.
#[derive(Debug, Clone)]
pub struct EllipticReport {
    pub solution: ScalarField,
    /// Compatibility constant (1 for the self-consistent problem).
    pub c: f64,
    pub residual_sup: f64,
    pub newton_iters: usize,
    pub converged: bool,
    /// Residual sup-norm per accepted iterate, starting with the initial one.
    pub residual_history: Vec<f64>,
    pub linear_iters: u64,
    pub warnings: Vec<String>,
}

/// c with c·∫f = volume = 1, i.e. c = 1/mean(f).
pub fn compatibility_constant(f: &ScalarField) -> Result<f64, SolveError> {
    check_positive(f)?;
    Ok(1.0 / f.mean())
}

fn check_positive(f: &ScalarField) -> Result<(), SolveError> {
    if let Some((index, &value)) = f.values().iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(SolveError::NonPositiveDensity { index, value });
    }
    Ok(())
}

/// Shifts ψ by the constant that balances the two sups:
/// sup(ψ + κ₀ − φ) = sup(φ − ψ − κ₀).
pub fn normalize_against(psi: &ScalarField, phi: &ScalarField) -> ScalarField {
    let diff = phi.sub(psi);
    let sup_phi_minus_psi = diff.max_value();
    let sup_psi_minus_phi = -diff.min_value();
    let kappa0 = 0.5 * (sup_phi_minus_psi - sup_psi_minus_phi);
    psi.shifted(kappa0)
}

/// Preconditioned BiCGStab; `apply` is the (already preconditioned) operator
/// and `b` the preconditioned right-hand side. Returns (solution, iterations).
fn bicgstab(
    apply: impl Fn(&ScalarField) -> ScalarField,
    b: &ScalarField,
    rel_tol: f64,
    max_iters: usize,
) -> (ScalarField, u64) {
    let geom = b.geom();
    let norm = |v: &ScalarField| kahan_dot(v.values(), v.values()).sqrt();
    let dot = |u: &ScalarField, v: &ScalarField| kahan_dot(u.values(), v.values());

    let b_norm = norm(b);
    if b_norm == 0.0 {
        return (ScalarField::zeros(geom), 0);
    }
    let tol = rel_tol * b_norm;

    let mut x = ScalarField::zeros(geom);
    let mut r = b.clone();
    let r_hat = r.clone();
    let mut rho_prev = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = ScalarField::zeros(geom);
    let mut p = ScalarField::zeros(geom);
    let mut iters = 0u64;
    let mut best = (x.clone(), b_norm);

    for _ in 0..max_iters {
        iters += 1;
        let rho = dot(&r_hat, &r);
        if rho.abs() < 1e-300 {
            break; // breakdown; return best iterate
        }
        let beta = (rho / rho_prev) * (alpha / omega);
        // p = r + beta (p − omega v)
        p = {
            let mut t = p.add_scaled(-omega, &v);
            t = t.scaled(beta);
            t.axpy(1.0, &r);
            t
        };
        v = apply(&p);
        let denom = dot(&r_hat, &v);
        if denom.abs() < 1e-300 {
            break;
        }
        alpha = rho / denom;
        let s = r.add_scaled(-alpha, &v);
        if norm(&s) <= tol {
            x.axpy(alpha, &p);
            break;
        }
        let t = apply(&s);
        let tt = dot(&t, &t);
        if tt.abs() < 1e-300 {
            x.axpy(alpha, &p);
            break;
        }
        omega = dot(&t, &s) / tt;
        x.axpy(alpha, &p);
        x.axpy(omega, &s);
        r = s.add_scaled(-omega, &t);
        let rn = norm(&r);
        if rn < best.1 {
            best = (x.clone(), rn);
        }
        if rn <= tol {
            return (x, iters);
        }
        if rn > 1e8 * b_norm {
            return (best.0, iters); // diverging; hand Newton the best iterate
        }
        rho_prev = rho;
    }
    (x, iters)
}

fn subtract_mean(f: &ScalarField) -> ScalarField {
    f.shifted(-f.mean())
}

/// Newton solve of det(g_ψ) = c·f in the mean-zero gauge.
pub fn solve_fixed_rhs(
    f: &ScalarField,
    opts: &EllipticOptions,
    init: Option<&ScalarField>,
) -> Result<EllipticReport, SolveError> {
    check_positive(f)?;
    let geom = f.geom();
    let c = 1.0 / f.mean();
    let target = f.map_unchecked(|v| (c * v).ln());

    let mut psi = match init {
        Some(p) => subtract_mean(p),
        None => ScalarField::zeros(geom),
    };
    let mut metric = metric_from_potential_with_floor(&psi, opts.pd_floor)?;
    let residual_of = |m: &MetricField| m.det_ratio().map_unchecked(f64::ln).sub(&target);
    let mut residual = residual_of(&metric);
    let mut res_sup = residual.sup_abs();
    let mut history = vec![res_sup];
    let mut linear_iters = 0u64;
    let mut warnings = Vec::new();
    let mut newton_iters = 0usize;
    let mut converged = res_sup <= opts.tol;

    while !converged && newton_iters < opts.max_iters {
        newton_iters += 1;
        // Solve Δ_ψ v = −r, preconditioned by the inverse flat Laplacian with
        // the mean projected out (the gauge direction).
        let apply = |v: &ScalarField| {
            let av = metric.laplacian_wrt(v);
            subtract_mean(&inverse_flat_laplacian_shifted(&av, 0.0))
        };
        let b = subtract_mean(&inverse_flat_laplacian_shifted(
            &residual.scaled(-1.0),
            0.0,
        ));
        let (step, li) = bicgstab(apply, &b, opts.linear_rel_tol, opts.linear_max_iters);
        linear_iters += li;

        let (next_psi, next_metric, next_residual, next_sup) = backtrack(
            &psi,
            &step,
            res_sup,
            opts,
            newton_iters,
            &mut warnings,
            |candidate| {
                let cand = subtract_mean(candidate);
                let m = metric_from_potential_with_floor(&cand, opts.pd_floor)?;
                let r = residual_of(&m);
                let s = r.sup_abs();
                Ok((cand, m, r, s))
            },
        )?;
        psi = next_psi;
        metric = next_metric;
        residual = next_residual;
        res_sup = next_sup;
        history.push(res_sup);
        converged = res_sup <= opts.tol;
    }

    Ok(EllipticReport {
        solution: psi,
        c,
        residual_sup: res_sup,
        newton_iters,
        converged,
        residual_history: history,
        linear_iters,
        warnings,
    })
}

/// Newton solve of log det(g_φ) + F(φ, z) = 0 (no gauge; c ≡ 1).
pub fn solve_self_consistent(
    f: &Nonlinearity,
    opts: &EllipticOptions,
    init: Option<&ScalarField>,
    geom: crate::geometry::TorusGeometry,
) -> Result<EllipticReport, SolveError> {
    f.validate(geom)?;
    let h = f.h_grid(geom);
    let mut phi = match init {
        Some(p) => p.clone(),
        None => ScalarField::zeros(geom),
    };
    let mut metric = metric_from_potential_with_floor(&phi, opts.pd_floor)?;
    let residual_of = |p: &ScalarField, m: &MetricField| {
        m.det_ratio()
            .map_unchecked(f64::ln)
            .add_scaled(1.0, &f.value_field_with_h(p, &h))
    };
    let mut residual = residual_of(&phi, &metric);
    let mut res_sup = residual.sup_abs();
    let mut history = vec![res_sup];
    let mut linear_iters = 0u64;
    let mut warnings = Vec::new();
    let mut newton_iters = 0usize;
    let mut converged = res_sup <= opts.tol;
    let warn_fprime = |fp: &ScalarField, warnings: &mut Vec<String>| {
        if fp.min_value() < 0.0 && warnings.is_empty() {
            warnings.push(format!(
                "F' reaches {:.3e} < 0 on the current range; uniqueness not guaranteed",
                fp.min_value()
            ));
        }
    };
    warn_fprime(&f.prime_field(&phi), &mut warnings);

    while !converged && newton_iters < opts.max_iters {
        newton_iters += 1;
        let fprime = f.prime_field(&phi);
        warn_fprime(&fprime, &mut warnings);
        // Preconditioner (Δ_g + c̄)⁻¹ with c̄ the mean of F′, clamped away
        // from the first nonzero Laplacian eigenvalue π².
        let mean_fp = fprime.mean().clamp(0.0, 0.9 * std::f64::consts::PI.powi(2));
        let shift = -mean_fp;
        let apply = |v: &ScalarField| {
            let mut av = metric.laplacian_wrt(v);
            for (a, (x, fp)) in av
                .values_mut()
                .iter_mut()
                .zip(v.values().iter().zip(fprime.values()))
            {
                *a += x * fp;
            }
            inverse_flat_laplacian_shifted(&av, shift)
        };
        let b = inverse_flat_laplacian_shifted(&residual.scaled(-1.0), shift);
        let (step, li) = bicgstab(apply, &b, opts.linear_rel_tol, opts.linear_max_iters);
        linear_iters += li;

        let (next_phi, next_metric, next_residual, next_sup) = backtrack(
            &phi,
            &step,
            res_sup,
            opts,
            newton_iters,
            &mut warnings,
            |candidate| {
                let m = metric_from_potential_with_floor(candidate, opts.pd_floor)?;
                let r = residual_of(candidate, &m);
                let s = r.sup_abs();
                Ok((candidate.clone(), m, r, s))
            },
        )?;
        phi = next_phi;
        metric = next_metric;
        residual = next_residual;
        res_sup = next_sup;
        history.push(res_sup);
        converged = res_sup <= opts.tol;
    }

    Ok(EllipticReport {
        solution: phi,
        c: 1.0,
        residual_sup: res_sup,
        newton_iters,
        converged,
        residual_history: history,
        linear_iters,
        warnings,
    })
}

type NewtonState = (ScalarField, MetricField, ScalarField, f64);

/// Damped update: halve the step until the metric is positive definite, then
/// keep halving while the residual would grow. If the budget runs out on
/// positivity the solve fails; if it runs out on residual growth the last
/// positive candidate is accepted with a warning.
fn backtrack(
    base: &ScalarField,
    step: &ScalarField,
    res_sup: f64,
    opts: &EllipticOptions,
    iter: usize,
    warnings: &mut Vec<String>,
    mut eval: impl FnMut(&ScalarField) -> Result<NewtonState, SolveError>,
) -> Result<NewtonState, SolveError> {
    let mut t = 1.0;
    let mut halvings = 0usize;
    let mut best: Option<NewtonState> = None;
    loop {
        let candidate = base.add_scaled(t, step);
        match eval(&candidate) {
            Ok(state) => {
                if state.3 < res_sup {
                    return Ok(state);
                }
                if best.is_none() {
                    best = Some(state);
                }
            }
            Err(SolveError::Metric(_)) => {}
            Err(e) => return Err(e),
        }
        halvings += 1;
        if halvings > opts.max_backtracks {
            return match best {
                Some(state) => {
                    warnings.push(format!(
                        "iteration {iter}: accepted non-decreasing step after {halvings} halvings"
                    ));
                    Ok(state)
                }
                None => Err(SolveError::ConeExit { iter, halvings }),
            };
        }
        t *= 0.5;
    }
}
