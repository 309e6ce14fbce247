//! Cauchy-sequence experiment: approximate a rough target potential φ★ by
//! Fourier truncations u_k, solve the Yau problem det(g_ψ) = c_k·e^{−F(u_k)}
//! for each level, run the c-shifted flow from every ψ_k over a common
//! horizon, and verify the contraction bound
//!
//! ```text
//!   sup_{[0,T]×M}|φ_j − φ_k| ≤ e^{κT}(‖ψ_j − ψ_k‖∞ + κ⁻¹|log(c_k/c_j)|)
//!                              − κ⁻¹|log(c_k/c_j)| + tol_num
//! ```
//!
//! for all pairs, together with the convergence trends ‖ψ_k − φ★‖∞ ↓,
//! |log c_k| ↓, and sup|φ̇_k(0)| ↓.
//!
//! Targets come in two kinds. The default manufactures φ★ as the exact
//! discrete solution of an equation whose z-data is rough: F is augmented
//! with a random α-decay trigonometric polynomial (scaled by bisection so
//! the solution's metric clears the cone target) and φ★ solves
//! log det(g_φ★) + F(φ★, z) = 0 to solver precision. Every trend of the
//! construction is then genuine: ∫e^{−F(φ★)} = ∫det(g_φ★) = 1 makes
//! c_k → 1, Kołodziej-style stability pulls ψ_k → φ★, and φ̇_k(0) → 0.
//! The alternative takes φ★ as a synthesized rough potential (scaled into
//! the cone, centered so the limiting mass is 1); it solves no equation of
//! the family, so the level sequences bottom out at its distance to the
//! solution manifold and only the contraction bound is meaningful there.

use rayon::prelude::*;

use crate::elliptic::{compatibility_constant, normalize_against, solve_fixed_rhs, EllipticOptions};
use crate::field::ScalarField;
use crate::flow::{estimate_horizon, run, FlowConfig, Trajectory};
use crate::kahler::scale_to_cone;
use crate::monitors;
use crate::nonlinearity::Nonlinearity;
use crate::rough::random_rough_field;
use crate::spectral::fourier_truncate;

use super::config::{CauchyConfig, CauchyTarget};
use super::report::{CsvCell, CsvWriter, ExperimentReport, Verdict};
use super::{snapshot, HarnessError, OutputContext};

struct LevelSolve {
    cutoff: usize,
    psi: ScalarField,
    c: f64,
    log_c: f64,
    dist_to_target: f64,
    phidot0_sup: f64,
    /// sup|F(ψ_k) − F(u_k)| — the closed form with log c_k cancelled.
    phidot0_closed: f64,
    /// sup|F(ψ_k) − F(φ★) − log c_k| — the closed form as displayed in the
    /// construction (the two agree in the limit; both are reported).
    phidot0_displayed: f64,
    horizon: f64,
    newton_iters: u64,
    linear_iters: u64,
}

/// Shift γ with mean(e^{−F(φ + γ)}) = 1, by bracketed bisection (the mass is
/// strictly decreasing in γ for monotone F).
fn center_for_unit_mass(
    phi: &ScalarField,
    f: &Nonlinearity,
) -> Result<f64, HarnessError> {
    let h = f.h_grid(phi.geom());
    let mass = |gamma: f64| -> f64 {
        let vals = phi
            .values()
            .iter()
            .zip(h.values())
            .map(|(&p, &hv)| (-(f.base_at(p + gamma) + hv)).exp());
        crate::util::kahan_sum(vals) / phi.len() as f64
    };
    let m0 = mass(0.0);
    if (m0 - 1.0).abs() < 1e-15 {
        return Ok(0.0);
    }
    // Monotone decreasing in γ: m0 > 1 needs γ > 0.
    let dir = if m0 > 1.0 { 1.0 } else { -1.0 };
    let mut span = 1.0;
    let mut bracket = None;
    for _ in 0..60 {
        let m = mass(dir * span);
        if (m > 1.0) != (m0 > 1.0) {
            bracket = Some(span);
            break;
        }
        span *= 2.0;
    }
    let span = bracket.ok_or_else(|| {
        HarnessError::Config(
            "cannot center the rough target: mean e^{−F(φ+γ)} never crosses 1 \
             (is F constant in s?)"
            .into(),
        )
    })?;
    let (mut lo, mut hi) = if dir > 0.0 { (0.0, span) } else { (-span, 0.0) };
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if (mass(mid) > 1.0) == (m0 > 1.0) {
            // still on the m0 side of the crossing
            if dir > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        } else if dir > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Builds the rough-equation target: F_exp = F + s·h_rough with the scale s
/// bisected so the exact solution's metric stays above the cone target.
/// Returns (φ★, F_exp, s).
fn rough_equation_target(
    cfg: &CauchyConfig,
    geom: crate::geometry::TorusGeometry,
    report: &mut ExperimentReport,
) -> Result<(ScalarField, Nonlinearity, f64), HarnessError> {
    if cfg.nonlinearity.linear - cfg.nonlinearity.sine.abs() <= 0.0 {
        return Err(HarnessError::Config(
            "the rough-equation target needs a monotone family (a − |b| > 0)              so the self-consistent solve is well-posed"
                .into(),
        ));
    }
    let h_rough = crate::rough::random_rough_trig_poly(geom, cfg.seed, cfg.alpha)?;
    let opts = EllipticOptions {
        tol: cfg.elliptic_tol,
        ..Default::default()
    };
    let with_scale = |s: f64| {
        Nonlinearity::new(
            cfg.nonlinearity.linear,
            cfg.nonlinearity.sine,
            cfg.nonlinearity.potential.plus(&h_rough.scaled(s)),
        )
    };
    let solve_at = |s: f64, init: Option<&ScalarField>| {
        crate::elliptic::solve_self_consistent(&with_scale(s), &opts, init, geom)
    };
    // min eigenvalue of the solution metric decreases as the rough data
    // grows; bracket then bisect, warm-starting each solve.
    let probe = |s: f64, init: Option<&ScalarField>| -> Result<Option<ScalarField>, HarnessError> {
        let r = solve_at(s, init)?;
        if !r.converged {
            return Ok(None);
        }
        let min_eig = crate::kahler::min_metric_eigenvalue(&r.solution);
        Ok((min_eig >= cfg.target_min_eigenvalue).then_some(r.solution))
    };
    let mut lo = 0.0f64;
    let mut best = ScalarField::zeros(geom);
    let mut hi = 1.0f64;
    let mut grow = 0;
    loop {
        match probe(hi, Some(&best))? {
            Some(sol) => {
                lo = hi;
                best = sol;
                hi *= 2.0;
                grow += 1;
                if grow > 40 {
                    break; // rough part cannot push the metric down; use it
                }
            }
            None => break,
        }
    }
    for _ in 0..20 {
        let mid = 0.5 * (lo + hi);
        match probe(mid, Some(&best))? {
            Some(sol) => {
                lo = mid;
                best = sol;
            }
            None => hi = mid,
        }
    }
    if lo == 0.0 {
        return Err(HarnessError::Config(
            "rough-equation target: even infinitesimal rough data violates the cone target"
                .into(),
        ));
    }
    // Final solve at the retained scale to full tolerance (warm start makes
    // this a couple of iterations).
    let final_report = solve_at(lo, Some(&best))?;
    report.runtime.absorb_elliptic(&final_report);
    if !final_report.converged {
        return Err(HarnessError::Config(
            "rough-equation target solve did not converge at the selected scale".into(),
        ));
    }
    report.record_f64("target_equation_residual", final_report.residual_sup);
    Ok((final_report.solution, with_scale(lo), lo))
}

pub fn experiment_cauchy(
    cfg: &CauchyConfig,
    out: &OutputContext,
) -> Result<ExperimentReport, HarnessError> {
    let geom = cfg.geometry.build()?;
    cfg.nonlinearity.validate(geom)?;
    let f = &cfg.nonlinearity;
    if cfg.truncations.len() < 2 {
        return Err(HarnessError::Config(
            "need at least two truncation levels".into(),
        ));
    }
    for w in cfg.truncations.windows(2) {
        if w[1] <= w[0] {
            return Err(HarnessError::Config(
                "truncation levels must be strictly increasing".into(),
            ));
        }
    }
    if *cfg.truncations.last().unwrap() > geom.grid() / 2 {
        return Err(HarnessError::Config(format!(
            "truncation level {} exceeds N/2 = {}",
            cfg.truncations.last().unwrap(),
            geom.grid() / 2
        )));
    }
    if cfg.snapshot_count < 2 {
        return Err(HarnessError::Config("snapshot_count must be ≥ 2".into()));
    }
    let mut report = ExperimentReport::new("cauchy", serde_json::to_value(cfg)?);

    // Manufacture the target.
    let (phi_star, f_exp) = match cfg.target {
        CauchyTarget::RoughEquation => {
            let (phi_star, f_exp, rough_scale) = rough_equation_target(cfg, geom, &mut report)?;
            report.record_f64("target_scale", rough_scale);
            (phi_star, f_exp)
        }
        CauchyTarget::RoughField => {
            let raw = random_rough_field(geom, cfg.seed, cfg.alpha, 1.0)?;
            let (scale, scaled) = scale_to_cone(&raw, cfg.target_min_eigenvalue);
            let gamma = center_for_unit_mass(&scaled, f)?;
            report.record_f64("target_scale", scale);
            report.record_f64("target_center", gamma);
            (scaled.shifted(gamma), f.clone())
        }
    };
    let f = &f_exp;
    report.record_f64(
        "target_min_eigenvalue",
        crate::kahler::min_metric_eigenvalue(&phi_star),
    );

    // Per-level Yau solves (independent; run concurrently, order preserved).
    let opts = EllipticOptions {
        tol: cfg.elliptic_tol,
        ..Default::default()
    };
    let h_grid = f.h_grid(geom);
    let levels: Result<Vec<LevelSolve>, String> = cfg
        .truncations
        .par_iter()
        .map(|&cutoff| {
            let u_k = fourier_truncate(&phi_star, cutoff).map_err(|e| e.to_string())?;
            let f_u = f.value_field_with_h(&u_k, &h_grid);
            let density = f_u.map_unchecked(|v| (-v).exp());
            let c = compatibility_constant(&density).map_err(|e| e.to_string())?;
            let solve = solve_fixed_rhs(&density, &opts, None).map_err(|e| e.to_string())?;
            if !solve.converged {
                return Err(format!(
                    "Yau solve at cutoff {cutoff} did not converge (residual {:.3e})",
                    solve.residual_sup
                ));
            }
            let psi = normalize_against(&solve.solution, &phi_star);
            let log_c = c.ln();
            let phidot0 = crate::flow::rhs(&psi, f, log_c).map_err(|e| e.to_string())?;
            let f_psi = f.value_field_with_h(&psi, &h_grid);
            let f_star = f.value_field_with_h(&phi_star, &h_grid);
            let closed = f_psi.sub(&f_u).sup_abs();
            let displayed = f_psi.sub(&f_star).shifted(-log_c).sup_abs();
            let horizon = estimate_horizon(&psi, f, log_c, cfg.horizon_window, cfg.horizon_cap);
            Ok(LevelSolve {
                cutoff,
                dist_to_target: psi.sup_abs_diff(&phi_star),
                phidot0_sup: phidot0.sup_abs(),
                phidot0_closed: closed,
                phidot0_displayed: displayed,
                horizon: horizon.t,
                newton_iters: solve.newton_iters as u64,
                linear_iters: solve.linear_iters,
                psi,
                c,
                log_c,
            })
        })
        .collect();
    let levels = match levels {
        Ok(l) => l,
        Err(msg) => {
            report.push_verdict(Verdict::from_bool(
                "level_solves",
                "every truncation level solves and flows",
                false,
            ));
            report.record("failure", serde_json::json!(msg));
            report.record_file("report.json");
            report.write(&out.dir)?;
            return Ok(report);
        }
    };
    for l in &levels {
        report.runtime.newton_iterations += l.newton_iters;
        report.runtime.linear_iterations += l.linear_iters;
    }

    // Common horizon: the minimum of the per-level envelope horizons.
    let t_final = levels.iter().map(|l| l.horizon).fold(f64::INFINITY, f64::min);
    if !(t_final > 0.0) {
        return Err(HarnessError::Config(
            "estimated common horizon is not positive".into(),
        ));
    }
    let snapshot_times: Vec<f64> = (0..cfg.snapshot_count)
        .map(|i| t_final * i as f64 / (cfg.snapshot_count - 1) as f64)
        .collect();
    report.record_f64("t_final", t_final);

    let flow_config = |log_c: f64, safety: f64| FlowConfig {
        t_final,
        dt_init: cfg.dt_init,
        safety,
        log_c,
        snapshot_times: snapshot_times.clone(),
        positivity_floor: cfg.positivity_floor,
    };
    // The level flows plus one extra finest-level run at half the CFL
    // fraction (the discretization-error probe), all independent.
    let last = levels.len() - 1;
    let mut jobs: Vec<(usize, f64)> = (0..levels.len()).map(|i| (i, cfg.safety)).collect();
    jobs.push((last, cfg.safety * 0.5));
    let flows: Result<Vec<Trajectory>, String> = jobs
        .par_iter()
        .map(|&(i, safety)| {
            run(&levels[i].psi, f, &flow_config(levels[i].log_c, safety))
                .map_err(|e| e.to_string())
        })
        .collect();
    let mut flows = match flows {
        Ok(fl) => fl,
        Err(msg) => {
            report.push_verdict(Verdict::from_bool(
                "level_solves",
                "every truncation level solves and flows",
                false,
            ));
            report.record("failure", serde_json::json!(msg));
            report.record_file("report.json");
            report.write(&out.dir)?;
            return Ok(report);
        }
    };
    let half = flows.pop().expect("half-step probe present");
    for traj in &flows {
        report.runtime.absorb_flow(traj);
    }
    report.runtime.absorb_flow(&half);
    let err_est = flows[last]
        .snapshots
        .iter()
        .zip(&half.snapshots)
        .map(|(a, b)| a.phi.sup_abs_diff(&b.phi))
        .fold(0.0, f64::max);
    let tol_num = cfg.tol_numeric_base + 10.0 * err_est;
    report.record_f64("step_error_estimate", err_est);
    report.record_f64("tol_num", tol_num);

    // κ from the same envelope machinery the flow monitors use, over the
    // union of the per-run C⁰ ranges.
    let mut range_lo = f64::INFINITY;
    let mut range_hi = f64::NEG_INFINITY;
    for traj in &flows {
        let env = monitors::c0_envelopes(traj, f);
        for v in env.upper.values.iter().flatten() {
            range_hi = range_hi.max(*v);
        }
        for v in env.lower.values.iter().flatten() {
            range_lo = range_lo.min(*v);
        }
    }
    let kappa = f.sup_abs_prime(range_lo, range_hi);
    report.record_f64("kappa", kappa);

    // Verdict (a): the pairwise contraction bound with nonnegative margin.
    let mut pairs_csv = CsvWriter::new(&["j", "k", "lhs_sup", "bound", "margin"]);
    let mut min_margin = f64::INFINITY;
    for j in 0..levels.len() {
        for k in (j + 1)..levels.len() {
            let mut lhs = 0.0f64;
            for (a, b) in flows[j].snapshots.iter().zip(&flows[k].snapshots) {
                lhs = lhs.max(a.phi.sup_abs_diff(&b.phi));
            }
            let psi_dist = levels[j].psi.sup_abs_diff(&levels[k].psi);
            let log_ratio = (levels[k].log_c - levels[j].log_c).abs();
            let bound = if kappa > 1e-12 {
                (kappa * t_final).exp() * (psi_dist + log_ratio / kappa) - log_ratio / kappa
            } else {
                // κ → 0 limit of the same expression.
                psi_dist + log_ratio * t_final
            } + tol_num;
            let margin = bound - lhs;
            min_margin = min_margin.min(margin);
            pairs_csv.row(&[
                CsvCell::I(levels[j].cutoff as i64),
                CsvCell::I(levels[k].cutoff as i64),
                CsvCell::F(lhs),
                CsvCell::F(bound),
                CsvCell::F(margin),
            ]);
        }
    }
    report.push_verdict(Verdict::from_margin(
        "cauchy_pairwise_bound",
        "sup|φ_j − φ_k| ≤ e^(κT)(‖ψ_j−ψ_k‖ + κ⁻¹|log(c_k/c_j)|) − κ⁻¹|log(c_k/c_j)| + tol_num",
        min_margin,
    ));
    pairs_csv.write(&out.path("cauchy_pairs.csv"))?;
    report.record_file("cauchy_pairs.csv");

    // Verdicts (b)/(c)/(d): monotone approach of the level sequence
    // (non-strict, so the degenerate all-levels-equal case passes; the
    // sequences themselves are recorded for strictness checks downstream).
    let non_increasing = |xs: &[f64]| xs.windows(2).all(|w| w[1] <= w[0] + 1e-15);
    let dists: Vec<f64> = levels.iter().map(|l| l.dist_to_target).collect();
    let log_cs: Vec<f64> = levels.iter().map(|l| l.log_c.abs()).collect();
    let phidots: Vec<f64> = levels.iter().map(|l| l.phidot0_sup).collect();
    report.record("stability_distances", serde_json::json!(dists.clone()));
    report.record("abs_log_c", serde_json::json!(log_cs.clone()));
    report.record("phidot0_sups", serde_json::json!(phidots.clone()));
    report.push_verdict(Verdict::from_bool(
        "stability_distance_decreasing",
        "‖ψ_k − φ★‖∞ decreasing in k",
        non_increasing(&dists),
    ));
    report.push_verdict(Verdict::from_bool(
        "compatibility_to_one",
        "|log c_k| decreasing in k",
        non_increasing(&log_cs),
    ));
    report.push_verdict(Verdict::from_bool(
        "initial_rate_to_zero",
        "sup|φ̇_k(0)| decreasing in k",
        non_increasing(&phidots),
    ));

    // Envelope verdicts and conservation on every run.
    let mut mass_drift = 0.0f64;
    for (l, traj) in levels.iter().zip(&flows) {
        super::push_envelope_verdicts(
            &mut report,
            traj,
            f,
            cfg.envelope_tol,
            &format!("_k{}", l.cutoff),
        );
        mass_drift = mass_drift.max(super::conservation_drift(traj));
    }
    report.record_f64("mass_drift", mass_drift);
    report.push_verdict(Verdict::from_margin(
        "mass_conservation",
        "|mean det_ratio − 1| ≤ 1e−9 at all snapshots of all runs",
        1e-9 - mass_drift,
    ));

    // Level sequence table.
    let mut seq = CsvWriter::new(&[
        "cutoff",
        "c",
        "log_c",
        "dist_to_target",
        "phidot0_sup",
        "phidot0_closed_form",
        "phidot0_displayed_form",
        "horizon",
    ]);
    for l in &levels {
        seq.row(&[
            CsvCell::I(l.cutoff as i64),
            CsvCell::F(l.c),
            CsvCell::F(l.log_c),
            CsvCell::F(l.dist_to_target),
            CsvCell::F(l.phidot0_sup),
            CsvCell::F(l.phidot0_closed),
            CsvCell::F(l.phidot0_displayed),
            CsvCell::F(l.horizon),
        ]);
    }
    seq.write(&out.path("cauchy_levels.csv"))?;
    report.record_file("cauchy_levels.csv");

    // Limit surrogate Φ = φ_{k_max}: snapshots across the horizon.
    for snap in &flows[last].snapshots {
        let name = format!("phi_limit_t{}.cmaf", snap.t);
        snapshot::write_snapshot(snap, &out.path(&name))?;
        report.record_file(&name);
    }
    if out.emit_plots {
        for (l, traj) in levels.iter().zip(&flows) {
            let name = format!("steps_k{}.csv", l.cutoff);
            super::write_step_csv(traj, &out.path(&name))?;
            report.record_file(&name);
        }
    }
    report.record_file("report.json");
    report.write(&out.dir)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::GeometrySpec;
    use crate::nonlinearity::TrigPoly;

    fn base_cfg() -> CauchyConfig {
        CauchyConfig {
            geometry: GeometrySpec { n: 1, grid: 32 },
            nonlinearity: Nonlinearity::new(1.0, 0.0, TrigPoly::zero()),
            target: CauchyTarget::RoughField,
            seed: 11,
            alpha: 0.5,
            truncations: vec![2, 4, 8],
            target_min_eigenvalue: 0.3,
            horizon_window: 1.0,
            horizon_cap: 0.05,
            snapshot_count: 5,
            dt_init: 1e-3,
            safety: 0.25,
            positivity_floor: 1e-8,
            elliptic_tol: 1e-10,
            tol_numeric_base: 1e-6,
            envelope_tol: 1e-5,
        }
    }

    #[test]
    fn band_limited_target_collapses_all_levels() {
        // φ★ band-limited below the smallest cutoff (the synthesized field
        // only carries modes ≤ N/2 − 1 = 3): all u_k equal bitwise, so all
        // pairwise distances are 0 and every verdict passes.
        let dir = tempfile::tempdir().unwrap();
        let ctx = OutputContext::new(dir.path().join("c"), false).unwrap();
        let mut cfg = base_cfg();
        cfg.geometry = GeometrySpec { n: 1, grid: 8 };
        cfg.truncations = vec![3, 4];
        let report = experiment_cauchy(&cfg, &ctx).unwrap();
        assert!(report.all_pass, "verdicts: {:?}", report.verdicts);
        let dists = report.measured["stability_distances"].as_array().unwrap();
        assert_eq!(dists[0], dists[1]);
    }

    #[test]
    fn bad_truncation_lists_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let ctx = OutputContext::new(dir.path().join("c"), false).unwrap();
        let mut cfg = base_cfg();
        cfg.truncations = vec![4, 4];
        assert!(matches!(
            experiment_cauchy(&cfg, &ctx),
            Err(HarnessError::Config(_))
        ));
        cfg.truncations = vec![4, 40];
        assert!(matches!(
            experiment_cauchy(&cfg, &ctx),
            Err(HarnessError::Config(_))
        ));
    }

    #[test]
    fn small_cauchy_experiment_bounds_hold() {
        let dir = tempfile::tempdir().unwrap();
        let ctx = OutputContext::new(dir.path().join("c"), false).unwrap();
        let cfg = base_cfg();
        let report = experiment_cauchy(&cfg, &ctx).unwrap();
        // The pairwise bound and envelope/conservation verdicts must hold on
        // any successful run; the monotone-trend verdicts are seed-dependent
        // and are pinned (with the repo seed) in the acceptance suite.
        for v in &report.verdicts {
            if v.name.starts_with("cauchy_pairwise")
                || v.name.starts_with("c0_envelope")
                || v.name.starts_with("phidot_envelope")
                || v.name == "mass_conservation"
            {
                assert!(v.pass, "verdict {} failed: margin {}", v.name, v.margin);
            }
        }
        assert!(ctx.path("cauchy_levels.csv").exists());
        assert!(ctx.path("cauchy_pairs.csv").exists());
        assert!(ctx.path("report.json").exists());
    }

    #[test]
    fn rough_equation_target_gives_genuine_trends() {
        // With the target an exact solution of rough-data equation, all four
        // level trends are genuine: strictly decreasing distances, |log c_k|
        // and initial rates, with margins far above solver noise.
        let dir = tempfile::tempdir().unwrap();
        let ctx = OutputContext::new(dir.path().join("c"), false).unwrap();
        let mut cfg = base_cfg();
        cfg.target = CauchyTarget::RoughEquation;
        cfg.truncations = vec![2, 4, 8];
        let report = experiment_cauchy(&cfg, &ctx).unwrap();
        assert!(report.all_pass, "verdicts: {:?}", report.verdicts);
        let seq = |key: &str| -> Vec<f64> {
            report.measured[key]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_f64().unwrap())
                .collect()
        };
        for key in ["stability_distances", "abs_log_c", "phidot0_sups"] {
            let xs = seq(key);
            for w in xs.windows(2) {
                assert!(w[1] < w[0], "{key} not strictly decreasing: {xs:?}");
            }
        }
    }

    #[test]
    fn constant_nonlinearity_cannot_be_centered() {
        let dir = tempfile::tempdir().unwrap();
        let ctx = OutputContext::new(dir.path().join("c"), false).unwrap();
        let mut cfg = base_cfg();
        cfg.nonlinearity = Nonlinearity::new(0.0, 0.0, TrigPoly::constant(0.4, 2));
        assert!(matches!(
            experiment_cauchy(&cfg, &ctx),
            Err(HarnessError::Config(_))
        ));
    }
}
