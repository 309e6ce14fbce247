//! Stationarity experiment: a solution of the elliptic equation is a fixed
//! point of the flow. Solve log det(g_φ) + F(φ, z) = 0, integrate the flow
//! from the solution, and verify both the drift sup_t sup|φ(t) − φ(0)| and
//! sup_t sup|φ̇| stay below tolerance.

use crate::elliptic::{solve_self_consistent, EllipticOptions};
use crate::flow::run;

use super::config::StationarityConfig;
use super::report::{ExperimentReport, Verdict};
use super::{snapshot, HarnessError, OutputContext};

pub fn experiment_stationarity(
    cfg: &StationarityConfig,
    out: &OutputContext,
) -> Result<ExperimentReport, HarnessError> {
    let geom = cfg.geometry.build()?;
    let f = &cfg.nonlinearity;
    f.validate(geom)?;
    // Monotone family required: F′(s) = a + b·cos(s) ≥ a − |b| over the reals.
    if f.linear - f.sine.abs() < 0.0 {
        return Err(HarnessError::Config(format!(
            "stationarity needs F' ≥ 0; a − |b| = {}",
            f.linear - f.sine.abs()
        )));
    }
    let mut report = ExperimentReport::new("stationarity", serde_json::to_value(cfg)?);

    let opts = EllipticOptions {
        tol: cfg.elliptic_tol,
        ..Default::default()
    };
    let elliptic = solve_self_consistent(f, &opts, None, geom)?;
    report.runtime.absorb_elliptic(&elliptic);
    report.record_f64("elliptic_residual_sup", elliptic.residual_sup);
    report.record(
        "elliptic_newton_iters",
        serde_json::json!(elliptic.newton_iters),
    );
    report.push_verdict(Verdict::from_bool(
        "elliptic_converged",
        "self-consistent solve reached tolerance",
        elliptic.converged,
    ));
    if !elliptic.converged {
        // Abort with the partial report; nothing downstream is meaningful.
        report.record_file("report.json");
        report.write(&out.dir)?;
        return Ok(report);
    }

    let traj = run(&elliptic.solution, f, &cfg.flow.build())?;
    report.runtime.absorb_flow(&traj);

    let phi0 = &traj.snapshots[0].phi;
    let drift = traj
        .snapshots
        .iter()
        .map(|s| s.phi.sup_abs_diff(phi0))
        .fold(0.0, f64::max);
    // sup over every accepted step, not just snapshots.
    let sup_phidot = traj
        .series
        .iter()
        .map(|r| r.sup_abs_phidot)
        .fold(traj.snapshots[0].phidot.sup_abs(), f64::max);

    report.record_f64("drift_sup", drift);
    report.record_f64("phidot_sup", sup_phidot);
    report.push_verdict(Verdict::from_margin(
        "stationary_drift",
        "sup_t sup|φ(t) − φ(0)| ≤ tol_stationarity",
        cfg.tol_stationarity - drift,
    ));
    report.push_verdict(Verdict::from_margin(
        "stationary_phidot",
        "sup_t sup|φ̇(t)| ≤ tol_stationarity",
        cfg.tol_stationarity - sup_phidot,
    ));
    super::push_envelope_verdicts(&mut report, &traj, f, cfg.envelope_tol, "");
    let mass = super::conservation_drift(&traj);
    report.record_f64("mass_drift", mass);
    report.push_verdict(Verdict::from_margin(
        "mass_conservation",
        "|mean det_ratio − 1| ≤ 1e−9 at all snapshots",
        1e-9 - mass,
    ));

    snapshot::write_snapshot(&traj.snapshots[0], &out.path("solution.cmaf"))?;
    report.record_file("solution.cmaf");
    snapshot::write_snapshot(traj.final_state(), &out.path("final.cmaf"))?;
    report.record_file("final.cmaf");
    super::write_monitor_csv(&traj, 5.0, 5.0, &out.path("monitors.csv"))?;
    report.record_file("monitors.csv");
    if out.emit_plots {
        super::write_step_csv(&traj, &out.path("steps.csv"))?;
        report.record_file("steps.csv");
    }
    report.record_file("report.json");
    report.write(&out.dir)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{FlowSpec, GeometrySpec};
    use crate::nonlinearity::{Nonlinearity, TrigKind, TrigPoly, TrigTerm};

    fn out() -> (tempfile::TempDir, OutputContext) {
        let dir = tempfile::tempdir().unwrap();
        let ctx = OutputContext::new(dir.path().join("run"), false).unwrap();
        (dir, ctx)
    }

    #[test]
    fn identity_nonlinearity_is_trivially_stationary() {
        // F(s,z) = s: solution 0, drift ≤ 1e−10.
        let cfg = StationarityConfig {
            geometry: GeometrySpec { n: 1, grid: 16 },
            nonlinearity: Nonlinearity::new(1.0, 0.0, TrigPoly::zero()),
            flow: FlowSpec {
                t_final: 0.25,
                dt_init: 1e-2,
                safety: 0.25,
                log_c: 0.0,
                snapshot_times: vec![0.1],
                positivity_floor: 1e-8,
            },
            elliptic_tol: 1e-10,
            tol_stationarity: 1e-10,
            envelope_tol: 1e-5,
        };
        let (_d, ctx) = out();
        let report = experiment_stationarity(&cfg, &ctx).unwrap();
        assert!(report.all_pass, "verdicts: {:?}", report.verdicts);
        assert!(ctx.path("report.json").exists());
        assert!(ctx.path("solution.cmaf").exists());
    }

    #[test]
    fn constant_shift_fixed_point() {
        // F(s,z) = s + 0.3: solution ≡ −0.3, drift ≤ 1e−10.
        let cfg = StationarityConfig {
            geometry: GeometrySpec { n: 1, grid: 16 },
            nonlinearity: Nonlinearity::new(1.0, 0.0, TrigPoly::constant(0.3, 2)),
            flow: FlowSpec {
                t_final: 0.25,
                dt_init: 1e-2,
                safety: 0.25,
                log_c: 0.0,
                snapshot_times: vec![],
                positivity_floor: 1e-8,
            },
            elliptic_tol: 1e-10,
            tol_stationarity: 1e-10,
            envelope_tol: 1e-5,
        };
        let (_d, ctx) = out();
        let report = experiment_stationarity(&cfg, &ctx).unwrap();
        assert!(report.all_pass, "verdicts: {:?}", report.verdicts);
    }

    #[test]
    fn cosine_perturbed_fixed_point() {
        // F(s,z) = s − 0.01cos(2πx): drift ≤ 1e−6.
        let cfg = StationarityConfig {
            geometry: GeometrySpec { n: 1, grid: 32 },
            nonlinearity: Nonlinearity::new(
                1.0,
                0.0,
                TrigPoly {
                    terms: vec![TrigTerm {
                        coeff: -0.01,
                        wave: vec![1, 0],
                        kind: TrigKind::Cos,
                    }],
                },
            ),
            flow: FlowSpec {
                t_final: 0.2,
                dt_init: 1e-3,
                safety: 0.25,
                log_c: 0.0,
                snapshot_times: vec![0.1],
                positivity_floor: 1e-8,
            },
            elliptic_tol: 1e-10,
            tol_stationarity: 1e-6,
            envelope_tol: 1e-5,
        };
        let (_d, ctx) = out();
        let report = experiment_stationarity(&cfg, &ctx).unwrap();
        assert!(report.all_pass, "verdicts: {:?}", report.verdicts);
    }

    #[test]
    fn decreasing_f_rejected() {
        let cfg = StationarityConfig {
            geometry: GeometrySpec { n: 1, grid: 16 },
            nonlinearity: Nonlinearity::new(0.5, -1.0, TrigPoly::zero()),
            flow: FlowSpec {
                t_final: 0.1,
                dt_init: 1e-2,
                safety: 0.25,
                log_c: 0.0,
                snapshot_times: vec![],
                positivity_floor: 1e-8,
            },
            elliptic_tol: 1e-10,
            tol_stationarity: 1e-6,
            envelope_tol: 1e-5,
        };
        let (_d, ctx) = out();
        assert!(matches!(
            experiment_stationarity(&cfg, &ctx),
            Err(HarnessError::Config(_))
        ));
    }
}
