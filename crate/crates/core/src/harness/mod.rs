//! The construction pipeline as runnable batch experiments, plus
//! configuration, serialization, and reporting. No interactive surface:
//! callers run an experiment against a config and inspect the emitted
//! report, CSV series, and snapshot files.

pub mod cauchy;
pub mod config;
pub mod report;
pub mod smoothing;
pub mod snapshot;
pub mod stationarity;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::elliptic::{solve_fixed_rhs, solve_self_consistent, EllipticOptions};
use crate::error::{FieldError, FlowError, MetricError, SolveError};
use crate::field::ScalarField;
use crate::flow::{make_state, run, Trajectory};
use crate::monitors;
use crate::nonlinearity::Nonlinearity;
use crate::rough::random_rough_field;
use config::{EllipticConfig, EllipticMode, InitialSpec, MonitorConfig, RunFlowConfig};
use report::{CsvCell, CsvWriter, ExperimentReport, Verdict};
use snapshot::SnapshotError;

pub use report::RuntimeStats;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration invalid: {0}")]
    Config(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Where an experiment writes its artifacts.
#[derive(Debug, Clone)]
pub struct OutputContext {
    pub dir: PathBuf,
    /// Also emit per-step series CSVs shaped for external plotting.
    pub emit_plots: bool,
}

impl OutputContext {
    pub fn new(dir: impl Into<PathBuf>, emit_plots: bool) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir, emit_plots })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}

/// Envelope verdicts shared by every flow-running experiment: the C⁰
/// comparison bound and the φ̇ growth bound are test criteria, not warnings.
pub(crate) fn push_envelope_verdicts(
    report: &mut ExperimentReport,
    traj: &Trajectory,
    f: &Nonlinearity,
    envelope_tol: f64,
    tag: &str,
) {
    let env = monitors::c0_envelopes(traj, f);
    report.push_verdict(Verdict::from_margin(
        &format!("c0_envelope{tag}"),
        "max(φ − M_t, m_t − φ) ≤ tol over snapshots",
        envelope_tol - env.violation,
    ));
    let pd = monitors::phidot_envelope(traj, f);
    report.push_verdict(Verdict::from_bool(
        &format!("phidot_envelope{tag}"),
        "sup|φ̇(t)| ≤ sup|φ̇(0)|·e^(κt)·(1+1e−3) at all snapshots",
        pd.verdict,
    ));
    report.record_f64(&format!("kappa{tag}"), pd.kappa);
    report.record_f64(&format!("c0_violation{tag}"), env.violation);
}

/// Largest mass-conservation drift |mean det_ratio − 1| over all snapshots.
pub(crate) fn conservation_drift(traj: &Trajectory) -> f64 {
    traj.snapshots
        .iter()
        .map(|s| (s.metric.det_ratio().mean() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Writes the snapshot-aligned monitor series of a trajectory as a wide CSV.
pub(crate) fn write_monitor_csv(
    traj: &Trajectory,
    blocki_a: f64,
    aubin_a: f64,
    path: &Path,
) -> std::io::Result<()> {
    let series = monitors::standard_series(traj, blocki_a, aubin_a);
    let mut header = vec!["t".to_string()];
    header.extend(series.iter().map(|s| s.name.clone()));
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut w = CsvWriter::new(&header_refs);
    for (i, &t) in traj.snapshot_times().iter().enumerate() {
        let mut row = vec![CsvCell::F(t)];
        for s in &series {
            row.push(CsvCell::Opt(s.values[i]));
        }
        w.row(&row);
    }
    w.write(path)
}

/// Writes the per-step series of a trajectory (plot fodder).
pub(crate) fn write_step_csv(traj: &Trajectory, path: &Path) -> std::io::Result<()> {
    let mut w = CsvWriter::new(&[
        "t",
        "dt",
        "sup_abs_phi",
        "inf_phi",
        "sup_phi",
        "sup_abs_phidot",
        "min_eigenvalue",
        "mean_det_drift",
        "halvings",
    ]);
    for r in &traj.series {
        w.row(&[
            CsvCell::F(r.t),
            CsvCell::F(r.dt),
            CsvCell::F(r.sup_abs_phi),
            CsvCell::F(r.inf_phi),
            CsvCell::F(r.sup_phi),
            CsvCell::F(r.sup_abs_phidot),
            CsvCell::F(r.min_eigenvalue),
            CsvCell::F(r.mean_det_drift),
            CsvCell::I(r.halvings as i64),
        ]);
    }
    w.write(path)
}

/// `solve-elliptic`: one Yau or self-consistent solve, solution snapshot +
/// report.
pub fn run_solve_elliptic(
    cfg: &EllipticConfig,
    out: &OutputContext,
) -> Result<ExperimentReport, HarnessError> {
    let geom = cfg.geometry.build()?;
    let mut report = ExperimentReport::new("solve_elliptic", serde_json::to_value(cfg)?);
    let opts = EllipticOptions {
        tol: cfg.tol,
        ..Default::default()
    };
    let (elliptic, f_for_state) = match &cfg.mode {
        EllipticMode::FixedRhs { density } => {
            density.terms.validate(geom)?;
            let f = density.terms.eval_grid(geom).shifted(density.constant);
            let r = solve_fixed_rhs(&f, &opts, None)?;
            (
                r,
                Nonlinearity::new(0.0, 0.0, crate::nonlinearity::TrigPoly::zero()),
            )
        }
        EllipticMode::SelfConsistent { nonlinearity } => {
            let r = solve_self_consistent(nonlinearity, &opts, None, geom)?;
            (r, nonlinearity.clone())
        }
    };
    report.runtime.absorb_elliptic(&elliptic);
    report.record_f64("residual_sup", elliptic.residual_sup);
    report.record_f64("compatibility_constant", elliptic.c);
    report.record("newton_iters", serde_json::json!(elliptic.newton_iters));
    report.record(
        "warnings",
        serde_json::to_value(&elliptic.warnings).unwrap_or_default(),
    );
    report.push_verdict(Verdict::from_bool(
        "converged",
        "residual_sup ≤ tol within the iteration budget",
        elliptic.converged,
    ));
    report.push_verdict(Verdict::from_margin(
        "residual",
        "sup|log det(g_ψ) − target| ≤ tol",
        cfg.tol - elliptic.residual_sup,
    ));
    // Solution snapshot (t = 0); the metric is positive by construction.
    let state = make_state(0.0, elliptic.solution.clone(), &f_for_state, 0.0)?;
    snapshot::write_snapshot(&state, &out.path("solution.cmaf"))?;
    report.record_file("solution.cmaf");
    report.record_file("report.json");
    report.write(&out.dir)?;
    Ok(report)
}

/// `run-flow`: integrate the flow from a configured initial datum, with the
/// envelope and conservation verdicts applied.
pub fn run_flow_cmd(
    cfg: &RunFlowConfig,
    out: &OutputContext,
) -> Result<ExperimentReport, HarnessError> {
    let geom = cfg.geometry.build()?;
    cfg.nonlinearity.validate(geom)?;
    let mut report = ExperimentReport::new("run_flow", serde_json::to_value(cfg)?);
    let phi0 = match &cfg.initial {
        InitialSpec::Constant { value } => ScalarField::constant(geom, *value),
        InitialSpec::Trig { terms } => {
            terms.validate(geom)?;
            terms.eval_grid(geom)
        }
        InitialSpec::Rough { seed, alpha, scale } => {
            random_rough_field(geom, *seed, *alpha, *scale)?
        }
        InitialSpec::Snapshot { path } => {
            let (_, phi) = snapshot::read_snapshot_raw(Path::new(path))?;
            if phi.geom() != geom {
                return Err(HarnessError::Config(format!(
                    "snapshot geometry (n={}, N={}) differs from config",
                    phi.geom().n(),
                    phi.geom().grid()
                )));
            }
            phi
        }
    };
    let traj = run(&phi0, &cfg.nonlinearity, &cfg.flow.build())?;
    report.runtime.absorb_flow(&traj);
    push_envelope_verdicts(&mut report, &traj, &cfg.nonlinearity, cfg.envelope_tol, "");
    let drift = conservation_drift(&traj);
    report.push_verdict(Verdict::from_margin(
        "mass_conservation",
        "|mean det_ratio − 1| ≤ 1e−9 at all snapshots",
        1e-9 - drift,
    ));
    report.record_f64("mass_drift", drift);
    for snap in &traj.snapshots {
        let name = format!("state_t{}.cmaf", snap.t);
        snapshot::write_snapshot(snap, &out.path(&name))?;
        report.record_file(&name);
    }
    write_monitor_csv(&traj, 5.0, 5.0, &out.path("monitors.csv"))?;
    report.record_file("monitors.csv");
    if out.emit_plots {
        write_step_csv(&traj, &out.path("steps.csv"))?;
        report.record_file("steps.csv");
    }
    report.record_file("report.json");
    report.write(&out.dir)?;
    Ok(report)
}

/// `monitor`: recompute the monitor suite over stored snapshots.
pub fn run_monitor(
    cfg: &MonitorConfig,
    out: &OutputContext,
) -> Result<ExperimentReport, HarnessError> {
    if cfg.snapshots.is_empty() {
        return Err(HarnessError::Config("no snapshot files given".into()));
    }
    let mut report = ExperimentReport::new("monitor", serde_json::to_value(cfg)?);
    let f = cfg
        .nonlinearity
        .clone()
        .unwrap_or_else(|| Nonlinearity::new(0.0, 0.0, crate::nonlinearity::TrigPoly::zero()));
    let mut snapshots = Vec::new();
    for p in &cfg.snapshots {
        snapshots.push(snapshot::read_snapshot(Path::new(p), &f, cfg.log_c)?);
    }
    for w in snapshots.windows(2) {
        if w[1].t <= w[0].t {
            return Err(HarnessError::Config(format!(
                "snapshot times not strictly increasing: {} then {}",
                w[0].t, w[1].t
            )));
        }
        if w[1].phi.geom() != w[0].phi.geom() {
            return Err(HarnessError::Config(
                "snapshots live on different grids".into(),
            ));
        }
    }
    let t_final = snapshots.last().unwrap().t.max(1e-12);
    let traj = Trajectory {
        snapshots,
        series: Vec::new(),
        config: crate::flow::FlowConfig {
            t_final,
            log_c: cfg.log_c,
            ..Default::default()
        },
        steps: 0,
        rhs_evals: 0,
    };
    write_monitor_csv(&traj, cfg.blocki_a, cfg.aubin_a, &out.path("monitors.csv"))?;
    report.record_file("monitors.csv");
    let series = monitors::standard_series(&traj, cfg.blocki_a, cfg.aubin_a);
    let mut all_finite = true;
    for s in &series {
        for v in s.values.iter().flatten() {
            all_finite &= v.is_finite();
        }
    }
    report.push_verdict(Verdict::from_bool(
        "monitors_finite",
        "every defined monitor value is finite",
        all_finite,
    ));
    if let Some(c) = monitors::gradient_shape_constant(&traj) {
        report.record_f64("gradient_shape_constant", c);
    }
    // With a nonlinearity and ≥3 evenly spaced snapshots, check the T-tensor
    // identity at the interior ones.
    if cfg.nonlinearity.is_some() && traj.snapshots.len() >= 3 {
        let mut worst: Option<f64> = None;
        for i in 1..traj.snapshots.len() - 1 {
            if let Ok(r) = monitors::t_tensor_identity_residual(&traj, i, &f) {
                worst = Some(worst.map_or(r, |w: f64| w.max(r)));
            }
        }
        if let Some(w) = worst {
            report.record_f64("t_tensor_identity_residual", w);
        }
    }
    report.record_file("report.json");
    report.write(&out.dir)?;
    Ok(report)
}
