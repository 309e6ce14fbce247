//! JSON configuration types. Unknown keys are rejected everywhere, and
//! every config is echoed verbatim into the report manifest.

use serde::{Deserialize, Serialize};

use crate::error::FieldError;
use crate::flow::FlowConfig;
use crate::geometry::TorusGeometry;
use crate::nonlinearity::{Nonlinearity, TrigPoly};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub n: usize,
    pub grid: usize,
}

impl GeometrySpec {
    pub fn build(&self) -> Result<TorusGeometry, FieldError> {
        TorusGeometry::new(self.n, self.grid)
    }
}

fn default_dt_init() -> f64 {
    1e-3
}
fn default_safety() -> f64 {
    0.25
}
fn default_floor() -> f64 {
    crate::kahler::DEFAULT_PD_FLOOR
}
fn default_elliptic_tol() -> f64 {
    1e-10
}
fn default_tol_stationarity() -> f64 {
    1e-6
}
fn default_alpha() -> f64 {
    0.5
}
fn default_cone_target() -> f64 {
    0.2
}
fn default_window() -> f64 {
    1.0
}
fn default_horizon_cap() -> f64 {
    10.0
}
fn default_snapshot_count() -> usize {
    11
}
fn default_tol_numeric_base() -> f64 {
    1e-6
}
fn default_profile_rel_tol() -> f64 {
    0.10
}
fn default_growth_min() -> f64 {
    0.20
}
fn default_cgrad_rel_tol() -> f64 {
    0.20
}
fn default_envelope_tol() -> f64 {
    1e-5
}
fn default_blocki_a() -> f64 {
    5.0
}
fn default_aubin_a() -> f64 {
    5.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub t_final: f64,
    #[serde(default = "default_dt_init")]
    pub dt_init: f64,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default)]
    pub log_c: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_floor")]
    pub positivity_floor: f64,
}

impl FlowSpec {
    pub fn build(&self) -> FlowConfig {
        FlowConfig {
            t_final: self.t_final,
            dt_init: self.dt_init,
            safety: self.safety,
            log_c: self.log_c,
            snapshot_times: self.snapshot_times.clone(),
            positivity_floor: self.positivity_floor,
        }
    }
}

/// Stationarity experiment: solve the self-consistent elliptic problem and
/// verify the flow stays put.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationarityConfig {
    pub geometry: GeometrySpec,
    pub nonlinearity: Nonlinearity,
    pub flow: FlowSpec,
    #[serde(default = "default_elliptic_tol")]
    pub elliptic_tol: f64,
    #[serde(default = "default_tol_stationarity")]
    pub tol_stationarity: f64,
    #[serde(default = "default_envelope_tol")]
    pub envelope_tol: f64,
}

/// How the Cauchy experiment manufactures its rough target φ★.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CauchyTarget {
    /// φ★ is the exact discrete solution of log det(g_φ) + F(φ,z) = 0 where
    /// F's z-part carries a rough random trigonometric polynomial (scaled so
    /// the solution's metric clears the cone target). The equation data is
    /// rough, the target solves it, and every convergence trend of the
    /// construction is genuine.
    RoughEquation,
    /// φ★ is a synthesized rough potential (scaled into the cone, shifted to
    /// unit limiting mass). It solves no equation of the family, so only the
    /// pairwise contraction bound is meaningful; the level sequences stall
    /// at the distance between the target and the solution manifold.
    RoughField,
}

impl Default for CauchyTarget {
    fn default() -> Self {
        Self::RoughEquation
    }
}

/// Cauchy-sequence experiment over truncation levels of a rough target.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyConfig {
    pub geometry: GeometrySpec,
    pub nonlinearity: Nonlinearity,
    #[serde(default)]
    pub target: CauchyTarget,
    pub seed: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Fourier cutoffs K defining u_k = truncate(φ★, K), increasing.
    pub truncations: Vec<usize>,
    #[serde(default = "default_cone_target")]
    pub target_min_eigenvalue: f64,
    #[serde(default = "default_window")]
    pub horizon_window: f64,
    #[serde(default = "default_horizon_cap")]
    pub horizon_cap: f64,
    #[serde(default = "default_snapshot_count")]
    pub snapshot_count: usize,
    #[serde(default = "default_dt_init")]
    pub dt_init: f64,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default = "default_floor")]
    pub positivity_floor: f64,
    #[serde(default = "default_elliptic_tol")]
    pub elliptic_tol: f64,
    /// tol_num = this + 10 · measured step-size error estimate.
    #[serde(default = "default_tol_numeric_base")]
    pub tol_numeric_base: f64,
    #[serde(default = "default_envelope_tol")]
    pub envelope_tol: f64,
}

/// Initial datum for the smoothing experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SmoothingInput {
    /// Rough random-Fourier datum; the same continuum function is sampled at
    /// every refinement level.
    Rough { seed: u64, alpha: f64, scale: f64 },
    /// Band-limited datum; the roughness-growth verdict is waived.
    Smooth { terms: TrigPoly },
}

/// Smoothing experiment across a refinement list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingConfig {
    pub n: usize,
    /// Grid sizes, increasing (e.g. [64, 128]).
    pub grids: Vec<usize>,
    pub nonlinearity: Nonlinearity,
    pub input: SmoothingInput,
    /// Positive-time probe at which smooth profiles must agree across N.
    pub t_star: f64,
    pub flow: FlowSpec,
    #[serde(default = "default_profile_rel_tol")]
    pub profile_rel_tol: f64,
    #[serde(default = "default_growth_min")]
    pub growth_min: f64,
    #[serde(default = "default_cgrad_rel_tol")]
    pub cgrad_rel_tol: f64,
    #[serde(default = "default_envelope_tol")]
    pub envelope_tol: f64,
    #[serde(default = "default_blocki_a")]
    pub blocki_a: f64,
    #[serde(default = "default_aubin_a")]
    pub aubin_a: f64,
}

/// Strictly positive density given as constant + trig polynomial.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    #[serde(default = "one")]
    pub constant: f64,
    #[serde(default)]
    pub terms: TrigPoly,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EllipticMode {
    /// det(g_ψ) = c·f for a fixed density f.
    FixedRhs { density: DensitySpec },
    /// log det(g_φ) + F(φ, z) = 0.
    SelfConsistent { nonlinearity: Nonlinearity },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipticConfig {
    pub geometry: GeometrySpec,
    pub mode: EllipticMode,
    #[serde(default = "default_elliptic_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Constant { value: f64 },
    Trig { terms: TrigPoly },
    Rough { seed: u64, alpha: f64, scale: f64 },
    Snapshot { path: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFlowConfig {
    pub geometry: GeometrySpec,
    pub initial: InitialSpec,
    pub nonlinearity: Nonlinearity,
    pub flow: FlowSpec,
    #[serde(default = "default_envelope_tol")]
    pub envelope_tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorConfig {
    /// Snapshot files, in increasing time order.
    pub snapshots: Vec<String>,
    /// Needed for φ̇-based quantities (defect checks, T tensor).
    #[serde(default)]
    pub nonlinearity: Option<Nonlinearity>,
    #[serde(default)]
    pub log_c: f64,
    #[serde(default = "default_blocki_a")]
    pub blocki_a: f64,
    #[serde(default = "default_aubin_a")]
    pub aubin_a: f64,
}
