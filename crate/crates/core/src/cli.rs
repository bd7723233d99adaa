//! Scenario-driven front end.
//!
//! `warpmech <subcommand> --config <path> [--out <dir>] [--seed N] [--tol-scale F]`
//!
//! Exit codes: `0` when every enabled check passes, `1` when any check fails,
//! `2` on a config, schema or I/O error. Each check draws its sample points
//! from `SplitMix64(seed ^ fnv1a64(check name))`, so reports depend only on
//! the config and the seed.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::canonical::{
    action_energy_gap, from_action, pushforward_residual, symplectomorphism_residual, to_action, ActionImage, AlcubierreBranch, BranchSpec,
};
use crate::error::{Result, WarpError};
use crate::flow::{drift_report, integrate, write_csv, IntegratorSpec, Monitor, Trajectory};
use crate::master::{
    bi_hamiltonian_field_residual, bi_hamiltonian_residual, conformal_check, hierarchy_bracket_residual, hierarchy_commutator, master_contract,
    oevel_relations_check, schouten_residual, BarFamily, MasterIntegral, Q1Power, SchoutenCounterexample,
};
use crate::metrics::{godel_regime_warning, MetricModel, VsProfile};
use crate::numdiff::Matrix8;
use crate::phase::{bivector_family, hamiltonian_contract_residual, poisson_bracket, Chart, PhasePoint};
use crate::recursion::{
    action_trace_closed_form, alcubierre_printed_trace, degenerate_trace_closed_form, godel_printed_trace, lie_derivative_tensor,
    nijenhuis_torsion, pullback_action_operator, recursion_action, recursion_alcubierre_degenerate, recursion_alcubierre_original,
    recursion_alcubierre_pullback, recursion_godel_original, spectrum_pairing_gap, torsion_max, trace_powers, ActionOperator,
    AlcubierrePullback, TorsionCounterexample,
};
use crate::rng::{action_point, alcubierre_point, alcubierre_profile_point, godel_point, original_point, SplitMix64, DEFAULT_Q_BOX};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Integrate,
    Transform,
    CheckTorsion,
    CheckInvariants,
    CheckMaster,
    CheckAll,
}

impl Subcommand {
    fn groups(self) -> &'static [Group] {
        match self {
            Subcommand::Integrate => &[Group::Trajectory],
            Subcommand::Transform => &[Group::Transform],
            Subcommand::CheckTorsion => &[Group::Torsion],
            Subcommand::CheckInvariants => &[Group::Trajectory, Group::Invariants],
            Subcommand::CheckMaster => &[Group::Master],
            Subcommand::CheckAll => &[Group::Trajectory, Group::Transform, Group::Invariants, Group::Torsion, Group::Master],
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "warpmech", version, about = "Geodesic flows, canonical maps and recursion-operator checks for warp and Gödel metrics")]
pub struct Args {
    #[arg(value_enum)]
    pub subcommand: Subcommand,
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sampling seed (overrides `seed`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Multiplies every upper-bound tolerance.
    #[arg(long = "tol-scale")]
    pub tol_scale: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub q: [f64; 4],
    pub p: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub name: String,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default = "yes")]
    pub enabled: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Forward,
    Inverse,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformConfig {
    #[serde(default)]
    pub direction: Direction,
    /// CSV with a header row and eight numeric columns.
    #[serde(default)]
    pub input_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

fn default_monitors() -> Vec<String> {
    vec!["H".into()]
}
fn default_samples() -> usize {
    100
}
fn default_box() -> [f64; 2] {
    DEFAULT_Q_BOX
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub model: MetricModel,
    pub initial_state: StateConfig,
    pub integrator: IntegratorSpec,
    pub t_span: [f64; 2],
    #[serde(default)]
    pub branch: Option<BranchSpec>,
    #[serde(default = "default_monitors")]
    pub monitors: Vec<String>,
    /// Overrides for the check catalogue. Printed-form checks run only when
    /// listed here.
    #[serde(default)]
    pub checks: Vec<CheckConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Box for action-coordinate `Q^ν` in hierarchy and operator checks.
    #[serde(default = "default_box")]
    pub sampling_box: [f64; 2],
    #[serde(default)]
    pub transform: TransformConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            WarpError::Config(if path == "." { e.inner().to_string() } else { format!("{path}: {}", e.inner()) })
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        Self::from_json(&text)
    }

    pub fn initial_point(&self) -> PhasePoint {
        PhasePoint::new(self.initial_state.q, self.initial_state.p)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !self.initial_state.q.iter().chain(&self.initial_state.p).all(|v| v.is_finite()) {
            return Err(WarpError::Config("initial_state must be finite".into()));
        }
        self.integrator.validate()?;
        let [t0, t1] = self.t_span;
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return Err(WarpError::Config(format!("t_span must be finite and increasing, got [{t0}, {t1}]")));
        }
        if let Some(branch) = &self.branch {
            branch.validate()?;
            let consistent = match (branch, &self.model) {
                (BranchSpec::Alcubierre { vs, .. }, MetricModel::AlcubierreLimit { profile: VsProfile::Constant { v0 } }) => vs == v0,
                (BranchSpec::Godel { omega }, MetricModel::GodelApprox { omega: w }) => omega == w,
                _ => false,
            };
            if !consistent {
                return Err(WarpError::Config(
                    "branch must match the model (alcubierre branch with constant v_s equal to v0, or godel branch with the model's omega)".into(),
                ));
            }
        }
        for name in &self.monitors {
            Monitor::from_name(&self.model, name).map_err(|e| WarpError::Config(format!("monitors: {e}")))?;
        }
        for (i, c) in self.checks.iter().enumerate() {
            if find_check(&c.name).is_none() {
                return Err(WarpError::Config(format!("checks[{i}].name: unknown check `{}`", c.name)));
            }
            if let Some(tol) = c.tolerance {
                if !(tol.is_finite() && tol > 0.0) {
                    return Err(WarpError::Config(format!("checks[{i}].tolerance must be positive, got {tol}")));
                }
            }
            if self.checks[..i].iter().any(|d| d.name == c.name) {
                return Err(WarpError::Config(format!("checks[{i}].name: `{}` listed twice", c.name)));
            }
        }
        if self.samples == 0 {
            return Err(WarpError::Config("samples must be at least 1".into()));
        }
        let [lo, hi] = self.sampling_box;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
            return Err(WarpError::Config(format!("sampling_box must satisfy 0 < lo < hi, got [{lo}, {hi}]")));
        }
        Ok(())
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> WarpError {
    WarpError::Io { path: path.display().to_string(), message: e.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Group {
    Trajectory,
    Transform,
    Invariants,
    Torsion,
    Master,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// Passes when `residual ≤ tolerance`.
    Upper,
    /// Passes when `residual > tolerance` (detector checks).
    Lower,
}

struct CheckDef {
    name: &'static str,
    anchor: &'static str,
    tolerance: f64,
    bound: Bound,
    group: Group,
    printed: bool,
}

const fn def(name: &'static str, anchor: &'static str, tolerance: f64, group: Group) -> CheckDef {
    CheckDef { name, anchor, tolerance, bound: Bound::Upper, group, printed: false }
}

const fn printed(name: &'static str, anchor: &'static str, tolerance: f64, group: Group) -> CheckDef {
    CheckDef { name, anchor, tolerance, bound: Bound::Upper, group, printed: true }
}

const fn detector(name: &'static str, anchor: &'static str, group: Group) -> CheckDef {
    CheckDef { name, anchor, tolerance: 0.01, bound: Bound::Lower, group, printed: false }
}

const CATALOGUE: &[CheckDef] = &[
    def("energy_drift", "H is conserved along X_H (relative drift)", 1e-8, Group::Trajectory),
    def("trace_drift", "Tr(T^h) is conserved along X_H (relative drift)", 1e-8, Group::Trajectory),
    def("round_trip", "canonical map followed by its inverse is the identity", 1e-12, Group::Transform),
    def("hamiltonian_contract", "i_{X_H} omega + dH = 0", 1e-10, Group::Invariants),
    def("symplectomorphism", "J^T Omega J = Omega for the canonical map", 1e-8, Group::Invariants),
    def("pushforward", "canonical map pushes X_H forward to -d/dP1", 1e-8, Group::Invariants),
    def("action_energy", "Q1 = H on the canonical map image", 1e-10, Group::Invariants),
    def("torsion_action", "Nijenhuis torsion of T = diag(Q, Q) vanishes", 1e-9, Group::Torsion),
    def("lie_x0_t", "L_{X0} T = 0 in action coordinates", 1e-10, Group::Torsion),
    def("spectrum_pairing", "spectrum of T is doubly degenerate", 1e-7, Group::Torsion),
    def("trace_closed_form", "Tr(T^h) = 2 sum_nu (Q^nu)^h, h = 1..4 (relative)", 1e-12, Group::Torsion),
    def("torsion_original", "Nijenhuis torsion of the original-coordinate operator T_A vanishes", 1e-9, Group::Torsion),
    def("pullback_closed_form", "closed-form T_A equals the chain-rule pullback of T", 1e-6, Group::Torsion),
    def("degenerate_trace", "Tr(T_A^h) = 2(p2^h + p3^h + p4^h) on the degenerate branch (relative)", 1e-12, Group::Torsion),
    def("godel_pullback_trace", "Tr(T_G^h) = 2((H'_G)^h + p1^h + p3^h + p4^h) for the pulled-back T_G (relative)", 1e-10, Group::Torsion),
    printed("printed_blocks_alcubierre", "printed block assembly of T_A equals the chain-rule pullback of T", 1e-6, Group::Torsion),
    printed("printed_trace_alcubierre", "printed five-term Tr(T_A^h) equals the matrix trace (relative)", 1e-10, Group::Torsion),
    printed("printed_trace_godel", "printed five-term Tr(T_G) equals the matrix trace (relative)", 1e-10, Group::Torsion),
    detector("torsion_counterexample", "torsion detector flags T = diag(Q2, 0, ..)", Group::Torsion),
    def("hierarchy_bracket", "[X_i, Y_j] = X_{H_{i+j}} with H_{i+j} = {H_i, H~_j} (relative)", 1e-8, Group::Master),
    printed("hierarchy_bracket_printed", "[X_i, Y_j] = -(j+1)(i+j+1)(Q1)^{i+j} d/dP1 (relative)", 1e-8, Group::Master),
    def("hierarchy_hamiltonian", "{H_i, H~_j} = (i+1)(Q1)^{i+j+1} (relative)", 1e-10, Group::Master),
    def("hierarchy_commutator", "[X_i, X_{i+j}] = 0", 1e-10, Group::Master),
    def("schouten", "[P_a, P_b]_NS = 0 for a, b in {0, 1, 2}", 1e-9, Group::Master),
    def("conformal", "L_{Y0} (P, P1, H) = (alpha, beta, gamma) (P, P1, H) with (0, -1, -1)", 1e-9, Group::Master),
    def("oevel", "Oevel relations for Y'_h on Y'_l, X'_l, P'_l, omega'_l, T, H'_l", 1e-7, Group::Master),
    def("bi_hamiltonian", "X_i = P dH~_i = P1 dH~_{i+1} for the shifted ladder", 1e-9, Group::Master),
    printed("bi_hamiltonian_printed", "P dH~_i = P1 dH~_{i+1} for the printed ladder", 1e-9, Group::Master),
    def("master_contract", "[[X0, Y_j], X0] = 0 with [X0, Y_j] nonzero", 1e-10, Group::Master),
    detector("schouten_counterexample", "Schouten detector flags Q1 P1 d/dP1 ^ d/dQ2", Group::Master),
];

fn find_check(name: &str) -> Option<&'static CheckDef> {
    CATALOGUE.iter().find(|c| c.name == name)
}

/// Names of every check the CLI knows, in report order.
pub fn check_names() -> impl Iterator<Item = &'static str> {
    CATALOGUE.iter().map(|c| c.name)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub anchor: String,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NotApplicable {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftSummary {
    pub max_abs: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub samples: usize,
    pub t_final: f64,
    pub final_state: [f64; 8],
    pub drift: BTreeMap<String, DriftSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformSummary {
    pub direction: Direction,
    pub columns: Vec<String>,
    pub input: [f64; 8],
    pub output: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_rows: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MasterRow {
    pub relation: &'static str,
    pub h: u32,
    pub l: u32,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub scenario: String,
    pub subcommand: Subcommand,
    pub model: String,
    pub seed: u64,
    pub tol_scale: f64,
    pub samples: usize,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectorySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transform: Option<TransformSummary>,
    pub warnings: Vec<String>,
    pub not_applicable: Vec<NotApplicable>,
    pub all_pass: bool,
}

impl Report {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Everything a run produced, before it is written to disk.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub trajectory: Option<Trajectory>,
    pub transform_csv: Option<String>,
    pub master_rows: Vec<MasterRow>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.all_pass {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        }
    }

    /// Writes `report.json`, plus `trajectory.csv`, `transform.csv` and
    /// `master.csv` when produced.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        let put = |name: &str, text: &str| {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| io_error(&path, e))
        };
        put("report.json", &self.report.to_json())?;
        if let Some(traj) = &self.trajectory {
            write_csv(traj, &dir.join("trajectory.csv"))?;
        }
        if let Some(csv) = &self.transform_csv {
            put("transform.csv", csv)?;
        }
        if !self.master_rows.is_empty() {
            let mut out = String::from("relation,h,l,residual,pass\n");
            for r in &self.master_rows {
                let _ = writeln!(out, "{},{},{},{:.16e},{}", r.relation, r.h, r.l, r.residual, r.pass);
            }
            put("master.csv", &out)?;
        }
        Ok(())
    }
}

fn fnv1a64(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Maximum that keeps NaN, so a non-finite residual fails its check.
fn nanmax(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn nanmin(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.min(b)
    }
}

fn matrix_gap(a: &Matrix8, b: &Matrix8) -> f64 {
    (a - b).iter().fold(0.0, |m, v| nanmax(m, v.abs()))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn point_gap(a: &[f64; 8], b: &[f64; 8]) -> f64 {
    (0..8).fold(0.0, |m, i| nanmax(m, (a[i] - b[i]).abs()))
}

struct Ctx<'a> {
    cfg: &'a ScenarioConfig,
    seed: u64,
    tol_scale: f64,
    subcommand: Subcommand,
    trajectory: Option<std::result::Result<Trajectory, WarpError>>,
    transform_gap: Option<f64>,
    master_rows: Vec<MasterRow>,
}

enum Measure {
    Value(f64),
    NotApplicable(String),
}

impl Ctx<'_> {
    fn rng(&self, name: &str) -> SplitMix64 {
        SplitMix64::new(self.seed ^ fnv1a64(name))
    }

    fn n(&self) -> usize {
        self.cfg.samples
    }

    /// Max of `f` over `samples` draws.
    fn scan(&self, name: &str, mut f: impl FnMut(&mut SplitMix64) -> Result<f64>) -> Result<f64> {
        let mut rng = self.rng(name);
        let mut m = 0.0;
        for _ in 0..self.n() {
            m = nanmax(m, f(&mut rng)?);
        }
        Ok(m)
    }

    fn scan_min(&self, name: &str, mut f: impl FnMut(&mut SplitMix64) -> Result<f64>) -> Result<f64> {
        let mut rng = self.rng(name);
        let mut m = f64::INFINITY;
        for _ in 0..self.n() {
            m = nanmin(m, f(&mut rng)?);
        }
        Ok(m)
    }

    fn action(&self, rng: &mut SplitMix64) -> PhasePoint {
        action_point(rng, self.cfg.sampling_box)
    }

    fn constant_vs(&self) -> Option<f64> {
        match self.cfg.model {
            MetricModel::AlcubierreLimit { profile: VsProfile::Constant { v0 } } => Some(v0),
            _ => None,
        }
    }

    fn q_s(&self) -> f64 {
        match self.cfg.branch {
            Some(BranchSpec::Alcubierre { q_s, .. }) => q_s,
            _ => 0.0,
        }
    }

    fn branch_point(&self, spec: &BranchSpec, rng: &mut SplitMix64) -> PhasePoint {
        match *spec {
            BranchSpec::Alcubierre { branch, vs, .. } => alcubierre_point(rng, vs, branch),
            BranchSpec::Godel { omega } => godel_point(rng, omega),
        }
    }

    fn measure(&mut self, def: &CheckDef) -> Result<Measure> {
        use Measure::{NotApplicable as Na, Value};
        let cfg = self.cfg;
        let name = def.name;
        let needs_constant = || Na("needs an alcubierre_limit model with a constant v_s profile".into());
        let needs_full_branch = || Na("needs a non-degenerate branch".into());
        Ok(match name {
            "energy_drift" => match self.trajectory.as_ref().expect("trajectory group ran") {
                Ok(traj) => Value(drift_report(traj, "H")?.relative),
                Err(e) => return Err(e.clone()),
            },
            "trace_drift" => match self.trajectory.as_ref().expect("trajectory group ran") {
                Ok(traj) => {
                    let traces: Vec<&str> = traj.monitors.iter().map(|m| m.name.as_str()).filter(|m| *m != "H").collect();
                    if traces.is_empty() {
                        return Ok(Na("no trace monitor requested or applicable".into()));
                    }
                    let mut m = 0.0;
                    for t in traces {
                        m = nanmax(m, drift_report(traj, t)?.relative);
                    }
                    Value(m)
                }
                Err(e) => return Err(e.clone()),
            },
            "round_trip" => {
                let Some(spec) = &cfg.branch else { return Ok(Na("needs a branch".into())) };
                let sampled = self.scan(name, |rng| {
                    let x = self.branch_point(spec, rng);
                    let back = from_action(spec, &to_action(spec, &x)?)?;
                    Ok(point_gap(&back.to_array(), &x.to_array()))
                })?;
                Value(nanmax(sampled, self.transform_gap.unwrap_or(0.0)))
            }
            "hamiltonian_contract" => Value(self.scan(name, |rng| hamiltonian_contract_residual(&cfg.model, &original_point(rng, &cfg.model).to_array()))?),
            "symplectomorphism" | "pushforward" | "action_energy" => {
                let Some(spec) = &cfg.branch else { return Ok(Na("needs a branch".into())) };
                if matches!(spec, BranchSpec::Alcubierre { branch: AlcubierreBranch::Degenerate, .. }) {
                    return Ok(needs_full_branch());
                }
                if name != "symplectomorphism" && matches!(spec, BranchSpec::Godel { .. }) {
                    return Ok(Na("the godel map straightens H'_G, not the approximate H_G".into()));
                }
                Value(self.scan(name, |rng| {
                    let x = self.branch_point(spec, rng);
                    match name {
                        "symplectomorphism" => symplectomorphism_residual(spec, &x),
                        "pushforward" => pushforward_residual(spec, &x),
                        _ => action_energy_gap(spec, &x),
                    }
                })?)
            }
            "torsion_action" => Value(self.scan(name, |rng| Ok(torsion_max(&nijenhuis_torsion(&ActionOperator, &self.action(rng).to_array())?)))?),
            "lie_x0_t" => Value(self.scan(name, |rng| {
                let l = lie_derivative_tensor(&crate::flow::ActionFlow, &ActionOperator, &self.action(rng).to_array())?;
                Ok(l.abs().max())
            })?),
            "spectrum_pairing" => Value(self.scan(name, |rng| Ok(spectrum_pairing_gap(&recursion_action(&self.action(rng))?)))?),
            "trace_closed_form" => Value(self.scan(name, |rng| {
                let x = self.action(rng);
                let tr = trace_powers(&recursion_action(&x)?, 4);
                Ok((1..=4).fold(0.0, |m, h| nanmax(m, rel(tr[h - 1], action_trace_closed_form(&x, h as u32)))))
            })?),
            "torsion_original" => {
                let Some(vs) = self.constant_vs() else { return Ok(needs_constant()) };
                let sheet = match cfg.branch {
                    Some(BranchSpec::Alcubierre { branch: AlcubierreBranch::Wa, .. }) => AlcubierreBranch::Wa,
                    _ => AlcubierreBranch::Wb,
                };
                Value(self.scan(name, |rng| Ok(torsion_max(&nijenhuis_torsion(&AlcubierrePullback { vs }, &alcubierre_point(rng, vs, sheet).to_array())?)))?)
            }
            "pullback_closed_form" => {
                let Some(vs) = self.constant_vs() else { return Ok(needs_constant()) };
                let q_s = self.q_s();
                let mut k = 0usize;
                Value(self.scan(name, |rng| {
                    let branch = if k.is_multiple_of(2) { AlcubierreBranch::Wb } else { AlcubierreBranch::Wa };
                    k += 1;
                    let x = alcubierre_point(rng, vs, branch);
                    let chain = pullback_action_operator(&BranchSpec::Alcubierre { branch, vs, q_s }, &x, None)?;
                    Ok(matrix_gap(&recursion_alcubierre_pullback(&x, vs)?, &chain))
                })?)
            }
            "printed_blocks_alcubierre" => {
                let Some(vs) = self.constant_vs() else { return Ok(needs_constant()) };
                let spec = BranchSpec::Alcubierre { branch: AlcubierreBranch::Wb, vs, q_s: self.q_s() };
                let profile = VsProfile::Constant { v0: vs };
                Value(self.scan(name, |rng| {
                    let x = alcubierre_point(rng, vs, AlcubierreBranch::Wb);
                    Ok(matrix_gap(&recursion_alcubierre_original(&x, &profile)?, &pullback_action_operator(&spec, &x, None)?))
                })?)
            }
            "degenerate_trace" => {
                let Some(vs) = self.constant_vs() else { return Ok(needs_constant()) };
                Value(self.scan(name, |rng| {
                    let x = alcubierre_point(rng, vs, AlcubierreBranch::Degenerate);
                    let tr = trace_powers(&recursion_alcubierre_degenerate(&x, vs)?, 4);
                    Ok((1..=4).fold(0.0, |m, h| nanmax(m, rel(tr[h - 1], degenerate_trace_closed_form(&x, h as u32)))))
                })?)
            }
            "printed_trace_alcubierre" => {
                let MetricModel::AlcubierreLimit { profile } = &cfg.model else {
                    return Ok(Na("needs an alcubierre_limit model".into()));
                };
                Value(self.scan(name, |rng| {
                    let x = alcubierre_profile_point(rng, profile)?;
                    let tr = trace_powers(&recursion_alcubierre_original(&x, profile)?, 4);
                    let mut m = 0.0;
                    for h in 1..=4 {
                        m = nanmax(m, rel(alcubierre_printed_trace(&x, profile, h as u32)?, tr[h - 1]));
                    }
                    Ok(m)
                })?)
            }
            "printed_trace_godel" | "godel_pullback_trace" => {
                let MetricModel::GodelApprox { omega } = cfg.model else {
                    return Ok(Na("needs a godel_approx model".into()));
                };
                if omega == 0.0 {
                    return Ok(Na("needs omega != 0".into()));
                }
                Value(self.scan(name, |rng| {
                    let x = godel_point(rng, omega);
                    if name == "printed_trace_godel" {
                        let tr = recursion_godel_original(&x, omega)?.trace();
                        return Ok(rel(godel_printed_trace(&x, omega, 1)?, tr));
                    }
                    let spec = BranchSpec::Godel { omega };
                    let y = to_action(&spec, &x)?.full()?;
                    let tr = trace_powers(&pullback_action_operator(&spec, &x, None)?, 4);
                    Ok((1..=4).fold(0.0, |m, h| nanmax(m, rel(tr[h - 1], action_trace_closed_form(&y, h as u32)))))
                })?)
            }
            "torsion_counterexample" => {
                Value(self.scan_min(name, |rng| Ok(torsion_max(&nijenhuis_torsion(&TorsionCounterexample, &self.action(rng).to_array())?)))?)
            }
            "hierarchy_bracket" | "hierarchy_bracket_printed" => {
                let printed = name.ends_with("printed");
                Value(self.scan(name, |rng| {
                    let x = self.action(rng);
                    let mut m = 0.0;
                    for i in 0..=4u32 {
                        for j in 0..=4u32 {
                            let c = if printed { j + 1 } else { i + 1 };
                            let scale = ((c * (i + j + 1)) as f64 * x.q[0].powi((i + j) as i32)).max(1.0);
                            m = nanmax(m, hierarchy_bracket_residual(i, j, &x, printed)? / scale);
                        }
                    }
                    Ok(m)
                })?)
            }
            "hierarchy_hamiltonian" => Value(self.scan(name, |rng| {
                let x = self.action(rng);
                let mut m = 0.0;
                for i in 0..=4u32 {
                    for j in 0..=4u32 {
                        let b = poisson_bracket(&Q1Power::hierarchy(i), &MasterIntegral { j }, &x, 0)?;
                        m = nanmax(m, rel(b, (i + 1) as f64 * x.q[0].powi((i + j + 1) as i32)));
                    }
                }
                Ok(m)
            })?),
            "hierarchy_commutator" => Value(self.scan(name, |rng| {
                let x = self.action(rng);
                let mut m = 0.0;
                for i in 0..=4 {
                    for j in 0..=4 {
                        m = nanmax(m, hierarchy_commutator(i, j, &x)?);
                    }
                }
                Ok(m)
            })?),
            "schouten" => Value(self.scan(name, |rng| {
                let x = self.action(rng).to_array();
                let mut m = 0.0;
                for a in 0..=2 {
                    for b in a..=2 {
                        m = nanmax(m, schouten_residual(&bivector_family(a), &bivector_family(b), &x)?);
                    }
                }
                Ok(m)
            })?),
            "conformal" => Value(self.scan(name, |rng| {
                let c = conformal_check(&self.action(rng))?;
                Ok(nanmax(c.alpha.abs(), nanmax((c.beta + 1.0).abs(), (c.gamma + 1.0).abs())))
            })?),
            "oevel" => {
                let mut table: BTreeMap<(u32, u32, usize), (&'static str, f64)> = BTreeMap::new();
                let m = self.scan(name, |rng| {
                    let x = self.action(rng);
                    let mut m = 0.0;
                    for h in 0..=3 {
                        for l in 0..=3 {
                            for (k, e) in oevel_relations_check(h, l, &x)?.entries.iter().enumerate() {
                                let r = nanmax(e.specific, e.general);
                                let slot = table.entry((h, l, k)).or_insert((e.relation, 0.0));
                                slot.1 = nanmax(slot.1, r);
                                m = nanmax(m, r);
                            }
                        }
                    }
                    Ok(m)
                })?;
                let tol = self.tolerance(def);
                let mut rows: Vec<MasterRow> =
                    table.into_iter().map(|((h, l, _), (relation, residual))| MasterRow { relation, h, l, residual, pass: residual <= tol }).collect();
                rows.sort_by_key(|r| (r.relation, r.h, r.l));
                self.master_rows = rows;
                Value(m)
            }
            "bi_hamiltonian" => Value(self.scan(name, |rng| {
                let x = self.action(rng);
                let mut m = 0.0;
                for i in 0..=3 {
                    m = nanmax(m, bi_hamiltonian_residual(i, BarFamily::Shifted, &x)?);
                    m = nanmax(m, bi_hamiltonian_field_residual(i, &x)?);
                }
                Ok(m)
            })?),
            "bi_hamiltonian_printed" => Value(self.scan(name, |rng| {
                let x = self.action(rng);
                let mut m = 0.0;
                for i in 0..=3 {
                    m = nanmax(m, bi_hamiltonian_residual(i, BarFamily::Printed, &x)?);
                }
                Ok(m)
            })?),
            "master_contract" => Value(self.scan(name, |rng| {
                let x = self.action(rng);
                let mut m = 0.0;
                for j in 0..=4 {
                    let (first, second) = master_contract(j, &x)?;
                    m = nanmax(m, if first > 0.0 { second } else { f64::INFINITY });
                }
                Ok(m)
            })?),
            "schouten_counterexample" => Value(self.scan_min(name, |rng| {
                schouten_residual(&bivector_family(0), &SchoutenCounterexample, &self.action(rng).to_array())
            })?),
            other => unreachable!("check `{other}` has no evaluator"),
        })
    }

    fn override_for(&self, name: &str) -> Option<&CheckConfig> {
        self.cfg.checks.iter().find(|c| c.name == name)
    }

    fn tolerance(&self, def: &CheckDef) -> f64 {
        let base = self.override_for(def.name).and_then(|c| c.tolerance).unwrap_or(def.tolerance);
        match def.bound {
            Bound::Upper => base * self.tol_scale,
            Bound::Lower => base,
        }
    }


    fn enabled(&self, def: &CheckDef) -> bool {
        match self.override_for(def.name) {
            Some(c) => c.enabled,
            None => !def.printed,
        }
    }
}

fn integrate_scenario(cfg: &ScenarioConfig) -> (std::result::Result<Trajectory, WarpError>, Vec<String>) {
    let mut skipped = Vec::new();
    let mut monitors = vec![Monitor::energy(&cfg.model)];
    for name in &cfg.monitors {
        if name == "H" {
            continue;
        }
        match Monitor::from_name(&cfg.model, name) {
            Ok(m) => monitors.push(m),
            Err(e) => skipped.push(e.to_string()),
        }
    }
    let [t0, t1] = cfg.t_span;
    (integrate(&cfg.model, &cfg.initial_point(), (t0, t1), &cfg.integrator, &monitors), skipped)
}

fn regime_warnings(cfg: &ScenarioConfig, traj: Option<&Trajectory>) -> Vec<String> {
    let MetricModel::GodelApprox { omega } = cfg.model else { return Vec::new() };
    let initial = cfg.initial_point();
    let worst = traj
        .map(|t| t.states.iter().map(|s| s.q[1].abs()).fold(initial.q[1].abs(), f64::max))
        .unwrap_or(initial.q[1].abs());
    if godel_regime_warning(&cfg.model, worst) {
        vec![format!("godel_approx outside its small-rotation regime: (q2 omega)^2 reaches {:.6e} > 0.1", (worst * omega).powi(2))]
    } else {
        Vec::new()
    }
}

const ORIGINAL_COLUMNS: [&str; 8] = ["q1", "q2", "q3", "q4", "p1", "p2", "p3", "p4"];
const ACTION_COLUMNS: [&str; 8] = ["Q1", "Q2", "Q3", "Q4", "P1", "P2", "P3", "P4"];
const REDUCED_COLUMNS: [&str; 7] = ["q1", "Q2", "Q3", "Q4", "P2", "P3", "P4"];

/// Maps one point in the configured direction; returns the output and the
/// round-trip gap.
fn transform_point(spec: &BranchSpec, direction: Direction, input: &[f64; 8]) -> Result<(Vec<f64>, f64)> {
    match direction {
        Direction::Forward => {
            let x = PhasePoint::from_array(input, Chart::Original);
            let image = to_action(spec, &x)?;
            let back = from_action(spec, &image)?;
            let out = match image {
                ActionImage::Full(y) => y.to_array().to_vec(),
                ActionImage::Reduced(r) => vec![r.q1, r.q[0], r.q[1], r.q[2], r.p[0], r.p[1], r.p[2]],
            };
            Ok((out, point_gap(&back.to_array(), input)))
        }
        Direction::Inverse => {
            if matches!(spec, BranchSpec::Alcubierre { branch: AlcubierreBranch::Degenerate, .. }) {
                return Err(WarpError::Config("transform.direction: inverse is not available on the degenerate branch".into()));
            }
            let y = PhasePoint::from_array(input, Chart::Action);
            let x = from_action(spec, &ActionImage::Full(y))?;
            let again = to_action(spec, &x)?.full()?;
            Ok((x.to_array().to_vec(), point_gap(&again.to_array(), input)))
        }
    }
}

fn output_columns(spec: &BranchSpec, direction: Direction) -> Vec<&'static str> {
    match (direction, spec) {
        (Direction::Forward, BranchSpec::Alcubierre { branch: AlcubierreBranch::Degenerate, .. }) => REDUCED_COLUMNS.to_vec(),
        (Direction::Forward, _) => ACTION_COLUMNS.to_vec(),
        (Direction::Inverse, _) => ORIGINAL_COLUMNS.to_vec(),
    }
}

fn read_batch(path: &Path) -> Result<Vec<[f64; 8]>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path).map_err(|e| io_error(path, e))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| io_error(path, e))?;
        if record.len() != 8 {
            return Err(WarpError::Config(format!("transform.input_csv row {}: expected 8 columns, found {}", i + 1, record.len())));
        }
        let mut row = [0.0; 8];
        for (k, field) in record.iter().enumerate() {
            row[k] = field
                .parse()
                .map_err(|_| WarpError::Config(format!("transform.input_csv row {} column {}: `{field}` is not a number", i + 1, k + 1)))?;
        }
        rows.push(row);
    }
    Ok(rows)
}

struct TransformRun {
    summary: TransformSummary,
    csv: Option<String>,
    gap: f64,
    warnings: Vec<String>,
}

fn run_transform(cfg: &ScenarioConfig, base: &Path, spec: &BranchSpec) -> Result<TransformRun> {
    let direction = cfg.transform.direction;
    let input = cfg.initial_point().to_array();
    let mut warnings = Vec::new();
    let (output, mut gap) = match transform_point(spec, direction, &input) {
        Ok(v) => v,
        Err(e @ WarpError::Config(_)) => return Err(e),
        Err(e) => {
            warnings.push(format!("initial_state: {e}"));
            (Vec::new(), 0.0)
        }
    };
    let out_cols = output_columns(spec, direction);
    let in_cols: &[&str] = if direction == Direction::Forward { &ORIGINAL_COLUMNS } else { &ACTION_COLUMNS };
    let mut csv = None;
    let mut batch_rows = None;
    if let Some(rel_path) = &cfg.transform.input_csv {
        let path = base.join(rel_path);
        let rows = read_batch(&path)?;
        let mut text = in_cols.iter().chain(&out_cols).copied().collect::<Vec<_>>().join(",");
        text.push('\n');
        for (i, row) in rows.iter().enumerate() {
            let mut cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            match transform_point(spec, direction, row) {
                Ok((out, g)) => {
                    gap = nanmax(gap, g);
                    cells.extend(out.iter().map(|v| format!("{v:.16e}")));
                }
                Err(e) => {
                    warnings.push(format!("transform.input_csv row {}: {e}", i + 1));
                    cells.extend(std::iter::repeat_n(String::new(), out_cols.len()));
                }
            }
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        batch_rows = Some(rows.len());
        csv = Some(text);
    }
    Ok(TransformRun {
        summary: TransformSummary { direction, columns: out_cols.iter().map(|c| c.to_string()).collect(), input, output, batch_rows },
        csv,
        gap,
        warnings,
    })
}

/// Runs `subcommand` on a validated config. `base` resolves relative paths
/// inside the config.
pub fn execute(cfg: &ScenarioConfig, subcommand: Subcommand, seed: u64, tol_scale: f64, base: &Path) -> Result<Outcome> {
    if !(tol_scale.is_finite() && tol_scale > 0.0) {
        return Err(WarpError::Config(format!("--tol-scale must be positive, got {tol_scale}")));
    }
    let groups = subcommand.groups();
    let mut warnings = Vec::new();
    let mut not_applicable = Vec::new();
    let mut ctx = Ctx { cfg, seed, tol_scale, subcommand, trajectory: None, transform_gap: None, master_rows: Vec::new() };

    let mut trajectory_summary = None;
    if groups.contains(&Group::Trajectory) {
        let (traj, skipped) = integrate_scenario(cfg);
        warnings.extend(skipped);
        if let Ok(t) = &traj {
            for name in &t.not_applicable {
                not_applicable.push(NotApplicable { name: format!("monitor:{name}"), reason: "not a constant of motion along this trajectory".into() });
            }
            let mut drift = BTreeMap::new();
            for m in &t.monitors {
                let d = drift_report(t, &m.name)?;
                drift.insert(m.name.clone(), DriftSummary { max_abs: d.max_abs, relative: d.relative });
            }
            let last = t.last();
            trajectory_summary = Some(TrajectorySummary {
                samples: t.states.len(),
                t_final: *t.times.last().expect("nonempty"),
                final_state: last.to_array(),
                drift,
            });
        }
        ctx.trajectory = Some(traj);
    }
    let traj_ref = ctx.trajectory.as_ref().and_then(|t| t.as_ref().ok());
    warnings.extend(regime_warnings(cfg, traj_ref));

    let mut transform_summary = None;
    let mut transform_csv = None;
    if groups.contains(&Group::Transform) {
        match &cfg.branch {
            Some(spec) => {
                let run = run_transform(cfg, base, spec)?;
                warnings.extend(run.warnings);
                ctx.transform_gap = Some(run.gap);
                transform_summary = Some(run.summary);
                transform_csv = run.csv;
            }
            None if subcommand == Subcommand::Transform => return Err(WarpError::Config("branch: the transform subcommand needs a branch".into())),
            None => {}
        }
    }

    let mut checks = Vec::new();
    for def in CATALOGUE.iter().filter(|d| groups.contains(&d.group)) {
        if !ctx.enabled(def) {
            continue;
        }
        let tolerance = ctx.tolerance(def);
        let (residual, error) = match ctx.measure(def) {
            Ok(Measure::Value(v)) => (Some(v), None),
            Ok(Measure::NotApplicable(reason)) => {
                not_applicable.push(NotApplicable { name: def.name.to_string(), reason });
                continue;
            }
            Err(e) => (None, Some(e.to_string())),
        };
        let pass = match (residual, def.bound) {
            (Some(r), Bound::Upper) => r <= tolerance,
            (Some(r), Bound::Lower) => r > tolerance,
            (None, _) => false,
        };
        checks.push(CheckResult { name: def.name.to_string(), anchor: def.anchor.to_string(), residual, tolerance, bound: def.bound, pass, error });
    }

    let all_pass = checks.iter().all(|c| c.pass);
    let trajectory = match ctx.trajectory.take() {
        Some(Ok(t)) if matches!(ctx.subcommand, Subcommand::Integrate | Subcommand::CheckInvariants | Subcommand::CheckAll) => Some(t),
        _ => None,
    };
    Ok(Outcome {
        report: Report {
            scenario: cfg.name.clone(),
            subcommand,
            model: cfg.model.name().to_string(),
            seed,
            tol_scale,
            samples: cfg.samples,
            checks,
            trajectory: trajectory_summary,
            transform: transform_summary,
            warnings,
            not_applicable,
            all_pass,
        },
        trajectory,
        transform_csv,
        master_rows: ctx.master_rows,
    })
}

/// Parses `argv`, runs the subcommand, writes the outputs and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run_args(&args) {
        Ok(outcome) => {
            for w in &outcome.report.warnings {
                eprintln!("warning: {w}");
            }
            for c in outcome.report.checks.iter().filter(|c| !c.pass) {
                match (&c.residual, &c.error) {
                    (_, Some(e)) => eprintln!("FAIL {}: {e}", c.name),
                    (Some(r), None) => eprintln!("FAIL {}: residual {r:e} vs tolerance {:e}", c.name, c.tolerance),
                    (None, None) => eprintln!("FAIL {}", c.name),
                }
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("warpmech: {e}");
            EXIT_CONFIG
        }
    }
}

fn run_args(args: &Args) -> Result<Outcome> {
    let cfg = ScenarioConfig::load(&args.config)?;
    let base = args.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let seed = args.seed.unwrap_or(cfg.seed);
    let outcome = execute(&cfg, args.subcommand, seed, args.tol_scale.unwrap_or(1.0), &base)?;
    let out_dir = match (&args.out, &cfg.output.dir) {
        (Some(dir), _) => dir.clone(),
        (None, Some(dir)) => base.join(dir),
        (None, None) => PathBuf::from("warpmech-out"),
    };
    outcome.write(&out_dir)?;
    Ok(outcome)
}
