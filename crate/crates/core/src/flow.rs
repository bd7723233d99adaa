//! Trajectory integration of Hamiltonian flows and drift monitoring.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WarpError};
use crate::metrics::{vs_eval, MetricModel, VsProfile};
use crate::numdiff::{ScalarField, VectorField};
use crate::phase::{hamiltonian, hamiltonian_vector_field, Chart, Hamiltonian, PhasePoint};
use crate::recursion::{recursion_action, recursion_alcubierre_original, recursion_alcubierre_pullback, recursion_godel_original, trace_powers};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ImplicitMidpoint,
    Rk4,
}

fn default_tol() -> f64 {
    1e-12
}
fn default_max_iter() -> usize {
    50
}
fn default_sample_every() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSpec {
    pub method: Method,
    pub dt: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Keep every n-th state (the final state is always kept).
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
}

impl IntegratorSpec {
    pub fn midpoint(dt: f64) -> Self {
        Self { method: Method::ImplicitMidpoint, dt, tol: default_tol(), max_iter: default_max_iter(), sample_every: 1 }
    }

    pub fn rk4(dt: f64) -> Self {
        Self { method: Method::Rk4, ..Self::midpoint(dt) }
    }

    pub fn sampled(mut self, every: usize) -> Self {
        self.sample_every = every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(WarpError::Config(format!("integrator.dt must be positive, got {}", self.dt)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(WarpError::Config(format!("integrator.tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(WarpError::Config("integrator.max_iter must be at least 1".into()));
        }
        if self.sample_every == 0 {
            return Err(WarpError::Config("integrator.sample_every must be at least 1".into()));
        }
        Ok(())
    }
}

enum MonitorKind {
    Energy(Hamiltonian),
    OperatorTrace { model: MetricModel, h: usize },
    ActionTrace { h: usize },
}

/// A named scalar sampled along a trajectory. `None` from [`Monitor::eval`]
/// means the quantity is not a constant of motion at that point.
pub struct Monitor {
    pub name: String,
    kind: MonitorKind,
}

impl Monitor {
    pub fn energy(model: &MetricModel) -> Self {
        Self { name: "H".into(), kind: MonitorKind::Energy(hamiltonian(model)) }
    }

    /// `Tr(Tʰ)` of the model's original-coordinate recursion operator.
    pub fn operator_trace(model: &MetricModel, h: usize) -> Self {
        Self { name: format!("tr{h}"), kind: MonitorKind::OperatorTrace { model: model.clone(), h } }
    }

    /// `Tr(Tʰ)` of the action-coordinate operator.
    pub fn action_trace(h: usize) -> Self {
        Self { name: format!("atr{h}"), kind: MonitorKind::ActionTrace { h } }
    }

    /// `H`, `tr<h>` or `atr<h>`.
    pub fn from_name(model: &MetricModel, name: &str) -> Result<Self> {
        let power = |prefix: &str| name.strip_prefix(prefix).and_then(|s| s.parse::<usize>().ok()).filter(|h| *h >= 1);
        if name == "H" {
            Ok(Self::energy(model))
        } else if let Some(h) = power("atr") {
            Ok(Self::action_trace(h))
        } else if let Some(h) = power("tr") {
            Ok(Self::operator_trace(model, h))
        } else {
            Err(WarpError::UnknownMonitor(name.to_string()))
        }
    }

    pub fn eval(&self, x: &PhasePoint) -> Result<Option<f64>> {
        match &self.kind {
            MonitorKind::Energy(ham) => Ok(Some(ham.eval(&x.to_array())?)),
            MonitorKind::ActionTrace { h } => Ok(Some(trace_powers(&recursion_action(x)?, *h)[h - 1])),
            MonitorKind::OperatorTrace { model, h } => operator_trace(model, x, *h),
        }
    }
}

fn operator_trace(model: &MetricModel, x: &PhasePoint, h: usize) -> Result<Option<f64>> {
    let t = match model {
        MetricModel::AlcubierreLimit { profile: VsProfile::Constant { v0 } } => recursion_alcubierre_pullback(x, *v0)?,
        MetricModel::AlcubierreLimit { profile } => {
            if !prop31_conditions(profile, x, h as u32)? {
                return Ok(None);
            }
            recursion_alcubierre_original(x, profile)?
        }
        MetricModel::GodelApprox { omega } => recursion_godel_original(x, *omega)?,
        MetricModel::GodelExact { .. } => return Ok(None),
    };
    Ok(Some(trace_powers(&t, h)[h - 1]))
}

/// Pointwise check of the two profile conditions under which the printed
/// Alcubierre traces are constants of motion:
/// `v̇/v = −1/q¹` and `(v̈/v̇) v^{h−1} = (p₁/p₂)^{h−1} (p₁ + v p₂)^{h−1}`.
pub fn prop31_conditions(profile: &VsProfile, x: &PhasePoint, h: u32) -> Result<bool> {
    let (v, vd, vdd) = vs_eval(profile, x.q[0])?;
    if v == 0.0 || vd == 0.0 || x.p[1] == 0.0 {
        return Ok(false);
    }
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
    let first = close(vd / v, -1.0 / x.q[0]);
    let e = h as i32 - 1;
    let [p1, p2, _, _] = x.p;
    let second = close(vdd / vd * v.powi(e), (p1 / p2).powi(e) * (p1 + v * p2).powi(e));
    Ok(first && second)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorSeries {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub monitors: Vec<MonitorSeries>,
    /// Requested monitors that were not constants of motion somewhere along
    /// the run.
    pub not_applicable: Vec<String>,
}

impl Trajectory {
    pub fn last(&self) -> &PhasePoint {
        self.states.last().expect("trajectories are nonempty")
    }

    pub fn monitor(&self, name: &str) -> Result<&[f64]> {
        self.monitors
            .iter()
            .find(|m| m.name == name)
            .map(|m| m.values.as_slice())
            .ok_or_else(|| WarpError::UnknownMonitor(name.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drift {
    pub max_abs: f64,
    /// `max |m(t) − m(t₀)| / max(1, |m(t₀)|)`.
    pub relative: f64,
}

pub fn drift_report(traj: &Trajectory, monitor: &str) -> Result<Drift> {
    let values = traj.monitor(monitor)?;
    let m0 = values[0];
    let max_abs = values.iter().fold(0.0_f64, |m, v| m.max((v - m0).abs()));
    Ok(Drift { max_abs, relative: max_abs / m0.abs().max(1.0) })
}

/// One implicit-midpoint step `y = x + dt f((x + y)/2)`, solved by
/// fixed-point iteration. Negative `dt` steps backwards.
pub fn midpoint_step<V: VectorField>(field: &V, x: &[f64; 8], dt: f64, tol: f64, max_iter: usize, step: usize) -> Result<[f64; 8]> {
    let f0 = field.eval(x)?;
    let mut y: [f64; 8] = std::array::from_fn(|i| x[i] + dt * f0[i]);
    let mut change = f64::INFINITY;
    for _ in 0..max_iter {
        let mid: [f64; 8] = std::array::from_fn(|i| 0.5 * (x[i] + y[i]));
        let f = field.eval(&mid)?;
        let next: [f64; 8] = std::array::from_fn(|i| x[i] + dt * f[i]);
        change = (0..8).fold(0.0_f64, |m, i| m.max((next[i] - y[i]).abs()));
        let scale = next.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        y = next;
        if change <= tol * scale {
            return Ok(y);
        }
    }
    Err(WarpError::FixedPointDivergence { step, residual: change })
}

pub fn rk4_step<V: VectorField>(field: &V, x: &[f64; 8], dt: f64) -> Result<[f64; 8]> {
    let shift = |base: &[f64; 8], k: &[f64; 8], c: f64| -> [f64; 8] { std::array::from_fn(|i| base[i] + c * k[i]) };
    let k1 = field.eval(x)?;
    let k2 = field.eval(&shift(x, &k1, 0.5 * dt))?;
    let k3 = field.eval(&shift(x, &k2, 0.5 * dt))?;
    let k4 = field.eval(&shift(x, &k3, dt))?;
    Ok(std::array::from_fn(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])))
}

/// Integrates `ẋ = V(x)` over `t_span`. `domain` is called on every new state;
/// an error there ends the run with [`WarpError::DomainExit`].
pub fn integrate_field<V, D>(field: &V, x0: &PhasePoint, t_span: (f64, f64), spec: &IntegratorSpec, monitors: &[Monitor], domain: D) -> Result<Trajectory>
where
    V: VectorField,
    D: Fn(&[f64; 8]) -> Result<()>,
{
    spec.validate()?;
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(WarpError::Config(format!("t_span must satisfy t0 < t1, got ({t0}, {t1})")));
    }
    let steps = ((t1 - t0) / spec.dt).round() as usize;
    if steps == 0 {
        return Err(WarpError::Config("t_span is shorter than one step".into()));
    }
    if !x0.is_finite() {
        return Err(WarpError::NumericalDomain("initial state".into()));
    }

    let chart = x0.chart;
    let mut series: Vec<Option<Vec<f64>>> = monitors.iter().map(|_| Some(Vec::new())).collect();
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut record = |t: f64, x: &[f64; 8]| -> Result<()> {
        let pt = PhasePoint::from_array(x, chart);
        for (m, s) in monitors.iter().zip(series.iter_mut()) {
            if let Some(values) = s {
                match m.eval(&pt)? {
                    Some(v) => values.push(v),
                    None => *s = None,
                }
            }
        }
        times.push(t);
        states.push(pt);
        Ok(())
    };

    let mut x = x0.to_array();
    record(t0, &x)?;
    for k in 1..=steps {
        let t = t0 + k as f64 * spec.dt;
        x = match spec.method {
            Method::ImplicitMidpoint => midpoint_step(field, &x, spec.dt, spec.tol, spec.max_iter, k),
            Method::Rk4 => rk4_step(field, &x, spec.dt),
        }
        .map_err(|e| match e {
            WarpError::FixedPointDivergence { .. } => e,
            other => WarpError::DomainExit { t, reason: other.to_string() },
        })?;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(WarpError::DomainExit { t, reason: "non-finite state".into() });
        }
        domain(&x).map_err(|e| WarpError::DomainExit { t, reason: e.to_string() })?;
        if k % spec.sample_every == 0 || k == steps {
            record(t, &x)?;
        }
    }

    let mut kept = Vec::new();
    let mut not_applicable = Vec::new();
    for (m, s) in monitors.iter().zip(series) {
        match s {
            Some(values) => kept.push(MonitorSeries { name: m.name.clone(), values }),
            None => not_applicable.push(m.name.clone()),
        }
    }
    Ok(Trajectory { times, states, monitors: kept, not_applicable })
}

/// Flow of `X_H` for a metric model, in original coordinates.
pub fn integrate(model: &MetricModel, x0: &PhasePoint, t_span: (f64, f64), spec: &IntegratorSpec, monitors: &[Monitor]) -> Result<Trajectory> {
    x0.expect_chart(Chart::Original)?;
    let ham = hamiltonian(model);
    integrate_field(&hamiltonian_vector_field(model), x0, t_span, spec, monitors, |x| ham.eval(x).map(|_| ()))
}

/// The straightened flow `−∂/∂P₁` in action coordinates.
#[derive(Debug, Clone, Copy, Default)]
pub struct ActionFlow;

impl VectorField for ActionFlow {
    fn eval<S: crate::numdiff::Scalar>(&self, _x: &[S; 8]) -> Result<[S; 8]> {
        let mut v = [S::zero(); 8];
        v[4] = -S::one();
        Ok(v)
    }
}

pub fn to_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,q1,q2,q3,q4,p1,p2,p3,p4");
    for m in &traj.monitors {
        out.push(',');
        out.push_str(&m.name);
    }
    out.push('\n');
    for (k, (t, x)) in traj.times.iter().zip(&traj.states).enumerate() {
        let _ = write!(out, "{t:.16e}");
        for v in x.to_array() {
            let _ = write!(out, ",{v:.16e}");
        }
        for m in &traj.monitors {
            let _ = write!(out, ",{:.16e}", m.values[k]);
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    if traj.times.is_empty() {
        return Err(WarpError::Io { path: path.display().to_string(), message: "empty trajectory".into() });
    }
    std::fs::write(path, to_csv(traj)).map_err(|e| WarpError::Io { path: path.display().to_string(), message: e.to_string() })
}
