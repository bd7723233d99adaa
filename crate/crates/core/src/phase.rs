//! Hamiltonians, Hamiltonian vector fields, brackets and the weighted
//! Poisson bivector / symplectic form families.
//!
//! Conventions: `X_H = (∂H/∂p, −∂H/∂q)`, `ι_{X_H} ω = −dH`,
//! `{f, g} = Σ ∂f/∂p ∂g/∂q − ∂f/∂q ∂g/∂p`. A bivector `π` sends a
//! differential to the vector `X^i = π^{ji} ∂_j f`, so the canonical bivector
//! has `π^{p_ν q^ν} = 1`; forms are stored with `ω_{p_ν q^ν} = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WarpError};
use crate::metrics::{inverse_metric, MetricModel};
use crate::numdiff::{grad, grad_generic, MatrixField, Matrix8, Scalar, ScalarField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    Original,
    Action,
}

impl Chart {
    pub fn name(self) -> &'static str {
        match self {
            Chart::Original => "original",
            Chart::Action => "action",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub q: [f64; 4],
    pub p: [f64; 4],
    pub chart: Chart,
}

impl PhasePoint {
    pub fn new(q: [f64; 4], p: [f64; 4]) -> Self {
        Self { q, p, chart: Chart::Original }
    }

    pub fn action(q: [f64; 4], p: [f64; 4]) -> Self {
        Self { q, p, chart: Chart::Action }
    }

    pub fn from_array(x: &[f64; 8], chart: Chart) -> Self {
        Self {
            q: [x[0], x[1], x[2], x[3]],
            p: [x[4], x[5], x[6], x[7]],
            chart,
        }
    }

    pub fn to_array(&self) -> [f64; 8] {
        let (q, p) = (self.q, self.p);
        [q[0], q[1], q[2], q[3], p[0], p[1], p[2], p[3]]
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.p).all(|v| v.is_finite())
    }

    pub fn expect_chart(&self, chart: Chart) -> Result<()> {
        if self.chart == chart {
            Ok(())
        } else {
            Err(WarpError::ChartMismatch { expected: chart.name(), found: self.chart.name() })
        }
    }
}

/// `H = ½ g^{νμ}(q) p_ν p_μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub model: MetricModel,
}

impl ScalarField for Hamiltonian {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<S> {
        let gi = inverse_metric(&self.model, &[x[0], x[1], x[2], x[3]])?;
        let mut h = S::zero();
        for a in 0..4 {
            for b in 0..4 {
                h += gi[a][b] * x[4 + a] * x[4 + b];
            }
        }
        Ok(h.scale(0.5))
    }
}

pub fn hamiltonian(model: &MetricModel) -> Hamiltonian {
    Hamiltonian { model: model.clone() }
}

/// `X_f` of any scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianVectorField<F> {
    pub h: F,
}

impl<F: ScalarField> VectorField for HamiltonianVectorField<F> {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[S; 8]> {
        let g = grad_generic(&self.h, x)?;
        Ok([g[4], g[5], g[6], g[7], -g[0], -g[1], -g[2], -g[3]])
    }
}

pub fn hamiltonian_vector_field(model: &MetricModel) -> HamiltonianVectorField<Hamiltonian> {
    HamiltonianVectorField { h: hamiltonian(model) }
}

/// `{f, g}_j = Σ (Q^ν)^j (∂f/∂P_ν ∂g/∂Q^ν − ∂f/∂Q^ν ∂g/∂P_ν)`.
///
/// Weighted brackets (`j > 0`) only exist in action coordinates.
pub fn poisson_bracket<F: ScalarField, G: ScalarField>(f: &F, g: &G, x: &PhasePoint, j: u32) -> Result<f64> {
    if j > 0 {
        x.expect_chart(Chart::Action)?;
    }
    let arr = x.to_array();
    let df = grad(f, &arr)?;
    let dg = grad(g, &arr)?;
    Ok((0..4)
        .map(|nu| arr[nu].powi(j as i32) * (df[4 + nu] * dg[nu] - df[nu] * dg[4 + nu]))
        .sum())
}

/// `𝒫'_h = Σ (Q^ν)^h ∂/∂P_ν ∧ ∂/∂Q^ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedBivector {
    pub h: i32,
}

/// `ω'_h = Σ (Q^ν)^h dP_ν ∧ dQ^ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedTwoForm {
    pub h: i32,
}

fn weighted_pattern<S: Scalar>(x: &[S; 8], h: i32) -> Result<[[S; 8]; 8]> {
    let mut m = [[S::zero(); 8]; 8];
    for nu in 0..4 {
        if h < 0 && x[nu].re() == 0.0 {
            return Err(WarpError::ZeroCoordinate { slot: nu });
        }
        let w = x[nu].powi(h);
        m[4 + nu][nu] = w;
        m[nu][4 + nu] = -w;
    }
    Ok(m)
}

impl MatrixField for WeightedBivector {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[[S; 8]; 8]> {
        weighted_pattern(x, self.h)
    }
}

impl MatrixField for WeightedTwoForm {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[[S; 8]; 8]> {
        weighted_pattern(x, self.h)
    }
}

pub fn bivector_family(h: i32) -> WeightedBivector {
    WeightedBivector { h }
}

pub fn twoform_family(h: i32) -> WeightedTwoForm {
    WeightedTwoForm { h }
}

/// Evaluates a bivector or form family at an action-coordinate point.
pub fn evaluate_antisymmetric<M: MatrixField>(m: &M, x: &PhasePoint) -> Result<Matrix8> {
    x.expect_chart(Chart::Action)?;
    let arr = m.eval(&x.to_array())?;
    Ok(Matrix8::from_fn(|i, j| arr[i][j]))
}

/// `(ι_X ω)_j = X^i ω_{ij}`.
pub fn interior_product(omega: &Matrix8, v: &[f64; 8]) -> [f64; 8] {
    std::array::from_fn(|j| (0..8).map(|i| v[i] * omega[(i, j)]).sum())
}

/// `X^i = π^{ji} df_j`.
pub fn bivector_apply(pi: &Matrix8, df: &[f64; 8]) -> [f64; 8] {
    std::array::from_fn(|i| (0..8).map(|j| pi[(j, i)] * df[j]).sum())
}

/// Matrix of `ω ∘ π`, the identity when `π` inverts `ω`.
pub fn compose_form_bivector(omega: &Matrix8, pi: &Matrix8) -> Matrix8 {
    omega * pi.transpose()
}

/// `max_j |(ι_{X_H} ω)_j + ∂_j H|` with the canonical form.
pub fn hamiltonian_contract_residual(model: &MetricModel, x: &[f64; 8]) -> Result<f64> {
    let dh = grad(&hamiltonian(model), x)?;
    let xh = crate::numdiff::VectorField::eval(&hamiltonian_vector_field(model), x)?;
    let omega = crate::numdiff::to_matrix8(&twoform_family(0).eval(x)?);
    let ix = interior_product(&omega, &xh);
    Ok((0..8).fold(0.0_f64, |m, j| m.max((ix[j] + dh[j]).abs())))
}
