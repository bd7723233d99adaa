//! Master symmetries, master integrals, the Hamiltonian hierarchy and the
//! bi-Hamiltonian structure, all in action coordinates `(Q, P)`.
//!
//! `H_i = (Q¹)^{i+1}` generates `X_i = X_{H_i} = −(i+1)(Q¹)^i ∂/∂P₁`; `X₀` is
//! the straightened flow `−∂/∂P₁`.

use crate::error::{Result, WarpError};
use crate::numdiff::{grad, jacobian, jacobian_generic, matrix_partials, MatrixField, Matrix8, Scalar, ScalarField, VectorField};
use crate::phase::{bivector_apply, bivector_family, twoform_family, Chart, PhasePoint};
use crate::recursion::ActionOperator;

/// `Y_j = Σ (Q^ν)^j ((j+1) P_ν ∂/∂P_ν − Q^ν ∂/∂Q^ν)`.
#[derive(Debug, Clone, Copy)]
pub struct MasterSymmetry {
    pub j: u32,
}

impl VectorField for MasterSymmetry {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[S; 8]> {
        let mut v = [S::zero(); 8];
        for nu in 0..4 {
            let w = x[nu].powi(self.j as i32);
            v[nu] = -(w * x[nu]);
            v[4 + nu] = (w * x[4 + nu]).scale((self.j + 1) as f64);
        }
        Ok(v)
    }
}

/// `Y'_h = Σ (Q^ν)^h (P_ν ∂/∂P_ν − Q^ν ∂/∂Q^ν)`.
#[derive(Debug, Clone, Copy)]
pub struct MasterSymmetryPrime {
    pub h: u32,
}

impl VectorField for MasterSymmetryPrime {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[S; 8]> {
        let mut v = [S::zero(); 8];
        for nu in 0..4 {
            let w = x[nu].powi(self.h as i32);
            v[nu] = -(w * x[nu]);
            v[4 + nu] = w * x[4 + nu];
        }
        Ok(v)
    }
}

/// `c (Q¹)^e ∂/∂P₁`.
#[derive(Debug, Clone, Copy)]
pub struct P1Field {
    pub coeff: f64,
    pub exponent: i32,
}

impl P1Field {
    /// `X_i = −(i+1)(Q¹)^i ∂/∂P₁`.
    pub fn hierarchy(i: u32) -> Self {
        Self { coeff: -((i + 1) as f64), exponent: i as i32 }
    }

    /// `X'_h = −(Q¹)^h ∂/∂P₁`; negative `h` gives the bi-Hamiltonian family.
    pub fn prime(h: i32) -> Self {
        Self { coeff: -1.0, exponent: h }
    }
}

impl VectorField for P1Field {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[S; 8]> {
        if self.exponent < 0 && x[0].re() == 0.0 {
            return Err(WarpError::ZeroCoordinate { slot: 0 });
        }
        let mut v = [S::zero(); 8];
        v[4] = x[0].powi(self.exponent).scale(self.coeff);
        Ok(v)
    }
}

/// `c (Q¹)^e`.
#[derive(Debug, Clone, Copy)]
pub struct Q1Power {
    pub coeff: f64,
    pub exponent: i32,
}

impl Q1Power {
    /// `H_i = (Q¹)^{i+1}`.
    pub fn hierarchy(i: u32) -> Self {
        Self { coeff: 1.0, exponent: i as i32 + 1 }
    }

    /// `H'_h = (Q¹)^{h+1}/(h+1)`.
    pub fn prime(h: u32) -> Self {
        Self { coeff: 1.0 / (h + 1) as f64, exponent: h as i32 + 1 }
    }
}

impl ScalarField for Q1Power {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<S> {
        if self.exponent < 0 && x[0].re() == 0.0 {
            return Err(WarpError::ZeroCoordinate { slot: 0 });
        }
        Ok(x[0].powi(self.exponent).scale(self.coeff))
    }
}

/// `H̃_j = −Σ (Q^ν)^{j+1} P_ν`.
#[derive(Debug, Clone, Copy)]
pub struct MasterIntegral {
    pub j: u32,
}

impl ScalarField for MasterIntegral {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<S> {
        let mut acc = S::zero();
        for nu in 0..4 {
            acc -= x[nu].powi(self.j as i32 + 1) * x[4 + nu];
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarFamily {
    /// `H̄₁ = ln Q¹`, `H̄_j = −1/(j (Q¹)^j)` for `j ≥ 2`.
    Printed,
    /// `H̄₁ = ln Q¹`, `H̄_j = −1/((j−1)(Q¹)^{j−1})` for `j ≥ 2`.
    Shifted,
}

/// The bi-Hamiltonian ladder `H̄_j`, with `H̄₀ = Q¹`.
#[derive(Debug, Clone, Copy)]
pub struct BarHamiltonian {
    pub j: u32,
    pub family: BarFamily,
}

impl ScalarField for BarHamiltonian {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<S> {
        let q = x[0];
        if self.j >= 1 && !(q.re() > 0.0) {
            return Err(WarpError::Domain(format!("H̄_{} needs Q¹ > 0", self.j)));
        }
        Ok(match (self.j, self.family) {
            (0, _) => q,
            (1, _) => q.ln(),
            (j, BarFamily::Printed) => -q.powi(-(j as i32)).scale(1.0 / j as f64),
            (j, BarFamily::Shifted) => -q.powi(-(j as i32 - 1)).scale(1.0 / (j - 1) as f64),
        })
    }
}

/// `[A, B]` as a field, so it can itself be bracketed.
#[derive(Debug, Clone, Copy)]
pub struct LieBracket<A, B>(pub A, pub B);

impl<A: VectorField, B: VectorField> VectorField for LieBracket<A, B> {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[S; 8]> {
        let a = self.0.eval(x)?;
        let b = self.1.eval(x)?;
        let da = jacobian_generic(&self.0, x)?;
        let db = jacobian_generic(&self.1, x)?;
        let mut out = [S::zero(); 8];
        for (i, o) in out.iter_mut().enumerate() {
            for k in 0..8 {
                *o += a[k] * db[i][k] - b[k] * da[i][k];
            }
        }
        Ok(out)
    }
}

/// `σ = Q¹P₁ ∂/∂P₁ ∧ ∂/∂Q²`, incompatible with the canonical bivector.
#[derive(Debug, Clone, Copy, Default)]
pub struct SchoutenCounterexample;

impl MatrixField for SchoutenCounterexample {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[[S; 8]; 8]> {
        let mut m = [[S::zero(); 8]; 8];
        let c = x[0] * x[4];
        m[4][1] = c;
        m[1][4] = -c;
        Ok(m)
    }
}

fn norm(v: &[f64; 8]) -> f64 {
    v.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
}

fn diff_norm(a: &[f64; 8], b: &[f64; 8]) -> f64 {
    (0..8).fold(0.0_f64, |m, i| m.max((a[i] - b[i]).abs()))
}

fn scaled(v: &[f64; 8], c: f64) -> [f64; 8] {
    v.map(|x| x * c)
}

pub fn master_symmetry(j: u32, x: &PhasePoint) -> Result<[f64; 8]> {
    x.expect_chart(Chart::Action)?;
    MasterSymmetry { j }.eval(&x.to_array())
}

/// `[X, Y]^i = X^k ∂_k Y^i − Y^k ∂_k X^i`.
pub fn lie_bracket_vf<A: VectorField, B: VectorField>(a: &A, b: &B, x: &[f64; 8]) -> Result<[f64; 8]> {
    let v = LieBracket(a, b).eval(x)?;
    if v.iter().all(|c| c.is_finite()) {
        Ok(v)
    } else {
        Err(WarpError::NumericalDomain("Lie bracket".into()))
    }
}

/// `{H_i, H̃_j}` checked against `(i+1)(Q¹)^{i+j+1}`.
pub fn hierarchy_hamiltonian(i: u32, j: u32, x: &PhasePoint) -> Result<f64> {
    let bracket = crate::phase::poisson_bracket(&Q1Power::hierarchy(i), &MasterIntegral { j }, x, 0)?;
    x.expect_chart(Chart::Action)?;
    let closed_form = (i + 1) as f64 * x.q[0].powi((i + j + 1) as i32);
    if (bracket - closed_form).abs() > 1e-10 * closed_form.abs().max(1.0) {
        return Err(WarpError::HierarchyMismatch { i, j, bracket, closed_form });
    }
    Ok(bracket)
}

/// `‖[X_i, Y_j] − X_{i+j}‖` with `X_{i+j} = −c (i+j+1)(Q¹)^{i+j} ∂/∂P₁`, where
/// `c = j+1` as printed or `c = i+1` for the field generated by `{H_i, H̃_j}`.
pub fn hierarchy_bracket_residual(i: u32, j: u32, x: &PhasePoint, printed: bool) -> Result<f64> {
    x.expect_chart(Chart::Action)?;
    let lhs = lie_bracket_vf(&P1Field::hierarchy(i), &MasterSymmetry { j }, &x.to_array())?;
    let c = if printed { j + 1 } else { i + 1 };
    let rhs = P1Field { coeff: -((c * (i + j + 1)) as f64), exponent: (i + j) as i32 }.eval(&x.to_array())?;
    Ok(diff_norm(&lhs, &rhs))
}

/// `‖[X_i, X_{i+j}]‖`.
pub fn hierarchy_commutator(i: u32, j: u32, x: &PhasePoint) -> Result<f64> {
    x.expect_chart(Chart::Action)?;
    Ok(norm(&lie_bracket_vf(&P1Field::hierarchy(i), &P1Field::hierarchy(i + j), &x.to_array())?))
}

/// `(‖[X₀, Y_j]‖, ‖[[X₀, Y_j], X₀]‖)`: a master symmetry has the first
/// nonzero and the second zero.
pub fn master_contract(j: u32, x: &PhasePoint) -> Result<(f64, f64)> {
    x.expect_chart(Chart::Action)?;
    let x0 = P1Field::hierarchy(0);
    let arr = x.to_array();
    let inner = LieBracket(x0, MasterSymmetry { j });
    Ok((norm(&lie_bracket_vf(&x0, &MasterSymmetry { j }, &arr)?), norm(&lie_bracket_vf(&inner, &x0, &arr)?)))
}

/// `[π, σ]^{ijk} = Σ_cyc (π^{il} ∂_l σ^{jk} + σ^{il} ∂_l π^{jk})`.
pub fn schouten_bracket<A: MatrixField, B: MatrixField>(pa: &A, pb: &B, x: &[f64; 8]) -> Result<Box<[[[f64; 8]; 8]; 8]>> {
    let (a, da) = matrix_partials(pa, x)?;
    let (b, db) = matrix_partials(pb, x)?;
    let term = |i: usize, j: usize, k: usize| -> f64 { (0..8).map(|l| a[i][l] * db[l][j][k] + b[i][l] * da[l][j][k]).sum() };
    let mut out = Box::new([[[0.0; 8]; 8]; 8]);
    for i in 0..8 {
        for j in 0..8 {
            for k in 0..8 {
                out[i][j][k] = term(i, j, k) + term(j, k, i) + term(k, i, j);
            }
        }
    }
    Ok(out)
}

pub fn schouten_residual<A: MatrixField, B: MatrixField>(pa: &A, pb: &B, x: &[f64; 8]) -> Result<f64> {
    let s = schouten_bracket(pa, pb, x)?;
    Ok(s.iter().flatten().flatten().fold(0.0_f64, |m, v| m.max(v.abs())))
}

/// `(L_Y π)^{ij} = Y^k ∂_k π^{ij} − π^{kj} ∂_k Y^i − π^{ik} ∂_k Y^j`.
pub fn lie_derivative_bivector<V: VectorField, M: MatrixField>(y: &V, pi: &M, x: &[f64; 8]) -> Result<Matrix8> {
    let yv = y.eval(x)?;
    let dy = jacobian(y, x)?;
    let (p, dp) = matrix_partials(pi, x)?;
    Ok(Matrix8::from_fn(|i, j| (0..8).map(|k| yv[k] * dp[k][i][j] - p[k][j] * dy[(i, k)] - p[i][k] * dy[(j, k)]).sum()))
}

/// `(L_Y ω)_{ij} = Y^k ∂_k ω_{ij} + ω_{kj} ∂_i Y^k + ω_{ik} ∂_j Y^k`.
pub fn lie_derivative_twoform<V: VectorField, M: MatrixField>(y: &V, omega: &M, x: &[f64; 8]) -> Result<Matrix8> {
    let yv = y.eval(x)?;
    let dy = jacobian(y, x)?;
    let (w, dw) = matrix_partials(omega, x)?;
    Ok(Matrix8::from_fn(|i, j| (0..8).map(|k| yv[k] * dw[k][i][j] + w[k][j] * dy[(k, i)] + w[i][k] * dy[(k, j)]).sum()))
}

/// `L_Y f = ⟨df, Y⟩`.
pub fn lie_derivative_function<V: VectorField, F: ScalarField>(y: &V, f: &F, x: &[f64; 8]) -> Result<f64> {
    let yv = y.eval(x)?;
    let df = grad(f, x)?;
    Ok((0..8).map(|k| yv[k] * df[k]).sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

fn fit(what: &'static str, lhs: &Matrix8, target: &Matrix8) -> Result<f64> {
    let c = lhs.dot(target) / target.dot(target);
    let residual = (lhs - target * c).abs().max();
    if residual > 1e-9 * target.abs().max().max(1.0) {
        return Err(WarpError::FitResidual { what, residual });
    }
    Ok(c)
}

/// Fits `L_{Y₀}𝒫 = α̃𝒫`, `L_{Y₀}𝒫₁ = β̃𝒫₁`, `L_{Y₀}H = γ̃H` with `H = Q¹`.
pub fn conformal_check(x: &PhasePoint) -> Result<ConformalCoefficients> {
    x.expect_chart(Chart::Action)?;
    let arr = x.to_array();
    let y0 = MasterSymmetry { j: 0 };
    let p0 = bivector_family(0);
    let p1 = bivector_family(1);
    let alpha = fit("L_Y0 P", &lie_derivative_bivector(&y0, &p0, &arr)?, &crate::numdiff::to_matrix8(&p0.eval(&arr)?))?;
    let beta = fit("L_Y0 P1", &lie_derivative_bivector(&y0, &p1, &arr)?, &crate::numdiff::to_matrix8(&p1.eval(&arr)?))?;
    let h = Q1Power::hierarchy(0);
    let hv = h.eval(&arr)?;
    if hv == 0.0 {
        return Err(WarpError::ZeroCoordinate { slot: 0 });
    }
    let gamma = lie_derivative_function(&y0, &h, &arr)? / hv;
    Ok(ConformalCoefficients { alpha, beta, gamma })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OevelEntry {
    pub relation: &'static str,
    /// Residual against the specific printed coefficient.
    pub specific: f64,
    /// Residual against the conformal-coefficient form.
    pub general: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OevelReport {
    pub h: u32,
    pub l: u32,
    pub entries: Vec<OevelEntry>,
}

impl OevelReport {
    pub fn max_residual(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, e| m.max(e.specific).max(e.general))
    }
}

fn mat_residual(lhs: &Matrix8, target: &Matrix8, c: f64) -> f64 {
    (lhs - target * c).abs().max()
}

/// The six relations for `Y'_h` acting on `Y'_l, X'_l, 𝒫'_l, ω'_l, T, H'_l`,
/// each checked with the printed coefficient and with the conformal form
/// evaluated at the coefficients fitted by [`conformal_check`].
pub fn oevel_relations_check(h: u32, l: u32, x: &PhasePoint) -> Result<OevelReport> {
    x.expect_chart(Chart::Action)?;
    let ConformalCoefficients { alpha: a, beta: b, gamma: g } = conformal_check(x)?;
    let arr = x.to_array();
    let (hf, lf) = (h as f64, l as f64);
    let yh = MasterSymmetryPrime { h };
    let mut entries = Vec::with_capacity(6);

    let lhs = lie_bracket_vf(&yh, &MasterSymmetryPrime { h: l }, &arr)?;
    let target = MasterSymmetryPrime { h: l + h }.eval(&arr)?;
    entries.push(OevelEntry {
        relation: "L_Y'h Y'l",
        specific: diff_norm(&lhs, &scaled(&target, hf - lf)),
        general: diff_norm(&lhs, &scaled(&target, (b - a) * (lf - hf))),
    });

    let lhs = lie_bracket_vf(&yh, &P1Field::prime(l as i32), &arr)?;
    let target = P1Field::prime((l + h) as i32).eval(&arr)?;
    entries.push(OevelEntry {
        relation: "L_Y'h X'l",
        specific: diff_norm(&lhs, &scaled(&target, -(lf + 1.0))),
        general: diff_norm(&lhs, &scaled(&target, b + g + (lf - 1.0) * (g - a))),
    });

    let lhs = lie_derivative_bivector(&yh, &bivector_family(l as i32), &arr)?;
    let target = crate::numdiff::to_matrix8(&bivector_family((l + h) as i32).eval(&arr)?);
    entries.push(OevelEntry {
        relation: "L_Y'h P'l",
        specific: mat_residual(&lhs, &target, hf - lf),
        general: mat_residual(&lhs, &target, b + (lf - hf - 1.0) * (b - a)),
    });

    let lhs = lie_derivative_twoform(&yh, &twoform_family(l as i32), &arr)?;
    let target = crate::numdiff::to_matrix8(&twoform_family((l + h) as i32).eval(&arr)?);
    entries.push(OevelEntry {
        relation: "L_Y'h w'l",
        specific: mat_residual(&lhs, &target, -(lf + hf)),
        general: mat_residual(&lhs, &target, b + (lf + hf - 1.0) * (b - a)),
    });

    let lhs = crate::recursion::lie_derivative_tensor(&yh, &ActionOperator, &arr)?;
    let t = crate::numdiff::to_matrix8(&ActionOperator.eval(&arr)?);
    let target = t.pow(h + 1);
    entries.push(OevelEntry {
        relation: "L_Y'h T",
        specific: mat_residual(&lhs, &target, -1.0),
        general: mat_residual(&lhs, &target, b - a),
    });

    let lhs = lie_derivative_function(&yh, &Q1Power::prime(l), &arr)?;
    let target = Q1Power::prime(l + h).eval(&arr)?;
    entries.push(OevelEntry {
        relation: "<dH'l, Y'h>",
        specific: (lhs + (hf + lf + 1.0) * target).abs(),
        general: (lhs - (g + (lf + hf) * (b - a)) * target).abs(),
    });

    Ok(OevelReport { h, l, entries })
}

/// `max_k |(𝒫 dH̄_i − 𝒫₁ dH̄_{i+1})^k|`.
pub fn bi_hamiltonian_residual(i: u32, family: BarFamily, x: &PhasePoint) -> Result<f64> {
    x.expect_chart(Chart::Action)?;
    let arr = x.to_array();
    let p0 = crate::numdiff::to_matrix8(&bivector_family(0).eval(&arr)?);
    let p1 = crate::numdiff::to_matrix8(&bivector_family(1).eval(&arr)?);
    let lhs = bivector_apply(&p0, &grad(&BarHamiltonian { j: i, family }, &arr)?);
    let rhs = bivector_apply(&p1, &grad(&BarHamiltonian { j: i + 1, family }, &arr)?);
    Ok(diff_norm(&lhs, &rhs))
}

/// `max_k |(𝒫 dH̄_i − X_i)^k|` for the shifted ladder, `X_i = −(Q¹)^{−i} ∂/∂P₁`.
pub fn bi_hamiltonian_field_residual(i: u32, x: &PhasePoint) -> Result<f64> {
    x.expect_chart(Chart::Action)?;
    let arr = x.to_array();
    let p0 = crate::numdiff::to_matrix8(&bivector_family(0).eval(&arr)?);
    let lhs = bivector_apply(&p0, &grad(&BarHamiltonian { j: i, family: BarFamily::Shifted }, &arr)?);
    Ok(diff_norm(&lhs, &P1Field::prime(-(i as i32)).eval(&arr)?))
}
