//! Recursion operators, Nijenhuis torsion, Lie derivatives of (1,1)-tensors
//! and trace constants of motion.
//!
//! Operators are 8×8 arrays with row = upper (output) index and column =
//! lower (input) index. Block names follow the original-coordinate
//! decomposition `∂q⊗dq | ∂q⊗dp` over `∂p⊗dq | ∂p⊗dp`.

use nalgebra::Complex;

use crate::canonical::{map_jacobian, to_action, BranchSpec};
use crate::error::{Result, WarpError};
use crate::metrics::{vs_eval_generic, MetricModel, VsProfile};
use crate::numdiff::{
    fd_jacobian, grad_generic, jacobian, jacobian_generic, matrix_partials, to_matrix8, MatrixField, Matrix8, Scalar, ScalarField, VectorField,
};
use crate::phase::{hamiltonian, Chart, PhasePoint};

/// `N[h][i][j]`.
pub type Torsion = [[[f64; 8]; 8]; 8];

/// `T = diag(Q¹..Q⁴, Q¹..Q⁴)` in action coordinates.
#[derive(Debug, Clone, Copy, Default)]
pub struct ActionOperator;

impl MatrixField for ActionOperator {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[[S; 8]; 8]> {
        let mut t = [[S::zero(); 8]; 8];
        for nu in 0..4 {
            t[nu][nu] = x[nu];
            t[4 + nu][4 + nu] = x[nu];
        }
        Ok(t)
    }
}

/// The Alcubierre operator assembled from the printed `M̃, Ñ, L̃, R̃` blocks.
#[derive(Debug, Clone)]
pub struct AlcubierrePrinted {
    pub profile: VsProfile,
}

impl MatrixField for AlcubierrePrinted {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[[S; 8]; 8]> {
        let (v, vdot, _) = vs_eval_generic(&self.profile, x[0])?;
        let [q1, _, _, _, p1, p2, p3, p4] = *x;
        let s = p1 + v * p2;
        if !(s.re() > 0.0) {
            return Err(WarpError::BlockDomain(format!("need p₁ + v_s p₂ > 0, got {}", s.re())));
        }
        let j = s.recip();
        let h = hamiltonian(&MetricModel::AlcubierreLimit { profile: self.profile.clone() }).eval(x)?;
        let p = [p1, p2, p3, p4];
        let mut t = [[S::zero(); 8]; 8];

        t[0][0] = j * p1 * h;
        t[1][0] = p2 * (j * (p2 - h) - v);
        t[4][4] = h;
        t[4][5] = (p2 - h) * (j * p2 - v);
        for k in 1..4 {
            t[k][k] = p[k];
            t[4 + k][4 + k] = p[k];
            let l = j * j * p[k] * q1 * (p[k] - h);
            t[k][4] = l;
            t[0][4 + k] = -l;
            t[k][5] = j * j * v * p[k] * q1 * (h - p[k]);
        }
        for k in 2..4 {
            t[k][0] = j * p[k] * (p[k] - h);
            t[4][4 + k] = j * p[k] * (p[k] - h);
        }
        t[4][0] = vdot * p2 * h;
        Ok(t)
    }
}

/// Exact pullback of [`ActionOperator`] through the constant-`v_s`
/// Alcubierre maps (either sheet), `J = 1/(p₁ + v_s p₂)`.
#[derive(Debug, Clone, Copy)]
pub struct AlcubierrePullback {
    pub vs: f64,
}

impl MatrixField for AlcubierrePullback {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[[S; 8]; 8]> {
        let [q1, _, _, _, p1, p2, p3, p4] = *x;
        let v = self.vs;
        let s = p1 + p2.scale(v);
        if s.re() == 0.0 {
            return Err(WarpError::BlockDomain("p₁ + v_s p₂ = 0 (degenerate branch)".into()));
        }
        let j = s.recip();
        let h = (p2 * p2 + p3 * p3 + p4 * p4 - s * s).scale(0.5);
        let p = [p1, p2, p3, p4];
        let mut t = [[S::zero(); 8]; 8];

        let first = (p2 - h) * (j * p2 - S::cst(v));
        t[0][0] = h;
        t[4][4] = h;
        t[1][0] = first;
        t[4][5] = first;
        for k in 1..4 {
            t[k][k] = p[k];
            t[4 + k][4 + k] = p[k];
            let l = j * j * p[k] * q1 * (p[k] - h);
            t[0][4 + k] = l;
            t[k][4] = -l;
        }
        for k in 2..4 {
            let c = j * p[k] * (p[k] - h);
            t[k][0] = c;
            t[4][4 + k] = c;
            let l = (j * j * p[k] * q1 * (p[k] - h)).scale(v);
            t[1][4 + k] = l;
            t[k][5] = -l;
        }
        Ok(t)
    }
}

/// The operator of the `p₁ + v_s p₂ = 0` branch: blocks `A` (positions) and
/// `B` (momenta).
#[derive(Debug, Clone, Copy)]
pub struct AlcubierreDegenerate {
    pub vs: f64,
}

impl MatrixField for AlcubierreDegenerate {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[[S; 8]; 8]> {
        let mut t = [[S::zero(); 8]; 8];
        for k in 1..4 {
            t[k][k] = x[4 + k];
            t[4 + k][4 + k] = x[4 + k];
        }
        t[1][0] = x[5].scale(self.vs);
        t[4][5] = -x[5].scale(self.vs);
        Ok(t)
    }
}

/// The Gödel operator assembled from the printed `Ã, B̃, C̃, D̃` blocks, with
/// `X_H = U'·∂q − V'·∂p`, i.e. `U' = ∂H/∂p` and `V' = ∂H/∂q`.
#[derive(Debug, Clone, Copy)]
pub struct GodelPrinted {
    pub omega: f64,
}

impl MatrixField for GodelPrinted {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[[S; 8]; 8]> {
        let [_, q2, _, _, p1, p2, p3, p4] = *x;
        let w2 = self.omega * self.omega;
        if !(w2 * p2.re() * p2.re() > 0.0) {
            return Err(WarpError::BlockDomain(format!("need Ω²p₂² > 0, got Ω = {}, p₂ = {}", self.omega, p2.re())));
        }
        if q2.re() == 0.0 {
            return Err(WarpError::BlockDomain("q² = 0".into()));
        }
        let ham = hamiltonian(&MetricModel::GodelApprox { omega: self.omega });
        let h = ham.eval(x)?;
        let d = grad_generic(&ham, x)?;
        let u = [d[4], d[5], d[6], d[7]];
        let v2 = d[1];
        let s = (p2 * p2).scale(w2).recip();
        let mut t = [[S::zero(); 8]; 8];

        t[0][0] = p1;
        t[2][2] = p3;
        t[3][3] = p4;
        t[1][1] = h * (S::one() + q2 * v2 * s);
        t[3][1] = -(p4 * p2 * s * (h + u[3]));

        t[4][4] = p1;
        t[6][6] = p3;
        t[7][7] = p4;
        for k in 0..3 {
            t[5][4 + k] = h * u[k] * p2 * s;
        }
        t[5][7] = -(p4 * p2 * s * (h + u[3]));

        t[1][4] = h * u[0] * q2 * s;
        t[1][6] = h * u[2] * q2 * s;
        t[1][5] = (h * q2 * s * (-p2 + u[1] * u[1] * u[1] * s)).scale(w2);
        t[1][7] = -(p4 * s * (h + u[3]));
        t[3][5] = p4 * s * (h + u[3]);

        t[5][1] = h * v2 * p2 * s;
        Ok(t)
    }
}

/// A diagonal tensor whose `(0,0)` entry is `x₁`; its torsion `N⁰₀₁ = x₁`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TorsionCounterexample;

impl MatrixField for TorsionCounterexample {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[[S; 8]; 8]> {
        let mut t = [[S::zero(); 8]; 8];
        t[0][0] = x[1];
        Ok(t)
    }
}

fn eval_at<M: MatrixField>(m: &M, x: &PhasePoint) -> Result<Matrix8> {
    let a = m.eval(&x.to_array())?;
    crate::numdiff::checked_matrix(&a, "recursion operator")
}

pub fn recursion_action(x: &PhasePoint) -> Result<Matrix8> {
    x.expect_chart(Chart::Action)?;
    eval_at(&ActionOperator, x)
}

pub fn recursion_alcubierre_original(x: &PhasePoint, profile: &VsProfile) -> Result<Matrix8> {
    x.expect_chart(Chart::Original)?;
    eval_at(&AlcubierrePrinted { profile: profile.clone() }, x)
}

pub fn recursion_alcubierre_pullback(x: &PhasePoint, vs: f64) -> Result<Matrix8> {
    x.expect_chart(Chart::Original)?;
    eval_at(&AlcubierrePullback { vs }, x)
}

pub fn recursion_alcubierre_degenerate(x: &PhasePoint, vs: f64) -> Result<Matrix8> {
    x.expect_chart(Chart::Original)?;
    eval_at(&AlcubierreDegenerate { vs }, x)
}

pub fn recursion_godel_original(x: &PhasePoint, omega: f64) -> Result<Matrix8> {
    x.expect_chart(Chart::Original)?;
    eval_at(&GodelPrinted { omega }, x)
}

/// `J⁻¹ · T(map(x)) · J`, with `J` from dual numbers or, given a step, from
/// central differences.
pub fn pullback_action_operator(spec: &BranchSpec, x: &PhasePoint, fd_step: Option<f64>) -> Result<Matrix8> {
    let jac = match fd_step {
        None => map_jacobian(spec, x)?,
        Some(h) => fd_jacobian(|y| crate::canonical::to_action_generic(spec, y), &x.to_array(), h)?,
    };
    let y = to_action(spec, x)?.full()?;
    let inv = jac
        .try_inverse()
        .ok_or_else(|| WarpError::BranchDomain("canonical map Jacobian is singular".into()))?;
    Ok(inv * recursion_action(&y)? * jac)
}

pub fn nijenhuis_torsion<M: MatrixField>(t: &M, x: &[f64; 8]) -> Result<Torsion> {
    let (value, d) = matrix_partials(t, x)?;
    Ok(torsion_from_partials(&value, &d))
}

/// Same as [`nijenhuis_torsion`] with central-difference partials.
pub fn nijenhuis_torsion_fd<M: MatrixField>(t: &M, x: &[f64; 8], h: f64) -> Result<Torsion> {
    let value = t.eval(x)?;
    let mut d = [[[0.0; 8]; 8]; 8];
    for (k, dk) in d.iter_mut().enumerate() {
        let (mut plus, mut minus) = (*x, *x);
        plus[k] += h;
        minus[k] -= h;
        let width = plus[k] - minus[k];
        let (tp, tm) = (t.eval(&plus)?, t.eval(&minus)?);
        for i in 0..8 {
            for j in 0..8 {
                dk[i][j] = (tp[i][j] - tm[i][j]) / width;
            }
        }
    }
    Ok(torsion_from_partials(&value, &d))
}

/// `N^h_{ij} = T^k_i ∂_k T^h_j − T^k_j ∂_k T^h_i + T^h_k ∂_j T^k_i − T^h_k ∂_i T^k_j`.
fn torsion_from_partials(t: &[[f64; 8]; 8], d: &[[[f64; 8]; 8]; 8]) -> Torsion {
    let mut n = [[[0.0; 8]; 8]; 8];
    for h in 0..8 {
        for i in 0..8 {
            for j in 0..8 {
                let mut acc = 0.0;
                for k in 0..8 {
                    acc += t[k][i] * d[k][h][j] - t[k][j] * d[k][h][i] + t[h][k] * (d[j][k][i] - d[i][k][j]);
                }
                n[h][i][j] = acc;
            }
        }
    }
    n
}

pub fn torsion_max(n: &Torsion) -> f64 {
    n.iter().flatten().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// `(L_X T)^i_j = X^k ∂_k T^i_j − T^k_j ∂_k X^i + T^i_k ∂_j X^k`.
pub fn lie_derivative_tensor<V: VectorField, M: MatrixField>(v: &V, t: &M, x: &[f64; 8]) -> Result<Matrix8> {
    let xv = v.eval(x)?;
    let dx = jacobian(v, x)?;
    let (tv, dt) = matrix_partials(t, x)?;
    let out = Matrix8::from_fn(|i, j| {
        (0..8)
            .map(|k| xv[k] * dt[k][i][j] - tv[k][j] * dx[(i, k)] + tv[i][k] * dx[(k, j)])
            .sum()
    });
    crate::numdiff::checked_matrix(&std::array::from_fn(|i| std::array::from_fn(|j| out[(i, j)])), "Lie derivative")
}

/// Generic-scalar variant used when the tensor itself must be differentiated.
pub fn lie_derivative_tensor_generic<S: Scalar, V: VectorField, M: MatrixField>(v: &V, t: &M, x: &[S; 8]) -> Result<[[S; 8]; 8]> {
    let xv = v.eval(x)?;
    let dx = jacobian_generic(v, x)?;
    let tv = t.eval(x)?;
    let mut dt = [[[S::zero(); 8]; 8]; 8];
    for (k, dk) in dt.iter_mut().enumerate() {
        let lifted = t.eval(&crate::numdiff::seed(x, k))?;
        for i in 0..8 {
            for j in 0..8 {
                dk[i][j] = lifted[i][j].eps;
            }
        }
    }
    let mut out = [[S::zero(); 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            let mut acc = S::zero();
            for k in 0..8 {
                acc += xv[k] * dt[k][i][j] - tv[k][j] * dx[i][k] + tv[i][k] * dx[k][j];
            }
            out[i][j] = acc;
        }
    }
    Ok(out)
}

/// `[Tr(T¹), …, Tr(T^{h_max})]`.
pub fn trace_powers(t: &Matrix8, h_max: usize) -> Vec<f64> {
    let mut power = *t;
    let mut out = Vec::with_capacity(h_max);
    for h in 1..=h_max {
        if h > 1 {
            power *= t;
        }
        out.push(power.trace());
    }
    out
}

/// `2 Σ_ν (Q^ν)^h`.
pub fn action_trace_closed_form(x: &PhasePoint, h: u32) -> f64 {
    2.0 * x.q.iter().map(|v| v.powi(h as i32)).sum::<f64>()
}

/// `2(p₂^h + p₃^h + p₄^h)`.
pub fn degenerate_trace_closed_form(x: &PhasePoint, h: u32) -> f64 {
    2.0 * x.p[1..].iter().map(|v| v.powi(h as i32)).sum::<f64>()
}

/// The five-term Alcubierre trace expression as printed.
pub fn alcubierre_printed_trace(x: &PhasePoint, profile: &VsProfile, h: u32) -> Result<f64> {
    let (v, vdot, _) = vs_eval_generic(profile, x.q[0])?;
    let [p1, p2, p3, p4] = x.p;
    let ham = hamiltonian(&MetricModel::AlcubierreLimit { profile: profile.clone() }).eval(&x.to_array())?;
    let j = 1.0 / (p1 + v * p2);
    let e = h as i32;
    Ok(ham.powi(e)
        + 2.0 * (p2.powi(e) + p3.powi(e) + p4.powi(e))
        + (ham * p1 * j).powi(e)
        + (v * p2 * x.q[0] * (ham - p2) * j * j).powi(e)
        + (vdot * p2 * ham).powi(e))
}

/// The five-term Gödel trace expression as printed.
pub fn godel_printed_trace(x: &PhasePoint, omega: f64, h: u32) -> Result<f64> {
    let arr = x.to_array();
    let ham = hamiltonian(&MetricModel::GodelApprox { omega });
    let hg = ham.eval(&arr)?;
    let v2 = grad_generic(&ham, &arr)?[1];
    let [_, q2, _, _] = x.q;
    let [_, p2, p3, p4] = x.p;
    let w2 = omega * omega;
    let e = h as i32;
    Ok(2.0 * (p2.powi(e) + p3.powi(e) + p4.powi(e))
        + hg.powi(e) * (1.0 + q2 * v2 / (w2 * p2 * p2)).powi(e)
        + (-hg / w2).powi(e)
        + (-hg * q2 / p2).powi(e) * (1.0 + 1.0 / w2).powi(e)
        + (hg * v2 / (w2 * p2)).powi(e))
}

/// `V'₂` exactly as printed.
pub fn godel_printed_v2(omega: f64, x: &PhasePoint) -> f64 {
    let r = x.q[1];
    let [p1, _, p3, _] = x.p;
    let r2 = r * r;
    let d = r2 * omega * omega + 1.0;
    (r2 * omega * omega * (2.0 * p3 * p3 - r2 * p1 * p1) + p3 * (p3 - omega.powi(3) * r2 * p1)) / (r2 * r * d * d)
}

/// Largest distance between paired eigenvalues after greedy nearest-neighbour
/// pairing; small when the spectrum is doubly degenerate.
pub fn spectrum_pairing_gap(t: &Matrix8) -> f64 {
    let mut eig: Vec<Complex<f64>> = t.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut gap = 0.0_f64;
    while let Some(a) = eig.pop() {
        let (idx, dist) = eig
            .iter()
            .enumerate()
            .map(|(i, b)| (i, (a - b).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap_or((usize::MAX, f64::INFINITY));
        if idx == usize::MAX {
            return f64::INFINITY;
        }
        eig.remove(idx);
        gap = gap.max(dist);
    }
    gap
}

pub fn eigenvalues(t: &Matrix8) -> Vec<Complex<f64>> {
    t.complex_eigenvalues().iter().copied().collect()
}

pub fn as_matrix(a: &[[f64; 8]; 8]) -> Matrix8 {
    to_matrix8(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::AlcubierreBranch;
    use crate::numdiff::FD_STEP_SECOND;
    use crate::phase::hamiltonian_vector_field;

    struct ConstantOperator;
    impl MatrixField for ConstantOperator {
        fn eval<S: Scalar>(&self, _x: &[S; 8]) -> Result<[[S; 8]; 8]> {
            Ok(std::array::from_fn(|i| std::array::from_fn(|j| S::cst((i * 3 + j) as f64 * 0.1))))
        }
    }

    struct MinusDP1;
    impl VectorField for MinusDP1 {
        fn eval<S: Scalar>(&self, _x: &[S; 8]) -> Result<[S; 8]> {
            let mut v = [S::zero(); 8];
            v[4] = -S::one();
            Ok(v)
        }
    }

    struct Zero;
    impl VectorField for Zero {
        fn eval<S: Scalar>(&self, _x: &[S; 8]) -> Result<[S; 8]> {
            Ok([S::zero(); 8])
        }
    }

    fn wb(vs: f64) -> BranchSpec {
        BranchSpec::Alcubierre { branch: AlcubierreBranch::Wb, vs, q_s: 0.3 }
    }

    #[test]
    fn action_operator_examples() {
        let id = recursion_action(&PhasePoint::action([1.0; 4], [0.2, 0.3, 0.4, 0.5])).unwrap();
        assert_eq!(id, Matrix8::identity());
        let t = recursion_action(&PhasePoint::action([1.0, 2.0, 3.0, 4.0], [0.0; 4])).unwrap();
        assert_eq!(trace_powers(&t, 2), vec![20.0, 60.0]);
        assert_eq!(trace_powers(&Matrix8::identity(), 3), vec![8.0, 8.0, 8.0]);
    }

    #[test]
    fn torsion_of_constant_and_action_operator() {
        let x = [0.3, 1.2, -0.4, 2.0, 0.5, 0.1, -0.9, 1.4];
        assert_eq!(torsion_max(&nijenhuis_torsion(&ConstantOperator, &x).unwrap()), 0.0);
        assert!(torsion_max(&nijenhuis_torsion(&ActionOperator, &x).unwrap()) < 1e-12);
    }

    #[test]
    fn torsion_detector_fires() {
        let x = [0.0, 0.7, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let n = nijenhuis_torsion(&TorsionCounterexample, &x).unwrap();
        assert!((n[0][0][1] - 0.7).abs() < 1e-15);
        assert!((n[0][1][0] + 0.7).abs() < 1e-15);
        let fd = nijenhuis_torsion_fd(&TorsionCounterexample, &x, FD_STEP_SECOND).unwrap();
        assert!((fd[0][0][1] - 0.7).abs() < 1e-10);
    }

    #[test]
    fn torsion_dual_and_fd_agree_on_printed_operator() {
        let x = [0.4, 0.8, 0.2, -0.3, 1.6, 0.7, 0.5, -0.4];
        let op = AlcubierrePrinted { profile: VsProfile::Constant { v0: 0.3 } };
        let a = nijenhuis_torsion(&op, &x).unwrap();
        let b = nijenhuis_torsion_fd(&op, &x, FD_STEP_SECOND).unwrap();
        let diff = (0..8).flat_map(|h| (0..8).flat_map(move |i| (0..8).map(move |j| (h, i, j)))).map(|(h, i, j)| (a[h][i][j] - b[h][i][j]).abs());
        assert!(diff.fold(0.0, f64::max) < 1e-4);
    }

    #[test]
    fn lie_derivative_of_action_operator_vanishes() {
        let x = [0.3, 1.2, -0.4, 2.0, 0.5, 0.1, -0.9, 1.4];
        assert!(lie_derivative_tensor(&MinusDP1, &ActionOperator, &x).unwrap().abs().max() < 1e-15);
        assert_eq!(lie_derivative_tensor(&Zero, &ActionOperator, &x).unwrap(), Matrix8::zeros());
    }

    #[test]
    fn degenerate_orientation_and_spectrum() {
        let x = PhasePoint::new([0.1, 0.2, 0.3, 0.4], [-0.6, 1.2, 0.5, -0.8]);
        let t = recursion_alcubierre_degenerate(&x, 0.5).unwrap();
        assert_eq!(t[(1, 0)], 0.6);
        assert_eq!(t[(0, 1)], 0.0);
        assert_eq!(t[(4, 5)], -0.6);
        assert_eq!(t[(5, 4)], 0.0);
        assert!((t.trace() - degenerate_trace_closed_form(&x, 1)).abs() < 1e-12);
        assert!(spectrum_pairing_gap(&t) < 1e-7);
        let flat = recursion_alcubierre_degenerate(&x, 0.0).unwrap();
        assert_eq!(flat, Matrix8::from_diagonal(&nalgebra::SVector::<f64, 8>::from_column_slice(&[0.0, 1.2, 0.5, -0.8, 0.0, 1.2, 0.5, -0.8])));
    }

    #[test]
    fn pullback_closed_form_matches_chain_rule() {
        for (vs, p1) in [(0.4, 1.7), (0.0, 1.3), (-0.6, 2.2)] {
            let x = PhasePoint::new([0.8, -0.3, 1.2, 0.5], [p1, 0.9, 0.4, -0.6]);
            let chain = pullback_action_operator(&wb(vs), &x, None).unwrap();
            let closed = recursion_alcubierre_pullback(&x, vs).unwrap();
            assert!((chain - closed).abs().max() < 1e-10, "vs = {vs}");
            let fd = pullback_action_operator(&wb(vs), &x, Some(1e-6)).unwrap();
            assert!((fd - closed).abs().max() < 1e-6);
        }
        let wa = BranchSpec::Alcubierre { branch: AlcubierreBranch::Wa, vs: 0.4, q_s: 0.0 };
        let x = PhasePoint::new([0.8, -0.3, 1.2, 0.5], [-1.7, 0.9, 0.4, -0.6]);
        let chain = pullback_action_operator(&wa, &x, None).unwrap();
        assert!((chain - recursion_alcubierre_pullback(&x, 0.4).unwrap()).abs().max() < 1e-10);
    }

    #[test]
    fn printed_alcubierre_blocks() {
        let profile = VsProfile::Constant { v0: 0.4 };
        let x = PhasePoint::new([0.8, -0.3, 1.2, 0.5], [1.7, 0.9, 0.4, -0.6]);
        let t = recursion_alcubierre_original(&x, &profile).unwrap();
        assert_eq!((t[(1, 1)], t[(2, 2)], t[(3, 3)]), (0.9, 0.4, -0.6));
        assert_eq!(t[(4, 0)], 0.0);
        let neg = PhasePoint::new([0.8, -0.3, 1.2, 0.5], [-1.7, 0.9, 0.4, -0.6]);
        assert!(matches!(recursion_alcubierre_original(&neg, &profile), Err(WarpError::BlockDomain(_))));
    }

    #[test]
    fn printed_alcubierre_trace_is_block_diagonal_sum() {
        // the printed sum adds the (2,2) entry of the q←p block and the R̃ entry
        let profile = VsProfile::InverseTime { c: 0.7 };
        let x = PhasePoint::new([1.3, -0.3, 1.2, 0.5], [1.7, 0.9, 0.4, -0.6]);
        let t = recursion_alcubierre_original(&x, &profile).unwrap();
        let block_sum = t.trace() + t[(1, 5)] + t[(4, 0)];
        assert!((block_sum - alcubierre_printed_trace(&x, &profile, 1).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn godel_printed_blocks() {
        let omega = 0.2;
        let x = PhasePoint::new([0.1, 1.1, -0.4, 0.6], [0.5, 1.3, -0.2, 0.3]);
        let t = recursion_godel_original(&x, omega).unwrap();
        assert_eq!((t[(0, 0)], t[(2, 2)], t[(3, 3)]), (0.5, -0.2, 0.3));
        let hg = hamiltonian(&MetricModel::GodelApprox { omega }).eval(&x.to_array()).unwrap();
        let v2 = crate::numdiff::grad(&hamiltonian(&MetricModel::GodelApprox { omega }), &x.to_array()).unwrap()[1];
        let s = 1.0 / (omega * omega * 1.3 * 1.3);
        assert!((t[(1, 1)] - hg * (1.0 + 1.1 * v2 * s)).abs() < 1e-12);
        assert!(matches!(recursion_godel_original(&PhasePoint::new([0.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]), omega), Err(WarpError::BlockDomain(_))));
    }

    #[test]
    fn godel_vanishing_energy_leaves_momenta() {
        let omega = 0.3;
        let p2 = 0.5;
        let p1 = p2 * (1.0 + omega * omega).sqrt();
        let x = PhasePoint::new([0.0, 1.0, 0.0, 0.0], [p1, p2, 0.0, 0.0]);
        let hg = hamiltonian(&MetricModel::GodelApprox { omega }).eval(&x.to_array()).unwrap();
        assert!(hg.abs() < 1e-15);
        let t = recursion_godel_original(&x, omega).unwrap();
        let mut expected = Matrix8::zeros();
        expected[(0, 0)] = p1;
        expected[(4, 4)] = p1;
        assert!((t - expected).abs().max() < 1e-12);
    }

    #[test]
    fn printed_v2_agrees_on_slice() {
        let omega = 0.3;
        let ham = hamiltonian(&MetricModel::GodelApprox { omega });
        let x = PhasePoint::new([0.0, 1.4, 0.0, 0.0], [0.0, 0.8, 0.7, 0.1]);
        let v2 = crate::numdiff::grad(&ham, &x.to_array()).unwrap()[1];
        assert!((godel_printed_v2(omega, &x) - v2).abs() < 1e-12);
        let off = PhasePoint::new([0.0, 1.4, 0.0, 0.0], [0.9, 0.8, 0.7, 0.1]);
        let v2_off = crate::numdiff::grad(&ham, &off.to_array()).unwrap()[1];
        assert!((godel_printed_v2(omega, &off) - v2_off).abs() > 1e-3);
    }

    #[test]
    fn godel_operator_lie_residual_is_finite() {
        let omega = 0.05;
        let x = [0.0, 1.0, 0.0, 0.0, 0.9, 0.7, 0.3, 0.2];
        let r = lie_derivative_tensor(&hamiltonian_vector_field(&MetricModel::GodelApprox { omega }), &GodelPrinted { omega }, &x).unwrap();
        assert!(r.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn pairing_gap_detects_simple_spectrum() {
        let t = Matrix8::from_diagonal(&nalgebra::SVector::<f64, 8>::from_column_slice(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]));
        assert!(spectrum_pairing_gap(&t) >= 1.0);
    }
}
