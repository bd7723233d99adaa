//! Closed-form canonical maps `(q, p) ↔ (Q, P)` from the Hamilton–Jacobi
//! separations of both models.
//!
//! Alcubierre (constant `v_s`, `s = p₁ + v_s p₂`, `D = Σ_{k≥2}(Q^k)² − 2Q¹ = s²`):
//!
//! ```text
//! Q = (H, p₂, p₃, p₄)
//! P₁ = q¹/s,  P₂ = −p₂q¹/s + v_s q¹ + q_s − q²,  P_k = −p_k q¹/s − q^k (k = 3, 4)
//! ```
//!
//! `Wa` is the `s < 0` sheet (`p₁ = −√D − v_s Q²`), `Wb` the `s > 0` sheet.
//!
//! Gödel (approximated): `Q = (H'_G, p₁, p₃, p₄)` with `H'_G = (Ω²p₂² − p₄²)/2`,
//! `P = (−q²/(Ω²p₂), −q¹, −q³, −p₄q²/(Ω²p₂) − q⁴)`, on the sheet `Ω p₂ > 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WarpError};
use crate::metrics::MetricModel;
use crate::numdiff::{jacobian, Matrix8, Scalar, VectorField};
use crate::phase::{hamiltonian, hamiltonian_vector_field, twoform_family, Chart, PhasePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlcubierreBranch {
    Wa,
    Wb,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BranchSpec {
    Alcubierre { branch: AlcubierreBranch, vs: f64, q_s: f64 },
    Godel { omega: f64 },
}

/// Degenerate-branch image: only `(Q², Q³, Q⁴, P₂, P₃, P₄)` exist; `q¹` is
/// carried through unchanged so the map stays invertible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedPoint {
    pub q: [f64; 3],
    pub p: [f64; 3],
    pub q1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActionImage {
    Full(PhasePoint),
    Reduced(ReducedPoint),
}

impl ActionImage {
    pub fn full(self) -> Result<PhasePoint> {
        match self {
            ActionImage::Full(x) => Ok(x),
            ActionImage::Reduced(_) => Err(WarpError::BranchDomain("degenerate branch has no Q¹/P₁".into())),
        }
    }
}

impl BranchSpec {
    /// The metric whose flow this map straightens.
    pub fn model(&self) -> MetricModel {
        match self {
            BranchSpec::Alcubierre { vs, .. } => MetricModel::alcubierre_constant(*vs),
            BranchSpec::Godel { omega } => MetricModel::GodelApprox { omega: *omega },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BranchSpec::Alcubierre { vs, q_s, .. } if !(vs.is_finite() && q_s.is_finite()) => {
                Err(WarpError::Config("branch.vs and branch.q_s must be finite".into()))
            }
            BranchSpec::Godel { omega } if !(omega.is_finite() && *omega != 0.0) => Err(WarpError::Config("branch.omega must be finite and nonzero".into())),
            _ => Ok(()),
        }
    }

    fn is_degenerate(&self) -> bool {
        matches!(self, BranchSpec::Alcubierre { branch: AlcubierreBranch::Degenerate, .. })
    }
}

fn root_sign(branch: AlcubierreBranch) -> f64 {
    if branch == AlcubierreBranch::Wa {
        -1.0
    } else {
        1.0
    }
}

/// Forward map on the full 8-dimensional sheets, on any scalar level.
pub fn to_action_generic<S: Scalar>(spec: &BranchSpec, x: &[S; 8]) -> Result<[S; 8]> {
    let [q1, q2, q3, q4, p1, p2, p3, p4] = *x;
    match *spec {
        BranchSpec::Alcubierre { branch, vs, q_s } => {
            if branch == AlcubierreBranch::Degenerate {
                return Err(WarpError::BranchDomain("degenerate branch maps a 6-dimensional block only".into()));
            }
            let s = p1 + p2.scale(vs);
            if !(s.re() * root_sign(branch) > 0.0) {
                return Err(WarpError::BranchDomain(format!(
                    "{branch:?} needs (p₁ + v_s p₂) {} 0, got {}",
                    if branch == AlcubierreBranch::Wa { "<" } else { ">" },
                    s.re()
                )));
            }
            let h = (p2 * p2 + p3 * p3 + p4 * p4 - s * s).scale(0.5);
            let big_p1 = q1 / s;
            Ok([
                h,
                p2,
                p3,
                p4,
                big_p1,
                -(p2 * big_p1) + q1.scale(vs) + S::cst(q_s) - q2,
                -(p3 * big_p1) - q3,
                -(p4 * big_p1) - q4,
            ])
        }
        BranchSpec::Godel { omega } => {
            if !(omega != 0.0 && omega * p2.re() > 0.0) {
                return Err(WarpError::BranchDomain(format!("Gödel map needs Ω p₂ > 0, got Ω = {omega}, p₂ = {}", p2.re())));
            }
            let w2 = omega * omega;
            let k = q2 / p2.scale(w2);
            Ok([(p2 * p2).scale(0.5 * w2) - (p4 * p4).scale(0.5), p1, p3, p4, -k, -q1, -q3, -(p4 * k) - q4])
        }
    }
}

pub fn from_action_generic<S: Scalar>(spec: &BranchSpec, x: &[S; 8]) -> Result<[S; 8]> {
    let [a1, a2, a3, a4, b1, b2, b3, b4] = *x;
    match *spec {
        BranchSpec::Alcubierre { branch, vs, q_s } => {
            if branch == AlcubierreBranch::Degenerate {
                return Err(WarpError::BranchDomain("degenerate branch maps a 6-dimensional block only".into()));
            }
            let d = a2 * a2 + a3 * a3 + a4 * a4 - a1.scale(2.0);
            if !(d.re() > 0.0) {
                return Err(WarpError::BranchDomain(format!("need Σ(Q^k)² − 2Q¹ > 0, got {}", d.re())));
            }
            let root = d.sqrt().scale(root_sign(branch));
            let q1 = b1 * root;
            Ok([
                q1,
                S::cst(q_s) - b2 - a2 * b1 + q1.scale(vs),
                -b3 - a3 * b1,
                -b4 - a4 * b1,
                root - a2.scale(vs),
                a2,
                a3,
                a4,
            ])
        }
        BranchSpec::Godel { omega } => {
            if omega == 0.0 {
                return Err(WarpError::BranchDomain("Gödel map needs Ω ≠ 0".into()));
            }
            let disc = a1.scale(2.0) + a4 * a4;
            if !(disc.re() > 0.0) {
                return Err(WarpError::BranchDomain(format!("need 2Q¹ + (Q⁴)² > 0, got {}", disc.re())));
            }
            let root = disc.sqrt();
            Ok([-b2, -(b1 * root).scale(omega), -b3, -b4 + a4 * b1, a2, root.scale(1.0 / omega), a3, a4])
        }
    }
}

pub fn to_action(spec: &BranchSpec, x: &PhasePoint) -> Result<ActionImage> {
    x.expect_chart(Chart::Original)?;
    if spec.is_degenerate() {
        let BranchSpec::Alcubierre { vs, q_s, .. } = *spec else { unreachable!() };
        let [q1, q2, q3, q4] = x.q;
        let [p1, p2, p3, p4] = x.p;
        let s = p1 + vs * p2;
        if s.abs() > 1e-12 * p1.abs().max((vs * p2).abs()).max(1.0) {
            return Err(WarpError::BranchDomain(format!("degenerate branch needs p₁ + v_s p₂ = 0, got {s}")));
        }
        return Ok(ActionImage::Reduced(ReducedPoint { q: [p2, p3, p4], p: [q_s - q2, -q3, -q4], q1 }));
    }
    let y = to_action_generic(spec, &x.to_array())?;
    Ok(ActionImage::Full(PhasePoint::from_array(&y, Chart::Action)))
}

pub fn from_action(spec: &BranchSpec, x: &ActionImage) -> Result<PhasePoint> {
    match (spec, x) {
        (BranchSpec::Alcubierre { branch: AlcubierreBranch::Degenerate, vs, q_s }, ActionImage::Reduced(r)) => {
            let [a2, a3, a4] = r.q;
            let [b2, b3, b4] = r.p;
            Ok(PhasePoint::new([r.q1, q_s - b2, -b3, -b4], [-vs * a2, a2, a3, a4]))
        }
        (_, ActionImage::Full(y)) if !spec.is_degenerate() => {
            y.expect_chart(Chart::Action)?;
            let x = from_action_generic(spec, &y.to_array())?;
            Ok(PhasePoint::from_array(&x, Chart::Original))
        }
        _ => Err(WarpError::BranchDomain("action point does not match the branch".into())),
    }
}

/// `to_action` as a vector-valued field, for Jacobians.
pub struct ForwardMap<'a>(pub &'a BranchSpec);

impl VectorField for ForwardMap<'_> {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[S; 8]> {
        to_action_generic(self.0, x)
    }
}

pub struct InverseMap<'a>(pub &'a BranchSpec);

impl VectorField for InverseMap<'_> {
    fn eval<S: Scalar>(&self, x: &[S; 8]) -> Result<[S; 8]> {
        from_action_generic(self.0, x)
    }
}

/// `∂(Q, P)/∂(q, p)` at an original-coordinate point.
pub fn map_jacobian(spec: &BranchSpec, x: &PhasePoint) -> Result<Matrix8> {
    x.expect_chart(Chart::Original)?;
    jacobian(&ForwardMap(spec), &x.to_array())
}

pub fn canonical_form_matrix() -> Matrix8 {
    let w = crate::numdiff::MatrixField::eval(&twoform_family(0), &[0.0_f64; 8]).expect("canonical form is total");
    crate::numdiff::to_matrix8(&w)
}

/// `‖JᵀΩJ − Ω‖_max` for the Jacobian `J` of `to_action`.
pub fn symplectomorphism_residual(spec: &BranchSpec, x: &PhasePoint) -> Result<f64> {
    let j = map_jacobian(spec, x)?;
    Ok(jacobian_symplectic_defect(&j))
}

pub fn jacobian_symplectic_defect(j: &Matrix8) -> f64 {
    let omega = canonical_form_matrix();
    (j.transpose() * omega * j - omega).abs().max()
}

/// `J · V(x)`: a vector field on `(q, p)` expressed in action coordinates.
pub fn pushforward<V: VectorField>(spec: &BranchSpec, field: &V, x: &PhasePoint) -> Result<[f64; 8]> {
    let j = map_jacobian(spec, x)?;
    let v = field.eval(&x.to_array())?;
    let out = j * crate::numdiff::Vector8::from_column_slice(&v);
    Ok(std::array::from_fn(|i| out[i]))
}

/// `max |J X_H + ∂/∂P₁|`.
pub fn pushforward_residual(spec: &BranchSpec, x: &PhasePoint) -> Result<f64> {
    let pushed = pushforward(spec, &hamiltonian_vector_field(&spec.model()), x)?;
    let mut target = [0.0; 8];
    target[4] = -1.0;
    Ok((0..8).fold(0.0_f64, |m, i| m.max((pushed[i] - target[i]).abs())))
}

/// `|Q¹ − H|` at an original-coordinate point.
pub fn action_energy_gap(spec: &BranchSpec, x: &PhasePoint) -> Result<f64> {
    let y = to_action(spec, x)?.full()?;
    let h = crate::numdiff::ScalarField::eval(&hamiltonian(&spec.model()), &x.to_array())?;
    Ok((y.q[0] - h).abs())
}

/// `H'_G = (Ω²p₂² − p₄²)/2`.
pub fn godel_action_energy(omega: f64, x: &PhasePoint) -> f64 {
    0.5 * (omega * omega * x.p[1] * x.p[1] - x.p[3] * x.p[3])
}

/// `|H'_G − H_G|`.
pub fn godel_energy_gap(omega: f64, x: &PhasePoint) -> Result<f64> {
    let h = crate::numdiff::ScalarField::eval(&hamiltonian(&MetricModel::GodelApprox { omega }), &x.to_array())?;
    Ok((godel_action_energy(omega, x) - h).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numdiff::{fd_jacobian, FD_STEP};

    fn wa(vs: f64) -> BranchSpec {
        BranchSpec::Alcubierre { branch: AlcubierreBranch::Wa, vs, q_s: 0.0 }
    }

    #[test]
    fn alcubierre_forward_example() {
        let x = PhasePoint::new([2.0, 0.0, 0.0, 0.0], [-1.5, 1.0, 0.0, 0.0]);
        let y = to_action(&wa(0.5), &x).unwrap().full().unwrap();
        assert_eq!(y.q, [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(y.p[0], -2.0);
    }

    #[test]
    fn alcubierre_inverse_example() {
        let y = ActionImage::Full(PhasePoint::action([0.0, 1.0, 0.0, 0.0], [-2.0, 0.0, 0.0, 0.0]));
        let x = from_action(&wa(0.5), &y).unwrap();
        assert_eq!(x.p[0], -1.5);
        assert_eq!(x.q[0], 2.0);
    }

    #[test]
    fn wb_flips_root_sign() {
        let y = ActionImage::Full(PhasePoint::action([0.0, 1.0, 0.0, 0.0], [-2.0, 0.3, 0.0, 0.0]));
        let b = BranchSpec::Alcubierre { branch: AlcubierreBranch::Wb, vs: 0.5, q_s: 0.0 };
        let xa = from_action(&wa(0.5), &y).unwrap();
        let xb = from_action(&b, &y).unwrap();
        assert_eq!(xa.p[0] + 0.5, -(xb.p[0] + 0.5));
        assert_eq!(xa.q[0], -xb.q[0]);
        assert_eq!(xa.p[1..], xb.p[1..]);
    }

    #[test]
    fn wrong_sheet_is_rejected() {
        let x = PhasePoint::new([2.0, 0.0, 0.0, 0.0], [1.5, 1.0, 0.0, 0.0]);
        assert!(matches!(to_action(&wa(0.5), &x), Err(WarpError::BranchDomain(_))));
    }

    #[test]
    fn godel_forward_example() {
        let x = PhasePoint::new([1.0, 1.0, 0.0, 0.0], [0.0, 3.0, 0.0, 0.0]);
        let y = to_action(&BranchSpec::Godel { omega: 1.0 }, &x).unwrap().full().unwrap();
        assert_eq!(y.q[0], 4.5);
        assert!((y.p[0] + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_branch() {
        let spec = BranchSpec::Alcubierre { branch: AlcubierreBranch::Degenerate, vs: 0.5, q_s: 1.0 };
        let x = PhasePoint::new([0.3, 2.0, 1.0, -1.0], [-0.5, 1.0, 0.2, 0.4]);
        let ActionImage::Reduced(r) = to_action(&spec, &x).unwrap() else { panic!() };
        assert_eq!(r.q, [1.0, 0.2, 0.4]);
        assert_eq!(r.p, [-1.0, -1.0, 1.0]);
        assert_eq!(from_action(&spec, &ActionImage::Reduced(r)).unwrap(), x);
        let off = PhasePoint::new([0.3, 2.0, 1.0, -1.0], [-0.4, 1.0, 0.2, 0.4]);
        assert!(to_action(&spec, &off).is_err());
        assert!(symplectomorphism_residual(&spec, &x).is_err());
    }

    #[test]
    fn dual_jacobian_matches_finite_differences() {
        let spec = BranchSpec::Alcubierre { branch: AlcubierreBranch::Wa, vs: 0.4, q_s: 0.7 };
        let x = PhasePoint::new([0.8, -0.3, 1.2, 0.5], [-1.7, 0.9, 0.4, -0.6]);
        let dual = map_jacobian(&spec, &x).unwrap();
        let fd = fd_jacobian(|y| to_action_generic(&spec, y), &x.to_array(), FD_STEP).unwrap();
        assert!((dual - fd).abs().max() < 1e-6);
    }

    #[test]
    fn identity_jacobian_is_symplectic() {
        assert_eq!(jacobian_symplectic_defect(&Matrix8::identity()), 0.0);
    }

    #[test]
    fn maps_are_symplectic_and_straighten_the_flow() {
        let x = PhasePoint::new([0.8, -0.3, 1.2, 0.5], [-1.7, 0.9, 0.4, -0.6]);
        let spec = wa(0.4);
        assert!(symplectomorphism_residual(&spec, &x).unwrap() < 1e-12);
        assert!(pushforward_residual(&spec, &x).unwrap() < 1e-12);
        assert!(action_energy_gap(&spec, &x).unwrap() < 1e-14);

        let g = BranchSpec::Godel { omega: 0.3 };
        let xg = PhasePoint::new([0.2, 1.1, -0.4, 0.6], [0.5, 1.3, -0.2, 0.3]);
        assert!(symplectomorphism_residual(&g, &xg).unwrap() < 1e-12);
        let back = from_action(&g, &to_action(&g, &xg).unwrap()).unwrap();
        for (a, b) in back.to_array().iter().zip(xg.to_array()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn godel_energy_gap_is_small_in_regime() {
        let x = PhasePoint::new([0.0, 0.1, 0.0, 0.0], [0.0, 2.0, 0.0, 0.1]);
        let omega = 0.05;
        assert!(godel_energy_gap(omega, &x).unwrap() >= 0.0);
        assert_eq!(godel_action_energy(omega, &x), 0.5 * (0.0025 * 4.0 - 0.01));
    }
}
