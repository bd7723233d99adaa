//! Spacetime models: component matrices, inverses, the warp shape function
//! and the `v_s` profiles driving the Alcubierre limit.
//!
//! The Alcubierre shift is evaluated at `t = q¹`, so a time-dependent profile
//! makes the Hamiltonian depend on slot 0.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WarpError};
use crate::numdiff::{invert4, Scalar};

/// `(q²Ω)²` above which the approximated Gödel metric is flagged.
pub const GODEL_REGIME_CUTOFF: f64 = 0.1;

const INVERSE_TIME_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VsProfile {
    Constant { v0: f64 },
    /// `v_s(t) = c / t`.
    InverseTime { c: f64 },
    /// Cubic spline through `(t, v)` knots, constant outside the table.
    Tabulated { t: Vec<f64>, v: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricModel {
    AlcubierreLimit { profile: VsProfile },
    GodelExact { a: f64 },
    GodelApprox { omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpShapeParams {
    pub sigma: f64,
    pub radius: f64,
}

impl VsProfile {
    pub fn validate(&self) -> Result<()> {
        match self {
            VsProfile::Constant { v0 } if !v0.is_finite() => Err(WarpError::Config("profile.v0 must be finite".into())),
            VsProfile::InverseTime { c } if !c.is_finite() => Err(WarpError::Config("profile.c must be finite".into())),
            VsProfile::Tabulated { t, v } => {
                if t.len() < 2 || t.len() != v.len() {
                    return Err(WarpError::Config("profile.t and profile.v need equal length >= 2".into()));
                }
                if t.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(WarpError::Config("profile.t must be strictly increasing".into()));
                }
                if t.iter().chain(v).any(|x| !x.is_finite()) {
                    return Err(WarpError::Config("profile knots must be finite".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, VsProfile::Constant { .. })
    }
}

impl MetricModel {
    pub fn alcubierre_constant(v0: f64) -> Self {
        MetricModel::AlcubierreLimit { profile: VsProfile::Constant { v0 } }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MetricModel::AlcubierreLimit { profile } => profile.validate(),
            MetricModel::GodelExact { a } if !(a.is_finite() && *a > 0.0) => Err(WarpError::Config("model.a must be positive".into())),
            MetricModel::GodelApprox { omega } if !omega.is_finite() => Err(WarpError::Config("model.omega must be finite".into())),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MetricModel::AlcubierreLimit { .. } => "alcubierre_limit",
            MetricModel::GodelExact { .. } => "godel_exact",
            MetricModel::GodelApprox { .. } => "godel_approx",
        }
    }
}

/// `(v_s, v̇_s, v̈_s)` at `t`.
pub fn vs_eval(profile: &VsProfile, t: f64) -> Result<(f64, f64, f64)> {
    vs_eval_generic(profile, t)
}

pub fn vs_eval_generic<S: Scalar>(profile: &VsProfile, t: S) -> Result<(S, S, S)> {
    match profile {
        VsProfile::Constant { v0 } => Ok((S::cst(*v0), S::zero(), S::zero())),
        VsProfile::InverseTime { c } => {
            if t.re().abs() <= INVERSE_TIME_FLOOR {
                return Err(WarpError::SingularProfile { t: t.re() });
            }
            let inv = t.recip();
            let v = inv.scale(*c);
            Ok((v, -(v * inv), (v * inv * inv).scale(2.0)))
        }
        VsProfile::Tabulated { t: knots, v } => Ok(spline_eval(knots, v, t)),
    }
}

fn spline_eval<S: Scalar>(knots: &[f64], values: &[f64], t: S) -> (S, S, S) {
    let n = knots.len();
    let tr = t.re();
    if tr <= knots[0] {
        return (S::cst(values[0]), S::zero(), S::zero());
    }
    if tr >= knots[n - 1] {
        return (S::cst(values[n - 1]), S::zero(), S::zero());
    }
    let m = spline_second_derivatives(knots, values);
    let k = knots.partition_point(|&x| x <= tr).saturating_sub(1).min(n - 2);
    let h = knots[k + 1] - knots[k];
    let a = (S::cst(knots[k + 1]) - t).scale(1.0 / h);
    let b = (t - S::cst(knots[k])).scale(1.0 / h);
    let (y0, y1, m0, m1) = (values[k], values[k + 1], m[k], m[k + 1]);
    let h2 = h * h / 6.0;
    let value = a.scale(y0) + b.scale(y1) + ((a * a * a - a).scale(m0) + (b * b * b - b).scale(m1)).scale(h2);
    let slope = S::cst((y1 - y0) / h) + ((b * b).scale(3.0 * m1) - (a * a).scale(3.0 * m0)).scale(h / 6.0) + S::cst((m0 - m1) * h / 6.0);
    let curvature = a.scale(m0) + b.scale(m1);
    (value, slope, curvature)
}

/// Second derivatives of the cubic spline whose end slopes are clamped to the
/// end-interval secants.
fn spline_second_derivatives(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let secant: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let (d0, dn) = (secant[0], secant[n - 2]);

    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut lower = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    diag[0] = h[0] / 3.0;
    upper[0] = h[0] / 6.0;
    rhs[0] = secant[0] - d0;
    for i in 1..n - 1 {
        lower[i] = h[i - 1] / 6.0;
        diag[i] = (h[i - 1] + h[i]) / 3.0;
        upper[i] = h[i] / 6.0;
        rhs[i] = secant[i] - secant[i - 1];
    }
    lower[n - 1] = h[n - 2] / 6.0;
    diag[n - 1] = h[n - 2] / 3.0;
    rhs[n - 1] = dn - secant[n - 2];

    // Thomas algorithm
    for i in 1..n {
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut m = vec![0.0; n];
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    }
    m
}

/// `g_{νμ}(q)`.
pub fn metric_components<S: Scalar>(model: &MetricModel, q: &[S; 4]) -> Result<[[S; 4]; 4]> {
    let z = S::zero();
    let one = S::one();
    match model {
        MetricModel::AlcubierreLimit { profile } => {
            let (v, _, _) = vs_eval_generic(profile, q[0])?;
            Ok([[-(one - v * v), -v, z, z], [-v, one, z, z], [z, z, one, z], [z, z, z, one]])
        }
        MetricModel::GodelExact { a } => {
            let r = q[1];
            if !(r.re() > 0.0) {
                return Err(WarpError::Domain(format!("Gödel exact metric needs q² > 0, got {}", r.re())));
            }
            let x = r.scale(0.5 / a);
            let r2 = r * r;
            let cross = r2.scale(1.0 / (a * std::f64::consts::SQRT_2));
            Ok([
                [one, z, cross, z],
                [z, -(one + x * x).recip(), z, z],
                [cross, z, -(r2 * (one - x * x)), z],
                [z, z, z, -one],
            ])
        }
        MetricModel::GodelApprox { omega } => {
            let r2 = q[1] * q[1];
            if (q[1].re() * omega).powi(2) >= 1.0 {
                return Err(WarpError::Domain(format!("(q²Ω)² = {} leaves the approximation regime", (q[1].re() * omega).powi(2))));
            }
            Ok([
                [one, z, r2.scale(*omega), z],
                [z, -one, z, z],
                [r2.scale(*omega), z, -r2, z],
                [z, z, z, -one],
            ])
        }
    }
}

/// `g^{νμ}(q)`: closed form for the Alcubierre limit, Gauss–Jordan otherwise.
pub fn inverse_metric<S: Scalar>(model: &MetricModel, q: &[S; 4]) -> Result<[[S; 4]; 4]> {
    match model {
        MetricModel::AlcubierreLimit { profile } => {
            let (v, _, _) = vs_eval_generic(profile, q[0])?;
            let (z, one) = (S::zero(), S::one());
            Ok([[-one, -v, z, z], [-v, one - v * v, z, z], [z, z, one, z], [z, z, z, one]])
        }
        _ => invert4(&metric_components(model, q)?),
    }
}

/// Closed-form inverse of the exact Gödel metric.
pub fn godel_exact_inverse(a: f64, r: f64) -> [[f64; 4]; 4] {
    let four_a2 = 4.0 * a * a;
    let den = four_a2 + r * r;
    let cross = 2.0 * a * std::f64::consts::SQRT_2 / den;
    [
        [(four_a2 - r * r) / den, 0.0, cross, 0.0],
        [0.0, -den / four_a2, 0.0, 0.0],
        [cross, 0.0, -four_a2 / (r * r * den), 0.0],
        [0.0, 0.0, 0.0, -1.0],
    ]
}

pub fn warp_shape(r_s: f64, params: &WarpShapeParams) -> Result<f64> {
    let WarpShapeParams { sigma, radius } = *params;
    if !(sigma > 0.0 && radius > 0.0) {
        return Err(WarpError::Domain(format!("warp shape needs sigma > 0 and R > 0, got ({sigma}, {radius})")));
    }
    Ok(((sigma * (r_s + radius)).tanh() - (sigma * (r_s - radius)).tanh()) / (2.0 * (sigma * radius).tanh()))
}

/// True when the approximated Gödel metric is outside `(q²Ω)² ≤ 0.1`.
pub fn godel_regime_warning(model: &MetricModel, q2: f64) -> bool {
    match model {
        MetricModel::GodelApprox { omega } => (q2 * omega).powi(2) > GODEL_REGIME_CUTOFF,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numdiff::{mat_inverse, to_matrix4, Dual, Matrix4};

    fn f64s(q: [f64; 4]) -> [f64; 4] {
        q
    }

    #[test]
    fn zero_shift_is_minkowski() {
        let g = metric_components(&MetricModel::alcubierre_constant(0.0), &f64s([0.3, 1.0, 2.0, 3.0])).unwrap();
        assert_eq!(to_matrix4(&g), Matrix4::from_diagonal(&nalgebra::Vector4::new(-1.0, 1.0, 1.0, 1.0)));
    }

    #[test]
    fn godel_exact_critical_radius() {
        let g = metric_components(&MetricModel::GodelExact { a: 1.5 }, &f64s([0.0, 3.0, 0.0, 0.0])).unwrap();
        assert_eq!(g[2][2], 0.0);
    }

    #[test]
    fn godel_exact_rejects_nonpositive_radius() {
        let err = metric_components(&MetricModel::GodelExact { a: 1.0 }, &f64s([0.0, 0.0, 0.0, 0.0])).unwrap_err();
        assert!(matches!(err, WarpError::Domain(_)));
    }

    #[test]
    fn godel_approx_without_rotation() {
        let g = metric_components(&MetricModel::GodelApprox { omega: 0.0 }, &f64s([0.0, 3.0, 0.0, 0.0])).unwrap();
        assert_eq!(to_matrix4(&g), Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -1.0, -9.0, -1.0)));
    }

    #[test]
    fn alcubierre_inverse_closed_form() {
        let model = MetricModel::alcubierre_constant(0.5);
        let gi = inverse_metric(&model, &f64s([0.0; 4])).unwrap();
        assert_eq!((gi[0][0], gi[0][1], gi[1][1]), (-1.0, -0.5, 0.75));
        let g = to_matrix4(&metric_components(&model, &f64s([0.0; 4])).unwrap());
        let numeric = mat_inverse(&g).unwrap();
        assert!((numeric - to_matrix4(&gi)).abs().max() < 1e-12);
    }

    #[test]
    fn godel_approx_inverse_entry() {
        let gi = inverse_metric(&MetricModel::GodelApprox { omega: 0.1 }, &f64s([0.0, 1.0, 0.0, 0.0])).unwrap();
        assert!((gi[2][2] + 1.0 / 1.01).abs() < 1e-12);
    }

    #[test]
    fn godel_exact_inverse_matches_closed_form() {
        let a = 0.8;
        for r in [0.1, 0.5, 1.0, 1.5] {
            let gi = inverse_metric(&MetricModel::GodelExact { a }, &f64s([0.0, r, 0.0, 0.0])).unwrap();
            let closed = godel_exact_inverse(a, r);
            assert!((to_matrix4(&gi) - to_matrix4(&closed)).abs().max() < 1e-10);
        }
    }

    #[test]
    fn warp_shape_limits() {
        let p = WarpShapeParams { sigma: 50.0, radius: 1.0 };
        assert_eq!(warp_shape(0.0, &WarpShapeParams { sigma: 0.7, radius: 2.0 }).unwrap(), 1.0);
        assert!((1.0 - warp_shape(0.5, &p).unwrap()).abs() < 1e-6);
        assert!((warp_shape(1.0, &p).unwrap() - 0.5).abs() < 1e-3);
        assert!(warp_shape(2.0, &p).unwrap() < 1e-6);
        assert!(warp_shape(1.0 + 20.0 / 50.0, &p).unwrap() < 1e-8);
        assert!(warp_shape(0.1, &WarpShapeParams { sigma: -1.0, radius: 1.0 }).is_err());
    }

    #[test]
    fn profile_values() {
        assert_eq!(vs_eval(&VsProfile::Constant { v0: 0.5 }, 7.0).unwrap(), (0.5, 0.0, 0.0));
        assert_eq!(vs_eval(&VsProfile::InverseTime { c: 2.0 }, 4.0).unwrap(), (0.5, -0.125, 0.0625));
        assert!(matches!(vs_eval(&VsProfile::InverseTime { c: 2.0 }, 0.0), Err(WarpError::SingularProfile { .. })));
    }

    #[test]
    fn inverse_time_derivatives_agree_with_duals() {
        let profile = VsProfile::InverseTime { c: -1.3 };
        let (v, vd, vdd) = vs_eval_generic(&profile, Dual::variable(Dual::variable(2.5_f64))).unwrap();
        assert!((v.eps.re - vd.re.re).abs() < 1e-15);
        assert!((v.eps.eps - vdd.re.re).abs() < 1e-15);
    }

    #[test]
    fn tabulated_profile_interpolates_and_clamps() {
        let t: Vec<f64> = (0..9).map(|i| i as f64 * 0.5).collect();
        let v: Vec<f64> = t.iter().map(|x| x * x * 0.1).collect();
        let profile = VsProfile::Tabulated { t, v };
        profile.validate().unwrap();
        for k in 0..9 {
            let tk = k as f64 * 0.5;
            assert!((vs_eval(&profile, tk).unwrap().0 - tk * tk * 0.1).abs() < 1e-12);
        }
        let (mid, slope, _) = vs_eval(&profile, 2.25).unwrap();
        assert!((mid - 0.1 * 2.25 * 2.25).abs() < 1e-3);
        assert!((slope - 0.45).abs() < 1e-2);
        assert_eq!(vs_eval(&profile, 10.0).unwrap(), (1.6, 0.0, 0.0));
        let (_, vd, _) = vs_eval_generic(&profile, Dual::variable(1.3)).unwrap();
        let (v, _, _) = vs_eval_generic(&profile, Dual::variable(1.3)).unwrap();
        assert!((v.eps - vd.re).abs() < 1e-12);
    }

    #[test]
    fn regime_warning() {
        let m = MetricModel::GodelApprox { omega: 0.5 };
        assert!(!godel_regime_warning(&m, 0.5));
        assert!(godel_regime_warning(&m, 0.9));
    }
}
