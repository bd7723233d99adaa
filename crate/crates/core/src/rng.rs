//! Seeded sampling for property checks.
//!
//! The generator is SplitMix64: the state advances by `0x9E3779B97F4A7C15`
//! and each output is mixed by
//! `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9; z = (z ^ (z >> 27)) * 0x94D049BB133111EB; z ^ (z >> 31)`.
//! Uniform doubles are `(next_u64 >> 11) · 2⁻⁵³`. Every sampler below consumes
//! draws in a fixed documented order, so sample points are reproducible from
//! the seed alone.

use crate::canonical::AlcubierreBranch;
use crate::metrics::{MetricModel, VsProfile};
use crate::phase::PhasePoint;

/// Default box for action-coordinate `Q^ν`.
pub const DEFAULT_Q_BOX: [f64; 2] = [0.5, 3.0];

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    fn draw4(&mut self, lo: f64, hi: f64) -> [f64; 4] {
        std::array::from_fn(|_| self.uniform(lo, hi))
    }
}

/// `Q^ν` in `q_box`, then `P_ν ∈ [−2, 2]`.
pub fn action_point(rng: &mut SplitMix64, q_box: [f64; 2]) -> PhasePoint {
    let q = rng.draw4(q_box[0], q_box[1]);
    let p = rng.draw4(-2.0, 2.0);
    PhasePoint::action(q, p)
}

/// Generic original-coordinate point inside the chart of `model`.
///
/// Alcubierre: `q¹ ∈ [0.5, 3]`, `q²..q⁴ ∈ [−2, 2]`, `p ∈ [−1.5, 1.5]`.
/// Gödel: `q² = r` is drawn in `[0.5, min(2, 0.3/|Ω|)]` (approx) or
/// `(0.1a, 1.9a)` (exact), the rest as above.
pub fn original_point(rng: &mut SplitMix64, model: &MetricModel) -> PhasePoint {
    let mut q = [rng.uniform(0.5, 3.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)];
    let p = rng.draw4(-1.5, 1.5);
    match *model {
        MetricModel::AlcubierreLimit { .. } => {}
        MetricModel::GodelApprox { omega } => q[1] = rng.uniform(0.5, (0.3 / omega.abs()).min(2.0)),
        MetricModel::GodelExact { a } => q[1] = rng.uniform(0.1 * a, 1.9 * a),
    }
    PhasePoint::new(q, p)
}

/// Point on the requested Alcubierre sheet for constant `v_s`: `q` as in
/// [`original_point`], `p₂..p₄ ∈ [−1.5, 1.5]`, `|s| ∈ [0.3, 2]` with the
/// sheet sign (`s = 0` for the degenerate branch), `p₁ = s − v_s p₂`.
pub fn alcubierre_point(rng: &mut SplitMix64, vs: f64, branch: AlcubierreBranch) -> PhasePoint {
    let q = [rng.uniform(0.5, 3.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)];
    let p2 = rng.uniform(-1.5, 1.5);
    let p3 = rng.uniform(-1.5, 1.5);
    let p4 = rng.uniform(-1.5, 1.5);
    let mag = rng.uniform(0.3, 2.0);
    let s = match branch {
        AlcubierreBranch::Wa => -mag,
        AlcubierreBranch::Wb => mag,
        AlcubierreBranch::Degenerate => 0.0,
    };
    PhasePoint::new(q, [s - vs * p2, p2, p3, p4])
}

/// Point on the printed-operator sheet for a time-dependent profile: the
/// same draws as [`alcubierre_point`] on `Wb`, with `v_s` evaluated at `q¹`.
pub fn alcubierre_profile_point(rng: &mut SplitMix64, profile: &VsProfile) -> crate::Result<PhasePoint> {
    let mut x = alcubierre_point(rng, 0.0, AlcubierreBranch::Wb);
    let (vs, _, _) = crate::metrics::vs_eval(profile, x.q[0])?;
    x.p[0] -= vs * x.p[1];
    Ok(x)
}

/// Gödel point with `Ω p₂ > 0`: [`original_point`] draws, then
/// `|p₂| ∈ [0.3, 1.5]` with the sign of `Ω`.
pub fn godel_point(rng: &mut SplitMix64, omega: f64) -> PhasePoint {
    let mut x = original_point(rng, &MetricModel::GodelApprox { omega });
    x.p[1] = omega.signum() * rng.uniform(0.3, 1.5);
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_stream() {
        let mut r = SplitMix64::new(1234567);
        assert_eq!(r.next_u64(), 6457827717110365317);
        assert_eq!(r.next_u64(), 3203168211198807973);
    }

    #[test]
    fn unit_interval() {
        let mut r = SplitMix64::new(0);
        for _ in 0..1000 {
            let u = r.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn samplers_respect_domains() {
        let mut r = SplitMix64::new(7);
        for _ in 0..200 {
            let a = action_point(&mut r, DEFAULT_Q_BOX);
            assert!(a.q.iter().all(|q| (0.5..3.0).contains(q)));
            let w = alcubierre_point(&mut r, 0.8, AlcubierreBranch::Wa);
            assert!(w.p[0] + 0.8 * w.p[1] < 0.0);
            let g = godel_point(&mut r, -0.05);
            assert!(g.p[1] < 0.0 && (g.q[1] * 0.05).powi(2) < 0.1);
        }
    }
}
