//! Canonical maps to action coordinates that straighten the flow to -d/dP1.

use warpmech::canonical::{
    action_energy_gap, from_action, pushforward_residual, symplectomorphism_residual, to_action, AlcubierreBranch, BranchSpec,
};
use warpmech::phase::PhasePoint;

fn main() -> warpmech::Result<()> {
    let cases = [
        (BranchSpec::Alcubierre { branch: AlcubierreBranch::Wb, vs: 0.5, q_s: 0.0 }, PhasePoint::new([0.7, 0.2, -0.4, 1.0], [1.0, 0.2, 0.3, 0.1])),
        (BranchSpec::Alcubierre { branch: AlcubierreBranch::Wa, vs: 0.5, q_s: 0.0 }, PhasePoint::new([0.7, 0.2, -0.4, 1.0], [-1.5, 1.0, 0.0, 0.0])),
        (BranchSpec::Godel { omega: 1.0 }, PhasePoint::new([1.0, 1.0, 0.0, 0.0], [0.0, 3.0, 0.0, 0.0])),
    ];
    for (spec, x) in &cases {
        let image = to_action(spec, x)?;
        let y = image.full()?;
        let back = from_action(spec, &image)?;
        let gap = (0..4).map(|i| (back.q[i] - x.q[i]).abs().max((back.p[i] - x.p[i]).abs())).fold(0.0, f64::max);
        println!("{spec:?}");
        println!("  Q = {:?}\n  P = {:?}", y.q, y.p);
        println!("  round trip {gap:.1e}, symplectic defect {:.1e}", symplectomorphism_residual(spec, x)?);
        if let BranchSpec::Alcubierre { .. } = spec {
            println!("  |J X_H + d/dP1| = {:.1e}, |Q1 - H| = {:.1e}", pushforward_residual(spec, x)?, action_energy_gap(spec, x)?);
        }
    }

    let degenerate = BranchSpec::Alcubierre { branch: AlcubierreBranch::Degenerate, vs: 0.5, q_s: 0.0 };
    let x = PhasePoint::new([0.3, 0.1, 0.2, 0.0], [-0.25, 0.5, 0.3, 0.2]);
    println!("degenerate branch image: {:?}", to_action(&degenerate, &x)?);
    Ok(())
}
