//! Recursion operators: the action-coordinate T, its pullback T_A, torsion,
//! spectrum and trace constants of motion.

use warpmech::canonical::{AlcubierreBranch, BranchSpec};
use warpmech::metrics::VsProfile;
use warpmech::phase::PhasePoint;
use warpmech::recursion::{
    action_trace_closed_form, nijenhuis_torsion, pullback_action_operator, recursion_action, recursion_alcubierre_original,
    recursion_alcubierre_pullback, spectrum_pairing_gap, torsion_max, trace_powers, ActionOperator, AlcubierrePullback,
    TorsionCounterexample,
};

fn main() -> warpmech::Result<()> {
    let y = PhasePoint::action([1.2, 0.7, 2.5, 1.9], [0.3, -1.0, 0.4, 0.8]);
    let t = recursion_action(&y)?;
    println!("action T: torsion {:.1e}, pairing gap {:.1e}", torsion_max(&nijenhuis_torsion(&ActionOperator, &y.to_array())?), spectrum_pairing_gap(&t));
    for (h, tr) in trace_powers(&t, 4).iter().enumerate() {
        println!("  Tr(T^{}) = {tr:.6}  closed form {:.6}", h + 1, action_trace_closed_form(&y, h as u32 + 1));
    }

    let vs = 0.5;
    let x = PhasePoint::new([0.7, 0.2, -0.4, 1.0], [1.0, 0.2, 0.3, 0.1]);
    let spec = BranchSpec::Alcubierre { branch: AlcubierreBranch::Wb, vs, q_s: 0.0 };
    let chain = pullback_action_operator(&spec, &x, None)?;
    let closed = recursion_alcubierre_pullback(&x, vs)?;
    let printed = recursion_alcubierre_original(&x, &VsProfile::Constant { v0: vs })?;
    println!("T_A closed form vs chain-rule pullback: {:.1e}", (closed - chain).abs().max());
    println!("T_A printed blocks vs chain-rule pullback: {:.3e}", (printed - chain).abs().max());
    println!("T_A torsion: {:.1e}", torsion_max(&nijenhuis_torsion(&AlcubierrePullback { vs }, &x.to_array())?));
    println!("T_A traces: {:?}", trace_powers(&closed, 4));

    let bad = torsion_max(&nijenhuis_torsion(&TorsionCounterexample, &y.to_array())?);
    println!("detector on diag(Q2, 0, ..): torsion {bad:.3}");
    Ok(())
}
