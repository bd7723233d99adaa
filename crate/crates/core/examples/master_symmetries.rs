//! Master symmetries, the Hamiltonian hierarchy, Oevel relations and the
//! bi-Hamiltonian ladder in action coordinates.

use warpmech::master::{
    bi_hamiltonian_residual, conformal_check, hierarchy_bracket_residual, lie_bracket_vf, master_contract, oevel_relations_check,
    schouten_residual, BarFamily, MasterSymmetry, P1Field, SchoutenCounterexample,
};
use warpmech::phase::{bivector_family, PhasePoint};

fn main() -> warpmech::Result<()> {
    let x = PhasePoint::action([2.0, 0.8, 1.1, 1.7], [0.3, 0.5, -0.2, 0.9]);
    let b = lie_bracket_vf(&P1Field::hierarchy(1), &MasterSymmetry { j: 2 }, &x.to_array())?;
    println!("[X_1, Y_2] at Q1 = 2: {} d/dP1", b[4]);
    println!("  vs X_H3 from {{H_1, H~_2}}: residual {:.1e}", hierarchy_bracket_residual(1, 2, &x, false)?);
    println!("  vs coefficient -(j+1)(i+j+1): residual {:.1}", hierarchy_bracket_residual(1, 2, &x, true)?);

    for j in 0..3 {
        let (first, second) = master_contract(j, &x)?;
        println!("j = {j}: |[X0, Y_j]| = {first:.3}, |[[X0, Y_j], X0]| = {second:.1e}");
    }

    let c = conformal_check(&x)?;
    println!("conformal coefficients: ({:+.3}, {:+.3}, {:+.3})", c.alpha, c.beta, c.gamma);
    for e in oevel_relations_check(2, 1, &x)?.entries {
        println!("  h=2 l=1 {:<12} specific {:.1e}  general {:.1e}", e.relation, e.specific, e.general);
    }

    let xa = x.to_array();
    println!("[P, P1]_NS = {:.1e}", schouten_residual(&bivector_family(0), &bivector_family(1), &xa)?);
    println!("[P, sigma]_NS = {:.3} for the counterexample", schouten_residual(&bivector_family(0), &SchoutenCounterexample, &xa)?);
    for i in 0..4 {
        println!(
            "ladder i = {i}: printed {:.3e}, shifted {:.1e}",
            bi_hamiltonian_residual(i, BarFamily::Printed, &x)?,
            bi_hamiltonian_residual(i, BarFamily::Shifted, &x)?
        );
    }
    Ok(())
}
