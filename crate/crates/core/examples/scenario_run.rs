//! Runs a bundled scenario through the CLI pipeline and prints the report.
//!
//! `cargo run --example scenario_run -- [scenario.json] [subcommand]`

use std::path::PathBuf;

use warpmech::cli::{execute, ScenarioConfig, Subcommand};

fn main() -> warpmech::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/alcubierre-constant-vs.json"));
    let sub = match args.next().as_deref() {
        Some("integrate") => Subcommand::Integrate,
        Some("transform") => Subcommand::Transform,
        Some("check-torsion") => Subcommand::CheckTorsion,
        Some("check-invariants") => Subcommand::CheckInvariants,
        Some("check-master") => Subcommand::CheckMaster,
        _ => Subcommand::CheckAll,
    };
    let cfg = ScenarioConfig::load(&path)?;
    let outcome = execute(&cfg, sub, cfg.seed, 1.0, path.parent().unwrap_or(&PathBuf::new()))?;
    for c in &outcome.report.checks {
        let residual = c.residual.map_or("error".to_string(), |r| format!("{r:.3e}"));
        println!("{:<4} {:<26} {residual:>10}  tol {:.0e}", if c.pass { "ok" } else { "FAIL" }, c.name, c.tolerance);
    }
    for n in &outcome.report.not_applicable {
        println!("n/a  {:<26} {}", n.name, n.reason);
    }
    println!("exit code would be {}", outcome.exit_code());
    Ok(())
}
