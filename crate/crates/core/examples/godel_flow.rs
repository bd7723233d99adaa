//! Flow in the small-rotation Gödel metric: energy drift, cyclic momenta and
//! the regime indicator.

use warpmech::flow::{drift_report, integrate, IntegratorSpec, Monitor};
use warpmech::metrics::{godel_regime_warning, MetricModel};
use warpmech::phase::PhasePoint;

fn main() -> warpmech::Result<()> {
    let model = MetricModel::GodelApprox { omega: 0.05 };
    let x0 = PhasePoint::new([0.0, 1.0, 0.0, 0.0], [1.0, 0.2, 0.3, 0.1]);
    let traj = integrate(&model, &x0, (0.0, 10.0), &IntegratorSpec::midpoint(1e-3).sampled(2000), &[Monitor::energy(&model)])?;

    for (t, x) in traj.times.iter().zip(&traj.states) {
        println!("t = {t:5.2}  r = {:.6}  p = [{:+.6}, {:+.6}, {:+.6}, {:+.6}]", x.q[1], x.p[0], x.p[1], x.p[2], x.p[3]);
    }
    println!("relative H drift: {:.3e}", drift_report(&traj, "H")?.relative);
    let moved = (0..4).filter(|&i| i != 1).map(|i| (traj.last().p[i] - x0.p[i]).abs()).fold(0.0, f64::max);
    println!("largest change in a cyclic momentum: {moved:.3e}");
    for r in [1.0, 5.0, 7.0] {
        println!("r = {r}: outside small-rotation regime? {}", godel_regime_warning(&model, r));
    }
    Ok(())
}
