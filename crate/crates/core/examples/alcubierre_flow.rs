//! Geodesic flow in the constant-v_s Alcubierre limit with energy and
//! recursion-trace monitors.

use warpmech::flow::{drift_report, integrate, IntegratorSpec, Monitor};
use warpmech::metrics::MetricModel;
use warpmech::phase::PhasePoint;

fn main() -> warpmech::Result<()> {
    let model = MetricModel::alcubierre_constant(0.5);
    let x0 = PhasePoint::new([0.0; 4], [1.0, 0.2, 0.3, 0.1]);
    let monitors = ["H", "tr1", "tr2"].map(|m| Monitor::from_name(&model, m)).into_iter().collect::<Result<Vec<_>, _>>()?;

    let mid = integrate(&model, &x0, (0.0, 10.0), &IntegratorSpec::midpoint(1e-3).sampled(1000), &monitors)?;
    let rk4 = integrate(&model, &x0, (0.0, 10.0), &IntegratorSpec::rk4(1e-3).sampled(1000), &monitors)?;

    for (t, x) in mid.times.iter().zip(&mid.states) {
        println!("t = {t:5.2}  q = [{:+.6}, {:+.6}, {:+.6}, {:+.6}]", x.q[0], x.q[1], x.q[2], x.q[3]);
    }
    for m in ["H", "tr1", "tr2"] {
        println!("{m:>3}: relative drift {:.3e}", drift_report(&mid, m)?.relative);
    }
    let gap = (0..4).map(|i| (mid.last().q[i] - rk4.last().q[i]).abs()).fold(0.0, f64::max);
    println!("midpoint vs rk4 final position gap: {gap:.3e}");
    Ok(())
}
