//! Metric components, inverses and the warp shape function.

use warpmech::metrics::{inverse_metric, metric_components, warp_shape, MetricModel, VsProfile, WarpShapeParams};

fn main() -> warpmech::Result<()> {
    let q = [1.5, 0.8, 0.0, 0.0];
    let models = [
        MetricModel::alcubierre_constant(0.5),
        MetricModel::AlcubierreLimit { profile: VsProfile::InverseTime { c: 2.0 } },
        MetricModel::GodelApprox { omega: 0.05 },
        MetricModel::GodelExact { a: 1.0 },
    ];
    for model in &models {
        let g = metric_components(model, &q)?;
        let gi = inverse_metric(model, &q)?;
        let mut defect = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                let e: f64 = (0..4).map(|k| g[i][k] * gi[k][j]).sum();
                defect = defect.max((e - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        println!("{:<17} g00 = {:+.6}  g01 = {:+.6}  |g g^-1 - I| = {defect:.1e}", model.name(), g[0][0], g[0][1]);
    }

    let params = WarpShapeParams { sigma: 50.0, radius: 1.0 };
    println!("\nwarp shape, sigma = 50, R = 1");
    for r in [0.0, 0.5, 0.9, 1.0, 1.1, 2.0] {
        println!("  f({r:.1}) = {:.9}", warp_shape(r, &params)?);
    }
    Ok(())
}
