//! Arclength, curvature and tube admissibility of a sine graph.

use floquet_tubes::curvegeom::{build_curve, check_admissible, CurveSpec};

fn main() -> floquet_tubes::Result<()> {
    let spec = CurveSpec::sine_graph(2, 0.5, 2.0 * std::f64::consts::PI);
    let curve = build_curve(&spec, 512)?;
    println!("curve {}", spec.id());
    println!("period length L = {:.12}", curve.length());
    println!("max curvature   = {:.12}", curve.max_curvature());
    let l = curve.length();
    for k in 0..8 {
        let s = l * k as f64 / 8.0;
        println!("  s = {s:8.5}  gamma = {:+.10}", curve.curvature_at(s));
    }
    for a in [0.1, 1.0, 2.5] {
        let adm = check_admissible(&curve, a);
        println!(
            "a = {a}: a * max gamma = {:.3}, admissible = {}",
            a * adm.max_curvature,
            adm.admissible()
        );
    }
    Ok(())
}
