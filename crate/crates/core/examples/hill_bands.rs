//! Bands of the comparison operator -d^2/ds^2 - gamma^2/4 for a sine graph.

use floquet_tubes::bands::BrillouinGrid;
use floquet_tubes::curvegeom::{build_curve, CurveSpec};
use floquet_tubes::hill::hill_bands;

fn main() -> floquet_tubes::Result<()> {
    let amplitude: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.5);
    let curve = build_curve(&CurveSpec::sine_graph(2, amplitude, 2.0 * std::f64::consts::PI), 512)?;
    let grid = BrillouinGrid::standard(curve.length())?;
    let table = hill_bands(&curve, &grid, 64, 4)?;
    println!("# A = {amplitude}, L = {:.10}, doubling shift {:.1e}", curve.length(), table.metadata.refinement_shift.unwrap_or(0.0));
    println!("# theta, lambda_1..4");
    for (i, theta) in grid.thetas.iter().enumerate().step_by(4) {
        let row: Vec<String> = (0..4).map(|n| format!("{:.10}", table.value(i, n).unwrap())).collect();
        println!("{theta:+.6}, {}", row.join(", "));
    }
    if let Some(dir) = std::env::args().nth(2) {
        let (csv, json) = table.write(std::path::Path::new(&dir), "hill")?;
        println!("wrote {} and {}", csv.display(), json.display());
    }
    Ok(())
}
