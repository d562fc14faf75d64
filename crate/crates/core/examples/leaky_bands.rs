//! Bands of a leaky sine-graph wire below the continuum, shifted by -alpha^2/4.

use floquet_tubes::bands::BrillouinGrid;
use floquet_tubes::curvegeom::{build_curve, CurveSpec};
use floquet_tubes::leaky2d::{leaky_bands, LeakyConfig};

fn main() -> floquet_tubes::Result<()> {
    let alpha: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5.0);
    let curve = build_curve(&CurveSpec::sine_graph(2, 0.25, 2.0 * std::f64::consts::PI), 512)?;
    let b = curve.translation();
    let grid = BrillouinGrid::new(b[0].hypot(b[1]), 21, std::f64::consts::PI / (8.0 * b[0].hypot(b[1])))?;
    let table = leaky_bands(&curve, &LeakyConfig::new(alpha).with_bands(2), &grid)?;
    let zeta = table.metadata.threshold.unwrap();
    println!("alpha = {alpha}, zeta = {zeta}, Q = {}", table.metadata.boundary_points.unwrap());
    for (i, theta) in grid.thetas.iter().enumerate() {
        let row: Vec<String> = table.bands[i]
            .iter()
            .map(|v| v.map_or("absent".into(), |v| format!("{:.8}", v - zeta)))
            .collect();
        println!("{theta:+.5}  eps - zeta: {}", row.join("  "));
    }
    Ok(())
}
