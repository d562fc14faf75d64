//! Slope, oscillation and count certificates from a small thin-tube sweep.

use floquet_tubes::bands::BrillouinGrid;
use floquet_tubes::curvegeom::{build_curve, CurveSpec};
use floquet_tubes::hill::hill_bands;
use floquet_tubes::tubefibre::{tube_bands, TubeConfig};
use floquet_tubes::verify::{count_certificate, oscillation_certificate, slope_certificate, Labeled, OscillationFloor};

fn main() -> floquet_tubes::Result<()> {
    let curve = build_curve(&CurveSpec::sine_graph(2, 0.1, 2.0 * std::f64::consts::PI), 512)?;
    let grid = BrillouinGrid::standard(curve.length())?;
    let hill = hill_bands(&curve, &grid, 64, 3)?;
    let radii = [0.2, 0.1, 0.05, 0.025];
    let tables = radii
        .iter()
        .map(|&a| tube_bands(&curve, &TubeConfig::new(a).with_window(2), &grid))
        .collect::<floquet_tubes::Result<Vec<_>>>()?;
    let labels: Vec<String> = radii.iter().map(|a| format!("tube-a{a}")).collect();
    let tubes: Vec<Labeled> = labels.iter().zip(&tables).map(|(l, t)| Labeled::new(l, t)).collect();
    let hill = Labeled::new("hill", &hill);

    let (slope, fit) = slope_certificate(&tubes, hill, 1)?;
    println!("{}", slope.line());
    let osc = oscillation_certificate(
        tubes[3],
        &[1],
        OscillationFloor::Perturbative { hill, constant: fit.constant, radius: 0.025 },
    )?;
    println!("{}", osc.line());
    println!("{}", count_certificate(&tubes, 2)?.line());
    println!("{}", slope.to_json()?);
    Ok(())
}
