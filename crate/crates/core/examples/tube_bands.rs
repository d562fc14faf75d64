//! Dirichlet tube bands compared with the threshold-shifted comparison bands.

use floquet_tubes::bands::BrillouinGrid;
use floquet_tubes::curvegeom::{build_curve, CurveSpec};
use floquet_tubes::hill::hill_bands;
use floquet_tubes::tubefibre::{tube_bands, TubeConfig};

fn main() -> floquet_tubes::Result<()> {
    let curve = build_curve(&CurveSpec::sine_graph(2, 0.1, 2.0 * std::f64::consts::PI), 512)?;
    let grid = BrillouinGrid::standard(curve.length())?;
    let hill = hill_bands(&curve, &grid, 64, 2)?;
    for a in [0.2, 0.1, 0.05] {
        let table = tube_bands(&curve, &TubeConfig::new(a).with_window(2), &grid)?;
        let thr = table.metadata.threshold.unwrap();
        let delta = grid
            .k_indices()
            .into_iter()
            .map(|i| (table.value(i, 0).unwrap() - thr - hill.value(i, 0).unwrap()).abs())
            .fold(0.0, f64::max);
        println!(
            "a = {a:<5} threshold {thr:>12.6}  bands at theta=0: {:?}  max_K |eps - thr - lambda| = {delta:.3e}",
            table.bands[grid.len() / 2].iter().flatten().map(|v| format!("{:.6}", v - thr)).collect::<Vec<_>>()
        );
    }

    let line = build_curve(&CurveSpec::line(3, 2.0 * std::f64::consts::PI), 64)?;
    let table = tube_bands(&line, &TubeConfig::new(0.1).with_window(2), &BrillouinGrid::standard(line.length())?)?;
    let j01 = floquet_tubes::special::bessel_j_zero(0, 1)?;
    println!(
        "d = 3 straight tube, a = 0.1: bottom at theta=0 is {:.10}, (j01/a)^2 = {:.10}",
        table.value(20, 0).unwrap(),
        (j01 / 0.1).powi(2)
    );
    Ok(())
}
