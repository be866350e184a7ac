//! Assumption diagnostics: spectral gap, spectral radius of the twisted
//! operator, decay of its powers and the Diophantine scan.

use std::f64::consts::PI;

use edgeworth::models::{diophantine_chain, diophantine_d, diophantine_scan, resonance_differences, running_chain};
use edgeworth::spectral::{norm_decay_scan, perron_base};

fn main() -> edgeworth::error::Result<()> {
    for (name, chain) in [("running", running_chain()), ("diophantine", diophantine_chain())] {
        let base = perron_base(chain.p())?;
        println!("{name}: gap {:.4}, lattice span {:?}", base.gap, chain.lattice());
        let grid: Vec<f64> = [0.5, 1.0, PI, 2.0 * PI, 10.0, 50.0].to_vec();
        for row in norm_decay_scan(&chain, &grid, 8) {
            println!("  t = {:7.4}: radius {:.6}, ||L_t^8|| {:.3e}", row.t, row.radius, row.norm_inf);
        }
    }
    let chain = diophantine_chain();
    let s_grid: Vec<f64> = (1..=20000).map(|i| 0.5 * i as f64).collect();
    let scan = diophantine_scan(chain.h(), &s_grid)?;
    println!(
        "d(s) >= K |s|^-beta: K = {:.4}, beta = {:.4}, residual {:.3}, {} record minima",
        scan.k, scan.beta, scan.residual, scan.fit_points
    );
    let diffs = resonance_differences(chain.h());
    let grid: Vec<f64> = (1..=200).map(|i| 0.5 * i as f64).collect();
    let theta = norm_decay_scan(&chain, &grid, 2)
        .iter()
        .map(|r| (1.0 - r.norm_inf) / diophantine_d(&diffs, r.t / (2.0 * PI)).powi(2))
        .fold(f64::INFINITY, f64::min);
    println!("||L_t^2|| <= 1 - theta d(t)^2 holds with theta = {theta:.4}");
    Ok(())
}
