//! Doubling map with g(x) = cos 2 pi x: Ulam discretization for the
//! expansion, Monte Carlo orbits for the law.
//!
//! Usage: `cargo run --release --example ulam_doubling [trials]`.

use edgeworth::evaluate::edgeworth_cdf;
use edgeworth::expansion::ExpansionSet;
use edgeworth::models::{doubling_cos_spec, ulam_model};
use edgeworth::oracle::{kolmogorov_distance, mc_sample_map, probe_grid, FnCdf, Normal};

fn main() -> edgeworth::error::Result<()> {
    let trials: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let spec = doubling_cos_spec(1024);
    let model = ulam_model(&spec)?;
    let exp = ExpansionSet::compute(&model, 1)?;
    println!("Ulam 1024 cells: A = {:.3e}, sigma^2 = {:.6}", exp.a(), exp.sigma2());
    println!("P_1(x) = {}", exp.edge_p[1]);

    let n = 512;
    let law = mc_sample_map(&spec, n, trials, 2024).standardize(n as f64 * exp.a(), (n as f64).sqrt());
    let grid = probe_grid(12.0 * exp.sigma(), 4801);
    let order1 = FnCdf(|z| edgeworth_cdf(&exp, n, z));
    let normal = Normal { mean: 0.0, sd: exp.sigma() };
    println!("{trials} orbits of length {n}");
    println!("  Kolmogorov vs order 1: {:.4e}", kolmogorov_distance(&law, &order1, &grid));
    println!("  Kolmogorov vs normal:  {:.4e}", kolmogorov_distance(&law, &normal, &grid));
    Ok(())
}
