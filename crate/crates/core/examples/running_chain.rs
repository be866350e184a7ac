//! The two-state running example: eigen-jets, drift, variance and the
//! Edgeworth polynomials, printed as the `expand` report.

use edgeworth::cli::{expand_report, to_json17};
use edgeworth::expansion::ExpansionSet;
use edgeworth::models::running_chain;
use edgeworth::spectral::{build_operator_family, eigen_residuals, perron_base, spectral_jets};

fn main() -> edgeworth::error::Result<()> {
    let chain = running_chain();
    let base = perron_base(chain.p())?;
    println!("stationary law {:?}, gap {:.4}", base.left, base.gap);

    let jets = spectral_jets(&chain, 5)?;
    for m in 0..=3 {
        let c = jets.mu.derivative_at_zero(m);
        println!("mu^({m})(0) = {:+.12} {:+.12}i", c.re, c.im);
    }
    let fam = build_operator_family(&chain, 5)?;
    let worst = eigen_residuals(&fam, &jets).into_iter().fold(0.0, f64::max);
    println!("eigen-equation residual {worst:.2e}");

    let exp = ExpansionSet::compute(&chain, 3)?;
    println!("A = {}, sigma^2 = {}", exp.a(), exp.sigma2());
    println!("P_1(x) = {}", exp.edge_p[1]);
    println!("R_1(x) = {}", exp.edge_r[1]);
    println!("{}", to_json17(&expand_report(&exp), true));
    Ok(())
}
