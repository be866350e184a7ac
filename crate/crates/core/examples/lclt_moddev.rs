//! Local limit theorem and moderate deviations on the running chain.

use edgeworth::evaluate::{lclt_error, lclt_estimate, moddev_ratio};
use edgeworth::expansion::ExpansionSet;
use edgeworth::models::running_chain;
use edgeworth::oracle::dp_pmf;

fn main() -> edgeworth::error::Result<()> {
    let chain = running_chain();
    let exp = ExpansionSet::compute(&chain, 1)?;
    println!("density at u = 0: {:.6}", lclt_estimate(&exp, 0.0, 100));
    for n in [64usize, 256, 1024, 4096] {
        println!("N = {n:5}: sup |sqrt(N) P(S = k) - density| = {:.3e}", lclt_error(&exp, &dp_pmf(&chain, n)?));
    }
    for c in [0.25, 0.5, 0.75] {
        let md = moddev_ratio(&exp, &chain, c, 4096)?;
        println!(
            "c = {c}: x = {:.3}, tail ratio {:.4}, tail {:.3e}, corollary {:.3e}",
            md.x, md.ratio, md.exact_tail, md.corollary
        );
    }
    Ok(())
}
