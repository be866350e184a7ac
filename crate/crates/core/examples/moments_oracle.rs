//! Moment coefficients a_{k,j} predict E (S_n - nA)^k = sum_j a_{k,j} n^j up to
//! exponentially small terms.

use edgeworth::expansion::ExpansionSet;
use edgeworth::models::lattice_chain3;
use edgeworth::oracle::{dp_pmf, exact_moments};

fn main() -> edgeworth::error::Result<()> {
    let chain = lattice_chain3();
    let exp = ExpansionSet::compute(&chain, 4)?;
    for ((k, j), v) in &exp.moment_coeffs {
        println!("a_{{{k},{j}}} = {v:+.12}");
    }
    for n in [10usize, 20, 40] {
        let dp = dp_pmf(&chain, n)?;
        let jet = exact_moments(&chain, n, 6, exp.a());
        println!("n = {n}");
        for k in 1..=6 {
            let pred = exp.moment_prediction(k, n as f64);
            let exact = dp.central_moment(n as f64 * exp.a(), k as i32);
            println!("  k = {k}: DP {exact:+.10e}  jets {:+.10e}  predicted {pred:+.10e}", jet[k]);
        }
    }
    Ok(())
}
