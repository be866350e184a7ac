//! Weak expansions: smooth test functions against the exact law.

use edgeworth::evaluate::{
    averaged, averaged_probes, exact_averaged, exact_weak, weak_global, weak_local, TestFunction,
};
use edgeworth::expansion::ExpansionSet;
use edgeworth::models::running_chain;
use edgeworth::oracle::dp_pmf;

fn main() -> edgeworth::error::Result<()> {
    let chain = running_chain();
    let exp = ExpansionSet::compute(&chain, 2)?;
    let bump = TestFunction::GaussianBump { center: 0.0, width: 2.0 };
    let hermite = TestFunction::HermiteDamped { center: 0.5, width: 1.5, degree: 1 };
    for n in [64usize, 256, 1024] {
        let law = dp_pmf(&chain, n)?;
        let sq = (n as f64).sqrt();
        let exact = exact_weak(&law, exp.a(), &bump);
        println!(
            "N = {n:5}: local {:.3e}, global {:.3e}",
            (sq * exact - weak_local(&exp, &bump, n)?).abs(),
            (exact - weak_global(&exp, &bump, n)?).abs()
        );
        for z in averaged_probes(exp.sigma()) {
            let e = exact_averaged(&law, exp.a(), exp.sigma(), &hermite, z)? - averaged(&exp, &hermite, n, z)?;
            println!("    averaged at z = {z:+.3}: {e:+.3e}");
        }
    }
    Ok(())
}
