//! Classical order-1 expansion for a non-lattice chain whose observable
//! differences are 1 and the golden ratio, against the enumerated law.

use edgeworth::evaluate::{convergence_study, edgeworth_cdf, Form, OracleKind, TestFunction};
use edgeworth::expansion::ExpansionSet;
use edgeworth::models::diophantine_chain;
use edgeworth::oracle::enum_distribution;

fn main() -> edgeworth::error::Result<()> {
    let chain = diophantine_chain();
    let exp = ExpansionSet::compute(&chain, 1)?;
    let ns = [8, 10, 12, 14, 16, 18];
    let rep = convergence_study(&exp, &chain, OracleKind::Enum, Form::Classical, &ns, &TestFunction::default())?;
    println!("Kolmogorov error * sqrt(N), decreasing: {}", rep.verdict);
    print!("{}", rep.to_csv());

    let n = 18;
    let law = enum_distribution(&chain, n)?.standardize(n as f64 * exp.a(), (n as f64).sqrt());
    println!("{} distinct values at N = {n}", law.support.len());
    for z in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        println!("z = {z:+.1}: exact {:.5}, order 1 {:.5}", law.cdf(z), edgeworth_cdf(&exp, n, z));
    }
    Ok(())
}
