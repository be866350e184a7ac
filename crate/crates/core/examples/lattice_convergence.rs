//! Lattice Edgeworth expansion of the running chain against the exact pmf
//! from the dynamic program.

use edgeworth::evaluate::{convergence_studies, Form, OracleKind, TestFunction};
use edgeworth::expansion::ExpansionSet;
use edgeworth::models::running_chain;

fn main() -> edgeworth::error::Result<()> {
    let chain = running_chain();
    let ns = [64, 256, 1024, 4096];
    for r in 0..=2 {
        let exp = ExpansionSet::compute(&chain, r)?;
        let reps = convergence_studies(&exp, &chain, OracleKind::Dp, &[Form::Lattice], &ns, &TestFunction::default())?;
        let rep = &reps[0];
        println!("order {r}: verdict {}, fitted slope {:.3}", rep.verdict, rep.fitted_slope);
        print!("{}", rep.to_csv());
    }
    Ok(())
}
