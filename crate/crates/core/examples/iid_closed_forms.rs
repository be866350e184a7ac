//! A moment-specified i.i.d. law: the general machinery reproduces the
//! classical closed forms for the first Edgeworth polynomials.

use edgeworth::expansion::ExpansionSet;
use edgeworth::models::IidModel;

fn main() -> edgeworth::error::Result<()> {
    // E X = 0, E X^2 = 2, E X^3 = 2, E X^4 = 6, ...
    let law = IidModel::pmf(vec![(-1.0, 2.0 / 3.0), (2.0, 1.0 / 3.0)])?;
    let moments = law.raw_moments(8)?;
    let model = IidModel::moments(moments.clone())?;
    let exp = ExpansionSet::compute(&model, 2)?;

    let (s2, m3, m4) = (moments[1], moments[2], moments[3]);
    println!("sigma^2 = {}", exp.sigma2());
    println!("A_1(t) = {}   expected {}(it)^3", exp.freq[1], m3 / 6.0);
    println!(
        "P_1(x) = {}   expected {} - {} x^2",
        exp.edge_p[1],
        m3 / (6.0 * s2),
        m3 / (6.0 * s2 * s2)
    );
    println!("A_2(t) = {}", exp.freq[2]);
    println!("  kurtosis term {} (E X^4 - 3 sigma^4) / 24", (m4 - 3.0 * s2 * s2) / 24.0);
    println!("P_0l = {}, P_1l(x) = {}", exp.weak_local[0], exp.weak_local[1]);
    println!("a_31 = {}, a_41 = {}", exp.moment_coeff(3, 1), exp.moment_coeff(4, 1));
    Ok(())
}
