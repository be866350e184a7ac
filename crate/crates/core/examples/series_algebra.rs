//! Truncated power series: exp/log round trips, a bivariate exponential and
//! Hermite polynomials.

use edgeworth::jets::{hermite_he, BivariateSeries, Jet};
use num_complex::Complex64;

fn main() -> edgeworth::error::Result<()> {
    let a = Jet::from_real(&[0.3, -1.0, 0.5, 0.25, 0.0, 0.1]);
    let round = a.exp().log()?;
    println!("log(exp(a)) - a: {:.3e}", round.max_diff(&a));

    // exp(i t) as a jet of order 6
    let e = Jet::exp_i(1.0, 6);
    for (m, c) in e.coeffs().iter().enumerate() {
        println!("  [t^{m}] exp(it) = {:+.6} {:+.6}i", c.re, c.im);
    }

    // exp(u * t^2) in two variables: coefficient of t^4 u^2 is 1/2
    let mut s = BivariateSeries::zero(6, 3);
    s.set(2, 1, Complex64::new(1.0, 0.0));
    let ex = s.exp();
    println!("[t^4 u^2] exp(u t^2) = {}", ex.get(4, 2).re);

    for m in 0..=5 {
        println!("He_{m}(x) = {}", hermite_he(m));
    }
    Ok(())
}
