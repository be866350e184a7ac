//! From the eigenvalue and projection jets to the Edgeworth polynomials.
//!
//! Conventions: `n` is the `N(0, sigma^2)` density, `A_k` are stored as real
//! polynomials in the variable `(it)`, `R_p` are the density polynomials and
//! `P_p` the distribution-function polynomials with `(n P_p)' = n R_p`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jets::{double_factorial_odd, factorial, hermite_he, BivariateSeries, Jet, Polynomial};
use crate::models::TwistedModel;
use crate::spectral::{spectral_jets, SpectralJets};

/// Largest supported expansion order.
pub const MAX_ORDER: usize = 8;
/// Realness tolerance for drift and moment coefficients.
pub const REAL_TOL: f64 = 1e-10;
/// Realness tolerance after the bivariate exponential.
pub const FREQ_REAL_TOL: f64 = 1e-11;
/// Tolerance on the Gaussian mean of `R_p`.
pub const MEAN_TOL: f64 = 1e-10;
/// Smallest admissible asymptotic variance.
pub const SIGMA2_TOL: f64 = 1e-10;

/// Drift, variance and the remainder jets.
#[derive(Clone, Debug)]
pub struct AsymptoticParams {
    pub a: f64,
    pub sigma2: f64,
    /// `log mu(t) - iAt + sigma^2 t^2 / 2`.
    pub psi: Jet,
    /// `log Z(t)`.
    pub logz: Jet,
}

impl AsymptoticParams {
    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }
}

/// `A = -i mu'(0)`, `sigma^2 = mu'(0)^2 - mu''(0)`.
pub fn asymptotic_params(s: &SpectralJets) -> Result<AsymptoticParams> {
    let order = s.mu.order();
    if order < 2 {
        return Err(Error::InsufficientMoments { available: order, required: 2 });
    }
    let d1 = s.mu.derivative_at_zero(1);
    let d2 = s.mu.derivative_at_zero(2);
    let a = -Complex64::i() * d1;
    if a.im.abs() > REAL_TOL {
        return Err(Error::NonRealDrift { imag: a.im });
    }
    let sigma2 = (d1 * d1 - d2).re;
    if !(sigma2 > SIGMA2_TOL) {
        return Err(Error::DegenerateVariance { sigma2 });
    }
    let mut lin = Jet::zero(order);
    lin.set_coeff(1, Complex64::new(0.0, a.re));
    lin.set_coeff(2, Complex64::new(-sigma2 / 2.0, 0.0));
    let psi = s.mu.log()?.sub(&lin)?;
    let logz = s.z.log()?;
    Ok(AsymptoticParams { a: a.re, sigma2, psi, logz })
}

/// `c_m t^m = a_m (it)^m`; returns the real `a_m` or an error.
fn jet_to_it_poly(j: &Jet, what: &str, tol: f64) -> Result<Polynomial> {
    let mut ipow = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(j.order() + 1);
    for m in 0..=j.order() {
        let a = j.coeff(m) / ipow;
        if a.im.abs() > tol * a.re.abs().max(1.0) {
            return Err(Error::ImaginaryResidue { what: format!("{what}, degree {m}"), residue: a.im });
        }
        out.push(a.re);
        ipow *= Complex64::i();
    }
    Ok(Polynomial::new(out))
}

/// `A_0 .. A_r` as polynomials in `(it)`.
pub fn frequency_polys(params: &AsymptoticParams, r: usize) -> Result<Vec<Polynomial>> {
    let need = r + 2;
    if params.psi.order() < need {
        return Err(Error::InsufficientMoments { available: params.psi.order(), required: need });
    }
    let mut s = BivariateSeries::zero(3 * r + 2, r);
    for m in 3..=need {
        s.set(m, m - 2, params.psi.coeff(m));
    }
    for m in 1..=r {
        s.set(m, m, params.logz.coeff(m));
    }
    let e = s.exp();
    (0..=r).map(|k| jet_to_it_poly(&e.u_slice(k), &format!("A_{k}"), FREQ_REAL_TOL)).collect()
}

/// `R_k(x) = sum_m a_m sigma^{-m} He_m(x / sigma)` for `A_k = sum_m a_m (it)^m`.
pub fn hermite_transform(a_k: &Polynomial, sigma2: f64) -> Polynomial {
    let sigma = sigma2.sqrt();
    let mut out = Polynomial::zero();
    for (m, &a) in a_k.coeffs().iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let he = hermite_he(m).rescale_arg(1.0 / sigma);
        out = out.add(&he.scale(a * sigma.powi(-(m as i32))));
    }
    out
}

/// Coefficients of `p(sigma y)` in the basis `He_m(y)`.
pub fn to_hermite_basis(p: &Polynomial, sigma: f64) -> Vec<f64> {
    let mut rest = p.rescale_arg(sigma);
    let n = rest.coeffs().len();
    let mut h = vec![0.0; n];
    for m in (0..n).rev() {
        let c = rest.coeff(m);
        h[m] = c;
        if c != 0.0 {
            rest = rest.sub(&hermite_he(m).scale(c));
        }
    }
    h
}

/// Inverse of [`to_hermite_basis`].
pub fn from_hermite_basis(h: &[f64], sigma: f64) -> Polynomial {
    let mut y = Polynomial::zero();
    for (m, &c) in h.iter().enumerate() {
        if c != 0.0 {
            y = y.add(&hermite_he(m).scale(c));
        }
    }
    y.rescale_arg(1.0 / sigma)
}

/// The polynomial `P` with `(n P)' = n R` and `n P -> 0` at infinity.
pub fn antiderivative_poly(r_p: &Polynomial, sigma2: f64) -> Result<Polynomial> {
    let sigma = sigma2.sqrt();
    let h = to_hermite_basis(r_p, sigma);
    let scale = h.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let mean = h.first().copied().unwrap_or(0.0);
    if mean.abs() > MEAN_TOL * scale {
        return Err(Error::NonZeroMean { mean });
    }
    let shifted: Vec<f64> = h.iter().skip(1).map(|c| -sigma * c).collect();
    Ok(from_hermite_basis(&shifted, sigma))
}

/// `int t^q e^{-sigma^2 t^2 / 2} dt`.
pub fn gaussian_moment(q: usize, sigma2: f64) -> f64 {
    if q % 2 == 1 {
        return 0.0;
    }
    (2.0 * PI / sigma2).sqrt() * double_factorial_odd(q / 2) / sigma2.powi((q / 2) as i32)
}

/// `int t^j A_k(t) e^{-sigma^2 t^2 / 2} dt` with `A_k` in powers of `(it)`.
pub fn freq_gaussian_integral(a_k: &Polynomial, j: usize, sigma2: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, &a) in a_k.coeffs().iter().enumerate() {
        acc += Complex64::i().powu(m as u32) * a * gaussian_moment(m + j, sigma2);
    }
    acc
}

/// `P_{p,l}(x) = sum_{k+j=2p} (-ix)^j / j! int t^j A_k e^{-sigma^2 t^2/2} dt`
/// for `p = 0 ..= floor(r/2)`.
pub fn weak_local_polys(freq: &[Polynomial], sigma2: f64, r: usize) -> Result<Vec<Polynomial>> {
    let pmax = r / 2;
    if freq.len() < 2 * pmax + 1 {
        return Err(Error::InsufficientMoments { available: freq.len(), required: 2 * pmax + 1 });
    }
    let mut out = Vec::with_capacity(pmax + 1);
    for p in 0..=pmax {
        let mut coeffs = vec![0.0; 2 * p + 1];
        for k in 0..=2 * p {
            let j = 2 * p - k;
            let val = freq_gaussian_integral(&freq[k], j, sigma2) * (-Complex64::i()).powu(j as u32) / factorial(j);
            if val.im.abs() > REAL_TOL * val.re.abs().max(1.0) {
                return Err(Error::ImaginaryResidue { what: format!("P_{{{p},l}} degree {j}"), residue: val.im });
            }
            coeffs[j] += val.re;
        }
        out.push(Polynomial::new(coeffs));
    }
    Ok(out)
}

/// `a_{k,j}` with `E[(S_n - nA)^k] = sum_j a_{k,j} n^j + O(eps^n)`, `k <= kmax`.
///
/// Expands `exp(n (log mu(t) - mu'(0) t)) Z(t)` with `n` as a formal variable;
/// `a_{k,j} = i^{-k} k! [t^k n^j]`.
pub fn moment_coefficients(s: &SpectralJets, kmax: usize) -> Result<BTreeMap<(usize, usize), f64>> {
    if s.mu.order() < kmax {
        return Err(Error::InsufficientMoments { available: s.mu.order(), required: kmax });
    }
    let mu = s.mu.truncate(kmax);
    let z = s.z.truncate(kmax);
    let mut g = mu.log()?;
    g.set_coeff(1, g.coeff(1) - s.mu.coeff(1));
    let jmax = kmax / 2 + 1;
    let mut bs = BivariateSeries::zero(kmax, jmax);
    bs.set_u_slice(1, &g);
    let e = bs.exp();
    let mut zs = BivariateSeries::zero(kmax, jmax);
    zs.set_u_slice(0, &z);
    let full = e.mul(&zs)?;
    let mut out = BTreeMap::new();
    let mut ipow = Complex64::new(1.0, 0.0);
    for k in 0..=kmax {
        for j in 0..=jmax {
            let v = full.get(k, j) * factorial(k) / ipow;
            if j > k / 2 {
                if v.norm() > REAL_TOL {
                    return Err(Error::DegreeOverflow { k, j, value: v.norm() });
                }
                continue;
            }
            if v.im.abs() > REAL_TOL * v.re.abs().max(1.0) {
                return Err(Error::ImaginaryResidue { what: format!("a_{{{k},{j}}}"), residue: v.im });
            }
            out.insert((k, j), v.re);
        }
        ipow *= Complex64::i();
    }
    Ok(out)
}

/// Everything the evaluators need for one model and one order.
#[derive(Clone, Debug)]
pub struct ExpansionSet {
    pub r: usize,
    pub params: AsymptoticParams,
    /// `A_0 .. A_r` in powers of `(it)`.
    pub freq: Vec<Polynomial>,
    /// `R_0 .. R_r`.
    pub edge_r: Vec<Polynomial>,
    /// `P_0 .. P_r`; `P_0` is the zero polynomial.
    pub edge_p: Vec<Polynomial>,
    /// `P_{0,l} .. P_{floor(r/2),l}`.
    pub weak_local: Vec<Polynomial>,
    /// `a_{k,j}` for `k <= r + 2`, `j <= floor(k/2)`.
    pub moment_coeffs: BTreeMap<(usize, usize), f64>,
}

/// Jet order used for an expansion of order `r`.
pub fn jet_order(model: &dyn TwistedModel, r: usize) -> Result<usize> {
    let want = r + 3;
    match model.max_jet_order() {
        Some(m) if m < r + 2 => Err(Error::InsufficientMoments { available: m, required: r + 2 }),
        Some(m) => Ok(want.min(m)),
        None => Ok(want),
    }
}

impl ExpansionSet {
    /// Full pipeline for `model` at order `r`.
    pub fn compute(model: &dyn TwistedModel, r: usize) -> Result<Self> {
        if r > MAX_ORDER {
            return Err(Error::OrderOutOfRange(r));
        }
        let s = spectral_jets(model, jet_order(model, r)?)?;
        Self::from_jets(&s, r)
    }

    pub fn from_jets(s: &SpectralJets, r: usize) -> Result<Self> {
        if r > MAX_ORDER {
            return Err(Error::OrderOutOfRange(r));
        }
        let params = asymptotic_params(s)?;
        let freq = frequency_polys(&params, r)?;
        let edge_r: Vec<Polynomial> = freq.iter().map(|a| hermite_transform(a, params.sigma2)).collect();
        let mut edge_p = vec![Polynomial::zero()];
        for rp in edge_r.iter().skip(1) {
            edge_p.push(antiderivative_poly(rp, params.sigma2)?);
        }
        let weak_local = weak_local_polys(&freq, params.sigma2, r)?;
        let moment_coeffs = moment_coefficients(s, r + 2)?;
        Ok(ExpansionSet { r, params, freq, edge_r, edge_p, weak_local, moment_coeffs })
    }

    /// The same expansion cut down to order `r <= self.r`.
    pub fn truncated(&self, r: usize) -> ExpansionSet {
        assert!(r <= self.r, "cannot raise the order by truncation");
        ExpansionSet {
            r,
            params: self.params.clone(),
            freq: self.freq[..=r].to_vec(),
            edge_r: self.edge_r[..=r].to_vec(),
            edge_p: self.edge_p[..=r].to_vec(),
            weak_local: self.weak_local[..=r / 2].to_vec(),
            moment_coeffs: self.moment_coeffs.iter().filter(|(k, _)| k.0 <= r + 2).map(|(k, v)| (*k, *v)).collect(),
        }
    }

    pub fn a(&self) -> f64 {
        self.params.a
    }

    pub fn sigma2(&self) -> f64 {
        self.params.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.params.sigma()
    }

    /// `a_{k,j}`, zero when outside the table.
    pub fn moment_coeff(&self, k: usize, j: usize) -> f64 {
        self.moment_coeffs.get(&(k, j)).copied().unwrap_or(0.0)
    }

    /// `sum_j a_{k,j} n^j`.
    pub fn moment_prediction(&self, k: usize, n: f64) -> f64 {
        (0..=k / 2).map(|j| self.moment_coeff(k, j) * n.powi(j as i32)).sum()
    }

    /// Largest deviation in `R_p = P_p' - (x / sigma^2) P_p` over `p >= 1`.
    pub fn identity_defect(&self) -> f64 {
        let q = Polynomial::monomial(-1.0 / self.sigma2(), 1);
        (1..=self.r)
            .map(|p| {
                let rhs = self.edge_p[p].derivative().add(&self.edge_p[p].mul(&q));
                self.edge_r[p].max_diff(&rhs)
            })
            .fold(0.0, f64::max)
    }

    /// True if `A_k`, `R_k` share the parity of `k` and `P_k` has the opposite one.
    pub fn parity_ok(&self, tol: f64) -> bool {
        (0..=self.r).all(|k| {
            self.freq[k].has_parity(k, tol)
                && self.edge_r[k].has_parity(k, tol)
                && (k == 0 || self.edge_p[k].has_parity(k + 1, tol))
        })
    }
}
