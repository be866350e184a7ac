//! Truncated power series.
//!
//! [`Jet`] is a univariate series in `t` with complex coefficients,
//! [`BivariateSeries`] a dense series in `(t, u)`, and [`Polynomial`] a real
//! polynomial used for every output object of the expansion pipeline.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Smallest admissible constant term for division and logarithm.
pub const CONSTANT_TERM_FLOOR: f64 = 1e-300;

/// Truncated power series `c_0 + c_1 t + ... + c_s t^s`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    coeffs: Vec<Complex64>,
}

impl Jet {
    /// Builds a jet from its coefficients; the order is `coeffs.len() - 1`.
    ///
    /// # Panics
    /// Panics if `coeffs` is empty.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Jet { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Jet::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zero(order: usize) -> Self {
        Jet { coeffs: vec![ZERO; order + 1] }
    }

    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut j = Jet::zero(order);
        j.coeffs[0] = c;
        j
    }

    pub fn one(order: usize) -> Self {
        Jet::constant(ONE, order)
    }

    /// The identity series `t`.
    pub fn variable(order: usize) -> Self {
        let mut j = Jet::zero(order);
        if order >= 1 {
            j.coeffs[1] = ONE;
        }
        j
    }

    /// Taylor series of `e^{i c t}`.
    pub fn exp_i(c: f64, order: usize) -> Self {
        let mut out = Vec::with_capacity(order + 1);
        let mut term = ONE;
        let ic = Complex64::new(0.0, c);
        for m in 0..=order {
            out.push(term);
            term = term * ic / (m + 1) as f64;
        }
        Jet { coeffs: out }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, m: usize) -> Complex64 {
        self.coeffs.get(m).copied().unwrap_or(ZERO)
    }

    pub fn set_coeff(&mut self, m: usize, c: Complex64) {
        self.coeffs[m] = c;
    }

    /// Derivative of order `m` at zero, `m! c_m`.
    pub fn derivative_at_zero(&self, m: usize) -> Complex64 {
        self.coeff(m) * factorial(m)
    }

    /// Changes the truncation order, padding with zeros or dropping terms.
    pub fn truncate(&self, order: usize) -> Jet {
        let mut c = self.coeffs.clone();
        c.resize(order + 1, ZERO);
        Jet { coeffs: c }
    }

    fn check(&self, other: &Jet) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch { left: self.order(), right: other.order() });
        }
        Ok(())
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        Ok(Jet { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        Ok(Jet { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect() })
    }

    pub fn scale(&self, s: Complex64) -> Jet {
        Jet { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// Cauchy product truncated at the common order.
    ///
    /// Index pairs `(i, n - i)` are summed symmetrically so that the result
    /// is bitwise independent of operand order.
    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        let (a, b) = (&self.coeffs, &other.coeffs);
        let s = self.order();
        let mut out = vec![ZERO; s + 1];
        for (n, slot) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for i in 0..=n / 2 {
                let j = n - i;
                if i == j {
                    acc += a[i] * b[i];
                } else {
                    acc += a[i] * b[j] + a[j] * b[i];
                }
            }
            *slot = acc;
        }
        Ok(Jet { coeffs: out })
    }

    /// Recursive division `q = a / b`.
    pub fn div(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        let b0 = other.coeffs[0];
        if b0.norm() <= CONSTANT_TERM_FLOOR {
            return Err(Error::DivByZeroConstantTerm { modulus: b0.norm() });
        }
        let s = self.order();
        let mut q = vec![ZERO; s + 1];
        for n in 0..=s {
            let mut acc = self.coeffs[n];
            for k in 1..=n {
                acc -= other.coeffs[k] * q[n - k];
            }
            q[n] = acc / b0;
        }
        Ok(Jet { coeffs: q })
    }

    /// Series exponential via `(e^a)' = a' e^a`.
    pub fn exp(&self) -> Jet {
        let a = &self.coeffs;
        let s = self.order();
        let mut b = vec![ZERO; s + 1];
        b[0] = a[0].exp();
        for n in 1..=s {
            let mut acc = ZERO;
            for k in 1..=n {
                acc += a[k] * b[n - k] * k as f64;
            }
            b[n] = acc / n as f64;
        }
        Jet { coeffs: b }
    }

    /// Principal-branch series logarithm anchored at `log(c_0)`.
    pub fn log(&self) -> Result<Jet> {
        let a = &self.coeffs;
        let a0 = a[0];
        if a0.norm() <= CONSTANT_TERM_FLOOR {
            return Err(Error::LogOfZeroConstantTerm { modulus: a0.norm() });
        }
        let s = self.order();
        let mut b = vec![ZERO; s + 1];
        b[0] = a0.ln();
        for n in 1..=s {
            let mut acc = ZERO;
            for k in 1..n {
                acc += b[k] * a[n - k] * k as f64;
            }
            b[n] = (a[n] - acc / n as f64) / a0;
        }
        Ok(Jet { coeffs: b })
    }

    /// Integer power by repeated multiplication.
    pub fn powi(&self, p: usize) -> Jet {
        let mut out = Jet::one(self.order());
        for _ in 0..p {
            out = out.mul(self).expect("same order");
        }
        out
    }

    /// Evaluates the truncated polynomial at `t` (Horner).
    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * t + c)
    }

    /// Largest coefficientwise modulus of `self - other`.
    pub fn max_diff(&self, other: &Jet) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).map(|m| (self.coeff(m) - other.coeff(m)).norm()).fold(0.0, f64::max)
    }
}

/// Dense truncated series in `(t, u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BivariateSeries {
    t_max: usize,
    u_max: usize,
    coeffs: Vec<Complex64>,
}

impl BivariateSeries {
    pub fn zero(t_max: usize, u_max: usize) -> Self {
        BivariateSeries { t_max, u_max, coeffs: vec![ZERO; (t_max + 1) * (u_max + 1)] }
    }

    pub fn one(t_max: usize, u_max: usize) -> Self {
        let mut s = BivariateSeries::zero(t_max, u_max);
        s.coeffs[0] = ONE;
        s
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    pub fn u_max(&self) -> usize {
        self.u_max
    }

    fn idx(&self, m: usize, k: usize) -> usize {
        k * (self.t_max + 1) + m
    }

    /// Coefficient of `t^m u^k`; zero outside the truncation box.
    pub fn get(&self, m: usize, k: usize) -> Complex64 {
        if m > self.t_max || k > self.u_max {
            ZERO
        } else {
            self.coeffs[self.idx(m, k)]
        }
    }

    /// Sets a coefficient; terms outside the box are silently dropped.
    pub fn set(&mut self, m: usize, k: usize, c: Complex64) {
        if m <= self.t_max && k <= self.u_max {
            let i = self.idx(m, k);
            self.coeffs[i] = c;
        }
    }

    pub fn add_to(&mut self, m: usize, k: usize, c: Complex64) {
        if m <= self.t_max && k <= self.u_max {
            let i = self.idx(m, k);
            self.coeffs[i] += c;
        }
    }

    fn check(&self, o: &BivariateSeries) -> Result<()> {
        if self.t_max != o.t_max {
            return Err(Error::OrderMismatch { left: self.t_max, right: o.t_max });
        }
        if self.u_max != o.u_max {
            return Err(Error::OrderMismatch { left: self.u_max, right: o.u_max });
        }
        Ok(())
    }

    pub fn add(&self, o: &BivariateSeries) -> Result<BivariateSeries> {
        self.check(o)?;
        let mut r = self.clone();
        for (a, b) in r.coeffs.iter_mut().zip(&o.coeffs) {
            *a += b;
        }
        Ok(r)
    }

    pub fn scale(&self, s: Complex64) -> BivariateSeries {
        let mut r = self.clone();
        r.coeffs.iter_mut().for_each(|c| *c *= s);
        r
    }

    pub fn mul(&self, o: &BivariateSeries) -> Result<BivariateSeries> {
        self.check(o)?;
        let mut r = BivariateSeries::zero(self.t_max, self.u_max);
        for k1 in 0..=self.u_max {
            for m1 in 0..=self.t_max {
                let a = self.get(m1, k1);
                if a == ZERO {
                    continue;
                }
                for k2 in 0..=self.u_max - k1 {
                    for m2 in 0..=self.t_max - m1 {
                        let b = o.get(m2, k2);
                        if b != ZERO {
                            r.add_to(m1 + m2, k1 + k2, a * b);
                        }
                    }
                }
            }
        }
        Ok(r)
    }

    /// The coefficient of `u^k` as a jet in `t` of order `t_max`.
    pub fn u_slice(&self, k: usize) -> Jet {
        Jet::new((0..=self.t_max).map(|m| self.get(m, k)).collect())
    }

    pub fn set_u_slice(&mut self, k: usize, j: &Jet) {
        for m in 0..=self.t_max {
            self.set(m, k, j.coeff(m));
        }
    }

    /// Substitutes a concrete `u`, returning a jet in `t`.
    pub fn eval_u(&self, u: f64) -> Jet {
        let mut out = Jet::zero(self.t_max);
        let mut pw = 1.0;
        for k in 0..=self.u_max {
            out = out.add(&self.u_slice(k).scale(Complex64::new(pw, 0.0))).expect("same order");
            pw *= u;
        }
        out
    }

    /// Truncated exponential, computed as a series in `u` with jet
    /// coefficients: `E_0 = exp(s_0)`, `E_k = (1/k) sum_j j s_j E_{k-j}`.
    pub fn exp(&self) -> BivariateSeries {
        let slices: Vec<Jet> = (0..=self.u_max).map(|k| self.u_slice(k)).collect();
        let mut e: Vec<Jet> = Vec::with_capacity(self.u_max + 1);
        e.push(slices[0].exp());
        for k in 1..=self.u_max {
            let mut acc = Jet::zero(self.t_max);
            for j in 1..=k {
                let term = slices[j].mul(&e[k - j]).expect("same order").scale(Complex64::new(j as f64, 0.0));
                acc = acc.add(&term).expect("same order");
            }
            e.push(acc.scale(Complex64::new(1.0 / k as f64, 0.0)));
        }
        let mut r = BivariateSeries::zero(self.t_max, self.u_max);
        for (k, j) in e.iter().enumerate() {
            r.set_u_slice(k, j);
        }
        r
    }

    pub fn max_diff(&self, o: &BivariateSeries) -> f64 {
        let tm = self.t_max.max(o.t_max);
        let um = self.u_max.max(o.u_max);
        let mut d: f64 = 0.0;
        for k in 0..=um {
            for m in 0..=tm {
                d = d.max((self.get(m, k) - o.get(m, k)).norm());
            }
        }
        d
    }
}

/// Trimming tolerance for trailing polynomial coefficients.
pub const TRIM_TOL: f64 = 1e-14;

/// Real polynomial `sum c_m x^m`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Polynomial { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    pub fn monomial(c: f64, m: usize) -> Self {
        let mut v = vec![0.0; m + 1];
        v[m] = c;
        Polynomial::new(v)
    }

    fn trim(&mut self) {
        while let Some(&last) = self.coeffs.last() {
            if last.abs() <= TRIM_TOL {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, m: usize) -> f64 {
        self.coeffs.get(m).copied().unwrap_or(0.0)
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, o: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        Polynomial::new((0..n).map(|m| self.coeff(m) + o.coeff(m)).collect())
    }

    pub fn sub(&self, o: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        Polynomial::new((0..n).map(|m| self.coeff(m) - o.coeff(m)).collect())
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, o: &Polynomial) -> Polynomial {
        if self.is_zero() || o.is_zero() {
            return Polynomial::zero();
        }
        let mut v = vec![0.0; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Polynomial::new(v)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().enumerate().skip(1).map(|(m, c)| c * m as f64).collect())
    }

    /// `p(c x)`.
    pub fn rescale_arg(&self, c: f64) -> Polynomial {
        let mut pw = 1.0;
        let mut v = Vec::with_capacity(self.coeffs.len());
        for &a in &self.coeffs {
            v.push(a * pw);
            pw *= c;
        }
        Polynomial::new(v)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn max_diff(&self, o: &Polynomial) -> f64 {
        let n = self.coeffs.len().max(o.coeffs.len());
        (0..n).map(|m| (self.coeff(m) - o.coeff(m)).abs()).fold(0.0, f64::max)
    }

    /// True if every nonzero coefficient sits in a degree of parity `p`.
    pub fn has_parity(&self, p: usize, tol: f64) -> bool {
        self.coeffs.iter().enumerate().all(|(m, c)| m % 2 == p % 2 || c.abs() <= tol)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.coeffs.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            let c = if first {
                *c
            } else {
                write!(f, "{}", if *c < 0.0 { " - " } else { " + " })?;
                c.abs()
            };
            first = false;
            match m {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}·x")?,
                _ => write!(f, "{c}·x^{m}")?,
            }
        }
        Ok(())
    }
}

/// Probabilists' Hermite polynomial `He_m`.
pub fn hermite_he(m: usize) -> Polynomial {
    let mut prev = Polynomial::constant(1.0);
    if m == 0 {
        return prev;
    }
    let mut cur = Polynomial::monomial(1.0, 1);
    for n in 1..m {
        let next = cur.mul(&Polynomial::monomial(1.0, 1)).sub(&prev.scale(n as f64));
        prev = cur;
        cur = next;
    }
    cur
}

/// `m!` as a float.
pub fn factorial(m: usize) -> f64 {
    (1..=m).fold(1.0, |acc, k| acc * k as f64)
}

/// `(2q - 1)!!` with `(-1)!! = 1`.
pub fn double_factorial_odd(q: usize) -> f64 {
    (1..=q).fold(1.0, |acc, k| acc * (2 * k - 1) as f64)
}

/// `n choose k` as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
