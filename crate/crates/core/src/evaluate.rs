//! Numerical evaluation of the expansions and comparison against oracles.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::ExpansionSet;
use crate::jets::hermite_he;
use crate::models::MarkovModel;
use crate::oracle::{dp_pmf, enum_distribution, kolmogorov_distance, normal_cdf, normal_pdf, probe_grid, ExactDistribution, FnCdf};

/// Target change between successive Simpson refinements.
pub const QUAD_TOL: f64 = 1e-10;
/// Largest number of Simpson subintervals.
pub const QUAD_MAX_POINTS: usize = 1 << 20;
/// Half-width, in units of sigma, of every standardized integration range.
pub const Z_RANGE: f64 = 12.0;

/// Composite Simpson on `[a, b]`, halving the step until two successive
/// estimates differ by at most [`QUAD_TOL`] times `max(1, int |f|)`.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    // (signed, absolute) sums
    let sums = |h: f64, start: usize, step: usize, count: usize| {
        (0..count).fold((0.0, 0.0), |(s, t), i| {
            let v = f(a + (start + step * i) as f64 * h);
            (s + v, t + v.abs())
        })
    };
    let mut n = 64usize;
    let mut h = (b - a) / n as f64;
    let (fa, fb) = (f(a), f(b));
    let ends = (fa + fb, fa.abs() + fb.abs());
    let mut odd = sums(h, 1, 2, n / 2);
    let mut even = sums(h, 2, 2, n / 2 - 1);
    let mut prev = h / 3.0 * (ends.0 + 4.0 * odd.0 + 2.0 * even.0);
    loop {
        n *= 2;
        h /= 2.0;
        even = (even.0 + odd.0, even.1 + odd.1);
        odd = sums(h, 1, 2, n / 2);
        let cur = h / 3.0 * (ends.0 + 4.0 * odd.0 + 2.0 * even.0);
        let scale = h / 3.0 * (ends.1 + 4.0 * odd.1 + 2.0 * even.1);
        let diff = (cur - prev).abs();
        if diff <= QUAD_TOL * scale.max(1.0) {
            return Ok(cur);
        }
        if n >= QUAD_MAX_POINTS {
            return Err(Error::QuadratureNotConverged { diff });
        }
        prev = cur;
    }
}

/// Smooth integrable test functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `exp(-(y - c)^2 / (2 w^2))`.
    GaussianBump { center: f64, width: f64 },
    /// `exp(-1 / (1 - ((y - c) / w)^2))` on `|y - c| < w`.
    CompactBump { center: f64, width: f64 },
    /// `He_k((y - c) / w) exp(-(y - c)^2 / (2 w^2))`.
    HermiteDamped { center: f64, width: f64, degree: usize },
}

impl Default for TestFunction {
    fn default() -> Self {
        TestFunction::GaussianBump { center: 0.0, width: 2.0 }
    }
}

impl TestFunction {
    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            TestFunction::GaussianBump { center, width } => {
                let u = (y - center) / width;
                (-0.5 * u * u).exp()
            }
            TestFunction::CompactBump { center, width } => {
                let u = (y - center) / width;
                if u.abs() < 1.0 {
                    (-1.0 / (1.0 - u * u)).exp()
                } else {
                    0.0
                }
            }
            TestFunction::HermiteDamped { center, width, degree } => {
                let u = (y - center) / width;
                hermite_he(degree).eval(u) * (-0.5 * u * u).exp()
            }
        }
    }

    /// Interval outside which `|f|` is below `1e-30` or zero.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            TestFunction::GaussianBump { center, width } => (center - 12.0 * width, center + 12.0 * width),
            TestFunction::CompactBump { center, width } => (center - width, center + width),
            TestFunction::HermiteDamped { center, width, degree } => {
                let r = (12.0 + degree as f64) * width;
                (center - r, center + r)
            }
        }
    }

    /// Number of continuous derivatives (`usize::MAX` for smooth).
    pub fn smoothness(&self) -> usize {
        usize::MAX
    }

    /// `int f`.
    pub fn integral(&self) -> f64 {
        match *self {
            TestFunction::GaussianBump { width, .. } => width * (2.0 * PI).sqrt(),
            TestFunction::HermiteDamped { width, degree, .. } => {
                if degree == 0 {
                    width * (2.0 * PI).sqrt()
                } else {
                    0.0
                }
            }
            TestFunction::CompactBump { .. } => {
                let (a, b) = self.support();
                simpson(|y| self.eval(y), a, b).unwrap_or(f64::NAN)
            }
        }
    }

    /// `int f(y) e^{-i xi y} dy` when a closed form exists.
    pub fn fourier(&self, xi: f64) -> Option<Complex64> {
        match *self {
            TestFunction::GaussianBump { center, width } => {
                Some(Complex64::from_polar(width * (2.0 * PI).sqrt() * (-0.5 * (width * xi).powi(2)).exp(), -xi * center))
            }
            TestFunction::HermiteDamped { center, width, degree } => {
                let g = (-Complex64::i() * width * xi).powu(degree as u32)
                    * (width * (2.0 * PI).sqrt() * (-0.5 * (width * xi).powi(2)).exp());
                Some(g * Complex64::from_polar(1.0, -xi * center))
            }
            TestFunction::CompactBump { .. } => None,
        }
    }

    /// `int_{-inf}^{y} f`.
    pub fn primitive(&self, y: f64) -> f64 {
        match *self {
            TestFunction::GaussianBump { center, width } => {
                width * (2.0 * PI).sqrt() * crate::oracle::std_normal_cdf((y - center) / width)
            }
            _ => {
                let (a, b) = self.support();
                if y <= a {
                    0.0
                } else {
                    simpson(|s| self.eval(s), a, y.min(b)).unwrap_or(f64::NAN)
                }
            }
        }
    }
}

/// `Phi_sigma(z) + sum_{p=1}^r P_p(z) N^{-p/2} n(z)`.
pub fn edgeworth_cdf(exp: &ExpansionSet, n: usize, z: f64) -> f64 {
    let sigma = exp.sigma();
    let nf = n as f64;
    let corr: f64 = (1..=exp.r).map(|p| exp.edge_p[p].eval(z) * nf.powf(-(p as f64) / 2.0)).sum();
    normal_cdf(z, sigma) + corr * normal_pdf(z, sigma)
}

/// `n(x) sum_{p=0}^r R_p(x) N^{-p/2}`.
pub fn edgeworth_density(exp: &ExpansionSet, n: usize, x: f64) -> f64 {
    let nf = n as f64;
    let s: f64 = (0..=exp.r).map(|p| exp.edge_r[p].eval(x) * nf.powf(-(p as f64) / 2.0)).sum();
    s * normal_pdf(x, exp.sigma())
}

/// Approximation of `P(S_N = v)` for a lattice of the given span.
pub fn lattice_pmf(exp: &ExpansionSet, n: usize, v: f64, span: f64) -> f64 {
    let nf = n as f64;
    let x = (v - nf * exp.a()) / nf.sqrt();
    span * edgeworth_density(exp, n, x) / nf.sqrt()
}

/// Estimate of `E f(S_N - NA)`:
/// `sum_p N^{-p/2} int R_p(z) n(z) f(z sqrt N) dz`, integrated in `y = z sqrt N`.
pub fn weak_global(exp: &ExpansionSet, f: &TestFunction, n: usize) -> Result<f64> {
    let nf = n as f64;
    let sq = nf.sqrt();
    let (a, b) = f.support();
    let lim = Z_RANGE * exp.sigma() * sq;
    let (a, b) = (a.max(-lim), b.min(lim));
    simpson(|y| edgeworth_density(exp, n, y / sq) * f.eval(y) / sq, a, b)
}

/// Estimate of `sqrt(N) E f(S_N - NA)`:
/// `(1 / 2 pi) sum_{p <= r/2} N^{-p} int P_{p,l}(z) f(z) dz`.
pub fn weak_local(exp: &ExpansionSet, f: &TestFunction, n: usize) -> Result<f64> {
    let nf = n as f64;
    let (a, b) = f.support();
    let mut acc = 0.0;
    for (p, poly) in exp.weak_local.iter().enumerate() {
        acc += simpson(|z| poly.eval(z) * f.eval(z), a, b)? * nf.powi(-(p as i32));
    }
    Ok(acc / (2.0 * PI))
}

/// Estimate of `int [F_N(z + y/sqrt N) - Phi(z + y/sqrt N)] f(y) dy`:
/// `sum_{p=1}^r N^{-p/2} int P_p(w) n(w) f(y) dy`, `w = z + y/sqrt N`.
pub fn averaged(exp: &ExpansionSet, f: &TestFunction, n: usize, z: f64) -> Result<f64> {
    let nf = n as f64;
    let sq = nf.sqrt();
    let sigma = exp.sigma();
    let (a, b) = f.support();
    simpson(
        |y| {
            let w = z + y / sq;
            let s: f64 = (1..=exp.r).map(|p| exp.edge_p[p].eval(w) * nf.powf(-(p as f64) / 2.0)).sum();
            s * normal_pdf(w, sigma) * f.eval(y)
        },
        a,
        b,
    )
}

/// `E f(S_N - N A)` under an exact law.
pub fn exact_weak(dist: &ExactDistribution, a: f64, f: &TestFunction) -> f64 {
    let shift = dist.n as f64 * a;
    dist.expect(|v| f.eval(v - shift))
}

/// `int [F_N(z + y/sqrt N) - Phi(z + y/sqrt N)] f(y) dy` under an exact law,
/// with `F_N` the distribution function of `(S_N - NA)/sqrt N`.
pub fn exact_averaged(dist: &ExactDistribution, a: f64, sigma: f64, f: &TestFunction, z: f64) -> Result<f64> {
    let nf = dist.n as f64;
    let sq = nf.sqrt();
    let total = f.integral();
    let shift = nf * a;
    // int F_N(z + y/sq) f(y) dy = sum_v p_v * int_{y >= sq (x_v - z)} f
    let step = dist.expect(|v| total - f.primitive((v - shift) - sq * z));
    let (lo, hi) = f.support();
    let gauss = simpson(|y| normal_cdf(z + y / sq, sigma) * f.eval(y), lo, hi)?;
    Ok(step - gauss)
}

/// `(1 / sqrt(2 pi sigma^2)) e^{-u^2 / (2 N sigma^2)}`.
pub fn lclt_estimate(exp: &ExpansionSet, u: f64, n: usize) -> f64 {
    let s2 = exp.sigma2();
    (-u * u / (2.0 * n as f64 * s2)).exp() / (2.0 * PI * s2).sqrt()
}

/// Predicted `P(|S_N - NA - u| <= eps)`: `2 eps density / sqrt N`.
pub fn lclt_window(exp: &ExpansionSet, u: f64, n: usize, eps: f64) -> f64 {
    2.0 * eps * lclt_estimate(exp, u, n) / (n as f64).sqrt()
}

/// Moderate-deviation comparison at `x = max(1, sqrt(c sigma^2 ln N))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModDev {
    pub x: f64,
    pub ratio: f64,
    pub exact_tail: f64,
    pub normal_tail: f64,
    /// `(1 / sqrt(2 pi c)) / sqrt(N^c ln N)`.
    pub corollary: f64,
}

/// `(1 / sqrt(2 pi c)) / sqrt(N^c ln N)`.
pub fn moddev_corollary(c: f64, n: usize) -> f64 {
    let nf = n as f64;
    1.0 / (2.0 * PI * c).sqrt() / (nf.powf(c) * nf.ln()).sqrt()
}

/// Ratio of the exact tail of `(S_N - NA)/sqrt N` beyond `x` to the normal tail.
pub fn moddev_ratio(exp: &ExpansionSet, model: &MarkovModel, c: f64, n: usize) -> Result<ModDev> {
    if !(c > 0.0 && c < exp.r as f64) {
        return Err(Error::InvalidConfig(format!("c = {c} must lie in (0, {})", exp.r)));
    }
    let dist = exact_law(model, n, OracleKind::Auto)
        .map_err(|e| Error::OracleUnavailable(format!("exact tail at N = {n}: {e}")))?;
    let sigma = exp.sigma();
    let nf = n as f64;
    let x = (c * exp.sigma2() * nf.ln()).sqrt().max(1.0);
    let std = dist.standardize(nf * exp.a(), nf.sqrt());
    let exact_tail = 1.0 - std.cdf(x);
    let normal_tail = 1.0 - normal_cdf(x, sigma);
    Ok(ModDev { x, ratio: exact_tail / normal_tail, exact_tail, normal_tail, corollary: moddev_corollary(c, n) })
}

/// Which exact oracle to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    Dp,
    Enum,
    /// Dynamic program for lattice models, enumeration otherwise.
    Auto,
}

/// Exact law of `S_N`.
pub fn exact_law(model: &MarkovModel, n: usize, kind: OracleKind) -> Result<ExactDistribution> {
    match kind {
        OracleKind::Dp => dp_pmf(model, n),
        OracleKind::Enum => enum_distribution(model, n),
        OracleKind::Auto => {
            if model.lattice().is_some() {
                dp_pmf(model, n)
            } else {
                enum_distribution(model, n)
            }
        }
    }
}

/// Expansion form under study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Classical,
    Lattice,
    WeakLocal,
    WeakGlobal,
    Averaged,
}

impl Form {
    pub fn name(&self) -> &'static str {
        match self {
            Form::Classical => "classical",
            Form::Lattice => "lattice",
            Form::WeakLocal => "weak_local",
            Form::WeakGlobal => "weak_global",
            Form::Averaged => "averaged",
        }
    }

    /// Power of `N` applied to the raw error.
    pub fn scale_exponent(&self, r: usize) -> f64 {
        match self {
            Form::WeakGlobal => (r as f64 + 1.0) / 2.0,
            _ => r as f64 / 2.0,
        }
    }
}

/// Errors of one expansion form over an `N` ladder.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub form: Form,
    pub r: usize,
    pub n_list: Vec<usize>,
    pub raw_error: Vec<f64>,
    pub scaled_error: Vec<f64>,
    pub scale_exponent: f64,
    /// Scaled errors strictly decrease along the ladder.
    pub verdict: bool,
    /// Least-squares slope of `log raw_error` against `log N`.
    pub fitted_slope: f64,
}

impl ConvergenceReport {
    pub fn new(form: Form, r: usize, n_list: Vec<usize>, raw_error: Vec<f64>) -> Self {
        let scale_exponent = form.scale_exponent(r);
        let scaled_error: Vec<f64> =
            n_list.iter().zip(&raw_error).map(|(&n, &e)| e * (n as f64).powf(scale_exponent)).collect();
        let verdict = scaled_error.windows(2).all(|w| w[1] < w[0]);
        let fitted_slope = log_slope(&n_list, &raw_error);
        ConvergenceReport { form, r, n_list, raw_error, scaled_error, scale_exponent, verdict, fitted_slope }
    }

    /// CSV with header `N,raw_error,scaled_error`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,raw_error,scaled_error\n");
        for i in 0..self.n_list.len() {
            s.push_str(&format!("{},{:.16e},{:.16e}\n", self.n_list[i], self.raw_error[i], self.scaled_error[i]));
        }
        s
    }
}

fn log_slope(n: &[usize], e: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        n.iter().zip(e).filter(|(_, &e)| e > 0.0).map(|(&n, &e)| ((n as f64).ln(), e.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Probe points of the averaged form: `0, +-sigma, +-2 sigma`.
pub fn averaged_probes(sigma: f64) -> [f64; 5] {
    [-2.0 * sigma, -sigma, 0.0, sigma, 2.0 * sigma]
}

/// Error of one form against one exact law.
pub fn form_error(exp: &ExpansionSet, dist: &ExactDistribution, form: Form, f: &TestFunction) -> Result<f64> {
    let n = dist.n;
    let nf = n as f64;
    let sq = nf.sqrt();
    let a = exp.a();
    match form {
        Form::Classical => {
            let std = dist.standardize(nf * a, sq);
            let grid = probe_grid(Z_RANGE * exp.sigma(), 4801);
            let model_cdf = FnCdf(|z| edgeworth_cdf(exp, n, z));
            Ok(kolmogorov_distance(&std, &model_cdf, &grid))
        }
        Form::Lattice => {
            let span = dist
                .support
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::INFINITY, f64::min);
            let span = if span.is_finite() { span } else { 1.0 };
            let mut best: f64 = 0.0;
            for (v, p) in dist.support.iter().zip(&dist.pmf) {
                let e = (sq * p - sq * lattice_pmf(exp, n, *v, span)).abs();
                best = best.max(e);
            }
            Ok(best / span)
        }
        Form::WeakLocal => Ok((sq * exact_weak(dist, a, f) - weak_local(exp, f, n)?).abs()),
        Form::WeakGlobal => Ok((exact_weak(dist, a, f) - weak_global(exp, f, n)?).abs()),
        Form::Averaged => {
            let mut best: f64 = 0.0;
            for z in averaged_probes(exp.sigma()) {
                let e = (exact_averaged(dist, a, exp.sigma(), f, z)? - averaged(exp, f, n, z)?).abs();
                best = best.max(e);
            }
            Ok(best)
        }
    }
}

/// `sup_v |sqrt N P(S_N = v) - lclt_estimate(v - NA)|` over the lattice.
pub fn lclt_error(exp: &ExpansionSet, dist: &ExactDistribution) -> f64 {
    let nf = dist.n as f64;
    dist.support
        .iter()
        .zip(&dist.pmf)
        .map(|(v, p)| (nf.sqrt() * p - lclt_estimate(exp, v - nf * exp.a(), dist.n)).abs())
        .fold(0.0, f64::max)
}

/// Runs several forms over one ladder, computing each exact law once.
pub fn convergence_studies(
    exp: &ExpansionSet,
    model: &MarkovModel,
    oracle: OracleKind,
    forms: &[Form],
    n_list: &[usize],
    f: &TestFunction,
) -> Result<Vec<ConvergenceReport>> {
    let errors: Vec<Vec<f64>> = n_list
        .par_iter()
        .map(|&n| {
            let dist = exact_law(model, n, oracle)?;
            forms.iter().map(|&form| form_error(exp, &dist, form, f)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(forms
        .iter()
        .enumerate()
        .map(|(i, &form)| ConvergenceReport::new(form, exp.r, n_list.to_vec(), errors.iter().map(|e| e[i]).collect()))
        .collect())
}

/// One form over one ladder.
pub fn convergence_study(
    exp: &ExpansionSet,
    model: &MarkovModel,
    oracle: OracleKind,
    form: Form,
    n_list: &[usize],
    f: &TestFunction,
) -> Result<ConvergenceReport> {
    Ok(convergence_studies(exp, model, oracle, &[form], n_list, f)?.remove(0))
}
