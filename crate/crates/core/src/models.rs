//! Concrete models: finite Markov chains with transition observables,
//! i.i.d. laws, and Ulam discretizations of full-branch expanding maps.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{factorial, Jet};
use crate::spectral::OperatorFamilyJet;

/// Tolerance on row sums and on the initial distribution.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Integrality tolerance for lattice detection.
pub const LATTICE_TOL: f64 = 1e-9;
/// Largest denominator tried during span reconstruction.
pub const LATTICE_MAX_DENOM: i64 = 1_000_000;

/// Anything that provides a twisted operator family `L_t` together with the
/// functionals `v = 1` and `l = mu0`.
pub trait TwistedModel: Send + Sync {
    fn dim(&self) -> usize;
    /// `L_0`, a row-stochastic matrix.
    fn transition(&self) -> DMatrix<f64>;
    fn initial(&self) -> DVector<f64>;
    fn operator_family(&self, order: usize) -> Result<OperatorFamilyJet>;
    /// Highest usable jet order, if the model is only known to finite order.
    fn max_jet_order(&self) -> Option<usize> {
        None
    }
    /// Chain form used by the exact oracles, if one exists.
    fn as_markov(&self) -> Option<MarkovModel>;
}

/// Finite-state chain with observable `X_n = h[x_n, x_{n+1}]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovModel {
    p: DMatrix<f64>,
    h: DMatrix<f64>,
    mu0: DVector<f64>,
    lattice: Option<f64>,
    transitions: Vec<Transition>,
}

/// One nonzero entry of the transition matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub prob: f64,
    pub value: f64,
}

fn check_prob(v: f64, row: usize, col: usize) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::NegativeProbability { row, col, value: v });
    }
    Ok(())
}

fn nested_to_matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let d = rows.len();
    if d == 0 {
        return Err(Error::InconsistentDimensions(format!("{what} is empty")));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != d {
            return Err(Error::InconsistentDimensions(format!(
                "{what} row {i} has {} entries, expected {d}",
                r.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

/// Builds and validates a chain from nested row-major arrays.
pub fn markov_model(p: &[Vec<f64>], h: &[Vec<f64>], mu0: &[f64]) -> Result<MarkovModel> {
    let pm = nested_to_matrix(p, "P")?;
    let hm = nested_to_matrix(h, "h")?;
    if hm.nrows() != pm.nrows() || mu0.len() != pm.nrows() {
        return Err(Error::InconsistentDimensions(format!(
            "P is {0}x{0}, h is {1}x{1}, mu0 has {2} entries",
            pm.nrows(),
            hm.nrows(),
            mu0.len()
        )));
    }
    MarkovModel::from_matrices(pm, hm, DVector::from_column_slice(mu0))
}

impl MarkovModel {
    pub fn from_matrices(p: DMatrix<f64>, h: DMatrix<f64>, mu0: DVector<f64>) -> Result<Self> {
        let d = p.nrows();
        if p.ncols() != d || h.nrows() != d || h.ncols() != d || mu0.len() != d {
            return Err(Error::InconsistentDimensions("P, h and mu0 disagree".into()));
        }
        for i in 0..d {
            let mut s = 0.0;
            for j in 0..d {
                check_prob(p[(i, j)], i, j)?;
                if !h[(i, j)].is_finite() {
                    return Err(Error::InconsistentDimensions(format!("h[{i}][{j}] is not finite")));
                }
                s += p[(i, j)];
            }
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NonStochasticModel { row: i, sum: s });
            }
        }
        let mut s = 0.0;
        for (i, &m) in mu0.iter().enumerate() {
            check_prob(m, d, i)?;
            s += m;
        }
        if (s - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NonStochasticModel { row: d, sum: s });
        }
        let mut transitions = Vec::new();
        for i in 0..d {
            for j in 0..d {
                if p[(i, j)] > 0.0 {
                    transitions.push(Transition { from: i, to: j, prob: p[(i, j)], value: h[(i, j)] });
                }
            }
        }
        let values: Vec<f64> = transitions.iter().map(|t| t.value).collect();
        let lattice = detect_span(&values);
        Ok(MarkovModel { p, h, mu0, lattice, transitions })
    }

    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn mu0(&self) -> &DVector<f64> {
        &self.mu0
    }

    /// Span of the lattice generated by the observable, if any.
    pub fn lattice(&self) -> Option<f64> {
        self.lattice
    }

    /// Nonzero transitions in row-major order.
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Same chain with a different initial distribution.
    pub fn with_initial(&self, mu0: &[f64]) -> Result<MarkovModel> {
        MarkovModel::from_matrices(self.p.clone(), self.h.clone(), DVector::from_column_slice(mu0))
    }

    /// Smallest and largest observable value over allowed transitions.
    pub fn value_range(&self) -> (f64, f64) {
        self.transitions
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t.value), hi.max(t.value)))
    }

    /// Applies `L_t` to `f`: `(L_t f)_j = sum_k e^{i t h_jk} p_jk f_k`.
    pub fn apply_twisted(&self, t: f64, f: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for tr in &self.transitions {
            let w = Complex64::from_polar(tr.prob, t * tr.value);
            out[tr.from] += w * f[tr.to];
        }
    }

    /// Row-vector action `(w L_t)_k = sum_j w_j e^{i t h_jk} p_jk`.
    pub fn apply_twisted_left(&self, t: f64, w: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for tr in &self.transitions {
            let x = Complex64::from_polar(tr.prob, t * tr.value);
            out[tr.to] += w[tr.from] * x;
        }
    }

    /// Dense `L_t`.
    pub fn twisted_matrix(&self, t: f64) -> DMatrix<Complex64> {
        let d = self.dim();
        let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
        for tr in &self.transitions {
            m[(tr.from, tr.to)] = Complex64::from_polar(tr.prob, t * tr.value);
        }
        m
    }

    /// Stable content hash input.
    pub fn canonical_string(&self) -> String {
        let fmt_m = |m: &DMatrix<f64>| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| format!("{:e}", m[(i, j)])).collect::<Vec<_>>().join(","))
                .collect::<Vec<_>>()
                .join(";")
        };
        let mu: Vec<String> = self.mu0.iter().map(|x| format!("{x:e}")).collect();
        format!("markov|{}|{}|{}", fmt_m(&self.p), fmt_m(&self.h), mu.join(","))
    }
}

impl TwistedModel for MarkovModel {
    fn dim(&self) -> usize {
        self.p.nrows()
    }

    fn transition(&self) -> DMatrix<f64> {
        self.p.clone()
    }

    fn initial(&self) -> DVector<f64> {
        self.mu0.clone()
    }

    fn operator_family(&self, order: usize) -> Result<OperatorFamilyJet> {
        crate::spectral::build_operator_family(self, order)
    }

    fn as_markov(&self) -> Option<MarkovModel> {
        Some(self.clone())
    }
}

/// Best rational approximation `p/q` with `|q x - p| <= tol`, `q <= max_q`.
fn rational_approx(x: f64, tol: f64, max_q: i64) -> Option<(i64, i64)> {
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let ai = a as i64;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_q {
            return None;
        }
        if (k2 as f64 * x - h2 as f64).abs() <= tol {
            return Some((h2, k2));
        }
        let frac = y - a;
        if frac.abs() < 1e-300 {
            return None;
        }
        y = 1.0 / frac;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
    }
    None
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Largest `span > 0` with every value an integer multiple of it.
pub fn detect_span(values: &[f64]) -> Option<f64> {
    let nz: Vec<f64> = values.iter().copied().filter(|v| v.abs() > LATTICE_TOL).collect();
    if nz.is_empty() {
        return Some(1.0);
    }
    let vref = nz.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let mut denom: i64 = 1;
    for v in &nz {
        let (_, q) = rational_approx(v / vref, LATTICE_TOL, LATTICE_MAX_DENOM)?;
        denom = denom / gcd(denom, q) * q;
        if denom > LATTICE_MAX_DENOM {
            return None;
        }
    }
    let unit = vref / denom as f64;
    let mut g: i64 = 0;
    for v in &nz {
        let k = (v / unit).round();
        if (v / unit - k).abs() > LATTICE_TOL * (1.0 + k.abs()) {
            return None;
        }
        g = gcd(g, k as i64);
    }
    let span = unit * g.max(1) as f64;
    values
        .iter()
        .all(|v| {
            let r = v / span;
            (r - r.round()).abs() <= LATTICE_TOL * (1.0 + r.abs())
        })
        .then_some(span)
}

/// An i.i.d. law given by a finite pmf or by raw moments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IidModel {
    Pmf { pmf: Vec<(f64, f64)> },
    Moments { moments: Vec<f64> },
}

/// Validates an i.i.d. specification.
pub fn iid_model(spec: IidModel) -> Result<IidModel> {
    match &spec {
        IidModel::Pmf { pmf } => {
            if pmf.is_empty() {
                return Err(Error::InconsistentDimensions("empty pmf".into()));
            }
            let mut s = 0.0;
            for (i, &(v, p)) in pmf.iter().enumerate() {
                check_prob(p, 0, i)?;
                if !v.is_finite() {
                    return Err(Error::InconsistentDimensions(format!("pmf value {i} is not finite")));
                }
                s += p;
            }
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NonStochasticModel { row: 0, sum: s });
            }
        }
        IidModel::Moments { moments } => {
            if moments.len() < 2 {
                return Err(Error::InsufficientMoments { available: moments.len(), required: 2 });
            }
            check_hankel(moments)?;
        }
    }
    Ok(spec)
}

fn check_hankel(moments: &[f64]) -> Result<()> {
    let m = |k: usize| if k == 0 { 1.0 } else { moments[k - 1] };
    let n = moments.len() / 2 + 1;
    let hk = DMatrix::from_fn(n, n, |i, j| m(i + j));
    let scale = hk.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let eig = hk.symmetric_eigenvalues();
    let min = eig.iter().fold(f64::INFINITY, |a, &x| a.min(x));
    if min < -1e-10 * scale {
        return Err(Error::InvalidMoments(format!("Hankel matrix has eigenvalue {min:e}")));
    }
    Ok(())
}

impl IidModel {
    pub fn pmf(pmf: Vec<(f64, f64)>) -> Result<Self> {
        iid_model(IidModel::Pmf { pmf })
    }

    pub fn moments(moments: Vec<f64>) -> Result<Self> {
        iid_model(IidModel::Moments { moments })
    }

    /// Raw moments `E X^k`, `k = 1..=kmax`.
    pub fn raw_moments(&self, kmax: usize) -> Result<Vec<f64>> {
        match self {
            IidModel::Pmf { pmf } => Ok((1..=kmax)
                .map(|k| pmf.iter().map(|&(v, p)| p * v.powi(k as i32)).sum())
                .collect()),
            IidModel::Moments { moments } => {
                if moments.len() < kmax {
                    return Err(Error::InsufficientMoments { available: moments.len(), required: kmax });
                }
                Ok(moments[..kmax].to_vec())
            }
        }
    }

    /// Characteristic function jet `E e^{itX}`.
    pub fn char_jet(&self, order: usize) -> Result<Jet> {
        match self {
            IidModel::Pmf { pmf } => {
                let mut j = Jet::zero(order);
                for &(v, p) in pmf {
                    j = j.add(&Jet::exp_i(v, order).scale(Complex64::new(p, 0.0)))?;
                }
                Ok(j)
            }
            IidModel::Moments { moments } => {
                if moments.len() < order {
                    return Err(Error::InsufficientMoments { available: moments.len(), required: order });
                }
                let mut c = vec![Complex64::new(1.0, 0.0)];
                let mut ipow = Complex64::new(1.0, 0.0);
                for k in 1..=order {
                    ipow *= Complex64::i();
                    c.push(ipow * moments[k - 1] / factorial(k));
                }
                Ok(Jet::new(c))
            }
        }
    }

    /// Embedding as a chain whose rows all equal the pmf and whose
    /// observable depends only on the target state.
    pub fn to_markov(&self) -> Result<MarkovModel> {
        let IidModel::Pmf { pmf } = self else {
            return Err(Error::OracleUnavailable("moment-specified law has no chain form".into()));
        };
        let d = pmf.len();
        let p = DMatrix::from_fn(d, d, |_, k| pmf[k].1);
        let h = DMatrix::from_fn(d, d, |_, k| pmf[k].0);
        let mu0 = DVector::from_iterator(d, pmf.iter().map(|x| x.1));
        MarkovModel::from_matrices(p, h, mu0)
    }
}

impl TwistedModel for IidModel {
    fn dim(&self) -> usize {
        1
    }

    fn transition(&self) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, 1.0)
    }

    fn initial(&self) -> DVector<f64> {
        DVector::from_element(1, 1.0)
    }

    fn operator_family(&self, order: usize) -> Result<OperatorFamilyJet> {
        Ok(OperatorFamilyJet::from_entries(1, vec![(0, 0, self.char_jet(order)?)]))
    }

    fn max_jet_order(&self) -> Option<usize> {
        match self {
            IidModel::Pmf { .. } => None,
            IidModel::Moments { moments } => Some(moments.len()),
        }
    }

    fn as_markov(&self) -> Option<MarkovModel> {
        self.to_markov().ok()
    }
}

/// Full-branch interval maps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapKind {
    /// `x -> 2x mod 1`.
    Doubling,
    /// Increasing linear branches mapping each `[b_i, b_{i+1}]` onto `[0, 1]`.
    FullBranchLinear { breakpoints: Vec<f64> },
}

impl MapKind {
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            MapKind::Doubling => vec![0.0, 0.5, 1.0],
            MapKind::FullBranchLinear { breakpoints } => breakpoints.clone(),
        }
    }

    /// One step of the map.
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            MapKind::Doubling => {
                let y = 2.0 * x;
                y - y.floor()
            }
            MapKind::FullBranchLinear { breakpoints } => {
                let i = match breakpoints.partition_point(|&b| b <= x) {
                    0 => 0,
                    n => (n - 1).min(breakpoints.len() - 2),
                };
                let y = (x - breakpoints[i]) / (breakpoints[i + 1] - breakpoints[i]);
                y.clamp(0.0, 1.0 - f64::EPSILON)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let b = self.breakpoints();
        if b.len() < 3 || b[0] != 0.0 || *b.last().unwrap() != 1.0 {
            return Err(Error::InvalidConfig("breakpoints must run from 0 to 1 with at least two branches".into()));
        }
        for (i, w) in b.windows(2).enumerate() {
            let width = w[1] - w[0];
            if !(width > 0.0) {
                return Err(Error::InvalidConfig(format!("breakpoints not increasing at {i}")));
            }
            if 1.0 / width <= 1.0 {
                return Err(Error::SlopeBelowOne { branch: i, slope: 1.0 / width });
            }
        }
        Ok(())
    }
}

/// Observable on `[0, 1]`.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    /// `amplitude * cos(2 pi frequency x + phase)`.
    Cos { amplitude: f64, frequency: f64, phase: f64 },
    /// Coefficients in increasing degree.
    Poly { coeffs: Vec<f64> },
    Constant { value: f64 },
    #[serde(skip)]
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Cos { amplitude, frequency, phase } => {
                write!(f, "Cos({amplitude}, {frequency}, {phase})")
            }
            Observable::Poly { coeffs } => write!(f, "Poly({coeffs:?})"),
            Observable::Constant { value } => write!(f, "Constant({value})"),
            Observable::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Observable {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Observable::Cos { amplitude, frequency, phase } => amplitude * (2.0 * PI * frequency * x + phase).cos(),
            Observable::Poly { coeffs } => coeffs.iter().rev().fold(0.0, |a, c| a * x + c),
            Observable::Constant { value } => *value,
            Observable::Custom(f) => f(x),
        }
    }
}

/// Ulam discretization request.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UlamSpec {
    pub map: MapKind,
    pub observable: Observable,
    pub cells: usize,
    /// Initial density sampled at cell midpoints; uniform when absent.
    #[serde(default)]
    pub density: Option<Observable>,
}

/// Discretizes a full-branch map on `cells` equal cells.
///
/// Entry `(j, k)` is the fraction of cell `j` mapped into cell `k`; the
/// transition carries `g` at the midpoint of the largest preimage piece.
pub fn ulam_model(spec: &UlamSpec) -> Result<MarkovModel> {
    if spec.cells < 16 {
        return Err(Error::TooFewCells(spec.cells));
    }
    spec.map.validate()?;
    let n = spec.cells;
    let w = 1.0 / n as f64;
    let b = spec.map.breakpoints();
    let mut p = DMatrix::zeros(n, n);
    let mut h = DMatrix::zeros(n, n);
    let mut best = DMatrix::from_element(n, n, 0.0f64);
    for j in 0..n {
        let (a0, a1) = (j as f64 * w, (j + 1) as f64 * w);
        for br in b.windows(2) {
            let (lo, hi) = (a0.max(br[0]), a1.min(br[1]));
            if hi <= lo {
                continue;
            }
            let slope = 1.0 / (br[1] - br[0]);
            let (y0, y1) = ((lo - br[0]) * slope, (hi - br[0]) * slope);
            let k0 = ((y0 * n as f64).floor() as usize).min(n - 1);
            let k1 = ((y1 * n as f64).ceil() as usize).min(n);
            for k in k0..k1 {
                let (c0, c1) = (y0.max(k as f64 * w), y1.min((k + 1) as f64 * w));
                if c1 <= c0 {
                    continue;
                }
                let piece = (c1 - c0) / slope;
                p[(j, k)] += piece / w;
                if piece > best[(j, k)] {
                    best[(j, k)] = piece;
                    let mid = br[0] + 0.5 * (c0 + c1) / slope;
                    h[(j, k)] = spec.observable.eval(mid);
                }
            }
        }
        let s: f64 = p.row(j).sum();
        for k in 0..n {
            p[(j, k)] /= s;
        }
    }
    let mut mu0 = DVector::from_element(n, w);
    if let Some(dens) = &spec.density {
        for j in 0..n {
            mu0[j] = dens.eval((j as f64 + 0.5) * w).max(0.0);
        }
        let s = mu0.sum();
        if !(s > 0.0) {
            return Err(Error::InvalidConfig("density has zero mass".into()));
        }
        mu0 /= s;
    } else {
        mu0 /= mu0.sum();
    }
    MarkovModel::from_matrices(p, h, mu0)
}

/// Result of a Diophantine scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiophantineScan {
    /// `(s, d(s))` pairs.
    pub table: Vec<(f64, f64)>,
    /// Fitted constant in `d(s) >= K |s|^{-beta}`.
    pub k: f64,
    pub beta: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    /// Number of record minima used by the fit.
    pub fit_points: usize,
}

/// Distance to the nearest integer.
pub fn dist_to_int(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Differences `b_{r,j,k} - b_{r,0,k}` with `b_{r,j,k} = h_rj + h_jk`, `k >= 1`.
pub fn resonance_differences(h: &DMatrix<f64>) -> Vec<f64> {
    let d = h.nrows();
    let mut out = Vec::new();
    for r in 0..d {
        for j in 0..d {
            for k in 1..d {
                let diff = h[(r, j)] + h[(j, k)] - h[(r, 0)] - h[(0, k)];
                if diff != 0.0 {
                    out.push(diff);
                }
            }
        }
    }
    out
}

/// `d(s)`: largest nearest-integer distance among the resonance differences.
pub fn diophantine_d(diffs: &[f64], s: f64) -> f64 {
    diffs.iter().map(|b| dist_to_int(b * s)).fold(0.0, f64::max)
}

/// Evaluates `d(s)` on `s_grid` and fits `log d = log K - beta log|s|` on the
/// running minima over `|s| > 1`.
pub fn diophantine_scan(h: &DMatrix<f64>, s_grid: &[f64]) -> Result<DiophantineScan> {
    if h.nrows() < 2 || h.ncols() != h.nrows() {
        return Err(Error::InconsistentDimensions("Diophantine scan needs a square h with d >= 2".into()));
    }
    let diffs = resonance_differences(h);
    let table: Vec<(f64, f64)> = s_grid.iter().map(|&s| (s, diophantine_d(&diffs, s))).collect();
    let mut pts: Vec<(f64, f64)> = table.iter().filter(|(s, d)| s.abs() > 1.0 && *d > 0.0).copied().collect();
    pts.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
    let mut records = Vec::new();
    let mut cur = f64::INFINITY;
    for (s, d) in pts {
        if d < cur {
            cur = d;
            records.push((s.abs().ln(), d.ln()));
        }
    }
    let (k, beta, residual) = if records.len() >= 2 {
        let n = records.len() as f64;
        let mx = records.iter().map(|p| p.0).sum::<f64>() / n;
        let my = records.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = records.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = records.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let icpt = my - slope * mx;
        let res = (records.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
        (icpt.exp(), -slope, res)
    } else {
        (0.0, f64::NAN, f64::NAN)
    };
    Ok(DiophantineScan { table, k, beta, residual, fit_points: records.len() })
}

/// Golden ratio.
pub const PHI: f64 = 1.618_033_988_749_895;

/// The two-state chain used throughout the examples:
/// `P = [[0.7, 0.3], [0.4, 0.6]]`, `h = [[1, 0], [0, 0]]`, started from its
/// stationary law.
pub fn running_chain() -> MarkovModel {
    markov_model(
        &[vec![0.7, 0.3], vec![0.4, 0.6]],
        &[vec![1.0, 0.0], vec![0.0, 0.0]],
        &[4.0 / 7.0, 3.0 / 7.0],
    )
    .expect("valid model")
}

/// Same transition law started from state 0, so `Z` is not constant.
pub fn running_chain_from_zero() -> MarkovModel {
    running_chain().with_initial(&[1.0, 0.0]).expect("valid model")
}

/// Three-state chain with integer observable, started from state 0.
pub fn lattice_chain3() -> MarkovModel {
    markov_model(
        &[vec![0.5, 0.3, 0.2], vec![0.2, 0.5, 0.3], vec![0.3, 0.2, 0.5]],
        &[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, -1.0], vec![2.0, 1.0, 0.0]],
        &[1.0, 0.0, 0.0],
    )
    .expect("valid model")
}

/// Two-state chain whose resonance differences are `{1, phi}`.
pub fn diophantine_chain() -> MarkovModel {
    markov_model(
        &[vec![0.45, 0.55], vec![0.6, 0.4]],
        &[vec![0.0, 0.0], vec![2.0 - PHI, 1.0]],
        &[12.0 / 23.0, 11.0 / 23.0],
    )
    .expect("valid model")
}

/// Doubling map with `g(x) = cos 2 pi x`.
pub fn doubling_cos_spec(cells: usize) -> UlamSpec {
    UlamSpec {
        map: MapKind::Doubling,
        observable: Observable::Cos { amplitude: 1.0, frequency: 1.0, phase: 0.0 },
        cells,
        density: None,
    }
}

/// Bundled models used by the examples and the identity checks.
pub fn catalog() -> Vec<(&'static str, Box<dyn TwistedModel>)> {
    vec![
        ("running_chain", Box::new(running_chain())),
        ("running_chain_from_zero", Box::new(running_chain_from_zero())),
        ("lattice_chain3", Box::new(lattice_chain3())),
        ("diophantine_chain", Box::new(diophantine_chain())),
        ("bernoulli", Box::new(IidModel::pmf(vec![(0.0, 0.5), (1.0, 0.5)]).expect("valid"))),
        ("skewed_pmf", Box::new(IidModel::pmf(vec![(-1.0, 0.2), (0.0, 0.5), (3.0, 0.3)]).expect("valid"))),
        (
            "skewed_moments",
            Box::new({
                let law = IidModel::pmf(vec![(-1.0, 0.25), (0.5, 0.5), (2.0, 0.25)]).expect("valid");
                IidModel::moments(law.raw_moments(11).expect("pmf")).expect("valid")
            }),
        ),
        ("ulam_doubling_64", Box::new(ulam_model(&doubling_cos_spec(64)).expect("valid"))),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_detection() {
        assert_eq!(running_chain().lattice(), Some(1.0));
        let m = markov_model(
            &[vec![0.5, 0.5], vec![0.5, 0.5]],
            &[vec![1.0, 2f64.sqrt()], vec![0.0, 0.0]],
            &[0.5, 0.5],
        )
        .unwrap();
        assert_eq!(m.lattice(), None);
        assert!(diophantine_chain().lattice().is_none());
        let s = detect_span(&[0.5, 1.5, -1.0]).unwrap();
        assert!((s - 0.5).abs() < 1e-15);
        assert!((detect_span(&[2.0, 4.0, 6.0]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            markov_model(&[vec![0.5, 0.6], vec![0.5, 0.5]], &[vec![0.0; 2], vec![0.0; 2]], &[0.5, 0.5]),
            Err(Error::NonStochasticModel { row: 0, .. })
        ));
        assert!(matches!(
            markov_model(&[vec![1.2, -0.2], vec![0.5, 0.5]], &[vec![0.0; 2], vec![0.0; 2]], &[0.5, 0.5]),
            Err(Error::NegativeProbability { .. })
        ));
        assert!(matches!(
            markov_model(&[vec![1.0]], &[vec![0.0; 2], vec![0.0; 2]], &[1.0]),
            Err(Error::InconsistentDimensions(_))
        ));
        assert!(matches!(IidModel::moments(vec![0.0, -1.0]), Err(Error::InvalidMoments(_))));
    }

    #[test]
    fn bernoulli_char_jet() {
        let b = IidModel::pmf(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let j = b.char_jet(5).unwrap();
        let oracle = Jet::one(5).add(&Jet::exp_i(1.0, 5)).unwrap().scale(Complex64::new(0.5, 0.0));
        assert!(j.max_diff(&oracle) < 1e-16);
    }

    #[test]
    fn pmf_and_moment_jets_agree() {
        let pmf = IidModel::pmf(vec![(-1.0, 0.2), (0.0, 0.5), (3.0, 0.3)]).unwrap();
        let mom = IidModel::moments(pmf.raw_moments(8).unwrap()).unwrap();
        assert!(pmf.char_jet(8).unwrap().max_diff(&mom.char_jet(8).unwrap()) < 1e-13);
    }

    #[test]
    fn doubling_ulam_is_dyadic() {
        let m = ulam_model(&doubling_cos_spec(32)).unwrap();
        for j in 0..32 {
            let nz: Vec<(usize, f64)> = (0..32).filter(|&k| m.p()[(j, k)] > 0.0).map(|k| (k, m.p()[(j, k)])).collect();
            assert_eq!(nz.len(), 2);
            assert!(nz.iter().all(|&(_, v)| (v - 0.5).abs() < 1e-15));
            assert_eq!(nz[0].0, (2 * j) % 32);
        }
        assert!(matches!(ulam_model(&doubling_cos_spec(8)), Err(Error::TooFewCells(8))));
        let bad = UlamSpec {
            map: MapKind::FullBranchLinear { breakpoints: vec![0.0, 1.0] },
            ..doubling_cos_spec(32)
        };
        assert!(ulam_model(&bad).is_err());
    }

    #[test]
    fn uneven_branches_are_stochastic() {
        let spec = UlamSpec {
            map: MapKind::FullBranchLinear { breakpoints: vec![0.0, 0.3, 1.0] },
            observable: Observable::Poly { coeffs: vec![0.0, 1.0] },
            cells: 50,
            density: None,
        };
        let m = ulam_model(&spec).unwrap();
        for j in 0..50 {
            assert!((m.p().row(j).sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diophantine_basics() {
        let flat = DMatrix::from_element(2, 2, 0.3);
        let scan = diophantine_scan(&flat, &[1.5, 2.5]).unwrap();
        assert!(scan.table.iter().all(|&(_, d)| d == 0.0));
        let bin = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let scan = diophantine_scan(&bin, &[0.5]).unwrap();
        assert!((scan.table[0].1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn golden_chain_is_badly_approximable() {
        let grid: Vec<f64> = (1..=10_000).map(|s| s as f64).collect();
        let scan = diophantine_scan(diophantine_chain().h(), &grid).unwrap();
        assert!((scan.beta - 1.0).abs() < 0.05, "beta = {}", scan.beta);
        assert!((scan.k - 1.0 / 5f64.sqrt()).abs() < 0.1, "K = {}", scan.k);
    }
}
