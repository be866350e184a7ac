//! Twisted operator family, perturbation of the leading eigenpair, and
//! numeric spectral diagnostics.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::models::MarkovModel;

const CZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Smallest admissible spectral gap.
pub const GAP_TOL: f64 = 1e-8;
/// Power-iteration budget for spectral-radius estimates.
pub const POWER_ITERATIONS: usize = 200;
pub const POWER_TOL: f64 = 1e-10;

/// Taylor data of `L_t`, stored as the nonzero entries `(j, k, jet)`.
#[derive(Clone, Debug)]
pub struct OperatorFamilyJet {
    dim: usize,
    order: usize,
    entries: Vec<(usize, usize, Jet)>,
}

impl OperatorFamilyJet {
    /// # Panics
    /// Panics if the entry jets do not share one order or an index is out of range.
    pub fn from_entries(dim: usize, entries: Vec<(usize, usize, Jet)>) -> Self {
        let order = entries.first().map(|e| e.2.order()).unwrap_or(0);
        for (j, k, e) in &entries {
            assert!(*j < dim && *k < dim, "entry index out of range");
            assert_eq!(e.order(), order, "entry jets must share one order");
        }
        OperatorFamilyJet { dim, order, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entries(&self) -> &[(usize, usize, Jet)] {
        &self.entries
    }

    /// Entry `(j, k)`, zero jet when absent.
    pub fn entry(&self, j: usize, k: usize) -> Jet {
        self.entries
            .iter()
            .filter(|e| e.0 == j && e.1 == k)
            .fold(Jet::zero(self.order), |acc, e| acc.add(&e.2).expect("same order"))
    }

    /// Real part of the constant terms, i.e. `L_0`.
    pub fn at_zero(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (j, k, e) in &self.entries {
            m[(*j, *k)] += e.coeff(0).re;
        }
        m
    }

    /// `L_m f` for the `t^m` coefficient matrix.
    fn apply_coeff(&self, m: usize, f: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = CZERO);
        for (j, k, e) in &self.entries {
            out[*j] += e.coeff(m) * f[*k];
        }
    }

    /// `w L_m` for a row vector `w`.
    fn apply_coeff_left(&self, m: usize, w: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = CZERO);
        for (j, k, e) in &self.entries {
            out[*k] += w[*j] * e.coeff(m);
        }
    }
}

/// Jet of `e^{i t h_jk} p_jk` for every allowed transition.
pub fn build_operator_family(model: &MarkovModel, order: usize) -> Result<OperatorFamilyJet> {
    let entries = model
        .transitions()
        .iter()
        .map(|tr| (tr.from, tr.to, Jet::exp_i(tr.value, order).scale(Complex64::new(tr.prob, 0.0))))
        .collect();
    Ok(OperatorFamilyJet { dim: model.dim(), order, entries })
}

/// Leading eigendata of `L_0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerronBase {
    pub mu0: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    pub gap: f64,
}

/// Stationary law and gap of a row-stochastic matrix.
pub fn perron_base(p: &DMatrix<f64>) -> Result<PerronBase> {
    let pi = stationary(p)?;
    let gap = 1.0 - deflated_radius(p, &pi);
    if gap < GAP_TOL {
        return Err(Error::GapBelowTolerance { gap });
    }
    Ok(PerronBase { mu0: 1.0, right: vec![1.0; p.nrows()], left: pi, gap })
}

/// Solves `pi (P - I) = 0`, `sum pi = 1`.
pub fn stationary(p: &DMatrix<f64>) -> Result<Vec<f64>> {
    let d = p.nrows();
    let mut a = p.transpose() - DMatrix::identity(d, d);
    for k in 0..d {
        a[(d - 1, k)] = 1.0;
    }
    let mut b = DVector::zeros(d);
    b[d - 1] = 1.0;
    let lu = a.clone().lu();
    let x = lu.solve(&b).ok_or(Error::SingularStationarySolve)?;
    let resid = (&a * &x - &b).amax();
    if !x.iter().all(|v| v.is_finite()) || resid > 1e-8 {
        return Err(Error::SingularStationarySolve);
    }
    Ok(x.iter().map(|&v| if v < 0.0 && v > -1e-12 { 0.0 } else { v }).collect())
}

/// Start vector `(1, 1/2, 1/3, ...)`.
fn start_vector(d: usize) -> Vec<Complex64> {
    (0..d).map(|i| Complex64::new(1.0 / (i + 1) as f64, 0.0)).collect()
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Growth rate of `x -> A x` by power iteration: the geometric mean of the
/// per-step norm ratios over the second half of the run.
fn power_growth(d: usize, mut step: impl FnMut(&[Complex64], &mut [Complex64])) -> f64 {
    let mut x = start_vector(d);
    let n0 = norm2(&x);
    x.iter_mut().for_each(|c| *c /= n0);
    let mut y = vec![CZERO; d];
    let mut logs = Vec::with_capacity(POWER_ITERATIONS);
    let mut prev_est = f64::NAN;
    for it in 0..POWER_ITERATIONS {
        step(&x, &mut y);
        let n = norm2(&y);
        if !(n > 1e-300) {
            return 0.0;
        }
        logs.push(n.ln());
        y.iter_mut().for_each(|c| *c /= n);
        std::mem::swap(&mut x, &mut y);
        if it >= 20 && it % 10 == 0 {
            let tail = &logs[logs.len() / 2..];
            let est = (tail.iter().sum::<f64>() / tail.len() as f64).exp();
            if (est - prev_est).abs() < POWER_TOL {
                return est;
            }
            prev_est = est;
        }
    }
    let tail = &logs[logs.len() / 2..];
    (tail.iter().sum::<f64>() / tail.len() as f64).exp()
}

fn deflated_radius(p: &DMatrix<f64>, pi: &[f64]) -> f64 {
    let d = p.nrows();
    power_growth(d, |x, y| {
        let s: Complex64 = pi.iter().zip(x).map(|(a, b)| b * *a).sum();
        for i in 0..d {
            let mut acc = CZERO;
            for k in 0..d {
                let pik = p[(i, k)];
                if pik != 0.0 {
                    acc += x[k] * pik;
                }
            }
            y[i] = acc - s;
        }
    })
}

/// Normalization used for the right eigenvector jet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gauge {
    /// `pi . v_m = 0` for `m >= 1`.
    Stationary,
    /// `v_m[0] = 0` for `m >= 1`.
    FirstComponent,
}

/// Jets of the leading eigenvalue, eigenvectors and `Z(t)`.
#[derive(Clone, Debug)]
pub struct SpectralJets {
    pub mu: Jet,
    pub z: Jet,
    pub right_jet: Vec<Jet>,
    pub left_jet: Vec<Jet>,
}

/// Bordered LU solver for a real `(d+1) x (d+1)` system with complex data.
struct Bordered {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    d: usize,
}

impl Bordered {
    fn new(core: DMatrix<f64>, col: &[f64], row: &[f64]) -> Self {
        let d = core.nrows();
        let mut a = DMatrix::zeros(d + 1, d + 1);
        a.view_mut((0, 0), (d, d)).copy_from(&core);
        for i in 0..d {
            a[(i, d)] = col[i];
            a[(d, i)] = row[i];
        }
        Bordered { lu: a.lu(), d }
    }

    fn solve(&self, rhs: &[Complex64], border: Complex64) -> Result<(Vec<Complex64>, Complex64)> {
        let d = self.d;
        let mut re = DVector::from_iterator(d + 1, rhs.iter().map(|c| c.re).chain([border.re]));
        let mut im = DVector::from_iterator(d + 1, rhs.iter().map(|c| c.im).chain([border.im]));
        if !self.lu.solve_mut(&mut re) || !self.lu.solve_mut(&mut im) {
            return Err(Error::BorderedSolveSingular);
        }
        if !re.iter().chain(im.iter()).all(|v| v.is_finite()) {
            return Err(Error::BorderedSolveSingular);
        }
        let x = (0..d).map(|i| Complex64::new(re[i], im[i])).collect();
        Ok((x, Complex64::new(re[d], im[d])))
    }
}

/// Order-by-order perturbation with the stationary gauge.
pub fn eigen_perturbation(fam: &OperatorFamilyJet, base: &PerronBase, initial: &[f64]) -> Result<SpectralJets> {
    eigen_perturbation_gauge(fam, base, initial, Gauge::Stationary)
}

/// Order-by-order perturbation of `L_t v_t = mu(t) v_t`, `l_t L_t = mu(t) l_t`
/// with `v_0 = 1`, `l_0 = pi`, `l_t(v_t) = 1`, and
/// `Z(t) = (mu0 . v_t)(l_t . 1)`.
pub fn eigen_perturbation_gauge(
    fam: &OperatorFamilyJet,
    base: &PerronBase,
    initial: &[f64],
    gauge: Gauge,
) -> Result<SpectralJets> {
    let d = fam.dim();
    let s = fam.order();
    if base.gap < GAP_TOL {
        return Err(Error::GapBelowTolerance { gap: base.gap });
    }
    if initial.len() != d || base.left.len() != d {
        return Err(Error::InconsistentDimensions("initial law and operator dimension differ".into()));
    }
    let l0 = fam.at_zero();
    let shifted = &l0 - DMatrix::identity(d, d);
    let ones = vec![1.0; d];
    let minus_ones = vec![-1.0; d];
    let g: Vec<f64> = match gauge {
        Gauge::Stationary => base.left.clone(),
        Gauge::FirstComponent => (0..d).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect(),
    };
    let right_sys = Bordered::new(shifted.clone(), &minus_ones, &g);
    let left_sys = Bordered::new(shifted.transpose(), &base.left, &ones);

    let mut mu = vec![Complex64::new(1.0, 0.0)];
    let mut v: Vec<Vec<Complex64>> = vec![ones.iter().map(|&x| Complex64::new(x, 0.0)).collect()];
    let mut l: Vec<Vec<Complex64>> = vec![base.left.iter().map(|&x| Complex64::new(x, 0.0)).collect()];
    let mut tmp = vec![CZERO; d];
    for m in 1..=s {
        let mut rhs = vec![CZERO; d];
        for j in 1..m {
            for i in 0..d {
                rhs[i] += mu[j] * v[m - j][i];
            }
        }
        for j in 1..=m {
            fam.apply_coeff(j, &v[m - j], &mut tmp);
            for i in 0..d {
                rhs[i] -= tmp[i];
            }
        }
        let (vm, mum) = right_sys.solve(&rhs, CZERO)?;
        mu.push(mum);
        v.push(vm);

        let mut lrhs = vec![CZERO; d];
        for j in 1..=m {
            for i in 0..d {
                lrhs[i] += mu[j] * l[m - j][i];
            }
            fam.apply_coeff_left(j, &l[m - j], &mut tmp);
            for i in 0..d {
                lrhs[i] -= tmp[i];
            }
        }
        let mut norm = CZERO;
        for j in 0..m {
            norm -= dotc(&l[j], &v[m - j]);
        }
        let (lm, _) = left_sys.solve(&lrhs, norm)?;
        l.push(lm);
    }

    let to_jets = |vs: &[Vec<Complex64>]| -> Vec<Jet> {
        (0..d).map(|i| Jet::new(vs.iter().map(|vm| vm[i]).collect())).collect()
    };
    let right_jet = to_jets(&v);
    let left_jet = to_jets(&l);
    let mu_side = Jet::new(v.iter().map(|vm| vm.iter().zip(initial).map(|(a, b)| a * *b).sum()).collect());
    let l_side = Jet::new(l.iter().map(|lm| lm.iter().sum()).collect());
    let z = mu_side.mul(&l_side)?;
    Ok(SpectralJets { mu: Jet::new(mu), z, right_jet, left_jet })
}

fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Perron base and spectral jets of a model in one call.
pub fn spectral_jets(model: &dyn crate::models::TwistedModel, order: usize) -> Result<SpectralJets> {
    let fam = model.operator_family(order)?;
    let base = perron_base(&model.transition())?;
    let init: Vec<f64> = model.initial().iter().copied().collect();
    eigen_perturbation(&fam, &base, &init)
}

/// Largest coefficientwise residual of `L_t v_t - mu(t) v_t`, per order.
pub fn eigen_residuals(fam: &OperatorFamilyJet, jets: &SpectralJets) -> Vec<f64> {
    let d = fam.dim();
    let s = fam.order();
    let v: Vec<Vec<Complex64>> = (0..=s).map(|m| jets.right_jet.iter().map(|j| j.coeff(m)).collect()).collect();
    let mut tmp = vec![CZERO; d];
    (0..=s)
        .map(|m| {
            let mut r = vec![CZERO; d];
            for j in 0..=m {
                fam.apply_coeff(j, &v[m - j], &mut tmp);
                for i in 0..d {
                    r[i] += tmp[i] - jets.mu.coeff(j) * v[m - j][i];
                }
            }
            norm2(&r)
        })
        .collect()
}

/// `E e^{i t S_N} = mu0^T L_t^N 1` by repeated matrix-vector products.
pub fn char_fn(model: &MarkovModel, t: f64, n: usize) -> Complex64 {
    let d = model.dim();
    let mut f = vec![Complex64::new(1.0, 0.0); d];
    let mut g = vec![CZERO; d];
    for _ in 0..n {
        model.apply_twisted(t, &f, &mut g);
        std::mem::swap(&mut f, &mut g);
    }
    model.mu0().iter().zip(&f).map(|(a, b)| b * *a).sum()
}

/// Spectral-radius estimate of `L_t`.
pub fn spectral_radius(model: &MarkovModel, t: f64) -> f64 {
    power_growth(model.dim(), |x, y| model.apply_twisted(t, x, y))
}

/// Leading eigenvalue of `L_t` by power iteration and a Rayleigh quotient.
pub fn leading_eigenvalue(model: &MarkovModel, t: f64) -> Complex64 {
    let d = model.dim();
    let mut x = start_vector(d);
    let mut y = vec![CZERO; d];
    for _ in 0..POWER_ITERATIONS {
        model.apply_twisted(t, &x, &mut y);
        let n = norm2(&y);
        if !(n > 1e-300) {
            return CZERO;
        }
        for i in 0..d {
            x[i] = y[i] / n;
        }
    }
    model.apply_twisted(t, &x, &mut y);
    let num: Complex64 = x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
    let den: f64 = x.iter().map(|a| a.norm_sqr()).sum();
    num / den
}

/// `||L_t^N||_inf`, computed row by row through left actions.
pub fn power_norm_inf(model: &MarkovModel, t: f64, n: usize) -> f64 {
    let d = model.dim();
    let mut best: f64 = 0.0;
    let mut w = vec![CZERO; d];
    let mut u = vec![CZERO; d];
    for row in 0..d {
        w.iter_mut().for_each(|c| *c = CZERO);
        w[row] = Complex64::new(1.0, 0.0);
        for _ in 0..n {
            model.apply_twisted_left(t, &w, &mut u);
            std::mem::swap(&mut w, &mut u);
        }
        best = best.max(w.iter().map(|c| c.norm()).sum());
    }
    best
}

/// One row of a norm-decay scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormDecayRow {
    pub t: f64,
    pub norm_inf: f64,
    pub radius: f64,
}

/// `(t, ||L_t^N||_inf, spectral radius)` over a grid.
pub fn norm_decay_scan(model: &MarkovModel, t_grid: &[f64], n: usize) -> Vec<NormDecayRow> {
    t_grid
        .par_iter()
        .map(|&t| NormDecayRow { t, norm_inf: power_norm_inf(model, t, n), radius: spectral_radius(model, t) })
        .collect()
}
