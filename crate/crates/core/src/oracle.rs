//! Brute-force ground truth: exact laws of `S_N`, exact moments, Monte Carlo
//! samples and Kolmogorov distances.
//!
//! Nothing here uses the eigen-perturbation machinery.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::{factorial, Jet};
use crate::models::{MapKind, MarkovModel, UlamSpec};

/// Cell budget of the lattice dynamic program.
pub const DP_CELL_LIMIT: usize = 10_000_000;
/// Distinct-value budget of the enumeration oracle.
pub const ENUM_VALUE_LIMIT: usize = 1_000_000;
/// Values closer than this are merged by the enumeration oracle.
pub const MERGE_TOL: f64 = 1e-9;
/// Trials per Monte Carlo chunk; each chunk owns one PRNG stream.
pub const MC_CHUNK: usize = 1 << 16;
/// Identifier of the Monte Carlo generator, recorded in reports.
pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha), stream = chunk index";

/// Standard normal distribution function.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// Standard normal density.
pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// `N(0, sigma^2)` distribution function.
pub fn normal_cdf(x: f64, sigma: f64) -> f64 {
    std_normal_cdf(x / sigma)
}

/// `N(0, sigma^2)` density.
pub fn normal_pdf(x: f64, sigma: f64) -> f64 {
    std_normal_pdf(x / sigma) / sigma
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistKind {
    Lattice,
    Enumerated,
    Empirical,
}

/// A finitely supported law with cumulative sums for CDF queries.
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    pub kind: DistKind,
    pub support: Vec<f64>,
    pub pmf: Vec<f64>,
    pub n: usize,
    /// Free-form provenance, e.g. the PRNG identifier.
    pub meta: Option<String>,
    cum: Vec<f64>,
}

impl ExactDistribution {
    /// # Panics
    /// Panics if the lengths differ or the support is not strictly increasing.
    pub fn new(kind: DistKind, support: Vec<f64>, pmf: Vec<f64>, n: usize) -> Self {
        assert_eq!(support.len(), pmf.len());
        assert!(support.windows(2).all(|w| w[0] < w[1]), "support must be strictly increasing");
        let mut acc = KahanSum::default();
        let cum = pmf
            .iter()
            .map(|&p| {
                acc.add(p);
                acc.value()
            })
            .collect();
        ExactDistribution { kind, support, pmf, n, meta: None, cum }
    }

    pub fn total_mass(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    /// `P(S <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let i = self.support.partition_point(|&v| v <= x);
        if i == 0 {
            0.0
        } else {
            self.cum[i - 1]
        }
    }

    /// `P(S < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        let i = self.support.partition_point(|&v| v < x);
        if i == 0 {
            0.0
        } else {
            self.cum[i - 1]
        }
    }

    /// `P(S = x)` for an exact support point, else 0.
    pub fn prob_at(&self, x: f64) -> f64 {
        match self.support.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => self.pmf[i],
            Err(_) => 0.0,
        }
    }

    /// Law of `(S - shift) / scale`.
    pub fn standardize(&self, shift: f64, scale: f64) -> ExactDistribution {
        let mut d = ExactDistribution::new(
            self.kind,
            self.support.iter().map(|v| (v - shift) / scale).collect(),
            self.pmf.clone(),
            self.n,
        );
        d.meta = self.meta.clone();
        d
    }

    /// `E g(S)` with compensated summation.
    pub fn expect(&self, g: impl Fn(f64) -> f64) -> f64 {
        let mut acc = KahanSum::default();
        for (v, p) in self.support.iter().zip(&self.pmf) {
            if *p != 0.0 {
                acc.add(p * g(*v));
            }
        }
        acc.value()
    }

    /// `E (S - c)^k`.
    pub fn central_moment(&self, c: f64, k: i32) -> f64 {
        self.expect(|v| (v - c).powi(k))
    }

    /// RFC 4180 CSV with header `value,pmf,cdf`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("value,pmf,cdf\n");
        for i in 0..self.support.len() {
            s.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", self.support[i], self.pmf[i], self.cum[i]));
        }
        s
    }
}

/// Exact pmf of `S_N` for a lattice chain, by dynamic programming over
/// `(state, integer sum)`.
pub fn dp_pmf(model: &MarkovModel, n: usize) -> Result<ExactDistribution> {
    let span = model.lattice().ok_or(Error::NotLattice)?;
    let d = model.dim();
    let steps: Vec<(usize, usize, f64, i64)> = model
        .transitions()
        .iter()
        .map(|t| (t.from, t.to, t.prob, (t.value / span).round() as i64))
        .collect();
    let kmin = steps.iter().map(|s| s.3).min().unwrap_or(0);
    let kmax = steps.iter().map(|s| s.3).max().unwrap_or(0);
    let width = (kmax - kmin) as usize * n + 1;
    let cells = width.saturating_mul(d);
    if cells > DP_CELL_LIMIT {
        return Err(Error::TableTooLarge { cells, limit: DP_CELL_LIMIT, n });
    }
    // index at step m is sum - m * kmin
    let mut cur = vec![vec![0.0; width]; d];
    for (j, &m) in model.mu0().iter().enumerate() {
        cur[j][0] = m;
    }
    let mut next = vec![vec![0.0; width]; d];
    let mut comp = vec![vec![0.0; width]; d];
    for m in 0..n {
        let live = (kmax - kmin) as usize * m + 1;
        for row in next.iter_mut().chain(comp.iter_mut()) {
            row[..live + (kmax - kmin) as usize].iter_mut().for_each(|x| *x = 0.0);
        }
        for &(j, k, p, h) in &steps {
            let off = (h - kmin) as usize;
            let src = &cur[j];
            let (dst, cmp) = (&mut next[k], &mut comp[k]);
            for i in 0..live {
                let x = src[i] * p;
                if x == 0.0 {
                    continue;
                }
                let s = dst[i + off];
                let t = s + x;
                if s.abs() >= x.abs() {
                    cmp[i + off] += (s - t) + x;
                } else {
                    cmp[i + off] += (x - t) + s;
                }
                dst[i + off] = t;
            }
        }
        for k in 0..d {
            for i in 0..live + (kmax - kmin) as usize {
                next[k][i] += comp[k][i];
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let mut pmf = vec![0.0; width];
    for i in 0..width {
        let mut acc = KahanSum::default();
        for row in &cur {
            acc.add(row[i]);
        }
        pmf[i] = acc.value();
    }
    let base = n as i64 * kmin;
    let support = (0..width).map(|i| (base + i as i64) as f64 * span).collect();
    Ok(ExactDistribution::new(DistKind::Lattice, support, pmf, n))
}

/// Estimated number of distinct values of `S_N`.
pub fn enum_value_estimate(model: &MarkovModel, n: usize) -> f64 {
    let mut vals: Vec<f64> = model.transitions().iter().map(|t| t.value).collect();
    vals.sort_by(f64::total_cmp);
    vals.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOL);
    let d = model.dim() as i32;
    let base = (n + 1) as f64;
    base.powi(vals.len() as i32 - 1).min(base.powi(d * d - 1))
}

fn merge_sorted(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (x, p) in v {
        match out.last_mut() {
            Some(last) if (x - last.0).abs() <= MERGE_TOL => last.1 += p,
            _ => out.push((x, p)),
        }
    }
    out
}

/// Exact law of `S_N` by dynamic programming over `(state, value)` with
/// values merged within [`MERGE_TOL`].
pub fn enum_distribution(model: &MarkovModel, n: usize) -> Result<ExactDistribution> {
    let est = enum_value_estimate(model, n);
    if est > ENUM_VALUE_LIMIT as f64 {
        return Err(Error::TooManyValues { estimate: est, limit: ENUM_VALUE_LIMIT, n });
    }
    let d = model.dim();
    let mut cur: Vec<Vec<(f64, f64)>> = (0..d)
        .map(|j| if model.mu0()[j] > 0.0 { vec![(0.0, model.mu0()[j])] } else { Vec::new() })
        .collect();
    for _ in 0..n {
        let mut next: Vec<Vec<(f64, f64)>> = vec![Vec::new(); d];
        for tr in model.transitions() {
            for &(v, p) in &cur[tr.from] {
                next[tr.to].push((v + tr.value, p * tr.prob));
            }
        }
        cur = next.into_iter().map(merge_sorted).collect();
        let count: usize = cur.iter().map(|c| c.len()).sum();
        if count > ENUM_VALUE_LIMIT * d {
            return Err(Error::TooManyValues { estimate: count as f64, limit: ENUM_VALUE_LIMIT, n });
        }
    }
    let all = merge_sorted(cur.into_iter().flatten().collect());
    if all.len() > ENUM_VALUE_LIMIT {
        return Err(Error::TooManyValues { estimate: all.len() as f64, limit: ENUM_VALUE_LIMIT, n });
    }
    let (support, pmf) = all.into_iter().unzip();
    Ok(ExactDistribution::new(DistKind::Enumerated, support, pmf, n))
}

/// Stationary law by iterating `mu -> mu P` until it stops moving.
pub fn stationary_by_iteration(model: &MarkovModel) -> Vec<f64> {
    let d = model.dim();
    let mut mu = vec![1.0 / d as f64; d];
    let mut next = vec![0.0; d];
    for it in 0..100_000 {
        next.iter_mut().for_each(|x| *x = 0.0);
        for tr in model.transitions() {
            next[tr.to] += mu[tr.from] * tr.prob;
        }
        // Cesaro-average each step to suppress periodic oscillation.
        let diff: f64 = mu.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        for i in 0..d {
            mu[i] = 0.5 * (mu[i] + next[i]);
        }
        if diff < 1e-16 && it > 10 {
            break;
        }
    }
    mu
}

/// Stationary mean increment `sum pi_j p_jk h_jk`.
pub fn stationary_drift(model: &MarkovModel) -> f64 {
    let pi = stationary_by_iteration(model);
    model.transitions().iter().map(|t| pi[t.from] * t.prob * t.value).sum()
}

/// `E[(S_N - N c)^k]` for `k = 0..=kmax`, read off the jet of
/// `mu0^T (e^{-itc} L_t)^N 1` propagated as a row vector of jets.
pub fn exact_moments(model: &MarkovModel, n: usize, kmax: usize, center: f64) -> Vec<f64> {
    let d = model.dim();
    let entries: Vec<(usize, usize, Jet)> = model
        .transitions()
        .iter()
        .map(|t| (t.from, t.to, Jet::exp_i(t.value - center, kmax).scale(Complex64::new(t.prob, 0.0))))
        .collect();
    let mut w: Vec<Jet> = model.mu0().iter().map(|&m| Jet::constant(Complex64::new(m, 0.0), kmax)).collect();
    for _ in 0..n {
        let mut next = vec![Jet::zero(kmax); d];
        for (j, k, e) in &entries {
            next[*k] = next[*k].add(&w[*j].mul(e).expect("same order")).expect("same order");
        }
        w = next;
    }
    let total = w.iter().fold(Jet::zero(kmax), |acc, j| acc.add(j).expect("same order"));
    let mut ipow = Complex64::new(1.0, 0.0);
    (0..=kmax)
        .map(|k| {
            let v = total.coeff(k) * factorial(k) / ipow;
            ipow *= Complex64::i();
            v.re
        })
        .collect()
}

fn empirical(mut samples: Vec<f64>, n: usize) -> ExactDistribution {
    samples.sort_by(f64::total_cmp);
    let trials = samples.len() as f64;
    let mut support: Vec<f64> = Vec::new();
    let mut pmf: Vec<f64> = Vec::new();
    for v in samples {
        if support.last() == Some(&v) {
            *pmf.last_mut().unwrap() += 1.0 / trials;
        } else {
            support.push(v);
            pmf.push(1.0 / trials);
        }
    }
    let mut d = ExactDistribution::new(DistKind::Empirical, support, pmf, n);
    d.meta = Some(RNG_ALGORITHM.into());
    d
}

fn chunked<F>(trials: usize, seed: u64, f: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha20Rng) -> f64 + Sync,
{
    let chunks = trials.div_ceil(MC_CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = MC_CHUNK.min(trials - c * MC_CHUNK);
            (0..len).map(|_| f(&mut rng)).collect::<Vec<_>>()
        })
        .collect()
}

fn sample_index(cum: &[f64], u: f64) -> usize {
    cum.partition_point(|&c| c <= u).min(cum.len() - 1)
}

/// Empirical law of `S_N` over `trials` simulated chain paths.
pub fn mc_sample(model: &MarkovModel, n: usize, trials: usize, seed: u64) -> ExactDistribution {
    let d = model.dim();
    let mut rows: Vec<(Vec<f64>, Vec<usize>, Vec<f64>)> = vec![(Vec::new(), Vec::new(), Vec::new()); d];
    for tr in model.transitions() {
        let r = &mut rows[tr.from];
        let c = r.0.last().copied().unwrap_or(0.0) + tr.prob;
        r.0.push(c);
        r.1.push(tr.to);
        r.2.push(tr.value);
    }
    let mut init = Vec::with_capacity(d);
    let mut acc = 0.0;
    for &m in model.mu0().iter() {
        acc += m;
        init.push(acc);
    }
    let samples = chunked(trials, seed, |rng| {
        let mut x = sample_index(&init, rng.random::<f64>() * acc);
        let mut s = 0.0;
        for _ in 0..n {
            let (cum, to, val) = &rows[x];
            let i = sample_index(cum, rng.random::<f64>() * cum[cum.len() - 1]);
            s += val[i];
            x = to[i];
        }
        s
    });
    empirical(samples, n)
}

/// Empirical law of `sum_{m<N} g(f^m x)` for `x` drawn from the spec's
/// initial density. The doubling map is iterated exactly on 64-bit binary
/// expansions, shifting in a fresh random bit each step.
pub fn mc_sample_map(spec: &UlamSpec, n: usize, trials: usize, seed: u64) -> ExactDistribution {
    let cells = spec.cells.max(1);
    let mut init = Vec::with_capacity(cells);
    let mut acc = 0.0;
    for j in 0..cells {
        let w = match &spec.density {
            Some(dens) => dens.eval((j as f64 + 0.5) / cells as f64).max(0.0),
            None => 1.0,
        };
        acc += w;
        init.push(acc);
    }
    let draw_x = |rng: &mut ChaCha20Rng| -> f64 {
        if spec.density.is_none() {
            rng.random::<f64>()
        } else {
            let j = sample_index(&init, rng.random::<f64>() * acc);
            (j as f64 + rng.random::<f64>()) / cells as f64
        }
    };
    let g = &spec.observable;
    let samples = match &spec.map {
        MapKind::Doubling => chunked(trials, seed, |rng| {
            let x0 = draw_x(rng);
            let mut state: u64 = if spec.density.is_none() {
                rng.random::<u64>()
            } else {
                (x0 * 2f64.powi(64)) as u64
            };
            let mut bits = rng.random::<u64>();
            let mut left = 64;
            let mut s = 0.0;
            for _ in 0..n {
                s += g.eval(state as f64 * 2f64.powi(-64));
                if left == 0 {
                    bits = rng.random::<u64>();
                    left = 64;
                }
                state = (state << 1) | (bits & 1);
                bits >>= 1;
                left -= 1;
            }
            s
        }),
        kind => chunked(trials, seed, |rng| {
            let mut x = draw_x(rng);
            let mut s = 0.0;
            for _ in 0..n {
                s += g.eval(x);
                x = kind.apply(x);
            }
            s
        }),
    };
    empirical(samples, n)
}

/// Distribution-function access for distance computations.
pub trait Cdf {
    /// `F(x) = P(X <= x)`.
    fn cdf(&self, x: f64) -> f64;
    /// `P(X < x)`; equal to `cdf` for continuous laws.
    fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x)
    }
    /// Jump locations.
    fn atoms(&self) -> &[f64] {
        &[]
    }
}

impl Cdf for ExactDistribution {
    fn cdf(&self, x: f64) -> f64 {
        ExactDistribution::cdf(self, x)
    }
    fn cdf_left(&self, x: f64) -> f64 {
        ExactDistribution::cdf_left(self, x)
    }
    fn atoms(&self) -> &[f64] {
        &self.support
    }
}

/// `N(mean, sd^2)`.
#[derive(Clone, Copy, Debug)]
pub struct Normal {
    pub mean: f64,
    pub sd: f64,
}

impl Cdf for Normal {
    fn cdf(&self, x: f64) -> f64 {
        std_normal_cdf((x - self.mean) / self.sd)
    }
}

/// Any closure as a continuous distribution function.
pub struct FnCdf<F: Fn(f64) -> f64>(pub F);

impl<F: Fn(f64) -> f64> Cdf for FnCdf<F> {
    fn cdf(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

/// Uniform probe grid on `[-half_width, half_width]`.
pub fn probe_grid(half_width: f64, points: usize) -> Vec<f64> {
    let step = 2.0 * half_width / (points - 1) as f64;
    (0..points).map(|i| -half_width + i as f64 * step).collect()
}

/// `sup |F_a - F_b|` over the grid and over both one-sided limits at every
/// atom of either law.
pub fn kolmogorov_distance(a: &dyn Cdf, b: &dyn Cdf, grid: &[f64]) -> f64 {
    let mut best: f64 = 0.0;
    for &x in grid {
        best = best.max((a.cdf(x) - b.cdf(x)).abs());
    }
    for &x in a.atoms().iter().chain(b.atoms()) {
        best = best.max((a.cdf(x) - b.cdf(x)).abs());
        best = best.max((a.cdf_left(x) - b.cdf_left(x)).abs());
    }
    best
}

/// Total-variation distance between two finitely supported laws.
pub fn total_variation(a: &ExactDistribution, b: &ExactDistribution) -> f64 {
    let mut i = 0;
    let mut j = 0;
    let mut acc = 0.0;
    while i < a.support.len() || j < b.support.len() {
        let va = a.support.get(i).copied().unwrap_or(f64::INFINITY);
        let vb = b.support.get(j).copied().unwrap_or(f64::INFINITY);
        if (va - vb).abs() <= MERGE_TOL {
            acc += (a.pmf[i] - b.pmf[j]).abs();
            i += 1;
            j += 1;
        } else if va < vb {
            acc += a.pmf[i];
            i += 1;
        } else {
            acc += b.pmf[j];
            j += 1;
        }
    }
    0.5 * acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{diophantine_chain, doubling_cos_spec, lattice_chain3, running_chain, running_chain_from_zero, IidModel};
    use crate::jets::binomial;

    #[test]
    fn dp_one_step() {
        let m = running_chain_from_zero();
        let d = dp_pmf(&m, 1).unwrap();
        assert!((d.prob_at(1.0) - 0.7).abs() < 1e-16 && (d.prob_at(0.0) - 0.3).abs() < 1e-16);
    }

    #[test]
    fn dp_binomial() {
        let m = IidModel::pmf(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap().to_markov().unwrap();
        let d = dp_pmf(&m, 10).unwrap();
        for k in 0..=10 {
            assert!((d.prob_at(k as f64) - binomial(10, k) / 1024.0).abs() < 1e-16);
        }
    }

    #[test]
    fn dp_matches_path_enumeration() {
        let m = running_chain_from_zero();
        let n = 10;
        let mut oracle = vec![0.0; n + 1];
        // paths x_0 = 0, x_1..x_n free
        for mask in 0u32..(1 << n) {
            let mut x = 0usize;
            let mut p = 1.0;
            let mut s = 0usize;
            for b in 0..n {
                let y = ((mask >> b) & 1) as usize;
                p *= m.p()[(x, y)];
                if x == 0 && y == 0 {
                    s += 1;
                }
                x = y;
            }
            oracle[s] += p;
        }
        let d = dp_pmf(&m, n).unwrap();
        for (k, &o) in oracle.iter().enumerate() {
            assert!((d.prob_at(k as f64) - o).abs() < 1e-14);
        }
    }

    #[test]
    fn dp_mass_at_large_n() {
        let d = dp_pmf(&lattice_chain3(), 10_000).unwrap();
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
        assert!(matches!(dp_pmf(&diophantine_chain(), 5), Err(Error::NotLattice)));
    }

    #[test]
    fn enum_agrees_with_dp() {
        let m = lattice_chain3();
        let a = dp_pmf(&m, 12).unwrap();
        let b = enum_distribution(&m, 12).unwrap();
        for (v, p) in b.support.iter().zip(&b.pmf) {
            assert!((a.prob_at(*v) - p).abs() < 1e-15);
        }
        assert!((b.cdf(1e9) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn enum_value_count_bound() {
        let n = 12;
        let b = enum_distribution(&diophantine_chain(), n).unwrap();
        assert!(b.support.len() <= (n + 1usize).pow(3));
        assert!(b.support.len() > n + 1);
    }

    #[test]
    fn exact_moments_iid_variance() {
        let law = IidModel::pmf(vec![(-1.0, 0.2), (0.0, 0.5), (3.0, 0.3)]).unwrap();
        let m = law.to_markov().unwrap();
        let raw = law.raw_moments(2).unwrap();
        let var = raw[1] - raw[0] * raw[0];
        let mom = exact_moments(&m, 25, 4, raw[0]);
        assert_eq!(mom[0], 1.0);
        assert!((mom[2] - 25.0 * var).abs() < 1e-12 * 25.0 * var);
    }

    #[test]
    fn exact_moments_match_dp() {
        let m = lattice_chain3();
        let c = 0.3;
        let mom = exact_moments(&m, 30, 6, c);
        let d = dp_pmf(&m, 30).unwrap();
        for k in 0..=6 {
            let o = d.central_moment(30.0 * c, k as i32);
            assert!((mom[k] - o).abs() <= 1e-10 * o.abs().max(1.0), "k={k}");
        }
    }

    #[test]
    fn mc_determinism_and_band() {
        let m = running_chain();
        let a = mc_sample(&m, 50, 1, 7);
        let b = mc_sample(&m, 50, 1, 7);
        assert_eq!(a.support, b.support);
        let n = 40;
        let trials = 20_000;
        let e = mc_sample(&m, n, trials, 11);
        let mean = e.expect(|v| v) / n as f64;
        let sigma2 = crate::expansion::ExpansionSet::compute(&m, 0).unwrap().sigma2();
        assert!((mean - 0.4).abs() < 4.0 * (sigma2 / (n * trials) as f64).sqrt());
    }

    #[test]
    fn mc_doubling_mean() {
        let spec = doubling_cos_spec(64);
        let e = mc_sample_map(&spec, 64, 20_000, 3);
        let mean = e.expect(|v| v) / 64.0;
        assert!(mean.abs() < 4.0 * (0.5f64 / (64.0 * 20_000.0)).sqrt());
    }

    #[test]
    fn mc_converges_in_total_variation() {
        let m = running_chain();
        let exact = dp_pmf(&m, 10).unwrap();
        let tv_small = total_variation(&mc_sample(&m, 10, 10_000, 1), &exact);
        let tv_large = total_variation(&mc_sample(&m, 10, 1_000_000, 1), &exact);
        let ratio = tv_small / tv_large;
        assert!(ratio > 5.0 && ratio < 20.0, "ratio {ratio}");
    }

    #[test]
    fn kolmogorov_cases() {
        let grid = probe_grid(12.0, 24_001);
        let n0 = Normal { mean: 0.0, sd: 1.0 };
        assert_eq!(kolmogorov_distance(&n0, &n0, &grid), 0.0);
        let a = ExactDistribution::new(DistKind::Enumerated, vec![0.0], vec![1.0], 1);
        let b = ExactDistribution::new(DistKind::Enumerated, vec![1.0], vec![1.0], 1);
        assert_eq!(kolmogorov_distance(&a, &b, &grid), 1.0);
        let shifted = Normal { mean: 0.1, sd: 1.0 };
        let exact = std_normal_cdf(0.05) - std_normal_cdf(-0.05);
        assert!((kolmogorov_distance(&n0, &shifted, &grid) - exact).abs() < 1e-6);
    }

    #[test]
    fn normal_cdf_accuracy() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((std_normal_cdf(-8.0) - 6.220_960_574_271_785e-16).abs() < 1e-28);
    }
}
