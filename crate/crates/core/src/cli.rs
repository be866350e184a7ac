//! Batch front door: a JSON config in, CSV and JSON reports out.
//!
//! A config holds a model document and a run block:
//!
//! ```json
//! {"model": {"type": "markov", "p": [[0.7, 0.3], [0.4, 0.6]], "h": [[1, 0], [0, 0]]},
//!  "run": {"command": "verify", "order": 1, "N_list": [64, 256, 1024], "forms": ["lattice"]}}
//! ```
//!
//! Reports are written to `run.out_dir` as `<command>-<model-hash>-<timestamp>.{csv,json}`,
//! where the hash is the first 12 hex digits of the SHA-256 of the canonical model
//! document. The timestamp only enters file names, so two runs with the same
//! config and seed produce byte-identical files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::evaluate::{
    exact_law, form_error, lclt_error, lclt_estimate, lclt_window, moddev_ratio, ConvergenceReport, Form, OracleKind,
    TestFunction,
};
use crate::expansion::{moment_coefficients, ExpansionSet, MAX_ORDER};
use crate::jets::Polynomial;
use crate::models::{
    diophantine_d, diophantine_scan, iid_model, markov_model, resonance_differences, ulam_model, IidModel,
    MarkovModel, TwistedModel, UlamSpec,
};
use crate::oracle::{exact_moments, mc_sample, mc_sample_map, ExactDistribution, RNG_ALGORITHM};
use crate::spectral::{norm_decay_scan, perron_base, spectral_jets, stationary, GAP_TOL};

/// Exit code for a failed verdict.
pub const EXIT_VERDICT: i32 = 4;

/// Model document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelDoc {
    /// Chain with `X_n = h[x_n, x_{n+1}]`; `mu0` defaults to the stationary law.
    Markov {
        p: Vec<Vec<f64>>,
        h: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu0: Option<Vec<f64>>,
    },
    /// Exactly one of `pmf` (pairs `[value, prob]`) and `moments` (`E X^1 ..`).
    Iid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pmf: Option<Vec<(f64, f64)>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        moments: Option<Vec<f64>>,
    },
    Ulam(UlamSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Expand,
    Verify,
    Diagnose,
    Moments,
    Lclt,
    Moddev,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Expand => "expand",
            Command::Verify => "verify",
            Command::Diagnose => "diagnose",
            Command::Moments => "moments",
            Command::Lclt => "lclt",
            Command::Moddev => "moddev",
        }
    }
}

/// Oracle used by `verify`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OracleChoice {
    Dp,
    Enum,
    #[default]
    Auto,
    /// Monte Carlo; needs `seed` and `trials`.
    Mc,
}

fn default_order() -> usize {
    1
}
fn default_kmax() -> usize {
    6
}
fn default_power() -> usize {
    2
}
fn default_c() -> f64 {
    0.5
}
fn default_eps() -> f64 {
    0.5
}
fn default_out_dir() -> String {
    ".".into()
}

/// The `run` block.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(rename = "N_list", default)]
    pub n_list: Vec<usize>,
    #[serde(rename = "N", default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub s_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub forms: Vec<Form>,
    #[serde(default)]
    pub oracle: OracleChoice,
    #[serde(default)]
    pub test_function: TestFunction,
    #[serde(default)]
    pub u: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_kmax")]
    pub kmax: usize,
    /// Power `n` in the `||L_t^n||` table of `diagnose`.
    #[serde(default = "default_power")]
    pub power: usize,
    #[serde(default)]
    pub timestamp: Option<String>,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelDoc,
    #[serde(default)]
    pub run: RunConfig,
}

/// `edgeworth [COMMAND] --config FILE [overrides]`.
#[derive(Debug, Parser)]
#[command(name = "edgeworth", version, about = "Edgeworth expansions for twisted transfer-operator models")]
pub struct Args {
    /// Subcommand; falls back to `run.command` in the config.
    #[arg(value_enum)]
    pub command: Option<Command>,
    #[arg(long, short)]
    pub config: PathBuf,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub u: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long)]
    pub power: Option<usize>,
    #[arg(long)]
    pub timestamp: Option<String>,
    #[arg(long)]
    pub out_dir: Option<String>,
}

impl Args {
    fn apply(&self, run: &mut RunConfig) {
        if self.command.is_some() {
            run.command = self.command;
        }
        macro_rules! over {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { run.$f = v; } )* };
        }
        macro_rules! over_opt {
            ($($f:ident),*) => { $( if self.$f.is_some() { run.$f = self.$f.clone(); } )* };
        }
        over!(order, u, c, eps, kmax, power, out_dir);
        over_opt!(seed, trials, n, timestamp);
    }
}

/// A model ready for the pipeline.
pub struct LoadedModel {
    pub twisted: Box<dyn TwistedModel>,
    pub markov: Option<MarkovModel>,
    pub ulam: Option<UlamSpec>,
    pub hash: String,
}

/// First 12 hex digits of the SHA-256 of the canonical model document.
pub fn model_hash(doc: &ModelDoc) -> String {
    let canon = to_json17(doc, false);
    hex::encode(Sha256::digest(canon.as_bytes()))[..12].to_string()
}

/// Builds and validates the model of a document.
pub fn load_model(doc: &ModelDoc) -> Result<LoadedModel> {
    let hash = model_hash(doc);
    match doc {
        ModelDoc::Markov { p, h, mu0 } => {
            let mu0 = match mu0 {
                Some(m) => m.clone(),
                None => {
                    let pm = markov_model(p, h, &uniform(p.len()))?;
                    stationary(pm.p())?
                }
            };
            let m = markov_model(p, h, &mu0)?;
            Ok(LoadedModel { twisted: Box::new(m.clone()), markov: Some(m), ulam: None, hash })
        }
        ModelDoc::Iid { pmf, moments } => {
            let spec = match (pmf, moments) {
                (Some(p), None) => IidModel::Pmf { pmf: p.clone() },
                (None, Some(m)) => IidModel::Moments { moments: m.clone() },
                _ => return Err(Error::InvalidConfig("iid model needs exactly one of pmf, moments".into())),
            };
            let law = iid_model(spec)?;
            let markov = law.as_markov();
            Ok(LoadedModel { twisted: Box::new(law), markov, ulam: None, hash })
        }
        ModelDoc::Ulam(spec) => {
            let m = ulam_model(spec)?;
            Ok(LoadedModel { twisted: Box::new(m.clone()), markov: Some(m), ulam: Some(spec.clone()), hash })
        }
    }
}

fn uniform(d: usize) -> Vec<f64> {
    vec![1.0 / d.max(1) as f64; d]
}

fn validate(run: &RunConfig) -> Result<Command> {
    let cmd = run.command.ok_or_else(|| Error::InvalidConfig("no command given".into()))?;
    if run.order > MAX_ORDER {
        return Err(Error::OrderOutOfRange(run.order));
    }
    if run.n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("N_list must be strictly increasing".into()));
    }
    if run.n_list.contains(&0) || run.n == Some(0) {
        return Err(Error::InvalidConfig("N must be positive".into()));
    }
    if cmd == Command::Verify && run.oracle == OracleChoice::Mc && (run.seed.is_none() || run.trials.is_none()) {
        return Err(Error::InvalidConfig("Monte Carlo oracle needs seed and trials".into()));
    }
    Ok(cmd)
}

/// Result of one command.
#[derive(Debug)]
pub struct Outcome {
    pub command: Command,
    pub files: Vec<PathBuf>,
    /// `false` only when a `verify` verdict failed.
    pub passed: bool,
    pub report: Value,
}

/// Runs a parsed config.
pub fn execute(config: &Config) -> Result<Outcome> {
    let run = &config.run;
    let cmd = validate(run)?;
    let model = load_model(&config.model)?;
    let (report, tables, passed) = match cmd {
        Command::Expand => cmd_expand(&model, run)?,
        Command::Verify => cmd_verify(&model, run)?,
        Command::Diagnose => cmd_diagnose(&model, run)?,
        Command::Moments => cmd_moments(&model, run)?,
        Command::Lclt => cmd_lclt(&model, run)?,
        Command::Moddev => cmd_moddev(&model, run)?,
    };
    let mut report = report;
    report["command"] = json!(cmd.name());
    report["model_hash"] = json!(model.hash);

    let dir = Path::new(&run.out_dir);
    std::fs::create_dir_all(dir).map_err(io)?;
    let stamp = run.timestamp.clone().unwrap_or_else(now_stamp);
    let base = format!("{}-{}-{}", cmd.name(), model.hash, stamp);
    let mut files = Vec::new();
    let json_path = dir.join(format!("{base}.json"));
    std::fs::write(&json_path, to_json17(&report, true) + "\n").map_err(io)?;
    files.push(json_path);
    for (suffix, csv) in tables {
        let name = if suffix.is_empty() { format!("{base}.csv") } else { format!("{base}.{suffix}.csv") };
        let path = dir.join(name);
        std::fs::write(&path, csv).map_err(io)?;
        files.push(path);
    }
    Ok(Outcome { command: cmd, files, passed, report })
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn now_stamp() -> String {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_else(|_| "0".into())
}

/// Formats with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// JSON formatter writing every float with 17 significant digits.
struct Digits17<F>(F);

impl<F: serde_json::ser::Formatter> serde_json::ser::Formatter for Digits17<F> {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, w: &mut W, x: f64) -> std::io::Result<()> {
        w.write_all(fmt17(x).as_bytes())
    }
    fn begin_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + std::io::Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes with 17 significant digits per float, pretty or compact.
pub fn to_json17<T: Serialize>(v: &T, pretty: bool) -> String {
    let mut buf = Vec::new();
    if pretty {
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(serde_json::ser::PrettyFormatter::new()));
        v.serialize(&mut ser).expect("serializable");
    } else {
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(serde_json::ser::CompactFormatter));
        v.serialize(&mut ser).expect("serializable");
    }
    String::from_utf8(buf).expect("utf8")
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn poly_json(p: &Polynomial) -> Value {
    Value::Array(p.coeffs().iter().map(|&c| num(c)).collect())
}

fn coeff_table(m: &BTreeMap<(usize, usize), f64>) -> Value {
    Value::Array(m.iter().map(|(&(k, j), &v)| json!({"k": k, "j": j, "value": num(v)})).collect())
}

fn require_markov<'a>(model: &'a LoadedModel, what: &str) -> Result<&'a MarkovModel> {
    model
        .markov
        .as_ref()
        .ok_or_else(|| Error::OracleUnavailable(format!("{what} needs a finite-state form of the model")))
}

fn tolerances() -> Value {
    json!({
        "gap": GAP_TOL,
        "quadrature": crate::evaluate::QUAD_TOL,
        "real_part": crate::expansion::REAL_TOL,
        "merge": crate::oracle::MERGE_TOL,
    })
}

type CmdOut = (Value, Vec<(String, String)>, bool);

/// `A`, `sigma^2`, `a_{k,j}` and the coefficients of every polynomial family.
pub fn cmd_expand(model: &LoadedModel, run: &RunConfig) -> Result<CmdOut> {
    let exp = ExpansionSet::compute(model.twisted.as_ref(), run.order)?;
    let report = expand_report(&exp);
    let mut csv = String::from("family,p,degree,coefficient\n");
    for (name, fam) in [("A", &exp.freq), ("R", &exp.edge_r), ("P", &exp.edge_p), ("P_local", &exp.weak_local)] {
        for (p, poly) in fam.iter().enumerate() {
            for (d, c) in poly.coeffs().iter().enumerate() {
                csv.push_str(&format!("{name},{p},{d},{}\n", fmt17(*c)));
            }
        }
    }
    Ok((report, vec![(String::new(), csv)], true))
}

/// Report body shared by `expand` and the examples.
pub fn expand_report(exp: &ExpansionSet) -> Value {
    let fam = |v: &[Polynomial]| Value::Array(v.iter().map(poly_json).collect());
    json!({
        "order": exp.r,
        "A": num(exp.a()),
        "sigma2": num(exp.sigma2()),
        "moment_coefficients": coeff_table(&exp.moment_coeffs),
        "frequency_polynomials": fam(&exp.freq),
        "R": fam(&exp.edge_r),
        "P": fam(&exp.edge_p),
        "P_local": fam(&exp.weak_local),
        "basis": "coefficients in increasing degree; A_k in powers of (it)",
    })
}

fn verify_law(model: &LoadedModel, run: &RunConfig, n: usize) -> Result<ExactDistribution> {
    let m = require_markov(model, "verify")?;
    match run.oracle {
        OracleChoice::Dp => exact_law(m, n, OracleKind::Dp),
        OracleChoice::Enum => exact_law(m, n, OracleKind::Enum),
        OracleChoice::Auto => exact_law(m, n, OracleKind::Auto),
        OracleChoice::Mc => {
            let (seed, trials) = (run.seed.unwrap_or(0), run.trials.unwrap_or(0));
            Ok(match &model.ulam {
                Some(spec) => mc_sample_map(spec, n, trials, seed),
                None => mc_sample(m, n, trials, seed),
            })
        }
    }
}

/// Convergence reports for each requested form; passes iff every verdict does.
pub fn cmd_verify(model: &LoadedModel, run: &RunConfig) -> Result<CmdOut> {
    if run.n_list.is_empty() {
        return Err(Error::InvalidConfig("verify needs N_list".into()));
    }
    let exp = ExpansionSet::compute(model.twisted.as_ref(), run.order)?;
    let forms = if run.forms.is_empty() {
        match model.markov.as_ref().and_then(|m| m.lattice()) {
            Some(_) => vec![Form::Lattice],
            None => vec![Form::Classical],
        }
    } else {
        run.forms.clone()
    };
    let errors: Vec<Vec<f64>> = run
        .n_list
        .par_iter()
        .map(|&n| {
            let dist = verify_law(model, run, n)?;
            forms.iter().map(|&f| form_error(&exp, &dist, f, &run.test_function)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let reports: Vec<ConvergenceReport> = forms
        .iter()
        .enumerate()
        .map(|(i, &f)| ConvergenceReport::new(f, exp.r, run.n_list.clone(), errors.iter().map(|e| e[i]).collect()))
        .collect();
    let passed = reports.iter().all(|r| r.verdict);
    let tables = reports.iter().map(|r| (r.form.name().to_string(), r.to_csv())).collect();
    let report = json!({
        "order": exp.r,
        "A": num(exp.a()),
        "sigma2": num(exp.sigma2()),
        "oracle": run.oracle,
        "seed": run.seed,
        "trials": run.trials,
        "rng": if run.oracle == OracleChoice::Mc { json!(RNG_ALGORITHM) } else { Value::Null },
        "test_function": run.test_function,
        "tolerances": tolerances(),
        "reports": serde_json::to_value(&reports).expect("serializable"),
        "passed": passed,
    });
    Ok((report, tables, passed))
}

/// Gap, spectral radius and norm decay over `t_grid`, and the `d(s)` scan.
pub fn cmd_diagnose(model: &LoadedModel, run: &RunConfig) -> Result<CmdOut> {
    let t_grid = run.t_grid.clone().ok_or_else(|| Error::InvalidConfig("diagnose needs t_grid".into()))?;
    let gap = match perron_base(&model.twisted.transition()) {
        Ok(b) => json!({"estimate": num(b.gap), "flag": Value::Null}),
        Err(Error::GapBelowTolerance { gap }) => json!({"estimate": num(gap), "flag": "GapBelowTolerance"}),
        Err(e) => json!({"estimate": Value::Null, "flag": e.kind()}),
    };
    let mut report = json!({"gap": gap, "power": run.power, "tolerances": tolerances()});
    let mut tables = Vec::new();
    if let Some(m) = model.markov.as_ref() {
        let span = m.lattice();
        let diffs = if m.dim() >= 2 { resonance_differences(m.h()) } else { Vec::new() };
        let rows = norm_decay_scan(m, &t_grid, run.power);
        let mut csv = String::from("t,spectral_radius,norm_inf,d,lattice_resonance\n");
        let mut theta = f64::INFINITY;
        let mut table = Vec::new();
        for row in &rows {
            let resonant = span.map(|s| crate::models::dist_to_int(row.t * s / (2.0 * std::f64::consts::PI)) < 1e-9);
            let d = diophantine_d(&diffs, row.t / (2.0 * std::f64::consts::PI));
            if d > 0.0 && resonant != Some(true) && run.power == 2 {
                theta = theta.min((1.0 - row.norm_inf) / (d * d));
            }
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt17(row.t),
                fmt17(row.radius),
                fmt17(row.norm_inf),
                fmt17(d),
                resonant.unwrap_or(false)
            ));
            table.push(json!({
                "t": num(row.t), "spectral_radius": num(row.radius), "norm_inf": num(row.norm_inf),
                "d": num(d), "lattice_resonance": resonant.unwrap_or(false),
            }));
        }
        report["lattice_span"] = span.map(num).unwrap_or(Value::Null);
        report["table"] = Value::Array(table);
        report["theta"] = if theta.is_finite() { num(theta) } else { Value::Null };
        tables.push((String::new(), csv));
        if m.dim() >= 2 {
            let s_grid = run
                .s_grid
                .clone()
                .unwrap_or_else(|| t_grid.iter().map(|t| t / (2.0 * std::f64::consts::PI)).collect());
            match diophantine_scan(m.h(), &s_grid) {
                Ok(scan) => {
                    let mut dcsv = String::from("s,d\n");
                    for (s, d) in &scan.table {
                        dcsv.push_str(&format!("{},{}\n", fmt17(*s), fmt17(*d)));
                    }
                    tables.push(("diophantine".into(), dcsv));
                    report["diophantine"] = json!({
                        "K": num(scan.k), "beta": num(scan.beta), "residual": num(scan.residual),
                        "fit_points": scan.fit_points,
                    });
                }
                Err(e) => report["diophantine"] = json!({"flag": e.kind()}),
            }
        }
    }
    Ok((report, tables, true))
}

/// `a_{k,j}` up to `kmax`, compared with exact central moments along `N_list`.
pub fn cmd_moments(model: &LoadedModel, run: &RunConfig) -> Result<CmdOut> {
    let order = match model.twisted.max_jet_order() {
        Some(m) if m < run.kmax => return Err(Error::InsufficientMoments { available: m, required: run.kmax }),
        _ => run.kmax,
    };
    let jets = spectral_jets(model.twisted.as_ref(), order)?;
    let coeffs = moment_coefficients(&jets, run.kmax)?;
    let a = -(jets.mu.coeff(1) * num_complex::Complex64::i()).re;
    let mut report = json!({"kmax": run.kmax, "A": num(a), "moment_coefficients": coeff_table(&coeffs)});
    let mut tables = Vec::new();
    if !run.n_list.is_empty() {
        let m = require_markov(model, "exact moments")?;
        let mut csv = String::from("N,k,exact,predicted\n");
        let mut rows = Vec::new();
        for &n in &run.n_list {
            let exact = exact_moments(m, n, run.kmax, a);
            for k in 0..=run.kmax {
                let pred: f64 = (0..=k / 2).map(|j| coeffs[&(k, j)] * (n as f64).powi(j as i32)).sum();
                csv.push_str(&format!("{n},{k},{},{}\n", fmt17(exact[k]), fmt17(pred)));
                rows.push(json!({"N": n, "k": k, "exact": num(exact[k]), "predicted": num(pred)}));
            }
        }
        report["comparison"] = Value::Array(rows);
        tables.push((String::new(), csv));
    }
    Ok((report, tables, true))
}

/// Local limit estimate at `u`, and its sup error against the exact pmf along `N_list`.
pub fn cmd_lclt(model: &LoadedModel, run: &RunConfig) -> Result<CmdOut> {
    let exp = ExpansionSet::compute(model.twisted.as_ref(), 0)?;
    let n = run.n.unwrap_or(1);
    let mut report = json!({
        "u": num(run.u), "N": n, "eps": num(run.eps),
        "density": num(lclt_estimate(&exp, run.u, n)),
        "window_probability": num(lclt_window(&exp, run.u, n, run.eps)),
    });
    let mut tables = Vec::new();
    if !run.n_list.is_empty() {
        let m = require_markov(model, "lclt error")?;
        let errs = run
            .n_list
            .par_iter()
            .map(|&n| Ok(lclt_error(&exp, &exact_law(m, n, OracleKind::Dp)?)))
            .collect::<Result<Vec<f64>>>()?;
        let mut csv = String::from("N,sup_error\n");
        for (n, e) in run.n_list.iter().zip(&errs) {
            csv.push_str(&format!("{n},{}\n", fmt17(*e)));
        }
        report["sup_error"] =
            Value::Array(run.n_list.iter().zip(&errs).map(|(n, e)| json!({"N": n, "error": num(*e)})).collect());
        tables.push((String::new(), csv));
    }
    Ok((report, tables, true))
}

/// Exact-to-normal tail ratio at `x = max(1, sqrt(c sigma^2 ln N))` for `N` and `N_list`.
pub fn cmd_moddev(model: &LoadedModel, run: &RunConfig) -> Result<CmdOut> {
    let exp = ExpansionSet::compute(model.twisted.as_ref(), run.order)?;
    let m = require_markov(model, "moddev")?;
    let mut ns: Vec<usize> = run.n_list.clone();
    if let Some(n) = run.n {
        if !ns.contains(&n) {
            ns.push(n);
            ns.sort_unstable();
        }
    }
    if ns.is_empty() {
        return Err(Error::InvalidConfig("moddev needs N or N_list".into()));
    }
    let rows = ns.par_iter().map(|&n| moddev_ratio(&exp, m, run.c, n)).collect::<Result<Vec<_>>>()?;
    let mut csv = String::from("N,x,ratio,exact_tail,normal_tail,corollary\n");
    for (n, r) in ns.iter().zip(&rows) {
        csv.push_str(&format!(
            "{n},{},{},{},{},{}\n",
            fmt17(r.x),
            fmt17(r.ratio),
            fmt17(r.exact_tail),
            fmt17(r.normal_tail),
            fmt17(r.corollary)
        ));
    }
    let report = json!({
        "c": num(run.c), "order": exp.r, "sigma2": num(exp.sigma2()),
        "rows": ns.iter().zip(&rows).map(|(n, r)| {
            let mut v = serde_json::to_value(r).expect("serializable");
            v["N"] = json!(n);
            v
        }).collect::<Vec<_>>(),
    });
    Ok((report, vec![(String::new(), csv)], true))
}

/// Machine-readable error document for standard error.
pub fn error_json(e: &Error) -> String {
    json!({"error": e.kind(), "message": e.to_string(), "exit_code": e.exit_code()}).to_string()
}

/// Parses a config file.
pub fn read_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(io)?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))
}

/// Full CLI: returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Ok(v) = std::env::var("EDGEWORTH_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                let e = Error::InvalidConfig(format!("EDGEWORTH_THREADS = {v:?}"));
                eprintln!("{}", error_json(&e));
                return e.exit_code();
            }
        }
    }
    let result = read_config(&args.config).and_then(|mut cfg| {
        args.apply(&mut cfg.run);
        execute(&cfg)
    });
    match result {
        Ok(out) => {
            let files: Vec<String> = out.files.iter().map(|p| p.display().to_string()).collect();
            println!("{}", json!({"command": out.command.name(), "passed": out.passed, "files": files}));
            if out.passed {
                0
            } else {
                EXIT_VERDICT
            }
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            e.exit_code()
        }
    }
}
