//! Seeded, parallel Monte Carlo studies over random EP Hamiltonians.
//!
//! Realization `i` draws everything from its own generator stream
//! ([`realization_rng`]), samples are collected in index order, and all
//! reductions run sequentially afterwards, so results do not depend on the
//! worker count.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ep::{
    build_ep_system, decay_operator, passive_xi_bound, passivity_report, DEFAULT_NIL_TOL,
    DEFAULT_PSD_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::{is_positive_semidefinite, ComplexScalar};
use crate::models::{random_ep_from_rng, random_matrix, random_unit_vector, realization_rng};
use crate::response::{evolve, excite, perturb};

pub const FORMAT_VERSION: u32 = 1;

/// `ep-response <crate version>`, written into every output file.
pub fn generator_version() -> String {
    format!("ep-response {}", env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    SpectralX,
    PassiveBound,
    StrengthCorrelation,
    IntensityZ,
    DynamicsBound,
}

impl Study {
    pub fn as_str(self) -> &'static str {
        match self {
            Study::SpectralX => "spectral_x",
            Study::PassiveBound => "passive_bound",
            Study::StrengthCorrelation => "strength_correlation",
            Study::IntensityZ => "intensity_z",
            Study::DynamicsBound => "dynamics_bound",
        }
    }
}

fn default_n() -> usize {
    3
}
fn default_eep() -> ComplexScalar {
    Complex64::new(0.0, -0.5)
}
fn default_epsilon() -> f64 {
    1e-7
}
fn default_realizations() -> u64 {
    100_000
}
fn default_bins() -> usize {
    50
}
fn default_time() -> f64 {
    1e3
}
fn one() -> f64 {
    1.0
}
fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub study: Study,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_eep")]
    pub eigenvalue_ep: ComplexScalar,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_realizations")]
    pub realizations: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// Drive frequency for `intensity_z`; resonant `Re E_EP / hbar` when absent.
    #[serde(default)]
    pub omega: Option<f64>,
    /// Evaluation time for `dynamics_bound`.
    #[serde(default = "default_time")]
    pub time: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub power: f64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// EP verification tolerance; the library default when absent.
    #[serde(default)]
    pub tol: Option<f64>,
}

impl EnsembleConfig {
    pub fn new(study: Study) -> Self {
        EnsembleConfig {
            study,
            n: default_n(),
            eigenvalue_ep: default_eep(),
            epsilon: default_epsilon(),
            realizations: default_realizations(),
            seed: 0,
            bins: default_bins(),
            omega: None,
            time: default_time(),
            hbar: 1.0,
            power: 1.0,
            workers: 1,
            tol: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: EnsembleConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(msg));
        if self.realizations < 1 {
            return bad("realizations must be at least 1".into());
        }
        if self.bins < 10 {
            return bad(format!("bins must be at least 10, got {}", self.bins));
        }
        if !(2..=crate::linalg::MAX_DIM).contains(&self.n) {
            return bad(format!(
                "n must be between 2 and {}, got {}",
                crate::linalg::MAX_DIM,
                self.n
            ));
        }
        if self.workers < 1 {
            return bad("workers must be at least 1".into());
        }
        if !self.eigenvalue_ep.re.is_finite() || !self.eigenvalue_ep.im.is_finite() {
            return bad("eigenvalue_ep must be finite".into());
        }
        for (name, value) in [("epsilon", self.epsilon), ("hbar", self.hbar)] {
            if !(value > 0.0) || !value.is_finite() {
                return bad(format!("{name} must be positive and finite, got {value}"));
            }
        }
        if !(self.power >= 0.0) || !self.power.is_finite() {
            return bad(format!(
                "power must be nonnegative and finite, got {}",
                self.power
            ));
        }
        if !self.time.is_finite() {
            return bad("time must be finite".into());
        }
        if self.omega.is_some_and(|w| !w.is_finite()) {
            return bad("omega must be finite".into());
        }
        if self.tol.is_some_and(|t| !(t > 0.0)) {
            return bad("tol must be positive".into());
        }
        if self.study == Study::PassiveBound && !(2..=3).contains(&self.n) {
            return bad("passive_bound requires n = 2 or 3".into());
        }
        Ok(())
    }

    fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_NIL_TOL)
    }
}

/// Outcome of one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sample {
    /// Contributes to the histogram. `second` is the second coordinate of
    /// two-dimensional studies; `None` there means the point enters the
    /// summary statistics but cannot be binned.
    Accepted {
        value: f64,
        second: Option<f64>,
    },
    /// Drawn correctly but outside the study's population (not passive,
    /// non-generic initial state).
    Rejected,
    Failed,
}

/// Draws realization `index` of the configured study.
pub fn sample(cfg: &EnsembleConfig, index: u64) -> Sample {
    let mut rng = realization_rng(cfg.seed, index);
    match draw(cfg, &mut rng) {
        Ok(s) => s,
        Err(_) => Sample::Failed,
    }
}

fn draw(cfg: &EnsembleConfig, rng: &mut ChaCha8Rng) -> Result<Sample> {
    let n = cfg.n;
    let model = random_ep_from_rng(n, cfg.eigenvalue_ep, rng)?;
    let accepted = |value: f64, second: Option<f64>| {
        if value.is_finite() && second.is_none_or(f64::is_finite) {
            Ok(Sample::Accepted { value, second })
        } else {
            Err(Error::NonFinite("sample"))
        }
    };
    match cfg.study {
        Study::SpectralX => {
            let h1 = random_matrix(n, n, rng);
            let sys = build_ep_system(&model.h0, model.eigenvalue_ep, n, cfg.tol())?;
            accepted(perturb(&sys, &h1, cfg.epsilon)?.x, None)
        }
        Study::PassiveBound => {
            // cheap screen before the full EP analysis; most draws have gain
            let gamma = decay_operator(&model.h0)?;
            if !is_positive_semidefinite(&gamma, DEFAULT_PSD_TOL)?.is_psd {
                return Ok(Sample::Rejected);
            }
            let sys = build_ep_system(&model.h0, model.eigenvalue_ep, n, cfg.tol())?;
            let report = passivity_report(&sys, DEFAULT_PSD_TOL)?;
            let ub = passive_xi_bound(model.eigenvalue_ep, n).filter(|&b| b > 0.0);
            let Some(ub) = ub else {
                return Err(Error::Domain(
                    "passive bound is zero for a real EP eigenvalue".into(),
                ));
            };
            accepted(sys.xi() / ub, report.ratio.map(f64::log10))
        }
        Study::StrengthCorrelation => {
            let sys = build_ep_system(&model.h0, model.eigenvalue_ep, n, cfg.tol())?;
            accepted(sys.xi().log10(), Some(sys.zeta().log10()))
        }
        Study::IntensityZ => {
            let p = random_unit_vector(n, rng);
            let sys = build_ep_system(&model.h0, model.eigenvalue_ep, n, cfg.tol())?;
            let omega = cfg.omega.unwrap_or(cfg.eigenvalue_ep.re / cfg.hbar);
            accepted(excite(&sys, &p, omega, cfg.power, cfg.hbar)?.z, None)
        }
        Study::DynamicsBound => {
            let psi0 = random_unit_vector(n, rng);
            let sys = build_ep_system(&model.h0, model.eigenvalue_ep, n, cfg.tol())?;
            let rep = evolve(&sys, &psi0, cfg.time, cfg.hbar)?;
            if !rep.generic {
                return Ok(Sample::Rejected);
            }
            accepted(rep.ratio / rep.bound, None)
        }
    }
}

/// All realizations of a run, in index order.
pub fn run_samples(cfg: &EnsembleConfig) -> Result<Vec<Sample>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::NumericalFailure(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        (0..cfg.realizations)
            .into_par_iter()
            .map(|i| sample(cfg, i))
            .collect()
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisScale {
    Linear,
    Log10,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    /// Scale of the recorded quantity; `log10` axes already hold logarithms.
    pub scale: AxisScale,
    pub edges: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub std_dev: f64,
    pub fraction_above_one: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub pearson: f64,
    pub spearman: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramData {
    pub format_version: u32,
    pub generator: String,
    pub config: EnsembleConfig,
    pub axes: Vec<Axis>,
    /// Row-major over `axes` (first axis slowest); integrates to one unless empty.
    pub densities: Vec<f64>,
    pub count_total: u64,
    pub count_accepted: u64,
    pub count_rejected: u64,
    pub count_failed: u64,
    /// Accepted samples that could not be placed in a two-dimensional bin.
    pub count_unbinned: u64,
    pub acceptance_rate: f64,
    pub failure_fraction: f64,
    /// Statistics of the first coordinate over all accepted samples.
    pub summary: Option<Summary>,
    pub correlation: Option<Correlation>,
}

fn axes_for(study: Study) -> Vec<(&'static str, AxisScale)> {
    match study {
        Study::SpectralX => vec![("x", AxisScale::Linear)],
        Study::PassiveBound => vec![
            ("xi_over_xi_ub", AxisScale::Linear),
            ("ratio", AxisScale::Log10),
        ],
        Study::StrengthCorrelation => vec![("xi", AxisScale::Log10), ("zeta", AxisScale::Log10)],
        Study::IntensityZ => vec![("z", AxisScale::Linear)],
        Study::DynamicsBound => vec![("ratio_over_bound", AxisScale::Linear)],
    }
}

pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<HistogramData> {
    let samples = run_samples(cfg)?;
    Ok(histogram(cfg, &samples))
}

fn check_study(cfg: &EnsembleConfig, want: Study) -> Result<()> {
    if cfg.study == want {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "config study is {}, expected {}",
            cfg.study.as_str(),
            want.as_str()
        )))
    }
}

pub fn run_spectral_ensemble(cfg: &EnsembleConfig) -> Result<HistogramData> {
    check_study(cfg, Study::SpectralX)?;
    run_ensemble(cfg)
}

pub fn run_passive_ensemble(cfg: &EnsembleConfig) -> Result<HistogramData> {
    check_study(cfg, Study::PassiveBound)?;
    run_ensemble(cfg)
}

pub fn run_correlation_ensemble(cfg: &EnsembleConfig) -> Result<HistogramData> {
    check_study(cfg, Study::StrengthCorrelation)?;
    run_ensemble(cfg)
}

pub fn run_intensity_ensemble(cfg: &EnsembleConfig) -> Result<HistogramData> {
    check_study(cfg, Study::IntensityZ)?;
    run_ensemble(cfg)
}

pub fn run_dynamics_ensemble(cfg: &EnsembleConfig) -> Result<HistogramData> {
    check_study(cfg, Study::DynamicsBound)?;
    run_ensemble(cfg)
}

/// Bins the accepted samples with fixed-width bins over the observed range.
pub fn histogram(cfg: &EnsembleConfig, samples: &[Sample]) -> HistogramData {
    let mut firsts = Vec::new();
    let mut pairs = Vec::new();
    let (mut rejected, mut failed) = (0u64, 0u64);
    for s in samples {
        match *s {
            Sample::Accepted { value, second } => {
                firsts.push(value);
                if let Some(y) = second {
                    pairs.push((value, y));
                }
            }
            Sample::Rejected => rejected += 1,
            Sample::Failed => failed += 1,
        }
    }
    let total = samples.len() as u64;
    let accepted = firsts.len() as u64;
    let specs = axes_for(cfg.study);
    let bins = cfg.bins;

    let (axes, densities, unbinned, correlation) = if specs.len() == 1 {
        let edges = edges_over(&firsts, bins);
        let counts = bin_counts_1d(&firsts, &edges);
        let dens = normalize(&counts, firsts.len(), edges[1] - edges[0]);
        let axis = Axis {
            name: specs[0].0.into(),
            scale: specs[0].1,
            edges,
        };
        (vec![axis], dens, 0, None)
    } else {
        let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let ex = edges_over(&xs, bins);
        let ey = edges_over(&ys, bins);
        let mut counts = vec![0u64; bins * bins];
        for (x, y) in &pairs {
            counts[bin_index(*x, &ex) * bins + bin_index(*y, &ey)] += 1;
        }
        let dens = normalize(&counts, pairs.len(), (ex[1] - ex[0]) * (ey[1] - ey[0]));
        let corr = (pairs.len() >= 2).then(|| Correlation {
            pearson: pearson(&xs, &ys),
            spearman: spearman(&xs, &ys),
        });
        let axes = vec![
            Axis {
                name: specs[0].0.into(),
                scale: specs[0].1,
                edges: ex,
            },
            Axis {
                name: specs[1].0.into(),
                scale: specs[1].1,
                edges: ey,
            },
        ];
        (axes, dens, accepted - pairs.len() as u64, corr)
    };

    HistogramData {
        format_version: FORMAT_VERSION,
        generator: generator_version(),
        config: cfg.clone(),
        axes,
        densities,
        count_total: total,
        count_accepted: accepted,
        count_rejected: rejected,
        count_failed: failed,
        count_unbinned: unbinned,
        acceptance_rate: if total == 0 {
            0.0
        } else {
            accepted as f64 / total as f64
        },
        failure_fraction: if total == 0 {
            0.0
        } else {
            failed as f64 / total as f64
        },
        summary: summarize(&firsts),
        correlation,
    }
}

fn edges_over(values: &[f64], bins: usize) -> Vec<f64> {
    let (mut lo, mut hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if values.is_empty() {
        (lo, hi) = (0.0, 1.0);
    } else if lo == hi {
        let pad = 0.5 * lo.abs().max(1.0);
        (lo, hi) = (lo - pad, hi + pad);
    }
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..=bins).map(|k| lo + width * k as f64).collect();
    edges[bins] = hi;
    edges
}

fn bin_index(v: f64, edges: &[f64]) -> usize {
    let bins = edges.len() - 1;
    let k = ((v - edges[0]) / (edges[bins] - edges[0]) * bins as f64).floor();
    (k.max(0.0) as usize).min(bins - 1)
}

fn bin_counts_1d(values: &[f64], edges: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; edges.len() - 1];
    for &v in values {
        counts[bin_index(v, edges)] += 1;
    }
    counts
}

fn normalize(counts: &[u64], total: usize, cell: f64) -> Vec<f64> {
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    counts
        .iter()
        .map(|&c| c as f64 / (total as f64 * cell))
        .collect()
}

fn median_sorted(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    }
}

fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let m = values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = values.iter().sum::<f64>() / m;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    Some(Summary {
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        mean,
        median: median_sorted(&sorted),
        std_dev: var.sqrt(),
        fraction_above_one: values.iter().filter(|&&v| v > 1.0).count() as f64 / m,
    })
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Pearson correlation of the ranks, ties averaged.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    pearson(&ranks(xs), &ranks(ys))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    /// `json` for a `.json` extension, CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => OutputFormat::Json,
            _ => OutputFormat::Csv,
        }
    }
}

pub fn to_csv(hist: &HistogramData) -> Result<String> {
    let mut out = String::new();
    let config = serde_json::to_string(&hist.config)?;
    let _ = writeln!(out, "# format_version: {}", hist.format_version);
    let _ = writeln!(out, "# generator: {}", hist.generator);
    let _ = writeln!(out, "# study: {}", hist.config.study.as_str());
    let _ = writeln!(out, "# seed: {}", hist.config.seed);
    let _ = writeln!(out, "# config: {config}");
    let _ = writeln!(
        out,
        "# counts: total={} accepted={} rejected={} failed={} unbinned={}",
        hist.count_total,
        hist.count_accepted,
        hist.count_rejected,
        hist.count_failed,
        hist.count_unbinned
    );
    for axis in &hist.axes {
        let scale = match axis.scale {
            AxisScale::Linear => "linear",
            AxisScale::Log10 => "log10",
        };
        let _ = writeln!(out, "# axis: {} ({scale})", axis.name);
    }
    match hist.axes.as_slice() {
        [x] => {
            out.push_str("bin_left,bin_right,density\n");
            for (k, d) in hist.densities.iter().enumerate() {
                let _ = writeln!(out, "{},{},{}", x.edges[k], x.edges[k + 1], d);
            }
        }
        [x, y] => {
            out.push_str("bin_x,bin_y,density\n");
            let ny = y.edges.len() - 1;
            for (k, d) in hist.densities.iter().enumerate() {
                let (i, j) = (k / ny, k % ny);
                let cx = 0.5 * (x.edges[i] + x.edges[i + 1]);
                let cy = 0.5 * (y.edges[j] + y.edges[j + 1]);
                let _ = writeln!(out, "{cx},{cy},{d}");
            }
        }
        _ => return Err(Error::invalid("histogram must have one or two axes")),
    }
    Ok(out)
}

/// Writes the histogram as CSV (bins plus `#` metadata header) or as JSON.
pub fn emit(hist: &HistogramData, path: &Path, format: OutputFormat) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => to_csv(hist)?,
        OutputFormat::Json => serde_json::to_string_pretty(hist)? + "\n",
    };
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(study: Study) -> EnsembleConfig {
        EnsembleConfig {
            realizations: 200,
            bins: 10,
            seed: 11,
            ..EnsembleConfig::new(study)
        }
    }

    fn integral(h: &HistogramData) -> f64 {
        let cell: f64 = h.axes.iter().map(|a| a.edges[1] - a.edges[0]).product();
        h.densities.iter().sum::<f64>() * cell
    }

    #[test]
    fn config_parsing_and_validation() {
        let cfg = EnsembleConfig::from_json(
            r#"{"study": "intensity_z", "eigenvalue_ep": [0, -0.005], "seed": 3}"#,
        )
        .unwrap();
        assert_eq!(cfg.study, Study::IntensityZ);
        assert_eq!(cfg.eigenvalue_ep, Complex64::new(0.0, -0.005));
        assert_eq!(cfg.bins, 50);
        assert!(EnsembleConfig::from_json(r#"{"study": "spectral_x", "bins": 9}"#).is_err());
        assert!(
            EnsembleConfig::from_json(r#"{"study": "spectral_x", "realizations": 0}"#).is_err()
        );
        assert!(EnsembleConfig::from_json(r#"{"study": "spectral_x", "bogus": 1}"#).is_err());
        assert!(EnsembleConfig::from_json(r#"{"study": "passive_bound", "n": 4}"#).is_err());
        assert!(EnsembleConfig::from_json(r#"{"study": "nope"}"#).is_err());
    }

    #[test]
    fn densities_integrate_to_one() {
        for study in [
            Study::SpectralX,
            Study::StrengthCorrelation,
            Study::IntensityZ,
            Study::DynamicsBound,
        ] {
            let h = run_ensemble(&small(study)).unwrap();
            assert!((integral(&h) - 1.0).abs() < 1e-9, "{study:?}");
            assert!(h.densities.iter().all(|&d| d >= 0.0));
            assert!(h.count_accepted <= h.count_total);
        }
    }

    #[test]
    fn study_mismatch_is_rejected() {
        assert!(run_spectral_ensemble(&small(Study::IntensityZ)).is_err());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = small(Study::SpectralX);
        let a = run_ensemble(&cfg).unwrap();
        let b = run_ensemble(&EnsembleConfig {
            workers: 3,
            ..cfg.clone()
        })
        .unwrap();
        assert_eq!(a.densities, b.densities);
        assert_eq!(a.summary, b.summary);
    }

    #[test]
    fn single_realization_matches_direct_call() {
        let cfg = EnsembleConfig {
            realizations: 1,
            ..small(Study::SpectralX)
        };
        let h = run_ensemble(&cfg).unwrap();
        let mut rng = realization_rng(cfg.seed, 0);
        let model = random_ep_from_rng(3, cfg.eigenvalue_ep, &mut rng).unwrap();
        let h1 = random_matrix(3, 3, &mut rng);
        let sys = build_ep_system(&model.h0, model.eigenvalue_ep, 3, DEFAULT_NIL_TOL).unwrap();
        let x = perturb(&sys, &h1, cfg.epsilon).unwrap().x;
        assert_eq!(h.summary.unwrap().median, x);
    }

    #[test]
    fn two_by_two_strengths_lie_on_antidiagonal() {
        let cfg = EnsembleConfig {
            n: 2,
            ..small(Study::StrengthCorrelation)
        };
        for s in run_samples(&cfg).unwrap() {
            let Sample::Accepted {
                value,
                second: Some(y),
            } = s
            else {
                panic!("{s:?}")
            };
            assert!((value + y).abs() < 1e-10);
        }
    }

    #[test]
    fn empty_histogram_round_trips() {
        let cfg = small(Study::PassiveBound);
        let h = histogram(&cfg, &[Sample::Rejected, Sample::Failed]);
        assert_eq!(h.count_accepted, 0);
        assert_eq!(h.count_failed, 1);
        assert!(h.summary.is_none());
        let text = serde_json::to_string(&h).unwrap();
        let back: HistogramData = serde_json::from_str(&text).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn csv_row_counts() {
        let one_d = run_ensemble(&small(Study::IntensityZ)).unwrap();
        let csv = to_csv(&one_d).unwrap();
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 10);
        let two_d = run_ensemble(&small(Study::StrengthCorrelation)).unwrap();
        let csv = to_csv(&two_d).unwrap();
        assert!(csv.contains("bin_x,bin_y,density"));
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 100);
    }

    #[test]
    fn rank_correlations() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&xs, &[1.0, 4.0, 9.0, 100.0]) - 1.0).abs() < 1e-15);
        assert!((spearman(&xs, &[4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
        assert_eq!(ranks(&[3.0, 1.0, 3.0]), vec![2.5, 1.0, 2.5]);
        assert!((pearson(&xs, &[2.0, 4.0, 6.0, 8.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_range_gets_padded() {
        let e = edges_over(&[2.0, 2.0], 10);
        assert_eq!(e[0], 1.0);
        assert_eq!(e[10], 3.0);
    }
}
