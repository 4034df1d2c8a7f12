//! Seeded Monte Carlo drivers. Trials run in parallel, each on its own
//! substream of the master seed, so reports do not depend on the number of
//! worker threads.

use std::collections::{BinaryHeap, BTreeMap};
use std::cmp::Reverse;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{classify_region, h_p, nu_height, AnalyticPermuton, BoundaryPair, RegionLabel};
use crate::error::{arg, Result};
use crate::hecke::{
    all_permutations, binomial, demazure_product, fold_word, height_grid, inversions, pattern_counts, random_permutation,
    tau_in_place, Permutation, Word,
};
use crate::pipedream::{apply_shape, CompletedShape};
use crate::rng::{self, substream, SimRng};
use crate::shapes::{
    bipartite_coxeter_word, coxeter_path, coxeter_power_shape, path_from_theta, rectangle_paths, shape_from_paths,
    standard_coxeter_word, BoundaryFunction, LatticeBox, LatticePath, Shape, Step,
};
use crate::tasep::{c_p, v_p, GeomParam, TasepState};

/// Largest `n` for which inversion and pattern statistics are enumerated
/// exactly over all pairs.
pub const EXACT_MAX_N: usize = 4;

/// Limit shape of a family of order-convex shapes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    Staircase,
    Rectangle { beta: f64 },
    Trapezoid { alpha: f64, beta: f64, r: f64 },
    Pair { pair: BoundaryPair },
}

impl Family {
    pub fn pair(&self) -> Result<BoundaryPair> {
        match self {
            Family::Staircase => Ok(BoundaryPair::staircase()),
            Family::Rectangle { beta } => BoundaryPair::peridot(*beta),
            Family::Trapezoid { alpha, beta, r } => BoundaryPair::trapezoid(*alpha, *beta, *r),
            Family::Pair { pair } => Ok(pair.clone()),
        }
    }

    /// The size-`n` member of the family.
    pub fn shape(&self, n: usize) -> Result<Shape> {
        match self {
            Family::Staircase => shape_from_paths(&LatticePath::staircase_sw(n), &LatticePath::staircase_ne(n)),
            Family::Rectangle { beta } => {
                let (h, w) = rectangle_dims(*beta, n)?;
                let (sw, ne) = rectangle_paths(h, w);
                shape_from_paths(&sw, &ne)
            }
            _ => {
                let pair = self.pair()?;
                shape_from_paths(&path_from_theta(pair.phi(), n), &path_from_theta(pair.psi(), n))
            }
        }
    }
}

/// `(floor((1 - beta) n), n - floor((1 - beta) n))`, both at least 1.
pub fn rectangle_dims(beta: f64, n: usize) -> Result<(usize, usize)> {
    if !(beta > 0.0 && beta < 1.0) {
        return arg(format!("rectangle parameter beta = {beta} outside (0, 1)"));
    }
    let h = ((1.0 - beta) * n as f64).floor() as usize;
    if h < 1 || h >= n {
        return arg(format!("a {beta}-rectangle at n = {n} has an empty side"));
    }
    Ok((h, n - h))
}

/// Which Coxeter word drives the bubble-sort operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coxeter {
    /// `(1, 2, ..., n-1)`: classical bubble sort, path slope 1.
    Standard,
    /// Odd letters then even letters: path slope 1/2.
    Bipartite,
    /// A path of slope `beta` taken from the configuration.
    Slope,
}

/// Rectangle piece of a composite shape: northwest corner at
/// `(offset n, offset n)`, height `floor((1 - beta) n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub beta: f64,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Family,
    pub ns: Vec<usize>,
    pub p: f64,
    pub trials: usize,
    /// Interior evaluation points per axis, at `i / (grid + 1)`.
    pub grid: usize,
    pub seed: u64,
    pub point: (f64, f64),
    pub alpha: f64,
    pub beta: f64,
    pub coxeter: Coxeter,
    /// Pattern size.
    pub k: usize,
    pub pieces: Vec<Piece>,
    /// Resolution of tabulated analytic grids.
    pub resolution: usize,
    /// Hydrodynamic particle label and time, in units of `L`.
    pub m: f64,
    pub t: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            family: Family::Staircase,
            ns: vec![500],
            p: 0.5,
            trials: 1,
            grid: 9,
            seed: rng::DEFAULT_SEED,
            point: (0.5, 0.5),
            alpha: 0.2,
            beta: 0.5,
            coxeter: Coxeter::Standard,
            k: 2,
            pieces: Vec::new(),
            resolution: 400,
            m: 0.25,
            t: 1.0,
        }
    }
}

pub const EXPERIMENTS: [&str; 9] =
    ["convergence", "fluctuation", "bubble", "doppelganger", "inversion", "pattern", "dory", "composite", "hydrodynamic"];

impl ExperimentConfig {
    /// Default settings for each experiment.
    pub fn preset(name: &str) -> Result<Self> {
        let d = Self::default();
        Ok(match name {
            "convergence" => Self { ns: vec![2000], ..d },
            "fluctuation" => Self { ns: vec![256, 1024], trials: 300, ..d },
            "bubble" => Self { ns: vec![2000], alpha: 0.2, ..d },
            "doppelganger" => Self { ns: vec![2000], beta: 0.5, ..d },
            "inversion" => Self { ns: vec![100, 300, 1000], trials: 20, ..d },
            "pattern" => Self { ns: vec![500], trials: 20, k: 2, ..d },
            "dory" => Self { ns: vec![200], trials: 50, beta: 0.5, ..d },
            "composite" => Self {
                ns: vec![1600],
                pieces: vec![Piece { beta: 0.5, offset: 0.0 }, Piece { beta: 0.25, offset: 0.5 }],
                ..d
            },
            "hydrodynamic" => Self { ns: vec![500, 2000], trials: 200, ..d },
            other => return arg(format!("unknown experiment {other:?}; expected one of {}", EXPERIMENTS.join(", "))),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return arg("trials must be at least 1");
        }
        if self.ns.is_empty() || self.ns.iter().any(|&n| n < 2) {
            return arg("every n must be at least 2");
        }
        if self.grid < 1 {
            return arg("grid must be at least 1");
        }
        Ok(())
    }

    fn interior_points(&self) -> Vec<(f64, f64)> {
        let g = self.grid + 1;
        let ts: Vec<f64> = (1..g).map(|i| i as f64 / g as f64).collect();
        ts.iter().flat_map(|&x| ts.iter().map(move |&y| (x, y))).collect()
    }
}

fn trial_rng(seed: u64, n_index: usize, trial: usize) -> SimRng {
    substream(seed, ((n_index as u64) << 32) | trial as u64)
}

/// Runs `f` for every trial at every `n` in parallel and returns results in
/// `(n, trial)` order.
fn run_trials<T: Send>(cfg: &ExperimentConfig, f: impl Fn(usize, &mut SimRng) -> Result<T> + Sync) -> Result<Vec<Vec<T>>> {
    cfg.ns
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            (0..cfg.trials).into_par_iter().map(|t| f(n, &mut trial_rng(cfg.seed, ni, t))).collect::<Result<Vec<T>>>()
        })
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (zero for a single value).
fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Formats with 12 significant digits, trimming trailing zeros.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-5..15).contains(&mag) {
        let digits = (11 - mag).max(0) as usize;
        let s = format!("{x:.digits$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

/// Rounds every float in a JSON value to 12 significant digits.
pub fn round_json(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(num) if num.is_f64() => {
            let x = num.as_f64().unwrap();
            if let Some(r) = sig12(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
                *num = r;
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(round_json),
        serde_json::Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

/// A summary that serializes to JSON, plus per-row detail as CSV.
pub trait Report: Serialize {
    fn csv(&self) -> String;
}

/// Deviation of an empirical height from its limit at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointDeviation {
    pub n: usize,
    pub trial: usize,
    pub x: f64,
    pub y: f64,
    pub empirical: f64,
    pub limit: f64,
}

impl PointDeviation {
    pub fn dev(&self) -> f64 {
        (self.empirical - self.limit).abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationSummary {
    pub n: usize,
    pub max_dev: f64,
    pub mean_dev: f64,
}

fn summarize(n: usize, pts: &[PointDeviation]) -> DeviationSummary {
    let devs: Vec<f64> = pts.iter().map(PointDeviation::dev).collect();
    DeviationSummary { n, max_dev: devs.iter().copied().fold(0.0, f64::max), mean_dev: mean(&devs) }
}

fn deviation_csv(points: &[PointDeviation]) -> String {
    let mut out = String::from("n,trial,x,y,empirical,limit,dev\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.n,
            p.trial,
            sig12(p.x),
            sig12(p.y),
            sig12(p.empirical),
            sig12(p.limit),
            sig12(p.dev())
        );
    }
    out
}

fn compare(
    n: usize,
    trial: usize,
    u: &Permutation,
    pts: &[(f64, f64)],
    limit: impl Fn(f64, f64) -> f64,
) -> Vec<PointDeviation> {
    pts.iter().map(|&(x, y)| PointDeviation { n, trial, x, y, empirical: u.height(x, y), limit: limit(x, y) }).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub family: Family,
    pub p: f64,
    pub max_dev: f64,
    pub mean_dev: f64,
    pub per_n: Vec<DeviationSummary>,
    #[serde(skip)]
    pub points: Vec<PointDeviation>,
}

impl Report for ConvergenceReport {
    fn csv(&self) -> String {
        deviation_csv(&self.points)
    }
}

fn grand(per_n: &[DeviationSummary]) -> (f64, f64) {
    (per_n.iter().map(|s| s.max_dev).fold(0.0, f64::max), mean(&per_n.iter().map(|s| s.mean_dev).collect::<Vec<_>>()))
}

/// Distance between the height function of `Delta_p` of the family's shapes and
/// the limit `h_p` on the interior grid.
pub fn convergence_experiment(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let pair = cfg.family.pair()?;
    h_p(&pair, cfg.p, 0.5, 0.5)?;
    let pts = cfg.interior_points();
    let shapes = cfg.ns.iter().map(|&n| Ok((n, CompletedShape::new(&cfg.family.shape(n)?)))).collect::<Result<BTreeMap<_, _>>>()?;
    let limit = |x, y| h_p(&pair, cfg.p, x, y).unwrap();
    let trials = run_trials(cfg, |n, rng| shapes[&n].demazure_sample(cfg.p, rng))?;
    let mut points = Vec::new();
    let mut per_n = Vec::new();
    for (&n, us) in cfg.ns.iter().zip(&trials) {
        let devs: Vec<PointDeviation> = us.iter().enumerate().flat_map(|(t, u)| compare(n, t, u, &pts, limit)).collect();
        per_n.push(summarize(n, &devs));
        points.extend(devs);
    }
    let (max_dev, mean_dev) = grand(&per_n);
    Ok(ConvergenceReport { family: cfg.family.clone(), p: cfg.p, max_dev, mean_dev, per_n, points })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FluctuationLevel {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub mean_dev: f64,
    /// `v_p(x - y + h, psi(x) - phi(y)) n^{-2/3}`.
    pub scale: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FluctuationReport {
    pub point: (f64, f64),
    pub p: f64,
    pub limit: f64,
    pub per_n: Vec<FluctuationLevel>,
    /// `std(n_{i+1}) / std(n_i)` with the target `(n_i / n_{i+1})^{2/3}`.
    pub std_ratios: Vec<(f64, f64)>,
    /// Least-squares slope of `log std` against `log n`.
    pub fitted_exponent: f64,
    #[serde(skip)]
    pub samples: Vec<(usize, usize, f64)>,
}

impl Report for FluctuationReport {
    fn csv(&self) -> String {
        let mut out = String::from("n,trial,height\n");
        for (n, t, h) in &self.samples {
            let _ = writeln!(out, "{n},{t},{}", sig12(*h));
        }
        out
    }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

/// Spread of `H_{u_n}(x, y)` across trials and its scaling with `n`.
pub fn fluctuation_experiment(cfg: &ExperimentConfig) -> Result<FluctuationReport> {
    cfg.validate()?;
    let pair = cfg.family.pair()?;
    let (x, y) = cfg.point;
    if !(cfg.p > 0.0 && cfg.p < 1.0) {
        return arg("fluctuations need p in (0, 1)");
    }
    let label = classify_region(&pair, cfg.p, x, y);
    if label != RegionLabel::K {
        return arg(format!("point ({x}, {y}) lies in {} rather than K", label.name()));
    }
    let h = h_p(&pair, cfg.p, x, y)?;
    let scale0 = v_p(cfg.p, x - y + h, pair.spread(x, y))?;
    let shapes = cfg.ns.iter().map(|&n| Ok((n, CompletedShape::new(&cfg.family.shape(n)?)))).collect::<Result<BTreeMap<_, _>>>()?;
    let trials = run_trials(cfg, |n, rng| Ok(shapes[&n].demazure_sample(cfg.p, rng)?.height(x, y)))?;
    let mut per_n = Vec::new();
    let mut samples = Vec::new();
    for (&n, hs) in cfg.ns.iter().zip(&trials) {
        let m = mean(hs);
        per_n.push(FluctuationLevel { n, mean: m, std: std_dev(hs), mean_dev: m - h, scale: scale0 * (n as f64).powf(-2.0 / 3.0) });
        samples.extend(hs.iter().enumerate().map(|(t, &v)| (n, t, v)));
    }
    let std_ratios = per_n
        .windows(2)
        .map(|w| (w[1].std / w[0].std, (w[0].n as f64 / w[1].n as f64).powf(2.0 / 3.0)))
        .collect();
    let lx: Vec<f64> = per_n.iter().map(|l| (l.n as f64).ln()).collect();
    let ly: Vec<f64> = per_n.iter().map(|l| l.std.ln()).collect();
    let fitted_exponent = if per_n.len() >= 2 { slope(&lx, &ly) } else { f64::NAN };
    Ok(FluctuationReport { point: cfg.point, p: cfg.p, limit: h, per_n, std_ratios, fitted_exponent, samples })
}

/// A Coxeter path of slope roughly `beta`: the rounded path of `beta z` with its
/// first step forced south and its last step forced east.
pub fn slope_coxeter_path(beta: f64, n: usize) -> Result<LatticePath> {
    if n < 2 {
        return arg("Coxeter paths need n >= 2");
    }
    let mut steps = path_from_theta(&BoundaryFunction::linear(beta.clamp(0.0, 1.0), 0.0)?, n).steps();
    steps[0] = Step::S;
    steps[n - 1] = Step::E;
    LatticePath::new(0, &steps)
}

fn coxeter_sw(kind: Coxeter, beta: f64, n: usize) -> Result<(LatticePath, f64)> {
    Ok(match kind {
        Coxeter::Standard => (coxeter_path(&standard_coxeter_word(n))?, 1.0),
        Coxeter::Bipartite => (coxeter_path(&bipartite_coxeter_word(n))?, 0.5),
        Coxeter::Slope => (slope_coxeter_path(beta, n)?, beta),
    })
}

/// Shape of `floor(alpha n)` applications of the Coxeter operator of `sw`.
pub fn bubble_shape(sw: &LatticePath, alpha: f64) -> Result<Shape> {
    let t = (alpha * sw.n() as f64).floor() as usize;
    coxeter_power_shape(sw, t)
}

#[derive(Clone, Debug, Serialize)]
pub struct BubbleReport {
    pub alpha: f64,
    pub beta: f64,
    pub coxeter: Coxeter,
    pub max_dev: f64,
    pub mean_dev: f64,
    pub per_n: Vec<DeviationSummary>,
    /// Fraction of plot points within 0.02 of the anti-diagonal, per `n`.
    pub antidiagonal_fraction: Vec<f64>,
    #[serde(skip)]
    pub points: Vec<PointDeviation>,
}

impl Report for BubbleReport {
    fn csv(&self) -> String {
        deviation_csv(&self.points)
    }
}

fn antidiagonal_fraction(u: &Permutation) -> f64 {
    let n = u.n() as f64;
    let near = u.values().iter().enumerate().filter(|(i, &v)| ((*i as f64 + 0.5) / n + (v as f64 - 0.5) / n - 1.0).abs() <= 0.02);
    near.count() as f64 / n
}

/// Applies `floor(alpha n)` Coxeter passes to a uniform permutation.
pub fn bubble_experiment(cfg: &ExperimentConfig) -> Result<BubbleReport> {
    cfg.validate()?;
    if cfg.alpha.is_nan() || cfg.alpha <= 0.0 {
        return arg("alpha must be positive");
    }
    let pts = cfg.interior_points();
    let mut beta = cfg.beta;
    let mut shapes = BTreeMap::new();
    for &n in &cfg.ns {
        let (sw, b) = coxeter_sw(cfg.coxeter, cfg.beta, n)?;
        beta = b;
        shapes.insert(n, bubble_shape(&sw, cfg.alpha)?);
    }
    let limit = |x, y| nu_height(cfg.alpha, beta, x, y).unwrap();
    let trials = run_trials(cfg, |n, rng| apply_shape(&random_permutation(n, rng), &shapes[&n]))?;
    let mut points = Vec::new();
    let mut per_n = Vec::new();
    let mut fractions = Vec::new();
    for (&n, us) in cfg.ns.iter().zip(&trials) {
        let devs: Vec<PointDeviation> = us.iter().enumerate().flat_map(|(t, u)| compare(n, t, u, &pts, limit)).collect();
        per_n.push(summarize(n, &devs));
        fractions.push(mean(&us.iter().map(antidiagonal_fraction).collect::<Vec<_>>()));
        points.extend(devs);
    }
    let (max_dev, mean_dev) = grand(&per_n);
    Ok(BubbleReport { alpha: cfg.alpha, beta, coxeter: cfg.coxeter, max_dev, mean_dev, per_n, antidiagonal_fraction: fractions, points })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoppelgangerLevel {
    pub n: usize,
    pub rectangle_dev: f64,
    pub parallelogram_dev: f64,
    pub mutual_dev: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DoppelgangerReport {
    pub beta: f64,
    pub alpha: f64,
    pub per_n: Vec<DoppelgangerLevel>,
    #[serde(skip)]
    pub points: Vec<(PointDeviation, f64)>,
}

impl Report for DoppelgangerReport {
    fn csv(&self) -> String {
        let mut out = String::from("n,trial,x,y,rectangle,parallelogram,limit\n");
        for (p, par) in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                p.n,
                p.trial,
                sig12(p.x),
                sig12(p.y),
                sig12(p.empirical),
                sig12(*par),
                sig12(p.limit)
            );
        }
        out
    }
}

/// The rectangle operator and the parallelogram operator with
/// `alpha = beta (1 - beta)`, applied to the same uniform permutation.
pub fn doppelganger_experiment(cfg: &ExperimentConfig) -> Result<DoppelgangerReport> {
    cfg.validate()?;
    let beta = cfg.beta;
    let alpha = beta * (1.0 - beta);
    let pts = cfg.interior_points();
    let mut shapes = BTreeMap::new();
    for &n in &cfg.ns {
        let (h, w) = rectangle_dims(beta, n)?;
        let (sw, ne) = rectangle_paths(h, w);
        let rect = shape_from_paths(&sw, &ne)?;
        let par = bubble_shape(&slope_coxeter_path(beta, n)?, alpha)?;
        shapes.insert(n, (rect, par));
    }
    let trials = run_trials(cfg, |n, rng| {
        let v = random_permutation(n, rng);
        let (rect, par) = &shapes[&n];
        Ok((apply_shape(&v, rect)?, apply_shape(&v, par)?))
    })?;
    let mut per_n = Vec::new();
    let mut points = Vec::new();
    for (&n, pairs) in cfg.ns.iter().zip(&trials) {
        let (mut rd, mut pd, mut md) = (0f64, 0f64, 0f64);
        for (t, (ur, up)) in pairs.iter().enumerate() {
            for &(x, y) in &pts {
                let (a, b, l) = (ur.height(x, y), up.height(x, y), nu_height(alpha, beta, x, y)?);
                rd = rd.max((a - l).abs());
                pd = pd.max((b - l).abs());
                md = md.max((a - b).abs());
                points.push((PointDeviation { n, trial: t, x, y, empirical: a, limit: l }, b));
            }
        }
        per_n.push(DoppelgangerLevel { n, rectangle_dev: rd, parallelogram_dev: pd, mutual_dev: md });
    }
    Ok(DoppelgangerReport { beta, alpha, per_n, points })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InversionLevel {
    pub n: usize,
    pub exact: bool,
    /// Exact expectation as `numerator / denominator` when enumerated.
    pub numerator: Option<u64>,
    pub denominator: Option<u64>,
    pub mean_length: f64,
    pub mean_ratio: f64,
    pub std_ratio: f64,
    pub ratios: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InversionReport {
    pub per_n: Vec<InversionLevel>,
}

impl Report for InversionReport {
    fn csv(&self) -> String {
        let mut out = String::from("n,trial,ratio\n");
        for l in self.per_n.iter().filter(|l| !l.exact) {
            for (t, r) in l.ratios.iter().enumerate() {
                let _ = writeln!(out, "{},{t},{}", l.n, sig12(*r));
            }
        }
        out
    }
}

/// Sum of `len(u * v)` over all pairs in `S_n`, and the number of pairs.
pub fn exact_product_length(n: usize) -> Result<(u64, u64)> {
    if n == 0 || n > EXACT_MAX_N {
        return arg(format!("exact enumeration supports 1 <= n <= {EXACT_MAX_N}"));
    }
    let all = all_permutations(n);
    let mut total = 0;
    for u in &all {
        for v in &all {
            total += inversions(&demazure_product(u, v)?);
        }
    }
    Ok((total, (all.len() * all.len()) as u64))
}

/// Expected length of the Demazure product of two uniform permutations,
/// relative to `binom(n, 2)`.
pub fn inversion_experiment(cfg: &ExperimentConfig) -> Result<InversionReport> {
    cfg.validate()?;
    let mut per_n = Vec::new();
    for (ni, &n) in cfg.ns.iter().enumerate() {
        let pairs = binomial(n as u64, 2) as f64;
        if n <= EXACT_MAX_N {
            let (num, den) = exact_product_length(n)?;
            let m = num as f64 / den as f64;
            per_n.push(InversionLevel {
                n,
                exact: true,
                numerator: Some(num),
                denominator: Some(den),
                mean_length: m,
                mean_ratio: m / pairs,
                std_ratio: 0.0,
                ratios: Vec::new(),
            });
            continue;
        }
        let ratios: Vec<f64> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(cfg.seed, ni, t);
                let (u, v) = (random_permutation(n, &mut rng), random_permutation(n, &mut rng));
                Ok(inversions(&demazure_product(&u, &v)?) as f64 / pairs)
            })
            .collect::<Result<_>>()?;
        per_n.push(InversionLevel {
            n,
            exact: false,
            numerator: None,
            denominator: None,
            mean_length: mean(&ratios) * pairs,
            mean_ratio: mean(&ratios),
            std_ratio: std_dev(&ratios),
            ratios,
        });
    }
    Ok(InversionReport { per_n })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatternLevel {
    pub n: usize,
    pub exact: bool,
    /// Mean density of each pattern of size `k`, lexicographic order.
    pub densities: Vec<(String, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PatternReport {
    pub k: usize,
    pub per_n: Vec<PatternLevel>,
}

impl Report for PatternReport {
    fn csv(&self) -> String {
        let mut out = String::from("n,pattern,density\n");
        for l in &self.per_n {
            for (w, d) in &l.densities {
                let _ = writeln!(out, "{},{w},{}", l.n, sig12(*d));
            }
        }
        out
    }
}

fn compact(u: &Permutation) -> String {
    u.values().iter().map(|v| v.to_string()).collect()
}

/// Pattern densities of the Demazure product of two uniform permutations.
pub fn pattern_experiment(cfg: &ExperimentConfig) -> Result<PatternReport> {
    cfg.validate()?;
    let k = cfg.k;
    let names: Vec<String> = all_permutations(k).iter().map(compact).collect();
    let mut per_n = Vec::new();
    for (ni, &n) in cfg.ns.iter().enumerate() {
        let total = binomial(n as u64, k as u64) as f64;
        let density = |u: &Permutation, v: &Permutation| -> Result<Vec<f64>> {
            Ok(pattern_counts(&demazure_product(u, v)?, k)?.iter().map(|&c| c as f64 / total).collect())
        };
        let (exact, rows) = if n <= EXACT_MAX_N {
            let all = all_permutations(n);
            let rows = all.iter().flat_map(|u| all.iter().map(move |v| (u, v))).map(|(u, v)| density(u, v)).collect::<Result<Vec<_>>>()?;
            (true, rows)
        } else {
            let rows = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(cfg.seed, ni, t);
                    let (u, v) = (random_permutation(n, &mut rng), random_permutation(n, &mut rng));
                    density(&u, &v)
                })
                .collect::<Result<Vec<_>>>()?;
            (false, rows)
        };
        let densities = names.iter().enumerate().map(|(i, w)| (w.clone(), mean(&rows.iter().map(|r| r[i]).collect::<Vec<_>>()))).collect();
        per_n.push(PatternLevel { n, exact, densities });
    }
    Ok(PatternReport { k, per_n })
}

/// One run of the memory model: relevance factors, the forgotten factors, and
/// the permutations before and after the rectangle of `tau` words.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MemoryTrace {
    pub n: usize,
    pub k: usize,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    pub w0: Permutation,
    pub w_final: Permutation,
}

impl MemoryTrace {
    /// Whether the fact forgotten on day `j` has the rank `w_final(n + 1 - j)`.
    pub fn coupling_holds(&self) -> bool {
        let mut sorted = self.q.clone();
        sorted.sort_by(f64::total_cmp);
        let rank = |v: f64| sorted.partition_point(|&s| s < v) as u32 + 1;
        self.r.iter().enumerate().all(|(j, &r)| rank(r) == self.w_final.at(self.n - j))
    }
}

/// Simulates the memory directly and through the `tau` words
/// `v_i = (n-i-k+1, ..., n-i)` applied to the relative order of
/// `q_n, ..., q_1`.
pub fn memory_trace(q: &[f64], k: usize) -> Result<MemoryTrace> {
    let n = q.len();
    if k < 1 || k >= n {
        return arg(format!("memory size {k} must lie in 1..{n}"));
    }
    let mut sorted: Vec<f64> = q.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return arg("relevance factors must be distinct");
    }
    let rank = |v: f64| sorted.partition_point(|&s| s < v) as u32 + 1;

    let mut memory: BinaryHeap<Reverse<u32>> = q[..k].iter().map(|&v| Reverse(rank(v))).collect();
    let mut r = Vec::with_capacity(n - k);
    for &v in &q[k..] {
        memory.push(Reverse(rank(v)));
        let Reverse(gone) = memory.pop().expect("memory is never empty");
        r.push(sorted[gone as usize - 1]);
    }

    let w0 = Permutation::new((1..=n).map(|i| rank(q[n - i])).collect())?;
    let mut w = w0.values().to_vec();
    for i in 1..=n - k {
        for letter in (n - i - k + 1)..=(n - i) {
            tau_in_place(&mut w, letter);
        }
    }
    Ok(MemoryTrace { n, k, q: q.to_vec(), r, w0, w_final: Permutation::new(w)? })
}

/// The word `v_1 v_2 ... v_{n-k}` of the memory model.
pub fn memory_word(n: usize, k: usize) -> Result<Word> {
    if k < 1 || k >= n {
        return arg(format!("memory size {k} must lie in 1..{n}"));
    }
    let letters = (1..=n - k).flat_map(|i| ((n - i - k + 1) as u32)..=((n - i) as u32)).collect();
    Word::new(n, letters)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoryLevel {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub coupling_failures: usize,
    /// Largest height deviation of `w_final` from the rectangle limit.
    pub max_dev: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DoryReport {
    pub beta: f64,
    pub all_coupled: bool,
    pub per_n: Vec<DoryLevel>,
    #[serde(skip)]
    pub forgotten: Vec<(usize, usize, usize, f64)>,
}

impl Report for DoryReport {
    fn csv(&self) -> String {
        let mut out = String::from("n,trial,day,x,r\n");
        for &(n, t, j, r) in &self.forgotten {
            let x = 1.0 - (j as f64 - 1.0) / n as f64;
            let _ = writeln!(out, "{n},{t},{j},{},{}", sig12(x), sig12(r));
        }
        out
    }
}

pub fn dory_experiment(cfg: &ExperimentConfig) -> Result<DoryReport> {
    cfg.validate()?;
    let beta = cfg.beta;
    if !(beta > 0.0 && beta < 1.0) {
        return arg("beta must lie in (0, 1)");
    }
    let pts = cfg.interior_points();
    let alpha = beta * (1.0 - beta);
    let trials = run_trials(cfg, |n, rng| {
        let k = ((1.0 - beta) * n as f64).floor() as usize;
        let q: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        memory_trace(&q, k)
    })?;
    let mut per_n = Vec::new();
    let mut forgotten = Vec::new();
    for (&n, traces) in cfg.ns.iter().zip(&trials) {
        let failures = traces.iter().filter(|t| !t.coupling_holds()).count();
        let mut max_dev = 0f64;
        for (t, tr) in traces.iter().enumerate() {
            for &(x, y) in &pts {
                max_dev = max_dev.max((tr.w_final.height(x, y) - nu_height(alpha, beta, x, y)?).abs());
            }
            forgotten.extend(tr.r.iter().enumerate().map(|(j, &r)| (n, t, j + 1, r)));
        }
        let k = traces.first().map_or(0, |t| t.k);
        per_n.push(DoryLevel { n, k, trials: traces.len(), coupling_failures: failures, max_dev });
    }
    let all_coupled = per_n.iter().all(|l| l.coupling_failures == 0);
    Ok(DoryReport { beta, all_coupled, per_n, forgotten })
}

/// Rectangle piece at size `n`.
pub fn piece_shape(piece: &Piece, n: usize) -> Result<Shape> {
    let (h, w) = rectangle_dims(piece.beta, n)?;
    let (sw, ne) = rectangle_paths(h, w);
    let d = (piece.offset * n as f64).round() as i64;
    shape_from_paths(&sw.translate(d), &ne.translate(d))
}

/// Column-wise lowest and highest `y` of a shape.
fn column_extent(s: &Shape) -> Vec<(i64, i64, i64)> {
    s.columns().map(|(x, runs)| (x, x - runs[runs.len() - 1].1, x - runs[0].0)).collect()
}

/// Checks that no box of an earlier piece lies weakly northeast of a box of a
/// later piece.
pub fn check_piece_order(pieces: &[Shape]) -> Result<()> {
    for (j, later) in pieces.iter().enumerate() {
        let ext = column_extent(later);
        let mut prefix_min = Vec::with_capacity(ext.len());
        let mut lo = i64::MAX;
        for &(x, ymin, _) in &ext {
            lo = lo.min(ymin);
            prefix_min.push((x, lo));
        }
        for (i, earlier) in pieces[..j].iter().enumerate() {
            for (x, _, ymax) in column_extent(earlier) {
                let k = prefix_min.partition_point(|&(px, _)| px <= x);
                if k > 0 && prefix_min[k - 1].1 <= ymax {
                    return arg(format!("piece {} has a box northeast of a box in piece {}", i + 1, j + 1));
                }
            }
        }
    }
    Ok(())
}

/// Union of pieces at size `n`, checked for the ordering condition.
pub fn composite_shape(pieces: &[Piece], n: usize) -> Result<Shape> {
    if pieces.is_empty() {
        return arg("a composite shape needs at least one piece");
    }
    let shapes = pieces.iter().map(|p| piece_shape(p, n)).collect::<Result<Vec<_>>>()?;
    check_piece_order(&shapes)?;
    let mut boxes: Vec<LatticeBox> = shapes.iter().flat_map(|s| s.iter_canonical()).collect();
    boxes.sort();
    if boxes.windows(2).any(|w| w[0] == w[1]) {
        return arg("pieces overlap");
    }
    Shape::from_boxes(n, boxes)
}

/// Limit of `Delta_p` over the union: the min-plus product of the pieces'
/// limits in order.
pub fn composite_limit(pieces: &[Piece], p: f64) -> Result<AnalyticPermuton> {
    let factors = pieces
        .iter()
        .map(|pc| Ok(AnalyticPermuton::PipedreamLimit { pair: BoundaryPair::peridot(pc.beta)?, p }))
        .collect::<Result<Vec<_>>>()?;
    Ok(AnalyticPermuton::StarProduct(factors))
}

#[derive(Clone, Debug, Serialize)]
pub struct CompositeReport {
    pub pieces: Vec<Piece>,
    pub p: f64,
    pub resolution: usize,
    pub golden_boxes: Vec<usize>,
    pub max_dev: f64,
    pub mean_dev: f64,
    pub per_n: Vec<DeviationSummary>,
    #[serde(skip)]
    pub points: Vec<PointDeviation>,
}

impl Report for CompositeReport {
    fn csv(&self) -> String {
        deviation_csv(&self.points)
    }
}

/// `Delta_p` over the completed union of rectangle pieces against the star
/// product of the pieces' limit height grids.
pub fn composite_shape_experiment(cfg: &ExperimentConfig) -> Result<CompositeReport> {
    cfg.validate()?;
    let res = cfg.resolution;
    if res < 1 {
        return arg("resolution must be positive");
    }
    let limit = composite_limit(&cfg.pieces, cfg.p)?;
    limit.validate()?;
    let mut shapes = BTreeMap::new();
    let mut golden = Vec::new();
    for &n in &cfg.ns {
        let c = CompletedShape::new(&composite_shape(&cfg.pieces, n)?);
        golden.push(c.gold().iter().filter(|&&g| g).count());
        shapes.insert(n, c);
    }
    let grid = limit.to_grid(res, res as i64 * (1 << 24))?;
    let pts = cfg.interior_points();
    let trials = run_trials(cfg, |n, rng| shapes[&n].demazure_sample(cfg.p, rng))?;
    let mut points = Vec::new();
    let mut per_n = Vec::new();
    for (&n, us) in cfg.ns.iter().zip(&trials) {
        let devs: Vec<PointDeviation> =
            us.iter().enumerate().flat_map(|(t, u)| compare(n, t, u, &pts, |x, y| grid.eval(x, y))).collect();
        per_n.push(summarize(n, &devs));
        points.extend(devs);
    }
    let (max_dev, mean_dev) = grand(&per_n);
    Ok(CompositeReport { pieces: cfg.pieces.clone(), p: cfg.p, resolution: res, golden_boxes: golden, max_dev, mean_dev, per_n, points })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HydrodynamicLevel {
    pub l: usize,
    pub particle: usize,
    pub steps: usize,
    pub mean: f64,
    pub std: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HydrodynamicReport {
    pub p: f64,
    pub m: f64,
    pub t: f64,
    pub limit: f64,
    pub per_l: Vec<HydrodynamicLevel>,
    #[serde(skip)]
    pub samples: Vec<(usize, usize, f64)>,
}

impl Report for HydrodynamicReport {
    fn csv(&self) -> String {
        let mut out = String::from("l,trial,scaled_displacement\n");
        for (l, t, v) in &self.samples {
            let _ = writeln!(out, "{l},{t},{}", sig12(*v));
        }
        out
    }
}

/// `L^{-1}` times the displacement of particle `floor(L m)` after
/// `floor(L t)` steps from step initial conditions, for each `L` in `ns`.
pub fn hydrodynamic_experiment(cfg: &ExperimentConfig) -> Result<HydrodynamicReport> {
    cfg.validate()?;
    let g = GeomParam::new(cfg.p)?;
    let limit = c_p(cfg.p, cfg.m, cfg.t)?;
    let trials = run_trials(cfg, |l, rng| {
        let k = (l as f64 * cfg.m).floor() as usize;
        let steps = (l as f64 * cfg.t).floor() as usize;
        if k < 1 {
            return arg(format!("L m = {} leaves no particle", l as f64 * cfg.m));
        }
        let mut s = TasepState::step_initial(k);
        for _ in 0..steps {
            s.step(g, rng, None);
        }
        Ok(s.displacement(k) as f64 / l as f64)
    })?;
    let mut per_l = Vec::new();
    let mut samples = Vec::new();
    for (&l, vals) in cfg.ns.iter().zip(&trials) {
        let m = mean(vals);
        per_l.push(HydrodynamicLevel {
            l,
            particle: (l as f64 * cfg.m).floor() as usize,
            steps: (l as f64 * cfg.t).floor() as usize,
            mean: m,
            std: std_dev(vals),
            deviation: (m - limit).abs(),
        });
        samples.extend(vals.iter().enumerate().map(|(t, &v)| (l, t, v)));
    }
    Ok(HydrodynamicReport { p: cfg.p, m: cfg.m, t: cfg.t, limit, per_l, samples })
}

/// Runs an experiment by name and returns its JSON summary and CSV detail.
pub fn run_experiment(name: &str, cfg: &ExperimentConfig) -> Result<(serde_json::Value, String)> {
    fn out<R: Report>(r: R) -> Result<(serde_json::Value, String)> {
        let mut v = serde_json::to_value(&r).expect("reports serialize");
        round_json(&mut v);
        Ok((v, r.csv()))
    }
    match name {
        "convergence" => out(convergence_experiment(cfg)?),
        "fluctuation" => out(fluctuation_experiment(cfg)?),
        "bubble" => out(bubble_experiment(cfg)?),
        "doppelganger" => out(doppelganger_experiment(cfg)?),
        "inversion" => out(inversion_experiment(cfg)?),
        "pattern" => out(pattern_experiment(cfg)?),
        "dory" => out(dory_experiment(cfg)?),
        "composite" => out(composite_shape_experiment(cfg)?),
        "hydrodynamic" => out(hydrodynamic_experiment(cfg)?),
        other => arg(format!("unknown experiment {other:?}; expected one of {}", EXPERIMENTS.join(", "))),
    }
}

/// Applies `fold_word` of the memory word to `w0`; equals the final state of
/// [`memory_trace`].
pub fn memory_fold(w0: &Permutation, k: usize) -> Result<Permutation> {
    fold_word(w0, &memory_word(w0.n(), k)?)
}

/// Height grid of a permutation, re-exported for report consumers.
pub fn empirical_grid(u: &Permutation) -> crate::hecke::HeightGrid {
    height_grid(u)
}
