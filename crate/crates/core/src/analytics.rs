//! Closed-form limit permutons, region classification, the min-plus product
//! of height grids, rotation, and sampling permutations from a permuton.

use num_integer::Integer;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, domain, Error, Result};
use crate::hecke::{HeightGrid, Permutation};
use crate::rng;
use crate::shapes::{theta_of_path, BoundaryFunction, LatticePath};
use crate::tasep::cp_unchecked;

/// Largest resolution `common_refinement` will produce by default.
pub const DEFAULT_MAX_RESOLUTION: usize = 2048;

/// Resolution of the grid used to sample from closed-form permutons.
pub const SAMPLE_RESOLUTION: usize = 512;

/// Number of points in the coarse search of an analytic min-plus product.
pub const STAR_GRID_POINTS: usize = 2001;

/// Pair `phi <= psi` bounding a limit shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PairRepr", into = "PairRepr")]
pub struct BoundaryPair {
    phi: BoundaryFunction,
    psi: BoundaryFunction,
}

#[derive(Serialize, Deserialize)]
struct PairRepr {
    phi: BoundaryFunction,
    psi: BoundaryFunction,
}

impl TryFrom<PairRepr> for BoundaryPair {
    type Error = Error;

    fn try_from(r: PairRepr) -> Result<Self> {
        BoundaryPair::new(r.phi, r.psi)
    }
}

impl From<BoundaryPair> for PairRepr {
    fn from(b: BoundaryPair) -> Self {
        PairRepr { phi: b.phi, psi: b.psi }
    }
}

impl BoundaryPair {
    pub fn new(phi: BoundaryFunction, psi: BoundaryFunction) -> Result<Self> {
        let zs = phi.breakpoints().iter().chain(psi.breakpoints()).map(|b| b.0);
        for z in zs {
            if phi.eval(z) > psi.eval(z) + 1e-12 {
                return arg(format!("phi exceeds psi at z = {z}"));
            }
        }
        Ok(Self { phi, psi })
    }

    /// `phi = 0`, `psi(z) = z`.
    pub fn staircase() -> Self {
        Self { phi: BoundaryFunction::linear(0.0, 0.0).unwrap(), psi: BoundaryFunction::linear(1.0, 0.0).unwrap() }
    }

    /// Rectangle of height `1 - beta` and width `beta`.
    pub fn peridot(beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return arg(format!("beta = {beta} outside [0, 1]"));
        }
        let corner = |pts: [(f64, f64); 3]| {
            let mut v = pts.to_vec();
            v.dedup_by(|b, a| b.0 == a.0);
            BoundaryFunction::new(v)
        };
        let phi = corner([(0.0, 0.0), (1.0 - beta, 0.0), (1.0, beta)])?;
        let psi = corner([(0.0, 0.0), (beta, beta), (1.0, beta)])?;
        Self::new(phi, psi)
    }

    /// `phi(z) = alpha z`, `psi(z) = beta z + r`.
    pub fn trapezoid(alpha: f64, beta: f64, r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
            return arg("trapezoid slopes must lie in [0, 1]");
        }
        if !(r >= 0.0 && r >= alpha - beta) {
            return arg(format!("trapezoid offset {r} below max(0, alpha - beta)"));
        }
        Self::new(BoundaryFunction::linear(alpha, 0.0)?, BoundaryFunction::linear(beta, r)?)
    }

    /// `phi(z) = beta z`, `psi(z) = beta z + alpha`.
    pub fn parallelogram(alpha: f64, beta: f64) -> Result<Self> {
        Self::trapezoid(beta, beta, alpha)
    }

    pub fn from_paths(sw: &LatticePath, ne: &LatticePath) -> Result<Self> {
        if sw.n() != ne.n() || sw.start() != 0 {
            return arg("paths must have equal length and the southwest path must start at the origin");
        }
        Self::new(theta_of_path(sw), theta_of_path(ne))
    }

    pub fn phi(&self) -> &BoundaryFunction {
        &self.phi
    }

    pub fn psi(&self) -> &BoundaryFunction {
        &self.psi
    }

    /// `psi(x) - phi(y)`.
    pub fn spread(&self, x: f64, y: f64) -> f64 {
        self.psi.eval(x) - self.phi.eval(y)
    }

    /// Boundary pair of the region reflected through the line of content 1/2,
    /// translated back to start at the origin. Its limit is the 180-degree
    /// rotation of this pair's limit.
    pub fn rotated(&self) -> Self {
        let shift = self.phi.eval(1.0);
        let flip = |f: &BoundaryFunction| {
            let pts = f.breakpoints().iter().rev().map(|&(z, t)| (1.0 - z, t - shift + 1.0 - z)).collect();
            BoundaryFunction::new(pts).expect("reflection keeps slopes in [0, 1]")
        };
        Self { phi: flip(&self.phi), psi: flip(&self.psi) }
    }
}

fn check_p_closed(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return domain(format!("p = {p} outside (0, 1]"));
    }
    Ok(())
}

fn f_raw(d: f64, p: f64, x: f64, y: f64) -> Option<f64> {
    if p == 1.0 {
        return Some(d + y - x);
    }
    let rad = (1.0 - p) * d * (d - x + y);
    if rad < 0.0 {
        return None;
    }
    Some(((2.0 - p) * d + y - x - 2.0 * rad.sqrt()) / p)
}

/// The interior solution of the height equation, or a domain error where its
/// radicand is negative.
pub fn f_p(bp: &BoundaryPair, p: f64, x: f64, y: f64) -> Result<f64> {
    check_p_closed(p)?;
    let d = bp.spread(x, y);
    f_raw(d, p, x, y).ok_or_else(|| Error::Domain(format!("negative radicand at ({x}, {y})")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    K,
    PSe,
    PNw,
    PSw,
    PNe,
}

impl RegionLabel {
    pub fn name(self) -> &'static str {
        match self {
            RegionLabel::K => "K",
            RegionLabel::PSe => "P_se",
            RegionLabel::PNw => "P_nw",
            RegionLabel::PSw => "P_sw",
            RegionLabel::PNe => "P_ne",
        }
    }
}

/// `c_p` extended to `p = 1`, where it jumps from 0 to infinity at `b = a`.
fn cp_ext(p: f64, a: f64, b: f64) -> f64 {
    if p < 1.0 {
        cp_unchecked(p, a.max(0.0), b.max(0.0))
    } else if b > a {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Membership in the four P-regions, in the order `[se, nw, sw, ne]`.
pub fn p_regions(bp: &BoundaryPair, p: f64, x: f64, y: f64) -> [bool; 4] {
    let d = bp.spread(x, y);
    let se = p * d <= x - y;
    let nw = p < 1.0 && p * d / (1.0 - p) <= y - x;
    let sw = cp_ext(p, x, d) >= y;
    let ne = cp_ext(p, 1.0 - y, d) >= 1.0 - x;
    [se, nw, sw, ne]
}

/// First matching P-region in the order `P_se, P_nw, P_sw, P_ne`.
pub fn p_label(bp: &BoundaryPair, p: f64, x: f64, y: f64) -> Option<RegionLabel> {
    const LABELS: [RegionLabel; 4] = [RegionLabel::PSe, RegionLabel::PNw, RegionLabel::PSw, RegionLabel::PNe];
    p_regions(bp, p, x, y).iter().position(|&b| b).map(|k| LABELS[k])
}

/// Strict interior condition `max(0, y-x) < f < min(1-x, y)`, where `f` must
/// also be the root that solves `c_p(x - y + f, psi(x) - phi(y)) = f` rather
/// than the spurious root introduced by squaring.
pub fn in_k(bp: &BoundaryPair, p: f64, x: f64, y: f64) -> bool {
    let d = bp.spread(x, y);
    let Some(f) = f_raw(d, p, x, y) else { return false };
    if !(0f64.max(y - x) < f && f < (1.0 - x).min(y)) {
        return false;
    }
    p == 1.0 || (cp_unchecked(p, x - y + f, d) - f).abs() <= 1e-9 * f.max(1e-3)
}

pub fn classify_region(bp: &BoundaryPair, p: f64, x: f64, y: f64) -> RegionLabel {
    if in_k(bp, p, x, y) {
        return RegionLabel::K;
    }
    p_label(bp, p, x, y).unwrap_or(RegionLabel::K)
}

/// Distance of `(x, y)` from the nearest defining boundary of the regions, in
/// the units of the defining inequalities.
pub fn region_margin(bp: &BoundaryPair, p: f64, x: f64, y: f64) -> f64 {
    let d = bp.spread(x, y);
    let mut m = (p * d - (x - y)).abs();
    if p < 1.0 {
        m = m
            .min((p * d / (1.0 - p) - (y - x)).abs())
            .min((cp_unchecked(p, x, d.max(0.0)) - y).abs())
            .min((cp_unchecked(p, 1.0 - y, d.max(0.0)) - (1.0 - x)).abs());
    }
    if let Some(f) = f_raw(d, p, x, y) {
        m = m.min((f - 0f64.max(y - x)).abs()).min(((1.0 - x).min(y) - f).abs());
    }
    m
}

fn h_raw(bp: &BoundaryPair, p: f64, x: f64, y: f64) -> f64 {
    let lo = 0f64.max(y - x);
    let hi = (1.0 - x).min(y);
    let d = bp.spread(x, y);
    if p < 1.0 {
        let [se, nw, sw, ne] = p_regions(bp, p, x, y);
        if se || nw {
            return lo.min(hi);
        }
        if f_raw(d, p, x, y).is_none() && (sw || ne) {
            return hi;
        }
    }
    match f_raw(d, p, x, y) {
        Some(f) => lo.max(f).min(hi),
        None => lo.min(hi),
    }
}

/// Limiting height function of the Demazure product of a `p`-random subword
/// of the shape bounded by `bp`.
pub fn h_p(bp: &BoundaryPair, p: f64, x: f64, y: f64) -> Result<f64> {
    check_p_closed(p)?;
    Ok(h_raw(bp, p, x, y))
}

fn check_nu(alpha: f64, beta: f64) -> Result<()> {
    if alpha.is_nan() || alpha <= 0.0 || !(0.0..=1.0).contains(&beta) {
        return arg(format!("need alpha > 0 and beta in [0, 1] (got {alpha}, {beta})"));
    }
    Ok(())
}

fn nu_raw(alpha: f64, beta: f64, x: f64, y: f64) -> f64 {
    if y <= 1.0 - beta {
        let t = if beta == 1.0 { f64::INFINITY } else { alpha / (1.0 - beta) };
        let q = (x - t).max(0.0);
        ((1.0 - q) * y).min(1.0 - x)
    } else {
        y - x + nu_raw(alpha, 1.0 - beta, 1.0 - x, 1.0 - y)
    }
}

/// Height function of the bubble-sort limit for `alpha` passes per site along
/// a Coxeter path of slope `beta`.
pub fn nu_height(alpha: f64, beta: f64, x: f64, y: f64) -> Result<f64> {
    check_nu(alpha, beta)?;
    Ok(nu_raw(alpha, beta, x, y))
}

/// Direct closed form for the rectangle operator, `alpha = beta (1 - beta)`.
pub fn rectangle_nu_check(beta: f64, x: f64, y: f64) -> f64 {
    if x <= beta {
        y.min((beta - x) * y + 1.0 - beta)
    } else {
        y - x + (1.0 - y).min((x - beta) * (1.0 - y) + beta)
    }
}

/// Support boundary `alpha / (x + alpha)` of classical bubble sort, valid for
/// `x <= 1 - alpha`.
pub fn bubble_boundary(alpha: f64, x: f64) -> f64 {
    alpha / (x + alpha)
}

/// Tangency points, degeneration threshold and conic residuals for a
/// trapezoid `phi(z) = alpha z`, `psi(z) = beta z + r`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolyphemusGeometry {
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub r: f64,
    /// Tangency with the y-axis and the x-axis.
    pub tangent_sw: [(f64, f64); 2],
    /// Tangency with the lines `x = 1` and `y = 1`.
    pub tangent_ne: [(f64, f64); 2],
    /// For `r` at or above this value the limit is the anti-diagonal.
    pub threshold: f64,
}

pub const CONIC_TOL: f64 = 1e-9;

impl PolyphemusGeometry {
    pub fn residual_sw(&self, x: f64, y: f64) -> f64 {
        let (p, a, b, r) = (self.p, self.alpha, self.beta, self.r);
        let l = x - y + p * (b * x + (1.0 - a) * y + r);
        l * l - 4.0 * p * x * (b * x - a * y + r)
    }

    pub fn residual_ne(&self, x: f64, y: f64) -> f64 {
        let (p, a, b, r) = (self.p, self.alpha, self.beta, self.r);
        let l = x - y + p * (1.0 + r - (1.0 - b) * x - a * y);
        l * l - 4.0 * p * (1.0 - y) * (b * x - a * y + r)
    }

    pub fn on_conic_sw(&self, x: f64, y: f64) -> bool {
        self.residual_sw(x, y).abs() <= CONIC_TOL
    }

    pub fn on_conic_ne(&self, x: f64, y: f64) -> bool {
        self.residual_ne(x, y).abs() <= CONIC_TOL
    }

    pub fn degenerate_sw(&self) -> bool {
        self.tangent_sw[0] == self.tangent_sw[1]
    }

    pub fn degenerate_ne(&self) -> bool {
        let [a, b] = self.tangent_ne;
        (a.0 - b.0).abs() <= 1e-12 && (a.1 - b.1).abs() <= 1e-12
    }

    pub fn antidiagonal_regime(&self) -> bool {
        self.r >= self.threshold
    }
}

pub fn polyphemus_geometry(p: f64, alpha: f64, beta: f64, r: f64) -> Result<PolyphemusGeometry> {
    if !(p > 0.0 && p < 1.0) {
        return arg(format!("p = {p} outside (0, 1)"));
    }
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
        return arg("alpha and beta must lie in [0, 1]");
    }
    if !(r >= 0.0 && r >= alpha - beta) {
        return arg(format!("r = {r} below max(0, alpha - beta)"));
    }
    let tangent_sw = [(0.0, p * r / (1.0 - p * (1.0 - alpha))), (p * r / (1.0 - p * beta), 0.0)];
    let tangent_ne = [
        (1.0, (1.0 - p * beta - p * r) / (1.0 - p * alpha)),
        ((1.0 - p * (1.0 - alpha) - p * r) / (1.0 - p * (1.0 - beta)), 1.0),
    ];
    let s = 1.0 - alpha - beta;
    let threshold = (2.0 - (1.0 - alpha + beta) * p + (s * s * p * p + 4.0 * (1.0 - p)).sqrt()) / (2.0 * p);
    Ok(PolyphemusGeometry { p, alpha, beta, r, tangent_sw, tangent_ne, threshold })
}

/// Point of the northwest boundary of `P_se` above `x`, i.e. the root in `y`
/// of `x - y = p (psi(x) - phi(y))`, if it lies inside `[0, 1]`.
pub fn pse_boundary(bp: &BoundaryPair, p: f64, x: f64) -> Option<f64> {
    let g = |y: f64| x - y - p * bp.spread(x, y);
    let (mut lo, mut hi) = (0.0, 1.0);
    if g(lo) < 0.0 || g(hi) > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Traces the `P_se` boundary at `samples` equally spaced abscissae.
pub fn trace_pse_boundary(bp: &BoundaryPair, p: f64, samples: usize) -> Vec<(f64, f64)> {
    (0..=samples)
        .filter_map(|k| {
            let x = k as f64 / samples as f64;
            pse_boundary(bp, p, x).map(|y| (x, y))
        })
        .collect()
}

/// A straight piece of a traced curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub slope: f64,
    pub from: (f64, f64),
    pub to: (f64, f64),
}

/// Groups consecutive chords of a polyline whose slopes agree within `tol`.
/// Chords that straddle a corner form singleton groups and are dropped.
pub fn straight_segments(points: &[(f64, f64)], tol: f64) -> Vec<Segment> {
    let mut out: Vec<(Segment, usize)> = Vec::new();
    for w in points.windows(2) {
        let s = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        match out.last_mut() {
            Some((seg, k)) if (seg.slope - s).abs() <= tol => {
                seg.to = w[1];
                *k += 1;
            }
            _ => out.push((Segment { slope: s, from: w[0], to: w[1] }, 1)),
        }
    }
    out.into_iter().filter(|(_, k)| *k >= 2).map(|(s, _)| s).collect()
}

/// Min-plus product `C[i][j] = min_g A[g][j] + B[i][g]`, i.e. the height grid
/// of the Demazure product when `A` and `B` are grids of permutations.
pub fn star(a: &HeightGrid, b: &HeightGrid) -> Result<HeightGrid> {
    if a.n() != b.n() {
        return arg(format!("resolutions {} and {} differ; refine first", a.n(), b.n()));
    }
    let d = a.denom().lcm(&b.denom());
    let (a, b) = (a.with_denom(d)?, b.with_denom(d)?);
    let m = a.n() + 1;
    let mut at = vec![0i64; m * m];
    for g in 0..m {
        for j in 0..m {
            at[j * m + g] = a.get(g, j);
        }
    }
    let mut counts = vec![0i64; m * m];
    counts.par_chunks_mut(m).enumerate().for_each(|(i, out)| {
        let brow = b.row(i);
        for (j, c) in out.iter_mut().enumerate() {
            let acol = &at[j * m..(j + 1) * m];
            *c = acol.iter().zip(brow).map(|(x, y)| x + y).min().unwrap();
        }
    });
    HeightGrid::from_counts(a.n(), d, counts)
}

/// Exact bilinear refinement by an integer factor.
pub fn refine(g: &HeightGrid, factor: usize) -> Result<HeightGrid> {
    if factor == 0 {
        return arg("refinement factor must be positive");
    }
    if factor == 1 {
        return Ok(g.clone());
    }
    let (n, r) = (g.n(), factor as i64);
    let big = n * factor;
    let at = |i: usize, j: usize| if i > n || j > n { 0 } else { g.get(i, j) };
    let counts = HeightGrid::from_fn(big, g.denom() * r * r, |ii, jj| {
        let (i, a) = (ii / factor, (ii % factor) as i64);
        let (j, b) = (jj / factor, (jj % factor) as i64);
        (r - a) * (r - b) * at(i, j) + a * (r - b) * at(i + 1, j) + (r - a) * b * at(i, j + 1) + a * b * at(i + 1, j + 1)
    });
    Ok(counts)
}

pub fn common_refinement(a: &HeightGrid, b: &HeightGrid) -> Result<(HeightGrid, HeightGrid)> {
    common_refinement_capped(a, b, DEFAULT_MAX_RESOLUTION)
}

/// Resamples both grids onto resolution `lcm(a.n, b.n)`.
pub fn common_refinement_capped(a: &HeightGrid, b: &HeightGrid, cap: usize) -> Result<(HeightGrid, HeightGrid)> {
    let n = a.n().lcm(&b.n());
    if n > cap {
        return Err(Error::Config(format!("common resolution {n} exceeds the cap {cap}")));
    }
    Ok((refine(a, n / a.n())?, refine(b, n / b.n())?))
}

/// `c[i][j] = (n - i) j` over `n^2`: the uniform measure, exact at grid points.
pub fn uniform_grid(n: usize) -> HeightGrid {
    let nn = n as i64;
    HeightGrid::from_fn(n, nn * nn, |i, j| (nn - i as i64) * j as i64)
}

/// 180-degree rotation `H'(x, y) = y - x + H(1 - x, 1 - y)`.
pub fn rotate_grid(g: &HeightGrid) -> HeightGrid {
    let n = g.n();
    let d = g.denom().lcm(&(n as i64));
    let g = g.with_denom(d).expect("lcm is a multiple");
    let step = d / n as i64;
    HeightGrid::from_fn(n, d, |i, j| (j as i64 - i as i64) * step + g.get(n - i, n - j))
}

/// Evaluates `min_g a(g, y) + b(x, g)` by a coarse search followed by a
/// ternary refinement around the best grid point.
pub fn star_eval(a: impl Fn(f64, f64) -> f64, b: impl Fn(f64, f64) -> f64, x: f64, y: f64) -> f64 {
    let g = |t: f64| a(t, y) + b(x, t);
    let m = STAR_GRID_POINTS - 1;
    let (mut best, mut k) = (f64::INFINITY, 0);
    for i in 0..=m {
        let v = g(i as f64 / m as f64);
        if v < best {
            best = v;
            k = i;
        }
    }
    let (mut lo, mut hi) = (k.saturating_sub(1) as f64 / m as f64, (k + 1).min(m) as f64 / m as f64);
    for _ in 0..60 {
        let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
        if g(m1) <= g(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best.min(g(0.5 * (lo + hi)))
}

/// A permuton given by a closed-form or tabulated height function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum AnalyticPermuton {
    Uniform,
    Identity,
    AntiDiagonal,
    GridBacked(HeightGrid),
    PipedreamLimit { pair: BoundaryPair, p: f64 },
    BubbleNu { alpha: f64, beta: f64 },
    StarProduct(Vec<AnalyticPermuton>),
}

impl AnalyticPermuton {
    pub fn validate(&self) -> Result<()> {
        match self {
            AnalyticPermuton::PipedreamLimit { p, .. } => check_p_closed(*p),
            AnalyticPermuton::BubbleNu { alpha, beta } => check_nu(*alpha, *beta),
            AnalyticPermuton::StarProduct(v) if v.is_empty() => arg("a star product needs at least one factor"),
            AnalyticPermuton::StarProduct(v) => v.iter().try_for_each(Self::validate),
            AnalyticPermuton::GridBacked(g) => g.validate(),
            _ => Ok(()),
        }
    }

    pub fn height(&self, x: f64, y: f64) -> f64 {
        let (x, y) = (x.clamp(0.0, 1.0), y.clamp(0.0, 1.0));
        match self {
            AnalyticPermuton::Uniform => (1.0 - x) * y,
            AnalyticPermuton::Identity => (y - x).max(0.0),
            AnalyticPermuton::AntiDiagonal => y.min(1.0 - x),
            AnalyticPermuton::GridBacked(g) => g.eval(x, y),
            AnalyticPermuton::PipedreamLimit { pair, p } => h_raw(pair, *p, x, y),
            AnalyticPermuton::BubbleNu { alpha, beta } => nu_raw(*alpha, *beta, x, y),
            AnalyticPermuton::StarProduct(v) => match v.split_last() {
                None => (y - x).max(0.0),
                Some((last, [])) => last.height(x, y),
                Some((last, init)) => {
                    let head = AnalyticPermuton::StarProduct(init.to_vec());
                    star_eval(|g, y| head.height(g, y), |x, g| last.height(x, g), x, y)
                }
            },
        }
    }

    /// Tabulates the height function with values rounded to multiples of
    /// `1/denom`. Star products are tabulated factor by factor and combined
    /// with the grid min-plus product.
    pub fn to_grid(&self, n: usize, denom: i64) -> Result<HeightGrid> {
        if n == 0 || denom <= 0 {
            return arg("grid needs n >= 1 and a positive denominator");
        }
        match self {
            AnalyticPermuton::GridBacked(g) if g.n() == n && g.denom() == denom => Ok(g.clone()),
            AnalyticPermuton::StarProduct(v) if v.len() > 1 => {
                let mut acc = v[0].to_grid(n, denom)?;
                for f in &v[1..] {
                    acc = star(&acc, &f.to_grid(n, denom)?)?;
                }
                Ok(acc)
            }
            _ => {
                let m = n + 1;
                let counts: Vec<i64> = (0..m * m)
                    .into_par_iter()
                    .map(|k| {
                        let (i, j) = (k / m, k % m);
                        (self.height(i as f64 / n as f64, j as f64 / n as f64) * denom as f64).round() as i64
                    })
                    .collect();
                HeightGrid::from_counts(n, denom, counts)
            }
        }
    }

    /// The permuton turned by 180 degrees.
    pub fn rotated(&self) -> Self {
        match self {
            AnalyticPermuton::Uniform | AnalyticPermuton::Identity | AnalyticPermuton::AntiDiagonal => self.clone(),
            AnalyticPermuton::GridBacked(g) => AnalyticPermuton::GridBacked(rotate_grid(g)),
            AnalyticPermuton::PipedreamLimit { pair, p } => {
                AnalyticPermuton::PipedreamLimit { pair: pair.rotated(), p: *p }
            }
            AnalyticPermuton::BubbleNu { alpha, beta } => AnalyticPermuton::BubbleNu { alpha: *alpha, beta: 1.0 - beta },
            AnalyticPermuton::StarProduct(v) => AnalyticPermuton::StarProduct(v.iter().map(Self::rotated).collect()),
        }
    }
}

/// Relative order of the `y` coordinates after sorting points by `x`.
pub fn permutation_of_points(mut pts: Vec<(f64, f64)>) -> Permutation {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| pts[a].1.total_cmp(&pts[b].1));
    let mut values = vec![0u32; pts.len()];
    for (rank, &i) in idx.iter().enumerate() {
        values[i] = rank as u32 + 1;
    }
    Permutation::new(values).expect("ranks form a permutation")
}

/// Draws `k` points from the measure whose height grid is `g`, uniformly
/// inside cells whose masses are second differences of the grid.
pub fn sample_grid_points<R: Rng + ?Sized>(g: &HeightGrid, k: usize, rng: &mut R) -> Vec<(f64, f64)> {
    let n = g.n();
    let mut cum = Vec::with_capacity(n * n);
    let mut total = 0i64;
    for i in 0..n {
        for j in 0..n {
            let mass = g.get(i, j + 1) - g.get(i, j) - g.get(i + 1, j + 1) + g.get(i + 1, j);
            total += mass.max(0);
            cum.push(total);
        }
    }
    (0..k)
        .map(|_| {
            let r = rng.gen_range(0..total);
            let c = cum.partition_point(|&v| v <= r);
            let (i, j) = (c / n, c % n);
            ((i as f64 + rng.gen::<f64>()) / n as f64, (j as f64 + rng.gen::<f64>()) / n as f64)
        })
        .collect()
}

pub fn sample_points<R: Rng + ?Sized>(a: &AnalyticPermuton, k: usize, rng: &mut R) -> Result<Vec<(f64, f64)>> {
    Ok(match a {
        AnalyticPermuton::Uniform => (0..k).map(|_| (rng.gen(), rng.gen())).collect(),
        AnalyticPermuton::Identity => (0..k).map(|_| rng.gen()).map(|u: f64| (u, u)).collect(),
        AnalyticPermuton::AntiDiagonal => (0..k).map(|_| rng.gen()).map(|u: f64| (u, 1.0 - u)).collect(),
        AnalyticPermuton::GridBacked(g) => sample_grid_points(g, k, rng),
        other => {
            let denom = (SAMPLE_RESOLUTION as i64) << 20;
            sample_grid_points(&other.to_grid(SAMPLE_RESOLUTION, denom)?, k, rng)
        }
    })
}

/// A `k`-point random permutation drawn from `a`.
pub fn sample_from_permuton(a: &AnalyticPermuton, k: usize, seed: u64) -> Result<Permutation> {
    if k == 0 {
        return arg("k must be at least 1");
    }
    a.validate()?;
    Ok(permutation_of_points(sample_points(a, k, &mut rng::seeded(seed))?))
}
