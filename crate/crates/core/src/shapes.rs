//! Boxes, lattice paths between the diagonals `x - y = 0` and `x - y = n`,
//! piecewise-linear boundary functions, and shapes built from them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::hecke::Word;

/// Unit box with lower-left corner `(x, y)`; its content is `x - y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct LatticeBox {
    pub x: i64,
    pub y: i64,
}

impl LatticeBox {
    pub fn new(x: i64, y: i64) -> Result<Self> {
        if x <= y {
            return arg(format!("box ({x},{y}) has content {} < 1", x - y));
        }
        Ok(Self { x, y })
    }

    pub fn content(&self) -> i64 {
        self.x - self.y
    }
}

impl From<[i64; 2]> for LatticeBox {
    fn from([x, y]: [i64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<LatticeBox> for [i64; 2] {
    fn from(b: LatticeBox) -> Self {
        [b.x, b.y]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    E,
    S,
}

/// A path of unit east/south steps from `(s, s)` on the line of content 0.
///
/// Stored as `xs[c]`, the x-coordinate of the path's point of content `c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PathRepr", into = "PathRepr")]
pub struct LatticePath {
    xs: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct PathRepr {
    start: [i64; 2],
    steps: String,
}

impl TryFrom<PathRepr> for LatticePath {
    type Error = Error;

    fn try_from(r: PathRepr) -> Result<Self> {
        if r.start[0] != r.start[1] {
            return arg(format!("path start {:?} is not on the diagonal", r.start));
        }
        LatticePath::parse(r.start[0], &r.steps)
    }
}

impl From<LatticePath> for PathRepr {
    fn from(p: LatticePath) -> Self {
        PathRepr { start: [p.xs[0], p.xs[0]], steps: p.steps_string() }
    }
}

impl LatticePath {
    pub fn new(start: i64, steps: &[Step]) -> Result<Self> {
        if steps.is_empty() {
            return arg("a lattice path needs at least one step");
        }
        let mut xs = Vec::with_capacity(steps.len() + 1);
        xs.push(start);
        let mut x = start;
        for s in steps {
            x += i64::from(*s == Step::E);
            xs.push(x);
        }
        Ok(Self { xs })
    }

    /// Parses a step string such as `"SSEE"`.
    pub fn parse(start: i64, steps: &str) -> Result<Self> {
        let steps: Option<Vec<Step>> = steps
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c.to_ascii_uppercase() {
                'E' => Some(Step::E),
                'S' => Some(Step::S),
                _ => None,
            })
            .collect();
        match steps {
            Some(s) => Self::new(start, &s),
            None => arg("path steps must be E or S"),
        }
    }

    /// Path through the points of x-coordinate `xs[c]`, `c = 0..=n`.
    pub fn from_xs(xs: Vec<i64>) -> Result<Self> {
        if xs.len() < 2 {
            return arg("a lattice path needs at least one step");
        }
        if xs.windows(2).any(|w| !(0..=1).contains(&(w[1] - w[0]))) {
            return arg("consecutive path points must differ by one E or S step");
        }
        Ok(Self { xs })
    }

    pub fn staircase_sw(n: usize) -> Self {
        Self { xs: vec![0; n + 1] }
    }

    pub fn staircase_ne(n: usize) -> Self {
        Self { xs: (0..=n as i64).collect() }
    }

    pub fn n(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn start(&self) -> i64 {
        self.xs[0]
    }

    /// x-coordinate of the point of content `c`.
    pub fn px(&self, c: usize) -> i64 {
        self.xs[c]
    }

    pub fn xs(&self) -> &[i64] {
        &self.xs
    }

    pub fn point(&self, c: usize) -> (i64, i64) {
        (self.xs[c], self.xs[c] - c as i64)
    }

    pub fn step(&self, i: usize) -> Step {
        if self.xs[i] > self.xs[i - 1] {
            Step::E
        } else {
            Step::S
        }
    }

    pub fn steps(&self) -> Vec<Step> {
        (1..=self.n()).map(|i| self.step(i)).collect()
    }

    pub fn steps_string(&self) -> String {
        self.steps().iter().map(|s| if *s == Step::E { 'E' } else { 'S' }).collect()
    }

    pub fn translate(&self, d: i64) -> Self {
        Self { xs: self.xs.iter().map(|x| x + d).collect() }
    }

    /// Whether `self` lies weakly southwest of `other` on every diagonal.
    pub fn weakly_southwest_of(&self, other: &LatticePath) -> bool {
        self.n() == other.n() && self.xs.iter().zip(&other.xs).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for LatticePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({0},{0}):{1}", self.xs[0], self.steps_string())
    }
}

/// Southwest and northeast paths of an `height x width` rectangle.
pub fn rectangle_paths(height: usize, width: usize) -> (LatticePath, LatticePath) {
    let sw: Vec<Step> = std::iter::repeat_n(Step::S, height).chain(std::iter::repeat_n(Step::E, width)).collect();
    let ne: Vec<Step> = std::iter::repeat_n(Step::E, width).chain(std::iter::repeat_n(Step::S, height)).collect();
    (LatticePath::new(0, &sw).expect("nonempty"), LatticePath::new(0, &ne).expect("nonempty"))
}

const SLOPE_TOL: f64 = 1e-12;

/// Piecewise-linear function on `[0,1]` with slopes in `[0,1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ThetaRepr", into = "ThetaRepr")]
pub struct BoundaryFunction {
    breakpoints: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct ThetaRepr {
    breakpoints: Vec<[f64; 2]>,
}

impl TryFrom<ThetaRepr> for BoundaryFunction {
    type Error = Error;

    fn try_from(r: ThetaRepr) -> Result<Self> {
        BoundaryFunction::new(r.breakpoints.into_iter().map(|[z, t]| (z, t)).collect())
    }
}

impl From<BoundaryFunction> for ThetaRepr {
    fn from(b: BoundaryFunction) -> Self {
        ThetaRepr { breakpoints: b.breakpoints.into_iter().map(|(z, t)| [z, t]).collect() }
    }
}

impl BoundaryFunction {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return arg("a boundary function needs at least two breakpoints");
        }
        if breakpoints[0].0 != 0.0 || breakpoints[breakpoints.len() - 1].0 != 1.0 {
            return arg("breakpoints must start at z = 0 and end at z = 1");
        }
        for w in breakpoints.windows(2) {
            let (dz, dt) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            if dz.is_nan() || dz <= 0.0 {
                return arg("breakpoint abscissae must be strictly increasing");
            }
            let slope = dt / dz;
            if !(-SLOPE_TOL..=1.0 + SLOPE_TOL).contains(&slope) {
                return arg(format!("segment slope {slope} outside [0,1]"));
            }
        }
        Ok(Self { breakpoints })
    }

    /// `theta(z) = intercept + slope * z`.
    pub fn linear(slope: f64, intercept: f64) -> Result<Self> {
        Self::new(vec![(0.0, intercept), (1.0, intercept + slope)])
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn eval(&self, z: f64) -> f64 {
        let b = &self.breakpoints;
        let z = z.clamp(0.0, 1.0);
        let k = b.partition_point(|&(bz, _)| bz <= z).clamp(1, b.len() - 1);
        let ((z0, t0), (z1, t1)) = (b[k - 1], b[k]);
        t0 + (t1 - t0) * (z - z0) / (z1 - z0)
    }
}

/// Parses `"z:theta,z:theta,..."`.
impl FromStr for BoundaryFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut pts = Vec::new();
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            let (z, t) = part
                .split_once(':')
                .ok_or_else(|| Error::Argument(format!("breakpoint {part:?} is not z:theta")))?;
            let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| Error::Argument(format!("{v:?}: {e}")));
            pts.push((parse(z)?, parse(t)?));
        }
        Self::new(pts)
    }
}

/// Finite set of boxes with contents in `[1, n-1]`, stored per column as
/// sorted disjoint closed content intervals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    n: usize,
    columns: BTreeMap<i64, Vec<(i64, i64)>>,
    len: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ShapeRepr {
    Paths { n: usize, sw: LatticePath, ne: LatticePath },
    Boxes { n: usize, boxes: Vec<LatticeBox> },
}

impl Serialize for Shape {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ShapeRepr::Boxes { n: self.n, boxes: self.boxes() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Shape {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ShapeRepr::deserialize(d)?;
        match repr {
            ShapeRepr::Paths { n, sw, ne } => {
                if sw.n() != n {
                    return Err(serde::de::Error::custom(format!("paths have {} steps, expected n = {n}", sw.n())));
                }
                shape_from_paths(&sw, &ne)
            }
            ShapeRepr::Boxes { n, boxes } => Shape::from_boxes(n, boxes),
        }
        .map_err(serde::de::Error::custom)
    }
}

impl Shape {
    pub fn empty(n: usize) -> Self {
        Self { n, columns: BTreeMap::new(), len: 0 }
    }

    pub fn from_boxes(n: usize, boxes: impl IntoIterator<Item = LatticeBox>) -> Result<Self> {
        let mut per_col: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
        for b in boxes {
            let c = b.content();
            if c < 1 || c >= n as i64 {
                return arg(format!("box ({},{}) has content {c} outside [1, {}]", b.x, b.y, n as i64 - 1));
            }
            per_col.entry(b.x).or_default().push(c);
        }
        let mut columns = BTreeMap::new();
        let mut len = 0;
        for (x, mut cs) in per_col {
            cs.sort_unstable();
            cs.dedup();
            len += cs.len();
            let mut runs: Vec<(i64, i64)> = Vec::new();
            for c in cs {
                match runs.last_mut() {
                    Some(r) if r.1 + 1 == c => r.1 = c,
                    _ => runs.push((c, c)),
                }
            }
            columns.insert(x, runs);
        }
        Ok(Self { n, columns, len })
    }

    /// Boxes with `sw[c] <= x < ne[c]` for each content `c` in `[1, n-1]`,
    /// where both arrays are nondecreasing with unit increments.
    fn between(n: usize, sw: &[i64], ne: &[i64]) -> Self {
        let mut columns = BTreeMap::new();
        let mut len = 0;
        let inner = 1..n;
        let xmin = inner.clone().map(|c| sw[c]).min();
        let xmax = inner.clone().map(|c| ne[c] - 1).max();
        if let (Some(xmin), Some(xmax)) = (xmin, xmax) {
            let (mut lo, mut hi) = (1usize, 0usize);
            for x in xmin..=xmax {
                while lo < n && ne[lo] <= x {
                    lo += 1;
                }
                while hi + 1 < n && sw[hi + 1] <= x {
                    hi += 1;
                }
                if lo <= hi && lo < n {
                    columns.insert(x, vec![(lo as i64, hi as i64)]);
                    len += hi - lo + 1;
                }
            }
        }
        Self { n, columns, len }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, b: &LatticeBox) -> bool {
        let c = b.content();
        self.columns.get(&b.x).is_some_and(|runs| runs.iter().any(|&(lo, hi)| lo <= c && c <= hi))
    }

    /// Column x-coordinates with their content runs, west to east.
    pub fn columns(&self) -> impl Iterator<Item = (i64, &[(i64, i64)])> {
        self.columns.iter().map(|(x, r)| (*x, r.as_slice()))
    }

    /// Boxes in canonical order: columns west to east, each south to north.
    pub fn iter_canonical(&self) -> impl Iterator<Item = LatticeBox> + '_ {
        self.columns.iter().flat_map(|(&x, runs)| {
            runs.iter().rev().flat_map(move |&(lo, hi)| (lo..=hi).rev().map(move |c| LatticeBox { x, y: x - c }))
        })
    }

    /// Contents in canonical order.
    pub fn contents_canonical(&self) -> impl Iterator<Item = u32> + '_ {
        self.columns.values().flat_map(|runs| runs.iter().rev().flat_map(|&(lo, hi)| (lo..=hi).rev().map(|c| c as u32)))
    }

    pub fn boxes(&self) -> Vec<LatticeBox> {
        self.iter_canonical().collect()
    }

    pub fn is_order_convex(&self) -> bool {
        match self.hull() {
            None => true,
            Some((sw, ne)) => Shape::between(self.n, &sw, &ne).len == self.len,
        }
    }

    /// Tightest pair of path coordinate arrays enclosing the shape.
    fn hull(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let n = self.n;
        let mut lo = vec![i64::MAX; n + 1];
        let mut hi = vec![i64::MIN; n + 1];
        for (&x, runs) in &self.columns {
            for &(a, b) in runs {
                for c in a..=b {
                    let c = c as usize;
                    lo[c] = lo[c].min(x);
                    hi[c] = hi[c].max(x);
                }
            }
        }
        if self.len == 0 {
            return None;
        }
        // sw[c] = min over c' of lo[c'] + max(0, c - c')
        let mut sw = vec![i64::MAX; n + 1];
        let mut suffix = i64::MAX;
        for c in (0..=n).rev() {
            suffix = suffix.min(lo[c]);
            sw[c] = suffix;
        }
        let mut best = i64::MAX;
        for c in 0..=n {
            if best != i64::MAX {
                sw[c] = sw[c].min(best + c as i64);
            }
            if lo[c] != i64::MAX {
                best = best.min(lo[c] - c as i64);
            }
        }
        // ne[c] = max over c' of hi[c'] + 1 - max(0, c' - c)
        let mut ne = vec![i64::MIN; n + 1];
        let mut prefix = i64::MIN;
        for c in 0..=n {
            if hi[c] != i64::MIN {
                prefix = prefix.max(hi[c] + 1);
            }
            ne[c] = prefix;
        }
        let mut best = i64::MIN;
        for c in (0..=n).rev() {
            if best != i64::MIN {
                ne[c] = ne[c].max(best + c as i64);
            }
            if hi[c] != i64::MIN {
                best = best.max(hi[c] + 1 - c as i64);
            }
        }
        for c in 0..=n {
            sw[c] = sw[c].min(ne[c]);
        }
        Some((sw, ne))
    }

    /// Bounding paths of the order-convex completion, if the shape is nonempty.
    pub fn boundary_paths(&self) -> Option<(LatticePath, LatticePath)> {
        self.hull().map(|(sw, ne)| (LatticePath { xs: sw }, LatticePath { xs: ne }))
    }
}

pub fn shape_from_paths(sw: &LatticePath, ne: &LatticePath) -> Result<Shape> {
    if sw.n() != ne.n() {
        return arg(format!("paths have {} and {} steps", sw.n(), ne.n()));
    }
    if !sw.weakly_southwest_of(ne) {
        return arg("southwest path crosses the northeast path");
    }
    Ok(Shape::between(sw.n(), &sw.xs, &ne.xs))
}

/// The word read off columns west to east, each column south to north.
pub fn word_of_shape(s: &Shape) -> Result<Word> {
    if !s.is_order_convex() {
        return arg("shape is not order-convex; complete it first");
    }
    Ok(Word::from_letters_unchecked(s.n.max(1), s.contents_canonical().collect()))
}

/// `(a_j, b_j)`: smallest and largest content of each nonempty column.
pub fn column_contents(s: &Shape) -> Vec<(u32, u32)> {
    s.columns.values().map(|runs| (runs[0].0 as u32, runs[runs.len() - 1].1 as u32)).collect()
}

/// The column-interval condition satisfied by shapes bounded by two paths:
/// `a_j <= max(a_{j+1} - 1, 1)` and `b_{j+1} >= min(b_j + 1, n - 1)`.
pub fn column_condition_holds(cols: &[(u32, u32)], n: usize) -> bool {
    let top = n as i64 - 1;
    cols.windows(2).all(|w| {
        let ((a0, b0), (a1, b1)) = ((w[0].0 as i64, w[0].1 as i64), (w[1].0 as i64, w[1].1 as i64));
        a0 <= (a1 - 1).max(1) && b1 >= (b0 + 1).min(top)
    })
}

/// Path whose east-step prefix counts are `round(n * theta(j/n))`, clamped so
/// that every increment is 0 or 1.
pub fn path_from_theta(theta: &BoundaryFunction, n: usize) -> LatticePath {
    let nf = n as f64;
    let round = |j: usize| (nf * theta.eval(j as f64 / nf) + 0.5).floor() as i64;
    let mut xs = Vec::with_capacity(n + 1);
    xs.push(round(0));
    for j in 1..=n {
        let prev = xs[j - 1];
        xs.push(round(j).clamp(prev, prev + 1));
    }
    LatticePath { xs }
}

pub fn theta_of_path(p: &LatticePath) -> BoundaryFunction {
    let nf = p.n() as f64;
    BoundaryFunction { breakpoints: p.xs.iter().enumerate().map(|(j, &x)| (j as f64 / nf, x as f64 / nf)).collect() }
}

/// Path encoding the commutation class of a Coxeter word: step `i+1` is east
/// exactly when letter `i` precedes letter `i+1`.
pub fn coxeter_path(word: &Word) -> Result<LatticePath> {
    let n = word.n();
    if n < 2 {
        return arg("Coxeter words need n >= 2");
    }
    let mut pos = vec![usize::MAX; n];
    for (k, &l) in word.letters().iter().enumerate() {
        if pos[l as usize] != usize::MAX {
            return arg(format!("letter {l} repeated in a Coxeter word"));
        }
        pos[l as usize] = k;
    }
    if word.len() != n - 1 {
        return arg("a Coxeter word uses every letter of [n-1] exactly once");
    }
    let mut steps = vec![Step::S; n];
    for i in 1..n - 1 {
        if pos[i] < pos[i + 1] {
            steps[i] = Step::E;
        }
    }
    steps[n - 1] = Step::E;
    LatticePath::new(0, &steps)
}

pub fn standard_coxeter_word(n: usize) -> Word {
    Word::from_letters_unchecked(n, (1..n as u32).collect())
}

/// Odd letters of `[n-1]` followed by the even ones.
pub fn bipartite_coxeter_word(n: usize) -> Word {
    let odd = (1..n as u32).filter(|l| l % 2 == 1);
    let even = (1..n as u32).filter(|l| l % 2 == 0);
    Word::from_letters_unchecked(n, odd.chain(even).collect())
}

/// Shape whose word represents the `t`-th power of the Coxeter operator of
/// `sw`: the northeast boundary is `sw` with its first step turned east, its
/// last step turned south, shifted `t - 1` steps north and east.
pub fn coxeter_power_shape(sw: &LatticePath, t: usize) -> Result<Shape> {
    let n = sw.n();
    if t == 0 {
        return arg("the power t must be positive");
    }
    if n < 2 || sw.step(1) != Step::S || sw.step(n) != Step::E {
        return arg("a Coxeter path starts with a south step and ends with an east step");
    }
    let mut steps = sw.steps();
    steps[0] = Step::E;
    steps[n - 1] = Step::S;
    let ne = LatticePath::new(sw.start() + t as i64 - 1, &steps)?;
    shape_from_paths(sw, &ne)
}

/// Smallest shape bounded by two paths that contains `s`, with the boxes that
/// had to be added.
pub fn order_convex_completion(s: &Shape) -> (Shape, Vec<LatticeBox>) {
    let Some((sw, ne)) = s.hull() else {
        return (s.clone(), Vec::new());
    };
    let full = Shape::between(s.n, &sw, &ne);
    let added = if full.len == s.len { Vec::new() } else { full.iter_canonical().filter(|b| !s.contains(b)).collect() };
    (full, added)
}
