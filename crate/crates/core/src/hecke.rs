//! Permutations, words over adjacent transpositions, the `tau` operators of
//! the 0-Hecke monoid, Demazure products, inversions, pattern counts and
//! exact height grids.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::rng;

/// A permutation of `[n]` in one-line notation, stored with 1-based values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Permutation {
    values: Vec<u32>,
}

impl Permutation {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return arg("a permutation needs at least one entry");
        }
        let mut seen = vec![false; n];
        for &v in &values {
            let idx = v as usize;
            if idx == 0 || idx > n || seen[idx - 1] {
                return arg(format!("{values:?} is not a permutation of 1..{n}"));
            }
            seen[idx - 1] = true;
        }
        Ok(Self { values })
    }

    pub(crate) fn from_values_unchecked(values: Vec<u32>) -> Self {
        debug_assert!(Self::new(values.clone()).is_ok());
        Self { values }
    }

    pub fn identity(n: usize) -> Self {
        Self { values: (1..=n as u32).collect() }
    }

    /// The decreasing permutation `n n-1 ... 1`.
    pub fn longest(n: usize) -> Self {
        Self { values: (1..=n as u32).rev().collect() }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<u32> {
        self.values
    }

    /// `u(i)` for a 1-based position `i`.
    pub fn at(&self, i: usize) -> u32 {
        self.values[i - 1]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.n()];
        for (pos, &v) in self.values.iter().enumerate() {
            inv[v as usize - 1] = pos as u32 + 1;
        }
        Self { values: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.values.iter().enumerate().all(|(i, &v)| v as usize == i + 1)
    }

    /// Exact height function of the permuton `pi_u` at `(x, y)`, i.e. the mass
    /// of `[x,1] x [0,y]`. Runs in O(n).
    pub fn height(&self, x: f64, y: f64) -> f64 {
        let n = self.n() as f64;
        let (xn, yn) = (x * n, y * n);
        let mut total = 0.0;
        for (a, &b) in self.values.iter().enumerate() {
            let fx = (a as f64 + 1.0 - xn).clamp(0.0, 1.0);
            if fx == 0.0 {
                continue;
            }
            let fy = (yn - (b as f64 - 1.0)).clamp(0.0, 1.0);
            total += fx * fy;
        }
        total / n
    }
}

impl TryFrom<Vec<u32>> for Permutation {
    type Error = Error;

    fn try_from(values: Vec<u32>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<Permutation> for Vec<u32> {
    fn from(p: Permutation) -> Self {
        p.values
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Parses `"2 1 4 3"`, `"2,1,4,3"` or, for `n <= 9`, the compact `"2143"`.
impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let values: Option<Vec<u32>> = if s.contains([' ', ',']) {
            s.split([' ', ','])
                .filter(|t| !t.is_empty())
                .map(|t| t.parse().ok())
                .collect()
        } else {
            s.chars().map(|c| c.to_digit(10)).collect()
        };
        match values {
            Some(v) => Self::new(v),
            None => arg(format!("cannot parse permutation {s:?}")),
        }
    }
}

/// A word over the alphabet `[n-1]`; letter `i` stands for the transposition
/// of positions `i` and `i+1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    n: usize,
    letters: Vec<u32>,
}

impl Word {
    pub fn new(n: usize, letters: Vec<u32>) -> Result<Self> {
        if n == 0 {
            return arg("word alphabet bound n must be positive");
        }
        if let Some(&bad) = letters.iter().find(|&&l| l == 0 || l as usize >= n) {
            return arg(format!("letter {bad} outside 1..{}", n - 1));
        }
        Ok(Self { n, letters })
    }

    pub(crate) fn from_letters_unchecked(n: usize, letters: Vec<u32>) -> Self {
        debug_assert!(letters.iter().all(|&l| l >= 1 && (l as usize) < n));
        Self { n, letters }
    }

    pub fn empty(n: usize) -> Self {
        Self { n, letters: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Result<Word> {
        if self.n != other.n {
            return arg(format!("cannot concatenate words over [{}] and [{}]", self.n - 1, other.n - 1));
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(Word { n: self.n, letters })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Sorts positions `i, i+1` (1-based letter `i`) of `values` into decreasing
/// order. Returns whether a swap happened.
#[inline]
pub fn tau_in_place(values: &mut [u32], i: usize) -> bool {
    if values[i - 1] < values[i] {
        values.swap(i - 1, i);
        true
    } else {
        false
    }
}

pub fn tau_apply(u: &Permutation, i: usize) -> Result<Permutation> {
    if i == 0 || i >= u.n() {
        return arg(format!("tau index {i} outside 1..{}", u.n().saturating_sub(1)));
    }
    let mut values = u.values.clone();
    tau_in_place(&mut values, i);
    Ok(Permutation { values })
}

/// Folds the `tau` operators of `word` over `start`, first letter first.
pub fn fold_word(start: &Permutation, word: &Word) -> Result<Permutation> {
    if start.n() != word.n() {
        return arg(format!("word over [{}] applied to a permutation of size {}", word.n() - 1, start.n()));
    }
    let mut values = start.values.clone();
    for &l in &word.letters {
        tau_in_place(&mut values, l as usize);
    }
    Ok(Permutation { values })
}

pub fn demazure_of_word(word: &Word) -> Permutation {
    let mut values: Vec<u32> = (1..=word.n() as u32).collect();
    for &l in &word.letters {
        tau_in_place(&mut values, l as usize);
    }
    Permutation { values }
}

/// Reduced word obtained by repeatedly peeling the smallest descent.
///
/// A swap at `i` can only create a descent at `i-1`, so the scan pointer steps
/// back by at most one per swap and the whole pass is O(n + l(u)).
pub fn canonical_reduced_word(u: &Permutation) -> Word {
    let mut cur = u.values.clone();
    let n = cur.len();
    let mut peeled = Vec::new();
    let mut i = 1;
    while i < n {
        if cur[i - 1] > cur[i] {
            cur.swap(i - 1, i);
            peeled.push(i as u32);
            i = i.saturating_sub(1).max(1);
        } else {
            i += 1;
        }
    }
    peeled.reverse();
    Word { n, letters: peeled }
}

/// `u * v`, computed by folding `tau` over a reduced word of `v` starting at `u`.
pub fn demazure_product(u: &Permutation, v: &Permutation) -> Result<Permutation> {
    if u.n() != v.n() {
        return arg(format!("size mismatch: {} vs {}", u.n(), v.n()));
    }
    fold_word(u, &canonical_reduced_word(v))
}

/// Number of inversions, by merge sort.
pub fn inversions(u: &Permutation) -> u64 {
    fn sort_count(a: &mut [u32], buf: &mut [u32]) -> u64 {
        let n = a.len();
        if n < 2 {
            return 0;
        }
        let mid = n / 2;
        let mut count = sort_count(&mut a[..mid], &mut buf[..mid]) + sort_count(&mut a[mid..], &mut buf[mid..]);
        let (mut i, mut j, mut k) = (0, mid, 0);
        while i < mid && j < n {
            if a[i] <= a[j] {
                buf[k] = a[i];
                i += 1;
            } else {
                buf[k] = a[j];
                count += (mid - i) as u64;
                j += 1;
            }
            k += 1;
        }
        buf[k..k + mid - i].copy_from_slice(&a[i..mid]);
        k += mid - i;
        buf[k..k + n - j].copy_from_slice(&a[j..n]);
        a.copy_from_slice(&buf[..n]);
        count
    }
    let mut a = u.values.clone();
    let mut buf = vec![0u32; a.len()];
    sort_count(&mut a, &mut buf)
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Exact pattern occurrence count together with the number of `k`-subsets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PatternCount {
    pub count: u64,
    pub total: u64,
}

impl PatternCount {
    pub fn fraction(&self) -> f64 {
        self.count as f64 / self.total as f64
    }
}

pub const MAX_PATTERN_SIZE: usize = 4;

/// All permutations of `[k]` in lexicographic order.
pub fn all_permutations(k: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = (1..=k as u32).collect();
    loop {
        out.push(Permutation { values: cur.clone() });
        let Some(i) = (1..k).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..k).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// Lexicographic rank of the pattern formed by `vals` (distinct values).
#[inline]
fn pattern_rank(vals: &[u32]) -> usize {
    const FACT: [usize; 5] = [1, 1, 2, 6, 24];
    let k = vals.len();
    let mut rank = 0;
    for i in 0..k {
        let smaller_after = vals[i + 1..].iter().filter(|&&w| w < vals[i]).count();
        rank += smaller_after * FACT[k - 1 - i];
    }
    rank
}

fn check_pattern_size(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > MAX_PATTERN_SIZE {
        return arg(format!("pattern size {k} outside 1..={MAX_PATTERN_SIZE}"));
    }
    if k > n {
        return arg(format!("pattern size {k} exceeds permutation size {n}"));
    }
    Ok(())
}

/// Occurrence counts of every pattern of size `k`, indexed like
/// [`all_permutations`]`(k)`.
pub fn pattern_counts(u: &Permutation, k: usize) -> Result<Vec<u64>> {
    let n = u.n();
    check_pattern_size(n, k)?;
    let mut counts = vec![0u64; (1..=k).product()];
    if k == 2 {
        let inv = inversions(u);
        counts[0] = binomial(n as u64, 2) - inv;
        counts[1] = inv;
        return Ok(counts);
    }
    let v = &u.values;
    let mut idx = [0usize; MAX_PATTERN_SIZE];
    let mut vals = [0u32; MAX_PATTERN_SIZE];
    fn rec(v: &[u32], k: usize, depth: usize, start: usize, idx: &mut [usize], vals: &mut [u32], counts: &mut [u64]) {
        if depth == k {
            counts[pattern_rank(&vals[..k])] += 1;
            return;
        }
        for a in start..=v.len() - (k - depth) {
            idx[depth] = a;
            vals[depth] = v[a];
            rec(v, k, depth + 1, a + 1, idx, vals, counts);
        }
    }
    rec(v, k, 0, 0, &mut idx, &mut vals, &mut counts);
    Ok(counts)
}

pub fn pattern_density(u: &Permutation, pattern: &Permutation) -> Result<PatternCount> {
    let k = pattern.n();
    check_pattern_size(u.n(), k)?;
    let total = binomial(u.n() as u64, k as u64);
    let count = if k == 1 {
        u.n() as u64
    } else {
        pattern_counts(u, k)?[pattern_rank(pattern.values())]
    };
    Ok(PatternCount { count, total })
}

/// Integer height grid: `H(i/n, j/n) = counts[i][j] / denom`.
///
/// Grids of permutations have `denom == n`. Grids produced by exact
/// refinement carry a larger denominator so that their values stay integral.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct HeightGrid {
    n: usize,
    denom: i64,
    counts: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    denom: Option<i64>,
    counts: Vec<Vec<i64>>,
}

impl TryFrom<GridRepr> for HeightGrid {
    type Error = Error;

    fn try_from(r: GridRepr) -> Result<Self> {
        if r.counts.len() != r.n + 1 || r.counts.iter().any(|row| row.len() != r.n + 1) {
            return arg(format!("height grid with n={} needs {}x{} counts", r.n, r.n + 1, r.n + 1));
        }
        let denom = r.denom.unwrap_or(r.n as i64);
        HeightGrid::from_counts(r.n, denom, r.counts.into_iter().flatten().collect())
    }
}

impl From<HeightGrid> for GridRepr {
    fn from(g: HeightGrid) -> Self {
        let m = g.n + 1;
        GridRepr {
            n: g.n,
            denom: (g.denom != g.n as i64).then_some(g.denom),
            counts: g.counts.chunks(m).map(<[i64]>::to_vec).collect(),
        }
    }
}

impl HeightGrid {
    /// Builds a grid from row-major counts of length `(n+1)^2`.
    pub fn from_counts(n: usize, denom: i64, counts: Vec<i64>) -> Result<Self> {
        if n == 0 || denom <= 0 {
            return arg("height grid needs n >= 1 and a positive denominator");
        }
        if counts.len() != (n + 1) * (n + 1) {
            return arg(format!("expected {} counts, got {}", (n + 1) * (n + 1), counts.len()));
        }
        Ok(Self { n, denom, counts })
    }

    pub fn from_fn(n: usize, denom: i64, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut counts = Vec::with_capacity((n + 1) * (n + 1));
        for i in 0..=n {
            for j in 0..=n {
                counts.push(f(i, j));
            }
        }
        Self { n, denom, counts }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn denom(&self) -> i64 {
        self.denom
    }

    pub fn counts(&self) -> &[i64] {
        &self.counts
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.counts[i * (self.n + 1) + j]
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.counts[i * (self.n + 1)..(i + 1) * (self.n + 1)]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.get(i, j) as f64 / self.denom as f64
    }

    /// Bilinear interpolation inside the grid cell containing `(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let n = self.n as f64;
        let (xs, ys) = (x.clamp(0.0, 1.0) * n, y.clamp(0.0, 1.0) * n);
        let i = (xs.floor() as usize).min(self.n - 1);
        let j = (ys.floor() as usize).min(self.n - 1);
        let (fx, fy) = (xs - i as f64, ys - j as f64);
        let c = |a, b| self.get(a, b) as f64;
        let v = (1.0 - fx) * (1.0 - fy) * c(i, j)
            + fx * (1.0 - fy) * c(i + 1, j)
            + (1.0 - fx) * fy * c(i, j + 1)
            + fx * fy * c(i + 1, j + 1);
        v / self.denom as f64
    }

    /// Rescales counts to a multiple of the current denominator.
    pub fn with_denom(&self, denom: i64) -> Result<Self> {
        if denom % self.denom != 0 {
            return arg(format!("denominator {denom} is not a multiple of {}", self.denom));
        }
        let f = denom / self.denom;
        Ok(Self { n: self.n, denom, counts: self.counts.iter().map(|c| c * f).collect() })
    }

    /// Checks the permuton boundary values and per-coordinate monotonicity
    /// with increments bounded by one grid step.
    pub fn validate(&self) -> Result<()> {
        let (n, d) = (self.n, self.denom);
        let step = d as i128;
        let nn = n as i128;
        for t in 0..=n {
            if self.get(n, t) != 0 || self.get(t, 0) != 0 {
                return arg(format!("height grid not zero on the x=1 / y=0 edge at {t}"));
            }
            if self.get(0, t) as i128 * nn != t as i128 * step {
                return arg(format!("H(0, {t}/n) is not {t}/n"));
            }
            if self.get(t, n) as i128 * nn != (n - t) as i128 * step {
                return arg(format!("H({t}/n, 1) is not 1 - {t}/n"));
            }
        }
        for i in 0..=n {
            for j in 0..=n {
                let c = self.get(i, j) as i128;
                if j < n {
                    let dj = (self.get(i, j + 1) as i128 - c) * nn;
                    if dj < 0 || dj > step {
                        return arg(format!("H not 1-Lipschitz increasing in y at ({i},{j})"));
                    }
                }
                if i < n {
                    let di = (c - self.get(i + 1, j) as i128) * nn;
                    if di < 0 || di > step {
                        return arg(format!("H not 1-Lipschitz decreasing in x at ({i},{j})"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Largest absolute difference of values at common grid points.
    pub fn max_abs_diff(&self, other: &HeightGrid) -> Result<f64> {
        if self.n != other.n {
            return arg("grids have different resolutions");
        }
        let (a, b) = (self.denom as f64, other.denom as f64);
        Ok(self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(&x, &y)| (x as f64 / a - y as f64 / b).abs())
            .fold(0.0, f64::max))
    }
}

/// `c[i][j] = #{a > i : u(a) <= j}`.
pub fn height_grid(u: &Permutation) -> HeightGrid {
    let n = u.n();
    let m = n + 1;
    let mut counts = vec![0i64; m * m];
    for i in (0..n).rev() {
        let b = u.values[i] as usize;
        let (lower, upper) = counts.split_at_mut((i + 1) * m);
        let row = &mut lower[i * m..];
        let below = &upper[..m];
        for j in 0..m {
            row[j] = below[j] + i64::from(b <= j);
        }
    }
    HeightGrid { n, denom: n as i64, counts }
}

pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    let mut values: Vec<u32> = (1..=n as u32).collect();
    values.shuffle(rng);
    Permutation { values }
}

pub fn uniform_random_permutation(n: usize, seed: u64) -> Result<Permutation> {
    if n == 0 {
        return arg("n must be at least 1");
    }
    Ok(random_permutation(n, &mut rng::seeded(seed)))
}
