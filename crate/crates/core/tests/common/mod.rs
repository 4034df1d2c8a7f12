//! Slow reference implementations shared by the integration tests.
#![allow(dead_code)]

use permuton::Permutation;

pub fn length(w: &[u32]) -> u64 {
    let mut c = 0;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if w[i] > w[j] {
                c += 1;
            }
        }
    }
    c
}

/// 0-Hecke product of a word by lengths: right-multiply by `s_i` exactly when
/// that makes the permutation longer.
pub fn hecke_word(n: usize, letters: &[u32]) -> Vec<u32> {
    let mut w: Vec<u32> = (1..=n as u32).collect();
    for &i in letters {
        let i = i as usize;
        let mut t = w.clone();
        t.swap(i - 1, i);
        if length(&t) > length(&w) {
            w = t;
        }
    }
    w
}

/// `r[i][j] = #{a <= i : w(a) >= j}`.
fn rank_matrix(w: &[u32]) -> Vec<Vec<u32>> {
    let n = w.len();
    (0..n)
        .map(|i| (1..=n as u32).map(|j| w[..=i].iter().filter(|&&v| v >= j).count() as u32).collect())
        .collect()
}

pub fn bruhat_leq(x: &[u32], u: &[u32]) -> bool {
    let (a, b) = (rank_matrix(x), rank_matrix(u));
    a.iter().zip(&b).all(|(ra, rb)| ra.iter().zip(rb).all(|(p, q)| p <= q))
}

pub fn all_perms(n: usize) -> Vec<Vec<u32>> {
    fn go(pre: &mut Vec<u32>, rest: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest.is_empty() {
            out.push(pre.clone());
            return;
        }
        for k in 0..rest.len() {
            let v = rest.remove(k);
            pre.push(v);
            go(pre, rest, out);
            pre.pop();
            rest.insert(k, v);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (1..=n as u32).collect(), &mut out);
    out
}

/// Demazure products of all pairs in `S_n` as the Bruhat-maximum of
/// `{x y : x <= u, y <= v}`, keyed by the index of `(u, v)` in
/// [`all_perms`] order.
pub fn bruhat_max_products(n: usize) -> Vec<Vec<Vec<u32>>> {
    let all = all_perms(n);
    let below: Vec<Vec<&Vec<u32>>> = all.iter().map(|u| all.iter().filter(|x| bruhat_leq(x, u)).collect()).collect();
    below
        .iter()
        .map(|bu| {
            below
                .iter()
                .map(|bv| {
                    let mut best: Vec<u32> = Vec::new();
                    let mut prods = Vec::new();
                    for x in bu {
                        for y in bv {
                            let z: Vec<u32> = y.iter().map(|&k| x[k as usize - 1]).collect();
                            if best.is_empty() || length(&z) > length(&best) {
                                best = z.clone();
                            }
                            prods.push(z);
                        }
                    }
                    assert!(prods.iter().all(|z| bruhat_leq(z, &best)), "no Bruhat maximum");
                    best
                })
                .collect()
        })
        .collect()
}

/// Inverse of the fold: `H(x, y) = #{i > x n : u(i) <= y n} / n` counted
/// directly at grid points.
pub fn grid_height(u: &Permutation, i: usize, j: usize) -> i64 {
    u.values().iter().enumerate().filter(|(a, &v)| *a >= i && v as usize <= j).count() as i64
}

/// `c_p(a, b)` written out from its definition.
pub fn cp(p: f64, a: f64, b: f64) -> f64 {
    let a = a.max(0.0);
    if p * b >= a {
        ((p * b).sqrt() - a.sqrt()).powi(2) / (1.0 - p)
    } else {
        0.0
    }
}

/// Limit height as the solution `h` of `c_p(x - y + h, D) = h` clamped to
/// `[max(0, y - x), min(1 - x, y)]`, found by bisection.
pub fn height_by_bisection(p: f64, spread: f64, x: f64, y: f64) -> f64 {
    let lo = (y - x).max(0.0);
    let hi = (1.0 - x).min(y);
    if hi <= lo {
        return hi;
    }
    let g = |h: f64| cp(p, x - y + h, spread) - h;
    if g(lo) <= 0.0 {
        return lo;
    }
    if g(hi) >= 0.0 {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if g(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
