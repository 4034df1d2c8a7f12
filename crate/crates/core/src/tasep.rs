//! Discrete-time TASEP with geometric jumps and parallel update, its coupling
//! with column-by-column pipe-dream resolution, and the hydrodynamic and
//! fluctuation-scale formulas.

use rand::Rng;
use serde::Serialize;

use crate::error::{arg, domain, Result};
use crate::hecke::Permutation;
use crate::shapes::{column_contents, Shape};

/// Geometric parameter `p` in `(0, 1)`: `P(G = r) = (1 - p) p^r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeomParam(f64);

impl GeomParam {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return arg(format!("geometric parameter {p} outside (0, 1)"));
        }
        Ok(Self(p))
    }

    pub fn p(self) -> f64 {
        self.0
    }
}

pub fn geometric_sample<R: Rng + ?Sized>(p: GeomParam, rng: &mut R) -> u64 {
    let u = 1.0 - rng.gen::<f64>();
    (u.ln() / p.0.ln()).floor() as u64
}

/// Particle positions `xi_1 > xi_2 > ... > xi_k >= 1` at time `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TasepState {
    positions: Vec<i64>,
    t: u64,
}

impl TasepState {
    pub fn new(positions: Vec<i64>, t: u64) -> Result<Self> {
        if positions.windows(2).any(|w| w[0] <= w[1]) || positions.last().is_some_and(|&x| x < 1) {
            return arg("positions must be strictly decreasing and at least 1");
        }
        Ok(Self { positions, t })
    }

    /// Step initial condition `xi_i = k + 1 - i`.
    pub fn step_initial(k: usize) -> Self {
        Self { positions: (1..=k as i64).rev().collect(), t: 0 }
    }

    pub fn k(&self) -> usize {
        self.positions.len()
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    /// `xi_i(t) - xi_i(0)` for a 1-based particle index, relative to step
    /// initial conditions.
    pub fn displacement(&self, i: usize) -> i64 {
        self.positions[i - 1] - (self.k() + 1 - i) as i64
    }

    /// One parallel update with prescribed jumps `jumps[i-1] = G_i`.
    ///
    /// Particles at or right of `barrier` stay put; the others may not pass it.
    pub fn step_with_jumps(&mut self, jumps: &[u64], barrier: Option<i64>) {
        assert_eq!(jumps.len(), self.k(), "one jump per particle");
        let xs = &mut self.positions;
        for i in (0..xs.len()).rev() {
            let ahead = if i == 0 { i64::MAX } else { xs[i - 1] - 1 };
            let mut target = xs[i].saturating_add(jumps[i] as i64).min(ahead);
            if let Some(b) = barrier {
                target = if xs[i] >= b { xs[i] } else { target.min(b) };
            }
            xs[i] = target.max(xs[i]);
        }
        self.t += 1;
    }

    /// One parallel update with fresh geometric jumps, drawn for particles
    /// `k, k-1, ..., 1` in that order.
    pub fn step<R: Rng + ?Sized>(&mut self, p: GeomParam, rng: &mut R, barrier: Option<i64>) {
        let xs = &mut self.positions;
        for i in (0..xs.len()).rev() {
            let g = geometric_sample(p, rng) as i64;
            let ahead = if i == 0 { i64::MAX } else { xs[i - 1] - 1 };
            let mut target = xs[i].saturating_add(g).min(ahead);
            if let Some(b) = barrier {
                target = if xs[i] >= b { xs[i] } else { target.min(b) };
            }
            xs[i] = target.max(xs[i]);
        }
        self.t += 1;
    }
}

pub fn tasep_step<R: Rng + ?Sized>(s: &TasepState, p: GeomParam, rng: &mut R, barrier: Option<i64>) -> TasepState {
    let mut next = s.clone();
    next.step(p, rng, barrier);
    next
}

/// Particles at `n + 1 - w^{-1}(i)` for the `k` largest values `i`.
pub fn iota(w: &Permutation, k: usize) -> Result<TasepState> {
    let n = w.n();
    if k == 0 || k > n {
        return arg(format!("particle count {k} outside 1..={n}"));
    }
    let inv = w.inverse();
    let mut positions: Vec<i64> = (n + 1 - k..=n).map(|i| (n + 1) as i64 - inv.at(i) as i64).collect();
    positions.sort_unstable_by(|a, b| b.cmp(a));
    Ok(TasepState { positions, t: 0 })
}

/// Number of particles at positions `>= pos`.
pub fn particle_statistic(s: &TasepState, pos: i64) -> usize {
    s.positions.iter().take_while(|&&x| x >= pos).count()
}

/// `(T, T')`: the last column with `b_j <= n - k - 1` and the last column
/// with `a_j <= k'` (1-based, 0 when there is none).
pub fn window_indices(s: &Shape, k: usize, k_prime: usize) -> (usize, usize) {
    let cols = column_contents(s);
    let n = s.n() as i64;
    let last = |pred: &dyn Fn(&(u32, u32)) -> bool| cols.iter().rposition(pred).map_or(0, |j| j + 1);
    let t = last(&|c| (c.1 as i64) < n - k as i64);
    let t_prime = last(&|c| (c.0 as usize) <= k_prime);
    (t, t_prime)
}

/// Jumps induced by one column of tiles with contents `lo..=hi`: each particle
/// advances along the run of consecutive crosses starting at its own bond.
/// Content `c` is the bond between positions `n - c` and `n - c + 1`.
pub fn column_jumps(s: &TasepState, n: usize, lo: u32, hi: u32, cross: impl Fn(u32) -> bool) -> Vec<u64> {
    s.positions
        .iter()
        .map(|&x| {
            let mut c = n as i64 - x;
            let mut g = 0;
            while c >= lo as i64 && c <= hi as i64 && cross(c as u32) {
                g += 1;
                c -= 1;
            }
            g
        })
        .collect()
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("p = {p} outside (0, 1)"));
    }
    Ok(())
}

pub(crate) fn cp_unchecked(p: f64, a: f64, b: f64) -> f64 {
    if p * b >= a {
        let d = (p * b).sqrt() - a.sqrt();
        d * d / (1.0 - p)
    } else {
        0.0
    }
}

/// Hydrodynamic limit `c_p(a, b) = (sqrt(pb) - sqrt(a))^2 / (1 - p)` when
/// `pb >= a`, else 0.
pub fn c_p(p: f64, a: f64, b: f64) -> Result<f64> {
    check_p(p)?;
    if a < 0.0 || b < 0.0 {
        return domain(format!("c_p needs a, b >= 0 (got {a}, {b})"));
    }
    Ok(cp_unchecked(p, a, b))
}

fn check_mt(p: f64, m: f64, t: f64) -> Result<()> {
    check_p(p)?;
    if !(m > 0.0 && m / p < t) {
        return domain(format!("need 0 < m/p < t (got m = {m}, t = {t}, p = {p})"));
    }
    Ok(())
}

pub fn q_p(p: f64, m: f64, t: f64) -> Result<f64> {
    check_mt(p, m, t)?;
    let (sm, a, b) = (m.sqrt(), (t / p).sqrt(), (p * t).sqrt());
    Ok(p.sqrt() * m.cbrt() / t.powf(1.0 / 6.0) * (a - sm).powf(2.0 / 3.0) / (b - sm).cbrt())
}

pub fn r_p(p: f64, m: f64, t: f64) -> Result<f64> {
    check_mt(p, m, t)?;
    let (sm, a, b) = (m.sqrt(), (t / p).sqrt(), (p * t).sqrt());
    Ok(p.sqrt() * (b - sm).powf(2.0 / 3.0) * (a - sm).powf(2.0 / 3.0) / ((m * t).powf(1.0 / 6.0) * (1.0 - p)))
}

/// Fluctuation scale `m^{1/3} (sqrt(t/p) - sqrt m)^{2/3} (sqrt(pt) - sqrt m)^{2/3}
/// / ((sqrt t - sqrt(pm)) t^{1/6})`.
pub fn v_p(p: f64, m: f64, t: f64) -> Result<f64> {
    check_mt(p, m, t)?;
    let (sm, a, b) = (m.sqrt(), (t / p).sqrt(), (p * t).sqrt());
    Ok(m.cbrt() * (a - sm).powf(2.0 / 3.0) * (b - sm).powf(2.0 / 3.0) / ((t.sqrt() - (p * m).sqrt()) * t.powf(1.0 / 6.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::shapes::{shape_from_paths, LatticeBox, LatticePath};

    #[test]
    fn geometric_edge_cases() {
        let p = GeomParam::new(1e-12).unwrap();
        let mut r = rng::seeded(1);
        assert!((0..1000).all(|_| geometric_sample(p, &mut r) == 0));
        let half = GeomParam::new(0.5).unwrap();
        let a = geometric_sample(half, &mut rng::seeded(9));
        assert_eq!(a, geometric_sample(half, &mut rng::seeded(9)));
        assert!(GeomParam::new(1.0).is_err());
        assert!(GeomParam::new(0.0).is_err());
    }

    #[test]
    fn step_examples() {
        let mut s = TasepState::new(vec![2, 1], 0).unwrap();
        s.step_with_jumps(&[3, 1], None);
        assert_eq!(s.positions(), &[5, 1]);
        let mut z = TasepState::new(vec![9, 4, 3], 0).unwrap();
        z.step_with_jumps(&[0, 0, 0], None);
        assert_eq!(z.positions(), &[9, 4, 3]);
        let mut b = TasepState::new(vec![6, 3, 1], 0).unwrap();
        b.step_with_jumps(&[10, 10, 10], Some(6));
        assert_eq!(b.positions(), &[6, 5, 2]);
        assert!(TasepState::new(vec![1, 2], 0).is_err());
    }

    #[test]
    fn iota_examples() {
        assert_eq!(iota(&Permutation::identity(4), 2).unwrap().positions(), &[2, 1]);
        assert_eq!(iota(&"2143".parse().unwrap(), 2).unwrap().positions(), &[2, 1]);
        assert_eq!(iota(&Permutation::longest(6), 3).unwrap().positions(), &[6, 5, 4]);
        assert!(iota(&Permutation::identity(3), 4).is_err());
    }

    #[test]
    fn statistic_examples() {
        let s = TasepState::step_initial(5);
        assert_eq!(particle_statistic(&s, 1), 5);
        assert_eq!(particle_statistic(&s, 6), 0);
    }

    #[test]
    fn window_examples() {
        let a = [1, 1, 2, 3, 4, 7, 8, 9];
        let b = [3, 4, 5, 7, 8, 9, 9, 9];
        let boxes = (0..8).flat_map(|x: i64| (a[x as usize]..=b[x as usize]).map(move |c| LatticeBox::new(x, x - c).unwrap()));
        let s = Shape::from_boxes(10, boxes).unwrap();
        assert_eq!(window_indices(&s, 6, 5), (1, 5));
        assert_eq!(window_indices(&s, 9, 0).0, 0);
        let st = shape_from_paths(&LatticePath::staircase_sw(3), &LatticePath::staircase_ne(3)).unwrap();
        assert_eq!(window_indices(&st, 1, 1), (0, 1));
    }

    #[test]
    fn asymptotic_examples() {
        assert_eq!(c_p(0.5, 0.6, 1.0).unwrap(), 0.0);
        assert!((c_p(0.3, 0.0, 2.0).unwrap() - 0.3 * 2.0 / 0.7).abs() < 1e-15);
        assert!(q_p(0.5, 0.6, 1.0).is_err());
        assert!(v_p(0.5, 0.0, 1.0).is_err());
        assert!(c_p(1.0, 0.0, 1.0).is_err());
    }
}
