mod common;

use proptest::prelude::*;

use permuton::hecke::{all_permutations, height_grid, tau_in_place};
use permuton::rng;
use permuton::tasep::{column_jumps, geometric_sample, iota, particle_statistic};
use permuton::{GeomParam, Permutation, TasepState};

/// Folds one column: contents `hi` down to `lo`, crossing where `mask` has a bit.
fn fold_column(w: &Permutation, lo: u32, hi: u32, mask: u32) -> Permutation {
    let mut v = w.values().to_vec();
    for c in (lo..=hi).rev() {
        if mask >> (c - lo) & 1 == 1 {
            tau_in_place(&mut v, c as usize);
        }
    }
    Permutation::new(v).unwrap()
}

fn coupling_holds(w: &Permutation, k: usize, lo: u32, hi: u32, mask: u32) -> bool {
    let n = w.n();
    let cross = |c: u32| mask >> (c - lo) & 1 == 1;
    let mut s = iota(w, k).unwrap();
    let jumps = column_jumps(&s, n, lo, hi, cross);
    s.step_with_jumps(&jumps, Some(n as i64 + 1 - lo as i64));
    let after = iota(&fold_column(w, lo, hi, mask), k).unwrap();
    s.positions() == after.positions()
}

#[test]
fn column_coupling_exhaustive() {
    let mut cases = 0;
    for n in 2..=6 {
        let perms = all_permutations(n);
        for lo in 1..n as u32 {
            for hi in lo..n as u32 {
                for mask in 0..1u32 << (hi - lo + 1) {
                    for w in &perms {
                        for k in 1..=n {
                            assert!(coupling_holds(w, k, lo, hi, mask), "w={w} k={k} column {lo}..={hi} mask {mask:b}");
                            cases += 1;
                        }
                    }
                }
            }
        }
    }
    assert!(cases > 100_000);
}

#[test]
fn column_coupling_random_larger() {
    let mut r = rng::seeded(41);
    for _ in 0..2000 {
        let n = 12;
        let w = permuton::hecke::random_permutation(n, &mut r);
        let lo = rand::Rng::gen_range(&mut r, 1..n as u32);
        let hi = rand::Rng::gen_range(&mut r, lo..(lo + 6).min(n as u32));
        let mask = rand::Rng::gen_range(&mut r, 0..1u32 << (hi - lo + 1));
        let k = rand::Rng::gen_range(&mut r, 1..=n);
        assert!(coupling_holds(&w, k, lo, hi, mask));
    }
}

#[test]
fn particle_statistic_matches_height() {
    for n in 1..=4 {
        for w in all_permutations(n) {
            let g = height_grid(&w);
            for k in 1..=n {
                let s = iota(&w, k).unwrap();
                for kp in 0..=n {
                    let count = particle_statistic(&s, (n - kp + 1) as i64) as i64;
                    // (x - y + H(x, y)) n at x = k'/n, y = (n-k)/n
                    assert_eq!(count, kp as i64 - (n - k) as i64 + g.get(kp, n - k), "w={w} k={k} k'={kp}");
                    assert_eq!(g.get(kp, n - k), common::grid_height(&w, kp, n - k));
                }
            }
        }
    }
}

#[test]
fn geometric_mean() {
    let p = GeomParam::new(0.5).unwrap();
    let mut r = rng::seeded(3);
    let trials = 100_000;
    let mean = (0..trials).map(|_| geometric_sample(p, &mut r) as f64).sum::<f64>() / trials as f64;
    // variance p / (1-p)^2 = 2
    let sigma = (2.0 / trials as f64).sqrt();
    assert!((mean - 1.0).abs() < 5.0 * sigma, "mean {mean}");
}

proptest! {
    #[test]
    fn steps_keep_order(k in 1usize..30, seed in any::<u64>(), p in 0.05f64..0.95, barrier in proptest::option::of(1i64..80)) {
        let g = GeomParam::new(p).unwrap();
        let mut r = rng::seeded(seed);
        let mut s = TasepState::step_initial(k);
        for _ in 0..40 {
            let before = s.positions().to_vec();
            s.step(g, &mut r, barrier);
            let xs = s.positions();
            prop_assert!(xs.windows(2).all(|w| w[0] > w[1]));
            prop_assert!(xs.iter().zip(&before).all(|(a, b)| a >= b));
            prop_assert!(*xs.last().unwrap() >= 1);
            if let Some(b) = barrier {
                prop_assert!(xs.iter().zip(&before).all(|(&a, &old)| old >= b || a <= b));
            }
        }
    }
}
