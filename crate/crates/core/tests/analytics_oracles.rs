mod common;

use proptest::prelude::*;
use rand::Rng;

use permuton::analytics::{
    classify_region, common_refinement, common_refinement_capped, f_p, h_p, nu_height, polyphemus_geometry,
    rectangle_nu_check, refine, rotate_grid, sample_from_permuton, star, uniform_grid,
};
use permuton::hecke::{all_permutations, demazure_product, height_grid, random_permutation};
use permuton::rng;
use permuton::{AnalyticPermuton, BoundaryPair, Error, RegionLabel};

fn pairs() -> Vec<(&'static str, BoundaryPair)> {
    vec![
        ("staircase", BoundaryPair::staircase()),
        ("rectangle 2/3", BoundaryPair::peridot(2.0 / 3.0).unwrap()),
        ("rectangle 0.3", BoundaryPair::peridot(0.3).unwrap()),
        ("trapezoid", BoundaryPair::trapezoid(0.3, 0.6, 0.2).unwrap()),
        ("parallelogram", BoundaryPair::parallelogram(0.25, 0.5).unwrap()),
    ]
}

#[test]
fn limit_height_matches_bisection() {
    let mut r = rng::seeded(21);
    for (name, pair) in pairs() {
        for &p in &[0.2, 0.5, 0.9] {
            for _ in 0..2000 {
                let (x, y) = (r.gen::<f64>(), r.gen::<f64>());
                let h = h_p(&pair, p, x, y).unwrap();
                let o = common::height_by_bisection(p, pair.spread(x, y), x, y);
                assert!((h - o).abs() < 1e-9, "{name} p={p} ({x}, {y}): {h} vs {o}");
            }
        }
    }
}

#[test]
fn limit_height_marginals() {
    for (name, pair) in pairs() {
        for &p in &[0.3, 0.5, 1.0] {
            for k in 0..=100 {
                let t = k as f64 / 100.0;
                let at = |x, y| h_p(&pair, p, x, y).unwrap();
                assert!(at(t, 0.0).abs() < 1e-12, "{name}");
                assert!((at(0.0, t) - t).abs() < 1e-12, "{name}");
                assert!(at(1.0, t).abs() < 1e-12, "{name}");
                assert!((at(t, 1.0) - (1.0 - t)).abs() < 1e-12, "{name}");
            }
        }
    }
}

#[test]
fn limit_height_is_lipschitz() {
    let n = 200;
    for (name, pair) in pairs() {
        let a = AnalyticPermuton::PipedreamLimit { pair, p: 0.5 };
        for i in 0..n {
            for j in 0..n {
                let (x, y, d) = (i as f64 / n as f64, j as f64 / n as f64, 1.0 / n as f64);
                let h = a.height(x, y);
                assert!((a.height(x + d, y) - h).abs() <= d + 1e-12, "{name}");
                assert!((a.height(x, y + d) - h).abs() <= d + 1e-12, "{name}");
                assert!(a.height(x, y + d) >= h - 1e-12, "{name}");
                assert!(a.height(x + d, y) <= h + 1e-12, "{name}");
            }
        }
    }
}

#[test]
fn pipe_dream_limit_examples() {
    let st = BoundaryPair::staircase();
    assert!((f_p(&st, 1.0, 0.3, 0.6).unwrap() - 0.6).abs() < 1e-15);
    let f = f_p(&st, 0.5, 0.5, 0.5).unwrap();
    assert!((f - (1.5 - 4.0 * 0.125f64.sqrt())).abs() < 1e-12);
    for &(x, y) in &[(0.2, 0.7), (0.8, 0.3), (0.5, 0.5)] {
        assert!((h_p(&st, 1.0, x, y).unwrap() - f64::min(y, 1.0 - x)).abs() < 1e-15);
    }
    let (alpha, beta) = (0.15, 0.4);
    let par = BoundaryPair::parallelogram(alpha, beta).unwrap();
    let mut r = rng::seeded(5);
    for _ in 0..1000 {
        let (x, g) = (r.gen::<f64>(), r.gen::<f64>());
        let want = f64::min(f64::max(f64::max(0.0, g - x), (1.0 - beta) * (g - x) + alpha), f64::min(1.0 - x, g));
        assert!((h_p(&par, 1.0, x, g).unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn region_examples() {
    let pair = BoundaryPair::peridot(2.0 / 3.0).unwrap();
    assert_eq!(classify_region(&pair, 0.5, 0.9, 0.1), RegionLabel::PSe);
    assert_eq!(classify_region(&pair, 0.5, 0.1, 0.9), RegionLabel::PNw);
    assert_ne!(classify_region(&pair, 0.5, 0.0, 0.0), RegionLabel::K);
    assert_eq!(classify_region(&pair, 0.5, 0.5, 0.5), RegionLabel::K);
}

#[test]
fn nu_height_examples() {
    assert!((nu_height(0.25, 0.5, 0.9, 0.2).unwrap() - 0.1).abs() < 1e-15);
    assert!((nu_height(0.25, 0.5, 0.3, 0.2).unwrap() - 0.2).abs() < 1e-15);
    assert!((rectangle_nu_check(0.5, 0.25, 0.5) - 0.5).abs() < 1e-15);
    assert!((rectangle_nu_check(0.3, 0.3, 1.0) - 0.7).abs() < 1e-15);
    assert!(nu_height(0.0, 0.5, 0.5, 0.5).is_err());
    assert!(nu_height(0.2, 1.5, 0.5, 0.5).is_err());
}

#[test]
fn rectangle_formula_agrees_with_nu() {
    let mut r = rng::seeded(8);
    for _ in 0..10_000 {
        let beta = r.gen_range(0.01..0.99);
        let (x, y) = (r.gen::<f64>(), r.gen::<f64>());
        let a = rectangle_nu_check(beta, x, y);
        let b = nu_height(beta * (1.0 - beta), beta, x, y).unwrap();
        assert!((a - b).abs() < 1e-12, "beta={beta} ({x}, {y}): {a} vs {b}");
    }
}

#[test]
fn nu_is_min_over_parallelogram() {
    let points = 2000;
    for &(alpha, beta) in &[(0.2, 1.0), (0.25, 0.5), (0.1, 0.3), (0.4, 0.8)] {
        let par = BoundaryPair::parallelogram(alpha, beta).unwrap();
        for i in 1..10 {
            for j in 1..10 {
                let (x, y) = (i as f64 / 10.0, j as f64 / 10.0);
                let m = (0..=points)
                    .map(|k| k as f64 / points as f64)
                    .map(|g| (1.0 - g) * y + h_p(&par, 1.0, x, g).unwrap())
                    .fold(f64::INFINITY, f64::min);
                let nu = nu_height(alpha, beta, x, y).unwrap();
                assert!((m - nu).abs() <= 2.0 / points as f64, "alpha={alpha} beta={beta} ({x}, {y}): {m} vs {nu}");
            }
        }
    }
}

#[test]
fn star_associative_and_exact() {
    let mut r = rng::seeded(9);
    for _ in 0..50 {
        let n = r.gen_range(1..=20);
        let (a, b, c) = (random_permutation(n, &mut r), random_permutation(n, &mut r), random_permutation(n, &mut r));
        let (ga, gb, gc) = (height_grid(&a), height_grid(&b), height_grid(&c));
        let left = star(&star(&ga, &gb).unwrap(), &gc).unwrap();
        let right = star(&ga, &star(&gb, &gc).unwrap()).unwrap();
        assert_eq!(left, right);
        let abc = demazure_product(&demazure_product(&a, &b).unwrap(), &c).unwrap();
        assert_eq!(left, height_grid(&abc));
    }
}

#[test]
fn star_identity_neutral() {
    for v in all_permutations(4) {
        let id = height_grid(&permuton::Permutation::identity(4));
        assert_eq!(star(&id, &height_grid(&v)).unwrap(), height_grid(&v));
        assert_eq!(star(&height_grid(&v), &id).unwrap(), height_grid(&v));
    }
    let a = height_grid(&"21".parse().unwrap());
    let b = height_grid(&"231".parse().unwrap());
    assert!(matches!(star(&a, &b), Err(Error::Argument(_))));
}

#[test]
fn uniform_product_is_antidiagonal() {
    let n = 100;
    let g = star(&uniform_grid(n), &uniform_grid(n)).unwrap();
    for i in 0..=n {
        for j in 0..=n {
            let (x, y) = (i as f64 / n as f64, j as f64 / n as f64);
            assert!((g.value(i, j) - y.min(1.0 - x)).abs() <= 0.01);
        }
    }
}

#[test]
fn refinement_is_exact() {
    let id2 = height_grid(&"12".parse().unwrap());
    let id4 = refine(&id2, 2).unwrap();
    for i in 0..=4 {
        for j in 0..=4 {
            let (x, y) = (i as f64 / 4.0, j as f64 / 4.0);
            let exact = permuton::Permutation::identity(2).height(x, y);
            assert!((id4.value(i, j) - exact).abs() < 1e-15);
        }
    }
    let mut r = rng::seeded(4);
    for _ in 0..20 {
        let (u, v) = (random_permutation(6, &mut r), random_permutation(6, &mut r));
        let (gu, gv) = (height_grid(&u), height_grid(&v));
        let (ru, rv) = common_refinement(&gu, &gv).unwrap();
        assert_eq!((&ru, &rv), (&gu, &gv));
        let direct = star(&gu, &gv).unwrap();
        let fine = star(&refine(&gu, 3).unwrap(), &refine(&gv, 3).unwrap()).unwrap();
        for i in 0..=6 {
            for j in 0..=6 {
                assert_eq!(fine.get(3 * i, 3 * j), 9 * direct.get(i, j));
            }
        }
    }
    let (a, b) = (height_grid(&"21".parse().unwrap()), height_grid(&"231".parse().unwrap()));
    let (ra, rb) = common_refinement(&a, &b).unwrap();
    assert_eq!((ra.n(), rb.n()), (6, 6));
    assert!(matches!(common_refinement_capped(&a, &b, 4), Err(Error::Config(_))));
}

#[test]
fn rotation_properties() {
    let mut r = rng::seeded(6);
    for _ in 0..50 {
        let n = r.gen_range(1..=15);
        let (u, v) = (random_permutation(n, &mut r), random_permutation(n, &mut r));
        let (gu, gv) = (height_grid(&u), height_grid(&v));
        assert_eq!(rotate_grid(&rotate_grid(&gu)), gu);
        let rotated_perm = |w: &permuton::Permutation| {
            permuton::Permutation::new((1..=n).map(|i| n as u32 + 1 - w.at(n + 1 - i)).collect()).unwrap()
        };
        assert_eq!(rotate_grid(&gu), height_grid(&rotated_perm(&u)));
        let lhs = star(&rotate_grid(&gu), &rotate_grid(&gv)).unwrap();
        assert_eq!(lhs, rotate_grid(&star(&gu, &gv).unwrap()));
    }
    for a in [AnalyticPermuton::Identity, AnalyticPermuton::Uniform] {
        for k in 0..=20 {
            let (x, y) = (k as f64 / 20.0, (k * 7 % 21) as f64 / 20.0);
            let rot = y - x + a.height(1.0 - x, 1.0 - y);
            assert!((rot - a.rotated().height(x, y)).abs() < 1e-12);
        }
    }
    for beta in [0.0, 0.3, 0.5, 1.0] {
        let (a, b) = (BoundaryPair::peridot(beta).unwrap().rotated(), BoundaryPair::peridot(1.0 - beta).unwrap());
        for k in 0..=20 {
            let z = k as f64 / 20.0;
            assert!((a.phi().eval(z) - b.phi().eval(z)).abs() < 1e-12);
            assert!((a.psi().eval(z) - b.psi().eval(z)).abs() < 1e-12);
        }
    }
    for (name, pair) in pairs() {
        let a = AnalyticPermuton::PipedreamLimit { pair, p: 0.4 };
        let b = a.rotated();
        for i in 0..=20 {
            for j in 0..=20 {
                let (x, y) = (i as f64 / 20.0, j as f64 / 20.0);
                let want = y - x + a.height(1.0 - x, 1.0 - y);
                assert!((b.height(x, y) - want).abs() < 1e-9, "{name} ({x}, {y})");
            }
        }
    }
}

#[test]
fn polyphemus_examples() {
    let g = polyphemus_geometry(0.5, 0.5, 0.75, 1.0).unwrap();
    assert!((g.tangent_sw[0].1 - 2.0 / 3.0).abs() < 1e-12 && g.tangent_sw[0].0 == 0.0);
    assert!((g.tangent_sw[1].0 - 0.8).abs() < 1e-12 && g.tangent_sw[1].1 == 0.0);
    for pt in g.tangent_sw {
        assert!(g.on_conic_sw(pt.0, pt.1));
    }
    for pt in g.tangent_ne {
        assert!(g.on_conic_ne(pt.0, pt.1));
    }
    assert!(polyphemus_geometry(0.5, 0.3, 0.6, 0.0).unwrap().degenerate_sw());
    let d = polyphemus_geometry(0.5, 0.7, 0.2, 0.5).unwrap();
    assert!(d.degenerate_ne());
    assert!((d.tangent_ne[0].1 - 1.0).abs() < 1e-12);
    assert!(polyphemus_geometry(0.5, 0.7, 0.2, 0.4).is_err());
    assert!(polyphemus_geometry(1.0, 0.5, 0.5, 0.5).is_err());
}

#[test]
fn sampling_examples() {
    assert_eq!(sample_from_permuton(&AnalyticPermuton::Uniform, 1, 3).unwrap().values(), &[1]);
    for seed in 0..20 {
        let u = sample_from_permuton(&AnalyticPermuton::AntiDiagonal, 9, seed).unwrap();
        assert_eq!(u, permuton::Permutation::longest(9));
    }
    let mut counts = std::collections::HashMap::new();
    let draws = 6000;
    for seed in 0..draws {
        *counts.entry(sample_from_permuton(&AnalyticPermuton::Uniform, 3, seed).unwrap()).or_insert(0u32) += 1;
    }
    assert_eq!(counts.len(), 6);
    let sigma = (draws as f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
    for c in counts.values() {
        assert!((*c as f64 - draws as f64 / 6.0).abs() < 5.0 * sigma);
    }
}

#[test]
fn sampled_permutations_follow_the_limit() {
    let a = AnalyticPermuton::BubbleNu { alpha: 0.2, beta: 1.0 };
    let u = sample_from_permuton(&a, 3000, 11).unwrap();
    for i in 1..10 {
        for j in 1..10 {
            let (x, y) = (i as f64 / 10.0, j as f64 / 10.0);
            assert!((u.height(x, y) - a.height(x, y)).abs() < 0.03);
        }
    }
}

#[test]
fn permuton_json_round_trip() {
    let a = AnalyticPermuton::StarProduct(vec![
        AnalyticPermuton::PipedreamLimit { pair: BoundaryPair::peridot(0.5).unwrap(), p: 0.5 },
        AnalyticPermuton::BubbleNu { alpha: 0.1, beta: 0.5 },
    ]);
    let text = serde_json::to_string(&a).unwrap();
    assert!(text.contains("\"kind\":\"star-product\""));
    let back: AnalyticPermuton = serde_json::from_str(&text).unwrap();
    assert_eq!(a, back);
}

proptest! {
    #[test]
    fn limit_height_within_clamps(x in 0.0f64..=1.0, y in 0.0f64..=1.0, p in 0.01f64..=1.0, beta in 0.0f64..=1.0) {
        let pair = BoundaryPair::peridot(beta).unwrap();
        let h = h_p(&pair, p, x, y).unwrap();
        prop_assert!(h >= (y - x).max(0.0) - 1e-12);
        prop_assert!(h <= (1.0 - x).min(y) + 1e-12);
    }

    #[test]
    fn star_with_antidiagonal_absorbs(seed in any::<u64>(), n in 1usize..12) {
        let u = permuton::hecke::uniform_random_permutation(n, seed).unwrap();
        let d = height_grid(&permuton::Permutation::longest(n));
        prop_assert_eq!(star(&height_grid(&u), &d).unwrap(), d.clone());
        prop_assert_eq!(star(&d, &height_grid(&u)).unwrap(), d);
    }
}
