mod common;

use alphaleak::{
    augustin_fixed_point, compose_joint, eg_optimize, gibbs_optimum, grid_search, lp_alternating, make_pmf, q_log,
    random_channel, random_pmf, simplex_grid, AugustinEngine, Channel, Direction, Error, JointDist, OptimizerConfig,
    Pmf,
};
use common::{close, rng};
use rand::Rng;

fn cfg() -> OptimizerConfig {
    OptimizerConfig::default()
}

#[test]
fn grid_examples() {
    let g = simplex_grid(2, 0.5).unwrap();
    let pts: Vec<Vec<f64>> = g.iter().map(|p| p.probs().to_vec()).collect();
    assert_eq!(pts, vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]]);
    assert_eq!(simplex_grid(3, 0.5).unwrap().len(), 6);
    assert_eq!(simplex_grid(4, 0.01).unwrap().len(), 176_851);
    assert!(simplex_grid(3, 0.3).is_err());
    assert!(matches!(simplex_grid(4, 1e-4), Err(Error::OracleTooLarge { .. })));
}

#[test]
fn linear_objective_reaches_a_vertex() {
    let c = [0.3, 1.7, -0.4];
    let f = |pt: &[Vec<f64>]| pt[0].iter().zip(c).map(|(r, c)| r * c).sum::<f64>();
    let out = eg_optimize(&f, &[3], Direction::Maximize, &cfg()).unwrap();
    assert!(out.point[0][1] > 1.0 - 1e-8);
    assert!(close(out.value, 1.7, 1e-8));
}

#[test]
fn eg_finds_the_gibbs_optimum() {
    let mut r = rng(8);
    for _ in 0..20 {
        let p = random_pmf(&mut r, 4);
        for q in [0.5, 2.0] {
            let f = |pt: &[Vec<f64>]| (0..4).map(|x| p.get(x) * q_log(pt[0][x], q).unwrap()).sum::<f64>();
            let out = eg_optimize(&f, &[4], Direction::Maximize, &cfg()).unwrap();
            let exact = gibbs_optimum(&p, q).unwrap();
            let found = Pmf::new(&out.point[0], false).unwrap();
            assert!(found.l1_distance(&exact.argmax).unwrap() <= 0.01);
        }
    }
}

#[test]
fn eg_never_loses_ground() {
    let mut r = rng(9);
    for k in 0..100 {
        let n = r.random_range(2..=5);
        let a: Vec<f64> = (0..n).map(|_| r.random_range(0.1..2.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
        let w: f64 = r.random_range(1.0..10.0);
        let smooth = |pt: &[Vec<f64>]| -> f64 {
            pt[0]
                .iter()
                .enumerate()
                .map(|(i, &x)| a[i] * (1.0 + x).ln() + b[i] * x * x + (w * x).sin())
                .sum()
        };
        let c = OptimizerConfig {
            seed: k,
            restarts: 3,
            ..cfg()
        };
        let out = eg_optimize(&smooth, &[n], Direction::Maximize, &c).unwrap();
        assert!(out.value >= out.initial_value - 1e-12, "instance {k}");
    }
}

#[test]
fn eg_is_deterministic() {
    let p = make_pmf(&[0.1, 0.6, 0.3], false).unwrap();
    let f = |pt: &[Vec<f64>]| {
        (0..3).map(|x| p.get(x) * q_log(pt[0][x], 3.0).unwrap()).sum::<f64>() + (pt[1][0] - 0.2).powi(2)
    };
    let c = OptimizerConfig { seed: 42, ..cfg() };
    let a = eg_optimize(&f, &[3, 2], Direction::Maximize, &c).unwrap();
    let b = eg_optimize(&f, &[3, 2], Direction::Maximize, &c).unwrap();
    assert_eq!(a, b);
}

#[test]
fn augustin_examples() {
    let p = Pmf::uniform(2);
    let w = Channel::bsc(0.2).unwrap();
    for a in [0.4, 3.0] {
        let out = augustin_fixed_point(&p, &w, a, &cfg()).unwrap();
        assert!(close(out.q_y.get(0), 0.5, 1e-12));
        assert_eq!(out.engine, AugustinEngine::FixedPoint);
    }
    let p = make_pmf(&[0.3, 0.7], false).unwrap();
    let w = Channel::new(vec![vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3]]).unwrap();
    let out = augustin_fixed_point(&p, &w, 1.0, &cfg()).unwrap();
    assert_eq!(out.engine, AugustinEngine::Marginal);
    let joint = compose_joint(&p, &w).unwrap();
    assert_eq!(out.q_y.probs(), joint.p_y());
}

fn augustin_value(p: &Pmf, w: &Channel, alpha: f64, q: &[f64]) -> f64 {
    (0..w.nx())
        .map(|x| {
            let s: f64 = (0..w.ny()).map(|y| w.w(x, y).powf(alpha) * q[y].powf(1.0 - alpha)).sum();
            p.get(x) * s.ln() / (alpha - 1.0)
        })
        .sum()
}

#[test]
fn augustin_steps_shrink_for_orders_below_one() {
    let mut r = rng(10);
    for _ in 0..50 {
        let nx = r.random_range(2..=4);
        let ny = r.random_range(2..=4);
        let p = random_pmf(&mut r, nx);
        let w = random_channel(&mut r, nx, ny);
        let a = r.random_range(0.05..0.95);
        let out = augustin_fixed_point(&p, &w, a, &cfg()).unwrap();
        for pair in out.residuals.windows(2).skip(10) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-9) + 1e-15, "α={a}: {pair:?}");
        }
    }
}

#[test]
fn augustin_matches_a_fine_grid() {
    let mut r = rng(12);
    for _ in 0..10 {
        let nx = r.random_range(2..=3);
        let p = random_pmf(&mut r, nx);
        let w = random_channel(&mut r, nx, 3);
        for a in [0.3, 0.7, 2.0, 4.0] {
            let fixed = augustin_fixed_point(&p, &w, a, &cfg()).unwrap();
            let grid = grid_search(|q: &[Vec<f64>]| augustin_value(&p, &w, a, &q[0]), &[3], Direction::Minimize, 2e-3)
                .unwrap();
            assert!(fixed.value <= grid.value + 1e-12);
            assert!(grid.value - fixed.value <= 1e-3, "α={a}");
        }
    }
}

#[test]
fn lp_examples() {
    let px = make_pmf(&[0.3, 0.7], false).unwrap();
    let w = Channel::constant(2, &[0.2, 0.5, 0.3]).unwrap();
    let joint = compose_joint(&px, &w).unwrap();
    for a in [0.7, 3.0] {
        let out = lp_alternating(&joint, a, &cfg()).unwrap();
        assert!(out.value.abs() <= 1e-12);
        assert!(out.q_x.l1_distance(&px).unwrap() <= 1e-9);
    }
    let sym = JointDist::new(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
    let out = lp_alternating(&sym, 2.0, &cfg()).unwrap();
    assert!(close(out.q_x.get(0), 0.5, 1e-12) && close(out.q_y.get(0), 0.5, 1e-12));
    assert!(matches!(lp_alternating(&sym, 0.5, &cfg()), Err(Error::InvalidOrder { .. })));
}

fn product_divergence(joint: &JointDist, qx: &[f64], qy: &[f64], alpha: f64) -> f64 {
    let mut s = 0.0;
    for x in 0..joint.nx() {
        for y in 0..joint.ny() {
            let v = joint.p(x, y);
            if v > 0.0 {
                s += v.powf(alpha) * (qx[x] * qy[y]).powf(1.0 - alpha);
            }
        }
    }
    s.ln() / (alpha - 1.0)
}

#[test]
fn lp_values_never_increase() {
    let mut r = rng(13);
    for _ in 0..50 {
        let p = random_pmf(&mut r, 3);
        let w = random_channel(&mut r, 3, 3);
        let joint = compose_joint(&p, &w).unwrap();
        for a in [0.6, 0.9, 1.5, 4.0] {
            let out = lp_alternating(&joint, a, &cfg()).unwrap();
            for pair in out.values.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-14, "α={a}");
            }
        }
    }
}

#[test]
fn lp_matches_the_product_grid() {
    // Double grid over (q_X, q_Y) on a 3×3 joint: 1326² points at 0.025.
    let mut r = rng(14);
    for _ in 0..2 {
        let p = random_pmf(&mut r, 3);
        let w = random_channel(&mut r, 3, 3);
        let joint = compose_joint(&p, &w).unwrap();
        for a in [0.7, 2.0] {
            let out = lp_alternating(&joint, a, &cfg()).unwrap();
            let grid = grid_search(
                |q: &[Vec<f64>]| product_divergence(&joint, &q[0], &q[1], a),
                &[3, 3],
                Direction::Minimize,
                0.025,
            )
            .unwrap();
            assert!(out.value <= grid.value + 1e-12);
            assert!(grid.value - out.value <= grid.bound, "α={a}");
            assert!(grid.value - out.value <= 1e-2, "α={a}");
        }
    }
}

#[test]
fn grid_sandwich_around_closed_forms() {
    let mut r = rng(15);
    for _ in 0..20 {
        let p = random_pmf(&mut r, 3);
        for q in [0.5, 2.0] {
            let exact = gibbs_optimum(&p, q).unwrap().value;
            let f = |pt: &[Vec<f64>]| (0..3).map(|x| p.get(x) * q_log(pt[0][x], q).unwrap()).sum::<f64>();
            let g = grid_search(f, &[3], Direction::Maximize, 0.01).unwrap();
            assert!(g.value <= exact + 1e-9);
            assert!(exact - g.value <= g.bound);
        }
    }
}
