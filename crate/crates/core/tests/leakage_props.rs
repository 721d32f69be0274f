mod common;

use alphaleak::{
    alpha_mi, alpha_mi_via_leakage, arrow_pratt, cond_renyi_entropy, cond_vulnerability, g_leakage, gain_eval,
    grid_search, make_pmf, posterior_vulnerability_hat, power_score_expectation, prior_vulnerability, random_channel,
    random_pmf, renyi_entropy, transformed_gain, Aggregator, ArrowPrattMode, Channel, Direction, GainFunction,
    LeakageSpec, Method, MiVariant, OptimizerConfig, Pmf, Sense,
};
use common::{close, instance, rel_close, rng};

fn cfg() -> OptimizerConfig {
    OptimizerConfig::default()
}

fn prior(spec: &LeakageSpec, method: Method, c: &OptimizerConfig) -> alphaleak::VulnerabilityResult {
    prior_vulnerability(&spec.prior, &spec.gain, &spec.phi, spec.sense, method, c).unwrap()
}

fn conditional(spec: &LeakageSpec, w: &Channel, method: Method, c: &OptimizerConfig) -> alphaleak::VulnerabilityResult {
    cond_vulnerability(&spec.prior, w, &spec.gain, &spec.phi, &spec.psi, spec.sense, method, c).unwrap()
}

/// `exp{∓H}` targets for the prior and conditional vulnerability of the
/// tuple matching `variant`, from the entropy side only.
fn entropy_side(v: MiVariant, p: &Pmf, w: &Channel, a: f64) -> (f64, f64) {
    let h_prior = match v {
        MiVariant::Shannon | MiVariant::AugustinCsiszar => renyi_entropy(p, 1.0).unwrap(),
        MiVariant::Arimoto | MiVariant::Hayashi => renyi_entropy(p, a).unwrap(),
        MiVariant::Sibson => renyi_entropy(p, 1.0 / a).unwrap(),
        MiVariant::LapidothPfister => renyi_entropy(p, a / (2.0 * a - 1.0)).unwrap(),
    };
    let h_cond = match v {
        MiVariant::Shannon => alphaleak::shannon_measures(p, w).unwrap().h_cond,
        _ => cond_renyi_entropy(v, p, w, a, Method::ClosedForm, &cfg()).unwrap(),
    };
    if v == MiVariant::Hayashi {
        (h_prior.exp(), h_cond.exp())
    } else {
        ((-h_prior).exp(), (-h_cond).exp())
    }
}

const ALPHAS: [f64; 4] = [0.3, 0.6, 2.0, 4.0];

#[test]
fn gain_examples() {
    let r = make_pmf(&[0.7, 0.3], false).unwrap();
    assert_eq!(gain_eval(&GainFunction::soft01(), 0, &r).unwrap(), 0.7);
    for n in [2, 3, 5] {
        for a in [0.5, 2.0, 3.0] {
            let u = Pmf::uniform(n);
            let g = GainFunction::power(a).unwrap();
            for x in 0..n {
                assert!(close(gain_eval(&g, x, &u).unwrap(), (n as f64).powf(1.0 - a), 1e-14));
            }
        }
    }
    for t in [0.1, 0.5, 1.0] {
        assert!(close(transformed_gain(f64::INFINITY, t).unwrap(), t - 1.0, 1e-15));
    }
    let zero = Pmf::point_mass(2, 1);
    assert!(gain_eval(&GainFunction::transformed(0.5).unwrap(), 0, &zero).is_err());
    assert_eq!(GainFunction::power(2.0).unwrap().sense(), Sense::Gain);
    assert_eq!(GainFunction::power(0.5).unwrap().sense(), Sense::Loss);
    assert_eq!(GainFunction::power_loss(2.0).unwrap().sense(), Sense::Loss);
}

#[test]
fn prior_vulnerability_examples() {
    let soft = GainFunction::soft01();
    let v = prior_vulnerability(&Pmf::uniform(2), &soft, &Aggregator::log(), Sense::Gain, Method::ClosedForm, &cfg());
    assert!(close(v.unwrap().value, 0.5, 1e-15));
    let p = make_pmf(&[0.8, 0.2], false).unwrap();
    let phi = Aggregator::q_log(0.5).unwrap();
    let v = prior_vulnerability(&p, &soft, &phi, Sense::Gain, Method::ClosedForm, &cfg()).unwrap();
    assert!(close(v.value, 0.68, 1e-14));
    let loss = GainFunction::power_loss(2.0).unwrap();
    let phi = Aggregator::q_log(2.0).unwrap();
    let v = prior_vulnerability(&p, &loss, &phi, Sense::Loss, Method::ClosedForm, &cfg()).unwrap();
    assert!(close(v.value, 1.0 / 0.68, 1e-12));
    let numeric = prior_vulnerability(&p, &loss, &phi, Sense::Loss, Method::Optimize, &cfg()).unwrap();
    assert!(close(numeric.value, 1.0 / 0.68, 1e-9));
}

#[test]
fn soft_prior_vulnerability_is_exp_minus_renyi_entropy() {
    // The prior soft 0-1 vulnerability under ln_{1/α} is exp{-H_α}; the
    // positive-exponent form exp{+H_α} is a different number unless H_α = 0.
    let mut r = rng(21);
    for _ in 0..50 {
        let p = random_pmf(&mut r, 3);
        for a in ALPHAS {
            let phi = Aggregator::q_log(1.0 / a).unwrap();
            let v = prior_vulnerability(&p, &GainFunction::soft01(), &phi, Sense::Gain, Method::ClosedForm, &cfg())
                .unwrap()
                .value;
            let h = renyi_entropy(&p, a).unwrap();
            assert!(rel_close(v, (-h).exp(), 1e-12));
            assert!((v - h.exp()).abs() > 1e-3);
        }
    }
}

#[test]
fn conditional_vulnerability_examples() {
    let p = make_pmf(&[0.5, 0.3, 0.2], false).unwrap();
    let id = Channel::identity(3);
    for v in MiVariant::ALL {
        let spec = LeakageSpec::for_variant(v, &p, 2.0).unwrap();
        if spec.gain != GainFunction::soft01() {
            continue;
        }
        let out = conditional(&spec, &id, Method::ClosedForm, &cfg());
        assert!(close(out.value, 1.0, 1e-9), "{v}");
        for y in 0..3 {
            assert!(out.rule.r(y, y) > 1.0 - 1e-6, "{v}");
        }
    }
    let flat = Channel::constant(3, &[0.25, 0.75]).unwrap();
    for v in MiVariant::ALL {
        for a in [0.6, 2.0] {
            let spec = LeakageSpec::for_variant(v, &p, a).unwrap();
            let c = conditional(&spec, &flat, Method::ClosedForm, &cfg()).value;
            assert!(rel_close(c, prior(&spec, Method::ClosedForm, &cfg()).value, 1e-9), "{v} {a}");
        }
    }
    let spec = LeakageSpec::for_variant(MiVariant::Arimoto, &Pmf::uniform(2), 2.0).unwrap();
    let bsc = Channel::bsc(0.1).unwrap();
    let closed = conditional(&spec, &bsc, Method::ClosedForm, &cfg()).value;
    assert!(close(closed, 0.82, 1e-12));
    let grid = conditional(&spec, &bsc, Method::Oracle, &OptimizerConfig { grid_resolution: 1e-3, ..cfg() });
    assert!((spec.phi.forward(grid.value) - spec.phi.forward(closed)).abs() <= grid.residual + 1e-12);
}

#[test]
fn theorem_identities() {
    let mut r = rng(31);
    for _ in 0..100 {
        let (p, w) = instance(&mut r);
        for a in ALPHAS {
            for v in MiVariant::ALL {
                if !v.accepts(a) {
                    continue;
                }
                let spec = LeakageSpec::for_variant(v, &p, a).unwrap();
                let (vp, vc) = entropy_side(v, &p, &w, a);
                let closed = (prior(&spec, Method::ClosedForm, &cfg()), conditional(&spec, &w, Method::ClosedForm, &cfg()));
                assert!(rel_close(closed.0.value, vp, 1e-6), "{v} α={a} prior");
                assert!(rel_close(closed.1.value, vc, 1e-6), "{v} α={a} conditional");
                let opt = (prior(&spec, Method::Optimize, &cfg()), conditional(&spec, &w, Method::Optimize, &cfg()));
                assert!(rel_close(opt.0.value, vp, 1e-3), "{v} α={a} prior optimize");
                assert!(rel_close(opt.1.value, vc, 1e-3), "{v} α={a} conditional optimize");
            }
        }
    }
}

#[test]
fn theorem_identities_on_the_grid() {
    let mut r = rng(32);
    for _ in 0..4 {
        let (p, w) = instance(&mut r);
        // Coupled tuples grid |Y| simplices jointly; keep that under the limit.
        let c = OptimizerConfig { grid_resolution: 0.1, ..cfg() };
        for a in [0.6, 2.0] {
            for v in MiVariant::ALL {
                let spec = LeakageSpec::for_variant(v, &p, a).unwrap();
                let (vp, vc) = entropy_side(v, &p, &w, a);
                let g = prior(&spec, Method::Oracle, &c);
                assert!((spec.phi.forward(g.value) - spec.phi.forward(vp)).abs() <= g.residual + 1e-12, "{v}");
                let g = conditional(&spec, &w, Method::Oracle, &c);
                assert!((spec.phi.forward(g.value) - spec.phi.forward(vc)).abs() <= g.residual + 1e-12, "{v}");
            }
        }
    }
}

#[test]
fn corollary_identities() {
    let mut r = rng(33);
    for _ in 0..100 {
        let (p, w) = instance(&mut r);
        for a in ALPHAS {
            for v in MiVariant::ALL {
                if !v.accepts(a) {
                    continue;
                }
                let direct = alpha_mi(v, &p, &w, a, Method::ClosedForm, &cfg()).unwrap();
                let leak = alpha_mi_via_leakage(v, &p, &w, a, Method::ClosedForm, &cfg()).unwrap();
                assert!(close(leak, direct, 1e-6 * direct.max(1.0)), "{v} α={a}");
                let leak = alpha_mi_via_leakage(v, &p, &w, a, Method::Optimize, &cfg()).unwrap();
                assert!(close(leak, direct, 1e-3), "{v} α={a} optimize");
            }
        }
    }
}

#[test]
fn leakage_examples() {
    let p = make_pmf(&[0.5, 0.3, 0.2], false).unwrap();
    let flat = Channel::constant(3, &[0.1, 0.9]).unwrap();
    for v in MiVariant::ALL {
        for a in [0.6, 2.0] {
            let l = alpha_mi_via_leakage(v, &p, &flat, a, Method::ClosedForm, &cfg()).unwrap();
            assert!(l.abs() <= 1e-12, "{v}");
        }
    }
    let l = alpha_mi_via_leakage(MiVariant::Arimoto, &Pmf::uniform(2), &Channel::bsc(0.1).unwrap(), 2.0, Method::ClosedForm, &cfg())
        .unwrap();
    assert!(close(l, 2f64.ln() + 0.82f64.ln(), 1e-12));
    // A point-mass prior leaves nothing to learn.
    let point = Pmf::point_mass(3, 1);
    let w = Channel::identity(3);
    for v in [MiVariant::Shannon, MiVariant::Arimoto, MiVariant::AugustinCsiszar] {
        let spec = LeakageSpec::for_variant(v, &point, 2.0).unwrap();
        let out = alphaleak::g_leakage_detailed(&spec, &w, Method::ClosedForm, &cfg()).unwrap();
        assert!(close(out.prior.value, 1.0, 1e-12) && close(out.conditional.value, 1.0, 1e-12));
        assert!(out.leakage.abs() <= 1e-12);
    }
}

#[test]
fn gain_leakage_is_never_negative() {
    let mut r = rng(34);
    let aggs = || {
        [
            Aggregator::linear(),
            Aggregator::log(),
            Aggregator::q_log(0.3).unwrap(),
            Aggregator::q_log(2.5).unwrap(),
        ]
    };
    for _ in 0..40 {
        let (p, w) = instance(&mut r);
        for phi in aggs() {
            for psi in aggs() {
                for gain in [GainFunction::soft01(), GainFunction::power(2.0).unwrap()] {
                    // The power score can be negative, so only arithmetic means apply.
                    if gain != GainFunction::soft01() && (phi != Aggregator::linear() || psi != Aggregator::linear()) {
                        continue;
                    }
                    let spec = LeakageSpec {
                        prior: p.clone(),
                        phi,
                        psi,
                        gain,
                        sense: Sense::Gain,
                    };
                    let l = g_leakage(&spec, &w, Method::ClosedForm, &cfg()).unwrap();
                    assert!(l >= -1e-9, "{phi:?} {psi:?} {l}");
                }
            }
        }
    }
}

#[test]
fn posterior_form_agrees_when_means_match() {
    let mut r = rng(35);
    for _ in 0..30 {
        let (p, w) = instance(&mut r);
        for a in ALPHAS {
            for v in [MiVariant::Arimoto, MiVariant::Sibson, MiVariant::Hayashi, MiVariant::Shannon] {
                let spec = LeakageSpec::for_variant(v, &p, a).unwrap();
                let hat =
                    posterior_vulnerability_hat(&spec.prior, &w, &spec.gain, &spec.phi, &spec.psi, spec.sense, &cfg())
                        .unwrap();
                let full = conditional(&spec, &w, Method::ClosedForm, &cfg()).value;
                assert!(rel_close(hat, full, 1e-9), "{v} α={a}");
            }
            // Mixed means: both are finite; no ordering is asserted.
            let spec = LeakageSpec::for_variant(MiVariant::AugustinCsiszar, &p, a).unwrap();
            let hat = posterior_vulnerability_hat(&spec.prior, &w, &spec.gain, &spec.phi, &spec.psi, spec.sense, &cfg())
                .unwrap();
            assert!(hat.is_finite() && hat > 0.0);
        }
    }
    let id = Channel::identity(3);
    let p = make_pmf(&[0.2, 0.3, 0.5], false).unwrap();
    let spec = LeakageSpec::for_variant(MiVariant::AugustinCsiszar, &p, 2.0).unwrap();
    let hat = posterior_vulnerability_hat(&p, &id, &spec.gain, &spec.phi, &spec.psi, spec.sense, &cfg()).unwrap();
    assert!(close(hat, 1.0, 1e-12));
}

#[test]
fn optimal_rule_is_invariant_under_positive_affine_means() {
    let mut r = rng(36);
    for _ in 0..30 {
        let (p, w) = instance(&mut r);
        for a in [0.6, 2.0] {
            let phi = Aggregator::q_log(1.0 / a).unwrap();
            let scaled = phi.affine(3.5, -2.0).unwrap();
            let soft = GainFunction::soft01();
            for method in [Method::ClosedForm, Method::Optimize] {
                let base = cond_vulnerability(&p, &w, &soft, &phi, &phi, Sense::Gain, method, &cfg()).unwrap();
                let other = cond_vulnerability(&p, &w, &soft, &scaled, &scaled, Sense::Gain, method, &cfg()).unwrap();
                for (ra, rb) in base.rule.components().iter().zip(other.rule.components()) {
                    for (x, y) in ra.iter().zip(rb) {
                        assert!(close(*x, *y, 1e-6));
                    }
                }
            }
            // Each recorded rule component maximizes the posterior φ-gain.
            let base = cond_vulnerability(&p, &w, &soft, &phi, &phi, Sense::Gain, Method::ClosedForm, &cfg()).unwrap();
            let joint = alphaleak::compose_joint(&p, &w).unwrap();
            for y in 0..w.ny() {
                let post = joint.posterior(y).unwrap();
                let score = |q: &[f64]| -> f64 { (0..post.len()).map(|x| post[x] * phi.forward(q[x])).sum() };
                let g = grid_search(|q: &[Vec<f64>]| score(&q[0]), &[p.len()], Direction::Maximize, 0.01).unwrap();
                assert!(score(base.rule.component(y)) >= g.value - 1e-12);
            }
        }
    }
}

#[test]
fn decreasing_means_give_the_same_vulnerabilities() {
    let mut r = rng(37);
    for _ in 0..20 {
        let (p, w) = instance(&mut r);
        for a in [0.6, 2.0] {
            for v in MiVariant::ALL {
                let spec = LeakageSpec::for_variant(v, &p, a).unwrap();
                let flipped = LeakageSpec {
                    phi: spec.phi.affine(-2.0, 1.0).unwrap(),
                    psi: spec.psi.affine(-0.5, 3.0).unwrap(),
                    ..spec.clone()
                };
                assert!(!flipped.phi.is_increasing());
                for method in [Method::ClosedForm, Method::Optimize] {
                    let base = prior(&spec, method, &cfg()).value;
                    let other = prior(&flipped, method, &cfg()).value;
                    assert!(rel_close(base, other, 1e-8), "{v} α={a} {method} prior");
                    let base = conditional(&spec, &w, method, &cfg());
                    let other = conditional(&flipped, &w, method, &cfg());
                    assert!(rel_close(base.value, other.value, 1e-6), "{v} α={a} {method}");
                    let l1: f64 = base
                        .rule
                        .components()
                        .iter()
                        .zip(other.rule.components())
                        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>())
                        .sum();
                    assert!(l1 <= 1e-4, "{v} α={a} {method} rule {l1}");
                }
            }
        }
    }
}

#[test]
fn power_score_optimum_is_the_power_sum() {
    let mut r = rng(38);
    for _ in 0..50 {
        let p = random_pmf(&mut r, 3);
        for a in [0.5, 2.0] {
            let direction = if a > 1.0 { Direction::Maximize } else { Direction::Minimize };
            let f = |q: &[Vec<f64>]| {
                let guess = Pmf::new(&q[0], false).unwrap();
                power_score_expectation(&p, &guess, a).unwrap()
            };
            let g = grid_search(f, &[3], direction, 0.01).unwrap();
            let exact = alphaleak::p_norm(&p, a).unwrap().powf(a);
            assert!((g.value - exact).abs() <= g.bound + 1e-12);
            let gap = if a > 1.0 { exact - g.value } else { g.value - exact };
            assert!(gap >= -1e-12);
        }
    }
}

#[test]
fn arrow_pratt_examples_and_monotonicity() {
    assert_eq!(arrow_pratt(2.0, 0.5, ArrowPrattMode::Closed).unwrap(), 1.0);
    assert_eq!(arrow_pratt(1.0, 1.0, ArrowPrattMode::Closed).unwrap(), 1.0);
    assert!(arrow_pratt(1.0, 5e-4, ArrowPrattMode::FiniteDiff).is_err());
    for k in 0..=95 {
        let r = 0.05 + 0.01 * k as f64;
        let mut last = f64::INFINITY;
        for a in [0.5, 1.0, 2.0, 5.0] {
            let closed = arrow_pratt(a, r, ArrowPrattMode::Closed).unwrap();
            let fd = arrow_pratt(a, r, ArrowPrattMode::FiniteDiff).unwrap();
            assert!(close(fd, closed, 1e-4), "α={a} r={r}");
            assert!(closed < last);
            last = closed;
        }
    }
}

#[test]
fn random_channels_have_positive_leakage_for_every_variant() {
    let mut r = rng(39);
    let p = random_pmf(&mut r, 3);
    let w = random_channel(&mut r, 3, 3);
    for v in MiVariant::ALL {
        let l = alpha_mi_via_leakage(v, &p, &w, 2.0, Method::ClosedForm, &cfg()).unwrap();
        assert!(l > 0.0, "{v}");
    }
}

#[test]
fn oracle_bound_covers_an_optimum_inside_the_boundary_cell() {
    // The optimal guess puts 0.001 on the second symbol, inside the first
    // grid cell, and the loss diverges on the boundary itself.
    let p = make_pmf(&[0.999, 0.001], false).unwrap();
    let spec = LeakageSpec::for_variant(MiVariant::Hayashi, &p, 0.3).unwrap();
    let exact = prior(&spec, Method::ClosedForm, &cfg()).value;
    for res in [0.1, 0.05, 0.01, 0.005] {
        let g = prior(&spec, Method::Oracle, &OptimizerConfig { grid_resolution: res, ..cfg() });
        let err = (spec.phi.forward(g.value) - spec.phi.forward(exact)).abs();
        assert!(err <= g.residual, "res {res}: {err} > {}", g.residual);
    }
}
