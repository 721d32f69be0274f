//! α-mutual information and generalized g-leakage on finite alphabets.
//!
//! The crate computes Rényi entropies and divergences, the conditional Rényi
//! entropies of Arimoto, Hayashi, Sibson, Augustin–Csiszár and
//! Lapidoth–Pfister type, the matching α-mutual informations, and the
//! generalized vulnerabilities whose multiplicative leakage reproduces each
//! of them. Every variational quantity can be evaluated three ways (closed
//! form, exponentiated gradient, exhaustive grid), which lets the identities
//! between them be checked numerically.
//!
//! All logarithms are natural; results are in nats.
//!
//! ```
//! use alphaleak::{alpha_mi, alpha_mi_via_leakage, Channel, Method, MiVariant, OptimizerConfig, Pmf};
//!
//! let p = Pmf::uniform(2);
//! let w = Channel::bsc(0.1).unwrap();
//! let cfg = OptimizerConfig::default();
//! let direct = alpha_mi(MiVariant::Hayashi, &p, &w, 2.0, Method::ClosedForm, &cfg).unwrap();
//! let leak = alpha_mi_via_leakage(MiVariant::Hayashi, &p, &w, 2.0, Method::ClosedForm, &cfg).unwrap();
//! assert!((direct - leak).abs() < 1e-12);
//! ```
#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so that NaN fails the guard.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod leakage;
pub mod optimize;
pub mod qcalc;
pub mod renyi;
pub mod sampling;
pub mod simplex;

pub use error::{Error, Result};
pub use leakage::{
    alpha_mi_via_leakage, arrow_pratt, cond_vulnerability, g_leakage, g_leakage_detailed,
    gain_eval, posterior_vulnerability_hat, power_score_expectation, prior_vulnerability,
    transformed_gain, ArrowPrattMode, GainFunction, GainKind, LeakageResult, LeakageSpec, Sense,
    VulnerabilityResult,
};
pub use optimize::{
    augustin_fixed_point, eg_optimize, eg_optimize_from, grid_search, lp_alternating, simplex_grid,
    AugustinEngine, AugustinOutcome, Direction, EgOutcome, GridOutcome, LpOutcome, Objective,
    OptimizerConfig, WithGradient,
};
pub use qcalc::{
    gibbs_optimum, kn_mean, q_exp, q_log, reverse_holder_check, Aggregator, AggregatorKind,
    GibbsOptimum, HolderReport,
};
pub use renyi::{
    alpha_mi, alpha_mi_estimate, cond_renyi_entropy, cond_renyi_entropy_estimate, renyi_divergence,
    renyi_entropy, shannon_measures, sibson_output_distribution, Estimate, Method, MiVariant,
    ShannonMeasures,
};
pub use sampling::{random_channel, random_pmf};
pub use simplex::{compose_joint, make_pmf, p_norm, tilt, Channel, DecisionRule, JointDist, Pmf};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/distributions.md")]
    mod distributions {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/qcalc.md")]
    mod qcalc {}
    #[doc = include_str!("../../../book/src/leakage.md")]
    mod leakage {}
    #[doc = include_str!("../../../book/src/risk.md")]
    mod risk {}
    #[doc = include_str!("../../../book/src/methods.md")]
    mod methods {}
}
