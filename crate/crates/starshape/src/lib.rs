//! Star-shaped acceptability indexes on finite probability spaces.
//!
//! The crate evaluates acceptability indexes — maps from payoffs to
//! `[0, +inf]` grading performance — through their representing increasing
//! families of risk measures, alongside closed forms for the quantile-based
//! members. It ships:
//!
//! - [`space`]: finite spaces, payoffs, exact weighted-quantile algebra,
//!   stochastic orders;
//! - [`risk`]: VaR, expected shortfall, expectiles, Choquet distortion
//!   integrals, benchmark loss VaR, deviation functionals;
//! - [`accept`]: the monotone-family solver, VaR/ES indexes, reward-on-capital
//!   and gain-loss ratios, the monotone reward-deviation ratio;
//! - [`robust`]: index combinations, scenario evaluation, model-uncertainty
//!   ranges;
//! - [`portfolio`]: acceptability maximization over long-only weights;
//! - [`catalog`] and [`campaign`]: the reporting index set and the randomized
//!   axiom-verification campaign.

pub mod accept;
pub mod campaign;
pub mod catalog;
pub mod error;
pub mod portfolio;
pub mod risk;
pub mod robust;
pub mod space;
pub mod stats;

pub use accept::{
    alpha_es, alpha_es_under, alpha_var, alpha_var_under, glr, glr_family_rho, glr_generalized,
    glr_under, index_from_family, raroc, raroc_family_rho, rdr_family_rho, rdr_monotone,
    rdr_ratio, Acceptability, AcceptabilityMode, FamilyOptions, GlrMode, MonotoneRiskFamily,
    RdrMethod,
};
pub use error::{Result, StarError};
pub use risk::{
    choquet, choquet_under, es, es_under, evar, evar_under, expectile, expectile_under, lvar, var,
    var_under, DeviationFlags, DeviationFunctional, Distortion, LossThreshold, RiskFlags,
    RiskFunctional,
};
pub use space::{dominates, FiniteSpace, RandomVariable, Scenario, StochasticOrder};
pub use stats::{descriptive_stats, DescriptiveStats};
