//! Seeded randomized property campaign over the reporting index set:
//! monotonicity, the star-shapedness grid, zero-payoff and negative-constant
//! conventions, law and scale invariance, plus the quasi-concavity
//! falsification duties.
//!
//! Instances follow a returns-like model: 2-50 outcomes, equal or mixed
//! weights bounded below, values drawn around zero (|mean| <= sigma/4) with
//! both gains and losses forced to be present.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::accept::{glr_under, raroc, Acceptability, GlrMode};
use crate::catalog::{table_indexes, IndexSpec, Levels};
use crate::error::Result;
use crate::risk::RiskFunctional;
use crate::space::{dominates, RandomVariable, StochasticOrder};

#[derive(Debug, Clone, Copy)]
pub struct CampaignConfig {
    pub seed: u64,
    pub trials: usize,
    pub levels: Levels,
    /// Additive slack on inequality checks.
    pub tol: f64,
    /// Margin a quasi-concavity violation must clear to count.
    pub qc_margin: f64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            trials: 1000,
            levels: Levels::default(),
            tol: 1e-9,
            qc_margin: 1e-6,
        }
    }
}

/// A recorded quasi-concavity violation: `alpha(mix) < min(alpha(X), alpha(Y))`.
#[derive(Debug, Clone)]
pub struct QcCounterexample {
    pub index: String,
    pub weights: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: f64,
    pub mix_value: f64,
    pub member_min: f64,
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub checks: usize,
    pub violations: usize,
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct FalsificationOutcome {
    pub target: String,
    /// True when the campaign must exhibit a counterexample, false when it
    /// must find none.
    pub must_find: bool,
    pub found: Option<QcCounterexample>,
    pub violations: usize,
}

#[derive(Debug)]
pub struct CampaignReport {
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<CheckOutcome>,
    pub falsification: Vec<FalsificationOutcome>,
}

impl CampaignReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.violations == 0)
            && self.falsification.iter().all(|f| {
                if f.must_find {
                    f.found.is_some()
                } else {
                    f.violations == 0
                }
            })
    }
}

impl std::fmt::Display for CampaignReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "axiom campaign: {} trials, seed {}",
            self.trials, self.seed
        )?;
        for c in &self.checks {
            let status = if c.violations == 0 { "PASS" } else { "FAIL" };
            write!(
                f,
                "{status} {name}: {v} violations / {n} checks",
                name = c.name,
                v = c.violations,
                n = c.checks
            )?;
            if let Some(detail) = &c.first_failure {
                write!(f, " (first: {detail})")?;
            }
            writeln!(f)?;
        }
        for fal in &self.falsification {
            if fal.must_find {
                match &fal.found {
                    Some(ce) => writeln!(
                        f,
                        "PASS falsified quasi-concavity of {}: mix at lambda={} gives {} < min {}",
                        fal.target, ce.lambda, ce.mix_value, ce.member_min
                    )?,
                    None => writeln!(
                        f,
                        "FAIL falsified quasi-concavity of {}: no counterexample found",
                        fal.target
                    )?,
                }
            } else {
                let status = if fal.violations == 0 { "PASS" } else { "FAIL" };
                writeln!(
                    f,
                    "{status} quasi-concavity holds for {}: {} violations",
                    fal.target, fal.violations
                )?;
            }
        }
        Ok(())
    }
}

const PROPERTIES: [&str; 6] = [
    "monotonicity",
    "star_shape_grid",
    "alpha_zero_infinite",
    "weak_expectation_consistency",
    "scale_invariance",
    "law_invariance",
];

const MUST_FIND: [&str; 3] = ["GLR (star)", "VaR", "Max[ES, RAROC(E,ES^tail)]"];
const MUST_NOT_FIND: [&str; 2] = ["ES", "GLR (coherent)"];

fn splitmix(seed: u64, k: u64) -> u64 {
    let mut z = seed.wrapping_add(k.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-12);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|v| 0.2 / n as f64 + 0.8 * v / sum).collect()
}

/// Returns-like values: centered draws with both signs present.
fn random_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let sigma = rng.gen_range(0.005..0.05);
    let mean = rng.gen_range(-0.25 * sigma..0.25 * sigma);
    let mut values: Vec<f64> = (0..n).map(|_| mean + sigma * normal(rng)).collect();
    if !values.iter().any(|v| *v < 0.0) {
        let i = rng.gen_range(0..n);
        values[i] = -values[i].abs() - 0.1 * sigma;
    }
    if !values.iter().any(|v| *v > 0.0) {
        let i = rng.gen_range(0..n);
        values[i] = values[i].abs() + 0.1 * sigma;
    }
    values
}

fn random_instance(rng: &mut ChaCha8Rng) -> RandomVariable {
    let n = rng.gen_range(2..=50);
    let values = random_values(rng, n);
    if rng.gen_bool(0.5) {
        RandomVariable::from_values(&values).expect("valid instance")
    } else {
        let weights = random_weights(rng, n);
        RandomVariable::from_weighted(&values, Some(&weights)).expect("valid instance")
    }
}

struct TrialOutcome {
    // property name -> (checks, violations, first failure)
    properties: BTreeMap<&'static str, (usize, usize, Option<String>)>,
    qc_found: Vec<(String, QcCounterexample)>,
    qc_absence: BTreeMap<String, usize>,
}

fn eval_ok(index: &IndexSpec, x: &RandomVariable) -> f64 {
    index
        .evaluate(x)
        .map(|a| a.order_value())
        .unwrap_or(f64::NAN)
}

fn qc_probe(
    name: &str,
    eval: &dyn Fn(&RandomVariable) -> Result<Acceptability>,
    x: &RandomVariable,
    y: &RandomVariable,
    lambda: f64,
    margin: f64,
) -> Option<QcCounterexample> {
    let mix = x.mix(y, lambda).ok()?;
    let ax = eval(x).ok()?.order_value();
    let ay = eval(y).ok()?.order_value();
    let am = eval(&mix).ok()?.order_value();
    let member_min = ax.min(ay);
    if am < member_min - margin {
        Some(QcCounterexample {
            index: name.to_string(),
            weights: x.space().weights().to_vec(),
            x: x.values().to_vec(),
            y: y.values().to_vec(),
            lambda,
            mix_value: am,
            member_min,
        })
    } else {
        None
    }
}

fn run_trial(cfg: &CampaignConfig, indexes: &[IndexSpec], trial: usize) -> TrialOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(cfg.seed, trial as u64));
    let mut out = TrialOutcome {
        properties: PROPERTIES.iter().map(|p| (*p, (0, 0, None))).collect(),
        qc_found: Vec::new(),
        qc_absence: MUST_NOT_FIND.iter().map(|t| (t.to_string(), 0)).collect(),
    };
    let record = |out: &mut TrialOutcome, prop: &'static str, ok: bool, detail: String| {
        let entry = out.properties.get_mut(prop).expect("known property");
        entry.0 += 1;
        if !ok {
            entry.1 += 1;
            if entry.2.is_none() {
                entry.2 = Some(detail);
            }
        }
    };

    let tol = cfg.tol;
    let y = random_instance(&mut rng);
    let space = std::sync::Arc::clone(y.space());
    let n = y.len();

    // X = Y + nonnegative bump, outcome-wise
    let bump: Vec<f64> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                0.0
            } else {
                normal(&mut rng).abs() * 0.01
            }
        })
        .collect();
    let x_values: Vec<f64> = y.values().iter().zip(&bump).map(|(v, b)| v + b).collect();
    let x = RandomVariable::new(std::sync::Arc::clone(&space), x_values).expect("valid bump");

    let zero = RandomVariable::constant(std::sync::Arc::clone(&space), 0.0).expect("zero payoff");
    let neg_c = -rng.gen_range(0.1..5.0);
    let neg = RandomVariable::constant(std::sync::Arc::clone(&space), neg_c).expect("constant");

    for index in indexes {
        let name = index.name();

        // Monotonicity: X >= Y outcome-wise
        let ax = eval_ok(index, &x);
        let ay = eval_ok(index, &y);
        record(
            &mut out,
            "monotonicity",
            ax >= ay - tol,
            format!("{name}: alpha(X)={ax} < alpha(Y)={ay}"),
        );

        // Star-shapedness along the scaling grid, plus alpha(0) = infinity
        let mut prev = ay;
        let mut ok = true;
        for lambda in [1.5, 2.0, 10.0] {
            let scaled = eval_ok(index, &y.scale(lambda));
            if scaled > prev + tol {
                ok = false;
            }
            prev = scaled;
        }
        record(
            &mut out,
            "star_shape_grid",
            ok,
            format!("{name}: lambda -> alpha(lambda X) increased along the grid"),
        );
        let at_zero = index.evaluate(&zero).map(|a| a.is_infinite()).unwrap_or(false);
        record(
            &mut out,
            "alpha_zero_infinite",
            at_zero,
            format!("{name}: alpha(0) not infinite"),
        );

        // Weak expectation consistency: alpha(c) = 0 exactly for c < 0
        let at_neg = eval_ok(index, &neg);
        record(
            &mut out,
            "weak_expectation_consistency",
            at_neg == 0.0,
            format!("{name}: alpha({neg_c}) = {at_neg} != 0"),
        );

        // Scale invariance where flagged
        if index.flags().scale_invariant {
            let mut ok = true;
            let mut detail = String::new();
            for lambda in [0.1, 2.0, 10.0] {
                let scaled = eval_ok(index, &y.scale(lambda));
                let agree = if ay.is_infinite() || scaled.is_infinite() {
                    ay.is_infinite() && scaled.is_infinite()
                } else {
                    (scaled - ay).abs() <= tol * ay.abs().max(1.0)
                };
                if !agree {
                    ok = false;
                    detail = format!("{name}: alpha({lambda} X) = {scaled} vs alpha(X) = {ay}");
                    break;
                }
            }
            record(&mut out, "scale_invariance", ok, detail);
        }

        // Law invariance: exact equality under outcome permutation on an
        // equal-weight copy of the instance
        let equal = RandomVariable::from_values(y.values()).expect("equal-weight copy");
        let mut permuted = y.values().to_vec();
        for i in (1..permuted.len()).rev() {
            let j = rng.gen_range(0..=i);
            permuted.swap(i, j);
        }
        let shuffled = RandomVariable::from_values(&permuted).expect("permuted copy");
        let a_eq = eval_ok(index, &equal);
        let a_sh = eval_ok(index, &shuffled);
        let same = (a_eq.is_infinite() && a_sh.is_infinite()) || a_eq == a_sh;
        record(
            &mut out,
            "law_invariance",
            same,
            format!("{name}: {a_eq} != {a_sh} after permutation"),
        );
    }

    // Quasi-concavity probes over four partner designs: an independent
    // instance, a rolled copy (same law, shifted loss support), the loss mass
    // concentrated on the worst outcome, and the loss mass spread evenly.
    // Tail reshaping flips the ordering between tail-sensitive members,
    // which is where max-combination counterexamples live.
    let values = y.values();
    let y_indep = {
        let v = random_values(&mut rng, n);
        RandomVariable::new(std::sync::Arc::clone(&space), v).expect("partner instance")
    };
    let roll = rng.gen_range(1..n.max(2));
    let rolled: Vec<f64> = (0..n).map(|i| values[(i + roll) % n]).collect();
    let y_rolled =
        RandomVariable::new(std::sync::Arc::clone(&space), rolled).expect("rolled partner");
    let mean_loss: f64 = values
        .iter()
        .zip(space.weights())
        .map(|(v, w)| (-v).max(0.0) * w)
        .sum();
    let argmin = (0..n).fold(0, |b, i| if values[i] < values[b] { i } else { b });
    let concentrated: Vec<f64> = (0..n)
        .map(|i| {
            if i == argmin {
                -mean_loss / space.weights()[i]
            } else if values[i] < 0.0 {
                1e-4
            } else {
                values[i]
            }
        })
        .collect();
    let y_conc = RandomVariable::new(std::sync::Arc::clone(&space), concentrated)
        .expect("concentrated partner");
    let diffused: Vec<f64> = (0..n)
        .map(|i| {
            if values[i] < 0.0 {
                -2.0 * mean_loss
            } else {
                values[i] * 0.5
            }
        })
        .collect();
    let y_diff =
        RandomVariable::new(std::sync::Arc::clone(&space), diffused).expect("diffused partner");

    let mu_e = RiskFunctional::expectation();
    let rho_es_tail = RiskFunctional::es_level(cfg.levels.tail).expect("valid level");
    let probes: Vec<(&str, Box<dyn Fn(&RandomVariable) -> Result<Acceptability>>)> = vec![
        (
            "GLR (star)",
            Box::new(|rv: &RandomVariable| glr_under(rv, GlrMode::Star, None)),
        ),
        (
            "VaR",
            Box::new(|rv: &RandomVariable| crate::accept::alpha_var_under(rv, None)),
        ),
        (
            "Max[ES, RAROC(E,ES^tail)]",
            Box::new(move |rv: &RandomVariable| {
                let a = crate::accept::alpha_es_under(rv, None)?;
                let b = raroc(&mu_e, &rho_es_tail, rv);
                Ok(if a.order_value() >= b.order_value() { a } else { b })
            }),
        ),
        (
            "ES",
            Box::new(|rv: &RandomVariable| crate::accept::alpha_es_under(rv, None)),
        ),
        (
            "GLR (coherent)",
            Box::new(|rv: &RandomVariable| glr_under(rv, GlrMode::Coherent, None)),
        ),
    ];

    for partner in [&y_indep, &y_rolled, &y_conc, &y_diff] {
        for k in 1..32 {
            let lambda = k as f64 / 32.0;
            for (target, eval) in &probes {
                if let Some(ce) = qc_probe(target, eval.as_ref(), &y, partner, lambda, cfg.qc_margin)
                {
                    if MUST_NOT_FIND.contains(target) {
                        *out.qc_absence.get_mut(*target).expect("known target") += 1;
                    } else {
                        out.qc_found.push((target.to_string(), ce));
                    }
                }
            }
        }
    }

    out
}

/// Runs the campaign; trials execute in parallel with per-trial seeds derived
/// from the root seed, so the report is reproducible.
pub fn run_campaign(cfg: &CampaignConfig) -> CampaignReport {
    let indexes = table_indexes(cfg.levels).expect("valid levels");
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, &indexes, trial))
        .collect();

    let mut checks: Vec<CheckOutcome> = PROPERTIES
        .iter()
        .map(|p| CheckOutcome {
            name: p.to_string(),
            checks: 0,
            violations: 0,
            first_failure: None,
        })
        .collect();
    let mut found: BTreeMap<String, Option<QcCounterexample>> =
        MUST_FIND.iter().map(|t| (t.to_string(), None)).collect();
    let mut absence: BTreeMap<String, usize> =
        MUST_NOT_FIND.iter().map(|t| (t.to_string(), 0)).collect();

    for outcome in outcomes {
        for (i, prop) in PROPERTIES.iter().enumerate() {
            let (n, v, detail) = &outcome.properties[prop];
            checks[i].checks += n;
            checks[i].violations += v;
            if checks[i].first_failure.is_none() {
                checks[i].first_failure = detail.clone();
            }
        }
        for (target, ce) in outcome.qc_found {
            let slot = found.get_mut(&target).expect("known target");
            if slot.is_none() {
                *slot = Some(ce);
            }
        }
        for (target, count) in outcome.qc_absence {
            *absence.get_mut(&target).expect("known target") += count;
        }
    }

    let mut falsification = Vec::new();
    for target in MUST_FIND {
        falsification.push(FalsificationOutcome {
            target: target.to_string(),
            must_find: true,
            found: found.remove(target).flatten(),
            violations: 0,
        });
    }
    for target in MUST_NOT_FIND {
        falsification.push(FalsificationOutcome {
            target: target.to_string(),
            must_find: false,
            found: None,
            violations: absence[target],
        });
    }

    CampaignReport {
        seed: cfg.seed,
        trials: cfg.trials,
        checks,
        falsification,
    }
}

/// Second-order dominance consistency trials: pairs built by mean-preserving
/// contractions, verified with the quantile-order test, then checked against
/// the ES-based index.
#[derive(Debug, Clone)]
pub struct SsdReport {
    pub pairs: usize,
    /// Constructed pairs that failed the order-2 dominance verification.
    pub dominance_failures: usize,
    /// Dominance-verified pairs where the ES index decreased.
    pub violations: usize,
    pub first_failure: Option<String>,
}

pub fn ssd_consistency_trials(seed: u64, pairs: usize) -> SsdReport {
    let outcomes: Vec<(bool, bool, Option<String>)> = (0..pairs)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ 0x55D3, k as u64));
            let x = random_instance(&mut rng);
            let n = x.len();
            let weights = x.space().weights().to_vec();
            let mut improved = x.values().to_vec();
            let contractions = rng.gen_range(1..=4);
            for _ in 0..contractions {
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n);
                if j == i {
                    j = (j + 1) % n;
                }
                let t: f64 = rng.gen_range(0.0..1.0);
                let (a, b) = (improved[i], improved[j]);
                let m = (weights[i] * a + weights[j] * b) / (weights[i] + weights[j]);
                improved[i] = a + t * (m - a);
                improved[j] = b + t * (m - b);
            }
            let y = RandomVariable::new(std::sync::Arc::clone(x.space()), improved)
                .expect("contracted values are finite");
            let dominance_ok =
                dominates(&y, &x, StochasticOrder::Second, &[]).unwrap_or(false);
            if !dominance_ok {
                return (false, true, Some(format!("pair {k}: dominance verification failed")));
            }
            let a_x = crate::accept::alpha_es(&x).order_value();
            let a_y = crate::accept::alpha_es(&y).order_value();
            let ok = a_y >= a_x - 1e-9;
            let detail = if ok {
                None
            } else {
                Some(format!("pair {k}: alpha_es improved {a_y} < base {a_x}"))
            };
            (ok, false, detail)
        })
        .collect();

    let mut report = SsdReport {
        pairs,
        dominance_failures: 0,
        violations: 0,
        first_failure: None,
    };
    for (ok, dom_fail, detail) in outcomes {
        if dom_fail {
            report.dominance_failures += 1;
        } else if !ok {
            report.violations += 1;
        }
        if report.first_failure.is_none() && detail.is_some() {
            report.first_failure = detail;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_campaign_passes() {
        let cfg = CampaignConfig {
            trials: 150,
            ..CampaignConfig::default()
        };
        let report = run_campaign(&cfg);
        assert!(report.passed(), "campaign failed:\n{report}");
    }

    #[test]
    fn campaign_is_reproducible() {
        let cfg = CampaignConfig {
            trials: 40,
            ..CampaignConfig::default()
        };
        let a = format!("{}", run_campaign(&cfg));
        let b = format!("{}", run_campaign(&cfg));
        assert_eq!(a, b);
    }

    #[test]
    fn ssd_trials_hold() {
        let report = ssd_consistency_trials(7, 100);
        assert_eq!(report.dominance_failures, 0, "{:?}", report.first_failure);
        assert_eq!(report.violations, 0, "{:?}", report.first_failure);
    }
}
