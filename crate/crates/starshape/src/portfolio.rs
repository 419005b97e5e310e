//! Portfolio acceptability maximization over long-only simplex weights for
//! reward-on-capital ratios: outer level bisection on the representing
//! family, inner derivative-free polytope search on the simplex.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::accept::{raroc, raroc_family_rho, Acceptability};
use crate::error::{Result, StarError};
use crate::risk::RiskFunctional;
use crate::space::{FiniteSpace, RandomVariable};

/// Named payoffs on a common finite space. Redundancy is not assumed away:
/// outcome-wise identical assets are detected and reported.
#[derive(Debug, Clone)]
pub struct Market {
    names: Vec<String>,
    assets: Vec<RandomVariable>,
    duplicates: Vec<(usize, usize)>,
}

impl Market {
    pub fn new(names: Vec<String>, assets: Vec<RandomVariable>) -> Result<Self> {
        if assets.is_empty() {
            return Err(StarError::EmptyMarket);
        }
        if names.len() != assets.len() {
            return Err(StarError::LengthMismatch {
                left: names.len(),
                right: assets.len(),
            });
        }
        for a in &assets[1..] {
            if !assets[0].same_space(a) {
                return Err(StarError::SpaceMismatch);
            }
        }
        let mut duplicates = Vec::new();
        for i in 0..assets.len() {
            for j in (i + 1)..assets.len() {
                if assets[i].values() == assets[j].values() {
                    duplicates.push((i, j));
                }
            }
        }
        for (i, j) in &duplicates {
            log::warn!(
                "market assets '{}' and '{}' are outcome-wise identical",
                names[*i],
                names[*j]
            );
        }
        Ok(Self {
            names,
            assets,
            duplicates,
        })
    }

    pub fn len(&self) -> usize {
        self.assets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assets.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn assets(&self) -> &[RandomVariable] {
        &self.assets
    }

    pub fn duplicate_pairs(&self) -> &[(usize, usize)] {
        &self.duplicates
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        self.assets[0].space()
    }

    /// The payoff `sum_i w_i Y_i`.
    pub fn portfolio(&self, weights: &[f64]) -> Result<RandomVariable> {
        if weights.len() != self.assets.len() {
            return Err(StarError::LengthMismatch {
                left: weights.len(),
                right: self.assets.len(),
            });
        }
        let n = self.space().len();
        let mut values = vec![0.0; n];
        for (w, asset) in weights.iter().zip(&self.assets) {
            for (slot, v) in values.iter_mut().zip(asset.values()) {
                *slot += w * v;
            }
        }
        RandomVariable::new(Arc::clone(self.space()), values)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OptimizeOptions {
    pub restarts: usize,
    pub tol: f64,
    pub seed: u64,
    pub x_max: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            restarts: 64,
            tol: 1e-6,
            seed: 2024,
            x_max: 1e6,
        }
    }
}

/// Solution quality: the inner problem is convex exactly when both declared
/// functionals are convex; anything else is an honest heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quality {
    ConvexCertified,
    Heuristic,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub restarts: usize,
    pub outer_steps: usize,
    /// `(level, feasible)` pairs along the outer bisection.
    pub trace: Vec<(f64, bool)>,
    /// Inner minimum of the family risk at each probed level.
    pub inner_residuals: Vec<f64>,
    pub quality: Quality,
    /// No weights satisfied the positive-reward constraint.
    pub empty_feasible: bool,
    /// The returned weights sit on the relaxed reward boundary.
    pub boundary: bool,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub weights: Vec<f64>,
    pub achieved: Acceptability,
    pub certificate: Certificate,
}

/// Relaxation of the strict `mu > 0` feasibility constraint.
const MU_MIN: f64 = 1e-10;
const PENALTY: f64 = 1e6;

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Nelder-Mead over R^n evaluated through the simplex projection.
fn polytope_search(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    start: &[f64],
    iters: usize,
) -> (Vec<f64>, f64) {
    let n = start.len();
    if n == 1 {
        return (vec![1.0], f(&[1.0]));
    }
    let eval = |p: &[f64]| -> (Vec<f64>, f64) {
        let w = project_simplex(p);
        let v = f(&w);
        (w, v)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push(eval(start));
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += 0.15;
        simplex.push(eval(&p));
    }
    let (alpha, gamma, beta, delta) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if (simplex[n].1 - simplex[0].1).abs() < 1e-13 * (1.0 + simplex[0].1.abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|(p, _)| p[i]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&worst.0)
            .map(|(c, w)| c + alpha * (c - w))
            .collect();
        let fr = eval(&reflect);
        if fr.1 < simplex[0].1 {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&reflect)
                .map(|(c, r)| c + gamma * (r - c))
                .collect();
            let fe = eval(&expand);
            simplex[n] = if fe.1 < fr.1 { fe } else { fr };
        } else if fr.1 < simplex[n - 1].1 {
            simplex[n] = fr;
        } else {
            let contract: Vec<f64> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + beta * (w - c))
                .collect();
            let fc = eval(&contract);
            if fc.1 < worst.1 {
                simplex[n] = fc;
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = best
                        .iter()
                        .zip(&entry.0)
                        .map(|(b, p)| b + delta * (p - b))
                        .collect();
                    *entry = eval(&shrunk);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0].clone()
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Minimizes `f` over the simplex from vertex starts plus `restarts` random
/// starts; restarts run in parallel and the winner is chosen
/// deterministically (value, then lexicographic weights).
fn minimize_on_simplex(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    n: usize,
    restarts: usize,
    seed: u64,
) -> (Vec<f64>, f64) {
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(n + 1 + restarts);
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        starts.push(v);
    }
    starts.push(vec![1.0 / n as f64; n]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts {
        let exp: Vec<f64> = (0..n)
            .map(|_| -(rng.gen::<f64>().max(1e-12)).ln())
            .collect();
        let sum: f64 = exp.iter().sum();
        starts.push(exp.iter().map(|e| e / sum).collect());
    }
    let iters = 150 * n.max(2);
    let results: Vec<(Vec<f64>, f64)> = starts
        .par_iter()
        .map(|s| polytope_search(f, s, iters))
        .collect();
    results
        .into_iter()
        .reduce(|best, cand| {
            if cand.1 < best.1 || (cand.1 == best.1 && lex_less(&cand.0, &best.0)) {
                cand
            } else {
                best
            }
        })
        .expect("at least one start")
}

/// Maximizes the reward-on-capital acceptability of `sum w_i Y_i` over the
/// long-only simplex.
///
/// Outer loop: bisection on the level `x`, where level feasibility means the
/// inner minimum of the representing family risk is nonpositive. Inner loop:
/// reflection-based polytope search with random restarts and a penalty for
/// the positive-reward constraint. An empty feasible set reports zero; a
/// feasible portfolio with nonpositive risk reports infinity.
pub fn maximize_acceptability(
    market: &Market,
    mu: &RiskFunctional,
    rho: &RiskFunctional,
    opts: OptimizeOptions,
) -> Result<OptimizationResult> {
    let n = market.len();
    let quality = if mu.flags().convex && rho.flags().convex {
        Quality::ConvexCertified
    } else {
        Quality::Heuristic
    };
    let mu_of = |w: &[f64]| -> f64 { mu.eval(&market.portfolio(w).expect("weights sized")) };
    let rho_of = |w: &[f64]| -> f64 { rho.eval(&market.portfolio(w).expect("weights sized")) };

    let mut certificate = Certificate {
        restarts: opts.restarts,
        outer_steps: 0,
        trace: Vec::new(),
        inner_residuals: Vec::new(),
        quality,
        empty_feasible: false,
        boundary: false,
    };

    // Phase 1: is there any weight vector with positive reward?
    let neg_mu = |w: &[f64]| -> f64 { -mu_of(w) };
    let (w_mu, neg_best_mu) = minimize_on_simplex(&neg_mu, n, opts.restarts, opts.seed);
    let best_mu = -neg_best_mu;
    if best_mu < MU_MIN {
        certificate.empty_feasible = true;
        return Ok(OptimizationResult {
            weights: w_mu,
            achieved: Acceptability::exact(0.0),
            certificate,
        });
    }

    // Phase 2: a feasible portfolio with nonpositive risk has infinite
    // acceptability.
    let rho_pen = |w: &[f64]| -> f64 { rho_of(w) + PENALTY * (MU_MIN - mu_of(w)).max(0.0) };
    let (w_rho, _) = minimize_on_simplex(&rho_pen, n, opts.restarts, opts.seed ^ 0xA5A5);
    if mu_of(&w_rho) >= MU_MIN && rho_of(&w_rho) <= 0.0 {
        certificate.boundary = mu_of(&w_rho) < 1e-8;
        return Ok(OptimizationResult {
            weights: w_rho,
            achieved: Acceptability::infinite(),
            certificate,
        });
    }

    // Candidate pool: vertices plus the phase solutions; the best feasible
    // candidate seeds the attained level.
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        candidates.push(v);
    }
    candidates.push(w_mu.clone());
    candidates.push(w_rho.clone());

    let alpha_of = |w: &[f64]| -> Acceptability {
        raroc(mu, rho, &market.portfolio(w).expect("weights sized"))
    };
    let mut w_best = w_mu.clone();
    let mut best_alpha = f64::NEG_INFINITY;
    for c in &candidates {
        if mu_of(c) < MU_MIN {
            continue;
        }
        let a = alpha_of(c).order_value();
        if a > best_alpha || (a == best_alpha && lex_less(c, &w_best)) {
            best_alpha = a;
            w_best = c.clone();
        }
    }
    if best_alpha.is_infinite() {
        certificate.boundary = mu_of(&w_best) < 1e-8;
        return Ok(OptimizationResult {
            weights: w_best,
            achieved: Acceptability::infinite(),
            certificate,
        });
    }
    let mut x_lo = if best_alpha > 0.0 {
        best_alpha * (1.0 - 1e-9)
    } else {
        MU_MIN
    };

    // Feasibility of a level: inner minimum of the family risk <= 0.
    let probe = |x_level: f64,
                 certificate: &mut Certificate,
                 step: usize|
     -> (bool, Vec<f64>) {
        let family_obj = |w: &[f64]| -> f64 {
            let pf = market.portfolio(w).expect("weights sized");
            let base = raroc_family_rho(mu, rho, x_level, &pf).expect("positive level");
            base + PENALTY * (MU_MIN - mu.eval(&pf)).max(0.0)
        };
        let (w, value) = minimize_on_simplex(
            &family_obj,
            n,
            opts.restarts,
            opts.seed ^ (0x5157 + step as u64),
        );
        certificate.outer_steps += 1;
        certificate.inner_residuals.push(value);
        let feasible = value <= 0.0 && mu_of(&w) >= MU_MIN * 0.5;
        certificate.trace.push((x_level, feasible));
        (feasible, w)
    };

    let note_feasible = |w: Vec<f64>, best_alpha: &mut f64, w_best: &mut Vec<f64>| {
        if mu_of(&w) < MU_MIN {
            return;
        }
        let a = alpha_of(&w).order_value();
        if a > *best_alpha {
            *best_alpha = a;
            *w_best = w;
        }
    };

    // Grow an infeasible upper level.
    let mut x_hi = (2.0 * x_lo).max(1.0);
    let mut step = 0;
    loop {
        if x_hi > opts.x_max {
            let achieved = Acceptability::capped(opts.x_max);
            certificate.boundary = mu_of(&w_best) < 1e-8;
            return Ok(OptimizationResult {
                weights: w_best,
                achieved,
                certificate,
            });
        }
        let (feasible, w) = probe(x_hi, &mut certificate, step);
        step += 1;
        if feasible {
            x_lo = x_hi;
            note_feasible(w, &mut best_alpha, &mut w_best);
            x_hi *= 4.0;
        } else {
            break;
        }
    }

    // Bisection between the attained level and the infeasible cap.
    while x_hi - x_lo > opts.tol * x_lo.max(1.0) && step < 200 {
        let mid = 0.5 * (x_lo + x_hi);
        let (feasible, w) = probe(mid, &mut certificate, step);
        step += 1;
        if feasible {
            x_lo = mid;
            note_feasible(w, &mut best_alpha, &mut w_best);
        } else {
            x_hi = mid;
        }
    }

    let achieved = alpha_of(&w_best);
    certificate.boundary = mu_of(&w_best) < 1e-8;
    Ok(OptimizationResult {
        weights: w_best,
        achieved,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_asset_market() -> Market {
        let s = FiniteSpace::equal(3).unwrap();
        let a = RandomVariable::new(Arc::clone(&s), vec![0.04, -0.02, 0.01]).unwrap();
        let b = RandomVariable::new(Arc::clone(&s), vec![-0.03, 0.05, 0.0]).unwrap();
        Market::new(vec!["a".into(), "b".into()], vec![a, b]).unwrap()
    }

    #[test]
    fn single_asset_market_returns_its_ratio() {
        let y = RandomVariable::from_values(&[0.05, -0.02, 0.01]).unwrap();
        let market = Market::new(vec!["only".into()], vec![y.clone()]).unwrap();
        let mu = RiskFunctional::expectation();
        let rho = RiskFunctional::es_level(0.5).unwrap();
        let res = maximize_acceptability(&market, &mu, &rho, OptimizeOptions::default()).unwrap();
        assert_eq!(res.weights, vec![1.0]);
        let direct = raroc(&mu, &rho, &y);
        assert!((res.achieved.order_value() - direct.order_value()).abs() < 1e-10);
    }

    #[test]
    fn identical_assets_detected_and_equivalent() {
        let y = RandomVariable::from_values(&[0.05, -0.02, 0.01]).unwrap();
        let market =
            Market::new(vec!["a".into(), "b".into()], vec![y.clone(), y.clone()]).unwrap();
        assert_eq!(market.duplicate_pairs(), &[(0, 1)]);
        let mu = RiskFunctional::expectation();
        let rho = RiskFunctional::es_level(0.5).unwrap();
        let res = maximize_acceptability(&market, &mu, &rho, OptimizeOptions::default()).unwrap();
        let direct = raroc(&mu, &rho, &y);
        assert!((res.achieved.order_value() - direct.order_value()).abs() < 1e-6);
        let re_eval = raroc(&mu, &rho, &market.portfolio(&res.weights).unwrap());
        assert!((re_eval.order_value() - res.achieved.order_value()).abs() < 1e-8);
    }

    #[test]
    fn beats_simplex_vertices() {
        let market = two_asset_market();
        let mu = RiskFunctional::expectation();
        let rho = RiskFunctional::es_level(0.5).unwrap();
        let res = maximize_acceptability(&market, &mu, &rho, OptimizeOptions::default()).unwrap();
        for i in 0..market.len() {
            let mut w = vec![0.0; market.len()];
            w[i] = 1.0;
            let pf = market.portfolio(&w).unwrap();
            if mu.eval(&pf) >= MU_MIN {
                let vertex = raroc(&mu, &rho, &pf).order_value();
                assert!(
                    res.achieved.order_value() >= vertex - 1e-8,
                    "vertex {i} has {vertex} > achieved {}",
                    res.achieved.order_value()
                );
            }
        }
        // weights form a valid simplex point
        let sum: f64 = res.weights.iter().sum();
        assert!((sum - 1.0).abs() < 1e-10);
        assert!(res.weights.iter().all(|w| *w >= 0.0));
        // outer feasibility is nonincreasing along the trace
        let mut last_feasible_level = f64::NEG_INFINITY;
        let mut first_infeasible_level = f64::INFINITY;
        for (x, feas) in &res.certificate.trace {
            if *feas {
                last_feasible_level = last_feasible_level.max(*x);
            } else {
                first_infeasible_level = first_infeasible_level.min(*x);
            }
        }
        assert!(last_feasible_level <= first_infeasible_level + 1e-9);
        assert_eq!(res.certificate.quality, Quality::ConvexCertified);
    }

    #[test]
    fn infeasible_market_reports_zero() {
        let y = RandomVariable::from_values(&[-0.05, -0.02]).unwrap();
        let market = Market::new(vec!["bad".into()], vec![y]).unwrap();
        let mu = RiskFunctional::expectation();
        let rho = RiskFunctional::es_level(0.5).unwrap();
        let res = maximize_acceptability(&market, &mu, &rho, OptimizeOptions::default()).unwrap();
        assert!(res.certificate.empty_feasible);
        assert_eq!(res.achieved.value(), 0.0);
    }

    #[test]
    fn riskless_positive_asset_is_infinite() {
        let y = RandomVariable::from_values(&[0.01, 0.02]).unwrap();
        let market = Market::new(vec!["safe".into()], vec![y]).unwrap();
        let mu = RiskFunctional::expectation();
        let rho = RiskFunctional::es_level(0.5).unwrap();
        let res = maximize_acceptability(&market, &mu, &rho, OptimizeOptions::default()).unwrap();
        assert!(res.achieved.is_infinite());
    }
}
