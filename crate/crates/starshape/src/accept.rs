//! Acceptability-index evaluation: the generic monotone-family solver,
//! closed forms for the VaR- and ES-based indexes, reward/risk ratios,
//! gain-loss ratios and the monotone reward-deviation ratio.

use std::sync::Arc;

use crate::error::{Result, StarError};
use crate::risk::{es_under, evar_under, var_under, DeviationFunctional, RiskFunctional};
use crate::space::{RandomVariable, Scenario};

/// How an acceptability value was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AcceptabilityMode {
    /// Closed form; infinities are genuine.
    Exact,
    /// The family solver hit its level cap; the value equals the cap and the
    /// true index is at least that large (rendered as `>= cap (inf)`).
    CappedAt,
    /// Bisection output with the given relative tolerance; the returned
    /// level is the lower bracket endpoint, so it is truly attained.
    Bisected { tol: f64 },
    /// Certified lower bound from a finite search (the supremum may be
    /// larger).
    LowerBound,
}

/// A value in `[0, +inf]` with provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acceptability {
    value: f64,
    mode: AcceptabilityMode,
}

impl Acceptability {
    pub fn exact(value: f64) -> Self {
        debug_assert!(value >= 0.0);
        Self {
            value,
            mode: AcceptabilityMode::Exact,
        }
    }

    pub fn infinite() -> Self {
        Self {
            value: f64::INFINITY,
            mode: AcceptabilityMode::Exact,
        }
    }

    pub fn capped(x_max: f64) -> Self {
        Self {
            value: x_max,
            mode: AcceptabilityMode::CappedAt,
        }
    }

    pub fn bisected(value: f64, tol: f64) -> Self {
        Self {
            value,
            mode: AcceptabilityMode::Bisected { tol },
        }
    }

    pub fn lower_bound(value: f64) -> Self {
        Self {
            value,
            mode: AcceptabilityMode::LowerBound,
        }
    }

    /// The stored level; the level cap for capped results.
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn mode(&self) -> AcceptabilityMode {
        self.mode
    }

    /// Exact infinity (capped results are not).
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }

    pub fn is_capped(&self) -> bool {
        matches!(self.mode, AcceptabilityMode::CappedAt)
    }

    /// Value used for ordering: capped results order by their cap.
    pub fn order_value(&self) -> f64 {
        self.value
    }
}

impl std::fmt::Display for Acceptability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_capped() {
            write!(f, ">= {} (inf)", self.value)
        } else if self.value.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.value)
        }
    }
}

/// Solver options for [`index_from_family`].
#[derive(Debug, Clone, Copy)]
pub struct FamilyOptions {
    /// Levels below this count as "unacceptable at every level" probes.
    pub x_min: f64,
    /// Level cap; families that stay acceptable up to here report a capped
    /// value.
    pub x_max: f64,
    /// Relative bisection width.
    pub tol: f64,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        Self {
            x_min: 1e-9,
            x_max: 1e6,
            tol: 1e-9,
        }
    }
}

/// An increasing family `x -> rho_x(X)` of risk measures, represented by a
/// fallible evaluator. Monotonicity in `x` is a contract the solver spot
/// checks during bisection.
#[derive(Clone)]
pub struct MonotoneRiskFamily {
    name: String,
    eval: Arc<dyn Fn(f64, &RandomVariable) -> Result<f64> + Send + Sync>,
}

impl std::fmt::Debug for MonotoneRiskFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MonotoneRiskFamily").field("name", &self.name).finish()
    }
}

impl MonotoneRiskFamily {
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(f64, &RandomVariable) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    /// `rho_x = VaR^{1/(1+x)}`.
    pub fn var_based() -> Self {
        Self::custom("VaR^{1/(1+x)}", |x_level, rv| {
            var_under(rv, 1.0 / (1.0 + x_level), None)
        })
    }

    /// `rho_x = ES^{1/(1+x)}`.
    pub fn es_based() -> Self {
        Self::custom("ES^{1/(1+x)}", |x_level, rv| {
            es_under(rv, 1.0 / (1.0 + x_level), None)
        })
    }

    /// `rho_x = EVaR^{1/(1+x)}` (expectile based).
    pub fn evar_based() -> Self {
        Self::custom("EVaR^{1/(1+x)}", |x_level, rv| {
            evar_under(rv, 1.0 / (1.0 + x_level), None)
        })
    }

    /// Reward/risk blend `(x rho(X) - mu(X)) / (1 + x)` behind the
    /// reward-on-capital ratio.
    pub fn raroc(mu: RiskFunctional, rho: RiskFunctional) -> Self {
        Self::custom(format!("raroc[{}/{}]", mu.name(), rho.name()), move |x_level, rv| {
            raroc_family_rho(&mu, &rho, x_level, rv)
        })
    }

    /// Root-based family behind the reward gain-loss ratio.
    pub fn glr(mu: RiskFunctional, rho: RiskFunctional) -> Self {
        Self::custom(format!("glr[{}/{}]", mu.name(), rho.name()), move |x_level, rv| {
            glr_family_rho(&mu, &rho, x_level, rv)
        })
    }

    pub fn eval(&self, x_level: f64, rv: &RandomVariable) -> Result<f64> {
        (self.eval)(x_level, rv)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// `sup { x > 0 : rho_x(X) <= 0 }` with `sup emptyset = 0`, exploiting
/// monotonicity in `x`. Returns the lower bisection endpoint so the reported
/// level always satisfies `rho(X) <= 0`. A value-pattern violation of
/// monotonicity observed during bisection is a diagnostic error.
pub fn index_from_family(
    family: &MonotoneRiskFamily,
    x: &RandomVariable,
    opts: FamilyOptions,
) -> Result<Acceptability> {
    let f_min = family.eval(opts.x_min, x)?;
    if f_min > 0.0 {
        return Ok(Acceptability::exact(0.0));
    }
    let f_max = family.eval(opts.x_max, x)?;
    if f_max <= 0.0 {
        return Ok(Acceptability::capped(opts.x_max));
    }
    let mut lo = opts.x_min;
    let mut hi = opts.x_max;
    let mut f_lo = f_min;
    let mut f_hi = f_max;
    for _ in 0..200 {
        if hi - lo <= opts.tol * lo.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = family.eval(mid, x)?;
        let slack = 1e-7 * (1.0 + f_lo.abs() + f_hi.abs());
        if f_mid < f_lo - slack || f_mid > f_hi + slack {
            return Err(StarError::NonMonotoneFamily(format!(
                "{}: rho at x = {mid} is {f_mid}, outside bracket values [{f_lo}, {f_hi}]",
                family.name
            )));
        }
        if f_mid <= 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    Ok(Acceptability::bisected(lo, opts.tol))
}

/// VaR-based index, closed form from the acceptance-set condition
/// `P(X < 0) <= 1/(1+x)`: infinity when no mass is below zero, otherwise
/// `(1 - q) / q` with `q = P(X < 0)`.
pub fn alpha_var(x: &RandomVariable) -> Acceptability {
    alpha_var_under(x, None).expect("base measure always valid")
}

pub fn alpha_var_under(x: &RandomVariable, scenario: Option<&Scenario>) -> Result<Acceptability> {
    let atoms = x.atoms_under(scenario)?;
    if atoms[atoms.len() - 1].0 < 0.0 {
        // every outcome is a loss: q = 1 exactly, no accumulated rounding
        return Ok(Acceptability::exact(0.0));
    }
    let mut q = 0.0;
    for &(v, w) in &atoms {
        if v < 0.0 {
            q += w;
        } else {
            break;
        }
    }
    if q == 0.0 {
        Ok(Acceptability::infinite())
    } else {
        Ok(Acceptability::exact((1.0 - q) / q))
    }
}

/// ES-based index via the exact piecewise-linear root of
/// `H(p) = integral of VaR over [0, p]`: infinity when `X >= 0`, zero when
/// `E[X] < 0`, otherwise `1/p* - 1` at the first crossing `H(p*) = 0`.
pub fn alpha_es(x: &RandomVariable) -> Acceptability {
    alpha_es_under(x, None).expect("base measure always valid")
}

pub fn alpha_es_under(x: &RandomVariable, scenario: Option<&Scenario>) -> Result<Acceptability> {
    let atoms = x.atoms_under(scenario)?;
    if atoms[0].0 >= 0.0 {
        return Ok(Acceptability::infinite());
    }
    let mean: f64 = atoms.iter().map(|(v, w)| v * w).sum();
    if mean < 0.0 {
        return Ok(Acceptability::exact(0.0));
    }
    // H is concave with H(0) = 0, positive before the first crossing; once it
    // reaches zero it stays nonpositive, so the first crossing is the root.
    let mut cum = 0.0;
    let mut h = 0.0;
    for &(v, w) in &atoms {
        let h_next = h - v * w;
        let c_next = cum + w;
        if h_next <= 0.0 {
            // crossing inside this slab (v > 0 here since h > 0 >= h_next)
            let p_star = if v > 0.0 { (cum + h / v).min(c_next) } else { c_next };
            let p_star = p_star.clamp(f64::MIN_POSITIVE, 1.0);
            return Ok(Acceptability::exact((1.0 / p_star - 1.0).max(0.0)));
        }
        h = h_next;
        cum = c_next;
    }
    // H stayed positive on (0, 1): only reachable when E[X] rounds to zero
    Ok(Acceptability::exact(0.0))
}

/// Reward on capital with the three-case convention: `mu/rho` when both are
/// positive, zero when the reward is nonpositive but risk remains, infinity
/// when the risk is already nonpositive.
pub fn raroc(mu: &RiskFunctional, rho: &RiskFunctional, x: &RandomVariable) -> Acceptability {
    let m = mu.eval(x);
    let r = rho.eval(x);
    if r <= 0.0 {
        Acceptability::infinite()
    } else if m <= 0.0 {
        Acceptability::exact(0.0)
    } else {
        Acceptability::exact(m / r)
    }
}

/// Representing family for [`raroc`]: `-mu(X)/(1+x) + x rho(X)/(1+x)`.
pub fn raroc_family_rho(
    mu: &RiskFunctional,
    rho: &RiskFunctional,
    x_level: f64,
    x: &RandomVariable,
) -> Result<f64> {
    if x_level <= 0.0 {
        return Err(StarError::NonpositiveFamilyLevel(x_level));
    }
    Ok((x_level * rho.eval(x) - mu.eval(x)) / (1.0 + x_level))
}

/// Gain-loss ratio flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlrMode {
    /// `E[X]/E[X^-]` with the zero case for nonpositive means.
    Coherent,
    /// `E[X^+]/E[X^-]`; star-shaped but not quasi-concave.
    Star,
}

pub fn glr(x: &RandomVariable, mode: GlrMode) -> Acceptability {
    glr_under(x, mode, None).expect("base measure always valid")
}

pub fn glr_under(
    x: &RandomVariable,
    mode: GlrMode,
    scenario: Option<&Scenario>,
) -> Result<Acceptability> {
    let loss = x.negative_part().expectation_under(scenario)?;
    // the E[X^-] = 0 branch resolves the coherent-mode 0/0 corner to
    // infinity, consistent with alpha(0) = infinity
    if loss == 0.0 {
        return Ok(Acceptability::infinite());
    }
    match mode {
        GlrMode::Star => {
            let gain = x.positive_part().expectation_under(scenario)?;
            Ok(Acceptability::exact(gain / loss))
        }
        GlrMode::Coherent => {
            let mean = x.expectation_under(scenario)?;
            if mean <= 0.0 {
                Ok(Acceptability::exact(0.0))
            } else {
                Ok(Acceptability::exact(mean / loss))
            }
        }
    }
}

/// Reward gain-loss ratio `mu(X^+) / rho(-X^-)`, infinity when the
/// denominator vanishes. Negative numerator or denominator signals inputs
/// that are not monotone normalized / monetary and is rejected.
pub fn glr_generalized(
    mu: &RiskFunctional,
    rho: &RiskFunctional,
    x: &RandomVariable,
) -> Result<Acceptability> {
    let d = rho.eval(&x.pointwise_min_const(0.0));
    if d < -1e-12 {
        return Err(StarError::NegativeDenominator(d));
    }
    if d <= 0.0 {
        return Ok(Acceptability::infinite());
    }
    let n = mu.eval(&x.positive_part());
    if n < -1e-12 {
        return Err(StarError::NegativeNumerator(n));
    }
    Ok(Acceptability::exact(n.max(0.0) / d))
}

/// Representing family for [`glr_generalized`]:
/// `-sup { y : mu((X - y)^+) = x rho(-(X - y)^-) }`, found by bisection on
/// the nonincreasing continuous function
/// `g(y) = mu((X - y)^+) - x rho(-(X - y)^-)` over `[min X - 1, max X + 1]`.
/// A plateau of roots resolves to its supremum endpoint (the bisection keeps
/// `g(lo) >= 0`, so it converges to the right edge).
pub fn glr_family_rho(
    mu: &RiskFunctional,
    rho: &RiskFunctional,
    x_level: f64,
    x: &RandomVariable,
) -> Result<f64> {
    if x_level <= 0.0 {
        return Err(StarError::NonpositiveFamilyLevel(x_level));
    }
    let g = |y: f64| -> f64 {
        let shifted = x.affine(1.0, -y);
        mu.eval(&shifted.positive_part()) - x_level * rho.eval(&shifted.pointwise_min_const(0.0))
    };
    let mut lo = x.min_value() - 1.0;
    let mut hi = x.max_value() + 1.0;
    let g_lo = g(lo);
    let g_hi = g(hi);
    if g_lo < 0.0 || g_hi >= 0.0 {
        return Err(StarError::BracketFailure(format!(
            "g({lo}) = {g_lo}, g({hi}) = {g_hi}; expected sign change (non-monetary mu/rho?)"
        )));
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(-lo)
}

/// Plain reward-to-deviation ratio with the three-case layout:
/// `mu/D` when both positive; zero when the reward is nonpositive against
/// positive dispersion (or strictly negative against zero dispersion);
/// infinity for nonnegative reward with zero dispersion.
pub fn rdr_ratio(
    mu: &RiskFunctional,
    dev: &DeviationFunctional,
    x: &RandomVariable,
) -> Acceptability {
    let m = mu.eval(x);
    let d = dev.eval(x);
    if m >= 0.0 && d == 0.0 {
        Acceptability::infinite()
    } else if (m <= 0.0 && d > 0.0) || (m < 0.0 && d == 0.0) {
        Acceptability::exact(0.0)
    } else {
        Acceptability::exact(m / d)
    }
}

/// Search strategy for the monotone reward-deviation ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdrMethod {
    /// Product-grid search over `Y <= X` with local refinement; exactness is
    /// only claimed on small spaces. Requires at most 6 outcomes.
    ExactSmall,
    /// Golden-section search over the one-parameter truncation family
    /// `Y_c = min(X, c)` with 64 restart subintervals.
    TruncationHeuristic,
}

const EXACT_SMALL_MAX_OUTCOMES: usize = 6;

/// Points per coordinate for the coarse product grid. 200 as specified for
/// small spaces; larger spaces scale the count down to keep the product
/// tractable (the result is a certified lower bound either way).
fn grid_points(n: usize) -> usize {
    match n {
        0..=3 => 200,
        4 => 38,
        5 => 18,
        _ => 11,
    }
}

const REFINE_ROUNDS: usize = 3;
const REFINE_POINTS: usize = 24;

/// Product-grid search over the box `[lower_i, upper_i]`. Returns the best
/// feasible point; grid endpoints are hit exactly so `Y = X` is always a
/// candidate when `upper = X`.
fn search_box(
    x: &RandomVariable,
    lower: &[f64],
    upper: &[f64],
    points: usize,
    objective: &mut dyn FnMut(&RandomVariable) -> Option<f64>,
    maximize: bool,
) -> Option<(Vec<f64>, f64)> {
    let n = lower.len();
    let mut idx = vec![0usize; n];
    let mut best: Option<(Vec<f64>, f64)> = None;
    let coord = |i: usize, j: usize| -> f64 {
        if j == points - 1 {
            upper[i]
        } else {
            lower[i] + (upper[i] - lower[i]) * j as f64 / (points - 1) as f64
        }
    };
    let mut values = vec![0.0; n];
    loop {
        for i in 0..n {
            values[i] = coord(i, idx[i]);
        }
        let y = RandomVariable::new(Arc::clone(x.space()), values.clone())
            .expect("grid values are finite");
        if let Some(v) = objective(&y) {
            let better = match &best {
                None => true,
                Some((_, b)) => {
                    if maximize {
                        v > *b
                    } else {
                        v < *b
                    }
                }
            };
            if better {
                best = Some((values.clone(), v));
            }
        }
        // odometer
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            idx[i] += 1;
            if idx[i] < points {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Coarse grid plus local refinement around the incumbent.
fn refined_grid_search(
    x: &RandomVariable,
    objective: &mut dyn FnMut(&RandomVariable) -> Option<f64>,
    maximize: bool,
) -> Option<(Vec<f64>, f64)> {
    let n = x.len();
    let min = x.min_value();
    let span = {
        let s = x.max_value() - min;
        if s > 0.0 {
            s
        } else {
            1.0
        }
    };
    let box_lower: Vec<f64> = vec![min - span; n];
    let box_upper: Vec<f64> = x.values().to_vec();
    let points = grid_points(n);
    let mut best = search_box(x, &box_lower, &box_upper, points, objective, maximize)?;
    let mut step: Vec<f64> = box_upper
        .iter()
        .zip(&box_lower)
        .map(|(u, l)| (u - l) / (points - 1) as f64)
        .collect();
    for _ in 0..REFINE_ROUNDS {
        let center = best.0.clone();
        let lower: Vec<f64> = (0..n)
            .map(|i| (center[i] - 1.5 * step[i]).max(box_lower[i]))
            .collect();
        let upper: Vec<f64> = (0..n)
            .map(|i| (center[i] + 1.5 * step[i]).min(box_upper[i]))
            .collect();
        if let Some(candidate) = search_box(x, &lower, &upper, REFINE_POINTS, objective, maximize) {
            let improved = if maximize {
                candidate.1 > best.1
            } else {
                candidate.1 < best.1
            };
            if improved {
                best = candidate;
            }
        }
        step = upper
            .iter()
            .zip(&lower)
            .map(|(u, l)| (u - l) / (REFINE_POINTS - 1) as f64)
            .collect();
    }
    Some(best)
}

fn golden_section_max(mut f: impl FnMut(f64) -> Option<f64>, a: f64, b: f64) -> Option<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut lo = a;
    let mut hi = b;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        let keep_left = match (fc, fd) {
            (Some(vc), Some(vd)) => vc >= vd,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => {
                // objective undefined on both probes: shrink arbitrarily
                true
            }
        };
        if keep_left {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
        if hi - lo < 1e-12 * (1.0 + lo.abs()) {
            break;
        }
    }
    let mid = 0.5 * (lo + hi);
    f(mid).map(|v| (mid, v))
}

/// Monotone reward-deviation ratio `sup_{Y <= X, D(Y) > 0} mu(Y)/D(Y)` with
/// the three-case layout. When `ess inf X > 0` the ratio is unbounded along
/// near-constant positive payoffs below `X`, so the exact value is infinity.
/// Finite search outputs are flagged as lower bounds.
pub fn rdr_monotone(
    mu: &RiskFunctional,
    dev: &DeviationFunctional,
    x: &RandomVariable,
    method: RdrMethod,
) -> Result<Acceptability> {
    if method == RdrMethod::ExactSmall && x.len() > EXACT_SMALL_MAX_OUTCOMES {
        return Err(StarError::TooManyOutcomes {
            got: x.len(),
            max: EXACT_SMALL_MAX_OUTCOMES,
        });
    }
    let m = mu.eval(x);
    let d = dev.eval(x);
    if m >= 0.0 && d == 0.0 {
        return Ok(Acceptability::infinite());
    }
    if (m <= 0.0 && d > 0.0) || (m < 0.0 && d == 0.0) {
        return Ok(Acceptability::exact(0.0));
    }
    if x.min_value() > 0.0 {
        return Ok(Acceptability::infinite());
    }
    let ratio_at_x = m / d;
    let mut objective = |y: &RandomVariable| -> Option<f64> {
        let dy = dev.eval(y);
        if dy > 0.0 {
            Some(mu.eval(y) / dy)
        } else {
            None
        }
    };
    let best = match method {
        RdrMethod::ExactSmall => refined_grid_search(x, &mut objective, true).map(|(_, v)| v),
        RdrMethod::TruncationHeuristic => truncation_search(x, &mut objective, true),
    };
    let value = best.map_or(ratio_at_x, |v| v.max(ratio_at_x));
    Ok(Acceptability::lower_bound(value))
}

/// Best objective over the truncation family `Y_c = min(X, c)`,
/// golden-section on 64 restart subintervals of `[min X, max X]`.
fn truncation_search(
    x: &RandomVariable,
    objective: &mut dyn FnMut(&RandomVariable) -> Option<f64>,
    maximize: bool,
) -> Option<f64> {
    const RESTARTS: usize = 64;
    let lo = x.min_value();
    let hi = x.max_value();
    if hi <= lo {
        return None;
    }
    let mut best: Option<f64> = None;
    let sign = if maximize { 1.0 } else { -1.0 };
    let mut eval_c = |c: f64| -> Option<f64> {
        let y = x.pointwise_min_const(c);
        objective(&y).map(|v| sign * v)
    };
    for k in 0..RESTARTS {
        let a = lo + (hi - lo) * k as f64 / RESTARTS as f64;
        let b = lo + (hi - lo) * (k + 1) as f64 / RESTARTS as f64;
        if let Some((_, v)) = golden_section_max(&mut eval_c, a, b) {
            if best.map_or(true, |b0| v > b0) {
                best = Some(v);
            }
        }
        // subinterval endpoints are candidates too
        for c in [a, b] {
            if let Some(v) = eval_c(c) {
                if best.map_or(true, |b0| v > b0) {
                    best = Some(v);
                }
            }
        }
    }
    best.map(|v| sign * v)
}

/// Representing family for [`rdr_monotone`]:
/// `inf_{Y <= X, D(Y) > 0} { -mu(Y) + x D(Y) }`, explored with the same
/// search machinery (the returned value is an upper bound of the infimum).
/// The infimum over an empty feasible set (single-outcome spaces) is
/// plus infinity.
pub fn rdr_family_rho(
    mu: &RiskFunctional,
    dev: &DeviationFunctional,
    x_level: f64,
    x: &RandomVariable,
    method: RdrMethod,
) -> Result<f64> {
    if x_level <= 0.0 {
        return Err(StarError::NonpositiveFamilyLevel(x_level));
    }
    if method == RdrMethod::ExactSmall && x.len() > EXACT_SMALL_MAX_OUTCOMES {
        return Err(StarError::TooManyOutcomes {
            got: x.len(),
            max: EXACT_SMALL_MAX_OUTCOMES,
        });
    }
    let mut objective = |y: &RandomVariable| -> Option<f64> {
        let dy = dev.eval(y);
        if dy > 0.0 {
            Some(-mu.eval(y) + x_level * dy)
        } else {
            None
        }
    };
    let best = match method {
        RdrMethod::ExactSmall => refined_grid_search(x, &mut objective, false).map(|(_, v)| v),
        RdrMethod::TruncationHeuristic => truncation_search(x, &mut objective, false),
    };
    let at_x = objective(x);
    Ok(match (best, at_x) {
        (Some(b), Some(v)) => b.min(v),
        (Some(b), None) => b,
        (None, Some(v)) => v,
        (None, None) => f64::INFINITY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk::es;

    fn rv4() -> RandomVariable {
        RandomVariable::from_values(&[-1.0, 1.0, 2.0, 3.0]).unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn family_solver_es_crossing() {
        let x = rv4();
        let got = index_from_family(&MonotoneRiskFamily::es_based(), &x, FamilyOptions::default())
            .unwrap();
        assert_close(got.value(), 1.0, 1e-8);
        assert!(matches!(got.mode(), AcceptabilityMode::Bisected { .. }));
        // the returned level is attained
        assert!(es(&x, 1.0 / (1.0 + got.value())).unwrap() <= 0.0);
    }

    #[test]
    fn family_solver_constants() {
        let zero = RandomVariable::from_values(&[0.0, 0.0]).unwrap();
        let got =
            index_from_family(&MonotoneRiskFamily::es_based(), &zero, FamilyOptions::default())
                .unwrap();
        assert!(got.is_capped());
        assert_eq!(got.value(), 1e6);

        let neg = RandomVariable::from_values(&[-1.0, -1.0]).unwrap();
        let got =
            index_from_family(&MonotoneRiskFamily::es_based(), &neg, FamilyOptions::default())
                .unwrap();
        assert_eq!(got.value(), 0.0);
        assert_eq!(got.mode(), AcceptabilityMode::Exact);
    }

    #[test]
    fn family_solver_rejects_non_monotone() {
        // spikes above the bracket envelope on the first bisection probe
        let family = MonotoneRiskFamily::custom("bogus", |x_level, _| {
            Ok(if x_level < 6e5 { x_level - 4e5 } else { 1.0 })
        });
        let x = rv4();
        assert!(matches!(
            index_from_family(&family, &x, FamilyOptions::default()),
            Err(StarError::NonMonotoneFamily(_))
        ));
    }

    #[test]
    fn alpha_var_closed_form() {
        assert_eq!(alpha_var(&rv4()).value(), 3.0);
        let nonneg = RandomVariable::from_values(&[0.0, 1.0]).unwrap();
        assert!(alpha_var(&nonneg).is_infinite());
        let sym = RandomVariable::from_values(&[-1.0, 1.0]).unwrap();
        assert_eq!(alpha_var(&sym).value(), 1.0);
    }

    #[test]
    fn alpha_es_closed_form() {
        assert_eq!(alpha_es(&rv4()).value(), 1.0);
        let neg = RandomVariable::from_values(&[-1.0, -1.0]).unwrap();
        assert_eq!(alpha_es(&neg).value(), 0.0);
        let nonneg = RandomVariable::from_values(&[0.0, 1.0]).unwrap();
        assert!(alpha_es(&nonneg).is_infinite());
        // symmetric two-point: crossing exactly at p = 1
        let sym = RandomVariable::from_values(&[-1.0, 1.0]).unwrap();
        assert_close(alpha_es(&sym).value(), 0.0, 1e-12);
    }

    #[test]
    fn raroc_cases() {
        let x = rv4();
        let mu = RiskFunctional::expectation();
        let rho = RiskFunctional::es_level(0.25).unwrap();
        assert_close(raroc(&mu, &rho, &x).value(), 1.25, 1e-12);

        let nonneg = RandomVariable::from_values(&[0.0, 1.0]).unwrap();
        let rho_half = RiskFunctional::es_level(0.5).unwrap();
        assert!(raroc(&mu, &rho_half, &nonneg).is_infinite());

        let neg = RandomVariable::from_values(&[-1.0, -1.0]).unwrap();
        let rho_var = RiskFunctional::var_level(0.05).unwrap();
        assert_eq!(raroc(&mu, &rho_var, &neg).value(), 0.0);
    }

    #[test]
    fn raroc_family_values() {
        let x = rv4();
        let mu = RiskFunctional::expectation();
        let rho = RiskFunctional::es_level(0.25).unwrap();
        assert_close(raroc_family_rho(&mu, &rho, 1.25, &x).unwrap(), 0.0, 1e-12);
        assert_close(raroc_family_rho(&mu, &rho, 1.0, &x).unwrap(), -0.125, 1e-12);
        let zero = RandomVariable::from_values(&[0.0, 0.0]).unwrap();
        assert_eq!(raroc_family_rho(&mu, &rho, 3.0, &zero).unwrap(), 0.0);
        assert!(raroc_family_rho(&mu, &rho, 0.0, &x).is_err());
    }

    #[test]
    fn glr_modes() {
        let x = rv4();
        assert_close(glr(&x, GlrMode::Star).value(), 6.0, 1e-12);
        assert_close(glr(&x, GlrMode::Coherent).value(), 5.0, 1e-12);
        let sym = RandomVariable::from_values(&[-1.0, 1.0]).unwrap();
        assert_close(glr(&sym, GlrMode::Star).value(), 1.0, 1e-12);
        let nonneg = RandomVariable::from_values(&[0.0, 2.0]).unwrap();
        assert!(glr(&nonneg, GlrMode::Star).is_infinite());
        assert!(glr(&nonneg, GlrMode::Coherent).is_infinite());
    }

    #[test]
    fn glr_generalized_quantile_pair() {
        let x = rv4();
        let mu = RiskFunctional::neg_var_level(0.5).unwrap();
        let rho = RiskFunctional::var_level(0.05).unwrap();
        assert_close(glr_generalized(&mu, &rho, &x).unwrap().value(), 1.0, 1e-12);

        let nonneg = RandomVariable::from_values(&[0.0, 2.0]).unwrap();
        assert!(glr_generalized(&mu, &rho, &nonneg).unwrap().is_infinite());

        // mu = E, rho = -E reduces to the star gain-loss ratio
        let mu_e = RiskFunctional::expectation();
        let rho_ne = RiskFunctional::neg_expectation();
        assert_close(
            glr_generalized(&mu_e, &rho_ne, &x).unwrap().value(),
            glr(&x, GlrMode::Star).value(),
            1e-12,
        );
    }

    #[test]
    fn glr_family_matches_expectile() {
        // mu = E, rho(Y) = E[-Y]: the family equals EVaR^{1/(1+x)}
        let mu = RiskFunctional::expectation();
        let rho = RiskFunctional::neg_expectation();
        let x = rv4();
        for x_level in [0.5, 1.0, 3.0] {
            let fam = glr_family_rho(&mu, &rho, x_level, &x).unwrap();
            let oracle = crate::risk::evar(&x, 1.0 / (1.0 + x_level)).unwrap();
            assert_close(fam, oracle, 1e-8);
        }
        let c = RandomVariable::from_values(&[4.0, 4.0]).unwrap();
        assert_close(glr_family_rho(&mu, &rho, 2.0, &c).unwrap(), -4.0, 1e-9);
    }

    #[test]
    fn rdr_ratio_cases() {
        let mu = RiskFunctional::expectation();
        let dev = DeviationFunctional::es_centered(0.5).unwrap();
        let pos = RandomVariable::from_values(&[1.0, 1.0]).unwrap();
        assert!(rdr_ratio(&mu, &dev, &pos).is_infinite());
        let neg = RandomVariable::from_values(&[-1.0, -1.0]).unwrap();
        assert_eq!(rdr_ratio(&mu, &dev, &neg).value(), 0.0);
        assert_close(rdr_ratio(&mu, &dev, &rv4()).value(), 1.0, 1e-12);
    }

    #[test]
    fn rdr_monotone_dominates_plain_ratio() {
        let mu = RiskFunctional::expectation();
        let dev = DeviationFunctional::es_centered(0.5).unwrap();
        let x = RandomVariable::from_values(&[2.0, -1.0]).unwrap();
        let plain = rdr_ratio(&mu, &dev, &x).value();
        let sup = rdr_monotone(&mu, &dev, &x, RdrMethod::ExactSmall).unwrap();
        assert!(sup.value() >= plain - 1e-12);
        assert_eq!(sup.mode(), AcceptabilityMode::LowerBound);
        let heur = rdr_monotone(&mu, &dev, &x, RdrMethod::TruncationHeuristic).unwrap();
        assert!(heur.value() >= plain - 1e-12);

        let pos = RandomVariable::from_values(&[1.0, 2.0]).unwrap();
        assert!(rdr_monotone(&mu, &dev, &pos, RdrMethod::ExactSmall)
            .unwrap()
            .is_infinite());

        let big = RandomVariable::from_values(&[1.0; 7]).unwrap();
        assert!(matches!(
            rdr_monotone(&mu, &dev, &big, RdrMethod::ExactSmall),
            Err(StarError::TooManyOutcomes { .. })
        ));
    }

    #[test]
    fn rdr_family_bounds() {
        let mu = RiskFunctional::expectation();
        let dev = DeviationFunctional::es_centered(0.5).unwrap();
        let x = RandomVariable::from_values(&[2.0, -1.0]).unwrap();
        for x_level in [0.5, 1.0, 2.0] {
            let fam = rdr_family_rho(&mu, &dev, x_level, &x, RdrMethod::ExactSmall).unwrap();
            let at_x = -x.expectation() + x_level * dev.eval(&x);
            assert!(fam <= at_x + 1e-12);
        }
        // constant positive payoff: value approaches -c from above
        let c = RandomVariable::from_values(&[2.0, 2.0]).unwrap();
        let fam = rdr_family_rho(&mu, &dev, 1.0, &c, RdrMethod::ExactSmall).unwrap();
        assert!(fam <= -1.9, "got {fam}");
    }
}
