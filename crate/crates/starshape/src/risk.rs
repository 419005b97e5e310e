//! Monetary risk and deviation measures on empirical distributions: VaR,
//! expected shortfall, expectiles, Choquet distortion integrals, benchmark
//! loss VaR and deviation functionals.

use std::sync::Arc;

use crate::error::{Result, StarError};
use crate::space::{RandomVariable, Scenario};

/// Value at Risk: negative left quantile at level `p`; `p = 0` gives the
/// negative essential infimum.
pub fn var(x: &RandomVariable, p: f64) -> Result<f64> {
    var_under(x, p, None)
}

pub fn var_under(x: &RandomVariable, p: f64, scenario: Option<&Scenario>) -> Result<f64> {
    Ok(-x.left_quantile_under(p, scenario)?)
}

/// Expected shortfall: exact average of VaR over the worst `p` probability
/// mass (closed form on the sorted atoms); `p = 0` falls back to `var(x, 0)`.
pub fn es(x: &RandomVariable, p: f64) -> Result<f64> {
    es_under(x, p, None)
}

pub fn es_under(x: &RandomVariable, p: f64, scenario: Option<&Scenario>) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(StarError::LevelOutOfRange(p));
    }
    if p == 0.0 {
        return var_under(x, 0.0, scenario);
    }
    Ok(-x.integrated_quantile(p, scenario)? / p)
}

/// The `p`-expectile: unique root `y` of
/// `p E[(X - y)^+] = (1 - p) E[(X - y)^-]`, found by bracketing on
/// `[min X, max X]` with false-position/bisection steps. Converges when the
/// residual scaled by `1 + E|X|` drops below 1e-12 or the bracket width
/// below `1e-14 (1 + |y|)`.
pub fn expectile(x: &RandomVariable, p: f64) -> Result<f64> {
    expectile_under(x, p, None)
}

pub fn expectile_under(x: &RandomVariable, p: f64, scenario: Option<&Scenario>) -> Result<f64> {
    if p == 0.0 || p == 1.0 {
        return Err(StarError::DegenerateLevel(p));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(StarError::LevelOutOfRange(p));
    }
    let atoms = x.atoms_under(scenario)?;
    let mut lo = atoms[0].0;
    let mut hi = atoms[atoms.len() - 1].0;
    if lo == hi {
        return Ok(lo);
    }
    let residual = |y: f64| -> f64 {
        let mut pos = 0.0;
        let mut neg = 0.0;
        for &(v, w) in &atoms {
            let d = v - y;
            if d > 0.0 {
                pos += w * d;
            } else {
                neg += w * (-d);
            }
        }
        p * pos - (1.0 - p) * neg
    };
    let scale = 1.0 + atoms.iter().map(|(v, w)| v.abs() * w).sum::<f64>();
    let mut f_lo = residual(lo);
    let mut f_hi = residual(hi);
    let mut y = 0.5 * (lo + hi);
    for iter in 0..200 {
        // alternate false-position and midpoint steps; the residual is
        // piecewise linear and strictly decreasing, so this converges fast
        let mut cand = if iter % 2 == 0 && (f_lo - f_hi).abs() > 0.0 {
            lo + (hi - lo) * f_lo / (f_lo - f_hi)
        } else {
            0.5 * (lo + hi)
        };
        if !(cand > lo && cand < hi) {
            cand = 0.5 * (lo + hi);
        }
        y = cand;
        let f_y = residual(y);
        if f_y.abs() / scale < 1e-12 {
            return Ok(y);
        }
        if f_y > 0.0 {
            lo = y;
            f_lo = f_y;
        } else {
            hi = y;
            f_hi = f_y;
        }
        if hi - lo < 1e-14 * (1.0 + y.abs()) {
            break;
        }
    }
    Ok(y)
}

/// Expectile Value at Risk: the negative `p`-expectile.
pub fn evar(x: &RandomVariable, p: f64) -> Result<f64> {
    Ok(-expectile(x, p)?)
}

pub fn evar_under(x: &RandomVariable, p: f64, scenario: Option<&Scenario>) -> Result<f64> {
    Ok(-expectile_under(x, p, scenario)?)
}

/// Distortion function on `[0, 1]` with `g(0) = 0`, `g(1) = 1`, nondecreasing.
#[derive(Debug, Clone, PartialEq)]
pub enum Distortion {
    /// `g(y) = y`; the Choquet integral reduces to the expectation of the loss.
    Identity,
    /// `g(y) = 1_{y >= p}`; reproduces VaR at level `p`.
    Step(f64),
    /// `g(y) = min(y / p, 1)`; reproduces expected shortfall at level `p`.
    EsClamp(f64),
    /// Piecewise-linear distortion through the given `(u, g(u))` knots.
    /// Knots must start at `(0, 0)`, end at `(1, 1)`, and be nondecreasing.
    PiecewiseLinear(Vec<(f64, f64)>),
}

impl Distortion {
    pub fn validate(&self) -> Result<()> {
        match self {
            Distortion::Identity => Ok(()),
            Distortion::Step(p) | Distortion::EsClamp(p) => {
                if *p > 0.0 && *p <= 1.0 {
                    Ok(())
                } else {
                    Err(StarError::InvalidDistortion(format!(
                        "level {p} outside (0, 1]"
                    )))
                }
            }
            Distortion::PiecewiseLinear(knots) => {
                if knots.len() < 2 {
                    return Err(StarError::InvalidDistortion(
                        "need at least two knots".into(),
                    ));
                }
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if first != (0.0, 0.0) || last != (1.0, 1.0) {
                    return Err(StarError::InvalidDistortion(
                        "knots must run from (0, 0) to (1, 1)".into(),
                    ));
                }
                for pair in knots.windows(2) {
                    if pair[1].0 <= pair[0].0 || pair[1].1 < pair[0].1 {
                        return Err(StarError::InvalidDistortion(
                            "knots must be increasing in u and nondecreasing in g".into(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        let y = y.clamp(0.0, 1.0);
        match self {
            Distortion::Identity => y,
            Distortion::Step(p) => {
                if y >= *p {
                    1.0
                } else {
                    0.0
                }
            }
            Distortion::EsClamp(p) => (y / p).min(1.0),
            Distortion::PiecewiseLinear(knots) => {
                for pair in knots.windows(2) {
                    let (u0, g0) = pair[0];
                    let (u1, g1) = pair[1];
                    if y <= u1 {
                        return g0 + (g1 - g0) * (y - u0) / (u1 - u0);
                    }
                }
                1.0
            }
        }
    }
}

/// Discrete Choquet integral of the loss `L = -X`: with merged distinct loss
/// levels and survival probabilities taken from the same cumulative sums as
/// the left quantile, `sum_k l_k (g(S_k) - g(S_{k+1}))`. The boundary
/// `y = p` of the step distortion counts as `g = 1`, which reproduces
/// `var(x, p)` exactly, ties included.
pub fn choquet(x: &RandomVariable, g: &Distortion) -> Result<f64> {
    choquet_under(x, g, None)
}

pub fn choquet_under(x: &RandomVariable, g: &Distortion, scenario: Option<&Scenario>) -> Result<f64> {
    g.validate()?;
    let atoms = x.atoms_under(scenario)?;
    // merge equal values, keeping the cumulative weight at each block end so
    // atom selection matches the left quantile bit for bit
    let mut blocks: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    let mut cum = 0.0;
    for &(v, w) in &atoms {
        cum += w;
        match blocks.last_mut() {
            Some(last) if last.0 == v => last.1 = cum,
            _ => blocks.push((v, cum)),
        }
    }
    if let Some(last) = blocks.last_mut() {
        last.1 = 1.0;
    }
    let mut total = 0.0;
    let mut g_prev = g.eval(0.0);
    for &(v, c) in &blocks {
        let g_c = g.eval(c);
        total += -v * (g_c - g_prev);
        g_prev = g_c;
    }
    Ok(total)
}

/// Right-continuous piecewise-constant loss threshold `theta : R+ -> [0, 1]`.
/// The first breakpoint must sit at `t = 0` so the map is total on `R+`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossThreshold {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl LossThreshold {
    pub fn new(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != levels.len() {
            return Err(StarError::InvalidThreshold(
                "breakpoints and levels must be nonempty and equal length".into(),
            ));
        }
        if breakpoints[0] != 0.0 {
            return Err(StarError::InvalidThreshold(
                "first breakpoint must be 0".into(),
            ));
        }
        for pair in breakpoints.windows(2) {
            if !(pair[1] > pair[0]) || !pair[1].is_finite() {
                return Err(StarError::InvalidThreshold(
                    "breakpoints must be finite and strictly increasing".into(),
                ));
            }
        }
        for pair in levels.windows(2) {
            if pair[1] < pair[0] {
                return Err(StarError::InvalidThreshold(
                    "levels must be nondecreasing".into(),
                ));
            }
        }
        if levels.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(StarError::InvalidThreshold("levels must lie in [0, 1]".into()));
        }
        Ok(Self { breakpoints, levels })
    }

    pub fn constant(p: f64) -> Result<Self> {
        Self::new(vec![0.0], vec![p])
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut level = self.levels[0];
        for (b, l) in self.breakpoints.iter().zip(&self.levels) {
            if *b <= t {
                level = *l;
            } else {
                break;
            }
        }
        level
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
}

/// Benchmark loss VaR `sup_t { VaR^{theta(t)}(X) - t }`. On each constant
/// piece of `theta` the objective strictly decreases in `t`, so the sup is
/// attained at a piece's left endpoint; enumerating the breakpoints is exact.
pub fn lvar(x: &RandomVariable, theta: &LossThreshold) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for (b, l) in theta.breakpoints().iter().zip(theta.levels()) {
        let obj = var(x, *l)? - b;
        if obj > best {
            best = obj;
        }
    }
    Ok(best)
}

/// Declared property flags for a risk (or reward) functional. Flags are
/// claims the property suite checks, not assumptions the code trusts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RiskFlags {
    pub monetary: bool,
    pub positively_homogeneous: bool,
    pub convex: bool,
    pub star_shaped: bool,
    pub law_invariant: bool,
}

/// A named evaluator `X -> R`. Reward measures reuse this type with the
/// evaluator returning the reward value directly (the negative of the
/// induced risk measure); the flags always describe the induced risk side.
#[derive(Clone)]
pub struct RiskFunctional {
    name: String,
    flags: RiskFlags,
    eval: Arc<dyn Fn(&RandomVariable) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for RiskFunctional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RiskFunctional")
            .field("name", &self.name)
            .field("flags", &self.flags)
            .finish()
    }
}

impl RiskFunctional {
    pub fn custom(
        name: impl Into<String>,
        flags: RiskFlags,
        eval: impl Fn(&RandomVariable) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            flags,
            eval: Arc::new(eval),
        }
    }

    /// Reward `mu(X) = E[X]`.
    pub fn expectation() -> Self {
        Self::custom(
            "E",
            RiskFlags {
                monetary: true,
                positively_homogeneous: true,
                convex: true,
                star_shaped: true,
                law_invariant: true,
            },
            |x| x.expectation(),
        )
    }

    /// Risk `rho(X) = E[-X]`.
    pub fn neg_expectation() -> Self {
        Self::custom(
            "-E",
            RiskFlags {
                monetary: true,
                positively_homogeneous: true,
                convex: true,
                star_shaped: true,
                law_invariant: true,
            },
            |x| -x.expectation(),
        )
    }

    /// Risk `VaR^p`.
    pub fn var_level(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(StarError::LevelOutOfRange(p));
        }
        Ok(Self::custom(
            format!("VaR^{p}"),
            RiskFlags {
                monetary: true,
                positively_homogeneous: true,
                convex: false,
                star_shaped: true,
                law_invariant: true,
            },
            move |x| var(x, p).expect("level validated"),
        ))
    }

    /// Reward `mu(X) = -VaR^p(X)` (a quantile reward; the median for p = 0.5).
    pub fn neg_var_level(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(StarError::LevelOutOfRange(p));
        }
        Ok(Self::custom(
            format!("-VaR^{p}"),
            RiskFlags {
                monetary: true,
                positively_homogeneous: true,
                convex: false,
                star_shaped: true,
                law_invariant: true,
            },
            move |x| -var(x, p).expect("level validated"),
        ))
    }

    /// Risk `ES^p`.
    pub fn es_level(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(StarError::LevelOutOfRange(p));
        }
        Ok(Self::custom(
            format!("ES^{p}"),
            RiskFlags {
                monetary: true,
                positively_homogeneous: true,
                convex: true,
                star_shaped: true,
                law_invariant: true,
            },
            move |x| es(x, p).expect("level validated"),
        ))
    }

    /// Risk `EVaR^p` (negative expectile); convex for `p <= 1/2`.
    pub fn evar_level(p: f64) -> Result<Self> {
        if p <= 0.0 || p >= 1.0 {
            return Err(StarError::DegenerateLevel(p));
        }
        Ok(Self::custom(
            format!("EVaR^{p}"),
            RiskFlags {
                monetary: true,
                positively_homogeneous: true,
                convex: p <= 0.5,
                star_shaped: true,
                law_invariant: true,
            },
            move |x| evar(x, p).expect("level validated"),
        ))
    }

    pub fn eval(&self, x: &RandomVariable) -> f64 {
        (self.eval)(x)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn flags(&self) -> RiskFlags {
        self.flags
    }
}

/// Declared property flags for a deviation functional.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DeviationFlags {
    pub translation_insensitive: bool,
    pub positively_homogeneous: bool,
    pub star_shaped: bool,
}

/// A named dispersion evaluator `X -> R+`; zero on constants by contract.
#[derive(Clone)]
pub struct DeviationFunctional {
    name: String,
    flags: DeviationFlags,
    eval: Arc<dyn Fn(&RandomVariable) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for DeviationFunctional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DeviationFunctional")
            .field("name", &self.name)
            .field("flags", &self.flags)
            .finish()
    }
}

impl DeviationFunctional {
    pub fn custom(
        name: impl Into<String>,
        flags: DeviationFlags,
        eval: impl Fn(&RandomVariable) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            flags,
            eval: Arc::new(eval),
        }
    }

    /// Centered expected shortfall `ES^p(X - E[X])`.
    pub fn es_centered(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(StarError::LevelOutOfRange(p));
        }
        Ok(Self::custom(
            format!("ES^{p}(X - E[X])"),
            DeviationFlags {
                translation_insensitive: true,
                positively_homogeneous: true,
                star_shaped: true,
            },
            move |x| {
                if x.min_value() == x.max_value() {
                    return 0.0;
                }
                let centered = x.affine(1.0, -x.expectation());
                es(&centered, p).expect("level validated")
            },
        ))
    }

    /// Interquantile range `VaR^lo(X) - VaR^hi(X)`, nonnegative because VaR
    /// is nonincreasing in the level.
    pub fn interquantile(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
            return Err(StarError::InvalidDeviationLevels { lo, hi });
        }
        Ok(Self::custom(
            format!("VaR^{lo} - VaR^{hi}"),
            DeviationFlags {
                translation_insensitive: true,
                positively_homogeneous: true,
                star_shaped: true,
            },
            move |x| {
                var(x, lo).expect("level validated") - var(x, hi).expect("level validated")
            },
        ))
    }

    /// Centered risk `rho(X - E[X])`, clamped at zero with a warning when the
    /// supplied risk measure is not expectation-bounded (a true deviation
    /// never goes negative).
    pub fn centered(rho: RiskFunctional) -> Self {
        let flags = DeviationFlags {
            translation_insensitive: true,
            positively_homogeneous: rho.flags().positively_homogeneous,
            star_shaped: rho.flags().star_shaped,
        };
        let name = format!("{}(X - E[X])", rho.name());
        Self::custom(name.clone(), flags, move |x| {
            if x.min_value() == x.max_value() {
                return 0.0;
            }
            let centered = x.affine(1.0, -x.expectation());
            let v = rho.eval(&centered);
            if v < 0.0 {
                log::warn!("{name} evaluated to {v} < 0; clamping to 0 (not expectation-bounded)");
                0.0
            } else {
                v
            }
        })
    }

    pub fn eval(&self, x: &RandomVariable) -> f64 {
        (self.eval)(x)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn flags(&self) -> DeviationFlags {
        self.flags
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv4() -> RandomVariable {
        RandomVariable::from_values(&[-1.0, 1.0, 2.0, 3.0]).unwrap()
    }

    #[test]
    fn var_hand_values() {
        let x = rv4();
        assert_eq!(var(&x, 0.25).unwrap(), 1.0);
        assert_eq!(var(&x, 0.5).unwrap(), -1.0);
        assert_eq!(var(&x, 0.0).unwrap(), 1.0);
        let c = RandomVariable::from_values(&[-2.0, -2.0]).unwrap();
        for p in [0.0, 0.3, 1.0] {
            assert_eq!(var(&c, p).unwrap(), 2.0);
        }
    }

    #[test]
    fn es_hand_values() {
        let x = rv4();
        assert_eq!(es(&x, 0.5).unwrap(), 0.0);
        assert_eq!(es(&x, 0.25).unwrap(), 1.0);
        assert!((es(&x, 1.0).unwrap() - (-1.25)).abs() < 1e-12);
        assert!(es(&x, 1.5).is_err());
    }

    #[test]
    fn expectile_identities() {
        let x = rv4();
        // p = 0.5 expectile is the mean
        assert!((expectile(&x, 0.5).unwrap() - 1.25).abs() < 1e-10);
        let c = RandomVariable::from_values(&[3.0, 3.0]).unwrap();
        assert_eq!(expectile(&c, 0.25).unwrap(), 3.0);
        assert!(expectile(&x, 0.0).is_err());
        assert!(expectile(&x, 1.0).is_err());
    }

    #[test]
    fn expectile_matches_grid_scan() {
        // brute-force oracle: scan the residual on a 1e-6 grid over [-1, 1]
        let x = RandomVariable::from_values(&[-1.0, 1.0]).unwrap();
        let p = 0.25;
        let resid = |y: f64| {
            let pos = 0.5 * (1.0 - y).max(0.0) + 0.5 * (-1.0 - y).max(0.0);
            let neg = 0.5 * (y - 1.0).max(0.0) + 0.5 * (y + 1.0).max(0.0);
            p * pos - (1.0 - p) * neg
        };
        let mut best = f64::INFINITY;
        let mut root = f64::NAN;
        let steps = 2_000_000;
        for k in 0..=steps {
            let y = -1.0 + 2.0 * k as f64 / steps as f64;
            if resid(y).abs() < best {
                best = resid(y).abs();
                root = y;
            }
        }
        let got = expectile(&x, p).unwrap();
        assert!((got - root).abs() < 2e-6, "solver {got} vs scan {root}");
    }

    #[test]
    fn choquet_reductions() {
        let x = rv4();
        assert!((choquet(&x, &Distortion::Identity).unwrap() - (-1.25)).abs() < 1e-12);
        // es_clamp at level 0.5 reproduces ES^{0.5}
        assert_eq!(choquet(&x, &Distortion::EsClamp(0.5)).unwrap(), 0.0);
        // step at level 0.25 reproduces VaR^{0.25}, boundary included
        assert_eq!(choquet(&x, &Distortion::Step(0.25)).unwrap(), 1.0);
        assert!(choquet(&x, &Distortion::Step(0.0)).is_err());
    }

    #[test]
    fn choquet_piecewise_linear_validation() {
        let ok = Distortion::PiecewiseLinear(vec![(0.0, 0.0), (0.5, 0.8), (1.0, 1.0)]);
        assert!(ok.validate().is_ok());
        let bad = Distortion::PiecewiseLinear(vec![(0.0, 0.1), (1.0, 1.0)]);
        assert!(bad.validate().is_err());
        let decreasing = Distortion::PiecewiseLinear(vec![(0.0, 0.0), (0.5, 0.9), (1.0, 0.8)]);
        assert!(decreasing.validate().is_err());
    }

    #[test]
    fn lvar_hand_values() {
        let x = rv4();
        let theta = LossThreshold::new(vec![0.0, 0.5], vec![0.25, 0.5]).unwrap();
        assert_eq!(lvar(&x, &theta).unwrap(), 1.0);
        // constant theta reduces to VaR at that level
        let flat = LossThreshold::constant(0.25).unwrap();
        assert_eq!(lvar(&x, &flat).unwrap(), var(&x, 0.25).unwrap());
        let zero = RandomVariable::from_values(&[0.0, 0.0]).unwrap();
        assert_eq!(lvar(&zero, &LossThreshold::constant(0.3).unwrap()).unwrap(), 0.0);
        assert!(LossThreshold::new(vec![0.5], vec![0.2]).is_err());
        assert!(LossThreshold::new(vec![0.0, 0.5], vec![0.5, 0.2]).is_err());
    }

    #[test]
    fn deviations() {
        let x = rv4();
        let iq = DeviationFunctional::interquantile(0.25, 0.5).unwrap();
        assert_eq!(iq.eval(&x), 2.0);
        let esd = DeviationFunctional::es_centered(0.5).unwrap();
        assert!((esd.eval(&x) - 1.25).abs() < 1e-12);
        let c = RandomVariable::from_values(&[7.0, 7.0, 7.0]).unwrap();
        assert_eq!(iq.eval(&c), 0.0);
        assert_eq!(esd.eval(&c), 0.0);
        assert!(DeviationFunctional::interquantile(0.5, 0.25).is_err());
    }
}
