//! Finite probability spaces and the random variables living on them.
//!
//! Positions are vectors of outcome values aligned on a shared [`FiniteSpace`];
//! all quantile machinery works on the sorted atoms with exact cumulative
//! weights (left-continuous inverse, no interpolation).

use std::sync::Arc;

use crate::error::{Result, StarError};

/// Tolerance accepted on the sum of user-supplied weights before normalization.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// A finite probability space: strictly positive weights summing to one.
#[derive(Debug, PartialEq)]
pub struct FiniteSpace {
    weights: Vec<f64>,
}

impl FiniteSpace {
    /// Space with `n` equally likely outcomes.
    pub fn equal(n: usize) -> Result<Arc<Self>> {
        if n == 0 {
            return Err(StarError::EmptyInput);
        }
        let w = 1.0 / n as f64;
        Ok(Arc::new(Self {
            weights: vec![w; n],
        }))
    }

    /// Space with the given outcome weights. The sum may deviate from one by
    /// at most [`WEIGHT_SUM_TOL`]; weights are then normalized so the stored
    /// space satisfies the 1e-12 sum invariant.
    pub fn from_weights(weights: &[f64]) -> Result<Arc<Self>> {
        if weights.is_empty() {
            return Err(StarError::EmptyInput);
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(StarError::NonFiniteValue(i));
            }
            if w <= 0.0 {
                return Err(StarError::NonpositiveWeight { index: i, weight: w });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(StarError::WeightSum { sum, tol: WEIGHT_SUM_TOL });
        }
        Ok(Arc::new(Self {
            weights: weights.iter().map(|w| w / sum).collect(),
        }))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Reweighting of a [`FiniteSpace`]: nonnegative weights on the same outcome
/// set summing to one. Zero weights are allowed (absolute continuity with
/// respect to the base measure).
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    weights: Vec<f64>,
}

impl Scenario {
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(StarError::EmptyInput);
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(StarError::NonFiniteValue(i));
            }
            if w < 0.0 {
                return Err(StarError::NegativeWeight { index: i, weight: w });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(StarError::WeightSum { sum, tol: WEIGHT_SUM_TOL });
        }
        Ok(Self {
            weights: weights.iter().map(|w| w / sum).collect(),
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Quantile-order flavors: plain quantile dominance or integrated-quantile
/// (second-order) dominance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StochasticOrder {
    First,
    Second,
}

/// A bounded real-valued payoff on a shared finite space. Immutable.
#[derive(Debug, Clone)]
pub struct RandomVariable {
    space: Arc<FiniteSpace>,
    values: Vec<f64>,
}

impl RandomVariable {
    /// Payoff with explicit values on an existing space.
    pub fn new(space: Arc<FiniteSpace>, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(StarError::LengthMismatch {
                left: values.len(),
                right: space.len(),
            });
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(StarError::NonFiniteValue(i));
            }
        }
        Ok(Self { space, values })
    }

    /// Payoff on a fresh equal-weight space.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let space = FiniteSpace::equal(values.len())?;
        Self::new(space, values.to_vec())
    }

    /// Payoff on a fresh space with the given weights (default: equal).
    pub fn from_weighted(values: &[f64], weights: Option<&[f64]>) -> Result<Self> {
        let space = match weights {
            Some(w) => {
                if w.len() != values.len() {
                    return Err(StarError::LengthMismatch {
                        left: values.len(),
                        right: w.len(),
                    });
                }
                FiniteSpace::from_weights(w)?
            }
            None => FiniteSpace::equal(values.len())?,
        };
        Self::new(space, values.to_vec())
    }

    /// Constant payoff on an existing space.
    pub fn constant(space: Arc<FiniteSpace>, c: f64) -> Result<Self> {
        let n = space.len();
        Self::new(space, vec![c; n])
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when both variables are aligned on the same outcome set.
    pub fn same_space(&self, other: &RandomVariable) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || self.space == other.space
    }

    fn check_scenario(&self, scenario: Option<&Scenario>) -> Result<()> {
        if let Some(q) = scenario {
            if q.len() != self.len() {
                return Err(StarError::LengthMismatch {
                    left: q.len(),
                    right: self.len(),
                });
            }
        }
        Ok(())
    }

    /// Atoms with positive probability under the base measure or a scenario,
    /// sorted by (value, weight). The canonical order makes every downstream
    /// quantile and expectation exactly invariant under outcome permutations.
    pub(crate) fn atoms_under(&self, scenario: Option<&Scenario>) -> Result<Vec<(f64, f64)>> {
        self.check_scenario(scenario)?;
        let weights = scenario
            .map(|q| q.weights())
            .unwrap_or_else(|| self.space.weights());
        let mut atoms: Vec<(f64, f64)> = self
            .values
            .iter()
            .zip(weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&v, &w)| (v, w))
            .collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        Ok(atoms)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Left quantile `inf { x : F(x) >= u }` computed exactly on the sorted
    /// atoms; `u = 0` maps to the essential infimum, `u = 1` to the maximum.
    pub fn left_quantile(&self, u: f64) -> Result<f64> {
        self.left_quantile_under(u, None)
    }

    /// Left quantile under a reweighting; zero-weight outcomes are invisible.
    pub fn left_quantile_under(&self, u: f64, scenario: Option<&Scenario>) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(StarError::LevelOutOfRange(u));
        }
        let atoms = self.atoms_under(scenario)?;
        if u <= 0.0 {
            return Ok(atoms[0].0);
        }
        let mut cum = 0.0;
        for &(v, w) in &atoms {
            cum += w;
            if cum >= u {
                return Ok(v);
            }
        }
        Ok(atoms.last().expect("nonempty atoms").0)
    }

    /// Expected value. Summation runs over the canonically sorted atoms, so
    /// the result is deterministic and exactly law invariant at the data
    /// level.
    pub fn expectation(&self) -> f64 {
        self.expectation_under(None).expect("base measure always valid")
    }

    pub fn expectation_under(&self, scenario: Option<&Scenario>) -> Result<f64> {
        let atoms = self.atoms_under(scenario)?;
        Ok(atoms.iter().map(|(v, w)| v * w).sum())
    }

    /// Exact integral of the quantile function over `[0, u]`: full
    /// value-times-weight slabs plus one partial slab.
    pub fn integrated_quantile(&self, u: f64, scenario: Option<&Scenario>) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(StarError::LevelOutOfRange(u));
        }
        let atoms = self.atoms_under(scenario)?;
        let mut cum = 0.0;
        let mut total = 0.0;
        for &(v, w) in &atoms {
            if cum + w < u {
                total += v * w;
                cum += w;
            } else {
                total += v * (u - cum);
                return Ok(total);
            }
        }
        Ok(total)
    }

    /// Affine image `a * X + b`.
    pub fn affine(&self, a: f64, b: f64) -> Self {
        Self {
            space: Arc::clone(&self.space),
            values: self.values.iter().map(|v| a * v + b).collect(),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        self.affine(a, 0.0)
    }

    /// Positive part `X^+ = max(X, 0)`.
    pub fn positive_part(&self) -> Self {
        Self {
            space: Arc::clone(&self.space),
            values: self.values.iter().map(|v| v.max(0.0)).collect(),
        }
    }

    /// Negative part `X^- = max(-X, 0)`, so that `-X^- = min(X, 0)`.
    pub fn negative_part(&self) -> Self {
        Self {
            space: Arc::clone(&self.space),
            values: self.values.iter().map(|v| (-v).max(0.0)).collect(),
        }
    }

    /// Outcome-wise minimum with another payoff on the same space.
    pub fn pointwise_min(&self, other: &RandomVariable) -> Result<Self> {
        if !self.same_space(other) {
            return Err(StarError::SpaceMismatch);
        }
        Ok(Self {
            space: Arc::clone(&self.space),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.min(*b))
                .collect(),
        })
    }

    /// Outcome-wise minimum with a constant.
    pub fn pointwise_min_const(&self, c: f64) -> Self {
        Self {
            space: Arc::clone(&self.space),
            values: self.values.iter().map(|v| v.min(c)).collect(),
        }
    }

    /// Convex mixture `lambda * X + (1 - lambda) * Y` on the shared space.
    pub fn mix(&self, other: &RandomVariable, lambda: f64) -> Result<Self> {
        if !self.same_space(other) {
            return Err(StarError::SpaceMismatch);
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(StarError::MixOutOfRange(lambda));
        }
        Ok(Self {
            space: Arc::clone(&self.space),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
                .collect(),
        })
    }
}

/// Merged breakpoint levels of the quantile functions of both variables under
/// a scenario: all cumulative weights, deduplicated.
fn breakpoints(x: &RandomVariable, y: &RandomVariable, q: Option<&Scenario>) -> Result<Vec<f64>> {
    let mut levels = Vec::new();
    for rv in [x, y] {
        let mut cum = 0.0;
        for (_, w) in rv.atoms_under(q)? {
            cum += w;
            levels.push(cum.min(1.0));
        }
    }
    levels.push(1.0);
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    Ok(levels)
}

/// Quantile dominance of `x` over `y` at every breakpoint, for every scenario
/// in the set (empty set means the base measure). Strict comparisons are
/// slackened by 1e-12.
pub fn dominates(
    x: &RandomVariable,
    y: &RandomVariable,
    order: StochasticOrder,
    scenarios: &[Scenario],
) -> Result<bool> {
    if !x.same_space(y) {
        return Err(StarError::SpaceMismatch);
    }
    const SLACK: f64 = 1e-12;
    let base = [];
    let set: &[Scenario] = if scenarios.is_empty() { &base } else { scenarios };
    let iter: Vec<Option<&Scenario>> = if set.is_empty() {
        vec![None]
    } else {
        set.iter().map(Some).collect()
    };
    for q in iter {
        for &u in &breakpoints(x, y, q)? {
            let (fx, fy) = match order {
                StochasticOrder::First => {
                    (x.left_quantile_under(u, q)?, y.left_quantile_under(u, q)?)
                }
                StochasticOrder::Second => {
                    (x.integrated_quantile(u, q)?, y.integrated_quantile(u, q)?)
                }
            };
            if fx < fy - SLACK {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv4() -> RandomVariable {
        RandomVariable::from_values(&[-1.0, 1.0, 2.0, 3.0]).unwrap()
    }

    #[test]
    fn constructor_validates() {
        assert!(matches!(
            RandomVariable::from_values(&[]),
            Err(StarError::EmptyInput)
        ));
        assert!(matches!(
            RandomVariable::from_values(&[1.0, f64::NAN]),
            Err(StarError::NonFiniteValue(1))
        ));
        assert!(matches!(
            RandomVariable::from_weighted(&[1.0, 2.0], Some(&[0.5, 0.6])),
            Err(StarError::WeightSum { .. })
        ));
        assert!(matches!(
            RandomVariable::from_weighted(&[1.0, 2.0], Some(&[1.0, -0.0])),
            Err(StarError::NonpositiveWeight { .. })
        ));
        let x = RandomVariable::from_values(&[5.0]).unwrap();
        assert_eq!(x.expectation(), 5.0);
    }

    #[test]
    fn left_quantile_matches_hand_values() {
        let x = rv4();
        assert_eq!(x.left_quantile(0.25).unwrap(), -1.0);
        assert_eq!(x.left_quantile(0.5).unwrap(), 1.0);
        assert_eq!(x.left_quantile(0.0).unwrap(), -1.0);
        assert_eq!(x.left_quantile(1.0).unwrap(), 3.0);
        let c = RandomVariable::from_values(&[5.0]).unwrap();
        for u in [0.0, 0.3, 0.9, 1.0] {
            assert_eq!(c.left_quantile(u).unwrap(), 5.0);
        }
        assert!(x.left_quantile(1.5).is_err());
    }

    #[test]
    fn expectation_and_integrated_quantile() {
        let x = rv4();
        assert_eq!(x.expectation(), 1.25);
        assert_eq!(x.integrated_quantile(0.25, None).unwrap(), -0.25);
        assert_eq!(x.integrated_quantile(0.5, None).unwrap(), 0.0);
        assert!((x.integrated_quantile(1.0, None).unwrap() - 1.25).abs() < 1e-12);
    }

    #[test]
    fn expectation_under_point_mass() {
        let x = RandomVariable::from_values(&[-1.0, 1.0]).unwrap();
        let q = Scenario::new(&[1.0, 0.0]).unwrap();
        assert_eq!(x.expectation_under(Some(&q)).unwrap(), -1.0);
        // zero-weight outcomes are invisible to quantiles
        assert_eq!(x.left_quantile_under(0.0, Some(&q)).unwrap(), -1.0);
        let q2 = Scenario::new(&[0.0, 1.0]).unwrap();
        assert_eq!(x.left_quantile_under(0.0, Some(&q2)).unwrap(), 1.0);
    }

    #[test]
    fn transforms() {
        let x = rv4();
        assert_eq!(x.positive_part().values(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(x.negative_part().values(), &[1.0, 0.0, 0.0, 0.0]);
        let a = RandomVariable::from_values(&[-1.0, 3.0]).unwrap();
        let b = RandomVariable::new(Arc::clone(a.space()), vec![1.0, 1.0]).unwrap();
        assert_eq!(a.mix(&b, 0.5).unwrap().values(), &[0.0, 2.0]);
        assert!(a.mix(&rv4(), 0.5).is_err());
        assert!(a.mix(&b, 1.5).is_err());
        assert_eq!(a.pointwise_min(&b).unwrap().values(), &[-1.0, 1.0]);
    }

    #[test]
    fn shared_space_by_value() {
        let a = RandomVariable::from_values(&[1.0, 2.0]).unwrap();
        let b = RandomVariable::from_values(&[3.0, 4.0]).unwrap();
        assert!(a.same_space(&b));
        let c = RandomVariable::from_weighted(&[3.0, 4.0], Some(&[0.3, 0.7])).unwrap();
        assert!(!a.same_space(&c));
    }

    #[test]
    fn dominance_orders() {
        let y = rv4();
        let x = y.affine(1.0, 1.0);
        assert!(dominates(&x, &y, StochasticOrder::First, &[]).unwrap());
        assert!(dominates(&x, &y, StochasticOrder::Second, &[]).unwrap());
        assert!(dominates(&y, &y, StochasticOrder::First, &[]).unwrap());
        assert!(dominates(&y, &y, StochasticOrder::Second, &[]).unwrap());

        // mean-preserving spread: X = (0,0) second-order dominates Y = (-1,1)
        let x = RandomVariable::from_values(&[0.0, 0.0]).unwrap();
        let y = RandomVariable::from_values(&[-1.0, 1.0]).unwrap();
        assert!(dominates(&x, &y, StochasticOrder::Second, &[]).unwrap());
        assert!(!dominates(&y, &x, StochasticOrder::Second, &[]).unwrap());
        assert!(!dominates(&x, &y, StochasticOrder::First, &[]).unwrap());
    }

    #[test]
    fn weights_are_normalized() {
        let s = FiniteSpace::from_weights(&[0.25 + 2e-10, 0.25, 0.25, 0.25]).unwrap();
        let sum: f64 = s.weights().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
}
