//! Combinations of acceptability indexes (min/median/max/order statistics),
//! scenario-set evaluation and model-uncertainty ranges.

use std::collections::BTreeMap;

use crate::accept::Acceptability;
use crate::catalog::IndexSpec;
use crate::error::{Result, StarError};
use crate::space::{RandomVariable, Scenario};

/// A nonempty, named collection of index evaluators.
#[derive(Clone)]
pub struct IndexEnsemble {
    members: Vec<IndexSpec>,
}

impl IndexEnsemble {
    pub fn new(members: Vec<IndexSpec>) -> Result<Self> {
        if members.is_empty() {
            return Err(StarError::EmptyEnsemble);
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[IndexSpec] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Order-statistic rule applied across member values. `Median` is the lower
/// median for even counts; `OrderStat(k)` is the k-th smallest, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineRule {
    Min,
    Median,
    Max,
    OrderStat(usize),
}

/// Applies the rule over member values with infinity-aware ordering (capped
/// values order by their cap and keep their provenance).
pub fn combine(
    ensemble: &IndexEnsemble,
    x: &RandomVariable,
    rule: CombineRule,
) -> Result<Acceptability> {
    let mut values = Vec::with_capacity(ensemble.len());
    for member in ensemble.members() {
        values.push(member.evaluate(x)?);
    }
    values.sort_by(|a, b| a.order_value().total_cmp(&b.order_value()));
    let n = values.len();
    let k = match rule {
        CombineRule::Min => 0,
        CombineRule::Max => n - 1,
        CombineRule::Median => (n - 1) / 2,
        CombineRule::OrderStat(k) => {
            if k == 0 || k > n {
                return Err(StarError::OrderStatOutOfRange { k, n });
            }
            k - 1
        }
    };
    Ok(values[k])
}

/// Named scenarios on a common outcome set with a distinguished base.
#[derive(Debug, Clone)]
pub struct ScenarioSet {
    scenarios: Vec<(String, Scenario)>,
    base: String,
}

impl ScenarioSet {
    pub fn new(scenarios: Vec<(String, Scenario)>, base: impl Into<String>) -> Result<Self> {
        if scenarios.is_empty() {
            return Err(StarError::EmptyInput);
        }
        let len = scenarios[0].1.len();
        if scenarios.iter().any(|(_, s)| s.len() != len) {
            return Err(StarError::LengthMismatch {
                left: len,
                right: scenarios.iter().map(|(_, s)| s.len()).find(|l| *l != len).unwrap_or(len),
            });
        }
        let base = base.into();
        if !scenarios.iter().any(|(n, _)| *n == base) {
            return Err(StarError::MissingScenario(base));
        }
        Ok(Self { scenarios, base })
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn scenarios(&self) -> &[(String, Scenario)] {
        &self.scenarios
    }
}

/// Evaluates a law-invariant index under each reweighting. Zero-weight
/// outcomes are dropped before evaluation so left-quantile semantics match a
/// genuinely smaller space.
pub fn scenario_evaluate(
    index: &IndexSpec,
    x: &RandomVariable,
    scenarios: &ScenarioSet,
) -> Result<BTreeMap<String, Acceptability>> {
    if !index.flags().law_invariant {
        return Err(StarError::NotLawInvariant(index.name().to_string()));
    }
    let mut out = BTreeMap::new();
    for (name, scenario) in scenarios.scenarios() {
        if scenario.len() != x.len() {
            return Err(StarError::LengthMismatch {
                left: scenario.len(),
                right: x.len(),
            });
        }
        let mut values = Vec::new();
        let mut weights = Vec::new();
        for (v, w) in x.values().iter().zip(scenario.weights()) {
            if *w > 0.0 {
                values.push(*v);
                weights.push(*w);
            }
        }
        let reduced = RandomVariable::from_weighted(&values, Some(&weights))?;
        out.insert(name.clone(), index.evaluate(&reduced)?);
    }
    Ok(out)
}

/// A range-type quantity that may be infinite or undetermined
/// (infinity minus infinity is never reported as zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RangeValue {
    Finite(f64),
    Infinite,
    Undetermined,
}

impl RangeValue {
    pub fn as_finite(&self) -> Option<f64> {
        match self {
            RangeValue::Finite(v) => Some(*v),
            _ => None,
        }
    }
}

fn inf_aware_diff(a: f64, b: f64) -> RangeValue {
    match (a.is_infinite(), b.is_infinite()) {
        (true, true) => RangeValue::Undetermined,
        (true, false) => RangeValue::Infinite,
        // b <= a in every use below, so this arm is unreachable in practice
        (false, true) => RangeValue::Undetermined,
        (false, false) => RangeValue::Finite(a - b),
    }
}

/// Worst-case/range model-uncertainty summary of per-scenario values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyMeasures {
    /// `max - min` across scenarios.
    pub range: RangeValue,
    /// `max - base`.
    pub upper_half: RangeValue,
    /// `base - min`.
    pub lower_half: RangeValue,
    /// The minimum (robust) value.
    pub robust_inf: Acceptability,
    /// True when any member is a capped solver output rather than exact.
    pub saturated: bool,
}

pub fn uncertainty_measures(
    values: &BTreeMap<String, Acceptability>,
    base: &str,
) -> Result<UncertaintyMeasures> {
    if values.is_empty() {
        return Err(StarError::EmptyInput);
    }
    let base_value = values
        .get(base)
        .ok_or_else(|| StarError::MissingScenario(base.to_string()))?;
    let mut min = *values.values().next().expect("nonempty");
    let mut max = min;
    for v in values.values() {
        if v.order_value() < min.order_value() {
            min = *v;
        }
        if v.order_value() > max.order_value() {
            max = *v;
        }
    }
    Ok(UncertaintyMeasures {
        range: inf_aware_diff(max.order_value(), min.order_value()),
        upper_half: inf_aware_diff(max.order_value(), base_value.order_value()),
        lower_half: inf_aware_diff(base_value.order_value(), min.order_value()),
        robust_inf: min,
        saturated: values.values().any(|v| v.is_capped()),
    })
}
