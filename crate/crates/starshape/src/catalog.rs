//! The reporting index set: eight quantile/ratio acceptability indexes plus
//! their min/median/max combinations, with declared property flags.

use std::sync::Arc;

use crate::accept::{
    alpha_es_under, alpha_var_under, glr_generalized, glr_under, raroc, rdr_ratio, Acceptability,
    GlrMode,
};
use crate::error::Result;
use crate::risk::{DeviationFunctional, RiskFunctional};
use crate::space::RandomVariable;

/// Declared properties of an index; test targets, not assumptions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IndexFlags {
    pub scale_invariant: bool,
    pub quasi_concave: bool,
    pub star_shaped: bool,
    pub law_invariant: bool,
}

pub type IndexEval = Arc<dyn Fn(&RandomVariable) -> Result<Acceptability> + Send + Sync>;

/// A named acceptability-index evaluator with its property flags.
#[derive(Clone)]
pub struct IndexSpec {
    name: String,
    flags: IndexFlags,
    eval: IndexEval,
}

impl std::fmt::Debug for IndexSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IndexSpec")
            .field("name", &self.name)
            .field("flags", &self.flags)
            .finish()
    }
}

impl IndexSpec {
    pub fn new(
        name: impl Into<String>,
        flags: IndexFlags,
        eval: impl Fn(&RandomVariable) -> Result<Acceptability> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            flags,
            eval: Arc::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn flags(&self) -> IndexFlags {
        self.flags
    }

    pub fn evaluate(&self, x: &RandomVariable) -> Result<Acceptability> {
        (self.eval)(x)
    }
}

/// Probability levels for the index set: the tail level feeds VaR/ES at the
/// stressed quantile, the median level the central quantile reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Levels {
    pub tail: f64,
    pub median: f64,
}

impl Default for Levels {
    fn default() -> Self {
        Self {
            tail: 0.05,
            median: 0.50,
        }
    }
}

const ALL: IndexFlags = IndexFlags {
    scale_invariant: true,
    quasi_concave: true,
    star_shaped: true,
    law_invariant: true,
};

const NOT_QC: IndexFlags = IndexFlags {
    scale_invariant: true,
    quasi_concave: false,
    star_shaped: true,
    law_invariant: true,
};

/// The eight reporting indexes, in table row order:
/// VaR, ES, RAROC, RAROC_SS, GLR, GLR_SS, RDR, RDR_SS.
pub fn standard_indexes(levels: Levels) -> Result<Vec<IndexSpec>> {
    let tail = levels.tail;
    let median = levels.median;
    let mut out = Vec::with_capacity(8);

    out.push(IndexSpec::new("VaR", NOT_QC, |x| alpha_var_under(x, None)));
    out.push(IndexSpec::new("ES", ALL, |x| alpha_es_under(x, None)));

    let mu_e = RiskFunctional::expectation();
    let rho_es = RiskFunctional::es_level(tail)?;
    out.push(IndexSpec::new("RAROC", ALL, move |x| {
        Ok(raroc(&mu_e, &rho_es, x))
    }));

    let mu_med = RiskFunctional::neg_var_level(median)?;
    let rho_var = RiskFunctional::var_level(tail)?;
    out.push(IndexSpec::new("RAROC_SS", NOT_QC, move |x| {
        Ok(raroc(&mu_med, &rho_var, x))
    }));

    out.push(IndexSpec::new("GLR", NOT_QC, |x| {
        glr_under(x, GlrMode::Star, None)
    }));

    let mu_med2 = RiskFunctional::neg_var_level(median)?;
    let rho_var2 = RiskFunctional::var_level(tail)?;
    out.push(IndexSpec::new("GLR_SS", NOT_QC, move |x| {
        glr_generalized(&mu_med2, &rho_var2, x)
    }));

    let mu_e2 = RiskFunctional::expectation();
    let dev_es = DeviationFunctional::es_centered(tail)?;
    out.push(IndexSpec::new("RDR", NOT_QC, move |x| {
        Ok(rdr_ratio(&mu_e2, &dev_es, x))
    }));

    let mu_med3 = RiskFunctional::neg_var_level(median)?;
    let dev_iq = DeviationFunctional::interquantile(tail, median)?;
    out.push(IndexSpec::new("RDR_SS", NOT_QC, move |x| {
        Ok(rdr_ratio(&mu_med3, &dev_iq, x))
    }));

    Ok(out)
}

/// Min/median/max combinations over the given members (lower median for even
/// counts). Combinations of scale-invariant members stay scale invariant and
/// star-shaped; only the minimum would preserve quasi-concavity, and these
/// members are not all quasi-concave anyway.
pub fn combination_indexes(members: Vec<IndexSpec>) -> Result<Vec<IndexSpec>> {
    use crate::robust::{combine, CombineRule, IndexEnsemble};
    let ensemble = Arc::new(IndexEnsemble::new(members)?);
    let mut out = Vec::with_capacity(3);
    for (name, rule) in [
        ("Min", CombineRule::Min),
        ("Median", CombineRule::Median),
        ("Max", CombineRule::Max),
    ] {
        let ens = Arc::clone(&ensemble);
        out.push(IndexSpec::new(name, NOT_QC, move |x| combine(&ens, x, rule)));
    }
    Ok(out)
}

/// The eleven indexes of the reporting pipeline: the eight standard ones
/// followed by Min, Median, Max over them.
pub fn table_indexes(levels: Levels) -> Result<Vec<IndexSpec>> {
    let mut base = standard_indexes(levels)?;
    let combos = combination_indexes(base.clone())?;
    base.extend(combos);
    Ok(base)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_set_has_eleven_members_in_order() {
        let indexes = table_indexes(Levels::default()).unwrap();
        let names: Vec<&str> = indexes.iter().map(|i| i.name()).collect();
        assert_eq!(
            names,
            [
                "VaR", "ES", "RAROC", "RAROC_SS", "GLR", "GLR_SS", "RDR", "RDR_SS", "Min",
                "Median", "Max"
            ]
        );
    }

    #[test]
    fn combos_bounded_by_members() {
        let indexes = table_indexes(Levels::default()).unwrap();
        let x = RandomVariable::from_values(&[-0.01, 0.005, 0.02, -0.003]).unwrap();
        let member_values: Vec<f64> = indexes[..8]
            .iter()
            .map(|i| i.evaluate(&x).unwrap().order_value())
            .collect();
        let lo = member_values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = member_values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        for combo in &indexes[8..] {
            let v = combo.evaluate(&x).unwrap().order_value();
            assert!(v >= lo && v <= hi, "{} = {v} outside [{lo}, {hi}]", combo.name());
        }
        let min_v = indexes[8].evaluate(&x).unwrap().order_value();
        let max_v = indexes[10].evaluate(&x).unwrap().order_value();
        assert_eq!(min_v, lo);
        assert_eq!(max_v, hi);
    }
}
