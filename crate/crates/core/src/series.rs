use serde::{Deserialize, Serialize};

use crate::design::{ExperimentPlan, Group};
use crate::error::CoreError;
use crate::trial::{Capability, Strategy};

/// Which exogenous dummy blocks enter a regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExogSelector {
    #[default]
    Capability,
    Strategy,
    CapabilityAndStrategy,
}

/// Per-trial normalized trust with the trial conditions it was observed
/// under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustSeries {
    pub group: Group,
    pub values: Vec<f64>,
    pub capability: Vec<Capability>,
    pub strategy: Vec<Strategy>,
}

impl TrustSeries {
    pub fn new(
        group: Group,
        values: Vec<f64>,
        capability: Vec<Capability>,
        strategy: Vec<Strategy>,
    ) -> Result<Self, CoreError> {
        for other in [capability.len(), strategy.len()] {
            if other != values.len() {
                return Err(CoreError::LengthMismatch {
                    left: values.len(),
                    right: other,
                });
            }
        }
        Ok(Self {
            group,
            values,
            capability,
            strategy,
        })
    }

    /// Wraps values observed over a plan's main trials.
    pub fn from_plan(plan: &ExperimentPlan, values: Vec<f64>) -> Result<Self, CoreError> {
        let (capability, strategy) = plan
            .main_trials()
            .map(|t| {
                let s = t.searcher.expect("main trials always have a searcher");
                (s.capability, s.strategy)
            })
            .unzip();
        Self::new(plan.group, values, capability, strategy)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn exog_names(selector: ExogSelector) -> Vec<String> {
        let cap = Capability::ALL.iter().map(|c| c.name().to_owned());
        let strat = Strategy::ALL.iter().map(|s| s.name().to_owned());
        match selector {
            ExogSelector::Capability => cap.collect(),
            ExogSelector::Strategy => strat.collect(),
            ExogSelector::CapabilityAndStrategy => cap.chain(strat).collect(),
        }
    }

    /// One-hot design rows for the selected factors.
    pub fn exog(&self, selector: ExogSelector) -> Vec<Vec<f64>> {
        let one_hot = |i: usize| {
            let mut r = vec![0.0; 3];
            r[i] = 1.0;
            r
        };
        (0..self.len())
            .map(|t| {
                let c = one_hot(self.capability[t].index());
                let s = one_hot(self.strategy[t].index());
                match selector {
                    ExogSelector::Capability => c,
                    ExogSelector::Strategy => s,
                    ExogSelector::CapabilityAndStrategy => c.into_iter().chain(s).collect(),
                }
            })
            .collect()
    }
}
