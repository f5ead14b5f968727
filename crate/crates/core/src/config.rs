use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::MAX_DIM;
use crate::shape::TieSlack;

/// Scene-wide parameters shared by the experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    pub dim: usize,
    pub seed: u64,
    pub n_samples: usize,
    pub n_rays: usize,
    pub tie_slack: TieSlack,
    pub fit_tolerance: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            seed: 0,
            n_samples: 100_000,
            n_rays: 100_000,
            tie_slack: TieSlack::default(),
            fit_tolerance: 0.02,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_DIM).contains(&self.dim) {
            return Err(Error::InvalidParameter(format!("dimension {} outside 2..={MAX_DIM}", self.dim)));
        }
        if self.n_samples == 0 || self.n_rays == 0 {
            return Err(Error::InvalidParameter("sample budgets must be >= 1".into()));
        }
        let slack = match self.tie_slack.validate()? {
            TieSlack::Relative(c) | TieSlack::Absolute(c) => c,
        };
        if slack <= 0.0 || !(self.fit_tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be > 0".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SceneConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            SceneConfig { dim: 1, ..Default::default() },
            SceneConfig { dim: 9, ..Default::default() },
            SceneConfig { n_rays: 0, ..Default::default() },
            SceneConfig { tie_slack: TieSlack::Absolute(0.0), ..Default::default() },
            SceneConfig { fit_tolerance: -1.0, ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }
}
