use alloc::vec::Vec;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum PricingError {
    #[error("at least one priority level is required")]
    NoLevels,
    #[error("cost for priority {level} must be positive and finite, got {value}")]
    NonPositive { level: usize, value: f64 },
    #[error("costs must strictly decrease with priority index (level {level})")]
    NotDecreasing { level: usize },
}

/// Revenue per resource block per slot, indexed by priority (1 = highest).
#[derive(Clone, Debug, PartialEq)]
pub struct PriorityCosts(Vec<f64>);

impl PriorityCosts {
    pub fn new(costs: Vec<f64>) -> Result<Self, PricingError> {
        if costs.is_empty() {
            return Err(PricingError::NoLevels);
        }
        for (k, &c) in costs.iter().enumerate() {
            if !(c.is_finite() && c > 0.0) {
                return Err(PricingError::NonPositive { level: k + 1, value: c });
            }
            if k > 0 && c >= costs[k - 1] {
                return Err(PricingError::NotDecreasing { level: k + 1 });
            }
        }
        Ok(Self(costs))
    }

    /// `α = 0.5`, `β = 0.3`, `γ = 0.2`.
    pub fn three_level_default() -> Self {
        Self(alloc::vec![0.5, 0.3, 0.2])
    }

    pub fn levels(&self) -> usize {
        self.0.len()
    }

    /// Cost of priority `p` (1-based). Panics when `p` is out of range.
    pub fn cost(&self, p: u32) -> f64 {
        self.0[p as usize - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}
