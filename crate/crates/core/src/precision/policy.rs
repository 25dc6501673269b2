use crate::error::{Error, Result};

use super::real::MIN_PRECISION;

/// Working-precision schedule for table builds.
///
/// The starting precision for a computation indexed by `n_max` is
/// `base_bits + bits_per_n * n_max`; certification recomputes at
/// `escalation_factor` times that and escalates further until two
/// consecutive levels agree on `target_certified_digits` digits or
/// `max_bits` would be exceeded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecisionPolicy {
    pub base_bits: u32,
    pub bits_per_n: u32,
    /// Escalation factor as `numerator / denominator`, must exceed one.
    pub escalation_factor: (u32, u32),
    pub target_certified_digits: u32,
    pub max_bits: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            base_bits: 512,
            bits_per_n: 32,
            escalation_factor: (2, 1),
            target_certified_digits: 40,
            max_bits: 16384,
        }
    }
}

impl PrecisionPolicy {
    pub fn validate(&self) -> Result<()> {
        let (num, den) = self.escalation_factor;
        if den == 0 || num <= den {
            return Err(Error::InvalidInput(format!(
                "escalation factor {num}/{den} must be a rational greater than one"
            )));
        }
        if self.base_bits < MIN_PRECISION {
            return Err(Error::InvalidInput(format!(
                "base precision {} is below the {MIN_PRECISION}-bit floor",
                self.base_bits
            )));
        }
        if self.target_certified_digits == 0 {
            return Err(Error::InvalidInput("target digits must be positive".into()));
        }
        if self.max_bits < self.base_bits {
            return Err(Error::InvalidInput("max_bits below base_bits".into()));
        }
        Ok(())
    }

    /// Starting precision for a computation indexed by `n_max`.
    pub fn working_bits(&self, n_max: usize) -> u32 {
        self.base_bits
            .saturating_add(self.bits_per_n.saturating_mul(n_max as u32))
            .max(MIN_PRECISION)
    }

    /// Next precision level after `bits`.
    pub fn escalate(&self, bits: u32) -> u32 {
        let (num, den) = self.escalation_factor;
        let next = (bits as u64 * num as u64).div_ceil(den as u64);
        next.min(u32::MAX as u64) as u32
    }
}
