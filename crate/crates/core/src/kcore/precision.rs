use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{bits_for_digits, Real};

/// Euler–Mascheroni constant to 250 significant digits.
const EULER_GAMMA: &str = "0.5772156649015328606065120900824024310421593359399235988057672348848677267776646709369470632917467495146314472498070824809605040144865428362241739976449235362535003337429373377376739427925952582470949160087352039481656708532331517766115286211995015079";

/// Largest working precision the stored constants support.
pub const MAX_WORKING_DIGITS: u32 = 240;

/// Guard digits required between working and target precision.
pub const GUARD_DIGITS: u32 = 6;

/// Per-operation rounding allowance, in units of `10^-working_digits`.
///
/// Every error bound in the crate charges `ROUNDING_ULPS * u * magnitude`
/// for each arithmetic step (or each term of a sum), where `u` is
/// [`PrecisionConfig::unit_roundoff`] and `magnitude` is the largest
/// intermediate involved.
pub const ROUNDING_ULPS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionConfig {
    pub working_digits: u32,
    pub target_digits: u32,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig {
            working_digits: 34,
            target_digits: 16,
        }
    }
}

impl PrecisionConfig {
    pub fn new(working_digits: u32, target_digits: u32) -> Result<Self> {
        let cfg = PrecisionConfig {
            working_digits,
            target_digits,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Working precision chosen from a requested result accuracy: the larger
    /// of the default 34 digits and `target + GUARD_DIGITS`.
    pub fn for_target(target_digits: u32) -> Result<Self> {
        Self::new((target_digits + GUARD_DIGITS).max(34), target_digits)
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_digits == 0 {
            return Err(Error::Config("target_digits must be >= 1".into()));
        }
        if self.working_digits < self.target_digits + GUARD_DIGITS {
            return Err(Error::Config(format!(
                "working_digits {} must be at least target_digits {} + {GUARD_DIGITS}",
                self.working_digits, self.target_digits
            )));
        }
        if self.working_digits > MAX_WORKING_DIGITS {
            return Err(Error::Config(format!(
                "working_digits {} exceeds the supported maximum {MAX_WORKING_DIGITS}",
                self.working_digits
            )));
        }
        Ok(())
    }

    /// Twice the working digits (capped), same target.
    pub fn doubled(&self) -> Self {
        PrecisionConfig {
            working_digits: (self.working_digits * 2).min(MAX_WORKING_DIGITS),
            target_digits: self.target_digits,
        }
    }

    pub fn bits(&self) -> usize {
        bits_for_digits(self.working_digits)
    }

    /// Relative rounding unit used in error bounds, `10^-working_digits`.
    pub fn unit_roundoff(&self) -> f64 {
        10f64.powi(-(self.working_digits as i32))
    }

    /// Rounding allowance for `ops` operations on quantities of size `magnitude`.
    pub fn rounding(&self, ops: f64, magnitude: f64) -> f64 {
        ROUNDING_ULPS * ops.max(1.0) * self.unit_roundoff() * magnitude.abs()
    }

    pub fn euler_gamma(&self) -> Real {
        Real::parse_decimal(EULER_GAMMA, self.bits()).expect("valid constant literal")
    }

    pub fn pi(&self) -> Real {
        Real::pi(self.bits())
    }

    pub fn real(&self, x: f64) -> Real {
        Real::from_f64(x, self.bits())
    }
}
