use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("post-selection probability is zero: the trigger detector can never fire")]
    NoTrigger,

    #[error("no clicks are possible (zero transmittance and zero dark count)")]
    NoClicks,

    #[error("decoy intensity mu = {mu} must be strictly below signal intensity mu' = {mu_prime}")]
    IntensityOrder { mu: f64, mu_prime: f64 },

    #[error("no triggered pulses recorded for the {0} intensity")]
    NoTriggeredPulses(&'static str),

    #[error("inconsistent counts for the {pulse} intensity: {reason}")]
    InconsistentCounts { pulse: &'static str, reason: &'static str },

    #[error("single-photon yield bound is zero; no single-photon QBER can be certified")]
    NoSinglePhotonYield,

    #[error("empty search range: upper end {max} must exceed lower end {min}")]
    InvalidRange { min: f64, max: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and non-negative",
        })
    }
}

pub(crate) fn check_unit_closed(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in [0, 1]",
        })
    }
}

pub(crate) fn check_unit_half_open(name: &'static str, value: f64) -> Result<()> {
    if (0.0..1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in [0, 1)",
        })
    }
}
