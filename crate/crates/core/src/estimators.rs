//! Closed-form confidence intervals for a binomial proportion from summary
//! data (successes `x`, trials `n`).
//!
//! Three families are implemented: the Wald interval (normal approximation
//! with the standard error evaluated at the estimate), the Wilson score
//! interval, and the adjusted Wilson interval of type epsilon, which adds
//! `epsilon` pseudo-observations (half successes, half failures) and then
//! applies the Wald recipe to the shrunken estimate.

use serde::{Deserialize, Serialize};

use crate::special;
use crate::{Error, Result};

pub use crate::special::inverse_normal_cdf;

/// A confidence level together with its significance level and critical value.
///
/// `z` is the upper `alpha/2` standard-normal quantile, computed (not tabled)
/// so arbitrary levels work.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ConfidenceLevel {
    level: f64,
    alpha: f64,
    z: f64,
}

impl ConfidenceLevel {
    pub fn new(level: f64) -> Result<Self> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::InvalidLevel(level));
        }
        let alpha = 1.0 - level;
        let z = special::inverse_normal_cdf(1.0 - 0.5 * alpha)?;
        Ok(Self { level, alpha, z })
    }

    /// Convenience constructor from a percentage, e.g. `95.0`.
    pub fn from_percent(percent: f64) -> Result<Self> {
        Self::new(percent / 100.0)
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn z(&self) -> f64 {
        self.z
    }
}

impl TryFrom<f64> for ConfidenceLevel {
    type Error = Error;
    fn try_from(level: f64) -> Result<Self> {
        Self::new(level)
    }
}

impl From<ConfidenceLevel> for f64 {
    fn from(level: ConfidenceLevel) -> f64 {
        level.level
    }
}

/// Which interval family to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum Method {
    Wald,
    Wilson,
    AdjustedWilson { epsilon: u32 },
}

impl Method {
    /// Short lowercase token used in CSV columns and file names.
    pub fn token(&self) -> &'static str {
        match self {
            Method::Wald => "wald",
            Method::Wilson => "wilson",
            Method::AdjustedWilson { .. } => "adjusted_wilson",
        }
    }

    /// Human-readable label, e.g. `Adjusted Wilson 4`.
    pub fn label(&self) -> String {
        match self {
            Method::Wald => "Wald".to_string(),
            Method::Wilson => "Wilson".to_string(),
            Method::AdjustedWilson { epsilon } => format!("Adjusted Wilson {epsilon}"),
        }
    }

    pub fn epsilon(&self) -> Option<u32> {
        match self {
            Method::AdjustedWilson { epsilon } => Some(*epsilon),
            _ => None,
        }
    }

    /// Sort key: Wald, Wilson, then adjusted Wilson by epsilon.
    pub fn order_key(&self) -> u32 {
        match self {
            Method::Wald => 0,
            Method::Wilson => 1,
            Method::AdjustedWilson { epsilon } => 2 + epsilon,
        }
    }
}

/// An interval estimator: a method at a confidence level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    method: Method,
    level: ConfidenceLevel,
}

impl EstimatorSpec {
    pub fn new(method: Method, level: ConfidenceLevel) -> Result<Self> {
        if let Method::AdjustedWilson { epsilon } = method {
            if epsilon == 0 {
                return Err(Error::InvalidEpsilon);
            }
        }
        Ok(Self { method, level })
    }

    pub fn wald(level: ConfidenceLevel) -> Self {
        Self { method: Method::Wald, level }
    }

    pub fn wilson(level: ConfidenceLevel) -> Self {
        Self { method: Method::Wilson, level }
    }

    pub fn adjusted_wilson(epsilon: u32, level: ConfidenceLevel) -> Result<Self> {
        Self::new(Method::AdjustedWilson { epsilon }, level)
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn level(&self) -> ConfidenceLevel {
        self.level
    }

    pub fn epsilon(&self) -> Option<u32> {
        self.method.epsilon()
    }

    /// Evaluate this estimator on a sample.
    pub fn interval(&self, sample: SampleSummary) -> Interval {
        match self.method {
            Method::Wald => wald_interval(sample, self.level),
            Method::Wilson => wilson_interval(sample, self.level),
            Method::AdjustedWilson { epsilon } => {
                adjusted_wilson_interval_real(sample, f64::from(epsilon), self.level)
            }
        }
    }

    /// Label like `Wald 95%` or `Adjusted Wilson 4 99%`.
    pub fn label(&self) -> String {
        format!("{} {}%", self.method.label(), self.level.level() * 100.0)
    }
}

/// Summary data for one binomial sample: successes out of trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSummary {
    successes: u64,
    trials: u64,
}

impl SampleSummary {
    pub fn new(successes: u64, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::ZeroTrials);
        }
        if successes > trials {
            return Err(Error::InvalidSample { successes, trials });
        }
        Ok(Self { successes, trials })
    }

    pub fn successes(&self) -> u64 {
        self.successes
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    /// Sample proportion `x / n`.
    pub fn p_hat(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// The mirrored sample `(n - x, n)`.
    pub fn complement(&self) -> SampleSummary {
        SampleSummary {
            successes: self.trials - self.successes,
            trials: self.trials,
        }
    }
}

/// A closed real interval `[lower, upper]`, stored unclipped.
///
/// Membership tests use the unclipped endpoints; the clipped accessors exist
/// for display only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Self {
        debug_assert!(lower <= upper);
        Self { lower, upper }
    }

    /// Closed-interval membership on the unclipped endpoints.
    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p <= self.upper
    }

    pub fn clipped_lower(&self) -> f64 {
        self.lower.max(0.0)
    }

    pub fn clipped_upper(&self) -> f64 {
        self.upper.min(1.0)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Wald interval: `p_hat +/- z * sqrt(p_hat (1 - p_hat) / n)`.
///
/// Degenerates to a point at `x = 0` or `x = n`.
pub fn wald_interval(sample: SampleSummary, level: ConfidenceLevel) -> Interval {
    let n = sample.trials() as f64;
    let p_hat = sample.p_hat();
    let half_width = level.z() * (p_hat * (1.0 - p_hat) / n).sqrt();
    Interval::new(p_hat - half_width, p_hat + half_width)
}

/// Wilson score interval,
/// `(n p_hat + z^2/2)/(n + z^2) +/- z sqrt((n p_hat (1-p_hat) + z^2/4)/(n + z^2)^2)`.
pub fn wilson_interval(sample: SampleSummary, level: ConfidenceLevel) -> Interval {
    let n = sample.trials() as f64;
    let p_hat = sample.p_hat();
    let z = level.z();
    let z_sq = z * z;
    let denom = n + z_sq;
    let center = (n * p_hat + 0.5 * z_sq) / denom;
    let half_width = z * (n * p_hat * (1.0 - p_hat) + 0.25 * z_sq).sqrt() / denom;
    // The endpoints are provably inside [0, 1]; max/min only strips rounding dust.
    Interval::new((center - half_width).max(0.0), (center + half_width).min(1.0))
}

/// The Wilson interval rewritten so the midpoint is the weighted average of
/// `p_hat` and `1/2`, with the same weights reappearing inside the standard
/// error. Kept as an independent evaluation path for the equivalence check
/// against [`wilson_interval`].
pub fn wilson_interval_weighted_form(sample: SampleSummary, level: ConfidenceLevel) -> Interval {
    let n = sample.trials() as f64;
    let p_hat = sample.p_hat();
    let z = level.z();
    let z_sq = z * z;
    let total = n + z_sq;
    let w_sample = n / total;
    let w_half = z_sq / total;
    let center = w_sample * p_hat + w_half * 0.5;
    let variance = (w_sample * (p_hat * (1.0 - p_hat)) + w_half * 0.25) / total;
    let half_width = z * variance.sqrt();
    Interval::new((center - half_width).max(0.0), (center + half_width).min(1.0))
}

/// Adjusted Wilson interval of type `epsilon`:
/// `p_tilde +/- z sqrt(p_tilde (1 - p_tilde)/(n + epsilon))` with
/// `p_tilde = (n p_hat + epsilon/2)/(n + epsilon)`.
///
/// The endpoints may protrude outside `[0, 1]` and are stored unclipped.
pub fn adjusted_wilson_interval(
    sample: SampleSummary,
    epsilon: u32,
    level: ConfidenceLevel,
) -> Result<Interval> {
    if epsilon == 0 {
        return Err(Error::InvalidEpsilon);
    }
    Ok(adjusted_wilson_interval_real(sample, f64::from(epsilon), level))
}

/// Formula-level adjusted Wilson accepting a real pseudo-observation count.
/// The experiment surface uses integers; the real-valued form exists so the
/// `epsilon = z^2` midpoint identity with the Wilson interval can be checked.
pub fn adjusted_wilson_interval_real(
    sample: SampleSummary,
    epsilon: f64,
    level: ConfidenceLevel,
) -> Interval {
    let n = sample.trials() as f64;
    let p_tilde = (n * sample.p_hat() + 0.5 * epsilon) / (n + epsilon);
    let half_width = level.z() * (p_tilde * (1.0 - p_tilde) / (n + epsilon)).sqrt();
    Interval::new(p_tilde - half_width, p_tilde + half_width)
}
