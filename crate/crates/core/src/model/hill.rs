//! Monotone rate functions used as cascade stages and Notch production terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Activating,
    Inhibiting,
}

/// Hill function `a s^p / (K^p + s^p)` (activating) or `a / (1 + (s/K)^p)`
/// (inhibiting). Negative arguments are clamped to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillParams {
    #[serde(rename = "a")]
    pub amplitude: f64,
    #[serde(rename = "K")]
    pub threshold: f64,
    #[serde(rename = "p")]
    pub exponent: f64,
    pub direction: Direction,
}

impl HillParams {
    pub fn new(amplitude: f64, threshold: f64, exponent: f64, direction: Direction) -> Result<Self> {
        let invalid = |name: &str, reason: &str| Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        };
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(invalid("a", "amplitude must be positive"));
        }
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(invalid("K", "threshold must be positive"));
        }
        if !(exponent >= 1.0 && exponent.is_finite()) {
            return Err(invalid("p", "exponent must be >= 1"));
        }
        Ok(Self {
            amplitude,
            threshold,
            exponent,
            direction,
        })
    }

    pub fn inhibiting(amplitude: f64, threshold: f64, exponent: f64) -> Result<Self> {
        Self::new(amplitude, threshold, exponent, Direction::Inhibiting)
    }

    pub fn activating(amplitude: f64, threshold: f64, exponent: f64) -> Result<Self> {
        Self::new(amplitude, threshold, exponent, Direction::Activating)
    }

    pub fn value(&self, s: f64) -> f64 {
        let r = (s.max(0.0) / self.threshold).powf(self.exponent);
        match self.direction {
            Direction::Activating => self.amplitude * r / (1.0 + r),
            Direction::Inhibiting => self.amplitude / (1.0 + r),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let (k, p) = (self.threshold, self.exponent);
        let z = s.max(0.0) / k;
        let r = z.powf(p);
        // d/ds r = p z^{p-1} / K; powf(0, 0) = 1 keeps p = 1 exact at s = 0
        let dr = p * z.powf(p - 1.0) / k;
        let mag = self.amplitude * dr / ((1.0 + r) * (1.0 + r));
        match self.direction {
            Direction::Activating => mag,
            Direction::Inhibiting => -mag,
        }
    }

    /// Supremum over `s >= 0`.
    pub fn sup(&self) -> f64 {
        self.amplitude
    }
}

/// A cascade stage `g_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stage {
    Hill(HillParams),
    Constant { value: f64 },
    Linear { slope: f64 },
}

impl Stage {
    pub fn value(&self, s: f64) -> f64 {
        match self {
            Stage::Hill(h) => h.value(s),
            Stage::Constant { value } => *value,
            Stage::Linear { slope } => slope * s,
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            Stage::Hill(h) => h.derivative(s),
            Stage::Constant { .. } => 0.0,
            Stage::Linear { slope } => *slope,
        }
    }

    /// `+1` nondecreasing, `-1` nonincreasing, `0` constant.
    pub fn monotonicity(&self) -> i8 {
        match self {
            Stage::Hill(h) => match h.direction {
                Direction::Activating => 1,
                Direction::Inhibiting => -1,
            },
            Stage::Constant { .. } => 0,
            Stage::Linear { slope } => {
                if *slope > 0.0 {
                    1
                } else if *slope < 0.0 {
                    -1
                } else {
                    0
                }
            }
        }
    }

    /// Range of the stage over arguments in `[lo, hi]` (`hi` may be infinite).
    pub fn range(&self, lo: f64, hi: f64) -> (f64, f64) {
        let at_hi = |f: &dyn Fn(f64) -> f64| {
            if hi.is_finite() {
                f(hi)
            } else {
                match self {
                    Stage::Hill(h) => match h.direction {
                        Direction::Activating => h.amplitude,
                        Direction::Inhibiting => 0.0,
                    },
                    Stage::Constant { value } => *value,
                    Stage::Linear { slope } => slope * f64::INFINITY,
                }
            }
        };
        let a = self.value(lo);
        let b = at_hi(&|s| self.value(s));
        (a.min(b), a.max(b))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Stage::Hill(h) => HillParams::new(h.amplitude, h.threshold, h.exponent, h.direction).map(|_| ()),
            Stage::Constant { value } if *value >= 0.0 && value.is_finite() => Ok(()),
            Stage::Constant { .. } => Err(Error::InvalidParameter {
                name: "value".into(),
                reason: "constant stage must be finite and nonnegative".into(),
            }),
            Stage::Linear { slope } if *slope >= 0.0 && slope.is_finite() => Ok(()),
            Stage::Linear { .. } => Err(Error::InvalidParameter {
                name: "slope".into(),
                reason: "linear stage must map R_+ into R_+ (slope >= 0)".into(),
            }),
        }
    }
}
