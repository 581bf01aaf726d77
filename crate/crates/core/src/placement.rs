//! Limit order placement distributions on the log-return (or tick) axis.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Power-law tail `T(M) = (M / scale)^(-exponent)`, defined for `M >= scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTail {
    pub exponent: f64,
    pub scale: f64,
}

impl PowerTail {
    pub fn new(exponent: f64, scale: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::domain(format!(
                "tail exponent {exponent} must be positive"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain(format!(
                "tail scale {scale} must be positive"
            )));
        }
        Ok(Self { exponent, scale })
    }

    pub fn eval(&self, m: f64) -> Result<f64> {
        if !(m >= self.scale) {
            return Err(Error::domain(format!(
                "threshold {m} below the tail onset {}",
                self.scale
            )));
        }
        Ok((m / self.scale).powf(-self.exponent))
    }

    pub fn ln_eval(&self, m: f64) -> Result<f64> {
        self.eval(m)?;
        Ok(-self.exponent * (m / self.scale).ln())
    }
}

/// A parametric placement law with an evaluable CDF and quantile function.
///
/// * `Pareto`: survival `(x/scale)^-a` on `[scale, ∞)`; body and tail coincide.
/// * `Lomax`: survival `(1 + x/scale)^-a` on `[0, ∞)`; smooth body, power tail.
/// * `TwoSided`: a mixture placing `right_weight` on `right` and the rest on
///   the mirror image of `left`. Both arms must live on `[0, ∞)`.
/// * `PointMass`: every order at `at`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PlacementModel {
    Pareto {
        exponent: f64,
        scale: f64,
    },
    Lomax {
        exponent: f64,
        scale: f64,
    },
    TwoSided {
        left: Box<PlacementModel>,
        right: Box<PlacementModel>,
        right_weight: f64,
    },
    PointMass {
        at: f64,
    },
}

impl PlacementModel {
    pub fn pareto(exponent: f64, scale: f64) -> Result<Self> {
        PowerTail::new(exponent, scale)?;
        Ok(Self::Pareto { exponent, scale })
    }

    pub fn lomax(exponent: f64, scale: f64) -> Result<Self> {
        PowerTail::new(exponent, scale)?;
        Ok(Self::Lomax { exponent, scale })
    }

    pub fn two_sided(
        left: PlacementModel,
        right: PlacementModel,
        right_weight: f64,
    ) -> Result<Self> {
        let model = Self::TwoSided {
            left: Box::new(left),
            right: Box::new(right),
            right_weight,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Pareto { exponent, scale } | Self::Lomax { exponent, scale } => {
                PowerTail::new(*exponent, *scale).map(|_| ())
            }
            Self::TwoSided {
                left,
                right,
                right_weight,
            } => {
                if !(0.0..=1.0).contains(right_weight) {
                    return Err(Error::domain(format!(
                        "right_weight {right_weight} must lie in [0, 1]"
                    )));
                }
                for arm in [left, right] {
                    arm.validate()?;
                    if !matches!(**arm, Self::Pareto { .. } | Self::Lomax { .. }) {
                        return Err(Error::domain("two-sided arms must be pareto or lomax"));
                    }
                }
                Ok(())
            }
            Self::PointMass { at } => {
                if at.is_finite() {
                    Ok(())
                } else {
                    Err(Error::domain("point mass location must be finite"))
                }
            }
        }
    }

    /// `P(X > x)`.
    pub fn survival(&self, x: f64) -> f64 {
        match self {
            Self::Pareto { exponent, scale } => {
                if x <= *scale {
                    1.0
                } else {
                    (x / scale).powf(-exponent)
                }
            }
            Self::Lomax { exponent, scale } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (1.0 + x / scale).powf(-exponent)
                }
            }
            Self::TwoSided {
                left,
                right,
                right_weight,
            } => {
                if x >= 0.0 {
                    right_weight * right.survival(x)
                } else {
                    // P(-Y > x) = P(Y < -x) = 1 - P(Y >= -x); arms are continuous
                    right_weight + (1.0 - right_weight) * (1.0 - left.survival(-x))
                }
            }
            Self::PointMass { at } => {
                if x < *at {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.survival(x)
    }

    /// Inverse CDF for `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Self::Pareto { exponent, scale } => scale * (1.0 - u).powf(-1.0 / exponent),
            Self::Lomax { exponent, scale } => scale * ((1.0 - u).powf(-1.0 / exponent) - 1.0),
            Self::TwoSided {
                left,
                right,
                right_weight,
            } => {
                let left_weight = 1.0 - right_weight;
                if u < left_weight {
                    // the mirrored arm: small u maps to large |x|
                    -left.quantile(1.0 - u / left_weight)
                } else {
                    right.quantile(((u - left_weight) / right_weight).min(f64::MAX))
                }
            }
            Self::PointMass { at } => *at,
        }
    }

    /// The right power tail `T` with `P(X > M) / T(M) → 1`, if the family has one.
    pub fn tail(&self) -> Option<PowerTail> {
        match self {
            Self::Pareto { exponent, scale } | Self::Lomax { exponent, scale } => Some(PowerTail {
                exponent: *exponent,
                scale: *scale,
            }),
            Self::TwoSided {
                right,
                right_weight,
                ..
            } => {
                let arm = right.tail()?;
                if *right_weight <= 0.0 {
                    return None;
                }
                // w (M/s)^-a = (M / (s w^(1/a)))^-a
                Some(PowerTail {
                    exponent: arm.exponent,
                    scale: arm.scale * right_weight.powf(1.0 / arm.exponent),
                })
            }
            Self::PointMass { .. } => None,
        }
    }

    /// The mirrored law of `-X`.
    pub fn mirrored(&self) -> Option<PlacementModel> {
        match self {
            Self::TwoSided {
                left,
                right,
                right_weight,
            } => Some(Self::TwoSided {
                left: right.clone(),
                right: left.clone(),
                right_weight: 1.0 - right_weight,
            }),
            Self::PointMass { at } => Some(Self::PointMass { at: -at }),
            _ => None,
        }
    }
}
