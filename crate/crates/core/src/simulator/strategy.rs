//! Built-in integrand strategies for the martingale pair (X, Y).
//!
//! A strategy is a deterministic, predictable rule: given the step index,
//! the current path state, the subordination factor in force, and a
//! counter-based stream dedicated to this (path, step), it produces the
//! direction matrices `(H, K)` used for the next increment. `H` must be
//! conformal and `K` must satisfy `|K|_F^2 <= factor |H|_F^2`; the engine
//! verifies both at every step and aborts the run with the step index on a
//! violation.

use super::{PathState, SimError};
use crate::geom::{DirectionMatrix, Vec2};
use crate::rng::CounterRng;
use std::collections::BTreeMap;

/// Catalog entry for one built-in strategy.
#[derive(Clone, Debug)]
pub struct StrategyInfo {
    pub identifier: &'static str,
    pub description: &'static str,
    /// Parameter names with their defaults.
    pub parameters: Vec<(&'static str, f64)>,
}

/// The built-in strategy catalog.
#[derive(Clone, Debug, PartialEq)]
pub enum Strategy {
    /// Fixed `H = scale * R(angle)`, fixed `K = k_scale * scale * R(k_angle)`.
    Constant {
        scale: f64,
        angle: f64,
        k_scale: f64,
        k_angle: f64,
    },
    /// `H = scale * I`; `K` spends the whole subordination budget on a
    /// rank-one integrand aligned with the current direction of `Y`, driving
    /// all of `Y`'s quadratic variation radially. An adversarial probe of
    /// the norm inequality.
    AngleChase { scale: f64 },
    /// `H = scale * I`; `K` spends the whole budget perpendicular to the
    /// current `Y`, which keeps `|Y|^2` glued to its quadratic variation.
    /// For p < 2 a near-deterministic `|Y_T|` beats every radial scheme, so
    /// this is the stronger sharpness probe.
    Equalize { scale: f64 },
    /// Fresh random conformal `H` and random subordinate `K` each step,
    /// drawn from the strategy's dedicated per-step stream.
    RandomAdapted { scale_min: f64, scale_max: f64 },
    /// `K = H` until `|Y|` first reaches `threshold`, then `K = 0`; `Y` is
    /// frozen from that time on, so the rule stays predictable.
    FreezeAfterHit { threshold: f64 },
}

impl Strategy {
    pub fn identifier(&self) -> &'static str {
        match self {
            Strategy::Constant { .. } => "constant",
            Strategy::AngleChase { .. } => "angle-chase",
            Strategy::Equalize { .. } => "equalize",
            Strategy::RandomAdapted { .. } => "random-adapted",
            Strategy::FreezeAfterHit { .. } => "freeze-after-hit",
        }
    }

    /// Build a strategy from its identifier and parameter overrides.
    pub fn by_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Strategy, SimError> {
        let mut strategy = match name {
            "constant" => Strategy::Constant {
                scale: 1.0,
                angle: 0.0,
                k_scale: 1.0,
                k_angle: 0.0,
            },
            "angle-chase" => Strategy::AngleChase { scale: 1.0 },
            "equalize" => Strategy::Equalize { scale: 1.0 },
            "random-adapted" => Strategy::RandomAdapted {
                scale_min: 0.5,
                scale_max: 1.5,
            },
            "freeze-after-hit" => Strategy::FreezeAfterHit { threshold: 1.0 },
            _ => {
                return Err(SimError::UnknownStrategy {
                    name: name.to_string(),
                    catalog: builtin_strategies()
                        .iter()
                        .map(|info| info.identifier)
                        .collect(),
                })
            }
        };
        for (key, &value) in params {
            strategy.set_parameter(key, value)?;
        }
        strategy.validate()?;
        Ok(strategy)
    }

    fn set_parameter(&mut self, key: &str, value: f64) -> Result<(), SimError> {
        let slot = match (&mut *self, key) {
            (Strategy::Constant { scale, .. }, "scale") => scale,
            (Strategy::Constant { angle, .. }, "angle") => angle,
            (Strategy::Constant { k_scale, .. }, "k-scale") => k_scale,
            (Strategy::Constant { k_angle, .. }, "k-angle") => k_angle,
            (Strategy::AngleChase { scale }, "scale") => scale,
            (Strategy::Equalize { scale }, "scale") => scale,
            (Strategy::RandomAdapted { scale_min, .. }, "scale-min") => scale_min,
            (Strategy::RandomAdapted { scale_max, .. }, "scale-max") => scale_max,
            (Strategy::FreezeAfterHit { threshold }, "threshold") => threshold,
            _ => {
                return Err(SimError::InvalidConfig(format!(
                    "strategy `{}` has no parameter `{key}`",
                    self.identifier()
                )))
            }
        };
        *slot = value;
        Ok(())
    }

    fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        match *self {
            Strategy::Constant {
                scale, k_scale, ..
            } => {
                if !(scale > 0.0 && scale.is_finite()) {
                    return bad(format!("constant: scale must be > 0, got {scale}"));
                }
                if !(k_scale >= 0.0 && k_scale.is_finite()) {
                    return bad(format!("constant: k-scale must be >= 0, got {k_scale}"));
                }
            }
            Strategy::AngleChase { scale } => {
                if !(scale > 0.0 && scale.is_finite()) {
                    return bad(format!("angle-chase: scale must be > 0, got {scale}"));
                }
            }
            Strategy::Equalize { scale } => {
                if !(scale > 0.0 && scale.is_finite()) {
                    return bad(format!("equalize: scale must be > 0, got {scale}"));
                }
            }
            Strategy::RandomAdapted {
                scale_min,
                scale_max,
            } => {
                if !(scale_min > 0.0 && scale_min <= scale_max && scale_max.is_finite()) {
                    return bad(format!(
                        "random-adapted: need 0 < scale-min <= scale-max, got {scale_min}..{scale_max}"
                    ));
                }
            }
            Strategy::FreezeAfterHit { threshold } => {
                if !(threshold > 0.0 && threshold.is_finite()) {
                    return bad(format!(
                        "freeze-after-hit: threshold must be > 0, got {threshold}"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Direction matrices for the upcoming increment.
    pub fn directions(
        &self,
        state: &PathState,
        rng: &mut CounterRng,
        factor: f64,
    ) -> (DirectionMatrix, DirectionMatrix) {
        match *self {
            Strategy::Constant {
                scale,
                angle,
                k_scale,
                k_angle,
            } => {
                let h = DirectionMatrix::rotation(angle).scaled(scale);
                let k = if k_scale == 1.0 && k_angle == angle {
                    h
                } else {
                    DirectionMatrix::rotation(k_angle).scaled(k_scale * scale)
                };
                (h, k)
            }
            Strategy::AngleChase { scale } => {
                let h = DirectionMatrix::identity().scaled(scale);
                let dir = state.y.unit().unwrap_or(Vec2(1.0, 0.0));
                let kappa = (factor * h.frobenius_sq()).sqrt();
                (h, DirectionMatrix::from_columns(dir * kappa, Vec2::ZERO))
            }
            Strategy::Equalize { scale } => {
                let h = DirectionMatrix::identity().scaled(scale);
                let radial = state.y.unit().unwrap_or(Vec2(1.0, 0.0));
                let perp = Vec2(-radial.1, radial.0);
                let kappa = (factor * h.frobenius_sq()).sqrt();
                (h, DirectionMatrix::from_columns(perp * kappa, Vec2::ZERO))
            }
            Strategy::RandomAdapted {
                scale_min,
                scale_max,
            } => {
                let theta = rng.uniform_in(0.0, std::f64::consts::TAU);
                let c = rng.uniform_in(scale_min, scale_max);
                let h = DirectionMatrix::rotation(theta).scaled(c);
                let raw = DirectionMatrix::new([
                    [rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)],
                    [rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)],
                ]);
                let raw_sq = raw.frobenius_sq();
                let fraction = rng.uniform();
                let k = if raw_sq == 0.0 {
                    DirectionMatrix::ZERO
                } else {
                    raw.scaled((fraction * factor * h.frobenius_sq() / raw_sq).sqrt())
                };
                (h, k)
            }
            Strategy::FreezeAfterHit { threshold } => {
                let h = DirectionMatrix::identity();
                if state.y.norm() >= threshold {
                    (h, DirectionMatrix::ZERO)
                } else {
                    (h, h)
                }
            }
        }
    }
}

/// The catalog of built-in strategies with their parameter defaults.
pub fn builtin_strategies() -> Vec<StrategyInfo> {
    vec![
        StrategyInfo {
            identifier: "constant",
            description: "fixed H = scale*R(angle), K = k-scale*scale*R(k-angle)",
            parameters: vec![
                ("scale", 1.0),
                ("angle", 0.0),
                ("k-scale", 1.0),
                ("k-angle", 0.0),
            ],
        },
        StrategyInfo {
            identifier: "angle-chase",
            description: "K spends the whole budget radially along the current Y",
            parameters: vec![("scale", 1.0)],
        },
        StrategyInfo {
            identifier: "equalize",
            description: "K spends the whole budget perpendicular to the current Y",
            parameters: vec![("scale", 1.0)],
        },
        StrategyInfo {
            identifier: "random-adapted",
            description: "fresh random conformal H and random subordinate K each step",
            parameters: vec![("scale-min", 0.5), ("scale-max", 1.5)],
        },
        StrategyInfo {
            identifier: "freeze-after-hit",
            description: "K = H until |Y| reaches threshold, then K = 0",
            parameters: vec![("threshold", 1.0)],
        },
    ]
}
