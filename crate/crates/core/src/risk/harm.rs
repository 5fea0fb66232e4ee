//! Momentum-exchange velocity change and logistic injury severity.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Pose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImpactArea {
    Front,
    Side,
    Rear,
}

impl ImpactArea {
    /// Bins a contact bearing in the body frame; left and right are both side.
    pub fn from_bearing(bearing: f64) -> Self {
        let b = wrap_angle(bearing).abs();
        if b <= FRAC_PI_4 {
            ImpactArea::Front
        } else if b <= 3.0 * FRAC_PI_4 {
            ImpactArea::Side
        } else {
            ImpactArea::Rear
        }
    }
}

/// Offsets `c_area` per impact area. Left and right share the side value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaOffsets {
    pub front: f64,
    pub side: f64,
    pub rear: f64,
}

impl AreaOffsets {
    pub fn get(&self, area: ImpactArea) -> f64 {
        match area {
            ImpactArea::Front => self.front,
            ImpactArea::Side => self.side,
            ImpactArea::Rear => self.rear,
        }
    }
}

/// Logistic coefficients for one protection class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmCoefficients {
    pub c0: f64,
    pub c1: f64,
    pub c_area: AreaOffsets,
}

/// The `(c0, c1, c_area)` triple of a single (class, area) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticCoefficients {
    pub c0: f64,
    pub c1: f64,
    pub c_area: f64,
}

impl HarmCoefficients {
    pub fn for_area(&self, area: ImpactArea) -> LogisticCoefficients {
        LogisticCoefficients {
            c0: self.c0,
            c1: self.c1,
            c_area: self.c_area.get(area),
        }
    }
}

/// Harm coefficient table keyed by protection class.
///
/// The defaults are placeholders with the right qualitative shape, not a
/// fit to crash data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarmModel {
    pub protected: HarmCoefficients,
    pub unprotected: HarmCoefficients,
}

impl Default for HarmModel {
    fn default() -> Self {
        Self {
            protected: HarmCoefficients {
                c0: 5.0,
                c1: 0.2,
                c_area: AreaOffsets {
                    front: 0.0,
                    side: 0.7,
                    rear: -0.2,
                },
            },
            unprotected: HarmCoefficients {
                c0: 3.5,
                c1: 0.25,
                c_area: AreaOffsets {
                    front: 0.0,
                    side: 0.0,
                    rear: 0.0,
                },
            },
        }
    }
}

impl HarmModel {
    pub fn coefficients(&self, protected: bool) -> &HarmCoefficients {
        if protected {
            &self.protected
        } else {
            &self.unprotected
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, c) in [
            ("protected", &self.protected),
            ("unprotected", &self.unprotected),
        ] {
            let values = [c.c0, c.c1, c.c_area.front, c.c_area.side, c.c_area.rear];
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::config(
                    format!("harm.{name}"),
                    "non-finite coefficient",
                ));
            }
            if !(c.c1 > 0.0) {
                return Err(Error::config(format!("harm.{name}.c1"), "must be > 0"));
            }
        }
        Ok(())
    }

    /// Harm to a party of the given protection class hit in `area`.
    pub fn harm(&self, delta_v: f64, protected: bool, area: ImpactArea) -> f64 {
        harm(delta_v, &self.coefficients(protected).for_area(area))
    }
}

/// Velocity change of both parties in a perfectly inelastic collision.
///
/// `alpha` is the angle between the two velocity vectors.
pub fn delta_v(mass_a: f64, mass_b: f64, v_a: f64, v_b: f64, alpha: f64) -> (f64, f64) {
    let closing = (v_a * v_a + v_b * v_b - 2.0 * v_a * v_b * alpha.cos())
        .max(0.0)
        .sqrt();
    let total = mass_a + mass_b;
    (mass_b / total * closing, mass_a / total * closing)
}

/// Logistic severity `1 / (1 + exp(c0 - c1 dv - c_area))`.
pub fn harm(delta_v: f64, c: &LogisticCoefficients) -> f64 {
    1.0 / (1.0 + (c.c0 - c.c1 * delta_v - c.c_area).exp())
}

/// Impact area of each party `(own, other)`.
///
/// The contact bearing is taken from the relative position; when the two
/// centres coincide the approach direction of the relative velocity
/// `v_other - v_own` is used instead.
pub fn impact_areas(
    own: Pose,
    other: Pose,
    relative_velocity: (f64, f64),
) -> (ImpactArea, ImpactArea) {
    let (dx, dy) = (other.x - own.x, other.y - own.y);
    let direction = if dx.hypot(dy) > 1e-9 {
        dy.atan2(dx)
    } else if relative_velocity.0.hypot(relative_velocity.1) > 1e-9 {
        (-relative_velocity.1).atan2(-relative_velocity.0)
    } else {
        own.heading
    };
    let own_area = ImpactArea::from_bearing(direction - own.heading);
    let other_area = ImpactArea::from_bearing(direction + PI - other.heading);
    (own_area, other_area)
}
