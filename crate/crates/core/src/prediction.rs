//! Most-likely motion of each road user with a growing bivariate-normal
//! position uncertainty.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{AgentState, RoadUser};

/// Symmetric 2x2 covariance `[[xx, xy], [xy, yy]]` in m^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cov2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Cov2 {
    pub const ZERO: Cov2 = Cov2 {
        xx: 0.0,
        xy: 0.0,
        yy: 0.0,
    };

    pub fn isotropic(sigma: f64) -> Self {
        Cov2 {
            xx: sigma * sigma,
            xy: 0.0,
            yy: sigma * sigma,
        }
    }

    /// `R diag(s_lon^2, s_lat^2) R^T` with `R` the rotation by `heading`.
    pub fn from_axes(sigma_lon: f64, sigma_lat: f64, heading: f64) -> Self {
        Cov2::ZERO.with_axes(sigma_lon, sigma_lat).rotated(heading)
    }

    fn with_axes(self, sigma_lon: f64, sigma_lat: f64) -> Self {
        Cov2 {
            xx: sigma_lon * sigma_lon,
            xy: 0.0,
            yy: sigma_lat * sigma_lat,
        }
    }

    /// Returns `R C R^T` for the rotation by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Cov2 {
            xx: c * c * self.xx - 2.0 * c * s * self.xy + s * s * self.yy,
            xy: c * s * (self.xx - self.yy) + (c * c - s * s) * self.xy,
            yy: s * s * self.xx + 2.0 * c * s * self.xy + c * c * self.yy,
        }
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.xx + self.yy);
        let r = (0.25 * (self.xx - self.yy).powi(2) + self.xy * self.xy).sqrt();
        (mean - r, mean + r)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.xx.is_finite()
            && self.xy.is_finite()
            && self.yy.is_finite()
            && self.eigenvalues().0 >= -tol
    }
}

/// Uncertainty growth law: `sigma(tau) = sigma0 + alpha * tau * v` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PredictionParams {
    pub sigma0: f64,
    pub alpha_lon: f64,
    pub alpha_lat: f64,
}

impl Default for PredictionParams {
    fn default() -> Self {
        Self {
            sigma0: 0.1,
            alpha_lon: 0.05,
            alpha_lat: 0.02,
        }
    }
}

impl PredictionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma0.is_finite() && self.sigma0 > 0.0) {
            return Err(Error::config("prediction.sigma0", "must be > 0"));
        }
        for (name, v) in [("alpha_lon", self.alpha_lon), ("alpha_lat", self.alpha_lat)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!("prediction.{name}"), "must be >= 0"));
            }
        }
        Ok(())
    }

    /// (longitudinal, lateral) standard deviation after `tau` seconds at speed `v`.
    pub fn sigmas(&self, tau: f64, v: f64) -> (f64, f64) {
        let growth = tau.max(0.0) * v.abs();
        (
            (self.sigma0 + self.alpha_lon * growth).max(self.sigma0),
            (self.sigma0 + self.alpha_lat * growth).max(self.sigma0),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedStep {
    /// Lookahead from the prediction time (s).
    pub t: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub heading: f64,
    pub v: f64,
    pub cov: Cov2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedTrajectory {
    pub user_id: String,
    pub steps: Vec<PredictedStep>,
}

/// Constant-velocity prediction from a single observed state.
pub fn predict_from_state(
    user_id: &str,
    state: AgentState,
    horizon: f64,
    dt: f64,
    params: &PredictionParams,
) -> PredictedTrajectory {
    let n = (horizon / dt + 1e-9).floor() as usize;
    let (sin_h, cos_h) = state.heading.sin_cos();
    let steps = (1..=n)
        .map(|k| {
            let tau = k as f64 * dt;
            let (s_lon, s_lat) = params.sigmas(tau, state.v);
            PredictedStep {
                t: tau,
                mean_x: state.x + state.v * cos_h * tau,
                mean_y: state.y + state.v * sin_h * tau,
                heading: state.heading,
                v: state.v,
                cov: Cov2::from_axes(s_lon, s_lat, state.heading),
            }
        })
        .collect();
    PredictedTrajectory {
        user_id: user_id.to_string(),
        steps,
    }
}

/// Predicts `user` over `[t0, t0 + horizon]` from its replayed state at `t0`.
///
/// Only the state at `t0` is observed; later script entries are never read.
pub fn predict(
    user: &RoadUser,
    t0: f64,
    horizon: f64,
    dt: f64,
    params: &PredictionParams,
) -> PredictedTrajectory {
    predict_from_state(&user.id, user.state_at(t0), horizon, dt, params)
}
