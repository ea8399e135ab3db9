//! Time-to-zone (TTZ) computation and the co-arrival collision test.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{distance_to_zone, ray_zone_distance, CollisionZone, LocalPoint};

/// Speeds below this are treated as stationary: the TTZ is `None` (never).
pub const STATIONARY_SPEED_MPS: f64 = 0.05;
/// Default time safety margin in seconds.
pub const DEFAULT_TIME_MARGIN_S: f64 = 4.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictionError {
    #[error("NegativeInput: distance {distance_m} m, speed {speed_mps} m/s")]
    NegativeInput { distance_m: f64, speed_mps: f64 },
}

/// Timestamped kinematic state of one agent in the local frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub position: LocalPoint,
    pub speed_mps: f64,
    /// Degrees clockwise from north, in [0, 360).
    pub heading_deg: f64,
    pub timestamp_ms: u64,
}

impl AgentState {
    pub fn is_valid(&self) -> bool {
        self.speed_mps >= 0.0
            && self.speed_mps.is_finite()
            && (0.0..360.0).contains(&self.heading_deg)
            && self.position.east_m.is_finite()
            && self.position.north_m.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PredictionResult {
    /// `None` means the vehicle never reaches the zone.
    pub ttz_vehicle_s: Option<f64>,
    pub ttz_pedestrian_s: Option<f64>,
    /// `None` when the vehicle's heading ray misses the zone.
    pub d_vehicle_m: Option<f64>,
    pub collision_predicted: bool,
}

/// Time for an agent to cover `distance_m` at `speed_mps`.
pub fn ttz(distance_m: f64, speed_mps: f64) -> Result<Option<f64>, PredictionError> {
    if distance_m < 0.0 || speed_mps < 0.0 || distance_m.is_nan() || speed_mps.is_nan() {
        return Err(PredictionError::NegativeInput {
            distance_m,
            speed_mps,
        });
    }
    if speed_mps < STATIONARY_SPEED_MPS {
        return Ok(None);
    }
    Ok(Some(distance_m / speed_mps))
}

/// True when the vehicle reaches the zone strictly within `t_s` of the pedestrian.
pub fn collision_window(ttz_v: f64, ttz_p: f64, t_s: f64) -> bool {
    ttz_p - t_s < ttz_v && ttz_v < ttz_p + t_s
}

/// Pedestrian motion as known to the vehicle; speed and heading may be
/// missing when the PSM carried the unavailable sentinels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportedMotion {
    pub position: LocalPoint,
    pub speed_mps: Option<f64>,
    pub heading_deg: Option<f64>,
}

impl From<&AgentState> for ReportedMotion {
    fn from(s: &AgentState) -> Self {
        Self {
            position: s.position,
            speed_mps: Some(s.speed_mps),
            heading_deg: Some(s.heading_deg),
        }
    }
}

pub fn assess(
    vehicle: &AgentState,
    pedestrian: &AgentState,
    zone: &CollisionZone,
    t_s: f64,
) -> PredictionResult {
    assess_reported(vehicle, &ReportedMotion::from(pedestrian), zone, t_s)
}

/// [`assess`] for a pedestrian whose speed or heading may be unknown.
/// Unknown heading behaves like a missed zone, unknown speed like a stationary agent.
pub fn assess_reported(
    vehicle: &AgentState,
    pedestrian: &ReportedMotion,
    zone: &CollisionZone,
    t_s: f64,
) -> PredictionResult {
    let d_v = distance_to_zone(vehicle, zone);
    let ttz_v = d_v.and_then(|d| ttz(d, vehicle.speed_mps.max(0.0)).ok().flatten());

    let d_p = pedestrian
        .heading_deg
        .and_then(|h| ray_zone_distance(&pedestrian.position, h, zone));
    let ttz_p = match (d_p, pedestrian.speed_mps) {
        (Some(d), Some(v)) => ttz(d, v.max(0.0)).ok().flatten(),
        _ => None,
    };

    let collision_predicted = match (ttz_v, ttz_p) {
        (Some(v), Some(p)) => collision_window(v, p, t_s),
        _ => false,
    };
    PredictionResult {
        ttz_vehicle_s: ttz_v,
        ttz_pedestrian_s: ttz_p,
        d_vehicle_m: d_v,
        collision_predicted,
    }
}
