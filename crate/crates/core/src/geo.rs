//! Local tangent-plane projection and collision-zone geometry.
//!
//! Headings are compass headings: degrees clockwise from true north. A unit
//! vector for heading `h` is `(east, north) = (sin h, cos h)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prediction::AgentState;

/// Meters per degree of latitude (and of longitude at the equator).
pub const METERS_PER_DEGREE: f64 = 111_320.0;
/// Separation beyond which the equirectangular projection is refused.
pub const MAX_PROJECTION_RANGE_M: f64 = 10_000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("OutOfRange: {0:.1} m from origin exceeds the 10 km projection limit")]
    OutOfRange(f64),
    #[error("invalid geodetic point ({lat}, {lon})")]
    InvalidPoint { lat: f64, lon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat_deg: f64,
    pub lon_deg: f64,
}

impl GeoPoint {
    pub const fn new(lat_deg: f64, lon_deg: f64) -> Self {
        Self { lat_deg, lon_deg }
    }

    pub fn is_valid(&self) -> bool {
        self.lat_deg.abs() <= 90.0 && self.lon_deg.abs() <= 180.0
    }
}

/// East-North position in meters relative to a scene origin.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LocalPoint {
    pub east_m: f64,
    pub north_m: f64,
}

impl LocalPoint {
    pub const fn new(east_m: f64, north_m: f64) -> Self {
        Self { east_m, north_m }
    }

    pub fn norm(&self) -> f64 {
        self.east_m.hypot(self.north_m)
    }

    pub fn distance_to(&self, other: &LocalPoint) -> f64 {
        (*other - *self).norm()
    }

    pub fn dot(&self, other: &LocalPoint) -> f64 {
        self.east_m * other.east_m + self.north_m * other.north_m
    }

    /// z component of the 2D cross product.
    pub fn cross(&self, other: &LocalPoint) -> f64 {
        self.east_m * other.north_m - self.north_m * other.east_m
    }

    pub fn scale(&self, k: f64) -> LocalPoint {
        LocalPoint::new(self.east_m * k, self.north_m * k)
    }

    /// Point reached by moving `distance_m` along compass `heading_deg`.
    pub fn advance(&self, heading_deg: f64, distance_m: f64) -> LocalPoint {
        *self + heading_unit(heading_deg).scale(distance_m)
    }
}

impl std::ops::Add for LocalPoint {
    type Output = LocalPoint;
    fn add(self, rhs: LocalPoint) -> LocalPoint {
        LocalPoint::new(self.east_m + rhs.east_m, self.north_m + rhs.north_m)
    }
}

impl std::ops::Sub for LocalPoint {
    type Output = LocalPoint;
    fn sub(self, rhs: LocalPoint) -> LocalPoint {
        LocalPoint::new(self.east_m - rhs.east_m, self.north_m - rhs.north_m)
    }
}

/// Unit vector of a compass heading.
pub fn heading_unit(heading_deg: f64) -> LocalPoint {
    // exact on the compass points so axis-aligned zones have exact edges
    let h = normalize_heading(heading_deg);
    match h {
        0.0 => LocalPoint::new(0.0, 1.0),
        90.0 => LocalPoint::new(1.0, 0.0),
        180.0 => LocalPoint::new(0.0, -1.0),
        270.0 => LocalPoint::new(-1.0, 0.0),
        _ => {
            let (s, c) = h.to_radians().sin_cos();
            LocalPoint::new(s, c)
        }
    }
}

/// Normalizes any angle into [0, 360).
pub fn normalize_heading(deg: f64) -> f64 {
    let h = deg.rem_euclid(360.0);
    if h >= 360.0 {
        0.0
    } else {
        h
    }
}

fn check_point(p: &GeoPoint) -> Result<(), GeoError> {
    if p.is_valid() {
        Ok(())
    } else {
        Err(GeoError::InvalidPoint {
            lat: p.lat_deg,
            lon: p.lon_deg,
        })
    }
}

pub fn to_local(origin: &GeoPoint, p: &GeoPoint) -> Result<LocalPoint, GeoError> {
    check_point(origin)?;
    check_point(p)?;
    let q = LocalPoint::new(
        (p.lon_deg - origin.lon_deg) * origin.lat_deg.to_radians().cos() * METERS_PER_DEGREE,
        (p.lat_deg - origin.lat_deg) * METERS_PER_DEGREE,
    );
    let r = q.norm();
    if r > MAX_PROJECTION_RANGE_M {
        return Err(GeoError::OutOfRange(r));
    }
    Ok(q)
}

pub fn from_local(origin: &GeoPoint, q: &LocalPoint) -> Result<GeoPoint, GeoError> {
    check_point(origin)?;
    let r = q.norm();
    if r > MAX_PROJECTION_RANGE_M || !r.is_finite() {
        return Err(GeoError::OutOfRange(r));
    }
    Ok(GeoPoint::new(
        origin.lat_deg + q.north_m / METERS_PER_DEGREE,
        origin.lon_deg + q.east_m / (METERS_PER_DEGREE * origin.lat_deg.to_radians().cos()),
    ))
}

/// Oriented rectangle where the vehicle and pedestrian paths cross.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionZone {
    pub center: LocalPoint,
    /// Half extent along the vehicle's travel axis.
    pub half_length_m: f64,
    /// Half extent across the vehicle's travel axis.
    pub half_width_m: f64,
    pub axis_heading_deg: f64,
}

impl CollisionZone {
    pub fn is_valid(&self) -> bool {
        self.half_length_m > 0.0
            && self.half_width_m > 0.0
            && (0.0..360.0).contains(&self.axis_heading_deg)
            && self.center.east_m.is_finite()
            && self.center.north_m.is_finite()
    }

    fn axes(&self) -> (LocalPoint, LocalPoint) {
        let along = heading_unit(self.axis_heading_deg);
        // right-hand side of the travel axis
        let across = heading_unit(self.axis_heading_deg + 90.0);
        (along, across)
    }

    /// Coordinates of `p` in the zone frame (along, across).
    pub fn to_zone_frame(&self, p: &LocalPoint) -> (f64, f64) {
        let (along, across) = self.axes();
        let d = *p - self.center;
        (d.dot(&along), d.dot(&across))
    }

    /// Closed containment test.
    pub fn contains(&self, p: &LocalPoint) -> bool {
        let (a, b) = self.to_zone_frame(p);
        a.abs() <= self.half_length_m && b.abs() <= self.half_width_m
    }

    /// Corners in counterclockwise order.
    pub fn corners(&self) -> [LocalPoint; 4] {
        let (along, across) = self.axes();
        let l = along.scale(self.half_length_m);
        let w = across.scale(self.half_width_m);
        let c = self.center;
        [c - l - w, c - l + w, c + l + w, c + l - w]
    }
}

/// Distance along the agent's heading ray to the zone boundary.
///
/// Returns `Some(0.0)` when the agent is inside the zone and `None` when the
/// ray misses it. A ray that only grazes a corner or edge counts as a hit.
pub fn distance_to_zone(state: &AgentState, zone: &CollisionZone) -> Option<f64> {
    ray_zone_distance(&state.position, state.heading_deg, zone)
}

pub fn ray_zone_distance(
    origin: &LocalPoint,
    heading_deg: f64,
    zone: &CollisionZone,
) -> Option<f64> {
    if zone.contains(origin) {
        return Some(0.0);
    }
    let (along, across) = zone.axes();
    let (oa, ob) = zone.to_zone_frame(origin);
    let dir = heading_unit(heading_deg);
    let (da, db) = (dir.dot(&along), dir.dot(&across));

    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    for (o, d, half) in [(oa, da, zone.half_length_m), (ob, db, zone.half_width_m)] {
        if d.abs() < 1e-12 {
            if o.abs() > half {
                return None;
            }
            continue;
        }
        let (t1, t2) = ((-half - o) / d, (half - o) / d);
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        t_near = t_near.max(lo);
        t_far = t_far.min(hi);
    }
    if t_far < t_near || t_far < 0.0 {
        return None;
    }
    Some(t_near.max(0.0))
}
