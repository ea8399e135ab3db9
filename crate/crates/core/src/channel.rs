//! Extended-advertisement delivery model: line-of-sight against building
//! footprints and a distance-dependent erasure probability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geo::LocalPoint;
use crate::psm_codec::WireFrame;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelParams {
    /// Distance at which line-of-sight delivery probability reaches zero.
    pub los_range_m: f64,
    /// Same, when the path is obstructed.
    pub nlos_range_m: f64,
    /// Loss probability even at zero distance.
    pub floor_prob: f64,
    pub adv_interval_ms: u64,
    pub seed: u64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            los_range_m: 300.0,
            nlos_range_m: 120.0,
            floor_prob: 0.05,
            adv_interval_ms: 100,
            seed: 0x5eed_0b1e,
        }
    }
}

impl ChannelParams {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        // nlos_range_m = 0 is accepted: it models a fully opaque obstruction
        if !(self.nlos_range_m >= 0.0 && self.nlos_range_m <= self.los_range_m) {
            out.push("channel.nlos_range_m must be in [0, los_range_m]".to_string());
        }
        if !(self.los_range_m > 0.0) {
            out.push("channel.los_range_m must be > 0".to_string());
        }
        if !(0.0..1.0).contains(&self.floor_prob) {
            out.push("channel.floor_prob must be in [0, 1)".to_string());
        }
        if self.adv_interval_ms == 0 {
            out.push("channel.adv_interval_ms must be > 0".to_string());
        }
        out
    }
}

/// Building footprint, a simple counterclockwise polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstruction {
    pub polygon: Vec<LocalPoint>,
}

impl Obstruction {
    /// Axis-aligned rectangle from two opposite corners.
    pub fn rectangle(a: LocalPoint, b: LocalPoint) -> Self {
        let (e0, e1) = (a.east_m.min(b.east_m), a.east_m.max(b.east_m));
        let (n0, n1) = (a.north_m.min(b.north_m), a.north_m.max(b.north_m));
        Self {
            polygon: vec![
                LocalPoint::new(e0, n0),
                LocalPoint::new(e1, n0),
                LocalPoint::new(e1, n1),
                LocalPoint::new(e0, n1),
            ],
        }
    }

    pub fn signed_area(&self) -> f64 {
        self.edges().map(|(a, b)| a.cross(&b)).sum::<f64>() / 2.0
    }

    pub fn edges(&self) -> impl Iterator<Item = (LocalPoint, LocalPoint)> + '_ {
        let n = self.polygon.len();
        (0..n).map(move |i| (self.polygon[i], self.polygon[(i + 1) % n]))
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.polygon.len();
        if n < 3 {
            out.push(format!("polygon has {n} vertices, needs at least 3"));
            return out;
        }
        if self.signed_area() <= 0.0 {
            out.push("polygon must be counterclockwise with nonzero area".to_string());
        }
        let edges: Vec<_> = self.edges().collect();
        'outer: for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if !adjacent && segments_intersect(edges[i].0, edges[i].1, edges[j].0, edges[j].1) {
                    out.push(format!("polygon edges {i} and {j} intersect"));
                    break 'outer;
                }
            }
        }
        out
    }

    /// Strict interior test (boundary points are outside).
    pub fn contains_strictly(&self, p: &LocalPoint) -> bool {
        if self
            .edges()
            .any(|(a, b)| orientation(a, b, *p) == 0.0 && on_segment(a, b, *p))
        {
            return false;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.north_m > p.north_m) != (b.north_m > p.north_m) {
                let e = a.east_m
                    + (p.north_m - a.north_m) * (b.east_m - a.east_m) / (b.north_m - a.north_m);
                if p.east_m < e {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

fn orientation(a: LocalPoint, b: LocalPoint, c: LocalPoint) -> f64 {
    (b - a).cross(&(c - a))
}

fn on_segment(a: LocalPoint, b: LocalPoint, p: LocalPoint) -> bool {
    p.east_m >= a.east_m.min(b.east_m)
        && p.east_m <= a.east_m.max(b.east_m)
        && p.north_m >= a.north_m.min(b.north_m)
        && p.north_m <= a.north_m.max(b.north_m)
}

/// Closed segment intersection, touching and collinear overlap included.
pub fn segments_intersect(p1: LocalPoint, p2: LocalPoint, q1: LocalPoint, q2: LocalPoint) -> bool {
    let d1 = orientation(q1, q2, p1);
    let d2 = orientation(q1, q2, p2);
    let d3 = orientation(p1, p2, q1);
    let d4 = orientation(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// Line of sight between two points. Any contact with a footprint's
/// boundary, or either end lying inside one, blocks it.
pub fn is_los(tx: &LocalPoint, rx: &LocalPoint, obstructions: &[Obstruction]) -> bool {
    !obstructions.iter().any(|o| {
        o.contains_strictly(tx)
            || o.contains_strictly(rx)
            || o.edges().any(|(a, b)| segments_intersect(*tx, *rx, a, b))
    })
}

/// Delivery probability: `(1 - floor) * max(0, 1 - d/R)^2`.
pub fn receive_probability(distance_m: f64, los: bool, params: &ChannelParams) -> f64 {
    let range = if los {
        params.los_range_m
    } else {
        params.nlos_range_m
    };
    if range <= 0.0 {
        return 0.0;
    }
    let reach = (1.0 - distance_m.max(0.0) / range).max(0.0);
    (1.0 - params.floor_prob) * reach * reach
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delivery {
    Delivered(WireFrame),
    Dropped,
}

impl Delivery {
    pub fn is_delivered(&self) -> bool {
        matches!(self, Delivery::Delivered(_))
    }
}

/// RNG for one advertisement slot: the link seed selects the key, the tick
/// index selects the stream.
pub fn link_rng(seed: u64, tick: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tick);
    rng
}

/// Bernoulli erasure with probability `1 - p`.
pub fn deliver<R: Rng + ?Sized>(frame: &WireFrame, p: f64, rng: &mut R) -> Delivery {
    let draw: f64 = rng.random();
    if draw < p {
        Delivery::Delivered(*frame)
    } else {
        Delivery::Dropped
    }
}

pub fn transmit<R: Rng + ?Sized>(
    frame: &WireFrame,
    tx: &LocalPoint,
    rx: &LocalPoint,
    obstructions: &[Obstruction],
    params: &ChannelParams,
    rng: &mut R,
) -> Delivery {
    let los = is_los(tx, rx, obstructions);
    let p = receive_probability(tx.distance_to(rx), los, params);
    deliver(frame, p, rng)
}
