//! Helpers shared by the integration tests and the acceptance runner.
//! The oracles here do not call into the geometry or prediction code they check.

#![allow(dead_code)]

use p2v_core::channel::is_los;
use p2v_core::geo::{CollisionZone, LocalPoint};
use p2v_core::prediction::{assess, AgentState};
use p2v_core::psm_codec::{Attachment, BasicType, DeviceUseState, PsmMessage};
use p2v_core::sim::{warning_sequence, ScenarioConfig, TraceRecord};
use p2v_core::WarningLevel;
use rand::Rng;

pub fn random_message<R: Rng>(rng: &mut R) -> PsmMessage {
    PsmMessage {
        msg_count: rng.random_range(0..128),
        second_mark: rng.random_range(0..60_000),
        latitude: rng.random_range(-900_000_000..=900_000_000),
        longitude: rng.random_range(-1_800_000_000..=1_800_000_000),
        speed: rng.random_range(0..=8191),
        heading: rng.random_range(0..=28799),
        basic_type: BasicType::ALL[rng.random_range(0..BasicType::ALL.len())],
        device_use_state: DeviceUseState::ALL[rng.random_range(0..DeviceUseState::ALL.len())],
        cross_request: rng.random(),
        cluster_size: rng.random_range(0..16),
        attachment: Attachment::ALL[rng.random_range(0..Attachment::ALL.len())],
    }
}

/// Axis-aligned test zone: 4 m along east, 8 m along north, centered at the origin.
pub const ZONE_HALF_E: f64 = 2.0;
pub const ZONE_HALF_N: f64 = 4.0;

pub fn test_zone() -> CollisionZone {
    CollisionZone {
        center: LocalPoint::new(0.0, 0.0),
        half_length_m: ZONE_HALF_E,
        half_width_m: ZONE_HALF_N,
        axis_heading_deg: 90.0,
    }
}

fn inside_test_zone(e: f64, n: f64) -> bool {
    e.abs() <= ZONE_HALF_E && n.abs() <= ZONE_HALF_N
}

/// First millisecond at which a point moving from `start` with velocity
/// `(ve, vn)` lies inside the test zone, by stepping time in 1 ms increments.
pub fn brute_force_arrival_ms(start: (f64, f64), vel: (f64, f64), horizon_ms: u64) -> Option<u64> {
    (0..=horizon_ms).find(|&k| {
        let t = k as f64 / 1000.0;
        inside_test_zone(start.0 + vel.0 * t, start.1 + vel.1 * t)
    })
}

pub fn vehicle_at(d_v: f64, v_v: f64) -> AgentState {
    AgentState {
        position: LocalPoint::new(-(ZONE_HALF_E + d_v), 0.3),
        speed_mps: v_v,
        heading_deg: 90.0,
        timestamp_ms: 0,
    }
}

pub fn pedestrian_at(d_p: f64, v_p: f64) -> AgentState {
    AgentState {
        position: LocalPoint::new(0.5, -(ZONE_HALF_N + d_p)),
        speed_mps: v_p,
        heading_deg: 0.0,
        timestamp_ms: 0,
    }
}

#[derive(Debug, Default)]
pub struct OracleReport {
    pub cases: usize,
    pub compared: usize,
    pub disagreements: Vec<String>,
}

/// Compares `assess` against the 1 ms co-arrival oracle over the straight-line grid.
pub fn collision_oracle_grid(t_s: f64) -> OracleReport {
    let d_vs: Vec<f64> = (1..=20).map(|i| 10.0 * i as f64).collect();
    let v_vs: Vec<f64> = (2..=25).map(f64::from).collect();
    let d_ps: Vec<f64> = (1..=8).map(|i| 5.0 * i as f64).collect();
    let v_ps: Vec<f64> = (1..=6).map(|i| 0.5 * i as f64).collect();

    let arrivals = |d: f64, v: f64, vehicle: bool| -> u64 {
        let s = if vehicle {
            vehicle_at(d, v)
        } else {
            pedestrian_at(d, v)
        };
        let vel = if vehicle { (v, 0.0) } else { (0.0, v) };
        let horizon = ((d + 1.0) / v * 1000.0).ceil() as u64 + 10;
        brute_force_arrival_ms((s.position.east_m, s.position.north_m), vel, horizon)
            .expect("straight-line agent reaches the zone")
    };
    let vehicle_times: Vec<(f64, f64, u64)> = d_vs
        .iter()
        .flat_map(|&d| v_vs.iter().map(move |&v| (d, v)))
        .map(|(d, v)| (d, v, arrivals(d, v, true)))
        .collect();
    let pedestrian_times: Vec<(f64, f64, u64)> = d_ps
        .iter()
        .flat_map(|&d| v_ps.iter().map(move |&v| (d, v)))
        .map(|(d, v)| (d, v, arrivals(d, v, false)))
        .collect();

    let mut report = OracleReport::default();
    let zone = test_zone();
    for &(d_v, v_v, tv) in &vehicle_times {
        for &(d_p, v_p, tp) in &pedestrian_times {
            report.cases += 1;
            let gap_s = (tv as f64 - tp as f64).abs() / 1000.0;
            if (gap_s - t_s).abs() <= 0.010 {
                continue;
            }
            report.compared += 1;
            let oracle = gap_s < t_s;
            let got = assess(&vehicle_at(d_v, v_v), &pedestrian_at(d_p, v_p), &zone, t_s)
                .collision_predicted;
            if got != oracle {
                report.disagreements.push(format!(
                    "d_v={d_v} v_v={v_v} d_p={d_p} v_p={v_p}: oracle {oracle}, assess {got}"
                ));
            }
        }
    }
    report
}

/// Checks the end-to-end story of the default scene against a trace.
pub fn check_default_story(
    config: &ScenarioConfig,
    records: &[TraceRecord],
) -> Result<String, String> {
    let seq = warning_sequence(records);
    let want = [
        WarningLevel::None,
        WarningLevel::Yellow,
        WarningLevel::Orange,
        WarningLevel::None,
    ];
    if seq != want {
        return Err(format!("warning sequence {seq:?}"));
    }
    let first_yellow = records
        .iter()
        .position(|r| r.warning == WarningLevel::Yellow)
        .expect("sequence contains yellow");
    let r = &records[first_yellow];
    if is_los(
        &r.vehicle_true.position,
        &r.pedestrian_true.position,
        &config.obstructions,
    ) {
        return Err(format!(
            "line of sight at first yellow (tick {first_yellow})"
        ));
    }
    let zone = &config.zone;
    let stop = records
        .iter()
        .position(|r| r.vehicle_true.speed_mps == 0.0)
        .ok_or("vehicle never stops")?;
    let entry = records
        .iter()
        .position(|r| zone.contains(&r.pedestrian_true.position))
        .ok_or("pedestrian never enters the zone")?;
    if stop >= entry {
        return Err(format!(
            "vehicle stops at tick {stop}, pedestrian enters at {entry}"
        ));
    }
    if records
        .iter()
        .any(|r| zone.contains(&r.vehicle_true.position))
    {
        return Err("vehicle enters the zone".to_string());
    }
    let crossed = records[entry..]
        .iter()
        .position(|r| !zone.contains(&r.pedestrian_true.position))
        .ok_or("pedestrian never leaves the zone")?;
    Ok(format!(
        "yellow at tick {first_yellow} (NLOS), vehicle stopped at tick {stop}, pedestrian in zone from tick {entry}, out at tick {}",
        entry + crossed
    ))
}
