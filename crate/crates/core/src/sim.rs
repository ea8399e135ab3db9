//! Deterministic discrete-time scenario engine.
//!
//! Each tick advances the true vehicle and pedestrian states, takes noisy GPS
//! fixes, broadcasts a PSM from the pedestrian every advertising interval,
//! runs the vehicle-side prediction and warning logic on whatever it has
//! received, and lets the driver model react to the warning.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{is_los, link_rng, transmit, ChannelParams, Delivery, Obstruction};
use crate::geo::{distance_to_zone, from_local, to_local, CollisionZone, GeoPoint, LocalPoint};
use crate::prediction::{assess_reported, ttz, AgentState, ReportedMotion};
use crate::psm_codec::{
    decode_psm, encode_psm, quantize_angle, quantize_heading, quantize_speed, Attachment,
    BasicType, DeviceUseState, PsmMessage,
};
use crate::warning::{Assessment, WarningLevel, WarningParams, WarningStateMachine};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("ConfigInvalid: {}", .0.join("; "))]
    ConfigInvalid(Vec<String>),
    #[error("runtime error at t={t_ms} ms: {message}")]
    Runtime { t_ms: u64, message: String },
}

/// Initial conditions of one agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub start: LocalPoint,
    pub heading_deg: f64,
    pub speed_mps: f64,
}

impl AgentSpec {
    fn initial_state(&self) -> AgentState {
        AgentState {
            position: self.start,
            speed_mps: self.speed_mps,
            heading_deg: self.heading_deg,
            timestamp_ms: 0,
        }
    }
}

/// How the driver responds to the displayed warning.
///
/// The driver sees the warning `reaction_ms` late. Yellow is informational
/// (`decel_yellow`, normally 0). Once Orange or Red has been seen the driver
/// brakes to a standstill at that level's deceleration and stays stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DriverModel {
    pub reaction_ms: u64,
    pub decel_yellow: f64,
    pub decel_orange: f64,
    pub decel_red: f64,
}

impl Default for DriverModel {
    fn default() -> Self {
        Self {
            reaction_ms: 500,
            decel_yellow: 0.0,
            decel_orange: 2.5,
            decel_red: 6.0,
        }
    }
}

impl DriverModel {
    pub fn decel_for(&self, level: WarningLevel) -> f64 {
        match level {
            WarningLevel::None => 0.0,
            WarningLevel::Yellow => self.decel_yellow,
            WarningLevel::Orange => self.decel_orange,
            WarningLevel::Red => self.decel_red,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let ok = 0.0 <= self.decel_yellow
            && self.decel_yellow <= self.decel_orange
            && self.decel_orange <= self.decel_red
            && self.decel_red.is_finite();
        if ok {
            Vec::new()
        } else {
            vec!["driver: need 0 <= decel_yellow <= decel_orange <= decel_red".to_string()]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub origin: GeoPoint,
    pub zone: CollisionZone,
    #[serde(default)]
    pub obstructions: Vec<Obstruction>,
    pub vehicle: AgentSpec,
    pub pedestrian: AgentSpec,
    #[serde(default)]
    pub channel: ChannelParams,
    #[serde(default)]
    pub warning: WarningParams,
    #[serde(default)]
    pub driver: DriverModel,
    #[serde(default = "default_time_margin")]
    pub t_s_s: f64,
    #[serde(default = "default_gps_sigma")]
    pub gps_sigma_m: f64,
    #[serde(default = "default_tick_ms")]
    pub tick_ms: u64,
    pub duration_ms: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_time_margin() -> f64 {
    crate::prediction::DEFAULT_TIME_MARGIN_S
}

fn default_gps_sigma() -> f64 {
    1.5
}

fn default_tick_ms() -> u64 {
    50
}

impl ScenarioConfig {
    /// All invariant violations, each prefixed with the offending field.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.origin.is_valid() {
            out.push("origin: latitude/longitude out of range".to_string());
        }
        if !self.zone.is_valid() {
            out.push(
                "zone: need half_length_m > 0, half_width_m > 0, 0 <= axis_heading_deg < 360"
                    .to_string(),
            );
        }
        for (i, o) in self.obstructions.iter().enumerate() {
            out.extend(
                o.violations()
                    .into_iter()
                    .map(|v| format!("obstructions[{i}]: {v}")),
            );
        }
        for (name, a) in [("vehicle", &self.vehicle), ("pedestrian", &self.pedestrian)] {
            if !a.initial_state().is_valid() {
                out.push(format!(
                    "{name}: need finite start, speed_mps >= 0, 0 <= heading_deg < 360"
                ));
            } else if quantize_speed(a.speed_mps).is_err() {
                out.push(format!("{name}: speed_mps exceeds the PSM speed range"));
            }
        }
        out.extend(self.channel.violations());
        out.extend(
            self.warning
                .violations()
                .into_iter()
                .map(|v| format!("warning.{v}")),
        );
        out.extend(self.driver.violations());
        if !(self.t_s_s > 0.0) {
            out.push("t_s_s must be > 0".to_string());
        }
        if !(self.gps_sigma_m >= 0.0 && self.gps_sigma_m.is_finite()) {
            out.push("gps_sigma_m must be >= 0".to_string());
        }
        if self.tick_ms == 0 {
            out.push("tick_ms must be > 0".to_string());
        }
        if self.duration_ms < self.tick_ms {
            out.push("duration_ms must be >= tick_ms".to_string());
        }
        out
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(SimError::ConfigInvalid(v))
        }
    }
}

/// One simulation tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t_ms: u64,
    pub vehicle_true: AgentState,
    pub pedestrian_true: AgentState,
    pub vehicle_meas: Option<AgentState>,
    /// Pedestrian as the vehicle believes it, from the last delivered PSM.
    pub pedestrian_meas_at_vehicle: Option<AgentState>,
    pub psm_sent: bool,
    pub psm_delivered: bool,
    pub los: bool,
    pub ttz_v: Option<f64>,
    pub ttz_p: Option<f64>,
    pub warning: WarningLevel,
}

/// Constant-acceleration step along a fixed heading. A decelerating agent
/// stops at the instant its speed reaches zero and never reverses.
pub fn step_agent(state: &AgentState, accel_mps2: f64, dt_ms: u64) -> AgentState {
    let dt = dt_ms as f64 / 1000.0;
    let v0 = state.speed_mps;
    let v1 = v0 + accel_mps2 * dt;
    let (speed, travelled) = if v1 >= 0.0 {
        (v1, 0.5 * (v0 + v1) * dt)
    } else {
        let t_stop = v0 / -accel_mps2;
        (0.0, 0.5 * v0 * t_stop)
    };
    AgentState {
        position: state.position.advance(state.heading_deg, travelled),
        speed_mps: speed,
        heading_deg: state.heading_deg,
        timestamp_ms: state.timestamp_ms + dt_ms,
    }
}

/// Position-only GPS error: independent zero-mean Gaussian noise per axis.
pub fn gps_fix<R: Rng + ?Sized>(true_state: &AgentState, sigma_m: f64, rng: &mut R) -> AgentState {
    if sigma_m <= 0.0 {
        return *true_state;
    }
    let normal = Normal::new(0.0, sigma_m).expect("sigma is finite and positive");
    let de = normal.sample(rng);
    let dn = normal.sample(rng);
    AgentState {
        position: true_state.position + LocalPoint::new(de, dn),
        ..*true_state
    }
}

fn pedestrian_psm(
    fix: &AgentState,
    origin: &GeoPoint,
    seq: u64,
    t_ms: u64,
) -> Result<PsmMessage, String> {
    let geo = from_local(origin, &fix.position).map_err(|e| e.to_string())?;
    Ok(PsmMessage {
        msg_count: (seq % 128) as u8,
        second_mark: (t_ms % 60_000) as u16,
        latitude: quantize_angle(geo.lat_deg, "latitude").map_err(|e| e.to_string())?,
        longitude: quantize_angle(geo.lon_deg, "longitude").map_err(|e| e.to_string())?,
        speed: quantize_speed(fix.speed_mps).map_err(|e| e.to_string())?,
        heading: quantize_heading(fix.heading_deg).map_err(|e| e.to_string())?,
        basic_type: BasicType::Pedestrian,
        device_use_state: DeviceUseState::Unavailable,
        cross_request: true,
        cluster_size: 0,
        attachment: Attachment::Unavailable,
    })
}

/// Pedestrian track held by the vehicle: the last decoded report.
#[derive(Debug, Clone, Copy)]
struct Track {
    report: ReportedMotion,
    received_ms: u64,
}

impl Track {
    /// Dead-reckoned report at `t_ms`.
    fn at(&self, t_ms: u64) -> ReportedMotion {
        let age_s = t_ms.saturating_sub(self.received_ms) as f64 / 1000.0;
        let position = match (self.report.speed_mps, self.report.heading_deg) {
            (Some(v), Some(h)) => self.report.position.advance(h, v * age_s),
            _ => self.report.position,
        };
        ReportedMotion {
            position,
            ..self.report
        }
    }
}

/// Warning levels as the driver perceives them, `reaction_ms` late.
#[derive(Debug)]
struct Driver {
    model: DriverModel,
    shown: VecDeque<(u64, WarningLevel)>,
    committed_decel: f64,
}

impl Driver {
    fn new(model: DriverModel) -> Self {
        Self {
            model,
            shown: VecDeque::new(),
            committed_decel: 0.0,
        }
    }

    /// Records the level displayed at `t_ms` and returns the commanded acceleration.
    fn respond(&mut self, t_ms: u64, shown: WarningLevel) -> f64 {
        self.shown.push_back((t_ms, shown));
        let perceived_at = t_ms.checked_sub(self.model.reaction_ms);
        let mut perceived = WarningLevel::None;
        if let Some(at) = perceived_at {
            while self.shown.len() > 1 && self.shown[1].0 <= at {
                self.shown.pop_front();
            }
            if self.shown[0].0 <= at {
                perceived = self.shown[0].1;
            }
        }
        let decel = self.model.decel_for(perceived);
        if perceived >= WarningLevel::Orange {
            self.committed_decel = self.committed_decel.max(decel);
        }
        -decel.max(self.committed_decel)
    }
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<Vec<TraceRecord>, SimError> {
    config.validate()?;

    let mut gps_vehicle = ChaCha8Rng::seed_from_u64(config.seed);
    gps_vehicle.set_stream(1);
    let mut gps_pedestrian = ChaCha8Rng::seed_from_u64(config.seed);
    gps_pedestrian.set_stream(2);

    let mut vehicle = config.vehicle.initial_state();
    let mut pedestrian = config.pedestrian.initial_state();
    let mut machine = WarningStateMachine::new(config.warning);
    let mut driver = Driver::new(config.driver);
    let mut track: Option<Track> = None;
    let mut accel = 0.0;
    let mut next_adv_ms = 0;
    let mut seq = 0u64;

    let ticks = config.duration_ms / config.tick_ms;
    let mut records = Vec::with_capacity(ticks as usize + 1);
    for k in 0..=ticks {
        let t_ms = k * config.tick_ms;
        if k > 0 {
            vehicle = step_agent(&vehicle, accel, config.tick_ms);
            pedestrian = step_agent(&pedestrian, 0.0, config.tick_ms);
        }
        let los = is_los(
            &pedestrian.position,
            &vehicle.position,
            &config.obstructions,
        );
        let vehicle_meas = gps_fix(&vehicle, config.gps_sigma_m, &mut gps_vehicle);

        let mut psm_sent = false;
        let mut psm_delivered = false;
        if t_ms >= next_adv_ms {
            next_adv_ms += config.channel.adv_interval_ms;
            psm_sent = true;
            let fix = gps_fix(&pedestrian, config.gps_sigma_m, &mut gps_pedestrian);
            let psm = pedestrian_psm(&fix, &config.origin, seq, t_ms)
                .map_err(|message| SimError::Runtime { t_ms, message })?;
            seq += 1;
            let frame = encode_psm(&psm).map_err(|e| SimError::Runtime {
                t_ms,
                message: e.to_string(),
            })?;
            let mut rng = link_rng(config.channel.seed, k);
            let delivery = transmit(
                &frame,
                &pedestrian.position,
                &vehicle.position,
                &config.obstructions,
                &config.channel,
                &mut rng,
            );
            if let Delivery::Delivered(received) = delivery {
                psm_delivered = true;
                // a frame that fails to decode or project is discarded
                if let Ok(msg) = decode_psm(received.as_bytes()) {
                    let geo = GeoPoint::new(msg.latitude_deg(), msg.longitude_deg());
                    if let Ok(position) = to_local(&config.origin, &geo) {
                        track = Some(Track {
                            report: ReportedMotion {
                                position,
                                speed_mps: msg.speed_mps(),
                                heading_deg: msg.heading_deg(),
                            },
                            received_ms: t_ms,
                        });
                    }
                }
            }
        }

        let usable = track.filter(|tr| t_ms - tr.received_ms <= config.warning.staleness_ms);
        let (assessment, pedestrian_meas, ttz_p) = match usable {
            Some(tr) => {
                let report = tr.at(t_ms);
                let pred = assess_reported(&vehicle_meas, &report, &config.zone, config.t_s_s);
                let meas = AgentState {
                    position: report.position,
                    speed_mps: report.speed_mps.unwrap_or(0.0),
                    heading_deg: report.heading_deg.unwrap_or(0.0),
                    timestamp_ms: tr.received_ms,
                };
                (Assessment::Current(pred), Some(meas), pred.ttz_pedestrian_s)
            }
            None => (Assessment::Stale, None, None),
        };
        let ttz_v = distance_to_zone(&vehicle_meas, &config.zone)
            .and_then(|d| ttz(d, vehicle_meas.speed_mps).ok().flatten());

        let warning = machine
            .warning_step(&assessment, vehicle_meas.speed_mps, t_ms)
            .map_err(|e| SimError::Runtime {
                t_ms,
                message: e.to_string(),
            })?;
        accel = driver.respond(t_ms, warning);

        records.push(TraceRecord {
            t_ms,
            vehicle_true: vehicle,
            pedestrian_true: pedestrian,
            vehicle_meas: Some(vehicle_meas),
            pedestrian_meas_at_vehicle: pedestrian_meas,
            psm_sent,
            psm_delivered,
            los,
            ttz_v,
            ttz_p,
            warning,
        });
    }
    Ok(records)
}

/// The NLOS T-intersection scene: the vehicle drives east towards the
/// intersection along the north face of a garage, while the pedestrian walks
/// north behind the garage's east end and crosses in front of the vehicle.
pub fn default_scenario() -> ScenarioConfig {
    ScenarioConfig {
        origin: GeoPoint::new(40.0, -83.0),
        zone: CollisionZone {
            // crosswalk padded by a vehicle length, across a 12 m road
            center: LocalPoint::new(0.0, 0.0),
            half_length_m: 4.0,
            half_width_m: 6.0,
            axis_heading_deg: 90.0,
        },
        obstructions: vec![
            // garage
            Obstruction::rectangle(LocalPoint::new(-85.0, -40.0), LocalPoint::new(-7.0, -6.0)),
            // building across the T
            Obstruction::rectangle(LocalPoint::new(12.0, -30.0), LocalPoint::new(40.0, 30.0)),
        ],
        vehicle: AgentSpec {
            start: LocalPoint::new(-92.0, 0.0),
            heading_deg: 90.0,
            speed_mps: 5.0,
        },
        pedestrian: AgentSpec {
            start: LocalPoint::new(0.0, -29.0),
            heading_deg: 0.0,
            speed_mps: 1.4,
        },
        channel: ChannelParams::default(),
        warning: WarningParams::default(),
        driver: DriverModel::default(),
        t_s_s: crate::prediction::DEFAULT_TIME_MARGIN_S,
        gps_sigma_m: 1.5,
        tick_ms: 50,
        duration_ms: 30_000,
        seed: 7,
    }
}

/// Consecutive duplicates removed.
pub fn warning_sequence(records: &[TraceRecord]) -> Vec<WarningLevel> {
    let mut seq: Vec<WarningLevel> = Vec::new();
    for r in records {
        if seq.last() != Some(&r.warning) {
            seq.push(r.warning);
        }
    }
    seq
}

/// Index of the first tick showing `level`.
pub fn first_tick(records: &[TraceRecord], level: WarningLevel) -> Option<usize> {
    records.iter().position(|r| r.warning == level)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub ticks: usize,
    pub first_tick: [Option<usize>; 4],
    pub final_vehicle_speed: f64,
    pub final_pedestrian_speed: f64,
    pub delivery_ratio: f64,
}

impl RunSummary {
    pub fn from_records(records: &[TraceRecord]) -> Self {
        let sent = records.iter().filter(|r| r.psm_sent).count();
        let delivered = records.iter().filter(|r| r.psm_delivered).count();
        let last = records.last();
        Self {
            ticks: records.len(),
            first_tick: WarningLevel::ALL.map(|l| first_tick(records, l)),
            final_vehicle_speed: last.map_or(0.0, |r| r.vehicle_true.speed_mps),
            final_pedestrian_speed: last.map_or(0.0, |r| r.pedestrian_true.speed_mps),
            delivery_ratio: if sent == 0 {
                0.0
            } else {
                delivered as f64 / sent as f64
            },
        }
    }
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tick = |i: usize| match self.first_tick[i] {
            Some(t) => t.to_string(),
            None => "-".to_string(),
        };
        write!(
            f,
            "ticks={} yellow_first_tick={} orange_first_tick={} red_first_tick={} \
             final_vehicle_speed={:.3} final_pedestrian_speed={:.3} delivery_ratio={:.3}",
            self.ticks,
            tick(1),
            tick(2),
            tick(3),
            self.final_vehicle_speed,
            self.final_pedestrian_speed,
            self.delivery_ratio,
        )
    }
}
