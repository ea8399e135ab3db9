//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export takes plain numbers or strings and returns a JSON string, so
//! the page needs no generated type glue beyond `wasm-bindgen`'s.

use p2v_core::geo::LocalPoint;
use p2v_core::prediction::{assess, AgentState};
use p2v_core::psm_codec::{decode_hex, encode_psm, from_field_pairs, to_field_lines};
use p2v_core::render::{render_svg, RenderStyle, Scene};
use p2v_core::sim::{default_scenario, run_scenario, warning_sequence, RunSummary};
use p2v_core::trace::TraceRow;
use p2v_core::warning::{min_deceleration, severity, WarningParams};
use p2v_core::{CollisionZone, WarningLevel};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Knobs exposed by the scenario panel; anything absent keeps the default scene's value.
#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct SimulateOptions {
    pub vehicle_speed_mps: Option<f64>,
    pub pedestrian_speed_mps: Option<f64>,
    pub nlos_range_m: Option<f64>,
    pub gps_sigma_m: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct SimulateResult {
    pub svg: String,
    pub summary: String,
    pub sequence: Vec<WarningLevel>,
}

pub fn simulate_json(options: &str) -> Result<String, String> {
    let opts: SimulateOptions = if options.trim().is_empty() {
        SimulateOptions::default()
    } else {
        serde_json::from_str(options).map_err(|e| e.to_string())?
    };
    let mut config = default_scenario();
    if let Some(v) = opts.vehicle_speed_mps {
        config.vehicle.speed_mps = v;
    }
    if let Some(v) = opts.pedestrian_speed_mps {
        config.pedestrian.speed_mps = v;
    }
    if let Some(r) = opts.nlos_range_m {
        config.channel.nlos_range_m = r;
    }
    if let Some(s) = opts.gps_sigma_m {
        config.gps_sigma_m = s;
    }
    if let Some(seed) = opts.seed {
        config.seed = seed;
        config.channel.seed = seed;
    }
    let records = run_scenario(&config).map_err(|e| e.to_string())?;
    let rows: Vec<TraceRow> = records.iter().map(TraceRow::from).collect();
    let svg = render_svg(&rows, &Scene::from(&config), &RenderStyle::default())
        .map_err(|e| e.to_string())?;
    let result = SimulateResult {
        svg,
        summary: RunSummary::from_records(&records).to_string(),
        sequence: warning_sequence(&records),
    };
    Ok(serde_json::to_string(&result).expect("result serializes"))
}

#[derive(Debug, Serialize)]
pub struct AssessResult {
    pub ttz_vehicle_s: Option<f64>,
    pub ttz_pedestrian_s: Option<f64>,
    pub collision_predicted: bool,
    pub a_min_mps2: Option<f64>,
    pub level: WarningLevel,
}

/// Straight-line encounter: the vehicle drives east towards the zone, the
/// pedestrian walks north towards it, each `d` metres from its edge.
pub fn assess_json(d_v: f64, v_v: f64, d_p: f64, v_p: f64, t_s: f64) -> Result<String, String> {
    if [d_v, v_v, d_p, v_p]
        .iter()
        .any(|x| !(x.is_finite() && *x >= 0.0))
        || t_s.is_nan()
        || t_s <= 0.0
    {
        return Err("distances and speeds must be >= 0 and the margin > 0".to_string());
    }
    let zone = CollisionZone {
        center: LocalPoint::new(0.0, 0.0),
        half_length_m: 2.0,
        half_width_m: 4.0,
        axis_heading_deg: 90.0,
    };
    let vehicle = AgentState {
        position: LocalPoint::new(-(2.0 + d_v), 0.0),
        speed_mps: v_v,
        heading_deg: 90.0,
        timestamp_ms: 0,
    };
    let pedestrian = AgentState {
        position: LocalPoint::new(0.0, -(4.0 + d_p)),
        speed_mps: v_p,
        heading_deg: 0.0,
        timestamp_ms: 0,
    };
    let pred = assess(&vehicle, &pedestrian, &zone, t_s);
    let result = AssessResult {
        ttz_vehicle_s: pred.ttz_vehicle_s,
        ttz_pedestrian_s: pred.ttz_pedestrian_s,
        collision_predicted: pred.collision_predicted,
        a_min_mps2: min_deceleration(v_v, d_v).ok(),
        level: severity(&pred, v_v, &WarningParams::default()),
    };
    Ok(serde_json::to_string(&result).expect("result serializes"))
}

/// `field=value` lines (or whitespace separated pairs) to a hex frame.
pub fn encode_text(fields: &str) -> Result<String, String> {
    let msg =
        from_field_pairs(fields.split_whitespace()).map_err(|e| format!("InvalidField: {e}"))?;
    encode_psm(&msg)
        .map(|f| f.to_hex())
        .map_err(|e| e.to_string())
}

pub fn decode_text(hex: &str) -> Result<String, String> {
    decode_hex(hex.trim())
        .map(|m| to_field_lines(&m))
        .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn simulate(options_json: &str) -> Result<String, JsValue> {
    simulate_json(options_json).map_err(JsValue::from)
}

#[wasm_bindgen]
pub fn assess_encounter(
    d_v: f64,
    v_v: f64,
    d_p: f64,
    v_p: f64,
    t_s: f64,
) -> Result<String, JsValue> {
    assess_json(d_v, v_v, d_p, v_p, t_s).map_err(JsValue::from)
}

#[wasm_bindgen]
pub fn psm_encode(fields: &str) -> Result<String, JsValue> {
    encode_text(fields).map_err(JsValue::from)
}

#[wasm_bindgen]
pub fn psm_decode(hex: &str) -> Result<String, JsValue> {
    decode_text(hex).map_err(JsValue::from)
}
