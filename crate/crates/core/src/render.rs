//! Trace visualization: an SVG map of both trajectories, with each vehicle
//! position colored by the warning shown at that tick, and a GeoJSON sidecar
//! of the same data in geodetic coordinates.

use std::fmt::Write as _;

use geojson::{Feature, FeatureCollection, Geometry, JsonObject, Value};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::Obstruction;
use crate::geo::{from_local, CollisionZone, GeoError, GeoPoint, LocalPoint};
use crate::sim::ScenarioConfig;
use crate::trace::TraceRow;
use crate::warning::WarningLevel;

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("trace is empty")]
    EmptyTrace,
    #[error(transparent)]
    Geo(#[from] GeoError),
}

/// Fill colors as `#rrggbb` strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderStyle {
    pub vehicle_none: String,
    pub pedestrian: String,
    pub yellow: String,
    pub orange: String,
    pub red: String,
    pub obstruction: String,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            vehicle_none: "#1f3a93".into(),
            pedestrian: "#8ecae6".into(),
            yellow: "#f4d03f".into(),
            orange: "#f39c12".into(),
            red: "#e74c3c".into(),
            obstruction: "#9e9e9e".into(),
        }
    }
}

impl RenderStyle {
    pub fn vehicle_color(&self, level: WarningLevel) -> &str {
        match level {
            WarningLevel::None => &self.vehicle_none,
            WarningLevel::Yellow => &self.yellow,
            WarningLevel::Orange => &self.orange,
            WarningLevel::Red => &self.red,
        }
    }

    /// The four warning colors are pairwise distinct and differ from the pedestrian's.
    pub fn is_valid(&self) -> bool {
        let c = [
            &self.vehicle_none,
            &self.yellow,
            &self.orange,
            &self.red,
            &self.pedestrian,
        ];
        (0..c.len()).all(|i| (i + 1..c.len()).all(|j| c[i] != c[j]))
    }
}

/// Static scene drawn under the trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub origin: GeoPoint,
    pub zone: Option<CollisionZone>,
    pub obstructions: Vec<Obstruction>,
}

impl From<&ScenarioConfig> for Scene {
    fn from(c: &ScenarioConfig) -> Self {
        Self {
            origin: c.origin,
            zone: Some(c.zone),
            obstructions: c.obstructions.clone(),
        }
    }
}

const PX_PER_M: f64 = 4.0;
const MARGIN_M: f64 = 6.0;
const AGENT_RADIUS_M: f64 = 0.7;

struct Frame {
    min_e: f64,
    max_n: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = LocalPoint>) -> Self {
        let (mut min_e, mut max_e) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut min_n, mut max_n) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            min_e = min_e.min(p.east_m);
            max_e = max_e.max(p.east_m);
            min_n = min_n.min(p.north_m);
            max_n = max_n.max(p.north_m);
        }
        Self {
            min_e: min_e - MARGIN_M,
            max_n: max_n + MARGIN_M,
            width: (max_e - min_e + 2.0 * MARGIN_M) * PX_PER_M,
            height: (max_n - min_n + 2.0 * MARGIN_M) * PX_PER_M,
        }
    }

    fn px(&self, p: &LocalPoint) -> (f64, f64) {
        (
            (p.east_m - self.min_e) * PX_PER_M,
            (self.max_n - p.north_m) * PX_PER_M,
        )
    }

    fn points_attr(&self, pts: &[LocalPoint]) -> String {
        pts.iter()
            .map(|p| {
                let (x, y) = self.px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Renders the trace as a standalone SVG document. Output depends only on the inputs.
pub fn render_svg(
    rows: &[TraceRow],
    scene: &Scene,
    style: &RenderStyle,
) -> Result<String, RenderError> {
    if rows.is_empty() {
        return Err(RenderError::EmptyTrace);
    }
    let zone_corners = scene.zone.map(|z| z.corners());
    let frame = Frame::fit(
        rows.iter()
            .flat_map(|r| [r.vehicle, r.pedestrian])
            .chain(
                scene
                    .obstructions
                    .iter()
                    .flat_map(|o| o.polygon.iter().copied()),
            )
            .chain(zone_corners.iter().flatten().copied()),
    );

    let mut svg = String::new();
    // writing to a String cannot fail
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#,
        w = frame.width,
        h = frame.height
    );
    let _ = writeln!(
        svg,
        r##"<rect x="0" y="0" width="{:.2}" height="{:.2}" fill="#ffffff"/>"##,
        frame.width, frame.height
    );
    for o in &scene.obstructions {
        let _ = writeln!(
            svg,
            r#"<polygon class="obstruction" points="{}" fill="{}"/>"#,
            frame.points_attr(&o.polygon),
            style.obstruction
        );
    }
    if let Some(corners) = zone_corners {
        let _ = writeln!(
            svg,
            r##"<polygon class="zone" points="{}" fill="none" stroke="#555555" stroke-dasharray="4 3"/>"##,
            frame.points_attr(&corners)
        );
    }
    let r = AGENT_RADIUS_M * PX_PER_M;
    for row in rows {
        let (x, y) = frame.px(&row.pedestrian);
        let _ = writeln!(
            svg,
            r#"<circle class="pedestrian" cx="{x:.2}" cy="{y:.2}" r="{r:.2}" fill="{}"/>"#,
            style.pedestrian
        );
    }
    for row in rows {
        let (x, y) = frame.px(&row.vehicle);
        let _ = writeln!(
            svg,
            r#"<circle class="vehicle" data-t="{}" cx="{x:.2}" cy="{y:.2}" r="{r:.2}" fill="{}"/>"#,
            row.t_ms,
            style.vehicle_color(row.warning)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn position(origin: &GeoPoint, p: &LocalPoint) -> Result<Vec<f64>, GeoError> {
    let g = from_local(origin, p)?;
    Ok(vec![g.lon_deg, g.lat_deg])
}

fn feature(geometry: Value, properties: JsonObject) -> Feature {
    Feature {
        bbox: None,
        geometry: Some(Geometry::new(geometry)),
        id: None,
        properties: Some(properties),
        foreign_members: None,
    }
}

/// One point feature per agent per tick, plus one polygon per obstruction.
pub fn render_geojson(
    rows: &[TraceRow],
    scene: &Scene,
    style: &RenderStyle,
) -> Result<FeatureCollection, RenderError> {
    if rows.is_empty() {
        return Err(RenderError::EmptyTrace);
    }
    let mut features = Vec::with_capacity(2 * rows.len() + scene.obstructions.len());
    for o in &scene.obstructions {
        let mut ring = o
            .polygon
            .iter()
            .map(|p| position(&scene.origin, p))
            .collect::<Result<Vec<_>, _>>()?;
        ring.push(ring[0].clone());
        let mut props = JsonObject::new();
        props.insert("kind".into(), "obstruction".into());
        props.insert("fill".into(), style.obstruction.clone().into());
        features.push(feature(Value::Polygon(vec![ring]), props));
    }
    for row in rows {
        for (agent, p, color) in [
            ("vehicle", &row.vehicle, style.vehicle_color(row.warning)),
            ("pedestrian", &row.pedestrian, style.pedestrian.as_str()),
        ] {
            let mut props = JsonObject::new();
            props.insert("kind".into(), agent.into());
            props.insert("t_ms".into(), row.t_ms.into());
            props.insert("warning".into(), row.warning.token().into());
            props.insert("fill".into(), color.into());
            features.push(feature(Value::Point(position(&scene.origin, p)?), props));
        }
    }
    Ok(FeatureCollection {
        bbox: None,
        features,
        foreign_members: None,
    })
}
