//! Trace CSV: one row per tick with fixed columns and fixed float formatting,
//! so a rerun with the same config produces identical bytes.

use std::io::{Read, Write};

use thiserror::Error;

use crate::geo::LocalPoint;
use crate::sim::TraceRecord;
use crate::warning::WarningLevel;

pub const COLUMNS: [&str; 12] = [
    "t_ms",
    "veh_e",
    "veh_n",
    "veh_v",
    "ped_e",
    "ped_n",
    "ped_v",
    "delivered",
    "los",
    "ttz_v",
    "ttz_p",
    "warning",
];

/// Token written for a TTZ of "never".
pub const NEVER: &str = "never";

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("unexpected header: {0}")]
    Header(String),
    #[error("row {row}: bad {column}: {value:?}")]
    Field {
        row: usize,
        column: &'static str,
        value: String,
    },
}

/// A trace row as stored on disk: true positions and speeds plus the
/// vehicle-side outcome of the tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t_ms: u64,
    pub vehicle: LocalPoint,
    pub vehicle_speed: f64,
    pub pedestrian: LocalPoint,
    pub pedestrian_speed: f64,
    pub delivered: bool,
    pub los: bool,
    pub ttz_v: Option<f64>,
    pub ttz_p: Option<f64>,
    pub warning: WarningLevel,
}

impl From<&TraceRecord> for TraceRow {
    fn from(r: &TraceRecord) -> Self {
        Self {
            t_ms: r.t_ms,
            vehicle: r.vehicle_true.position,
            vehicle_speed: r.vehicle_true.speed_mps,
            pedestrian: r.pedestrian_true.position,
            pedestrian_speed: r.pedestrian_true.speed_mps,
            delivered: r.psm_delivered,
            los: r.los,
            ttz_v: r.ttz_v,
            ttz_p: r.ttz_p,
            warning: r.warning,
        }
    }
}

fn fixed(x: f64) -> String {
    let s = format!("{x:.3}");
    // avoid "-0.000"
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

fn ttz_token(t: Option<f64>) -> String {
    t.map_or_else(|| NEVER.to_string(), fixed)
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

impl TraceRow {
    fn fields(&self) -> [String; 12] {
        [
            self.t_ms.to_string(),
            fixed(self.vehicle.east_m),
            fixed(self.vehicle.north_m),
            fixed(self.vehicle_speed),
            fixed(self.pedestrian.east_m),
            fixed(self.pedestrian.north_m),
            fixed(self.pedestrian_speed),
            flag(self.delivered).to_string(),
            flag(self.los).to_string(),
            ttz_token(self.ttz_v),
            ttz_token(self.ttz_p),
            self.warning.token().to_string(),
        ]
    }
}

pub fn write_trace<W: Write>(out: W, rows: &[TraceRow]) -> Result<(), TraceError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_records<W: Write>(out: W, records: &[TraceRecord]) -> Result<(), TraceError> {
    let rows: Vec<TraceRow> = records.iter().map(TraceRow::from).collect();
    write_trace(out, &rows)
}

pub fn trace_to_string(records: &[TraceRecord]) -> String {
    let mut buf = Vec::new();
    write_records(&mut buf, records).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("trace is ASCII")
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRow>, TraceError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(TraceError::Header(
            header.iter().collect::<Vec<_>>().join(","),
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let get = |col: usize| rec.get(col).unwrap_or("");
        let bad = |col: usize| TraceError::Field {
            row,
            column: COLUMNS[col],
            value: get(col).to_string(),
        };
        let num = |col: usize| get(col).parse::<f64>().map_err(|_| bad(col));
        let boolean = |col: usize| match get(col) {
            "1" => Ok(true),
            "0" => Ok(false),
            _ => Err(bad(col)),
        };
        let ttz = |col: usize| match get(col) {
            NEVER => Ok(None),
            s => s.parse::<f64>().map(Some).map_err(|_| bad(col)),
        };
        rows.push(TraceRow {
            t_ms: get(0).parse().map_err(|_| bad(0))?,
            vehicle: LocalPoint::new(num(1)?, num(2)?),
            vehicle_speed: num(3)?,
            pedestrian: LocalPoint::new(num(4)?, num(5)?),
            pedestrian_speed: num(6)?,
            delivered: boolean(7)?,
            los: boolean(8)?,
            ttz_v: ttz(9)?,
            ttz_p: ttz(10)?,
            warning: get(11).parse().map_err(|_| bad(11))?,
        });
    }
    Ok(rows)
}
