//! Fixed-layout binary profile of the Personal Safety Message (PSM).
//!
//! The profile carries the pedestrian's position and motion plus the VRU
//! metadata fields in a single 20-octet frame, small enough for one legacy
//! advertisement and far below the 255-octet extended advertising budget.
//!
//! Layout (multi-octet fields are big-endian):
//!
//! | octets | field                                                      |
//! |--------|------------------------------------------------------------|
//! | 0      | message tag, `0x20`                                        |
//! | 1      | profile version, `0x01`                                    |
//! | 2      | `msg_count`                                                |
//! | 3..=4  | `second_mark`                                              |
//! | 5..=8  | `latitude` (two's complement, 1e-7 degree)                 |
//! | 9..=12 | `longitude` (two's complement, 1e-7 degree)                |
//! | 13..=14| `speed` (0.02 m/s)                                         |
//! | 15..=16| `heading` (0.0125 degree)                                  |
//! | 17     | bits 7-5 `basic_type`, 4-2 `device_use_state`, 1 `cross_request`, 0 reserved |
//! | 18     | bits 7-4 `cluster_size`, 3-0 `attachment`                  |
//! | 19     | XOR of octets 0..=18                                       |

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MESSAGE_TAG: u8 = 0x20;
pub const PROFILE_VERSION: u8 = 0x01;
pub const FRAME_LEN: usize = 20;

/// Largest payload a legacy (non-extended) advertisement can carry.
pub const LEGACY_ADV_BUDGET: usize = 31;
/// Payload budget of a single extended advertisement.
pub const EXTENDED_ADV_BUDGET: usize = 255;

pub const MAX_LATITUDE: i32 = 900_000_000;
pub const MAX_LONGITUDE: i32 = 1_800_000_000;
pub const SPEED_UNAVAILABLE: u16 = 8191;
pub const HEADING_UNAVAILABLE: u16 = 28799;
/// Speed resolution in m/s per unit.
pub const SPEED_UNIT_MPS: f64 = 0.02;
/// Heading resolution in degrees per unit.
pub const HEADING_UNIT_DEG: f64 = 0.0125;
/// Position resolution in degrees per unit.
pub const LATLON_UNIT_DEG: f64 = 1e-7;

/// Errors returned by [`encode_psm`] and [`decode_psm`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("InvalidField({0})")]
    InvalidField(&'static str),
    #[error("BadLength: expected {FRAME_LEN} octets, got {0}")]
    BadLength(usize),
    #[error("BadTag: expected 0x20, got {0:#04x}")]
    BadTag(u8),
    #[error("BadVersion: expected 0x01, got {0:#04x}")]
    BadVersion(u8),
    #[error("BadChecksum: expected {expected:#04x}, got {actual:#04x}")]
    BadChecksum { expected: u8, actual: u8 },
    #[error("FieldOutOfRange({0})")]
    FieldOutOfRange(&'static str),
    #[error("BadHex: {0}")]
    BadHex(String),
}

impl CodecError {
    /// Bare variant name, as printed by the command-line tools.
    pub fn name(&self) -> &'static str {
        match self {
            Self::InvalidField(_) => "InvalidField",
            Self::BadLength(_) => "BadLength",
            Self::BadTag(_) => "BadTag",
            Self::BadVersion(_) => "BadVersion",
            Self::BadChecksum { .. } => "BadChecksum",
            Self::FieldOutOfRange(_) => "FieldOutOfRange",
            Self::BadHex(_) => "BadHex",
        }
    }
}

macro_rules! wire_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident = $raw:expr),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
        pub enum $name {
            #[default]
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub const fn as_raw(self) -> u8 {
                match self {
                    $($name::$variant => $raw),+
                }
            }

            pub fn from_raw(raw: u8) -> Option<Self> {
                match raw {
                    $($raw => Some($name::$variant),)+
                    _ => None,
                }
            }

            pub const fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => stringify!($variant)),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl std::str::FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::ALL
                    .iter()
                    .copied()
                    .find(|v| v.as_str().eq_ignore_ascii_case(s))
                    .ok_or_else(|| format!("unknown {} {s:?}", stringify!($name)))
            }
        }
    };
}

wire_enum!(
    /// Kind of vulnerable road user sending the message.
    BasicType {
        Unavailable = 0,
        Pedestrian = 1,
        Pedalcyclist = 2,
        PublicSafetyWorker = 3,
        Animal = 4,
    }
);

wire_enum!(
    /// What the user is doing with the device.
    DeviceUseState {
        Unavailable = 0,
        Idle = 1,
        ListeningToAudio = 2,
        Typing = 3,
        Calling = 4,
        Playing = 5,
        Reading = 6,
    }
);

wire_enum!(
    /// Object travelling with the user.
    Attachment {
        Unavailable = 0,
        Stroller = 1,
        BicycleTrailer = 2,
        Cart = 3,
        Wheelchair = 4,
        OtherWalkAssist = 5,
        Pet = 6,
    }
);

/// Over-the-air pedestrian safety record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PsmMessage {
    /// Rolling sequence counter, 0..=127.
    pub msg_count: u8,
    /// Milliseconds within the current UTC minute, 0..=59999.
    pub second_mark: u16,
    /// Units of 1e-7 degree.
    pub latitude: i32,
    /// Units of 1e-7 degree.
    pub longitude: i32,
    /// Units of 0.02 m/s; [`SPEED_UNAVAILABLE`] when unknown.
    pub speed: u16,
    /// Units of 0.0125 degree clockwise from true north; [`HEADING_UNAVAILABLE`] when unknown.
    pub heading: u16,
    pub basic_type: BasicType,
    pub device_use_state: DeviceUseState,
    pub cross_request: bool,
    /// 0 when the user is not part of a cluster, else 1..=15.
    pub cluster_size: u8,
    pub attachment: Attachment,
}

/// One invariant broken by a [`PsmMessage`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub bound: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} must satisfy {}", self.field, self.bound)
    }
}

/// Checks every field invariant and reports the failures in field declaration order.
pub fn validate(msg: &PsmMessage) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut check = |ok: bool, field: &'static str, bound: &str| {
        if !ok {
            out.push(Violation {
                field,
                bound: bound.to_string(),
            });
        }
    };
    check(msg.msg_count < 128, "msg_count", "< 128");
    check(msg.second_mark < 60_000, "second_mark", "< 60000");
    check(
        (-MAX_LATITUDE..=MAX_LATITUDE).contains(&msg.latitude),
        "latitude",
        "in [-900000000, 900000000]",
    );
    check(
        (-MAX_LONGITUDE..=MAX_LONGITUDE).contains(&msg.longitude),
        "longitude",
        "in [-1800000000, 1800000000]",
    );
    check(msg.speed <= SPEED_UNAVAILABLE, "speed", "<= 8191");
    check(msg.heading <= HEADING_UNAVAILABLE, "heading", "<= 28799");
    check(msg.cluster_size < 16, "cluster_size", "< 16");
    out
}

/// A validated 20-octet PSM frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WireFrame([u8; FRAME_LEN]);

impl WireFrame {
    pub fn as_bytes(&self) -> &[u8; FRAME_LEN] {
        &self.0
    }

    pub fn len(&self) -> usize {
        FRAME_LEN
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lowercase hex, no separators.
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl AsRef<[u8]> for WireFrame {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

fn checksum(octets: &[u8]) -> u8 {
    octets.iter().fold(0, |acc, b| acc ^ b)
}

pub fn encode_psm(msg: &PsmMessage) -> Result<WireFrame, CodecError> {
    if let Some(v) = validate(msg).first() {
        return Err(CodecError::InvalidField(v.field));
    }
    let mut b = [0u8; FRAME_LEN];
    b[0] = MESSAGE_TAG;
    b[1] = PROFILE_VERSION;
    b[2] = msg.msg_count;
    b[3..5].copy_from_slice(&msg.second_mark.to_be_bytes());
    b[5..9].copy_from_slice(&msg.latitude.to_be_bytes());
    b[9..13].copy_from_slice(&msg.longitude.to_be_bytes());
    b[13..15].copy_from_slice(&msg.speed.to_be_bytes());
    b[15..17].copy_from_slice(&msg.heading.to_be_bytes());
    b[17] = (msg.basic_type.as_raw() << 5)
        | (msg.device_use_state.as_raw() << 2)
        | (u8::from(msg.cross_request) << 1);
    b[18] = (msg.cluster_size << 4) | msg.attachment.as_raw();
    b[19] = checksum(&b[..19]);
    Ok(WireFrame(b))
}

/// Parses a frame. Checks run in order: length, tag, version, checksum, fields.
pub fn decode_psm(frame: &[u8]) -> Result<PsmMessage, CodecError> {
    if frame.len() != FRAME_LEN {
        return Err(CodecError::BadLength(frame.len()));
    }
    if frame[0] != MESSAGE_TAG {
        return Err(CodecError::BadTag(frame[0]));
    }
    if frame[1] != PROFILE_VERSION {
        return Err(CodecError::BadVersion(frame[1]));
    }
    let expected = checksum(&frame[..19]);
    if frame[19] != expected {
        return Err(CodecError::BadChecksum {
            expected,
            actual: frame[19],
        });
    }

    let be16 = |i: usize| u16::from_be_bytes([frame[i], frame[i + 1]]);
    let be32 = |i: usize| i32::from_be_bytes([frame[i], frame[i + 1], frame[i + 2], frame[i + 3]]);
    let flags_a = frame[17];
    let flags_b = frame[18];

    let msg_count = frame[2];
    if msg_count >= 128 {
        return Err(CodecError::FieldOutOfRange("msg_count"));
    }
    let second_mark = be16(3);
    if second_mark >= 60_000 {
        return Err(CodecError::FieldOutOfRange("second_mark"));
    }
    let latitude = be32(5);
    if !(-MAX_LATITUDE..=MAX_LATITUDE).contains(&latitude) {
        return Err(CodecError::FieldOutOfRange("latitude"));
    }
    let longitude = be32(9);
    if !(-MAX_LONGITUDE..=MAX_LONGITUDE).contains(&longitude) {
        return Err(CodecError::FieldOutOfRange("longitude"));
    }
    let speed = be16(13);
    if speed > SPEED_UNAVAILABLE {
        return Err(CodecError::FieldOutOfRange("speed"));
    }
    let heading = be16(15);
    if heading > HEADING_UNAVAILABLE {
        return Err(CodecError::FieldOutOfRange("heading"));
    }
    let basic_type =
        BasicType::from_raw(flags_a >> 5).ok_or(CodecError::FieldOutOfRange("basic_type"))?;
    let device_use_state = DeviceUseState::from_raw((flags_a >> 2) & 0b111)
        .ok_or(CodecError::FieldOutOfRange("device_use_state"))?;
    if flags_a & 1 != 0 {
        return Err(CodecError::FieldOutOfRange("reserved"));
    }
    let attachment =
        Attachment::from_raw(flags_b & 0x0f).ok_or(CodecError::FieldOutOfRange("attachment"))?;

    Ok(PsmMessage {
        msg_count,
        second_mark,
        latitude,
        longitude,
        speed,
        heading,
        basic_type,
        device_use_state,
        cross_request: flags_a & 0b10 != 0,
        cluster_size: flags_b >> 4,
        attachment,
    })
}

/// Decodes the lowercase (or uppercase) hex form of a frame.
pub fn decode_hex(text: &str) -> Result<PsmMessage, CodecError> {
    let text = text.trim();
    if !text.len().is_multiple_of(2) {
        return Err(CodecError::BadLength(text.len() / 2));
    }
    let bytes = hex::decode(text).map_err(|e| CodecError::BadHex(e.to_string()))?;
    decode_psm(&bytes)
}

impl PsmMessage {
    /// Speed in m/s, or `None` for the unavailable sentinel.
    pub fn speed_mps(&self) -> Option<f64> {
        (self.speed != SPEED_UNAVAILABLE).then(|| f64::from(self.speed) * SPEED_UNIT_MPS)
    }

    /// Heading in degrees clockwise from north, or `None` for the unavailable sentinel.
    pub fn heading_deg(&self) -> Option<f64> {
        (self.heading != HEADING_UNAVAILABLE).then(|| f64::from(self.heading) * HEADING_UNIT_DEG)
    }

    pub fn latitude_deg(&self) -> f64 {
        f64::from(self.latitude) * LATLON_UNIT_DEG
    }

    pub fn longitude_deg(&self) -> f64 {
        f64::from(self.longitude) * LATLON_UNIT_DEG
    }
}

/// Quantizes a speed in m/s. Speeds above 163.8 m/s are rejected.
pub fn quantize_speed(mps: f64) -> Result<u16, CodecError> {
    let units = (mps / SPEED_UNIT_MPS).round();
    if !(0.0..=8190.0).contains(&units) {
        return Err(CodecError::InvalidField("speed"));
    }
    Ok(units as u16)
}

/// Quantizes a heading in degrees, wrapping into [0, 360).
pub fn quantize_heading(deg: f64) -> Result<u16, CodecError> {
    if !deg.is_finite() {
        return Err(CodecError::InvalidField("heading"));
    }
    let units = (deg.rem_euclid(360.0) / HEADING_UNIT_DEG).round() as u32 % 28_800;
    Ok(units as u16)
}

/// Quantizes a latitude or longitude in degrees to 1e-7 degree units.
pub fn quantize_angle(deg: f64, field: &'static str) -> Result<i32, CodecError> {
    let units = (deg / LATLON_UNIT_DEG).round();
    if !units.is_finite() || units.abs() > f64::from(i32::MAX) {
        return Err(CodecError::InvalidField(field));
    }
    Ok(units as i32)
}

/// Renders a message as `field=value` lines, one per field in declaration order.
pub fn to_field_lines(msg: &PsmMessage) -> String {
    format!(
        "msg_count={}\nsecond_mark={}\nlatitude={}\nlongitude={}\nspeed={}\nheading={}\n\
         basic_type={}\ndevice_use_state={}\ncross_request={}\ncluster_size={}\nattachment={}\n",
        msg.msg_count,
        msg.second_mark,
        msg.latitude,
        msg.longitude,
        msg.speed,
        msg.heading,
        msg.basic_type,
        msg.device_use_state,
        msg.cross_request,
        msg.cluster_size,
        msg.attachment,
    )
}

/// Builds a message from `field=value` pairs; unspecified fields are zero/Unavailable.
pub fn from_field_pairs<'a, I>(pairs: I) -> Result<PsmMessage, String>
where
    I: IntoIterator<Item = &'a str>,
{
    fn num<T: std::str::FromStr>(field: &str, v: &str) -> Result<T, String> {
        v.parse()
            .map_err(|_| format!("cannot parse {field} value {v:?}"))
    }

    let mut msg = PsmMessage::default();
    for pair in pairs {
        let pair = pair.trim();
        if pair.is_empty() {
            continue;
        }
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| format!("expected field=value, got {pair:?}"))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "msg_count" => msg.msg_count = num(key, value)?,
            "second_mark" => msg.second_mark = num(key, value)?,
            "latitude" => msg.latitude = num(key, value)?,
            "longitude" => msg.longitude = num(key, value)?,
            "speed" => msg.speed = num(key, value)?,
            "heading" => msg.heading = num(key, value)?,
            "basic_type" => msg.basic_type = value.parse()?,
            "device_use_state" => msg.device_use_state = value.parse()?,
            "cross_request" => msg.cross_request = num(key, value)?,
            "cluster_size" => msg.cluster_size = num(key, value)?,
            "attachment" => msg.attachment = value.parse()?,
            other => return Err(format!("unknown field {other:?}")),
        }
    }
    Ok(msg)
}
