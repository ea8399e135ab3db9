//! Pedestrian-to-vehicle collision warning over short-range broadcast.
//!
//! A pedestrian's phone broadcasts compact Personal Safety Messages (PSMs);
//! a phone in the vehicle decodes them, projects both agents into a local
//! plane, predicts whether they reach a shared collision zone at about the
//! same time, and raises a graded warning. A deterministic simulator ties
//! the pieces together around an occluded T-intersection.
//!
//! | module | contents |
//! |---|---|
//! | [`psm_codec`] | fixed 20-octet PSM wire format |
//! | [`geo`] | local projection, collision zone geometry |
//! | [`prediction`] | time-to-zone and the co-arrival test |
//! | [`warning`] | severity ladder and warning lifecycle |
//! | [`channel`] | line of sight and packet delivery model |
//! | [`sim`] | scenario engine |
//! | [`trace`] | CSV trace I/O |
//! | [`render`] | SVG and GeoJSON output |

// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod geo;
pub mod prediction;
pub mod psm_codec;
pub mod render;
pub mod sim;
pub mod trace;
pub mod warning;

pub use geo::{CollisionZone, GeoPoint, LocalPoint};
pub use prediction::{AgentState, PredictionResult};
pub use psm_codec::{decode_psm, encode_psm, PsmMessage};
pub use sim::{default_scenario, run_scenario, ScenarioConfig, TraceRecord};
pub use warning::WarningLevel;
