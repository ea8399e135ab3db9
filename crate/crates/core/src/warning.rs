//! Driver warning severity and its lifecycle.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prediction::PredictionResult;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WarningError {
    #[error("ZeroDistance: cannot compute a stopping deceleration over {0} m")]
    ZeroDistance(f64),
    #[error("ClockRegression: {now_ms} ms is earlier than the previous step at {previous_ms} ms")]
    ClockRegression { previous_ms: u64, now_ms: u64 },
}

/// Warning severity, ordered `None < Yellow < Orange < Red`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum WarningLevel {
    #[default]
    None,
    Yellow,
    Orange,
    Red,
}

impl WarningLevel {
    pub const ALL: [WarningLevel; 4] = [Self::None, Self::Yellow, Self::Orange, Self::Red];

    pub const fn token(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Yellow => "yellow",
            Self::Orange => "orange",
            Self::Red => "red",
        }
    }
}

impl fmt::Display for WarningLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl std::str::FromStr for WarningLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|l| l.token() == s)
            .ok_or_else(|| format!("unknown warning level {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WarningParams {
    pub yellow_ttz_s: f64,
    pub orange_ttz_s: f64,
    /// Full-brake deceleration; a larger required deceleration means Red.
    pub a_brake_mps2: f64,
    pub hold_ms: u64,
    pub staleness_ms: u64,
    /// Driver reaction time. The distance covered during it is taken off
    /// the stopping distance before computing the required deceleration.
    pub reaction_time_s: f64,
}

impl Default for WarningParams {
    fn default() -> Self {
        Self {
            yellow_ttz_s: 10.0,
            orange_ttz_s: 6.0,
            a_brake_mps2: 6.0,
            hold_ms: 1000,
            staleness_ms: 2000,
            reaction_time_s: 0.0,
        }
    }
}

impl WarningParams {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.orange_ttz_s > 0.0) {
            out.push("orange_ttz_s must be > 0".to_string());
        }
        if !(self.yellow_ttz_s > self.orange_ttz_s) {
            out.push("yellow_ttz_s must be > orange_ttz_s".to_string());
        }
        if !(self.a_brake_mps2 > 0.0) {
            out.push("a_brake_mps2 must be > 0".to_string());
        }
        if !(self.reaction_time_s >= 0.0) {
            out.push("reaction_time_s must be >= 0".to_string());
        }
        out
    }
}

/// Constant deceleration that stops a vehicle at `v_mps` within `d_m`.
pub fn min_deceleration(v_mps: f64, d_m: f64) -> Result<f64, WarningError> {
    if !(d_m > 0.0) {
        return Err(WarningError::ZeroDistance(d_m));
    }
    Ok(v_mps * v_mps / (2.0 * d_m))
}

/// Per-instant severity rule.
pub fn severity(pred: &PredictionResult, v_mps: f64, params: &WarningParams) -> WarningLevel {
    let (Some(ttz_v), true) = (pred.ttz_vehicle_s, pred.collision_predicted) else {
        return WarningLevel::None;
    };
    if let Some(d) = pred.d_vehicle_m {
        let usable = d - v_mps * params.reaction_time_s;
        match min_deceleration(v_mps, usable) {
            Ok(a_min) if a_min > params.a_brake_mps2 => return WarningLevel::Red,
            Err(_) if v_mps > 0.0 => return WarningLevel::Red,
            _ => {}
        }
    }
    if ttz_v <= params.orange_ttz_s {
        WarningLevel::Orange
    } else if ttz_v <= params.yellow_ttz_s {
        WarningLevel::Yellow
    } else {
        WarningLevel::None
    }
}

/// Input to one [`WarningStateMachine`] step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Assessment {
    /// A prediction built from pedestrian data that is still usable.
    Current(PredictionResult),
    /// No usable pedestrian data this step.
    Stale,
}

/// Warning lifecycle: escalation is immediate, de-escalation waits until
/// `hold_ms` has passed since the current level was last raised or
/// re-asserted, and the level decays to `None` once no current assessment
/// has arrived for `staleness_ms`.
#[derive(Debug, Clone)]
pub struct WarningStateMachine {
    params: WarningParams,
    level: WarningLevel,
    asserted_ms: u64,
    last_current: Option<(u64, WarningLevel)>,
    last_step_ms: Option<u64>,
}

impl WarningStateMachine {
    pub fn new(params: WarningParams) -> Self {
        Self {
            params,
            level: WarningLevel::None,
            asserted_ms: 0,
            last_current: None,
            last_step_ms: None,
        }
    }

    pub fn level(&self) -> WarningLevel {
        self.level
    }

    pub fn params(&self) -> &WarningParams {
        &self.params
    }

    pub fn warning_step(
        &mut self,
        assessment: &Assessment,
        v_mps: f64,
        now_ms: u64,
    ) -> Result<WarningLevel, WarningError> {
        if let Some(previous_ms) = self.last_step_ms {
            if now_ms < previous_ms {
                return Err(WarningError::ClockRegression {
                    previous_ms,
                    now_ms,
                });
            }
        }
        self.last_step_ms = Some(now_ms);

        let raw = match assessment {
            Assessment::Current(pred) => {
                let raw = severity(pred, v_mps, &self.params);
                self.last_current = Some((now_ms, raw));
                raw
            }
            Assessment::Stale => match self.last_current {
                // data still usable: keep the output as it is
                Some((at, _)) if now_ms - at <= self.params.staleness_ms => return Ok(self.level),
                _ => WarningLevel::None,
            },
        };

        if raw >= self.level || now_ms - self.asserted_ms >= self.params.hold_ms {
            self.level = raw;
            self.asserted_ms = now_ms;
        }
        Ok(self.level)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn predicted(ttz_v: f64, d_v: f64) -> PredictionResult {
        PredictionResult {
            ttz_vehicle_s: Some(ttz_v),
            ttz_pedestrian_s: Some(ttz_v),
            d_vehicle_m: Some(d_v),
            collision_predicted: true,
        }
    }

    #[test]
    fn min_deceleration_examples() {
        assert!((min_deceleration(20.0, 50.0).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(min_deceleration(0.0, 50.0).unwrap(), 0.0);
        assert!((min_deceleration(10.0, 5.0).unwrap() - 10.0).abs() < 1e-12);
        assert!(matches!(
            min_deceleration(10.0, 0.0),
            Err(WarningError::ZeroDistance(_))
        ));
    }

    #[test]
    fn severity_examples() {
        let p = WarningParams::default();
        assert_eq!(
            severity(&predicted(15.0, 150.0), 10.0, &p),
            WarningLevel::None
        );
        assert_eq!(
            severity(&predicted(8.0, 80.0), 10.0, &p),
            WarningLevel::Yellow
        );
        assert_eq!(
            severity(&predicted(5.0, 50.0), 10.0, &p),
            WarningLevel::Orange
        );
        // a_min = 400 / 60 = 6.67 > 6
        assert_eq!(severity(&predicted(1.5, 30.0), 20.0, &p), WarningLevel::Red);
        assert_eq!(severity(&predicted(0.0, 0.0), 3.0, &p), WarningLevel::Red);
    }

    #[test]
    fn severity_thresholds_are_inclusive() {
        let p = WarningParams::default();
        assert_eq!(
            severity(&predicted(10.0, 50.0), 5.0, &p),
            WarningLevel::Yellow
        );
        assert_eq!(
            severity(&predicted(6.0, 30.0), 5.0, &p),
            WarningLevel::Orange
        );
        // a_min exactly a_brake is not Red
        assert_eq!(
            severity(&predicted(1.0, 12.0), 12.0, &p),
            WarningLevel::Orange
        );
    }

    #[test]
    fn severity_without_collision_is_none() {
        let p = WarningParams::default();
        let mut r = predicted(1.0, 5.0);
        r.collision_predicted = false;
        assert_eq!(severity(&r, 30.0, &p), WarningLevel::None);
        let r = PredictionResult {
            ttz_vehicle_s: None,
            ..predicted(1.0, 5.0)
        };
        assert_eq!(severity(&r, 30.0, &p), WarningLevel::None);
    }

    #[test]
    fn reaction_time_moves_red_boundary() {
        let mut p = WarningParams::default();
        // 10 m/s over 10 m needs 5 m/s^2: not Red without reaction time
        assert_eq!(
            severity(&predicted(1.0, 10.0), 10.0, &p),
            WarningLevel::Orange
        );
        p.reaction_time_s = 0.5;
        // only 5 m usable: 10 m/s^2
        assert_eq!(severity(&predicted(1.0, 10.0), 10.0, &p), WarningLevel::Red);
    }

    #[test]
    fn level_tokens() {
        let tokens: Vec<_> = WarningLevel::ALL.iter().map(|l| l.to_string()).collect();
        assert_eq!(tokens, ["none", "yellow", "orange", "red"]);
        assert_eq!(
            serde_json::to_string(&WarningLevel::Orange).unwrap(),
            "\"orange\""
        );
        assert_eq!("red".parse::<WarningLevel>().unwrap(), WarningLevel::Red);
        assert!(WarningLevel::None < WarningLevel::Yellow);
        assert!(WarningLevel::Orange < WarningLevel::Red);
    }

    #[test]
    fn params_validation() {
        assert!(WarningParams::default().violations().is_empty());
        let p = WarningParams {
            yellow_ttz_s: 5.0,
            orange_ttz_s: 6.0,
            a_brake_mps2: 0.0,
            ..WarningParams::default()
        };
        assert_eq!(p.violations().len(), 2);
    }

    fn none() -> Assessment {
        Assessment::Current(PredictionResult::default())
    }

    fn yellow() -> Assessment {
        Assessment::Current(predicted(8.0, 80.0))
    }

    #[test]
    fn hold_delays_de_escalation() {
        let mut m = WarningStateMachine::new(WarningParams::default());
        assert_eq!(
            m.warning_step(&yellow(), 10.0, 0).unwrap(),
            WarningLevel::Yellow
        );
        assert_eq!(
            m.warning_step(&none(), 10.0, 200).unwrap(),
            WarningLevel::Yellow
        );
        assert_eq!(
            m.warning_step(&none(), 10.0, 999).unwrap(),
            WarningLevel::Yellow
        );
        assert_eq!(
            m.warning_step(&none(), 10.0, 1000).unwrap(),
            WarningLevel::None
        );
    }

    #[test]
    fn escalation_is_immediate() {
        let mut m = WarningStateMachine::new(WarningParams::default());
        m.warning_step(&yellow(), 10.0, 0).unwrap();
        let red = Assessment::Current(predicted(1.5, 30.0));
        assert_eq!(m.warning_step(&red, 20.0, 50).unwrap(), WarningLevel::Red);
    }

    #[test]
    fn staleness_decays_to_none() {
        let mut m = WarningStateMachine::new(WarningParams::default());
        m.warning_step(&yellow(), 10.0, 0).unwrap();
        assert_eq!(
            m.warning_step(&Assessment::Stale, 10.0, 1500).unwrap(),
            WarningLevel::Yellow
        );
        assert_eq!(
            m.warning_step(&Assessment::Stale, 10.0, 2000).unwrap(),
            WarningLevel::Yellow
        );
        assert_eq!(
            m.warning_step(&Assessment::Stale, 10.0, 2050).unwrap(),
            WarningLevel::None
        );
    }

    #[test]
    fn stale_without_history_is_none() {
        let mut m = WarningStateMachine::new(WarningParams::default());
        assert_eq!(
            m.warning_step(&Assessment::Stale, 10.0, 0).unwrap(),
            WarningLevel::None
        );
    }

    #[test]
    fn clock_regression_is_rejected() {
        let mut m = WarningStateMachine::new(WarningParams::default());
        m.warning_step(&none(), 0.0, 100).unwrap();
        assert!(matches!(
            m.warning_step(&none(), 0.0, 99),
            Err(WarningError::ClockRegression { .. })
        ));
        assert!(m.warning_step(&none(), 0.0, 100).is_ok());
    }

    fn level_to_assessment(l: WarningLevel) -> (Assessment, f64) {
        match l {
            WarningLevel::None => (none(), 10.0),
            WarningLevel::Yellow => (yellow(), 10.0),
            WarningLevel::Orange => (Assessment::Current(predicted(5.0, 50.0)), 10.0),
            WarningLevel::Red => (Assessment::Current(predicted(1.5, 30.0)), 20.0),
        }
    }

    proptest! {
        #[test]
        fn never_drops_within_hold_of_increase(
            seq in prop::collection::vec((0usize..4, 0u64..400, any::<bool>()), 1..80),
            hold in 0u64..2000,
        ) {
            let params = WarningParams { hold_ms: hold, ..WarningParams::default() };
            let mut m = WarningStateMachine::new(params);
            let mut now = 0;
            let mut prev = WarningLevel::None;
            let mut last_increase = 0;
            for (lvl, dt, stale) in seq {
                now += dt;
                let (a, v) = level_to_assessment(WarningLevel::ALL[lvl]);
                let a = if stale { Assessment::Stale } else { a };
                let out = m.warning_step(&a, v, now).unwrap();
                if out > prev {
                    last_increase = now;
                }
                if out < prev {
                    prop_assert!(now - last_increase >= hold);
                }
                prev = out;
            }
        }

        #[test]
        fn escalation_is_monotone_on_constant_approach(v in 2.0f64..30.0, start in 50.0f64..400.0) {
            let p = WarningParams::default();
            let dt = 0.05;
            let mut d = start;
            let mut prev = WarningLevel::None;
            while d > 0.0 {
                let level = severity(&predicted(d / v, d), v, &p);
                prop_assert!(level >= prev);
                prev = level;
                d -= v * dt;
            }
        }

        #[test]
        fn red_needs_a_predicted_collision(ttz_v in 0.0f64..20.0, d in 0.0f64..100.0, v in 0.0f64..40.0) {
            let mut r = predicted(ttz_v, d);
            r.collision_predicted = false;
            prop_assert_ne!(severity(&r, v, &WarningParams::default()), WarningLevel::Red);
        }
    }
}
